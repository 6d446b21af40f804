//! Closed-form predictions for a bar of half-length `L` on an elastic foundation:
//! transition times to `m` equally spaced cracks, the dyadic halving sequence,
//! and the energetically preferred crack count as the load grows.
//!
//! ```text
//! cargo run --example analytic_toolkit -- 12.5
//! ```

use craquelure::analytic1d::{self, Bar1DParams, DEFAULT_M_MAX};

fn main() -> craquelure::Result<()> {
    let l: f64 = std::env::args().nth(1).map_or(6.5, |a| a.parse().expect("L must be a number"));
    let p = Bar1DParams::reference(l);

    println!("kappa    = {:.7}", analytic1d::decay_rate(&p));
    println!("F_hat(L) = {:.7}", analytic1d::f_hat(l, &p));
    println!("Delta2   = {:.7}", analytic1d::delta2(l, &p));

    println!("\n m   t_m");
    for m in 1..=8 {
        println!("{m:>2}   {:.6}", analytic1d::critical_time(l, m, &p)?);
    }

    println!("\nhalving sequence");
    for (k, t) in analytic1d::halving_times(l, 4, &p)?.iter().enumerate() {
        println!("  bar L/{:<2} cracks at t = {t:.6}", 1 << k);
    }

    println!("\n t     optimal m");
    for i in 0..=10 {
        let t = 0.5 * i as f64;
        println!("{t:>4.1}   {}", analytic1d::optimal_crack_count(t, l, &p, DEFAULT_M_MAX));
    }

    // a crack at the center costs less than any off-center one
    let (off, centered) = analytic1d::verify_centered_optimality(0.4 * l, 0.6 * l, &p);
    println!("\noff-center split {off:.6} vs centered {centered:.6}");
    Ok(())
}
