//! Where does a long bar reach the strain that a short bar has at `x*`?
//! The distance to the end, `L - x`, settles to the layer width `b`.

use craquelure::analytic1d::{self, Bar1DParams, Layer1DQuery};

fn main() -> craquelure::Result<()> {
    let q = Layer1DQuery::new(0.5, 6.5)?;
    for beta in [0.15, 0.6] {
        let p = Bar1DParams::new(12.5, 1.0, beta, 1.0)?;
        println!("beta = {beta}: b = {:.5}", analytic1d::layer_width(&q, &p));
        for l in [8.0, 10.0, 12.5, 15.0, 20.0] {
            let x = analytic1d::layer_point(&q, l, &p)?;
            println!("  L = {l:>4}: x = {x:.5}, L - x = {:.5}", l - x);
        }
    }
    Ok(())
}
