//! Equibiaxial substrate stretch on a square film, written as VTK snapshots
//! for a viewer. Pass a coarser `h` to trade fidelity for speed.
//!
//! ```text
//! cargo run --release --example biaxial -- 0.2
//! ```

use craquelure::cli::run_to_dir;
use craquelure::config::EvolutionConfig;

fn main() -> craquelure::Result<()> {
    let mut cfg = EvolutionConfig::parse(include_str!("../configs/biaxial.cfg"))?;
    if let Some(h) = std::env::args().nth(1) {
        cfg.set("geometry", "h", &h).map_err(|m| craquelure::Error::Domain(m))?;
        cfg.validate()?;
    }
    let outcome = run_to_dir(&cfg, &cfg.output.dir)?;
    for s in outcome.trace.steps.iter().step_by(5) {
        println!(
            "t={:.1} elastic={:.4} fracture={:.4} adhesion={:.4} iterations={}",
            s.t, s.energy.elastic, s.energy.fracture, s.energy.adhesion, s.iterations
        );
    }
    let min_v = outcome.final_state.v.values().iter().cloned().fold(1.0, f64::min);
    println!("min v at t_end: {min_v:.4}; snapshots in {}", cfg.output.dir.display());
    Ok(())
}
