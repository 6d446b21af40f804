//! The L = 6.5 film under uniaxial stretch: trace, events and VTK snapshots.
//!
//! ```text
//! cargo run --release --example dyadic_run -- configs/paper_L6.5.cfg out/L6.5
//! ```
//!
//! Takes a few minutes in release mode.

use std::path::PathBuf;

use craquelure::cli::{load_config, run_to_dir};

fn main() -> craquelure::Result<()> {
    let mut args = std::env::args().skip(1);
    let cfg_path = args.next().unwrap_or_else(|| concat!(env!("CARGO_MANIFEST_DIR"), "/configs/paper_L6.5.cfg").into());
    let cfg = load_config(cfg_path.as_ref())?;
    let dir = args.next().map_or_else(|| cfg.output.dir.clone(), PathBuf::from);

    let outcome = run_to_dir(&cfg, &dir)?;
    for e in &outcome.trace.events {
        let centers: Vec<String> = e.centers.iter().map(|c| format!("{c:.2}")).collect();
        println!("t = {:.1}: {} crack(s) at [{}]", e.t, e.crack_count, centers.join(", "));
    }
    let late = outcome.trace.steps.iter().filter(|s| !s.converged).count();
    println!("{late} step(s) hit the iteration cap; outputs in {}", dir.display());
    Ok(())
}
