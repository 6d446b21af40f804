//! Wider film: compare the first-generation crack spacing with the boundary
//! layer prediction `2 (L - x)`.
//!
//! ```text
//! cargo run --release --example crack_spacing
//! ```

use craquelure::analytic1d::{self, Bar1DParams, Layer1DQuery};
use craquelure::cli::{load_config, run_to_dir};

fn main() -> craquelure::Result<()> {
    let cfg = load_config(concat!(env!("CARGO_MANIFEST_DIR"), "/configs/paper_L12.5.cfg").as_ref())?;
    let m = &cfg.material;
    let bar = Bar1DParams::new(cfg.geometry.half_length, m.young, m.adhesion, m.toughness)?;
    let q = Layer1DQuery::new(0.5, 6.5)?;
    let b = cfg.geometry.half_length - analytic1d::layer_point(&q, cfg.geometry.half_length, &bar)?;

    let outcome = run_to_dir(&cfg, &cfg.output.dir)?;
    for e in &outcome.trace.events {
        let gaps: Vec<String> = e.centers.windows(2).map(|w| format!("{:.2}", w[1] - w[0])).collect();
        println!("t = {:.1}: {} cracks, gaps [{}]", e.t, e.crack_count, gaps.join(", "));
    }
    println!("boundary layer distance L - x = {b:.3}");
    Ok(())
}
