//! Independent 1D evolutions over the adhesion constant, run in parallel.
//! Stiffer bonding gives earlier and denser cracking.

use craquelure::cli::{run_to_dir, sweep_configs};
use craquelure::config::EvolutionConfig;
use rayon::prelude::*;

const BAR: &str = "
[geometry] L=6.5 interval=true nx=260
[material] eps=0.1
[load]     kind=uniaxial t_end=3.0 dt=0.05
[scheme]   mode=per_step
[output]   dir=out/sweep
";

fn main() -> craquelure::Result<()> {
    let base = EvolutionConfig::parse(BAR)?;
    let runs = sweep_configs(&base, "beta=0.05,0.15,0.3,0.6")?;
    let results: Vec<_> = runs
        .par_iter()
        .map(|(label, cfg)| (label, run_to_dir(cfg, &base.output.dir.join(label))))
        .collect();
    for (label, result) in results {
        let out = result?;
        let first = out.trace.first_event().map_or(f64::NAN, |e| e.t);
        let last = out.trace.steps.last().map_or(0, |s| s.crack_count);
        println!("{label:<10} first crack t={first:.2}  final cracks {last}");
    }
    Ok(())
}
