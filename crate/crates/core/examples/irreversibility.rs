//! The same loading with and without the irreversibility box. Under
//! `per_step` the phase field never heals; without it, it may.

use craquelure::config::EvolutionConfig;
use craquelure::evolution::run_evolution;
use craquelure::staggered::IrreversibilityMode;

const SMALL_FILM: &str = "
[geometry] L=3.0 H=1.0 nx=60 ny=20
[material] eps=0.25
[load]     kind=uniaxial t_end=3.0 dt=0.1
";

fn main() -> craquelure::Result<()> {
    for mode in [IrreversibilityMode::None, IrreversibilityMode::PerStep, IrreversibilityMode::PerIteration] {
        let mut cfg = EvolutionConfig::parse(SMALL_FILM)?;
        cfg.scheme.mode = mode;
        let solver = cfg.solver()?;
        let out = run_evolution(&solver, &cfg.evolution_options(), |_, _, _| {})?;
        let healing = out.trace.steps.iter().map(|s| s.max_v_increase).fold(f64::MIN, f64::max);
        let last = out.trace.steps.last().expect("at least one step");
        let first = out.trace.first_event().map_or(f64::NAN, |e| e.t);
        println!(
            "{mode:>13}: first crack t={first:.1}, final {} crack(s) {:.2?}, fracture energy {:.4}, max v increase {healing:.2e}",
            last.crack_count, last.centers, last.energy.fracture
        );
    }
    Ok(())
}
