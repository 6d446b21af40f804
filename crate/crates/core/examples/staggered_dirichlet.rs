//! A bar with its ends held at the substrate displacement. From a homogeneous
//! phase field the alternate minimization stops after two iterations: the
//! displacement equals the affine datum and the phase field stays constant.

use craquelure::fem::{BoundaryCondition, FeSpace};
use craquelure::mesh::{Field, Mesh};
use craquelure::params::{LoadProgram, MaterialParams};
use craquelure::staggered::{IrreversibilityMode, Staggered, StaggeredOptions};

fn main() -> craquelure::Result<()> {
    let solver = Staggered::new(
        FeSpace::new(Mesh::interval(6.5, 130)?),
        MaterialParams::default(),
        LoadProgram::uniaxial(2.0, 0.1),
        BoundaryCondition::DirichletG,
        StaggeredOptions::default(),
    )?;
    let mesh = solver.space().mesh();
    let u0 = Field::constant(mesh, 1, 0.0);
    for (t, c) in [(0.5, 1.0), (1.3, 0.8), (2.0, 0.5)] {
        let v0 = Field::constant(mesh, 1, c);
        let (u, v, report) = solver.step(t, &u0, &v0, IrreversibilityMode::None)?;
        let gap = mesh
            .nodes()
            .iter()
            .zip(u.values())
            .map(|(x, ui)| (ui - t * x[0]).abs())
            .fold(0.0, f64::max);
        let (lo, hi) = v.values().iter().fold((f64::MAX, f64::MIN), |(a, b), &x| (a.min(x), b.max(x)));
        println!(
            "t={t} v0={c}: {} iterations, |u - g|_inf = {gap:.1e}, v in [{lo:.8}, {hi:.8}]",
            report.iterations
        );
    }
    Ok(())
}
