//! P1 displacement solve on the bar against the closed-form solution,
//! with the observed convergence order under mesh halving.

use craquelure::analytic1d::{u_continuous, Bar1DParams};
use craquelure::fem::{solve_displacement, BoundaryCondition, FeSpace};
use craquelure::mesh::{Field, Mesh};
use craquelure::params::{LoadProgram, MaterialInputs, MaterialParams};

fn main() -> craquelure::Result<()> {
    let l = 6.5;
    let params = MaterialParams::new(MaterialInputs {
        young: 1.0,
        adhesion: 0.15,
        eta: 0.0,
        ..Default::default()
    })?;
    let bar = Bar1DParams::new(l, params.young(), params.adhesion(), params.toughness())?;
    let load = LoadProgram::uniaxial(1.0, 1.0);

    let mut previous: Option<f64> = None;
    println!("   n   max nodal error   order");
    for n in [40, 80, 160, 320, 640] {
        let space = FeSpace::new(Mesh::interval(l, n)?);
        let v = Field::constant(space.mesh(), 1, 1.0);
        let u = solve_displacement(&space, &v, 1.0, &params, &load, BoundaryCondition::Neumann, 1e-11)?;
        let err = space
            .mesh()
            .nodes()
            .iter()
            .zip(u.values())
            .map(|(x, ui)| (ui - u_continuous(1.0, x[0], &bar)).abs())
            .fold(0.0, f64::max);
        let order = previous.map_or(String::from("-"), |e| format!("{:.3}", (e / err).log2()));
        println!("{n:>4}   {err:.3e}         {order}");
        previous = Some(err);
    }
    Ok(())
}
