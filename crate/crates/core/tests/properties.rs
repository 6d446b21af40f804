use craquelure::config::EvolutionConfig;
use craquelure::fem::{total_energy, BoundaryCondition, FeSpace};
use craquelure::mesh::{Field, Mesh};
use craquelure::params::{LoadProgram, MaterialInputs, MaterialParams, PlaneRegime};
use craquelure::solvers::{box_kkt_residual, solve_box_qp};
use craquelure::sparse::{CsrMatrix, SparseSpd};
use craquelure::staggered::{IrreversibilityMode, Staggered, StaggeredOptions};
use proptest::prelude::*;

fn small_mesh() -> Mesh {
    Mesh::rectangle(1.5, 0.75, 6, 3).unwrap()
}

fn fields(n: usize) -> impl Strategy<Value = (Vec<f64>, Vec<f64>)> {
    (prop::collection::vec(-0.5..0.5f64, 2 * n), prop::collection::vec(0.0..=1.0f64, n))
}

fn total(mesh: &Mesh, t: f64, u: &[f64], v: &[f64], p: &MaterialParams) -> f64 {
    let load = LoadProgram::uniaxial(1.0, 0.1);
    let u = Field::displacement(mesh, u.to_vec()).unwrap();
    let v = Field::phase(mesh, v.to_vec()).unwrap();
    total_energy(t, &u, &v, p, &load, mesh).unwrap().total
}

/// Random SPD matrix `B^T B + n I / 4` and rhs.
fn spd_system(n: usize) -> impl Strategy<Value = SparseSpd> {
    (prop::collection::vec(-1.0..1.0f64, n * n), prop::collection::vec(-2.0..2.0f64, n)).prop_map(move |(b, rhs)| {
        let mut a = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                a[i * n + j] = (0..n).map(|k| b[k * n + i] * b[k * n + j]).sum::<f64>();
            }
            a[i * n + i] += 0.25 * n as f64;
        }
        SparseSpd {
            matrix: CsrMatrix::from_dense(n, &a),
            rhs,
        }
    })
}

fn boxes(n: usize) -> impl Strategy<Value = (Vec<f64>, Vec<f64>)> {
    prop::collection::vec((-1.0..1.0f64, 0.0..1.5f64), n).prop_map(|pairs| pairs.iter().map(|&(l, w)| (l, l + w)).unzip())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn energy_is_separately_convex((u1, v1) in fields(28), (u2, v2) in fields(28), t in 0.0..3.0f64) {
        let mesh = small_mesh();
        let p = MaterialParams::default();
        let mid = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| 0.5 * (x + y)).collect::<Vec<_>>();
        let um = mid(&u1, &u2);
        let lhs = total(&mesh, t, &um, &v1, &p);
        let rhs = 0.5 * (total(&mesh, t, &u1, &v1, &p) + total(&mesh, t, &u2, &v1, &p));
        prop_assert!(lhs <= rhs + 1e-12 * rhs.abs().max(1.0));
        let vm = mid(&v1, &v2);
        let lhs = total(&mesh, t, &u1, &vm, &p);
        let rhs = 0.5 * (total(&mesh, t, &u1, &v1, &p) + total(&mesh, t, &u1, &v2, &p));
        prop_assert!(lhs <= rhs + 1e-12 * rhs.abs().max(1.0));
    }

    #[test]
    fn energy_decomposes((u, v) in fields(28), t in 0.0..3.0f64) {
        let mesh = small_mesh();
        let p = MaterialParams::default();
        let load = LoadProgram::uniaxial(1.0, 0.1);
        let e = total_energy(
            t,
            &Field::displacement(&mesh, u).unwrap(),
            &Field::phase(&mesh, v).unwrap(),
            &p,
            &load,
            &mesh,
        )
        .unwrap();
        prop_assert!(e.elastic >= 0.0 && e.fracture >= 0.0 && e.adhesion >= 0.0);
        prop_assert!((e.total - (e.elastic + e.fracture + e.adhesion)).abs() <= 1e-12 * e.total.max(1.0));
    }

    #[test]
    fn qp_beats_random_feasible_points(system in spd_system(6), (lower, upper) in boxes(6), draws in prop::collection::vec(prop::collection::vec(0.0..=1.0f64, 6), 100)) {
        let (x, _) = solve_box_qp(&system, &lower, &upper, 1e-12, 10_000).unwrap();
        let best = system.objective(&x);
        for d in &draws {
            let y: Vec<f64> = d.iter().zip(lower.iter().zip(&upper)).map(|(s, (l, u))| l + s * (u - l)).collect();
            prop_assert!(best <= system.objective(&y) + 1e-10);
        }
        // complementarity
        let r = system.residual(&x);
        let scale = system.rhs.iter().fold(1.0f64, |m, b| m.max(b.abs()));
        for i in 0..6 {
            prop_assert!((x[i] - lower[i]) * r[i].max(0.0) <= 1e-9 * scale);
            prop_assert!((upper[i] - x[i]) * (-r[i]).max(0.0) <= 1e-9 * scale);
        }
        prop_assert!(box_kkt_residual(&system, &x, &lower, &upper) <= 1e-10 * scale);
    }

    #[test]
    fn qp_is_deterministic(system in spd_system(5), (lower, upper) in boxes(5)) {
        let a = solve_box_qp(&system, &lower, &upper, 1e-10, 10_000).unwrap().0;
        let b = solve_box_qp(&system, &lower, &upper, 1e-10, 10_000).unwrap().0;
        prop_assert_eq!(a, b);
    }

    #[test]
    fn config_round_trips(
        l in 0.5..20.0f64,
        h in 0.5..5.0f64,
        nx in 1usize..400,
        e in 0.1..10.0f64,
        nu in 0.0..0.49f64,
        strain in any::<bool>(),
        beta in 0.01..2.0f64,
        eps in 0.01..1.0f64,
        dt in 0.01..0.5f64,
        a in prop::collection::vec(-2.0..2.0f64, 4),
        mode in 0usize..3,
        snaps in prop::collection::vec(0.0..1.0f64, 0..5),
    ) {
        let mut cfg = EvolutionConfig::default();
        cfg.geometry.half_length = l;
        cfg.geometry.half_height = h;
        cfg.geometry.nx = Some(nx);
        cfg.material = MaterialInputs {
            young: e,
            poisson: nu,
            regime: if strain { PlaneRegime::PlaneStrain } else { PlaneRegime::PlaneStress },
            adhesion: beta,
            eps,
            ..Default::default()
        };
        cfg.load = LoadProgram::affine([[a[0], a[1]], [a[2], a[3]]], 3.0, dt);
        cfg.scheme.mode = [IrreversibilityMode::None, IrreversibilityMode::PerStep, IrreversibilityMode::PerIteration][mode];
        cfg.output.snapshots = snaps.iter().map(|s| 3.0 * s).collect();
        prop_assert!(cfg.validate().is_ok());
        prop_assert_eq!(EvolutionConfig::parse(&cfg.serialize()).unwrap(), cfg);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn staggered_half_steps_descend(u in prop::collection::vec(-0.3..0.3f64, 2 * 28), v in prop::collection::vec(0.3..=1.0f64, 28), t in 0.5..2.5f64, mode in 0usize..3) {
        let solver = Staggered::new(
            FeSpace::new(small_mesh()),
            MaterialParams::default(),
            LoadProgram::uniaxial(3.0, 0.1),
            BoundaryCondition::Neumann,
            StaggeredOptions { max_m: 40, ..Default::default() },
        )
        .unwrap();
        let mesh = solver.space().mesh();
        let mode = [IrreversibilityMode::None, IrreversibilityMode::PerStep, IrreversibilityMode::PerIteration][mode];
        let u0 = Field::displacement(mesh, u).unwrap();
        let v0 = Field::phase(mesh, v).unwrap();
        let mut trail: Vec<Vec<f64>> = vec![v0.values().to_vec()];
        let (_, v_end, report) = solver
            .step_observed(t, &u0, &v0, mode, |_, _, v| trail.push(v.to_vec()))
            .unwrap();
        let scale = report.energies[0].abs().max(1.0);
        let tol = 10.0 * 1e-8 * scale;
        for m in 0..report.iterations {
            prop_assert!(report.half_energies[m] <= report.energies[m] + tol);
            prop_assert!(report.energies[m + 1] <= report.half_energies[m] + tol);
        }
        match mode {
            IrreversibilityMode::PerIteration => {
                for w in trail.windows(2) {
                    prop_assert!(w[1].iter().zip(&w[0]).all(|(a, b)| a <= b));
                }
            }
            IrreversibilityMode::PerStep => {
                prop_assert!(v_end.values().iter().zip(v0.values()).all(|(a, b)| a <= b));
            }
            IrreversibilityMode::None => {}
        }
    }
}
