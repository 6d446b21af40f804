//! Alternate minimization at a fixed load time.
//!
//! Starting from the previous state, each iteration solves the displacement
//! problem exactly with the phase field frozen and then the box-constrained
//! phase-field problem with the displacement frozen. Both half-steps are exact
//! minimizations of convex quadratics, so the energy never increases.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::fem::{BoundaryCondition, FeSpace};
use crate::mesh::Field;
use crate::params::{EnergyBreakdown, LoadProgram, MaterialParams};
use crate::solvers::{solve_box_qp_from, solve_spd_from, DEFAULT_LINEAR_TOL, DEFAULT_QP_TOL};
use crate::sparse::{dot, norm2, norm_inf, CsrMatrix, SparseSpd};

/// Which upper bound the phase field obeys during a time step.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum IrreversibilityMode {
    /// Only `0 <= v <= 1`.
    #[default]
    None,
    /// `v <= v_{k-1}`, the state at the previous time step.
    PerStep,
    /// `v <= v_{k,m-1}`, the previous alternate iterate.
    PerIteration,
}

impl fmt::Display for IrreversibilityMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            IrreversibilityMode::None => "none",
            IrreversibilityMode::PerStep => "per_step",
            IrreversibilityMode::PerIteration => "per_iteration",
        })
    }
}

impl FromStr for IrreversibilityMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "none" => Ok(IrreversibilityMode::None),
            "per_step" => Ok(IrreversibilityMode::PerStep),
            "per_iteration" => Ok(IrreversibilityMode::PerIteration),
            other => Err(Error::param("mode", format!("unknown irreversibility mode `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StaggeredOptions {
    /// Stop when `|v_{k,m} - v_{k,m-1}|_inf < stag_tol` ...
    pub stag_tol: f64,
    /// ... and the displacement slope at `(u_{k,m}, v_{k,m})`, relative to the
    /// slope of the load vector, is at most `eq_tol`.
    pub eq_tol: f64,
    pub max_m: usize,
    pub lin_tol: f64,
    pub qp_tol: f64,
}

impl Default for StaggeredOptions {
    fn default() -> Self {
        Self {
            stag_tol: 1e-4,
            eq_tol: 1e-8,
            max_m: 500,
            lin_tol: DEFAULT_LINEAR_TOL,
            qp_tol: DEFAULT_QP_TOL,
        }
    }
}

impl StaggeredOptions {
    pub fn validate(&self) -> Result<()> {
        for (field, value) in [
            ("stag_tol", self.stag_tol),
            ("eq_tol", self.eq_tol),
            ("lin_tol", self.lin_tol),
            ("qp_tol", self.qp_tol),
        ] {
            if !(value > 0.0 && value.is_finite()) {
                return Err(Error::param(field, format!("must be positive, got {value}")));
            }
        }
        if self.max_m == 0 {
            return Err(Error::param("max_m", "must be at least 1"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct StaggeredReport {
    pub iterations: usize,
    /// `F(u_{k,m}, v_{k,m})` for `m = 0..=iterations`.
    pub energies: Vec<f64>,
    /// `F(u_{k,m}, v_{k,m-1})` for `m = 1..=iterations`.
    pub half_energies: Vec<f64>,
    pub converged: bool,
    /// `|v_{k,m} - v_{k,m-1}|_inf` of the last iteration.
    pub last_increment: f64,
    /// Relative displacement slope at the returned state.
    pub relative_slope_u: f64,
    /// Inner solves that hit their iteration cap (their best iterate is used).
    pub solver_failures: usize,
}

/// Solver context for one mesh, material and load program.
#[derive(Debug, Clone)]
pub struct Staggered {
    space: FeSpace,
    params: MaterialParams,
    load: LoadProgram,
    bc: BoundaryCondition,
    options: StaggeredOptions,
    h1: CsrMatrix,
}

impl Staggered {
    pub fn new(
        space: FeSpace,
        params: MaterialParams,
        load: LoadProgram,
        bc: BoundaryCondition,
        options: StaggeredOptions,
    ) -> Result<Self> {
        options.validate()?;
        load.validate()?;
        let mut h1 = space.h1_vector_matrix();
        if bc == BoundaryCondition::DirichletG {
            // variations vanish on the boundary
            let dim = space.mesh().dim();
            for node in 0..space.mesh().node_count() {
                if space.mesh().tags(node).is_boundary() {
                    for c in 0..dim {
                        pin_row_col(&mut h1, node * dim + c);
                    }
                }
            }
        }
        Ok(Self {
            space,
            params,
            load,
            bc,
            options,
            h1,
        })
    }

    pub fn space(&self) -> &FeSpace {
        &self.space
    }

    pub fn params(&self) -> &MaterialParams {
        &self.params
    }

    pub fn load(&self) -> &LoadProgram {
        &self.load
    }

    pub fn bc(&self) -> BoundaryCondition {
        self.bc
    }

    pub fn options(&self) -> &StaggeredOptions {
        &self.options
    }

    pub fn energy(&self, t: f64, u: &Field, v: &Field) -> Result<EnergyBreakdown> {
        self.space.energy(t, u, v, &self.params, &self.load)
    }

    /// Gradient of the displacement energy, zeroed on constrained dofs.
    fn u_gradient(&self, system: &SparseSpd, u: &[f64]) -> Vec<f64> {
        let mut grad = system.residual(u);
        if self.bc == BoundaryCondition::DirichletG {
            let dim = self.space.mesh().dim();
            for node in 0..self.space.mesh().node_count() {
                if self.space.mesh().tags(node).is_boundary() {
                    for c in 0..dim {
                        grad[node * dim + c] = 0.0;
                    }
                }
            }
        }
        grad
    }

    /// `sqrt(g^T R^-1 g)` with `R` the discrete `H^1` inner product.
    fn dual_norm(&self, g: &[f64]) -> f64 {
        if g.iter().all(|&x| x == 0.0) {
            return 0.0;
        }
        let system = SparseSpd {
            matrix: self.h1.clone(),
            rhs: g.to_vec(),
        };
        let r = match solve_spd_from(&system, &vec![0.0; g.len()], 1e-12, 20 * g.len() + 100) {
            Ok((r, _)) => r,
            Err(Error::Convergence { best, .. }) => best,
            Err(e) => panic!("unexpected solver error {e}"),
        };
        dot(g, &r).max(0.0).sqrt()
    }

    /// Dual norm of the displacement gradient at `(u, v)` and the dual norm of the
    /// load vector, which serves as its scale.
    pub fn u_slope(&self, t: f64, u: &Field, v: &Field) -> Result<(f64, f64)> {
        let system = self.space.assemble_u_system(v, t, &self.params, &self.load, self.bc)?;
        u.check(self.space.mesh(), self.space.mesh().dim())?;
        Ok(self.u_slope_with(&system, u.values()))
    }

    fn u_slope_with(&self, system: &SparseSpd, u: &[f64]) -> (f64, f64) {
        let grad = self.u_gradient(system, u);
        let slope = self.dual_norm(&grad);
        let mut load = system.rhs.clone();
        if self.bc == BoundaryCondition::DirichletG {
            // the load seen by free dofs after elimination
            load = self.u_gradient(system, &vec![0.0; u.len()]);
        }
        (slope, self.dual_norm(&load))
    }

    /// Unilateral phase-field slope: Euclidean norm of the positive part of the
    /// `v`-gradient over nodes with `v > 0`, and `|b_v|_2` as its scale.
    pub fn v_slope(&self, u: &Field, v: &Field) -> Result<(f64, f64)> {
        let system = self.space.assemble_v_system(u, &self.params)?;
        v.check(self.space.mesh(), 1)?;
        let grad = system.residual(v.values());
        let slope = grad
            .iter()
            .zip(v.values())
            .filter(|(_, &vi)| vi > 0.0)
            .map(|(g, _)| g.max(0.0).powi(2))
            .sum::<f64>()
            .sqrt();
        Ok((slope, norm2(&system.rhs)))
    }

    pub fn step(&self, t: f64, u_prev: &Field, v_prev: &Field, mode: IrreversibilityMode) -> Result<(Field, Field, StaggeredReport)> {
        self.step_observed(t, u_prev, v_prev, mode, |_, _, _| {})
    }

    /// As [`Staggered::step`], calling `observer(m, u_{k,m}, v_{k,m})` after every iteration.
    pub fn step_observed(
        &self,
        t: f64,
        u_prev: &Field,
        v_prev: &Field,
        mode: IrreversibilityMode,
        mut observer: impl FnMut(usize, &[f64], &[f64]),
    ) -> Result<(Field, Field, StaggeredReport)> {
        let mesh = self.space.mesh();
        u_prev.check(mesh, mesh.dim())?;
        v_prev.check(mesh, 1)?;
        if let Some(bad) = v_prev.values().iter().find(|x| !(0.0..=1.0).contains(*x)) {
            return Err(Error::param("v", format!("previous phase field value {bad} outside [0, 1]")));
        }
        let opts = &self.options;
        let n = mesh.node_count();
        let lower = vec![0.0; n];
        let mut upper = match mode {
            IrreversibilityMode::None => vec![1.0; n],
            IrreversibilityMode::PerStep | IrreversibilityMode::PerIteration => v_prev.values().to_vec(),
        };

        let mut u = u_prev.values().to_vec();
        let mut v = v_prev.values().to_vec();
        let mut report = StaggeredReport::default();
        let mut v_field = v_prev.clone();
        let mut u_field = u_prev.clone();
        report.energies.push(self.energy(t, &u_field, &v_field)?.total);

        let mut u_system = self.space.assemble_u_system(&v_field, t, &self.params, &self.load, self.bc)?;
        let lin_cap = 20 * u.len() + 100;
        let qp_cap = 200 * n + 1000;

        for m in 1..=opts.max_m {
            u = match solve_spd_from(&u_system, &u, opts.lin_tol, lin_cap) {
                Ok((x, _)) => x,
                Err(Error::Convergence { best, .. }) => {
                    report.solver_failures += 1;
                    best
                }
                Err(e) => return Err(e),
            };
            u_field.values_mut().copy_from_slice(&u);
            report.half_energies.push(self.energy(t, &u_field, &v_field)?.total);

            let v_system = self.space.assemble_v_system(&u_field, &self.params)?;
            let v_new = match solve_box_qp_from(&v_system, &lower, &upper, &v, opts.qp_tol, qp_cap) {
                Ok((x, _)) => x,
                Err(Error::Convergence { best, .. }) => {
                    report.solver_failures += 1;
                    best
                }
                Err(e) => return Err(e),
            };
            let increment = v.iter().zip(&v_new).fold(0.0f64, |acc, (a, b)| acc.max((a - b).abs()));
            v = v_new;
            v_field.values_mut().copy_from_slice(&v);
            if mode == IrreversibilityMode::PerIteration {
                upper.copy_from_slice(&v);
            }
            report.energies.push(self.energy(t, &u_field, &v_field)?.total);
            report.iterations = m;
            report.last_increment = increment;
            observer(m, &u, &v);

            u_system = self.space.assemble_u_system(&v_field, t, &self.params, &self.load, self.bc)?;
            if increment < opts.stag_tol {
                let (slope, scale) = self.u_slope_with(&u_system, &u);
                report.relative_slope_u = relative(slope, scale);
                if report.relative_slope_u <= opts.eq_tol {
                    report.converged = true;
                    break;
                }
            }
        }
        if !report.converged {
            let (slope, scale) = self.u_slope_with(&u_system, &u);
            report.relative_slope_u = relative(slope, scale);
        }
        Ok((u_field, v_field, report))
    }
}

fn relative(slope: f64, scale: f64) -> f64 {
    if scale > 0.0 {
        slope / scale
    } else {
        slope
    }
}

fn pin_row_col(m: &mut CsrMatrix, i: usize) {
    let cols = m.row(i).0.to_vec();
    for c in cols {
        let k = m.position(i, c).expect("pattern entry");
        let kt = m.position(c, i).expect("symmetric pattern");
        let diag = c == i;
        m.values_mut()[k] = if diag { 1.0 } else { 0.0 };
        m.values_mut()[kt] = if diag { 1.0 } else { 0.0 };
    }
}

/// Sup norm of the difference between two vectors.
pub fn sup_distance(a: &[f64], b: &[f64]) -> f64 {
    let d: Vec<f64> = a.iter().zip(b).map(|(x, y)| x - y).collect();
    norm_inf(&d)
}
