//! Linear and bound-constrained quadratic solvers for the assembled SPD systems.
//!
//! [`solve_spd`] is conjugate gradients with a Jacobi preconditioner.
//! [`solve_box_qp`] minimizes `0.5 x^T A x - b^T x` over `lower <= x <= upper`
//! with a modified proportioning / reduced gradient projection scheme: conjugate
//! gradient steps on the free set while the chopped gradient is small,
//! proportioning steps that release bounds otherwise, and a fixed-step gradient
//! projection whenever a CG step would leave the box. Every step decreases the
//! objective, and the method stops on the KKT conditions.

use crate::error::{Error, Result};
use crate::sparse::{dot, norm2, norm_inf, SparseSpd};

pub const DEFAULT_LINEAR_TOL: f64 = 1e-10;
pub const DEFAULT_QP_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct SolveReport {
    pub iterations: usize,
    /// Relative residual `|Ax - b| / |b|` for linear solves; scaled KKT residual for the QP.
    pub final_residual: f64,
    /// Number of components at a bound (QP only).
    pub active_set_size: usize,
}

pub fn solve_spd(system: &SparseSpd, tol: f64, max_iter: usize) -> Result<(Vec<f64>, SolveReport)> {
    solve_spd_from(system, &vec![0.0; system.dim()], tol, max_iter)
}

/// Preconditioned CG from the initial guess `x0`.
pub fn solve_spd_from(
    system: &SparseSpd,
    x0: &[f64],
    tol: f64,
    max_iter: usize,
) -> Result<(Vec<f64>, SolveReport)> {
    let n = system.dim();
    let a = &system.matrix;
    let b = &system.rhs;
    let b_norm = norm2(b);
    if b_norm == 0.0 {
        return Ok((vec![0.0; n], SolveReport::default()));
    }
    let inv_diag: Vec<f64> = a
        .diagonal()
        .iter()
        .map(|&d| if d > 0.0 { 1.0 / d } else { 1.0 })
        .collect();

    let mut x = x0.to_vec();
    let mut r = system.residual(&x);
    r.iter_mut().for_each(|ri| *ri = -*ri);
    let mut iterations = 0;
    let mut ap = vec![0.0; n];
    loop {
        let mut res = norm2(&r) / b_norm;
        if res <= tol {
            return Ok((
                x,
                SolveReport {
                    iterations,
                    final_residual: res,
                    active_set_size: 0,
                },
            ));
        }
        let mut z: Vec<f64> = r.iter().zip(&inv_diag).map(|(ri, di)| ri * di).collect();
        let mut p = z.clone();
        let mut rz = dot(&r, &z);
        while res > tol && iterations < max_iter {
            a.mul_vec_into(&p, &mut ap);
            let pap = dot(&p, &ap);
            if !(pap > 0.0) {
                break;
            }
            let alpha = rz / pap;
            for i in 0..n {
                x[i] += alpha * p[i];
                r[i] -= alpha * ap[i];
            }
            iterations += 1;
            res = norm2(&r) / b_norm;
            for i in 0..n {
                z[i] = r[i] * inv_diag[i];
            }
            let rz_new = dot(&r, &z);
            let beta = rz_new / rz;
            rz = rz_new;
            for i in 0..n {
                p[i] = z[i] + beta * p[i];
            }
        }
        // confirm against the true residual; recursive residuals drift
        r = system.residual(&x);
        r.iter_mut().for_each(|ri| *ri = -*ri);
        let true_res = norm2(&r) / b_norm;
        if true_res <= tol {
            continue;
        }
        if iterations >= max_iter || res > tol {
            return Err(Error::Convergence {
                solver: "conjugate gradient",
                iterations,
                residual: true_res,
                best: x,
            });
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Bound {
    Free,
    Lower,
    Upper,
    Fixed,
}

struct BoxState<'a> {
    lower: &'a [f64],
    upper: &'a [f64],
}

impl BoxState<'_> {
    fn classify(&self, i: usize, x: f64) -> Bound {
        if self.upper[i] <= self.lower[i] {
            Bound::Fixed
        } else if x <= self.lower[i] {
            Bound::Lower
        } else if x >= self.upper[i] {
            Bound::Upper
        } else {
            Bound::Free
        }
    }

    fn project(&self, i: usize, x: f64) -> f64 {
        x.max(self.lower[i]).min(self.upper[i])
    }

    /// Free gradient and chopped gradient at `x`.
    fn split(&self, x: &[f64], g: &[f64], free: &mut [f64], chopped: &mut [f64]) {
        for i in 0..x.len() {
            let (f, c) = match self.classify(i, x[i]) {
                Bound::Free => (g[i], 0.0),
                Bound::Lower => (0.0, g[i].min(0.0)),
                Bound::Upper => (0.0, g[i].max(0.0)),
                Bound::Fixed => (0.0, 0.0),
            };
            free[i] = f;
            chopped[i] = c;
        }
    }

    /// Largest `alpha` with `x - alpha d` inside the box, and the blocking index.
    fn max_step(&self, x: &[f64], d: &[f64]) -> (f64, Option<usize>) {
        let mut best = (f64::INFINITY, None);
        for i in 0..x.len() {
            let step = if d[i] > 0.0 {
                (x[i] - self.lower[i]) / d[i]
            } else if d[i] < 0.0 {
                (x[i] - self.upper[i]) / d[i]
            } else {
                continue;
            };
            if step < best.0 {
                best = (step.max(0.0), Some(i));
            }
        }
        best
    }
}

/// KKT residual of `x` for the box QP: the projected gradient's sup norm.
pub fn box_kkt_residual(system: &SparseSpd, x: &[f64], lower: &[f64], upper: &[f64]) -> f64 {
    let g = system.residual(x);
    let bx = BoxState { lower, upper };
    let mut free = vec![0.0; x.len()];
    let mut chopped = vec![0.0; x.len()];
    bx.split(x, &g, &mut free, &mut chopped);
    free.iter().zip(&chopped).fold(0.0, |m, (f, c)| m.max((f + c).abs()))
}

pub fn solve_box_qp(
    system: &SparseSpd,
    lower: &[f64],
    upper: &[f64],
    tol: f64,
    max_iter: usize,
) -> Result<(Vec<f64>, SolveReport)> {
    solve_box_qp_from(system, lower, upper, &vec![0.0; system.dim()], tol, max_iter)
}

/// Box QP from the initial guess `x0` (projected onto the box first).
///
/// Stops when the projected gradient satisfies `|P g|_inf <= tol * max(|b|_inf, 1e-300)`.
pub fn solve_box_qp_from(
    system: &SparseSpd,
    lower: &[f64],
    upper: &[f64],
    x0: &[f64],
    tol: f64,
    max_iter: usize,
) -> Result<(Vec<f64>, SolveReport)> {
    let n = system.dim();
    if lower.len() != n || upper.len() != n || x0.len() != n {
        return Err(Error::SizeMismatch {
            expected: n,
            actual: lower.len().min(upper.len()).min(x0.len()),
        });
    }
    if let Some(i) = (0..n).find(|&i| !(lower[i] <= upper[i])) {
        return Err(Error::param(
            "bounds",
            format!("infeasible box at {i}: lower {} > upper {}", lower[i], upper[i]),
        ));
    }
    let scale = {
        let b = norm_inf(&system.rhs);
        if b > 0.0 {
            b
        } else {
            1.0
        }
    };
    // Jacobi scaling y = D^(1/2) x keeps the box a box and fixes the conditioning
    let s: Vec<f64> = system
        .matrix
        .diagonal()
        .iter()
        .map(|&d| if d > 0.0 { d.sqrt() } else { 1.0 })
        .collect();
    let mut matrix = system.matrix.clone();
    matrix.scale_symmetric(&s);
    let scaled = SparseSpd {
        matrix,
        rhs: (0..n).map(|i| system.rhs[i] / s[i]).collect(),
    };
    let lo: Vec<f64> = (0..n).map(|i| lower[i] * s[i]).collect();
    let hi: Vec<f64> = (0..n).map(|i| upper[i] * s[i]).collect();
    let y0: Vec<f64> = (0..n).map(|i| x0[i] * s[i]).collect();
    let unscale = |y: Vec<f64>| -> Vec<f64> {
        (0..n)
            .map(|i| {
                if y[i] <= lo[i] {
                    lower[i]
                } else if y[i] >= hi[i] {
                    upper[i]
                } else {
                    (y[i] / s[i]).max(lower[i]).min(upper[i])
                }
            })
            .collect()
    };
    match mprgp(&scaled, &lo, &hi, &y0, &s, tol * scale, scale, max_iter) {
        Ok((y, report)) => Ok((unscale(y), report)),
        Err(Error::Convergence {
            solver,
            iterations,
            residual,
            best,
        }) => Err(Error::Convergence {
            solver,
            iterations,
            residual,
            best: unscale(best),
        }),
        Err(e) => Err(e),
    }
}

/// Proportioning/expansion iteration on an already scaled system. `weights`
/// map the scaled gradient back to the original one for the stopping test.
#[allow(clippy::too_many_arguments)]
fn mprgp(
    system: &SparseSpd,
    lower: &[f64],
    upper: &[f64],
    x0: &[f64],
    weights: &[f64],
    threshold: f64,
    scale: f64,
    max_iter: usize,
) -> Result<(Vec<f64>, SolveReport)> {
    let n = system.dim();
    let a = &system.matrix;
    let bx = BoxState { lower, upper };
    let step = 1.9 / a.norm_inf().max(f64::MIN_POSITIVE);
    // proportioning parameter: release bounds once the chopped gradient dominates
    let gamma2 = 1.0;

    let mut x: Vec<f64> = (0..n).map(|i| bx.project(i, x0[i])).collect();
    let mut g = system.residual(&x);
    let mut free = vec![0.0; n];
    let mut chopped = vec![0.0; n];
    bx.split(&x, &g, &mut free, &mut chopped);
    let mut p = free.clone();
    let mut ap = vec![0.0; n];
    let mut iterations = 0;

    let kkt = |free: &[f64], chopped: &[f64]| {
        (0..free.len()).fold(0.0, |m: f64, i| m.max((free[i] + chopped[i]).abs() * weights[i]))
    };

    loop {
        let mut residual = kkt(&free, &chopped);
        if residual <= threshold {
            // verify against a freshly computed gradient
            g = system.residual(&x);
            bx.split(&x, &g, &mut free, &mut chopped);
            residual = kkt(&free, &chopped);
            if residual <= threshold {
                let active = (0..n).filter(|&i| bx.classify(i, x[i]) != Bound::Free).count();
                return Ok((
                    x,
                    SolveReport {
                        iterations,
                        final_residual: residual / scale,
                        active_set_size: active,
                    },
                ));
            }
            p.copy_from_slice(&free);
        }
        if iterations >= max_iter {
            return Err(Error::Convergence {
                solver: "box QP",
                iterations,
                residual: residual / scale,
                best: x,
            });
        }
        iterations += 1;

        let chopped2 = dot(&chopped, &chopped);
        let free2 = dot(&free, &free);
        if chopped2 <= gamma2 * free2 {
            a.mul_vec_into(&p, &mut ap);
            let pap = dot(&p, &ap);
            if !(pap > 0.0) {
                p.copy_from_slice(&free);
                continue;
            }
            let alpha_cg = dot(&g, &p) / pap;
            let (alpha_f, blocking) = bx.max_step(&x, &p);
            if alpha_cg <= alpha_f {
                for i in 0..n {
                    x[i] -= alpha_cg * p[i];
                    g[i] -= alpha_cg * ap[i];
                }
                bx.split(&x, &g, &mut free, &mut chopped);
                let beta = dot(&free, &ap) / pap;
                for i in 0..n {
                    p[i] = free[i] - beta * p[i];
                }
            } else {
                // expansion: go to the boundary, then a projected gradient step
                for i in 0..n {
                    x[i] = bx.project(i, x[i] - alpha_f * p[i]);
                }
                if let Some(i) = blocking {
                    x[i] = if p[i] > 0.0 { lower[i] } else { upper[i] };
                }
                g = system.residual(&x);
                bx.split(&x, &g, &mut free, &mut chopped);
                for i in 0..n {
                    x[i] = bx.project(i, x[i] - step * free[i]);
                }
                g = system.residual(&x);
                bx.split(&x, &g, &mut free, &mut chopped);
                p.copy_from_slice(&free);
            }
        } else {
            // proportioning: move off the bounds along the chopped gradient
            let d = chopped.clone();
            a.mul_vec_into(&d, &mut ap);
            let dad = dot(&d, &ap);
            let mut alpha = if dad > 0.0 { chopped2 / dad } else { f64::INFINITY };
            let (alpha_f, blocking) = bx.max_step(&x, &d);
            let capped = alpha > alpha_f;
            if capped {
                alpha = alpha_f;
            }
            for i in 0..n {
                x[i] = bx.project(i, x[i] - alpha * d[i]);
                g[i] -= alpha * ap[i];
            }
            if capped {
                if let Some(i) = blocking {
                    x[i] = if d[i] > 0.0 { lower[i] } else { upper[i] };
                }
                g = system.residual(&x);
            }
            bx.split(&x, &g, &mut free, &mut chopped);
            p.copy_from_slice(&free);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sparse::CsrMatrix;

    fn laplace_plus_mass(n: usize) -> SparseSpd {
        let mut dense = vec![0.0; n * n];
        for i in 0..n {
            dense[i * n + i] = 2.5;
            if i > 0 {
                dense[i * n + i - 1] = -1.0;
            }
            if i + 1 < n {
                dense[i * n + i + 1] = -1.0;
            }
        }
        SparseSpd {
            matrix: CsrMatrix::from_dense(n, &dense),
            rhs: (0..n).map(|i| ((i as f64) * 0.7).sin()).collect(),
        }
    }

    #[test]
    fn cg_zero_rhs_is_immediate() {
        let mut s = laplace_plus_mass(10);
        s.rhs.iter_mut().for_each(|b| *b = 0.0);
        let (x, rep) = solve_spd(&s, 1e-10, 100).unwrap();
        assert!(x.iter().all(|&v| v == 0.0));
        assert_eq!(rep.iterations, 0);
    }

    #[test]
    fn cg_scaled_identity() {
        let n = 6;
        let mut dense = vec![0.0; n * n];
        for i in 0..n {
            dense[i * n + i] = 0.25;
        }
        let s = SparseSpd {
            matrix: CsrMatrix::from_dense(n, &dense),
            rhs: vec![1.0, -2.0, 3.0, 0.5, 0.0, 7.0],
        };
        let (x, rep) = solve_spd(&s, 1e-12, 10).unwrap();
        for (xi, bi) in x.iter().zip(&s.rhs) {
            assert!((xi - 4.0 * bi).abs() < 1e-12);
        }
        assert!(rep.final_residual <= 1e-12);
    }

    #[test]
    fn cg_reports_non_convergence_with_iterate() {
        let s = laplace_plus_mass(200);
        match solve_spd(&s, 1e-14, 2) {
            Err(Error::Convergence { iterations, best, .. }) => {
                assert_eq!(iterations, 2);
                assert_eq!(best.len(), 200);
            }
            other => panic!("expected convergence failure, got {other:?}"),
        }
    }

    #[test]
    fn qp_interior_solution_equals_linear_solve() {
        let s = laplace_plus_mass(30);
        let (x_lin, _) = solve_spd(&s, 1e-13, 1000).unwrap();
        let lo = vec![-10.0; 30];
        let hi = vec![10.0; 30];
        let (x, rep) = solve_box_qp(&s, &lo, &hi, 1e-12, 10_000).unwrap();
        assert_eq!(rep.active_set_size, 0);
        for (a, b) in x.iter().zip(&x_lin) {
            assert!((a - b).abs() < 1e-10);
        }
    }

    #[test]
    fn qp_point_box_is_forced() {
        let s = laplace_plus_mass(12);
        let zero = vec![0.0; 12];
        let (x, rep) = solve_box_qp(&s, &zero, &zero, 1e-10, 100).unwrap();
        assert!(x.iter().all(|&v| v == 0.0));
        assert_eq!(rep.active_set_size, 12);
    }

    #[test]
    fn qp_rejects_infeasible_bounds() {
        let s = laplace_plus_mass(3);
        let err = solve_box_qp(&s, &[0.0, 1.0, 0.0], &[1.0, 0.5, 1.0], 1e-10, 100).unwrap_err();
        assert!(matches!(err, Error::Parameter { field: "bounds", .. }));
    }

    #[test]
    fn qp_kkt_with_active_bounds() {
        let s = laplace_plus_mass(40);
        let lo = vec![0.0; 40];
        let hi = vec![0.3; 40];
        let (x, _) = solve_box_qp(&s, &lo, &hi, 1e-10, 10_000).unwrap();
        assert!(box_kkt_residual(&s, &x, &lo, &hi) <= 1e-10 * norm_inf(&s.rhs));
        assert!(x.iter().any(|&v| v == 0.0) && x.iter().any(|&v| v == 0.3));
    }

    #[test]
    fn qp_is_deterministic() {
        let s = laplace_plus_mass(25);
        let lo = vec![0.0; 25];
        let hi = vec![0.2; 25];
        let a = solve_box_qp(&s, &lo, &hi, 1e-10, 1000).unwrap().0;
        let b = solve_box_qp(&s, &lo, &hi, 1e-10, 1000).unwrap().0;
        assert_eq!(a, b);
    }
}
