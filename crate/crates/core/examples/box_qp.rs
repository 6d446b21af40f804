//! Bound-constrained quadratic program on a 1D Laplacian-plus-mass matrix.
//! Half the unconstrained minimizer pokes above the upper bound.

use craquelure::solvers::{box_kkt_residual, solve_box_qp, solve_spd, DEFAULT_LINEAR_TOL, DEFAULT_QP_TOL};
use craquelure::sparse::{CsrMatrix, SparseSpd};

fn main() -> craquelure::Result<()> {
    let n = 12;
    let mut dense = vec![0.0; n * n];
    for i in 0..n {
        dense[i * n + i] = 2.2;
        if i + 1 < n {
            dense[i * n + i + 1] = -1.0;
            dense[(i + 1) * n + i] = -1.0;
        }
    }
    let rhs: Vec<f64> = (0..n).map(|i| (i as f64 * 0.7).sin() + 0.4).collect();
    let system = SparseSpd {
        matrix: CsrMatrix::from_dense(n, &dense),
        rhs,
    };

    let (free, _) = solve_spd(&system, DEFAULT_LINEAR_TOL, 1000)?;
    let lower = vec![0.0; n];
    let upper = vec![1.0; n];
    let (x, report) = solve_box_qp(&system, &lower, &upper, DEFAULT_QP_TOL, 10_000)?;

    println!(" i   unconstrained   boxed");
    for i in 0..n {
        println!("{i:>2}   {:>12.6}   {:.6}", free[i], x[i]);
    }
    println!(
        "iterations {}, active bounds {}, KKT residual {:.2e}",
        report.iterations,
        report.active_set_size,
        box_kkt_residual(&system, &x, &lower, &upper)
    );
    Ok(())
}
