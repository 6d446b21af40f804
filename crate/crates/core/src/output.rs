//! Legacy ASCII VTK snapshots and CSV traces.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use crate::config::fmt_f64;
use crate::error::Result;
use crate::evolution::{EvolutionOutcome, EvolutionTrace, Snapshot};
use crate::fem::FeSpace;
use crate::mesh::Field;
use crate::params::MaterialParams;

pub const TRACE_HEADER: &str = "t,elastic,fracture,adhesion,total,iters,slope_u,slope_v,balance_residual,crack_count";
pub const EVENTS_HEADER: &str = "t,crack_count,centers";

/// Legacy VTK text with `v`, `u` and the nodal elastic density `W_density`.
pub fn vtk_string(space: &FeSpace, params: &MaterialParams, t: f64, u: &Field, v: &Field) -> Result<String> {
    let mesh = space.mesh();
    v.check(mesh, 1)?;
    let w = space.nodal_densities(u, params)?;
    let n = mesh.node_count();
    let ne = mesh.element_count();
    let per_cell = if mesh.dim() == 1 { 2 } else { 3 };
    let cell_type = if mesh.dim() == 1 { 3 } else { 5 };

    let mut s = String::new();
    let _ = write!(s, "# vtk DataFile Version 3.0\nphase field t={}\nASCII\nDATASET UNSTRUCTURED_GRID\n", fmt_f64(t));
    let _ = writeln!(s, "POINTS {n} double");
    for x in mesh.nodes() {
        let _ = writeln!(s, "{} {} {}", fmt_f64(x[0]), fmt_f64(x[1]), fmt_f64(0.0));
    }
    let _ = writeln!(s, "CELLS {ne} {}", ne * (per_cell + 1));
    for el in mesh.elements() {
        let ids: Vec<String> = el.iter().map(|i| i.to_string()).collect();
        let _ = writeln!(s, "{per_cell} {}", ids.join(" "));
    }
    let _ = writeln!(s, "CELL_TYPES {ne}");
    for _ in 0..ne {
        let _ = writeln!(s, "{cell_type}");
    }
    let _ = write!(s, "POINT_DATA {n}\nSCALARS v double 1\nLOOKUP_TABLE default\n");
    for &x in v.values() {
        let _ = writeln!(s, "{}", fmt_f64(x));
    }
    let _ = writeln!(s, "VECTORS u double");
    let uv = u.values();
    for i in 0..n {
        let (ux, uy) = if mesh.dim() == 1 {
            (uv[i], 0.0)
        } else {
            (uv[2 * i], uv[2 * i + 1])
        };
        let _ = writeln!(s, "{} {} {}", fmt_f64(ux), fmt_f64(uy), fmt_f64(0.0));
    }
    let _ = write!(s, "SCALARS W_density double 1\nLOOKUP_TABLE default\n");
    for x in w {
        let _ = writeln!(s, "{}", fmt_f64(x));
    }
    Ok(s)
}

/// File name of the snapshot at time `t`.
pub fn snapshot_name(t: f64) -> String {
    format!("snap_t{t:.4}.vtk")
}

pub fn trace_csv(trace: &EvolutionTrace) -> String {
    let mut s = format!("{TRACE_HEADER}\n");
    for r in &trace.steps {
        let e = &r.energy;
        let _ = writeln!(
            s,
            "{},{},{},{},{},{},{},{},{},{}",
            fmt_f64(r.t),
            fmt_f64(e.elastic),
            fmt_f64(e.fracture),
            fmt_f64(e.adhesion),
            fmt_f64(e.total),
            r.iterations,
            fmt_f64(r.slope_u),
            fmt_f64(r.slope_v),
            fmt_f64(r.balance_residual),
            r.crack_count
        );
    }
    s
}

/// Centers are `;`-separated inside one column.
pub fn events_csv(trace: &EvolutionTrace) -> String {
    let mut s = format!("{EVENTS_HEADER}\n");
    for e in &trace.events {
        let centers: Vec<String> = e.centers.iter().map(|&c| fmt_f64(c)).collect();
        let _ = writeln!(s, "{},{},{}", fmt_f64(e.t), e.crack_count, centers.join(";"));
    }
    s
}

pub fn write_snapshot(dir: &Path, space: &FeSpace, params: &MaterialParams, snap: &Snapshot) -> Result<PathBuf> {
    let path = dir.join(snapshot_name(snap.t));
    fs::write(&path, vtk_string(space, params, snap.t, &snap.u, &snap.v)?)?;
    Ok(path)
}

/// Writes `trace.csv`, `events.csv` and one VTK file per kept snapshot.
pub fn write_outcome(dir: &Path, space: &FeSpace, params: &MaterialParams, outcome: &EvolutionOutcome) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir)?;
    let mut written = vec![dir.join("trace.csv"), dir.join("events.csv")];
    fs::write(&written[0], trace_csv(&outcome.trace))?;
    fs::write(&written[1], events_csv(&outcome.trace))?;
    for snap in &outcome.snapshots {
        written.push(write_snapshot(dir, space, params, snap)?);
    }
    Ok(written)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::Mesh;

    #[test]
    fn vtk_layout() {
        let space = FeSpace::new(Mesh::rectangle(1.0, 1.0, 2, 1).unwrap());
        let mesh = space.mesh();
        let u = Field::from_fn(mesh, 2, |x| [0.1 * x[0], 0.0]);
        let v = Field::constant(mesh, 1, 1.0);
        let s = vtk_string(&space, &MaterialParams::default(), 0.5, &u, &v).unwrap();
        assert!(s.starts_with("# vtk DataFile Version 3.0\n"));
        assert!(s.contains("POINTS 6 double\n"));
        assert!(s.contains("CELLS 4 16\n"));
        assert!(s.contains("VECTORS u double\n"));
        assert!(s.contains("SCALARS W_density double 1\n"));
        assert!(s.contains("1.0000000000000000e0\n"));
    }

    #[test]
    fn vtk_interval_uses_lines() {
        let space = FeSpace::new(Mesh::interval(1.0, 4).unwrap());
        let mesh = space.mesh();
        let u = Field::constant(mesh, 1, 0.0);
        let v = Field::constant(mesh, 1, 1.0);
        let s = vtk_string(&space, &MaterialParams::default(), 0.0, &u, &v).unwrap();
        assert!(s.contains("CELLS 4 12\n2 0 1\n"));
        assert!(s.contains("CELL_TYPES 4\n3\n"));
    }

    #[test]
    fn snapshot_names() {
        assert_eq!(snapshot_name(3.1), "snap_t3.1000.vtk");
        assert_eq!(snapshot_name(0.1 * 3.0), "snap_t0.3000.vtk");
    }
}
