//! P1 finite element assembly of the two quadratic sub-problems and
//! quadrature evaluation of the phase-field energy.
//!
//! All integrands are polynomials of degree at most two on each element
//! (strains are elementwise constant), so the 3-point triangle rule and the
//! 2-point Gauss rule integrate them exactly. The assembled quadratic forms
//! therefore reproduce [`FeSpace::energy`] up to roundoff.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::mesh::{Field, Mesh};
use crate::params::{elastic_density, elastic_density_1d, EnergyBreakdown, LoadProgram, MaterialParams, Strain};
use crate::solvers::solve_spd;
use crate::sparse::{dot, CsrMatrix, SparseSpd};

/// Boundary condition of the displacement sub-problem.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum BoundaryCondition {
    /// Traction-free boundary.
    #[default]
    Neumann,
    /// `u = g(t)` on every boundary node.
    DirichletG,
}

impl fmt::Display for BoundaryCondition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            BoundaryCondition::Neumann => "neumann",
            BoundaryCondition::DirichletG => "dirichlet_g",
        })
    }
}

impl FromStr for BoundaryCondition {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "neumann" => Ok(BoundaryCondition::Neumann),
            "dirichlet_g" => Ok(BoundaryCondition::DirichletG),
            other => Err(Error::param("bc", format!("unknown boundary condition `{other}`"))),
        }
    }
}

// Quadrature points in barycentric coordinates; weights are fractions of the element measure.
const TRI_POINTS: [[f64; 3]; 3] = [
    [2.0 / 3.0, 1.0 / 6.0, 1.0 / 6.0],
    [1.0 / 6.0, 2.0 / 3.0, 1.0 / 6.0],
    [1.0 / 6.0, 1.0 / 6.0, 2.0 / 3.0],
];
const TRI_WEIGHTS: [f64; 3] = [1.0 / 3.0; 3];
const SEG_POINTS: [[f64; 3]; 2] = [
    [0.788_675_134_594_812_9, 0.211_324_865_405_187_1, 0.0],
    [0.211_324_865_405_187_1, 0.788_675_134_594_812_9, 0.0],
];
const SEG_WEIGHTS: [f64; 2] = [0.5; 2];

#[derive(Debug, Clone)]
struct ElementGeometry {
    measure: f64,
    /// Shape function gradients; only the first `dim + 1` entries are used.
    grads: [[f64; 2]; 3],
}

/// Mesh plus precomputed element geometry and sparsity patterns.
#[derive(Debug, Clone)]
pub struct FeSpace {
    mesh: Mesh,
    geometry: Vec<ElementGeometry>,
    scalar_pattern: CsrMatrix,
    vector_pattern: CsrMatrix,
    // per-element positions of local entries in the CSR value arrays
    scalar_slots: Vec<Vec<usize>>,
    vector_slots: Vec<Vec<usize>>,
    mass: CsrMatrix,
}

impl FeSpace {
    pub fn new(mesh: Mesh) -> Self {
        let geometry = element_geometry(&mesh);
        let n = mesh.node_count();
        let dim = mesh.dim();
        let mut neighbors: Vec<Vec<usize>> = vec![Vec::new(); n];
        for el in mesh.elements() {
            for &a in el {
                neighbors[a].extend_from_slice(el);
            }
        }
        for row in &mut neighbors {
            row.sort_unstable();
            row.dedup();
        }
        let scalar_pattern = CsrMatrix::from_pattern(&neighbors);
        let vector_rows: Vec<Vec<usize>> = (0..n * dim)
            .map(|row| {
                let node = row / dim;
                neighbors[node]
                    .iter()
                    .flat_map(|&b| (0..dim).map(move |c| b * dim + c))
                    .collect()
            })
            .collect();
        let vector_pattern = CsrMatrix::from_pattern(&vector_rows);

        let scalar_slots = mesh
            .elements()
            .map(|el| {
                let mut slots = Vec::with_capacity(el.len() * el.len());
                for &a in el {
                    for &b in el {
                        slots.push(scalar_pattern.position(a, b).expect("pattern covers element"));
                    }
                }
                slots
            })
            .collect();
        let vector_slots = mesh
            .elements()
            .map(|el| {
                let dofs: Vec<usize> = el.iter().flat_map(|&a| (0..dim).map(move |c| a * dim + c)).collect();
                let mut slots = Vec::with_capacity(dofs.len() * dofs.len());
                for &i in &dofs {
                    for &j in &dofs {
                        slots.push(vector_pattern.position(i, j).expect("pattern covers element"));
                    }
                }
                slots
            })
            .collect();

        let mut space = Self {
            mesh,
            geometry,
            scalar_pattern,
            vector_pattern,
            scalar_slots,
            vector_slots,
            mass: CsrMatrix::from_pattern(&[]),
        };
        space.mass = space.assemble_scalar(|_| 0.0, |_| 1.0);
        space
    }

    pub fn mesh(&self) -> &Mesh {
        &self.mesh
    }

    /// Degrees of freedom of the displacement.
    pub fn vector_dofs(&self) -> usize {
        self.mesh.node_count() * self.mesh.dim()
    }

    /// Consistent scalar mass matrix.
    pub fn mass(&self) -> &CsrMatrix {
        &self.mass
    }

    fn points(&self) -> (&'static [[f64; 3]], &'static [f64]) {
        if self.mesh.dim() == 1 {
            (&SEG_POINTS, &SEG_WEIGHTS)
        } else {
            (&TRI_POINTS, &TRI_WEIGHTS)
        }
    }

    /// Scalar matrix with elementwise coefficients: `stiff(e) * grad.grad + mass(e) * phi phi`.
    fn assemble_scalar(&self, stiff: impl Fn(usize) -> f64, mass_coef: impl Fn(usize) -> f64) -> CsrMatrix {
        let mut m = self.scalar_pattern.clone();
        let (points, weights) = self.points();
        let values = m.values_mut();
        for (e, el) in self.mesh.elements().enumerate() {
            let geo = &self.geometry[e];
            let k = el.len();
            let (cs, cm) = (stiff(e), mass_coef(e));
            let slots = &self.scalar_slots[e];
            for a in 0..k {
                for b in 0..k {
                    let mut mab = 0.0;
                    for (q, w) in points.iter().zip(weights) {
                        mab += w * q[a] * q[b];
                    }
                    let gab = geo.grads[a][0] * geo.grads[b][0] + geo.grads[a][1] * geo.grads[b][1];
                    values[slots[a * k + b]] += geo.measure * (cs * gab + cm * mab);
                }
            }
        }
        m
    }

    fn strain(&self, e: usize, u: &[f64]) -> Strain {
        let el = self.mesh.element(e);
        let grads = &self.geometry[e].grads;
        if self.mesh.dim() == 1 {
            let du: f64 = el.iter().zip(grads).map(|(&a, g)| u[a] * g[0]).sum();
            Strain::new(du, 0.0, 0.0)
        } else {
            let mut s = Strain::default();
            for (&a, g) in el.iter().zip(grads) {
                let (ux, uy) = (u[2 * a], u[2 * a + 1]);
                s.xx += ux * g[0];
                s.yy += uy * g[1];
                s.xy += 0.5 * (ux * g[1] + uy * g[0]);
            }
            s
        }
    }

    /// Elastic density `W(e(u))` on element `e`.
    pub fn element_density(&self, e: usize, u: &[f64], params: &MaterialParams) -> f64 {
        let s = self.strain(e, u);
        if self.mesh.dim() == 1 {
            elastic_density_1d(s.xx, params)
        } else {
            elastic_density(&s, params)
        }
    }

    /// Elementwise densities `W(e(u))`.
    pub fn densities(&self, u: &Field, params: &MaterialParams) -> Result<Vec<f64>> {
        u.check(&self.mesh, self.mesh.dim())?;
        Ok((0..self.mesh.element_count())
            .map(|e| self.element_density(e, u.values(), params))
            .collect())
    }

    /// Area-weighted nodal average of the element densities.
    pub fn nodal_densities(&self, u: &Field, params: &MaterialParams) -> Result<Vec<f64>> {
        let w = self.densities(u, params)?;
        let mut acc = vec![0.0; self.mesh.node_count()];
        let mut wsum = vec![0.0; self.mesh.node_count()];
        for (e, el) in self.mesh.elements().enumerate() {
            let m = self.geometry[e].measure;
            for &a in el {
                acc[a] += m * w[e];
                wsum[a] += m;
            }
        }
        Ok(acc.iter().zip(&wsum).map(|(a, s)| a / s).collect())
    }

    /// Substrate displacement `g(t)` interpolated at the nodes (exact: `g` is affine).
    pub fn load_field(&self, t: f64, load: &LoadProgram) -> Field {
        let dim = self.mesh.dim();
        Field::from_fn(&self.mesh, dim, |x| load.displacement(t, x))
    }

    fn mean_v_squared(&self, e: usize, v: &[f64], eta: f64) -> f64 {
        let el = self.mesh.element(e);
        let (points, weights) = self.points();
        points
            .iter()
            .zip(weights)
            .map(|(q, w)| {
                let vq: f64 = el.iter().enumerate().map(|(a, &n)| q[a] * v[n]).sum();
                w * (vq * vq + eta)
            })
            .sum()
    }

    /// Unconstrained displacement system `(K(v) + 2 beta M) u = 2 beta M g(t)`.
    fn displacement_operator(&self, v: &[f64], params: &MaterialParams) -> CsrMatrix {
        let dim = self.mesh.dim();
        let mut m = self.vector_pattern.clone();
        let (points, weights) = self.points();
        let (lambda, mu) = (params.lambda(), params.mu());
        let two_beta = 2.0 * params.adhesion();
        let values = m.values_mut();
        for (e, el) in self.mesh.elements().enumerate() {
            let geo = &self.geometry[e];
            let coef = self.mean_v_squared(e, v, params.eta()) * geo.measure;
            let k = el.len();
            let nd = k * dim;
            let slots = &self.vector_slots[e];
            for a in 0..k {
                for b in 0..k {
                    let mut mab = 0.0;
                    for (q, w) in points.iter().zip(weights) {
                        mab += w * q[a] * q[b];
                    }
                    mab *= two_beta * geo.measure;
                    let (ga, gb) = (geo.grads[a], geo.grads[b]);
                    if dim == 1 {
                        values[slots[a * nd + b]] += coef * params.young() * ga[0] * gb[0] + mab;
                    } else {
                        // B_a^T C B_b for the isotropic tensor
                        let kxx = (lambda + 2.0 * mu) * ga[0] * gb[0] + mu * ga[1] * gb[1];
                        let kxy = lambda * ga[0] * gb[1] + mu * ga[1] * gb[0];
                        let kyx = lambda * ga[1] * gb[0] + mu * ga[0] * gb[1];
                        let kyy = (lambda + 2.0 * mu) * ga[1] * gb[1] + mu * ga[0] * gb[0];
                        let (r, c) = (2 * a, 2 * b);
                        values[slots[r * nd + c]] += coef * kxx + mab;
                        values[slots[r * nd + c + 1]] += coef * kxy;
                        values[slots[(r + 1) * nd + c]] += coef * kyx;
                        values[slots[(r + 1) * nd + c + 1]] += coef * kyy + mab;
                    }
                }
            }
        }
        m
    }

    /// Applies the vector mass matrix to `x`.
    fn vector_mass_mul(&self, x: &[f64]) -> Vec<f64> {
        let dim = self.mesh.dim();
        let n = self.mesh.node_count();
        let mut out = vec![0.0; n * dim];
        for c in 0..dim {
            let comp: Vec<f64> = (0..n).map(|i| x[i * dim + c]).collect();
            let mc = self.mass.mul_vec(&comp);
            for i in 0..n {
                out[i * dim + c] = mc[i];
            }
        }
        out
    }

    fn dirichlet_dofs(&self) -> Vec<usize> {
        let dim = self.mesh.dim();
        (0..self.mesh.node_count())
            .filter(|&i| self.mesh.tags(i).is_boundary())
            .flat_map(|i| (0..dim).map(move |c| i * dim + c))
            .collect()
    }

    pub fn assemble_u_system(
        &self,
        v: &Field,
        t: f64,
        params: &MaterialParams,
        load: &LoadProgram,
        bc: BoundaryCondition,
    ) -> Result<SparseSpd> {
        v.check(&self.mesh, 1)?;
        let matrix = self.displacement_operator(v.values(), params);
        let g = self.load_field(t, load);
        let mut rhs = self.vector_mass_mul(g.values());
        rhs.iter_mut().for_each(|r| *r *= 2.0 * params.adhesion());
        let mut system = SparseSpd { matrix, rhs };
        if bc == BoundaryCondition::DirichletG {
            apply_dirichlet(&mut system, &self.dirichlet_dofs(), g.values());
        }
        Ok(system)
    }

    /// Phase-field system `(M_W + Gc/eps M + Gc eps K) v = Gc/eps M 1`.
    pub fn assemble_v_system(&self, u: &Field, params: &MaterialParams) -> Result<SparseSpd> {
        let w = self.densities(u, params)?;
        let (gc, eps) = (params.toughness(), params.eps());
        let matrix = self.assemble_scalar(|_| gc * eps, |e| w[e] + gc / eps);
        let ones = vec![1.0; self.mesh.node_count()];
        let rhs = self.mass.mul_vec(&ones).iter().map(|m| m * gc / eps).collect();
        Ok(SparseSpd { matrix, rhs })
    }

    /// Discrete `H^1` inner product matrix (mass plus stiffness) for vector fields.
    pub fn h1_vector_matrix(&self) -> CsrMatrix {
        let dim = self.mesh.dim();
        let scalar = self.assemble_scalar(|_| 1.0, |_| 1.0);
        let mut m = self.vector_pattern.clone();
        for row in 0..self.vector_dofs() {
            let (node, c) = (row / dim, row % dim);
            let (cols, vals) = scalar.row(node);
            for (&b, &val) in cols.iter().zip(vals) {
                let k = m.position(row, b * dim + c).expect("pattern covers scalar entries");
                m.values_mut()[k] = val;
            }
        }
        m
    }

    /// Gradient of the energy with respect to the nodal displacement.
    pub fn u_gradient(&self, t: f64, u: &Field, v: &Field, params: &MaterialParams, load: &LoadProgram) -> Result<Vec<f64>> {
        let system = self.assemble_u_system(v, t, params, load, BoundaryCondition::Neumann)?;
        u.check(&self.mesh, self.mesh.dim())?;
        Ok(system.residual(u.values()))
    }

    /// Gradient of the energy with respect to the nodal phase field.
    pub fn v_gradient(&self, u: &Field, v: &Field, params: &MaterialParams) -> Result<Vec<f64>> {
        v.check(&self.mesh, 1)?;
        let system = self.assemble_v_system(u, params)?;
        Ok(system.residual(v.values()))
    }

    /// Time derivative of the energy at fixed state, `-2 beta int (u - g(t)) . A x`.
    pub fn energy_time_derivative(&self, t: f64, u: &Field, params: &MaterialParams, load: &LoadProgram) -> Result<f64> {
        u.check(&self.mesh, self.mesh.dim())?;
        let g = self.load_field(t, load);
        let rate = self.load_field(1.0, load);
        let gap: Vec<f64> = u.values().iter().zip(g.values()).map(|(a, b)| a - b).collect();
        Ok(-2.0 * params.adhesion() * dot(rate.values(), &self.vector_mass_mul(&gap)))
    }

    /// Quadrature evaluation of the energy components, summed in element order.
    pub fn energy(
        &self,
        t: f64,
        u: &Field,
        v: &Field,
        params: &MaterialParams,
        load: &LoadProgram,
    ) -> Result<EnergyBreakdown> {
        evaluate_energy(&self.mesh, &self.geometry, t, u, v, params, load)
    }
}

fn element_geometry(mesh: &Mesh) -> Vec<ElementGeometry> {
    let nodes = mesh.nodes();
    (0..mesh.element_count())
        .map(|e| {
            let el = mesh.element(e);
            let measure = mesh.measure(e);
            let mut grads = [[0.0; 2]; 3];
            if mesh.dim() == 1 {
                grads[0] = [-1.0 / measure, 0.0];
                grads[1] = [1.0 / measure, 0.0];
            } else {
                let [a, b, c] = [nodes[el[0]], nodes[el[1]], nodes[el[2]]];
                let inv = 1.0 / (2.0 * measure);
                grads[0] = [(b[1] - c[1]) * inv, (c[0] - b[0]) * inv];
                grads[1] = [(c[1] - a[1]) * inv, (a[0] - c[0]) * inv];
                grads[2] = [(a[1] - b[1]) * inv, (b[0] - a[0]) * inv];
            }
            ElementGeometry { measure, grads }
        })
        .collect()
}

fn evaluate_energy(
    mesh: &Mesh,
    geometry: &[ElementGeometry],
    t: f64,
    u: &Field,
    v: &Field,
    params: &MaterialParams,
    load: &LoadProgram,
) -> Result<EnergyBreakdown> {
    let dim = mesh.dim();
    u.check(mesh, dim)?;
    v.check(mesh, 1)?;
    let (points, weights): (&[[f64; 3]], &[f64]) = if dim == 1 {
        (&SEG_POINTS, &SEG_WEIGHTS)
    } else {
        (&TRI_POINTS, &TRI_WEIGHTS)
    };
    let (uv, vv) = (u.values(), v.values());
    let nodes = mesh.nodes();
    let (gc, eps, beta, eta) = (params.toughness(), params.eps(), params.adhesion(), params.eta());
    let (mut elastic, mut fracture, mut adhesion) = (0.0, 0.0, 0.0);
    for (e, el) in mesh.elements().enumerate() {
        let geo = &geometry[e];
        let mut grad = [0.0; 2];
        let mut strain = Strain::default();
        for (a, &n) in el.iter().enumerate() {
            let g = geo.grads[a];
            grad[0] += vv[n] * g[0];
            grad[1] += vv[n] * g[1];
            if dim == 1 {
                strain.xx += uv[n] * g[0];
            } else {
                let (ux, uy) = (uv[2 * n], uv[2 * n + 1]);
                strain.xx += ux * g[0];
                strain.yy += uy * g[1];
                strain.xy += 0.5 * (ux * g[1] + uy * g[0]);
            }
        }
        let w = if dim == 1 {
            elastic_density_1d(strain.xx, params)
        } else {
            elastic_density(&strain, params)
        };
        let (mut el_q, mut fr_q, mut ad_q) = (0.0, 0.0, 0.0);
        for (q, wq) in points.iter().zip(weights) {
            let mut vq = 0.0;
            let mut xq = [0.0; 2];
            let mut uq = [0.0; 2];
            for (a, &n) in el.iter().enumerate() {
                vq += q[a] * vv[n];
                xq[0] += q[a] * nodes[n][0];
                xq[1] += q[a] * nodes[n][1];
                for c in 0..dim {
                    uq[c] += q[a] * uv[n * dim + c];
                }
            }
            let g = load.displacement(t, xq);
            let gap2: f64 = (0..dim).map(|c| (uq[c] - g[c]).powi(2)).sum();
            el_q += wq * (vq * vq + eta) * w;
            fr_q += wq * (vq - 1.0).powi(2) / eps;
            ad_q += wq * gap2;
        }
        let grad2 = grad[0] * grad[0] + grad[1] * grad[1];
        elastic += 0.5 * geo.measure * el_q;
        fracture += 0.5 * gc * geo.measure * (fr_q + eps * grad2);
        adhesion += beta * geo.measure * ad_q;
    }
    Ok(EnergyBreakdown::new(elastic, fracture, adhesion))
}

/// Energy of the state `(u, v)` at time `t` on `mesh`.
pub fn total_energy(
    t: f64,
    u: &Field,
    v: &Field,
    params: &MaterialParams,
    load: &LoadProgram,
    mesh: &Mesh,
) -> Result<EnergyBreakdown> {
    evaluate_energy(mesh, &element_geometry(mesh), t, u, v, params, load)
}

/// Symmetric elimination of `x_i = values_i` for the listed dofs.
fn apply_dirichlet(system: &mut SparseSpd, dofs: &[usize], values: &[f64]) {
    let n = system.dim();
    let mut fixed = vec![false; n];
    for &i in dofs {
        fixed[i] = true;
    }
    // move known columns to the right-hand side
    let mut shift = vec![0.0; n];
    for (row, s) in shift.iter_mut().enumerate() {
        if fixed[row] {
            continue;
        }
        let (cols, vals) = system.matrix.row(row);
        *s = cols.iter().zip(vals).filter(|(c, _)| fixed[**c]).map(|(&c, &a)| a * values[c]).sum();
    }
    let diag = system.matrix.diagonal();
    for row in 0..n {
        let cols = system.matrix.row(row).0.to_vec();
        for c in cols {
            if fixed[row] || fixed[c] {
                let k = system.matrix.position(row, c).expect("entry in pattern");
                system.matrix.values_mut()[k] = if row == c { diag[row] } else { 0.0 };
            }
        }
        if fixed[row] {
            system.rhs[row] = diag[row] * values[row];
        } else {
            system.rhs[row] -= shift[row];
        }
    }
}

/// Exact minimizer of the displacement sub-problem; convenience for tests and examples.
pub fn solve_displacement(
    space: &FeSpace,
    v: &Field,
    t: f64,
    params: &MaterialParams,
    load: &LoadProgram,
    bc: BoundaryCondition,
    tol: f64,
) -> Result<Field> {
    let system = space.assemble_u_system(v, t, params, load, bc)?;
    let (u, _) = solve_spd(&system, tol, 20 * system.dim() + 100)?;
    Field::displacement(space.mesh(), u)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::MaterialInputs;

    fn params(eta: f64) -> MaterialParams {
        MaterialParams::new(MaterialInputs {
            eta,
            ..Default::default()
        })
        .unwrap()
    }

    #[test]
    fn energy_vanishes_at_rest() {
        let mesh = Mesh::rectangle(1.0, 0.5, 4, 2).unwrap();
        let u = Field::constant(&mesh, 2, 0.0);
        let v = Field::constant(&mesh, 1, 1.0);
        let e = total_energy(0.0, &u, &v, &params(1e-5), &LoadProgram::default(), &mesh).unwrap();
        assert!(e.total.abs() < 1e-28, "{e:?}");
        assert_eq!(e.total, e.elastic + e.fracture + e.adhesion);
    }

    #[test]
    fn energy_at_substrate_displacement() {
        let mesh = Mesh::rectangle(2.0, 1.0, 6, 3).unwrap();
        let p = params(1e-5);
        let load = LoadProgram::affine([[0.3, 0.1], [0.1, -0.2]], 1.0, 0.1);
        let space = FeSpace::new(mesh.clone());
        let g = space.load_field(2.0, &load);
        let v = Field::constant(&mesh, 1, 1.0);
        let e = space.energy(2.0, &g, &v, &p, &load).unwrap();
        assert!(e.adhesion.abs() < 1e-28 && e.fracture.abs() < 1e-28);
        let s = Strain::new(0.6, -0.4, 0.2);
        let expected = 0.5 * (1.0 + 1e-5) * elastic_density(&s, &p) * 8.0;
        assert!((e.elastic - expected).abs() < 1e-12 * expected);
    }

    #[test]
    fn mismatched_fields_rejected() {
        let mesh = Mesh::rectangle(1.0, 1.0, 2, 2).unwrap();
        let other = Mesh::rectangle(1.0, 1.0, 3, 2).unwrap();
        let u = Field::constant(&other, 2, 0.0);
        let v = Field::constant(&mesh, 1, 1.0);
        assert!(matches!(
            total_energy(0.0, &u, &v, &params(0.0), &LoadProgram::default(), &mesh),
            Err(Error::SizeMismatch { .. })
        ));
    }

    #[test]
    fn assembled_matrices_are_symmetric() {
        let mesh = Mesh::rectangle(1.5, 1.0, 5, 4).unwrap();
        let space = FeSpace::new(mesh.clone());
        let p = params(1e-5);
        let v = Field::from_fn(&mesh, 1, |x| [0.5 + 0.4 * (x[0] * x[1]).sin(), 0.0]);
        let u = Field::from_fn(&mesh, 2, |x| [0.3 * x[0] * x[1], x[0] - x[1] * x[1]]);
        let su = space.assemble_u_system(&v, 1.0, &p, &LoadProgram::default(), BoundaryCondition::Neumann).unwrap();
        let sv = space.assemble_v_system(&u, &p).unwrap();
        assert!(su.matrix.asymmetry() < 1e-14);
        assert!(sv.matrix.asymmetry() < 1e-14);
        let sd = space.assemble_u_system(&v, 1.0, &p, &LoadProgram::default(), BoundaryCondition::DirichletG).unwrap();
        assert!(sd.matrix.asymmetry() < 1e-14);
    }

    // The assembled quadratic forms reproduce the quadrature energy.
    #[test]
    fn quadratic_forms_match_energy() {
        let mesh = Mesh::rectangle(1.5, 1.0, 5, 4).unwrap();
        let space = FeSpace::new(mesh.clone());
        let p = params(1e-3);
        let load = LoadProgram::affine([[1.0, 0.2], [0.0, 0.5]], 1.0, 0.1);
        let t = 0.7;
        let v = Field::from_fn(&mesh, 1, |x| [0.5 + 0.4 * (x[0] * x[1]).sin(), 0.0]);
        let u = Field::from_fn(&mesh, 2, |x| [0.3 * x[0] * x[1], x[0] - x[1] * x[1]]);
        let e = space.energy(t, &u, &v, &p, &load).unwrap();
        let zero = Field::constant(&mesh, 2, 0.0);
        let e_g = space.energy(t, &zero, &v, &p, &load).unwrap();
        let su = space.assemble_u_system(&v, t, &p, &load, BoundaryCondition::Neumann).unwrap();
        let q_u = su.objective(u.values()) + e_g.elastic + e_g.adhesion;
        assert!((q_u - (e.elastic + e.adhesion)).abs() < 1e-12 * e.total, "{q_u} {e:?}");

        let sv = space.assemble_v_system(&u, &p).unwrap();
        let ones = Field::constant(&mesh, 1, 0.0);
        let e0 = space.energy(t, &u, &ones, &p, &load).unwrap();
        let q_v = sv.objective(v.values()) + e0.elastic + e0.fracture;
        assert!((q_v - (e.elastic + e.fracture)).abs() < 1e-12 * e.total);
    }

    #[test]
    fn v_solve_without_strain_is_one() {
        let mesh = Mesh::interval(2.0, 20).unwrap();
        let space = FeSpace::new(mesh.clone());
        let u = Field::constant(&mesh, 1, 0.0);
        let sys = space.assemble_v_system(&u, &params(0.0)).unwrap();
        let (v, _) = solve_spd(&sys, 1e-13, 1000).unwrap();
        assert!(v.iter().all(|x| (x - 1.0).abs() < 1e-11));
    }

    #[test]
    fn v_solve_uniform_strain() {
        let mesh = Mesh::interval(3.0, 60).unwrap();
        let space = FeSpace::new(mesh.clone());
        let p = params(0.0);
        let u = Field::from_fn(&mesh, 1, |x| [0.8 * x[0], 0.0]);
        let w = 0.64 * p.young();
        let sys = space.assemble_v_system(&u, &p).unwrap();
        let (v, _) = solve_spd(&sys, 1e-13, 1000).unwrap();
        let expected = 1.0 / (1.0 + p.eps() * w / p.toughness());
        for vi in &v[1..60] {
            assert!((vi - expected).abs() < 1e-10, "{vi} vs {expected}");
        }
    }

    #[test]
    fn dirichlet_rows_fix_boundary() {
        let mesh = Mesh::rectangle(1.0, 1.0, 4, 4).unwrap();
        let space = FeSpace::new(mesh.clone());
        let p = params(1e-5);
        let load = LoadProgram::affine([[0.5, 0.1], [0.2, -0.3]], 1.0, 0.1);
        let v = Field::from_fn(&mesh, 1, |x| [0.4 + 0.5 * x[0].abs(), 0.0]);
        let u = solve_displacement(&space, &v, 1.3, &p, &load, BoundaryCondition::DirichletG, 1e-12).unwrap();
        let g = space.load_field(1.3, &load);
        for i in 0..mesh.node_count() {
            if mesh.tags(i).is_boundary() {
                assert!((u.values()[2 * i] - g.values()[2 * i]).abs() < 1e-12);
                assert!((u.values()[2 * i + 1] - g.values()[2 * i + 1]).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn u_solve_decreases_energy_and_scales() {
        let mesh = Mesh::rectangle(2.0, 1.0, 8, 4).unwrap();
        let space = FeSpace::new(mesh.clone());
        let p = params(1e-5);
        let load = LoadProgram::default();
        let v = Field::from_fn(&mesh, 1, |x| [0.3 + 0.6 * (x[0] * 1.3).cos().abs(), 0.0]);
        let u0 = Field::from_fn(&mesh, 2, |x| [0.1 * x[1], -0.2 * x[0]]);
        let ustar = solve_displacement(&space, &v, 1.5, &p, &load, BoundaryCondition::Neumann, 1e-12).unwrap();
        let e0 = space.energy(1.5, &u0, &v, &p, &load).unwrap().total;
        let e1 = space.energy(1.5, &ustar, &v, &p, &load).unwrap().total;
        assert!(e1 <= e0);
        let u2 = solve_displacement(&space, &v, 3.0, &p, &load, BoundaryCondition::Neumann, 1e-12).unwrap();
        for (a, b) in u2.values().iter().zip(ustar.values()) {
            assert!((a - 2.0 * b).abs() < 1e-8);
        }
    }

    #[test]
    fn energy_is_quadratic_in_u_without_load() {
        let mesh = Mesh::rectangle(1.5, 1.0, 5, 4).unwrap();
        let p = params(1e-5);
        let load = LoadProgram::uniaxial(1.0, 0.1);
        let v = Field::from_fn(&mesh, 1, |x| [0.5 + 0.4 * (3.0 * x[0]).sin(), 0.0]);
        let u = Field::from_fn(&mesh, 2, |x| [(x[0] * x[1]).sin(), x[0] * x[0]]);
        let u2 = Field::new(&mesh, 2, u.values().iter().map(|x| 2.0 * x).collect()).unwrap();
        let e1 = total_energy(0.0, &u, &v, &p, &load, &mesh).unwrap();
        let e2 = total_energy(0.0, &u2, &v, &p, &load, &mesh).unwrap();
        let q1 = e1.elastic + e1.adhesion;
        let q2 = e2.elastic + e2.adhesion;
        assert!((q2 - 4.0 * q1).abs() < 1e-12 * q2);
    }
}
