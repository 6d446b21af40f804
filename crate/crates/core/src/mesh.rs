//! Structured P1 meshes of intervals and rectangles, and nodal fields on them.

use crate::error::{Error, Result};

/// Boundary side tags; a corner node carries two of them.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct BoundaryTags(u8);

impl BoundaryTags {
    pub const LEFT: u8 = 1;
    pub const RIGHT: u8 = 2;
    pub const BOTTOM: u8 = 4;
    pub const TOP: u8 = 8;

    pub fn contains(&self, side: u8) -> bool {
        self.0 & side != 0
    }

    pub fn is_boundary(&self) -> bool {
        self.0 != 0
    }

    fn insert(&mut self, side: u8) {
        self.0 |= side;
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Mesh {
    dim: usize,
    half_length: f64,
    half_height: f64,
    divisions: (usize, usize),
    /// Node coordinates; `y` is zero on interval meshes.
    nodes: Vec<[f64; 2]>,
    /// Triangles (three indices, counterclockwise) or segments (two indices, third unused).
    elements: Vec<[usize; 3]>,
    tags: Vec<BoundaryTags>,
}

impl Mesh {
    /// Uniform triangulation of `[-L, L] x [-H, H]` with `nx * ny` cells, two triangles per cell.
    ///
    /// Diagonals alternate in a checkerboard so that neighboring cells are mirror images.
    pub fn rectangle(half_length: f64, half_height: f64, nx: usize, ny: usize) -> Result<Self> {
        if !(half_length > 0.0 && half_length.is_finite()) {
            return Err(Error::param("L", format!("must be positive, got {half_length}")));
        }
        if !(half_height > 0.0 && half_height.is_finite()) {
            return Err(Error::param("H", format!("must be positive, got {half_height}")));
        }
        if nx == 0 || ny == 0 {
            return Err(Error::param("nx", "mesh divisions must be at least 1"));
        }
        let stride = nx + 1;
        let mut nodes = Vec::with_capacity(stride * (ny + 1));
        let mut tags = Vec::with_capacity(nodes.capacity());
        for j in 0..=ny {
            let y = coordinate(half_height, j, ny);
            for i in 0..=nx {
                nodes.push([coordinate(half_length, i, nx), y]);
                let mut tag = BoundaryTags::default();
                if i == 0 {
                    tag.insert(BoundaryTags::LEFT);
                }
                if i == nx {
                    tag.insert(BoundaryTags::RIGHT);
                }
                if j == 0 {
                    tag.insert(BoundaryTags::BOTTOM);
                }
                if j == ny {
                    tag.insert(BoundaryTags::TOP);
                }
                tags.push(tag);
            }
        }
        let mut elements = Vec::with_capacity(2 * nx * ny);
        for j in 0..ny {
            for i in 0..nx {
                let a = j * stride + i;
                let b = a + 1;
                let c = a + stride + 1;
                let d = a + stride;
                if (i + j) % 2 == 0 {
                    elements.push([a, b, c]);
                    elements.push([a, c, d]);
                } else {
                    elements.push([a, b, d]);
                    elements.push([b, c, d]);
                }
            }
        }
        Ok(Self {
            dim: 2,
            half_length,
            half_height,
            divisions: (nx, ny),
            nodes,
            elements,
            tags,
        })
    }

    /// Uniform partition of `[-L, L]` into `n` segments.
    pub fn interval(half_length: f64, n: usize) -> Result<Self> {
        if !(half_length > 0.0 && half_length.is_finite()) {
            return Err(Error::param("L", format!("must be positive, got {half_length}")));
        }
        if n == 0 {
            return Err(Error::param("nx", "mesh divisions must be at least 1"));
        }
        let nodes: Vec<[f64; 2]> = (0..=n).map(|i| [coordinate(half_length, i, n), 0.0]).collect();
        let mut tags = vec![BoundaryTags::default(); n + 1];
        tags[0].insert(BoundaryTags::LEFT);
        tags[n].insert(BoundaryTags::RIGHT);
        let elements = (0..n).map(|i| [i, i + 1, usize::MAX]).collect();
        Ok(Self {
            dim: 1,
            half_length,
            half_height: 0.0,
            divisions: (n, 0),
            nodes,
            elements,
            tags,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn half_length(&self) -> f64 {
        self.half_length
    }

    pub fn half_height(&self) -> f64 {
        self.half_height
    }

    /// `(nx, ny)`; `ny` is zero on interval meshes.
    pub fn divisions(&self) -> (usize, usize) {
        self.divisions
    }

    pub fn nodes(&self) -> &[[f64; 2]] {
        &self.nodes
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn element_count(&self) -> usize {
        self.elements.len()
    }

    /// Vertex indices of element `e`: three in 2D, two in 1D.
    pub fn element(&self, e: usize) -> &[usize] {
        &self.elements[e][..self.dim + 1]
    }

    pub fn elements(&self) -> impl Iterator<Item = &[usize]> + '_ {
        (0..self.elements.len()).map(move |e| self.element(e))
    }

    pub fn tags(&self, node: usize) -> BoundaryTags {
        self.tags[node]
    }

    /// Signed measure of element `e` (area in 2D, length in 1D).
    pub fn measure(&self, e: usize) -> f64 {
        let ids = self.element(e);
        if self.dim == 1 {
            self.nodes[ids[1]][0] - self.nodes[ids[0]][0]
        } else {
            let [a, b, c] = [self.nodes[ids[0]], self.nodes[ids[1]], self.nodes[ids[2]]];
            0.5 * ((b[0] - a[0]) * (c[1] - a[1]) - (c[0] - a[0]) * (b[1] - a[1]))
        }
    }

    /// Mesh size: largest element edge length.
    pub fn h(&self) -> f64 {
        let dx = 2.0 * self.half_length / self.divisions.0 as f64;
        if self.dim == 1 {
            dx
        } else {
            let dy = 2.0 * self.half_height / self.divisions.1 as f64;
            dx.hypot(dy)
        }
    }

    /// Displacement components per node.
    pub fn vector_components(&self) -> usize {
        self.dim
    }

    /// Midline `y = 0` as `(x, weights)` samples: each entry lists the nodes and
    /// interpolation weights that produce the value at abscissa `x`, ordered by `x`.
    pub fn midline(&self) -> Vec<(f64, Vec<(usize, f64)>)> {
        if self.dim == 1 {
            return (0..self.nodes.len()).map(|i| (self.nodes[i][0], vec![(i, 1.0)])).collect();
        }
        let (nx, ny) = self.divisions;
        let stride = nx + 1;
        let rows: Vec<(usize, f64)> = if ny % 2 == 0 {
            vec![(ny / 2, 1.0)]
        } else {
            vec![(ny / 2, 0.5), (ny / 2 + 1, 0.5)]
        };
        (0..=nx)
            .map(|i| {
                let weights = rows.iter().map(|&(j, w)| (j * stride + i, w)).collect();
                (self.nodes[i][0], weights)
            })
            .collect()
    }
}

fn coordinate(half: f64, i: usize, n: usize) -> f64 {
    if i == 0 {
        -half
    } else if i == n {
        half
    } else {
        -half + 2.0 * half * i as f64 / n as f64
    }
}

/// Nodal values of a scalar (`components == 1`) or vector field, interleaved per node.
#[derive(Debug, Clone, PartialEq)]
pub struct Field {
    components: usize,
    values: Vec<f64>,
}

impl Field {
    pub fn new(mesh: &Mesh, components: usize, values: Vec<f64>) -> Result<Self> {
        let expected = components * mesh.node_count();
        if values.len() != expected {
            return Err(Error::SizeMismatch {
                expected,
                actual: values.len(),
            });
        }
        Ok(Self { components, values })
    }

    pub fn constant(mesh: &Mesh, components: usize, value: f64) -> Self {
        Self {
            components,
            values: vec![value; components * mesh.node_count()],
        }
    }

    /// Phase field: one component, every value in `[0, 1]`.
    pub fn phase(mesh: &Mesh, values: Vec<f64>) -> Result<Self> {
        if let Some(bad) = values.iter().find(|v| !(0.0..=1.0).contains(*v)) {
            return Err(Error::param("v", format!("phase field value {bad} outside [0, 1]")));
        }
        Self::new(mesh, 1, values)
    }

    /// Displacement field with the mesh's vector dimension.
    pub fn displacement(mesh: &Mesh, values: Vec<f64>) -> Result<Self> {
        Self::new(mesh, mesh.vector_components(), values)
    }

    /// Samples `f` at every node.
    pub fn from_fn(mesh: &Mesh, components: usize, f: impl Fn([f64; 2]) -> [f64; 2]) -> Self {
        let mut values = Vec::with_capacity(components * mesh.node_count());
        for &x in mesh.nodes() {
            values.extend_from_slice(&f(x)[..components]);
        }
        Self { components, values }
    }

    pub fn components(&self) -> usize {
        self.components
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub(crate) fn check(&self, mesh: &Mesh, components: usize) -> Result<()> {
        let expected = components * mesh.node_count();
        if self.components != components || self.values.len() != expected {
            return Err(Error::SizeMismatch {
                expected,
                actual: self.values.len(),
            });
        }
        Ok(())
    }
}
