//! Compressed sparse row storage for the assembled systems.

/// Square CSR matrix with sorted column indices in each row.
#[derive(Debug, Clone, PartialEq)]
pub struct CsrMatrix {
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    values: Vec<f64>,
}

impl CsrMatrix {
    /// Builds a zero-valued matrix from per-row sorted column lists.
    pub fn from_pattern(rows: &[Vec<usize>]) -> Self {
        let mut row_ptr = Vec::with_capacity(rows.len() + 1);
        row_ptr.push(0);
        let mut col_idx = Vec::new();
        for row in rows {
            debug_assert!(row.windows(2).all(|w| w[0] < w[1]));
            col_idx.extend_from_slice(row);
            row_ptr.push(col_idx.len());
        }
        let values = vec![0.0; col_idx.len()];
        Self {
            row_ptr,
            col_idx,
            values,
        }
    }

    /// Dense row-major input; zeros are dropped. Intended for tests and small systems.
    pub fn from_dense(n: usize, dense: &[f64]) -> Self {
        assert_eq!(dense.len(), n * n);
        let rows: Vec<Vec<usize>> = (0..n)
            .map(|i| (0..n).filter(|&j| dense[i * n + j] != 0.0 || i == j).collect())
            .collect();
        let mut m = Self::from_pattern(&rows);
        for i in 0..n {
            for k in m.row_ptr[i]..m.row_ptr[i + 1] {
                m.values[k] = dense[i * n + m.col_idx[k]];
            }
        }
        m
    }

    pub fn dim(&self) -> usize {
        self.row_ptr.len() - 1
    }

    pub fn nnz(&self) -> usize {
        self.col_idx.len()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn row(&self, i: usize) -> (&[usize], &[f64]) {
        let r = self.row_ptr[i]..self.row_ptr[i + 1];
        (&self.col_idx[r.clone()], &self.values[r])
    }

    /// Position of entry `(i, j)` in the value array, if it is in the pattern.
    pub fn position(&self, i: usize, j: usize) -> Option<usize> {
        let start = self.row_ptr[i];
        self.col_idx[start..self.row_ptr[i + 1]]
            .binary_search(&j)
            .ok()
            .map(|k| start + k)
    }

    /// `A <- S^-1 A S^-1` for `S = diag(s)`.
    pub fn scale_symmetric(&mut self, s: &[f64]) {
        for i in 0..self.dim() {
            for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                self.values[k] /= s[i] * s[self.col_idx[k]];
            }
        }
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.position(i, j).map_or(0.0, |k| self.values[k])
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.dim()).map(|i| self.get(i, i)).collect()
    }

    pub fn fill(&mut self, value: f64) {
        self.values.iter_mut().for_each(|v| *v = value);
    }

    /// `y = A x`
    pub fn mul_vec_into(&self, x: &[f64], y: &mut [f64]) {
        for (i, yi) in y.iter_mut().enumerate() {
            let mut acc = 0.0;
            for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                acc += self.values[k] * x[self.col_idx[k]];
            }
            *yi = acc;
        }
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.dim()];
        self.mul_vec_into(x, &mut y);
        y
    }

    /// Maximum absolute row sum; bounds the spectral radius of a symmetric matrix.
    pub fn norm_inf(&self) -> f64 {
        (0..self.dim())
            .map(|i| self.row(i).1.iter().map(|v| v.abs()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    /// Largest `|a_ij - a_ji|` relative to the largest entry.
    pub fn asymmetry(&self) -> f64 {
        let scale = self.values.iter().fold(0.0f64, |m, v| m.max(v.abs())).max(f64::MIN_POSITIVE);
        let mut worst = 0.0f64;
        for i in 0..self.dim() {
            let (cols, vals) = self.row(i);
            for (&j, &a) in cols.iter().zip(vals) {
                worst = worst.max((a - self.get(j, i)).abs());
            }
        }
        worst / scale
    }

    /// `0.5 x^T A x - b^T x`
    pub fn quadratic(&self, x: &[f64], b: &[f64]) -> f64 {
        let ax = self.mul_vec(x);
        0.5 * dot(x, &ax) - dot(b, x)
    }
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm2(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

pub fn norm_inf(a: &[f64]) -> f64 {
    a.iter().fold(0.0, |m, v| m.max(v.abs()))
}

/// Symmetric positive definite system `A x = b`; also the quadratic `0.5 x^T A x - b^T x`.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseSpd {
    pub matrix: CsrMatrix,
    pub rhs: Vec<f64>,
}

impl SparseSpd {
    pub fn dim(&self) -> usize {
        self.rhs.len()
    }

    pub fn residual(&self, x: &[f64]) -> Vec<f64> {
        let mut r = self.matrix.mul_vec(x);
        r.iter_mut().zip(&self.rhs).for_each(|(ri, bi)| *ri -= bi);
        r
    }

    pub fn objective(&self, x: &[f64]) -> f64 {
        self.matrix.quadratic(x, &self.rhs)
    }
}
