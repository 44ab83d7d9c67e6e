use std::collections::BTreeSet;
use std::sync::Arc;

/// Row-compressed nonzero structure shared by all matrices of one problem.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SparsityPattern {
    n: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
}

impl SparsityPattern {
    /// Builds a pattern from per-row column sets; columns are sorted.
    pub fn from_rows(rows: Vec<BTreeSet<usize>>) -> Self {
        let n = rows.len();
        let mut row_ptr = Vec::with_capacity(n + 1);
        let mut col_idx = Vec::new();
        row_ptr.push(0);
        for r in rows {
            col_idx.extend(r);
            row_ptr.push(col_idx.len());
        }
        SparsityPattern { n, row_ptr, col_idx }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn nnz(&self) -> usize {
        self.col_idx.len()
    }

    pub fn row_ptr(&self) -> &[usize] {
        &self.row_ptr
    }

    pub fn col_idx(&self) -> &[usize] {
        &self.col_idx
    }

    pub fn row(&self, r: usize) -> &[usize] {
        &self.col_idx[self.row_ptr[r]..self.row_ptr[r + 1]]
    }

    /// Storage slot of entry (r, c), if present.
    pub fn slot(&self, r: usize, c: usize) -> Option<usize> {
        let row = self.row(r);
        row.binary_search(&c).ok().map(|k| self.row_ptr[r] + k)
    }

    pub fn is_structurally_symmetric(&self) -> bool {
        (0..self.n).all(|r| self.row(r).iter().all(|&c| self.slot(c, r).is_some()))
    }
}

/// Square CSR matrix over a shared [`SparsityPattern`].
#[derive(Debug, Clone, PartialEq)]
pub struct CsrMatrix {
    pattern: Arc<SparsityPattern>,
    values: Vec<f64>,
}

impl CsrMatrix {
    pub fn zeros(pattern: Arc<SparsityPattern>) -> Self {
        let values = vec![0.0; pattern.nnz()];
        CsrMatrix { pattern, values }
    }

    /// Sums duplicate entries.
    pub fn from_triplets(n: usize, triplets: &[(usize, usize, f64)]) -> Self {
        let mut rows = vec![BTreeSet::new(); n];
        for &(r, c, _) in triplets {
            rows[r].insert(c);
        }
        let mut m = CsrMatrix::zeros(Arc::new(SparsityPattern::from_rows(rows)));
        for &(r, c, v) in triplets {
            m.add(r, c, v);
        }
        m
    }

    pub fn identity(n: usize) -> Self {
        let t: Vec<_> = (0..n).map(|i| (i, i, 1.0)).collect();
        CsrMatrix::from_triplets(n, &t)
    }

    pub fn pattern(&self) -> &Arc<SparsityPattern> {
        &self.pattern
    }

    pub fn dim(&self) -> usize {
        self.pattern.dim()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    /// Adds `v` to entry (r, c). Panics if the entry is outside the pattern.
    pub fn add(&mut self, r: usize, c: usize, v: f64) {
        let k = self
            .pattern
            .slot(r, c)
            .unwrap_or_else(|| panic!("entry ({r}, {c}) not in sparsity pattern"));
        self.values[k] += v;
    }

    pub fn get(&self, r: usize, c: usize) -> f64 {
        self.pattern.slot(r, c).map_or(0.0, |k| self.values[k])
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        let p = &self.pattern;
        (0..p.dim())
            .map(|r| {
                (p.row_ptr[r]..p.row_ptr[r + 1])
                    .map(|k| self.values[k] * x[p.col_idx[k]])
                    .sum()
            })
            .collect()
    }

    pub fn row_sum(&self, r: usize) -> f64 {
        let p = &self.pattern;
        self.values[p.row_ptr[r]..p.row_ptr[r + 1]].iter().sum()
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }
}

/// Linear system `matrix * x = rhs`.
#[derive(Debug, Clone)]
pub struct SparseSystem {
    pub matrix: CsrMatrix,
    pub rhs: Vec<f64>,
}

pub fn norm2(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}
