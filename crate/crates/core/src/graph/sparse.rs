use crate::dense::DenseMatrix;
use crate::error::{Result, RslError};
use crate::par;

use super::Graph;

/// Square sparse matrix in compressed-row form.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseMatrix {
    n: usize,
    indptr: Vec<usize>,
    indices: Vec<usize>,
    values: Vec<f64>,
}

impl SparseMatrix {
    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    /// Column indices and values of row `i`.
    pub fn row(&self, i: usize) -> (&[usize], &[f64]) {
        let span = self.indptr[i]..self.indptr[i + 1];
        (&self.indices[span.clone()], &self.values[span])
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        let (cols, vals) = self.row(i);
        cols.binary_search(&j).map_or(0.0, |k| vals[k])
    }

    pub fn to_dense(&self) -> DenseMatrix {
        let mut d = DenseMatrix::zeros(self.n, self.n);
        for i in 0..self.n {
            let (cols, vals) = self.row(i);
            for (&j, &v) in cols.iter().zip(vals) {
                d.set(i, j, v);
            }
        }
        d
    }

    /// `self · x`.
    pub fn matmul(&self, x: &DenseMatrix) -> Result<DenseMatrix> {
        if x.rows() != self.n {
            return Err(RslError::dim(format!(
                "sparse {}x{} by dense {}x{}",
                self.n,
                self.n,
                x.rows(),
                x.cols()
            )));
        }
        let mut out = DenseMatrix::zeros(self.n, x.cols());
        par::for_each_row_mut(out.as_mut_slice(), x.cols(), |i, out_row| {
            let (cols, vals) = self.row(i);
            for (&j, &v) in cols.iter().zip(vals) {
                for (o, &xv) in out_row.iter_mut().zip(x.row(j)) {
                    *o += v * xv;
                }
            }
        });
        Ok(out)
    }

    /// Row `i` of `self · x` without forming the full product.
    pub fn matmul_row(&self, x: &DenseMatrix, i: usize) -> Vec<f64> {
        let mut out = vec![0.0; x.cols()];
        let (cols, vals) = self.row(i);
        for (&j, &v) in cols.iter().zip(vals) {
            for (o, &xv) in out.iter_mut().zip(x.row(j)) {
                *o += v * xv;
            }
        }
        out
    }
}

/// Symmetric normalization `D̃^{-1/2} (A + I) D̃^{-1/2}` with `D̃` the degree
/// matrix of `A + I`.
pub fn normalize_adjacency(graph: &Graph) -> SparseMatrix {
    let n = graph.num_nodes();
    let deg: Vec<f64> = (0..n).map(|i| (graph.degree(i) + 1) as f64).collect();
    let mut indptr = Vec::with_capacity(n + 1);
    let mut indices = Vec::with_capacity(graph.num_edges() * 2 + n);
    let mut values = Vec::with_capacity(indices.capacity());
    indptr.push(0);
    for i in 0..n {
        let nbrs = graph.neighbors(i);
        let split = nbrs.partition_point(|&j| j < i);
        let cols = nbrs[..split]
            .iter()
            .copied()
            .chain(std::iter::once(i))
            .chain(nbrs[split..].iter().copied());
        for j in cols {
            indices.push(j);
            // The product d_i·d_j is exact and commutative, so (i, j) and (j, i) agree bitwise.
            values.push(1.0 / (deg[i] * deg[j]).sqrt());
        }
        indptr.push(indices.len());
    }
    SparseMatrix {
        n,
        indptr,
        indices,
        values,
    }
}
