//! Graph data model, adjacency normalization, feature preprocessing, synthetic
//! datasets, and ID/OOD split management.

mod datasets;
mod io;
mod preprocess;
mod sparse;
mod split;

pub use datasets::{make_sbm_dataset, make_toy_dataset, Dataset, SbmBlock, SbmSpec, ToySpec};
pub use io::{load_graph, read_features, write_edges, write_features};
pub use preprocess::{propagate, FeatureScaling, Standardizer};
pub use sparse::{normalize_adjacency, SparseMatrix};
pub use split::{stratified_split, SplitMasks};

use crate::dense::DenseMatrix;
use crate::error::{Result, RslError};

/// Undirected, unweighted graph with one dense feature row per node.
///
/// Adjacency is stored in compressed-row form. Every undirected edge appears
/// in both endpoint rows, rows are sorted, duplicates and self-loops are
/// dropped on construction.
#[derive(Debug, Clone, PartialEq)]
pub struct Graph {
    num_nodes: usize,
    indptr: Vec<usize>,
    indices: Vec<usize>,
    features: DenseMatrix,
}

impl Graph {
    pub fn new(edges: &[(usize, usize)], features: DenseMatrix) -> Result<Self> {
        let n = features.rows();
        if !features.is_finite() {
            let bad = (0..n)
                .find(|&r| features.row(r).iter().any(|x| !x.is_finite()))
                .unwrap_or(0);
            return Err(RslError::Validation(format!(
                "non-finite feature value in row {bad}"
            )));
        }
        let mut adj: Vec<Vec<usize>> = vec![Vec::new(); n];
        for &(i, j) in edges {
            for idx in [i, j] {
                if idx >= n {
                    return Err(RslError::Bounds { index: idx, len: n });
                }
            }
            if i == j {
                continue;
            }
            adj[i].push(j);
            adj[j].push(i);
        }
        let mut indptr = Vec::with_capacity(n + 1);
        let mut indices = Vec::new();
        indptr.push(0);
        for row in &mut adj {
            row.sort_unstable();
            row.dedup();
            indices.extend_from_slice(row);
            indptr.push(indices.len());
        }
        Ok(Self {
            num_nodes: n,
            indptr,
            indices,
            features,
        })
    }

    pub fn num_nodes(&self) -> usize {
        self.num_nodes
    }

    /// Number of undirected edges.
    pub fn num_edges(&self) -> usize {
        self.indices.len() / 2
    }

    pub fn feature_dim(&self) -> usize {
        self.features.cols()
    }

    pub fn features(&self) -> &DenseMatrix {
        &self.features
    }

    pub fn neighbors(&self, i: usize) -> &[usize] {
        &self.indices[self.indptr[i]..self.indptr[i + 1]]
    }

    pub fn degree(&self, i: usize) -> usize {
        self.indptr[i + 1] - self.indptr[i]
    }

    pub fn has_edge(&self, i: usize, j: usize) -> bool {
        self.neighbors(i).binary_search(&j).is_ok()
    }

    /// Undirected edges as `(i, j)` with `i < j`, in row order.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        (0..self.num_nodes)
            .flat_map(|i| {
                self.neighbors(i)
                    .iter()
                    .filter(move |&&j| j > i)
                    .map(move |&j| (i, j))
            })
            .collect()
    }

    /// Same topology with a replacement feature matrix of the same row count.
    pub fn with_features(&self, features: DenseMatrix) -> Result<Self> {
        if features.rows() != self.num_nodes {
            return Err(RslError::dim(format!(
                "{} feature rows for {} nodes",
                features.rows(),
                self.num_nodes
            )));
        }
        let mut g = self.clone();
        g.features = features;
        Ok(g)
    }

    /// Appends nodes with the given features and adds `extra_edges`, whose
    /// endpoints index the enlarged node set.
    pub fn with_extra_nodes(
        &self,
        extra_features: &DenseMatrix,
        extra_edges: &[(usize, usize)],
    ) -> Result<Self> {
        let features = self.features.vstack(extra_features)?;
        let mut edges = self.edges();
        edges.extend_from_slice(extra_edges);
        Graph::new(&edges, features)
    }
}
