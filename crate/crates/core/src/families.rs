//! Constructors for the classical integrable families.
//!
//! Vertex labels are `"1".."n"`; cyclic index arithmetic stays internal.

use std::collections::HashSet;

use thiserror::Error;

use crate::graph::SkewGraph;
use crate::matrix::Matrix;
use crate::scalar::rat;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum FamilyError {
    #[error("bad parameter: {0}")]
    BadParameter(String),
    #[error("unknown vertex label {0:?}")]
    UnknownLabel(String),
}

fn labels(n: usize) -> Vec<String> {
    (1..=n).map(|i| i.to_string()).collect()
}

fn circulant(n: usize, k: usize) -> SkewGraph {
    // first row (0, 1...1 (k of them), 0...0, -1...-1 (k of them))
    let adj = Matrix::from_fn(n, n, |i, j| {
        let d = (j + n - i) % n;
        if (1..=k).contains(&d) {
            rat(1)
        } else if (n - k..n).contains(&d) {
            rat(-1)
        } else {
            rat(0)
        }
    });
    SkewGraph::from_adjacency(labels(n), adj)
}

/// Kac-van Moerbeke circuit: `n` vertices, an arc of value one from each
/// vertex to the next, cyclically. Defined for `n >= 3`.
pub fn km(n: usize) -> Result<SkewGraph, FamilyError> {
    if n < 3 {
        return Err(FamilyError::BadParameter(format!(
            "km requires n >= 3, got {n}"
        )));
    }
    Ok(circulant(n, 1))
}

/// Bogoyavlenskij system `B(n,k)`: an arc from every vertex to the next
/// `k` vertices in cyclic order. Requires `1 <= k < n/2`.
pub fn bogo(n: usize, k: usize) -> Result<SkewGraph, FamilyError> {
    if k < 1 || 2 * k >= n {
        return Err(FamilyError::BadParameter(format!(
            "bogo requires 1 <= k < n/2, got n={n}, k={k}"
        )));
    }
    Ok(circulant(n, k))
}

/// Maximal-interaction tournament `LV(n,0)`: arc value one from `i` to `j`
/// for every `i < j`. Defined for `n >= 1`.
pub fn lv_n0(n: usize) -> Result<SkewGraph, FamilyError> {
    if n < 1 {
        return Err(FamilyError::BadParameter(
            "lv_n0 requires n >= 1".to_string(),
        ));
    }
    let adj = Matrix::from_fn(n, n, |i, j| {
        if i < j {
            rat(1)
        } else if i > j {
            rat(-1)
        } else {
            rat(0)
        }
    });
    Ok(SkewGraph::from_adjacency(labels(n), adj))
}

/// Open (non-periodic) KM chain: arcs `i -> i+1` with no wrap-around.
/// Defined for `n >= 2`.
pub fn open_km(n: usize) -> Result<SkewGraph, FamilyError> {
    if n < 2 {
        return Err(FamilyError::BadParameter(format!(
            "open_km requires n >= 2, got {n}"
        )));
    }
    let adj = Matrix::from_fn(n, n, |i, j| {
        if j == i + 1 {
            rat(1)
        } else if i == j + 1 {
            rat(-1)
        } else {
            rat(0)
        }
    });
    Ok(SkewGraph::from_adjacency(labels(n), adj))
}

/// Induced subgraph on the complement of `drop`; the graph of the Poisson
/// reduction that sets the dropped coordinates to zero.
pub fn delete_vertices(g: &SkewGraph, drop: &[&str]) -> Result<SkewGraph, FamilyError> {
    let mut drop_idx = HashSet::new();
    for label in drop {
        let i = g
            .index_of(label)
            .ok_or_else(|| FamilyError::UnknownLabel(label.to_string()))?;
        drop_idx.insert(i);
    }
    let keep: Vec<usize> = (0..g.order()).filter(|i| !drop_idx.contains(i)).collect();
    let labels: Vec<String> = keep.iter().map(|&i| g.label(i).to_string()).collect();
    let adj = Matrix::from_fn(keep.len(), keep.len(), |i, j| {
        g.arc(keep[i], keep[j]).clone()
    });
    Ok(SkewGraph::from_adjacency(labels, adj))
}
