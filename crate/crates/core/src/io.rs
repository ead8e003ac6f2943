//! JSON graph format, the canonical on-disk interface.
//!
//! ```json
//! {"vertices":["s","t"], "arcs":[["s","t","1"],["t","u","-3/2"]], "weights":{"s":2}}
//! ```
//!
//! Arc values are rational strings; arcs are listed in one orientation
//! only; `weights` is optional and defaults to all ones.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::{GraphError, SkewGraph, WeightVector};
use crate::matrix::Matrix;
use crate::scalar::{format_rat, parse_rat};
use crate::Rat;

#[derive(Debug, Error)]
pub enum IoError {
    #[error("json parse error: {0}")]
    Json(#[from] serde_json::Error),
    #[error("in arc {from:?} -> {to:?}: {message}")]
    ArcValue {
        from: String,
        to: String,
        message: String,
    },
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error("matrix row {row} has {got} entries, expected {expected}")]
    RowLength {
        row: usize,
        got: usize,
        expected: usize,
    },
    #[error("invalid matrix entry at ({row},{col}): {message}")]
    MatrixEntry {
        row: usize,
        col: usize,
        message: String,
    },
}

/// Serde image of a graph file.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq, Eq)]
pub struct GraphJson {
    pub vertices: Vec<String>,
    pub arcs: Vec<(String, String, String)>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub weights: Option<BTreeMap<String, usize>>,
}

impl GraphJson {
    pub fn from_graph(g: &SkewGraph<Rat>) -> Self {
        let arcs = g
            .arcs_upper()
            .map(|(i, j, v)| {
                (
                    g.label(i).to_string(),
                    g.label(j).to_string(),
                    format_rat(v),
                )
            })
            .collect();
        GraphJson {
            vertices: g.labels().to_vec(),
            arcs,
            weights: None,
        }
    }

    pub fn with_weights(mut self, w: &WeightVector) -> Self {
        self.weights = Some(w.iter().map(|(l, v)| (l.to_string(), v)).collect());
        self
    }

    /// Builds the graph and its weight vector (all ones when absent).
    pub fn to_graph(&self) -> Result<(SkewGraph<Rat>, WeightVector), IoError> {
        let mut arcs = Vec::with_capacity(self.arcs.len());
        for (from, to, value) in &self.arcs {
            let v = parse_rat(value).map_err(|message| IoError::ArcValue {
                from: from.clone(),
                to: to.clone(),
                message,
            })?;
            arcs.push((from.clone(), to.clone(), v));
        }
        let g = SkewGraph::new(self.vertices.clone(), arcs)?;
        let weights = match &self.weights {
            Some(map) => {
                for label in map.keys() {
                    if g.index_of(label).is_none() {
                        return Err(GraphError::UnknownLabel(label.clone()).into());
                    }
                }
                let full = g
                    .labels()
                    .iter()
                    .map(|l| (l.clone(), map.get(l).copied().unwrap_or(1)));
                WeightVector::new(full).map_err(IoError::Graph)?
            }
            None => WeightVector::all_ones(&g),
        };
        Ok((g, weights))
    }
}

pub fn graph_to_json_string(g: &SkewGraph<Rat>) -> String {
    serde_json::to_string_pretty(&GraphJson::from_graph(g)).expect("graph serializes")
}

pub fn graph_from_json_str(s: &str) -> Result<(SkewGraph<Rat>, WeightVector), IoError> {
    let parsed: GraphJson = serde_json::from_str(s)?;
    parsed.to_graph()
}

/// Serde image of an exact matrix, rows of rational strings. Used for
/// linear LV maps, with row order given by the codomain vertex order.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq, Eq)]
pub struct MatrixJson {
    pub rows: Vec<Vec<String>>,
}

impl MatrixJson {
    pub fn from_matrix(m: &Matrix<Rat>) -> Self {
        MatrixJson {
            rows: (0..m.rows())
                .map(|i| m.row(i).iter().map(format_rat).collect())
                .collect(),
        }
    }

    pub fn to_matrix(&self) -> Result<Matrix<Rat>, IoError> {
        let nrows = self.rows.len();
        let ncols = self.rows.first().map_or(0, Vec::len);
        let mut out = Vec::with_capacity(nrows);
        for (i, row) in self.rows.iter().enumerate() {
            if row.len() != ncols {
                return Err(IoError::RowLength {
                    row: i,
                    got: row.len(),
                    expected: ncols,
                });
            }
            let mut parsed = Vec::with_capacity(ncols);
            for (j, cell) in row.iter().enumerate() {
                parsed.push(parse_rat(cell).map_err(|message| IoError::MatrixEntry {
                    row: i,
                    col: j,
                    message,
                })?);
            }
            out.push(parsed);
        }
        Ok(Matrix::from_rows(out))
    }
}
