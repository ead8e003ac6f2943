//! Skew-symmetric graphs: exact structure, cloning and decloning.
//!
//! Arc values live in an exact scalar (the crate-level default is
//! [`crate::Rat`]); decloning compares adjacency rows for *equality*, which
//! is only meaningful in exact arithmetic.

mod search;

pub use search::{
    aut_order_decomposed, automorphisms_brute, automorphisms_brute_with_limit, find_isomorphism,
    PermutationGroup, BRUTE_FORCE_LIMIT,
};

use std::collections::{BTreeMap, HashMap, HashSet};

use thiserror::Error;

use crate::matrix::Matrix;
use crate::scalar::Scalar;
use crate::Rat;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GraphError {
    #[error("duplicate vertex label {0:?}")]
    DuplicateVertex(String),
    #[error("nonzero self-loop on vertex {0:?}")]
    SelfLoop(String),
    #[error("arc values for {0:?} -> {1:?} violate skew-symmetry")]
    SkewConflict(String, String),
    #[error("unknown vertex label {0:?}")]
    UnknownLabel(String),
    #[error("vertex {0:?} has no image under the map")]
    MapNotTotal(String),
    #[error("weight vector does not match the vertex set: {0}")]
    WeightDomainMismatch(String),
    #[error("weights must be positive integers, got {0} for {1:?}")]
    NonPositiveWeight(usize, String),
    #[error("map is not surjective")]
    NotSurjective,
    #[error("map is not a graph morphism")]
    NotMorphism,
    #[error("maps are not composable: codomain/domain mismatch")]
    NotComposable,
    #[error("graph of order {order} exceeds the brute-force limit {limit}")]
    TooLarge { order: usize, limit: usize },
}

/// Finite vertex set with a skew-symmetric arc-value matrix.
///
/// The diagonal is zero and `a[t][s] == -a[s][t]` always holds; both are
/// enforced at construction. Vertex order is part of the representation
/// (it fixes coordinate order in the associated LV system) but not of the
/// isomorphism class.
#[derive(Debug, Clone)]
pub struct SkewGraph<T = Rat> {
    labels: Vec<String>,
    index: HashMap<String, usize>,
    adj: Matrix<T>,
}

impl<T: Scalar> PartialEq for SkewGraph<T> {
    fn eq(&self, other: &Self) -> bool {
        self.labels == other.labels && self.adj == other.adj
    }
}

impl<T: Scalar> SkewGraph<T> {
    pub fn new<V, A>(
        vertices: impl IntoIterator<Item = V>,
        arcs: impl IntoIterator<Item = (A, A, T)>,
    ) -> Result<Self, GraphError>
    where
        V: Into<String>,
        A: AsRef<str>,
    {
        let labels: Vec<String> = vertices.into_iter().map(Into::into).collect();
        let mut index = HashMap::new();
        for (i, l) in labels.iter().enumerate() {
            if index.insert(l.clone(), i).is_some() {
                return Err(GraphError::DuplicateVertex(l.clone()));
            }
        }
        let n = labels.len();
        let mut adj = Matrix::zeros(n, n);
        let mut assigned: HashSet<(usize, usize)> = HashSet::new();
        for (from, to, value) in arcs {
            let (from, to) = (from.as_ref(), to.as_ref());
            let i = *index
                .get(from)
                .ok_or_else(|| GraphError::UnknownLabel(from.to_string()))?;
            let j = *index
                .get(to)
                .ok_or_else(|| GraphError::UnknownLabel(to.to_string()))?;
            if i == j {
                if !value.is_zero() {
                    return Err(GraphError::SelfLoop(from.to_string()));
                }
                continue;
            }
            let neg = T::zero() - value.clone();
            if assigned.contains(&(i, j)) && adj[(i, j)] != value
                || assigned.contains(&(j, i)) && adj[(j, i)] != neg
            {
                return Err(GraphError::SkewConflict(from.to_string(), to.to_string()));
            }
            adj[(i, j)] = value;
            adj[(j, i)] = neg;
            assigned.insert((i, j));
            assigned.insert((j, i));
        }
        Ok(SkewGraph { labels, index, adj })
    }

    /// Builds a graph from a ready adjacency matrix; `adj` must be
    /// skew-symmetric with zero diagonal.
    pub(crate) fn from_adjacency(labels: Vec<String>, adj: Matrix<T>) -> Self {
        debug_assert_eq!(labels.len(), adj.rows());
        debug_assert_eq!(adj.rows(), adj.cols());
        let index = labels
            .iter()
            .enumerate()
            .map(|(i, l)| (l.clone(), i))
            .collect();
        SkewGraph { labels, index, adj }
    }

    pub fn order(&self) -> usize {
        self.labels.len()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn label(&self, i: usize) -> &str {
        &self.labels[i]
    }

    pub fn index_of(&self, label: &str) -> Option<usize> {
        self.index.get(label).copied()
    }

    pub fn arc(&self, from: usize, to: usize) -> &T {
        &self.adj[(from, to)]
    }

    pub fn adjacency(&self) -> &Matrix<T> {
        &self.adj
    }

    /// Nonzero arcs in one orientation only (`from < to` in vertex order).
    pub fn arcs_upper(&self) -> impl Iterator<Item = (usize, usize, &T)> {
        let n = self.order();
        (0..n).flat_map(move |i| {
            (i + 1..n).filter_map(move |j| {
                let v = self.arc(i, j);
                (!v.is_zero()).then_some((i, j, v))
            })
        })
    }

    fn rows_equal(&self, a: usize, b: usize) -> bool {
        self.adj.row(a) == self.adj.row(b)
    }

    /// A graph is irreducible when no two adjacency rows coincide.
    pub fn is_irreducible(&self) -> bool {
        let n = self.order();
        (0..n).all(|i| (i + 1..n).all(|j| !self.rows_equal(i, j)))
    }

    /// Replaces each vertex `s` by `w(s)` clones `s#1, ..., s#w(s)` with
    /// identical adjacency towards other classes and zero adjacency among
    /// themselves. Clones are consecutive, in the original vertex order.
    pub fn clone_graph(&self, weights: &WeightVector) -> Result<SkewGraph<T>, GraphError> {
        let w = weights.in_order(self)?;
        let mut labels = Vec::new();
        let mut origin = Vec::new();
        for (s, &ws) in w.iter().enumerate() {
            for i in 1..=ws {
                labels.push(format!("{}#{}", self.labels[s], i));
                origin.push(s);
            }
        }
        let adj = Matrix::from_fn(labels.len(), labels.len(), |i, j| {
            if origin[i] == origin[j] {
                T::zero()
            } else {
                self.adj[(origin[i], origin[j])].clone()
            }
        });
        Ok(SkewGraph::from_adjacency(labels, adj))
    }

    /// Quotient by the relation "identical adjacency rows".
    ///
    /// The quotient is irreducible; its vertices keep the label of the
    /// first class member in input order, and each class size becomes the
    /// weight of its quotient vertex.
    pub fn declone(&self) -> DecloneResult<T> {
        let n = self.order();
        let mut classes: Vec<Vec<usize>> = Vec::new();
        let mut class_of = Vec::with_capacity(n);
        for v in 0..n {
            match classes.iter().position(|c| self.rows_equal(c[0], v)) {
                Some(c) => {
                    classes[c].push(v);
                    class_of.push(c);
                }
                None => {
                    class_of.push(classes.len());
                    classes.push(vec![v]);
                }
            }
        }
        let reps: Vec<usize> = classes.iter().map(|c| c[0]).collect();
        let labels: Vec<String> = reps.iter().map(|&r| self.labels[r].clone()).collect();
        let adj = Matrix::from_fn(reps.len(), reps.len(), |i, j| {
            if i == j {
                T::zero()
            } else {
                self.adj[(reps[i], reps[j])].clone()
            }
        });
        let quotient = SkewGraph::from_adjacency(labels, adj);
        let weights = WeightVector {
            weights: classes
                .iter()
                .map(|c| (quotient.labels[class_of[c[0]]].clone(), c.len()))
                .collect(),
        };
        let projection = GraphMap {
            domain: self.clone(),
            codomain: quotient.clone(),
            map: class_of,
        };
        let classes = classes
            .iter()
            .map(|c| c.iter().map(|&v| self.labels[v].clone()).collect())
            .collect();
        DecloneResult {
            quotient,
            weights,
            projection,
            classes,
        }
    }
}

/// Positive integer weight per vertex.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WeightVector {
    weights: BTreeMap<String, usize>,
}

impl WeightVector {
    pub fn new<L: Into<String>>(
        pairs: impl IntoIterator<Item = (L, usize)>,
    ) -> Result<Self, GraphError> {
        let mut weights = BTreeMap::new();
        for (l, w) in pairs {
            let l = l.into();
            if w == 0 {
                return Err(GraphError::NonPositiveWeight(w, l));
            }
            weights.insert(l, w);
        }
        Ok(WeightVector { weights })
    }

    pub fn all_ones<T: Scalar>(g: &SkewGraph<T>) -> Self {
        WeightVector {
            weights: g.labels().iter().map(|l| (l.clone(), 1)).collect(),
        }
    }

    pub fn get(&self, label: &str) -> Option<usize> {
        self.weights.get(label).copied()
    }

    pub fn total(&self) -> usize {
        self.weights.values().sum()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, usize)> {
        self.weights.iter().map(|(l, &w)| (l.as_str(), w))
    }

    /// Weights listed in the vertex order of `g`; errors unless the weight
    /// domain is exactly the vertex set of `g`.
    pub fn in_order<T: Scalar>(&self, g: &SkewGraph<T>) -> Result<Vec<usize>, GraphError> {
        if self.weights.len() != g.order() {
            return Err(GraphError::WeightDomainMismatch(format!(
                "{} weights for {} vertices",
                self.weights.len(),
                g.order()
            )));
        }
        g.labels()
            .iter()
            .map(|l| {
                self.get(l)
                    .ok_or_else(|| GraphError::WeightDomainMismatch(format!("missing {l:?}")))
            })
            .collect()
    }
}

/// Vertex-to-vertex map between two graphs; a *candidate* morphism.
#[derive(Debug, Clone)]
pub struct GraphMap<T = Rat> {
    domain: SkewGraph<T>,
    codomain: SkewGraph<T>,
    map: Vec<usize>,
}

impl<T: Scalar> PartialEq for GraphMap<T> {
    fn eq(&self, other: &Self) -> bool {
        self.domain == other.domain && self.codomain == other.codomain && self.map == other.map
    }
}

impl<T: Scalar> GraphMap<T> {
    pub fn new<A: AsRef<str>, B: AsRef<str>>(
        domain: SkewGraph<T>,
        codomain: SkewGraph<T>,
        pairs: impl IntoIterator<Item = (A, B)>,
    ) -> Result<Self, GraphError> {
        let mut map = vec![usize::MAX; domain.order()];
        for (from, to) in pairs {
            let (from, to) = (from.as_ref(), to.as_ref());
            let i = domain
                .index_of(from)
                .ok_or_else(|| GraphError::UnknownLabel(from.to_string()))?;
            let j = codomain
                .index_of(to)
                .ok_or_else(|| GraphError::UnknownLabel(to.to_string()))?;
            map[i] = j;
        }
        if let Some(miss) = map.iter().position(|&v| v == usize::MAX) {
            return Err(GraphError::MapNotTotal(domain.labels[miss].clone()));
        }
        Ok(GraphMap {
            domain,
            codomain,
            map,
        })
    }

    pub fn from_indices(
        domain: SkewGraph<T>,
        codomain: SkewGraph<T>,
        map: Vec<usize>,
    ) -> Result<Self, GraphError> {
        if map.len() != domain.order() {
            return Err(GraphError::MapNotTotal(format!(
                "map has {} entries for {} vertices",
                map.len(),
                domain.order()
            )));
        }
        if let Some(&bad) = map.iter().find(|&&j| j >= codomain.order()) {
            return Err(GraphError::UnknownLabel(format!("vertex index {bad}")));
        }
        Ok(GraphMap {
            domain,
            codomain,
            map,
        })
    }

    pub fn identity(g: &SkewGraph<T>) -> Self {
        GraphMap {
            domain: g.clone(),
            codomain: g.clone(),
            map: (0..g.order()).collect(),
        }
    }

    pub fn domain(&self) -> &SkewGraph<T> {
        &self.domain
    }

    pub fn codomain(&self) -> &SkewGraph<T> {
        &self.codomain
    }

    /// Image vertex indices, indexed by domain vertex.
    pub fn indices(&self) -> &[usize] {
        &self.map
    }

    pub fn image_label(&self, from: &str) -> Option<&str> {
        let i = self.domain.index_of(from)?;
        Some(self.codomain.label(self.map[i]))
    }

    /// True when arc values are preserved: `a'_{Φ(s),Φ(t)} = a_{s,t}`.
    pub fn is_morphism(&self) -> bool {
        let n = self.domain.order();
        (0..n).all(|s| {
            (s + 1..n)
                .all(|t| self.codomain.adj[(self.map[s], self.map[t])] == self.domain.adj[(s, t)])
        })
    }

    /// Graph morphism that additionally satisfies `w'(Φ(s)) ≤ w(s)`.
    pub fn is_weighted_morphism(
        &self,
        w_dom: &WeightVector,
        w_cod: &WeightVector,
    ) -> Result<bool, GraphError> {
        let wd = w_dom.in_order(&self.domain)?;
        let wc = w_cod.in_order(&self.codomain)?;
        Ok(self.is_morphism() && (0..self.domain.order()).all(|s| wc[self.map[s]] <= wd[s]))
    }

    pub fn is_surjective(&self) -> bool {
        let mut hit = vec![false; self.codomain.order()];
        for &j in &self.map {
            hit[j] = true;
        }
        hit.iter().all(|&h| h)
    }

    pub fn is_bijective(&self) -> bool {
        self.domain.order() == self.codomain.order() && self.is_surjective()
    }

    /// `outer ∘ inner`; the codomain of `inner` must equal the domain of
    /// `outer` as a presented graph.
    pub fn compose(outer: &Self, inner: &Self) -> Result<Self, GraphError> {
        if inner.codomain != outer.domain {
            return Err(GraphError::NotComposable);
        }
        Ok(GraphMap {
            domain: inner.domain.clone(),
            codomain: outer.codomain.clone(),
            map: inner.map.iter().map(|&v| outer.map[v]).collect(),
        })
    }

    /// Induced map between the decloned graphs of domain and codomain.
    ///
    /// Defined (and unique) for surjective graph morphisms; the square
    /// with the two decloning projections commutes exactly, and the result
    /// is a weighted morphism for the decloned weights.
    pub fn declone_morphism(&self) -> Result<GraphMap<T>, GraphError> {
        if !self.is_morphism() {
            return Err(GraphError::NotMorphism);
        }
        if !self.is_surjective() {
            return Err(GraphError::NotSurjective);
        }
        let dd = self.domain.declone();
        let dc = self.codomain.declone();
        let map: Vec<usize> = (0..dd.quotient.order())
            .map(|c| {
                let rep = self
                    .domain
                    .index_of(dd.quotient.label(c))
                    .expect("quotient labels come from the domain");
                dc.projection.map[self.map[rep]]
            })
            .collect();
        let induced = GraphMap {
            domain: dd.quotient,
            codomain: dc.quotient,
            map,
        };
        debug_assert!({
            let left = GraphMap::compose(&induced, &dd.projection).unwrap();
            let right = GraphMap::compose(&dc.projection, self).unwrap();
            left.map == right.map
        });
        Ok(induced)
    }
}

/// Outcome of decloning a graph: the irreducible quotient, the class-size
/// weights, the projection map, and the classes themselves.
#[derive(Debug, Clone)]
pub struct DecloneResult<T = Rat> {
    pub quotient: SkewGraph<T>,
    pub weights: WeightVector,
    pub projection: GraphMap<T>,
    pub classes: Vec<Vec<String>>,
}

impl<T: Scalar> DecloneResult<T> {
    /// Index of the class containing `label`, if any.
    pub fn class_of(&self, label: &str) -> Option<usize> {
        self.classes
            .iter()
            .position(|c| c.iter().any(|l| l == label))
    }
}

#[cfg(test)]
pub(crate) mod fixtures {
    use super::*;
    use crate::scalar::rat;

    /// Four-circuit s -> t -> u -> v -> s with weights (2,1,2,1).
    pub fn circuit4() -> (SkewGraph, WeightVector) {
        let g = SkewGraph::new(
            ["s", "t", "u", "v"],
            [
                ("s", "t", rat(1)),
                ("t", "u", rat(1)),
                ("u", "v", rat(1)),
                ("v", "s", rat(1)),
            ],
        )
        .unwrap();
        let w = WeightVector::new([("s", 2), ("t", 1), ("u", 2), ("v", 1)]).unwrap();
        (g, w)
    }

    /// The six-vertex clone of `circuit4`, built from explicit arcs.
    pub fn circuit4_cloned() -> SkewGraph {
        SkewGraph::new(
            ["s#1", "s#2", "t#1", "u#1", "u#2", "v#1"],
            [
                ("s#1", "t#1", rat(1)),
                ("s#2", "t#1", rat(1)),
                ("t#1", "u#1", rat(1)),
                ("t#1", "u#2", rat(1)),
                ("u#1", "v#1", rat(1)),
                ("u#2", "v#1", rat(1)),
                ("v#1", "s#1", rat(1)),
                ("v#1", "s#2", rat(1)),
            ],
        )
        .unwrap()
    }

    /// Two sources feeding one sink: s1 -> t <- s2.
    pub fn two_sources() -> SkewGraph {
        SkewGraph::new(
            ["s1", "s2", "t"],
            [("s1", "t", rat(1)), ("s2", "t", rat(1))],
        )
        .unwrap()
    }

    /// Irreducible target embedding `two_sources`: x -> u -> w <- v.
    pub fn embedding_target() -> SkewGraph {
        SkewGraph::new(
            ["x", "u", "v", "w"],
            [("x", "u", rat(1)), ("u", "w", rat(1)), ("v", "w", rat(1))],
        )
        .unwrap()
    }
}
