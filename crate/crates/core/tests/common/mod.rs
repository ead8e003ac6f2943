//! Shared fixtures and independent oracles for the integration tests.
//!
//! The oracles here deliberately avoid the code paths they are used to
//! check: the bracket oracle expands quadratic forms monomial by
//! monomial, and the cloning projection is built from labels rather than
//! from the decloning machinery.

// each integration test links its own copy; not every test uses every helper
#![allow(dead_code)]

use std::collections::HashMap;

use num_traits::Zero;

use skewlv::graph::{GraphMap, SkewGraph, WeightVector};
use skewlv::lv::LinearMap;
use skewlv::scalar::rat;
use skewlv::Rat;

/// The cloned graph together with its projection `v#i -> v`, assembled
/// from the clone labels directly.
pub fn clone_projection(base: &SkewGraph, w: &WeightVector) -> (SkewGraph, GraphMap) {
    let cloned = base.clone_graph(w).expect("weights match the base");
    let pairs: Vec<(String, String)> = cloned
        .labels()
        .iter()
        .map(|l| {
            let (origin, _) = l.rsplit_once('#').expect("clone labels carry #i");
            (l.clone(), origin.to_string())
        })
        .collect();
    let map = GraphMap::new(cloned.clone(), base.clone(), pairs).expect("labels line up");
    (cloned, map)
}

/// Independent bracket-preservation oracle: expands both sides of
/// `{φ*y_u, φ*y_v} = φ*{y_u, y_v}` as quadratic forms in the domain
/// coordinates and compares coefficients.
pub fn poisson_expansion_oracle(map: &LinearMap) -> bool {
    let a = map.domain().graph().adjacency();
    let a2 = map.codomain().graph().adjacency();
    let b = map.matrix();
    let (n, m) = (map.domain().dimension(), map.codomain().dimension());
    for u in 0..m {
        for v in 0..m {
            let mut coeff: HashMap<(usize, usize), Rat> = HashMap::new();
            for s in 0..n {
                for t in 0..n {
                    let term = b[(u, s)].clone()
                        * b[(v, t)].clone()
                        * (a[(s, t)].clone() - a2[(u, v)].clone());
                    let key = (s.min(t), s.max(t));
                    *coeff.entry(key).or_insert_with(|| rat(0)) += term;
                }
            }
            if coeff.values().any(|c| !c.is_zero()) {
                return false;
            }
        }
    }
    true
}

/// Graph obtained by listing the vertices of `g` in permuted order (same
/// arcs, same values).
pub fn permuted_graph(g: &SkewGraph, perm: &[usize]) -> SkewGraph {
    let labels: Vec<String> = perm.iter().map(|&i| g.label(i).to_string()).collect();
    let arcs: Vec<(String, String, Rat)> = g
        .arcs_upper()
        .map(|(i, j, v)| (g.label(i).to_string(), g.label(j).to_string(), v.clone()))
        .collect();
    SkewGraph::new(labels, arcs).expect("permuting the vertex list preserves validity")
}
