//! Automorphism and isomorphism search.
//!
//! Brute force is a pruned backtracking over vertex bijections, capped at
//! [`BRUTE_FORCE_LIMIT`] vertices. The scalable route for reducible graphs
//! goes through the decloned quotient: automorphism orders come from the
//! product formula over clone classes, and isomorphism search runs on the
//! quotients and lifts class-by-class.

use std::collections::HashSet;

use super::{GraphError, GraphMap, SkewGraph, WeightVector};
use crate::scalar::Scalar;

/// Largest graph order accepted by the factorial searches.
pub const BRUTE_FORCE_LIMIT: usize = 9;

/// A finite permutation group on the vertices of one graph, stored as its
/// full element list (orders here stay small).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PermutationGroup {
    degree: usize,
    elements: Vec<Vec<usize>>,
}

impl PermutationGroup {
    fn new(degree: usize, mut elements: Vec<Vec<usize>>) -> Self {
        elements.sort();
        elements.dedup();
        PermutationGroup { degree, elements }
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn order(&self) -> usize {
        self.elements.len()
    }

    pub fn elements(&self) -> &[Vec<usize>] {
        &self.elements
    }

    pub fn contains(&self, perm: &[usize]) -> bool {
        self.elements.iter().any(|e| e == perm)
    }

    /// Full group-axiom check: identity, inverses, closure.
    pub fn is_group(&self) -> bool {
        let set: HashSet<&[usize]> = self.elements.iter().map(Vec::as_slice).collect();
        if !set.contains((0..self.degree).collect::<Vec<_>>().as_slice()) {
            return false;
        }
        for e in &self.elements {
            if !set.contains(invert(e).as_slice()) {
                return false;
            }
        }
        self.elements.iter().all(|a| {
            self.elements
                .iter()
                .all(|b| set.contains(compose(a, b).as_slice()))
        })
    }

    /// A small generating set, chosen greedily in element order.
    pub fn generators(&self) -> Vec<Vec<usize>> {
        let identity: Vec<usize> = (0..self.degree).collect();
        let mut gens: Vec<Vec<usize>> = Vec::new();
        let mut span: HashSet<Vec<usize>> = HashSet::from([identity.clone()]);
        for e in &self.elements {
            if span.contains(e) {
                continue;
            }
            gens.push(e.clone());
            // regenerate the span from scratch; group orders are tiny
            span = close_under_products(&gens, self.degree);
            if span.len() == self.order() {
                break;
            }
        }
        gens
    }
}

pub(crate) fn compose(outer: &[usize], inner: &[usize]) -> Vec<usize> {
    inner.iter().map(|&v| outer[v]).collect()
}

pub(crate) fn invert(perm: &[usize]) -> Vec<usize> {
    let mut inv = vec![0; perm.len()];
    for (i, &v) in perm.iter().enumerate() {
        inv[v] = i;
    }
    inv
}

fn close_under_products(gens: &[Vec<usize>], degree: usize) -> HashSet<Vec<usize>> {
    let mut span: HashSet<Vec<usize>> = HashSet::from([(0..degree).collect()]);
    let mut frontier: Vec<Vec<usize>> = vec![(0..degree).collect()];
    while let Some(p) = frontier.pop() {
        for g in gens {
            for q in [compose(g, &p), compose(&invert(g), &p)] {
                if span.insert(q.clone()) {
                    frontier.push(q);
                }
            }
        }
    }
    span
}

/// Sorted adjacency row, used as a permutation-invariant vertex signature.
fn row_signature<T: Scalar>(g: &SkewGraph<T>, v: usize) -> Vec<T> {
    let mut row = g.adjacency().row(v).to_vec();
    row.sort_by(|a, b| a.partial_cmp(b).expect("scalar values must be comparable"));
    row
}

/// Backtracking search for all adjacency-preserving bijections between two
/// graphs of equal order. `compatible` prunes candidate images per vertex.
fn search_bijections<T: Scalar>(
    dom: &SkewGraph<T>,
    cod: &SkewGraph<T>,
    compatible: &dyn Fn(usize, usize) -> bool,
    stop_at_first: bool,
) -> Vec<Vec<usize>> {
    debug_assert_eq!(dom.order(), cod.order());
    let n = dom.order();
    let mut search = BijectionSearch {
        dom,
        cod,
        compatible,
        stop_at_first,
        image: vec![usize::MAX; n],
        used: vec![false; n],
        found: Vec::new(),
    };
    search.recurse(0);
    search.found
}

struct BijectionSearch<'a, T> {
    dom: &'a SkewGraph<T>,
    cod: &'a SkewGraph<T>,
    compatible: &'a dyn Fn(usize, usize) -> bool,
    stop_at_first: bool,
    image: Vec<usize>,
    used: Vec<bool>,
    found: Vec<Vec<usize>>,
}

impl<T: Scalar> BijectionSearch<'_, T> {
    fn recurse(&mut self, v: usize) {
        let n = self.dom.order();
        if v == n {
            self.found.push(self.image.clone());
            return;
        }
        for w in 0..n {
            if self.used[w] || !(self.compatible)(v, w) {
                continue;
            }
            let consistent = (0..v).all(|s| self.cod.arc(self.image[s], w) == self.dom.arc(s, v));
            if !consistent {
                continue;
            }
            self.image[v] = w;
            self.used[w] = true;
            self.recurse(v + 1);
            self.used[w] = false;
            self.image[v] = usize::MAX;
            if self.stop_at_first && !self.found.is_empty() {
                return;
            }
        }
    }
}

/// All vertex permutations preserving arc values (and weights, when given),
/// by exhaustive pruned search capped at [`BRUTE_FORCE_LIMIT`] vertices.
pub fn automorphisms_brute<T: Scalar>(
    g: &SkewGraph<T>,
    weights: Option<&WeightVector>,
) -> Result<PermutationGroup, GraphError> {
    automorphisms_brute_with_limit(g, weights, BRUTE_FORCE_LIMIT)
}

/// As [`automorphisms_brute`], with an explicit order cap.
pub fn automorphisms_brute_with_limit<T: Scalar>(
    g: &SkewGraph<T>,
    weights: Option<&WeightVector>,
    limit: usize,
) -> Result<PermutationGroup, GraphError> {
    let n = g.order();
    if n > limit {
        return Err(GraphError::TooLarge { order: n, limit });
    }
    let w = weights.map(|w| w.in_order(g)).transpose()?;
    let signatures: Vec<_> = (0..n).map(|v| row_signature(g, v)).collect();
    let compatible = |v: usize, c: usize| {
        signatures[v] == signatures[c] && w.as_ref().is_none_or(|w| w[v] == w[c])
    };
    let elements = search_bijections(g, g, &compatible, false);
    let group = PermutationGroup::new(n, elements);
    debug_assert!(group.is_group());
    Ok(group)
}

/// Automorphism order through the clone-class decomposition: the kernel of
/// the quotient map contributes one symmetric group per class, so
/// `|Aut(Γ)| = Π_c w(c)! · |Aut(quotient, w)|`. Only the quotient is
/// searched by brute force.
pub fn aut_order_decomposed<T: Scalar>(g: &SkewGraph<T>) -> Result<u64, GraphError> {
    let d = g.declone();
    let quotient_group = automorphisms_brute(&d.quotient, Some(&d.weights))?;
    let mut order = quotient_group.order() as u64;
    for c in &d.classes {
        order *= factorial(c.len());
    }
    Ok(order)
}

fn factorial(n: usize) -> u64 {
    (2..=n as u64).product()
}

/// Searches for an isomorphism `g -> h`, optionally weight-preserving.
///
/// The search runs on the decloned quotients (graphs are isomorphic if and
/// only if their weighted quotients are) and lifts the quotient map
/// class-by-class, so only the quotient order is subject to the
/// brute-force cap.
pub fn find_isomorphism<T: Scalar>(
    g: &SkewGraph<T>,
    h: &SkewGraph<T>,
    weighted: Option<(&WeightVector, &WeightVector)>,
) -> Result<Option<GraphMap<T>>, GraphError> {
    if g.order() != h.order() {
        return Ok(None);
    }
    let (wg, wh) = match weighted {
        Some((wg, wh)) => (Some(wg.in_order(g)?), Some(wh.in_order(h)?)),
        None => (None, None),
    };
    let dg = g.declone();
    let dh = h.declone();
    let qn = dg.quotient.order();
    if qn != dh.quotient.order() {
        return Ok(None);
    }
    if qn > BRUTE_FORCE_LIMIT {
        return Err(GraphError::TooLarge {
            order: qn,
            limit: BRUTE_FORCE_LIMIT,
        });
    }

    let class_indices = |d: &super::DecloneResult<T>, g: &SkewGraph<T>| -> Vec<Vec<usize>> {
        d.classes
            .iter()
            .map(|c| c.iter().map(|l| g.index_of(l).unwrap()).collect())
            .collect()
    };
    let gc = class_indices(&dg, g);
    let hc = class_indices(&dh, h);

    // multiset of given weights inside each class, None when unweighted
    let class_weights = |classes: &[Vec<usize>], w: &Option<Vec<usize>>| -> Vec<Vec<usize>> {
        classes
            .iter()
            .map(|c| {
                let mut ws: Vec<usize> = match w {
                    Some(w) => c.iter().map(|&v| w[v]).collect(),
                    None => vec![1; c.len()],
                };
                ws.sort_unstable();
                ws
            })
            .collect()
    };
    let gw = class_weights(&gc, &wg);
    let hw = class_weights(&hc, &wh);

    let sig_g: Vec<_> = (0..qn).map(|v| row_signature(&dg.quotient, v)).collect();
    let sig_h: Vec<_> = (0..qn).map(|v| row_signature(&dh.quotient, v)).collect();
    let compatible =
        |v: usize, c: usize| sig_g[v] == sig_h[c] && gc[v].len() == hc[c].len() && gw[v] == hw[c];

    let found = search_bijections(&dg.quotient, &dh.quotient, &compatible, true);
    let Some(psi) = found.into_iter().next() else {
        return Ok(None);
    };

    // lift class-by-class; when weighted, pair clones sorted by weight
    let mut map = vec![usize::MAX; g.order()];
    for (ci, class) in gc.iter().enumerate() {
        let target = &hc[psi[ci]];
        let mut src = class.clone();
        let mut dst = target.clone();
        if let (Some(wg), Some(wh)) = (&wg, &wh) {
            src.sort_by_key(|&v| (wg[v], v));
            dst.sort_by_key(|&v| (wh[v], v));
        }
        for (&s, &d) in src.iter().zip(&dst) {
            map[s] = d;
        }
    }
    let iso = GraphMap::from_indices(g.clone(), h.clone(), map)?;
    debug_assert!(iso.is_morphism() && iso.is_bijective());
    if let (Some(wg), Some(wh)) = (&wg, &wh) {
        debug_assert!((0..g.order()).all(|v| wh[iso.indices()[v]] == wg[v]));
    }
    Ok(Some(iso))
}

#[cfg(test)]
mod tests {
    use super::super::fixtures::*;
    use super::*;
    use crate::families;
    use crate::scalar::rat;
    use crate::Rat;

    #[test]
    fn km_circuits_have_cyclic_automorphism_groups() {
        for n in 3..=8 {
            let g = families::km(n).unwrap();
            let group = automorphisms_brute(&g, None).unwrap();
            assert_eq!(group.order(), n, "KM({n})");
            assert!(group.is_group());
        }
    }

    #[test]
    fn tournament_has_trivial_automorphism_group() {
        let g = families::lv_n0(5).unwrap();
        assert_eq!(automorphisms_brute(&g, None).unwrap().order(), 1);
    }

    #[test]
    fn two_sources_swap_is_the_only_symmetry() {
        let group = automorphisms_brute(&two_sources(), None).unwrap();
        assert_eq!(group.order(), 2);
        assert!(group.contains(&[1, 0, 2]));
    }

    #[test]
    fn brute_force_rejects_large_graphs() {
        let labels: Vec<String> = (0..10).map(|i| i.to_string()).collect();
        let g: SkewGraph = SkewGraph::new(labels, Vec::<(&str, &str, Rat)>::new()).unwrap();
        assert!(matches!(
            automorphisms_brute(&g, None),
            Err(GraphError::TooLarge { order: 10, .. })
        ));
    }

    #[test]
    fn decomposed_order_matches_brute_force_on_the_cloned_circuit() {
        let cloned = circuit4_cloned();
        // kernel 2!·1!·2!·1! = 4, weighted quotient automorphisms: identity
        // and the half-turn, so 8 in total
        assert_eq!(aut_order_decomposed(&cloned).unwrap(), 8);
        assert_eq!(automorphisms_brute(&cloned, None).unwrap().order(), 8);
    }

    #[test]
    fn decomposed_order_equals_brute_force_on_irreducible_graphs() {
        let g = families::km(6).unwrap();
        assert_eq!(aut_order_decomposed(&g).unwrap(), 6);
    }

    #[test]
    fn weighted_automorphisms_form_a_subgroup() {
        let (g, w) = circuit4();
        let plain = automorphisms_brute(&g, None).unwrap();
        let weighted = automorphisms_brute(&g, Some(&w)).unwrap();
        assert_eq!(plain.order(), 4);
        assert_eq!(weighted.order(), 2);
        for e in weighted.elements() {
            assert!(plain.contains(e));
        }
    }

    #[test]
    fn generators_generate() {
        let g = families::km(6).unwrap();
        let group = automorphisms_brute(&g, None).unwrap();
        let gens = group.generators();
        assert_eq!(gens.len(), 1); // cyclic
        let span = super::close_under_products(&gens, group.degree());
        assert_eq!(span.len(), group.order());
    }

    #[test]
    fn graph_is_isomorphic_to_itself_via_search() {
        let g = families::bogo(6, 2).unwrap();
        let iso = find_isomorphism(&g, &g, None).unwrap().unwrap();
        assert!(iso.is_morphism());
    }

    #[test]
    fn km6_with_reversed_vertex_order_is_isomorphic() {
        let g = families::km(6).unwrap();
        let rev: Vec<&str> = ["6", "5", "4", "3", "2", "1"].to_vec();
        let arcs: Vec<(String, String, Rat)> = (1..=6)
            .map(|i| (i.to_string(), (i % 6 + 1).to_string(), rat(1)))
            .collect();
        let h = SkewGraph::new(rev, arcs).unwrap();
        let iso = find_isomorphism(&g, &h, None).unwrap();
        assert!(iso.is_some());
        // oracle: exhaustive search over all 720 bijections
        let all = search_bijections(&g, &h, &|_, _| true, false);
        assert!(!all.is_empty());
    }

    #[test]
    fn different_arc_counts_are_never_isomorphic() {
        let g = families::km(6).unwrap();
        let h = families::bogo(6, 2).unwrap();
        assert!(find_isomorphism(&g, &h, None).unwrap().is_none());
    }

    #[test]
    fn weighted_isomorphism_respects_given_weights() {
        let (g, w2121) = circuit4();
        let w1212 = WeightVector::new([("s", 1), ("t", 2), ("u", 1), ("v", 2)]).unwrap();
        // rotating by one step carries (2,1,2,1) onto (1,2,1,2)
        let iso = find_isomorphism(&g, &g, Some((&w2121, &w1212))).unwrap();
        let iso = iso.expect("the one-step rotation preserves these weights");
        let wd = w2121.in_order(&g).unwrap();
        let wc = w1212.in_order(&g).unwrap();
        for v in 0..4 {
            assert_eq!(wc[iso.indices()[v]], wd[v]);
        }
        // all-ones versus (2,1,2,1) leaves nothing to map to
        let ones = WeightVector::all_ones(&g);
        assert!(find_isomorphism(&g, &g, Some((&w2121, &ones)))
            .unwrap()
            .is_none());
    }

    #[test]
    fn cloned_graphs_isomorphic_iff_weighted_quotients_are() {
        let (g, w) = circuit4();
        let cloned = circuit4_cloned();
        let w1212 = WeightVector::new([("s", 1), ("t", 2), ("u", 1), ("v", 2)]).unwrap();
        let other = g.clone_graph(&w1212).unwrap();
        // quotient weights (2,1,2,1) and (1,2,1,2) match under rotation
        let iso = find_isomorphism(&cloned, &other, None).unwrap();
        assert!(iso.is_some());
        let iso = iso.unwrap();
        assert!(iso.is_morphism() && iso.is_bijective());
        // but (3,1,1,1) weights give a genuinely different clone
        let w3111 = WeightVector::new([("s", 3), ("t", 1), ("u", 1), ("v", 1)]).unwrap();
        let third = g.clone_graph(&w3111).unwrap();
        assert!(find_isomorphism(&cloned, &third, None).unwrap().is_none());
        let _ = w;
    }

    #[test]
    fn weighted_lift_pairs_clones_by_weight() {
        // two clones in one class carry different given weights; the lift
        // must pair them with matching weights, not by position
        let cloned = circuit4_cloned();
        let wg = WeightVector::new([
            ("s#1", 1),
            ("s#2", 2),
            ("t#1", 1),
            ("u#1", 3),
            ("u#2", 1),
            ("v#1", 1),
        ])
        .unwrap();
        let wh = WeightVector::new([
            ("s#1", 2),
            ("s#2", 1),
            ("t#1", 1),
            ("u#1", 1),
            ("u#2", 3),
            ("v#1", 1),
        ])
        .unwrap();
        let iso = find_isomorphism(&cloned, &cloned, Some((&wg, &wh)))
            .unwrap()
            .expect("swapping within classes matches the weight multisets");
        let wgv = wg.in_order(&cloned).unwrap();
        let whv = wh.in_order(&cloned).unwrap();
        for v in 0..cloned.order() {
            assert_eq!(whv[iso.indices()[v]], wgv[v]);
        }
        // a weight multiset mismatch inside a class blocks the search
        let bad = WeightVector::new([
            ("s#1", 2),
            ("s#2", 2),
            ("t#1", 1),
            ("u#1", 1),
            ("u#2", 3),
            ("v#1", 1),
        ])
        .unwrap();
        assert!(find_isomorphism(&cloned, &cloned, Some((&wg, &bad)))
            .unwrap()
            .is_none());
    }
}
