//! Property tests for the structural layer: decloning, isomorphism
//! search, the graph-to-LV functor and its decloning, and the
//! column-stochastic block automorphisms.

mod common;

use proptest::prelude::*;

use common::{clone_projection, permuted_graph, poisson_expansion_oracle};
use skewlv::graph::{
    aut_order_decomposed, automorphisms_brute, find_isomorphism, GraphMap, SkewGraph, WeightVector,
};
use skewlv::lv::{
    declone_lv_morphism, decloning_lvmap, glplus_sample, lv_of_morphism, LinearMap, LvSystem,
};
use skewlv::matrix::Matrix;
use skewlv::scalar::rat;
use skewlv::Rat;

/// Random skew graph on `1..=max_n` vertices with arc values in {-1,0,1}.
fn arb_graph(max_n: usize) -> impl Strategy<Value = SkewGraph> {
    (1..=max_n).prop_flat_map(|n| {
        prop::collection::vec(-1i64..=1, n * (n - 1) / 2)
            .prop_map(move |vals| graph_from_upper(n, &vals))
    })
}

fn graph_from_upper(n: usize, upper: &[i64]) -> SkewGraph {
    let labels: Vec<String> = (1..=n).map(|i| i.to_string()).collect();
    let mut arcs = Vec::new();
    let mut idx = 0;
    for i in 0..n {
        for j in i + 1..n {
            if upper[idx] != 0 {
                arcs.push((labels[i].clone(), labels[j].clone(), rat(upper[idx])));
            }
            idx += 1;
        }
    }
    SkewGraph::new(labels, arcs).expect("upper triangle determines a valid graph")
}

fn arb_weights(g: &SkewGraph, max: usize) -> impl Strategy<Value = WeightVector> {
    let labels = g.labels().to_vec();
    prop::collection::vec(1..=max, labels.len()).prop_map(move |ws| {
        WeightVector::new(labels.iter().cloned().zip(ws)).expect("positive weights")
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn decloning_is_idempotent(g in arb_graph(7)) {
        let d = g.declone();
        prop_assert!(d.quotient.is_irreducible());
        let dd = d.quotient.declone();
        prop_assert!(dd.classes.iter().all(|c| c.len() == 1));
        prop_assert_eq!(dd.quotient, d.quotient);
    }

    #[test]
    fn declone_projection_is_a_surjective_morphism(g in arb_graph(7)) {
        let d = g.declone();
        prop_assert!(d.projection.is_morphism());
        prop_assert!(d.projection.is_surjective());
        let induced = d.projection.declone_morphism().unwrap();
        let identity: Vec<usize> = (0..d.quotient.order()).collect();
        prop_assert_eq!(induced.indices(), identity.as_slice());
        // class sizes are the weights
        let ws = d.weights.in_order(&d.quotient).unwrap();
        let sizes: Vec<usize> = d.classes.iter().map(Vec::len).collect();
        prop_assert_eq!(ws, sizes);
    }

    #[test]
    fn clone_then_declone_recovers_the_base(
        (g, w) in arb_graph(5).prop_flat_map(|g| {
            let q = g.declone().quotient;
            let w = arb_weights(&q, 3);
            (Just(q), w)
        })
    ) {
        let cloned = g.clone_graph(&w).unwrap();
        prop_assert_eq!(cloned.order(), w.total());
        let d = cloned.declone();
        // quotient isomorphic to the base with exactly the chosen weights
        let iso = find_isomorphism(&d.quotient, &g, Some((&d.weights, &w))).unwrap();
        prop_assert!(iso.is_some());
        // rank is preserved by cloning
        prop_assert_eq!(cloned.adjacency().rank(), g.adjacency().rank());
    }

    #[test]
    fn brute_force_order_equals_the_product_formula(g in arb_graph(7)) {
        let brute = automorphisms_brute(&g, None).unwrap().order() as u64;
        prop_assert_eq!(brute, aut_order_decomposed(&g).unwrap());
    }

    #[test]
    fn permuted_graphs_are_isomorphic(
        (g, perm) in arb_graph(6).prop_flat_map(|g| {
            let n = g.order();
            (Just(g), Just((0..n).collect::<Vec<_>>()).prop_shuffle())
        })
    ) {
        let h = permuted_graph(&g, &perm);
        let iso = find_isomorphism(&g, &h, None).unwrap();
        let iso = iso.expect("a reordered vertex list is always isomorphic");
        prop_assert!(iso.is_morphism() && iso.is_bijective());
        // clone-class sizes transport along the isomorphism
        let dg = g.declone();
        let dh = h.declone();
        for v in 0..g.order() {
            let cv = dg.class_of(g.label(v)).unwrap();
            let cw = dh.class_of(iso.image_label(g.label(v)).unwrap()).unwrap();
            prop_assert_eq!(dg.classes[cv].len(), dh.classes[cw].len());
        }
    }

    #[test]
    fn lv_of_a_projection_morphism_is_an_lv_morphism(
        (base, w) in arb_graph(4).prop_flat_map(|g| {
            let q = g.declone().quotient;
            let w = arb_weights(&q, 3);
            (Just(q), w)
        })
    ) {
        let (_, projection) = clone_projection(&base, &w);
        let map = lv_of_morphism(&projection).unwrap();
        prop_assert!(map.is_lv_morphism());
        prop_assert!(poisson_expansion_oracle(&map));
    }

    #[test]
    fn bracket_condition_agrees_with_the_expansion_oracle(
        (dom, cod, entries) in (arb_graph(4), arb_graph(4)).prop_flat_map(|(d, c)| {
            let len = d.order() * c.order();
            let entries = prop::collection::vec(-2i64..=2, len);
            (Just(d), Just(c), entries)
        })
    ) {
        let domain = LvSystem::new(dom);
        let codomain = LvSystem::new(cod);
        let m = Matrix::from_fn(codomain.dimension(), domain.dimension(), |i, j| {
            rat(entries[i * domain.dimension() + j])
        });
        let map = LinearMap::new(domain, codomain, m).unwrap();
        prop_assert_eq!(map.poisson_condition(), poisson_expansion_oracle(&map));
    }

    #[test]
    fn functor_is_compatible_with_composition(
        (base, w1, w2) in arb_graph(3).prop_flat_map(|g| {
            let q = g.declone().quotient;
            let w1 = arb_weights(&q, 2);
            (Just(q), w1)
        }).prop_flat_map(|(q, w1)| {
            let mid = q.clone_graph(&w1).unwrap();
            let w2 = arb_weights(&mid, 2);
            (Just(q), Just(w1), w2)
        })
    ) {
        let (mid, p1) = clone_projection(&base, &w1);
        let (_, p2) = clone_projection(&mid, &w2);
        let composed = GraphMap::compose(&p1, &p2).unwrap();
        prop_assert!(composed.is_morphism());
        let lhs = lv_of_morphism(&composed).unwrap();
        let rhs = LinearMap::compose(
            &lv_of_morphism(&p1).unwrap(),
            &lv_of_morphism(&p2).unwrap(),
        )
        .unwrap();
        prop_assert_eq!(lhs.matrix(), rhs.matrix());
        prop_assert!(lhs.is_lv_morphism());
    }

    #[test]
    fn decloned_morphisms_make_the_square_commute(
        (base, w) in arb_graph(4).prop_flat_map(|g| {
            let q = g.declone().quotient;
            let w = arb_weights(&q, 3);
            (Just(q), w)
        }),
        seed in 0u64..32
    ) {
        let (cloned, projection) = clone_projection(&base, &w);
        // a surjective LV morphism that is not just a projection: push a
        // sampled block automorphism through the projection
        let phi = LinearMap::compose(
            &lv_of_morphism(&projection).unwrap(),
            &glplus_sample(&cloned, seed),
        )
        .unwrap();
        prop_assert!(phi.is_lv_morphism());
        prop_assert!(phi.is_surjective());
        let induced = declone_lv_morphism(&phi).unwrap();
        let p = decloning_lvmap(&cloned);
        let p2 = decloning_lvmap(&base);
        let lhs = LinearMap::compose(&induced, &p).unwrap();
        let rhs = LinearMap::compose(&p2, &phi).unwrap();
        prop_assert_eq!(lhs.matrix(), rhs.matrix());
    }

    #[test]
    fn permutation_lv_isomorphism_exists_iff_graphs_are_isomorphic(
        g in arb_graph(4),
        h in arb_graph(4),
        pick_pair in prop::bool::ANY,
    ) {
        // half the time compare a graph against a relabeled copy so the
        // isomorphic branch is exercised
        let h = if pick_pair {
            let n = g.order();
            permuted_graph(&g, &(0..n).rev().collect::<Vec<_>>())
        } else {
            h
        };
        let graph_route = find_isomorphism(&g, &h, None).unwrap().is_some();
        let lv_route = exists_permutation_lv_isomorphism(&g, &h);
        prop_assert_eq!(graph_route, lv_route);
    }

    #[test]
    fn glplus_products_and_inverses_stay_lv_morphisms(
        (g, w) in arb_graph(3).prop_flat_map(|g| {
            let q = g.declone().quotient;
            let w = arb_weights(&q, 3);
            (Just(q), w)
        }),
        seed_a in 0u64..16,
        seed_b in 16u64..32,
    ) {
        let cloned = g.clone_graph(&w).unwrap();
        let a = glplus_sample(&cloned, seed_a);
        let b = glplus_sample(&cloned, seed_b);
        let product = LinearMap::compose(&a, &b).unwrap();
        prop_assert!(product.is_lv_morphism());
        prop_assert!(product.is_invertible());
        let inv = a.inverse().unwrap();
        prop_assert!(inv.is_lv_morphism());
    }

    #[test]
    fn casimir_vectors_lie_in_the_exact_kernel(g in arb_graph(7)) {
        let sys = LvSystem::new(g.clone());
        let basis = sys.casimir_basis();
        prop_assert_eq!(basis.len(), sys.dimension() - sys.rank());
        for c in &basis {
            let alpha: Vec<Rat> = c.exponents().iter().map(|&e| rat(e)).collect();
            let image = g.adjacency().apply(&alpha);
            prop_assert!(image.iter().all(|v| *v == rat(0)));
        }
    }
}

/// Drift of a pulled-back first integral on the cloned system stays
/// within an order of magnitude of the base drift (both are integrator
/// noise; the factor covers the summed-coordinate error budget).
#[test]
fn pullback_integrals_inherit_conservation() {
    use skewlv::dynamics::{drift, integrate, Observable};
    use skewlv::lax::CloneLayout;
    use skewlv::sampling;

    let base = skewlv::families::km(4).unwrap();
    let w = WeightVector::new([("1", 2), ("2", 1), ("3", 1), ("4", 1)]).unwrap();
    let layout = CloneLayout::new(4, 1, vec![2, 1, 1, 1]).unwrap();
    let base_sys = LvSystem::new(base.clone());
    let clone_sys = LvSystem::new(base.clone_graph(&w).unwrap());

    let x0 = sampling::points_in_box(5, 1, 0.5, 1.5, &mut sampling::rng(21)).remove(0);
    let y0 = layout.chi(&x0);

    let base_obs = || {
        let mut obs = vec![Observable::hamiltonian()];
        for (i, c) in base_sys.casimir_basis().into_iter().enumerate() {
            obs.push(Observable::casimir(format!("C{i}"), c));
        }
        obs
    };
    let base_traj = integrate(&base_sys, &y0, 1e-3, 10_000).unwrap();
    let base_report = drift(&base_traj, &base_obs());

    let pulled: Vec<Observable> = base_obs()
        .into_iter()
        .map(|o| o.pullback_through(layout.clone()))
        .collect();
    let clone_traj = integrate(&clone_sys, &x0, 1e-3, 10_000).unwrap();
    let clone_report = drift(&clone_traj, &pulled);

    for (b, c) in base_report.entries.iter().zip(&clone_report.entries) {
        let budget = 11.0 * b.max_rel_dev.max(1e-12);
        assert!(
            c.max_rel_dev < budget,
            "{}: pullback drift {} exceeds {budget}",
            c.name,
            c.max_rel_dev
        );
    }
}

/// Exhaustive search for a coordinate-permutation LV isomorphism. By the
/// classification of linear LV isomorphisms this succeeds exactly when
/// the graphs are isomorphic, which is what the property asserts.
fn exists_permutation_lv_isomorphism(g: &SkewGraph, h: &SkewGraph) -> bool {
    let n = g.order();
    if n != h.order() {
        return false;
    }
    let dom = LvSystem::new(g.clone());
    let cod = LvSystem::new(h.clone());
    let mut perm: Vec<usize> = (0..n).collect();
    loop {
        let mut m = Matrix::<Rat>::zeros(n, n);
        for (s, &u) in perm.iter().enumerate() {
            m[(u, s)] = rat(1);
        }
        let map = LinearMap::new(dom.clone(), cod.clone(), m).unwrap();
        if map.is_lv_morphism() {
            return true;
        }
        if !next_permutation(&mut perm) {
            return false;
        }
    }
}

fn next_permutation(perm: &mut [usize]) -> bool {
    let n = perm.len();
    if n < 2 {
        return false;
    }
    let mut i = n - 1;
    while i > 0 && perm[i - 1] >= perm[i] {
        i -= 1;
    }
    if i == 0 {
        return false;
    }
    let mut j = n - 1;
    while perm[j] <= perm[i - 1] {
        j -= 1;
    }
    perm.swap(i - 1, j);
    perm[i..].reverse();
    true
}
