//! Lotka-Volterra systems attached to skew-symmetric graphs.
//!
//! A graph with adjacency `A` carries the quadratic bracket
//! `{x_s, x_t} = a_{s,t} x_s x_t`, Hamiltonian `H = Σ x_s`, and vector
//! field `ẋ_s = x_s Σ_t a_{s,t} x_t`. Linear maps between two such
//! systems are LV morphisms when they preserve both the bracket and the
//! Hamiltonian; for a matrix `B = (β_{u,s})`, with `φ*y_u = Σ_s β_{u,s}
//! x_s`, the bracket condition reduces to the coefficient identity
//!
//! ```text
//! (a'_{u,v} - a_{s,t}) β_{u,s} β_{v,t} + (a'_{u,v} + a_{s,t}) β_{u,t} β_{v,s} = 0
//! ```
//!
//! for all vertex pairs, and Hamiltonian preservation says every column
//! of `B` sums to one. All checks here are exact.

use num::{BigInt, Integer};
use num_traits::{Signed, ToPrimitive, Zero};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::graph::{automorphisms_brute, GraphError, GraphMap, SkewGraph};
use crate::matrix::Matrix;
use crate::scalar::{rat, Scalar};
use crate::Rat;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LvError {
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("linear map is not an LV morphism")]
    NotLvMorphism,
    #[error("linear map is not surjective")]
    NotSurjective,
    #[error("precondition failed: {0}")]
    PreconditionFailed(String),
}

/// The Hamiltonian system a skew-symmetric graph defines on its
/// coordinate space. Owns the exact adjacency and a float copy used by
/// the numeric layer.
#[derive(Debug, Clone)]
pub struct LvSystem<T = Rat> {
    graph: SkewGraph<T>,
    adj_f64: Matrix<f64>,
}

impl<T: Scalar> PartialEq for LvSystem<T> {
    fn eq(&self, other: &Self) -> bool {
        self.graph == other.graph
    }
}

impl<T: Scalar> LvSystem<T> {
    pub fn new(graph: SkewGraph<T>) -> Self {
        let adj_f64 = graph
            .adjacency()
            .map(|v| v.to_f64().expect("arc value convertible to f64"));
        LvSystem { graph, adj_f64 }
    }

    pub fn graph(&self) -> &SkewGraph<T> {
        &self.graph
    }

    pub fn dimension(&self) -> usize {
        self.graph.order()
    }

    /// `ẋ_s = x_s Σ_t a_{s,t} x_t`, evaluated in double precision.
    pub fn vector_field(&self, x: &[f64]) -> Result<Vec<f64>, LvError> {
        let n = self.dimension();
        if x.len() != n {
            return Err(LvError::DimensionMismatch {
                expected: n,
                got: x.len(),
            });
        }
        Ok((0..n)
            .map(|s| {
                let interaction: f64 = (0..n).map(|t| self.adj_f64[(s, t)] * x[t]).sum();
                x[s] * interaction
            })
            .collect())
    }

    /// Hamiltonian `H = Σ x_s`.
    pub fn hamiltonian(&self, x: &[f64]) -> f64 {
        x.iter().sum()
    }

    /// Bracket of two coordinate functions at a point:
    /// `{x_s, x_t} = a_{s,t} x_s x_t`.
    pub fn bracket(&self, s: usize, t: usize, x: &[f64]) -> f64 {
        self.adj_f64[(s, t)] * x[s] * x[t]
    }

    /// Exact rank of the adjacency matrix; equals the rank of the Poisson
    /// structure.
    pub fn rank(&self) -> usize {
        self.graph.adjacency().rank()
    }
}

impl LvSystem<Rat> {
    /// Basis of the exact nullspace of the adjacency matrix, normalized
    /// to primitive integer vectors with positive leading entry. One
    /// monomial Casimir per vector; the count is `dimension - rank`.
    pub fn casimir_basis(&self) -> Vec<CasimirMonomial> {
        self.graph
            .adjacency()
            .nullspace()
            .into_iter()
            .map(|v| CasimirMonomial::from_rational_vector(&v))
            .collect()
    }
}

/// Monomial `x_1^{α_1} ... x_n^{α_n}` with `A·α = 0`; constant along every
/// flow of the bracket.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CasimirMonomial {
    exponents: Vec<i64>,
}

impl CasimirMonomial {
    pub fn new(exponents: Vec<i64>) -> Self {
        CasimirMonomial { exponents }
    }

    /// Clears denominators, divides out the content and fixes the sign of
    /// the first nonzero entry to be positive.
    pub fn from_rational_vector(v: &[Rat]) -> Self {
        let lcm = v.iter().fold(BigInt::from(1), |acc, r| acc.lcm(r.denom()));
        let mut ints: Vec<BigInt> = v.iter().map(|r| (r * &lcm).to_integer()).collect();
        let gcd = ints.iter().fold(BigInt::from(0), |acc, x| acc.gcd(x));
        if !gcd.is_zero() {
            for x in &mut ints {
                *x = &*x / &gcd;
            }
        }
        if let Some(first) = ints.iter().find(|x| !x.is_zero()) {
            if first.is_negative() {
                for x in &mut ints {
                    *x = -&*x;
                }
            }
        }
        CasimirMonomial {
            exponents: ints
                .iter()
                .map(|x| x.to_i64().expect("casimir exponent fits in i64"))
                .collect(),
        }
    }

    pub fn exponents(&self) -> &[i64] {
        &self.exponents
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        self.exponents
            .iter()
            .zip(x)
            .map(|(&e, &xi)| xi.powi(e as i32))
            .product()
    }
}

/// Exact linear map between two LV phase spaces; a *candidate* morphism.
/// Rows are indexed by codomain vertices, columns by domain vertices:
/// `φ*y_u = Σ_s β_{u,s} x_s`.
#[derive(Debug, Clone)]
pub struct LinearMap<T = Rat> {
    domain: LvSystem<T>,
    codomain: LvSystem<T>,
    matrix: Matrix<T>,
}

impl<T: Scalar> PartialEq for LinearMap<T> {
    fn eq(&self, other: &Self) -> bool {
        self.domain == other.domain
            && self.codomain == other.codomain
            && self.matrix == other.matrix
    }
}

impl<T: Scalar> LinearMap<T> {
    pub fn new(
        domain: LvSystem<T>,
        codomain: LvSystem<T>,
        matrix: Matrix<T>,
    ) -> Result<Self, LvError> {
        if matrix.rows() != codomain.dimension() {
            return Err(LvError::DimensionMismatch {
                expected: codomain.dimension(),
                got: matrix.rows(),
            });
        }
        if matrix.cols() != domain.dimension() {
            return Err(LvError::DimensionMismatch {
                expected: domain.dimension(),
                got: matrix.cols(),
            });
        }
        Ok(LinearMap {
            domain,
            codomain,
            matrix,
        })
    }

    pub fn identity(sys: &LvSystem<T>) -> Self {
        LinearMap {
            domain: sys.clone(),
            codomain: sys.clone(),
            matrix: Matrix::identity(sys.dimension()),
        }
    }

    pub fn domain(&self) -> &LvSystem<T> {
        &self.domain
    }

    pub fn codomain(&self) -> &LvSystem<T> {
        &self.codomain
    }

    pub fn matrix(&self) -> &Matrix<T> {
        &self.matrix
    }

    pub fn to_f64_matrix(&self) -> Matrix<f64> {
        self.matrix
            .map(|v| v.to_f64().expect("matrix entry convertible to f64"))
    }

    /// Bracket-preservation condition, checked coefficient by coefficient.
    /// By skew-symmetry it is enough to run over `s <= t`, `u <= v`.
    pub fn poisson_condition(&self) -> bool {
        let a = self.domain.graph.adjacency();
        let a2 = self.codomain.graph.adjacency();
        let b = &self.matrix;
        let (n, m) = (self.domain.dimension(), self.codomain.dimension());
        for s in 0..n {
            for t in s..n {
                for u in 0..m {
                    for v in u..m {
                        let lhs = (a2[(u, v)].clone() - a[(s, t)].clone())
                            * b[(u, s)].clone()
                            * b[(v, t)].clone()
                            + (a2[(u, v)].clone() + a[(s, t)].clone())
                                * b[(u, t)].clone()
                                * b[(v, s)].clone();
                        if !lhs.is_zero() {
                            return false;
                        }
                    }
                }
            }
        }
        true
    }

    /// Hamiltonian preservation: `φ*H' = H`, i.e. every column sums to 1.
    pub fn preserves_hamiltonian(&self) -> bool {
        (0..self.matrix.cols()).all(|j| {
            let sum =
                (0..self.matrix.rows()).fold(T::zero(), |acc, i| acc + self.matrix[(i, j)].clone());
            sum == T::one()
        })
    }

    pub fn is_lv_morphism(&self) -> bool {
        self.poisson_condition() && self.preserves_hamiltonian()
    }

    pub fn is_surjective(&self) -> bool {
        self.matrix.rank() == self.codomain.dimension()
    }

    pub fn is_invertible(&self) -> bool {
        self.domain.dimension() == self.codomain.dimension() && self.is_surjective()
    }

    pub fn inverse(&self) -> Option<Self> {
        if self.domain.dimension() != self.codomain.dimension() {
            return None;
        }
        Some(LinearMap {
            domain: self.codomain.clone(),
            codomain: self.domain.clone(),
            matrix: self.matrix.inverse()?,
        })
    }

    /// `outer ∘ inner`; systems must agree at the junction.
    pub fn compose(outer: &Self, inner: &Self) -> Result<Self, LvError> {
        if inner.codomain != outer.domain {
            return Err(LvError::PreconditionFailed(
                "maps are not composable".to_string(),
            ));
        }
        Ok(LinearMap {
            domain: inner.domain.clone(),
            codomain: outer.codomain.clone(),
            matrix: outer.matrix.mul(&inner.matrix),
        })
    }

    pub fn apply_f64(&self, x: &[f64]) -> Vec<f64> {
        self.to_f64_matrix().apply(x)
    }
}

/// Linear extension of a graph morphism: `φ*y_u = Σ_{Φ(s)=u} x_s`.
pub fn lv_of_morphism<T: Scalar>(m: &GraphMap<T>) -> Result<LinearMap<T>, LvError> {
    if !m.is_morphism() {
        return Err(GraphError::NotMorphism.into());
    }
    let domain = LvSystem::new(m.domain().clone());
    let codomain = LvSystem::new(m.codomain().clone());
    let mut matrix = Matrix::zeros(codomain.dimension(), domain.dimension());
    for (s, &u) in m.indices().iter().enumerate() {
        matrix[(u, s)] = T::one();
    }
    Ok(LinearMap {
        domain,
        codomain,
        matrix,
    })
}

/// The coordinate-summing surjection onto the decloned system.
pub fn decloning_lvmap<T: Scalar>(g: &SkewGraph<T>) -> LinearMap<T> {
    lv_of_morphism(&g.declone().projection).expect("decloning projection is a graph morphism")
}

/// Partition of the domain vertex set carried by a surjective LV morphism
/// onto an irreducible system: `φ*y_u = Σ_{s ∈ parts[u]} x_s`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NormalFormPartition {
    parts: Vec<Vec<usize>>,
}

impl NormalFormPartition {
    /// Domain vertices mapped onto codomain vertex `u`.
    pub fn part(&self, u: usize) -> &[usize] {
        &self.parts[u]
    }

    pub fn parts(&self) -> &[Vec<usize>] {
        &self.parts
    }
}

/// Normal form of a surjective LV morphism with irreducible codomain: the
/// matrix must be zero/one with exactly one `1` per column, its supports
/// partition the domain, and arc values are constant between parts. Any
/// violation is reported as a failed precondition.
pub fn normal_form<T: Scalar>(map: &LinearMap<T>) -> Result<NormalFormPartition, LvError> {
    if !map.is_lv_morphism() {
        return Err(LvError::PreconditionFailed(
            "not an LV morphism".to_string(),
        ));
    }
    if !map.is_surjective() {
        return Err(LvError::PreconditionFailed("not surjective".to_string()));
    }
    if !map.codomain().graph().is_irreducible() {
        return Err(LvError::PreconditionFailed(
            "codomain is not irreducible".to_string(),
        ));
    }
    let b = map.matrix();
    let (m, n) = (b.rows(), b.cols());
    let mut parts = vec![Vec::new(); m];
    for s in 0..n {
        let mut hits = Vec::new();
        for u in 0..m {
            let entry = &b[(u, s)];
            if entry.is_zero() {
                continue;
            }
            if *entry != T::one() {
                return Err(LvError::PreconditionFailed(format!(
                    "entry ({u},{s}) is {entry}, expected 0 or 1"
                )));
            }
            hits.push(u);
        }
        match hits.as_slice() {
            [u] => parts[*u].push(s),
            _ => {
                return Err(LvError::PreconditionFailed(format!(
                    "column {s} has {} nonzero entries, expected exactly one",
                    hits.len()
                )))
            }
        }
    }
    if parts.iter().any(Vec::is_empty) {
        return Err(LvError::PreconditionFailed(
            "some part of the partition is empty".to_string(),
        ));
    }
    // arc values must be constant between distinct parts and agree with
    // the codomain arc
    let a = map.domain().graph().adjacency();
    let a2 = map.codomain().graph().adjacency();
    for u in 0..m {
        for v in 0..m {
            if u == v {
                continue;
            }
            for &s in &parts[u] {
                for &t in &parts[v] {
                    if a[(s, t)] != a2[(u, v)] {
                        return Err(LvError::PreconditionFailed(format!(
                            "arc value between parts {u},{v} is not constant"
                        )));
                    }
                }
            }
        }
    }
    Ok(NormalFormPartition { parts })
}

/// Declones a surjective LV morphism: the unique map between the decloned
/// systems making the square with the two decloning maps commute exactly.
pub fn declone_lv_morphism<T: Scalar>(map: &LinearMap<T>) -> Result<LinearMap<T>, LvError> {
    if !map.is_lv_morphism() {
        return Err(LvError::NotLvMorphism);
    }
    if !map.is_surjective() {
        return Err(LvError::NotSurjective);
    }
    let dd = map.domain().graph().declone();
    let dc = map.codomain().graph().declone();
    let p = lv_of_morphism(&dd.projection)?;
    let p2 = lv_of_morphism(&dc.projection)?;
    // push the map down to the irreducible codomain quotient and read off
    // its normal-form partition of the domain vertices
    let down = LinearMap::compose(&p2, map)?;
    let partition = normal_form(&down)?;
    let part_of = {
        let mut part_of = vec![usize::MAX; map.domain().dimension()];
        for (u, part) in partition.parts().iter().enumerate() {
            for &s in part {
                part_of[s] = u;
            }
        }
        part_of
    };
    // equivalence classes refine the partition, so each quotient vertex of
    // the domain lands in a single part
    let quotient_domain = LvSystem::new(dd.quotient.clone());
    let quotient_codomain = LvSystem::new(dc.quotient.clone());
    let mut matrix = Matrix::zeros(quotient_codomain.dimension(), quotient_domain.dimension());
    for (ci, class) in dd.classes.iter().enumerate() {
        let members: Vec<usize> = class
            .iter()
            .map(|l| map.domain().graph().index_of(l).unwrap())
            .collect();
        let u = part_of[members[0]];
        if members.iter().any(|&s| part_of[s] != u) {
            return Err(LvError::PreconditionFailed(
                "clone class split across parts".to_string(),
            ));
        }
        matrix[(u, ci)] = T::one();
    }
    let induced = LinearMap {
        domain: quotient_domain,
        codomain: quotient_codomain,
        matrix,
    };
    debug_assert_eq!(
        LinearMap::compose(&induced, &p).unwrap().matrix,
        down.matrix
    );
    Ok(induced)
}

/// Block sizes and finite factor of the automorphism group of `LV(Γ)`:
/// one invertible column-stochastic block per clone class, extended by
/// the weighted automorphisms of the quotient.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AutDescription {
    block_sizes: Vec<usize>,
    quotient_aut_order: u64,
}

impl AutDescription {
    pub fn block_sizes(&self) -> &[usize] {
        &self.block_sizes
    }

    pub fn quotient_aut_order(&self) -> u64 {
        self.quotient_aut_order
    }

    /// Dimension of the continuous factor: each size-`b` block contributes
    /// an affine group of dimension `(b-1)·b`.
    pub fn continuous_dimension(&self) -> usize {
        self.block_sizes.iter().map(|b| (b - 1) * b).sum()
    }
}

pub fn aut_description<T: Scalar>(g: &SkewGraph<T>) -> Result<AutDescription, LvError> {
    let d = g.declone();
    let quotient_aut = automorphisms_brute(&d.quotient, Some(&d.weights))?;
    Ok(AutDescription {
        block_sizes: d.classes.iter().map(Vec::len).collect(),
        quotient_aut_order: quotient_aut.order() as u64,
    })
}

/// Samples a block automorphism of `LV(Γ)`: one invertible rational block
/// per clone class with every column summing to one. Entries are drawn
/// from `[-3, 3]`, the last row fixes the column sums, and singular draws
/// are rejected. Size-one blocks are the scalar 1.
pub fn glplus_sample(g: &SkewGraph<Rat>, seed: u64) -> LinearMap<Rat> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let d = g.declone();
    let sys = LvSystem::new(g.clone());
    let mut matrix = Matrix::zeros(g.order(), g.order());
    for class in &d.classes {
        let members: Vec<usize> = class.iter().map(|l| g.index_of(l).unwrap()).collect();
        let block = sample_glplus_block(members.len(), &mut rng);
        for (bi, &u) in members.iter().enumerate() {
            for (bj, &s) in members.iter().enumerate() {
                matrix[(u, s)] = block[(bi, bj)].clone();
            }
        }
    }
    let map = LinearMap {
        domain: sys.clone(),
        codomain: sys,
        matrix,
    };
    debug_assert!(map.is_lv_morphism() && map.is_invertible());
    map
}

fn sample_glplus_block(m: usize, rng: &mut ChaCha8Rng) -> Matrix<Rat> {
    if m == 1 {
        return Matrix::identity(1);
    }
    loop {
        let mut block = Matrix::zeros(m, m);
        for i in 0..m - 1 {
            for j in 0..m {
                block[(i, j)] = rat(rng.gen_range(-3..=3));
            }
        }
        for j in 0..m {
            let sum = (0..m - 1).fold(rat(0), |acc, i| acc + block[(i, j)].clone());
            block[(m - 1, j)] = rat(1) - sum;
        }
        if block.rank() == m {
            return block;
        }
    }
}
