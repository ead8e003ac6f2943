//! Lax pairs with spectral parameter for the Bogoyavlenskij systems and
//! their clones.
//!
//! The base pair for `B(n,k)` is `L = X Δ^{-k} + λΔ` and
//! `M = Σ_{t=k+1}^{n-1} Δ^t X Δ^{-t} - λΔ^{k+1}`, with `Δ` the cyclic
//! shift and `X = diag(x)`. Along the flow, `L̇ = [L, M]` holds
//! identically in `λ`; the residual functions here certify that
//! numerically. For a cloned system the same pair pulled back through the
//! coordinate-summing map is again a Lax pair; the block construction
//! instead produces an `nN × nN` pair in which every clone coordinate
//! appears as an entry.

use thiserror::Error;

use crate::matrix::Matrix;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum LaxError {
    #[error("bad parameter: {0}")]
    BadParameter(String),
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
}

/// Square matrix polynomial in the spectral parameter; `coeffs[d]` is the
/// coefficient of `λ^d`. Trailing zero coefficients are trimmed.
#[derive(Debug, Clone, PartialEq)]
pub struct PolyMatrix {
    size: usize,
    coeffs: Vec<Matrix<f64>>,
}

impl PolyMatrix {
    pub fn new(size: usize, mut coeffs: Vec<Matrix<f64>>) -> Self {
        assert!(coeffs.iter().all(|c| c.rows() == size && c.cols() == size));
        while coeffs.len() > 1 && coeffs.last().is_some_and(Matrix::is_zero) {
            coeffs.pop();
        }
        if coeffs.is_empty() {
            coeffs.push(Matrix::zeros(size, size));
        }
        PolyMatrix { size, coeffs }
    }

    pub fn zero(size: usize) -> Self {
        PolyMatrix {
            size,
            coeffs: vec![Matrix::zeros(size, size)],
        }
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn coeff(&self, d: usize) -> Option<&Matrix<f64>> {
        self.coeffs.get(d)
    }

    pub fn eval(&self, lambda: f64) -> Matrix<f64> {
        let mut out = self.coeffs.last().expect("nonempty").clone();
        for c in self.coeffs.iter().rev().skip(1) {
            out = out.scale(&lambda).add(c);
        }
        out
    }

    pub fn add(&self, rhs: &Self) -> Self {
        self.combine(rhs, |a, b| a.add(b))
    }

    pub fn sub(&self, rhs: &Self) -> Self {
        self.combine(rhs, |a, b| a.sub(b))
    }

    fn combine(&self, rhs: &Self, f: impl Fn(&Matrix<f64>, &Matrix<f64>) -> Matrix<f64>) -> Self {
        assert_eq!(self.size, rhs.size);
        let len = self.coeffs.len().max(rhs.coeffs.len());
        let zero = Matrix::zeros(self.size, self.size);
        let coeffs = (0..len)
            .map(|d| {
                f(
                    self.coeffs.get(d).unwrap_or(&zero),
                    rhs.coeffs.get(d).unwrap_or(&zero),
                )
            })
            .collect();
        PolyMatrix::new(self.size, coeffs)
    }

    /// Polynomial product, coefficient convolution.
    pub fn mul(&self, rhs: &Self) -> Self {
        assert_eq!(self.size, rhs.size);
        let deg = self.degree() + rhs.degree();
        let mut coeffs = vec![Matrix::zeros(self.size, self.size); deg + 1];
        for (da, a) in self.coeffs.iter().enumerate() {
            for (db, b) in rhs.coeffs.iter().enumerate() {
                coeffs[da + db] = coeffs[da + db].add(&a.mul(b));
            }
        }
        PolyMatrix::new(self.size, coeffs)
    }

    pub fn commutator(a: &Self, b: &Self) -> Self {
        a.mul(b).sub(&b.mul(a))
    }

    pub fn max_abs(&self) -> f64 {
        self.coeffs
            .iter()
            .map(Matrix::max_abs_f64)
            .fold(0.0, f64::max)
    }
}

/// Cyclic shift `Δ` with `Δ_{i,j} = 1` iff `j = i+1 (mod n)`; `Δ^n = I`.
pub fn shift_matrix(n: usize) -> Matrix<f64> {
    shift_power(n, 1)
}

/// `Δ^p` for any signed power, reduced modulo `n`.
pub fn shift_power(n: usize, p: i64) -> Matrix<f64> {
    let shift = p.rem_euclid(n as i64) as usize;
    Matrix::from_fn(n, n, |i, j| if j == (i + shift) % n { 1.0 } else { 0.0 })
}

fn check_bogo_params(n: usize, k: usize) -> Result<(), LaxError> {
    if k < 1 || 2 * k >= n {
        return Err(LaxError::BadParameter(format!(
            "need 1 <= k < n/2, got n={n}, k={k}"
        )));
    }
    Ok(())
}

/// `X Δ^{-k}` built entrywise: `x_i` sits at `(i, i-k mod n)`.
fn x_shift(n: usize, k: usize, x: &[f64]) -> Matrix<f64> {
    let mut m = Matrix::zeros(n, n);
    for i in 0..n {
        m[(i, (i + n - k) % n)] = x[i];
    }
    m
}

/// Diagonal of `Σ_{t=k+1}^{n-1} Δ^t X Δ^{-t}`: entry `i` sums
/// `x_{i+t mod n}` over that range.
fn m0_diagonal(n: usize, k: usize, x: &[f64]) -> Vec<f64> {
    (0..n)
        .map(|i| (k + 1..n).map(|t| x[(i + t) % n]).sum())
        .collect()
}

fn diag(values: &[f64]) -> Matrix<f64> {
    let mut m = Matrix::zeros(values.len(), values.len());
    for (i, &v) in values.iter().enumerate() {
        m[(i, i)] = v;
    }
    m
}

/// Bogoyavlenskij Lax pair for `B(n,k)` at the point `x`.
pub fn bogo_lax(n: usize, k: usize, x: &[f64]) -> Result<(PolyMatrix, PolyMatrix), LaxError> {
    check_bogo_params(n, k)?;
    if x.len() != n {
        return Err(LaxError::DimensionMismatch {
            expected: n,
            got: x.len(),
        });
    }
    let l = PolyMatrix::new(n, vec![x_shift(n, k, x), shift_matrix(n)]);
    let m = PolyMatrix::new(
        n,
        vec![
            diag(&m0_diagonal(n, k, x)),
            shift_power(n, (k + 1) as i64).scale(&-1.0),
        ],
    );
    Ok((l, m))
}

/// Clone pattern of a Bogoyavlenskij base: weights per base vertex, with
/// clone coordinates stored base-vertex-major (all clones of vertex 1
/// first). Missing clones up to the maximum count are treated as zero.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CloneLayout {
    n: usize,
    k: usize,
    weights: Vec<usize>,
    offsets: Vec<usize>,
    max_clones: usize,
}

impl CloneLayout {
    pub fn new(n: usize, k: usize, weights: Vec<usize>) -> Result<Self, LaxError> {
        check_bogo_params(n, k)?;
        if weights.len() != n {
            return Err(LaxError::DimensionMismatch {
                expected: n,
                got: weights.len(),
            });
        }
        if weights.contains(&0) {
            return Err(LaxError::BadParameter("weights must be positive".into()));
        }
        let mut offsets = Vec::with_capacity(n);
        let mut total = 0;
        for &w in &weights {
            offsets.push(total);
            total += w;
        }
        let max_clones = *weights.iter().max().expect("n >= 3");
        Ok(CloneLayout {
            n,
            k,
            weights,
            offsets,
            max_clones,
        })
    }

    pub fn base_n(&self) -> usize {
        self.n
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn weights(&self) -> &[usize] {
        &self.weights
    }

    /// Total number of clone coordinates.
    pub fn clone_dim(&self) -> usize {
        self.offsets.last().unwrap() + self.weights.last().unwrap()
    }

    /// Maximum number of clones of any base vertex (the block count `N`).
    pub fn max_clones(&self) -> usize {
        self.max_clones
    }

    fn check_point(&self, xc: &[f64]) -> Result<(), LaxError> {
        if xc.len() != self.clone_dim() {
            return Err(LaxError::DimensionMismatch {
                expected: self.clone_dim(),
                got: xc.len(),
            });
        }
        Ok(())
    }

    /// `i`-th clone slice (1-based), padded with zeros past the weight.
    fn clone_slice(&self, xc: &[f64], i: usize) -> Vec<f64> {
        (0..self.n)
            .map(|s| {
                if i <= self.weights[s] {
                    xc[self.offsets[s] + i - 1]
                } else {
                    0.0
                }
            })
            .collect()
    }

    /// Coordinate sums per base vertex, i.e. the decloning map on points.
    pub fn chi(&self, xc: &[f64]) -> Vec<f64> {
        (0..self.n)
            .map(|s| (0..self.weights[s]).map(|i| xc[self.offsets[s] + i]).sum())
            .collect()
    }
}

/// Lax pair for the cloned system obtained by pulling the base pair back
/// through the coordinate sums `y_s = Σ_i x_{s_i}`.
pub fn pullback_lax(
    layout: &CloneLayout,
    xc: &[f64],
) -> Result<(PolyMatrix, PolyMatrix), LaxError> {
    layout.check_point(xc)?;
    bogo_lax(layout.base_n(), layout.k(), &layout.chi(xc))
}

/// Block Lax pair of size `nN` for the cloned system; block `(i,j)` of the
/// operator is `L^{(j)} = X^{(j)} Δ^{-k} + λΔ`, so every clone coordinate
/// appears as an entry.
pub fn block_lax(layout: &CloneLayout, xc: &[f64]) -> Result<(PolyMatrix, PolyMatrix), LaxError> {
    layout.check_point(xc)?;
    let (n, k, nb) = (layout.base_n(), layout.k(), layout.max_clones());
    let size = n * nb;
    let slices: Vec<Vec<f64>> = (1..=nb).map(|i| layout.clone_slice(xc, i)).collect();
    let m0s: Vec<Vec<f64>> = slices.iter().map(|x| m0_diagonal(n, k, x)).collect();
    // Δ^k X^{(j)} Δ^{-k} is diagonal with entry x_{(r+k) mod n, j} at r
    let xks: Vec<Vec<f64>> = slices
        .iter()
        .map(|x| (0..n).map(|r| x[(r + k) % n]).collect())
        .collect();

    let mut l0 = Matrix::zeros(size, size);
    let mut l1 = Matrix::zeros(size, size);
    let mut m0 = Matrix::zeros(size, size);
    let mut m1 = Matrix::zeros(size, size);
    for bi in 0..nb {
        for bj in 0..nb {
            let (ro, co) = (bi * n, bj * n);
            for r in 0..n {
                l0[(ro + r, co + (r + n - k) % n)] = slices[bj][r];
                l1[(ro + r, co + (r + 1) % n)] = 1.0;
                m1[(ro + r, co + (r + k + 1) % n)] = -1.0;
                // diagonal part: on-diagonal blocks carry Σ_r M0^(r) plus
                // the off-by-one-cancelled Σ_{r≠j} Δ^k X^(r) Δ^{-k};
                // off-diagonal blocks carry -Δ^k X^(j) Δ^{-k}
                m0[(ro + r, co + r)] = if bi == bj {
                    let sum_m0: f64 = m0s.iter().map(|d| d[r]).sum();
                    let sum_xk: f64 = (0..nb).filter(|&q| q != bj).map(|q| xks[q][r]).sum();
                    sum_m0 + sum_xk
                } else {
                    -xks[bj][r]
                };
            }
        }
    }
    Ok((
        PolyMatrix::new(size, vec![l0, l1]),
        PolyMatrix::new(size, vec![m0, m1]),
    ))
}

/// Max-abs residual of `L̇ - [L, M]` over the given `λ` samples.
///
/// The builder must be linear in the phase point in its `λ`-free part and
/// constant otherwise; then `L̇` along the flow is exactly the builder
/// applied to `ẋ` minus its value at zero, which is how the chain rule is
/// assembled here.
pub fn lax_residual(
    pair: impl Fn(&[f64]) -> Result<(PolyMatrix, PolyMatrix), LaxError>,
    flow: impl Fn(&[f64]) -> Vec<f64>,
    x: &[f64],
    lambdas: &[f64],
) -> Result<f64, LaxError> {
    let poly = residual_poly(pair, flow, x)?;
    Ok(lambdas
        .iter()
        .map(|&l| poly.eval(l).max_abs_f64())
        .fold(0.0, f64::max))
}

/// The residual `L̇ - [L, M]` as a matrix polynomial in `λ`.
pub fn residual_poly(
    pair: impl Fn(&[f64]) -> Result<(PolyMatrix, PolyMatrix), LaxError>,
    flow: impl Fn(&[f64]) -> Vec<f64>,
    x: &[f64],
) -> Result<PolyMatrix, LaxError> {
    let (l, m) = pair(x)?;
    let xdot = flow(x);
    let (l_at_xdot, _) = pair(&xdot)?;
    let (l_at_zero, _) = pair(&vec![0.0; x.len()])?;
    let ldot = l_at_xdot.sub(&l_at_zero);
    Ok(ldot.sub(&PolyMatrix::commutator(&l, &m)))
}

/// Coefficients `c_0..c_{n-1}` of the monic characteristic polynomial
/// `det(μI - A)`, by the Faddeev-LeVerrier recurrence in doubles.
pub fn char_poly_coefficients(a: &Matrix<f64>) -> Vec<f64> {
    let n = a.rows();
    let mut coeffs = vec![0.0; n];
    let mut m = Matrix::<f64>::identity(n);
    for k in 1..=n {
        let am = a.mul(&m);
        let c = -trace(&am) / k as f64;
        coeffs[n - k] = c;
        if k < n {
            m = am;
            for i in 0..n {
                m[(i, i)] += c;
            }
        }
    }
    coeffs
}

fn trace(a: &Matrix<f64>) -> f64 {
    (0..a.rows()).map(|i| a[(i, i)]).sum()
}

/// Rows of characteristic-polynomial coefficients of `L(λ)`, one row per
/// `λ` sample. Each entry, as a function of the phase point, is a first
/// integral whenever `L` comes from a Lax pair.
pub fn char_poly_invariants(lpoly: &PolyMatrix, lambdas: &[f64]) -> Vec<Vec<f64>> {
    lambdas
        .iter()
        .map(|&l| char_poly_coefficients(&lpoly.eval(l)))
        .collect()
}
