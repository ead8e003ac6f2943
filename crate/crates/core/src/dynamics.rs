//! Trajectory integration and conservation certificates.
//!
//! Integration is classical fixed-step RK4: deterministic and cheap, with
//! tolerances in the callers sized to its `O(dt⁴)` error. Drift reports
//! measure how well claimed first integrals are conserved; the
//! independence and involutivity certificates use central finite
//! differences and an SVD rank with a relative threshold.

use std::io::Write;

use nalgebra::DMatrix;
use thiserror::Error;

use crate::graph::{GraphError, SkewGraph, WeightVector};
use crate::lax;
use crate::lv::{CasimirMonomial, LvError, LvSystem};
use crate::scalar::Scalar;

/// Any coordinate beyond this magnitude aborts the integration.
pub const BLOW_UP_BOUND: f64 = 1e12;

/// Relative drift uses `max(|initial|, REL_FLOOR)` as denominator.
pub const REL_FLOOR: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DynError {
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Lv(#[from] LvError),
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("bad parameter: {0}")]
    BadParameter(String),
    #[error("trajectory blew up at step {step}")]
    BlowUp {
        step: usize,
        partial: Box<Trajectory>,
    },
    #[error("initial value of {0} is zero, clone ratios are undefined")]
    ZeroDivision(String),
}

/// Discrete trajectory: strictly increasing times and one finite state per
/// time.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    times: Vec<f64>,
    states: Vec<Vec<f64>>,
}

impl Trajectory {
    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn states(&self) -> &[Vec<f64>] {
        &self.states
    }

    pub fn dimension(&self) -> usize {
        self.states.first().map_or(0, Vec::len)
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn last_state(&self) -> &[f64] {
        self.states.last().expect("trajectory contains t = 0")
    }
}

/// Classical 4th-order Runge-Kutta with fixed step; the trajectory
/// includes the `t = 0` state.
pub fn integrate<T: Scalar>(
    sys: &LvSystem<T>,
    x0: &[f64],
    dt: f64,
    steps: usize,
) -> Result<Trajectory, DynError> {
    if x0.len() != sys.dimension() {
        return Err(DynError::DimensionMismatch {
            expected: sys.dimension(),
            got: x0.len(),
        });
    }
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(DynError::BadParameter(format!(
            "dt must be positive, got {dt}"
        )));
    }
    let f = |x: &[f64]| sys.vector_field(x).expect("dimension already checked");
    let mut times = Vec::with_capacity(steps + 1);
    let mut states = Vec::with_capacity(steps + 1);
    let mut x = x0.to_vec();
    times.push(0.0);
    states.push(x.clone());
    for step in 1..=steps {
        let k1 = f(&x);
        let k2 = f(&offset(&x, &k1, dt / 2.0));
        let k3 = f(&offset(&x, &k2, dt / 2.0));
        let k4 = f(&offset(&x, &k3, dt));
        for i in 0..x.len() {
            x[i] += dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        }
        if x.iter().any(|v| !v.is_finite() || v.abs() > BLOW_UP_BOUND) {
            return Err(DynError::BlowUp {
                step,
                partial: Box::new(Trajectory { times, states }),
            });
        }
        times.push(step as f64 * dt);
        states.push(x.clone());
    }
    Ok(Trajectory { times, states })
}

fn offset(x: &[f64], k: &[f64], h: f64) -> Vec<f64> {
    x.iter().zip(k).map(|(xi, ki)| xi + h * ki).collect()
}

type EvalFn = Box<dyn Fn(&[f64]) -> Vec<f64> + Send + Sync>;

/// A (possibly vector-valued) function of the state, with one label per
/// component.
pub struct Observable {
    labels: Vec<String>,
    eval: EvalFn,
}

impl Observable {
    pub fn scalar(
        name: impl Into<String>,
        f: impl Fn(&[f64]) -> f64 + Send + Sync + 'static,
    ) -> Self {
        Observable {
            labels: vec![name.into()],
            eval: Box::new(move |x| vec![f(x)]),
        }
    }

    pub fn vector(
        labels: Vec<String>,
        f: impl Fn(&[f64]) -> Vec<f64> + Send + Sync + 'static,
    ) -> Self {
        Observable {
            labels,
            eval: Box::new(f),
        }
    }

    /// Sum of the coordinates.
    pub fn hamiltonian() -> Self {
        Self::scalar("H", |x| x.iter().sum())
    }

    pub fn casimir(name: impl Into<String>, monomial: CasimirMonomial) -> Self {
        Self::scalar(name, move |x| monomial.eval(x))
    }

    /// Coordinate ratio `x_num / x_den`.
    pub fn ratio(name: impl Into<String>, num: usize, den: usize) -> Self {
        Self::scalar(name, move |x| x[num] / x[den])
    }

    /// Characteristic-polynomial coefficients of the `B(n,k)` Lax operator
    /// at the given `λ` samples, flattened row by row.
    pub fn char_poly_bogo(n: usize, k: usize, lambdas: Vec<f64>) -> Self {
        let labels = charpoly_labels(n, &lambdas);
        Observable {
            labels,
            eval: Box::new(move |x| {
                let (l, _) = lax::bogo_lax(n, k, x).expect("valid parameters");
                lax::char_poly_invariants(&l, &lambdas).concat()
            }),
        }
    }

    /// Pullbacks of the base `B(n,k)` characteristic-polynomial integrals
    /// through the coordinate sums of a clone layout.
    pub fn char_poly_pullback(layout: lax::CloneLayout, lambdas: Vec<f64>) -> Self {
        let labels = charpoly_labels(layout.base_n(), &lambdas)
            .into_iter()
            .map(|l| format!("chi*{l}"))
            .collect();
        Observable {
            labels,
            eval: Box::new(move |x| {
                let (l, _) = lax::pullback_lax(&layout, x).expect("valid layout");
                lax::char_poly_invariants(&l, &lambdas).concat()
            }),
        }
    }

    /// Evaluates an observable of the base system after the decloning map
    /// (coordinate sums per clone class).
    pub fn pullback_through(self, layout: lax::CloneLayout) -> Self {
        let labels = self.labels.iter().map(|l| format!("chi*{l}")).collect();
        let inner = self.eval;
        Observable {
            labels,
            eval: Box::new(move |x| inner(&layout.chi(x))),
        }
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn arity(&self) -> usize {
        self.labels.len()
    }

    pub fn eval(&self, x: &[f64]) -> Vec<f64> {
        (self.eval)(x)
    }
}

fn charpoly_labels(n: usize, lambdas: &[f64]) -> Vec<String> {
    lambdas
        .iter()
        .flat_map(|l| (0..n).map(move |i| format!("c{i}[lambda={l}]")))
        .collect()
}

/// Conservation record for one observable component along a trajectory.
#[derive(Debug, Clone, PartialEq)]
pub struct DriftEntry {
    pub name: String,
    pub initial: f64,
    pub max_abs_dev: f64,
    pub max_rel_dev: f64,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct DriftReport {
    pub entries: Vec<DriftEntry>,
}

impl DriftReport {
    pub fn max_rel_dev(&self) -> f64 {
        self.entries
            .iter()
            .map(|e| e.max_rel_dev)
            .fold(0.0, f64::max)
    }

    pub fn worst(&self) -> Option<&DriftEntry> {
        self.entries
            .iter()
            .max_by(|a, b| a.max_rel_dev.total_cmp(&b.max_rel_dev))
    }
}

/// Evaluates the observables along the trajectory and reports the largest
/// absolute and relative deviations from their initial values.
pub fn drift(traj: &Trajectory, observables: &[Observable]) -> DriftReport {
    let mut entries: Vec<DriftEntry> = Vec::new();
    let mut initial: Vec<f64> = Vec::new();
    for obs in observables {
        let first = obs.eval(&traj.states()[0]);
        for (label, &v) in obs.labels().iter().zip(&first) {
            entries.push(DriftEntry {
                name: label.clone(),
                initial: v,
                max_abs_dev: 0.0,
                max_rel_dev: 0.0,
            });
            initial.push(v);
        }
    }
    for state in traj.states().iter().skip(1) {
        let mut idx = 0;
        for obs in observables {
            for value in obs.eval(state) {
                let dev = (value - initial[idx]).abs();
                if dev > entries[idx].max_abs_dev {
                    entries[idx].max_abs_dev = dev;
                    entries[idx].max_rel_dev = dev / initial[idx].abs().max(REL_FLOOR);
                }
                idx += 1;
            }
        }
    }
    DriftReport { entries }
}

/// Clone coordinate offsets in vertex-major order, one per base vertex.
fn clone_offsets(weights: &[usize]) -> Vec<usize> {
    let mut offsets = Vec::with_capacity(weights.len());
    let mut total = 0;
    for &w in weights {
        offsets.push(total);
        total += w;
    }
    offsets
}

/// Integrates the cloned system and reports the drift of every clone
/// ratio `x_{s_j}/x_{s_1}`, `j >= 2`; these are Casimirs of the cloned
/// bracket, so their drift is pure integrator noise.
pub fn clone_decoupling_check<T: Scalar>(
    base: &SkewGraph<T>,
    weights: &WeightVector,
    x0: &[f64],
    dt: f64,
    steps: usize,
) -> Result<DriftReport, DynError> {
    if !base.is_irreducible() {
        return Err(DynError::BadParameter(
            "base graph must be irreducible".to_string(),
        ));
    }
    let w = weights.in_order(base)?;
    let cloned = base.clone_graph(weights)?;
    let sys = LvSystem::new(cloned.clone());
    if x0.len() != sys.dimension() {
        return Err(DynError::DimensionMismatch {
            expected: sys.dimension(),
            got: x0.len(),
        });
    }
    let offsets = clone_offsets(&w);
    let mut observables = Vec::new();
    for (&ws, &off) in w.iter().zip(&offsets) {
        if ws > 1 && x0[off] == 0.0 {
            return Err(DynError::ZeroDivision(cloned.label(off).to_string()));
        }
        for j in 1..ws {
            let name = format!("{}/{}", cloned.label(off + j), cloned.label(off));
            observables.push(Observable::ratio(name, off + j, off));
        }
    }
    let traj = integrate(&sys, x0, dt, steps)?;
    Ok(drift(&traj, &observables))
}

/// Integrates the cloned system from `x0` and the base system from the
/// summed point, and returns the largest sup-norm gap between the summed
/// clone trajectory and the base trajectory. The decloning map intertwines
/// the two flows, so the gap is pure integrator noise.
pub fn flow_commutation_check<T: Scalar>(
    base: &SkewGraph<T>,
    weights: &WeightVector,
    x0: &[f64],
    dt: f64,
    steps: usize,
) -> Result<f64, DynError> {
    let w = weights.in_order(base)?;
    let cloned = base.clone_graph(weights)?;
    let clone_sys = LvSystem::new(cloned);
    if x0.len() != clone_sys.dimension() {
        return Err(DynError::DimensionMismatch {
            expected: clone_sys.dimension(),
            got: x0.len(),
        });
    }
    let offsets = clone_offsets(&w);
    let chi = |x: &[f64]| -> Vec<f64> {
        w.iter()
            .zip(&offsets)
            .map(|(&ws, &off)| x[off..off + ws].iter().sum())
            .collect()
    };
    let base_sys = LvSystem::new(base.clone());
    let clone_traj = integrate(&clone_sys, x0, dt, steps)?;
    let base_traj = integrate(&base_sys, &chi(x0), dt, steps)?;
    let mut gap: f64 = 0.0;
    for (xc, y) in clone_traj.states().iter().zip(base_traj.states()) {
        for (a, b) in chi(xc).iter().zip(y) {
            gap = gap.max((a - b).abs());
        }
    }
    Ok(gap)
}

/// Numerical certificate for a family of claimed first integrals:
/// conservation drift along trajectories, Jacobian rank (independence) at
/// the sample points, and pairwise bracket values (involutivity).
#[derive(Debug, Clone, PartialEq)]
pub struct IntegrabilityReport {
    pub drifts: Vec<DriftReport>,
    pub jacobian_ranks: Vec<usize>,
    pub max_involutivity: f64,
}

impl IntegrabilityReport {
    /// Generic rank of the integral map over the sampled points.
    pub fn generic_rank(&self) -> usize {
        self.jacobian_ranks.iter().copied().max().unwrap_or(0)
    }

    pub fn max_drift(&self) -> f64 {
        self.drifts
            .iter()
            .map(DriftReport::max_rel_dev)
            .fold(0.0, f64::max)
    }
}

/// Relative singular-value threshold for numerical rank.
pub const RANK_THRESHOLD: f64 = 1e-8;

/// Central-difference step scale.
const FD_SCALE: f64 = 1e-6;

pub fn integrability_certificate<T: Scalar>(
    sys: &LvSystem<T>,
    integrals: &[Observable],
    points: &[Vec<f64>],
    dt: f64,
    steps: usize,
) -> Result<IntegrabilityReport, DynError> {
    let mut drifts = Vec::new();
    let mut ranks = Vec::new();
    let mut max_involutivity: f64 = 0.0;
    for x0 in points {
        let traj = integrate(sys, x0, dt, steps)?;
        drifts.push(drift(&traj, integrals));
        let jac = jacobian(integrals, x0);
        ranks.push(numerical_rank(&jac));
        max_involutivity = max_involutivity.max(max_pairwise_bracket(sys, &jac, x0));
    }
    Ok(IntegrabilityReport {
        drifts,
        jacobian_ranks: ranks,
        max_involutivity,
    })
}

/// Central-difference Jacobian: one row per integral component.
fn jacobian(integrals: &[Observable], x: &[f64]) -> Vec<Vec<f64>> {
    let dim = x.len();
    let mut rows = Vec::new();
    for obs in integrals {
        let arity = obs.arity();
        let mut grads = vec![vec![0.0; dim]; arity];
        for j in 0..dim {
            let h = FD_SCALE * x[j].abs().max(1.0);
            let mut xp = x.to_vec();
            let mut xm = x.to_vec();
            xp[j] += h;
            xm[j] -= h;
            let fp = obs.eval(&xp);
            let fm = obs.eval(&xm);
            for c in 0..arity {
                grads[c][j] = (fp[c] - fm[c]) / (2.0 * h);
            }
        }
        rows.extend(grads);
    }
    rows
}

/// SVD rank with singular values below `RANK_THRESHOLD · σ_max` counted as
/// zero.
fn numerical_rank(rows: &[Vec<f64>]) -> usize {
    if rows.is_empty() || rows[0].is_empty() {
        return 0;
    }
    let m = DMatrix::from_fn(rows.len(), rows[0].len(), |i, j| rows[i][j]);
    let sv = m.singular_values();
    let max = sv.iter().copied().fold(0.0, f64::max);
    if max == 0.0 {
        return 0;
    }
    sv.iter().filter(|&&s| s > RANK_THRESHOLD * max).count()
}

/// Largest `|{F,G}|` over all pairs of integral components at `x`, with
/// the bracket evaluated through the precomputed gradients:
/// `{F,G} = Σ_{s,t} a_{s,t} x_s x_t ∂F/∂x_s ∂G/∂x_t`.
fn max_pairwise_bracket<T: Scalar>(sys: &LvSystem<T>, grads: &[Vec<f64>], x: &[f64]) -> f64 {
    let n = x.len();
    let a = sys.graph().adjacency();
    let mut worst: f64 = 0.0;
    for (i, gf) in grads.iter().enumerate() {
        for gg in grads.iter().skip(i + 1) {
            let mut bracket = 0.0;
            for s in 0..n {
                for t in 0..n {
                    let ast = a[(s, t)].to_f64().expect("arc value convertible");
                    if ast != 0.0 {
                        bracket += ast * x[s] * x[t] * gf[s] * gg[t];
                    }
                }
            }
            worst = worst.max(bracket.abs());
        }
    }
    worst
}

/// Writes `t,<label>,...` rows with 17 significant digits.
pub fn write_csv(
    traj: &Trajectory,
    labels: &[String],
    out: &mut impl Write,
) -> std::io::Result<()> {
    write!(out, "t")?;
    for l in labels {
        write!(out, ",{l}")?;
    }
    writeln!(out)?;
    for (t, state) in traj.times().iter().zip(traj.states()) {
        write!(out, "{t:.16e}")?;
        for v in state {
            write!(out, ",{v:.16e}")?;
        }
        writeln!(out)?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::families;
    use crate::sampling;

    fn km_sys(n: usize) -> LvSystem {
        LvSystem::new(families::km(n).unwrap())
    }

    #[test]
    fn fixed_point_stays_fixed() {
        let traj = integrate(&km_sys(5), &[1.0; 5], 1e-3, 100).unwrap();
        assert_eq!(traj.len(), 101);
        assert_eq!(traj.last_state(), &[1.0; 5]);
    }

    #[test]
    fn hamiltonian_is_conserved_on_km3() {
        let traj = integrate(&km_sys(3), &[1.0, 2.0, 3.0], 1e-3, 10_000).unwrap();
        let report = drift(&traj, &[Observable::hamiltonian()]);
        assert_eq!(report.entries[0].initial, 6.0);
        assert!(report.max_rel_dev() < 1e-10, "{}", report.max_rel_dev());
    }

    #[test]
    fn casimir_drift_is_small_on_km5() {
        let sys = km_sys(5);
        let observables: Vec<Observable> = sys
            .casimir_basis()
            .into_iter()
            .enumerate()
            .map(|(i, c)| Observable::casimir(format!("C{i}"), c))
            .collect();
        let x0 = sampling::points_in_box(5, 1, 0.5, 1.5, &mut sampling::rng(3)).remove(0);
        let traj = integrate(&sys, &x0, 1e-3, 10_000).unwrap();
        assert!(drift(&traj, &observables).max_rel_dev() < 1e-6);
    }

    #[test]
    fn coordinate_hyperplanes_are_invariant() {
        let mut x0 = vec![0.7, 1.3, 0.0, 0.9, 1.1];
        let traj = integrate(&km_sys(5), &x0, 1e-3, 2_000).unwrap();
        for state in traj.states() {
            assert!(state[2].abs() < 1e-12);
        }
        x0[2] = 0.0;
    }

    #[test]
    fn blow_up_is_reported_with_partial_trajectory() {
        let sys = LvSystem::new(families::lv_n0(3).unwrap());
        let result = integrate(&sys, &[1e9, 1e9, 1e9], 1.0, 50);
        match result {
            Err(DynError::BlowUp { step, partial }) => {
                assert!(step >= 1);
                assert_eq!(partial.len(), step);
            }
            other => panic!("expected blow-up, got {other:?}"),
        }
    }

    #[test]
    fn dimension_and_step_validation() {
        assert!(matches!(
            integrate(&km_sys(3), &[1.0], 1e-3, 1),
            Err(DynError::DimensionMismatch { .. })
        ));
        assert!(matches!(
            integrate(&km_sys(3), &[1.0, 1.0, 1.0], 0.0, 1),
            Err(DynError::BadParameter(_))
        ));
    }

    #[test]
    fn constant_observable_has_zero_drift() {
        let traj = integrate(&km_sys(3), &[1.0, 2.0, 3.0], 1e-2, 100).unwrap();
        let report = drift(&traj, &[Observable::scalar("const", |_| 42.0)]);
        assert_eq!(report.max_rel_dev(), 0.0);
    }

    #[test]
    fn clone_ratios_are_conserved() {
        let g = families::km(4).unwrap();
        let w = WeightVector::new([("1", 2), ("2", 1), ("3", 1), ("4", 1)]).unwrap();
        let x0 = sampling::points_in_box(5, 1, 0.5, 1.5, &mut sampling::rng(5)).remove(0);
        let report = clone_decoupling_check(&g, &w, &x0, 1e-3, 10_000).unwrap();
        assert_eq!(report.entries.len(), 1);
        assert!(report.max_rel_dev() < 1e-8, "{}", report.max_rel_dev());
    }

    #[test]
    fn all_ones_weights_give_an_empty_ratio_report() {
        let g = families::km(4).unwrap();
        let w = WeightVector::all_ones(&g);
        let report = clone_decoupling_check(&g, &w, &[1.0, 0.8, 1.2, 0.9], 1e-3, 10).unwrap();
        assert!(report.entries.is_empty());
    }

    #[test]
    fn equal_clones_keep_ratio_one() {
        let g = families::km(4).unwrap();
        let w = WeightVector::new([("1", 2), ("2", 1), ("3", 1), ("4", 1)]).unwrap();
        let x0 = [0.6, 0.6, 1.0, 1.2, 0.8];
        let report = clone_decoupling_check(&g, &w, &x0, 1e-3, 5_000).unwrap();
        assert_eq!(report.entries[0].initial, 1.0);
        assert!(report.entries[0].max_abs_dev < 1e-12);
    }

    #[test]
    fn zero_leading_clone_is_rejected() {
        let g = families::km(4).unwrap();
        let w = WeightVector::new([("1", 2), ("2", 1), ("3", 1), ("4", 1)]).unwrap();
        let x0 = [0.0, 0.6, 1.0, 1.2, 0.8];
        assert!(matches!(
            clone_decoupling_check(&g, &w, &x0, 1e-3, 10),
            Err(DynError::ZeroDivision(_))
        ));
    }

    #[test]
    fn flows_commute_with_the_decloning_map() {
        let g = families::km(4).unwrap();
        let w = WeightVector::new([("1", 2), ("2", 1), ("3", 1), ("4", 1)]).unwrap();
        let x0 = sampling::points_in_box(5, 1, 0.5, 1.5, &mut sampling::rng(7)).remove(0);
        let gap = flow_commutation_check(&g, &w, &x0, 1e-3, 10_000).unwrap();
        assert!(gap < 1e-6, "gap {gap}");
    }

    #[test]
    fn trivial_weights_commute_exactly() {
        let g = families::km(4).unwrap();
        let w = WeightVector::all_ones(&g);
        let x0 = [0.9, 1.1, 0.7, 1.3];
        let gap = flow_commutation_check(&g, &w, &x0, 1e-3, 1_000).unwrap();
        assert_eq!(gap, 0.0);
    }

    #[test]
    fn certificate_counts_km5_integrals() {
        let sys = km_sys(5);
        let mut integrals = vec![Observable::hamiltonian()];
        for (i, c) in sys.casimir_basis().into_iter().enumerate() {
            integrals.push(Observable::casimir(format!("C{i}"), c));
        }
        integrals.push(Observable::char_poly_bogo(5, 1, vec![1.0, 2.0]));
        let points = sampling::points_in_box(5, 5, 0.5, 1.5, &mut sampling::rng(9));
        let report = integrability_certificate(&sys, &integrals, &points, 1e-3, 1_000).unwrap();
        assert_eq!(report.generic_rank(), 3);
        assert!(report.jacobian_ranks.iter().all(|&r| r == 3));
        assert!(
            report.max_involutivity < 1e-5,
            "{}",
            report.max_involutivity
        );
    }

    #[test]
    fn constant_integral_has_rank_zero() {
        let sys = km_sys(3);
        let integrals = vec![Observable::scalar("const", |_| 1.0)];
        let report =
            integrability_certificate(&sys, &integrals, &[vec![1.0, 2.0, 3.0]], 1e-2, 10).unwrap();
        assert_eq!(report.generic_rank(), 0);
    }

    #[test]
    fn csv_export_has_header_and_full_precision() {
        let traj = integrate(&km_sys(3), &[1.0, 2.0, 3.0], 0.5, 2).unwrap();
        let mut buf = Vec::new();
        let labels: Vec<String> = ["1", "2", "3"].iter().map(|s| s.to_string()).collect();
        write_csv(&traj, &labels, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next().unwrap(), "t,1,2,3");
        assert_eq!(lines.count(), 3);
        assert!(text.contains("e0") || text.contains("e-") || text.contains("e1"));
    }
}
