//! Lower transition operators and imprecise Markov chains.
//!
//! A lower transition operator `T` holds one credal set per state; applying
//! it to a gamble `f` gives `Tf(x) = L(f|x)`, the row-x lower expectation.
//! This module covers operator application and powers, the weak coefficient
//! of ergodicity, PF-like detection, stationary lower expectations, and the
//! marginal / finite-horizon joint lower expectations of a chain.
//!
//! Operator powers are never materialized as credal sets: the composition of
//! vertex-represented rows is not vertex-representable in general, so all
//! powers act by iterated application.

use crate::credal::{check_dim, maximize_over_unit_gambles, CredalSet, DistanceMode, Gamble};
use crate::error::{Error, Result};
use crate::scalar::{Real, CMP_TOL};

/// Iteration defaults: tolerance, iteration cap, and the `2|X|^2` rule for
/// power and reachability horizons.
pub mod defaults {
    /// Default convergence tolerance for stationary iterations.
    pub const TOL: f64 = 1e-10;
    /// Default iteration cap.
    pub const MAX_ITER: usize = 1_000_000;
    /// Default `r_max` and `n_reach`: `2 |X|^2`.
    pub fn power_horizon(dim: usize) -> usize {
        (2 * dim * dim).max(1)
    }
}

/// Upper bound on joint-gamble tables accepted by the backward recursions.
pub const JOINT_TABLE_LIMIT: usize = 1_000_000;

// ---------------------------------------------------------------------------
// LowerTransitionOperator
// ---------------------------------------------------------------------------

/// One credal set per state; `Tf(x)` is the lower expectation of `f` under
/// row `x`.
#[derive(Debug, Clone)]
pub struct LowerTransitionOperator<T> {
    rows: Vec<CredalSet<T>>,
}

impl<T: Real> LowerTransitionOperator<T> {
    /// Builds an operator from per-state rows, all of dimension equal to the
    /// state count. The constant-preservation property `T c = c` (forced by
    /// LE5 for valid rows) is verified at construction.
    pub fn new(rows: Vec<CredalSet<T>>) -> Result<Self> {
        if rows.is_empty() {
            return Err(Error::InvalidParameter(
                "operator needs at least one row".into(),
            ));
        }
        let dim = rows.len();
        for row in &rows {
            check_dim(dim, row.dim())?;
        }
        let op = Self { rows };
        let ones = Gamble::constant(dim, T::one());
        let image = op.apply(&ones)?;
        let tol = T::of(CMP_TOL);
        if image.values().iter().any(|&v| (v - T::one()).abs() > tol) {
            return Err(Error::InvalidParameter(
                "row violates constant preservation (broken mass function)".into(),
            ));
        }
        Ok(op)
    }

    /// State count.
    pub fn dim(&self) -> usize {
        self.rows.len()
    }

    /// The per-state rows.
    pub fn rows(&self) -> &[CredalSet<T>] {
        &self.rows
    }

    /// True when every row is a single mass function.
    pub fn is_precise(&self) -> bool {
        self.rows.iter().all(CredalSet::is_precise)
    }

    /// Applies the operator once: `(Tf)(x) = L(f|x)`.
    pub fn apply(&self, f: &Gamble<T>) -> Result<Gamble<T>> {
        check_dim(self.dim(), f.dim())?;
        Ok(self.apply_unchecked(f))
    }

    fn apply_unchecked(&self, f: &Gamble<T>) -> Gamble<T> {
        let values = self
            .rows
            .iter()
            .map(|row| row.lower_unchecked(f.values()))
            .collect();
        Gamble::new(values).expect("image of a gamble is a gamble")
    }

    /// Conjugate upper operator: `(Uf)(x) = -T(-f)(x)`.
    pub fn apply_upper(&self, f: &Gamble<T>) -> Result<Gamble<T>> {
        Ok(self.apply(&f.negated())?.negated())
    }

    /// `n`-fold application; `n = 0` returns `f` unchanged.
    pub fn apply_power(&self, n: usize, f: &Gamble<T>) -> Result<Gamble<T>> {
        check_dim(self.dim(), f.dim())?;
        let mut g = f.clone();
        for _ in 0..n {
            g = self.apply_unchecked(&g);
        }
        Ok(g)
    }

    /// `n`-fold application of the conjugate upper operator.
    pub fn apply_power_upper(&self, n: usize, f: &Gamble<T>) -> Result<Gamble<T>> {
        Ok(self.apply_power(n, &f.negated())?.negated())
    }

    /// Weak coefficient of ergodicity of `T^r`:
    /// `rho(T^r) = max over h in [0,1]^X of ||T^r h||_v`.
    ///
    /// Candidates are the nonconstant {0,1}-valued gambles, plus random
    /// samples in grid mode. Exact for precise rows (the objective is then a
    /// linear program over a box, maximized at a vertex); a certified lower
    /// bound otherwise.
    pub fn ergodicity_coefficient(&self, r: usize, mode: DistanceMode) -> Result<T> {
        if r == 0 {
            return Err(Error::InvalidParameter("power r must be >= 1".into()));
        }
        if self.dim() == 1 {
            return Ok(T::zero());
        }
        maximize_over_unit_gambles(self.dim(), mode, |h| {
            self.apply_power(r, h)
                .expect("dimensions agree")
                .variation_norm()
        })
    }

    /// PF-like detection; see [`ErgodicityReport`].
    pub fn detect_pf_like(
        &self,
        r_max: usize,
        n_reach: usize,
        mode: DistanceMode,
    ) -> Result<ErgodicityReport<T>> {
        detect_pf_like(self, r_max, n_reach, mode)
    }

    /// Iterates `g <- Tg` from `g = f` until the variation width of `g`
    /// drops to `tol`, and returns the midpoint estimate of the stationary
    /// lower expectation. The true value lies in `[min g, max g]`.
    pub fn stationary_lower_expectation(
        &self,
        f: &Gamble<T>,
        tol: T,
        max_iter: usize,
    ) -> Result<StationaryEstimate<T>> {
        if tol <= T::zero() {
            return Err(Error::InvalidParameter("tol must be positive".into()));
        }
        check_dim(self.dim(), f.dim())?;
        let mut g = f.clone();
        for iters in 0..=max_iter {
            let width = g.variation_norm();
            if width <= tol {
                return Ok(StationaryEstimate {
                    value: (g.max_value() + g.min_value()) / T::of(2.0),
                    width,
                    lower: g.min_value(),
                    upper: g.max_value(),
                    iters,
                });
            }
            g = self.apply_unchecked(&g);
        }
        Err(Error::NoConvergence {
            iters: max_iter,
            width: g.variation_norm().to_f64().unwrap_or(f64::NAN),
        })
    }

    /// Stationary lower expectation of a gamble on `X^r` under the stationary
    /// chain: the backward recursion collapses the table to a gamble on `X`,
    /// which is then driven to its stationary value.
    pub fn stationary_joint_lower_expectation(
        &self,
        r: usize,
        f: &[T],
        tol: T,
        max_iter: usize,
    ) -> Result<StationaryEstimate<T>> {
        let g1 = self.collapse_joint(r, f)?;
        self.stationary_lower_expectation(&g1, tol, max_iter)
    }

    /// Backward recursion from a table on `X^r` down to a gamble on `X`
    /// (the value of the remaining horizon as a function of the first state).
    pub(crate) fn collapse_joint(&self, r: usize, f: &[T]) -> Result<Gamble<T>> {
        if r == 0 {
            return Err(Error::InvalidParameter("horizon r must be >= 1".into()));
        }
        let dim = self.dim();
        let size = dim
            .checked_pow(r as u32)
            .filter(|&s| s <= JOINT_TABLE_LIMIT)
            .ok_or(Error::TableTooLarge {
                size: usize::MAX,
                limit: JOINT_TABLE_LIMIT,
            })?;
        if f.len() != size {
            return Err(Error::DimensionMismatch {
                expected: size,
                got: f.len(),
            });
        }
        // g_k lives on X^k; the last axis is contiguous, so each conditional
        // slice g_{k+1}(x_1..x_k, .) is one chunk of length |X|.
        let mut g: Vec<T> = f.to_vec();
        for _ in (1..r).rev() {
            let mut next = Vec::with_capacity(g.len() / dim);
            for (prefix, chunk) in g.chunks(dim).enumerate() {
                let x_k = prefix % dim;
                next.push(self.rows[x_k].lower_unchecked(chunk));
            }
            g = next;
        }
        Gamble::new(g)
    }
}

/// Midpoint estimate of a stationary lower expectation, with the enclosing
/// interval `[lower, upper]` and its width.
#[derive(Debug, Clone, Copy)]
pub struct StationaryEstimate<T> {
    /// Interval midpoint `(max g + min g) / 2`.
    pub value: T,
    /// Variation width of the final iterate.
    pub width: T,
    /// `min g`: a guaranteed lower bound on the stationary value.
    pub lower: T,
    /// `max g`: a guaranteed upper bound on the stationary value.
    pub upper: T,
    /// Iterations performed.
    pub iters: usize,
}

// ---------------------------------------------------------------------------
// PF-like detection
// ---------------------------------------------------------------------------

/// Verdict of PF-like detection.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PfVerdict {
    /// PF-like behaviour established; `r` is the first power with
    /// contraction evidence (coefficient below one, or the reachability
    /// horizon when certified that way).
    PfLike {
        /// Certifying power.
        r: usize,
    },
    /// Certified not PF-like: precise rows, exact coefficients stuck at one,
    /// and a pair of states whose supports never couple.
    NotPfLikeCertified,
    /// Neither certificate applies within the explored horizons.
    Inconclusive,
}

/// Result of PF-like detection.
#[derive(Debug, Clone)]
pub struct ErgodicityReport<T> {
    /// `(r, rho(T^r))` for `r = 1..=r_max`.
    pub rho_by_power: Vec<(usize, T)>,
    /// Three-valued verdict.
    pub verdict: PfVerdict,
    /// Whether some `n <= n_reach` has `min_x U^n 1_y(x) > 0` for every `y`
    /// (the sufficient reachability condition).
    pub reachability_ok: bool,
    /// Variation width reached when iterating the operator on a probe gamble
    /// with pairwise-distinct values, under the default iteration budget.
    pub stationary_interval_width: T,
    /// Whether the reported coefficients are exact (precise rows) or
    /// enumeration lower bounds.
    pub rho_exact: bool,
}

fn detect_pf_like<T: Real>(
    op: &LowerTransitionOperator<T>,
    r_max: usize,
    n_reach: usize,
    mode: DistanceMode,
) -> Result<ErgodicityReport<T>> {
    if r_max == 0 {
        return Err(Error::InvalidParameter("r_max must be >= 1".into()));
    }
    let tol = T::of(CMP_TOL);
    let one = T::one();

    let mut rho_by_power = Vec::with_capacity(r_max);
    let mut rho_verdict = None;
    for r in 1..=r_max {
        let rho = op.ergodicity_coefficient(r, mode)?;
        rho_by_power.push((r, rho));
        if rho_verdict.is_none() && rho < one - tol {
            rho_verdict = Some(r);
        }
    }

    let reachability = reachability_horizon(op, n_reach);

    let verdict = if let Some(r) = rho_verdict {
        PfVerdict::PfLike { r }
    } else if let Some(n) = reachability {
        // The coefficient enumeration only lower-bounds rho for imprecise
        // rows, so a stuck-at-one value proves nothing; the reachability
        // condition is an independent sufficient certificate.
        PfVerdict::PfLike { r: n }
    } else if op.is_precise() && !precise_supports_couple(op) {
        PfVerdict::NotPfLikeCertified
    } else {
        PfVerdict::Inconclusive
    };

    // Probe with pairwise-distinct values to record how far iteration
    // actually contracts under the default budget.
    let probe = Gamble::new((0..op.dim()).map(T::of_usize).collect())?;
    let width = {
        let mut g = probe;
        let mut w = g.variation_norm();
        let budget = defaults::MAX_ITER.min(10_000);
        let wtol = T::of(defaults::TOL);
        for _ in 0..budget {
            if w <= wtol {
                break;
            }
            g = op.apply(&g)?;
            w = g.variation_norm();
        }
        w
    };

    Ok(ErgodicityReport {
        rho_by_power,
        verdict,
        reachability_ok: reachability.is_some(),
        stationary_interval_width: width,
        rho_exact: op.is_precise(),
    })
}

/// Finds the smallest `n <= n_reach` with `min_x U^n 1_y(x) > 0` for all `y`:
/// every state reachable from everywhere with positive upper probability in
/// exactly `n` steps.
fn reachability_horizon<T: Real>(op: &LowerTransitionOperator<T>, n_reach: usize) -> Option<usize> {
    let dim = op.dim();
    // images[y] = U^n 1_y, updated in lockstep over n. Upper probabilities
    // are maxima of sums of nonnegative products, so structural zeros stay
    // exactly zero and positivity can be tested strictly.
    let mut images: Vec<Gamble<T>> = (0..dim).map(|y| Gamble::indicator(dim, y)).collect();
    for n in 1..=n_reach {
        for img in images.iter_mut() {
            *img = op.apply_upper(img).expect("dimensions agree");
        }
        if images
            .iter()
            .all(|img| img.values().iter().all(|&v| v > T::zero()))
        {
            return Some(n);
        }
    }
    None
}

/// For precise rows: true when from every ordered pair of states the
/// synchronized product graph reaches a diagonal pair, i.e. the supports of
/// `P^r(.|x)` and `P^r(.|y)` eventually overlap. Support overlap is monotone
/// in `r`, so failure for some pair certifies `rho(P^r) = 1` for every `r`.
fn precise_supports_couple<T: Real>(op: &LowerTransitionOperator<T>) -> bool {
    let dim = op.dim();
    let succ: Vec<Vec<usize>> = (0..dim)
        .map(|x| {
            let p = &op.rows[x].vertices()[0];
            (0..dim).filter(|&z| p.get(z) > T::zero()).collect()
        })
        .collect();
    // Backward reachability of the diagonal in the pair graph.
    let idx = |x: usize, y: usize| x * dim + y;
    let mut couples = vec![false; dim * dim];
    for x in 0..dim {
        couples[idx(x, x)] = true;
    }
    loop {
        let mut changed = false;
        for x in 0..dim {
            for y in 0..dim {
                if couples[idx(x, y)] {
                    continue;
                }
                let reaches = succ[x]
                    .iter()
                    .any(|&u| succ[y].iter().any(|&v| couples[idx(u, v)]));
                if reaches {
                    couples[idx(x, y)] = true;
                    changed = true;
                }
            }
        }
        if !changed {
            break;
        }
    }
    couples.iter().all(|&c| c)
}

// ---------------------------------------------------------------------------
// ImpreciseMarkovChain
// ---------------------------------------------------------------------------

/// An imprecise Markov chain: state labels, an initial (marginal) credal set
/// and a lower transition operator.
#[derive(Debug, Clone)]
pub struct ImpreciseMarkovChain<T> {
    states: Vec<String>,
    initial: CredalSet<T>,
    operator: LowerTransitionOperator<T>,
}

impl<T: Real> ImpreciseMarkovChain<T> {
    /// Builds a chain, checking that all dimensions agree.
    pub fn new(
        states: Vec<String>,
        initial: CredalSet<T>,
        operator: LowerTransitionOperator<T>,
    ) -> Result<Self> {
        check_dim(states.len(), initial.dim())?;
        check_dim(states.len(), operator.dim())?;
        Ok(Self {
            states,
            initial,
            operator,
        })
    }

    /// State labels.
    pub fn states(&self) -> &[String] {
        &self.states
    }

    /// Index of a state label.
    pub fn state_index(&self, label: &str) -> Option<usize> {
        self.states.iter().position(|s| s == label)
    }

    /// State count.
    pub fn dim(&self) -> usize {
        self.states.len()
    }

    /// The marginal model for the first state.
    pub fn initial(&self) -> &CredalSet<T> {
        &self.initial
    }

    /// The lower transition operator.
    pub fn operator(&self) -> &LowerTransitionOperator<T> {
        &self.operator
    }

    /// Marginal lower expectation of `f(X_n)`:
    /// `L_n(f) = L_1(T^{n-1} f)` by the law of iterated lower expectations.
    pub fn marginal_lower_expectation(&self, n: usize, f: &Gamble<T>) -> Result<T> {
        if n == 0 {
            return Err(Error::InvalidParameter("time index n must be >= 1".into()));
        }
        let g = self.operator.apply_power(n - 1, f)?;
        self.initial.lower_expectation(&g)
    }

    /// Joint lower expectation of an `n`-measurable gamble given as a table
    /// over all `|X|^n` state sequences in row-major order (`x_1` most
    /// significant). Backward recursion through the local models; equal to
    /// the global lower expectation of the corresponding probability tree.
    pub fn finite_horizon_joint(&self, n: usize, f: &[T]) -> Result<T> {
        let g1 = self.operator.collapse_joint(n, f)?;
        self.initial.lower_expectation(&g1)
    }

    /// Whether the chain is stationary: its initial model agrees with the
    /// stationary lower expectation on every candidate gamble ({0,1}-valued
    /// plus a seeded grid), within `tol`. Errors when the operator cannot be
    /// certified PF-like.
    pub fn check_stationarity(&self, tol: T) -> Result<bool> {
        let dim = self.dim();
        let horizon = defaults::power_horizon(dim);
        let report = self.operator.detect_pf_like(
            horizon,
            horizon,
            DistanceMode::Grid {
                samples: 32,
                seed: 0x51A7,
            },
        )?;
        if !matches!(report.verdict, PfVerdict::PfLike { .. }) {
            return Err(Error::NotPfLike);
        }
        let iter_tol = (tol * T::of(1e-2)).min(T::of(defaults::TOL));
        let mode = DistanceMode::Grid {
            samples: 128,
            seed: 0x51A7,
        };
        let mut iter_error = None;
        let d = crate::credal::functional_distance(
            dim,
            mode,
            |h| self.initial.lower_unchecked(h.values()),
            |h| match self
                .operator
                .stationary_lower_expectation(h, iter_tol, defaults::MAX_ITER)
            {
                Ok(est) => est.value,
                Err(e) => {
                    iter_error = Some(e);
                    T::zero()
                }
            },
        )?;
        if let Some(e) = iter_error {
            return Err(e);
        }
        Ok(d <= tol)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::credal::MassFunction;

    fn binary_example(eps: f64) -> ImpreciseMarkovChain<f64> {
        let row = CredalSet::linear_vacuous(&MassFunction::uniform(2), eps).unwrap();
        let op = LowerTransitionOperator::new(vec![row.clone(), row.clone()]).unwrap();
        ImpreciseMarkovChain::new(vec!["a".into(), "b".into()], row, op).unwrap()
    }

    fn precise_op(p: &[[f64; 2]; 2]) -> LowerTransitionOperator<f64> {
        let rows = p
            .iter()
            .map(|row| CredalSet::precise(MassFunction::new(row.to_vec()).unwrap()))
            .collect();
        LowerTransitionOperator::new(rows).unwrap()
    }

    #[test]
    fn constant_gambles_are_fixed_points() {
        let chain = binary_example(0.5);
        let c = Gamble::constant(2, 7.0);
        let image = chain.operator().apply(&c).unwrap();
        assert_eq!(image.values(), &[7.0, 7.0]);
    }

    #[test]
    fn binary_example_apply_indicator() {
        let chain = binary_example(0.5);
        let f = Gamble::indicator(2, 0);
        let image = chain.operator().apply(&f).unwrap();
        assert!((image.get(0) - 0.25).abs() < 1e-15);
        assert!((image.get(1) - 0.25).abs() < 1e-15);
    }

    #[test]
    fn precise_apply_is_matrix_vector_product() {
        let op = precise_op(&[[0.9, 0.1], [0.2, 0.8]]);
        let f = Gamble::new(vec![1.0, 0.0]).unwrap();
        let tf = op.apply(&f).unwrap();
        assert!((tf.get(0) - 0.9).abs() < 1e-15);
        assert!((tf.get(1) - 0.2).abs() < 1e-15);
        // Squaring by hand: (0.9*0.9 + 0.1*0.2, 0.2*0.9 + 0.8*0.2).
        let t2f = op.apply_power(2, &f).unwrap();
        assert!((t2f.get(0) - 0.83).abs() < 1e-15);
        assert!((t2f.get(1) - 0.34).abs() < 1e-15);
    }

    #[test]
    fn power_zero_is_identity() {
        let op = precise_op(&[[0.9, 0.1], [0.2, 0.8]]);
        let f = Gamble::new(vec![3.0, -1.0]).unwrap();
        assert_eq!(op.apply_power(0, &f).unwrap().values(), f.values());
    }

    #[test]
    fn ergodicity_coefficient_examples() {
        // Identity chain: Th = h, so rho = 1.
        let id = precise_op(&[[1.0, 0.0], [0.0, 1.0]]);
        assert_eq!(
            id.ergodicity_coefficient(1, DistanceMode::Indicators01)
                .unwrap(),
            1.0
        );
        // Identical rows: Th constant for every h, so rho = 0.
        let chain = binary_example(0.5);
        assert_eq!(
            chain
                .operator()
                .ergodicity_coefficient(1, DistanceMode::Indicators01)
                .unwrap(),
            0.0
        );
        // Dobrushin coefficient 1 - sum of column minima = 0.7.
        let op = precise_op(&[[0.9, 0.1], [0.2, 0.8]]);
        let rho = op
            .ergodicity_coefficient(1, DistanceMode::Indicators01)
            .unwrap();
        assert!((rho - 0.7).abs() < 1e-15);
    }

    #[test]
    fn detect_pf_like_binary_and_identity_and_vacuous() {
        let chain = binary_example(0.5);
        let report = chain
            .operator()
            .detect_pf_like(4, 4, DistanceMode::Indicators01)
            .unwrap();
        assert_eq!(report.verdict, PfVerdict::PfLike { r: 1 });
        assert_eq!(report.rho_by_power[0].1, 0.0);

        let id = precise_op(&[[1.0, 0.0], [0.0, 1.0]]);
        let report = id.detect_pf_like(5, 5, DistanceMode::Indicators01).unwrap();
        assert_eq!(report.verdict, PfVerdict::NotPfLikeCertified);
        assert!(!report.reachability_ok);

        let vac = LowerTransitionOperator::new(vec![
            CredalSet::<f64>::vacuous(2),
            CredalSet::<f64>::vacuous(2),
        ])
        .unwrap();
        let report = vac.detect_pf_like(1, 1, DistanceMode::Indicators01).unwrap();
        assert_eq!(report.verdict, PfVerdict::PfLike { r: 1 });
    }

    #[test]
    fn periodic_chain_certified_not_pf_like() {
        let flip = precise_op(&[[0.0, 1.0], [1.0, 0.0]]);
        let report = flip
            .detect_pf_like(6, 6, DistanceMode::Indicators01)
            .unwrap();
        assert_eq!(report.verdict, PfVerdict::NotPfLikeCertified);
    }

    #[test]
    fn absorbing_but_coupling_chain_is_pf_like() {
        // Reducible chain whose pair supports still couple.
        let op = precise_op(&[[1.0, 0.0], [0.5, 0.5]]);
        let report = op.detect_pf_like(8, 8, DistanceMode::Indicators01).unwrap();
        assert!(matches!(report.verdict, PfVerdict::PfLike { .. }));
    }

    #[test]
    fn stationary_binary_example() {
        let chain = binary_example(0.5);
        let est = chain
            .operator()
            .stationary_lower_expectation(&Gamble::indicator(2, 0), 1e-10, 100)
            .unwrap();
        assert!((est.value - 0.25).abs() < 1e-15);
        assert_eq!(est.width, 0.0);
        assert_eq!(est.iters, 1);
    }

    #[test]
    fn stationary_vacuous_rows_give_min() {
        let vac = LowerTransitionOperator::new(vec![CredalSet::<f64>::vacuous(3); 3]).unwrap();
        let f = Gamble::new(vec![2.0, 5.0, 9.0]).unwrap();
        let est = vac.stationary_lower_expectation(&f, 1e-10, 100).unwrap();
        assert_eq!(est.value, 2.0);
    }

    #[test]
    fn stationary_precise_matches_pi() {
        // Stationary distribution of [[0.9,0.1],[0.2,0.8]] is (2/3, 1/3).
        let op = precise_op(&[[0.9, 0.1], [0.2, 0.8]]);
        let est = op
            .stationary_lower_expectation(&Gamble::indicator(2, 0), 1e-12, 10_000)
            .unwrap();
        assert!((est.value - 2.0 / 3.0).abs() < 1e-10);
    }

    #[test]
    fn stationary_nonconvergence_reports_width() {
        let id = precise_op(&[[1.0, 0.0], [0.0, 1.0]]);
        let err = id
            .stationary_lower_expectation(&Gamble::indicator(2, 0), 1e-10, 50)
            .unwrap_err();
        assert!(matches!(err, Error::NoConvergence { width, .. } if (width - 1.0).abs() < 1e-12));
    }

    #[test]
    fn marginals_of_binary_example_are_stationary() {
        let chain = binary_example(0.5);
        let f = Gamble::indicator(2, 0);
        for n in 1..6 {
            let v = chain.marginal_lower_expectation(n, &f).unwrap();
            assert!((v - 0.25).abs() < 1e-15);
        }
    }

    #[test]
    fn marginal_precise_one_step() {
        let op = precise_op(&[[0.9, 0.1], [0.2, 0.8]]);
        let chain = ImpreciseMarkovChain::new(
            vec!["a".into(), "b".into()],
            CredalSet::precise(MassFunction::degenerate(2, 0)),
            op,
        )
        .unwrap();
        let v = chain
            .marginal_lower_expectation(2, &Gamble::indicator(2, 0))
            .unwrap();
        assert!((v - 0.9).abs() < 1e-15);
    }

    #[test]
    fn finite_horizon_joint_n1_is_marginal() {
        let chain = binary_example(0.5);
        let table = [1.0, 0.0];
        let v = chain.finite_horizon_joint(1, &table).unwrap();
        assert!((v - 0.25).abs() < 1e-15);
    }

    #[test]
    fn finite_horizon_joint_precise_double_sum() {
        let p = [[0.9, 0.1], [0.2, 0.8]];
        let op = precise_op(&p);
        let init = [0.6, 0.4];
        let chain = ImpreciseMarkovChain::new(
            vec!["a".into(), "b".into()],
            CredalSet::precise(MassFunction::new(init.to_vec()).unwrap()),
            op,
        )
        .unwrap();
        // Table over (x1, x2) in row-major order.
        let f = [0.3, -1.0, 2.0, 0.7];
        let joint = chain.finite_horizon_joint(2, &f).unwrap();
        let mut direct = 0.0;
        for x1 in 0..2 {
            for x2 in 0..2 {
                direct += init[x1] * p[x1][x2] * f[2 * x1 + x2];
            }
        }
        assert!((joint - direct).abs() < 1e-14);
    }

    #[test]
    fn stationary_joint_binary_product_indicator() {
        // Two-step recursion by hand with identical rows: the collapse gives
        // 1_a(x) * T 1_a(x) = 0.25 * 1_a, whose stationary value is 0.0625.
        let chain = binary_example(0.5);
        let f = [1.0, 0.0, 0.0, 0.0];
        let est = chain
            .operator()
            .stationary_joint_lower_expectation(2, &f, 1e-10, 100)
            .unwrap();
        assert!((est.value - 0.0625).abs() < 1e-15);
    }

    #[test]
    fn stationary_joint_r1_reduces_to_stationary() {
        let op = precise_op(&[[0.9, 0.1], [0.2, 0.8]]);
        let f = [3.0, -1.0];
        let joint = op
            .stationary_joint_lower_expectation(1, &f, 1e-12, 100_000)
            .unwrap();
        let plain = op
            .stationary_lower_expectation(&Gamble::new(f.to_vec()).unwrap(), 1e-12, 100_000)
            .unwrap();
        assert_eq!(joint.value, plain.value);
    }

    #[test]
    fn stationary_joint_precise_double_sum() {
        // Against the direct sum over pi(x) P(y|x) f(x,y) with the
        // stationary distribution (2/3, 1/3).
        let p = [[0.9, 0.1], [0.2, 0.8]];
        let op = precise_op(&p);
        let f = [0.4, -2.0, 1.5, 0.25];
        let est = op
            .stationary_joint_lower_expectation(2, &f, 1e-12, 100_000)
            .unwrap();
        let pi = [2.0 / 3.0, 1.0 / 3.0];
        let mut direct = 0.0;
        for x in 0..2 {
            for y in 0..2 {
                direct += pi[x] * p[x][y] * f[2 * x + y];
            }
        }
        assert!((est.value - direct).abs() < 1e-9);
    }

    #[test]
    fn stationarity_check() {
        let chain = binary_example(0.5);
        assert!(chain.check_stationarity(1e-9).unwrap());

        // Same operator with a degenerate initial model is not stationary.
        let row = CredalSet::linear_vacuous(&MassFunction::uniform(2), 0.5).unwrap();
        let op = LowerTransitionOperator::new(vec![row.clone(), row]).unwrap();
        let chain = ImpreciseMarkovChain::new(
            vec!["a".into(), "b".into()],
            CredalSet::precise(MassFunction::degenerate(2, 0)),
            op,
        )
        .unwrap();
        assert!(!chain.check_stationarity(1e-9).unwrap());

        // Vacuous rows with vacuous initial: both lower envelopes are min.
        let vop =
            LowerTransitionOperator::new(vec![CredalSet::<f64>::vacuous(2); 2]).unwrap();
        let vchain = ImpreciseMarkovChain::new(
            vec!["a".into(), "b".into()],
            CredalSet::vacuous(2),
            vop,
        )
        .unwrap();
        assert!(vchain.check_stationarity(1e-9).unwrap());

        // Identity chain: stationarity is undefined (not PF-like).
        let id = precise_op(&[[1.0, 0.0], [0.0, 1.0]]);
        let chain = ImpreciseMarkovChain::new(
            vec!["a".into(), "b".into()],
            CredalSet::precise(MassFunction::uniform(2)),
            id,
        )
        .unwrap();
        assert!(matches!(
            chain.check_stationarity(1e-9),
            Err(Error::NotPfLike)
        ));
    }
}
