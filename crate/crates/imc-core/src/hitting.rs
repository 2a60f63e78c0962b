//! Lower and upper expected transition and return times.
//!
//! For a target state `y`, the lower expected times solve the non-linear
//! system
//!
//! ```text
//! L(x -> y) = 1 + T( sum_{z != y} 1_z * L(z -> y) )(x)
//! ```
//!
//! and the upper times the corresponding system with the conjugate upper
//! operator. Starting the iteration from the all-zero vector, which lies
//! below the least fixed point, makes the iterates componentwise
//! nondecreasing (the operator is monotone), so the limit is the minimal
//! solution, which is the correct expected-time semantics. Components that
//! exceed the cap are declared `+inf`; extended arithmetic uses the
//! convention `0 * inf = 0`, and `-inf` never arises because iterates stay
//! nonnegative.

use crate::chain::LowerTransitionOperator;
use crate::credal::CredalSet;
use crate::error::{Error, Result};
use crate::scalar::Real;

/// A vector of extended reals in `[0, +inf]`; entries may be `+inf` but
/// never `-inf` or NaN.
#[derive(Debug, Clone, PartialEq)]
pub struct ExtendedGamble<T> {
    values: Vec<T>,
}

impl<T: Real> ExtendedGamble<T> {
    /// Creates an extended gamble, rejecting `-inf` and NaN entries.
    pub fn new(values: Vec<T>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::InvalidParameter("empty extended gamble".into()));
        }
        if values.iter().any(|v| v.is_nan() || *v == T::neg_infinity()) {
            return Err(Error::InvalidParameter(
                "extended gamble entries must lie in [0, +inf]".into(),
            ));
        }
        Ok(Self { values })
    }

    /// Number of states.
    pub fn dim(&self) -> usize {
        self.values.len()
    }

    /// The underlying values.
    pub fn values(&self) -> &[T] {
        &self.values
    }

    /// Value at state `x`.
    pub fn get(&self, x: usize) -> T {
        self.values[x]
    }

    /// True when some entry is `+inf`.
    pub fn has_infinite(&self) -> bool {
        self.values.iter().any(|&v| v == T::infinity())
    }
}

/// Extended expectation `sum_z p(z) g(z)` with the `0 * inf = 0` convention.
fn extended_expectation<T: Real>(p: &[T], g: &[T]) -> T {
    let mut acc = T::zero();
    for (&pz, &gz) in p.iter().zip(g) {
        if pz > T::zero() {
            if gz == T::infinity() {
                return T::infinity();
            }
            acc = acc + pz * gz;
        }
    }
    acc
}

/// Lower envelope of the extended expectation over a credal set's vertices.
fn extended_lower<T: Real>(set: &CredalSet<T>, g: &[T]) -> T {
    set.vertices()
        .iter()
        .map(|p| extended_expectation(p.probabilities(), g))
        .fold(T::infinity(), T::min)
}

/// Upper envelope of the extended expectation over a credal set's vertices.
fn extended_upper<T: Real>(set: &CredalSet<T>, g: &[T]) -> T {
    set.vertices()
        .iter()
        .map(|p| extended_expectation(p.probabilities(), g))
        .fold(T::zero(), T::max)
}

/// Which envelope the time system is solved for.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Side {
    Lower,
    Upper,
}

/// Expected transition/return times toward one target state.
#[derive(Debug, Clone)]
pub struct HittingTimes<T> {
    /// Target state index.
    pub target: usize,
    /// Expected time from each state; entries in `[1, +inf]`.
    pub times: ExtendedGamble<T>,
    /// Iterations performed.
    pub iterations: usize,
    /// True when every component stabilized within tolerance; false when a
    /// component was capped to `+inf` or the iteration budget ran out.
    pub converged: bool,
}

fn solve_times<T: Real>(
    op: &LowerTransitionOperator<T>,
    y: usize,
    side: Side,
    tol: T,
    max_iter: usize,
    cap: T,
) -> Result<HittingTimes<T>> {
    let dim = op.dim();
    if y >= dim {
        return Err(Error::InvalidParameter(format!(
            "target state {y} outside 0..{dim}"
        )));
    }
    if !(tol > T::zero()) {
        return Err(Error::InvalidParameter("tol must be positive".into()));
    }
    if !(cap > T::one()) {
        return Err(Error::InvalidParameter("cap must exceed 1".into()));
    }

    let mut h = vec![T::zero(); dim];
    let mut capped = false;
    let mut iterations = 0usize;
    let mut converged = false;
    let mut g = vec![T::zero(); dim];

    while iterations < max_iter {
        iterations += 1;
        // g(z) = h(z) for z != y, 0 at the target (the time stops there).
        g.copy_from_slice(&h);
        g[y] = T::zero();
        let mut change = T::zero();
        let mut next = Vec::with_capacity(dim);
        for x in 0..dim {
            let image = match side {
                Side::Lower => extended_lower(&op.rows()[x], &g),
                Side::Upper => extended_upper(&op.rows()[x], &g),
            };
            let mut value = T::one() + image;
            if value > cap {
                value = T::infinity();
                if h[x] != T::infinity() {
                    capped = true;
                }
            }
            let delta = if value == T::infinity() {
                if h[x] == T::infinity() {
                    T::zero()
                } else {
                    T::infinity()
                }
            } else {
                value - h[x]
            };
            change = change.max(delta);
            next.push(value);
        }
        h = next;
        if change <= tol {
            converged = true;
            break;
        }
    }

    Ok(HittingTimes {
        target: y,
        times: ExtendedGamble::new(h)?,
        iterations,
        converged: converged && !capped,
    })
}

/// Default divergence cap: components exceeding it are declared `+inf`.
pub const DEFAULT_CAP: f64 = 1e12;

/// Least solution of the lower-time system toward target `y`, by monotone
/// iteration from zero.
pub fn lower_hitting_times<T: Real>(
    op: &LowerTransitionOperator<T>,
    y: usize,
    tol: T,
    max_iter: usize,
    cap: T,
) -> Result<HittingTimes<T>> {
    solve_times(op, y, Side::Lower, tol, max_iter, cap)
}

/// Least solution of the upper-time system toward target `y` (conjugate
/// upper expectations per row).
pub fn upper_hitting_times<T: Real>(
    op: &LowerTransitionOperator<T>,
    y: usize,
    tol: T,
    max_iter: usize,
    cap: T,
) -> Result<HittingTimes<T>> {
    solve_times(op, y, Side::Upper, tol, max_iter, cap)
}

/// Closed-form lower and upper transition/return times of the binary
/// imprecise chain whose every local model is the linear-vacuous mixture of
/// the uniform distribution with parameter `eps`: `2/(1+eps)` and
/// `2/(1-eps)`. Used as a fixture for the iterative solvers.
pub fn binary_closed_form<T: Real>(eps: T) -> Result<(T, T)> {
    if !(eps > T::zero() && eps < T::one()) {
        return Err(Error::InvalidParameter(format!(
            "eps must lie in (0,1); got {eps}"
        )));
    }
    let two = T::of(2.0);
    Ok((two / (T::one() + eps), two / (T::one() - eps)))
}
