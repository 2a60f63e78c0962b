//! Finite-state credal sets in vertex representation, with exact lower and
//! upper expectations.
//!
//! A credal set is stored as a finite list of extreme mass functions. Its
//! lower envelope
//!
//! ```text
//! L(f) = min { E_p(f) : p vertex }
//! ```
//!
//! is a coherent lower expectation; the conjugate upper expectation is
//! `U(f) = -L(-f)`. Both envelopes are exact finite minima/maxima, which is
//! the reason this crate works with vertex lists rather than constraint
//! systems.

use crate::error::{Error, Result};
use crate::scalar::{Real, CMP_TOL, MASS_SUM_TOL};
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Enumeration limit for {0,1}-valued candidate gambles (2^20 cases).
pub const INDICATOR_ENUM_LIMIT: usize = 20;

// ---------------------------------------------------------------------------
// Gamble
// ---------------------------------------------------------------------------

/// A real-valued function on a finite state space, stored as one value per
/// state. All entries are finite.
#[derive(Debug, Clone, PartialEq)]
pub struct Gamble<T> {
    values: Vec<T>,
}

impl<T: Real> Gamble<T> {
    /// Creates a gamble, rejecting empty or non-finite inputs.
    pub fn new(values: Vec<T>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::InvalidParameter("gamble must be nonempty".into()));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter(
                "gamble entries must be finite".into(),
            ));
        }
        Ok(Self { values })
    }

    /// The constant gamble `c` on `dim` states.
    pub fn constant(dim: usize, c: T) -> Self {
        Self {
            values: vec![c; dim],
        }
    }

    /// The indicator of a single state.
    pub fn indicator(dim: usize, state: usize) -> Self {
        let mut values = vec![T::zero(); dim];
        values[state] = T::one();
        Self { values }
    }

    /// The indicator of the state set encoded by `mask` (bit `x` set means
    /// state `x` is in the event).
    pub fn indicator_mask(dim: usize, mask: u64) -> Self {
        let values = (0..dim)
            .map(|x| {
                if mask >> x & 1 == 1 {
                    T::one()
                } else {
                    T::zero()
                }
            })
            .collect();
        Self { values }
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

    /// Smallest entry.
    pub fn min_value(&self) -> T {
        self.values.iter().copied().fold(T::infinity(), T::min)
    }

    /// Largest entry.
    pub fn max_value(&self) -> T {
        self.values.iter().copied().fold(T::neg_infinity(), T::max)
    }

    /// Variation seminorm `max f - min f`.
    pub fn variation_norm(&self) -> T {
        self.max_value() - self.min_value()
    }

    /// Pointwise negation.
    pub fn negated(&self) -> Self {
        Self {
            values: self.values.iter().map(|&v| -v).collect(),
        }
    }

    /// Pointwise sum; dimensions must match.
    pub fn add(&self, other: &Self) -> Result<Self> {
        check_dim(self.dim(), other.dim())?;
        Ok(Self {
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(&a, &b)| a + b)
                .collect(),
        })
    }

    /// Adds the constant `mu` to every entry.
    pub fn shift(&self, mu: T) -> Self {
        Self {
            values: self.values.iter().map(|&v| v + mu).collect(),
        }
    }

    /// Multiplies every entry by `lambda`.
    pub fn scale(&self, lambda: T) -> Self {
        Self {
            values: self.values.iter().map(|&v| v * lambda).collect(),
        }
    }

    /// True when `self <= other` pointwise.
    pub fn dominated_by(&self, other: &Self) -> bool {
        self.dim() == other.dim()
            && self
                .values
                .iter()
                .zip(&other.values)
                .all(|(&a, &b)| a <= b)
    }
}

pub(crate) fn check_dim(expected: usize, got: usize) -> Result<()> {
    if expected == got {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected, got })
    }
}

// ---------------------------------------------------------------------------
// MassFunction
// ---------------------------------------------------------------------------

/// A probability mass function on a finite state space.
#[derive(Debug, Clone, PartialEq)]
pub struct MassFunction<T> {
    probabilities: Vec<T>,
}

impl<T: Real> MassFunction<T> {
    /// Creates a mass function with the default sum tolerance of `1e-12`.
    pub fn new(probabilities: Vec<T>) -> Result<Self> {
        Self::new_with_tol(probabilities, T::of(MASS_SUM_TOL))
    }

    /// Creates a mass function, requiring every entry in `[0,1]` and the sum
    /// within `tol` of one.
    pub fn new_with_tol(probabilities: Vec<T>, tol: T) -> Result<Self> {
        if probabilities.is_empty() {
            return Err(Error::InvalidMassFunction("empty vector".into()));
        }
        for (i, &p) in probabilities.iter().enumerate() {
            if !(p >= T::zero() && p <= T::one()) {
                return Err(Error::InvalidMassFunction(format!(
                    "entry {i} = {p} outside [0,1]"
                )));
            }
        }
        let sum: T = probabilities.iter().copied().sum();
        if (sum - T::one()).abs() > tol {
            return Err(Error::InvalidMassFunction(format!(
                "entries sum to {sum}, not 1"
            )));
        }
        Ok(Self { probabilities })
    }

    /// The degenerate mass function putting all mass on `state`.
    pub fn degenerate(dim: usize, state: usize) -> Self {
        let mut probabilities = vec![T::zero(); dim];
        probabilities[state] = T::one();
        Self { probabilities }
    }

    /// The uniform mass function on `dim` states.
    pub fn uniform(dim: usize) -> Self {
        Self {
            probabilities: vec![T::one() / T::of_usize(dim); dim],
        }
    }

    /// Number of states.
    pub fn dim(&self) -> usize {
        self.probabilities.len()
    }

    /// The underlying probabilities.
    pub fn probabilities(&self) -> &[T] {
        &self.probabilities
    }

    /// Probability of state `x`.
    pub fn get(&self, x: usize) -> T {
        self.probabilities[x]
    }

    /// Expectation of a gamble under this mass function.
    pub fn expectation(&self, f: &Gamble<T>) -> Result<T> {
        check_dim(self.dim(), f.dim())?;
        Ok(self.expectation_unchecked(f.values()))
    }

    pub(crate) fn expectation_unchecked(&self, values: &[T]) -> T {
        self.probabilities
            .iter()
            .zip(values)
            .map(|(&p, &v)| p * v)
            .sum()
    }
}

// ---------------------------------------------------------------------------
// CredalSet
// ---------------------------------------------------------------------------

/// A closed convex set of mass functions, represented by its vertices.
#[derive(Debug, Clone)]
pub struct CredalSet<T> {
    vertices: Vec<MassFunction<T>>,
    label: Option<String>,
}

impl<T: Real> CredalSet<T> {
    /// Builds a credal set from a nonempty vertex list of equal dimension.
    pub fn from_vertices(vertices: Vec<MassFunction<T>>) -> Result<Self> {
        if vertices.is_empty() {
            return Err(Error::InvalidParameter(
                "credal set needs at least one vertex".into(),
            ));
        }
        let dim = vertices[0].dim();
        for v in &vertices[1..] {
            check_dim(dim, v.dim())?;
        }
        Ok(Self {
            vertices,
            label: None,
        })
    }

    /// The precise model consisting of a single mass function.
    pub fn precise(p: MassFunction<T>) -> Self {
        Self {
            vertices: vec![p],
            label: None,
        }
    }

    /// The vacuous model: all mass functions on `dim` states. Vertices are
    /// the degenerate mass functions.
    pub fn vacuous(dim: usize) -> Self {
        Self {
            vertices: (0..dim).map(|x| MassFunction::degenerate(dim, x)).collect(),
            label: None,
        }
    }

    /// The linear-vacuous mixture `(1-eps)*p + eps*vacuous`, whose lower
    /// envelope is `(1-eps)*E_p(h) + eps*min h`. The vertex representation is
    /// `{(1-eps)*p + eps*delta_x : x in the state space}`, where the envelope
    /// is attained.
    pub fn linear_vacuous(p: &MassFunction<T>, eps: T) -> Result<Self> {
        if !(eps >= T::zero() && eps <= T::one()) {
            return Err(Error::InvalidParameter(format!(
                "linear-vacuous eps = {eps} outside [0,1]"
            )));
        }
        let dim = p.dim();
        let one_m_eps = T::one() - eps;
        let vertices = (0..dim)
            .map(|x| {
                let probs = (0..dim)
                    .map(|z| {
                        let delta = if z == x { T::one() } else { T::zero() };
                        one_m_eps * p.get(z) + eps * delta
                    })
                    .collect();
                MassFunction::new(probs).expect("mixture of mass functions is a mass function")
            })
            .collect();
        Ok(Self {
            vertices,
            label: None,
        })
    }

    /// Attaches a descriptive label.
    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = Some(label.into());
        self
    }

    /// The label, if any.
    pub fn label(&self) -> Option<&str> {
        self.label.as_deref()
    }

    /// State-space size.
    pub fn dim(&self) -> usize {
        self.vertices[0].dim()
    }

    /// The vertex list.
    pub fn vertices(&self) -> &[MassFunction<T>] {
        &self.vertices
    }

    /// True when the set has a single vertex.
    pub fn is_precise(&self) -> bool {
        self.vertices.len() == 1
    }

    /// Lower expectation: the minimum of `E_p(f)` over the vertices.
    pub fn lower_expectation(&self, f: &Gamble<T>) -> Result<T> {
        check_dim(self.dim(), f.dim())?;
        Ok(self.lower_unchecked(f.values()))
    }

    /// Conjugate upper expectation, computed as `-L(-f)` on the same code
    /// path so that conjugacy holds bit-for-bit.
    pub fn upper_expectation(&self, f: &Gamble<T>) -> Result<T> {
        Ok(-self.lower_expectation(&f.negated())?)
    }

    /// Lower expectation together with the index of the attaining vertex
    /// (lowest index on ties).
    pub fn lower_expectation_argmin(&self, f: &Gamble<T>) -> Result<(T, usize)> {
        check_dim(self.dim(), f.dim())?;
        Ok(self.lower_argmin_unchecked(f.values()))
    }

    pub(crate) fn lower_unchecked(&self, values: &[T]) -> T {
        self.vertices
            .iter()
            .map(|p| p.expectation_unchecked(values))
            .fold(T::infinity(), T::min)
    }

    pub(crate) fn lower_argmin_unchecked(&self, values: &[T]) -> (T, usize) {
        let mut best = T::infinity();
        let mut arg = 0;
        for (i, p) in self.vertices.iter().enumerate() {
            let e = p.expectation_unchecked(values);
            if e < best {
                best = e;
                arg = i;
            }
        }
        (best, arg)
    }

    /// Checks the coherence properties of the lower envelope on `trials`
    /// seeded random gamble instances.
    pub fn check_coherence(&self, trials: usize, seed: u64) -> Result<CoherenceReport> {
        check_coherence(self, trials, seed)
    }

    /// Distance to another credal set's lower envelope; see [`distance`].
    pub fn distance(&self, other: &Self, mode: DistanceMode) -> Result<T> {
        distance(self, other, mode)
    }
}

// ---------------------------------------------------------------------------
// Coherence checking
// ---------------------------------------------------------------------------

/// The eight checked coherence properties of a lower expectation.
pub const AXIOM_NAMES: [&str; 8] = [
    "LE1 bounds",
    "LE2 superadditivity",
    "LE3 non-negative homogeneity",
    "LE4 monotonicity",
    "LE5 bound chain",
    "LE6 subadditivity of upper",
    "LE7 upper homogeneity",
    "LE8 constant additivity",
];

/// Outcome of checking one coherence axiom.
#[derive(Debug, Clone)]
pub struct AxiomCheck {
    /// Axiom label, one of [`AXIOM_NAMES`].
    pub name: &'static str,
    /// Number of trials that violated the axiom beyond tolerance.
    pub failures: usize,
    /// Human-readable rendering of the first counterexample found.
    pub first_counterexample: Option<String>,
}

impl AxiomCheck {
    /// True when no violation was found.
    pub fn passed(&self) -> bool {
        self.failures == 0
    }
}

/// Per-axiom results of a randomized coherence check.
#[derive(Debug, Clone)]
pub struct CoherenceReport {
    /// One entry per axiom LE1..LE8.
    pub axioms: Vec<AxiomCheck>,
    /// Vertex indices flagged as (approximate) convex combinations of the
    /// remaining vertices. Redundancy is permitted, merely reported.
    pub redundant_vertices: Vec<usize>,
    /// Number of random trials run.
    pub trials: usize,
}

impl CoherenceReport {
    /// True when every axiom passed.
    pub fn all_passed(&self) -> bool {
        self.axioms.iter().all(AxiomCheck::passed)
    }
}

fn random_gamble_values<T: Real, R: Rng>(dim: usize, rng: &mut R) -> Vec<T> {
    (0..dim)
        .map(|_| T::of(rng.gen_range(-10.0..10.0)))
        .collect()
}

/// Samples seeded random gamble pairs and checks the coherence axioms
/// LE1-LE8 of the credal set's lower envelope, each within `1e-12`.
pub fn check_coherence<T: Real>(
    m: &CredalSet<T>,
    trials: usize,
    seed: u64,
) -> Result<CoherenceReport> {
    if trials == 0 {
        return Err(Error::InvalidParameter("trials must be >= 1".into()));
    }
    let tol = T::of(CMP_TOL);
    let dim = m.dim();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut axioms: Vec<AxiomCheck> = AXIOM_NAMES
        .iter()
        .map(|name| AxiomCheck {
            name,
            failures: 0,
            first_counterexample: None,
        })
        .collect();

    let record = |axioms: &mut Vec<AxiomCheck>, idx: usize, ok: bool, detail: String| {
        if !ok {
            axioms[idx].failures += 1;
            if axioms[idx].first_counterexample.is_none() {
                axioms[idx].first_counterexample = Some(detail);
            }
        }
    };

    for _ in 0..trials {
        let f = Gamble::new(random_gamble_values(dim, &mut rng))?;
        let g = Gamble::new(random_gamble_values(dim, &mut rng))?;
        let lambda = T::of(rng.gen_range(0.0..5.0));
        let mu = T::of(rng.gen_range(-5.0..5.0));

        let lf = m.lower_expectation(&f)?;
        let lg = m.lower_expectation(&g)?;
        let uf = m.upper_expectation(&f)?;
        let ug = m.upper_expectation(&g)?;

        // LE1: L(f) >= min f.
        record(
            &mut axioms,
            0,
            lf >= f.min_value() - tol,
            format!("L(f)={lf} < min f={}", f.min_value()),
        );
        // LE2: L(f+g) >= L(f) + L(g).
        let lfg = m.lower_expectation(&f.add(&g)?)?;
        record(
            &mut axioms,
            1,
            lfg >= lf + lg - tol,
            format!("L(f+g)={lfg} < L(f)+L(g)={}", lf + lg),
        );
        // LE3: L(lambda f) = lambda L(f) for lambda >= 0.
        let llf = m.lower_expectation(&f.scale(lambda))?;
        record(
            &mut axioms,
            2,
            (llf - lambda * lf).abs() <= tol,
            format!("L(lambda f)={llf} != lambda L(f)={}", lambda * lf),
        );
        // LE4: f <= g pointwise implies L(f) <= L(g) and U(f) <= U(g).
        // Construct a dominating gamble from g's absolute values.
        let h = Gamble::new(g.values().iter().map(|&v| v.abs()).collect())?;
        let f_dom = f.add(&h)?;
        let lf_dom = m.lower_expectation(&f_dom)?;
        let uf_dom = m.upper_expectation(&f_dom)?;
        record(
            &mut axioms,
            3,
            lf <= lf_dom + tol && uf <= uf_dom + tol,
            format!("monotonicity: L(f)={lf} vs L(f+|g|)={lf_dom}, U(f)={uf} vs U(f+|g|)={uf_dom}"),
        );
        // LE5: min f <= L(f) <= U(f) <= max f.
        record(
            &mut axioms,
            4,
            f.min_value() - tol <= lf && lf <= uf + tol && uf <= f.max_value() + tol,
            format!(
                "bound chain: min={} L={lf} U={uf} max={}",
                f.min_value(),
                f.max_value()
            ),
        );
        // LE6: U(f+g) <= U(f) + U(g).
        let ufg = m.upper_expectation(&f.add(&g)?)?;
        record(
            &mut axioms,
            5,
            ufg <= uf + ug + tol,
            format!("U(f+g)={ufg} > U(f)+U(g)={}", uf + ug),
        );
        // LE7: U(lambda f) = lambda U(f) for lambda >= 0.
        let ulf = m.upper_expectation(&f.scale(lambda))?;
        record(
            &mut axioms,
            6,
            (ulf - lambda * uf).abs() <= tol,
            format!("U(lambda f)={ulf} != lambda U(f)={}", lambda * uf),
        );
        // LE8: L(f+mu) = L(f) + mu and U(f+mu) = U(f) + mu.
        let lfm = m.lower_expectation(&f.shift(mu))?;
        let ufm = m.upper_expectation(&f.shift(mu))?;
        record(
            &mut axioms,
            7,
            (lfm - (lf + mu)).abs() <= tol && (ufm - (uf + mu)).abs() <= tol,
            format!("constant additivity: L(f+mu)={lfm} vs {}", lf + mu),
        );
    }

    Ok(CoherenceReport {
        axioms,
        redundant_vertices: redundant_vertices(m),
        trials,
    })
}

/// Flags vertices lying in the convex hull of the remaining ones.
///
/// Exact for duplicated vertices; for genuine convex combinations the hull
/// distance is estimated with a Frank-Wolfe iteration, so the flag is a
/// diagnostic, not a certificate.
fn redundant_vertices<T: Real>(m: &CredalSet<T>) -> Vec<usize> {
    let n = m.vertices().len();
    if n < 2 {
        return Vec::new();
    }
    let mut out = Vec::new();
    for j in 0..n {
        let target = m.vertices()[j].probabilities();
        let others: Vec<&[T]> = (0..n)
            .filter(|&i| i != j)
            .map(|i| m.vertices()[i].probabilities())
            .collect();
        if hull_distance_sq(target, &others) <= T::of(1e-14) {
            out.push(j);
        }
    }
    out
}

/// Squared Euclidean distance from `target` to the convex hull of `points`,
/// approximated by Frank-Wolfe with exact line search.
fn hull_distance_sq<T: Real>(target: &[T], points: &[&[T]]) -> T {
    // Exact fast path: duplicate point.
    for p in points {
        if p.iter().zip(target).all(|(&a, &b)| a == b) {
            return T::zero();
        }
    }
    let dim = target.len();
    let mut q: Vec<T> = points[0].to_vec();
    for _ in 0..2000 {
        // Residual r = target - q; pick the hull vertex maximizing <r, v>.
        let r: Vec<T> = target.iter().zip(&q).map(|(&t, &qi)| t - qi).collect();
        let mut best = T::neg_infinity();
        let mut best_p = points[0];
        for p in points {
            let score: T = r.iter().zip(*p).map(|(&ri, &pi)| ri * pi).sum();
            if score > best {
                best = score;
                best_p = p;
            }
        }
        // Exact line search toward best_p.
        let d: Vec<T> = best_p.iter().zip(&q).map(|(&b, &qi)| b - qi).collect();
        let dd: T = d.iter().map(|&x| x * x).sum();
        if dd == T::zero() {
            break;
        }
        let rd: T = r.iter().zip(&d).map(|(&ri, &di)| ri * di).sum();
        let gamma = (rd / dd).max(T::zero()).min(T::one());
        if gamma == T::zero() {
            break;
        }
        for i in 0..dim {
            q[i] = q[i] + gamma * d[i];
        }
    }
    target
        .iter()
        .zip(&q)
        .map(|(&t, &qi)| (t - qi) * (t - qi))
        .sum()
}

// ---------------------------------------------------------------------------
// Distance between lower expectation operators
// ---------------------------------------------------------------------------

/// Candidate-gamble strategy for maximizations over `[0,1]^X`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DistanceMode {
    /// Enumerate all 2^|X| {0,1}-valued gambles. Exact for precise operators;
    /// a certified lower bound in general.
    Indicators01,
    /// Indicator enumeration augmented with seeded random gambles in
    /// `[0,1]^X`.
    Grid {
        /// Number of random gambles to sample.
        samples: usize,
        /// RNG seed.
        seed: u64,
    },
}

/// Runs `eval` on every candidate gamble in `[0,1]^X` selected by `mode` and
/// returns the maximum value observed. Used for both the operator distance
/// and the coefficient of ergodicity.
pub(crate) fn maximize_over_unit_gambles<T: Real>(
    dim: usize,
    mode: DistanceMode,
    mut eval: impl FnMut(&Gamble<T>) -> T,
) -> Result<T> {
    if dim > INDICATOR_ENUM_LIMIT {
        return Err(Error::StateSpaceTooLarge {
            states: dim,
            limit: INDICATOR_ENUM_LIMIT,
        });
    }
    let mut best = T::zero();
    // Nonconstant {0,1}-valued gambles; constants contribute zero to both the
    // distance (constant additivity) and the variation of an image.
    for mask in 1..(1u64 << dim) - 1 {
        let h = Gamble::indicator_mask(dim, mask);
        best = best.max(eval(&h));
    }
    if let DistanceMode::Grid { samples, seed } = mode {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for _ in 0..samples {
            let h = Gamble::new((0..dim).map(|_| T::of(rng.gen_range(0.0..=1.0))).collect())?;
            best = best.max(eval(&h));
        }
    }
    Ok(best)
}

/// Distance `d(L, L') = max over h in [0,1]^X of |L(h) - L'(h)|` between the
/// lower envelopes of two credal sets.
///
/// The result lies in `[0,1]`. With [`DistanceMode::Indicators01`] it is the
/// exact distance for precise sets and a certified lower bound in general.
pub fn distance<T: Real>(a: &CredalSet<T>, b: &CredalSet<T>, mode: DistanceMode) -> Result<T> {
    check_dim(a.dim(), b.dim())?;
    if a.dim() == 1 {
        return Ok(T::zero());
    }
    maximize_over_unit_gambles(a.dim(), mode, |h| {
        (a.lower_unchecked(h.values()) - b.lower_unchecked(h.values())).abs()
    })
}

/// Distance between two lower-expectation functionals given as closures,
/// maximized over the same candidate set as [`distance`].
pub fn functional_distance<T: Real>(
    dim: usize,
    mode: DistanceMode,
    mut a: impl FnMut(&Gamble<T>) -> T,
    mut b: impl FnMut(&Gamble<T>) -> T,
) -> Result<T> {
    if dim == 1 {
        return Ok(T::zero());
    }
    maximize_over_unit_gambles(dim, mode, |h| (a(h) - b(h)).abs())
}
