//! Gain, average-gain and ergodic-average processes, the exact identity
//! relating them, the multiplicative test supermartingale behind the strong
//! law of large numbers, and Monte-Carlo harnesses that sample compatible
//! precise processes to check the point-wise ergodic theorem.
//!
//! For a gamble `f` on the state space, the gain process is
//!
//! ```text
//! G_f(X_{1:n}) = [f(X_1) - L_1(f)] + sum_{k=2..n} [f(X_k) - Tf(X_{k-1})]
//! ```
//!
//! the average gain is `G_f / n`, and the ergodic average is
//! `(1/n) sum_{k=1..n} [f(X_k) - L_k(f)]`. The three are tied together by
//!
//! ```text
//! Erg_f(X_{1:n}) = sum_{l=0..n-1} AvG_{T^l f}(X_{1:n})
//!                + (1/n) sum_{k=1..n} T^n f(X_k)
//!                - (1/n) sum_{l=1..n} T^l f(X_n)
//! ```
//!
//! which holds as an algebraic identity; [`verify_identity`] recomputes every
//! term independently and reports the residual.

use crate::chain::{defaults, ImpreciseMarkovChain, PfVerdict, StationaryEstimate};
use crate::credal::{CredalSet, DistanceMode, Gamble, MassFunction};
use crate::error::{Error, Result};
use crate::scalar::Real;
use crate::tree::{ImpreciseProbabilityTree, MartingaleReport, RealProcess, SelectorProcess};
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

// ---------------------------------------------------------------------------
// Paths and selection policies
// ---------------------------------------------------------------------------

/// A sampled finite path together with its provenance.
#[derive(Debug, Clone)]
pub struct Path {
    /// Visited state indices, one per time step.
    pub states: Vec<usize>,
    /// Seed the path was sampled with.
    pub seed: u64,
    /// Tag of the policy that produced it.
    pub policy_tag: String,
}

/// How a compatible precise process picks one vertex from each credal set it
/// encounters. Deterministic given the path RNG.
#[derive(Debug, Clone)]
pub enum SelectionPolicy<T> {
    /// A fixed vertex index for the initial model and per transition row,
    /// taken modulo the respective vertex counts.
    FixedVertex {
        /// Vertex index for the initial model.
        initial: usize,
        /// Vertex index per state row.
        per_state: Vec<usize>,
    },
    /// A uniformly random vertex at every step.
    RandomVertex,
    /// Greedy one-step adversary: the vertex minimizing the expectation of
    /// the given gamble, lowest index on ties.
    AdversarialFor(Gamble<T>),
}

impl<T: Real> SelectionPolicy<T> {
    /// A fixed-vertex policy using the same index everywhere.
    pub fn fixed(index: usize, dim: usize) -> Self {
        Self::FixedVertex {
            initial: index,
            per_state: vec![index; dim],
        }
    }

    /// Short human-readable tag.
    pub fn tag(&self) -> String {
        match self {
            Self::FixedVertex { initial, per_state } => {
                let idx: Vec<String> = per_state.iter().map(|i| i.to_string()).collect();
                format!("fixed[{initial};{}]", idx.join(","))
            }
            Self::RandomVertex => "random".into(),
            Self::AdversarialFor(_) => "adversarial".into(),
        }
    }

    /// Picks a vertex from `set`; `state` is `None` for the initial model.
    fn select<'a, R: Rng>(
        &self,
        set: &'a CredalSet<T>,
        state: Option<usize>,
        rng: &mut R,
    ) -> &'a MassFunction<T> {
        let n = set.vertices().len();
        let idx = match self {
            Self::FixedVertex { initial, per_state } => match state {
                None => initial % n,
                Some(x) => per_state[x] % n,
            },
            Self::RandomVertex => rng.gen_range(0..n),
            Self::AdversarialFor(f) => set.lower_expectation_argmin(f).expect("dims agree").1,
        };
        &set.vertices()[idx]
    }

    fn validate(&self, dim: usize) -> Result<()> {
        match self {
            Self::FixedVertex { per_state, .. } if per_state.len() != dim => {
                Err(Error::DimensionMismatch {
                    expected: dim,
                    got: per_state.len(),
                })
            }
            Self::AdversarialFor(f) if f.dim() != dim => Err(Error::DimensionMismatch {
                expected: dim,
                got: f.dim(),
            }),
            _ => Ok(()),
        }
    }
}

/// SplitMix64 finalizer, used to derive per-path RNG seeds.
fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E3779B97F4A7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58476D1CE4E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D049BB133111EB);
    z ^ (z >> 31)
}

/// Fixed splitting rule `(seed, index) -> stream seed`; aggregates are
/// identical however the paths are scheduled.
pub fn derive_path_seed(seed: u64, index: u64) -> u64 {
    splitmix64(seed ^ splitmix64(index))
}

fn sample_from<T: Real, R: Rng>(p: &MassFunction<T>, rng: &mut R) -> usize {
    let u: f64 = rng.gen();
    let mut acc = 0.0;
    for (x, &px) in p.probabilities().iter().enumerate() {
        acc += px.to_f64().unwrap_or(0.0);
        if u < acc {
            return x;
        }
    }
    p.dim() - 1
}

/// Samples one path of the chain under `policy`, fully deterministic given
/// `seed`: at every step the policy picks a vertex of the current model and
/// the next state is drawn from that mass function.
pub fn sample_path<T: Real>(
    chain: &ImpreciseMarkovChain<T>,
    policy: &SelectionPolicy<T>,
    length: usize,
    seed: u64,
) -> Result<Path> {
    if length == 0 {
        return Err(Error::InvalidParameter("path length must be >= 1".into()));
    }
    policy.validate(chain.dim())?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut states = Vec::with_capacity(length);
    let mut current = sample_from(policy.select(chain.initial(), None, &mut rng), &mut rng);
    states.push(current);
    for _ in 1..length {
        let row = &chain.operator().rows()[current];
        current = sample_from(policy.select(row, Some(current), &mut rng), &mut rng);
        states.push(current);
    }
    Ok(Path {
        states,
        seed,
        policy_tag: policy.tag(),
    })
}

// ---------------------------------------------------------------------------
// Gain and ergodic-average processes along a path
// ---------------------------------------------------------------------------

/// The gain process `G_f` evaluated at every prefix of `path` (index `k`
/// holds the value after `k+1` steps; the value at the empty prefix is 0).
pub fn gain_process<T: Real>(
    chain: &ImpreciseMarkovChain<T>,
    f: &Gamble<T>,
    path: &Path,
) -> Result<Vec<T>> {
    if path.states.is_empty() {
        return Err(Error::InvalidParameter("path must be nonempty".into()));
    }
    let tf = chain.operator().apply(f)?;
    let l1 = chain.initial().lower_expectation(f)?;
    let mut out = Vec::with_capacity(path.states.len());
    let mut g = T::zero();
    for (k, &x) in path.states.iter().enumerate() {
        let reference = if k == 0 { l1 } else { tf.get(path.states[k - 1]) };
        g = g + f.get(x) - reference;
        out.push(g);
    }
    Ok(out)
}

/// The ergodic-average process `(1/n) sum_{k<=n} [f(X_k) - L_k(f)]` at every
/// prefix of `path`.
pub fn ergodic_average<T: Real>(
    chain: &ImpreciseMarkovChain<T>,
    f: &Gamble<T>,
    path: &Path,
) -> Result<Vec<T>> {
    if path.states.is_empty() {
        return Err(Error::InvalidParameter("path must be nonempty".into()));
    }
    let mut out = Vec::with_capacity(path.states.len());
    let mut iterate = f.clone();
    let mut sum = T::zero();
    for (k, &x) in path.states.iter().enumerate() {
        let marginal = chain.initial().lower_expectation(&iterate)?;
        sum = sum + f.get(x) - marginal;
        out.push(sum / T::of_usize(k + 1));
        iterate = chain.operator().apply(&iterate)?;
    }
    Ok(out)
}

/// All independently computed terms of the ergodic-average identity at the
/// path horizon. The residual must vanish to numerical precision on every
/// input.
#[derive(Debug, Clone, Copy)]
pub struct GainDecomposition<T> {
    /// Ergodic average at the horizon.
    pub ergodic_avg: T,
    /// Sum of the average gains of `T^l f` for `l = 0..n-1`.
    pub sum_avgains: T,
    /// Mean of `T^n f` over the visited states.
    pub corrective_a: T,
    /// Mean of `T^l f(X_n)` over `l = 1..n`.
    pub corrective_b: T,
    /// `ergodic_avg - sum_avgains - corrective_a + corrective_b`.
    pub residual: T,
}

/// Recomputes every term of the identity separately and returns the
/// decomposition; the indexing follows the identity exactly (`l = 0..n-1`
/// for the gains, `k = 1..n` and `l = 1..n` for the corrective sums).
pub fn verify_identity<T: Real>(
    chain: &ImpreciseMarkovChain<T>,
    f: &Gamble<T>,
    path: &Path,
) -> Result<GainDecomposition<T>> {
    let n = path.states.len();
    if n == 0 {
        return Err(Error::InvalidParameter("path must be nonempty".into()));
    }
    let nf = T::of_usize(n);

    // Iterates T^l f for l = 0..=n.
    let mut tpow = Vec::with_capacity(n + 1);
    tpow.push(f.clone());
    for l in 0..n {
        let next = chain.operator().apply(&tpow[l])?;
        tpow.push(next);
    }

    let ergodic_avg = {
        let mut sum = T::zero();
        for (k, &x) in path.states.iter().enumerate() {
            let marginal = chain.initial().lower_expectation(&tpow[k])?;
            sum = sum + f.get(x) - marginal;
        }
        sum / nf
    };

    let sum_avgains = {
        let mut total = T::zero();
        for l in 0..n {
            let g = &tpow[l];
            let tg = &tpow[l + 1];
            let mut gain = g.get(path.states[0]) - chain.initial().lower_expectation(g)?;
            for k in 1..n {
                gain = gain + g.get(path.states[k]) - tg.get(path.states[k - 1]);
            }
            total = total + gain / nf;
        }
        total
    };

    let corrective_a = {
        let tn = &tpow[n];
        let sum: T = path.states.iter().map(|&x| tn.get(x)).sum();
        sum / nf
    };

    let corrective_b = {
        let last = *path.states.last().expect("nonempty");
        let sum: T = (1..=n).map(|l| tpow[l].get(last)).sum();
        sum / nf
    };

    Ok(GainDecomposition {
        ergodic_avg,
        sum_avgains,
        corrective_a,
        corrective_b,
        residual: ergodic_avg - sum_avgains - corrective_a + corrective_b,
    })
}

/// The difference gambles of the gain process `G_f`, as a function of the
/// path prefix: `Delta(prefix)(x) = f(x) - Tf(last)`, or `f(x) - L_1(f)` at
/// the root. Its differences are uniformly bounded by the variation norm of
/// `f`.
pub fn gain_difference<T: Real>(
    chain: &ImpreciseMarkovChain<T>,
    f: &Gamble<T>,
) -> Result<impl Fn(&[usize]) -> Gamble<T>> {
    let tf = chain.operator().apply(f)?;
    let l1 = chain.initial().lower_expectation(f)?;
    let f = f.clone();
    Ok(move |prefix: &[usize]| {
        let reference = match prefix.last() {
            None => l1,
            Some(&x) => tf.get(x),
        };
        f.shift(-reference)
    })
}

// ---------------------------------------------------------------------------
// Hoeffding-style test supermartingale
// ---------------------------------------------------------------------------

/// Builds the multiplicative test supermartingale
///
/// ```text
/// W(x_{1:n}) = prod_{k=0..n-1} [1 - xi * B(x_{1:k}) * DeltaM(x_{1:k})(x_{k+1})]
/// ```
///
/// for a submartingale `M` with differences bounded by `bound` and a
/// selector `B`, with `0 < xi < 1/bound`. `W` starts at one, stays positive,
/// and is a supermartingale; with `xi = eps/(2 bound^2)` it grows at least
/// like `exp(sum B * eps^2 / (4 bound^2))` wherever the `B`-average of `M`
/// is at most `-eps`.
pub fn hoeffding_supermartingale<T: Real>(
    tree: &ImpreciseProbabilityTree<T>,
    m: &RealProcess<T>,
    b: &SelectorProcess,
    bound: T,
    xi: T,
) -> Result<RealProcess<T>> {
    if !(bound > T::zero()) {
        return Err(Error::InvalidParameter("bound must be positive".into()));
    }
    if !(xi > T::zero() && xi < T::one() / bound) {
        return Err(Error::InvalidParameter(format!(
            "xi must lie in (0, 1/bound); got xi={xi}, bound={bound}"
        )));
    }
    // Bound must hold everywhere, not just on sampled paths.
    for k in 0..tree.depth() {
        for idx in 0..tree.level_size(k) {
            let s = tree.decode_situation(k, idx);
            let delta = m.difference(&s)?;
            if delta.values().iter().any(|&d| d.abs() > bound) {
                return Err(Error::InvalidParameter(format!(
                    "difference bound violated at situation {s:?}"
                )));
            }
        }
    }
    let branching = tree.branching().to_vec();
    Ok(RealProcess::from_scan(&branching, T::one(), |s, c, here| {
        if b.value(s) {
            let delta = m.difference(s).expect("within tree").get(c);
            here * (T::one() - xi * delta)
        } else {
            here
        }
    }))
}

/// Result of checking a constructed test supermartingale.
#[derive(Debug, Clone)]
pub struct HoeffdingReport<T> {
    /// Value at the initial situation (must be one).
    pub initial_value: T,
    /// Minimum over all situations (must be positive).
    pub min_value: T,
    /// Supermartingale verification over the whole tree.
    pub supermartingale: MartingaleReport<T>,
    /// The threshold `eps = 2 xi bound^2` used for the growth test.
    pub epsilon: T,
    /// Number of situations where the growth bound applies.
    pub qualifying: usize,
    /// Situations where the growth bound failed.
    pub growth_violations: Vec<(Vec<usize>, T, T)>,
}

impl<T: Real> HoeffdingReport<T> {
    /// True when all four checks pass.
    pub fn all_ok(&self) -> bool {
        (self.initial_value - T::one()).abs() <= T::of(1e-15)
            && self.min_value > T::zero()
            && self.supermartingale.is_ok()
            && self.growth_violations.is_empty()
    }
}

/// Runs the four checks on a constructed supermartingale: start at one,
/// positivity, the supermartingale inequality at every situation, and the
/// growth bound at every qualifying situation.
pub fn hoeffding_checks<T: Real>(
    tree: &ImpreciseProbabilityTree<T>,
    m: &RealProcess<T>,
    b: &SelectorProcess,
    w: &RealProcess<T>,
    bound: T,
    xi: T,
) -> Result<HoeffdingReport<T>> {
    let epsilon = T::of(2.0) * xi * bound * bound;
    let initial_value = w.value(&[])?;
    let mut min_value = T::infinity();
    for level in w.levels() {
        for &v in level {
            min_value = min_value.min(v);
        }
    }
    let supermartingale = tree.verify_supermartingale(w)?;

    let mut qualifying = 0usize;
    let mut growth_violations = Vec::new();
    let tol = T::of(1e-12);
    for k in 1..=tree.depth() {
        for idx in 0..tree.level_size(k) {
            let s = tree.decode_situation(k, idx);
            let stats = crate::tree::process_statistics(m, b, &s)?;
            if stats.b_count > 0 && stats.b_avg <= -epsilon {
                qualifying += 1;
                let needed =
                    (T::of_usize(stats.b_count) * epsilon * epsilon / (T::of(4.0) * bound * bound))
                        .exp();
                let got = w.value(&s)?;
                if got < needed - tol {
                    growth_violations.push((s, got, needed));
                }
            }
        }
    }
    Ok(HoeffdingReport {
        initial_value,
        min_value,
        supermartingale,
        epsilon,
        qualifying,
        growth_violations,
    })
}

// ---------------------------------------------------------------------------
// Monte-Carlo checks
// ---------------------------------------------------------------------------

/// One sampled path in an empirical report.
#[derive(Debug, Clone, Copy)]
pub struct PathRecord<T> {
    /// Index of the path within its policy block.
    pub path_index: usize,
    /// Horizon the average was taken at.
    pub horizon: usize,
    /// Running average at the horizon.
    pub average: T,
    /// Threshold the average is compared against.
    pub threshold: T,
    /// Whether `average >= threshold - delta`.
    pub pass: bool,
}

/// Aggregated results for one policy.
#[derive(Debug, Clone)]
pub struct PolicyCheck<T> {
    /// Policy tag.
    pub policy_tag: String,
    /// Fraction of paths passing the threshold test.
    pub fraction: f64,
    /// Smallest average observed.
    pub min: T,
    /// Median average.
    pub median: T,
    /// Largest average observed.
    pub max: T,
    /// Per-path records (CSV rows for the command-line front end).
    pub paths: Vec<PathRecord<T>>,
}

/// Report of an empirical ergodic-theorem check.
#[derive(Debug, Clone)]
pub struct ErgodicCheckReport<T> {
    /// Stationary threshold the averages are compared against.
    pub threshold: T,
    /// Slack subtracted from the threshold.
    pub delta: T,
    /// One block per policy.
    pub policies: Vec<PolicyCheck<T>>,
}

impl<T> ErgodicCheckReport<T> {
    /// Smallest per-policy fraction.
    pub fn worst_fraction(&self) -> f64 {
        self.policies
            .iter()
            .map(|p| p.fraction)
            .fold(f64::INFINITY, f64::min)
    }
}

fn summarize<T: Real>(
    policy_tag: String,
    horizon: usize,
    threshold: T,
    delta: T,
    averages: Vec<T>,
) -> PolicyCheck<T> {
    let paths: Vec<PathRecord<T>> = averages
        .iter()
        .enumerate()
        .map(|(i, &average)| PathRecord {
            path_index: i,
            horizon,
            average,
            threshold,
            pass: average >= threshold - delta,
        })
        .collect();
    let passed = paths.iter().filter(|p| p.pass).count();
    let mut sorted = averages.clone();
    sorted.sort_by(|a, b| a.partial_cmp(b).expect("finite averages"));
    PolicyCheck {
        policy_tag,
        fraction: passed as f64 / paths.len().max(1) as f64,
        min: sorted.first().copied().unwrap_or_else(T::zero),
        median: sorted
            .get(sorted.len() / 2)
            .copied()
            .unwrap_or_else(T::zero),
        max: sorted.last().copied().unwrap_or_else(T::zero),
        paths,
    }
}

fn require_pf_like<T: Real>(chain: &ImpreciseMarkovChain<T>) -> Result<()> {
    let horizon = defaults::power_horizon(chain.dim());
    let report = chain.operator().detect_pf_like(
        horizon,
        horizon,
        DistanceMode::Grid {
            samples: 32,
            seed: 0x9A7,
        },
    )?;
    match report.verdict {
        PfVerdict::PfLike { .. } => Ok(()),
        _ => Err(Error::NotPfLike),
    }
}

/// Stationary value used as the threshold in empirical checks.
fn stationary_threshold<T: Real>(
    chain: &ImpreciseMarkovChain<T>,
    f: &Gamble<T>,
) -> Result<StationaryEstimate<T>> {
    chain
        .operator()
        .stationary_lower_expectation(f, T::of(defaults::TOL), defaults::MAX_ITER)
}

/// Monte-Carlo check of the point-wise ergodic theorem: for each policy,
/// samples `n_paths` paths of the given length and reports the fraction
/// whose running average of `f` at the horizon is at least
/// `L_inf(f) - delta`. Errors when the chain is not certified PF-like.
pub fn empirical_ergodic_check<T: Real>(
    chain: &ImpreciseMarkovChain<T>,
    f: &Gamble<T>,
    policies: &[SelectionPolicy<T>],
    n_paths: usize,
    length: usize,
    delta: T,
    seed: u64,
) -> Result<ErgodicCheckReport<T>> {
    require_pf_like(chain)?;
    let threshold = stationary_threshold(chain, f)?.value;
    let mut out = Vec::with_capacity(policies.len());
    for (p_idx, policy) in policies.iter().enumerate() {
        let mut averages = Vec::with_capacity(n_paths);
        for i in 0..n_paths {
            let path_seed = derive_path_seed(derive_path_seed(seed, p_idx as u64), i as u64);
            let path = sample_path(chain, policy, length, path_seed)?;
            let sum: T = path.states.iter().map(|&x| f.get(x)).sum();
            averages.push(sum / T::of_usize(length));
        }
        out.push(summarize(policy.tag(), length, threshold, delta, averages));
    }
    Ok(ErgodicCheckReport {
        threshold,
        delta,
        policies: out,
    })
}

/// Window version of the ergodic check for gambles on `X^r`: the running
/// average of `f(X_{k:k+r-1})` is compared against the stationary joint
/// lower expectation of `f`.
pub fn empirical_ergodic_check_window<T: Real>(
    chain: &ImpreciseMarkovChain<T>,
    r: usize,
    f: &[T],
    policies: &[SelectionPolicy<T>],
    n_paths: usize,
    length: usize,
    delta: T,
    seed: u64,
) -> Result<ErgodicCheckReport<T>> {
    require_pf_like(chain)?;
    let dim = chain.dim();
    let threshold = chain
        .operator()
        .stationary_joint_lower_expectation(r, f, T::of(defaults::TOL), defaults::MAX_ITER)?
        .value;
    let mut out = Vec::with_capacity(policies.len());
    for (p_idx, policy) in policies.iter().enumerate() {
        let mut averages = Vec::with_capacity(n_paths);
        for i in 0..n_paths {
            let path_seed = derive_path_seed(derive_path_seed(seed, p_idx as u64), i as u64);
            let path = sample_path(chain, policy, length + r - 1, path_seed)?;
            let mut sum = T::zero();
            for k in 0..length {
                let mut idx = 0usize;
                for j in 0..r {
                    idx = idx * dim + path.states[k + j];
                }
                sum = sum + f[idx];
            }
            averages.push(sum / T::of_usize(length));
        }
        out.push(summarize(policy.tag(), length, threshold, delta, averages));
    }
    Ok(ErgodicCheckReport {
        threshold,
        delta,
        policies: out,
    })
}

/// Monte-Carlo check of the strong law of large numbers for submartingale
/// differences. `delta_fn` gives the difference gamble of the submartingale
/// at a path prefix and `selector` the {0,1} process `B`. The submartingale
/// property is first verified exhaustively on a materialized tree of the
/// chain; the check then reports, per policy, the fraction of paths with
/// `sum B >= length / 2` whose `B`-average at the horizon is `>= -delta`.
#[allow(clippy::too_many_arguments)]
pub fn empirical_slln_check<T: Real>(
    chain: &ImpreciseMarkovChain<T>,
    delta_fn: &dyn Fn(&[usize]) -> Gamble<T>,
    selector: &dyn Fn(&[usize]) -> bool,
    policies: &[SelectionPolicy<T>],
    n_paths: usize,
    length: usize,
    delta: T,
    seed: u64,
) -> Result<ErgodicCheckReport<T>> {
    // Exhaustive verification on a small horizon: walk every situation of a
    // materialized tree and check the local lower expectation of the
    // difference.
    let verify_depth = {
        let mut d = 1usize;
        let mut nodes = 1usize + chain.dim();
        while d < 6 && nodes * chain.dim() <= 4096 {
            nodes *= chain.dim();
            d += 1;
        }
        d
    };
    let tree = ImpreciseProbabilityTree::markov(chain, verify_depth)?;
    let tol = T::of(1e-12);
    let mut violations = 0usize;
    for k in 0..tree.depth() {
        for idx in 0..tree.level_size(k) {
            let s = tree.decode_situation(k, idx);
            let d = delta_fn(&s);
            if tree.local_by_index(k, idx).lower_expectation(&d)? < -tol {
                violations += 1;
            }
        }
    }
    if violations > 0 {
        return Err(Error::MartingaleViolation {
            kind: "submartingale",
            violations,
        });
    }

    let min_b = length / 2;
    let mut out = Vec::with_capacity(policies.len());
    for (p_idx, policy) in policies.iter().enumerate() {
        let mut averages = Vec::new();
        for i in 0..n_paths {
            let path_seed = derive_path_seed(derive_path_seed(seed, p_idx as u64), i as u64);
            let path = sample_path(chain, policy, length, path_seed)?;
            let mut b_sum = T::zero();
            let mut b_count = 0usize;
            for k in 0..length {
                let prefix = &path.states[..k];
                if selector(prefix) {
                    b_sum = b_sum + delta_fn(prefix).get(path.states[k]);
                    b_count += 1;
                }
            }
            if b_count >= min_b.max(1) {
                averages.push(b_sum / T::of_usize(b_count));
            }
        }
        out.push(summarize(policy.tag(), length, T::zero(), delta, averages));
    }
    Ok(ErgodicCheckReport {
        threshold: T::zero(),
        delta,
        policies: out,
    })
}

// ---------------------------------------------------------------------------
// Bound checks along a sampled path
// ---------------------------------------------------------------------------

/// Outcome of checking the geometric gain bound and the three averaged
/// limits along one sampled path.
#[derive(Debug, Clone)]
pub struct BoundCheckReport<T> {
    /// Path the bounds were checked on.
    pub path: Path,
    /// `(n, l, |average gain|, bound)` for each violated instance of the
    /// geometric bound `|AvG_{T^l f}(X_{1:n})| <= ||f||_v rho^floor(l/r)`.
    pub gain_bound_violations: Vec<(usize, usize, T, T)>,
    /// Number of `(n, l)` pairs checked.
    pub gain_bound_checked: usize,
    /// `(name, |deviation from L_inf(f)|, allowed)` for the three averaged
    /// limits at the horizon, each bounded by `||f||_v (r/(1-rho))/n`.
    pub limits: Vec<(&'static str, T, T)>,
}

impl<T: Real> BoundCheckReport<T> {
    /// True when every checked bound holds.
    pub fn all_ok(&self) -> bool {
        self.gain_bound_violations.is_empty() && self.limits.iter().all(|&(_, dev, cap)| dev <= cap)
    }
}

/// Checks, along one sampled path, the bounds implied by PF-like behaviour
/// with contraction `rho = rho(T^r) < 1`: the geometric decay of the average
/// gains of `T^l f` at every prefix, and the convergence at rate
/// `||f||_v (r/(1-rho))/n` of the three averaged quantities to the
/// stationary value.
pub fn bound_checks<T: Real>(
    chain: &ImpreciseMarkovChain<T>,
    f: &Gamble<T>,
    r: usize,
    rho: T,
    length: usize,
    seed: u64,
) -> Result<BoundCheckReport<T>> {
    if r == 0 {
        return Err(Error::InvalidParameter("r must be >= 1".into()));
    }
    if !(rho >= T::zero() && rho < T::one()) {
        return Err(Error::InvalidParameter(format!(
            "rho must lie in [0,1); got {rho}"
        )));
    }
    let tol = T::of(1e-9);
    let path = sample_path(chain, &SelectionPolicy::RandomVertex, length, seed)?;
    let n = length;
    let varf = f.variation_norm();
    let stationary = stationary_threshold(chain, f)?.value;

    // Iterates T^l f for l = 0..=n.
    let mut tpow = Vec::with_capacity(n + 1);
    tpow.push(f.clone());
    for l in 0..n {
        let next = chain.operator().apply(&tpow[l])?;
        tpow.push(next);
    }

    // Geometric bound on the average gains, at every prefix and every l.
    let mut gain_bound_violations = Vec::new();
    let mut gain_bound_checked = 0usize;
    for l in 0..n {
        let g = &tpow[l];
        let tg = &tpow[l + 1];
        let cap = varf * rho.powi((l / r) as i32);
        let mut gain = g.get(path.states[0]) - chain.initial().lower_expectation(g)?;
        for (k, &x) in path.states.iter().enumerate() {
            if k > 0 {
                gain = gain + g.get(x) - tg.get(path.states[k - 1]);
            }
            let avg = gain / T::of_usize(k + 1);
            gain_bound_checked += 1;
            if avg.abs() > cap + tol {
                gain_bound_violations.push((k + 1, l, avg.abs(), cap));
            }
        }
    }

    // The three averaged limits at the horizon.
    let rate = varf * (T::of_usize(r) / (T::one() - rho)) / T::of_usize(n) + tol;
    let mut limits = Vec::with_capacity(3);
    {
        let tn = &tpow[n];
        let sum: T = path.states.iter().map(|&x| tn.get(x)).sum();
        limits.push((
            "mean of T^n f over visited states",
            (sum / T::of_usize(n) - stationary).abs(),
            rate,
        ));
    }
    {
        let last = *path.states.last().expect("nonempty");
        let sum: T = (1..=n).map(|l| tpow[l].get(last)).sum();
        limits.push((
            "mean of T^l f at the final state",
            (sum / T::of_usize(n) - stationary).abs(),
            rate,
        ));
    }
    {
        let mut sum = T::zero();
        for item in tpow.iter().take(n) {
            sum = sum + chain.initial().lower_expectation(item)?;
        }
        limits.push((
            "mean of the marginal lower expectations",
            (sum / T::of_usize(n) - stationary).abs(),
            rate,
        ));
    }

    Ok(BoundCheckReport {
        path,
        gain_bound_violations,
        gain_bound_checked,
        limits,
    })
}
