//! Finite-depth imprecise probability trees, not necessarily Markov.
//!
//! A tree of depth `n` attaches one credal set to every non-leaf situation
//! (state sequence of length `< n`). Situations are keyed canonically as
//! integer sequences; the empty sequence is the initial situation. Global
//! lower expectations of leaf gambles follow by backward recursion through
//! the local models, and a brute-force oracle recovers the same values as a
//! minimum over compatible precise trees: for fixed other selections the
//! objective is affine in each local mass function, so the minimum over the
//! product of convex sets is attained at a product of vertices.

use crate::chain::ImpreciseMarkovChain;
use crate::credal::{CredalSet, Gamble};
use crate::error::{Error, Result};
use crate::scalar::{Real, CMP_TOL};

/// Cap on the total number of situations in a materialized tree.
pub const TREE_SIZE_LIMIT: usize = 10_000_000;

/// Cap on vertex-selection combinations explored by the brute-force oracle.
pub const ORACLE_COMBINATION_LIMIT: usize = 10_000_000;

// ---------------------------------------------------------------------------
// ImpreciseProbabilityTree
// ---------------------------------------------------------------------------

/// An event tree of fixed depth with per-level branching factors and one
/// credal set per non-leaf situation, stored level by level in lexicographic
/// order.
#[derive(Debug, Clone)]
pub struct ImpreciseProbabilityTree<T> {
    branching: Vec<usize>,
    levels: Vec<Vec<CredalSet<T>>>,
}

impl<T: Real> ImpreciseProbabilityTree<T> {
    /// Builds a tree by asking `local` for the credal set of every non-leaf
    /// situation, in lexicographic order per level.
    pub fn from_fn(
        branching: Vec<usize>,
        mut local: impl FnMut(&[usize]) -> CredalSet<T>,
    ) -> Result<Self> {
        if branching.is_empty() || branching.contains(&0) {
            return Err(Error::InvalidParameter(
                "branching must be nonempty with positive entries".into(),
            ));
        }
        let mut total = 1usize;
        let mut size = 1usize;
        for &b in &branching {
            size = size
                .checked_mul(b)
                .filter(|_| total <= TREE_SIZE_LIMIT)
                .ok_or(Error::TableTooLarge {
                    size: usize::MAX,
                    limit: TREE_SIZE_LIMIT,
                })?;
            total += size;
        }
        if total > TREE_SIZE_LIMIT {
            return Err(Error::TableTooLarge {
                size: total,
                limit: TREE_SIZE_LIMIT,
            });
        }

        let depth = branching.len();
        let mut levels = Vec::with_capacity(depth);
        let mut seq = Vec::new();
        for k in 0..depth {
            let count = branching[..k].iter().product();
            let mut level = Vec::with_capacity(count);
            for idx in 0..count {
                decode_into(&branching, k, idx, &mut seq);
                let set = local(&seq);
                if set.dim() != branching[k] {
                    return Err(Error::DimensionMismatch {
                        expected: branching[k],
                        got: set.dim(),
                    });
                }
                level.push(set);
            }
            levels.push(level);
        }
        Ok(Self { branching, levels })
    }

    /// The imprecise probability tree of an imprecise Markov chain: the
    /// initial model at the root, and row `x_k` at every situation ending in
    /// `x_k`.
    pub fn markov(chain: &ImpreciseMarkovChain<T>, depth: usize) -> Result<Self> {
        if depth == 0 {
            return Err(Error::InvalidParameter("depth must be >= 1".into()));
        }
        let dim = chain.dim();
        let branching = vec![dim; depth];
        Self::from_fn(branching, |seq| match seq.last() {
            None => chain.initial().clone(),
            Some(&x) => chain.operator().rows()[x].clone(),
        })
    }

    /// Tree depth.
    pub fn depth(&self) -> usize {
        self.branching.len()
    }

    /// Per-level state counts.
    pub fn branching(&self) -> &[usize] {
        &self.branching
    }

    /// Number of situations at depth `k`.
    pub fn level_size(&self, k: usize) -> usize {
        self.branching[..k].iter().product()
    }

    /// Decodes the lexicographic index of a depth-`k` situation into its
    /// state sequence.
    pub fn decode_situation(&self, k: usize, idx: usize) -> Vec<usize> {
        let mut seq = Vec::new();
        decode_into(&self.branching, k, idx, &mut seq);
        seq
    }

    /// Lexicographic index of a situation; errors when the sequence leaves
    /// the tree.
    pub fn situation_index(&self, s: &[usize]) -> Result<usize> {
        if s.len() > self.depth() {
            return Err(Error::UnknownSituation(s.to_vec()));
        }
        let mut idx = 0;
        for (k, &x) in s.iter().enumerate() {
            if x >= self.branching[k] {
                return Err(Error::UnknownSituation(s.to_vec()));
            }
            idx = idx * self.branching[k] + x;
        }
        Ok(idx)
    }

    /// Local credal set at a non-leaf situation.
    pub fn local(&self, s: &[usize]) -> Result<&CredalSet<T>> {
        if s.len() >= self.depth() {
            return Err(Error::UnknownSituation(s.to_vec()));
        }
        let idx = self.situation_index(s)?;
        Ok(&self.levels[s.len()][idx])
    }

    /// Local credal set by (depth, lexicographic index).
    pub fn local_by_index(&self, k: usize, idx: usize) -> &CredalSet<T> {
        &self.levels[k][idx]
    }

    /// Conditional lower expectations `L(f|t)` of an `n`-measurable gamble
    /// `f` for every situation `t` at depth `m <= n`, as a lexicographic
    /// table. `f` is a table over all depth-`n` state sequences.
    pub fn conditional_lower_table(&self, f: &[T], n: usize, m: usize) -> Result<Vec<T>> {
        if n > self.depth() || m > n {
            return Err(Error::InvalidParameter(format!(
                "need m <= n <= depth, got m={m}, n={n}, depth={}",
                self.depth()
            )));
        }
        let expected = self.level_size(n);
        if f.len() != expected {
            return Err(Error::DimensionMismatch {
                expected,
                got: f.len(),
            });
        }
        let mut g = f.to_vec();
        for k in (m..n).rev() {
            let b = self.branching[k];
            let mut next = Vec::with_capacity(g.len() / b);
            for (idx, chunk) in g.chunks(b).enumerate() {
                next.push(self.levels[k][idx].lower_unchecked(chunk));
            }
            g = next;
        }
        Ok(g)
    }

    /// Global lower expectation `L(f|s)` of an `n`-measurable gamble from the
    /// situation `s`; for the empty situation this is the unconditional
    /// global lower expectation.
    pub fn global_lower_expectation(&self, f: &[T], n: usize, s: &[usize]) -> Result<T> {
        let m = s.len();
        if m > n {
            return Err(Error::UnknownSituation(s.to_vec()));
        }
        let idx = self.situation_index(s)?;
        let table = self.conditional_lower_table(f, n, m)?;
        Ok(table[idx])
    }

    /// Ground-truth oracle: enumerates every assignment of one vertex per
    /// relevant non-leaf situation, computes the precise conditional
    /// expectation of `f` given `s` in the resulting precise tree, and
    /// returns the minimum.
    pub fn brute_force_oracle(&self, f: &[T], n: usize, s: &[usize]) -> Result<T> {
        self.brute_force_oracle_capped(f, n, s, ORACLE_COMBINATION_LIMIT)
    }

    /// [`Self::brute_force_oracle`] with an explicit combination cap.
    pub fn brute_force_oracle_capped(
        &self,
        f: &[T],
        n: usize,
        s: &[usize],
        max_combinations: usize,
    ) -> Result<T> {
        let m = s.len();
        if m > n || n > self.depth() {
            return Err(Error::InvalidParameter(format!(
                "need |s| <= n <= depth, got |s|={m}, n={n}, depth={}",
                self.depth()
            )));
        }
        let expected = self.level_size(n);
        if f.len() != expected {
            return Err(Error::DimensionMismatch {
                expected,
                got: f.len(),
            });
        }
        let s_idx = self.situation_index(s)?;

        // Relevant situations: depths m..n below s. subtree_sizes[k - m] is
        // the number of them at depth k; their global indices start at
        // s_idx * subtree_sizes[k - m].
        let mut subtree_sizes = Vec::with_capacity(n - m + 1);
        let mut size = 1usize;
        subtree_sizes.push(1usize);
        for k in m..n {
            size *= self.branching[k];
            subtree_sizes.push(size);
        }

        // Mixed-radix counter over vertex choices of the relevant situations.
        let mut radices: Vec<usize> = Vec::new();
        let mut combinations = 1usize;
        for k in m..n {
            let count = subtree_sizes[k - m];
            let base = s_idx * count;
            for j in 0..count {
                let verts = self.levels[k][base + j].vertices().len();
                radices.push(verts);
                combinations = combinations
                    .checked_mul(verts)
                    .filter(|&c| c <= max_combinations)
                    .ok_or(Error::TableTooLarge {
                        size: usize::MAX,
                        limit: max_combinations,
                    })?;
            }
        }

        // Flat per-level offsets into the digit vector.
        let mut level_digit_base = vec![0usize; n - m];
        {
            let mut acc = 0usize;
            for k in m..n {
                level_digit_base[k - m] = acc;
                acc += subtree_sizes[k - m];
            }
        }

        let leaf_base = s_idx * subtree_sizes[n - m];
        let mut digits = vec![0usize; radices.len()];
        let mut best = T::infinity();
        loop {
            // Backward pass with the selected vertices.
            let mut g: Vec<T> = f[leaf_base..leaf_base + subtree_sizes[n - m]].to_vec();
            for k in (m..n).rev() {
                let b = self.branching[k];
                let count = subtree_sizes[k - m];
                let base = s_idx * count;
                let mut next = Vec::with_capacity(count);
                for j in 0..count {
                    let digit = digits[level_digit_base[k - m] + j];
                    let vertex = &self.levels[k][base + j].vertices()[digit];
                    next.push(vertex.expectation_unchecked(&g[j * b..(j + 1) * b]));
                }
                g = next;
            }
            best = best.min(g[0]);

            // Advance the mixed-radix counter.
            let mut pos = 0;
            loop {
                if pos == digits.len() {
                    return Ok(best);
                }
                digits[pos] += 1;
                if digits[pos] < radices[pos] {
                    break;
                }
                digits[pos] = 0;
                pos += 1;
            }
        }
    }

    /// Checks that all submartingale differences of `M` have non-negative
    /// local lower expectation, within `1e-12`.
    pub fn verify_submartingale(&self, m: &RealProcess<T>) -> Result<MartingaleReport<T>> {
        self.verify_martingale_side(m, MartingaleSide::Sub, T::of(CMP_TOL))
    }

    /// Checks that all supermartingale differences of `M` have non-positive
    /// local upper expectation, within `1e-12`.
    pub fn verify_supermartingale(&self, m: &RealProcess<T>) -> Result<MartingaleReport<T>> {
        self.verify_martingale_side(m, MartingaleSide::Super, T::of(CMP_TOL))
    }

    /// Side check with an explicit tolerance.
    pub fn verify_martingale_side(
        &self,
        m: &RealProcess<T>,
        side: MartingaleSide,
        tol: T,
    ) -> Result<MartingaleReport<T>> {
        m.check_shape(self)?;
        let mut violations = Vec::new();
        let mut checked = 0usize;
        for k in 0..self.depth() {
            let b = self.branching[k];
            for idx in 0..self.level_size(k) {
                let here = m.levels[k][idx];
                let delta: Vec<T> = (0..b)
                    .map(|c| m.levels[k + 1][idx * b + c] - here)
                    .collect();
                // The supermartingale condition on M is the submartingale
                // condition on -M; both run through the same lower envelope.
                let value = match side {
                    MartingaleSide::Sub => self.levels[k][idx].lower_unchecked(&delta),
                    MartingaleSide::Super => {
                        let neg: Vec<T> = delta.iter().map(|&d| -d).collect();
                        -self.levels[k][idx].lower_unchecked(&neg)
                    }
                };
                checked += 1;
                let bad = match side {
                    MartingaleSide::Sub => value < -tol,
                    MartingaleSide::Super => value > tol,
                };
                if bad {
                    violations.push((self.decode_situation(k, idx), value));
                }
            }
        }
        Ok(MartingaleReport {
            side,
            tol,
            checked,
            violations,
        })
    }
}

fn decode_into(branching: &[usize], k: usize, mut idx: usize, seq: &mut Vec<usize>) {
    seq.clear();
    seq.resize(k, 0);
    for j in (0..k).rev() {
        seq[j] = idx % branching[j];
        idx /= branching[j];
    }
}

/// Which martingale inequality is being verified.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MartingaleSide {
    /// Lower expectation of every difference must be `>= 0`.
    Sub,
    /// Upper expectation of every difference must be `<= 0`.
    Super,
}

/// Verification outcome listing every offending situation.
#[derive(Debug, Clone)]
pub struct MartingaleReport<T> {
    /// Verified side.
    pub side: MartingaleSide,
    /// Tolerance used.
    pub tol: T,
    /// Situations checked.
    pub checked: usize,
    /// `(situation, local expectation)` for each violation.
    pub violations: Vec<(Vec<usize>, T)>,
}

impl<T> MartingaleReport<T> {
    /// True when no situation violated the inequality.
    pub fn is_ok(&self) -> bool {
        self.violations.is_empty()
    }
}

// ---------------------------------------------------------------------------
// Processes on the tree
// ---------------------------------------------------------------------------

/// A real-valued process: one value per situation, at every depth `0..=n`.
#[derive(Debug, Clone)]
pub struct RealProcess<T> {
    branching: Vec<usize>,
    levels: Vec<Vec<T>>,
}

impl<T: Real> RealProcess<T> {
    /// Builds a process from a function of the situation.
    pub fn from_fn(branching: &[usize], mut value: impl FnMut(&[usize]) -> T) -> Self {
        let depth = branching.len();
        let mut levels = Vec::with_capacity(depth + 1);
        let mut seq = Vec::new();
        for k in 0..=depth {
            let count = branching[..k].iter().product();
            let mut level = Vec::with_capacity(count);
            for idx in 0..count {
                decode_into(branching, k, idx, &mut seq);
                level.push(value(&seq));
            }
            levels.push(level);
        }
        Self {
            branching: branching.to_vec(),
            levels,
        }
    }

    /// Builds a process by scanning down the tree: the value at a child is
    /// `step(s, c, M(s))`.
    pub fn from_scan(
        branching: &[usize],
        initial: T,
        mut step: impl FnMut(&[usize], usize, T) -> T,
    ) -> Self {
        let depth = branching.len();
        let mut levels = vec![vec![initial]];
        let mut seq = Vec::new();
        for k in 0..depth {
            let b = branching[k];
            let prev = &levels[k];
            let mut level = Vec::with_capacity(prev.len() * b);
            for (idx, &here) in prev.iter().enumerate() {
                decode_into(branching, k, idx, &mut seq);
                for c in 0..b {
                    level.push(step(&seq, c, here));
                }
            }
            levels.push(level);
        }
        Self {
            branching: branching.to_vec(),
            levels,
        }
    }

    /// Builds a process from its initial value and difference gambles:
    /// `M(s c) = M(s) + delta(s)(c)`.
    pub fn from_differences(
        branching: &[usize],
        initial: T,
        mut delta: impl FnMut(&[usize], usize) -> T,
    ) -> Self {
        Self::from_scan(branching, initial, |s, c, here| here + delta(s, c))
    }

    /// The constant process.
    pub fn constant(branching: &[usize], c: T) -> Self {
        Self::from_fn(branching, |_| c)
    }

    /// Pointwise negation.
    pub fn negated(&self) -> Self {
        Self {
            branching: self.branching.clone(),
            levels: self
                .levels
                .iter()
                .map(|level| level.iter().map(|&v| -v).collect())
                .collect(),
        }
    }

    /// Value at a situation.
    pub fn value(&self, s: &[usize]) -> Result<T> {
        let idx = self.index_of(s)?;
        Ok(self.levels[s.len()][idx])
    }

    /// Raw level storage (depth-indexed, lexicographic).
    pub fn levels(&self) -> &[Vec<T>] {
        &self.levels
    }

    /// Difference gamble at a non-leaf situation: `delta(s)(c) = M(sc) - M(s)`.
    pub fn difference(&self, s: &[usize]) -> Result<Gamble<T>> {
        if s.len() >= self.branching.len() {
            return Err(Error::UnknownSituation(s.to_vec()));
        }
        let idx = self.index_of(s)?;
        let b = self.branching[s.len()];
        let here = self.levels[s.len()][idx];
        Gamble::new(
            (0..b)
                .map(|c| self.levels[s.len() + 1][idx * b + c] - here)
                .collect(),
        )
    }

    fn index_of(&self, s: &[usize]) -> Result<usize> {
        if s.len() > self.branching.len() {
            return Err(Error::UnknownSituation(s.to_vec()));
        }
        let mut idx = 0;
        for (k, &x) in s.iter().enumerate() {
            if x >= self.branching[k] {
                return Err(Error::UnknownSituation(s.to_vec()));
            }
            idx = idx * self.branching[k] + x;
        }
        Ok(idx)
    }

    fn check_shape(&self, tree: &ImpreciseProbabilityTree<T>) -> Result<()> {
        if self.branching == tree.branching {
            Ok(())
        } else {
            Err(Error::InvalidParameter(
                "process shape does not match tree".into(),
            ))
        }
    }
}

/// A {0,1}-valued process used to select which steps enter an average.
#[derive(Debug, Clone)]
pub struct SelectorProcess {
    branching: Vec<usize>,
    levels: Vec<Vec<bool>>,
}

impl SelectorProcess {
    /// Builds a selector from a predicate on situations.
    pub fn from_fn(branching: &[usize], mut selected: impl FnMut(&[usize]) -> bool) -> Self {
        let depth = branching.len();
        let mut levels = Vec::with_capacity(depth + 1);
        let mut seq = Vec::new();
        for k in 0..=depth {
            let count = branching[..k].iter().product();
            let mut level = Vec::with_capacity(count);
            for idx in 0..count {
                decode_into(branching, k, idx, &mut seq);
                level.push(selected(&seq));
            }
            levels.push(level);
        }
        Self {
            branching: branching.to_vec(),
            levels,
        }
    }

    /// The all-ones selector.
    pub fn ones(branching: &[usize]) -> Self {
        Self::from_fn(branching, |_| true)
    }

    /// Selector value at a situation.
    pub fn value(&self, s: &[usize]) -> bool {
        let mut idx = 0;
        for (k, &x) in s.iter().enumerate() {
            idx = idx * self.branching[k] + x;
        }
        self.levels[s.len()][idx]
    }
}

/// Path statistics of a process: plain average, selector-weighted average and
/// selector count.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProcessStats<T> {
    /// Path-averaged difference `(M(x_{1:n}) - M(initial)) / n`, `0` if `n = 0`.
    pub avg: T,
    /// Selector-weighted average with the zero-denominator convention.
    pub b_avg: T,
    /// Number of selected steps.
    pub b_count: usize,
}

/// Computes the path-averaged and selector-averaged statistics of `m` along
/// `path`.
pub fn process_statistics<T: Real>(
    m: &RealProcess<T>,
    b: &SelectorProcess,
    path: &[usize],
) -> Result<ProcessStats<T>> {
    let n = path.len();
    if n == 0 {
        return Ok(ProcessStats {
            avg: T::zero(),
            b_avg: T::zero(),
            b_count: 0,
        });
    }
    let total = m.value(path)? - m.value(&[])?;
    let mut b_sum = T::zero();
    let mut b_count = 0usize;
    for k in 0..n {
        let prefix = &path[..k];
        if b.value(prefix) {
            let step = m.value(&path[..k + 1])? - m.value(prefix)?;
            b_sum = b_sum + step;
            b_count += 1;
        }
    }
    let b_avg = if b_count == 0 {
        T::zero()
    } else {
        b_sum / T::of_usize(b_count)
    };
    Ok(ProcessStats {
        avg: total / T::of_usize(n),
        b_avg,
        b_count,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::credal::MassFunction;
    use crate::random;
    use rand_chacha::rand_core::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn fair_coin_tree(depth: usize) -> ImpreciseProbabilityTree<f64> {
        ImpreciseProbabilityTree::from_fn(vec![2; depth], |_| {
            CredalSet::precise(MassFunction::uniform(2))
        })
        .unwrap()
    }

    #[test]
    fn constant_gamble_from_every_situation() {
        let tree = fair_coin_tree(3);
        let f = vec![5.0; 8];
        for k in 0..=3 {
            for idx in 0..tree.level_size(k) {
                let s = tree.decode_situation(k, idx);
                let v = tree.global_lower_expectation(&f, 3, &s).unwrap();
                assert!((v - 5.0).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn depth_one_tree_is_the_local_model() {
        let lv = CredalSet::linear_vacuous(&MassFunction::uniform(2), 0.5).unwrap();
        let tree =
            ImpreciseProbabilityTree::from_fn(vec![2], |_| lv.clone()).unwrap();
        let f = [1.0, 0.0];
        let direct = lv
            .lower_expectation(&Gamble::new(f.to_vec()).unwrap())
            .unwrap();
        let global = tree.global_lower_expectation(&f, 1, &[]).unwrap();
        assert_eq!(global, direct);
    }

    #[test]
    fn vacuous_tree_gives_min_over_leaves() {
        let tree =
            ImpreciseProbabilityTree::from_fn(vec![2, 2], |_| CredalSet::<f64>::vacuous(2))
                .unwrap();
        let f = [3.0, -1.0, 4.0, 2.0];
        assert_eq!(tree.global_lower_expectation(&f, 2, &[]).unwrap(), -1.0);
        assert_eq!(tree.brute_force_oracle(&f, 2, &[]).unwrap(), -1.0);
    }

    #[test]
    fn precise_tree_oracle_is_the_unique_expectation() {
        let tree = fair_coin_tree(2);
        let f = [1.0, 2.0, 3.0, 4.0];
        let recursion = tree.global_lower_expectation(&f, 2, &[]).unwrap();
        let oracle = tree.brute_force_oracle(&f, 2, &[]).unwrap();
        assert!((recursion - 2.5).abs() < 1e-15);
        assert!((oracle - 2.5).abs() < 1e-15);
    }

    #[test]
    fn oracle_matches_recursion_on_random_trees() {
        let mut rng = ChaCha8Rng::seed_from_u64(2024);
        for _ in 0..25 {
            let tree = random::random_tree::<f64, _>(&mut rng, 3, 3, 3, 20_000);
            let n = tree.depth();
            let f = random::random_table(&mut rng, tree.level_size(n));
            for k in 0..=1.min(n) {
                for idx in 0..tree.level_size(k) {
                    let s = tree.decode_situation(k, idx);
                    let a = tree.global_lower_expectation(&f, n, &s).unwrap();
                    let b = tree.brute_force_oracle(&f, n, &s).unwrap();
                    assert!((a - b).abs() < 1e-10, "recursion {a} vs oracle {b}");
                }
            }
        }
    }

    #[test]
    fn global_value_lies_between_leaf_extremes() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..20 {
            let tree = random::random_tree::<f64, _>(&mut rng, 3, 3, 3, 20_000);
            let n = tree.depth();
            let f = random::random_table(&mut rng, tree.level_size(n));
            let v = tree.global_lower_expectation(&f, n, &[]).unwrap();
            let min = f.iter().copied().fold(f64::INFINITY, f64::min);
            let max = f.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            assert!(v >= min - 1e-12 && v <= max + 1e-12);
        }
    }

    #[test]
    fn law_of_iterated_expectations_two_stage() {
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        for _ in 0..10 {
            let tree = random::random_tree::<f64, _>(&mut rng, 4, 3, 3, 50_000);
            let depth = tree.depth();
            let f = random::random_table(&mut rng, tree.level_size(depth));
            for n in 1..=depth {
                let staged = tree.conditional_lower_table(&f, depth, n).unwrap();
                for m in 0..n {
                    let direct = tree.conditional_lower_table(&f, depth, m).unwrap();
                    let two_stage = tree.conditional_lower_table(&staged, n, m).unwrap();
                    for (a, b) in direct.iter().zip(&two_stage) {
                        assert!((a - b).abs() < 1e-12);
                    }
                }
            }
        }
    }

    #[test]
    fn markov_tree_agrees_with_finite_horizon_joint() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..10 {
            let chain = random::random_chain::<f64, _>(&mut rng, 3, 3);
            let tree = ImpreciseProbabilityTree::markov(&chain, 3).unwrap();
            let f = random::random_table(&mut rng, chain.dim().pow(3));
            let via_tree = tree.global_lower_expectation(&f, 3, &[]).unwrap();
            let via_chain = chain.finite_horizon_joint(3, &f).unwrap();
            assert!((via_tree - via_chain).abs() < 1e-12);
        }
    }

    #[test]
    fn depth_one_markov_tree_is_the_initial_model() {
        let lv = CredalSet::linear_vacuous(&MassFunction::uniform(2), 0.3).unwrap();
        let op = crate::chain::LowerTransitionOperator::new(vec![lv.clone(), lv.clone()])
            .unwrap();
        let init = CredalSet::precise(MassFunction::new(vec![0.2, 0.8]).unwrap());
        let chain =
            ImpreciseMarkovChain::new(vec!["a".into(), "b".into()], init.clone(), op).unwrap();
        let tree = ImpreciseProbabilityTree::markov(&chain, 1).unwrap();
        let f = [4.0, -1.0];
        let g = Gamble::new(f.to_vec()).unwrap();
        assert_eq!(
            tree.global_lower_expectation(&f, 1, &[]).unwrap(),
            init.lower_expectation(&g).unwrap()
        );
    }

    #[test]
    fn binary_markov_tree_has_identical_non_root_models() {
        let row = CredalSet::linear_vacuous(&MassFunction::uniform(2), 0.5).unwrap();
        let op = crate::chain::LowerTransitionOperator::new(vec![row.clone(), row.clone()])
            .unwrap();
        let chain =
            ImpreciseMarkovChain::new(vec!["a".into(), "b".into()], row.clone(), op).unwrap();
        let tree = ImpreciseProbabilityTree::markov(&chain, 3).unwrap();
        let f = Gamble::indicator(2, 0);
        for k in 1..3 {
            for idx in 0..tree.level_size(k) {
                let set = tree.local_by_index(k, idx);
                assert_eq!(
                    set.lower_expectation(&f).unwrap(),
                    row.lower_expectation(&f).unwrap()
                );
            }
        }
    }

    #[test]
    fn constant_process_is_both_sub_and_super() {
        let tree = fair_coin_tree(4);
        let m = RealProcess::constant(&[2; 4], 3.0);
        assert!(tree.verify_submartingale(&m).unwrap().is_ok());
        assert!(tree.verify_supermartingale(&m).unwrap().is_ok());
    }

    #[test]
    fn fair_coin_paper_process_is_a_martingale() {
        // The branch-dependent doubling process on the fair-coin tree with
        // alpha = 1: both verification sides must accept it.
        let depth = 6;
        let tree = fair_coin_tree(depth);
        let alpha = 1.0;
        let m = RealProcess::from_differences(&vec![2; depth], alpha, |s, c| {
            let sign = if c == 0 { 1.0 } else { -1.0 };
            let n = s.len();
            if n == 0 {
                2.0 * alpha * sign
            } else if s.iter().all(|&x| x == 0) {
                3.0 * alpha * 2f64.powi(n as i32 - 1) * sign
            } else if s.iter().all(|&x| x == 1) {
                alpha * 2f64.powi(n as i32 - 1) * sign
            } else {
                0.0
            }
        });
        assert!(tree.verify_submartingale(&m).unwrap().is_ok());
        assert!(tree.verify_supermartingale(&m).unwrap().is_ok());
    }

    #[test]
    fn sub_super_conjugacy() {
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        for _ in 0..10 {
            let tree = random::random_tree::<f64, _>(&mut rng, 3, 2, 3, 20_000);
            let branching = tree.branching().to_vec();
            let m = RealProcess::from_fn(&branching, |_| {
                rand::Rng::gen_range(&mut rng, -2.0..2.0)
            });
            let sub_ok = tree.verify_submartingale(&m).unwrap().is_ok();
            let super_of_neg_ok = tree.verify_supermartingale(&m.negated()).unwrap().is_ok();
            assert_eq!(sub_ok, super_of_neg_ok);
        }
    }

    #[test]
    fn process_statistics_conventions() {
        let branching = [2usize; 4];
        let m = RealProcess::from_fn(&branching, |s| 2.0 * s.len() as f64);
        let b = SelectorProcess::ones(&branching);
        let stats = process_statistics(&m, &b, &[]).unwrap();
        assert_eq!(stats, ProcessStats { avg: 0.0, b_avg: 0.0, b_count: 0 });

        // Linear process: every average equals the slope.
        let path = [0, 1, 0, 1];
        let stats = process_statistics(&m, &b, &path).unwrap();
        assert!((stats.avg - 2.0).abs() < 1e-15);
        assert!((stats.b_avg - 2.0).abs() < 1e-15);
        assert_eq!(stats.b_count, 4);

        // All-zero selector: the zero-denominator convention applies.
        let none = SelectorProcess::from_fn(&branching, |_| false);
        let stats = process_statistics(&m, &none, &path).unwrap();
        assert_eq!(stats.b_avg, 0.0);
        assert_eq!(stats.b_count, 0);
    }
}
