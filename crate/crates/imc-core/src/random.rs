//! Seeded generators for random problem instances.
//!
//! Used by the property suites (library-level, so the CLI `verify` command
//! can drive them too). Everything is deterministic given the RNG state.

use crate::chain::{ImpreciseMarkovChain, LowerTransitionOperator};
use crate::credal::{CredalSet, Gamble, MassFunction};
use crate::scalar::Real;
use crate::tree::ImpreciseProbabilityTree;
use rand::Rng;

/// A random gamble with entries uniform in `[lo, hi]`.
pub fn random_gamble<T: Real, R: Rng>(rng: &mut R, dim: usize, lo: f64, hi: f64) -> Gamble<T> {
    Gamble::new((0..dim).map(|_| T::of(rng.gen_range(lo..=hi))).collect())
        .expect("finite entries")
}

/// A random table of `len` entries uniform in `[-5, 5]`.
pub fn random_table<T: Real, R: Rng>(rng: &mut R, len: usize) -> Vec<T> {
    (0..len).map(|_| T::of(rng.gen_range(-5.0..=5.0))).collect()
}

/// A random mass function: normalized positive uniforms.
pub fn random_mass_function<T: Real, R: Rng>(rng: &mut R, dim: usize) -> MassFunction<T> {
    let raw: Vec<f64> = (0..dim).map(|_| rng.gen_range(0.05..1.0)).collect();
    let sum: f64 = raw.iter().sum();
    MassFunction::new(raw.into_iter().map(|u| T::of(u / sum)).collect())
        .expect("normalized uniforms form a mass function")
}

/// A random credal set with between 1 and `max_vertices` vertices.
pub fn random_credal_set<T: Real, R: Rng>(
    rng: &mut R,
    dim: usize,
    max_vertices: usize,
) -> CredalSet<T> {
    let count = rng.gen_range(1..=max_vertices.max(1));
    CredalSet::from_vertices((0..count).map(|_| random_mass_function(rng, dim)).collect())
        .expect("nonempty vertex list")
}

/// A random precise operator (one mass function per row).
pub fn random_stochastic_operator<T: Real, R: Rng>(
    rng: &mut R,
    dim: usize,
) -> LowerTransitionOperator<T> {
    LowerTransitionOperator::new(
        (0..dim)
            .map(|_| CredalSet::precise(random_mass_function(rng, dim)))
            .collect(),
    )
    .expect("rows are valid")
}

/// A random imprecise operator.
pub fn random_operator<T: Real, R: Rng>(
    rng: &mut R,
    dim: usize,
    max_vertices: usize,
) -> LowerTransitionOperator<T> {
    LowerTransitionOperator::new(
        (0..dim)
            .map(|_| random_credal_set(rng, dim, max_vertices))
            .collect(),
    )
    .expect("rows are valid")
}

/// A random imprecise Markov chain with 2..=`max_dim` states.
pub fn random_chain<T: Real, R: Rng>(
    rng: &mut R,
    max_dim: usize,
    max_vertices: usize,
) -> ImpreciseMarkovChain<T> {
    let dim = rng.gen_range(2..=max_dim.max(2));
    let states = (0..dim).map(|x| format!("s{x}")).collect();
    let initial = random_credal_set(rng, dim, max_vertices);
    let operator = random_operator(rng, dim, max_vertices);
    ImpreciseMarkovChain::new(states, initial, operator).expect("dimensions agree")
}

/// A random imprecise probability tree whose total number of brute-force
/// vertex-selection combinations stays within `max_combinations`, so that
/// the oracle remains tractable. Vertex counts are drawn from
/// 1..=`max_vertices` and clamped to 1 once the budget is exhausted.
pub fn random_tree<T: Real, R: Rng>(
    rng: &mut R,
    max_depth: usize,
    max_branch: usize,
    max_vertices: usize,
    max_combinations: usize,
) -> ImpreciseProbabilityTree<T> {
    let depth = rng.gen_range(1..=max_depth.max(1));
    let branching: Vec<usize> = (0..depth)
        .map(|_| rng.gen_range(2..=max_branch.max(2)))
        .collect();
    let mut budget = max_combinations.max(1);
    ImpreciseProbabilityTree::from_fn(branching.clone(), |s| {
        let dim = branching[s.len()];
        let mut count = rng.gen_range(1..=max_vertices.max(1));
        while count > 1 && budget / count == 0 {
            count -= 1;
        }
        budget /= count;
        CredalSet::from_vertices((0..count).map(|_| random_mass_function(rng, dim)).collect())
            .expect("nonempty vertex list")
    })
    .expect("within size limits")
}
