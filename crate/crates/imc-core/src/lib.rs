#![deny(missing_docs, unsafe_code)]

//! Computational core for imprecise Markov chains.
//!
//! An imprecise Markov chain replaces each row of a transition matrix by a
//! closed convex set of mass functions (a credal set); the induced lower
//! transition operator `T` maps a gamble `f` to the vector of row-wise lower
//! expectations. This crate provides:
//!
//! - [`credal`]: credal sets in vertex representation, exact lower/upper
//!   expectations, coherence checking, and distances between lower
//!   expectation operators;
//! - [`chain`]: lower transition operators and chains — application and
//!   powers, the weak coefficient of ergodicity, PF-like detection,
//!   stationary lower expectations, marginal and finite-horizon joint
//!   lower expectations;
//! - [`tree`]: general finite-depth imprecise probability trees with
//!   backward-recursion global lower expectations, a brute-force
//!   compatible-precise-tree oracle, and sub/supermartingale verification;
//! - [`hitting`]: lower and upper expected transition and return times by
//!   monotone fixed-point iteration;
//! - [`ergodic`]: gain and ergodic-average processes, the identity between
//!   them, the multiplicative test supermartingale behind the strong law of
//!   large numbers, and seeded Monte-Carlo checks of the point-wise ergodic
//!   theorem;
//! - [`random`]: seeded instance generators for the property suites.
//!
//! All numerics are generic over the scalar type through [`Real`]
//! (`f32` or `f64`); the aliases below fix `f64`, which is what the
//! command-line front end uses.

pub mod chain;
pub mod credal;
pub mod ergodic;
pub mod error;
pub mod hitting;
pub mod random;
pub mod scalar;
pub mod tree;

pub use error::{Error, Result};
pub use scalar::Real;

/// A gamble over `f64`.
pub type Gamble64 = credal::Gamble<f64>;
/// A mass function over `f64`.
pub type MassFunction64 = credal::MassFunction<f64>;
/// A credal set over `f64`.
pub type CredalSet64 = credal::CredalSet<f64>;
/// A lower transition operator over `f64`.
pub type LowerTransitionOperator64 = chain::LowerTransitionOperator<f64>;
/// An imprecise Markov chain over `f64`.
pub type ImpreciseMarkovChain64 = chain::ImpreciseMarkovChain<f64>;
/// An imprecise probability tree over `f64`.
pub type ImpreciseProbabilityTree64 = tree::ImpreciseProbabilityTree<f64>;
/// A real process over `f64`.
pub type RealProcess64 = tree::RealProcess<f64>;
/// Extended hitting-time vector over `f64`.
pub type ExtendedGamble64 = hitting::ExtendedGamble<f64>;

#[cfg(test)]
mod f32_smoke {
    use crate::chain::LowerTransitionOperator;
    use crate::credal::{CredalSet, Gamble, MassFunction};

    // The whole stack is generic; a quick end-to-end pass in f32 guards the
    // trait bounds.
    #[test]
    fn single_precision_pipeline() {
        let p = MassFunction::<f32>::uniform(2);
        let row = CredalSet::linear_vacuous(&p, 0.5).unwrap();
        let op = LowerTransitionOperator::new(vec![row.clone(), row]).unwrap();
        let f = Gamble::<f32>::indicator(2, 0);
        let tf = op.apply(&f).unwrap();
        assert!((tf.get(0) - 0.25).abs() < 1e-6);
        let est = op.stationary_lower_expectation(&f, 1e-5, 100).unwrap();
        assert!((est.value - 0.25).abs() < 1e-6);
        let times = crate::hitting::lower_hitting_times(&op, 0, 1e-5, 10_000, 1e9).unwrap();
        assert!((times.times.get(1) - 4.0 / 3.0).abs() < 1e-4);
    }
}
