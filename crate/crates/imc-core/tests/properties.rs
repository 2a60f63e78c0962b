//! Property suites for the numerical invariants of the library: coherence
//! bounds, conjugacy, operator monotonicity and non-expansiveness, oracle
//! consistency, and the submartingale character of gain processes.

use imc_core::chain::{ImpreciseMarkovChain, LowerTransitionOperator};
use imc_core::credal::{CredalSet, DistanceMode, Gamble, MassFunction};
use imc_core::ergodic::{self, SelectionPolicy};
use imc_core::random;
use imc_core::tree::{ImpreciseProbabilityTree, RealProcess};
use proptest::prelude::*;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

const TOL: f64 = 1e-12;

#[test]
fn bound_chain_and_constant_additivity_on_1000_instances() {
    let mut rng = ChaCha8Rng::seed_from_u64(1000);
    for _ in 0..1000 {
        let dim = rng.gen_range(1..=6);
        let m: CredalSet<f64> = random::random_credal_set(&mut rng, dim, 5);
        let f: Gamble<f64> = random::random_gamble(&mut rng, dim, -10.0, 10.0);
        let lo = m.lower_expectation(&f).unwrap();
        let hi = m.upper_expectation(&f).unwrap();
        assert!(f.min_value() - TOL <= lo && lo <= hi + TOL && hi <= f.max_value() + TOL);

        let mu = rng.gen_range(-5.0..5.0);
        let lo_shift = m.lower_expectation(&f.shift(mu)).unwrap();
        assert!((lo_shift - (lo + mu)).abs() <= TOL);

        let lambda = rng.gen_range(0.0..4.0);
        let lo_scale = m.lower_expectation(&f.scale(lambda)).unwrap();
        assert!((lo_scale - lambda * lo).abs() <= TOL);
    }
}

#[test]
fn conjugacy_is_bit_for_bit() {
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    for _ in 0..200 {
        let dim = rng.gen_range(1..=5);
        let m: CredalSet<f64> = random::random_credal_set(&mut rng, dim, 4);
        let f: Gamble<f64> = random::random_gamble(&mut rng, dim, -3.0, 3.0);
        let upper = m.upper_expectation(&f).unwrap();
        let via_conjugate = -m.lower_expectation(&f.negated()).unwrap();
        assert_eq!(upper, via_conjugate);
    }
}

#[test]
fn linear_vacuous_envelope_formula() {
    let mut rng = ChaCha8Rng::seed_from_u64(23);
    for _ in 0..300 {
        let dim = rng.gen_range(1..=6);
        let p: MassFunction<f64> = random::random_mass_function(&mut rng, dim);
        let eps = rng.gen_range(0.0..=1.0);
        let m = CredalSet::linear_vacuous(&p, eps).unwrap();
        let h: Gamble<f64> = random::random_gamble(&mut rng, dim, -5.0, 5.0);
        let expected = (1.0 - eps) * p.expectation(&h).unwrap() + eps * h.min_value();
        let got = m.lower_expectation(&h).unwrap();
        assert!((got - expected).abs() <= TOL);
    }
}

proptest! {
    // The lower envelope only depends on the vertex set, not its order, and
    // appending a convex combination of existing vertices never changes it.
    #[test]
    fn vertex_list_invariances(
        raw in proptest::collection::vec(
            proptest::collection::vec(0.05f64..1.0, 3),
            1..5,
        ),
        f_raw in proptest::collection::vec(-5.0f64..5.0, 3),
        weight in 0.0f64..1.0,
        rotate in 0usize..4,
    ) {
        let vertices: Vec<MassFunction<f64>> = raw
            .iter()
            .map(|v| {
                let sum: f64 = v.iter().sum();
                MassFunction::new(v.iter().map(|u| u / sum).collect()).unwrap()
            })
            .collect();
        let f = Gamble::new(f_raw).unwrap();
        let base = CredalSet::from_vertices(vertices.clone()).unwrap();
        let value = base.lower_expectation(&f).unwrap();

        let mut rotated = vertices.clone();
        let shift = rotate % rotated.len();
        rotated.rotate_left(shift);
        let perm = CredalSet::from_vertices(rotated).unwrap();
        prop_assert_eq!(perm.lower_expectation(&f).unwrap(), value);

        // Convex combination of the first and last vertex.
        let a = vertices.first().unwrap();
        let b = vertices.last().unwrap();
        let mix: Vec<f64> = a
            .probabilities()
            .iter()
            .zip(b.probabilities())
            .map(|(&pa, &pb)| weight * pa + (1.0 - weight) * pb)
            .collect();
        let mut extended = vertices;
        extended.push(MassFunction::new(mix).unwrap());
        let ext = CredalSet::from_vertices(extended).unwrap();
        prop_assert!((ext.lower_expectation(&f).unwrap() - value).abs() <= TOL);
    }

    // T is monotone and non-expansive in the variation seminorm.
    #[test]
    fn operator_monotone_and_nonexpansive(seed in 0u64..500) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let dim = rng.gen_range(2..=5);
        let op: LowerTransitionOperator<f64> = random::random_operator(&mut rng, dim, 4);
        let f: Gamble<f64> = random::random_gamble(&mut rng, dim, -5.0, 5.0);
        let bump: Vec<f64> = (0..dim).map(|_| rng.gen_range(0.0..3.0)).collect();
        let g = Gamble::new(
            f.values().iter().zip(&bump).map(|(&a, &b)| a + b).collect(),
        )
        .unwrap();
        let tf = op.apply(&f).unwrap();
        let tg = op.apply(&g).unwrap();
        prop_assert!(tf.dominated_by(&tg));
        prop_assert!(tf.variation_norm() <= f.variation_norm() + TOL);
    }
}

#[test]
fn operator_monotonicity_exact_on_1000_pairs() {
    let mut rng = ChaCha8Rng::seed_from_u64(4242);
    for _ in 0..1000 {
        let dim = rng.gen_range(2..=5);
        let op: LowerTransitionOperator<f64> = random::random_operator(&mut rng, dim, 4);
        let f: Gamble<f64> = random::random_gamble(&mut rng, dim, -5.0, 5.0);
        let g = Gamble::new(
            f.values()
                .iter()
                .map(|&a| a + rng.gen_range(0.0..3.0))
                .collect(),
        )
        .unwrap();
        assert!(op.apply(&f).unwrap().dominated_by(&op.apply(&g).unwrap()));
    }
}

#[test]
fn operator_additivity_and_homogeneity() {
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    for _ in 0..300 {
        let dim = rng.gen_range(2..=5);
        let op: LowerTransitionOperator<f64> = random::random_operator(&mut rng, dim, 4);
        let f: Gamble<f64> = random::random_gamble(&mut rng, dim, -5.0, 5.0);
        let mu = rng.gen_range(-4.0..4.0);
        let lambda = rng.gen_range(0.0..3.0);
        let tf = op.apply(&f).unwrap();
        let t_shift = op.apply(&f.shift(mu)).unwrap();
        let t_scale = op.apply(&f.scale(lambda)).unwrap();
        for x in 0..dim {
            assert!((t_shift.get(x) - (tf.get(x) + mu)).abs() <= TOL);
            assert!((t_scale.get(x) - lambda * tf.get(x)).abs() <= TOL);
        }
    }
}

#[test]
fn binary_example_powers_are_constant() {
    let row = CredalSet::linear_vacuous(&MassFunction::<f64>::uniform(2), 0.5).unwrap();
    let op = LowerTransitionOperator::new(vec![row.clone(), row]).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..50 {
        let f: Gamble<f64> = random::random_gamble(&mut rng, 2, -5.0, 5.0);
        for n in 1..=5 {
            let g = op.apply_power(n, &f).unwrap();
            assert!(g.variation_norm() <= TOL);
        }
    }
}

#[test]
fn finite_horizon_joint_matches_tree_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(2718);
    for _ in 0..40 {
        let dim = rng.gen_range(2..=3);
        let states = (0..dim).map(|x| format!("s{x}")).collect();
        let initial: CredalSet<f64> = random::random_credal_set(&mut rng, dim, 3);
        let op = random::random_operator(&mut rng, dim, 3);
        let chain = ImpreciseMarkovChain::new(states, initial, op).unwrap();
        let n = rng.gen_range(1..=if dim == 2 { 4 } else { 3 });
        let table = random::random_table(&mut rng, dim.pow(n as u32));
        let joint = chain.finite_horizon_joint(n, &table).unwrap();
        let tree = ImpreciseProbabilityTree::markov(&chain, n).unwrap();
        let oracle = tree.brute_force_oracle(&table, n, &[]).unwrap();
        assert!(
            (joint - oracle).abs() <= 1e-10,
            "joint {joint} vs oracle {oracle}"
        );
    }
}

#[test]
fn global_recursion_never_exceeds_a_compatible_precise_tree() {
    let mut rng = ChaCha8Rng::seed_from_u64(606);
    for _ in 0..20 {
        let tree: ImpreciseProbabilityTree<f64> = random::random_tree(&mut rng, 3, 3, 3, 5_000);
        let n = tree.depth();
        let f = random::random_table(&mut rng, tree.level_size(n));
        let global = tree.global_lower_expectation(&f, n, &[]).unwrap();
        // Any single selection of vertices gives a compatible precise tree;
        // pin each local model to a random vertex and evaluate directly.
        for _ in 0..10 {
            let pinned = {
                let mut picks: Vec<Vec<usize>> = Vec::new();
                for k in 0..n {
                    picks.push(
                        (0..tree.level_size(k))
                            .map(|idx| {
                                rng.gen_range(0..tree.local_by_index(k, idx).vertices().len())
                            })
                            .collect(),
                    );
                }
                picks
            };
            let precise = ImpreciseProbabilityTree::from_fn(tree.branching().to_vec(), |s| {
                let k = s.len();
                let idx = tree.situation_index(s).unwrap();
                let set = tree.local_by_index(k, idx);
                CredalSet::precise(set.vertices()[pinned[k][idx]].clone())
            })
            .unwrap();
            let value = precise.global_lower_expectation(&f, n, &[]).unwrap();
            assert!(global <= value + 1e-10);
        }
    }
}

#[test]
fn stationary_value_respects_constant_shifts() {
    let mut rng = ChaCha8Rng::seed_from_u64(5050);
    for _ in 0..20 {
        // Linear-vacuous rows around random centers are PF-like for small eps.
        let dim = rng.gen_range(2..=4);
        let rows: Vec<CredalSet<f64>> = (0..dim)
            .map(|_| {
                CredalSet::linear_vacuous(
                    &random::random_mass_function(&mut rng, dim),
                    rng.gen_range(0.0..0.4),
                )
                .unwrap()
            })
            .collect();
        let op = LowerTransitionOperator::new(rows).unwrap();
        let f: Gamble<f64> = random::random_gamble(&mut rng, dim, -5.0, 5.0);
        let c = rng.gen_range(-10.0..10.0);
        let a = op.stationary_lower_expectation(&f, 1e-11, 100_000).unwrap();
        let b = op
            .stationary_lower_expectation(&f.shift(c), 1e-11, 100_000)
            .unwrap();
        assert!((b.value - (a.value + c)).abs() <= 1e-9);
    }
}

#[test]
fn gain_process_is_a_submartingale_on_markov_trees() {
    let mut rng = ChaCha8Rng::seed_from_u64(909);
    for _ in 0..15 {
        let chain: ImpreciseMarkovChain<f64> = random::random_chain(&mut rng, 3, 3);
        let f: Gamble<f64> = random::random_gamble(&mut rng, chain.dim(), -4.0, 4.0);
        let depth = if chain.dim() == 2 { 8 } else { 5 };
        let tree = ImpreciseProbabilityTree::markov(&chain, depth).unwrap();
        let delta = ergodic::gain_difference(&chain, &f).unwrap();
        let m = RealProcess::from_differences(&vec![chain.dim(); depth], 0.0, |s, c| {
            delta(s).get(c)
        });
        let report = tree.verify_submartingale(&m).unwrap();
        assert!(report.is_ok(), "violations at {:?}", report.violations);
    }
}

#[test]
fn sampled_transition_frequencies_match_the_reduced_chain() {
    // Precise chain: policy irrelevant; per-state empirical transition
    // frequencies stay within 3-sigma binomial bands at length 1e5.
    let p = [[0.7, 0.3], [0.4, 0.6]];
    let rows: Vec<CredalSet<f64>> = p
        .iter()
        .map(|row| CredalSet::precise(MassFunction::new(row.to_vec()).unwrap()))
        .collect();
    let op = LowerTransitionOperator::new(rows).unwrap();
    let chain = ImpreciseMarkovChain::new(
        vec!["a".into(), "b".into()],
        CredalSet::precise(MassFunction::uniform(2)),
        op,
    )
    .unwrap();
    let n = 100_000;
    let path = ergodic::sample_path(&chain, &SelectionPolicy::RandomVertex, n, 2024).unwrap();
    let mut counts = [[0usize; 2]; 2];
    for w in path.states.windows(2) {
        counts[w[0]][w[1]] += 1;
    }
    for x in 0..2 {
        let total = (counts[x][0] + counts[x][1]) as f64;
        for z in 0..2 {
            let expected = total * p[x][z];
            let sigma = (total * p[x][z] * (1.0 - p[x][z])).sqrt();
            let got = counts[x][z] as f64;
            assert!(
                (got - expected).abs() <= 3.0 * sigma,
                "transition {x}->{z}: {got} vs {expected} (sigma {sigma})"
            );
        }
    }
}

#[test]
fn classical_ergodic_oracle_on_precise_chains() {
    // |running average - pi . f| <= 0.02 at length 1e5 on at least 95% of
    // the sampled paths.
    let p = [[0.9, 0.1], [0.2, 0.8]];
    let rows: Vec<CredalSet<f64>> = p
        .iter()
        .map(|row| CredalSet::precise(MassFunction::new(row.to_vec()).unwrap()))
        .collect();
    let op = LowerTransitionOperator::new(rows).unwrap();
    let chain = ImpreciseMarkovChain::new(
        vec!["a".into(), "b".into()],
        CredalSet::precise(MassFunction::uniform(2)),
        op,
    )
    .unwrap();
    let pi_f = 2.0 / 3.0;
    let n_paths = 40;
    let mut within = 0usize;
    for i in 0..n_paths {
        let seed = ergodic::derive_path_seed(31337, i as u64);
        let path = ergodic::sample_path(&chain, &SelectionPolicy::RandomVertex, 100_000, seed)
            .unwrap();
        let avg =
            path.states.iter().filter(|&&x| x == 0).count() as f64 / path.states.len() as f64;
        if (avg - pi_f).abs() <= 0.02 {
            within += 1;
        }
    }
    assert!(
        within * 100 >= n_paths * 95,
        "only {within}/{n_paths} paths within band"
    );
}

#[test]
fn distance_modes_agree_up_to_sampling() {
    // Grid sampling can only improve on the indicator bound.
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    for _ in 0..50 {
        let dim = rng.gen_range(2..=4);
        let a: CredalSet<f64> = random::random_credal_set(&mut rng, dim, 3);
        let b: CredalSet<f64> = random::random_credal_set(&mut rng, dim, 3);
        let d_ind = a.distance(&b, DistanceMode::Indicators01).unwrap();
        let d_grid = a
            .distance(
                &b,
                DistanceMode::Grid {
                    samples: 100,
                    seed: 5,
                },
            )
            .unwrap();
        assert!(d_grid >= d_ind - TOL);
        assert!((0.0..=1.0).contains(&d_grid));
    }
}
