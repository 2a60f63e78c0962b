//! Implementations of the CLI verbs.

use crate::report::{fmt_float, inputs_digest, Report};
use crate::spec_file::ChainSpecFile;
use imc_core::chain::{defaults, PfVerdict};
use imc_core::credal::DistanceMode;
use imc_core::ergodic::{self, SelectionPolicy};
use imc_core::hitting;
use imc_core::random;
use imc_core::tree::{ImpreciseProbabilityTree, RealProcess, SelectorProcess};
use imc_core::{Error as CoreError, Gamble64, ImpreciseMarkovChain64};
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::path::Path;

/// Command failure, carrying the process exit code contract:
/// 1 for property violations, 2 for input errors.
#[derive(Debug)]
pub enum CliError {
    /// Bad inputs: parse failures, unknown labels, invalid flags.
    Input(String),
    /// A verified property failed.
    Violation(String),
}

impl CliError {
    /// Process exit code.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Input(_) => 2,
            CliError::Violation(_) => 1,
        }
    }

    /// Message for stderr.
    pub fn message(&self) -> &str {
        match self {
            CliError::Input(m) | CliError::Violation(m) => m,
        }
    }
}

fn input_err(e: impl std::fmt::Display) -> CliError {
    CliError::Input(e.to_string())
}

struct LoadedSpec {
    bytes: Vec<u8>,
    chain: ImpreciseMarkovChain64,
    path: String,
}

fn load_spec(path: &Path) -> Result<LoadedSpec, CliError> {
    let bytes = std::fs::read(path)
        .map_err(|e| CliError::Input(format!("cannot read {}: {e}", path.display())))?;
    let text = String::from_utf8(bytes.clone())
        .map_err(|e| CliError::Input(format!("{}: not UTF-8: {e}", path.display())))?;
    let spec = ChainSpecFile::parse(&text).map_err(CliError::Input)?;
    // Round-trip invariant: serialize and re-parse must reproduce the
    // in-memory structure exactly.
    let round_trip = ChainSpecFile::parse(&spec.to_toml()).map_err(CliError::Input)?;
    if round_trip != spec {
        return Err(CliError::Input(format!(
            "{}: serialization round trip altered the spec",
            path.display()
        )));
    }
    let chain = spec.build_chain().map_err(CliError::Input)?;
    Ok(LoadedSpec {
        bytes,
        chain,
        path: path.display().to_string(),
    })
}

/// Candidate-gamble mode selected on the command line.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ModeArg {
    /// Exact {0,1} enumeration only.
    Indicators01,
    /// Enumeration plus random samples.
    Grid,
}

impl std::str::FromStr for ModeArg {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "indicators01" => Ok(Self::Indicators01),
            "grid" => Ok(Self::Grid),
            other => Err(format!(
                "unknown mode `{other}` (expected indicators01 or grid)"
            )),
        }
    }
}

fn distance_mode(mode: ModeArg, samples: usize, seed: u64) -> DistanceMode {
    match mode {
        ModeArg::Indicators01 => DistanceMode::Indicators01,
        ModeArg::Grid => DistanceMode::Grid { samples, seed },
    }
}

fn parse_gamble_values(text: &str, dim: usize) -> Result<Gamble64, CliError> {
    let values: Result<Vec<f64>, _> = text.split(',').map(|v| v.trim().parse::<f64>()).collect();
    let values = values.map_err(|e| CliError::Input(format!("bad gamble `{text}`: {e}")))?;
    if values.len() != dim {
        return Err(CliError::Input(format!(
            "gamble has {} entries, chain has {dim} states",
            values.len()
        )));
    }
    Gamble64::new(values).map_err(input_err)
}

// ---------------------------------------------------------------------------
// analyze
// ---------------------------------------------------------------------------

/// Options of the `analyze` command.
pub struct AnalyzeOpts {
    /// Largest operator power examined.
    pub r_max: Option<usize>,
    /// Stationary iteration tolerance and stationarity threshold.
    pub tol: f64,
    /// Candidate-gamble mode.
    pub mode: ModeArg,
    /// Random gambles per maximization in grid mode.
    pub grid_samples: usize,
    /// Extra user gamble, comma-separated values.
    pub gamble: Option<String>,
    /// RNG seed.
    pub seed: u64,
}

/// Ergodicity analysis: coefficient table, PF-like verdict, stationary
/// lower expectations and the stationarity check.
pub fn cmd_analyze(path: &Path, opts: &AnalyzeOpts) -> Result<String, CliError> {
    let loaded = load_spec(path)?;
    let chain = &loaded.chain;
    let dim = chain.dim();
    let r_max = opts.r_max.unwrap_or_else(|| defaults::power_horizon(dim));
    let mode = distance_mode(opts.mode, opts.grid_samples, opts.seed);

    let args = format!(
        "analyze r_max={r_max} tol={} mode={:?} samples={} gamble={} seed={}",
        fmt_float(opts.tol),
        opts.mode,
        opts.grid_samples,
        opts.gamble.as_deref().unwrap_or("-"),
        opts.seed,
    );
    let mut report = Report::new(
        "analyze",
        &loaded.path,
        &inputs_digest(&loaded.bytes, &args),
        opts.seed,
    );
    report.line(format!("states: {}", chain.states().join(", ")));

    let pf = chain
        .operator()
        .detect_pf_like(r_max, r_max, mode)
        .map_err(input_err)?;
    report.line(format!(
        "coefficient of ergodicity ({}):",
        if pf.rho_exact {
            "exact for precise rows"
        } else {
            "enumeration lower bound"
        }
    ));
    for (r, rho) in &pf.rho_by_power {
        report.line(format!("  rho(T^{r}) = {}", fmt_float(*rho)));
    }
    let verdict = match pf.verdict {
        PfVerdict::PfLike { r } => format!("PF-like (r={r})"),
        PfVerdict::NotPfLikeCertified => "not PF-like (certified)".into(),
        PfVerdict::Inconclusive => "inconclusive".into(),
    };
    report.line(format!("verdict: {verdict}"));
    report.line(format!(
        "reachability condition: {}",
        if pf.reachability_ok {
            "satisfied"
        } else {
            "not satisfied"
        }
    ));

    // Stationary lower expectations: the state indicators, plus any user
    // gamble.
    let mut gambles: Vec<(String, Gamble64)> = (0..dim)
        .map(|x| {
            (
                format!("1_{}", chain.states()[x]),
                Gamble64::indicator(dim, x),
            )
        })
        .collect();
    if let Some(text) = &opts.gamble {
        gambles.push(("user".into(), parse_gamble_values(text, dim)?));
    }
    report.line(format!(
        "stationary lower expectations (tol {}):",
        fmt_float(opts.tol)
    ));
    for (label, g) in &gambles {
        match chain
            .operator()
            .stationary_lower_expectation(g, opts.tol, defaults::MAX_ITER)
        {
            Ok(est) => report.line(format!(
                "  {label}: value={} interval=[{}, {}] width={} iters={}",
                fmt_float(est.value),
                fmt_float(est.lower),
                fmt_float(est.upper),
                fmt_float(est.width),
                est.iters
            )),
            Err(CoreError::NoConvergence { iters, width }) => report.line(format!(
                "  {label}: no convergence after {iters} iterations (width {})",
                fmt_float(width)
            )),
            Err(e) => return Err(input_err(e)),
        }
    }

    let stationarity = if matches!(pf.verdict, PfVerdict::PfLike { .. }) {
        match chain.check_stationarity(opts.tol) {
            Ok(true) => "stationary (initial model equals the stationary one)".into(),
            Ok(false) => "not stationary".into(),
            Err(e) => format!("undecided ({e})"),
        }
    } else {
        "not applicable (PF-like not established)".into()
    };
    report.line(format!("stationarity: {stationarity}"));

    Ok(report.body())
}

// ---------------------------------------------------------------------------
// hitting
// ---------------------------------------------------------------------------

/// Options of the `hitting` command.
pub struct HittingOpts {
    /// Componentwise stopping tolerance.
    pub tol: f64,
    /// Iteration cap.
    pub max_iter: usize,
    /// Values above the cap are declared infinite.
    pub cap: f64,
    /// RNG seed (header only; the solver is deterministic).
    pub seed: u64,
}

/// Lower and upper expected transition/return times toward one target state.
pub fn cmd_hitting(path: &Path, target: &str, opts: &HittingOpts) -> Result<String, CliError> {
    let loaded = load_spec(path)?;
    let chain = &loaded.chain;
    let y = chain
        .state_index(target)
        .ok_or_else(|| CliError::Input(format!("unknown target label `{target}`")))?;

    let args = format!(
        "hitting target={target} tol={} max_iter={} cap={}",
        fmt_float(opts.tol),
        opts.max_iter,
        fmt_float(opts.cap)
    );
    let mut report = Report::new(
        "hitting",
        &loaded.path,
        &inputs_digest(&loaded.bytes, &args),
        opts.seed,
    );
    report.line(format!("target: {target}"));

    let lower = hitting::lower_hitting_times(chain.operator(), y, opts.tol, opts.max_iter, opts.cap)
        .map_err(input_err)?;
    let upper = hitting::upper_hitting_times(chain.operator(), y, opts.tol, opts.max_iter, opts.cap)
        .map_err(input_err)?;
    for (kind, times) in [("lower", &lower), ("upper", &upper)] {
        report.line(format!(
            "{kind} expected times (iters={}, converged={}):",
            times.iterations, times.converged
        ));
        for (x, label) in chain.states().iter().enumerate() {
            report.line(format!(
                "  {label} -> {target}: {}",
                fmt_float(times.times.get(x))
            ));
        }
    }
    Ok(report.body())
}

// ---------------------------------------------------------------------------
// simulate
// ---------------------------------------------------------------------------

/// Options of the `simulate` command.
pub struct SimulateOpts {
    /// Comma-separated gamble values.
    pub gamble: Option<String>,
    /// Indicator gamble of a labelled state.
    pub indicator: Option<String>,
    /// Policy name: adversarial | random | vertex:K.
    pub policy: String,
    /// Number of sampled paths.
    pub n_paths: usize,
    /// Path length.
    pub length: usize,
    /// Threshold slack.
    pub delta: f64,
    /// Base seed.
    pub seed: u64,
    /// CSV output path.
    pub out: Option<std::path::PathBuf>,
}

fn parse_policy(
    text: &str,
    f: &Gamble64,
    dim: usize,
) -> Result<SelectionPolicy<f64>, CliError> {
    if text == "adversarial" {
        Ok(SelectionPolicy::AdversarialFor(f.clone()))
    } else if text == "random" {
        Ok(SelectionPolicy::RandomVertex)
    } else if let Some(k) = text.strip_prefix("vertex:") {
        let k: usize = k
            .parse()
            .map_err(|e| CliError::Input(format!("bad policy `{text}`: {e}")))?;
        Ok(SelectionPolicy::fixed(k, dim))
    } else {
        Err(CliError::Input(format!(
            "unknown policy `{text}` (expected adversarial, random, or vertex:K)"
        )))
    }
}

/// Samples compatible precise processes and reports the running-average
/// distribution against the stationary lower expectation.
pub fn cmd_simulate(path: &Path, opts: &SimulateOpts) -> Result<String, CliError> {
    let loaded = load_spec(path)?;
    let chain = &loaded.chain;
    let dim = chain.dim();

    let f = match (&opts.gamble, &opts.indicator) {
        (Some(text), None) => parse_gamble_values(text, dim)?,
        (None, Some(label)) => {
            let x = chain
                .state_index(label)
                .ok_or_else(|| CliError::Input(format!("unknown state label `{label}`")))?;
            Gamble64::indicator(dim, x)
        }
        _ => {
            return Err(CliError::Input(
                "give exactly one of --gamble or --indicator".into(),
            ))
        }
    };
    let policy = parse_policy(&opts.policy, &f, dim)?;

    let args = format!(
        "simulate gamble={} indicator={} policy={} n_paths={} length={} delta={} seed={}",
        opts.gamble.as_deref().unwrap_or("-"),
        opts.indicator.as_deref().unwrap_or("-"),
        opts.policy,
        opts.n_paths,
        opts.length,
        fmt_float(opts.delta),
        opts.seed,
    );
    let mut report = Report::new(
        "simulate",
        &loaded.path,
        &inputs_digest(&loaded.bytes, &args),
        opts.seed,
    );

    let check = ergodic::empirical_ergodic_check(
        chain,
        &f,
        std::slice::from_ref(&policy),
        opts.n_paths,
        opts.length,
        opts.delta,
        opts.seed,
    )
    .map_err(input_err)?;
    let block = &check.policies[0];

    if let Some(csv_path) = &opts.out {
        let mut csv = String::from("path_index,n,running_average,threshold,pass\n");
        for row in &block.paths {
            csv.push_str(&format!(
                "{},{},{},{},{}\n",
                row.path_index,
                row.horizon,
                fmt_float(row.average),
                fmt_float(row.threshold),
                row.pass
            ));
        }
        std::fs::write(csv_path, csv)
            .map_err(|e| CliError::Input(format!("cannot write {}: {e}", csv_path.display())))?;
        report.line(format!("csv: {}", csv_path.display()));
    }

    report.line(format!("policy: {}", block.policy_tag));
    report.line(format!(
        "threshold: {} (delta {})",
        fmt_float(check.threshold),
        fmt_float(check.delta)
    ));
    report.line(format!(
        "paths: {} x {} steps",
        opts.n_paths, opts.length
    ));
    report.line(format!(
        "fraction above threshold-delta: {}",
        fmt_float(block.fraction)
    ));
    report.line(format!(
        "averages: min={} median={} max={}",
        fmt_float(block.min),
        fmt_float(block.median),
        fmt_float(block.max)
    ));
    Ok(report.body())
}

// ---------------------------------------------------------------------------
// verify
// ---------------------------------------------------------------------------

/// Runs one of the named property suites; exit code 1 on any violation.
pub fn cmd_verify(path: &Path, suite: &str, seed: u64) -> Result<String, CliError> {
    let loaded = load_spec(path)?;
    let args = format!("verify suite={suite} seed={seed}");
    let mut report = Report::new(
        "verify",
        &loaded.path,
        &inputs_digest(&loaded.bytes, &args),
        seed,
    );
    let ok = match suite {
        "coherence" => verify_coherence(&loaded.chain, seed, &mut report),
        "identity" => verify_identity_suite(&loaded.chain, seed, &mut report),
        "oracle" => verify_oracle(&loaded.chain, seed, &mut report),
        "martingale" => verify_martingale(&loaded.chain, seed, &mut report),
        other => {
            return Err(CliError::Input(format!(
                "unknown suite `{other}` (expected coherence, identity, oracle, or martingale)"
            )))
        }
    };
    report.line(format!(
        "suite {suite}: {}",
        if ok { "pass" } else { "FAIL" }
    ));
    let body = report.body();
    if ok {
        Ok(body)
    } else {
        // Print what we have before signalling the violation.
        print!("{body}");
        Err(CliError::Violation(format!("suite {suite} failed")))
    }
}

fn verify_coherence(chain: &ImpreciseMarkovChain64, seed: u64, report: &mut Report) -> bool {
    let mut ok = true;
    let mut sets = vec![("initial".to_string(), chain.initial().clone())];
    for (x, row) in chain.operator().rows().iter().enumerate() {
        sets.push((format!("row {}", chain.states()[x]), row.clone()));
    }
    for (i, (label, set)) in sets.iter().enumerate() {
        match set.check_coherence(1000, seed.wrapping_add(i as u64)) {
            Ok(r) => {
                let failed: Vec<&str> = r
                    .axioms
                    .iter()
                    .filter(|a| !a.passed())
                    .map(|a| a.name)
                    .collect();
                if failed.is_empty() {
                    report.line(format!(
                        "{label}: LE1-LE8 pass on {} trials (redundant vertices: {:?})",
                        r.trials, r.redundant_vertices
                    ));
                } else {
                    ok = false;
                    report.line(format!("{label}: FAILED axioms {failed:?}"));
                }
            }
            Err(e) => {
                ok = false;
                report.line(format!("{label}: error {e}"));
            }
        }
    }
    ok
}

fn verify_identity_suite(
    chain: &ImpreciseMarkovChain64,
    seed: u64,
    report: &mut Report,
) -> bool {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut max_residual = 0.0f64;
    for i in 0..100 {
        let f: Gamble64 = random::random_gamble(&mut rng, chain.dim(), -5.0, 5.0);
        let length = 1 + (i * 10) % 1000;
        let path_seed = ergodic::derive_path_seed(seed, i as u64);
        let path = match ergodic::sample_path(chain, &SelectionPolicy::RandomVertex, length, path_seed)
        {
            Ok(p) => p,
            Err(e) => {
                report.line(format!("sampling error: {e}"));
                return false;
            }
        };
        match ergodic::verify_identity(chain, &f, &path) {
            Ok(d) => max_residual = max_residual.max(d.residual.abs()),
            Err(e) => {
                report.line(format!("identity error: {e}"));
                return false;
            }
        }
    }
    report.line(format!(
        "identity: 100 seeded (gamble, path) pairs, max |residual| = {}",
        fmt_float(max_residual)
    ));
    max_residual <= 1e-10
}

fn verify_oracle(chain: &ImpreciseMarkovChain64, seed: u64, report: &mut Report) -> bool {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut max_err = 0.0f64;
    for _ in 0..100 {
        let tree: ImpreciseProbabilityTree<f64> = random::random_tree(&mut rng, 4, 3, 3, 40_000);
        let n = tree.depth();
        let f = random::random_table(&mut rng, tree.level_size(n));
        let recursion = tree
            .global_lower_expectation(&f, n, &[])
            .expect("valid inputs");
        let oracle = tree.brute_force_oracle(&f, n, &[]).expect("within budget");
        max_err = max_err.max((recursion - oracle).abs());
    }
    report.line(format!(
        "oracle: 100 seeded random trees, max |recursion - brute force| = {}",
        fmt_float(max_err)
    ));

    // The spec's chain against its own materialized tree.
    let n = if chain.dim() <= 3 { 3 } else { 2 };
    let table = random::random_table(&mut rng, chain.dim().pow(n as u32));
    let tree = ImpreciseProbabilityTree::markov(chain, n).expect("small tree");
    let via_tree = tree
        .global_lower_expectation(&table, n, &[])
        .expect("valid inputs");
    let via_chain = chain.finite_horizon_joint(n, &table).expect("small table");
    let chain_err = (via_tree - via_chain).abs();
    report.line(format!(
        "oracle: chain joint (n={n}) vs materialized tree, |difference| = {}",
        fmt_float(chain_err)
    ));
    max_err <= 1e-10 && chain_err <= 1e-12
}

fn verify_martingale(chain: &ImpreciseMarkovChain64, seed: u64, report: &mut Report) -> bool {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    // Depth capped so the materialized tree stays small.
    let mut depth = 1usize;
    let mut size = 1 + chain.dim();
    while depth < 8 && size * chain.dim() <= 2048 {
        size *= chain.dim();
        depth += 1;
    }
    let tree = match ImpreciseProbabilityTree::markov(chain, depth) {
        Ok(t) => t,
        Err(e) => {
            report.line(format!("tree error: {e}"));
            return false;
        }
    };
    let f: Gamble64 = random::random_gamble(&mut rng, chain.dim(), -3.0, 3.0);
    let delta = match ergodic::gain_difference(chain, &f) {
        Ok(d) => d,
        Err(e) => {
            report.line(format!("gain error: {e}"));
            return false;
        }
    };
    let branching = vec![chain.dim(); depth];
    let m = RealProcess::from_differences(&branching, 0.0, |s, c| delta(s).get(c));
    let sub = tree.verify_submartingale(&m).expect("shapes agree");
    report.line(format!(
        "martingale: gain process submartingale check at {} situations, {} violation(s)",
        sub.checked,
        sub.violations.len()
    ));

    let bound = f.variation_norm().max(1e-6);
    let xi = 1.0 / (4.0 * bound);
    let b = SelectorProcess::ones(&branching);
    let w = match ergodic::hoeffding_supermartingale(&tree, &m, &b, bound, xi) {
        Ok(w) => w,
        Err(e) => {
            report.line(format!("martingale: construction error {e}"));
            return false;
        }
    };
    let checks = ergodic::hoeffding_checks(&tree, &m, &b, &w, bound, xi).expect("shapes agree");
    report.line(format!(
        "martingale: test supermartingale start={} min={} supermartingale violations={} growth violations={} (qualifying {})",
        fmt_float(checks.initial_value),
        fmt_float(checks.min_value),
        checks.supermartingale.violations.len(),
        checks.growth_violations.len(),
        checks.qualifying
    ));
    sub.is_ok() && checks.all_ok()
}
