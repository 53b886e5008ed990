//! Monte Carlo harness: finite-instance recipes, a replica worker pool,
//! parameter sweeps with CSV output, the empirical phase boundary, and the
//! finite-size convergence study.
//!
//! Reproducibility contract: every replica draws from a stream derived from
//! `(master_seed, grid_index, replica_index)`, workers communicate finished
//! run records over a channel, and the aggregator assembles them by index,
//! so emitted numbers are bit-identical across reruns and worker counts.

use std::io::Write;
use std::path::Path;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::mpsc;

use serde::{Deserialize, Serialize};

use crate::chain::{run_cascade, run_chain, run_chain_lazy, ChainOptions, RunRecord};
use crate::error::{Error, Result};
use crate::phase::{
    b_asymptotic, b_exact, classify, expected_surplus, rho, trajectory_samples, AsymptoticParams,
    CurveFamily, Regime, TrajectoryExtension,
};
use crate::rng::{derive_seed, RNG_ALGORITHM_ID};
use crate::sbm::{factorial, generate_graph, sample_seeds, Community, CriticalScale, ModelParams};
use crate::strategy::{hybrid_strategy, DeterministicSchedule, Strategy};

/// How a replica is simulated.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SimMode {
    /// Materialize the graph and replay the generation cascade.
    Cascade,
    /// Materialize the graph and run the sequential chain.
    Graph,
    /// Deferred-decision chain; no edges are materialized.
    Lazy,
}

/// A finite model realized from asymptotic parameters, with its exact
/// critical scales.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct FiniteInstance {
    pub params: ModelParams,
    pub scale: CriticalScale,
}

fn solve_p_for_scale(r: u32, target_g1: f64, n1: u64) -> f64 {
    let rf = r as f64;
    (factorial(r - 1) / (n1 as f64 * (target_g1 * rf / (rf - 1.0)).powi(r as i32 - 1)))
        .powf(1.0 / rf)
}

/// Realize a two-community instance with a prescribed critical scale:
/// fix `target_g1`, `r`, `n1`; solve `p1` from the scale formula; then
/// `n2 = n1/nu`, `p2 = p1/mu`, `q = gamma p1`, `a_i = round(alpha_i g_i)`.
pub fn instantiate_point(
    family: &CurveFamily,
    alpha: (f64, f64),
    target_g1: f64,
    n1: u64,
) -> Result<FiniteInstance> {
    if !(target_g1.is_finite() && target_g1 > 0.0) || n1 == 0 {
        return Err(Error::InvalidParameter(format!(
            "instance recipe needs target_g1 > 0 and n1 >= 1, got ({target_g1}, {n1})"
        )));
    }
    if alpha.0 < 0.0 || alpha.1 < 0.0 {
        return Err(Error::InvalidParameter(format!(
            "seed fractions must be non-negative, got {alpha:?}"
        )));
    }
    let p1 = solve_p_for_scale(family.r, target_g1, n1);
    let n2 = (n1 as f64 / family.nu).round().max(1.0) as u64;
    let p2 = p1 / family.mu;
    let q = family.gamma * p1;
    for (name, p) in [("p1", p1), ("p2", p2), ("q", q)] {
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::InvalidParameter(format!(
                "recipe produced {name} = {p} outside [0, 1]; shrink target_g1 or grow n1"
            )));
        }
    }
    let mut params = ModelParams {
        n1,
        n2,
        p1,
        p2,
        q,
        r: family.r,
        a1: 0,
        a2: 0,
    };
    let scale = params.critical_scale()?;
    let a1 = (alpha.0 * scale.g1).round() as u64;
    let a2 = (alpha.1 * scale.g2).round() as u64;
    if a1 > n1 || a2 > n2 {
        return Err(Error::InvalidParameter(format!(
            "seed counts ({a1}, {a2}) exceed community sizes ({n1}, {n2})"
        )));
    }
    params.a1 = a1;
    params.a2 = a2;
    params.validate()?;
    let scale = params.critical_scale()?;
    Ok(FiniteInstance { params, scale })
}

/// [`instantiate_point`] with the seed fractions taken from `asym`.
pub fn instantiate(asym: &AsymptoticParams, target_g1: f64, n1: u64) -> Result<FiniteInstance> {
    instantiate_point(&asym.family(), (asym.alpha1, asym.alpha2), target_g1, n1)
}

/// Single-community instance (community 2 empty).
pub fn instantiate_er(r: u32, alpha1: f64, target_g1: f64, n1: u64) -> Result<FiniteInstance> {
    if !(target_g1.is_finite() && target_g1 > 0.0) || n1 == 0 {
        return Err(Error::InvalidParameter(
            "instance recipe needs target_g1 > 0 and n1 >= 1".into(),
        ));
    }
    let p1 = solve_p_for_scale(r, target_g1, n1);
    if !(0.0..=1.0).contains(&p1) {
        return Err(Error::InvalidParameter(format!(
            "recipe produced p1 = {p1} outside [0, 1]"
        )));
    }
    let mut params = ModelParams {
        n1,
        n2: 0,
        p1,
        p2: 0.0,
        q: 0.0,
        r,
        a1: 0,
        a2: 0,
    };
    let scale = params.critical_scale()?;
    params.a1 = (alpha1 * scale.g1).round() as u64;
    params.validate()?;
    let scale = params.critical_scale()?;
    Ok(FiniteInstance { params, scale })
}

/// Instance family for the n-ladder convergence study: `p1 = n1^(-(1+1/r)/2)`
/// sits mid-window, so the critical scale grows like sqrt(n1) and the
/// finite-size error terms vanish along the ladder.
pub fn ladder_instance(asym: &AsymptoticParams, n1: u64) -> Result<FiniteInstance> {
    if n1 < 2 {
        return Err(Error::InvalidParameter("ladder rung needs n1 >= 2".into()));
    }
    let r = asym.r as f64;
    let p1 = (n1 as f64).powf(-(1.0 + 1.0 / r) / 2.0);
    let n2 = (n1 as f64 / asym.nu).round().max(1.0) as u64;
    let p2 = p1 / asym.mu;
    let q = asym.gamma * p1;
    for (name, p) in [("p1", p1), ("p2", p2), ("q", q)] {
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::InvalidParameter(format!(
                "ladder rung n1 = {n1} produced {name} = {p} outside [0, 1]"
            )));
        }
    }
    let mut params = ModelParams {
        n1,
        n2,
        p1,
        p2,
        q,
        r: asym.r,
        a1: 0,
        a2: 0,
    };
    let scale = params.critical_scale()?;
    params.a1 = ((asym.alpha1 * scale.g1).round() as u64).min(n1);
    params.a2 = ((asym.alpha2 * scale.g2).round() as u64).min(n2);
    params.validate()?;
    let scale = params.critical_scale()?;
    Ok(FiniteInstance { params, scale })
}

/// Resolve a strategy by name. The hybrid strategy derives its schedule from
/// the asymptotic trajectory at the instance's realized scales; the schedule
/// is extended past the balance curve except in the sub-critical regime,
/// where the curve itself is the whole construction.
pub fn resolve_strategy(
    name: &str,
    instance: &FiniteInstance,
    asym: Option<&AsymptoticParams>,
) -> Result<Strategy> {
    match name {
        "max" => Ok(Strategy::Max),
        "roundrobin" => Ok(Strategy::RoundRobin),
        "hybrid" => {
            let asym = asym.ok_or_else(|| {
                Error::Config("strategy 'hybrid' needs asymptotic parameters".into())
            })?;
            let diagnosis = classify(asym);
            let extend = match diagnosis.regime {
                Regime::Sub => None,
                _ => Some(TrajectoryExtension {
                    target_steps: instance.params.n() + 8,
                    capacity: Some((
                        instance.params.n1 as f64 / instance.scale.g1,
                        instance.params.n2 as f64 / instance.scale.g2.max(f64::MIN_POSITIVE),
                    )),
                    theta0: None,
                }),
            };
            let samples =
                trajectory_samples(asym, instance.scale.g1, instance.scale.g2, extend)?;
            let schedule =
                DeterministicSchedule::build(instance.scale.g1, instance.scale.g2, &samples)?;
            Ok(hybrid_strategy(schedule))
        }
        other => Err(Error::Config(format!(
            "unknown strategy '{other}' (expected max | roundrobin | hybrid)"
        ))),
    }
}

fn run_one(
    params: &ModelParams,
    mode: SimMode,
    strategy: &Strategy,
    seed: u64,
    opts: &ChainOptions,
) -> Result<RunRecord> {
    match mode {
        SimMode::Lazy => run_chain_lazy(
            params,
            (params.a1, params.a2),
            strategy,
            derive_seed(seed, &[2]),
            opts,
        ),
        SimMode::Graph => {
            let graph = generate_graph(params, derive_seed(seed, &[0]))?;
            let seeds = sample_seeds(params, derive_seed(seed, &[1]))?;
            run_chain(
                &graph,
                &seeds,
                params.r,
                strategy,
                derive_seed(seed, &[2]),
                opts,
            )
        }
        SimMode::Cascade => {
            let graph = generate_graph(params, derive_seed(seed, &[0]))?;
            let seeds = sample_seeds(params, derive_seed(seed, &[1]))?;
            Ok(run_cascade(&graph, &seeds, params.r))
        }
    }
}

fn effective_workers(requested: usize, replicas: u64) -> usize {
    let auto = std::thread::available_parallelism()
        .map(|n| n.get())
        .unwrap_or(1);
    let w = if requested == 0 { auto } else { requested };
    w.clamp(1, replicas.max(1) as usize)
}

/// Run `replicas` independent simulations in parallel. Replica `k` draws
/// from the stream derived from `(master_seed, grid_index, k)`; workers send
/// finished records to the aggregating caller thread, which orders them by
/// replica index, so the output is independent of scheduling.
#[allow(clippy::too_many_arguments)]
pub fn run_replicas(
    params: &ModelParams,
    mode: SimMode,
    strategy: &Strategy,
    replicas: u64,
    master_seed: u64,
    grid_index: u64,
    workers: usize,
    opts: &ChainOptions,
) -> Vec<Result<RunRecord>> {
    let workers = effective_workers(workers, replicas);
    let next = AtomicU64::new(0);
    let (tx, rx) = mpsc::channel::<(u64, Result<RunRecord>)>();
    let mut slots: Vec<Option<Result<RunRecord>>> = (0..replicas).map(|_| None).collect();
    std::thread::scope(|scope| {
        for _ in 0..workers {
            let tx = tx.clone();
            let next = &next;
            scope.spawn(move || loop {
                let k = next.fetch_add(1, Ordering::Relaxed);
                if k >= replicas {
                    break;
                }
                let seed = derive_seed(master_seed, &[grid_index, k]);
                let record = run_one(params, mode, strategy, seed, opts);
                if tx.send((k, record)).is_err() {
                    break;
                }
            });
        }
        drop(tx);
        for (k, record) in rx {
            slots[k as usize] = Some(record);
        }
    });
    slots
        .into_iter()
        .map(|s| s.expect("every replica reports"))
        .collect()
}

// ---------------------------------------------------------------------------
// Config-driven sweeps
// ---------------------------------------------------------------------------

fn default_nu() -> f64 {
    1.0
}

/// Asymptotic parameter block of a config file.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AsymSpec {
    pub r: u32,
    pub gamma: f64,
    #[serde(default = "default_nu")]
    pub nu: f64,
    #[serde(default = "default_nu")]
    pub mu: f64,
    /// Base seed fractions; required unless the grid sweeps alpha.
    #[serde(default)]
    pub alpha1: Option<f64>,
    #[serde(default)]
    pub alpha2: Option<f64>,
}

fn default_target_g1() -> f64 {
    100.0
}

fn default_n1() -> u64 {
    200_000
}

/// Finite-instance recipe block.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FiniteSpec {
    #[serde(default = "default_target_g1")]
    pub target_g1: f64,
    #[serde(default = "default_n1")]
    pub n1: u64,
}

impl Default for FiniteSpec {
    fn default() -> Self {
        FiniteSpec {
            target_g1: default_target_g1(),
            n1: default_n1(),
        }
    }
}

/// What varies across grid points.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum GridSpec {
    /// A single point at the base parameters.
    Point,
    /// Cartesian product of seed-fraction values.
    Alpha { alpha1: Vec<f64>, alpha2: Vec<f64> },
    Gamma { values: Vec<f64> },
    R { values: Vec<u32> },
    Nu { values: Vec<f64> },
    Mu { values: Vec<f64> },
}

fn default_replicas() -> u64 {
    200
}

fn default_strategy() -> String {
    "max".into()
}

fn default_mode() -> SimMode {
    SimMode::Lazy
}

fn default_threshold() -> f64 {
    0.95
}

fn default_stride() -> u64 {
    crate::chain::DEFAULT_TRAJECTORY_STRIDE
}

/// A config-driven experiment; JSON schema documented in the repository
/// README.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub name: String,
    pub asym: AsymSpec,
    #[serde(default)]
    pub finite: FiniteSpec,
    pub grid: GridSpec,
    #[serde(default = "default_replicas")]
    pub replicas: u64,
    #[serde(default)]
    pub master_seed: u64,
    #[serde(default = "default_strategy")]
    pub strategy: String,
    #[serde(default = "default_mode")]
    pub mode: SimMode,
    /// A replica "percolates" when `final_active / n` reaches this fraction.
    #[serde(default = "default_threshold")]
    pub percolation_threshold: f64,
    /// 0 = auto (available parallelism).
    #[serde(default)]
    pub workers: usize,
    #[serde(default)]
    pub record_trajectory: bool,
    #[serde(default = "default_stride")]
    pub trajectory_stride: u64,
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: ExperimentConfig = serde_json::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.replicas == 0 {
            return Err(Error::Config("replicas must be >= 1".into()));
        }
        if !(0.0..=1.0).contains(&self.percolation_threshold) {
            return Err(Error::Config(
                "percolation_threshold must lie in [0, 1]".into(),
            ));
        }
        match &self.grid {
            GridSpec::Alpha { alpha1, alpha2 } => {
                if alpha1.is_empty() || alpha2.is_empty() {
                    return Err(Error::Config("alpha grid must be non-empty".into()));
                }
                for &a in alpha1.iter().chain(alpha2.iter()) {
                    if !(0.0..=1.5).contains(&a) {
                        return Err(Error::Config(format!(
                            "alpha grid value {a} outside [0, 1.5]"
                        )));
                    }
                }
            }
            GridSpec::Point
            | GridSpec::Gamma { .. }
            | GridSpec::R { .. }
            | GridSpec::Nu { .. }
            | GridSpec::Mu { .. } => {
                if self.asym.alpha1.is_none() || self.asym.alpha2.is_none() {
                    return Err(Error::Config(
                        "this grid kind needs base alpha1/alpha2 in the asym block".into(),
                    ));
                }
            }
        }
        Ok(())
    }

    fn chain_options(&self) -> ChainOptions {
        if self.record_trajectory {
            ChainOptions::with_trajectory(self.trajectory_stride)
        } else {
            ChainOptions::default()
        }
    }

    /// Enumerate grid points as raw parameter tuples.
    pub fn grid_points(&self) -> Result<Vec<GridPoint>> {
        let base = &self.asym;
        let mut out = Vec::new();
        let base_alpha = || (base.alpha1.unwrap_or(0.0), base.alpha2.unwrap_or(0.0));
        match &self.grid {
            GridSpec::Point => {
                out.push(GridPoint::new(
                    CurveFamily {
                        r: base.r,
                        gamma: base.gamma,
                        nu: base.nu,
                        mu: base.mu,
                    },
                    base_alpha(),
                ));
            }
            GridSpec::Alpha { alpha1, alpha2 } => {
                for &a1 in alpha1 {
                    for &a2 in alpha2 {
                        out.push(GridPoint::new(
                            CurveFamily {
                                r: base.r,
                                gamma: base.gamma,
                                nu: base.nu,
                                mu: base.mu,
                            },
                            (a1, a2),
                        ));
                    }
                }
            }
            GridSpec::Gamma { values } => {
                for &g in values {
                    out.push(GridPoint::new(
                        CurveFamily {
                            r: base.r,
                            gamma: g,
                            nu: base.nu,
                            mu: base.mu,
                        },
                        base_alpha(),
                    ));
                }
            }
            GridSpec::R { values } => {
                for &r in values {
                    out.push(GridPoint::new(
                        CurveFamily {
                            r,
                            gamma: base.gamma,
                            nu: base.nu,
                            mu: base.mu,
                        },
                        base_alpha(),
                    ));
                }
            }
            GridSpec::Nu { values } => {
                for &nu in values {
                    out.push(GridPoint::new(
                        CurveFamily {
                            r: base.r,
                            gamma: base.gamma,
                            nu,
                            mu: base.mu,
                        },
                        base_alpha(),
                    ));
                }
            }
            GridSpec::Mu { values } => {
                for &mu in values {
                    out.push(GridPoint::new(
                        CurveFamily {
                            r: base.r,
                            gamma: base.gamma,
                            nu: base.nu,
                            mu,
                        },
                        base_alpha(),
                    ));
                }
            }
        }
        Ok(out)
    }
}

/// One grid point of a sweep.
#[derive(Clone, Debug)]
pub struct GridPoint {
    pub family: CurveFamily,
    pub alpha: (f64, f64),
}

impl GridPoint {
    fn new(family: CurveFamily, alpha: (f64, f64)) -> Self {
        GridPoint { family, alpha }
    }

    /// Asymptotic parameters, when the seed fractions admit them
    /// (`max(alpha) > 0`).
    pub fn asym(&self) -> Option<AsymptoticParams> {
        AsymptoticParams::new(
            self.family.nu,
            self.family.mu,
            self.family.gamma,
            self.family.r,
            self.alpha.0,
            self.alpha.1,
        )
        .ok()
    }
}

/// Aggregated statistics of one grid point.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SweepRow {
    pub index: usize,
    pub r: u32,
    pub gamma: f64,
    pub nu: f64,
    pub mu: f64,
    pub alpha1: f64,
    pub alpha2: f64,
    pub n: u64,
    pub g1: f64,
    pub replicas: u64,
    pub failures: u64,
    /// Fraction of replicas with `final_active / n >= threshold`.
    pub percolation_probability: f64,
    /// Mean of `final_active / g1`.
    pub mean_ratio: f64,
    pub q25: f64,
    pub median: f64,
    pub q75: f64,
    pub predicted_regime: Option<Regime>,
    pub predicted_final_size_limit: Option<f64>,
}

/// Full sweep output, ordered by grid index.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SweepResult {
    pub rows: Vec<SweepRow>,
}

fn quantile(sorted: &[f64], p: f64) -> f64 {
    if sorted.is_empty() {
        return f64::NAN;
    }
    let pos = (sorted.len() - 1) as f64 * p;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    let frac = pos - lo as f64;
    sorted[lo] * (1.0 - frac) + sorted[hi] * frac
}

const SWEEP_CSV_HEADER: &str = "index,r,gamma,nu,mu,alpha1,alpha2,n,g1,statistic,value";

fn write_sweep_rows<W: Write + ?Sized>(w: &mut W, row: &SweepRow) -> std::io::Result<()> {
    let prefix = format!(
        "{},{},{},{},{},{},{},{},{}",
        row.index, row.r, row.gamma, row.nu, row.mu, row.alpha1, row.alpha2, row.n, row.g1
    );
    writeln!(
        w,
        "{prefix},percolation_probability,{}",
        row.percolation_probability
    )?;
    writeln!(w, "{prefix},mean_ratio,{}", row.mean_ratio)?;
    writeln!(w, "{prefix},q25,{}", row.q25)?;
    writeln!(w, "{prefix},median,{}", row.median)?;
    writeln!(w, "{prefix},q75,{}", row.q75)?;
    writeln!(w, "{prefix},failures,{}", row.failures)?;
    writeln!(
        w,
        "{prefix},predicted_regime,{}",
        row.predicted_regime.map(|r| r.to_string()).unwrap_or_default()
    )?;
    if let Some(x) = row.predicted_final_size_limit {
        writeln!(w, "{prefix},predicted_final_size_limit,{x}")?;
    }
    Ok(())
}

/// Run the configured sweep; when `csv` is given, rows stream to it as each
/// grid point completes (one CSV row per grid point per statistic).
pub fn run_experiment_streaming(
    config: &ExperimentConfig,
    mut csv: Option<&mut dyn Write>,
) -> Result<SweepResult> {
    config.validate()?;
    let points = config.grid_points()?;
    let opts = config.chain_options();
    if let Some(w) = csv.as_deref_mut() {
        writeln!(w, "{SWEEP_CSV_HEADER}").map_err(|e| Error::io("<csv>", e))?;
    }
    let mut rows = Vec::with_capacity(points.len());
    for (index, point) in points.iter().enumerate() {
        let instance = instantiate_point(
            &point.family,
            point.alpha,
            config.finite.target_g1,
            config.finite.n1,
        )?;
        let asym = point.asym();
        let strategy = resolve_strategy(&config.strategy, &instance, asym.as_ref())?;
        let records = run_replicas(
            &instance.params,
            config.mode,
            &strategy,
            config.replicas,
            config.master_seed,
            index as u64,
            config.workers,
            &opts,
        );
        let n = instance.params.n();
        let mut ratios: Vec<f64> = Vec::with_capacity(records.len());
        let mut percolated = 0u64;
        let mut failures = 0u64;
        for rec in &records {
            match rec {
                Ok(r) => {
                    ratios.push(r.final_active as f64 / instance.scale.g1);
                    if r.final_active as f64 / n as f64 >= config.percolation_threshold {
                        percolated += 1;
                    }
                }
                Err(_) => failures += 1,
            }
        }
        ratios.sort_by(f64::total_cmp);
        let completed = ratios.len() as f64;
        let diagnosis = asym.as_ref().map(classify);
        let row = SweepRow {
            index,
            r: point.family.r,
            gamma: point.family.gamma,
            nu: point.family.nu,
            mu: point.family.mu,
            alpha1: point.alpha.0,
            alpha2: point.alpha.1,
            n,
            g1: instance.scale.g1,
            replicas: config.replicas,
            failures,
            percolation_probability: if completed > 0.0 {
                percolated as f64 / completed
            } else {
                0.0
            },
            mean_ratio: if completed > 0.0 {
                ratios.iter().sum::<f64>() / completed
            } else {
                f64::NAN
            },
            q25: quantile(&ratios, 0.25),
            median: quantile(&ratios, 0.5),
            q75: quantile(&ratios, 0.75),
            predicted_regime: diagnosis.as_ref().map(|d| d.regime),
            predicted_final_size_limit: diagnosis
                .as_ref()
                .and_then(|d| d.fixed_point.map(|f| f.final_size_limit)),
        };
        if let Some(w) = csv.as_deref_mut() {
            write_sweep_rows(w, &row).map_err(|e| Error::io("<csv>", e))?;
        }
        rows.push(row);
    }
    Ok(SweepResult { rows })
}

pub fn run_experiment(config: &ExperimentConfig) -> Result<SweepResult> {
    run_experiment_streaming(config, None)
}

/// Empirical percolation-probability surface over an alpha grid, plus the
/// interpolated 50% contour for overlay against the analytic critical curve.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct BoundaryResult {
    /// `(alpha1, alpha2, percolation_probability)` per grid point.
    pub surface: Vec<(f64, f64, f64)>,
    /// `(alpha1, alpha2)` where the probability crosses 1/2.
    pub contour: Vec<(f64, f64)>,
}

pub fn empirical_phase_boundary(config: &ExperimentConfig) -> Result<BoundaryResult> {
    let GridSpec::Alpha { alpha1, alpha2 } = &config.grid else {
        return Err(Error::Config(
            "empirical phase boundary needs an alpha grid".into(),
        ));
    };
    let mut alpha2_sorted = alpha2.clone();
    alpha2_sorted.sort_by(f64::total_cmp);
    let sweep = run_experiment(config)?;
    let surface: Vec<(f64, f64, f64)> = sweep
        .rows
        .iter()
        .map(|r| (r.alpha1, r.alpha2, r.percolation_probability))
        .collect();
    let mut contour = Vec::new();
    for &a1 in alpha1 {
        // grid order is alpha1-major, alpha2 in config order; re-collect
        let mut column: Vec<(f64, f64)> = surface
            .iter()
            .filter(|(x1, _, _)| *x1 == a1)
            .map(|&(_, x2, p)| (x2, p))
            .collect();
        column.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut crossing = None;
        for w in column.windows(2) {
            let ((x2a, pa), (x2b, pb)) = (w[0], w[1]);
            if pa < 0.5 && pb >= 0.5 {
                let t = (0.5 - pa) / (pb - pa);
                crossing = Some(x2a + t * (x2b - x2a));
                break;
            }
        }
        if crossing.is_none() {
            if let Some(&(x2, p)) = column.first() {
                if p >= 0.5 {
                    crossing = Some(x2);
                }
            }
        }
        if let Some(x2) = crossing {
            contour.push((a1, x2));
        }
    }
    Ok(BoundaryResult { surface, contour })
}

/// One rung of the convergence study at rescaled used counts `x`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ConvergenceRow {
    pub n1: u64,
    pub g1: f64,
    pub g2: f64,
    /// `|R_i(floor(x g)) / g_i - rho_i(x)|` per community.
    pub surplus_error: [f64; 2],
    /// `b_exact / b_asymptotic` per community.
    pub tail_ratio: [f64; 2],
}

/// Finite-size convergence of the expected surplus and of the activation
/// probability toward their scaling limits, along an n-ladder.
pub fn convergence_study(
    asym: &AsymptoticParams,
    x: (f64, f64),
    ladder: &[u64],
) -> Result<Vec<ConvergenceRow>> {
    let chi = asym.chi();
    let mut rows = Vec::with_capacity(ladder.len());
    for &n1 in ladder {
        let instance = ladder_instance(asym, n1)?;
        let scale = &instance.scale;
        let u = (
            (x.0 * scale.g1).floor() as u64,
            (x.1 * scale.g2).floor() as u64,
        );
        let (rho1, rho2) = rho(asym, &chi, x);
        let limits = [rho1, rho2];
        let mut surplus_error = [0.0f64; 2];
        let mut tail_ratio = [0.0f64; 2];
        for (i, c) in Community::BOTH.into_iter().enumerate() {
            let g_i = scale.g(c);
            surplus_error[i] = (expected_surplus(&instance.params, u, c) / g_i - limits[i]).abs();
            let exact = b_exact(&instance.params, u, c);
            let approx = b_asymptotic(&instance.params, x, c)?;
            tail_ratio[i] = if approx > 0.0 { exact / approx } else { f64::NAN };
        }
        rows.push(ConvergenceRow {
            n1,
            g1: scale.g1,
            g2: scale.g2,
            surplus_error,
            tail_ratio,
        });
    }
    Ok(rows)
}

// ---------------------------------------------------------------------------
// Presets and manifests
// ---------------------------------------------------------------------------

/// Named parameter presets for one-command reproduction of the reference
/// phase diagrams.
pub mod presets {
    use super::*;

    /// The three two-community reference points on the symmetric
    /// `chi = 0.6` family (regimes Sub / Crit-adjacent / Sup).
    pub fn figure_point(name: &str) -> Option<(CurveFamily, (f64, f64))> {
        let family = CurveFamily {
            r: 2,
            gamma: 0.6,
            nu: 1.0,
            mu: 1.0,
        };
        match name {
            "fig1" => Some((family, (0.56, 0.10))),
            "fig2" => Some((family, (0.60, 0.175))),
            "fig3" => Some((family, (0.60, 0.40))),
            _ => None,
        }
    }

    /// Critical-curve families varying one parameter around the baseline
    /// `r = 2, gamma = 0.25, nu = mu = 1`.
    pub fn curve_family_sweep(name: &str) -> Option<Vec<CurveFamily>> {
        let base = CurveFamily {
            r: 2,
            gamma: 0.25,
            nu: 1.0,
            mu: 1.0,
        };
        let out = match name {
            "gammavary" => [0.25, 0.5, 1.0, 2.0, 4.0]
                .iter()
                .map(|&gamma| CurveFamily { gamma, ..base })
                .collect(),
            "rvary" => [2u32, 3, 4, 5]
                .iter()
                .map(|&r| CurveFamily { r, ..base })
                .collect(),
            "nuvary" => [1.0, 2.0, 4.0, 8.0]
                .iter()
                .map(|&nu| CurveFamily { nu, ..base })
                .collect(),
            "muvary" => [1.0, 2.0, 4.0, 8.0]
                .iter()
                .map(|&mu| CurveFamily { mu, ..base })
                .collect(),
            _ => return None,
        };
        Some(out)
    }
}

fn fnv1a64(bytes: &[u8]) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for &b in bytes {
        h ^= u64::from(b);
        h = h.wrapping_mul(0x100_0000_01b3);
    }
    h
}

/// Stable hex digest of the canonical JSON form of a config.
pub fn config_hash_hex(config: &ExperimentConfig) -> String {
    let text = serde_json::to_string(config).expect("config serializes");
    format!("{:016x}", fnv1a64(text.as_bytes()))
}

/// Reproducibility manifest written next to sweep outputs.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RunManifest {
    pub name: String,
    pub config_hash: String,
    pub rng_algorithm: String,
    pub code_version: String,
    pub master_seed: u64,
    pub grid_points: usize,
    pub config: ExperimentConfig,
}

impl RunManifest {
    pub fn new(config: &ExperimentConfig, grid_points: usize) -> Self {
        RunManifest {
            name: config.name.clone(),
            config_hash: config_hash_hex(config),
            rng_algorithm: RNG_ALGORITHM_ID.to_string(),
            code_version: env!("CARGO_PKG_VERSION").to_string(),
            master_seed: config.master_seed,
            grid_points,
            config: config.clone(),
        }
    }
}

/// Write the manifest as pretty JSON.
pub fn write_manifest(path: &Path, config: &ExperimentConfig, grid_points: usize) -> Result<()> {
    let manifest = RunManifest::new(config, grid_points);
    let text = serde_json::to_string_pretty(&manifest)?;
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}
