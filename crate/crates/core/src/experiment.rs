//! Seeded, replicated experiments driven by a JSON config, and their
//! reports.
//!
//! Replica `r` of a run with seed `s` uses seed `s + r`. Replicas run on a
//! pool of worker threads and are folded in replica order, so a report
//! depends only on its config (apart from the wall-clock field).

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::dimension::pushforward_set;
use crate::dimension::{
    box_dimension_1d, box_dimension_2d, BoxCountConfig, BoxCountResult, WindowPolicy,
};
use crate::error::{LabError, Result};
use crate::fractal::CantorSpec;
use crate::gmc::{chaos_profile, quantum_box_config, sample_log_field};
use crate::kpz::{known_dimensions, phi, phi_via_psi, psi_inverse, Gamma, Kappa};
use crate::loewner::{sample_driving, trace, trace_refined, zip_set, SlitChain};
use crate::stochastic::{
    ancestor_free_times, hitting_time_subordinator, sparse_set_config, stable_subordinator,
};

pub const IDENTITY_KAPPAS: [f64; 10] = [
    0.5,
    1.0,
    2.0,
    8.0 / 3.0,
    3.0,
    5.0,
    6.0,
    7.0,
    16.0 / 3.0,
    32.0,
];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "experiment", rename_all = "kebab-case")]
pub enum Experiment {
    FormulaIdentities(FormulaParams),
    ZipCantor(ZipParams),
    TraceDim(TraceParams),
    GmcKpz(GmcParams),
    Subordinator(SubordinatorParams),
    AncestorFree(AncestorParams),
}

impl Experiment {
    pub fn name(&self) -> &'static str {
        match self {
            Experiment::FormulaIdentities(_) => "formula-identities",
            Experiment::ZipCantor(_) => "zip-cantor",
            Experiment::TraceDim(_) => "trace-dim",
            Experiment::GmcKpz(_) => "gmc-kpz",
            Experiment::Subordinator(_) => "subordinator",
            Experiment::AncestorFree(_) => "ancestor-free",
        }
    }

    pub fn default_tolerance(&self) -> f64 {
        match self {
            Experiment::FormulaIdentities(_) => 1e-10,
            Experiment::ZipCantor(_) => 0.12,
            Experiment::TraceDim(_) | Experiment::AncestorFree(_) => 0.1,
            Experiment::GmcKpz(_) | Experiment::Subordinator(_) => 0.08,
        }
    }
}

fn default_grid() -> usize {
    1000
}

fn default_identity_kappas() -> Vec<f64> {
    IDENTITY_KAPPAS.to_vec()
}

fn default_cantor() -> CantorSpec {
    CantorSpec::middle_thirds(10)
}

fn default_n_steps() -> usize {
    100_000
}

fn default_t_final() -> f64 {
    1.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FormulaParams {
    #[serde(default = "default_grid")]
    pub grid: usize,
    #[serde(default = "default_identity_kappas")]
    pub kappas: Vec<f64>,
}

impl Default for FormulaParams {
    fn default() -> Self {
        FormulaParams {
            grid: default_grid(),
            kappas: default_identity_kappas(),
        }
    }
}

/// Zip a Cantor set, scaled to `fill` times the zipped window, onto the
/// curve.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ZipParams {
    pub kappa: f64,
    #[serde(default = "default_cantor")]
    pub spec: CantorSpec,
    #[serde(default = "default_n_steps")]
    pub n_steps: usize,
    #[serde(default = "default_t_final")]
    pub t_final: f64,
    #[serde(default = "ZipParams::default_fill")]
    pub fill: f64,
}

impl ZipParams {
    fn default_fill() -> f64 {
        0.9
    }
}

/// Box dimension of the trace, sampled with gaps below `max_gap` times the
/// diagonal of a coarse `initial`-point trace.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceParams {
    pub kappa: f64,
    #[serde(default = "default_n_steps")]
    pub n_steps: usize,
    #[serde(default = "default_t_final")]
    pub t_final: f64,
    #[serde(default = "TraceParams::default_initial")]
    pub initial: usize,
    #[serde(default = "TraceParams::default_max_gap")]
    pub max_gap: f64,
    #[serde(default = "TraceParams::default_max_points")]
    pub max_points: usize,
}

impl TraceParams {
    fn default_initial() -> usize {
        512
    }

    fn default_max_gap() -> f64 {
        0.0015
    }

    fn default_max_points() -> usize {
        200_000
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GmcParams {
    pub gamma: f64,
    #[serde(default = "default_cantor")]
    pub spec: CantorSpec,
    #[serde(default = "GmcParams::default_levels")]
    pub levels: u32,
}

impl GmcParams {
    fn default_levels() -> u32 {
        16
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Sampler {
    /// First passages of a Brownian motion; index 1/2 only.
    HittingTime,
    Stable,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SubordinatorParams {
    pub alpha: f64,
    #[serde(default = "default_cantor")]
    pub spec: CantorSpec,
    #[serde(default = "SubordinatorParams::default_sampler")]
    pub sampler: Sampler,
}

impl SubordinatorParams {
    fn default_sampler() -> Sampler {
        Sampler::Stable
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AncestorParams {
    pub kappa: f64,
    #[serde(default = "AncestorParams::default_n_steps")]
    pub n_steps: usize,
}

impl AncestorParams {
    fn default_n_steps() -> usize {
        1_000_000
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    #[serde(flatten)]
    pub experiment: Experiment,
    #[serde(default = "ExperimentConfig::default_replicas")]
    pub replicas: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tolerance: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub workers: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<PathBuf>,
}

impl ExperimentConfig {
    fn default_replicas() -> usize {
        1
    }

    pub fn new(experiment: Experiment, replicas: usize, seed: u64) -> Self {
        ExperimentConfig {
            experiment,
            replicas,
            seed,
            tolerance: None,
            workers: None,
            output: None,
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let config: ExperimentConfig = serde_json::from_str(text).map_err(|e| {
            let field = match e.classify() {
                serde_json::error::Category::Data => "config",
                _ => "json",
            };
            LabError::config(field, e.to_string())
        })?;
        config.validate()?;
        Ok(config)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        ExperimentConfig::from_json(&fs::read_to_string(path)?)
    }

    pub fn tolerance(&self) -> f64 {
        self.tolerance
            .unwrap_or_else(|| self.experiment.default_tolerance())
    }

    pub fn validate(&self) -> Result<()> {
        let field = |name: &str, e: LabError| LabError::config(name, e.to_string());
        if let Some(t) = self.tolerance {
            if !(t > 0.0 && t.is_finite()) {
                return Err(LabError::config("tolerance", "must be positive"));
            }
        }
        if self.workers == Some(0) {
            return Err(LabError::config("workers", "must be at least 1"));
        }
        let monte_carlo = !matches!(self.experiment, Experiment::FormulaIdentities(_));
        if monte_carlo && self.replicas < 1 {
            return Err(LabError::config("replicas", "must be at least 1"));
        }
        match &self.experiment {
            Experiment::FormulaIdentities(p) => {
                if p.grid < 2 {
                    return Err(LabError::config("grid", "need at least 2 points"));
                }
                for &k in &p.kappas {
                    Kappa::new(k).map_err(|e| field("kappas", e))?;
                }
            }
            Experiment::ZipCantor(p) => {
                Kappa::new(p.kappa).map_err(|e| field("kappa", e))?;
                check_steps(p.n_steps, p.t_final)?;
                if !(p.fill > 0.0 && p.fill <= 1.0) {
                    return Err(LabError::config("fill", "must lie in (0, 1]"));
                }
            }
            Experiment::TraceDim(p) => {
                Kappa::new(p.kappa).map_err(|e| field("kappa", e))?;
                check_steps(p.n_steps, p.t_final)?;
                if p.initial == 0 || p.initial > p.n_steps {
                    return Err(LabError::config("initial", "must lie in [1, n_steps]"));
                }
                if !(p.max_gap > 0.0 && p.max_gap < 1.0) {
                    return Err(LabError::config("max_gap", "must lie in (0, 1)"));
                }
            }
            Experiment::GmcKpz(p) => {
                Gamma::new(p.gamma).map_err(|e| field("gamma", e))?;
                if !(4..=24).contains(&p.levels) {
                    return Err(LabError::config("levels", "must lie in [4, 24]"));
                }
            }
            Experiment::Subordinator(p) => {
                if !(p.alpha > 0.0 && p.alpha < 1.0) {
                    return Err(LabError::config("alpha", "must lie in (0, 1)"));
                }
                if p.sampler == Sampler::HittingTime && p.alpha != 0.5 {
                    return Err(LabError::config(
                        "sampler",
                        "hitting-time sampler has index 1/2",
                    ));
                }
            }
            Experiment::AncestorFree(p) => {
                let k = Kappa::new(p.kappa).map_err(|e| field("kappa", e))?;
                known_dimensions(k)
                    .ancestor_free()
                    .map_err(|e| field("kappa", e))?;
                if p.n_steps < crate::stochastic::MIN_ANCESTOR_STEPS {
                    return Err(LabError::config("n_steps", "must be at least 100000"));
                }
            }
        }
        Ok(())
    }
}

fn check_steps(n_steps: usize, t_final: f64) -> Result<()> {
    if n_steps == 0 {
        return Err(LabError::config("n_steps", "must be at least 1"));
    }
    if !(t_final > 0.0 && t_final.is_finite()) {
        return Err(LabError::config("t_final", "must be positive"));
    }
    Ok(())
}

/// Theoretical value an experiment is compared against. Uses only the
/// formulas and the exact dimension of the input set.
pub fn prediction(experiment: &Experiment) -> Result<Option<f64>> {
    Ok(Some(match experiment {
        Experiment::FormulaIdentities(_) => return Ok(None),
        Experiment::ZipCantor(p) => {
            phi(Kappa::new(p.kappa)?, p.spec.exact_dimension().value())?.value()
        }
        Experiment::TraceDim(p) => known_dimensions(Kappa::new(p.kappa)?).curve_dim(),
        Experiment::GmcKpz(p) => {
            psi_inverse(Gamma::new(p.gamma)?, p.spec.exact_dimension().value())?.value()
        }
        Experiment::Subordinator(p) => p.alpha * p.spec.exact_dimension().value(),
        Experiment::AncestorFree(p) => known_dimensions(Kappa::new(p.kappa)?).ancestor_free()?,
    }))
}

/// Box-count settings for zipped Cantor sets.
pub fn zip_box_config() -> BoxCountConfig {
    BoxCountConfig::relative(0.125, 1e-5).with_window(WindowPolicy::Unsaturated { max_fill: 0.3 })
}

/// Box-count settings for a trace refined to gaps of `max_gap` (relative to
/// the diagonal).
pub fn trace_box_config(max_gap: f64) -> BoxCountConfig {
    BoxCountConfig::relative(0.25, 3.0 * max_gap)
}

fn diagonal(points: &[num_complex::Complex64]) -> f64 {
    let (lo, hi) = crate::dimension::bounds(points);
    (hi - lo).norm()
}

/// One replica's box-count fit.
pub fn replica_fit(experiment: &Experiment, seed: u64) -> Result<BoxCountResult> {
    match experiment {
        Experiment::FormulaIdentities(_) => {
            Err(LabError::domain("formula identities have no replicas"))
        }
        Experiment::ZipCantor(p) => {
            let path = sample_driving(Kappa::new(p.kappa)?, p.t_final, p.n_steps, seed)?;
            let chain = SlitChain::reverse(&path);
            let (_, right) = chain.zipped_window();
            let scale = p.fill * right;
            let ys: Vec<f64> = p
                .spec
                .discretize()?
                .into_iter()
                .map(|y| y * scale)
                .collect();
            let cloud = zip_set(&chain, &ys)?;
            box_dimension_2d(&cloud.points, zip_box_config())
        }
        Experiment::TraceDim(p) => {
            let path = sample_driving(Kappa::new(p.kappa)?, p.t_final, p.n_steps, seed)?;
            let chain = SlitChain::reverse(&path);
            let coarse = trace(&chain, p.initial)?;
            let gap = p.max_gap * diagonal(&coarse.points);
            let cloud = trace_refined(&chain, p.initial, gap, p.max_points)?;
            box_dimension_2d(&cloud.points, trace_box_config(p.max_gap))
        }
        Experiment::GmcKpz(p) => {
            let ys = p.spec.discretize()?;
            let field = sample_log_field(p.levels, seed)?;
            let profile = chaos_profile(&field, Gamma::new(p.gamma)?);
            box_dimension_1d(&pushforward_set(&profile.grid, &ys)?, quantum_box_config())
        }
        Experiment::Subordinator(p) => {
            let ys = p.spec.discretize()?;
            let path = match p.sampler {
                Sampler::HittingTime => hitting_time_subordinator(&ys, seed)?,
                Sampler::Stable => stable_subordinator(p.alpha, &ys, seed)?,
            };
            box_dimension_1d(path.values(), sparse_set_config())
        }
        Experiment::AncestorFree(p) => {
            ancestor_free_times(Kappa::new(p.kappa)?, p.n_steps, seed)?.dimension()
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReplicaOutcome {
    pub index: usize,
    pub seed: u64,
    pub estimate: Option<f64>,
    pub fit_stderr: Option<f64>,
    pub error: Option<String>,
}

/// Points of one replica's log-log regression.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Regression {
    pub replica: usize,
    pub log_inv_scale: Vec<f64>,
    pub log_count: Vec<f64>,
    /// Half-open index range of the points used in the fit.
    pub window: (usize, usize),
    pub slope: f64,
    pub intercept: f64,
}

impl Regression {
    fn from_fit(replica: usize, fit: &BoxCountResult) -> Self {
        Regression {
            replica,
            log_inv_scale: fit.scales.iter().map(|e| -e.ln()).collect(),
            log_count: fit.counts.iter().map(|&c| (c as f64).ln()).collect(),
            window: fit.window,
            slope: fit.slope,
            intercept: fit.intercept(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FormulaCheck {
    pub name: String,
    /// Largest absolute error over the grid; `None` if the formula could
    /// not be evaluated.
    pub max_error: Option<f64>,
    pub tolerance: f64,
    pub pass: bool,
    /// Whether this check counts towards the overall verdict.
    pub gate: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub config: ExperimentConfig,
    pub prediction: Option<f64>,
    pub tolerance: f64,
    pub replicas: Vec<ReplicaOutcome>,
    pub mean: Option<f64>,
    pub stderr: Option<f64>,
    pub pass: bool,
    pub regression: Option<Regression>,
    pub checks: Vec<FormulaCheck>,
    pub wall_clock_seconds: f64,
}

fn check(
    name: &str,
    errors: impl IntoIterator<Item = Result<f64>>,
    tolerance: f64,
) -> FormulaCheck {
    let mut worst = 0.0f64;
    let mut failure = None;
    for e in errors {
        match e {
            Ok(e) if e.is_finite() => worst = worst.max(e.abs()),
            Ok(e) => failure = Some(format!("non-finite error {e}")),
            Err(err) => {
                failure.get_or_insert(err.to_string());
            }
        }
    }
    FormulaCheck {
        name: name.into(),
        max_error: failure.is_none().then_some(worst),
        tolerance,
        pass: failure.is_none() && worst < tolerance,
        gate: true,
        note: failure,
    }
}

/// κ values spread over `(4, 8)`.
pub fn light_phase_kappas(n: usize) -> Vec<f64> {
    (0..n)
        .map(|i| 4.0 + 4.0 * (i as f64 + 0.5) / n as f64)
        .collect()
}

/// Identities and special values of the dimension formulas on a `grid`-point
/// grid of `[0, 1]`.
pub fn formula_checks(grid: usize, kappas: &[f64], tolerance: f64) -> Result<Vec<FormulaCheck>> {
    let ds: Vec<f64> = (0..grid).map(|i| i as f64 / (grid - 1) as f64).collect();
    let ks = kappas
        .iter()
        .map(|&k| Kappa::new(k))
        .collect::<Result<Vec<_>>>()?;
    let light = light_phase_kappas(grid.min(200))
        .into_iter()
        .map(Kappa::new)
        .collect::<Result<Vec<_>>>()?;
    let pairs = || ks.iter().flat_map(|&k| ds.iter().map(move |&d| (k, d)));
    let diff = |a: Result<f64>, b: Result<f64>| Ok(a? - b?);

    let mut checks = vec![
        check(
            "duality",
            pairs().map(|(k, d)| {
                diff(
                    phi(k, d).map(|v| v.value()),
                    phi(k.dual(), d).map(|v| v.value()),
                )
            }),
            tolerance,
        ),
        check(
            "phi-via-psi",
            pairs().map(|(k, d)| {
                diff(
                    phi(k, d).map(|v| v.value()),
                    phi_via_psi(k, d).map(|v| v.value()),
                )
            }),
            tolerance,
        ),
        check(
            "phi-at-zero",
            ks.iter().map(|&k| phi(k, 0.0).map(|v| v.value())),
            tolerance,
        ),
        check(
            "phi-at-one",
            ks.iter().map(|&k| {
                let kv = k.value();
                let expected = if kv < 4.0 {
                    1.0 + kv / 8.0
                } else {
                    1.0 + 2.0 / kv
                };
                Ok(phi(k, 1.0)?.value() - expected)
            }),
            tolerance,
        ),
        check(
            "boundary-intersection",
            light.iter().map(|&k| {
                let kv = k.value();
                let d = known_dimensions(k).boundary_intersection()?;
                Ok(phi(k, d)?.value() - (2.0 - (12.0 - kv) * (4.0 + kv) / (8.0 * kv)))
            }),
            tolerance,
        ),
        check(
            "dual-boundary-hit",
            light.iter().map(|&k| {
                let d = known_dimensions(k).dual_boundary_hit()?;
                Ok(phi(k, d)?.value() - (3.0 - 3.0 * k.value() / 8.0))
            }),
            tolerance,
        ),
    ];
    let mut plus = check(
        "dual-boundary-hit-plus-variant",
        light.iter().map(|&k| {
            let d = known_dimensions(k).dual_boundary_hit_plus_variant()?;
            Ok(phi(k, d)?.value() - (3.0 - 3.0 * k.value() / 8.0))
        }),
        tolerance,
    );
    plus.gate = false;
    plus.note = Some(format!(
        "argument 5 - 8/k + k/2 lies outside [0, 1] for k in (4, 8); {}",
        plus.note.unwrap_or_default()
    ));
    checks.push(plus);
    Ok(checks)
}

/// Number of workers used when neither the caller nor the config sets one.
pub fn default_workers() -> usize {
    std::thread::available_parallelism().map_or(1, |n| n.get())
}

/// Evaluate `f(0), …, f(n-1)` on up to `workers` threads; results come back
/// in index order.
pub fn parallel_map<T: Send>(n: usize, workers: usize, f: impl Fn(usize) -> T + Sync) -> Vec<T> {
    let workers = workers.clamp(1, n.max(1));
    if workers == 1 {
        return (0..n).map(f).collect();
    }
    let next = AtomicUsize::new(0);
    let slots: Vec<Mutex<Option<T>>> = (0..n).map(|_| Mutex::new(None)).collect();
    std::thread::scope(|scope| {
        for _ in 0..workers {
            scope.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::Relaxed);
                if i >= n {
                    break;
                }
                let value = f(i);
                *slots[i].lock().expect("slot lock") = Some(value);
            });
        }
    });
    slots
        .into_iter()
        .map(|s| {
            s.into_inner()
                .expect("slot lock")
                .expect("every index evaluated")
        })
        .collect()
}

pub fn run(config: &ExperimentConfig) -> Result<ExperimentReport> {
    run_with_workers(config, config.workers.unwrap_or_else(default_workers))
}

pub fn run_with_workers(config: &ExperimentConfig, workers: usize) -> Result<ExperimentReport> {
    config.validate()?;
    let start = Instant::now();
    let tolerance = config.tolerance();
    let prediction = prediction(&config.experiment)?;

    if let Experiment::FormulaIdentities(p) = &config.experiment {
        let checks = formula_checks(p.grid, &p.kappas, tolerance)?;
        let pass = checks.iter().filter(|c| c.gate).all(|c| c.pass);
        return Ok(ExperimentReport {
            config: config.clone(),
            prediction,
            tolerance,
            replicas: Vec::new(),
            mean: None,
            stderr: None,
            pass,
            regression: None,
            checks,
            wall_clock_seconds: start.elapsed().as_secs_f64(),
        });
    }

    let fits = parallel_map(config.replicas, workers, |r| {
        let seed = config.seed.wrapping_add(r as u64);
        (seed, replica_fit(&config.experiment, seed))
    });
    let mut replicas = Vec::with_capacity(fits.len());
    let mut regression = None;
    let mut estimates = Vec::new();
    for (index, (seed, fit)) in fits.into_iter().enumerate() {
        replicas.push(match fit {
            Ok(fit) => {
                if regression.is_none() {
                    regression = Some(Regression::from_fit(index, &fit));
                }
                estimates.push(fit.slope);
                ReplicaOutcome {
                    index,
                    seed,
                    estimate: Some(fit.slope),
                    fit_stderr: Some(fit.stderr),
                    error: None,
                }
            }
            Err(e) => ReplicaOutcome {
                index,
                seed,
                estimate: None,
                fit_stderr: None,
                error: Some(e.to_string()),
            },
        });
    }
    if estimates.is_empty() {
        return Err(LabError::AllReplicasFailed {
            replicas: replicas.len(),
            first: replicas[0].error.clone().unwrap_or_default(),
        });
    }
    let (mean, stderr) = crate::gmc::mean_stderr(&estimates);
    let pass = prediction.is_some_and(|p| (mean - p).abs() <= tolerance);
    Ok(ExperimentReport {
        config: config.clone(),
        prediction,
        tolerance,
        replicas,
        mean: Some(mean),
        stderr: Some(stderr),
        pass,
        regression,
        checks: Vec::new(),
        wall_clock_seconds: start.elapsed().as_secs_f64(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
    Svg,
}

impl std::str::FromStr for Format {
    type Err = LabError;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            "svg" => Ok(Format::Svg),
            other => Err(LabError::config(
                "format",
                format!("unknown format `{other}`"),
            )),
        }
    }
}

impl ExperimentReport {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    /// One row per replica, or one row per check for formula identities.
    pub fn write_csv<W: std::io::Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let opt = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
        if self.checks.is_empty() {
            w.write_record(["replica", "seed", "estimate", "fit_stderr", "error"])?;
            for r in &self.replicas {
                w.write_record([
                    r.index.to_string(),
                    r.seed.to_string(),
                    opt(r.estimate),
                    opt(r.fit_stderr),
                    r.error.clone().unwrap_or_default(),
                ])?;
            }
        } else {
            w.write_record(["check", "max_error", "tolerance", "pass", "gate"])?;
            for c in &self.checks {
                w.write_record([
                    c.name.clone(),
                    opt(c.max_error),
                    c.tolerance.to_string(),
                    c.pass.to_string(),
                    c.gate.to_string(),
                ])?;
            }
        }
        w.flush()?;
        Ok(())
    }

    /// Log-log plot of the first successful replica's box counts with its
    /// regression line and a line of the predicted slope through the
    /// window's centroid.
    pub fn to_svg(&self) -> Option<String> {
        let reg = self.regression.as_ref()?;
        Some(render_svg(
            reg,
            self.prediction,
            self.config.experiment.name(),
        ))
    }
}

fn render_svg(reg: &Regression, prediction: Option<f64>, title: &str) -> String {
    let (w, h, m) = (640.0, 480.0, 60.0);
    let xs = &reg.log_inv_scale;
    let ys = &reg.log_count;
    let span = |v: &[f64]| {
        let lo = v.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        if hi > lo {
            (lo, hi)
        } else {
            (lo - 0.5, hi + 0.5)
        }
    };
    let (x0, x1) = span(xs);
    let (y0, y1) = span(ys);
    let px = |x: f64| m + (x - x0) / (x1 - x0) * (w - 2.0 * m);
    let py = |y: f64| h - m - (y - y0) / (y1 - y0) * (h - 2.0 * m);

    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}">"#
    );
    let _ = writeln!(svg, r#"<rect width="{w}" height="{h}" fill="white"/>"#);
    let _ = writeln!(
        svg,
        r#"<text x="{m}" y="30" font-family="sans-serif" font-size="16">{title}</text>"#
    );
    let _ = writeln!(
        svg,
        r#"<line x1="{m}" y1="{b}" x2="{r}" y2="{b}" stroke="black"/><line x1="{m}" y1="{b}" x2="{m}" y2="{m}" stroke="black"/>"#,
        b = h - m,
        r = w - m
    );
    let _ = writeln!(
        svg,
        r#"<text x="{}" y="{}" font-family="sans-serif" font-size="12" text-anchor="middle">log(1/eps)</text>"#,
        w / 2.0,
        h - 20.0
    );
    let _ = writeln!(
        svg,
        r#"<text x="20" y="{}" font-family="sans-serif" font-size="12" transform="rotate(-90 20 {})" text-anchor="middle">log N(eps)</text>"#,
        h / 2.0,
        h / 2.0
    );
    for (i, (&x, &y)) in xs.iter().zip(ys).enumerate() {
        let inside = i >= reg.window.0 && i < reg.window.1;
        let fill = if inside { "steelblue" } else { "lightgray" };
        let _ = writeln!(
            svg,
            r#"<circle cx="{:.2}" cy="{:.2}" r="3" fill="{fill}"/>"#,
            px(x),
            py(y)
        );
    }
    let (a, b) = reg.window;
    if b > a {
        let (xa, xb) = (xs[a], xs[b - 1]);
        let line = |slope: f64, icpt: f64, color: &str, dash: &str| {
            format!(
                r#"<line x1="{:.2}" y1="{:.2}" x2="{:.2}" y2="{:.2}" stroke="{color}" stroke-width="2"{dash}/>"#,
                px(xa),
                py(icpt + slope * xa),
                px(xb),
                py(icpt + slope * xb)
            )
        };
        let _ = writeln!(svg, "{}", line(reg.slope, reg.intercept, "steelblue", ""));
        if let Some(p) = prediction {
            let n = (b - a) as f64;
            let cx = xs[a..b].iter().sum::<f64>() / n;
            let cy = ys[a..b].iter().sum::<f64>() / n;
            let _ = writeln!(
                svg,
                "{}",
                line(p, cy - p * cx, "firebrick", r#" stroke-dasharray="6 4""#)
            );
        }
    }
    let _ = writeln!(
        svg,
        r#"<text x="{}" y="{}" font-family="sans-serif" font-size="14" fill="steelblue">slope {:.3}</text>"#,
        m + 10.0,
        m + 10.0,
        reg.slope
    );
    if let Some(p) = prediction {
        let _ = writeln!(
            svg,
            r#"<text x="{}" y="{}" font-family="sans-serif" font-size="14" fill="firebrick">prediction {p:.3}</text>"#,
            m + 10.0,
            m + 30.0
        );
    }
    svg.push_str("</svg>\n");
    svg
}

/// Write the report in each format to `dir`, named after the experiment.
/// Returns the files written; a report without a regression has no SVG.
pub fn emit(report: &ExperimentReport, formats: &[Format], dir: &Path) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir)?;
    let stem = report.config.experiment.name();
    let mut written = Vec::new();
    for format in formats {
        let path = match format {
            Format::Json => {
                let path = dir.join(format!("{stem}.json"));
                fs::write(&path, report.to_json()?)?;
                path
            }
            Format::Csv => {
                let path = dir.join(format!("{stem}.csv"));
                report.write_csv(fs::File::create(&path)?)?;
                path
            }
            Format::Svg => match report.to_svg() {
                Some(svg) => {
                    let path = dir.join(format!("{stem}.svg"));
                    fs::write(&path, svg)?;
                    path
                }
                None => continue,
            },
        };
        written.push(path);
    }
    Ok(written)
}
