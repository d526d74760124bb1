//! Stable subordinators, Brownian first-passage processes and ancestor-free
//! times of a correlated planar Brownian motion.
//!
//! Subordinators are normalized so that `E exp(-λ S(r)) = exp(-r (2λ)^α)`.
//! For `α = 1/2` this is the law of `r ↦ inf{t : B_t = -r}` for a standard
//! Brownian motion `B`.

use std::io::Write;

use rand::distr::Open01;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Exp1, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::dimension::{box_dimension_1d, BoxCountConfig, BoxCountResult, WindowPolicy};
use crate::error::{LabError, Result};
use crate::fractal::CantorSpec;
use crate::kpz::{peanosphere_correlation, Kappa};

/// Smallest grid accepted by [`ancestor_free_times`].
pub const MIN_ANCESTOR_STEPS: usize = 100_000;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SubordinatorPath {
    alpha: f64,
    grid: Vec<f64>,
    values: Vec<f64>,
    seed: u64,
}

impl SubordinatorPath {
    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn grid(&self) -> &[f64] {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// `S(r)` for a grid point `r`.
    pub fn at(&self, r: f64) -> Result<f64> {
        let i = self.grid.partition_point(|&g| g < r);
        match self.grid.get(i) {
            Some(&g) if g == r => Ok(self.values[i]),
            _ => Err(LabError::Range(format!(
                "{r} is not a grid point of the path"
            ))),
        }
    }

    pub fn terminal(&self) -> f64 {
        self.values[self.values.len() - 1]
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["r", "s"])?;
        for (r, s) in self.grid.iter().zip(&self.values) {
            w.write_record([r.to_string(), s.to_string()])?;
        }
        w.flush()?;
        Ok(())
    }
}

fn check_grid(grid: &[f64]) -> Result<()> {
    if grid.is_empty() {
        return Err(LabError::domain("grid is empty"));
    }
    if !grid.iter().all(|r| r.is_finite()) || grid[0] < 0.0 {
        return Err(LabError::domain("grid must be finite and nonnegative"));
    }
    if !grid.windows(2).all(|w| w[0] < w[1]) {
        return Err(LabError::domain("grid must be strictly increasing"));
    }
    Ok(())
}

fn check_alpha(alpha: f64) -> Result<()> {
    if alpha > 0.0 && alpha < 1.0 {
        Ok(())
    } else {
        Err(LabError::domain(format!(
            "stable index must lie in (0, 1), got {alpha}"
        )))
    }
}

/// One positive stable variable with `E exp(-λX) = exp(-λ^α)`
/// (Kanter's form of the Chambers–Mallows–Stuck method).
pub fn positive_stable<R: Rng + ?Sized>(alpha: f64, rng: &mut R) -> f64 {
    let u = std::f64::consts::PI * rng.sample::<f64, _>(Open01);
    let e: f64 = rng.sample(Exp1);
    let a = (alpha * u).sin() / u.sin().powf(1.0 / alpha);
    let b = (((1.0 - alpha) * u).sin() / e).powf((1.0 - alpha) / alpha);
    a * b
}

pub fn stable_subordinator(alpha: f64, grid: &[f64], seed: u64) -> Result<SubordinatorPath> {
    check_alpha(alpha)?;
    check_grid(grid)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut prev = 0.0;
    let mut s = 0.0;
    let values = grid
        .iter()
        .map(|&r| {
            let dr = r - prev;
            prev = r;
            if dr > 0.0 {
                s += 2.0 * dr.powf(1.0 / alpha) * positive_stable(alpha, &mut rng);
            }
            s
        })
        .collect();
    Ok(SubordinatorPath {
        alpha,
        grid: grid.to_vec(),
        values,
        seed,
    })
}

/// How the Brownian path behind a first-passage process is generated.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum HittingScheme {
    /// The path observed at its successive first-passage times: by the
    /// strong Markov property the time to fall a further `Δ` is `Δ²/Z²`.
    Skeleton,
    /// Gaussian random walk with step `dt`, monitored at the steps. Fails
    /// with a horizon error after `max_steps` steps.
    Walk { dt: f64, max_steps: u64 },
}

pub fn hitting_time_subordinator(grid: &[f64], seed: u64) -> Result<SubordinatorPath> {
    hitting_time_subordinator_with(grid, seed, HittingScheme::Skeleton)
}

pub fn hitting_time_subordinator_with(
    grid: &[f64],
    seed: u64,
    scheme: HittingScheme,
) -> Result<SubordinatorPath> {
    check_grid(grid)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let values = match scheme {
        HittingScheme::Skeleton => {
            let mut level = 0.0;
            let mut t = 0.0;
            grid.iter()
                .map(|&r| {
                    let drop = r - level;
                    level = r;
                    if drop > 0.0 {
                        let z: f64 = rng.sample(StandardNormal);
                        t += drop * drop / (z * z);
                    }
                    t
                })
                .collect()
        }
        HittingScheme::Walk { dt, max_steps } => {
            if !(dt > 0.0 && dt.is_finite()) {
                return Err(LabError::domain(format!(
                    "walk step must be positive, got {dt}"
                )));
            }
            let sd = dt.sqrt();
            let mut x = 0.0f64;
            let mut steps = 0u64;
            let mut values = Vec::with_capacity(grid.len());
            for &r in grid {
                while x > -r {
                    if steps == max_steps {
                        return Err(LabError::Horizon(format!(
                            "level {r} not reached within {max_steps} steps"
                        )));
                    }
                    x += sd * rng.sample::<f64, _>(StandardNormal);
                    steps += 1;
                }
                values.push(steps as f64 * dt);
            }
            values
        }
    };
    Ok(SubordinatorPath {
        alpha: 0.5,
        grid: grid.to_vec(),
        values,
        seed,
    })
}

/// Box-count settings for subordinator images and ancestor-free sets.
/// Both are very lacunary, so the fit stops once 30% of the points sit in
/// boxes of their own.
pub fn sparse_set_config() -> BoxCountConfig {
    BoxCountConfig::default().with_window(WindowPolicy::Unsaturated { max_fill: 0.3 })
}

/// Box dimension of `{S(y) : y ∈ Y}` for the discretized set `Y`.
pub fn image_dimension(path: &SubordinatorPath, spec: &CantorSpec) -> Result<BoxCountResult> {
    let image = spec
        .discretize()?
        .into_iter()
        .map(|y| path.at(y))
        .collect::<Result<Vec<_>>>()?;
    box_dimension_1d(&image, sparse_set_config())
}

/// Planar Brownian motion `(L, R)` on a uniform grid with correlated
/// coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct CorrelatedBM {
    correlation: f64,
    dt: f64,
    left: Vec<f64>,
    right: Vec<f64>,
    seed: u64,
}

pub fn correlated_bm(
    correlation: f64,
    n_steps: usize,
    t_final: f64,
    seed: u64,
) -> Result<CorrelatedBM> {
    if !(correlation > -1.0 && correlation < 1.0) {
        return Err(LabError::domain(format!(
            "correlation must lie in (-1, 1), got {correlation}"
        )));
    }
    if n_steps == 0 || !(t_final > 0.0 && t_final.is_finite()) {
        return Err(LabError::domain(
            "need at least one step and a positive horizon",
        ));
    }
    let dt = t_final / n_steps as f64;
    let sd = dt.sqrt();
    let orth = (1.0 - correlation * correlation).sqrt();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut left = Vec::with_capacity(n_steps + 1);
    let mut right = Vec::with_capacity(n_steps + 1);
    let (mut l, mut r) = (0.0f64, 0.0f64);
    left.push(l);
    right.push(r);
    for _ in 0..n_steps {
        let a: f64 = rng.sample(StandardNormal);
        let b: f64 = rng.sample(StandardNormal);
        l += sd * a;
        r += sd * (correlation * a + orth * b);
        left.push(l);
        right.push(r);
    }
    Ok(CorrelatedBM {
        correlation,
        dt,
        left,
        right,
        seed,
    })
}

impl CorrelatedBM {
    pub fn correlation(&self) -> f64 {
        self.correlation
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn left(&self) -> &[f64] {
        &self.left
    }

    pub fn right(&self) -> &[f64] {
        &self.right
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn n_steps(&self) -> usize {
        self.left.len() - 1
    }

    /// Sample correlation of the increments and its approximate standard
    /// error `(1 - ρ²)/√n`.
    pub fn increment_correlation(&self) -> (f64, f64) {
        let dl: Vec<f64> = self.left.windows(2).map(|w| w[1] - w[0]).collect();
        let dr: Vec<f64> = self.right.windows(2).map(|w| w[1] - w[0]).collect();
        let n = dl.len() as f64;
        let ml = dl.iter().sum::<f64>() / n;
        let mr = dr.iter().sum::<f64>() / n;
        let (mut sll, mut srr, mut slr) = (0.0, 0.0, 0.0);
        for (a, b) in dl.iter().zip(&dr) {
            sll += (a - ml) * (a - ml);
            srr += (b - mr) * (b - mr);
            slr += (a - ml) * (b - mr);
        }
        let rho = slr / (sll * srr).sqrt();
        (rho, (1.0 - rho * rho) / n.sqrt())
    }
}

/// Indices `t` for which no earlier index `s < t` has both `L_s` and `R_s`
/// at or below every later value up to and including `t`.
pub fn ancestor_free_indices(left: &[f64], right: &[f64]) -> Vec<usize> {
    ancestor_free_indices_among(left, right, |_| true)
}

/// As [`ancestor_free_indices`], but only indices accepted by `candidate`
/// may act as ancestors.
///
/// Each coordinate keeps a stack of the indices that are still running
/// infima of it; an index is an ancestor of `t` exactly when it sits in both
/// stacks, which is tracked with a counter.
pub fn ancestor_free_indices_among(
    left: &[f64],
    right: &[f64],
    candidate: impl Fn(usize) -> bool,
) -> Vec<usize> {
    assert_eq!(left.len(), right.len(), "coordinates of unequal length");
    let n = left.len();
    let mut in_left = vec![false; n];
    let mut in_right = vec![false; n];
    let mut left_stack: Vec<usize> = Vec::new();
    let mut right_stack: Vec<usize> = Vec::new();
    let mut shared = 0usize;
    let mut free = Vec::new();
    for t in 0..n {
        while let Some(&s) = left_stack.last() {
            if left[s] <= left[t] {
                break;
            }
            left_stack.pop();
            in_left[s] = false;
            if in_right[s] {
                shared -= 1;
            }
        }
        while let Some(&s) = right_stack.last() {
            if right[s] <= right[t] {
                break;
            }
            right_stack.pop();
            in_right[s] = false;
            if in_left[s] {
                shared -= 1;
            }
        }
        if shared == 0 {
            free.push(t);
        }
        if candidate(t) {
            left_stack.push(t);
            right_stack.push(t);
            in_left[t] = true;
            in_right[t] = true;
            shared += 1;
        }
    }
    free
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AncestorFree {
    pub kappa: Kappa,
    pub n_steps: usize,
    pub seed: u64,
    pub times: Vec<f64>,
}

impl AncestorFree {
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["time"])?;
        for t in &self.times {
            w.write_record([t.to_string()])?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn dimension(&self) -> Result<BoxCountResult> {
        box_dimension_1d(&self.times, sparse_set_config())
    }
}

/// Ancestor-free grid times in `[0, 1]` of the planar Brownian motion with
/// correlation `-cos(4π/κ)`.
pub fn ancestor_free_times(kappa: Kappa, n_steps: usize, seed: u64) -> Result<AncestorFree> {
    let k = kappa.value();
    if !(k > 4.0 && k < 8.0) {
        return Err(LabError::domain(format!(
            "kappa must lie in (4, 8), got {k}"
        )));
    }
    if n_steps < MIN_ANCESTOR_STEPS {
        return Err(LabError::domain(format!(
            "at least {MIN_ANCESTOR_STEPS} steps are required, got {n_steps}"
        )));
    }
    let bm = correlated_bm(peanosphere_correlation(kappa)?, n_steps, 1.0, seed)?;
    let times = ancestor_free_indices(bm.left(), bm.right())
        .into_iter()
        .map(|i| i as f64 * bm.dt())
        .collect();
    Ok(AncestorFree {
        kappa,
        n_steps,
        seed,
        times,
    })
}
