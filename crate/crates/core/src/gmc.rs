//! Log-correlated field on [0, 1] built as a dyadic multiplicative cascade,
//! and the mass profile of its exponential (boundary chaos).
//!
//! The field at grid cell `i` is the sum over levels `j = 1..=L` of one
//! independent `N(0, log 2)` coefficient per dyadic interval of length
//! `2^-j` containing the cell. Two cells whose smallest common dyadic
//! ancestor has length `2^-k` therefore have covariance `k log 2`, which is
//! `-log |x - y|` up to a bounded error.
//!
//! The chaos uses the field scaled by `sqrt 2` (a boundary field with
//! `-2 log` covariance) and exponent `gamma / 2`, i.e. `exp(gamma X / sqrt 2)`
//! with per-cell Wick normalization.

use std::io::Write;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::dimension::{
    box_dimension_1d, pushforward_set, BoxCountConfig, MeasureGrid, WindowPolicy,
};
use crate::error::{LabError, Result};
use crate::fractal::CantorSpec;
use crate::kpz::{psi_inverse, Gamma};

pub const MIN_LEVELS: u32 = 4;
pub const MAX_LEVELS: u32 = 24;

#[derive(Debug, Clone, PartialEq)]
pub struct LogField {
    levels: u32,
    /// `coefficients[j - 1]` holds the `2^j` coefficients of level `j`.
    coefficients: Vec<Vec<f64>>,
    shift: f64,
    seed: u64,
}

pub fn sample_log_field(levels: u32, seed: u64) -> Result<LogField> {
    if levels > MAX_LEVELS {
        return Err(LabError::Budget(format!(
            "{levels} levels exceeds the limit of {MAX_LEVELS}"
        )));
    }
    if levels < MIN_LEVELS {
        return Err(LabError::domain(format!(
            "at least {MIN_LEVELS} levels are required, got {levels}"
        )));
    }
    let sd = std::f64::consts::LN_2.sqrt();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let coefficients = (1..=levels)
        .map(|j| {
            (0..1usize << j)
                .map(|_| sd * rng.sample::<f64, _>(StandardNormal))
                .collect()
        })
        .collect();
    Ok(LogField {
        levels,
        coefficients,
        shift: 0.0,
        seed,
    })
}

impl LogField {
    pub fn levels(&self) -> u32 {
        self.levels
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn coefficients(&self, level: u32) -> &[f64] {
        &self.coefficients[level as usize - 1]
    }

    /// Number of grid cells, `2^L`.
    pub fn len(&self) -> usize {
        1 << self.levels
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// The same field plus a constant.
    pub fn shifted(&self, c: f64) -> LogField {
        LogField {
            shift: self.shift + c,
            ..self.clone()
        }
    }

    pub fn shift(&self) -> f64 {
        self.shift
    }

    /// Field value on each of the `2^L` cells.
    pub fn values(&self) -> Vec<f64> {
        let mut values = vec![self.shift];
        for level in &self.coefficients {
            values = (0..level.len())
                .map(|i| values[i >> 1] + level[i])
                .collect();
        }
        values
    }

    /// Variance of the field at any cell, `L log 2`.
    pub fn variance(&self) -> f64 {
        self.levels as f64 * std::f64::consts::LN_2
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChaosProfile {
    pub grid: MeasureGrid,
    pub gamma: Gamma,
    pub levels: u32,
    pub seed: u64,
}

impl ChaosProfile {
    pub fn total_mass(&self) -> f64 {
        self.grid.total()
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["knot", "mass"])?;
        for (k, m) in self.grid.knots().iter().zip(self.grid.mass()) {
            w.write_record([k.to_string(), m.to_string()])?;
        }
        w.flush()?;
        Ok(())
    }
}

pub fn chaos_profile(field: &LogField, gamma: Gamma) -> ChaosProfile {
    let beta = gamma.value() / std::f64::consts::SQRT_2;
    let n = field.len();
    let cell = 1.0 / n as f64;
    let wick = 0.5 * beta * beta * field.variance();
    let mut mass = Vec::with_capacity(n + 1);
    let mut acc = 0.0;
    mass.push(0.0);
    for x in field.values() {
        acc += cell * (beta * x - wick).exp();
        mass.push(acc);
    }
    let knots = (0..=n).map(|i| i as f64 * cell).collect();
    let grid = MeasureGrid::new(knots, mass).expect("cumulative sums of positive masses");
    ChaosProfile {
        grid,
        gamma,
        levels: field.levels,
        seed: field.seed,
    }
}

/// Box-count settings for sets pushed forward through a chaos profile.
/// The chaos spreads the image very unevenly, so the fit stops once 30% of
/// the points sit in boxes of their own.
pub fn quantum_box_config() -> BoxCountConfig {
    BoxCountConfig::default().with_window(WindowPolicy::Unsaturated { max_fill: 0.3 })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PsiCheck {
    pub gamma: f64,
    pub spec: CantorSpec,
    pub replicas: usize,
    #[serde(rename = "L")]
    pub levels: u32,
    pub euclidean_dim: f64,
    pub quantum_dim_estimate: f64,
    pub psi_prediction: f64,
    pub stderr: f64,
    pub estimates: Vec<f64>,
}

/// Box dimension of one replica's pushed-forward set.
pub fn quantum_dimension(
    spec: &CantorSpec,
    gamma: Gamma,
    levels: u32,
    seed: u64,
    config: BoxCountConfig,
) -> Result<f64> {
    let ys = spec.discretize()?;
    let field = sample_log_field(levels, seed)?;
    let profile = chaos_profile(&field, gamma);
    let pushed = pushforward_set(&profile.grid, &ys)?;
    Ok(box_dimension_1d(&pushed, config)?.slope)
}

/// Replica `r` uses seed `seed + r`.
pub fn verify_psi(
    spec: &CantorSpec,
    gamma: Gamma,
    replicas: usize,
    levels: u32,
    seed: u64,
) -> Result<PsiCheck> {
    if replicas == 0 {
        return Err(LabError::domain("at least one replica is required"));
    }
    let config = quantum_box_config();
    let estimates = (0..replicas as u64)
        .map(|r| quantum_dimension(spec, gamma, levels, seed.wrapping_add(r), config))
        .collect::<Result<Vec<_>>>()?;
    let (mean, stderr) = mean_stderr(&estimates);
    let euclidean = spec.exact_dimension().value();
    Ok(PsiCheck {
        gamma: gamma.value(),
        spec: spec.clone(),
        replicas,
        levels,
        euclidean_dim: euclidean,
        quantum_dim_estimate: mean,
        psi_prediction: psi_inverse(gamma, euclidean)?.value(),
        stderr,
        estimates,
    })
}

pub(crate) fn mean_stderr(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return (mean, 0.0);
    }
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}
