//! Box-counting dimension of finite point clouds, and the push-forward of a
//! boundary set to the coordinate of a mass profile.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};

/// Fewest points accepted by the estimators.
pub const MIN_POINTS: usize = 100;

/// Smallest ratio `eps_max / eps_min` accepted (one and a half decades).
pub const MIN_SCALE_SPAN: f64 = 31.6;

/// Where the ladder of box sizes starts and stops.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum ScaleRange {
    /// From `upper_fraction` of the diameter down to the `nn_quantile`
    /// quantile of the positive nearest-neighbour spacings.
    Auto {
        upper_fraction: f64,
        nn_quantile: f64,
    },
    /// Both ends given as fractions of the diameter.
    Relative {
        max: f64,
        min: f64,
    },
    Absolute {
        max: f64,
        min: f64,
    },
}

impl Default for ScaleRange {
    fn default() -> Self {
        ScaleRange::Auto {
            upper_fraction: 0.125,
            nn_quantile: 0.01,
        }
    }
}

/// Which scales of the ladder enter the regression.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum WindowPolicy {
    /// Every scale in the range.
    #[default]
    Full,
    /// Drop scales at which more than `max_fill` of the distinct points sit
    /// in their own box (finite-sample saturation).
    Unsaturated { max_fill: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoxCountConfig {
    pub range: ScaleRange,
    pub window: WindowPolicy,
    /// Number of box sizes per factor of two.
    pub per_octave: u32,
}

impl Default for BoxCountConfig {
    fn default() -> Self {
        BoxCountConfig {
            range: ScaleRange::default(),
            window: WindowPolicy::default(),
            per_octave: 4,
        }
    }
}

impl BoxCountConfig {
    pub fn relative(max: f64, min: f64) -> Self {
        BoxCountConfig {
            range: ScaleRange::Relative { max, min },
            ..Default::default()
        }
    }

    pub fn with_window(mut self, window: WindowPolicy) -> Self {
        self.window = window;
        self
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoxCountResult {
    /// Box sizes, decreasing.
    pub scales: Vec<f64>,
    /// Occupied boxes at each size.
    pub counts: Vec<u64>,
    pub slope: f64,
    pub stderr: f64,
    /// Half-open index range `[start, end)` of the scales used in the fit.
    pub window: (usize, usize),
    pub config: BoxCountConfig,
}

impl BoxCountResult {
    /// Least-squares intercept of `log N` against `log(1/ε)` in the window.
    pub fn intercept(&self) -> f64 {
        let (xs, ys) = self.regression_points();
        let n = xs.len() as f64;
        let mx = xs.iter().sum::<f64>() / n;
        let my = ys.iter().sum::<f64>() / n;
        my - self.slope * mx
    }

    /// `(log(1/ε), log N(ε))` pairs inside the window.
    pub fn regression_points(&self) -> (Vec<f64>, Vec<f64>) {
        let (a, b) = self.window;
        let xs = self.scales[a..b].iter().map(|e| -e.ln()).collect();
        let ys = self.counts[a..b].iter().map(|&c| (c as f64).ln()).collect();
        (xs, ys)
    }
}

/// Ordinary least squares; returns `(slope, intercept, stderr of slope)`.
pub fn linear_fit(xs: &[f64], ys: &[f64]) -> (f64, f64, f64) {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = if sxx > 0.0 { sxy / sxx } else { 0.0 };
    let intercept = my - slope * mx;
    let sse: f64 = xs
        .iter()
        .zip(ys)
        .map(|(x, y)| (y - intercept - slope * x).powi(2))
        .sum();
    let stderr = if xs.len() > 2 && sxx > 0.0 {
        (sse / (n - 2.0) / sxx).sqrt()
    } else {
        0.0
    };
    (slope, intercept, stderr)
}

/// Geometric ladder from `max` down to `min`, `per_octave` sizes per halving.
fn ladder(max: f64, min: f64, per_octave: u32) -> Vec<f64> {
    let ratio = 2f64.powf(-1.0 / per_octave.max(1) as f64);
    let steps = ((min / max).ln() / ratio.ln()).floor() as usize;
    (0..=steps).map(|i| max * ratio.powi(i as i32)).collect()
}

fn quantile(sorted: &[f64], q: f64) -> f64 {
    let idx = ((sorted.len() - 1) as f64 * q).round() as usize;
    sorted[idx.min(sorted.len() - 1)]
}

fn resolve_range(
    range: ScaleRange,
    diameter: f64,
    nn_spacings: impl FnOnce() -> Vec<f64>,
) -> Result<(f64, f64)> {
    let (max, min) = match range {
        ScaleRange::Auto {
            upper_fraction,
            nn_quantile,
        } => {
            let mut nn = nn_spacings();
            nn.retain(|&d| d > 0.0);
            if nn.is_empty() {
                return Err(LabError::InsufficientScales("no positive spacings".into()));
            }
            nn.sort_by(f64::total_cmp);
            (diameter * upper_fraction, quantile(&nn, nn_quantile))
        }
        ScaleRange::Relative { max, min } => (diameter * max, diameter * min),
        ScaleRange::Absolute { max, min } => (max, min),
    };
    if !(min > 0.0 && max.is_finite()) || max / min < MIN_SCALE_SPAN {
        return Err(LabError::InsufficientScales(format!(
            "scale range [{min:e}, {max:e}] spans less than 1.5 decades"
        )));
    }
    Ok((max, min))
}

fn fit(
    scales: Vec<f64>,
    counts: Vec<u64>,
    distinct: usize,
    config: BoxCountConfig,
) -> Result<BoxCountResult> {
    let mut window = (0, scales.len());
    if let WindowPolicy::Unsaturated { max_fill } = config.window {
        let limit = max_fill * distinct as f64;
        window.1 = counts.iter().take_while(|&&c| (c as f64) <= limit).count();
    }
    if window.1 - window.0 < 3 {
        return Err(LabError::InsufficientScales(format!(
            "only {} scales inside the regression window",
            window.1 - window.0
        )));
    }
    let (a, b) = window;
    let xs: Vec<f64> = scales[a..b].iter().map(|e| -e.ln()).collect();
    let ys: Vec<f64> = counts[a..b].iter().map(|&c| (c as f64).ln()).collect();
    let (slope, _, stderr) = linear_fit(&xs, &ys);
    Ok(BoxCountResult {
        scales,
        counts,
        slope,
        stderr,
        window,
        config,
    })
}

/// Degenerate cloud (zero extent): one box at every scale.
fn single_box(config: BoxCountConfig) -> BoxCountResult {
    let scales = ladder(1.0, 1e-3, config.per_octave);
    let counts = vec![1; scales.len()];
    BoxCountResult {
        window: (0, scales.len()),
        scales,
        counts,
        slope: 0.0,
        stderr: 0.0,
        config,
    }
}

/// Index of the last box needed to cover `[0, extent]`; the right end of
/// the cloud belongs to this box rather than opening a new one.
fn last_box(extent: f64, eps: f64) -> i64 {
    ((extent / eps).ceil() as i64 - 1).max(0)
}

#[inline]
fn box_index(offset: f64, eps: f64, top: i64) -> i64 {
    ((offset / eps).floor() as i64).min(top)
}

/// Occupied boxes of size `eps` anchored at `anchor`, for sorted input.
pub fn count_boxes_sorted_1d(sorted: &[f64], eps: f64, anchor: f64) -> u64 {
    let top = last_box(sorted[sorted.len() - 1] - anchor, eps);
    let mut count = 0u64;
    let mut last = i64::MIN;
    for &x in sorted {
        let idx = box_index(x - anchor, eps, top);
        if idx != last {
            count += 1;
            last = idx;
        }
    }
    count
}

/// Occupied boxes of size `eps` anchored at `anchor`.
pub fn count_boxes_1d(points: &[f64], eps: f64, anchor: f64) -> u64 {
    let mut idx: Vec<i64> = points
        .iter()
        .map(|&x| ((x - anchor) / eps).floor() as i64)
        .collect();
    idx.sort_unstable();
    idx.dedup();
    idx.len() as u64
}

/// Box-counting dimension of a set of reals.
pub fn box_dimension_1d(points: &[f64], config: BoxCountConfig) -> Result<BoxCountResult> {
    if !points.is_empty() && points.iter().all(|&x| x == points[0]) {
        return Ok(single_box(config));
    }
    if points.len() < MIN_POINTS {
        return Err(LabError::InsufficientScales(format!(
            "{} points, need at least {MIN_POINTS}",
            points.len()
        )));
    }
    if points.iter().any(|x| !x.is_finite()) {
        return Err(LabError::domain("non-finite coordinate"));
    }
    let mut sorted = points.to_vec();
    sorted.sort_by(f64::total_cmp);
    let lo = sorted[0];
    let diameter = sorted[sorted.len() - 1] - lo;
    if diameter == 0.0 {
        return Ok(single_box(config));
    }
    let (max, min) = resolve_range(config.range, diameter, || {
        let n = sorted.len();
        (0..n)
            .map(|i| {
                let left = if i > 0 {
                    sorted[i] - sorted[i - 1]
                } else {
                    f64::INFINITY
                };
                let right = if i + 1 < n {
                    sorted[i + 1] - sorted[i]
                } else {
                    f64::INFINITY
                };
                let d = left.min(right);
                if d == 0.0 {
                    // duplicates: look past the run of equal values
                    let l = sorted[..i].iter().rev().find(|&&y| y != sorted[i]);
                    let r = sorted[i + 1..].iter().find(|&&y| y != sorted[i]);
                    let dl = l.map_or(f64::INFINITY, |y| sorted[i] - y);
                    let dr = r.map_or(f64::INFINITY, |y| y - sorted[i]);
                    dl.min(dr)
                } else {
                    d
                }
            })
            .filter(|d| d.is_finite())
            .collect()
    })?;
    let scales = ladder(max, min, config.per_octave);
    let counts: Vec<u64> = scales
        .iter()
        .map(|&eps| count_boxes_sorted_1d(&sorted, eps, lo))
        .collect();
    let mut distinct = sorted.clone();
    distinct.dedup();
    fit(scales, counts, distinct.len(), config)
}

/// Occupied square boxes of side `eps` anchored at `anchor`.
pub fn count_boxes_2d(points: &[Complex64], eps: f64, anchor: Complex64) -> u64 {
    let (_, hi) = bounds(points);
    let (top_x, top_y) = (
        last_box(hi.re - anchor.re, eps),
        last_box(hi.im - anchor.im, eps),
    );
    let mut keys: Vec<(i64, i64)> = points
        .iter()
        .map(|z| {
            (
                box_index(z.re - anchor.re, eps, top_x),
                box_index(z.im - anchor.im, eps, top_y),
            )
        })
        .collect();
    keys.sort_unstable();
    keys.dedup();
    keys.len() as u64
}

/// Distance from each point to its nearest distinct neighbour, via a
/// uniform bucket grid.
pub fn nearest_neighbour_2d(points: &[Complex64]) -> Vec<f64> {
    use std::collections::HashMap;

    let n = points.len();
    if n < 2 {
        return vec![];
    }
    let (lo, hi) = bounds(points);
    let extent = (hi.re - lo.re).max(hi.im - lo.im);
    if extent == 0.0 {
        return vec![];
    }
    let cell = extent / (n as f64).sqrt();
    let key = |z: &Complex64| {
        (
            ((z.re - lo.re) / cell).floor() as i64,
            ((z.im - lo.im) / cell).floor() as i64,
        )
    };
    let mut grid: HashMap<(i64, i64), Vec<usize>> = HashMap::new();
    for (i, z) in points.iter().enumerate() {
        grid.entry(key(z)).or_default().push(i);
    }
    let max_ring = (extent / cell).ceil() as i64 + 1;
    points
        .iter()
        .map(|z| {
            let (cx, cy) = key(z);
            let mut best = f64::INFINITY;
            for ring in 0..=max_ring {
                // every point outside the searched rings is at least this far
                if best <= (ring - 1).max(0) as f64 * cell {
                    break;
                }
                for dx in -ring..=ring {
                    for dy in -ring..=ring {
                        if dx.abs() != ring && dy.abs() != ring {
                            continue;
                        }
                        if let Some(bucket) = grid.get(&(cx + dx, cy + dy)) {
                            for &j in bucket {
                                let d = (points[j] - z).norm();
                                if d > 0.0 && d < best {
                                    best = d;
                                }
                            }
                        }
                    }
                }
            }
            best
        })
        .filter(|d| d.is_finite())
        .collect()
}

/// Componentwise minimum and maximum corners of a point cloud.
pub fn bounds(points: &[Complex64]) -> (Complex64, Complex64) {
    let mut lo = Complex64::new(f64::INFINITY, f64::INFINITY);
    let mut hi = Complex64::new(f64::NEG_INFINITY, f64::NEG_INFINITY);
    for z in points {
        lo.re = lo.re.min(z.re);
        lo.im = lo.im.min(z.im);
        hi.re = hi.re.max(z.re);
        hi.im = hi.im.max(z.im);
    }
    (lo, hi)
}

/// Box-counting dimension of a planar point cloud, with square boxes
/// anchored at the lower-left corner of the bounding box.
pub fn box_dimension_2d(points: &[Complex64], config: BoxCountConfig) -> Result<BoxCountResult> {
    if !points.is_empty() && points.iter().all(|&z| z == points[0]) {
        return Ok(single_box(config));
    }
    if points.len() < MIN_POINTS {
        return Err(LabError::InsufficientScales(format!(
            "{} points, need at least {MIN_POINTS}",
            points.len()
        )));
    }
    if points
        .iter()
        .any(|z| !z.re.is_finite() || !z.im.is_finite())
    {
        return Err(LabError::domain("non-finite coordinate"));
    }
    let (lo, hi) = bounds(points);
    let diameter = (hi - lo).norm();
    if diameter == 0.0 {
        return Ok(single_box(config));
    }
    let (max, min) = resolve_range(config.range, diameter, || nearest_neighbour_2d(points))?;
    let scales = ladder(max, min, config.per_octave);
    let counts: Vec<u64> = scales
        .iter()
        .map(|&eps| count_boxes_2d(points, eps, lo))
        .collect();
    let mut keys: Vec<(u64, u64)> = points
        .iter()
        .map(|z| (z.re.to_bits(), z.im.to_bits()))
        .collect();
    keys.sort_unstable();
    keys.dedup();
    fit(scales, counts, keys.len(), config)
}

/// Nondecreasing mass profile `y ↦ ν([0, y])` sampled at increasing knots.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeasureGrid {
    knots: Vec<f64>,
    mass: Vec<f64>,
}

impl MeasureGrid {
    pub fn new(knots: Vec<f64>, mass: Vec<f64>) -> Result<Self> {
        if knots.len() != mass.len() || knots.len() < 2 {
            return Err(LabError::domain(
                "knots and mass need equal length of at least 2",
            ));
        }
        if !knots.windows(2).all(|w| w[0] < w[1]) {
            return Err(LabError::domain("knots must be strictly increasing"));
        }
        if !mass.iter().all(|m| m.is_finite()) || !mass.windows(2).all(|w| w[0] <= w[1]) {
            return Err(LabError::domain("mass must be finite and nondecreasing"));
        }
        Ok(MeasureGrid { knots, mass })
    }

    /// Lebesgue measure on `[0, 1]` sampled at `n + 1` knots.
    pub fn identity(n: usize) -> Self {
        let knots: Vec<f64> = (0..=n).map(|i| i as f64 / n as f64).collect();
        MeasureGrid {
            mass: knots.clone(),
            knots,
        }
    }

    pub fn knots(&self) -> &[f64] {
        &self.knots
    }

    pub fn mass(&self) -> &[f64] {
        &self.mass
    }

    pub fn total(&self) -> f64 {
        self.mass[self.mass.len() - 1] - self.mass[0]
    }

    /// Linear interpolation of the profile at `y`.
    pub fn at(&self, y: f64) -> Result<f64> {
        let first = self.knots[0];
        let last = self.knots[self.knots.len() - 1];
        if !(y >= first && y <= last) {
            return Err(LabError::Range(format!(
                "{y} outside knots [{first}, {last}]"
            )));
        }
        let i = self.knots.partition_point(|&k| k <= y);
        if i >= self.knots.len() {
            return Ok(self.mass[self.mass.len() - 1]);
        }
        let (k0, k1) = (self.knots[i - 1], self.knots[i]);
        let (m0, m1) = (self.mass[i - 1], self.mass[i]);
        let t = (y - k0) / (k1 - k0);
        Ok(m0 + t * (m1 - m0))
    }
}

/// `{ν([0, y]) : y ∈ Y}` for the profile in `grid`.
pub fn pushforward_set(grid: &MeasureGrid, ys: &[f64]) -> Result<Vec<f64>> {
    ys.iter().map(|&y| grid.at(y)).collect()
}
