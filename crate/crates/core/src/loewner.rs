//! Chordal Loewner evolution discretized as a chain of vertical slit maps
//! (the "zipper").
//!
//! Over each capacity step the driving function is held constant. Step `k`
//! first recenters at the driving increment `δ_k` and then grows a vertical
//! slit of half-plane capacity `Δt_k` from the origin:
//!
//! ```text
//! h_k(w)    = √((w − δ_k)² + 4Δt_k)
//! h_k⁻¹(u)  = δ_k + √(u² − 4Δt_k)
//! ```
//!
//! The centered map is `f_t = h_N ∘ … ∘ h_1` and the tip of the curve is
//! `f_t⁻¹(0)`. The inverse maps zip real points `|u| < 2√Δt_k` onto the two
//! sides of the slit.

use std::io::Write;

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};
use crate::kpz::Kappa;

/// Discretized driving function `W_t = √κ B_t` on a capacity-time grid.
#[derive(Debug, Clone, PartialEq)]
pub struct DrivingPath {
    times: Vec<f64>,
    values: Vec<f64>,
    kappa: Kappa,
    seed: u64,
}

impl DrivingPath {
    /// Build a path from explicit samples. `values[0]` must be 0.
    pub fn from_samples(times: Vec<f64>, values: Vec<f64>, kappa: Kappa) -> Result<Self> {
        if times.len() < 2 || times.len() != values.len() {
            return Err(LabError::domain(
                "a driving path needs at least two matching samples",
            ));
        }
        if times[0] != 0.0 || !times.windows(2).all(|w| w[0] < w[1]) {
            return Err(LabError::domain(
                "times must start at 0 and increase strictly",
            ));
        }
        if values[0] != 0.0 {
            return Err(LabError::domain("driving function must start at 0"));
        }
        Ok(DrivingPath {
            times,
            values,
            kappa,
            seed: 0,
        })
    }

    /// Identically zero driving: a single vertical slit of capacity `t_final`.
    pub fn constant_zero(kappa: Kappa, t_final: f64, n_steps: usize) -> Result<Self> {
        let times = uniform_grid(t_final, n_steps)?;
        let values = vec![0.0; times.len()];
        DrivingPath::from_samples(times, values, kappa)
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn kappa(&self) -> Kappa {
        self.kappa
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn n_steps(&self) -> usize {
        self.times.len() - 1
    }

    pub fn t_final(&self) -> f64 {
        self.times[self.times.len() - 1]
    }

    /// Final value `W_t`.
    pub fn terminal(&self) -> f64 {
        self.values[self.values.len() - 1]
    }

    /// Joins `other` after this path, shifting its times and values so the
    /// result is continuous.
    pub fn concat(&self, other: &DrivingPath) -> DrivingPath {
        let (t0, w0) = (self.t_final(), self.terminal());
        let mut times = self.times.clone();
        let mut values = self.values.clone();
        times.extend(other.times[1..].iter().map(|t| t + t0));
        values.extend(other.values[1..].iter().map(|w| w + w0));
        DrivingPath {
            times,
            values,
            kappa: self.kappa,
            seed: self.seed,
        }
    }
}

fn uniform_grid(t_final: f64, n_steps: usize) -> Result<Vec<f64>> {
    if n_steps < 1 {
        return Err(LabError::domain("n_steps must be at least 1"));
    }
    if !(t_final > 0.0 && t_final.is_finite()) {
        return Err(LabError::domain(format!(
            "t_final must be positive, got {t_final}"
        )));
    }
    let dt = t_final / n_steps as f64;
    let mut times: Vec<f64> = (0..=n_steps).map(|k| k as f64 * dt).collect();
    times[n_steps] = t_final;
    Ok(times)
}

/// Sample `W` on a uniform grid with exact Gaussian increments of variance
/// `κ Δt`. Deterministic in `seed`.
pub fn sample_driving(
    kappa: Kappa,
    t_final: f64,
    n_steps: usize,
    seed: u64,
) -> Result<DrivingPath> {
    let times = uniform_grid(t_final, n_steps)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut values = Vec::with_capacity(times.len());
    let mut w = 0.0;
    values.push(w);
    for pair in times.windows(2) {
        let z: f64 = StandardNormal.sample(&mut rng);
        w += (kappa.value() * (pair[1] - pair[0])).sqrt() * z;
        values.push(w);
    }
    Ok(DrivingPath {
        times,
        values,
        kappa,
        seed,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Orientation {
    Forward,
    Reverse,
}

impl Orientation {
    fn name(self) -> &'static str {
        match self {
            Orientation::Forward => "forward",
            Orientation::Reverse => "reverse",
        }
    }
}

/// One elementary map: capacity increment and driving increment.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SlitStep {
    pub dt: f64,
    pub delta: f64,
    /// `2√dt`, the slit height and half-width of the zipped window.
    half_width: f64,
}

impl SlitStep {
    pub fn new(dt: f64, delta: f64) -> Self {
        SlitStep {
            dt,
            delta,
            half_width: 2.0 * dt.sqrt(),
        }
    }

    pub fn half_width(&self) -> f64 {
        self.half_width
    }

    /// `√((w − δ)² + 4Δt)` into the closed upper half-plane.
    #[inline]
    pub fn apply(&self, w: Complex64) -> Complex64 {
        let v = w - self.delta;
        let c = Complex64::new(0.0, self.half_width);
        sqrt_upper((v - c) * (v + c), v.re)
    }

    /// `δ + √(u² − 4Δt)` into the closed upper half-plane.
    #[inline]
    pub fn invert(&self, u: Complex64) -> Complex64 {
        let h = self.half_width;
        let zeta = (u - h) * (u + h);
        sqrt_upper(zeta, u.re) + self.delta
    }

    /// Real-line version of [`Self::invert`] for points outside the window.
    #[inline]
    fn invert_real(&self, x: f64) -> f64 {
        let h = self.half_width;
        let a = x.abs();
        ((a - h) * (a + h)).sqrt().copysign(x) + self.delta
    }
}

/// Square root with nonnegative imaginary part. When the root is real the
/// sign follows `hint`, which keeps real points on their own side of the
/// slit instead of jumping across the branch cut.
#[inline]
pub fn sqrt_upper(zeta: Complex64, hint: f64) -> Complex64 {
    let (a, b) = (zeta.re, zeta.im);
    if b == 0.0 {
        return if a >= 0.0 {
            Complex64::new(a.sqrt().copysign(hint), 0.0)
        } else {
            Complex64::new(0.0, (-a).sqrt())
        };
    }
    let mut m = (a * a + b * b).sqrt();
    if !m.is_finite() {
        m = a.hypot(b);
    }
    if a >= 0.0 {
        let t = ((m + a) * 0.5).sqrt();
        Complex64::new(t.copysign(b), b.abs() / (2.0 * t))
    } else {
        let t = ((m - a) * 0.5).sqrt();
        Complex64::new(b / (2.0 * t), t)
    }
}

/// A driving path turned into a chain of elementary slit maps, kept in
/// chronological order. The orientation records whether the chain stands
/// for `f_t` or for `f_t⁻¹`.
#[derive(Debug, Clone, PartialEq)]
pub struct SlitChain {
    steps: Vec<SlitStep>,
    orientation: Orientation,
    kappa: Kappa,
}

impl SlitChain {
    fn from_path(path: &DrivingPath, orientation: Orientation) -> Self {
        let steps = path
            .times
            .windows(2)
            .zip(path.values.windows(2))
            .map(|(t, w)| SlitStep::new(t[1] - t[0], w[1] - w[0]))
            .collect();
        SlitChain {
            steps,
            orientation,
            kappa: path.kappa,
        }
    }

    pub fn forward(path: &DrivingPath) -> Self {
        SlitChain::from_path(path, Orientation::Forward)
    }

    pub fn reverse(path: &DrivingPath) -> Self {
        SlitChain::from_path(path, Orientation::Reverse)
    }

    pub fn steps(&self) -> &[SlitStep] {
        &self.steps
    }

    pub fn orientation(&self) -> Orientation {
        self.orientation
    }

    pub fn kappa(&self) -> Kappa {
        self.kappa
    }

    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    /// Total half-plane capacity `Σ Δt_k`.
    pub fn capacity(&self) -> f64 {
        self.steps.iter().map(|s| s.dt).sum()
    }

    /// The same steps with the opposite orientation.
    pub fn flipped(&self) -> Self {
        SlitChain {
            steps: self.steps.clone(),
            orientation: match self.orientation {
                Orientation::Forward => Orientation::Reverse,
                Orientation::Reverse => Orientation::Forward,
            },
            kappa: self.kappa,
        }
    }

    fn expect(&self, orientation: Orientation) -> Result<()> {
        if self.orientation == orientation {
            Ok(())
        } else {
            Err(LabError::Orientation {
                expected: orientation.name(),
                found: self.orientation.name(),
            })
        }
    }

    /// Real interval `(left, right)` of points zipped onto the curve by
    /// [`reverse_zip`], tracked forward through the hull's contact points.
    pub fn zipped_window(&self) -> (f64, f64) {
        let mut hull: Option<(f64, f64)> = None;
        for s in &self.steps {
            let (lo, hi) = match hull {
                None => (s.delta, s.delta),
                Some((l, r)) => (l.min(s.delta), r.max(s.delta)),
            };
            let r = ((hi - s.delta).powi(2) + s.half_width * s.half_width).sqrt();
            let l = -((s.delta - lo).powi(2) + s.half_width * s.half_width).sqrt();
            hull = Some((l, r));
        }
        hull.unwrap_or((0.0, 0.0))
    }
}

/// Image of `z` under the discretized centered map `f_t`.
///
/// Fails with [`LabError::Swallowed`] if at some step the point lies on the
/// slit below its tip (the slit base included).
pub fn forward_map(chain: &SlitChain, z: Complex64) -> Result<Complex64> {
    chain.expect(Orientation::Forward)?;
    if z.im < 0.0 {
        return Err(LabError::domain(
            "forward_map needs a point in the closed upper half-plane",
        ));
    }
    let mut w = z;
    for (k, s) in chain.steps.iter().enumerate() {
        let v = w - s.delta;
        if v.re == 0.0 && v.im >= 0.0 && v.im < s.half_width {
            return Err(LabError::Swallowed { step: k });
        }
        w = s.apply(w);
    }
    Ok(w)
}

/// Image of an interior point `u ∈ ℍ` under `f_t⁻¹`.
pub fn reverse_map(chain: &SlitChain, u: Complex64) -> Result<Complex64> {
    chain.expect(Orientation::Reverse)?;
    Ok(chain.steps.iter().rev().fold(u, |acc, s| s.invert(acc)))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ZipStatus {
    Zipped,
    StillOnBoundary,
}

impl ZipStatus {
    pub fn as_str(self) -> &'static str {
        match self {
            ZipStatus::Zipped => "zipped",
            ZipStatus::StillOnBoundary => "still-on-boundary",
        }
    }
}

/// Apply steps `top, top-1, …, 0` of `steps` to the real point `x`.
#[inline]
fn zip_real(steps: &[SlitStep], x: f64) -> (Complex64, ZipStatus) {
    zip_many(steps, &[(steps.len(), x)])[0]
}

/// Independent points pushed through the chain together. Each point is a
/// long serial dependency chain, so interleaving several keeps the FPU busy.
const LANES: usize = 16;

/// Zip each `(k, x)`: apply steps `k-1, …, 0` to the real point `x`.
fn zip_many(steps: &[SlitStep], jobs: &[(usize, f64)]) -> Vec<(Complex64, ZipStatus)> {
    let mut order: Vec<usize> = (0..jobs.len()).collect();
    order.sort_by_key(|&i| jobs[i].0);
    let mut out = vec![(Complex64::new(0.0, 0.0), ZipStatus::StillOnBoundary); jobs.len()];
    for chunk in order.chunks(LANES) {
        let width = chunk.len();
        let mut z = [Complex64::new(0.0, 0.0); LANES];
        let mut start = [0usize; LANES];
        let mut zipped = [false; LANES];
        for (lane, &i) in chunk.iter().enumerate() {
            start[lane] = jobs[i].0;
            z[lane] = Complex64::new(jobs[i].1, 0.0);
        }
        let top = start[..width].iter().copied().max().unwrap_or(0);
        for j in (0..top).rev() {
            let s = &steps[j];
            for lane in 0..width {
                if j >= start[lane] {
                    continue;
                }
                if zipped[lane] {
                    z[lane] = s.invert(z[lane]);
                } else if z[lane].re.abs() < s.half_width {
                    z[lane] = s.invert(z[lane]);
                    zipped[lane] = true;
                } else {
                    z[lane].re = s.invert_real(z[lane].re);
                }
            }
        }
        for (lane, &i) in chunk.iter().enumerate() {
            let status = if zipped[lane] {
                ZipStatus::Zipped
            } else {
                ZipStatus::StillOnBoundary
            };
            out[i] = (z[lane], status);
        }
    }
    out
}

/// Image of the real point `x` under `f_t⁻¹`, applied tip-first, with the
/// status telling whether `x` was lifted onto the curve.
pub fn reverse_zip(chain: &SlitChain, x: f64) -> Result<(Complex64, ZipStatus)> {
    chain.expect(Orientation::Reverse)?;
    Ok(zip_real(&chain.steps, x))
}

/// Finite point cloud with one label per point.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct TraceCloud {
    pub points: Vec<Complex64>,
    pub labels: Vec<f64>,
    pub statuses: Vec<ZipStatus>,
}

impl TraceCloud {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    fn push(&mut self, label: f64, z: Complex64, status: ZipStatus) {
        self.labels.push(label);
        self.points.push(z);
        self.statuses.push(status);
    }

    /// CSV with header `label,re,im,status`.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["label", "re", "im", "status"])?;
        for ((l, z), s) in self.labels.iter().zip(&self.points).zip(&self.statuses) {
            w.write_record([
                l.to_string(),
                z.re.to_string(),
                z.im.to_string(),
                s.as_str().into(),
            ])?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Points `η(t_k)` at `resolution` evenly spaced prefixes of the chain,
/// labelled by capacity time. The last point is the tip `η(t)`.
pub fn trace(chain: &SlitChain, resolution: usize) -> Result<TraceCloud> {
    let n = chain.steps.len();
    if resolution == 0 || resolution > n {
        return Err(LabError::domain(format!(
            "resolution must lie in [1, {n}], got {resolution}"
        )));
    }
    let ks: Vec<usize> = (1..=resolution)
        .map(|j| (j * n).div_ceil(resolution))
        .collect();
    let jobs: Vec<(usize, f64)> = ks.iter().map(|&k| (k, 0.0)).collect();
    let images = zip_many(&chain.steps, &jobs);
    Ok(assemble(chain, ks.into_iter().zip(images)))
}

/// Cloud labelled by capacity time from `(prefix length, image)` pairs in
/// increasing prefix order.
fn assemble(
    chain: &SlitChain,
    nodes: impl IntoIterator<Item = (usize, (Complex64, ZipStatus))>,
) -> TraceCloud {
    let mut cloud = TraceCloud::default();
    let mut elapsed = 0.0;
    let mut prev = 0;
    for (k, (z, status)) in nodes {
        elapsed += chain.steps[prev..k].iter().map(|s| s.dt).sum::<f64>();
        prev = k;
        cloud.push(elapsed, z, status);
    }
    cloud
}

/// Trace points refined until consecutive points are at most `max_gap`
/// apart (or adjacent in the step index), starting from `initial` evenly
/// spaced prefixes. Stops adding points once `max_points` is reached.
///
/// Capacity-uniform sampling leaves long gaps wherever the curve moves fast;
/// bisecting those gaps gives the cloud a uniform Euclidean resolution.
pub fn trace_refined(
    chain: &SlitChain,
    initial: usize,
    max_gap: f64,
    max_points: usize,
) -> Result<TraceCloud> {
    let n = chain.steps.len();
    if initial == 0 || initial > n {
        return Err(LabError::domain(format!(
            "initial resolution must lie in [1, {n}], got {initial}"
        )));
    }
    if max_gap.is_nan() || max_gap <= 0.0 {
        return Err(LabError::domain("max_gap must be positive"));
    }
    let tips = |ks: &[usize]| {
        let jobs: Vec<(usize, f64)> = ks.iter().map(|&k| (k, 0.0)).collect();
        zip_many(&chain.steps, &jobs)
    };
    let ks: Vec<usize> = (1..=initial).map(|j| (j * n).div_ceil(initial)).collect();
    let mut nodes: Vec<(usize, (Complex64, ZipStatus))> =
        ks.iter().copied().zip(tips(&ks)).collect();
    // bisect every long gap, one generation at a time
    loop {
        let mut mids: Vec<usize> = nodes
            .windows(2)
            .filter(|w| w[1].0 - w[0].0 > 1 && (w[1].1 .0 - w[0].1 .0).norm() > max_gap)
            .map(|w| (w[0].0 + w[1].0) / 2)
            .collect();
        mids.truncate(max_points.saturating_sub(nodes.len()));
        if mids.is_empty() {
            break;
        }
        let images = tips(&mids);
        nodes.extend(mids.into_iter().zip(images));
        nodes.sort_by_key(|node| node.0);
    }
    Ok(assemble(chain, nodes))
}

/// Zipped images `f_t⁻¹(y)` for the points `y ∈ Y` that land on the curve,
/// labelled by their boundary coordinate.
pub fn zip_set(chain: &SlitChain, ys: &[f64]) -> Result<TraceCloud> {
    chain.expect(Orientation::Reverse)?;
    let n = chain.steps.len();
    let jobs: Vec<(usize, f64)> = ys.iter().map(|&y| (n, y)).collect();
    let mut cloud = TraceCloud::default();
    for (&y, (z, status)) in ys.iter().zip(zip_many(&chain.steps, &jobs)) {
        if status == ZipStatus::Zipped {
            cloud.push(y, z, status);
        }
    }
    Ok(cloud)
}

/// Chain metadata, serialized as JSON.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChainMeta {
    pub kappa: f64,
    pub t_final: f64,
    pub n_steps: usize,
    pub seed: u64,
}

impl From<&DrivingPath> for ChainMeta {
    fn from(path: &DrivingPath) -> Self {
        ChainMeta {
            kappa: path.kappa.value(),
            t_final: path.t_final(),
            n_steps: path.n_steps(),
            seed: path.seed,
        }
    }
}
