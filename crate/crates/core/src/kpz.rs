//! Closed-form dimension formulas.
//!
//! [`phi`] maps the Hausdorff dimension of a deterministic boundary set to
//! the dimension of its image on an SLE curve under the inverse centered
//! Loewner map. The remaining functions are the one-dimensional KPZ
//! quadratic [`psi`], its inverse, the two time-parameterization variants
//! and a table of classical SLE dimensions used as consistency anchors.

use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};

/// SLE parameter. Strictly positive and never equal to 4.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct Kappa(f64);

impl Kappa {
    pub fn new(value: f64) -> Result<Self> {
        if !value.is_finite() || value <= 0.0 {
            return Err(LabError::domain(format!(
                "kappa must be positive, got {value}"
            )));
        }
        if value == 4.0 {
            return Err(LabError::domain("kappa = 4 is excluded"));
        }
        Ok(Kappa(value))
    }

    pub fn value(self) -> f64 {
        self.0
    }

    /// The dual parameter 16/κ.
    pub fn dual(self) -> Kappa {
        Kappa(16.0 / self.0)
    }

    /// Coupling constant matched to this κ: √κ below 4, 4/√κ above.
    pub fn gamma(self) -> Gamma {
        let g = if self.0 < 4.0 {
            self.0.sqrt()
        } else {
            4.0 / self.0.sqrt()
        };
        Gamma(g)
    }
}

impl TryFrom<f64> for Kappa {
    type Error = LabError;
    fn try_from(v: f64) -> Result<Self> {
        Kappa::new(v)
    }
}

impl From<Kappa> for f64 {
    fn from(k: Kappa) -> f64 {
        k.0
    }
}

/// Liouville coupling constant in the open interval (0, 2).
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct Gamma(f64);

impl Gamma {
    pub fn new(value: f64) -> Result<Self> {
        if !(value > 0.0 && value < 2.0) {
            return Err(LabError::domain(format!(
                "gamma must lie in (0, 2), got {value}"
            )));
        }
        Ok(Gamma(value))
    }

    pub fn from_kappa(kappa: Kappa) -> Self {
        kappa.gamma()
    }

    pub fn value(self) -> f64 {
        self.0
    }

    /// Coordinate-change constant Q = 2/γ + γ/2.
    pub fn q(self) -> f64 {
        2.0 / self.0 + self.0 / 2.0
    }
}

impl TryFrom<f64> for Gamma {
    type Error = LabError;
    fn try_from(v: f64) -> Result<Self> {
        Gamma::new(v)
    }
}

impl From<Gamma> for f64 {
    fn from(g: Gamma) -> f64 {
        g.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DimensionRole {
    Boundary,
    Planar,
    TimeSet,
}

impl DimensionRole {
    fn upper(self) -> f64 {
        match self {
            DimensionRole::Planar => 2.0,
            DimensionRole::Boundary | DimensionRole::TimeSet => 1.0,
        }
    }
}

/// A dimension tagged with the kind of set it belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DimensionValue {
    value: f64,
    role: DimensionRole,
}

impl DimensionValue {
    /// Rounding slack allowed past the ends of the admissible range.
    const SLACK: f64 = 1e-12;

    pub fn new(value: f64, role: DimensionRole) -> Result<Self> {
        let hi = role.upper();
        if !(value >= -Self::SLACK && value <= hi + Self::SLACK) {
            return Err(LabError::domain(format!(
                "{role:?} dimension must lie in [0, {hi}], got {value}"
            )));
        }
        Ok(DimensionValue {
            value: value.clamp(0.0, hi),
            role,
        })
    }

    pub fn value(self) -> f64 {
        self.value
    }

    pub fn role(self) -> DimensionRole {
        self.role
    }
}

fn check_unit(d: f64, what: &str) -> Result<()> {
    if (0.0..=1.0).contains(&d) {
        Ok(())
    } else {
        Err(LabError::domain(format!(
            "{what} must lie in [0, 1], got {d}"
        )))
    }
}

/// Dimension of `f_t⁻¹(Y)` given `dim Y = d`.
///
/// Evaluated in the rationalized form `d (12 + 3κ + s) / (2 (4 + κ + s))`
/// with `s = √((4+κ)² − 16κd)`, which is algebraically identical to the
/// product form but free of cancellation near `d = 0`.
pub fn phi(kappa: Kappa, d: f64) -> Result<DimensionValue> {
    check_unit(d, "boundary dimension")?;
    let k = kappa.value();
    let s = ((4.0 + k).powi(2) - 16.0 * k * d).sqrt();
    let value = d * (12.0 + 3.0 * k + s) / (2.0 * (4.0 + k + s));
    DimensionValue::new(value, DimensionRole::Planar)
}

/// The literal product form of [`phi`], with no domain check. Returns NaN
/// when the radicand is negative.
pub fn phi_product_form(kappa: f64, d: f64) -> f64 {
    let s = ((4.0 + kappa).powi(2) - 16.0 * kappa * d).sqrt();
    (4.0 + kappa - s) * (12.0 + 3.0 * kappa + s) / (32.0 * kappa)
}

/// One-dimensional KPZ quadratic `(1 + γ²/4) d − (γ²/4) d²`.
pub fn psi(gamma: Gamma, d: f64) -> Result<DimensionValue> {
    check_unit(d, "dimension")?;
    let a = gamma.value().powi(2) / 4.0;
    DimensionValue::new((1.0 + a) * d - a * d * d, DimensionRole::Boundary)
}

/// Inverse of [`psi`] on `[0, 1]`.
///
/// The quadratic has two roots; the one at or below the vertex
/// `(1 + a) / (2a) ≥ 1` is the only one in `[0, 1]` and is returned. The
/// other root is rejected.
pub fn psi_inverse(gamma: Gamma, d: f64) -> Result<DimensionValue> {
    check_unit(d, "dimension")?;
    let a = gamma.value().powi(2) / 4.0;
    let b = 1.0 + a;
    // Smaller root of a x² − b x + d = 0, written as 2d / (b + √(b² − 4ad)).
    let disc = (b * b - 4.0 * a * d).max(0.0);
    let x = 2.0 * d / (b + disc.sqrt());
    DimensionValue::new(x, DimensionRole::Boundary)
}

/// `2 Ψ_γ(½ Ψ_γ⁻¹(d))` with γ matched to κ. Agrees with [`phi`].
pub fn phi_via_psi(kappa: Kappa, d: f64) -> Result<DimensionValue> {
    let gamma = kappa.gamma();
    let quantum = psi_inverse(gamma, d)?.value();
    let half = psi(gamma, quantum / 2.0)?.value();
    DimensionValue::new(2.0 * half, DimensionRole::Planar)
}

/// Curve-set dimension from the dimension of its time set when the curve
/// is parameterized by quantum length: `(1 + γ²/4) Δ − (γ²/8) Δ²`.
pub fn length_kpz(gamma: Gamma, d_time: f64) -> Result<DimensionValue> {
    check_unit(d_time, "time-set dimension")?;
    let g2 = gamma.value().powi(2);
    let value = (1.0 + g2 / 4.0) * d_time - (g2 / 8.0) * d_time * d_time;
    DimensionValue::new(value, DimensionRole::Planar)
}

/// Curve-set dimension from the dimension of its time set under quantum
/// natural time: `(1 + 4/γ²) Δ − (2/γ²) Δ²`.
///
/// Returned unclamped; values above 2 are possible and left to the caller.
pub fn natural_time_kpz(gamma: Gamma, d_time: f64) -> Result<f64> {
    check_unit(d_time, "time-set dimension")?;
    let g2 = gamma.value().powi(2);
    Ok((1.0 + 4.0 / g2) * d_time - (2.0 / g2) * d_time * d_time)
}

/// Correlation `−cos(4π/κ)` of the boundary-length Brownian motion of
/// space-filling SLE. Defined for κ > 4.
pub fn peanosphere_correlation(kappa: Kappa) -> Result<f64> {
    let k = kappa.value();
    if k <= 4.0 {
        return Err(LabError::domain(format!(
            "peanosphere correlation needs kappa > 4, got {k}"
        )));
    }
    Ok(-(4.0 * std::f64::consts::PI / k).cos())
}

/// Classical SLE dimensions. Every entry except the curve dimension is
/// only defined for κ ∈ (4, 8).
#[derive(Debug, Clone, Copy)]
pub struct KnownDimensions {
    kappa: Kappa,
}

pub fn known_dimensions(kappa: Kappa) -> KnownDimensions {
    KnownDimensions { kappa }
}

impl KnownDimensions {
    pub const NAMES: [&'static str; 6] = [
        "curve_dim",
        "boundary_intersection",
        "double_points",
        "cut_points",
        "dual_boundary_hit",
        "ancestor_free",
    ];

    fn k(&self) -> f64 {
        self.kappa.value()
    }

    fn in_light_phase(&self, name: &str) -> Result<f64> {
        let k = self.k();
        if k > 4.0 && k < 8.0 {
            Ok(k)
        } else {
            Err(LabError::domain(format!(
                "{name} needs kappa in (4, 8), got {k}"
            )))
        }
    }

    /// `(1 + κ/8) ∧ 2`.
    pub fn curve_dim(&self) -> f64 {
        (1.0 + self.k() / 8.0).min(2.0)
    }

    /// `2 − 8/κ`.
    pub fn boundary_intersection(&self) -> Result<f64> {
        let k = self.in_light_phase("boundary_intersection")?;
        Ok(2.0 - 8.0 / k)
    }

    /// `2 − (12 − κ)(4 + κ)/(8κ)`.
    pub fn double_points(&self) -> Result<f64> {
        let k = self.in_light_phase("double_points")?;
        Ok(2.0 - (12.0 - k) * (4.0 + k) / (8.0 * k))
    }

    /// `3 − 3κ/8`.
    pub fn cut_points(&self) -> Result<f64> {
        let k = self.in_light_phase("cut_points")?;
        Ok(3.0 - 3.0 * k / 8.0)
    }

    /// Dimension of the intersection of the dual SLE_{16/κ}(16/κ − 4; −8/κ)
    /// boundary curve with the half-line: `5 − 8/κ − κ/2 = (κ−2)(8−κ)/(2κ)`.
    ///
    /// This is the unique `d ∈ [0, 1]` with `Φ_κ(d) = 3 − 3κ/8`. See
    /// [`Self::dual_boundary_hit_plus_variant`] for the `+ κ/2` variant.
    pub fn dual_boundary_hit(&self) -> Result<f64> {
        let k = self.in_light_phase("dual_boundary_hit")?;
        Ok(5.0 - 8.0 / k - k / 2.0)
    }

    /// `5 − 8/κ + κ/2`. Exceeds 1 for every κ in (4, 8), so it is not a
    /// valid argument of [`phi`].
    pub fn dual_boundary_hit_plus_variant(&self) -> Result<f64> {
        let k = self.in_light_phase("dual_boundary_hit")?;
        Ok(5.0 - 8.0 / k + k / 2.0)
    }

    /// `κ/8`.
    pub fn ancestor_free(&self) -> Result<f64> {
        let k = self.in_light_phase("ancestor_free")?;
        Ok(k / 8.0)
    }

    pub fn entries(&self) -> Vec<(&'static str, Result<f64>)> {
        vec![
            ("curve_dim", Ok(self.curve_dim())),
            ("boundary_intersection", self.boundary_intersection()),
            ("double_points", self.double_points()),
            ("cut_points", self.cut_points()),
            ("dual_boundary_hit", self.dual_boundary_hit()),
            ("ancestor_free", self.ancestor_free()),
        ]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn k(v: f64) -> Kappa {
        Kappa::new(v).unwrap()
    }

    fn g(v: f64) -> Gamma {
        Gamma::new(v).unwrap()
    }

    #[test]
    fn kappa_rejects_four_and_nonpositive() {
        assert!(Kappa::new(4.0).is_err());
        assert!(Kappa::new(0.0).is_err());
        assert!(Kappa::new(-1.0).is_err());
        assert!(Kappa::new(f64::NAN).is_err());
        assert!(Kappa::new(3.999).is_ok());
    }

    #[test]
    fn gamma_bounds_and_q() {
        assert!(Gamma::new(0.0).is_err());
        assert!(Gamma::new(2.0).is_err());
        assert_eq!(k(2.0).gamma().value(), 2f64.sqrt());
        assert!((k(16.0).gamma().value() - 1.0).abs() < 1e-15);
        assert!((g(1.0).q() - 2.5).abs() < 1e-15);
    }

    #[test]
    fn phi_examples() {
        assert_eq!(phi(k(2.0), 0.0).unwrap().value(), 0.0);
        assert!((phi(k(2.0), 1.0).unwrap().value() - 1.25).abs() < 1e-12);
        assert!((phi(k(6.0), 2.0 / 3.0).unwrap().value() - 0.75).abs() < 1e-12);
        assert_eq!(phi(k(2.0), 1.0).unwrap().role(), DimensionRole::Planar);
    }

    #[test]
    fn phi_at_plus_variant_argument_is_out_of_domain() {
        // 5 - 8/6 + 6/2 = 6.67 is not a boundary dimension.
        let d = known_dimensions(k(6.0))
            .dual_boundary_hit_plus_variant()
            .unwrap();
        assert!(d > 1.0);
        assert!(matches!(phi(k(6.0), d), Err(LabError::Domain(_))));
        assert!(phi_product_form(6.0, d).is_nan());
        // The corrected argument 5 - 8/6 - 6/2 = 2/3 gives 3 - 18/8.
        let d = known_dimensions(k(6.0)).dual_boundary_hit().unwrap();
        assert!((d - 2.0 / 3.0).abs() < 1e-15);
        assert!((phi(k(6.0), d).unwrap().value() - 0.75).abs() < 1e-12);
    }

    #[test]
    fn phi_domain_errors() {
        assert!(phi(k(2.0), -0.1).is_err());
        assert!(phi(k(2.0), 1.1).is_err());
    }

    #[test]
    fn rationalized_phi_matches_product_form() {
        for &kv in &[0.5, 2.0, 6.0, 32.0] {
            for i in 0..=100 {
                let d = i as f64 / 100.0;
                let a = phi(k(kv), d).unwrap().value();
                let b = phi_product_form(kv, d);
                assert!((a - b).abs() < 1e-12, "kappa={kv} d={d}: {a} vs {b}");
            }
        }
    }

    #[test]
    fn psi_examples() {
        let s2 = g(2f64.sqrt());
        assert_eq!(psi(s2, 0.0).unwrap().value(), 0.0);
        assert!((psi(s2, 1.0).unwrap().value() - 1.0).abs() < 1e-15);
        assert!((psi(s2, 0.5).unwrap().value() - 0.625).abs() < 1e-15);
        assert!(psi(s2, 1.5).is_err());
    }

    #[test]
    fn psi_inverse_examples() {
        let s2 = g(2f64.sqrt());
        assert_eq!(psi_inverse(s2, 0.0).unwrap().value(), 0.0);
        assert!((psi_inverse(s2, 1.0).unwrap().value() - 1.0).abs() < 1e-12);
        assert!((psi_inverse(s2, 0.625).unwrap().value() - 0.5).abs() < 1e-12);
        assert!(psi_inverse(s2, -0.01).is_err());
    }

    #[test]
    fn psi_inverse_middle_thirds_gamma_one() {
        let d = 2f64.ln() / 3f64.ln();
        let x = psi_inverse(g(1.0), d).unwrap().value();
        let oracle = (1.25 - (1.25f64 * 1.25 - d).sqrt()) / 0.5;
        assert!((x - oracle).abs() < 1e-12);
        assert!((x - 0.569642).abs() < 1e-5);
    }

    #[test]
    fn phi_via_psi_examples() {
        assert_eq!(phi_via_psi(k(2.0), 0.0).unwrap().value(), 0.0);
        assert!((phi_via_psi(k(2.0), 1.0).unwrap().value() - 1.25).abs() < 1e-10);
        assert!((phi_via_psi(k(6.0), 2.0 / 3.0).unwrap().value() - 0.75).abs() < 1e-10);
    }

    #[test]
    fn length_kpz_examples() {
        let s2 = g(2f64.sqrt());
        assert_eq!(length_kpz(s2, 0.0).unwrap().value(), 0.0);
        assert!((length_kpz(s2, 1.0).unwrap().value() - 1.25).abs() < 1e-15);
        assert!((length_kpz(s2, 0.5).unwrap().value() - 0.6875).abs() < 1e-15);
        assert!(length_kpz(s2, 2.0).is_err());
    }

    #[test]
    fn natural_time_kpz_examples() {
        assert_eq!(natural_time_kpz(g(1.0), 0.0).unwrap(), 0.0);
        assert!((natural_time_kpz(g(1.0), 1.0).unwrap() - 3.0).abs() < 1e-15);
        assert!((natural_time_kpz(g(1.0), 0.5).unwrap() - 2.0).abs() < 1e-15);
        assert!(natural_time_kpz(g(1.0), -0.5).is_err());
    }

    #[test]
    fn peanosphere_correlation_examples() {
        assert!(peanosphere_correlation(k(8.0)).unwrap().abs() < 1e-15);
        assert!((peanosphere_correlation(k(6.0)).unwrap() - 0.5).abs() < 1e-12);
        let c16 = peanosphere_correlation(k(16.0)).unwrap();
        assert!((c16 + std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-12);
        assert!(peanosphere_correlation(k(2.0)).is_err());
    }

    #[test]
    fn known_dimension_table() {
        let t = known_dimensions(k(6.0));
        assert!((t.curve_dim() - 1.75).abs() < 1e-15);
        assert!((t.boundary_intersection().unwrap() - 2.0 / 3.0).abs() < 1e-15);
        assert!((t.cut_points().unwrap() - 0.75).abs() < 1e-15);
        assert!((t.ancestor_free().unwrap() - 0.75).abs() < 1e-15);
        assert!((t.double_points().unwrap() - 0.75).abs() < 1e-15);
        assert_eq!(known_dimensions(k(10.0)).curve_dim(), 2.0);

        let low = known_dimensions(k(2.0));
        let entries = low.entries();
        assert_eq!(entries.len(), KnownDimensions::NAMES.len());
        assert!(entries[0].1.is_ok());
        assert!(entries[1..].iter().all(|(_, v)| v.is_err()));
    }

    #[test]
    fn dimension_value_ranges() {
        assert!(DimensionValue::new(1.5, DimensionRole::Planar).is_ok());
        assert!(DimensionValue::new(1.5, DimensionRole::Boundary).is_err());
        assert!(DimensionValue::new(1.5, DimensionRole::TimeSet).is_err());
        assert!(DimensionValue::new(-0.1, DimensionRole::Planar).is_err());
    }
}
