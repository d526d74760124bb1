//! Digit-restriction Cantor sets: points of [0, 1] whose base-`b` expansion
//! uses only a fixed set of digits. Their Hausdorff dimension is
//! `log m / log b` with `m` the number of kept digits.

use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};
use crate::kpz::{DimensionRole, DimensionValue};

/// Largest number of points [`CantorSpec::discretize`] will produce.
pub const MAX_POINTS: u64 = 10_000_000;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "RawCantorSpec", into = "RawCantorSpec")]
pub struct CantorSpec {
    base: u32,
    digits: Vec<u32>,
    depth: u32,
}

#[derive(Serialize, Deserialize)]
struct RawCantorSpec {
    b: u32,
    #[serde(rename = "K")]
    k: Vec<u32>,
    depth: u32,
}

impl TryFrom<RawCantorSpec> for CantorSpec {
    type Error = LabError;
    fn try_from(raw: RawCantorSpec) -> Result<Self> {
        CantorSpec::new(raw.b, raw.k, raw.depth)
    }
}

impl From<CantorSpec> for RawCantorSpec {
    fn from(spec: CantorSpec) -> Self {
        RawCantorSpec {
            b: spec.base,
            k: spec.digits,
            depth: spec.depth,
        }
    }
}

impl CantorSpec {
    pub fn new(base: u32, mut digits: Vec<u32>, depth: u32) -> Result<Self> {
        if base < 2 {
            return Err(LabError::domain(format!(
                "base must be at least 2, got {base}"
            )));
        }
        digits.sort_unstable();
        digits.dedup();
        if digits.is_empty() {
            return Err(LabError::domain("at least one digit must be kept"));
        }
        if let Some(&d) = digits.iter().find(|&&d| d >= base) {
            return Err(LabError::domain(format!(
                "digit {d} is not below base {base}"
            )));
        }
        if depth < 1 {
            return Err(LabError::domain("depth must be at least 1"));
        }
        Ok(CantorSpec {
            base,
            digits,
            depth,
        })
    }

    /// The classical middle-thirds set.
    pub fn middle_thirds(depth: u32) -> Self {
        CantorSpec::new(3, vec![0, 2], depth).expect("valid spec")
    }

    /// All of [0, 1], represented with binary digits.
    pub fn full_interval(depth: u32) -> Self {
        CantorSpec::new(2, vec![0, 1], depth).expect("valid spec")
    }

    /// A single point (the origin) as a degenerate digit set.
    pub fn single_point(depth: u32) -> Self {
        CantorSpec::new(4, vec![0], depth).expect("valid spec")
    }

    pub fn base(&self) -> u32 {
        self.base
    }

    pub fn digits(&self) -> &[u32] {
        &self.digits
    }

    pub fn depth(&self) -> u32 {
        self.depth
    }

    pub fn with_depth(&self, depth: u32) -> Result<Self> {
        CantorSpec::new(self.base, self.digits.clone(), depth)
    }

    pub fn exact_dimension(&self) -> DimensionValue {
        let m = self.digits.len() as f64;
        let d = m.ln() / (self.base as f64).ln();
        DimensionValue::new(d, DimensionRole::Boundary).expect("log m / log b lies in [0, 1]")
    }

    /// Number of depth-`depth` cylinders, `m^depth`.
    pub fn cardinality(&self, depth: u32) -> Option<u64> {
        (self.digits.len() as u64).checked_pow(depth)
    }

    /// Integer numerators of the depth-`depth` left endpoints over the
    /// common denominator `b^depth`, ascending.
    pub fn numerators(&self, depth: u32) -> Result<(Vec<u64>, u64)> {
        let count = self
            .cardinality(depth)
            .filter(|&c| c <= MAX_POINTS)
            .ok_or_else(|| {
                LabError::Budget(format!(
                    "{}^{} points exceeds the limit of {MAX_POINTS}",
                    self.digits.len(),
                    depth
                ))
            })?;
        let denom = (self.base as u64)
            .checked_pow(depth)
            .filter(|&d| d <= 1u64 << 53)
            .ok_or_else(|| {
                LabError::Budget(format!(
                    "{}^{} is not exactly representable",
                    self.base, depth
                ))
            })?;
        let mut nums = Vec::with_capacity(count as usize);
        nums.push(0u64);
        for _ in 0..depth {
            let mut next = Vec::with_capacity(nums.len() * self.digits.len());
            for &n in &nums {
                for &d in &self.digits {
                    next.push(n * self.base as u64 + d as u64);
                }
            }
            nums = next;
        }
        Ok((nums, denom))
    }

    /// Left endpoints of the `m^depth` cylinders at the given depth,
    /// sorted ascending.
    pub fn discretize_at(&self, depth: u32) -> Result<Vec<f64>> {
        let (nums, denom) = self.numerators(depth)?;
        let denom = denom as f64;
        Ok(nums.into_iter().map(|n| n as f64 / denom).collect())
    }

    /// [`Self::discretize_at`] at this spec's own depth.
    pub fn discretize(&self) -> Result<Vec<f64>> {
        self.discretize_at(self.depth)
    }
}
