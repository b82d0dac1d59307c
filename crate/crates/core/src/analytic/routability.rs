use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::phase::{check_failure_probability, PhaseFailureModel};
use super::profile::{distance_profile, EXACT_PROFILE_MAX_D};
use crate::error::{RcmError, Result};
use crate::geometry::GeometrySpec;

/// How the expected number of surviving partner nodes is counted.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub enum DenominatorMode {
    /// `(1 - q) N - 1`, the large-N approximation. Can push the ratio above 1
    /// for tiny overlays.
    #[default]
    #[serde(rename = "paper")]
    PaperPN,
    /// `(N - 1)(1 - q)`, the exact expected number of surviving partners of a
    /// surviving root.
    #[serde(rename = "exact")]
    ExactSurvivors,
}

impl DenominatorMode {
    pub fn name(self) -> &'static str {
        match self {
            DenominatorMode::PaperPN => "paper",
            DenominatorMode::ExactSurvivors => "exact",
        }
    }
}

impl fmt::Display for DenominatorMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for DenominatorMode {
    type Err = RcmError;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "paper" | "pn" => Ok(DenominatorMode::PaperPN),
            "exact" | "survivors" => Ok(DenominatorMode::ExactSurvivors),
            other => Err(RcmError::Config(format!(
                "unknown denominator mode '{other}' (expected paper|exact)"
            ))),
        }
    }
}

/// Expected size of a root's reachable component, `E[S]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ExpectedReach {
    /// `Σ n(h) p(h, q)`, or that sum divided by `2^d` when `normalized`.
    pub value: f64,
    pub normalized: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RoutabilityResult {
    pub spec: GeometrySpec,
    pub q: f64,
    pub mode: DenominatorMode,
    /// Routability clamped to `[0, 1]`.
    pub routability: f64,
    /// `1 - routability`.
    pub failed_fraction: f64,
    pub expected_reach: f64,
    /// Whether `expected_reach` (and the ratio) were formed from weights
    /// `n(h) / 2^d` rather than counts.
    pub normalized: bool,
    /// The ratio before clamping.
    pub unclamped: f64,
    pub clamped: bool,
}

/// `E[S] = Σ_{h=1}^{d} n(h) p(h, q)`.
///
/// For `d > 20` the profile weights are `n(h) / 2^d`, so the returned value
/// is `E[S] / 2^d` and `normalized` is set.
pub fn expected_reach(spec: &GeometrySpec, q: f64) -> Result<ExpectedReach> {
    let model = PhaseFailureModel::new(*spec, q)?;
    let profile = distance_profile(spec);
    let success = model.success_curve(spec.d());
    let value = profile
        .values()
        .iter()
        .zip(&success)
        .map(|(n, p)| n * p)
        .sum();
    Ok(ExpectedReach {
        value,
        normalized: profile.is_normalized(),
    })
}

/// `r(N, q) = E[S] / M` where `M` counts the expected surviving partners
/// according to `mode`.
pub fn routability(spec: &GeometrySpec, q: f64, mode: DenominatorMode) -> Result<RoutabilityResult> {
    check_failure_probability(q)?;
    let reach = expected_reach(spec, q)?;
    let denominator = denominator(spec.d(), q, mode)?;
    let unclamped = reach.value / denominator;
    let routability = unclamped.clamp(0.0, 1.0);
    Ok(RoutabilityResult {
        spec: *spec,
        q,
        mode,
        routability,
        failed_fraction: 1.0 - routability,
        expected_reach: reach.value,
        normalized: reach.normalized,
        unclamped,
        clamped: routability != unclamped,
    })
}

/// Denominator in the same units as `expected_reach`: a node count for
/// `d <= 20`, a fraction of `2^d` above.
fn denominator(d: u32, q: f64, mode: DenominatorMode) -> Result<f64> {
    let survive = 1.0 - q;
    let n = (d as f64).exp2();
    if mode == DenominatorMode::PaperPN && survive * n <= 1.0 {
        return Err(RcmError::DegenerateDenominator {
            expected_survivors: survive * n,
        });
    }
    let value = if d <= EXACT_PROFILE_MAX_D {
        match mode {
            DenominatorMode::PaperPN => survive * n - 1.0,
            DenominatorMode::ExactSurvivors => (n - 1.0) * survive,
        }
    } else {
        let inv_n = (-(d as f64)).exp2();
        match mode {
            DenominatorMode::PaperPN => survive - inv_n,
            DenominatorMode::ExactSurvivors => (1.0 - inv_n) * survive,
        }
    };
    Ok(value)
}

/// Tree routability in closed form, `((2-q)^d - 1) / ((1-q) 2^d - 1)`.
///
/// For `d > 20` the equivalent `((1-q/2)^d - 2^-d) / ((1-q) - 2^-d)` is used
/// with the power taken in log space. Not clamped.
pub fn tree_closed_form(d: u32, q: f64) -> Result<f64> {
    // Validates d and q.
    GeometrySpec::tree(d)?;
    check_failure_probability(q)?;
    let denom = denominator(d, q, DenominatorMode::PaperPN)?;
    let numer = if d <= EXACT_PROFILE_MAX_D {
        (2.0 - q).powi(d as i32) - 1.0
    } else {
        (d as f64 * (-q / 2.0).ln_1p()).exp() - (-(d as f64)).exp2()
    };
    Ok(numer / denom)
}
