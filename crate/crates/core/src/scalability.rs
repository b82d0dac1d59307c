//! Asymptotic classification of routing geometries.
//!
//! A geometry is scalable when routability stays bounded away from zero as
//! `N -> ∞` at fixed `q > 0`, which is equivalent to `lim_{h->∞} p(h, q) > 0`.
//! Since `p(h, q) = Π (1 - Q(m))` with `0 <= Q(m) < 1`, the product has a
//! positive limit exactly when `Σ Q(m)` converges. The verdict therefore
//! follows from how `Q(m)` depends on `m`; the numeric evidence attached to
//! a verdict only illustrates it.

use std::fmt;

use serde::Serialize;

use crate::analytic::{routability, DenominatorMode, PhaseFailureModel, RoutabilityResult};
use crate::error::{RcmError, Result};
use crate::geometry::{GeometryKind, GeometrySpec};

/// Horizons at which partial sums and products are reported.
pub const EVIDENCE_HORIZONS: [u32; 4] = [10, 100, 1_000, 10_000];
/// Two successive decades closer than this count as converged.
pub const CONVERGENCE_TOLERANCE: f64 = 1e-9;
/// `p(h, q)` below this counts as vanished for unscalable geometries.
pub const VANISHING_THRESHOLD: f64 = 1e-6;
/// Largest horizon probed while looking for a converged limit.
pub const MAX_LIMIT_HORIZON: u32 = 1_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Scalable,
    Unscalable,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::Scalable => "scalable",
            Verdict::Unscalable => "unscalable",
        })
    }
}

/// How `Q(m)` behaves as the phase index grows.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum FailureGrowth {
    /// `Q(m)` does not depend on `m`: `Σ Q(m)` diverges.
    Constant,
    /// `Q(m) <= C m q^m`: `Σ Q(m)` converges.
    GeometricDecay,
}

pub fn failure_growth(kind: GeometryKind) -> FailureGrowth {
    match kind {
        GeometryKind::Tree | GeometryKind::Symphony => FailureGrowth::Constant,
        // Q_ring <= Q_xor, and Q_xor only has q^m and m q^m terms.
        GeometryKind::Hypercube | GeometryKind::Xor | GeometryKind::Ring => {
            FailureGrowth::GeometricDecay
        }
    }
}

pub fn structural_verdict(kind: GeometryKind) -> Verdict {
    match failure_growth(kind) {
        FailureGrowth::Constant => Verdict::Unscalable,
        FailureGrowth::GeometricDecay => Verdict::Scalable,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Evidence {
    /// `(M, Σ_{m<=M} Q(m))`
    pub partial_sums: Vec<(u32, f64)>,
    /// `(h, p(h, q))`
    pub partial_products: Vec<(u32, f64)>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScalabilityVerdict {
    pub spec: GeometrySpec,
    pub q: f64,
    pub verdict: Verdict,
    pub growth: FailureGrowth,
    /// `lim_{h->∞} p(h, q)`; reported as 0 for unscalable geometries.
    pub limit_estimate: f64,
    /// Natural log of the last probed `p(h, q)`; finite even when the
    /// estimate underflows.
    pub ln_limit_estimate: f64,
    /// Horizon at which successive decades agreed to within
    /// [`CONVERGENCE_TOLERANCE`], for scalable geometries.
    pub converged_at: Option<u32>,
    /// Smallest `h` with `p(h, q) <` [`VANISHING_THRESHOLD`], for unscalable
    /// geometries.
    pub vanishing_horizon: Option<u32>,
    pub evidence: Evidence,
}

/// Classifies `spec` at failure probability `0 < q < 1`.
///
/// Symphony's `Q` keeps the spec's `d` fixed while `h` grows.
pub fn classify(spec: &GeometrySpec, q: f64) -> Result<ScalabilityVerdict> {
    if q == 0.0 {
        return Err(RcmError::ZeroFailureProbability);
    }
    let model = PhaseFailureModel::new(*spec, q)?;
    let growth = failure_growth(spec.kind());
    let verdict = structural_verdict(spec.kind());

    let horizon = *EVIDENCE_HORIZONS.last().unwrap();
    let curve = model.success_curve(horizon);
    let evidence = collect_evidence(&model, &curve);

    let (limit_estimate, ln_limit_estimate, converged_at, vanishing_horizon) = match verdict {
        Verdict::Scalable => {
            let (limit, ln_limit, at) = converged_limit(&model, curve);
            (limit, ln_limit, at, None)
        }
        Verdict::Unscalable => {
            let ln_limit = model.ln_path_success(horizon)?;
            (0.0, ln_limit, None, vanishing_horizon(&model)?)
        }
    };

    Ok(ScalabilityVerdict {
        spec: *spec,
        q,
        verdict,
        growth,
        limit_estimate,
        ln_limit_estimate,
        converged_at,
        vanishing_horizon,
        evidence,
    })
}

fn collect_evidence(model: &PhaseFailureModel, curve: &[f64]) -> Evidence {
    let mut partial_sums = Vec::with_capacity(EVIDENCE_HORIZONS.len());
    let mut sum = 0.0;
    let mut next = EVIDENCE_HORIZONS.iter().peekable();
    for m in 1..=*EVIDENCE_HORIZONS.last().unwrap() {
        sum += model.failure_at(m);
        if next.peek() == Some(&&m) {
            partial_sums.push((m, sum));
            next.next();
        }
    }
    let partial_products = EVIDENCE_HORIZONS
        .iter()
        .map(|&h| (h, curve[h as usize - 1]))
        .collect();
    Evidence {
        partial_sums,
        partial_products,
    }
}

/// Walks decades `10, 100, ...` until two successive values of `p(h, q)`
/// agree to within the tolerance, extending past the evidence horizon when
/// convergence is slow.
fn converged_limit(model: &PhaseFailureModel, mut curve: Vec<f64>) -> (f64, f64, Option<u32>) {
    let mut prev = curve[9];
    let mut h = 10u32;
    while h < MAX_LIMIT_HORIZON {
        h *= 10;
        if curve.len() < h as usize {
            curve = model.success_curve(h);
        }
        let value = curve[h as usize - 1];
        if (prev - value).abs() < CONVERGENCE_TOLERANCE {
            let ln = model.ln_path_success(h).unwrap_or(f64::NEG_INFINITY);
            return (value, ln, Some(h));
        }
        prev = value;
    }
    let ln = model.ln_path_success(h).unwrap_or(f64::NEG_INFINITY);
    (prev, ln, None)
}

/// Smallest `h` with `p(h, q) < 1e-6`; `None` when `Q` is so small that it
/// lies beyond `u32::MAX`.
fn vanishing_horizon(model: &PhaseFailureModel) -> Result<Option<u32>> {
    let q_const = model.failure_at(1);
    if q_const <= 0.0 {
        return Ok(None);
    }
    if q_const >= 1.0 {
        return Ok(Some(1));
    }
    let guess = (VANISHING_THRESHOLD.ln() / (-q_const).ln_1p()).ceil();
    if !guess.is_finite() || guess >= u32::MAX as f64 {
        return Ok(None);
    }
    let mut h = (guess as u32).max(1);
    while h > 1 && model.path_success(h - 1)? < VANISHING_THRESHOLD {
        h -= 1;
    }
    while model.path_success(h)? >= VANISHING_THRESHOLD {
        h += 1;
    }
    Ok(Some(h))
}

/// Routability of `spec` re-targeted to identifier length `d` across a grid
/// of failure probabilities. Large `d` goes through the normalized path.
pub fn asymptotic_curve(
    spec: &GeometrySpec,
    d: u32,
    q_grid: &[f64],
    mode: DenominatorMode,
) -> Result<Vec<RoutabilityResult>> {
    let target = spec.with_d(d)?;
    q_grid
        .iter()
        .map(|&q| routability(&target, q, mode))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec(kind: GeometryKind) -> GeometrySpec {
        GeometrySpec::new(kind, 16).unwrap()
    }

    #[test]
    fn verdicts_by_geometry() {
        for &q in &[0.05, 0.1, 0.3] {
            for kind in GeometryKind::ALL {
                let v = classify(&spec(kind), q).unwrap();
                let expected = match kind {
                    GeometryKind::Tree | GeometryKind::Symphony => Verdict::Unscalable,
                    _ => Verdict::Scalable,
                };
                assert_eq!(v.verdict, expected, "{kind} q={q}");
            }
        }
    }

    #[test]
    fn zero_q_rejected() {
        assert_eq!(
            classify(&spec(GeometryKind::Xor), 0.0),
            Err(RcmError::ZeroFailureProbability)
        );
    }

    #[test]
    fn hypercube_limit_is_euler_product() {
        // Π_{m>=1} (1 - 0.1^m), evaluated independently to 60 factors.
        let oracle: f64 = (1..=60).map(|m| 1.0 - 0.1f64.powi(m)).product();
        let v = classify(&spec(GeometryKind::Hypercube), 0.1).unwrap();
        assert!((v.limit_estimate - oracle).abs() < 1e-12);
        assert!(v.converged_at.unwrap() <= 10_000);
    }

    #[test]
    fn tree_vanishes_by_132_hops() {
        let v = classify(&spec(GeometryKind::Tree), 0.1).unwrap();
        assert_eq!(v.vanishing_horizon, Some(132));
        assert_eq!(v.limit_estimate, 0.0);
    }

    #[test]
    fn evidence_is_monotone() {
        for kind in GeometryKind::ALL {
            let v = classify(&spec(kind), 0.3).unwrap();
            let sums = &v.evidence.partial_sums;
            let prods = &v.evidence.partial_products;
            assert!(sums.windows(2).all(|w| w[0].1 <= w[1].1), "{kind}");
            assert!(prods.windows(2).all(|w| w[0].1 >= w[1].1), "{kind}");
            assert_eq!(sums.iter().map(|s| s.0).collect::<Vec<_>>(), EVIDENCE_HORIZONS);
        }
    }

    #[test]
    fn ring_limit_dominates_xor() {
        for &q in &[0.05, 0.1, 0.3, 0.6] {
            let ring = classify(&spec(GeometryKind::Ring), q).unwrap();
            let xor = classify(&spec(GeometryKind::Xor), q).unwrap();
            assert!(ring.limit_estimate >= xor.limit_estimate, "q={q}");
        }
    }

    #[test]
    fn asymptotic_curve_at_zero_failure() {
        let curve = asymptotic_curve(&spec(GeometryKind::Hypercube), 100, &[0.0], DenominatorMode::PaperPN)
            .unwrap();
        assert!((curve[0].routability - 1.0).abs() < 1e-12);
        assert_eq!(curve[0].spec.d(), 100);
    }
}
