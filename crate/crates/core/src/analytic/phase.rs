//! Per-phase failure probabilities `Q(m)` and the path success product
//! `p(h, q) = Π_{m=1}^{h} (1 - Q(m))`.
//!
//! Each geometry's routing process is an absorbing chain whose only absorbing
//! states are delivery and failure. The probability of ever leaving phase `m`
//! towards the next phase is `1 - Q(m)`, so the chains are never materialized:
//! the closed forms below are their hitting probabilities.

use serde::Serialize;

use crate::error::{RcmError, Result};
use crate::geometry::{GeometryKind, GeometrySpec};

/// Products longer than this are accumulated as a sum of logarithms.
const DIRECT_PRODUCT_MAX_HOPS: u32 = 64;
/// Any factor below this also forces log-domain accumulation.
const TINY_FACTOR: f64 = 1e-12;

pub(crate) fn check_failure_probability(q: f64) -> Result<()> {
    if q.is_finite() && (0.0..1.0).contains(&q) {
        Ok(())
    } else {
        Err(RcmError::InvalidFailureProbability { q, range: "[0, 1)" })
    }
}

/// `x^n` for a non-negative integer exponent of any size.
fn powu(x: f64, n: u64) -> f64 {
    match i32::try_from(n) {
        Ok(n) => x.powi(n),
        Err(_) => x.powf(n as f64),
    }
}

/// `ceil(x)`, treating values within a few ulps above an integer as that
/// integer so that e.g. `12 / (1 - 0.2)` yields 15 rather than 16.
fn ceil_snapped(x: f64) -> f64 {
    let nearest = x.round();
    if (x - nearest).abs() <= 8.0 * f64::EPSILON * x.abs().max(1.0) {
        nearest
    } else {
        x.ceil()
    }
}

/// Failure law of one geometry at one failure probability.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PhaseFailureModel {
    spec: GeometrySpec,
    q: f64,
    /// `Q` for geometries whose failure probability does not depend on the
    /// phase (tree, symphony).
    #[serde(skip)]
    constant: Option<f64>,
}

impl PhaseFailureModel {
    pub fn new(spec: GeometrySpec, q: f64) -> Result<Self> {
        check_failure_probability(q)?;
        let constant = match spec.kind() {
            GeometryKind::Tree => Some(q),
            GeometryKind::Symphony => Some(symphony_failure(q, spec.d(), spec.k_n(), spec.k_s())),
            _ => None,
        };
        Ok(PhaseFailureModel { spec, q, constant })
    }

    pub fn spec(&self) -> &GeometrySpec {
        &self.spec
    }

    pub fn q(&self) -> f64 {
        self.q
    }

    /// Whether `Q(m)` is the same for every phase.
    pub fn is_phase_constant(&self) -> bool {
        self.constant.is_some()
    }

    /// `Q(m)` for a phase `1 <= m <= d`.
    pub fn phase_failure(&self, m: u32) -> Result<f64> {
        if m == 0 || m > self.spec.d() {
            return Err(RcmError::PhaseOutOfRange {
                m,
                d: self.spec.d(),
            });
        }
        Ok(self.failure_at(m))
    }

    /// `Q(m)` for any `m >= 1`, including phases beyond `d` (used when probing
    /// the `h -> ∞` limit). Symphony keeps the spec's `d` inside `Q`.
    pub fn failure_at(&self, m: u32) -> f64 {
        debug_assert!(m >= 1);
        if let Some(c) = self.constant {
            return c;
        }
        let q = self.q;
        let value = match self.spec.kind() {
            GeometryKind::Hypercube => powu(q, m as u64),
            GeometryKind::Xor => xor_failure(q, m),
            GeometryKind::Ring => ring_failure(q, m),
            GeometryKind::Tree | GeometryKind::Symphony => unreachable!("phase-constant kinds"),
        };
        value.clamp(0.0, 1.0)
    }

    /// `p(h, q)`, the probability of successfully routing to a node `h`
    /// phases away. `h` may exceed `d`.
    pub fn path_success(&self, h: u32) -> Result<f64> {
        if h == 0 {
            return Err(RcmError::ZeroHops);
        }
        Ok(match self.constant {
            Some(c) => constant_success(c, h),
            None => *self.success_curve(h).last().expect("h >= 1"),
        })
    }

    /// `ln p(h, q)`; stays finite where `p` itself underflows.
    pub fn ln_path_success(&self, h: u32) -> Result<f64> {
        if h == 0 {
            return Err(RcmError::ZeroHops);
        }
        Ok(match self.constant {
            Some(c) => h as f64 * (-c).ln_1p(),
            None => (1..=h).map(|m| (-self.failure_at(m)).ln_1p()).sum(),
        })
    }

    /// `[p(1, q), ..., p(h_max, q)]`.
    ///
    /// A prefix is multiplied out directly while it is at most 64 factors
    /// long and every factor is at least `1e-12`; otherwise `p(h, q)` is
    /// `exp(Σ ln(1 - Q(m)))`.
    pub fn success_curve(&self, h_max: u32) -> Vec<f64> {
        let mut curve = Vec::with_capacity(h_max as usize);
        if let Some(c) = self.constant {
            let mut prev = 1.0f64;
            for h in 1..=h_max {
                prev = prev.min(constant_success(c, h));
                curve.push(prev);
            }
            return curve;
        }

        let mut product = 1.0f64;
        let mut ln_sum = 0.0f64;
        let mut direct = true;
        for h in 1..=h_max {
            let qm = self.failure_at(h);
            let factor = 1.0 - qm;
            product *= factor;
            ln_sum += (-qm).ln_1p();
            if h > DIRECT_PRODUCT_MAX_HOPS || factor < TINY_FACTOR {
                direct = false;
            }
            let value = if direct { product } else { ln_sum.exp() };
            // Switching to the log form must not let rounding lift the curve.
            curve.push(curve.last().map_or(value, |&prev: &f64| prev.min(value)));
        }
        curve
    }
}

/// `(1 - c)^h` under the same direct/log-domain rule as [`PhaseFailureModel::success_curve`].
fn constant_success(c: f64, h: u32) -> f64 {
    let factor = 1.0 - c;
    if h <= DIRECT_PRODUCT_MAX_HOPS && factor >= TINY_FACTOR {
        factor.powi(h as i32)
    } else if factor >= TINY_FACTOR {
        (h as f64 * (-c).ln_1p())
            .exp()
            .min(factor.powi(DIRECT_PRODUCT_MAX_HOPS as i32))
    } else {
        (h as f64 * (-c).ln_1p()).exp()
    }
}

/// `Q_xor(m) = q^m + Σ_{k=1}^{m-1} q^m Π_{j=m-k}^{m-1} (1 - q^j)`, summed
/// exactly.
///
/// The k-th term is the chance of taking `k` lower-order hops inside the
/// phase (each needs the best neighbour dead and some helpful one alive) and
/// then finding all `m - k` remaining candidates dead.
pub(crate) fn xor_failure(q: f64, m: u32) -> f64 {
    let lead = powu(q, m as u64);
    if lead == 0.0 {
        return 0.0;
    }
    // Factors (1 - q^j) with j >= unit are exactly 1.0 in f64, so the first
    // terms of the sum (largest j) are all 1 and can be counted in bulk.
    let top = (m - 1) as u64;
    let unit = first_unit_factor(q);
    let mut sum = 1.0;
    if top >= unit {
        sum += (top - unit + 1) as f64;
    }
    let mut run = 1.0;
    let mut j = top.min(unit - 1);
    while j >= 1 {
        run *= 1.0 - powu(q, j);
        if run == 0.0 {
            break;
        }
        sum += run;
        j -= 1;
    }
    lead * sum
}

/// Smallest `j >= 1` with `1.0 - q^j == 1.0` in f64, for `0 < q < 1`.
fn first_unit_factor(q: f64) -> u64 {
    let guess = ((f64::EPSILON / 4.0).ln() / q.ln()).floor().max(1.0) as u64;
    let mut j = guess;
    while j > 1 && 1.0 - powu(q, j - 1) == 1.0 {
        j -= 1;
    }
    while 1.0 - powu(q, j) != 1.0 {
        j += 1;
    }
    j
}

/// `Q_ring(m) = q^m (1 - x^(2^(m-1))) / (1 - x)` with `x = q (1 - q^(m-1))`,
/// the closed form of `q^m Σ_{k=0}^{2^(m-1)-1} x^k`.
pub(crate) fn ring_failure(q: f64, m: u32) -> f64 {
    let lead = powu(q, m as u64);
    if lead == 0.0 {
        return 0.0;
    }
    let x = q * (1.0 - powu(q, (m - 1) as u64));
    if x == 0.0 {
        return lead;
    }
    // x^(2^(m-1)) as exp(2^(m-1) ln x); the exponent overflows to -inf for
    // large m and the tail underflows to zero.
    let tail = ((m - 1) as f64).exp2() * x.ln();
    lead * (1.0 - tail.exp()) / (1.0 - x)
}

/// `Q_sym = q^(k_n+k_s) Σ_{j=0}^{J} (1 - k_s/d - q^(k_n+k_s))^j` with
/// `J = ceil(d / (1 - q))` suboptimal hops allowed per phase.
pub(crate) fn symphony_failure(q: f64, d: u32, k_n: u32, k_s: u32) -> f64 {
    let all_dead = powu(q, (k_n + k_s) as u64);
    if all_dead == 0.0 {
        return 0.0;
    }
    let stay = 1.0 - k_s as f64 / d as f64 - all_dead;
    let terms = symphony_hop_cap(q, d) + 1.0;
    let sum = if stay == 1.0 {
        terms
    } else {
        (1.0 - stay.powf(terms)) / (1.0 - stay)
    };
    (all_dead * sum).clamp(0.0, 1.0)
}

/// Maximum number of suboptimal hops per Symphony phase, `ceil(d / (1-q))`.
pub fn symphony_hop_cap(q: f64, d: u32) -> f64 {
    ceil_snapped(d as f64 / (1.0 - q))
}

/// First-order approximation of `Q_xor(m)` obtained from `1 - x ≈ e^{-x}`.
///
/// Comparison output only; the engine always uses the exact sum.
pub fn xor_phase_failure_approx(q: f64, m: u32) -> f64 {
    let mf = m as f64;
    let qm1 = powu(q, (m - 1) as u64);
    let inner = mf + q / (1.0 - q) * ((mf - 1.0) * qm1 - (1.0 - qm1) / (1.0 - q));
    powu(q, m as u64) * inner
}

/// Symphony's `Q` with the hop cap relaxed to the real number `d / (1-q)`.
///
/// `None` when the per-hop stay probability is negative and the fractional
/// power is undefined.
pub fn symphony_phase_failure_approx(q: f64, d: u32, k_n: u32, k_s: u32) -> Option<f64> {
    let all_dead = powu(q, (k_n + k_s) as u64);
    let stay = 1.0 - k_s as f64 / d as f64 - all_dead;
    if stay < 0.0 {
        return None;
    }
    let exponent = d as f64 / (1.0 - q) + 1.0;
    Some(all_dead * (1.0 - stay.powf(exponent)) / (1.0 - stay))
}
