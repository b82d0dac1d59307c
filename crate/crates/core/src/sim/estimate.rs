use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use super::failure::FailurePattern;
use super::overlay::{build_overlay, MAX_SIM_D};
use super::router::{route, FailureReason, RouteOutcome};
use crate::analytic::check_failure_probability;
use crate::error::{RcmError, Result};
use crate::geometry::GeometrySpec;

/// Failure draws tried per trial before giving up on getting two survivors.
pub const MAX_REDRAWS: u32 = 64;

/// Independent seeds for overlay construction, failure draws and pair
/// sampling. Trial `t` uses ChaCha stream `t` of each.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub struct SimSeeds {
    pub build: u64,
    pub fail: u64,
    pub pair: u64,
}

impl SimSeeds {
    /// Splits one master seed into the three sub-seeds.
    pub fn from_master(seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        SimSeeds {
            build: rng.next_u64(),
            fail: rng.next_u64(),
            pair: rng.next_u64(),
        }
    }
}

fn trial_rng(seed: u64, trial: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial);
    rng
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimOutcome {
    pub spec: GeometrySpec,
    pub q: f64,
    pub trials: u32,
    pub pairs_per_trial: u32,
    /// Mean over trials of the per-trial delivered fraction.
    pub routable_fraction: f64,
    /// Sample standard deviation of the per-trial fractions over
    /// `sqrt(trials)`; zero for a single trial.
    pub std_error: f64,
    pub hop_cap_hits: u64,
    /// Trials whose first failure draw left fewer than two survivors.
    pub redrawn_trials: u32,
    pub seeds: SimSeeds,
    pub trial_fractions: Vec<f64>,
}

struct TrialResult {
    fraction: f64,
    hop_cap_hits: u64,
    redrawn: bool,
}

/// Monte Carlo routability: each trial builds a fresh overlay, draws a
/// fresh failure pattern and routes `pairs_per_trial` ordered pairs of
/// distinct survivors. Trials run in parallel; results do not depend on
/// the thread count.
pub fn estimate_routability(
    spec: &GeometrySpec,
    q: f64,
    trials: u32,
    pairs_per_trial: u32,
    seeds: SimSeeds,
) -> Result<SimOutcome> {
    check_failure_probability(q)?;
    if trials == 0 {
        return Err(RcmError::ZeroCount { what: "trials" });
    }
    if pairs_per_trial == 0 {
        return Err(RcmError::ZeroCount { what: "pairs" });
    }
    if spec.d() > MAX_SIM_D {
        return Err(RcmError::SimulationTooLarge {
            d: spec.d(),
            max: MAX_SIM_D,
        });
    }

    let results = (0..trials)
        .into_par_iter()
        .map(|t| run_trial(spec, q, pairs_per_trial, seeds, t as u64))
        .collect::<Result<Vec<_>>>()?;

    let trial_fractions: Vec<f64> = results.iter().map(|r| r.fraction).collect();
    let n = trials as f64;
    let mean = trial_fractions.iter().sum::<f64>() / n;
    let std_error = if trials > 1 {
        let var = trial_fractions.iter().map(|f| (f - mean).powi(2)).sum::<f64>() / (n - 1.0);
        (var / n).sqrt()
    } else {
        0.0
    };

    Ok(SimOutcome {
        spec: *spec,
        q,
        trials,
        pairs_per_trial,
        routable_fraction: mean,
        std_error,
        hop_cap_hits: results.iter().map(|r| r.hop_cap_hits).sum(),
        redrawn_trials: results.iter().filter(|r| r.redrawn).count() as u32,
        seeds,
        trial_fractions,
    })
}

fn run_trial(spec: &GeometrySpec, q: f64, pairs: u32, seeds: SimSeeds, t: u64) -> Result<TrialResult> {
    let overlay = build_overlay(spec, trial_rng(seeds.build, t).next_u64())?;
    let n = overlay.node_count();

    let mut fail_rng = trial_rng(seeds.fail, t);
    let mut attempts = 0;
    let pattern = loop {
        if attempts == MAX_REDRAWS {
            return Err(RcmError::TooFewSurvivors { attempts });
        }
        attempts += 1;
        let pattern = FailurePattern::sample(n, q, fail_rng.next_u64())?;
        if pattern.survivor_count() >= 2 {
            break pattern;
        }
    };

    let survivors = pattern.survivors();
    let k = survivors.len();
    let mut pair_rng = trial_rng(seeds.pair, t);
    let mut delivered = 0u32;
    let mut hop_cap_hits = 0u64;
    for _ in 0..pairs {
        let i = pair_rng.gen_range(0..k);
        let mut j = pair_rng.gen_range(0..k - 1);
        if j >= i {
            j += 1;
        }
        match route(&overlay, &pattern, survivors[i], survivors[j])? {
            RouteOutcome::Delivered { .. } => delivered += 1,
            RouteOutcome::Failed {
                reason: FailureReason::HopCap,
                ..
            } => hop_cap_hits += 1,
            RouteOutcome::Failed { .. } => {}
        }
    }

    Ok(TrialResult {
        fraction: delivered as f64 / pairs as f64,
        hop_cap_hits,
        redrawn: attempts > 1,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::GeometryKind;

    #[test]
    fn deterministic_for_fixed_seeds() {
        let spec = GeometrySpec::xor(10).unwrap();
        let seeds = SimSeeds::from_master(42);
        let a = estimate_routability(&spec, 0.2, 8, 200, seeds).unwrap();
        let b = estimate_routability(&spec, 0.2, 8, 200, seeds).unwrap();
        assert_eq!(a, b);
        let c = estimate_routability(&spec, 0.2, 8, 200, SimSeeds::from_master(43)).unwrap();
        assert_ne!(a.trial_fractions, c.trial_fractions);
    }

    #[test]
    fn thread_count_does_not_matter() {
        let spec = GeometrySpec::ring(10).unwrap();
        let seeds = SimSeeds::from_master(9);
        let pool = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
        let serial = pool.install(|| estimate_routability(&spec, 0.3, 6, 300, seeds).unwrap());
        let parallel = estimate_routability(&spec, 0.3, 6, 300, seeds).unwrap();
        assert_eq!(serial, parallel);
    }

    #[test]
    fn no_failures_means_full_delivery() {
        for kind in GeometryKind::ALL {
            let spec = GeometrySpec::new(kind, 8).unwrap();
            let out = estimate_routability(&spec, 0.0, 3, 100, SimSeeds::from_master(1)).unwrap();
            assert_eq!(out.routable_fraction, 1.0, "{kind}");
            assert_eq!(out.std_error, 0.0);
            assert_eq!(out.hop_cap_hits, 0);
        }
    }

    #[test]
    fn heavy_failure_redraws_small_overlays() {
        let spec = GeometrySpec::hypercube(2).unwrap();
        let out = estimate_routability(&spec, 0.7, 200, 5, SimSeeds::from_master(3)).unwrap();
        assert!(out.redrawn_trials > 0);
        assert_eq!(out.trial_fractions.len(), 200);
    }

    #[test]
    fn rejects_bad_arguments() {
        let spec = GeometrySpec::ring(8).unwrap();
        let seeds = SimSeeds::from_master(0);
        assert!(estimate_routability(&spec, 0.1, 0, 10, seeds).is_err());
        assert!(estimate_routability(&spec, 0.1, 1, 0, seeds).is_err());
        assert!(estimate_routability(&spec, 1.0, 1, 10, seeds).is_err());
        let big = GeometrySpec::ring(24).unwrap();
        assert!(matches!(
            estimate_routability(&big, 0.1, 1, 1, seeds),
            Err(RcmError::SimulationTooLarge { .. })
        ));
    }
}
