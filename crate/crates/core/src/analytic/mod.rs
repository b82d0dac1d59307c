//! Reachable-component analysis of routability under uniform random node
//! failure.
//!
//! The pipeline is: distance profile `n(h)`, per-phase failure `Q(m)`, path
//! success `p(h, q)`, expected reachable component `E[S] = Σ n(h) p(h, q)`,
//! and finally `r = E[S] / (expected surviving partners)`.

mod phase;
mod profile;
mod routability;

pub use phase::{
    symphony_hop_cap, symphony_phase_failure_approx, xor_phase_failure_approx, PhaseFailureModel,
};
pub use profile::{distance_profile, DistanceProfile, ProfileCounts, EXACT_PROFILE_MAX_D};
pub use routability::{
    expected_reach, routability, tree_closed_form, DenominatorMode, ExpectedReach,
    RoutabilityResult,
};

pub(crate) use phase::check_failure_probability;
