//! Monte Carlo simulation of fully populated overlays under random node
//! failure.

mod estimate;
mod failure;
mod overlay;
mod router;

pub use estimate::{estimate_routability, SimOutcome, SimSeeds, MAX_REDRAWS};
pub use failure::FailurePattern;
pub use overlay::{build_overlay, NeighborRole, Overlay, MAX_SIM_D};
pub use router::{route, FailureReason, RouteOutcome};
