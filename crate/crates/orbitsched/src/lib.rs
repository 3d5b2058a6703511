//! Task scheduling for an agile Earth-observation satellite.
//!
//! The library models a single spacecraft on a circular low-Earth orbit that
//! must choose between collecting images, contacting ground stations, and
//! sun-pointing to recharge, subject to slew agility and (optionally) power
//! and data-recorder limits. Planning is posed as a semi-Markov decision
//! process: the agent state is only evaluated at the start times of candidate
//! actions, so horizons of a day or more stay tractable.
//!
//! Five interchangeable planners are provided:
//!
//! * [`solvers::forward_search`] — exhaustive lookahead to a fixed depth
//! * [`solvers::mcts`] — UCT-style Monte Carlo tree search with a persistent tree
//! * [`solvers::rule_based`] — take the next feasible action, sun-point as fallback
//! * [`solvers::graph_dp`] — longest weighted path over collect opportunities
//! * [`solvers::exact_bnb`] — exact conflict-packing by branch and bound
//!
//! Every plan can be replayed by the independent [`validate`] module, and the
//! [`bench`] module reproduces the comparison protocol (random location sets,
//! both resource modes, reward/runtime/time-normalized-reward aggregation).
//!
//! See the `examples/` directory for one runnable program per capability.

pub mod astro;
pub mod bench;
pub mod chart;
pub mod error;
pub mod plan;
pub mod scenario;
pub mod smdp;
pub mod solvers;
pub mod synth;
pub mod validate;

pub use error::{Error, Result};
pub use plan::{Plan, PlanDocument, PlanStep};
pub use scenario::{
    GroundStation, ImageRequest, LocationRef, Mode, Opportunity, OpportunityId, RequestId,
    Scenario, SpacecraftConfig, StationId,
};
pub use smdp::{SmdpAction, SmdpConfig, SmdpState};
pub use validate::{ValidationReport, Violation, ViolationKind};
