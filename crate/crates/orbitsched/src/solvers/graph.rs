//! Longest-weighted-path planner over the collect-opportunity DAG.
//!
//! Nodes are collect opportunities, weighted by their request reward; an
//! edge exists between two opportunities when both can be taken in sequence
//! (no temporal overlap, the slew between them fits, and they do not image
//! the same request). Because edges only point forward in time, a single
//! pass in ascending start order finalizes each node's best path before any
//! successor reads it; the plan is the back-tracked path replayed through
//! the transition model. Resource constraints are out of scope for this
//! method.

use std::time::Instant;

use super::SolverError;
use crate::plan::{Plan, PlanBuilder, SolverStats};
use crate::scenario::{Mode, Opportunity, Scenario};
use crate::smdp::{self, SmdpAction, SmdpConfig};

pub fn graph_dp(scenario: &Scenario, config: &SmdpConfig) -> Result<Plan, SolverError> {
    if config.resources_enabled {
        return Err(SolverError::ResourcesUnsupported { name: "graph" });
    }
    let start = Instant::now();

    let collects: Vec<&Opportunity> = scenario
        .opportunities
        .iter()
        .filter(|o| o.mode == Mode::Collect)
        .collect();
    let n = collects.len();
    let weight: Vec<f64> = collects
        .iter()
        .map(|o| node_weight(o, scenario))
        .collect();

    // Forward pass over all collect windows: the chain objective of the
    // method, reported as `objective` and checked against exhaustive path
    // enumeration in the tests.
    let all: Vec<usize> = (0..n).collect();
    let compat = |i: usize, k: usize| compatible(collects[i], collects[k], scenario, config);
    let (objective, path) = longest_chain(&all, &weight, &compat);

    // The chain objective is image-blind: over a day-long horizon most
    // images open several windows, and the heaviest chain happily strings
    // repeat windows together even though replay realizes a repeat at zero.
    // Enforce the one-collect-per-image restriction on the emitted
    // selection: dedup the path, then repeatedly run the same chain pass on
    // the residual windows (unused images, compatible with everything
    // selected) until nothing more fits.
    let mut selected: Vec<usize> = Vec::new();
    let mut used_image: std::collections::HashSet<Option<crate::scenario::LocationRef>> =
        std::collections::HashSet::new();
    let mut try_take = |k: usize,
                        selected: &mut Vec<usize>,
                        used: &mut std::collections::HashSet<Option<crate::scenario::LocationRef>>| {
        if used.contains(&collects[k].location) {
            return false;
        }
        if selected.iter().all(|&s| compat(s.min(k), s.max(k))) {
            selected.push(k);
            used.insert(collects[k].location);
            return true;
        }
        false
    };
    for &k in &path {
        try_take(k, &mut selected, &mut used_image);
    }
    loop {
        let residual: Vec<usize> = (0..n)
            .filter(|&k| !used_image.contains(&collects[k].location))
            .filter(|&k| selected.iter().all(|&s| compat(s.min(k), s.max(k))))
            .collect();
        if residual.is_empty() {
            break;
        }
        let (_, extra) = longest_chain(&residual, &weight, &compat);
        let mut grew = false;
        for &k in &extra {
            grew |= try_take(k, &mut selected, &mut used_image);
        }
        if !grew {
            break;
        }
    }
    selected.sort_unstable();

    let mut builder = PlanBuilder::new(scenario, config);
    for k in selected {
        builder.push(SmdpAction::from_opportunity(collects[k]));
    }

    let snapshot = serde_json::json!({
        "solver": "graph",
        "smdp": config,
    });
    Ok(builder.finish(
        "graph",
        snapshot,
        start.elapsed().as_secs_f64(),
        SolverStats {
            objective: Some(objective),
            ..SolverStats::default()
        },
    ))
}

fn node_weight(o: &Opportunity, scenario: &Scenario) -> f64 {
    match o.location {
        Some(crate::scenario::LocationRef::Request(r)) => {
            scenario.request(r).map_or(0.0, |req| req.reward)
        }
        _ => 0.0,
    }
}

/// Edge predicate shared with the packing solver: geometric sequencing plus
/// the one-collect-per-image restriction.
pub(super) fn compatible(
    earlier: &Opportunity,
    later: &Opportunity,
    scenario: &Scenario,
    config: &SmdpConfig,
) -> bool {
    if earlier.location == later.location {
        return false;
    }
    // Distant pairs always slew in time; the exact check only matters inside
    // the worst-case slew span.
    let max_slew_s = 180.0 / scenario.spacecraft.slew_rate_deg_s;
    if later.t_s - earlier.t_e > max_slew_s {
        return true;
    }
    smdp::opportunities_compatible(earlier, later, scenario, config)
}
