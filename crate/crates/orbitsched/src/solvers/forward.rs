//! Depth-limited exhaustive forward search.
//!
//! At every planning step the full action tree is expanded to `d_solve`
//! levels with discounted backups, the best first action is committed, and
//! the search repeats from the successor until no action remains. With the
//! action space capped at `n_a_max` per state the per-step cost is bounded
//! by sum over k of n_a_max^k.

use std::time::Instant;

use crate::plan::{Plan, PlanBuilder, SolverStats};
use crate::scenario::Scenario;
use crate::smdp::{self, SmdpAction, SmdpConfig, SmdpState};

pub fn forward_search(scenario: &Scenario, config: &SmdpConfig, d_solve: usize) -> Plan {
    assert!(d_solve >= 1, "d_solve must be at least 1");
    let start = Instant::now();
    let mut builder = PlanBuilder::new(scenario, config);
    let mut expansions_per_step = Vec::new();

    loop {
        if smdp::action_space(builder.state(), scenario, config).is_empty() {
            break;
        }
        let mut expansions = 0u64;
        let (best, _) = select_action(builder.state(), d_solve, scenario, config, &mut expansions);
        expansions_per_step.push(expansions);
        builder.push(best.expect("nonempty action space yields a best action"));
    }

    let snapshot = serde_json::json!({
        "solver": "forward",
        "d_solve": d_solve,
        "smdp": config,
    });
    builder.finish(
        "forward",
        snapshot,
        start.elapsed().as_secs_f64(),
        SolverStats {
            expansions_per_step,
            ..SolverStats::default()
        },
    )
}

/// Recursive exhaustive lookahead. Returns the best action and its value;
/// `(None, 0)` at depth zero or when no action is available (a terminal
/// state is worth nothing more, not minus infinity, so pre-terminal actions
/// keep their true value). Value ties keep the earlier action in
/// (t_s, id) order.
fn select_action(
    state: &SmdpState,
    depth: usize,
    scenario: &Scenario,
    config: &SmdpConfig,
    expansions: &mut u64,
) -> (Option<SmdpAction>, f64) {
    if depth == 0 {
        return (None, 0.0);
    }
    let actions = smdp::action_space(state, scenario, config);
    if actions.is_empty() {
        return (None, 0.0);
    }
    let mut best: Option<SmdpAction> = None;
    let mut best_value = f64::NEG_INFINITY;
    for action in actions {
        *expansions += 1;
        let immediate = smdp::reward(state, &action, scenario, config);
        let next = smdp::transition(state, &action, scenario, config);
        let (_, tail) = select_action(&next, depth - 1, scenario, config, expansions);
        let value = immediate + config.gamma.powf(action.t_s - state.t) * tail;
        if value > best_value {
            best_value = value;
            best = Some(action);
        }
    }
    (best, best_value)
}
