//! Monte Carlo tree search over the SMDP.
//!
//! Upper-confidence action selection inside the tree, uniform-random
//! rollouts beyond the frontier, incremental-mean value updates, and a tree
//! that persists across planning steps so exploration done early keeps
//! informing later decisions. Fully deterministic for a fixed seed.

use std::collections::HashMap;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::plan::{Plan, PlanBuilder, SolverStats};
use crate::scenario::Scenario;
use crate::smdp::{self, SmdpAction, SmdpConfig, SmdpState, StateKey};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MctsConfig {
    /// Simulation depth in decision steps.
    pub d_solve: usize,
    /// Exploration weight in the upper-confidence rule.
    pub c: f64,
    /// Simulations per planning step.
    pub n_sim_max: usize,
    /// Discount per second used in backups.
    pub gamma: f64,
    pub seed: u64,
}

impl Default for MctsConfig {
    fn default() -> Self {
        Self {
            d_solve: 10,
            c: 3.0,
            n_sim_max: 100,
            gamma: 0.999,
            seed: 0,
        }
    }
}

struct Node {
    actions: Vec<SmdpAction>,
    visits: Vec<u64>,
    values: Vec<f64>,
}

struct Search<'a> {
    scenario: &'a Scenario,
    config: &'a SmdpConfig,
    mcts: &'a MctsConfig,
    tree: HashMap<StateKey, Node>,
    rng: ChaCha8Rng,
    simulations: u64,
}

pub fn mcts(scenario: &Scenario, config: &SmdpConfig, mcts_config: &MctsConfig) -> Plan {
    assert!(mcts_config.d_solve >= 1);
    assert!(mcts_config.n_sim_max >= 1);
    let start = Instant::now();
    let mut search = Search {
        scenario,
        config,
        mcts: mcts_config,
        tree: HashMap::new(),
        rng: ChaCha8Rng::seed_from_u64(mcts_config.seed),
        simulations: 0,
    };
    let mut builder = PlanBuilder::new(scenario, config);

    loop {
        if smdp::action_space(builder.state(), scenario, config).is_empty() {
            break;
        }
        for _ in 0..mcts_config.n_sim_max {
            search.simulate(builder.state(), mcts_config.d_solve);
            search.simulations += 1;
        }
        let node = search
            .tree
            .get(&StateKey::of(builder.state()))
            .expect("root node inserted by the first simulation");
        // Commit the highest-valued action; ties keep the earliest in
        // (t_s, id) order because actions are stored sorted.
        let mut best = 0;
        for i in 1..node.actions.len() {
            if node.values[i] > node.values[best] {
                best = i;
            }
        }
        let action = node.actions[best];
        builder.push(action);
    }

    let snapshot = serde_json::json!({
        "solver": "mcts",
        "mcts": mcts_config,
        "smdp": config,
    });
    builder.finish(
        "mcts",
        snapshot,
        start.elapsed().as_secs_f64(),
        SolverStats {
            simulations: search.simulations,
            ..SolverStats::default()
        },
    )
}

impl Search<'_> {
    /// One simulation pass from `state`: descend through the tree by the
    /// upper-confidence rule, expand one frontier node, roll out beyond it,
    /// and back the discounted return up through the visited actions.
    fn simulate(&mut self, state: &SmdpState, depth: usize) -> f64 {
        if depth == 0 {
            return 0.0;
        }
        let key = StateKey::of(state);
        if !self.tree.contains_key(&key) {
            let actions = smdp::action_space(state, self.scenario, self.config);
            if actions.is_empty() {
                return 0.0;
            }
            let n = actions.len();
            self.tree.insert(
                key,
                Node {
                    actions,
                    visits: vec![0; n],
                    values: vec![0.0; n],
                },
            );
            return self.rollout(state, depth);
        }

        let node = &self.tree[&key];
        if node.actions.is_empty() {
            return 0.0;
        }
        let chosen = select_ucb(node, self.mcts.c);
        let action = node.actions[chosen];

        let immediate = smdp::reward(state, &action, self.scenario, self.config);
        let next = smdp::transition(state, &action, self.scenario, self.config);
        let value = immediate
            + self.mcts.gamma.powf(action.t_s - state.t) * self.simulate(&next, depth - 1);

        // The recursion may have grown the map; re-borrow mutably.
        let node = self.tree.get_mut(&key).expect("node persists");
        node.visits[chosen] += 1;
        node.values[chosen] += (value - node.values[chosen]) / node.visits[chosen] as f64;
        value
    }

    fn rollout(&mut self, state: &SmdpState, depth: usize) -> f64 {
        if depth == 0 {
            return 0.0;
        }
        let actions = smdp::action_space(state, self.scenario, self.config);
        if actions.is_empty() {
            return 0.0;
        }
        let action = actions[self.rng.gen_range(0..actions.len())];
        let immediate = smdp::reward(state, &action, self.scenario, self.config);
        let next = smdp::transition(state, &action, self.scenario, self.config);
        immediate + self.mcts.gamma.powf(action.t_s - state.t) * self.rollout(&next, depth - 1)
    }
}

/// Upper-confidence selection: untried actions first (in stored order), then
/// argmax of value + c * sqrt(ln(total visits) / visits).
fn select_ucb(node: &Node, c: f64) -> usize {
    if let Some(untried) = node.visits.iter().position(|&n| n == 0) {
        return untried;
    }
    let total: u64 = node.visits.iter().sum();
    let log_total = (total as f64).ln();
    let mut best = 0;
    let mut best_score = f64::NEG_INFINITY;
    for i in 0..node.actions.len() {
        let score = node.values[i] + c * (log_total / node.visits[i] as f64).sqrt();
        if score > best_score {
            best_score = score;
            best = i;
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::synth;

    #[test]
    fn rollout_at_depth_zero_returns_zero() {
        let scenario = synth::two_feasible_collects();
        let config = SmdpConfig::default();
        let mcfg = MctsConfig::default();
        let mut search = Search {
            scenario: &scenario,
            config: &config,
            mcts: &mcfg,
            tree: HashMap::new(),
            rng: ChaCha8Rng::seed_from_u64(1),
            simulations: 0,
        };
        let state = smdp::initial_state(&scenario);
        assert_eq!(search.rollout(&state, 0), 0.0);
        assert_eq!(search.simulate(&state, 0), 0.0);
    }

    #[test]
    fn untried_actions_are_selected_before_any_repeat() {
        let scenario = synth::two_feasible_collects();
        let node = Node {
            actions: scenario.opportunities[..3]
                .iter()
                .map(SmdpAction::from_opportunity)
                .collect(),
            visits: vec![5, 0, 2],
            values: vec![10.0, 0.0, 9.0],
        };
        assert_eq!(select_ucb(&node, 3.0), 1);
    }

    #[test]
    fn all_visited_uses_value_plus_exploration() {
        let scenario = synth::two_feasible_collects();
        let node = Node {
            actions: scenario.opportunities[..2]
                .iter()
                .map(SmdpAction::from_opportunity)
                .collect(),
            visits: vec![100, 1],
            values: vec![1.0, 0.5],
        };
        // With a large exploration weight the rarely-tried action wins.
        assert_eq!(select_ucb(&node, 10.0), 1);
        // With no exploration the higher value wins.
        assert_eq!(select_ucb(&node, 0.0), 0);
    }

    #[test]
    fn same_seed_reproduces_the_same_plan() {
        let scenario = synth::random_instance(3, 8, 4000.0, true);
        let config = SmdpConfig::default().with_resources(true);
        let mcfg = MctsConfig {
            n_sim_max: 60,
            d_solve: 8,
            seed: 7,
            ..MctsConfig::default()
        };
        let a = mcts(&scenario, &config, &mcfg);
        let b = mcts(&scenario, &config, &mcfg);
        assert_eq!(a.to_document().to_json(), b.to_document().to_json());
    }

    #[test]
    fn different_seeds_may_differ_but_stay_valid() {
        let scenario = synth::random_instance(4, 8, 4000.0, true);
        let config = SmdpConfig::default();
        for seed in 0..3 {
            let mcfg = MctsConfig {
                n_sim_max: 30,
                d_solve: 6,
                seed,
                ..MctsConfig::default()
            };
            let plan = mcts(&scenario, &config, &mcfg);
            let report = crate::validate::validate(&plan.to_document(), &scenario, &config);
            assert!(report.feasible, "{:?}", report.violations);
        }
    }

    #[test]
    fn finds_the_obvious_two_collect_plan() {
        let scenario = synth::two_feasible_collects();
        let config = SmdpConfig {
            n_a_max: 6,
            ..SmdpConfig::default()
        };
        let mcfg = MctsConfig {
            n_sim_max: 400,
            d_solve: 6,
            c: 3.0,
            seed: 11,
            ..MctsConfig::default()
        };
        let plan = mcts(&scenario, &config, &mcfg);
        assert_eq!(plan.images_collected, 2);
    }
}
