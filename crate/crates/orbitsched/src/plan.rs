//! Plans — the ordered state/action trajectory a solver commits to — and
//! their on-disk document form.
//!
//! The document deliberately omits wall-clock time so that two runs with the
//! same inputs produce byte-identical files; runtimes live in the in-memory
//! [`Plan`] and in benchmark result rows.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scenario::{LocationRef, Mode, OpportunityId, Scenario};
use crate::smdp::{self, SmdpAction, SmdpConfig, SmdpState};

pub const PLAN_SCHEMA_VERSION: u32 = 1;

/// One committed decision: the state the agent was in, the action taken, and
/// the reward realized for it.
#[derive(Debug, Clone)]
pub struct PlanStep {
    pub state: SmdpState,
    pub action: SmdpAction,
    pub reward: f64,
}

/// Per-solver diagnostics carried alongside a plan.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct SolverStats {
    /// Forward search: (state, action) evaluations per planning step.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub expansions_per_step: Vec<u64>,
    /// MCTS: total simulations run.
    #[serde(default, skip_serializing_if = "is_zero")]
    pub simulations: u64,
    /// Graph/branch-and-bound model objective (before trajectory replay).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub objective: Option<f64>,
    /// Branch and bound: whether optimality was proven within the time limit.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub optimal: Option<bool>,
    /// Branch and bound: search nodes explored.
    #[serde(default, skip_serializing_if = "is_zero")]
    pub nodes_explored: u64,
}

fn is_zero(v: &u64) -> bool {
    *v == 0
}

/// A solver's committed schedule.
#[derive(Debug, Clone)]
pub struct Plan {
    pub solver_name: String,
    pub steps: Vec<PlanStep>,
    /// Sum of realized step rewards.
    pub total_reward: f64,
    /// Distinct images collected along the trajectory.
    pub images_collected: usize,
    pub wall_time_s: f64,
    pub config_snapshot: serde_json::Value,
    pub stats: SolverStats,
}

impl Plan {
    /// Collect reward actually realized: the sum of request rewards over the
    /// distinct images collected. With unit rewards this equals
    /// `images_collected`.
    pub fn collect_reward(&self, scenario: &Scenario, config: &SmdpConfig) -> f64 {
        self.steps
            .iter()
            .filter(|s| smdp::collect_succeeds(&s.state, &s.action, scenario, config))
            .map(|s| match s.action.location {
                Some(LocationRef::Request(r)) => scenario.request(r).map_or(0.0, |q| q.reward),
                _ => 0.0,
            })
            .sum()
    }

    /// The discounted return from the initial state: sum over steps of
    /// gamma^(t_s - t_0) times the step reward. This is the objective the
    /// lookahead planners maximize; `total_reward` is the plain sum.
    pub fn discounted_return(&self, gamma: f64) -> f64 {
        let t0 = self.steps.first().map_or(0.0, |s| s.state.t);
        self.steps
            .iter()
            .map(|s| gamma.powf(s.action.t_s - t0) * s.reward)
            .sum()
    }

    pub fn to_document(&self) -> PlanDocument {
        PlanDocument {
            schema_version: PLAN_SCHEMA_VERSION,
            solver_name: self.solver_name.clone(),
            config_snapshot: self.config_snapshot.clone(),
            steps: self
                .steps
                .iter()
                .map(|s| PlanRecord {
                    opportunity_id: s.action.opportunity_id,
                    mode: s.action.mode,
                    t_s: s.action.t_s,
                    t_e: s.action.t_e,
                    location: s.action.location,
                    reward_realized: s.reward,
                })
                .collect(),
            totals: PlanTotals {
                total_reward: self.total_reward,
                images_collected: self.images_collected,
                steps: self.steps.len(),
            },
        }
    }
}

/// One record of the plan file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlanRecord {
    pub opportunity_id: OpportunityId,
    pub mode: Mode,
    pub t_s: f64,
    pub t_e: f64,
    pub location: Option<LocationRef>,
    pub reward_realized: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlanTotals {
    pub total_reward: f64,
    pub images_collected: usize,
    pub steps: usize,
}

/// The serialized form of a plan: ordered action records plus trailing
/// totals, with solver name and full configuration embedded for provenance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlanDocument {
    pub schema_version: u32,
    pub solver_name: String,
    pub config_snapshot: serde_json::Value,
    pub steps: Vec<PlanRecord>,
    pub totals: PlanTotals,
}

impl PlanDocument {
    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json()).map_err(|e| Error::io(path, e))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("plan serializes")
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let doc: PlanDocument = serde_json::from_str(&text).map_err(|e| Error::Parse {
            path: path.display().to_string(),
            source: e,
        })?;
        if doc.schema_version != PLAN_SCHEMA_VERSION {
            return Err(Error::SchemaVersion {
                path: path.display().to_string(),
                found: doc.schema_version,
                expected: PLAN_SCHEMA_VERSION,
            });
        }
        Ok(doc)
    }
}

/// Shared trajectory accumulator: replays actions through the transition and
/// reward functions, so every solver reports rewards the validator will
/// agree with.
pub(crate) struct PlanBuilder<'a> {
    scenario: &'a Scenario,
    config: &'a SmdpConfig,
    state: SmdpState,
    steps: Vec<PlanStep>,
    total_reward: f64,
}

impl<'a> PlanBuilder<'a> {
    pub fn new(scenario: &'a Scenario, config: &'a SmdpConfig) -> Self {
        Self {
            scenario,
            config,
            state: smdp::initial_state(scenario),
            steps: Vec::new(),
            total_reward: 0.0,
        }
    }

    pub fn state(&self) -> &SmdpState {
        &self.state
    }

    /// Take `action` from the current state, recording reward and successor.
    pub fn push(&mut self, action: SmdpAction) {
        let reward = smdp::reward(&self.state, &action, self.scenario, self.config);
        let next = smdp::transition(&self.state, &action, self.scenario, self.config);
        self.steps.push(PlanStep {
            state: std::mem::replace(&mut self.state, next),
            action,
            reward,
        });
        self.total_reward += reward;
    }

    pub fn finish(
        self,
        solver_name: &str,
        config_snapshot: serde_json::Value,
        wall_time_s: f64,
        stats: SolverStats,
    ) -> Plan {
        let images_collected = self.state.collected.len();
        Plan {
            solver_name: solver_name.to_string(),
            steps: self.steps,
            total_reward: self.total_reward,
            images_collected,
            wall_time_s,
            config_snapshot,
            stats,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::synth;

    #[test]
    fn document_round_trip() {
        let scenario = synth::two_feasible_collects();
        let config = SmdpConfig::default();
        let mut b = PlanBuilder::new(&scenario, &config);
        let a = SmdpAction::from_opportunity(&scenario.opportunities[0]);
        b.push(a);
        let plan = b.finish("test", serde_json::json!({"k": 1}), 0.5, SolverStats::default());
        let doc = plan.to_document();

        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("p.plan");
        doc.save(&path).unwrap();
        let loaded = PlanDocument::load(&path).unwrap();
        assert_eq!(doc, loaded);
        assert_eq!(loaded.totals.steps, 1);
        assert!(loaded.totals.total_reward > 0.0);
    }

    #[test]
    fn discounted_return_discounts_to_plan_start() {
        let scenario = synth::two_feasible_collects();
        let config = SmdpConfig::default();
        let mut b = PlanBuilder::new(&scenario, &config);
        b.push(SmdpAction::from_opportunity(&scenario.opportunities[0]));
        b.push(SmdpAction::from_opportunity(&scenario.opportunities[2]));
        let plan = b.finish("test", serde_json::json!({}), 0.0, SolverStats::default());
        // Manual recomputation.
        let g: f64 = 0.999;
        let expected: f64 = plan
            .steps
            .iter()
            .map(|s| g.powf(s.action.t_s) * s.reward)
            .sum();
        assert!((plan.discounted_return(g) - expected).abs() < 1e-12);
        assert!(plan.discounted_return(g) < plan.total_reward);
    }
}
