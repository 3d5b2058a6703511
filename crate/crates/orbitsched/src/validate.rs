//! Independent schedule replayer.
//!
//! Replays a plan document against its scenario, recomputing rewards and
//! resource trajectories with code deliberately disjoint from the planning
//! model (its own slew math, resource integration, and reward rows), so a
//! defect has to appear in both implementations to go unnoticed. Flags
//! temporal overlap, slew infeasibility, safety-threshold crossings,
//! double-claimed image rewards, and dangling opportunity references.

use std::collections::HashSet;

use crate::plan::{Plan, PlanDocument};
use crate::scenario::{LocationRef, Mode, RequestId, Scenario};
use crate::smdp::SmdpConfig;

/// Matches the slack the planners grant to exact-boundary slews.
const TIME_EPS_S: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ViolationKind {
    Overlap,
    Slew,
    Power,
    Data,
    DuplicateCollect,
    UnknownOpportunity,
}

impl std::fmt::Display for ViolationKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            ViolationKind::Overlap => "overlap",
            ViolationKind::Slew => "slew",
            ViolationKind::Power => "power",
            ViolationKind::Data => "data",
            ViolationKind::DuplicateCollect => "duplicate-collect",
            ViolationKind::UnknownOpportunity => "unknown-opportunity",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone)]
pub struct Violation {
    pub step: usize,
    pub kind: ViolationKind,
    pub detail: String,
}

#[derive(Debug, Clone)]
pub struct ValidationReport {
    pub feasible: bool,
    pub violations: Vec<Violation>,
    pub recomputed_reward: f64,
    /// Piecewise-linear resource history: one row per action boundary,
    /// starting with the initial levels at t = 0.
    pub resource_trace: Vec<(f64, f64, f64)>,
    pub images_collected: usize,
}

impl ValidationReport {
    pub fn render_text(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!(
            "feasible: {}\nrecomputed_reward: {}\nimages_collected: {}\nviolations: {}\n",
            self.feasible,
            self.recomputed_reward,
            self.images_collected,
            self.violations.len()
        ));
        for v in &self.violations {
            out.push_str(&format!("  step {}: {} — {}\n", v.step, v.kind, v.detail));
        }
        out
    }

    /// Resource trace as CSV with header `t_s,p,d`.
    pub fn trace_csv(&self) -> String {
        let mut out = String::from("t_s,p,d\n");
        for (t, p, d) in &self.resource_trace {
            out.push_str(&format!("{t},{p},{d}\n"));
        }
        out
    }
}

/// Convenience wrapper for in-memory plans.
pub fn validate_plan(plan: &Plan, scenario: &Scenario, config: &SmdpConfig) -> ValidationReport {
    validate(&plan.to_document(), scenario, config)
}

pub fn validate(doc: &PlanDocument, scenario: &Scenario, config: &SmdpConfig) -> ValidationReport {
    let sc = &scenario.spacecraft;
    let mut violations: Vec<Violation> = Vec::new();
    let mut collected: HashSet<RequestId> = HashSet::new();

    let mut t = 0.0f64;
    let mut t_s_p = 0.0f64;
    // Attitude history of the last collect/contact: (direction, held-since).
    let mut last_attitude: Option<([f64; 3], f64)> = None;
    let mut p = sc.p0;
    let mut d = sc.d0;
    let mut reward_sum = 0.0;
    let mut trace = vec![(0.0, p, d)];

    for (step, rec) in doc.steps.iter().enumerate() {
        let mut flag = |kind: ViolationKind, detail: String| {
            violations.push(Violation { step, kind, detail });
        };

        let Some(opp) = scenario.opportunity(rec.opportunity_id) else {
            flag(
                ViolationKind::UnknownOpportunity,
                format!("opportunity {} not in scenario", rec.opportunity_id),
            );
            continue;
        };
        if opp.mode != rec.mode
            || opp.location != rec.location
            || (opp.t_s - rec.t_s).abs() > TIME_EPS_S
            || (opp.t_e - rec.t_e).abs() > TIME_EPS_S
        {
            flag(
                ViolationKind::UnknownOpportunity,
                format!("record does not match scenario opportunity {}", rec.opportunity_id),
            );
            continue;
        }

        if rec.t_s <= t {
            flag(
                ViolationKind::Overlap,
                format!("start {} does not advance past {}", rec.t_s, t),
            );
        }

        if matches!(rec.mode, Mode::Collect | Mode::Contact) {
            if let Some((dir, held_since)) = last_attitude {
                let gap = rec.t_s - held_since;
                if gap < -TIME_EPS_S {
                    flag(
                        ViolationKind::Overlap,
                        format!("starts at {} before the previous action releases at {held_since}", rec.t_s),
                    );
                } else {
                    let target: [f64; 3] = opp.pointing_start.direction.into();
                    let angle = angle_deg(dir, target);
                    if angle / sc.slew_rate_deg_s > gap + TIME_EPS_S {
                        flag(
                            ViolationKind::Slew,
                            format!(
                                "{angle:.3} deg slew needs {:.3} s but only {gap:.3} s available",
                                angle / sc.slew_rate_deg_s
                            ),
                        );
                    }
                }
            }
        }

        // Resource integration over the elapsed interval, charged at the
        // chosen mode's rates.
        let (pre_p, pre_d) = (p, d);
        if config.resources_enabled {
            let since = if config.literal_resource_interval { t_s_p } else { t };
            let elapsed = rec.t_s - since;
            let (p_rate, d_rate) = match rec.mode {
                Mode::Collect => (sc.power_rates.collect, sc.data_rates.collect),
                Mode::Contact => (sc.power_rates.contact, sc.data_rates.contact),
                Mode::Sunpoint => (sc.power_rates.sunpoint, sc.data_rates.sunpoint),
            };
            p = (p + elapsed * p_rate).clamp(0.0, 1.0);
            d = (d + elapsed * d_rate).clamp(0.0, 1.0);
        }

        // Reward rows.
        let mut step_reward = 0.0;
        let duration = if config.literal_duration_reward {
            rec.t_s - t
        } else {
            rec.t_e - rec.t_s
        };
        match rec.mode {
            Mode::Collect => {
                let Some(LocationRef::Request(request)) = rec.location else {
                    unreachable!("validated against the scenario opportunity");
                };
                let novel = !collected.contains(&request);
                let gates_open = !config.resources_enabled || (pre_p > sc.p_min && pre_d < sc.d_max);
                if novel && gates_open {
                    let r = scenario.request(request).map_or(0.0, |req| req.reward);
                    step_reward += config.gamma.powf(rec.t_s - t) * r;
                    collected.insert(request);
                } else if !novel && rec.reward_realized > TIME_EPS_S {
                    flag(
                        ViolationKind::DuplicateCollect,
                        format!("{request} already collected but the plan claims reward again"),
                    );
                }
            }
            Mode::Contact => step_reward += 1e-1 * duration,
            Mode::Sunpoint => step_reward += 1e-4 * duration,
        }
        if config.resources_enabled {
            if p <= sc.p_min {
                step_reward -= 1e4;
                flag(
                    ViolationKind::Power,
                    format!("power {p:.4} at or below the floor {}", sc.p_min),
                );
            }
            if d >= sc.d_max {
                step_reward -= 1e4;
                flag(
                    ViolationKind::Data,
                    format!("data {d:.4} at or above the ceiling {}", sc.d_max),
                );
            }
        }
        reward_sum += step_reward;

        // Advance the replayed state.
        t = rec.t_s;
        if matches!(rec.mode, Mode::Collect | Mode::Contact) {
            t_s_p = rec.t_s;
            last_attitude = if config.agility_from_start {
                Some((opp.pointing_start.direction.into(), opp.t_s))
            } else {
                Some((opp.pointing_end.direction.into(), opp.t_e))
            };
        }
        trace.push((rec.t_s, p, d));
    }

    ValidationReport {
        feasible: violations.is_empty(),
        violations,
        recomputed_reward: reward_sum,
        resource_trace: trace,
        images_collected: collected.len(),
    }
}

/// Local angle computation, independent of the astro module.
fn angle_deg(a: [f64; 3], b: [f64; 3]) -> f64 {
    let dot = a[0] * b[0] + a[1] * b[1] + a[2] * b[2];
    let na = (a[0] * a[0] + a[1] * a[1] + a[2] * a[2]).sqrt();
    let nb = (b[0] * b[0] + b[1] * b[1] + b[2] * b[2]).sqrt();
    (dot / (na * nb)).clamp(-1.0, 1.0).acos().to_degrees()
}
