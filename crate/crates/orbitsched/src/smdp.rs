//! The semi-Markov decision process core: agent state, feasible-action
//! enumeration with truncation, the deterministic transition, and the reward
//! function.
//!
//! The agent state is the tuple (t, t_s_p, collected, d, p): current decision
//! time, start time of the last collect or contact, the set of images already
//! collected, data-recorder fill, and battery level. Decisions happen only at
//! candidate action start times; the transition jumps straight to the chosen
//! action's start, integrating resource rates over the elapsed interval.
//!
//! All functions here are pure. States are small value objects that are
//! cheap to clone, so tree searches can fan out freely.

use serde::{Deserialize, Serialize};

use crate::astro::{self, PointingVector};
use crate::scenario::{LocationRef, Mode, Opportunity, OpportunityId, RequestId, Scenario};

/// Reward per second of contact duration.
pub const CONTACT_REWARD_PER_S: f64 = 1e-1;
/// Reward per second of sun-point duration.
pub const SUNPOINT_REWARD_PER_S: f64 = 1e-4;
/// Penalty applied when a safety threshold is crossed (once per resource).
pub const RESOURCE_PENALTY: f64 = 1e4;

/// Set of collected images, stored densely by request id.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct CollectedSet {
    words: Vec<u64>,
    count: u32,
}

impl CollectedSet {
    pub fn with_capacity(n_requests: usize) -> Self {
        Self {
            words: vec![0; n_requests.div_ceil(64)],
            count: 0,
        }
    }

    pub fn contains(&self, id: RequestId) -> bool {
        let i = id.0 as usize;
        match self.words.get(i / 64) {
            Some(w) => w & (1 << (i % 64)) != 0,
            None => false,
        }
    }

    /// Insert; returns true if the image was new.
    pub fn insert(&mut self, id: RequestId) -> bool {
        let i = id.0 as usize;
        assert!(i / 64 < self.words.len(), "request id beyond scenario size");
        let mask = 1 << (i % 64);
        if self.words[i / 64] & mask != 0 {
            return false;
        }
        self.words[i / 64] |= mask;
        self.count += 1;
        true
    }

    pub fn len(&self) -> usize {
        self.count as usize
    }

    pub fn is_empty(&self) -> bool {
        self.count == 0
    }

    pub fn iter(&self) -> impl Iterator<Item = RequestId> + '_ {
        self.words.iter().enumerate().flat_map(|(w, &bits)| {
            (0..64)
                .filter(move |b| bits & (1 << b) != 0)
                .map(move |b| RequestId((w * 64 + b) as u32))
        })
    }
}

/// The agent state between decisions.
#[derive(Debug, Clone, PartialEq)]
pub struct SmdpState {
    /// Time of the most recent action taken (its start time).
    pub t: f64,
    /// Start time of the last collect or contact taken.
    pub t_s_p: f64,
    pub collected: CollectedSet,
    /// Data recorder fill fraction in [0, 1].
    pub d: f64,
    /// Battery fraction in [0, 1].
    pub p: f64,
    /// Attitude bookkeeping for the agility constraint: where the imager
    /// pointed when the last collect/contact finished (or started, under the
    /// literal start-time variant). `None` before the first collect/contact,
    /// when any slew is feasible.
    pub last_pointing: Option<PointingVector>,
}

/// An action: execute one opportunity.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SmdpAction {
    pub opportunity_id: OpportunityId,
    pub mode: Mode,
    pub t_s: f64,
    pub t_e: f64,
    pub location: Option<LocationRef>,
}

impl SmdpAction {
    pub fn from_opportunity(o: &Opportunity) -> Self {
        Self {
            opportunity_id: o.id,
            mode: o.mode,
            t_s: o.t_s,
            t_e: o.t_e,
            location: o.location,
        }
    }

    pub fn duration_s(&self) -> f64 {
        self.t_e - self.t_s
    }

    fn request(&self) -> Option<RequestId> {
        match self.location {
            Some(LocationRef::Request(r)) => Some(r),
            _ => None,
        }
    }
}

/// Model configuration shared by every planner.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SmdpConfig {
    /// Discount per second, in (0, 1].
    pub gamma: f64,
    /// Cap on the number of earliest feasible actions enumerated per state.
    pub n_a_max: usize,
    /// When false, power and data are frozen and never gate or penalize.
    pub resources_enabled: bool,
    /// Duration rewards use the elapsed time (t_s - t) instead of the action
    /// duration (t_e - t_s).
    pub literal_duration_reward: bool,
    /// Integrate resources over (t_s - t_s_p) instead of the elapsed
    /// interval (t_s - t); kept for comparison with the as-written update,
    /// which double-counts time across sun-point actions.
    pub literal_resource_interval: bool,
    /// Evaluate the agility constraint from the previous action's start
    /// (and start pointing) instead of its end.
    pub agility_from_start: bool,
}

impl Default for SmdpConfig {
    fn default() -> Self {
        Self {
            gamma: 0.999,
            n_a_max: 3,
            resources_enabled: false,
            literal_duration_reward: false,
            literal_resource_interval: false,
            agility_from_start: false,
        }
    }
}

impl SmdpConfig {
    pub fn with_resources(mut self, on: bool) -> Self {
        self.resources_enabled = on;
        self
    }
}

/// The state at scenario start: nothing collected, full battery, empty
/// recorder, no attitude history.
pub fn initial_state(scenario: &Scenario) -> SmdpState {
    SmdpState {
        t: 0.0,
        t_s_p: 0.0,
        collected: CollectedSet::with_capacity(scenario.requests.len()),
        d: scenario.spacecraft.d0,
        p: scenario.spacecraft.p0,
        last_pointing: None,
    }
}

/// Whether the spacecraft can slew from the state's attitude history to the
/// start of `opp`. Sun-point actions are always reachable. The attitude
/// history already encodes the configured agility variant (end or start of
/// the previous collect/contact), so the check itself is uniform.
pub fn slew_ok(state: &SmdpState, opp: &Opportunity, scenario: &Scenario, _config: &SmdpConfig) -> bool {
    if opp.mode == Mode::Sunpoint {
        return true;
    }
    match &state.last_pointing {
        None => true,
        Some(prev) => {
            astro::slew_feasible(prev, &opp.pointing_start, scenario.spacecraft.slew_rate_deg_s)
        }
    }
}

/// All feasible actions from `state`: start time strictly after the current
/// time, slew-reachable from the last collect/contact pointing, truncated to
/// the first `n_a_max` in ascending (t_s, id) order. Sun-point twins are
/// ordinary members of the list and count toward the cap.
pub fn action_space(state: &SmdpState, scenario: &Scenario, config: &SmdpConfig) -> Vec<SmdpAction> {
    let opportunities = &scenario.opportunities;
    let begin = opportunities.partition_point(|o| o.t_s <= state.t);
    let mut actions = Vec::with_capacity(config.n_a_max.min(8));
    for opp in &opportunities[begin..] {
        if slew_ok(state, opp, scenario, config) {
            actions.push(SmdpAction::from_opportunity(opp));
            if actions.len() >= config.n_a_max {
                break;
            }
        }
    }
    actions
}

/// Resource levels after taking `action` from `state`, clamped to [0, 1].
/// Returns `(p, d)` unchanged when resources are disabled.
pub(crate) fn integrate_resources(
    state: &SmdpState,
    action: &SmdpAction,
    scenario: &Scenario,
    config: &SmdpConfig,
) -> (f64, f64) {
    if !config.resources_enabled {
        return (state.p, state.d);
    }
    let since = if config.literal_resource_interval {
        state.t_s_p
    } else {
        state.t
    };
    let elapsed = action.t_s - since;
    let sc = &scenario.spacecraft;
    let p = (state.p + elapsed * sc.power_rates.for_mode(action.mode)).clamp(0.0, 1.0);
    let d = (state.d + elapsed * sc.data_rates.for_mode(action.mode)).clamp(0.0, 1.0);
    (p, d)
}

/// Whether this action would add a new image to the collected set: a collect
/// of a location not yet collected, with pre-action resources above the
/// safety thresholds (when resources are enabled).
pub fn collect_succeeds(state: &SmdpState, action: &SmdpAction, scenario: &Scenario, config: &SmdpConfig) -> bool {
    let Some(request) = action.request() else {
        return false;
    };
    if state.collected.contains(request) {
        return false;
    }
    if config.resources_enabled {
        let sc = &scenario.spacecraft;
        if !(state.p > sc.p_min && state.d < sc.d_max) {
            return false;
        }
    }
    true
}

/// Deterministic transition: advance to the action's start time, update the
/// last collect/contact marker and attitude history, add the image when the
/// collect succeeds, and integrate resources over the elapsed interval.
pub fn transition(state: &SmdpState, action: &SmdpAction, scenario: &Scenario, config: &SmdpConfig) -> SmdpState {
    debug_assert!(action.t_s > state.t, "action must start after the current time");
    debug_assert!(
        scenario.opportunity(action.opportunity_id).is_some(),
        "action references a scenario opportunity"
    );

    let (p, d) = integrate_resources(state, action, scenario, config);
    let mut collected = state.collected.clone();
    if collect_succeeds(state, action, scenario, config) {
        collected.insert(action.request().expect("collect has a request"));
    }

    let is_cc = matches!(action.mode, Mode::Collect | Mode::Contact);
    let last_pointing = if is_cc {
        let opp = scenario
            .opportunity(action.opportunity_id)
            .expect("action references a scenario opportunity");
        Some(if config.agility_from_start {
            opp.pointing_start
        } else {
            opp.pointing_end
        })
    } else {
        state.last_pointing
    };

    SmdpState {
        t: action.t_s,
        t_s_p: if is_cc { action.t_s } else { state.t_s_p },
        collected,
        d,
        p,
        last_pointing,
    }
}

/// Reward for taking `action` in `state`: the sum of every matching row.
///
/// * a successful new collect earns gamma^(t_s - t) times the request reward
/// * contacts earn 1e-1 per second of duration
/// * sun-points earn 1e-4 per second of duration
/// * crossing either safety threshold after the transition costs 1e4 each
pub fn reward(state: &SmdpState, action: &SmdpAction, scenario: &Scenario, config: &SmdpConfig) -> f64 {
    let mut total = 0.0;
    match action.mode {
        Mode::Collect => {
            if collect_succeeds(state, action, scenario, config) {
                let request = action.request().expect("collect has a request");
                let r = scenario.request(request).map_or(0.0, |req| req.reward);
                total += config.gamma.powf(action.t_s - state.t) * r;
            }
        }
        Mode::Contact => total += CONTACT_REWARD_PER_S * duration_basis(state, action, config),
        Mode::Sunpoint => total += SUNPOINT_REWARD_PER_S * duration_basis(state, action, config),
    }
    if config.resources_enabled {
        let (p, d) = integrate_resources(state, action, scenario, config);
        let sc = &scenario.spacecraft;
        if p <= sc.p_min {
            total -= RESOURCE_PENALTY;
        }
        if d >= sc.d_max {
            total -= RESOURCE_PENALTY;
        }
    }
    total
}

fn duration_basis(state: &SmdpState, action: &SmdpAction, config: &SmdpConfig) -> f64 {
    if config.literal_duration_reward {
        action.t_s - state.t
    } else {
        action.duration_s()
    }
}

/// Geometric compatibility of two opportunities for chain/packing solvers:
/// the later one must start after the earlier ends, with enough time to slew
/// between their pointings. Order-insensitive; overlapping windows are
/// incompatible in both directions.
pub fn opportunities_compatible(a: &Opportunity, b: &Opportunity, scenario: &Scenario, config: &SmdpConfig) -> bool {
    let (first, second) = if a.t_s <= b.t_s { (a, b) } else { (b, a) };
    if config.agility_from_start {
        return astro::slew_feasible(
            &first.pointing_start,
            &second.pointing_start,
            scenario.spacecraft.slew_rate_deg_s,
        ) && second.t_s > first.t_s;
    }
    astro::slew_feasible(
        &first.pointing_end,
        &second.pointing_start,
        scenario.spacecraft.slew_rate_deg_s,
    )
}

/// Hashable key for persistent search trees: the full state tuple with times
/// and resources quantized to 1e-6 so float identity misses cannot split
/// equivalent states.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct StateKey {
    t_us: i64,
    t_s_p_us: i64,
    collected: CollectedSet,
    d_q: i64,
    p_q: i64,
}

impl StateKey {
    pub fn of(state: &SmdpState) -> Self {
        let q = |x: f64| (x * 1e6).round() as i64;
        Self {
            t_us: q(state.t),
            t_s_p_us: q(state.t_s_p),
            collected: state.collected.clone(),
            d_q: q(state.d),
            p_q: q(state.p),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::synth::{self, SynthOpp};

    fn cfg() -> SmdpConfig {
        SmdpConfig::default()
    }

    fn rcfg() -> SmdpConfig {
        SmdpConfig::default().with_resources(true)
    }

    #[test]
    fn linear_power_update_over_elapsed_interval() {
        // p = 0.5, collect 100 s after the current time at -5e-4/s.
        let scenario = synth::two_feasible_collects();
        let mut state = initial_state(&scenario);
        state.p = 0.5;
        state.t = scenario.opportunities[0].t_s - 100.0;
        let action = SmdpAction::from_opportunity(&scenario.opportunities[0]);
        let next = transition(&state, &action, &scenario, &rcfg());
        assert!((next.p - 0.45).abs() < 1e-12, "p was {}", next.p);
    }

    #[test]
    fn duplicate_collect_keeps_set_but_updates_resources() {
        let scenario = synth::two_feasible_collects();
        let state = initial_state(&scenario);
        let a0 = SmdpAction::from_opportunity(&scenario.opportunities[0]);
        let cfg = rcfg();
        let s1 = transition(&state, &a0, &scenario, &cfg);
        assert_eq!(s1.collected.len(), 1);

        // Re-collecting the same image later: set unchanged, resources move.
        let mut again = s1.clone();
        again.t = a0.t_s; // pretend we're back before a later window of the same image
        let later = scenario
            .opportunities
            .iter()
            .find(|o| o.mode == Mode::Collect && o.location == a0.location && o.t_s > a0.t_s);
        if let Some(later) = later {
            let a1 = SmdpAction::from_opportunity(later);
            let s2 = transition(&again, &a1, &scenario, &cfg);
            assert_eq!(s2.collected.len(), 1);
            assert!(s2.p < again.p);
        }
    }

    #[test]
    fn full_recorder_blocks_collect_but_still_integrates() {
        let scenario = synth::two_feasible_collects();
        let mut state = initial_state(&scenario);
        state.d = scenario.spacecraft.d_max;
        let action = SmdpAction::from_opportunity(&scenario.opportunities[0]);
        let next = transition(&state, &action, &scenario, &rcfg());
        assert_eq!(next.collected.len(), 0);
        assert!(next.d > state.d, "telemetry keeps accruing");
        // The blocked collect also earns nothing.
        let r = reward(&state, &action, &scenario, &rcfg());
        assert!(r <= 0.0, "blocked collect must not pay, got {r}");
    }

    #[test]
    fn discounted_collect_reward() {
        let scenario = synth::two_feasible_collects();
        let mut state = initial_state(&scenario);
        state.t = scenario.opportunities[0].t_s - 100.0;
        let action = SmdpAction::from_opportunity(&scenario.opportunities[0]);
        let r = reward(&state, &action, &scenario, &cfg());
        let expected = 0.999f64.powf(100.0);
        assert!((r - expected).abs() < 1e-12);
        assert!((expected - 0.904792).abs() < 1e-6);
    }

    #[test]
    fn contact_reward_is_tenth_per_second_of_duration() {
        let scenario = synth::contact_instance(600.0);
        let state = initial_state(&scenario);
        let contact = scenario
            .opportunities
            .iter()
            .find(|o| o.mode == Mode::Contact)
            .unwrap();
        let r = reward(&state, &SmdpAction::from_opportunity(contact), &scenario, &cfg());
        assert!((r - 60.0).abs() < 1e-9, "got {r}");
    }

    #[test]
    fn both_penalties_can_fire_together() {
        let mut scenario = synth::two_feasible_collects();
        scenario.spacecraft.p0 = 0.31;
        scenario.spacecraft.d0 = 0.7499;
        // Make the first action drain power below p_min while telemetry
        // pushes data over d_max.
        scenario.spacecraft.power_rates.collect = -0.01;
        scenario.spacecraft.data_rates.collect = 0.01;
        let state = initial_state(&scenario);
        let action = SmdpAction::from_opportunity(&scenario.opportunities[0]);
        let r = reward(&state, &action, &scenario, &rcfg());
        assert!(r <= -2.0 * RESOURCE_PENALTY + 1.0, "expected both penalties, got {r}");
    }

    #[test]
    fn action_space_truncates_to_n_a_max() {
        let scenario = synth::two_feasible_collects();
        let state = initial_state(&scenario);
        let mut config = cfg();
        config.n_a_max = 3;
        let actions = action_space(&state, &scenario, &config);
        assert_eq!(actions.len(), 3);
        // Earliest three in (t_s, id) order: first collect, its twin, then
        // whichever comes next.
        assert_eq!(actions[0].opportunity_id, scenario.opportunities[0].id);
        assert_eq!(actions[1].opportunity_id, scenario.opportunities[1].id);
        for w in actions.windows(2) {
            assert!(w[0].t_s <= w[1].t_s);
        }
    }

    #[test]
    fn past_the_last_opportunity_the_action_space_is_empty() {
        let scenario = synth::two_feasible_collects();
        let mut state = initial_state(&scenario);
        state.t = scenario.horizon_s + 1.0;
        assert!(action_space(&state, &scenario, &cfg()).is_empty());
    }

    #[test]
    fn infeasible_slew_excludes_the_second_collect() {
        // Two collects 10 s apart needing a 40 degree slew at 1 deg/s.
        let scenario = synth::build(
            vec![
                SynthOpp::collect(0, 100.0, 130.0, 1.0, 0.0),
                SynthOpp::collect(1, 140.0, 170.0, 1.0, 40.0),
            ],
            true,
        );
        let state = initial_state(&scenario);
        let first = SmdpAction::from_opportunity(&scenario.opportunities[0]);
        let after = transition(&state, &first, &scenario, &cfg());
        let mut config = cfg();
        config.n_a_max = 10;
        let ids: Vec<_> = action_space(&after, &scenario, &config)
            .iter()
            .map(|a| a.opportunity_id)
            .collect();
        let second_collect = scenario
            .opportunities
            .iter()
            .find(|o| o.mode == Mode::Collect && o.t_s == 140.0)
            .unwrap();
        assert!(!ids.contains(&second_collect.id), "40 deg in 10 s at 1 deg/s must be infeasible");
        // Its sun-point twin remains available.
        let twin = scenario.sunpoint_twin(second_collect.id).unwrap();
        assert!(ids.contains(&twin.id));
    }

    #[test]
    fn transitions_advance_time_strictly() {
        let scenario = synth::two_feasible_collects();
        let mut state = initial_state(&scenario);
        let config = cfg();
        loop {
            let actions = action_space(&state, &scenario, &config);
            let Some(a) = actions.first() else { break };
            let next = transition(&state, a, &scenario, &config);
            assert!(next.t > state.t);
            assert!(next.collected.len() >= state.collected.len());
            assert!(next.collected.len() <= state.collected.len() + 1);
            state = next;
        }
    }

    #[test]
    fn resources_disabled_means_parameter_independence() {
        // Same trajectory and rewards regardless of resource parameters.
        let base = synth::two_feasible_collects();
        let mut hot = base.clone();
        hot.spacecraft.power_rates.collect = -0.5;
        hot.spacecraft.data_rates.collect = 0.9;
        hot.spacecraft.p0 = 0.31;

        let config = cfg();
        let run = |scenario: &Scenario| {
            let mut state = initial_state(scenario);
            let mut rewards = Vec::new();
            loop {
                let actions = action_space(&state, scenario, &config);
                let Some(a) = actions.first() else { break };
                rewards.push(reward(&state, a, scenario, &config));
                state = transition(&state, a, scenario, &config);
            }
            (state.collected.len(), rewards)
        };
        assert_eq!(run(&base), run(&hot));
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn resources_stay_in_unit_interval(seed in 0u64..500) {
                let scenario = synth::random_instance(seed, 6, 4000.0, true);
                let config = SmdpConfig { resources_enabled: true, n_a_max: 4, ..SmdpConfig::default() };
                let mut state = initial_state(&scenario);
                for pick in 0..32usize {
                    let actions = action_space(&state, &scenario, &config);
                    if actions.is_empty() { break; }
                    let a = &actions[pick % actions.len()];
                    state = transition(&state, a, &scenario, &config);
                    prop_assert!((0.0..=1.0).contains(&state.p));
                    prop_assert!((0.0..=1.0).contains(&state.d));
                }
            }
        }
    }
}
