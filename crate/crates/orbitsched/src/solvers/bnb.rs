//! Exact conflict packing by depth-first branch and bound.
//!
//! The model is the binary program over collect opportunities: maximize the
//! summed request rewards subject to at most one opportunity per image and
//! pairwise exclusion of every conflicting pair (temporal overlap or an
//! infeasible slew). For binary variables the per-image cap and its pairwise
//! expansion are equivalent, so the whole model reduces to maximum-weight
//! independent set on the conflict graph.
//!
//! The conflict graph of a day-long instance is sparse and local: conflicts
//! only arise inside the worst-case slew span or between windows of the same
//! image. The solver exploits that by decomposing into connected components,
//! auto-selecting isolated opportunities, seeding each component with a
//! greedy chronological incumbent, and branching include-first on nodes
//! ordered by descending reward then ascending start. The bound relaxes all
//! pairwise slew conflicts and keeps only the per-image cap: the sum over
//! remaining images of their best remaining opportunity.
//!
//! If the deadline expires the best packing found so far is returned with
//! `optimal: false` in the plan stats.

use std::time::Instant;

use super::graph::compatible;
use super::SolverError;
use crate::plan::{Plan, PlanBuilder, SolverStats};
use crate::scenario::{LocationRef, Mode, Opportunity, Scenario};
use crate::smdp::{SmdpAction, SmdpConfig};

pub fn exact_bnb(
    scenario: &Scenario,
    config: &SmdpConfig,
    time_limit_s: f64,
) -> Result<Plan, SolverError> {
    if config.resources_enabled {
        return Err(SolverError::ResourcesUnsupported { name: "bnb" });
    }
    let start = Instant::now();
    let deadline = start.elapsed().as_secs_f64() + time_limit_s;

    let collects: Vec<&Opportunity> = scenario
        .opportunities
        .iter()
        .filter(|o| o.mode == Mode::Collect)
        .filter(|o| weight_of(o, scenario) > 0.0)
        .collect();
    let n = collects.len();
    let weight: Vec<f64> = collects.iter().map(|o| weight_of(o, scenario)).collect();
    let image: Vec<u32> = collects
        .iter()
        .map(|o| match o.location {
            Some(LocationRef::Request(r)) => r.0,
            _ => unreachable!("collects reference requests"),
        })
        .collect();

    // Sparse conflict adjacency. Nodes are in time order, so for each k only
    // a bounded look-back can conflict geometrically; same-image conflicts
    // are found via per-image buckets.
    let mut adj: Vec<Vec<u32>> = vec![Vec::new(); n];
    fn conflict(a: usize, b: usize, adj: &mut [Vec<u32>]) {
        adj[a].push(b as u32);
        adj[b].push(a as u32);
    }
    let max_slew_s = 180.0 / scenario.spacecraft.slew_rate_deg_s;
    for k in 0..n {
        for i in (0..k).rev() {
            if collects[k].t_s - collects[i].t_e > max_slew_s {
                break;
            }
            if image[i] != image[k] && !compatible(collects[i], collects[k], scenario, config) {
                conflict(i, k, &mut adj);
            }
        }
    }
    let mut by_image: std::collections::BTreeMap<u32, Vec<usize>> = std::collections::BTreeMap::new();
    for (k, &img) in image.iter().enumerate() {
        by_image.entry(img).or_default().push(k);
    }
    for nodes in by_image.values() {
        for (a, &i) in nodes.iter().enumerate() {
            for &k in &nodes[a + 1..] {
                conflict(i, k, &mut adj);
            }
        }
    }

    // Connected components of the conflict graph.
    let mut component = vec![usize::MAX; n];
    let mut components: Vec<Vec<usize>> = Vec::new();
    for root in 0..n {
        if component[root] != usize::MAX {
            continue;
        }
        let id = components.len();
        let mut member = vec![root];
        component[root] = id;
        let mut stack = vec![root];
        while let Some(v) = stack.pop() {
            for &w in &adj[v] {
                let w = w as usize;
                if component[w] == usize::MAX {
                    component[w] = id;
                    member.push(w);
                    stack.push(w);
                }
            }
        }
        components.push(member);
    }

    let mut selected: Vec<usize> = Vec::new();
    let mut nodes_explored = 0u64;
    let mut optimal = true;
    for members in &components {
        if members.len() == 1 {
            selected.push(members[0]);
            continue;
        }
        let sub = ComponentSolver::new(members, &weight, &image, &adj, start, deadline);
        let (picks, proven, explored) = sub.solve(n);
        nodes_explored += explored;
        optimal &= proven;
        selected.extend(picks);
    }
    selected.sort_by(|&a, &b| collects[a].t_s.total_cmp(&collects[b].t_s));
    let objective: f64 = selected.iter().map(|&k| weight[k]).sum();

    let mut builder = PlanBuilder::new(scenario, config);
    for &k in &selected {
        builder.push(SmdpAction::from_opportunity(collects[k]));
    }

    let snapshot = serde_json::json!({
        "solver": "bnb",
        "time_limit_s": time_limit_s,
        "smdp": config,
    });
    Ok(builder.finish(
        "bnb",
        snapshot,
        start.elapsed().as_secs_f64(),
        SolverStats {
            objective: Some(objective),
            optimal: Some(optimal),
            nodes_explored,
            ..SolverStats::default()
        },
    ))
}

fn weight_of(o: &Opportunity, scenario: &Scenario) -> f64 {
    match o.location {
        Some(LocationRef::Request(r)) => scenario.request(r).map_or(0.0, |req| req.reward),
        _ => 0.0,
    }
}

/// Depth-first branch and bound over one connected component.
struct ComponentSolver<'a> {
    /// Component members ordered by descending weight, then ascending start
    /// (global index order encodes start order).
    order: Vec<usize>,
    weight: &'a [f64],
    image: &'a [u32],
    adj: &'a [Vec<u32>],
    start: Instant,
    deadline: f64,
}

struct SearchState {
    chosen: Vec<usize>,
    /// How many chosen neighbors currently block each (global) node.
    excluded: Vec<u32>,
    /// Scratch map for the per-image bound.
    image_best: std::collections::HashMap<u32, f64>,
    best_set: Vec<usize>,
    best_value: f64,
    explored: u64,
    expired: bool,
}

impl<'a> ComponentSolver<'a> {
    fn new(
        members: &[usize],
        weight: &'a [f64],
        image: &'a [u32],
        adj: &'a [Vec<u32>],
        start: Instant,
        deadline: f64,
    ) -> Self {
        let mut order = members.to_vec();
        order.sort_by(|&a, &b| weight[b].total_cmp(&weight[a]).then(a.cmp(&b)));
        Self {
            order,
            weight,
            image,
            adj,
            start,
            deadline,
        }
    }

    fn solve(self, n_global: usize) -> (Vec<usize>, bool, u64) {
        // Greedy chronological incumbent: take members in start order when
        // compatible with everything taken so far.
        let mut chrono = self.order.clone();
        chrono.sort_unstable();
        let mut greedy: Vec<usize> = Vec::new();
        for &k in &chrono {
            if greedy.iter().all(|&g| !self.conflicts(g, k)) {
                greedy.push(k);
            }
        }
        let greedy_value: f64 = greedy.iter().map(|&k| self.weight[k]).sum();

        let mut st = SearchState {
            chosen: Vec::new(),
            excluded: vec![0; n_global],
            image_best: std::collections::HashMap::new(),
            best_set: greedy,
            best_value: greedy_value,
            explored: 0,
            expired: false,
        };
        self.dfs(0, 0.0, &mut st);
        (st.best_set, !st.expired, st.explored)
    }

    fn conflicts(&self, a: usize, b: usize) -> bool {
        self.image[a] == self.image[b] || self.adj[a].contains(&(b as u32))
    }

    /// Upper bound on what the suffix can still add: each image counted once
    /// at its best weight among non-excluded remaining nodes. Pairwise slew
    /// conflicts within the remainder are relaxed; conflicts with the chosen
    /// set are exact because chosen nodes mark their neighbors excluded.
    fn suffix_bound(&self, idx: usize, st: &mut SearchState) -> f64 {
        st.image_best.clear();
        let mut bound = 0.0;
        for &k in &self.order[idx..] {
            if st.excluded[k] > 0 {
                continue;
            }
            let entry = st.image_best.entry(self.image[k]).or_insert(0.0);
            if self.weight[k] > *entry {
                bound += self.weight[k] - *entry;
                *entry = self.weight[k];
            }
        }
        bound
    }

    fn dfs(&self, idx: usize, value: f64, st: &mut SearchState) {
        st.explored += 1;
        if st.explored % 1024 == 0 && self.start.elapsed().as_secs_f64() > self.deadline {
            st.expired = true;
        }
        if st.expired {
            return;
        }
        if value + self.suffix_bound(idx, st) <= st.best_value {
            return;
        }
        // The bound guard makes any completion reaching the end strictly
        // better than the incumbent.
        if idx == self.order.len() {
            st.best_value = value;
            st.best_set = st.chosen.clone();
            return;
        }
        let k = self.order[idx];
        if st.excluded[k] == 0 {
            // Include first: strong incumbents early tighten later pruning.
            st.chosen.push(k);
            for &nb in &self.adj[k] {
                st.excluded[nb as usize] += 1;
            }
            self.dfs(idx + 1, value + self.weight[k], st);
            for &nb in &self.adj[k] {
                st.excluded[nb as usize] -= 1;
            }
            st.chosen.pop();
        }
        self.dfs(idx + 1, value, st);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::synth::{self, SynthOpp};

    fn cfg() -> SmdpConfig {
        SmdpConfig::default()
    }

    #[test]
    fn conflicting_pair_takes_the_heavier() {
        let scenario = synth::build(
            vec![
                SynthOpp::collect(0, 100.0, 160.0, 1.0, 0.0),
                SynthOpp::collect(1, 130.0, 190.0, 2.0, 80.0),
            ],
            false,
        );
        let plan = exact_bnb(&scenario, &cfg(), 10.0).unwrap();
        assert_eq!(plan.stats.objective, Some(2.0));
        assert_eq!(plan.stats.optimal, Some(true));
    }

    #[test]
    fn at_most_one_window_per_image() {
        let scenario = synth::build(
            vec![
                SynthOpp::collect(0, 100.0, 120.0, 1.0, 0.0),
                SynthOpp::collect(0, 400.0, 420.0, 1.0, 5.0),
                SynthOpp::collect(0, 800.0, 820.0, 1.0, 10.0),
            ],
            false,
        );
        let plan = exact_bnb(&scenario, &cfg(), 10.0).unwrap();
        assert_eq!(plan.steps.len(), 1);
        assert_eq!(plan.stats.objective, Some(1.0));
    }

    #[test]
    fn matches_exhaustive_subset_enumeration() {
        for seed in 0..15u64 {
            let scenario = synth::random_collect_instance(seed, 12, 6, 1500.0);
            let config = cfg();
            let plan = exact_bnb(&scenario, &config, 30.0).unwrap();
            assert_eq!(plan.stats.optimal, Some(true));

            // Oracle: all 2^n subsets, feasibility checked pairwise.
            let collects: Vec<&Opportunity> = scenario
                .opportunities
                .iter()
                .filter(|o| o.mode == Mode::Collect)
                .collect();
            let n = collects.len();
            let mut best = 0.0f64;
            for mask in 0u32..(1 << n) {
                let members: Vec<usize> = (0..n).filter(|i| mask & (1 << i) != 0).collect();
                let mut ok = true;
                'outer: for (a, &i) in members.iter().enumerate() {
                    for &k in &members[a + 1..] {
                        let same_image = collects[i].location == collects[k].location;
                        if same_image || !compatible(collects[i], collects[k], &scenario, &config) {
                            ok = false;
                            break 'outer;
                        }
                    }
                }
                if ok {
                    let value: f64 = members
                        .iter()
                        .map(|&i| weight_of(collects[i], &scenario))
                        .sum();
                    best = best.max(value);
                }
            }
            assert_eq!(plan.stats.objective, Some(best), "seed {seed}");
        }
    }

    #[test]
    fn rejects_resource_mode() {
        let scenario = synth::two_feasible_collects();
        let config = SmdpConfig::default().with_resources(true);
        assert!(matches!(
            exact_bnb(&scenario, &config, 5.0),
            Err(SolverError::ResourcesUnsupported { .. })
        ));
    }
}
