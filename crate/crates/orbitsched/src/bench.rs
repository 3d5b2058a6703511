//! Benchmark harness: N random location samplings times solvers times
//! resource modes, with per-run reward, runtime, and time-normalized reward,
//! plus brute-force hyperparameter grid search.
//!
//! Every (count, sample) cell generates one scenario, computes its
//! opportunity list once, and hands the identical instance to every solver
//! in both modes; solver timing excludes that precomputation. Cells run on a
//! small worker pool and rows are emitted in canonical order regardless of
//! scheduling.

use std::collections::BTreeMap;
use std::path::Path;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use serde::{Deserialize, Serialize};

use crate::chart;
use crate::error::{Error, Result};
use crate::scenario::{self, Scenario};
use crate::solvers::{self, SolverSettings};
use crate::validate;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ResourceMode {
    With,
    Without,
}

impl ResourceMode {
    pub fn enabled(self) -> bool {
        matches!(self, ResourceMode::With)
    }
}

impl std::fmt::Display for ResourceMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            ResourceMode::With => "with",
            ResourceMode::Without => "without",
        })
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentSpec {
    pub location_counts: Vec<usize>,
    pub samples_per_count: usize,
    pub solvers: Vec<SolverSettings>,
    pub resource_modes: Vec<ResourceMode>,
    #[serde(default)]
    pub base_seed: Option<u64>,
    #[serde(default = "default_horizon")]
    pub horizon_s: f64,
}

fn default_horizon() -> f64 {
    86_400.0
}

impl ExperimentSpec {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let spec: ExperimentSpec = serde_json::from_str(&text).map_err(|e| Error::Parse {
            path: path.display().to_string(),
            source: e,
        })?;
        spec.check()?;
        Ok(spec)
    }

    pub fn check(&self) -> Result<()> {
        if self.location_counts.is_empty() || self.location_counts.contains(&0) {
            return Err(Error::invalid("experiment spec", "location_counts must be nonempty and positive"));
        }
        if self.samples_per_count == 0 {
            return Err(Error::invalid("experiment spec", "samples_per_count must be at least 1"));
        }
        if self.solvers.is_empty() {
            return Err(Error::invalid("experiment spec", "solver list is empty"));
        }
        if self.resource_modes.is_empty() {
            return Err(Error::invalid("experiment spec", "resource_modes is empty"));
        }
        if !(self.horizon_s > 0.0) {
            return Err(Error::invalid("experiment spec", "horizon_s must be positive"));
        }
        for s in &self.solvers {
            if !solvers::SOLVER_NAMES.contains(&s.name.as_str()) {
                return Err(Error::invalid(
                    "experiment spec",
                    format!("unknown solver '{}'", s.name),
                ));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ResultRow {
    pub solver: String,
    pub resource_mode: ResourceMode,
    pub n_locations: usize,
    pub sample_index: usize,
    pub total_reward: f64,
    pub images_collected: usize,
    pub runtime_s: f64,
    pub reward_per_second: f64,
    pub error: Option<String>,
}

/// Scenario seed for one cell: deterministic mix of the base seed with the
/// cell coordinates.
pub fn cell_seed(base: u64, n_locations: usize, sample: usize) -> u64 {
    let mut x = (n_locations as u64)
        .wrapping_mul(0x9E37_79B9_7F4A_7C15)
        .wrapping_add(sample as u64 + 1);
    // splitmix64 finalizer
    x ^= x >> 30;
    x = x.wrapping_mul(0xBF58_476D_1CE4_E5B9);
    x ^= x >> 27;
    x = x.wrapping_mul(0x94D0_49BB_1331_11EB);
    x ^= x >> 31;
    base.wrapping_add(x)
}

/// Build the shared instance for one cell.
pub fn cell_scenario(spec: &ExperimentSpec, n_locations: usize, sample: usize) -> Scenario {
    let seed = cell_seed(spec.base_seed.unwrap_or(0), n_locations, sample);
    let mut s = scenario::generate(n_locations, seed, spec.horizon_s, scenario::default_stations());
    s.opportunities = s.compute_opportunities();
    s
}

/// Run the full experiment. Rows come back sorted by (count, sample, mode,
/// solver order in the spec). `jobs` sizes the worker pool.
pub fn run_experiment(spec: &ExperimentSpec, jobs: usize) -> Result<Vec<ResultRow>> {
    spec.check()?;
    let cells: Vec<(usize, usize)> = spec
        .location_counts
        .iter()
        .flat_map(|&count| (0..spec.samples_per_count).map(move |sample| (count, sample)))
        .collect();

    let next = AtomicUsize::new(0);
    let results: Mutex<Vec<(usize, Vec<ResultRow>)>> = Mutex::new(Vec::new());
    let workers = jobs.max(1).min(cells.len().max(1));

    std::thread::scope(|scope| {
        for _ in 0..workers {
            scope.spawn(|| loop {
                let idx = next.fetch_add(1, Ordering::Relaxed);
                if idx >= cells.len() {
                    break;
                }
                let (count, sample) = cells[idx];
                let rows = run_cell(spec, count, sample);
                results.lock().expect("worker poisoned the results").push((idx, rows));
            });
        }
    });

    let mut by_cell = results.into_inner().expect("workers finished");
    by_cell.sort_by_key(|(idx, _)| *idx);
    Ok(by_cell.into_iter().flat_map(|(_, rows)| rows).collect())
}

fn run_cell(spec: &ExperimentSpec, count: usize, sample: usize) -> Vec<ResultRow> {
    let scenario = cell_scenario(spec, count, sample);
    let mut rows = Vec::new();
    for &mode in &spec.resource_modes {
        for settings in &spec.solvers {
            rows.push(run_one(settings, &scenario, mode, count, sample));
        }
    }
    rows
}

fn run_one(
    settings: &SolverSettings,
    scenario: &Scenario,
    mode: ResourceMode,
    count: usize,
    sample: usize,
) -> ResultRow {
    let mut row = ResultRow {
        solver: settings.name.clone(),
        resource_mode: mode,
        n_locations: count,
        sample_index: sample,
        total_reward: 0.0,
        images_collected: 0,
        runtime_s: 0.0,
        reward_per_second: 0.0,
        error: None,
    };
    match solvers::run_solver(settings, scenario, mode.enabled()) {
        Err(e) => row.error = Some(e.to_string()),
        Ok(plan) => {
            let config = settings.smdp_config(mode.enabled());
            let report = validate::validate_plan(&plan, scenario, &config);
            if !report.feasible {
                row.error = Some(format!("plan failed validation: {} violations", report.violations.len()));
            } else if (report.recomputed_reward - plan.total_reward).abs() > 1e-9 {
                row.error = Some("validator reward mismatch".to_string());
            } else {
                row.total_reward = plan.total_reward;
                row.images_collected = plan.images_collected;
                row.runtime_s = plan.wall_time_s;
                row.reward_per_second = plan.total_reward / plan.wall_time_s.max(1e-9);
            }
        }
    }
    row
}

pub fn rows_to_csv(rows: &[ResultRow]) -> String {
    let mut out = String::from(
        "solver,resource_mode,n_locations,sample_index,total_reward,images_collected,runtime_s,reward_per_second,error\n",
    );
    for r in rows {
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{},{}\n",
            r.solver,
            r.resource_mode,
            r.n_locations,
            r.sample_index,
            r.total_reward,
            r.images_collected,
            r.runtime_s,
            r.reward_per_second,
            r.error.as_deref().unwrap_or("")
        ));
    }
    out
}

/// Mean of `f` over matching rows, grouped by (solver, mode) in first-seen
/// order. Error rows are excluded.
fn group_means(rows: &[ResultRow], f: impl Fn(&ResultRow) -> f64) -> Vec<(String, f64)> {
    let mut order: Vec<String> = Vec::new();
    let mut sums: BTreeMap<String, (f64, usize)> = BTreeMap::new();
    for r in rows.iter().filter(|r| r.error.is_none()) {
        let label = format!("{} ({})", r.solver, r.resource_mode);
        if !order.contains(&label) {
            order.push(label.clone());
        }
        let e = sums.entry(label).or_insert((0.0, 0));
        e.0 += f(r);
        e.1 += 1;
    }
    order
        .into_iter()
        .map(|label| {
            let (sum, n) = sums[&label];
            (label, sum / n as f64)
        })
        .collect()
}

/// Write the result CSV, a plain-text summary, and the three comparison
/// charts (mean reward, mean runtime, mean time-normalized reward).
pub fn write_outputs(rows: &[ResultRow], out_dir: &Path) -> Result<()> {
    std::fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir, e))?;
    let csv_path = out_dir.join("results.csv");
    std::fs::write(&csv_path, rows_to_csv(rows)).map_err(|e| Error::io(&csv_path, e))?;

    let reward = group_means(rows, |r| r.total_reward);
    let runtime = group_means(rows, |r| r.runtime_s);
    let normalized = group_means(rows, |r| r.reward_per_second);

    chart::write_bar_chart(&out_dir.join("reward.svg"), "Total reward", "mean reward", &reward)?;
    chart::write_bar_chart(&out_dir.join("runtime.svg"), "Solver runtime", "mean seconds", &runtime)?;
    chart::write_bar_chart(
        &out_dir.join("reward_per_second.svg"),
        "Time-normalized reward",
        "mean reward / s",
        &normalized,
    )?;

    let mut summary = String::from("solver (mode): mean_reward mean_runtime_s mean_reward_per_s\n");
    for ((label, rew), ((_, run), (_, norm))) in
        reward.iter().zip(runtime.iter().zip(normalized.iter()))
    {
        summary.push_str(&format!("{label}: {rew:.4} {run:.4} {norm:.4}\n"));
    }
    let summary_path = out_dir.join("summary.txt");
    std::fs::write(&summary_path, summary).map_err(|e| Error::io(&summary_path, e))?;
    Ok(())
}

// ---------------------------------------------------------------------------
// Grid search
// ---------------------------------------------------------------------------

/// Parameter axes: name -> values. Integer-valued parameters (d_solve,
/// n_sim, n_a_max) are rounded from the f64 grid values.
pub type GridAxes = BTreeMap<String, Vec<f64>>;

#[derive(Debug, Clone, Serialize)]
pub struct GridRow {
    pub params: BTreeMap<String, f64>,
    pub mean_reward: f64,
    pub runs: usize,
}

/// Repetitions per point for the stochastic solver; deterministic solvers
/// run once per point.
pub const MCTS_GRID_REPEATS: usize = 10;

fn allowed_params(solver: &str) -> &'static [&'static str] {
    match solver {
        "forward" => &["gamma", "d_solve", "n_a_max"],
        "mcts" => &["gamma", "d_solve", "c", "n_sim", "n_a_max"],
        "rule" => &["gamma", "n_a_max"],
        "graph" | "bnb" => &["gamma"],
        _ => &[],
    }
}

fn apply_param(settings: &mut SolverSettings, name: &str, value: f64) {
    match name {
        "gamma" => settings.gamma = value,
        "d_solve" => settings.d_solve = value.round() as usize,
        "c" => settings.c = value,
        "n_sim" => settings.n_sim = value.round() as usize,
        "n_a_max" => settings.n_a_max = value.round() as usize,
        other => unreachable!("unvalidated grid parameter {other}"),
    }
}

/// Evaluate the Cartesian product of the axes on one scenario and return
/// rows ranked by mean reward (descending; ties keep grid order).
pub fn grid_search(
    scenario: &Scenario,
    base: &SolverSettings,
    axes: &GridAxes,
    resources: ResourceMode,
) -> Result<Vec<GridRow>> {
    if axes.is_empty() {
        return Err(Error::invalid("grid", "no parameter axes given"));
    }
    let allowed = allowed_params(&base.name);
    for (name, values) in axes {
        if !allowed.contains(&name.as_str()) {
            return Err(Error::invalid(
                "grid",
                format!("parameter '{name}' is not recognized by solver '{}'", base.name),
            ));
        }
        if values.is_empty() {
            return Err(Error::invalid("grid", format!("parameter '{name}' has no values")));
        }
    }

    let names: Vec<&String> = axes.keys().collect();
    let sizes: Vec<usize> = names.iter().map(|n| axes[*n].len()).collect();
    let total: usize = sizes.iter().product();

    let mut rows = Vec::with_capacity(total);
    for flat in 0..total {
        let mut remainder = flat;
        let mut settings = base.clone();
        let mut params = BTreeMap::new();
        for (axis, name) in names.iter().enumerate() {
            let i = remainder % sizes[axis];
            remainder /= sizes[axis];
            let value = axes[*name][i];
            apply_param(&mut settings, name, value);
            params.insert((*name).clone(), value);
        }

        let repeats = if base.name == "mcts" { MCTS_GRID_REPEATS } else { 1 };
        let mut sum = 0.0;
        for rep in 0..repeats {
            settings.seed = base.seed + rep as u64;
            let plan = solvers::run_solver(&settings, scenario, resources.enabled())
                .map_err(|e| Error::invalid("grid", e.to_string()))?;
            sum += plan.total_reward;
        }
        rows.push(GridRow {
            params,
            mean_reward: sum / repeats as f64,
            runs: repeats,
        });
    }

    rows.sort_by(|a, b| b.mean_reward.total_cmp(&a.mean_reward));
    Ok(rows)
}

pub fn grid_to_csv(rows: &[GridRow]) -> String {
    let Some(first) = rows.first() else {
        return String::from("mean_reward,runs\n");
    };
    let names: Vec<&String> = first.params.keys().collect();
    let mut out = names
        .iter()
        .map(|n| n.as_str())
        .collect::<Vec<_>>()
        .join(",");
    out.push_str(",mean_reward,runs\n");
    for r in rows {
        for n in &names {
            out.push_str(&format!("{},", r.params[*n]));
        }
        out.push_str(&format!("{},{}\n", r.mean_reward, r.runs));
    }
    out
}

/// Best row for each distinct n_a_max value (the shape of the tuning
/// summaries); falls back to the single best row when n_a_max was not an
/// axis.
pub fn best_per_n_a_max(rows: &[GridRow]) -> Vec<&GridRow> {
    let mut best: BTreeMap<i64, &GridRow> = BTreeMap::new();
    for r in rows {
        let key = r.params.get("n_a_max").map_or(-1, |v| v.round() as i64);
        best.entry(key)
            .and_modify(|cur| {
                if r.mean_reward > cur.mean_reward {
                    *cur = r;
                }
            })
            .or_insert(r);
    }
    best.into_values().collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::synth;

    fn tiny_spec() -> ExperimentSpec {
        ExperimentSpec {
            location_counts: vec![3],
            samples_per_count: 2,
            solvers: vec![
                SolverSettings::named("rule"),
                SolverSettings::named("graph"),
                SolverSettings::named("forward"),
            ],
            resource_modes: vec![ResourceMode::Without],
            base_seed: Some(5),
            horizon_s: 3000.0,
        }
    }

    #[test]
    fn cardinality_one_count_two_samples_three_solvers() {
        let rows = run_experiment(&tiny_spec(), 2).unwrap();
        assert_eq!(rows.len(), 6);
        assert!(rows.iter().all(|r| r.error.is_none()), "{rows:?}");
    }

    #[test]
    fn reruns_reproduce_reward_columns() {
        let a = run_experiment(&tiny_spec(), 1).unwrap();
        let b = run_experiment(&tiny_spec(), 2).unwrap();
        let key = |rows: &[ResultRow]| {
            rows.iter()
                .map(|r| (r.solver.clone(), r.sample_index, r.total_reward.to_bits(), r.images_collected))
                .collect::<Vec<_>>()
        };
        assert_eq!(key(&a), key(&b));
    }

    #[test]
    fn unsupported_combination_becomes_an_error_row() {
        let mut spec = tiny_spec();
        spec.solvers = vec![SolverSettings::named("bnb")];
        spec.resource_modes = vec![ResourceMode::With];
        let rows = run_experiment(&spec, 1).unwrap();
        assert_eq!(rows.len(), 2);
        assert!(rows.iter().all(|r| r.error.is_some()));
    }

    #[test]
    fn empty_solver_list_is_rejected() {
        let mut spec = tiny_spec();
        spec.solvers.clear();
        assert!(run_experiment(&spec, 1).is_err());
    }

    #[test]
    fn degenerate_grid_equals_a_direct_run() {
        let scenario = synth::random_instance(2, 8, 4000.0, true);
        let base = SolverSettings::named("forward");
        let mut axes = GridAxes::new();
        axes.insert("d_solve".into(), vec![3.0]);
        let rows = grid_search(&scenario, &base, &axes, ResourceMode::Without).unwrap();
        assert_eq!(rows.len(), 1);
        let direct = solvers::run_solver(&base, &scenario, false).unwrap();
        assert_eq!(rows[0].mean_reward, direct.total_reward);
    }

    #[test]
    fn grid_rejects_unknown_parameters() {
        let scenario = synth::two_feasible_collects();
        let base = SolverSettings::named("forward");
        let mut axes = GridAxes::new();
        axes.insert("temperature".into(), vec![1.0]);
        assert!(grid_search(&scenario, &base, &axes, ResourceMode::Without).is_err());
    }

    #[test]
    fn grid_cartesian_product_size() {
        let scenario = synth::random_instance(8, 6, 3000.0, true);
        let base = SolverSettings::named("forward");
        let mut axes = GridAxes::new();
        axes.insert("gamma".into(), vec![0.99, 0.999]);
        axes.insert("d_solve".into(), vec![1.0, 2.0, 3.0]);
        let rows = grid_search(&scenario, &base, &axes, ResourceMode::Without).unwrap();
        assert_eq!(rows.len(), 6);
        // Ranked descending.
        for w in rows.windows(2) {
            assert!(w[0].mean_reward >= w[1].mean_reward);
        }
    }
}
