//! Benchmark harness over generated maps: one CSV row per (template, team,
//! seed) with heterogeneous and homogeneous metrics and stage timings, plus a
//! budget sweep of the solver's anytime behaviour.

use std::io::Write;
use std::path::Path;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use choral_core::hvrp::{solve_heuristic, Budget, HeuristicParams, TracePoint};
use choral_core::scenario::{resolve_scenario, SolverSettings, Template};
use choral_core::MapSpec;
use serde::{Deserialize, Serialize};

use crate::commands::generated_scenario;
use crate::pipeline::{prepare, run_pipeline, RunOptions, StageError};

/// Version of the CSV column layout.
pub const CSV_SCHEMA: u32 = 1;

#[derive(Debug, Clone)]
pub struct BenchConfig {
    pub templates: Vec<Template>,
    pub teams: Vec<String>,
    pub seeds: Vec<u64>,
    pub run: RunOptions,
    /// Rows evaluated concurrently.
    pub parallel: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchRow {
    pub csv_schema: u32,
    pub template: String,
    pub team: String,
    pub seed: u64,
    pub status: String,
    pub error: String,
    pub num_tasks: Option<usize>,
    pub het_distance_m: Option<f64>,
    pub het_time_s: Option<f64>,
    pub het_traversability_accident_probability: Option<f64>,
    pub het_collision_accident_probability: Option<f64>,
    pub hom_distance_m: Option<f64>,
    pub hom_time_s: Option<f64>,
    pub hom_traversability_accident_probability: Option<f64>,
    pub hom_collision_accident_probability: Option<f64>,
    pub build_prm_ms: Option<f64>,
    pub compute_dist_ms: Option<f64>,
    pub compute_het_costs_ms: Option<f64>,
    pub solve_ms: Option<f64>,
}

impl BenchRow {
    fn failed(template: Template, team: &str, seed: u64, status: &str, error: String) -> Self {
        BenchRow {
            csv_schema: CSV_SCHEMA,
            template: template.name().into(),
            team: team.into(),
            seed,
            status: status.into(),
            error,
            num_tasks: None,
            het_distance_m: None,
            het_time_s: None,
            het_traversability_accident_probability: None,
            het_collision_accident_probability: None,
            hom_distance_m: None,
            hom_time_s: None,
            hom_traversability_accident_probability: None,
            hom_collision_accident_probability: None,
            build_prm_ms: None,
            compute_dist_ms: None,
            compute_het_costs_ms: None,
            solve_ms: None,
        }
    }
}

fn stage_failure(template: Template, team: &str, seed: u64, e: StageError) -> BenchRow {
    let status = if e.error.is_infeasible() { "infeasible" } else { "error" };
    BenchRow::failed(template, team, seed, status, e.to_string())
}

/// Generates the map and runs both planners for one combination. Failures are
/// recorded in the row.
pub fn bench_row(template: Template, team: &str, seed: u64, run: &RunOptions) -> BenchRow {
    let spec = MapSpec::standard(template, seed);
    let solver = SolverSettings { seed, ..Default::default() };
    let loaded = match generated_scenario(spec, team, solver).and_then(|s| resolve_scenario(s, Path::new("."))) {
        Ok(l) => l,
        Err(e) => return BenchRow::failed(template, team, seed, "error", format!("load: {e}")),
    };
    let opts = RunOptions { baseline: true, ..run.clone() };
    let out = match run_pipeline(&loaded, &opts) {
        Ok(o) => o,
        Err(e) => return stage_failure(template, team, seed, e),
    };
    let (r, t) = (&out.report, &out.report.stage_times);
    let hom = r.hom.as_ref();
    BenchRow {
        status: "ok".into(),
        error: String::new(),
        num_tasks: Some(r.num_tasks),
        het_distance_m: Some(r.het.max_distance_m),
        het_time_s: Some(r.het.max_time_s),
        het_traversability_accident_probability: Some(r.het.max_traversability_accident_probability),
        het_collision_accident_probability: Some(r.het.max_collision_accident_probability),
        hom_distance_m: hom.map(|h| h.max_distance_m),
        hom_time_s: hom.map(|h| h.max_time_s),
        hom_traversability_accident_probability: hom.map(|h| h.max_traversability_accident_probability),
        hom_collision_accident_probability: hom.map(|h| h.max_collision_accident_probability),
        build_prm_ms: Some(t.prm_s * 1e3),
        compute_dist_ms: Some(t.distance_s * 1e3),
        compute_het_costs_ms: Some(t.het_costs_s * 1e3),
        solve_ms: Some(t.solve_s * 1e3),
        ..BenchRow::failed(template, team, seed, "ok", String::new())
    }
}

/// Runs `f` over `jobs` on up to `parallel` threads, results in job order.
fn run_jobs<J: Sync, R: Send>(jobs: &[J], parallel: usize, f: impl Fn(&J) -> R + Sync) -> Vec<R> {
    let next = AtomicUsize::new(0);
    let results: Mutex<Vec<Option<R>>> = Mutex::new((0..jobs.len()).map(|_| None).collect());
    std::thread::scope(|s| {
        for _ in 0..parallel.clamp(1, jobs.len().max(1)) {
            s.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::Relaxed);
                if i >= jobs.len() {
                    break;
                }
                let r = f(&jobs[i]);
                results.lock().expect("result lock")[i] = Some(r);
            });
        }
    });
    results.into_inner().expect("result lock").into_iter().map(|r| r.expect("job ran")).collect()
}

fn combinations(cfg: &BenchConfig) -> Vec<(Template, String, u64)> {
    let mut jobs = Vec::new();
    for &t in &cfg.templates {
        for team in &cfg.teams {
            for &seed in &cfg.seeds {
                jobs.push((t, team.clone(), seed));
            }
        }
    }
    jobs
}

/// One row per (template, team, seed), in that nesting order.
pub fn cmd_benchmark(cfg: &BenchConfig) -> Vec<BenchRow> {
    run_jobs(&combinations(cfg), cfg.parallel, |(t, team, seed)| bench_row(*t, team, *seed, &cfg.run))
}

pub fn write_csv<S: Serialize, W: Write>(rows: &[S], out: W) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub csv_schema: u32,
    pub template: String,
    pub team: String,
    pub seed: u64,
    pub budget_s: f64,
    pub objective: Option<f64>,
    pub reference_objective: Option<f64>,
    /// `(objective − reference) / reference`.
    pub relative_gap: Option<f64>,
    pub error: String,
}

/// Best objective reached within `seconds`, from an improvement trace.
pub fn objective_at<T: Copy>(trace: &[TracePoint<T>], seconds: f64) -> Option<T> {
    trace.iter().take_while(|p| p.seconds <= seconds).last().map(|p| p.max)
}

/// For each combination, one anytime run of `reference_s` seconds; rows give
/// the best objective reached by each budget and its gap to the final result.
pub fn budget_sweep(cfg: &BenchConfig, budgets: &[f64], reference_s: f64) -> Vec<SweepRow> {
    let rows = run_jobs(&combinations(cfg), cfg.parallel, |(t, team, seed)| {
        let row = |b: f64, obj: Option<f64>, reference: Option<f64>, error: String| SweepRow {
            csv_schema: CSV_SCHEMA,
            template: t.name().into(),
            team: team.clone(),
            seed: *seed,
            budget_s: b,
            objective: obj,
            reference_objective: reference,
            relative_gap: obj.zip(reference).map(|(o, r)| if r > 0.0 { (o - r) / r } else { 0.0 }),
            error,
        };
        let solver = SolverSettings { seed: *seed, ..Default::default() };
        let prepared = generated_scenario(MapSpec::standard(*t, *seed), team, solver)
            .and_then(|s| resolve_scenario(s, Path::new(".")))
            .map_err(|e| e.to_string())
            .and_then(|l| prepare(&l, &cfg.run).map_err(|e| e.to_string()));
        let solved = prepared.and_then(|p| {
            let params = HeuristicParams { budget: Budget::Seconds(reference_s), ..p.params };
            solve_heuristic(&p.problem, &params, None).map_err(|e| e.to_string())
        });
        match solved {
            Ok(o) => budgets.iter().map(|&b| row(b, objective_at(&o.trace, b), Some(o.objective.max), String::new())).collect(),
            Err(e) => budgets.iter().map(|&b| row(b, None, None, e.clone())).collect::<Vec<_>>(),
        }
    });
    rows.into_iter().flatten().collect()
}
