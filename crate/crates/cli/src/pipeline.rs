//! The planning pipeline: distance field, task extraction, roadmap, path table,
//! cost matrices, solve, evaluate.

use std::fmt;
use std::time::Instant;

use choral_core::costmodel::{build_cost_matrices, robot_depots, task_terminals};
use choral_core::geometry::Point;
use choral_core::gridmap::compute_edf;
use choral_core::hvrp::{
    evaluate, solve_homogeneous_baseline, solve_portfolio, BaselineOutcome, Budget, HeuristicParams, Metrics,
    RoutingProblem,
};
use choral_core::roadmap::{all_pairs_paths, build_prm};
use choral_core::scenario::{
    map_fingerprint, render_svg, RenderRoute, RouteRecord, TaskRecord, DEFAULT_ITERATIONS, SCHEMA_VERSION,
};
use choral_core::taskextract::extract_tasks;
use choral_core::{Error, InspectionTask, LoadedScenario, PathTable, Roadmap, SolutionFile, SolveOutcome};
use serde::{Deserialize, Serialize};

/// Command-line overrides of scenario settings.
#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    pub seed: Option<u64>,
    pub budget_s: Option<f64>,
    pub budget_iters: Option<u64>,
    pub stall_iterations: Option<u64>,
    pub baseline: bool,
    /// Replaces every robot's risk weight.
    pub alpha: Option<f64>,
    pub workers: Option<usize>,
}

/// A failure tagged with the pipeline stage it came from.
#[derive(Debug)]
pub struct StageError {
    pub stage: &'static str,
    pub error: Error,
}

impl fmt::Display for StageError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.stage, self.error)
    }
}

impl std::error::Error for StageError {}

fn at<R>(stage: &'static str, r: choral_core::Result<R>) -> Result<R, StageError> {
    r.map_err(|error| StageError { stage, error })
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct StageTimes {
    pub edf_s: f64,
    pub tasks_s: f64,
    pub prm_s: f64,
    pub distance_s: f64,
    pub het_costs_s: f64,
    pub solve_s: f64,
    pub baseline_s: f64,
    pub total_s: f64,
}

/// One metric row per planning method, worst case over the team.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricRow {
    pub method: String,
    pub max_distance_m: f64,
    pub max_time_s: f64,
    pub max_traversability_accident_probability: f64,
    pub max_collision_accident_probability: f64,
    pub max_accident_probability: f64,
    pub objective: f64,
    pub total_cost: f64,
    /// Capacity breaches under the true costs (baseline only).
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub violations: Vec<String>,
}

impl MetricRow {
    fn new(method: &str, m: &Metrics<f64>, violations: Vec<String>) -> Self {
        MetricRow {
            method: method.into(),
            max_distance_m: m.max_distance,
            max_time_s: m.max_time_s,
            max_traversability_accident_probability: m.max_trav_prob,
            max_collision_accident_probability: m.max_coll_prob,
            max_accident_probability: m.max_accident_prob,
            objective: m.objective,
            total_cost: m.total_cost,
            violations,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolverStats {
    pub iterations: u64,
    pub seconds: f64,
    pub perturbations: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PipelineReport {
    pub schema_version: u32,
    pub scenario: String,
    pub status: String,
    pub seed: u64,
    pub num_tasks: usize,
    pub robots: Vec<String>,
    pub roadmap_nodes: usize,
    pub roadmap_bridges: usize,
    pub stage_times: StageTimes,
    pub solver: SolverStats,
    pub het: MetricRow,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub hom: Option<MetricRow>,
}

#[derive(Debug)]
pub struct PipelineOutput {
    pub tasks: Vec<InspectionTask>,
    pub roadmap: Roadmap,
    pub table: PathTable,
    pub problem: RoutingProblem<f64>,
    pub outcome: SolveOutcome,
    pub metrics: Metrics<f64>,
    pub baseline: Option<BaselineOutcome<f64>>,
    pub report: PipelineReport,
    pub solution: SolutionFile,
}

/// Solver parameters from scenario settings and overrides.
pub fn heuristic_params(loaded: &LoadedScenario, opts: &RunOptions) -> HeuristicParams {
    let s = &loaded.scenario.solver;
    let seed = opts.seed.unwrap_or(s.seed);
    let budget = match (opts.budget_s, opts.budget_iters) {
        (Some(b), _) => Budget::Seconds(b),
        (None, Some(n)) => Budget::Iterations(n),
        (None, None) => match (s.budget_s, s.budget_iters) {
            (Some(b), _) => Budget::Seconds(b),
            (None, n) => Budget::Iterations(n.unwrap_or(DEFAULT_ITERATIONS)),
        },
    };
    HeuristicParams {
        budget,
        seed,
        stall_iterations: opts.stall_iterations.or(s.stall_iterations),
        perturb_moves: 3,
    }
}

/// Everything up to the routing problem.
#[derive(Debug)]
pub struct Prepared {
    pub grid: choral_core::SemanticGrid,
    pub tasks: Vec<InspectionTask>,
    pub roadmap: Roadmap,
    pub table: PathTable,
    pub problem: RoutingProblem<f64>,
    pub params: HeuristicParams,
    pub times: StageTimes,
}

/// Runs the stages before the solver: distance field, task extraction,
/// roadmap, path table and cost matrices.
pub fn prepare(loaded: &LoadedScenario, opts: &RunOptions) -> Result<Prepared, StageError> {
    let mut times = StageTimes::default();
    let params = heuristic_params(loaded, opts);
    let mut robots = loaded.robots.clone();
    if let Some(a) = opts.alpha {
        if !(a >= 0.0) {
            return Err(StageError { stage: "config", error: Error::Config("--alpha must be non-negative".into()) });
        }
        robots.iter_mut().for_each(|r| r.alpha = a);
    }

    let t = Instant::now();
    let grid = compute_edf(&loaded.grid);
    times.edf_s = t.elapsed().as_secs_f64();

    let t = Instant::now();
    let tasks = at("tasks", extract_tasks(&grid, &loaded.cluster))?;
    if tasks.is_empty() {
        return Err(StageError { stage: "tasks", error: Error::Degenerate("map contains no inspection tasks".into()) });
    }
    times.tasks_s = t.elapsed().as_secs_f64();

    let t = Instant::now();
    let points: Vec<Point<f64>> = tasks.iter().map(|t| t.inspection_point).collect();
    let rrt = loaded.scenario.rrt.unwrap_or_default();
    let roadmap = at("prm", build_prm(&grid, &points, &loaded.depots, &rrt, params.seed))?;
    times.prm_s = t.elapsed().as_secs_f64();

    let t = Instant::now();
    let table = at("distance", all_pairs_paths(&roadmap))?;
    times.distance_s = t.elapsed().as_secs_f64();

    let t = Instant::now();
    let matrices = at("het_costs", build_cost_matrices(&table, &robots, &grid))?;
    let mut problem = at("het_costs", RoutingProblem::from_robots(matrices, &robots))?;
    problem.allow_empty_routes = loaded.scenario.solver.allow_empty_routes;
    times.het_costs_s = t.elapsed().as_secs_f64();

    Ok(Prepared { grid, tasks, roadmap, table, problem, params, times })
}

/// Runs every stage. Infeasibility surfaces as a [`StageError`] whose error
/// satisfies [`Error::is_infeasible`].
pub fn run_pipeline(loaded: &LoadedScenario, opts: &RunOptions) -> Result<PipelineOutput, StageError> {
    let start = Instant::now();
    let Prepared { grid, tasks, roadmap, table, problem, params, mut times } = prepare(loaded, opts)?;

    let t = Instant::now();
    let workers = opts.workers.unwrap_or(loaded.scenario.solver.workers);
    let outcome = at("solve", solve_portfolio(&problem, &params, None, workers))?;
    let metrics = at("evaluate", evaluate(&problem, &outcome.solution))?;
    times.solve_s = t.elapsed().as_secs_f64();

    let baseline = if opts.baseline || loaded.scenario.baseline {
        let t = Instant::now();
        let b = at("baseline", solve_homogeneous_baseline(&problem, &params))?;
        times.baseline_s = t.elapsed().as_secs_f64();
        Some(b)
    } else {
        None
    };

    let solution = at("output", solution_file(loaded, &grid, &tasks, &table, &problem, &outcome, &metrics, params.seed))?;
    times.total_s = start.elapsed().as_secs_f64();

    let report = PipelineReport {
        schema_version: SCHEMA_VERSION,
        scenario: loaded.scenario.name.clone(),
        status: "feasible".into(),
        seed: params.seed,
        num_tasks: tasks.len(),
        robots: problem.matrices.iter().map(|m| m.robot.clone()).collect(),
        roadmap_nodes: roadmap.nodes.len(),
        roadmap_bridges: roadmap.bridges,
        stage_times: times,
        solver: SolverStats {
            iterations: outcome.iterations,
            seconds: outcome.seconds,
            perturbations: outcome.perturbations,
        },
        het: MetricRow::new("het", &metrics, Vec::new()),
        hom: baseline.as_ref().map(|b| MetricRow::new("hom", &b.metrics, b.violations.clone())),
    };
    Ok(PipelineOutput { tasks, roadmap, table, problem, outcome, metrics, baseline, report, solution })
}

/// Outbound polyline of a route: depot through its tasks, joints not repeated.
pub fn route_polyline(table: &PathTable, depot: usize, task_terms: &[usize], route: &[usize]) -> Vec<Point<f64>> {
    let mut pts = vec![table.terminals[depot]];
    let mut prev = depot;
    for &v in route {
        let next = task_terms[v - 1];
        pts.extend(table.polyline(prev, next).into_iter().skip(1));
        prev = next;
    }
    pts
}

#[allow(clippy::too_many_arguments)]
fn solution_file(
    loaded: &LoadedScenario,
    grid: &choral_core::SemanticGrid,
    tasks: &[InspectionTask],
    table: &PathTable,
    problem: &RoutingProblem<f64>,
    outcome: &SolveOutcome,
    metrics: &Metrics<f64>,
    seed: u64,
) -> choral_core::Result<SolutionFile> {
    let depots = robot_depots(table, problem.num_robots())?;
    let terms = task_terminals(table);
    let routes = outcome
        .solution
        .routes
        .iter()
        .enumerate()
        .map(|(k, route)| {
            let m = &metrics.robots[k];
            RouteRecord {
                robot: m.robot.clone(),
                tasks: route.iter().map(|v| v - 1).collect(),
                polyline: route_polyline(table, depots[k], &terms, route),
                cost: m.cost,
                time_s: m.time_s,
                distance: m.distance,
                trav_prob: m.trav_prob,
                coll_prob: m.coll_prob,
                accident_prob: m.accident_prob,
            }
        })
        .collect();
    Ok(SolutionFile {
        schema_version: SCHEMA_VERSION,
        scenario: loaded.scenario.name.clone(),
        map_fingerprint: map_fingerprint(grid),
        seed,
        objective: outcome.objective,
        depots: loaded.depots.clone(),
        tasks: tasks
            .iter()
            .map(|t| TaskRecord {
                id: t.id,
                centroid: t.centroid,
                inspection_point: t.inspection_point,
                source_class: t.source_class.clone(),
                cells: t.member_cells.len(),
            })
            .collect(),
        routes,
    })
}

/// Route overlay of a solution file, drawn over its map.
pub fn render_solution(grid: &choral_core::SemanticGrid, sol: &SolutionFile) -> String {
    let tasks: Vec<Point<f64>> = sol.tasks.iter().map(|t| t.inspection_point).collect();
    let routes: Vec<RenderRoute<f64>> =
        sol.routes.iter().map(|r| RenderRoute { robot: r.robot.clone(), polyline: r.polyline.clone() }).collect();
    render_svg(grid, &tasks, &sol.depots, None, &routes)
}

/// Task ids named by an infeasibility error.
pub fn infeasible_task_ids(error: &Error) -> Vec<usize> {
    match error {
        Error::UnreachableTask { cluster } => vec![*cluster],
        Error::DisconnectedRoadmap { unreachable } => unreachable.clone(),
        Error::Infeasible { unplaceable } => unplaceable.clone(),
        _ => Vec::new(),
    }
}
