//! Command implementations behind the `choral` binary.

use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use choral_core::geometry::Point;
use choral_core::gridmap::compute_edf;
use choral_core::scenario::{
    generate_map, load_scenario, render_svg, to_json_string, write_ascii_map, write_json, MapSource, Preset,
    RobotEntry, SolverSettings, Template, SCHEMA_VERSION,
};
use choral_core::taskextract::extract_tasks;
use choral_core::{Error, LoadedScenario, MapSpec, Scenario, SolutionFile};
use serde::{Deserialize, Serialize};

use crate::pipeline::{infeasible_task_ids, render_solution, run_pipeline, PipelineOutput, RunOptions, StageError};

pub const EXIT_OK: i32 = 0;
pub const EXIT_ERROR: i32 = 1;
pub const EXIT_INFEASIBLE: i32 = 2;

/// Root for run directories: `--out`, then `CHORAL_OUT_DIR`, then `./out`.
pub fn output_root(out: Option<&Path>) -> PathBuf {
    match out {
        Some(p) => p.to_path_buf(),
        None => std::env::var_os("CHORAL_OUT_DIR").map_or_else(|| PathBuf::from("out"), PathBuf::from),
    }
}

/// `{root}/{scenario}/{tag}`, with the Unix time as the default tag.
pub fn run_dir(root: &Path, scenario: &str, tag: Option<&str>) -> PathBuf {
    let tag = tag.map_or_else(
        || SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0).to_string(),
        str::to_string,
    );
    root.join(scenario).join(tag)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InfeasibleTask {
    pub id: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub centroid: Option<Point<f64>>,
}

/// Machine-readable report written when a mission cannot be planned.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InfeasibleReport {
    pub schema_version: u32,
    pub scenario: String,
    pub status: String,
    pub stage: String,
    pub message: String,
    pub tasks: Vec<InfeasibleTask>,
}

#[derive(Debug)]
pub enum PlanOutcome {
    Feasible { dir: PathBuf, output: Box<PipelineOutput> },
    Infeasible { dir: PathBuf, report: InfeasibleReport },
}

impl PlanOutcome {
    pub fn exit_code(&self) -> i32 {
        match self {
            PlanOutcome::Feasible { .. } => EXIT_OK,
            PlanOutcome::Infeasible { .. } => EXIT_INFEASIBLE,
        }
    }
}

/// Where `plan` writes its artifacts.
#[derive(Debug, Clone, Default)]
pub struct OutputSpec {
    pub root: Option<PathBuf>,
    pub tag: Option<String>,
}

fn infeasible_report(loaded: &LoadedScenario, e: &StageError) -> InfeasibleReport {
    // positions are best effort: the extraction itself may be what failed
    let tasks = extract_tasks(&compute_edf(&loaded.grid), &loaded.cluster).unwrap_or_default();
    InfeasibleReport {
        schema_version: SCHEMA_VERSION,
        scenario: loaded.scenario.name.clone(),
        status: "infeasible".into(),
        stage: e.stage.into(),
        message: e.error.to_string(),
        tasks: infeasible_task_ids(&e.error)
            .into_iter()
            .map(|id| InfeasibleTask { id, centroid: tasks.get(id).map(|t| t.centroid) })
            .collect(),
    }
}

/// Plans a scenario and writes `solution.json`, `report.json`, `routes.svg` and
/// `matrices.json`, or `report.json` alone when the mission is infeasible.
pub fn cmd_plan(scenario: &Path, opts: &RunOptions, out: &OutputSpec) -> Result<PlanOutcome, StageError> {
    let loaded: LoadedScenario = load_scenario(scenario).map_err(|error| StageError { stage: "load", error })?;
    let dir = run_dir(&output_root(out.root.as_deref()), &loaded.scenario.name, out.tag.as_deref());
    let io = |error: Error| StageError { stage: "output", error };
    std::fs::create_dir_all(&dir).map_err(|e| io(e.into()))?;
    match run_pipeline(&loaded, opts) {
        Ok(output) => {
            write_json(&dir.join("solution.json"), &output.solution).map_err(io)?;
            write_json(&dir.join("report.json"), &output.report).map_err(io)?;
            write_json(&dir.join("matrices.json"), &output.problem.matrices).map_err(io)?;
            std::fs::write(dir.join("routes.svg"), render_solution(&loaded.grid, &output.solution))
                .map_err(|e| io(e.into()))?;
            Ok(PlanOutcome::Feasible { dir, output: Box::new(output) })
        }
        Err(e) if e.error.is_infeasible() => {
            let report = infeasible_report(&loaded, &e);
            write_json(&dir.join("report.json"), &report).map_err(io)?;
            Ok(PlanOutcome::Infeasible { dir, report })
        }
        Err(e) => Err(e),
    }
}

/// Redraws a solution over its scenario's map.
pub fn cmd_render(solution: &Path, scenario: &Path, out: &Path) -> choral_core::Result<()> {
    let sol = SolutionFile::read(solution)?;
    let loaded: LoadedScenario = load_scenario(scenario)?;
    sol.check_against(&loaded.grid)?;
    let tasks = extract_tasks(&compute_edf(&loaded.grid), &loaded.cluster)?;
    if tasks.len() != sol.tasks.len() {
        return Err(Error::InvalidSolution(format!(
            "solution has {} tasks but the map yields {}",
            sol.tasks.len(),
            tasks.len()
        )));
    }
    std::fs::write(out, render_solution(&loaded.grid, &sol))?;
    Ok(())
}

/// Summary printed by `validate`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ValidationSummary {
    pub scenario: String,
    pub cells: (usize, usize),
    pub resolution: f64,
    pub tasks: usize,
    pub robots: Vec<String>,
    pub depots: usize,
}

/// Loads a scenario (and optionally checks a solution against it).
pub fn cmd_validate(scenario: &Path, solution: Option<&Path>) -> choral_core::Result<ValidationSummary> {
    let loaded: LoadedScenario = load_scenario(scenario)?;
    let tasks = extract_tasks(&compute_edf(&loaded.grid), &loaded.cluster)?;
    if let Some(p) = solution {
        let sol = SolutionFile::read(p)?;
        sol.check_against(&loaded.grid)?;
        if sol.tasks.len() != tasks.len() {
            return Err(Error::InvalidSolution(format!(
                "solution has {} tasks but the map yields {}",
                sol.tasks.len(),
                tasks.len()
            )));
        }
        let mut seen = vec![0usize; tasks.len()];
        for r in &sol.routes {
            for &t in &r.tasks {
                seen[t] += 1;
            }
        }
        if let Some(t) = seen.iter().position(|&c| c != 1) {
            return Err(Error::InvalidSolution(format!("task {t} is visited {} times", seen[t])));
        }
    }
    Ok(ValidationSummary {
        scenario: loaded.scenario.name.clone(),
        cells: (loaded.grid.nx(), loaded.grid.ny()),
        resolution: loaded.grid.resolution(),
        tasks: tasks.len(),
        robots: loaded.robots.iter().map(|r| r.id.clone()).collect(),
        depots: loaded.depots.len(),
    })
}

/// Robot entries for a team code: `ga` (one ground, one aerial) or `2g2a`.
pub fn team_robots(team: &str) -> choral_core::Result<Vec<RobotEntry<f64>>> {
    let (g, a) = match team.to_ascii_lowercase().as_str() {
        "ga" | "g,a" => (1, 1),
        "2g2a" | "2g,2a" => (2, 2),
        other => {
            let parse = |s: &str, c: char| -> Option<usize> {
                let s = s.trim();
                let n = s.strip_suffix(c)?;
                if n.is_empty() {
                    Some(1)
                } else {
                    n.parse().ok()
                }
            };
            let (gs, as_) = other
                .split_once(',')
                .ok_or_else(|| Error::Config(format!("team `{team}`: expected e.g. `ga`, `2g2a` or `3g,1a`")))?;
            match (parse(gs, 'g'), parse(as_, 'a')) {
                (Some(g), Some(a)) => (g, a),
                _ => return Err(Error::Config(format!("team `{team}`: expected e.g. `ga`, `2g2a` or `3g,1a`"))),
            }
        }
    };
    let mut robots = Vec::new();
    for i in 0..g {
        robots.push(RobotEntry::preset(&format!("ground{i}"), Preset::Ground));
    }
    for i in 0..a {
        robots.push(RobotEntry::preset(&format!("aerial{i}"), Preset::Aerial));
    }
    if robots.is_empty() {
        return Err(Error::Config(format!("team `{team}` has no robots")));
    }
    Ok(robots)
}

/// Scenario over a generated map.
pub fn generated_scenario(spec: MapSpec, team: &str, solver: SolverSettings) -> choral_core::Result<Scenario> {
    Ok(Scenario {
        schema_version: SCHEMA_VERSION,
        name: format!("{}-{}-s{}", spec.template.name(), team, spec.seed),
        map: MapSource::Generate { spec },
        cluster: None,
        robots: team_robots(team)?,
        depots: Vec::new(),
        solver,
        alpha: None,
        rrt: spec.template.rrt_params(),
        baseline: false,
    })
}

/// Writes a generated map as `map.txt`, `legend.json`, `map.svg` and a
/// ready-to-plan `scenario.json` for the given team.
pub fn cmd_gen_map(spec: &MapSpec, team: &str, dir: &Path) -> choral_core::Result<PathBuf> {
    let m = generate_map(spec)?;
    std::fs::create_dir_all(dir)?;
    let (text, legend) = write_ascii_map(&m.grid)?;
    std::fs::write(dir.join("map.txt"), text)?;
    write_json(&dir.join("legend.json"), &legend)?;
    std::fs::write(dir.join("map.svg"), render_svg(&m.grid, &m.tasks, &[m.depot], None, &[]))?;
    let mut scn = generated_scenario(*spec, team, SolverSettings { seed: spec.seed, ..Default::default() })?;
    scn.map = MapSource::Ascii { path: "map.txt".into(), legend: "legend.json".into() };
    scn.depots = vec![m.depot];
    let p = dir.join("scenario.json");
    write_json(&p, &scn)?;
    Ok(p)
}

/// Parses a template name into its reference map spec.
pub fn standard_spec(template: &str, seed: u64) -> choral_core::Result<MapSpec> {
    Ok(MapSpec::standard(Template::parse(template)?, seed))
}

pub fn json_line<S: Serialize>(v: &S) -> String {
    to_json_string(v).unwrap_or_default()
}
