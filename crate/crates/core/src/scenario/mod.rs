//! File formats and experiment configuration: scenario files, ASCII maps,
//! voxel stacks, solution files, procedural maps and SVG rendering.
//!
//! Every JSON document carries a `schema_version`; this module reads and writes
//! version [`SCHEMA_VERSION`].

pub mod ascii;
pub mod generate;
pub mod svg;

use std::collections::{BTreeMap, HashSet};
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::costmodel::RobotProfile;
use crate::error::{Error, Result};
use crate::geometry::Point;
use crate::gridmap::{collapse_voxels, ClassConfig, Label, SemanticGrid, VoxelStack};
use crate::hvrp::Objective;
use crate::num::Real;
use crate::roadmap::RrtParams;
use crate::taskextract::ClusterParams;

pub use ascii::{parse_ascii_map, write_ascii_map, Legend, LegendSymbol};
pub use generate::{generate_map, GeneratedMap, MapSpec, Template};
pub use svg::{render_svg, RenderRoute};

pub const SCHEMA_VERSION: u32 = 1;

/// Risk weight used when neither the robot nor the scenario sets one.
pub const DEFAULT_ALPHA: f64 = 100.0;

/// Default solver budget when a scenario gives none.
pub const DEFAULT_ITERATIONS: u64 = 20_000;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
#[serde(bound(deserialize = "T: Real"))]
pub enum MapSource<T> {
    /// Text grid plus legend JSON; paths relative to the scenario file.
    Ascii { path: String, legend: String },
    /// Voxel stack JSON, collapsed onto a grid at load time.
    Voxels { path: String },
    Generate { spec: MapSpec<T> },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Preset {
    Ground,
    Aerial,
}

/// Robot as written in a scenario: an optional preset plus field overrides.
/// Without a preset, `velocity`, `beta` and `d_half` are required.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(bound(deserialize = "T: Real"))]
pub struct RobotEntry<T> {
    pub id: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub preset: Option<Preset>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub velocity: Option<T>,
    /// Merged over the preset's rates, class by class.
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub lambda_trav: BTreeMap<String, T>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub beta: Option<T>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub d_half: Option<T>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha: Option<T>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub capacity: Option<T>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub w_trav: Option<T>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub w_coll: Option<T>,
}

impl<T: Real> RobotEntry<T> {
    pub fn preset(id: &str, preset: Preset) -> Self {
        RobotEntry { id: id.into(), preset: Some(preset), ..Default::default() }
    }

    /// Resolves the entry against the map classes. `index` is only used in
    /// error locations.
    pub fn resolve(&self, index: usize, classes: &ClassConfig<T>, default_alpha: T) -> Result<RobotProfile<T>> {
        let at = |f: &str| format!("robots[{index}].{f}");
        let alpha = self.alpha.unwrap_or(default_alpha);
        let mut p = match self.preset {
            Some(Preset::Ground) => {
                let difficult: Vec<&str> = classes
                    .environment_classes
                    .iter()
                    .filter(|e| e.impedes_traversal)
                    .map(|e| e.name.as_str())
                    .collect();
                RobotProfile::ground(&self.id, classes, &difficult, alpha)
            }
            Some(Preset::Aerial) => RobotProfile::aerial(&self.id, alpha),
            None => {
                let need = |v: Option<T>, f: &str| v.ok_or_else(|| Error::validation(at(f), "required without a preset"));
                RobotProfile {
                    id: self.id.clone(),
                    velocity: need(self.velocity, "velocity")?,
                    lambda_trav: BTreeMap::new(),
                    beta: need(self.beta, "beta")?,
                    d_half: need(self.d_half, "d_half")?,
                    alpha,
                    capacity: None,
                    w_trav: T::one(),
                    w_coll: T::one(),
                }
            }
        };
        if let Some(v) = self.velocity {
            p.velocity = v;
        }
        if let Some(v) = self.beta {
            p.beta = v;
        }
        if let Some(v) = self.d_half {
            p.d_half = v;
        }
        if let Some(v) = self.w_trav {
            p.w_trav = v;
        }
        if let Some(v) = self.w_coll {
            p.w_coll = v;
        }
        p.capacity = self.capacity;
        for (class, &rate) in &self.lambda_trav {
            if classes.label_by_name(class).is_none() && *class != classes.free_class {
                return Err(Error::validation(at(&format!("lambda_trav.{class}")), "unknown class"));
            }
            p.lambda_trav.insert(class.clone(), rate);
        }
        p.validate().map_err(|e| match e {
            Error::Validation { field, message } => {
                let f = field.rsplit_once('.').map_or(field.as_str(), |(_, f)| f).to_string();
                let f = if field.contains("lambda_trav.") { format!("lambda_trav.{f}") } else { f };
                Error::validation(at(&f), message)
            }
            e => e,
        })?;
        Ok(p)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolverSettings {
    /// Wall-clock budget; takes precedence over `budget_iters`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub budget_s: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub budget_iters: Option<u64>,
    #[serde(default)]
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub stall_iterations: Option<u64>,
    #[serde(default = "one_worker")]
    pub workers: usize,
    #[serde(default = "yes")]
    pub allow_empty_routes: bool,
}

fn one_worker() -> usize {
    1
}

fn yes() -> bool {
    true
}

impl Default for SolverSettings {
    fn default() -> Self {
        SolverSettings {
            budget_s: None,
            budget_iters: None,
            seed: 0,
            stall_iterations: None,
            workers: 1,
            allow_empty_routes: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound(deserialize = "T: Real"))]
pub struct Scenario<T> {
    pub schema_version: u32,
    pub name: String,
    pub map: MapSource<T>,
    /// Defaults to clustering tuned to the map resolution.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cluster: Option<ClusterParams<T>>,
    pub robots: Vec<RobotEntry<T>>,
    /// One shared depot or one per robot; may be empty for generated maps.
    #[serde(default)]
    pub depots: Vec<Point<T>>,
    #[serde(default)]
    pub solver: SolverSettings,
    /// Risk weight for robots that do not set their own.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha: Option<T>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rrt: Option<RrtParams<T>>,
    /// Also solve the distance-only homogeneous baseline.
    #[serde(default)]
    pub baseline: bool,
}

/// A scenario with its map loaded and robots resolved.
#[derive(Debug, Clone)]
pub struct LoadedScenario<T> {
    pub scenario: Scenario<T>,
    pub base_dir: PathBuf,
    pub grid: SemanticGrid<T>,
    pub robots: Vec<RobotProfile<T>>,
    pub depots: Vec<Point<T>>,
    pub cluster: ClusterParams<T>,
}

/// Voxel stack file: class list, optional embeddings and the dense stack.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound(deserialize = "T: Real"))]
pub struct VoxelFile<T> {
    pub schema_version: u32,
    pub classes: ClassConfig<T>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub class_embeddings: Option<Vec<Vec<T>>>,
    pub stack: VoxelStack<T>,
}

fn json_location(path: &Path, e: &serde_json::Error) -> Error {
    Error::Parse { location: format!("{}:{}:{}", path.display(), e.line(), e.column()), message: e.to_string() }
}

/// Reads a JSON document; syntax and schema errors carry `file:line:col`.
pub fn read_json<D: DeserializeOwned>(path: &Path) -> Result<D> {
    let text = read_text(path)?;
    serde_json::from_str(&text).map_err(|e| json_location(path, &e))
}

fn read_text(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| {
        Error::Io(std::io::Error::new(e.kind(), format!("{}: {e}", path.display())))
    })
}

/// Pretty JSON with a trailing newline.
pub fn to_json_string<S: Serialize>(value: &S) -> Result<String> {
    let mut s = serde_json::to_string_pretty(value)?;
    s.push('\n');
    Ok(s)
}

pub fn write_json<S: Serialize>(path: &Path, value: &S) -> Result<()> {
    std::fs::write(path, to_json_string(value)?)?;
    Ok(())
}

fn check_version(v: u32, field: &str) -> Result<()> {
    if v != SCHEMA_VERSION {
        return Err(Error::validation(field, format!("unsupported schema version {v} (expected {SCHEMA_VERSION})")));
    }
    Ok(())
}

/// Loads the map a scenario refers to. Returns the grid and, for generated
/// maps, the generator's depot.
pub fn load_map<T: Real>(source: &MapSource<T>, base_dir: &Path) -> Result<(SemanticGrid<T>, Option<Point<T>>)> {
    match source {
        MapSource::Ascii { path, legend } => {
            let (mp, lp) = (base_dir.join(path), base_dir.join(legend));
            let legend: Legend<T> = read_json(&lp)?;
            let text = read_text(&mp)?;
            Ok((parse_ascii_map(&text, &legend, &mp.display().to_string())?, None))
        }
        MapSource::Voxels { path } => {
            let p = base_dir.join(path);
            let vf: VoxelFile<T> = read_json(&p)?;
            check_version(vf.schema_version, "voxels.schema_version")?;
            Ok((collapse_voxels(&vf.stack, &vf.classes, vf.class_embeddings.as_deref())?, None))
        }
        MapSource::Generate { spec } => {
            let m = generate_map(spec)?;
            Ok((m.grid, Some(m.depot)))
        }
    }
}

/// Checks a parsed scenario and loads everything it references.
pub fn resolve_scenario<T: Real>(scenario: Scenario<T>, base_dir: &Path) -> Result<LoadedScenario<T>> {
    check_version(scenario.schema_version, "schema_version")?;
    if scenario.name.is_empty() {
        return Err(Error::validation("name", "must not be empty"));
    }
    if scenario.robots.is_empty() {
        return Err(Error::validation("robots", "at least one robot is required"));
    }
    let mut ids = HashSet::new();
    for (i, r) in scenario.robots.iter().enumerate() {
        if r.id.is_empty() {
            return Err(Error::validation(format!("robots[{i}].id"), "must not be empty"));
        }
        if !ids.insert(r.id.as_str()) {
            return Err(Error::validation(format!("robots[{i}].id"), format!("duplicate robot id `{}`", r.id)));
        }
    }
    if let Some(a) = scenario.alpha {
        if !(a >= T::zero()) {
            return Err(Error::validation("alpha", "must be non-negative"));
        }
    }
    let s = &scenario.solver;
    if s.workers == 0 {
        return Err(Error::validation("solver.workers", "must be at least 1"));
    }
    if let Some(b) = s.budget_s {
        if !(b > 0.0 && b.is_finite()) {
            return Err(Error::validation("solver.budget_s", "must be positive"));
        }
    }
    if s.budget_iters == Some(0) {
        return Err(Error::validation("solver.budget_iters", "must be positive"));
    }

    let (grid, generated_depot) = load_map(&scenario.map, base_dir)?;
    let cluster = scenario.cluster.unwrap_or_else(|| ClusterParams::for_resolution(grid.resolution()));
    cluster.validate()?;
    let alpha = scenario.alpha.unwrap_or(T::lit(DEFAULT_ALPHA));
    let robots = scenario
        .robots
        .iter()
        .enumerate()
        .map(|(i, r)| r.resolve(i, grid.classes(), alpha))
        .collect::<Result<Vec<_>>>()?;

    let depots = match (scenario.depots.is_empty(), generated_depot) {
        (false, _) => scenario.depots.clone(),
        (true, Some(d)) => vec![d],
        (true, None) => return Err(Error::validation("depots", "at least one depot is required")),
    };
    if depots.len() != 1 && depots.len() != robots.len() {
        return Err(Error::validation(
            "depots",
            format!("{} depots for {} robots; give one shared depot or one per robot", depots.len(), robots.len()),
        ));
    }
    for (i, d) in depots.iter().enumerate() {
        match grid.cell_of(d) {
            None => return Err(Error::validation(format!("depots[{i}]"), "outside the map")),
            Some((x, y)) if grid.label(x, y) == Label::Obstacle => {
                return Err(Error::validation(format!("depots[{i}]"), format!("on obstacle cell ({x}, {y})")))
            }
            _ => {}
        }
    }
    Ok(LoadedScenario { base_dir: base_dir.to_path_buf(), grid, robots, depots, cluster, scenario })
}

/// Reads, validates and loads a scenario file.
pub fn load_scenario<T: Real>(path: &Path) -> Result<LoadedScenario<T>> {
    let scenario: Scenario<T> = read_json(path)?;
    let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
    resolve_scenario(scenario, &base)
}

/// SHA-256 over the grid's dimensions, resolution, classes and labels.
pub fn map_fingerprint<T: Real>(grid: &SemanticGrid<T>) -> String {
    let mut h = Sha256::new();
    h.update((grid.nx() as u64).to_le_bytes());
    h.update((grid.ny() as u64).to_le_bytes());
    h.update(grid.resolution().to_f64_lossy().to_bits().to_le_bytes());
    h.update(serde_json::to_vec(grid.classes()).expect("class config serialises"));
    for l in grid.labels() {
        let (tag, v) = match *l {
            Label::Obstacle => (0u8, 0u16),
            Label::Free => (1, 0),
            Label::Task(i) => (2, i),
            Label::Env(i) => (3, i),
        };
        h.update([tag]);
        h.update(v.to_le_bytes());
    }
    h.finalize().iter().fold(String::with_capacity(64), |mut s, b| {
        let _ = write!(s, "{b:02x}");
        s
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound(deserialize = "T: Real"))]
pub struct TaskRecord<T> {
    pub id: usize,
    pub centroid: Point<T>,
    pub inspection_point: Point<T>,
    pub source_class: String,
    pub cells: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound(deserialize = "T: Real"))]
pub struct RouteRecord<T> {
    pub robot: String,
    /// Task ids in visiting order.
    pub tasks: Vec<usize>,
    /// Depot to last task; the free return leg is not drawn.
    pub polyline: Vec<Point<T>>,
    pub cost: T,
    pub time_s: T,
    pub distance: T,
    pub trav_prob: T,
    pub coll_prob: T,
    pub accident_prob: T,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound(deserialize = "T: Real"))]
pub struct SolutionFile<T> {
    pub schema_version: u32,
    pub scenario: String,
    pub map_fingerprint: String,
    pub seed: u64,
    pub objective: Objective<T>,
    pub depots: Vec<Point<T>>,
    pub tasks: Vec<TaskRecord<T>>,
    pub routes: Vec<RouteRecord<T>>,
}

impl<T: Real> SolutionFile<T> {
    pub fn read(path: &Path) -> Result<Self> {
        let s: Self = read_json(path)?;
        check_version(s.schema_version, "schema_version")?;
        Ok(s)
    }

    /// Checks task ids against the task list and the fingerprint against `grid`.
    pub fn check_against(&self, grid: &SemanticGrid<T>) -> Result<()> {
        let fp = map_fingerprint(grid);
        if fp != self.map_fingerprint {
            return Err(Error::validation("map_fingerprint", "solution was computed on a different map"));
        }
        let n = self.tasks.len();
        for (k, r) in self.routes.iter().enumerate() {
            if let Some(&t) = r.tasks.iter().find(|&&t| t >= n) {
                return Err(Error::validation(format!("routes[{k}].tasks"), format!("task {t} but only {n} tasks")));
            }
        }
        for (i, t) in self.tasks.iter().enumerate() {
            if t.id != i {
                return Err(Error::validation(format!("tasks[{i}].id"), "task ids must be 0..n in order"));
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn legend() -> Legend<f64> {
        Legend {
            schema_version: SCHEMA_VERSION,
            resolution: 0.5,
            free_class: "floor".into(),
            obstacle_height_threshold: 1.5,
            symbols: vec![
                LegendSymbol { symbol: 'T', name: "gauge".into(), impedes_traversal: false },
                LegendSymbol { symbol: 'p', name: "pebbles".into(), impedes_traversal: true },
            ],
        }
    }

    fn scenario() -> Scenario<f64> {
        Scenario {
            schema_version: SCHEMA_VERSION,
            name: "tiny".into(),
            map: MapSource::Ascii { path: "map.txt".into(), legend: "legend.json".into() },
            cluster: None,
            robots: vec![RobotEntry::preset("g", Preset::Ground)],
            depots: vec![Point::new(0.25, 0.25)],
            solver: SolverSettings::default(),
            alpha: None,
            rrt: None,
            baseline: false,
        }
    }

    fn write_fixture(dir: &Path, s: &Scenario<f64>) -> PathBuf {
        std::fs::write(dir.join("map.txt"), "....\n.#T.\n.pp.\n").unwrap();
        write_json(&dir.join("legend.json"), &legend()).unwrap();
        let p = dir.join("scenario.json");
        write_json(&p, s).unwrap();
        p
    }

    fn tmp(name: &str) -> PathBuf {
        let d = std::env::temp_dir().join(format!("choral-scn-{name}-{}", std::process::id()));
        std::fs::create_dir_all(&d).unwrap();
        d
    }

    #[test]
    fn minimal_scenario_loads() {
        let d = tmp("ok");
        let l = load_scenario::<f64>(&write_fixture(&d, &scenario())).unwrap();
        assert_eq!(l.robots.len(), 1);
        assert_eq!(l.robots[0].trav_rate("pebbles"), 0.05);
        assert_eq!(l.robots[0].alpha, DEFAULT_ALPHA);
        assert_eq!((l.grid.nx(), l.grid.ny()), (4, 3));
    }

    #[test]
    fn zero_velocity_names_the_field() {
        let d = tmp("v0");
        let mut s = scenario();
        s.robots[0].velocity = Some(0.0);
        let e = load_scenario::<f64>(&write_fixture(&d, &s)).unwrap_err().to_string();
        assert!(e.contains("robots[0].velocity"), "{e}");
    }

    #[test]
    fn depot_on_obstacle_rejected() {
        let d = tmp("dep");
        let mut s = scenario();
        s.depots = vec![Point::new(0.75, 0.75)];
        let e = load_scenario::<f64>(&write_fixture(&d, &s)).unwrap_err().to_string();
        assert!(e.contains("depots[0]"), "{e}");
    }

    #[test]
    fn other_invariants() {
        let d = tmp("inv");
        let mut s = scenario();
        s.robots.push(RobotEntry::preset("g", Preset::Aerial));
        assert!(load_scenario::<f64>(&write_fixture(&d, &s)).unwrap_err().to_string().contains("duplicate"));
        let mut s = scenario();
        s.robots[0] = RobotEntry { id: "x".into(), velocity: Some(1.0), ..Default::default() };
        assert!(load_scenario::<f64>(&write_fixture(&d, &s)).unwrap_err().to_string().contains("robots[0].beta"));
        let mut s = scenario();
        s.robots[0].lambda_trav.insert("lava".into(), 1.0);
        assert!(load_scenario::<f64>(&write_fixture(&d, &s)).unwrap_err().to_string().contains("lambda_trav.lava"));
        let mut s = scenario();
        s.map = MapSource::Ascii { path: "missing.txt".into(), legend: "legend.json".into() };
        assert!(load_scenario::<f64>(&write_fixture(&d, &s)).unwrap_err().to_string().contains("missing.txt"));
    }

    #[test]
    fn json_errors_have_locations() {
        let d = tmp("json");
        let p = d.join("bad.json");
        std::fs::write(&p, "{\n  \"schema_version\": 1,\n  \"name\": 3\n}\n").unwrap();
        let e = load_scenario::<f64>(&p).unwrap_err().to_string();
        assert!(e.contains("bad.json:3:"), "{e}");
    }

    #[test]
    fn fingerprint_tracks_labels() {
        let g = parse_ascii_map("..\n.#\n", &legend(), "a").unwrap();
        let h = parse_ascii_map("..\n..\n", &legend(), "b").unwrap();
        assert_eq!(map_fingerprint(&g), map_fingerprint(&g.clone()));
        assert_ne!(map_fingerprint(&g), map_fingerprint(&h));
        assert_eq!(map_fingerprint(&g).len(), 64);
    }
}
