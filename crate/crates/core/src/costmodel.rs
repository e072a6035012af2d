//! Per-robot traversal costs: travel time plus weighted accident probability.
//!
//! Accidents are modelled as a Poisson process along the path, with a rate per
//! metre that adds a terrain term (looked up by cell label) and an obstacle
//! proximity term (logistic in the distance field). The accident probability
//! of a path is `1 − exp(−∫ λ ds)`.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{resample, Point};
use crate::gridmap::SemanticGrid;
use crate::num::Real;
use crate::roadmap::{NodeKind, PathTable};

fn one<T: Real>() -> T {
    T::one()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound(deserialize = "T: Real"))]
pub struct RobotProfile<T> {
    pub id: String,
    /// Nominal velocity, m/s.
    pub velocity: T,
    /// Terrain accident rate per metre, keyed by class name. Missing classes are 0.
    #[serde(default)]
    pub lambda_trav: BTreeMap<String, T>,
    /// Steepness of the proximity rate, 1/m.
    pub beta: T,
    /// Obstacle distance at which the proximity rate is 0.5, metres.
    pub d_half: T,
    /// Weight of the accident probability against travel time.
    pub alpha: T,
    /// Upper bound on the combined route cost; `None` is unbounded.
    #[serde(default)]
    pub capacity: Option<T>,
    #[serde(default = "one")]
    pub w_trav: T,
    #[serde(default = "one")]
    pub w_coll: T,
}

impl<T: Real> RobotProfile<T> {
    pub fn validate(&self) -> Result<()> {
        let f = |name: &str| format!("robot `{}`.{name}", self.id);
        if !(self.velocity > T::zero()) || !self.velocity.is_finite() {
            return Err(Error::validation(f("velocity"), "must be positive"));
        }
        if let Some((class, _)) = self.lambda_trav.iter().find(|(_, v)| !(**v >= T::zero())) {
            return Err(Error::validation(f(&format!("lambda_trav.{class}")), "must be non-negative"));
        }
        if !(self.beta > T::zero()) {
            return Err(Error::validation(f("beta"), "must be positive"));
        }
        if !(self.d_half > T::zero()) {
            return Err(Error::validation(f("d_half"), "must be positive"));
        }
        if !(self.alpha >= T::zero()) {
            return Err(Error::validation(f("alpha"), "must be non-negative"));
        }
        if let Some(c) = self.capacity {
            if !(c > T::zero()) {
                return Err(Error::validation(f("capacity"), "must be positive"));
            }
        }
        if !(self.w_trav >= T::zero()) || !(self.w_coll >= T::zero()) {
            return Err(Error::validation(f("w_trav/w_coll"), "must be non-negative"));
        }
        Ok(())
    }

    /// Ground platform: 0.25 m/s, 0.05 accidents/m on `difficult` classes and
    /// 1e-5/m on every other class of `classes`; proximity risk ignored.
    pub fn ground(id: &str, classes: &crate::gridmap::ClassConfig<T>, difficult: &[&str], alpha: T) -> Self {
        let mut lambda_trav = BTreeMap::new();
        let names = classes
            .task_classes
            .iter()
            .chain(classes.environment_classes.iter().map(|e| &e.name))
            .chain(std::iter::once(&classes.free_class));
        for name in names {
            let rate = if difficult.contains(&name.as_str()) { T::lit(0.05) } else { T::lit(1e-5) };
            lambda_trav.insert(name.clone(), rate);
        }
        RobotProfile {
            id: id.to_string(),
            velocity: T::lit(0.25),
            lambda_trav,
            beta: T::lit(10.0),
            d_half: T::lit(0.5),
            alpha,
            capacity: None,
            w_trav: T::one(),
            w_coll: T::zero(),
        }
    }

    /// Aerial platform: 0.5 m/s, no terrain risk, logistic proximity risk.
    pub fn aerial(id: &str, alpha: T) -> Self {
        RobotProfile {
            id: id.to_string(),
            velocity: T::lit(0.5),
            lambda_trav: BTreeMap::new(),
            beta: T::lit(10.0),
            d_half: T::lit(0.5),
            alpha,
            capacity: None,
            w_trav: T::one(),
            w_coll: T::one(),
        }
    }

    /// Terrain rate for a class name.
    pub fn trav_rate(&self, class: &str) -> T {
        self.lambda_trav.get(class).copied().unwrap_or_else(T::zero)
    }

    /// Logistic proximity rate for an obstacle distance (metres).
    pub fn coll_rate(&self, distance: T) -> T {
        collision_rate(distance, self.beta, self.d_half)
    }
}

/// `1 / (1 + exp(β (d − d½)))`; zero at infinite clearance.
pub fn collision_rate<T: Real>(distance: T, beta: T, d_half: T) -> T {
    T::one() / (T::one() + (beta * (distance - d_half)).exp())
}

/// `1 − exp(−x)` without cancellation for small `x`. Large exposures would
/// round to exactly one, so the result is held just below it.
#[inline]
pub fn accident_probability<T: Real>(exposure: T) -> T {
    (-(-exposure).exp_m1()).min(T::one() - T::epsilon())
}

/// Travel time `d / v` in seconds.
pub fn time_cost<T: Real>(distance: T, robot: &RobotProfile<T>) -> T {
    distance / robot.velocity
}

/// Terrain and proximity rates of one cell, before weighting.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CellRates<T> {
    pub trav: T,
    pub coll: T,
}

/// Weighted accident rate `w_trav·λ_trav + w_coll·λ_coll` of a cell.
pub fn accident_rate<T: Real>(robot: &RobotProfile<T>, grid: &SemanticGrid<T>, x: usize, y: usize) -> T {
    let r = cell_rates(robot, grid, x, y);
    robot.w_trav * r.trav + robot.w_coll * r.coll
}

pub fn cell_rates<T: Real>(robot: &RobotProfile<T>, grid: &SemanticGrid<T>, x: usize, y: usize) -> CellRates<T> {
    CellRates {
        trav: robot.trav_rate(grid.classes().label_name(grid.label(x, y))),
        coll: robot.coll_rate(grid.edf(x, y)),
    }
}

/// Precomputed per-cell rates for one robot.
pub struct RateField<T> {
    trav: Vec<T>,
    coll: Vec<T>,
}

impl<T: Real> RateField<T> {
    pub fn new(robot: &RobotProfile<T>, grid: &SemanticGrid<T>) -> Result<Self> {
        if !grid.has_edf() {
            return Err(Error::Config("grid distance field not computed".into()));
        }
        let mut trav = Vec::with_capacity(grid.nx() * grid.ny());
        let mut coll = Vec::with_capacity(grid.nx() * grid.ny());
        for y in 0..grid.ny() {
            for x in 0..grid.nx() {
                let r = cell_rates(robot, grid, x, y);
                trav.push(r.trav);
                coll.push(r.coll);
            }
        }
        Ok(RateField { trav, coll })
    }
}

/// Integrated exposure `∫ λ ds` of a path, split by hazard (unweighted).
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Exposure<T> {
    pub trav: T,
    pub coll: T,
}

/// Sums `λ(midpoint cell) · segment length` over consecutive samples.
fn integrate<T: Real>(
    samples: &[Point<T>],
    grid: &SemanticGrid<T>,
    fields: &[&RateField<T>],
    out: &mut [Exposure<T>],
) -> Result<()> {
    for p in samples {
        if !grid.contains(p) {
            return Err(Error::OutOfBounds { x: p.x.to_f64_lossy(), y: p.y.to_f64_lossy() });
        }
    }
    for w in samples.windows(2) {
        let len = w[0].dist(&w[1]);
        let m = w[0].midpoint(&w[1]);
        let (x, y) = grid.cell_of(&m).expect("midpoint of in-bounds samples");
        let i = grid.index(x, y);
        for (f, e) in fields.iter().zip(out.iter_mut()) {
            e.trav += f.trav[i] * len;
            e.coll += f.coll[i] * len;
        }
    }
    Ok(())
}

/// Exposure of a polyline, resampled at `spacing`.
pub fn path_exposure<T: Real>(
    path: &[Point<T>],
    robot: &RobotProfile<T>,
    grid: &SemanticGrid<T>,
    spacing: T,
) -> Result<Exposure<T>> {
    let field = RateField::new(robot, grid)?;
    let mut e = [Exposure::default()];
    integrate(&resample(path, spacing), grid, &[&field], &mut e)?;
    Ok(e[0])
}

/// Accident probability of a path, sampled at the grid resolution.
pub fn safety_cost<T: Real>(path: &[Point<T>], robot: &RobotProfile<T>, grid: &SemanticGrid<T>) -> Result<T> {
    safety_cost_with_spacing(path, robot, grid, grid.resolution())
}

pub fn safety_cost_with_spacing<T: Real>(
    path: &[Point<T>],
    robot: &RobotProfile<T>,
    grid: &SemanticGrid<T>,
    spacing: T,
) -> Result<T> {
    let e = path_exposure(path, robot, grid, spacing)?;
    Ok(accident_probability(robot.w_trav * e.trav + robot.w_coll * e.coll))
}

/// Cost of one directed arc with its components.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct EdgeCost<T> {
    pub distance: T,
    pub time_s: T,
    /// Accident probability from terrain alone.
    pub trav_prob: T,
    /// Accident probability from obstacle proximity alone.
    pub coll_prob: T,
    /// Accident probability from the weighted combined rate.
    pub safety_prob: T,
    /// `time_s + α · safety_prob`.
    pub combined: T,
}

impl<T: Real> EdgeCost<T> {
    pub fn from_exposure(distance: T, exposure: Exposure<T>, robot: &RobotProfile<T>) -> Self {
        let time_s = time_cost(distance, robot);
        let wt = robot.w_trav * exposure.trav;
        let wc = robot.w_coll * exposure.coll;
        let safety_prob = accident_probability(wt + wc);
        EdgeCost {
            distance,
            time_s,
            trav_prob: accident_probability(wt),
            coll_prob: accident_probability(wc),
            safety_prob,
            combined: time_s + robot.alpha * safety_prob,
        }
    }
}

/// Combined cost of a polyline for one robot.
pub fn edge_cost<T: Real>(path: &[Point<T>], robot: &RobotProfile<T>, grid: &SemanticGrid<T>) -> Result<EdgeCost<T>> {
    let e = path_exposure(path, robot, grid, grid.resolution())?;
    Ok(EdgeCost::from_exposure(crate::geometry::polyline_length(path), e, robot))
}

/// Asymmetric `(n+1) × (n+1)` cost matrix of one robot; node 0 is its depot.
///
/// Arcs back to the depot cost nothing (routes are open), the diagonal is zero.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CostMatrix<T> {
    pub robot: String,
    pub size: usize,
    pub entries: Vec<EdgeCost<T>>,
}

impl<T: Real> CostMatrix<T> {
    /// Builds a matrix from a dense combined-cost table; other fields stay zero
    /// except `distance`, which mirrors the cost. Intended for synthetic instances.
    pub fn from_costs(robot: &str, costs: &[Vec<T>]) -> Self {
        let size = costs.len();
        let mut entries = Vec::with_capacity(size * size);
        for (i, row) in costs.iter().enumerate() {
            assert_eq!(row.len(), size, "cost table must be square");
            for (j, &c) in row.iter().enumerate() {
                let c = if i == j || (j == 0 && i != 0) { T::zero() } else { c };
                entries.push(EdgeCost { distance: c, time_s: c, combined: c, ..EdgeCost::default() });
            }
        }
        CostMatrix { robot: robot.to_string(), size, entries }
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> &EdgeCost<T> {
        &self.entries[i * self.size + j]
    }

    #[inline]
    pub fn cost(&self, i: usize, j: usize) -> T {
        self.entries[i * self.size + j].combined
    }

    /// Same shape, with the combined cost replaced by the geometric distance
    /// (return arcs stay free).
    pub fn distance_only(&self) -> Self {
        let n = self.size;
        let entries = self
            .entries
            .iter()
            .enumerate()
            .map(|(idx, e)| {
                let (i, j) = (idx / n, idx % n);
                let combined = if i == j || (j == 0 && i != 0) { T::zero() } else { e.distance };
                EdgeCost { combined, ..*e }
            })
            .collect();
        CostMatrix { robot: self.robot.clone(), size: self.size, entries }
    }

    /// Checks the diagonal, return-column and range invariants.
    pub fn validate(&self) -> Result<()> {
        if self.entries.len() != self.size * self.size {
            return Err(Error::Config(format!("matrix `{}` has wrong entry count", self.robot)));
        }
        for i in 0..self.size {
            for j in 0..self.size {
                let e = self.get(i, j);
                let at = || format!("matrix `{}`[{i}][{j}]", self.robot);
                if !(e.combined >= T::zero()) || !e.combined.is_finite() {
                    return Err(Error::validation(at(), "cost must be finite and non-negative"));
                }
                if (i == j || (j == 0 && i != 0)) && e.combined != T::zero() {
                    return Err(Error::validation(at(), "diagonal and depot-return costs must be zero"));
                }
                if !(e.safety_prob >= T::zero() && e.safety_prob < T::one()) {
                    return Err(Error::validation(at(), "accident probability must lie in [0, 1)"));
                }
            }
        }
        Ok(())
    }
}

/// Which path-table terminal is each robot's depot: a shared depot when the
/// table has one, otherwise depot `k` for robot `k`.
pub fn robot_depots(table: &PathTable<impl Real>, robots: usize) -> Result<Vec<usize>> {
    let depots: Vec<usize> = (0..table.len()).filter(|&i| matches!(table.kinds[i], NodeKind::Depot(_))).collect();
    match depots.len() {
        0 => Err(Error::Config("path table has no depot".into())),
        1 => Ok(vec![depots[0]; robots]),
        n if n == robots => Ok(depots),
        n => Err(Error::Config(format!("{n} depots for {robots} robots; use one shared depot or one per robot"))),
    }
}

/// Task terminals of the table, in task order.
pub fn task_terminals(table: &PathTable<impl Real>) -> Vec<usize> {
    let mut t: Vec<(usize, usize)> = (0..table.len())
        .filter_map(|i| match table.kinds[i] {
            NodeKind::Task(k) => Some((k, i)),
            _ => None,
        })
        .collect();
    t.sort_unstable();
    t.into_iter().map(|(_, i)| i).collect()
}

/// One cost matrix per robot. Matrix node 0 is the robot's depot and node
/// `t + 1` is task `t`.
pub fn build_cost_matrices<T: Real>(
    table: &PathTable<T>,
    robots: &[RobotProfile<T>],
    grid: &SemanticGrid<T>,
) -> Result<Vec<CostMatrix<T>>> {
    table.check_complete()?;
    for r in robots {
        r.validate()?;
    }
    let depots = robot_depots(table, robots.len())?;
    let tasks = task_terminals(table);
    let fields = robots.iter().map(|r| RateField::new(r, grid)).collect::<Result<Vec<_>>>()?;
    let field_refs: Vec<&RateField<T>> = fields.iter().collect();

    // exposure per unordered terminal pair, shared by both directions
    let nt = table.len();
    let mut exposure = vec![vec![Exposure::default(); robots.len()]; nt * nt];
    for a in 0..nt {
        for b in a + 1..nt {
            let mut acc = vec![Exposure::default(); robots.len()];
            integrate(&table.sampled(a, b), grid, &field_refs, &mut acc)?;
            exposure[a * nt + b] = acc.clone();
            exposure[b * nt + a] = acc;
        }
    }

    let mut out = Vec::with_capacity(robots.len());
    for (k, robot) in robots.iter().enumerate() {
        let nodes: Vec<usize> = std::iter::once(depots[k]).chain(tasks.iter().copied()).collect();
        let size = nodes.len();
        let mut entries = Vec::with_capacity(size * size);
        for (i, &a) in nodes.iter().enumerate() {
            for (j, &b) in nodes.iter().enumerate() {
                if i == j {
                    entries.push(EdgeCost::default());
                    continue;
                }
                let mut e = EdgeCost::from_exposure(table.length(a, b), exposure[a * nt + b][k], robot);
                if j == 0 {
                    // open routes: returning to the depot is free
                    e = EdgeCost { combined: T::zero(), ..e };
                }
                entries.push(e);
            }
        }
        out.push(CostMatrix { robot: robot.id.clone(), size, entries });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gridmap::test_support::{classes, grid};
    use crate::gridmap::{compute_edf, Label};
    use crate::roadmap::{all_pairs_paths, build_prm, RrtParams};

    fn robot(v: f64, alpha: f64) -> RobotProfile<f64> {
        RobotProfile {
            id: "r".into(),
            velocity: v,
            lambda_trav: BTreeMap::new(),
            beta: 10.0,
            d_half: 0.5,
            alpha,
            capacity: None,
            w_trav: 1.0,
            w_coll: 1.0,
        }
    }

    #[test]
    fn time_cost_arithmetic() {
        assert_eq!(time_cost(10.0, &robot(0.5, 0.0)), 20.0);
        assert_eq!(time_cost(0.0, &robot(0.5, 0.0)), 0.0);
        assert_eq!(time_cost(7.3, &robot(0.25, 0.0)), 2.0 * time_cost(7.3, &robot(0.5, 0.0)));
    }

    #[test]
    fn logistic_anchors() {
        assert_eq!(collision_rate(0.5, 10.0, 0.5), 0.5);
        let v = collision_rate(1.5, 10.0, 0.5);
        assert!((v - 1.0 / (1.0 + 10f64.exp())).abs() < 1e-18);
        assert!((v - 4.54e-5).abs() < 1e-7);
        assert_eq!(collision_rate(f64::INFINITY, 10.0, 0.5), 0.0);
        for d in [0.0, 0.1, 0.37, 0.9] {
            let s: f64 = collision_rate(d, 10.0, 0.5) + collision_rate(1.0 - d, 10.0, 0.5);
            assert!((s - 1.0).abs() < 1e-15);
        }
    }

    #[test]
    fn difficult_terrain_rate() {
        let g = compute_edf(&grid(&["pp", "pp"], 0.5));
        let mut r = robot(0.25, 50.0);
        r.lambda_trav.insert("pebbles".into(), 0.05);
        r.w_coll = 0.0;
        assert_eq!(accident_rate(&r, &g, 0, 0), 0.05);
    }

    #[test]
    fn constant_rate_path() {
        // 20 m straight path over terrain with λ = 0.05/m, no obstacles
        let labels = vec![Label::Env(0); 60 * 3];
        let g = compute_edf(&SemanticGrid::new(60, 3, 0.5, classes(), labels).unwrap());
        let mut r = robot(0.5, 100.0);
        r.lambda_trav.insert("pebbles".into(), 0.05);
        let path = [Point::new(2.0, 0.75), Point::new(22.0, 0.75)];
        let c = safety_cost(&path, &r, &g).unwrap();
        assert!((c - (1.0 - (-1.0f64).exp())).abs() < 1e-9);
        assert!(accident_probability(1e3f64) < 1.0 && accident_probability(1e3f32) < 1.0);
        let e = edge_cost(&path, &r, &g).unwrap();
        assert!((e.time_s - 40.0).abs() < 1e-12);
        assert!((e.combined - (40.0 + 100.0 * c)).abs() < 1e-9);
    }

    #[test]
    fn alpha_zero_and_monotone() {
        let g = compute_edf(&grid(&["......", "..#...", "......"], 0.5));
        let path = [Point::new(0.25, 0.25), Point::new(2.75, 0.25)];
        let e0 = edge_cost(&path, &robot(1.0, 0.0), &g).unwrap();
        assert_eq!(e0.combined, e0.time_s);
        let mut prev = e0.combined;
        for a in [1.0, 2.0, 4.0, 8.0] {
            let e = edge_cost(&path, &robot(1.0, a), &g).unwrap();
            assert!(e.combined >= prev);
            prev = e.combined;
        }
    }

    #[test]
    fn out_of_bounds_path() {
        let g = compute_edf(&grid(&["..", ".."], 0.5));
        assert!(safety_cost(&[Point::new(0.1, 0.1), Point::new(3.0, 0.1)], &robot(1.0, 1.0), &g).is_err());
    }

    #[test]
    fn concatenation_monotone() {
        let g = compute_edf(&grid(&["pppp....", "....#...", "........"], 0.5));
        let mut r = robot(1.0, 1.0);
        r.lambda_trav.insert("pebbles".into(), 0.3);
        let a = [Point::new(0.25, 0.25), Point::new(1.75, 0.25)];
        let b = [Point::new(1.75, 0.25), Point::new(3.9, 1.25)];
        let ab = [a[0], a[1], b[1]];
        let (ca, cb, cab) = (
            safety_cost(&a, &r, &g).unwrap(),
            safety_cost(&b, &r, &g).unwrap(),
            safety_cost(&ab, &r, &g).unwrap(),
        );
        assert!(cab >= ca.max(cb));
    }

    #[test]
    fn matrices_follow_asymmetry_rule() {
        let g = compute_edf(&grid(&["..........", "..........", ".........."], 1.0));
        let tasks = [Point::new(2.5, 0.5), Point::new(8.5, 0.5)];
        let rm = build_prm(&g, &tasks, &[Point::new(5.5, 2.5)], &RrtParams::default(), 1).unwrap();
        let table = all_pairs_paths(&rm).unwrap();
        let (fast, slow) = (robot(0.5, 10.0), robot(0.25, 10.0));
        let m = build_cost_matrices(&table, &[fast, slow], &g).unwrap();
        for cm in &m {
            cm.validate().unwrap();
            assert_eq!(cm.cost(1, 2), cm.cost(2, 1));
            assert_eq!(cm.cost(1, 0), 0.0);
            assert_eq!(cm.cost(2, 0), 0.0);
            assert!(cm.cost(0, 1) > 0.0);
        }
        assert_eq!(m[1].get(0, 1).time_s, 2.0 * m[0].get(0, 1).time_s);
        assert_eq!(m[1].get(0, 1).safety_prob, m[0].get(0, 1).safety_prob);
    }

    #[test]
    fn blocking_terrain_saturates() {
        let g = compute_edf(&grid(&["..pp..", "..pp..", "..pp.."], 0.5));
        let mut r = robot(0.25, 50.0);
        r.lambda_trav.insert("pebbles".into(), 5.0);
        r.w_coll = 0.0;
        let c = safety_cost(&[Point::new(0.25, 0.75), Point::new(2.75, 0.75)], &r, &g).unwrap();
        assert!(c > 0.99);
        assert!(r.alpha * c > 49.0);
    }

    #[test]
    fn riemann_refinement() {
        let rows = [
            "..pppp......",
            "..pppp..#...",
            "........#...",
            "....gg......",
        ];
        let g = compute_edf(&grid(&rows, 0.5));
        let mut r = robot(0.5, 1.0);
        r.lambda_trav.insert("pebbles".into(), 0.05);
        let path = [Point::new(0.3, 1.9), Point::new(3.1, 0.2), Point::new(5.9, 1.1)];
        let reference = safety_cost_with_spacing(&path, &r, &g, 0.5 / 1024.0).unwrap();
        let err = |h: f64| (safety_cost_with_spacing(&path, &r, &g, h).unwrap() - reference).abs();
        // midpoint-cell sums converge linearly; refinement is stable once a few samples fall in each cell
        assert!(err(0.5 / 64.0) < 1e-3);
        assert!(err(0.5 / 128.0) < err(0.5 / 4.0));
        let c = safety_cost(&path, &r, &g).unwrap();
        assert!(c > 0.0 && c < 1.0);
    }

    #[test]
    fn presets() {
        let cfg = classes();
        let gr = RobotProfile::<f64>::ground("g", &cfg, &["pebbles"], 50.0);
        gr.validate().unwrap();
        assert_eq!(gr.trav_rate("pebbles"), 0.05);
        assert_eq!(gr.trav_rate("grass"), 1e-5);
        assert_eq!(gr.trav_rate("floor"), 1e-5);
        let a = RobotProfile::<f64>::aerial("a", 50.0);
        assert_eq!(a.trav_rate("pebbles"), 0.0);
        assert_eq!(a.velocity, 2.0 * gr.velocity);
    }

    #[test]
    fn profile_validation() {
        let mut r = robot(0.0, 1.0);
        let err = r.validate().unwrap_err().to_string();
        assert!(err.contains("velocity"), "{err}");
        r.velocity = 1.0;
        r.lambda_trav.insert("mud".into(), -1.0);
        assert!(r.validate().is_err());
    }
}
