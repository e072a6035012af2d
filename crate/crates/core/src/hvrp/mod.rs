//! Min-max capacitated routing for heterogeneous teams.
//!
//! Node 0 is the depot and nodes `1..=n` are tasks; robot `k` prices arcs with
//! its own [`CostMatrix`]. A solution is one ordered task list per robot; routes
//! start at the depot and end there through a free return arc. The objective is
//! lexicographic: the largest route cost first, then the sum of route costs.

mod exact;
mod heuristic;

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::costmodel::{CostMatrix, RobotProfile};
use crate::error::{Error, Result};
use crate::num::Real;

pub use exact::{solve_exact, EXACT_MAX_ROBOTS, EXACT_MAX_TASKS};
pub use heuristic::{solve_heuristic, solve_homogeneous_baseline, solve_portfolio, BaselineOutcome, Budget, HeuristicParams, SolveOutcome, TracePoint};

fn default_true() -> bool {
    true
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound(deserialize = "T: Real"))]
pub struct RoutingProblem<T> {
    pub matrices: Vec<CostMatrix<T>>,
    /// Route cost limit per robot; `None` is unbounded.
    pub capacities: Vec<Option<T>>,
    /// When false every robot must serve at least one task.
    #[serde(default = "default_true")]
    pub allow_empty_routes: bool,
}

impl<T: Real> RoutingProblem<T> {
    pub fn new(matrices: Vec<CostMatrix<T>>, capacities: Vec<Option<T>>) -> Result<Self> {
        let p = RoutingProblem { matrices, capacities, allow_empty_routes: true };
        p.check()?;
        Ok(p)
    }

    /// Capacities taken from the robot profiles, in matrix order.
    pub fn from_robots(matrices: Vec<CostMatrix<T>>, robots: &[RobotProfile<T>]) -> Result<Self> {
        Self::new(matrices, robots.iter().map(|r| r.capacity).collect())
    }

    pub fn check(&self) -> Result<()> {
        if self.matrices.is_empty() {
            return Err(Error::Config("routing problem needs at least one robot".into()));
        }
        if self.capacities.len() != self.matrices.len() {
            return Err(Error::Config(format!(
                "{} capacities for {} robots",
                self.capacities.len(),
                self.matrices.len()
            )));
        }
        let size = self.matrices[0].size;
        if size == 0 {
            return Err(Error::Config("cost matrices must include the depot".into()));
        }
        for m in &self.matrices {
            if m.size != size {
                return Err(Error::Config(format!("matrix `{}` has size {} (expected {size})", m.robot, m.size)));
            }
            m.validate()?;
        }
        for (k, c) in self.capacities.iter().enumerate() {
            if let Some(c) = c {
                if !(*c > T::zero()) {
                    return Err(Error::validation(format!("capacities[{k}]"), "must be positive"));
                }
            }
        }
        Ok(())
    }

    pub fn num_tasks(&self) -> usize {
        self.matrices[0].size - 1
    }

    pub fn num_robots(&self) -> usize {
        self.matrices.len()
    }

    #[inline]
    pub fn cost(&self, k: usize, i: usize, j: usize) -> T {
        self.matrices[k].cost(i, j)
    }

    /// Cost of the closed route `0 → route… → 0` for robot `k`, summed in visiting order.
    pub fn route_cost(&self, k: usize, route: &[usize]) -> T {
        let m = &self.matrices[k];
        let mut acc = T::zero();
        let mut prev = 0;
        for &v in route {
            acc += m.cost(prev, v);
            prev = v;
        }
        acc + m.cost(prev, 0)
    }

    #[inline]
    pub fn fits(&self, k: usize, cost: T) -> bool {
        self.capacities[k].map_or(true, |c| cost <= c)
    }

    /// Copy of the problem with every arc priced by geometric distance and no capacities.
    pub fn distance_only(&self) -> Self {
        RoutingProblem {
            matrices: self.matrices.iter().map(CostMatrix::distance_only).collect(),
            capacities: vec![None; self.matrices.len()],
            allow_empty_routes: self.allow_empty_routes,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Solution {
    /// Task nodes (1-based) per robot, in visiting order.
    pub routes: Vec<Vec<usize>>,
}

impl Solution {
    pub fn empty(robots: usize) -> Self {
        Solution { routes: vec![Vec::new(); robots] }
    }

    /// Arcs `(i, j)` with `x^k_ij = 1`, depot included.
    pub fn arcs(&self, k: usize) -> Vec<(usize, usize)> {
        let r = &self.routes[k];
        if r.is_empty() {
            return Vec::new();
        }
        let mut out = Vec::with_capacity(r.len() + 1);
        let mut prev = 0;
        for &v in r {
            out.push((prev, v));
            prev = v;
        }
        out.push((prev, 0));
        out
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Violation {
    RouteCount { expected: usize, found: usize },
    NodeOutOfRange { robot: usize, position: usize, node: usize },
    DepotInRoute { robot: usize, position: usize },
    VisitCount { node: usize, count: usize },
    Capacity { robot: usize, cost: f64, capacity: f64 },
    EmptyRoute { robot: usize },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::RouteCount { expected, found } => write!(f, "expected {expected} routes, found {found}"),
            Violation::NodeOutOfRange { robot, position, node } => {
                write!(f, "robot {robot} position {position}: node {node} out of range")
            }
            Violation::DepotInRoute { robot, position } => write!(f, "robot {robot} position {position}: depot inside route"),
            Violation::VisitCount { node, count } => write!(f, "node {node} visited {count} times"),
            Violation::Capacity { robot, cost, capacity } => {
                write!(f, "robot {robot}: route cost {cost} exceeds capacity {capacity}")
            }
            Violation::EmptyRoute { robot } => write!(f, "robot {robot}: empty route not allowed"),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ValidityReport {
    pub violations: Vec<Violation>,
}

impl ValidityReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }
}

impl fmt::Display for ValidityReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.violations.iter().map(Violation::to_string).collect();
        f.write_str(&parts.join("; "))
    }
}

/// Checks visit-once, depot placement, index bounds and capacities.
pub fn validate<T: Real>(problem: &RoutingProblem<T>, solution: &Solution) -> ValidityReport {
    let mut v = Vec::new();
    let (n, k) = (problem.num_tasks(), problem.num_robots());
    if solution.routes.len() != k {
        v.push(Violation::RouteCount { expected: k, found: solution.routes.len() });
    }
    let mut count = vec![0usize; n + 1];
    for (r, route) in solution.routes.iter().enumerate() {
        for (pos, &node) in route.iter().enumerate() {
            if node == 0 {
                v.push(Violation::DepotInRoute { robot: r, position: pos });
            } else if node > n {
                v.push(Violation::NodeOutOfRange { robot: r, position: pos, node });
            } else {
                count[node] += 1;
            }
        }
        if route.is_empty() && !problem.allow_empty_routes {
            v.push(Violation::EmptyRoute { robot: r });
        }
        if r < k && route.iter().all(|&x| x >= 1 && x <= n) {
            let cost = problem.route_cost(r, route);
            if !problem.fits(r, cost) {
                let cap = problem.capacities[r].expect("bounded capacity");
                v.push(Violation::Capacity { robot: r, cost: cost.to_f64_lossy(), capacity: cap.to_f64_lossy() });
            }
        }
    }
    for (node, &c) in count.iter().enumerate().skip(1) {
        if c != 1 {
            v.push(Violation::VisitCount { node, count: c });
        }
    }
    ValidityReport { violations: v }
}

/// Lexicographic objective: maximum route cost, then total cost.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Objective<T> {
    pub max: T,
    pub total: T,
}

impl<T: Real> Objective<T> {
    pub fn of_costs(costs: &[T]) -> Self {
        let mut max = T::zero();
        let mut total = T::zero();
        for &c in costs {
            max = max.max(c);
            total += c;
        }
        Objective { max, total }
    }

    /// Strict lexicographic improvement.
    pub fn better_than(&self, other: &Self) -> bool {
        self.max < other.max || (self.max == other.max && self.total < other.total)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RobotMetrics<T> {
    pub robot: String,
    pub tasks: usize,
    /// Combined route cost, return arc included.
    pub cost: T,
    pub time_s: T,
    pub distance: T,
    /// `1 − Π(1 − p)` over the outbound arcs, per hazard and combined.
    pub trav_prob: T,
    pub coll_prob: T,
    pub accident_prob: T,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Metrics<T> {
    pub objective: T,
    pub total_cost: T,
    pub max_time_s: T,
    pub max_distance: T,
    pub max_trav_prob: T,
    pub max_coll_prob: T,
    pub max_accident_prob: T,
    pub robots: Vec<RobotMetrics<T>>,
}

/// Metrics of `solution` without checking it; arcs back to the depot are not
/// travelled and count for nothing beyond their (zero) cost.
pub fn metrics<T: Real>(problem: &RoutingProblem<T>, solution: &Solution) -> Metrics<T> {
    let mut robots = Vec::with_capacity(solution.routes.len());
    for (k, route) in solution.routes.iter().enumerate() {
        let m = &problem.matrices[k];
        let (mut time_s, mut distance) = (T::zero(), T::zero());
        let (mut st, mut sc, mut sa) = (T::one(), T::one(), T::one());
        let mut prev = 0;
        for &v in route {
            let e = m.get(prev, v);
            time_s += e.time_s;
            distance += e.distance;
            st *= T::one() - e.trav_prob;
            sc *= T::one() - e.coll_prob;
            sa *= T::one() - e.safety_prob;
            prev = v;
        }
        robots.push(RobotMetrics {
            robot: m.robot.clone(),
            tasks: route.len(),
            cost: problem.route_cost(k, route),
            time_s,
            distance,
            trav_prob: T::one() - st,
            coll_prob: T::one() - sc,
            accident_prob: T::one() - sa,
        });
    }
    let fold = |f: fn(&RobotMetrics<T>) -> T| robots.iter().map(f).fold(T::zero(), T::max);
    let costs: Vec<T> = robots.iter().map(|r| r.cost).collect();
    let obj = Objective::of_costs(&costs);
    Metrics {
        objective: obj.max,
        total_cost: obj.total,
        max_time_s: fold(|r| r.time_s),
        max_distance: fold(|r| r.distance),
        max_trav_prob: fold(|r| r.trav_prob),
        max_coll_prob: fold(|r| r.coll_prob),
        max_accident_prob: fold(|r| r.accident_prob),
        robots,
    }
}

/// Metrics of a valid solution.
pub fn evaluate<T: Real>(problem: &RoutingProblem<T>, solution: &Solution) -> Result<Metrics<T>> {
    let report = validate(problem, solution);
    if !report.is_valid() {
        return Err(Error::InvalidSolution(report.to_string()));
    }
    Ok(metrics(problem, solution))
}

/// Objective of a solution, computed through the same route sums as [`evaluate`].
pub fn objective<T: Real>(problem: &RoutingProblem<T>, solution: &Solution) -> Objective<T> {
    let costs: Vec<T> = solution.routes.iter().enumerate().map(|(k, r)| problem.route_cost(k, r)).collect();
    Objective::of_costs(&costs)
}
