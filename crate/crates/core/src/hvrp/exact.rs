use super::{Objective, RoutingProblem, Solution};
use crate::error::{Error, Result};
use crate::num::Real;

pub const EXACT_MAX_TASKS: usize = 10;
pub const EXACT_MAX_ROBOTS: usize = 3;

/// Best open route per task subset for one robot (Held-Karp).
struct SubsetRoutes<T> {
    cost: Vec<T>,
    order: Vec<Vec<usize>>,
}

fn subset_routes<T: Real>(p: &RoutingProblem<T>, k: usize) -> SubsetRoutes<T> {
    let n = p.num_tasks();
    let full = 1usize << n;
    let inf = T::infinity();
    // dp[mask * n + j]: cheapest depot → … → j covering mask, ending at task j
    let mut dp = vec![inf; full * n];
    let mut parent = vec![usize::MAX; full * n];
    for j in 0..n {
        dp[(1 << j) * n + j] = p.cost(k, 0, j + 1);
    }
    for mask in 1..full {
        for j in 0..n {
            let cur = dp[mask * n + j];
            if mask & (1 << j) == 0 || cur == inf {
                continue;
            }
            for l in 0..n {
                if mask & (1 << l) != 0 {
                    continue;
                }
                let next = mask | (1 << l);
                let c = cur + p.cost(k, j + 1, l + 1);
                if c < dp[next * n + l] {
                    dp[next * n + l] = c;
                    parent[next * n + l] = j;
                }
            }
        }
    }
    let mut cost = vec![T::zero(); full];
    let mut order = vec![Vec::new(); full];
    for mask in 1..full {
        let mut best = (inf, usize::MAX);
        for j in 0..n {
            if mask & (1 << j) != 0 {
                let c = dp[mask * n + j] + p.cost(k, j + 1, 0);
                if c < best.0 {
                    best = (c, j);
                }
            }
        }
        let mut seq = Vec::with_capacity(mask.count_ones() as usize);
        let (mut m, mut j) = (mask, best.1);
        while j != usize::MAX {
            seq.push(j + 1);
            let pj = parent[m * n + j];
            m &= !(1 << j);
            j = pj;
        }
        seq.reverse();
        // summed in visiting order, identical to RoutingProblem::route_cost
        cost[mask] = p.route_cost(k, &seq);
        order[mask] = seq;
    }
    SubsetRoutes { cost, order }
}

/// Optimal solution by exhaustive assignment over per-robot optimal subset routes.
///
/// Ties on (max, total) go to the lexicographically smallest route list. Refuses
/// instances above [`EXACT_MAX_TASKS`] tasks or [`EXACT_MAX_ROBOTS`] robots.
pub fn solve_exact<T: Real>(problem: &RoutingProblem<T>) -> Result<Solution> {
    problem.check()?;
    let (n, k) = (problem.num_tasks(), problem.num_robots());
    if n > EXACT_MAX_TASKS || k > EXACT_MAX_ROBOTS {
        return Err(Error::TooLarge { tasks: n, robots: k });
    }
    let tables: Vec<SubsetRoutes<T>> = (0..k).map(|r| subset_routes(problem, r)).collect();
    let full = 1usize << n;
    let usable: Vec<Vec<bool>> = (0..k)
        .map(|r| {
            (0..full)
                .map(|m| problem.fits(r, tables[r].cost[m]) && (m != 0 || problem.allow_empty_routes))
                .collect()
        })
        .collect();

    let mut best: Option<(Objective<T>, Vec<usize>)> = None;
    let mut masks = vec![0usize; k];
    assign(0, n, &mut masks, &mut |masks: &[usize]| {
        if !masks.iter().enumerate().all(|(r, &m)| usable[r][m]) {
            return;
        }
        let costs: Vec<T> = masks.iter().enumerate().map(|(r, &m)| tables[r].cost[m]).collect();
        let obj = Objective::of_costs(&costs);
        let replace = match &best {
            None => true,
            Some((b, bm)) => {
                obj.better_than(b)
                    || (!b.better_than(&obj) && routes_of(&tables, masks) < routes_of(&tables, bm))
            }
        };
        if replace {
            best = Some((obj, masks.to_vec()));
        }
    });

    match best {
        Some((_, masks)) => Ok(Solution { routes: routes_of(&tables, &masks) }),
        None => {
            // tasks no robot can serve even alone; otherwise the combination is at fault
            let alone: Vec<usize> = (0..n)
                .filter(|&t| (0..k).all(|r| !problem.fits(r, tables[r].cost[1 << t])))
                .collect();
            let unplaceable = if alone.is_empty() { (0..n).collect() } else { alone };
            Err(Error::Infeasible { unplaceable })
        }
    }
}

fn routes_of<T>(tables: &[SubsetRoutes<T>], masks: &[usize]) -> Vec<Vec<usize>> {
    masks.iter().enumerate().map(|(r, &m)| tables[r].order[m].clone()).collect()
}

/// Visits every assignment of tasks `t..n` to robots.
fn assign(t: usize, n: usize, masks: &mut [usize], visit: &mut dyn FnMut(&[usize])) {
    if t == n {
        visit(masks);
        return;
    }
    for r in 0..masks.len() {
        masks[r] |= 1 << t;
        assign(t + 1, n, masks, visit);
        masks[r] &= !(1 << t);
    }
}
