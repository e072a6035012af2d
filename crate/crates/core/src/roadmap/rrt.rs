//! Seeded RRT* between two points of a grid map, used to bridge roadmap
//! components that have no line of sight to each other.

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::los::segment_clear;
use crate::geometry::Point;
use crate::gridmap::SemanticGrid;
use crate::num::Real;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RrtParams<T> {
    /// Extension step in metres; `None` means two grid cells.
    #[serde(default)]
    pub step: Option<T>,
    pub goal_bias: T,
    /// Rewiring radius in metres; `None` means four steps.
    #[serde(default)]
    pub rewire_radius: Option<T>,
    pub max_iterations: usize,
}

impl<T: Real> Default for RrtParams<T> {
    fn default() -> Self {
        RrtParams { step: None, goal_bias: T::lit(0.1), rewire_radius: None, max_iterations: 20_000 }
    }
}

impl<T: Real> RrtParams<T> {
    pub fn step_for(&self, grid: &SemanticGrid<T>) -> T {
        self.step.unwrap_or(T::lit(2.0) * grid.resolution())
    }

    pub fn rewire_for(&self, grid: &SemanticGrid<T>) -> T {
        self.rewire_radius.unwrap_or(T::lit(4.0) * self.step_for(grid))
    }
}

const MAX_DRAWS_PER_ITERATION: usize = 64;

struct TreeNode<T> {
    p: Point<T>,
    parent: usize,
    cost: T,
}

/// Uniform bucket grid over the map for radius and nearest queries.
struct Buckets {
    size_x: usize,
    size_y: usize,
    cells: Vec<Vec<usize>>,
}

impl Buckets {
    fn new(nx: usize, ny: usize) -> Self {
        Buckets { size_x: nx, size_y: ny, cells: vec![Vec::new(); nx * ny] }
    }
}

/// Plans a collision-free polyline from `start` to `goal`, or `None` when the
/// iteration budget runs out. The search stops as soon as the goal is connected;
/// the returned path is shortcut greedily with line-of-sight checks.
pub fn rrt_star<T: Real, R: Rng>(
    grid: &SemanticGrid<T>,
    start: Point<T>,
    goal: Point<T>,
    params: &RrtParams<T>,
    rng: &mut R,
) -> Option<Vec<Point<T>>> {
    if segment_clear(grid, &start, &goal) {
        return Some(vec![start, goal]);
    }
    let step = params.step_for(grid);
    let radius = params.rewire_for(grid);
    let (w, h) = (grid.width(), grid.height());
    let bsize = radius;
    let bnx = (w / bsize).ceil().to_usize().unwrap_or(1).max(1);
    let bny = (h / bsize).ceil().to_usize().unwrap_or(1).max(1);
    let mut buckets = Buckets::new(bnx, bny);
    let bucket_of = |p: &Point<T>| -> (usize, usize) {
        let bx = (p.x / bsize).floor().to_usize().unwrap_or(0).min(bnx - 1);
        let by = (p.y / bsize).floor().to_usize().unwrap_or(0).min(bny - 1);
        (bx, by)
    };

    let mut tree = vec![TreeNode { p: start, parent: usize::MAX, cost: T::zero() }];
    let (sx, sy) = bucket_of(&start);
    buckets.cells[sy * bnx + sx].push(0);

    // an iteration is one extension attempt; samples landing in obstacles are
    // redrawn, up to a bounded number of draws
    let mut draws = 0usize;
    let max_draws = params.max_iterations.saturating_mul(MAX_DRAWS_PER_ITERATION);
    for _ in 0..params.max_iterations {
        let sample = if rng.gen::<f64>() < params.goal_bias.to_f64_lossy() {
            goal
        } else {
            loop {
                draws += 1;
                if draws > max_draws {
                    return None;
                }
                let p = Point::new(T::lit(rng.gen::<f64>()) * w, T::lit(rng.gen::<f64>()) * h);
                if matches!(grid.cell_of(&p), Some((cx, cy)) if !grid.is_obstacle(cx, cy)) {
                    break p;
                }
            }
        };

        let nearest = nearest_node(&tree, &buckets, bucket_of(&sample), &sample, bsize);
        let from = tree[nearest].p;
        let d = from.dist(&sample);
        if d <= T::zero() {
            continue;
        }
        let new_p = if d > step { from.lerp(&sample, step / d) } else { sample };
        if !segment_clear(grid, &from, &new_p) {
            continue;
        }

        // choose the cheapest parent among nearby nodes
        let near = nodes_within(&tree, &buckets, bucket_of(&new_p), &new_p, radius);
        let mut parent = nearest;
        let mut cost = tree[nearest].cost + from.dist(&new_p);
        for &j in &near {
            let c = tree[j].cost + tree[j].p.dist(&new_p);
            if c < cost && segment_clear(grid, &tree[j].p, &new_p) {
                parent = j;
                cost = c;
            }
        }
        let id = tree.len();
        tree.push(TreeNode { p: new_p, parent, cost });
        let (bx, by) = bucket_of(&new_p);
        buckets.cells[by * bnx + bx].push(id);

        for &j in &near {
            if j == parent {
                continue;
            }
            let c = cost + new_p.dist(&tree[j].p);
            if c < tree[j].cost && segment_clear(grid, &new_p, &tree[j].p) {
                tree[j].parent = id;
                tree[j].cost = c;
            }
        }

        if new_p.dist(&goal) <= step && segment_clear(grid, &new_p, &goal) {
            let mut path = vec![goal];
            let mut k = id;
            while k != usize::MAX {
                path.push(tree[k].p);
                k = tree[k].parent;
            }
            path.reverse();
            return Some(shortcut(grid, path));
        }
    }
    None
}

fn nearest_node<T: Real>(
    tree: &[TreeNode<T>],
    buckets: &Buckets,
    (bx, by): (usize, usize),
    p: &Point<T>,
    bsize: T,
) -> usize {
    let mut best = (T::infinity(), 0usize);
    let max_ring = buckets.size_x.max(buckets.size_y);
    for ring in 0..=max_ring {
        // anything in ring r+1 or beyond is at least r·bsize away
        if best.0 < T::from_usize_lossy(ring.saturating_sub(1)) * bsize {
            break;
        }
        let x0 = bx as isize - ring as isize;
        let x1 = bx as isize + ring as isize;
        let y0 = by as isize - ring as isize;
        let y1 = by as isize + ring as isize;
        for y in y0..=y1 {
            if y < 0 || y >= buckets.size_y as isize {
                continue;
            }
            for x in x0..=x1 {
                if x < 0 || x >= buckets.size_x as isize {
                    continue;
                }
                if y != y0 && y != y1 && x != x0 && x != x1 {
                    continue;
                }
                for &i in &buckets.cells[y as usize * buckets.size_x + x as usize] {
                    let d = tree[i].p.dist(p);
                    if d < best.0 || (d == best.0 && i < best.1) {
                        best = (d, i);
                    }
                }
            }
        }
    }
    best.1
}

fn nodes_within<T: Real>(
    tree: &[TreeNode<T>],
    buckets: &Buckets,
    (bx, by): (usize, usize),
    p: &Point<T>,
    radius: T,
) -> Vec<usize> {
    let mut out = Vec::new();
    for y in by.saturating_sub(1)..=(by + 1).min(buckets.size_y - 1) {
        for x in bx.saturating_sub(1)..=(bx + 1).min(buckets.size_x - 1) {
            for &i in &buckets.cells[y * buckets.size_x + x] {
                if tree[i].p.dist(p) <= radius {
                    out.push(i);
                }
            }
        }
    }
    out.sort_unstable();
    out
}

/// Greedy shortcutting: from each kept vertex jump to the farthest visible one.
pub(crate) fn shortcut<T: Real>(grid: &SemanticGrid<T>, path: Vec<Point<T>>) -> Vec<Point<T>> {
    if path.len() <= 2 {
        return path;
    }
    let mut out = vec![path[0]];
    let mut i = 0;
    while i < path.len() - 1 {
        let mut j = path.len() - 1;
        while j > i + 1 && !segment_clear(grid, &path[i], &path[j]) {
            j -= 1;
        }
        out.push(path[j]);
        i = j;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gridmap::test_support::grid;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn finds_path_through_gap() {
        let rows = [
            "..........",
            "..........",
            "#######.##",
            "..........",
            "..........",
        ];
        let g = grid(&rows, 0.5);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let a = Point::new(0.75, 0.25);
        let b = Point::new(0.75, 2.25);
        let path = rrt_star(&g, a, b, &RrtParams::default(), &mut rng).expect("path");
        assert_eq!(path.first(), Some(&a));
        assert_eq!(path.last(), Some(&b));
        for w in path.windows(2) {
            assert!(segment_clear(&g, &w[0], &w[1]));
        }
    }

    #[test]
    fn walled_goal_fails() {
        let rows = ["......", "......", "######", "......"];
        let g = grid(&rows, 0.5);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let p = RrtParams { max_iterations: 2000, ..RrtParams::default() };
        assert!(rrt_star(&g, Point::new(0.25, 0.25), Point::new(0.25, 1.75), &p, &mut rng).is_none());
    }

    #[test]
    fn seeded_runs_repeat() {
        let rows = ["..........", "..........", "###.######", "..........", ".........."];
        let g = grid(&rows, 0.5);
        let run = |s| {
            let mut rng = ChaCha8Rng::seed_from_u64(s);
            rrt_star(&g, Point::new(4.25, 0.25), Point::new(4.25, 2.25), &RrtParams::default(), &mut rng)
        };
        assert_eq!(run(9), run(9));
    }
}
