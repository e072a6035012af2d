//! Roadmap over inspection points and depots, and the all-pairs path table
//! derived from it.
//!
//! Construction runs in three phases: straight edges between every pair of
//! mutually visible nodes, connected components of that graph, then repeated
//! RRT* bridging between the two closest components until one remains.

mod los;
mod paths;
mod rrt;

pub use los::line_of_sight;
pub use paths::{all_pairs_paths, PathEntry, PathTable};
pub use rrt::{rrt_star, RrtParams};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::Point;
use crate::gridmap::SemanticGrid;
use crate::num::Real;
use los::segment_clear;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NodeKind {
    Depot(usize),
    /// Index into the task list the roadmap was built from.
    Task(usize),
    Auxiliary,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RoadmapNode<T> {
    pub point: Point<T>,
    pub kind: NodeKind,
}

/// Undirected straight edge.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RoadmapEdge<T> {
    pub a: usize,
    pub b: usize,
    pub length: T,
}

/// Roadmap graph. Depot nodes come first, then task nodes, then auxiliary
/// waypoints inserted while bridging components.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Roadmap<T> {
    pub resolution: T,
    pub nodes: Vec<RoadmapNode<T>>,
    pub edges: Vec<RoadmapEdge<T>>,
    /// Number of RRT* bridges inserted.
    pub bridges: usize,
}

impl<T: Real> Roadmap<T> {
    /// Depot and task nodes, i.e. the nodes the path table is built over.
    pub fn num_terminals(&self) -> usize {
        self.nodes.iter().filter(|n| n.kind != NodeKind::Auxiliary).count()
    }

    pub fn num_auxiliary(&self) -> usize {
        self.nodes.len() - self.num_terminals()
    }

    pub fn adjacency(&self) -> Vec<Vec<(usize, T)>> {
        let mut adj = vec![Vec::new(); self.nodes.len()];
        for e in &self.edges {
            adj[e.a].push((e.b, e.length));
            adj[e.b].push((e.a, e.length));
        }
        adj
    }

    pub fn edge_polyline(&self, e: &RoadmapEdge<T>) -> [Point<T>; 2] {
        [self.nodes[e.a].point, self.nodes[e.b].point]
    }

    /// Connected component id per node; ids are numbered by lowest member.
    pub fn components(&self) -> Vec<usize> {
        let adj = self.adjacency();
        let mut comp = vec![usize::MAX; self.nodes.len()];
        let mut next = 0;
        for s in 0..self.nodes.len() {
            if comp[s] != usize::MAX {
                continue;
            }
            comp[s] = next;
            let mut stack = vec![s];
            while let Some(u) = stack.pop() {
                for &(v, _) in &adj[u] {
                    if comp[v] == usize::MAX {
                        comp[v] = next;
                        stack.push(v);
                    }
                }
            }
            next += 1;
        }
        comp
    }

    pub fn is_connected(&self) -> bool {
        self.components().iter().all(|&c| c == 0)
    }

    fn add_edge(&mut self, a: usize, b: usize) {
        let length = self.nodes[a].point.dist(&self.nodes[b].point);
        self.edges.push(RoadmapEdge { a: a.min(b), b: a.max(b), length });
    }
}

/// Node pairs tried between two components before they count as disconnected.
/// The closest pair can sit on opposite sides of a wall with a long detour, so
/// one exhausted search is not enough evidence.
pub const BRIDGE_ATTEMPTS: usize = 4;

/// Builds a connected roadmap over `depots` and `tasks`.
///
/// Fails with [`Error::DisconnectedRoadmap`] when some component cannot be
/// bridged within the RRT* budget; the error lists the task indices cut off
/// from the first depot (or from the largest component when there is none).
pub fn build_prm<T: Real>(
    grid: &SemanticGrid<T>,
    tasks: &[Point<T>],
    depots: &[Point<T>],
    params: &RrtParams<T>,
    seed: u64,
) -> Result<Roadmap<T>> {
    let mut rm = Roadmap { resolution: grid.resolution(), nodes: Vec::new(), edges: Vec::new(), bridges: 0 };
    for (i, p) in depots.iter().enumerate() {
        rm.nodes.push(RoadmapNode { point: *p, kind: NodeKind::Depot(i) });
    }
    for (i, p) in tasks.iter().enumerate() {
        rm.nodes.push(RoadmapNode { point: *p, kind: NodeKind::Task(i) });
    }
    for n in &rm.nodes {
        match grid.cell_of(&n.point) {
            None => return Err(Error::OutOfBounds { x: n.point.x.to_f64_lossy(), y: n.point.y.to_f64_lossy() }),
            Some((x, y)) if grid.is_obstacle(x, y) => {
                return Err(Error::validation(format!("roadmap node {:?}", n.kind), "lies on an obstacle cell"))
            }
            _ => {}
        }
    }

    // phase 1: covisibility edges
    let n = rm.nodes.len();
    for i in 0..n {
        for j in i + 1..n {
            if segment_clear(grid, &rm.nodes[i].point, &rm.nodes[j].point) {
                rm.add_edge(i, j);
            }
        }
    }

    // phases 2 and 3: merge components by RRT* bridges
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut failed: Vec<(usize, usize)> = Vec::new();
    loop {
        let comp = rm.components();
        let ncomp = comp.iter().copied().max().map_or(0, |m| m + 1);
        if ncomp <= 1 {
            break;
        }
        // closest node pair between distinct components, skipping pairs that already failed
        let mut best: Option<(T, usize, usize)> = None;
        for i in 0..rm.nodes.len() {
            for j in i + 1..rm.nodes.len() {
                if comp[i] == comp[j] {
                    continue;
                }
                let key = (comp[i].min(comp[j]), comp[i].max(comp[j]));
                let tries = failed.iter().filter(|&&(fa, fb)| (comp[fa].min(comp[fb]), comp[fa].max(comp[fb])) == key).count();
                if tries >= BRIDGE_ATTEMPTS || failed.contains(&(i, j)) {
                    continue;
                }
                let d = rm.nodes[i].point.dist_sq(&rm.nodes[j].point);
                if best.map_or(true, |(bd, _, _)| d < bd) {
                    best = Some((d, i, j));
                }
            }
        }
        let Some((_, a, b)) = best else {
            return Err(Error::DisconnectedRoadmap { unreachable: cut_off_tasks(&rm, &comp) });
        };
        let (pa, pb) = (rm.nodes[a].point, rm.nodes[b].point);
        match rrt_star(grid, pa, pb, params, &mut rng) {
            Some(path) => {
                let first_new = rm.nodes.len();
                let mut prev = a;
                for p in &path[1..path.len() - 1] {
                    let id = rm.nodes.len();
                    rm.nodes.push(RoadmapNode { point: *p, kind: NodeKind::Auxiliary });
                    rm.add_edge(prev, id);
                    prev = id;
                }
                rm.add_edge(prev, b);
                // new waypoints also see other nodes; connecting them can merge
                // more than the two bridged components at once
                for id in first_new..rm.nodes.len() {
                    for other in 0..first_new {
                        if other != a && other != b && segment_clear(grid, &rm.nodes[id].point, &rm.nodes[other].point) {
                            rm.add_edge(id, other);
                        }
                    }
                }
                rm.bridges += 1;
            }
            // failures are remembered by node so they follow their components through merges
            None => failed.push((a, b)),
        }
    }
    Ok(rm)
}

fn cut_off_tasks<T: Real>(rm: &Roadmap<T>, comp: &[usize]) -> Vec<usize> {
    let anchor = match rm.nodes.iter().position(|n| matches!(n.kind, NodeKind::Depot(_))) {
        Some(d) => comp[d],
        None => {
            let ncomp = comp.iter().copied().max().unwrap_or(0) + 1;
            let mut sizes = vec![0usize; ncomp];
            for &c in comp {
                sizes[c] += 1;
            }
            // largest component, lowest id on ties
            (0..ncomp).fold(0, |best, c| if sizes[c] > sizes[best] { c } else { best })
        }
    };
    rm.nodes
        .iter()
        .zip(comp)
        .filter_map(|(n, &c)| match n.kind {
            NodeKind::Task(t) if c != anchor => Some(t),
            _ => None,
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gridmap::test_support::grid;

    #[test]
    fn covisible_tasks_form_complete_graph() {
        let g = grid(&["..........", "..........", ".........."], 1.0);
        let tasks = [Point::new(0.5, 0.5), Point::new(9.5, 0.5), Point::new(5.5, 2.5)];
        let rm = build_prm(&g, &tasks, &[], &RrtParams::default(), 1).unwrap();
        assert_eq!(rm.edges.len(), 3);
        assert_eq!(rm.num_auxiliary(), 0);
        assert_eq!(rm.bridges, 0);
    }

    #[test]
    fn wall_with_gap_needs_one_bridge() {
        let rows = [
            "....................",
            "....................",
            "....................",
            "##################..",
            "....................",
            "....................",
            "....................",
        ];
        let g = grid(&rows, 0.5);
        let tasks = [
            Point::new(0.75, 0.25),
            Point::new(3.25, 0.75),
            Point::new(0.75, 3.25),
            Point::new(3.25, 2.75),
        ];
        let rm = build_prm(&g, &tasks, &[], &RrtParams::default(), 4).unwrap();
        assert_eq!(rm.bridges, 1);
        assert!(rm.is_connected());
        for e in &rm.edges {
            let [a, b] = rm.edge_polyline(e);
            assert!(line_of_sight(&g, &a, &b).unwrap());
            assert_eq!(e.length, a.dist(&b));
        }
    }

    #[test]
    fn enclosed_task_reported() {
        let rows = [
            "..........",
            "..........",
            "......###.",
            "......#.#.",
            "......###.",
        ];
        let g = grid(&rows, 0.5);
        let tasks = [Point::new(0.25, 0.25), Point::new(3.75, 1.75), Point::new(4.5, 0.25)];
        let p = RrtParams { max_iterations: 3000, ..RrtParams::default() };
        let err = build_prm(&g, &tasks, &[Point::new(0.25, 2.25)], &p, 1).unwrap_err();
        match err {
            Error::DisconnectedRoadmap { unreachable } => assert_eq!(unreachable, vec![1]),
            e => panic!("unexpected {e}"),
        }
    }

    #[test]
    fn node_on_obstacle_rejected() {
        let g = grid(&["..#.."], 1.0);
        assert!(build_prm(&g, &[Point::new(2.5, 0.5)], &[], &RrtParams::default(), 0).is_err());
    }

    #[test]
    fn seed_determinism() {
        let rows = ["..........", "..........", "#######.##", "..........", ".........."];
        let g = grid(&rows, 0.5);
        let tasks = [Point::new(0.25, 0.25), Point::new(0.25, 2.25), Point::new(4.75, 2.25)];
        let a = build_prm(&g, &tasks, &[], &RrtParams::default(), 7).unwrap();
        let b = build_prm(&g, &tasks, &[], &RrtParams::default(), 7).unwrap();
        assert_eq!(serde_json::to_string(&a).unwrap(), serde_json::to_string(&b).unwrap());
    }
}
