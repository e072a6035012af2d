use std::cmp::Ordering;
use std::collections::BinaryHeap;

use serde::{Deserialize, Serialize};

use super::{NodeKind, Roadmap};
use crate::error::{Error, Result};
use crate::geometry::{resample, Point};
use crate::num::Real;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PathEntry<T> {
    /// Roadmap node sequence from the lower to the higher terminal index.
    pub nodes: Vec<usize>,
    /// Polyline vertices along `nodes`.
    pub vertices: Vec<Point<T>>,
    pub length: T,
}

/// Shortest roadmap paths between every pair of terminals (depots and tasks).
///
/// Terminal `i` is roadmap node `i`. Entries are stored once per unordered pair;
/// the reverse direction is the same polyline walked backwards.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PathTable<T> {
    pub resolution: T,
    pub terminals: Vec<Point<T>>,
    pub kinds: Vec<NodeKind>,
    entries: Vec<PathEntry<T>>,
}

impl<T: Real> PathTable<T> {
    pub fn len(&self) -> usize {
        self.terminals.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terminals.is_empty()
    }

    fn slot(&self, i: usize, j: usize) -> usize {
        let (a, b) = (i.min(j), i.max(j));
        // row-major upper triangle without the diagonal
        a * (2 * self.len() - a - 1) / 2 + (b - a - 1)
    }

    /// Geometric path length `d_ij` in metres; zero on the diagonal.
    pub fn length(&self, i: usize, j: usize) -> T {
        if i == j {
            T::zero()
        } else {
            self.entries[self.slot(i, j)].length
        }
    }

    pub fn entry(&self, i: usize, j: usize) -> Option<&PathEntry<T>> {
        (i != j).then(|| &self.entries[self.slot(i, j)])
    }

    /// Polyline vertices from terminal `i` to terminal `j`.
    pub fn polyline(&self, i: usize, j: usize) -> Vec<Point<T>> {
        if i == j {
            return vec![self.terminals[i]];
        }
        let mut v = self.entries[self.slot(i, j)].vertices.clone();
        if i > j {
            v.reverse();
        }
        v
    }

    /// Path from `i` to `j` sampled at most one grid cell apart.
    pub fn sampled(&self, i: usize, j: usize) -> Vec<Point<T>> {
        resample(&self.polyline(i, j), self.resolution)
    }

    /// Checks that the table holds one entry per terminal pair.
    pub fn check_complete(&self) -> Result<()> {
        let n = self.len();
        let expected = n * n.saturating_sub(1) / 2;
        if self.entries.len() != expected || self.kinds.len() != n {
            return Err(Error::Config(format!(
                "path table has {} entries for {} terminals (expected {expected})",
                self.entries.len(),
                n
            )));
        }
        if self.entries.iter().any(|e| !e.length.is_finite()) {
            return Err(Error::Config("path table has non-finite lengths".into()));
        }
        Ok(())
    }
}

#[derive(PartialEq)]
struct Open<T> {
    f: T,
    node: usize,
}

impl<T: Real> Eq for Open<T> {}

impl<T: Real> Ord for Open<T> {
    fn cmp(&self, other: &Self) -> Ordering {
        // min-heap on f, then on node id for determinism
        other.f.partial_cmp(&self.f).unwrap_or(Ordering::Equal).then_with(|| other.node.cmp(&self.node))
    }
}

impl<T: Real> PartialOrd for Open<T> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// A* with the straight-line heuristic. Returns the node sequence and its length.
pub(crate) fn astar<T: Real>(rm: &Roadmap<T>, adj: &[Vec<(usize, T)>], s: usize, t: usize) -> Option<(Vec<usize>, T)> {
    let n = rm.nodes.len();
    let goal = rm.nodes[t].point;
    let h = |u: usize| rm.nodes[u].point.dist(&goal);
    let mut g = vec![T::infinity(); n];
    let mut parent = vec![usize::MAX; n];
    let mut closed = vec![false; n];
    let mut open = BinaryHeap::new();
    g[s] = T::zero();
    open.push(Open { f: h(s), node: s });
    while let Some(Open { node: u, .. }) = open.pop() {
        if closed[u] {
            continue;
        }
        if u == t {
            let mut seq = vec![t];
            let mut k = t;
            while k != s {
                k = parent[k];
                seq.push(k);
            }
            seq.reverse();
            return Some((seq, g[t]));
        }
        closed[u] = true;
        for &(v, w) in &adj[u] {
            if closed[v] {
                continue;
            }
            let cand = g[u] + w;
            if cand < g[v] {
                g[v] = cand;
                parent[v] = u;
                open.push(Open { f: cand + h(v), node: v });
            }
        }
    }
    None
}

/// Shortest paths between all depot/task pairs of a connected roadmap.
pub fn all_pairs_paths<T: Real>(rm: &Roadmap<T>) -> Result<PathTable<T>> {
    let nt = rm.num_terminals();
    if rm.nodes[..nt].iter().any(|n| n.kind == NodeKind::Auxiliary) {
        return Err(Error::Config("roadmap terminals must precede auxiliary nodes".into()));
    }
    let adj = rm.adjacency();
    let mut entries = Vec::with_capacity(nt * nt.saturating_sub(1) / 2);
    let mut unreachable = Vec::new();
    for i in 0..nt {
        for j in i + 1..nt {
            match astar(rm, &adj, i, j) {
                Some((nodes, length)) => {
                    let vertices = nodes.iter().map(|&k| rm.nodes[k].point).collect();
                    entries.push(PathEntry { nodes, vertices, length });
                }
                None => {
                    if let NodeKind::Task(t) = rm.nodes[j].kind {
                        unreachable.push(t);
                    }
                    entries.push(PathEntry { nodes: Vec::new(), vertices: Vec::new(), length: T::infinity() });
                }
            }
        }
    }
    if !unreachable.is_empty() {
        unreachable.sort_unstable();
        unreachable.dedup();
        return Err(Error::DisconnectedRoadmap { unreachable });
    }
    Ok(PathTable {
        resolution: rm.resolution,
        terminals: rm.nodes[..nt].iter().map(|n| n.point).collect(),
        kinds: rm.nodes[..nt].iter().map(|n| n.kind).collect(),
        entries,
    })
}

#[cfg(test)]
pub(crate) mod oracle {
    use super::*;

    /// Plain Dijkstra distances from `s`, accumulated along the path from `s`.
    pub fn dijkstra(rm: &Roadmap<f64>, s: usize) -> Vec<f64> {
        let adj = rm.adjacency();
        let n = rm.nodes.len();
        let mut dist = vec![f64::INFINITY; n];
        let mut done = vec![false; n];
        dist[s] = 0.0;
        for _ in 0..n {
            let u = (0..n).filter(|&u| !done[u]).min_by(|&a, &b| dist[a].partial_cmp(&dist[b]).unwrap());
            let Some(u) = u else { break };
            if dist[u].is_infinite() {
                break;
            }
            done[u] = true;
            for &(v, w) in &adj[u] {
                if dist[u] + w < dist[v] {
                    dist[v] = dist[u] + w;
                }
            }
        }
        dist
    }
}

#[cfg(test)]
mod tests {
    use super::oracle::dijkstra;
    use super::*;
    use crate::gridmap::test_support::grid;
    use crate::roadmap::{build_prm, line_of_sight, RrtParams};

    #[test]
    fn triangle_uses_direct_edges() {
        let g = grid(&["..........", "..........", ".........."], 1.0);
        let tasks = [Point::new(0.5, 0.5), Point::new(9.5, 0.5), Point::new(5.5, 2.5)];
        let rm = build_prm(&g, &tasks, &[], &RrtParams::default(), 1).unwrap();
        let t = all_pairs_paths(&rm).unwrap();
        assert_eq!(t.length(0, 1), tasks[0].dist(&tasks[1]));
        assert_eq!(t.length(1, 0), t.length(0, 1));
        assert_eq!(t.length(2, 2), 0.0);
        t.check_complete().unwrap();
    }

    #[test]
    fn detour_matches_dijkstra_and_bounds() {
        let rows = [
            "....................",
            "....................",
            "....................",
            "##################..",
            "....................",
            "....................",
        ];
        let g = grid(&rows, 0.5);
        let tasks = [Point::new(0.75, 0.25), Point::new(3.25, 0.75), Point::new(0.75, 2.75), Point::new(3.25, 2.25)];
        let rm = build_prm(&g, &tasks, &[Point::new(5.0, 0.25)], &RrtParams::default(), 3).unwrap();
        let t = all_pairs_paths(&rm).unwrap();
        for i in 0..t.len() {
            let d = dijkstra(&rm, i);
            for j in 0..t.len() {
                assert_eq!(t.length(i, j), d[j], "{i}->{j}");
                assert!(t.length(i, j) >= t.terminals[i].dist(&t.terminals[j]));
                let poly = t.polyline(i, j);
                assert_eq!(poly.first(), Some(&t.terminals[i]));
                assert_eq!(poly.last(), Some(&t.terminals[j]));
                for w in t.sampled(i, j).windows(2) {
                    assert!(line_of_sight(&g, &w[0], &w[1]).unwrap());
                    assert!(w[0].dist(&w[1]) <= 0.5 + 1e-12);
                }
                for k in 0..t.len() {
                    assert!(t.length(i, k) <= t.length(i, j) + t.length(j, k) + 1e-9);
                }
            }
        }
        assert!(t.length(1, 3) > t.terminals[1].dist(&t.terminals[3]) + 1.0);
    }

    #[test]
    fn disconnected_input_is_an_error() {
        let rm = Roadmap {
            resolution: 1.0,
            nodes: vec![
                super::super::RoadmapNode { point: Point::new(0.5, 0.5), kind: NodeKind::Task(0) },
                super::super::RoadmapNode { point: Point::new(3.5, 0.5), kind: NodeKind::Task(1) },
            ],
            edges: vec![],
            bridges: 0,
        };
        assert!(matches!(all_pairs_paths(&rm), Err(Error::DisconnectedRoadmap { .. })));
    }
}
