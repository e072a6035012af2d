//! Inspection task extraction: density clustering of task-labeled cells and
//! placement of a reachable inspection point next to each cluster.

use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::Point;
use crate::gridmap::SemanticGrid;
use crate::num::Real;

pub type Cell = (usize, usize);

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClusterParams<T> {
    /// Neighbourhood radius in metres.
    pub epsilon: T,
    /// Neighbours (including the point itself) needed for a core point.
    pub min_points: usize,
    /// Clusters with fewer cells are dropped as outliers.
    pub min_cluster_size: usize,
    /// Minimum distance between a task centroid and its inspection point, metres.
    pub separation: T,
}

impl<T: Real> ClusterParams<T> {
    pub fn for_resolution(resolution: T) -> Self {
        ClusterParams {
            epsilon: T::lit(1.5) * resolution,
            min_points: 3,
            min_cluster_size: 3,
            separation: T::lit(0.3),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.epsilon > T::zero()) {
            return Err(Error::validation("cluster.epsilon", "must be positive"));
        }
        if self.min_points == 0 {
            return Err(Error::validation("cluster.min_points", "must be at least 1"));
        }
        if self.min_cluster_size == 0 {
            return Err(Error::validation("cluster.min_cluster_size", "must be at least 1"));
        }
        if !(self.separation >= T::zero()) {
            return Err(Error::validation("cluster.separation", "must be non-negative"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InspectionTask<T> {
    pub id: usize,
    pub member_cells: Vec<Cell>,
    pub centroid: Point<T>,
    pub inspection_point: Point<T>,
    pub source_class: String,
}

/// DBSCAN over the given cells' centres, without size filtering.
///
/// Cells are processed in the order given; a border cell reachable from several
/// clusters joins whichever cluster reaches it first. Clusters come out in
/// creation order, members in discovery order.
pub fn dbscan<T: Real>(grid: &SemanticGrid<T>, cells: &[Cell], epsilon: T, min_points: usize) -> Vec<Vec<Cell>> {
    if cells.is_empty() {
        return Vec::new();
    }
    // bucket the cells on the grid so neighbourhood queries only scan a window
    const NONE: usize = usize::MAX;
    let mut slot = vec![NONE; grid.nx() * grid.ny()];
    for (i, &(x, y)) in cells.iter().enumerate() {
        slot[grid.index(x, y)] = i;
    }
    let reach = (epsilon / grid.resolution()).floor().to_usize().unwrap_or(0);
    let neighbours = |i: usize| -> Vec<usize> {
        let (x, y) = cells[i];
        let c = grid.center(x, y);
        let mut out = Vec::new();
        for yy in y.saturating_sub(reach)..=(y + reach).min(grid.ny() - 1) {
            for xx in x.saturating_sub(reach)..=(x + reach).min(grid.nx() - 1) {
                let j = slot[grid.index(xx, yy)];
                if j != NONE && c.dist(&grid.center(xx, yy)) <= epsilon {
                    out.push(j);
                }
            }
        }
        out
    };

    #[derive(Clone, Copy, PartialEq)]
    enum State {
        Unvisited,
        Noise,
        Assigned,
    }
    let mut state = vec![State::Unvisited; cells.len()];
    let mut clusters = Vec::new();
    for start in 0..cells.len() {
        if state[start] != State::Unvisited {
            continue;
        }
        let nb = neighbours(start);
        if nb.len() < min_points {
            state[start] = State::Noise;
            continue;
        }
        let mut members = vec![cells[start]];
        state[start] = State::Assigned;
        let mut queue: VecDeque<usize> = nb.into_iter().collect();
        while let Some(j) = queue.pop_front() {
            match state[j] {
                State::Assigned => continue,
                State::Noise => {
                    // border point: claimed, but never expanded
                    state[j] = State::Assigned;
                    members.push(cells[j]);
                    continue;
                }
                State::Unvisited => {}
            }
            state[j] = State::Assigned;
            members.push(cells[j]);
            let nb = neighbours(j);
            if nb.len() >= min_points {
                queue.extend(nb.into_iter().filter(|&k| state[k] != State::Assigned));
            }
        }
        clusters.push(members);
    }
    clusters
}

/// Clusters the cells carrying task class `class`.
///
/// Clusters below `min_cluster_size` are discarded. Each cluster's cells are
/// sorted in `(y, x)` order and the clusters are sorted by their first cell.
pub fn cluster_task_cells<T: Real>(grid: &SemanticGrid<T>, class: u16, params: &ClusterParams<T>) -> Vec<Vec<Cell>> {
    let cells = grid.task_cells(class);
    let mut clusters: Vec<Vec<Cell>> = dbscan(grid, &cells, params.epsilon, params.min_points)
        .into_iter()
        .filter(|c| c.len() >= params.min_cluster_size)
        .map(|mut c| {
            c.sort_by_key(|&(x, y)| (y, x));
            c
        })
        .collect();
    clusters.sort_by_key(|c| (c[0].1, c[0].0));
    clusters
}

pub fn centroid<T: Real>(grid: &SemanticGrid<T>, cells: &[Cell]) -> Point<T> {
    let n = T::from_usize_lossy(cells.len());
    let (sx, sy) = cells.iter().fold((T::zero(), T::zero()), |(sx, sy), &(x, y)| {
        let c = grid.center(x, y);
        (sx + c.x, sy + c.y)
    });
    Point::new(sx / n, sy / n)
}

/// Places the inspection point for a cluster and returns the finished task.
///
/// Picks the free cell closest to the centroid among cells at least `separation`
/// away and outside the cluster, searching within `max(4·separation, 20·resolution)`.
pub fn place_inspection_point<T: Real>(
    id: usize,
    cluster: &[Cell],
    grid: &SemanticGrid<T>,
    params: &ClusterParams<T>,
    source_class: &str,
) -> Result<InspectionTask<T>> {
    if cluster.is_empty() {
        return Err(Error::Degenerate("empty cluster".into()));
    }
    let c = centroid(grid, cluster);
    let res = grid.resolution();
    let radius = (T::lit(4.0) * params.separation).max(T::lit(20.0) * res);
    let span = (radius / res).ceil().to_usize().unwrap_or(0) + 1;
    let (cx, cy) = grid
        .cell_of(&c)
        .ok_or(Error::OutOfBounds { x: c.x.to_f64_lossy(), y: c.y.to_f64_lossy() })?;
    let mut members: Vec<Cell> = cluster.to_vec();
    members.sort_unstable();

    let mut best: Option<(T, Cell)> = None;
    for y in cy.saturating_sub(span)..=(cy + span).min(grid.ny() - 1) {
        for x in cx.saturating_sub(span)..=(cx + span).min(grid.nx() - 1) {
            if !grid.collapses_to_free(x, y) || members.binary_search(&(x, y)).is_ok() {
                continue;
            }
            let d = grid.center(x, y).dist(&c);
            if d < params.separation || d > radius {
                continue;
            }
            // scan order is (y, x), so strict improvement keeps the lowest tie
            if best.map_or(true, |(bd, _)| d < bd) {
                best = Some((d, (x, y)));
            }
        }
    }
    let (_, (bx, by)) = best.ok_or(Error::UnreachableTask { cluster: id })?;
    Ok(InspectionTask {
        id,
        member_cells: cluster.to_vec(),
        centroid: c,
        inspection_point: grid.center(bx, by),
        source_class: source_class.to_string(),
    })
}

/// Runs clustering and inspection point placement for every task class.
///
/// Task ids are assigned consecutively, class by class.
pub fn extract_tasks<T: Real>(grid: &SemanticGrid<T>, params: &ClusterParams<T>) -> Result<Vec<InspectionTask<T>>> {
    params.validate()?;
    let mut tasks = Vec::new();
    for (k, name) in grid.classes().task_classes.iter().enumerate() {
        for cluster in cluster_task_cells(grid, k as u16, params) {
            let id = tasks.len();
            tasks.push(place_inspection_point(id, &cluster, grid, params, name)?);
        }
    }
    Ok(tasks)
}


#[cfg(test)]
mod tests {
    use super::oracle::*;
    use super::*;
    use crate::gridmap::test_support::grid;
    use crate::gridmap::{compute_edf, Label};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn params(res: f64) -> ClusterParams<f64> {
        ClusterParams::for_resolution(res)
    }

    #[test]
    fn single_blob() {
        let g = grid(&["......", ".AAA..", ".AAA..", ".AAA..", "......"], 0.1);
        let c = cluster_task_cells(&g, 0, &params(0.1));
        assert_eq!(c.len(), 1);
        assert_eq!(c[0].len(), 9);
    }

    #[test]
    fn two_blobs_far_apart() {
        let mut rows = vec![String::from("."); 1];
        rows.clear();
        for y in 0..3 {
            let _ = y;
            rows.push(format!("AA{}AA", ".".repeat(10)));
        }
        let refs: Vec<&str> = rows.iter().map(String::as_str).collect();
        let g = grid(&refs, 0.1);
        let p = params(0.1);
        let c = cluster_task_cells(&g, 0, &p);
        assert_eq!(c.len(), 2);
        let naive = naive_dbscan(&g, &g.task_cells(0), p.epsilon, p.min_points);
        assert_eq!(as_partition(&c), as_partition(&naive));
    }

    #[test]
    fn isolated_cell_is_outlier() {
        let g = grid(&[".....", "..A..", "....."], 0.1);
        let p = ClusterParams { min_cluster_size: 4, min_points: 1, ..params(0.1) };
        assert!(cluster_task_cells(&g, 0, &p).is_empty());
        assert!(cluster_task_cells(&grid(&["..."], 0.1), 0, &p).is_empty());
    }

    #[test]
    fn border_point_joins_first_cluster() {
        // two 3-wide rows of cores bridged by a single border cell
        let g = grid(&["AAA.AAA"], 1.0);
        let p = ClusterParams { epsilon: 1.0, min_points: 3, min_cluster_size: 1, separation: 0.0 };
        let c = dbscan(&g, &g.task_cells(0), p.epsilon, p.min_points);
        let naive = naive_dbscan(&g, &g.task_cells(0), p.epsilon, p.min_points);
        assert_eq!(as_partition(&c), as_partition(&naive));
    }

    #[test]
    fn random_layouts_match_naive() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..30 {
            let (nx, ny) = (rng.gen_range(5..40), rng.gen_range(5..40));
            let dens = rng.gen_range(0.05..0.5);
            let labels = (0..nx * ny).map(|_| if rng.gen_bool(dens) { Label::Task(0) } else { Label::Free }).collect();
            let g = SemanticGrid::new(nx, ny, 0.2, crate::gridmap::test_support::classes(), labels).unwrap();
            let eps = 0.2 * rng.gen_range(1.0..3.0);
            let mp = rng.gen_range(1..6);
            let cells = g.task_cells(0);
            assert_eq!(as_partition(&dbscan(&g, &cells, eps, mp)), as_partition(&naive_dbscan(&g, &cells, eps, mp)));
        }
    }

    #[test]
    fn inspection_point_respects_separation() {
        let mut rows = vec!["...................."; 20];
        rows[9] = ".........AAA........";
        rows[10] = ".........AAA........";
        rows[11] = ".........AAA........";
        let g = compute_edf(&grid(&rows, 0.1));
        let p = ClusterParams { separation: 0.5, ..params(0.1) };
        let t = extract_tasks(&g, &p).unwrap();
        assert_eq!(t.len(), 1);
        let d = t[0].inspection_point.dist(&t[0].centroid);
        assert!(d >= 0.5 && d <= 0.5 + 0.1 * 2f64.sqrt(), "d = {d}");
        // exhaustive scan for the minimum qualifying distance
        let mut best = f64::INFINITY;
        for y in 0..g.ny() {
            for x in 0..g.nx() {
                let dd = g.center(x, y).dist(&t[0].centroid);
                if g.label(x, y) == Label::Free && dd >= 0.5 {
                    best = best.min(dd);
                }
            }
        }
        assert_eq!(d, best);
    }

    #[test]
    fn zero_separation_picks_nearest_free_cell() {
        let g = grid(&["....", ".AA.", ".A..", "...."], 0.1);
        let p = ClusterParams { separation: 0.0, ..params(0.1) };
        let t = extract_tasks(&g, &p).unwrap();
        // centroid sits inside cell (1,1); nearest non-member free cell centre is (2,2)
        assert_eq!(g.cell_of(&t[0].inspection_point), Some((2, 2)));
    }

    #[test]
    fn enclosed_blob_is_unreachable() {
        let g = grid(&["#####", "#AAA#", "#AAA#", "#####"], 0.1);
        let err = extract_tasks(&g, &params(0.1)).unwrap_err();
        assert!(matches!(err, Error::UnreachableTask { cluster: 0 }));
    }

    #[test]
    fn impeding_cells_are_not_inspection_points() {
        let g = grid(&["ppppp", "pAAAp", "pAAAp", "ppppp", "....."], 0.1);
        let p = ClusterParams { separation: 0.0, ..params(0.1) };
        let t = extract_tasks(&g, &p).unwrap();
        let (x, y) = g.cell_of(&t[0].inspection_point).unwrap();
        assert_eq!(g.label(x, y), Label::Free);
    }
}
