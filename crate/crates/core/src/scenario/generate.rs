//! Seeded procedural benchmark maps.
//!
//! Four templates with the sizes and task counts of the reference environments:
//! an orchard (tree rows with mud strips), a forest (scattered trees and
//! undergrowth), a park (buildings, open lawns, sand patches) and a cave
//! (corridor maze with rubble). Tasks are 3×3 blobs of the `target` class
//! placed in the largest 4-connected free region, each with an obstacle-free,
//! non-impeding margin so an inspection point always exists next to it.

use std::collections::VecDeque;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::Point;
use crate::gridmap::{ClassConfig, EnvClass, Label, SemanticGrid};
use crate::num::Real;
use crate::roadmap::RrtParams;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Template {
    Orchard,
    Forest,
    Park,
    Cave,
}

impl Template {
    pub const ALL: [Template; 4] = [Template::Orchard, Template::Forest, Template::Park, Template::Cave];

    pub fn name(self) -> &'static str {
        match self {
            Template::Orchard => "orchard",
            Template::Forest => "forest",
            Template::Park => "park",
            Template::Cave => "cave",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        Template::ALL
            .into_iter()
            .find(|t| t.name() == s)
            .ok_or_else(|| Error::Config(format!("unknown map template `{s}` (orchard, forest, park, cave)")))
    }

    /// (impeding class, other terrain class)
    fn terrain_names(self) -> (&'static str, &'static str) {
        match self {
            Template::Orchard => ("mud", "grass"),
            Template::Forest => ("undergrowth", "leaves"),
            Template::Park => ("sand", "lawn"),
            Template::Cave => ("rubble", "gravel"),
        }
    }

    /// Bridge-search settings suited to the template's scale. The cave's
    /// corridors are metres wide and the tree-like layout forces long detours
    /// between neighbouring rooms, so it needs a longer step and budget.
    pub fn rrt_params<T: Real>(self) -> Option<RrtParams<T>> {
        match self {
            Template::Cave => Some(RrtParams { step: Some(T::lit(3.0)), max_iterations: 100_000, ..Default::default() }),
            _ => None,
        }
    }

    pub fn classes<T: Real>(self) -> ClassConfig<T> {
        let (rough, soft) = self.terrain_names();
        ClassConfig {
            task_classes: vec!["target".into()],
            environment_classes: vec![EnvClass::new(rough, true), EnvClass::new(soft, false)],
            free_class: "floor".into(),
            obstacle_height_threshold: T::lit(1.5),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound(deserialize = "T: Real"))]
pub struct MapSpec<T> {
    pub template: Template,
    /// Metres.
    pub width: T,
    pub height: T,
    pub resolution: T,
    pub tasks: usize,
    /// Scales the number of obstacles (1 = template default).
    #[serde(default = "unit")]
    pub obstacle_density: T,
    /// Scales the number and size of terrain patches (1 = template default).
    #[serde(default = "unit")]
    pub terrain_density: T,
    #[serde(default)]
    pub seed: u64,
    /// Desired inspection standoff; sets the clear margin around each task.
    #[serde(default = "default_separation")]
    pub separation: T,
    /// Obstacle-free half-width kept around each task and the depot, metres.
    #[serde(default = "default_clearance")]
    pub clearance: T,
}

fn unit<T: Real>() -> T {
    T::one()
}

fn default_separation<T: Real>() -> T {
    T::lit(0.3)
}

fn default_clearance<T: Real>() -> T {
    T::lit(1.0)
}

impl<T: Real> MapSpec<T> {
    /// Size, resolution and task count of the reference environment for `template`.
    pub fn standard(template: Template, seed: u64) -> Self {
        let (w, h, res, n) = match template {
            Template::Orchard => (24.0, 12.0, 0.1, 110),
            Template::Forest => (32.5, 17.5, 0.1, 58),
            Template::Park => (44.5, 34.0, 0.1, 94),
            Template::Cave => (280.0, 180.0, 0.5, 266),
        };
        MapSpec {
            template,
            width: T::lit(w),
            height: T::lit(h),
            resolution: T::lit(res),
            tasks: n,
            obstacle_density: T::one(),
            terrain_density: T::one(),
            seed,
            separation: default_separation(),
            clearance: default_clearance(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.width > T::zero() && self.height > T::zero()) {
            return Err(Error::validation("map.size", "width and height must be positive"));
        }
        if !(self.resolution > T::zero()) {
            return Err(Error::validation("map.resolution", "must be positive"));
        }
        if self.tasks == 0 {
            return Err(Error::validation("map.tasks", "at least one task is required"));
        }
        if !(self.separation >= T::zero() && self.clearance >= T::zero()) {
            return Err(Error::validation("map.clearance", "separation and clearance must be non-negative"));
        }
        if !(self.obstacle_density >= T::zero() && self.terrain_density >= T::zero()) {
            return Err(Error::validation("map.density", "densities must be non-negative"));
        }
        let (nx, ny) = self.cells();
        if nx < 8 || ny < 8 {
            return Err(Error::validation("map.size", "map must span at least 8×8 cells"));
        }
        Ok(())
    }

    fn cells(&self) -> (usize, usize) {
        let c = |v: T| (v / self.resolution).round().to_usize().unwrap_or(0);
        (c(self.width), c(self.height))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GeneratedMap<T> {
    pub grid: SemanticGrid<T>,
    /// Task blob centres in (y, x) cell order, matching task extraction order.
    pub tasks: Vec<Point<T>>,
    pub depot: Point<T>,
}

struct Canvas {
    nx: usize,
    ny: usize,
    res: f64,
    labels: Vec<Label>,
}

const ROUGH: Label = Label::Env(0);
const SOFT: Label = Label::Env(1);

impl Canvas {
    fn idx(&self, x: usize, y: usize) -> usize {
        y * self.nx + x
    }

    fn cell(&self, v: f64) -> isize {
        (v / self.res).floor() as isize
    }

    /// Sets `label` on cells whose centre lies inside the disc, if `keep` allows.
    fn disc(&mut self, cx: f64, cy: f64, r: f64, label: Label, keep: impl Fn(Label) -> bool) {
        let (x0, x1) = (self.cell(cx - r).max(0), self.cell(cx + r).min(self.nx as isize - 1));
        let (y0, y1) = (self.cell(cy - r).max(0), self.cell(cy + r).min(self.ny as isize - 1));
        for y in y0..=y1 {
            for x in x0..=x1 {
                let (px, py) = ((x as f64 + 0.5) * self.res, (y as f64 + 0.5) * self.res);
                if (px - cx).powi(2) + (py - cy).powi(2) <= r * r {
                    let i = self.idx(x as usize, y as usize);
                    if keep(self.labels[i]) {
                        self.labels[i] = label;
                    }
                }
            }
        }
    }

    /// Axis-aligned rectangle in metres.
    fn rect(&mut self, x0: f64, y0: f64, x1: f64, y1: f64, label: Label, keep: impl Fn(Label) -> bool) {
        let (cx0, cx1) = (self.cell(x0).max(0), self.cell(x1).min(self.nx as isize - 1));
        let (cy0, cy1) = (self.cell(y0).max(0), self.cell(y1).min(self.ny as isize - 1));
        for y in cy0..=cy1 {
            for x in cx0..=cx1 {
                let i = self.idx(x as usize, y as usize);
                if keep(self.labels[i]) {
                    self.labels[i] = label;
                }
            }
        }
    }

    /// Largest 4-connected region of non-obstacle cells (lowest start index on ties).
    fn main_component(&self) -> Vec<bool> {
        let mut comp = vec![usize::MAX; self.labels.len()];
        let mut best = (0usize, usize::MAX);
        let mut queue = VecDeque::new();
        for s in 0..self.labels.len() {
            if comp[s] != usize::MAX || self.labels[s] == Label::Obstacle {
                continue;
            }
            comp[s] = s;
            queue.push_back(s);
            let mut size = 0;
            while let Some(i) = queue.pop_front() {
                size += 1;
                let (x, y) = (i % self.nx, i / self.nx);
                let mut push = |j: usize| {
                    if comp[j] == usize::MAX && self.labels[j] != Label::Obstacle {
                        comp[j] = s;
                        queue.push_back(j);
                    }
                };
                if x > 0 {
                    push(i - 1);
                }
                if x + 1 < self.nx {
                    push(i + 1);
                }
                if y > 0 {
                    push(i - self.nx);
                }
                if y + 1 < self.ny {
                    push(i + self.nx);
                }
            }
            if size > best.0 {
                best = (size, s);
            }
        }
        comp.iter().map(|&c| c == best.1).collect()
    }

    /// True when the square of Chebyshev radius `r` around (x, y) is inside the
    /// map and holds no obstacle or task cell.
    fn open_square(&self, x: usize, y: usize, r: usize) -> bool {
        if x < r || y < r || x + r >= self.nx || y + r >= self.ny {
            return false;
        }
        (y - r..=y + r)
            .all(|yy| (x - r..=x + r).all(|xx| !matches!(self.labels[self.idx(xx, yy)], Label::Obstacle | Label::Task(_))))
    }

    fn clear_of_obstacles(&self, x: usize, y: usize, r: usize) -> bool {
        let r2 = (r * r) as isize;
        let (x, y) = (x as isize, y as isize);
        let r = r as isize;
        (-r..=r).all(|dy| {
            (-r..=r).all(|dx| {
                let (xx, yy) = (x + dx, y + dy);
                dx * dx + dy * dy > r2
                    || (xx >= 0
                        && yy >= 0
                        && (xx as usize) < self.nx
                        && (yy as usize) < self.ny
                        && self.labels[self.idx(xx as usize, yy as usize)] != Label::Obstacle)
            })
        })
    }

    /// Turns impeding terrain in the square into free space, so a task in a
    /// rough patch sits on a small dry pad.
    fn dry_pad(&mut self, x: usize, y: usize, r: usize) {
        for yy in y - r..=y + r {
            for xx in x - r..=x + r {
                let i = self.idx(xx, yy);
                if self.labels[i] == ROUGH {
                    self.labels[i] = Label::Free;
                }
            }
        }
    }
}

/// Uniform draw that tolerates an empty range (returns `lo`).
fn uniform(rng: &mut ChaCha8Rng, lo: f64, hi: f64) -> f64 {
    if hi > lo {
        rng.gen_range(lo..hi)
    } else {
        lo
    }
}

fn build_orchard(c: &mut Canvas, spec: &MapSpec<f64>, rng: &mut ChaCha8Rng) {
    let (w, h) = (spec.width, spec.height);
    let spacing = 3.0;
    let rows = ((h - 1.0) / spacing).floor().max(1.0) as usize;
    let y0 = (h - (rows - 1) as f64 * spacing) / 2.0;
    let not_obstacle = |l: Label| l != Label::Obstacle;
    // alleys: mud strips over most of their length, grass tufts elsewhere
    for a in 0..=rows {
        let yc = y0 + (a as f64 - 0.5) * spacing;
        for _ in 0..5 {
            let x = uniform(rng, 0.0, w);
            c.disc(x, yc, uniform(rng, 0.4, 1.0), SOFT, |l| l == Label::Free);
        }
        if rng.gen_bool((0.6 * spec.terrain_density).clamp(0.0, 1.0)) {
            let len = uniform(rng, 0.4, 0.9) * w;
            let x0 = uniform(rng, 1.5, (w - len).max(1.6));
            let half = 0.5 * spacing * uniform(rng, 0.6, 1.0);
            c.rect(x0, yc - half, x0 + len, yc + half, ROUGH, not_obstacle);
        }
    }
    for r in 0..rows {
        let y = y0 + r as f64 * spacing;
        let mut x = 2.0;
        while x < w - 1.0 {
            if rng.gen_bool((0.9 * spec.obstacle_density).clamp(0.0, 1.0)) {
                c.disc(x, y + uniform(rng, -0.1, 0.1), uniform(rng, 0.12, 0.2), Label::Obstacle, |_| true);
            }
            x += uniform(rng, 2.0, 2.6);
        }
    }
}

fn build_forest(c: &mut Canvas, spec: &MapSpec<f64>, rng: &mut ChaCha8Rng) {
    let (w, h) = (spec.width, spec.height);
    for _ in 0..(10.0 * spec.terrain_density).round() as usize {
        let (x, y) = (uniform(rng, 0.0, w), uniform(rng, 0.0, h));
        c.disc(x, y, uniform(rng, 1.0, 3.0), SOFT, |l| l == Label::Free);
    }
    for _ in 0..(10.0 * spec.terrain_density).round() as usize {
        let (x, y) = (uniform(rng, 3.0, w), uniform(rng, 0.0, h));
        c.disc(x, y, uniform(rng, 1.5, 3.5), ROUGH, |l| l != Label::Obstacle);
    }
    let trees = (w * h / 20.0 * spec.obstacle_density).round() as usize;
    for _ in 0..trees {
        let (x, y) = (uniform(rng, 0.0, w), uniform(rng, 0.0, h));
        if x < 2.5 && y < 2.5 {
            continue;
        }
        c.disc(x, y, uniform(rng, 0.15, 0.4), Label::Obstacle, |_| true);
    }
}

fn build_park(c: &mut Canvas, spec: &MapSpec<f64>, rng: &mut ChaCha8Rng) {
    let (w, h) = (spec.width, spec.height);
    for _ in 0..(8.0 * spec.terrain_density).round() as usize {
        let (x, y) = (uniform(rng, 0.0, w), uniform(rng, 0.0, h));
        c.disc(x, y, uniform(rng, 3.0, 6.0), SOFT, |l| l == Label::Free);
    }
    for _ in 0..(9.0 * spec.terrain_density).round() as usize {
        let (x, y) = (uniform(rng, 4.0, w - 2.0), uniform(rng, 4.0, h - 2.0));
        c.disc(x, y, uniform(rng, 2.5, 5.0), ROUGH, |l| l != Label::Obstacle);
    }
    for _ in 0..(6.0 * spec.obstacle_density).round() as usize {
        let (bw, bh) = (uniform(rng, 2.0, 6.0), uniform(rng, 2.0, 6.0));
        let (x, y) = (uniform(rng, 3.0, (w - bw).max(3.1)), uniform(rng, 3.0, (h - bh).max(3.1)));
        c.rect(x, y, x + bw, y + bh, Label::Obstacle, |_| true);
    }
    for _ in 0..(15.0 * spec.obstacle_density).round() as usize {
        let (x, y) = (uniform(rng, 0.0, w), uniform(rng, 0.0, h));
        if x < 2.5 && y < 2.5 {
            continue;
        }
        c.disc(x, y, uniform(rng, 0.2, 0.5), Label::Obstacle, |_| true);
    }
}

fn build_cave(c: &mut Canvas, spec: &MapSpec<f64>, rng: &mut ChaCha8Rng) {
    let (w, h) = (spec.width, spec.height);
    c.labels.iter_mut().for_each(|l| *l = Label::Obstacle);
    let room = 20.0;
    let (gx, gy) = (((w / room).floor() as usize).max(1), ((h / room).floor() as usize).max(1));
    let (ox, oy) = ((w - gx as f64 * room) / 2.0, (h - gy as f64 * room) / 2.0);
    let center = |i: usize, j: usize| (ox + (i as f64 + 0.5) * room, oy + (j as f64 + 0.5) * room);
    let open = |_: Label| true;
    for j in 0..gy {
        for i in 0..gx {
            let (x, y) = center(i, j);
            let (hw, hh) = (uniform(rng, 3.0, 6.5), uniform(rng, 3.0, 6.5));
            c.rect(x - hw, y - hh, x + hw, y + hh, Label::Free, open);
        }
    }
    // spanning tree by randomised depth-first search, plus a few loops
    let mut visited = vec![false; gx * gy];
    let mut stack = vec![0usize];
    visited[0] = true;
    let mut links = Vec::new();
    while let Some(&cur) = stack.last() {
        let (i, j) = (cur % gx, cur / gx);
        let mut nb = Vec::new();
        if i > 0 {
            nb.push(cur - 1);
        }
        if i + 1 < gx {
            nb.push(cur + 1);
        }
        if j > 0 {
            nb.push(cur - gx);
        }
        if j + 1 < gy {
            nb.push(cur + gx);
        }
        nb.retain(|&n| !visited[n]);
        if nb.is_empty() {
            stack.pop();
            continue;
        }
        let n = nb[rng.gen_range(0..nb.len())];
        visited[n] = true;
        links.push((cur, n));
        stack.push(n);
    }
    for a in 0..gx * gy {
        for b in [a + 1, a + gx] {
            let adjacent = (b == a + 1 && (a % gx) + 1 < gx) || (b == a + gx && b < gx * gy);
            if adjacent && !links.contains(&(a, b)) && !links.contains(&(b, a)) && rng.gen_bool(0.15) {
                links.push((a, b));
            }
        }
    }
    for &(a, b) in &links {
        let (xa, ya) = center(a % gx, a / gx);
        let (xb, yb) = center(b % gx, b / gx);
        let half = uniform(rng, 2.5, 3.5);
        c.rect(xa.min(xb) - half, ya.min(yb) - half, xa.max(xb) + half, ya.max(yb) + half, Label::Free, open);
    }
    let free = |l: Label| l == Label::Free;
    // rubble fills whole rooms (never the depot room), leaving corridors passable
    for r in 1..gx * gy {
        if rng.gen_bool((0.3 * spec.terrain_density).clamp(0.0, 1.0)) {
            let (x, y) = center(r % gx, r / gx);
            c.rect(x - 7.0, y - 7.0, x + 7.0, y + 7.0, ROUGH, free);
        }
    }
    for _ in 0..(20.0 * spec.terrain_density).round() as usize {
        let (x, y) = (uniform(rng, 0.0, w), uniform(rng, 0.0, h));
        c.disc(x, y, uniform(rng, 2.0, 5.0), SOFT, free);
    }
    for _ in 0..(25.0 * spec.obstacle_density).round() as usize {
        let (i, j) = (rng.gen_range(0..gx), rng.gen_range(0..gy));
        let (x, y) = center(i, j);
        let (dx, dy) = (uniform(rng, -6.0, 6.0), uniform(rng, -6.0, 6.0));
        c.disc(x + dx, y + dy, uniform(rng, 0.5, 1.0), Label::Obstacle, |_| true);
    }
}

/// Generates a map; the same spec always yields the same grid.
pub fn generate_map<T: Real>(spec: &MapSpec<T>) -> Result<GeneratedMap<T>> {
    spec.validate()?;
    let f = |v: T| v.to_f64_lossy();
    let s64 = MapSpec {
        template: spec.template,
        width: f(spec.width),
        height: f(spec.height),
        resolution: f(spec.resolution),
        tasks: spec.tasks,
        obstacle_density: f(spec.obstacle_density),
        terrain_density: f(spec.terrain_density),
        seed: spec.seed,
        separation: f(spec.separation),
        clearance: f(spec.clearance),
    };
    let (nx, ny) = spec.cells();
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed ^ (spec.template as u64) << 56);
    let mut c = Canvas { nx, ny, res: s64.resolution, labels: vec![Label::Free; nx * ny] };
    match spec.template {
        Template::Orchard => build_orchard(&mut c, &s64, &mut rng),
        Template::Forest => build_forest(&mut c, &s64, &mut rng),
        Template::Park => build_park(&mut c, &s64, &mut rng),
        Template::Cave => build_cave(&mut c, &s64, &mut rng),
    }

    let main = c.main_component();
    // clear margin: room for an inspection point at the standoff distance outside the blob
    let margin = ((s64.separation / s64.resolution).ceil() as usize).max(2) + 1;
    let clear = (s64.clearance / s64.resolution).ceil() as usize;
    let placeable = |c: &Canvas, x: usize, y: usize| c.open_square(x, y, margin) && c.clear_of_obstacles(x, y, clear);

    let preferred = match spec.template {
        Template::Cave => {
            let ox = (s64.width - (s64.width / 20.0).floor() * 20.0) / 2.0;
            let oy = (s64.height - (s64.height / 20.0).floor() * 20.0) / 2.0;
            (ox + 10.0, oy + 10.0)
        }
        _ => (1.0, 1.0),
    };
    let depot_cell = nearest_cell(&c, &main, preferred, |x, y| placeable(&c, x, y))
        .ok_or_else(|| Error::Degenerate("no room for a depot in the generated map".into()))?;
    c.dry_pad(depot_cell.0, depot_cell.1, margin);

    let mut centres: Vec<(usize, usize)> = Vec::with_capacity(spec.tasks);
    let spacing = 5usize;
    let far_from = |x: usize, y: usize, (cx, cy): (usize, usize), d: usize| x.abs_diff(cx) >= d || y.abs_diff(cy) >= d;
    let attempts = spec.tasks * 4000;
    for _ in 0..attempts {
        if centres.len() == spec.tasks {
            break;
        }
        let (x, y) = (rng.gen_range(0..nx), rng.gen_range(0..ny));
        if !main[c.idx(x, y)]
            || !far_from(x, y, depot_cell, margin + 2)
            || !centres.iter().all(|&o| far_from(x, y, o, spacing))
            || !placeable(&c, x, y)
        {
            continue;
        }
        c.dry_pad(x, y, margin);
        for yy in y - 1..=y + 1 {
            for xx in x - 1..=x + 1 {
                let i = c.idx(xx, yy);
                c.labels[i] = Label::Task(0);
            }
        }
        centres.push((x, y));
    }
    if centres.len() < spec.tasks {
        return Err(Error::Degenerate(format!(
            "could only place {} of {} tasks on the {} map",
            centres.len(),
            spec.tasks,
            spec.template.name()
        )));
    }
    centres.sort_by_key(|&(x, y)| (y, x));

    let res = spec.resolution;
    let at = |(x, y): (usize, usize)| Point::new(T::from_usize_lossy(x), T::from_usize_lossy(y)) ;
    let centre = |cell: (usize, usize)| {
        let p = at(cell);
        Point::new((p.x + T::lit(0.5)) * res, (p.y + T::lit(0.5)) * res)
    };
    let grid = SemanticGrid::new(nx, ny, res, spec.template.classes(), c.labels)?;
    Ok(GeneratedMap { tasks: centres.iter().map(|&cell| centre(cell)).collect(), depot: centre(depot_cell), grid })
}

/// Cell of the main component closest to `target` (metres) that satisfies `ok`.
fn nearest_cell(
    c: &Canvas,
    main: &[bool],
    target: (f64, f64),
    ok: impl Fn(usize, usize) -> bool,
) -> Option<(usize, usize)> {
    let mut best: Option<(f64, (usize, usize))> = None;
    for y in 0..c.ny {
        for x in 0..c.nx {
            if !main[c.idx(x, y)] {
                continue;
            }
            let d = ((x as f64 + 0.5) * c.res - target.0).powi(2) + ((y as f64 + 0.5) * c.res - target.1).powi(2);
            if best.map_or(true, |(bd, _)| d < bd) && ok(x, y) {
                best = Some((d, (x, y)));
            }
        }
    }
    best.map(|(_, cell)| cell)
}
