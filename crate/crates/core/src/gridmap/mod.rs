//! Semantic grid maps: class configuration, per-cell labels and the obstacle
//! distance field.
//!
//! Cell `(x, y)` covers `[x·r, (x+1)·r) × [y·r, (y+1)·r)` in metres, where `r` is the
//! grid resolution. Row 0 is the minimum `y`.

mod edf;
mod voxel;

pub use edf::{compute_edf, squared_edf};
pub use voxel::{assign_label_categorical, assign_label_embedding, collapse_voxels, Semantics, Voxel, VoxelStack};

use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::Point;
use crate::num::Real;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EnvClass {
    pub name: String,
    #[serde(default)]
    pub impedes_traversal: bool,
}

impl EnvClass {
    pub fn new(name: &str, impedes_traversal: bool) -> Self {
        EnvClass { name: name.to_string(), impedes_traversal }
    }
}

/// Semantic classes known to the map.
///
/// The canonical class order used by categorical vectors and class embeddings is
/// task classes, then environment classes, then the free class.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassConfig<T> {
    pub task_classes: Vec<String>,
    pub environment_classes: Vec<EnvClass>,
    pub free_class: String,
    pub obstacle_height_threshold: T,
}

impl<T: Real> ClassConfig<T> {
    pub fn validate(&self) -> Result<()> {
        let mut seen = HashSet::new();
        let names = self
            .task_classes
            .iter()
            .map(String::as_str)
            .chain(self.environment_classes.iter().map(|e| e.name.as_str()));
        for name in names {
            if name.is_empty() {
                return Err(Error::Config("empty class name".into()));
            }
            if !seen.insert(name) {
                return Err(Error::Config(format!("duplicate class name `{name}`")));
            }
        }
        if seen.contains(self.free_class.as_str()) {
            return Err(Error::Config(format!(
                "free class `{}` must not also be a task or environment class",
                self.free_class
            )));
        }
        if !(self.obstacle_height_threshold > T::zero()) {
            return Err(Error::Config("obstacle_height_threshold must be positive".into()));
        }
        if self.task_classes.len() + self.environment_classes.len() >= u16::MAX as usize {
            return Err(Error::Config("too many classes".into()));
        }
        Ok(())
    }

    /// Number of entries in a categorical vector.
    pub fn num_classes(&self) -> usize {
        self.task_classes.len() + self.environment_classes.len() + 1
    }

    /// Label for the class at `index` in canonical order.
    pub fn label_at(&self, index: usize) -> Option<Label> {
        let nt = self.task_classes.len();
        let ne = self.environment_classes.len();
        if index < nt {
            Some(Label::Task(index as u16))
        } else if index < nt + ne {
            Some(Label::Env((index - nt) as u16))
        } else if index == nt + ne {
            Some(Label::Free)
        } else {
            None
        }
    }

    pub fn label_name(&self, label: Label) -> &str {
        match label {
            Label::Obstacle => "obstacle",
            Label::Free => &self.free_class,
            Label::Task(i) => &self.task_classes[i as usize],
            Label::Env(i) => &self.environment_classes[i as usize].name,
        }
    }

    pub fn label_by_name(&self, name: &str) -> Option<Label> {
        if name == "obstacle" {
            return Some(Label::Obstacle);
        }
        if name == self.free_class {
            return Some(Label::Free);
        }
        if let Some(i) = self.task_classes.iter().position(|c| c == name) {
            return Some(Label::Task(i as u16));
        }
        self.environment_classes.iter().position(|c| c.name == name).map(|i| Label::Env(i as u16))
    }

    /// Whether a cell with this label counts as free space for planning.
    ///
    /// Non-impeding environment classes keep their label but plan like free cells.
    pub fn collapses_to_free(&self, label: Label) -> bool {
        match label {
            Label::Free => true,
            Label::Env(i) => !self.environment_classes[i as usize].impedes_traversal,
            Label::Obstacle | Label::Task(_) => false,
        }
    }

    pub fn is_impeding(&self, label: Label) -> bool {
        matches!(label, Label::Env(i) if self.environment_classes[i as usize].impedes_traversal)
    }
}

/// Semantic label of a grid cell.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Label {
    Obstacle,
    Free,
    Task(u16),
    Env(u16),
}

/// 2D semantic raster with an optional obstacle distance field.
#[derive(Debug, Clone, PartialEq)]
pub struct SemanticGrid<T> {
    nx: usize,
    ny: usize,
    resolution: T,
    classes: ClassConfig<T>,
    labels: Vec<Label>,
    edf: Option<Vec<T>>,
}

impl<T: Real> SemanticGrid<T> {
    /// Builds a grid from row-major labels (`x` fastest, row 0 = minimum `y`).
    pub fn new(nx: usize, ny: usize, resolution: T, classes: ClassConfig<T>, labels: Vec<Label>) -> Result<Self> {
        if nx == 0 || ny == 0 {
            return Err(Error::Config("grid dimensions must be positive".into()));
        }
        if !(resolution > T::zero()) || !resolution.is_finite() {
            return Err(Error::Config("grid resolution must be positive".into()));
        }
        if labels.len() != nx * ny {
            return Err(Error::Config(format!("expected {} labels, got {}", nx * ny, labels.len())));
        }
        classes.validate()?;
        for l in &labels {
            let ok = match *l {
                Label::Task(i) => (i as usize) < classes.task_classes.len(),
                Label::Env(i) => (i as usize) < classes.environment_classes.len(),
                _ => true,
            };
            if !ok {
                return Err(Error::Config(format!("label {l:?} not in class configuration")));
            }
        }
        Ok(SemanticGrid { nx, ny, resolution, classes, labels, edf: None })
    }

    /// A grid where every cell carries the free label.
    pub fn filled(nx: usize, ny: usize, resolution: T, classes: ClassConfig<T>) -> Result<Self> {
        Self::new(nx, ny, resolution, classes, vec![Label::Free; nx * ny])
    }

    pub fn nx(&self) -> usize {
        self.nx
    }

    pub fn ny(&self) -> usize {
        self.ny
    }

    pub fn resolution(&self) -> T {
        self.resolution
    }

    pub fn classes(&self) -> &ClassConfig<T> {
        &self.classes
    }

    pub fn labels(&self) -> &[Label] {
        &self.labels
    }

    /// Extent in metres.
    pub fn width(&self) -> T {
        T::from_usize_lossy(self.nx) * self.resolution
    }

    pub fn height(&self) -> T {
        T::from_usize_lossy(self.ny) * self.resolution
    }

    #[inline]
    pub fn index(&self, x: usize, y: usize) -> usize {
        y * self.nx + x
    }

    #[inline]
    pub fn label(&self, x: usize, y: usize) -> Label {
        self.labels[self.index(x, y)]
    }

    #[inline]
    pub fn is_obstacle(&self, x: usize, y: usize) -> bool {
        self.label(x, y) == Label::Obstacle
    }

    pub fn center(&self, x: usize, y: usize) -> Point<T> {
        let h = T::lit(0.5);
        Point::new((T::from_usize_lossy(x) + h) * self.resolution, (T::from_usize_lossy(y) + h) * self.resolution)
    }

    /// Cell containing `p`, if inside the grid.
    pub fn cell_of(&self, p: &Point<T>) -> Option<(usize, usize)> {
        if !(p.x >= T::zero() && p.y >= T::zero()) {
            return None;
        }
        let cx = (p.x / self.resolution).floor().to_usize()?;
        let cy = (p.y / self.resolution).floor().to_usize()?;
        // points on the far boundary belong to the last cell
        let cx = if cx == self.nx && p.x <= self.width() { cx - 1 } else { cx };
        let cy = if cy == self.ny && p.y <= self.height() { cy - 1 } else { cy };
        (cx < self.nx && cy < self.ny).then_some((cx, cy))
    }

    pub fn contains(&self, p: &Point<T>) -> bool {
        self.cell_of(p).is_some()
    }

    pub fn has_edf(&self) -> bool {
        self.edf.is_some()
    }

    /// Distance (metres) from cell `(x, y)` to the nearest obstacle cell centre.
    ///
    /// `+∞` when the grid has no obstacles. Panics if the field has not been computed.
    pub fn edf(&self, x: usize, y: usize) -> T {
        self.edf.as_ref().expect("distance field not computed")[self.index(x, y)]
    }

    pub fn edf_values(&self) -> Option<&[T]> {
        self.edf.as_deref()
    }

    pub(crate) fn with_edf_values(mut self, edf: Vec<T>) -> Self {
        debug_assert_eq!(edf.len(), self.labels.len());
        self.edf = Some(edf);
        self
    }

    /// Copy of this grid with a single label replaced. Drops the distance field.
    pub fn with_label(&self, x: usize, y: usize, label: Label) -> Self {
        let mut labels = self.labels.clone();
        let i = self.index(x, y);
        labels[i] = label;
        SemanticGrid { labels, edf: None, ..self.clone() }
    }

    pub fn collapses_to_free(&self, x: usize, y: usize) -> bool {
        self.classes.collapses_to_free(self.label(x, y))
    }

    /// Cells carrying the given task class, in `(y, x)` scan order.
    pub fn task_cells(&self, class: u16) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for y in 0..self.ny {
            for x in 0..self.nx {
                if self.label(x, y) == Label::Task(class) {
                    out.push((x, y));
                }
            }
        }
        out
    }

    pub fn count(&self, label: Label) -> usize {
        self.labels.iter().filter(|&&l| l == label).count()
    }
}
