//! Plain-text grid maps.
//!
//! One character per cell, first line is row 0 (minimum `y`). `#` is an obstacle,
//! `.` is free space, lowercase letters are environment classes and uppercase
//! letters task classes; the legend binds letters to class names.

use serde::{Deserialize, Serialize};

use super::SCHEMA_VERSION;
use crate::error::{Error, Result};
use crate::gridmap::{ClassConfig, EnvClass, Label, SemanticGrid};
use crate::num::Real;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LegendSymbol {
    pub symbol: char,
    pub name: String,
    /// Only meaningful for environment classes (lowercase symbols).
    #[serde(default)]
    pub impedes_traversal: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound(deserialize = "T: Real"))]
pub struct Legend<T> {
    pub schema_version: u32,
    pub resolution: T,
    pub free_class: String,
    pub obstacle_height_threshold: T,
    pub symbols: Vec<LegendSymbol>,
}

impl<T: Real> Legend<T> {
    /// Class configuration in legend order: uppercase symbols become task
    /// classes, lowercase ones environment classes.
    pub fn class_config(&self) -> Result<ClassConfig<T>> {
        let mut task_classes = Vec::new();
        let mut environment_classes = Vec::new();
        for (i, s) in self.symbols.iter().enumerate() {
            let at = || format!("legend.symbols[{i}]");
            if s.symbol.is_ascii_uppercase() {
                task_classes.push(s.name.clone());
            } else if s.symbol.is_ascii_lowercase() {
                environment_classes.push(EnvClass::new(&s.name, s.impedes_traversal));
            } else {
                return Err(Error::validation(at(), format!("symbol `{}` must be an ASCII letter", s.symbol)));
            }
            if self.symbols[..i].iter().any(|o| o.symbol == s.symbol) {
                return Err(Error::validation(at(), format!("duplicate symbol `{}`", s.symbol)));
            }
        }
        let cfg = ClassConfig {
            task_classes,
            environment_classes,
            free_class: self.free_class.clone(),
            obstacle_height_threshold: self.obstacle_height_threshold,
        };
        cfg.validate()?;
        Ok(cfg)
    }
}

/// Parses map text with its legend.
pub fn parse_ascii_map<T: Real>(text: &str, legend: &Legend<T>, source: &str) -> Result<SemanticGrid<T>> {
    if legend.schema_version != SCHEMA_VERSION {
        return Err(Error::validation("legend.schema_version", format!("unsupported version {}", legend.schema_version)));
    }
    let cfg = legend.class_config()?;
    let lookup = |c: char| -> Option<Label> {
        match c {
            '#' => Some(Label::Obstacle),
            '.' => Some(Label::Free),
            _ => {
                let name = &legend.symbols.iter().find(|s| s.symbol == c)?.name;
                cfg.label_by_name(name)
            }
        }
    };
    let rows: Vec<&str> = text.lines().map(|l| l.trim_end_matches('\r')).collect();
    let rows = &rows[..rows.iter().rposition(|r| !r.is_empty()).map_or(0, |i| i + 1)];
    if rows.is_empty() {
        return Err(Error::Parse { location: source.into(), message: "map has no rows".into() });
    }
    let nx = rows[0].chars().count();
    let mut labels = Vec::with_capacity(nx * rows.len());
    for (ln, row) in rows.iter().enumerate() {
        let n = row.chars().count();
        if n != nx {
            return Err(Error::Parse {
                location: format!("{source}:{}", ln + 1),
                message: format!("row has {n} cells, expected {nx}"),
            });
        }
        for (col, c) in row.chars().enumerate() {
            let label = lookup(c).ok_or_else(|| Error::Parse {
                location: format!("{source}:{}:{}", ln + 1, col + 1),
                message: format!("unknown symbol `{c}`"),
            })?;
            labels.push(label);
        }
    }
    SemanticGrid::new(nx, rows.len(), legend.resolution, cfg, labels)
}

/// Writes a grid as map text and legend; symbols follow class order.
pub fn write_ascii_map<T: Real>(grid: &SemanticGrid<T>) -> Result<(String, Legend<T>)> {
    let cfg = grid.classes();
    if cfg.task_classes.len() > 26 || cfg.environment_classes.len() > 26 {
        return Err(Error::Config("at most 26 task and 26 environment classes fit the text format".into()));
    }
    let mut symbols = Vec::new();
    for (i, name) in cfg.task_classes.iter().enumerate() {
        symbols.push(LegendSymbol { symbol: (b'A' + i as u8) as char, name: name.clone(), impedes_traversal: false });
    }
    for (i, e) in cfg.environment_classes.iter().enumerate() {
        symbols.push(LegendSymbol { symbol: (b'a' + i as u8) as char, name: e.name.clone(), impedes_traversal: e.impedes_traversal });
    }
    let mut text = String::with_capacity((grid.nx() + 1) * grid.ny());
    for y in 0..grid.ny() {
        for x in 0..grid.nx() {
            text.push(match grid.label(x, y) {
                Label::Obstacle => '#',
                Label::Free => '.',
                Label::Task(i) => (b'A' + i as u8) as char,
                Label::Env(i) => (b'a' + i as u8) as char,
            });
        }
        text.push('\n');
    }
    let legend = Legend {
        schema_version: SCHEMA_VERSION,
        resolution: grid.resolution(),
        free_class: cfg.free_class.clone(),
        obstacle_height_threshold: cfg.obstacle_height_threshold,
        symbols,
    };
    Ok((text, legend))
}
