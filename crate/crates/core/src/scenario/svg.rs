//! Layered SVG rendering of a map, its tasks, roadmap and routes.
//!
//! Drawing units are grid cells, row 0 at the top. Coordinates are printed with
//! three decimals so output is byte-stable.

use std::fmt::Write as _;

use crate::geometry::Point;
use crate::gridmap::{Label, SemanticGrid};
use crate::num::Real;
use crate::roadmap::Roadmap;

#[derive(Debug, Clone, PartialEq)]
pub struct RenderRoute<T> {
    pub robot: String,
    pub polyline: Vec<Point<T>>,
}

const OBSTACLE: &str = "#000000";
const IMPEDING: &str = "#8b5a2b";
const TASK_CELL: &str = "#ffc0cb";
const TASK_DOT: &str = "#ff1493";
const DEPOT: &str = "#e00000";
const TERRAIN: [&str; 6] = ["#b5d99c", "#e3d9a6", "#a7c7e7", "#d8c3e8", "#c9e4de", "#f2d0a9"];
const ROUTES: [&str; 8] = ["#1f77b4", "#2ca02c", "#ff7f0e", "#9467bd", "#17becf", "#bcbd22", "#8c564b", "#7f7f7f"];

fn fill<T: Real>(grid: &SemanticGrid<T>, l: Label) -> Option<&'static str> {
    match l {
        Label::Free => None,
        Label::Obstacle => Some(OBSTACLE),
        Label::Task(_) => Some(TASK_CELL),
        Label::Env(_) if grid.classes().is_impeding(l) => Some(IMPEDING),
        Label::Env(i) => Some(TERRAIN[i as usize % TERRAIN.len()]),
    }
}

/// Renders the map with optional overlays. Each non-empty route becomes one
/// polyline.
pub fn render_svg<T: Real>(
    grid: &SemanticGrid<T>,
    tasks: &[Point<T>],
    depots: &[Point<T>],
    roadmap: Option<&Roadmap<T>>,
    routes: &[RenderRoute<T>],
) -> String {
    let (nx, ny) = (grid.nx(), grid.ny());
    let scale = (800.0 / nx.max(ny) as f64).clamp(1.0, 24.0);
    let res = grid.resolution().to_f64_lossy();
    let cx = |p: &Point<T>| p.x.to_f64_lossy() / res;
    let cy = |p: &Point<T>| p.y.to_f64_lossy() / res;
    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{:.3}" height="{:.3}" viewBox="0 0 {nx} {ny}">"#,
        nx as f64 * scale,
        ny as f64 * scale
    );
    let _ = writeln!(s, r##"<rect id="background" x="0" y="0" width="{nx}" height="{ny}" fill="#ffffff"/>"##);

    s.push_str("<g id=\"terrain\" shape-rendering=\"crispEdges\">\n");
    for y in 0..ny {
        let mut x = 0;
        while x < nx {
            let l = grid.label(x, y);
            let start = x;
            while x < nx && grid.label(x, y) == l {
                x += 1;
            }
            if let Some(c) = fill(grid, l) {
                let _ = writeln!(s, r#"<rect x="{start}" y="{y}" width="{}" height="1" fill="{c}"/>"#, x - start);
            }
        }
    }
    s.push_str("</g>\n");

    if let Some(rm) = roadmap {
        s.push_str("<g id=\"roadmap\" stroke=\"#999999\" stroke-width=\"0.150\" opacity=\"0.6\">\n");
        for e in &rm.edges {
            let [a, b] = rm.edge_polyline(e);
            let _ = writeln!(s, r#"<line x1="{:.3}" y1="{:.3}" x2="{:.3}" y2="{:.3}"/>"#, cx(&a), cy(&a), cx(&b), cy(&b));
        }
        s.push_str("</g>\n");
    }

    s.push_str("<g id=\"routes\" fill=\"none\" stroke-width=\"0.600\" stroke-linejoin=\"round\">\n");
    for (k, r) in routes.iter().enumerate().filter(|(_, r)| r.polyline.len() >= 2) {
        let pts: Vec<String> = r.polyline.iter().map(|p| format!("{:.3},{:.3}", cx(p), cy(p))).collect();
        let _ = writeln!(
            s,
            r#"<polyline data-robot="{}" stroke="{}" points="{}"/>"#,
            escape(&r.robot),
            ROUTES[k % ROUTES.len()],
            pts.join(" ")
        );
    }
    s.push_str("</g>\n");

    let _ = writeln!(s, r#"<g id="tasks" fill="{TASK_DOT}">"#);
    for p in tasks {
        let _ = writeln!(s, r#"<circle cx="{:.3}" cy="{:.3}" r="1.200"/>"#, cx(p), cy(p));
    }
    s.push_str("</g>\n");

    let _ = writeln!(s, r##"<g id="depots" fill="{DEPOT}" stroke="#000000" stroke-width="0.100">"##);
    for p in depots {
        let _ = writeln!(s, r#"<polygon points="{}"/>"#, star(cx(p), cy(p), 2.5));
    }
    s.push_str("</g>\n</svg>\n");
    s
}

fn star(x: f64, y: f64, r: f64) -> String {
    (0..10)
        .map(|i| {
            let rad = if i % 2 == 0 { r } else { r * 0.45 };
            let a = std::f64::consts::PI * (i as f64 / 5.0 - 0.5);
            format!("{:.3},{:.3}", x + rad * a.cos(), y + rad * a.sin())
        })
        .collect::<Vec<_>>()
        .join(" ")
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gridmap::test_support::{classes, grid};

    #[test]
    fn empty_map_is_background_only() {
        let g = SemanticGrid::filled(4, 3, 0.5, classes()).unwrap();
        let s = render_svg(&g, &[], &[], None, &[]);
        assert!(s.starts_with("<svg") && s.ends_with("</svg>\n"));
        assert_eq!(s.matches("<rect").count(), 1);
        assert!(!s.contains("<circle") && !s.contains("<polyline"));
    }

    #[test]
    fn one_polyline_per_nonempty_route() {
        let g = grid(&["....", ".#..", "...."], 1.0);
        let p = |x, y| Point::new(x, y);
        let routes = vec![
            RenderRoute { robot: "a".into(), polyline: vec![p(0.5, 0.5), p(3.5, 0.5)] },
            RenderRoute { robot: "b".into(), polyline: vec![p(0.5, 0.5)] },
            RenderRoute { robot: "c".into(), polyline: vec![p(0.5, 0.5), p(0.5, 2.5), p(3.5, 2.5)] },
        ];
        let s = render_svg(&g, &[p(3.5, 0.5)], &[p(0.5, 0.5)], None, &routes);
        assert_eq!(s.matches("<polyline").count(), 2);
        assert_eq!(s.matches("<circle").count(), 1);
        assert!(s.contains(OBSTACLE));
        assert_eq!(s, render_svg(&g, &[p(3.5, 0.5)], &[p(0.5, 0.5)], None, &routes));
    }
}
