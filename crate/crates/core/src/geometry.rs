//! Planar points and polylines in metric coordinates.

use serde::{Deserialize, Serialize};

use crate::num::Real;

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Point<T> {
    pub x: T,
    pub y: T,
}

impl<T: Real> Point<T> {
    pub fn new(x: T, y: T) -> Self {
        Point { x, y }
    }

    pub fn dist(&self, other: &Self) -> T {
        self.dist_sq(other).sqrt()
    }

    pub fn dist_sq(&self, other: &Self) -> T {
        let dx = self.x - other.x;
        let dy = self.y - other.y;
        dx * dx + dy * dy
    }

    /// Linear interpolation, `t = 0` at `self` and `t = 1` at `other`.
    pub fn lerp(&self, other: &Self, t: T) -> Self {
        Point::new(self.x + (other.x - self.x) * t, self.y + (other.y - self.y) * t)
    }

    pub fn midpoint(&self, other: &Self) -> Self {
        self.lerp(other, T::lit(0.5))
    }
}

/// Arc length of a polyline.
pub fn polyline_length<T: Real>(pts: &[Point<T>]) -> T {
    pts.windows(2).map(|w| w[0].dist(&w[1])).sum()
}

/// Resamples a polyline so consecutive samples are at most `spacing` apart.
///
/// Every original vertex is kept; each segment is split into the smallest number
/// of equal pieces that satisfies the spacing bound.
pub fn resample<T: Real>(pts: &[Point<T>], spacing: T) -> Vec<Point<T>> {
    assert!(spacing > T::zero(), "spacing must be positive");
    let mut out = Vec::with_capacity(pts.len());
    if let Some(first) = pts.first() {
        out.push(*first);
    }
    for w in pts.windows(2) {
        let len = w[0].dist(&w[1]);
        let pieces = (len / spacing).ceil().to_usize().unwrap_or(1).max(1);
        let n = T::from_usize_lossy(pieces);
        for k in 1..=pieces {
            if k == pieces {
                out.push(w[1]);
            } else {
                out.push(w[0].lerp(&w[1], T::from_usize_lossy(k) / n));
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn resample_respects_spacing_and_keeps_vertices() {
        let pts = vec![Point::new(0.0f64, 0.0), Point::new(1.0, 0.0), Point::new(1.0, 0.35)];
        let s = resample(&pts, 0.1);
        assert!(s.windows(2).all(|w| w[0].dist(&w[1]) <= 0.1 + 1e-12));
        assert_eq!(s.first(), pts.first());
        assert_eq!(s.last(), pts.last());
        assert!(s.contains(&pts[1]));
        assert!((polyline_length(&s) - polyline_length(&pts)).abs() < 1e-12);
    }

    #[test]
    fn degenerate_segment_kept_once() {
        let pts = vec![Point::new(1.0f32, 1.0), Point::new(1.0, 1.0)];
        assert_eq!(resample(&pts, 0.5).len(), 2);
    }
}
