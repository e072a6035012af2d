use crate::error::{Error, Result};
use crate::geometry::Point;
use crate::gridmap::SemanticGrid;
use crate::num::Real;

/// True iff the segment `a → b` crosses no obstacle cell.
///
/// Cells are enumerated exactly along the segment (grid traversal), so every
/// sample on it, at any spacing, lands on a non-obstacle cell. A segment passing
/// exactly through a cell corner must clear both cells beside the corner.
pub fn line_of_sight<T: Real>(grid: &SemanticGrid<T>, a: &Point<T>, b: &Point<T>) -> Result<bool> {
    for p in [a, b] {
        if !grid.contains(p) {
            return Err(Error::OutOfBounds { x: p.x.to_f64_lossy(), y: p.y.to_f64_lossy() });
        }
    }
    Ok(segment_clear(grid, a, b))
}

/// Unchecked variant of [`line_of_sight`]; endpoints outside the grid count as blocked.
pub(crate) fn segment_clear<T: Real>(grid: &SemanticGrid<T>, a: &Point<T>, b: &Point<T>) -> bool {
    let (Some((mut cx, mut cy)), Some((ex, ey))) = (grid.cell_of(a), grid.cell_of(b)) else {
        return false;
    };
    if grid.is_obstacle(cx, cy) {
        return false;
    }
    let res = grid.resolution();
    let dx = b.x - a.x;
    let dy = b.y - a.y;
    let axis = |d: T, p: T, c: usize| -> (isize, T, T) {
        if d > T::zero() {
            let next = T::from_usize_lossy(c + 1) * res;
            (1, (next - p) / d, res / d)
        } else if d < T::zero() {
            let next = T::from_usize_lossy(c) * res;
            (-1, (next - p) / d, -res / d)
        } else {
            (0, T::infinity(), T::infinity())
        }
    };
    let (sx, mut tx, ddx) = axis(dx, a.x, cx);
    let (sy, mut ty, ddy) = axis(dy, a.y, cy);
    let blocked = |x: isize, y: isize| -> bool {
        x < 0 || y < 0 || x as usize >= grid.nx() || y as usize >= grid.ny() || grid.is_obstacle(x as usize, y as usize)
    };
    // bounded by the Manhattan cell distance, which also guards against float drift
    let max_steps = cx.abs_diff(ex) + cy.abs_diff(ey) + 2;
    for _ in 0..max_steps {
        if (cx, cy) == (ex, ey) {
            return true;
        }
        let (nx, ny) = if tx < ty {
            tx += ddx;
            (cx as isize + sx, cy as isize)
        } else if ty < tx {
            ty += ddy;
            (cx as isize, cy as isize + sy)
        } else {
            // exact corner crossing
            if blocked(cx as isize + sx, cy as isize) || blocked(cx as isize, cy as isize + sy) {
                return false;
            }
            tx += ddx;
            ty += ddy;
            (cx as isize + sx, cy as isize + sy)
        };
        if tx.min(ty) > T::one() && (nx, ny) != (ex as isize, ey as isize) {
            // stepped past the end point through rounding; the end cell decides
            return !grid.is_obstacle(ex, ey);
        }
        if blocked(nx, ny) {
            return false;
        }
        cx = nx as usize;
        cy = ny as usize;
    }
    (cx, cy) == (ex, ey) && !grid.is_obstacle(ex, ey)
}

/// Sampling check at a fixed spacing; used as an independent reference in tests.
#[cfg(test)]
pub(crate) fn sampled_clear<T: Real>(grid: &SemanticGrid<T>, a: &Point<T>, b: &Point<T>, spacing: T) -> bool {
    let pieces = (a.dist(b) / spacing).ceil().to_usize().unwrap_or(0).max(1);
    let n = T::from_usize_lossy(pieces);
    (0..=pieces).all(|k| {
        let p = if k == pieces { *b } else { a.lerp(b, T::from_usize_lossy(k) / n) };
        matches!(grid.cell_of(&p), Some((x, y)) if !grid.is_obstacle(x, y))
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gridmap::test_support::grid;
    use crate::gridmap::Label;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn open_grid_is_visible() {
        let g = grid(&["....", "....", "...."], 0.5);
        assert!(line_of_sight(&g, &Point::new(0.1, 0.1), &Point::new(1.9, 1.4)).unwrap());
    }

    #[test]
    fn obstacle_blocks() {
        let g = grid(&["..#..", "..#..", "..#.."], 1.0);
        assert!(!line_of_sight(&g, &Point::new(0.5, 1.5), &Point::new(4.5, 1.5)).unwrap());
        assert!(line_of_sight(&g, &Point::new(0.5, 1.5), &Point::new(1.5, 0.5)).unwrap());
    }

    #[test]
    fn out_of_bounds_is_an_error() {
        let g = grid(&["...."], 1.0);
        assert!(line_of_sight(&g, &Point::new(0.5, 0.5), &Point::new(5.0, 0.5)).is_err());
    }

    #[test]
    fn matches_supersampled_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let (nx, ny) = (30, 30);
        let labels = (0..nx * ny).map(|_| if rng.gen_bool(0.03) { Label::Obstacle } else { Label::Free }).collect();
        let g = SemanticGrid::new(nx, ny, 0.2, crate::gridmap::test_support::classes(), labels).unwrap();
        for _ in 0..100 {
            let a = Point::new(rng.gen_range(0.0..6.0), rng.gen_range(0.0..6.0));
            let b = Point::new(rng.gen_range(0.0..6.0), rng.gen_range(0.0..6.0));
            assert_eq!(line_of_sight(&g, &a, &b).unwrap(), sampled_clear(&g, &a, &b, 0.02), "{a:?} -> {b:?}");
        }
    }
}
