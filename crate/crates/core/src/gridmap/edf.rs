//! Exact Euclidean distance transform (Meijster, Roerdink & Hesselink), using
//! obstacle cell centres as sites. All intermediate values are integers, so the
//! squared distances are exact.

use super::{Label, SemanticGrid};
use crate::num::Real;

/// Squared distance, in cells², from each cell to the nearest obstacle cell.
///
/// Returns `None` when the grid has no obstacle cells.
pub fn squared_edf<T: Real>(grid: &SemanticGrid<T>) -> Option<Vec<u64>> {
    let (nx, ny) = (grid.nx(), grid.ny());
    if !grid.labels().contains(&Label::Obstacle) {
        return None;
    }
    let inf = (nx + ny) as i64;

    // column pass: vertical distance to the nearest obstacle in the same column
    let mut g = vec![0i64; nx * ny];
    for x in 0..nx {
        let idx = |y: usize| y * nx + x;
        g[idx(0)] = if grid.is_obstacle(x, 0) { 0 } else { inf };
        for y in 1..ny {
            g[idx(y)] = if grid.is_obstacle(x, y) { 0 } else { (g[idx(y - 1)] + 1).min(inf) };
        }
        for y in (0..ny - 1).rev() {
            if g[idx(y + 1)] < g[idx(y)] {
                g[idx(y)] = g[idx(y + 1)] + 1;
            }
        }
    }

    // row pass: lower envelope of parabolas
    let mut out = vec![0u64; nx * ny];
    let mut s = vec![0i64; nx];
    let mut t = vec![0i64; nx];
    for y in 0..ny {
        let row = &g[y * nx..(y + 1) * nx];
        let f = |x: i64, i: i64| (x - i) * (x - i) + row[i as usize] * row[i as usize];
        let sep = |i: i64, u: i64| {
            let gi = row[i as usize];
            let gu = row[u as usize];
            (u * u - i * i + gu * gu - gi * gi).div_euclid(2 * (u - i))
        };
        let m = nx as i64;
        let mut q: i64 = 0;
        s[0] = 0;
        t[0] = 0;
        for u in 1..m {
            while q >= 0 && f(t[q as usize], s[q as usize]) > f(t[q as usize], u) {
                q -= 1;
            }
            if q < 0 {
                q = 0;
                s[0] = u;
            } else {
                let w = 1 + sep(s[q as usize], u);
                if w < m {
                    q += 1;
                    s[q as usize] = u;
                    t[q as usize] = w;
                }
            }
        }
        for u in (0..m).rev() {
            out[y * nx + u as usize] = f(u, s[q as usize]) as u64;
            if u == t[q as usize] {
                q -= 1;
            }
        }
    }
    Some(out)
}

/// Returns a copy of `grid` with its distance field populated.
///
/// Distances are in metres, measured centre to centre. A grid without obstacles
/// gets `+∞` everywhere.
pub fn compute_edf<T: Real>(grid: &SemanticGrid<T>) -> SemanticGrid<T> {
    let res = grid.resolution();
    let values = match squared_edf(grid) {
        Some(sq) => sq.into_iter().map(|d2| distance_from_squared(d2, res)).collect(),
        None => vec![T::infinity(); grid.nx() * grid.ny()],
    };
    grid.clone().with_edf_values(values)
}

/// Metric distance for a squared cell distance.
#[inline]
pub fn distance_from_squared<T: Real>(d2: u64, resolution: T) -> T {
    resolution * T::from_u64(d2).expect("representable").sqrt()
}
