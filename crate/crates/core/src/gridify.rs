//! Overlap-free placement of 2-D points on a `2^r x 2^r` grid along a
//! Hilbert curve.
//!
//! Each point is quantized to a cell, the cell is mapped to its curve index,
//! and items are placed in `(index, id)` order, each taking the first free
//! curve index at or after its own (wrapping to 0 past the end).

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::embed::Layout2D;
use crate::error::{Error, Result};
use crate::scalar::Real;

/// Largest supported level; `4^31` still fits in a `u64` index.
pub const MAX_LEVEL: u32 = 31;
pub const CURVE: &str = "hilbert";
pub const COLLISION_POLICY: &str = "hilbert/forward-wrap";

fn check_level(r: u32) -> Result<()> {
    if r > MAX_LEVEL {
        return Err(Error::invalid(format!("level {r} exceeds {MAX_LEVEL}")));
    }
    Ok(())
}

/// Number of cells at level `r`.
pub fn cell_count(r: u32) -> u64 {
    1u64 << (2 * r)
}

// Reflect/transpose the sub-square so the recursion below sees the
// canonical orientation.
fn rotate(n: u64, x: &mut u64, y: &mut u64, rx: u64, ry: u64) {
    if ry == 0 {
        if rx == 1 {
            *x = n - 1 - *x;
            *y = n - 1 - *y;
        }
        std::mem::swap(x, y);
    }
}

/// Cell visited at step `d` of the order-`r` curve. The curve starts at
/// (0,0), steps to (0,1), and ends at (2^r - 1, 0).
pub fn hilbert_d2xy(r: u32, d: u64) -> Result<(u32, u32)> {
    check_level(r)?;
    if d >= cell_count(r) {
        return Err(Error::invalid(format!("index {d} out of range for level {r}")));
    }
    let n = 1u64 << r;
    let (mut x, mut y) = (0u64, 0u64);
    let mut t = d;
    let mut s = 1u64;
    while s < n {
        let rx = 1 & (t / 2);
        let ry = 1 & (t ^ rx);
        rotate(s, &mut x, &mut y, rx, ry);
        x += s * rx;
        y += s * ry;
        t /= 4;
        s *= 2;
    }
    Ok((x as u32, y as u32))
}

/// Inverse of [`hilbert_d2xy`].
pub fn hilbert_xy2d(r: u32, x: u32, y: u32) -> Result<u64> {
    check_level(r)?;
    let n = 1u64 << r;
    let (mut x, mut y) = (x as u64, y as u64);
    if x >= n || y >= n {
        return Err(Error::invalid(format!("cell ({x}, {y}) out of range for level {r}")));
    }
    let mut d = 0u64;
    let mut s = n / 2;
    while s > 0 {
        let rx = u64::from(x & s > 0);
        let ry = u64::from(y & s > 0);
        d += s * s * ((3 * rx) ^ ry);
        rotate(n, &mut x, &mut y, rx, ry);
        s /= 2;
    }
    Ok(d)
}

/// Smallest level with `occupancy * 4^r >= n`.
pub fn choose_level(n: usize, occupancy: f64) -> Result<u32> {
    if n == 0 {
        return Err(Error::invalid("need at least one item"));
    }
    if !(occupancy > 0.0 && occupancy <= 1.0) {
        return Err(Error::invalid(format!("occupancy must be in (0, 1], got {occupancy}")));
    }
    (0..=MAX_LEVEL)
        .find(|&r| occupancy * cell_count(r) as f64 >= n as f64)
        .ok_or_else(|| Error::invalid(format!("{n} items exceed the largest grid")))
}

/// Min-max scales each axis to `[0, 2^r - 1e-9]` and floors. A zero-range
/// axis maps to 0.
pub fn quantize_points<T: Real>(layout: &Layout2D<T>, r: u32) -> Result<Vec<(u32, u32)>> {
    check_level(r)?;
    let side = (1u64 << r) as f64;
    let top = (1u64 << r) - 1;
    let mut bounds = [(f64::INFINITY, f64::NEG_INFINITY); 2];
    for p in &layout.coords {
        for (axis, b) in bounds.iter_mut().enumerate() {
            let v = p[axis].as_f64();
            if !v.is_finite() {
                return Err(Error::invalid("layout coordinates must be finite"));
            }
            b.0 = b.0.min(v);
            b.1 = b.1.max(v);
        }
    }
    let cell = |v: f64, (lo, hi): (f64, f64)| -> u32 {
        let range = hi - lo;
        if range <= 0.0 {
            return 0;
        }
        let scaled = (v - lo) / range * (side - 1e-9);
        (scaled.floor().max(0.0) as u64).min(top) as u32
    };
    Ok(layout
        .coords
        .iter()
        .map(|p| (cell(p[0].as_f64(), bounds[0]), cell(p[1].as_f64(), bounds[1])))
        .collect())
}

/// Collision-free cell per item.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GridAssignment {
    pub level: u32,
    pub curve: String,
    pub collision_policy: String,
    pub cells: BTreeMap<String, (u32, u32)>,
}

impl GridAssignment {
    pub fn side(&self) -> u32 {
        1 << self.level
    }
}

/// Next free curve index at or after `i`, with path compression.
struct FreeList {
    next: Vec<u64>,
}

impl FreeList {
    fn new(len: u64) -> Self {
        FreeList {
            next: (0..=len).collect(),
        }
    }

    fn find(&mut self, i: u64) -> u64 {
        let mut root = i;
        while self.next[root as usize] != root {
            root = self.next[root as usize];
        }
        let mut cur = i;
        while self.next[cur as usize] != root {
            let up = self.next[cur as usize];
            self.next[cur as usize] = root;
            cur = up;
        }
        root
    }

    fn take(&mut self, i: u64) {
        self.next[i as usize] = i + 1;
    }
}

pub fn assign_cells<T: Real>(layout: &Layout2D<T>, r: u32) -> Result<GridAssignment> {
    check_level(r)?;
    let capacity = cell_count(r);
    let n = layout.len();
    if capacity < n as u64 {
        return Err(Error::Capacity { capacity, items: n });
    }
    if capacity > (1u64 << 32) {
        return Err(Error::invalid(format!("level {r} is too large to index in memory")));
    }
    let quantized = quantize_points(layout, r)?;
    let mut order: Vec<(u64, &str)> = quantized
        .iter()
        .zip(&layout.ids)
        .map(|(&(x, y), id)| Ok((hilbert_xy2d(r, x, y)?, id.as_str())))
        .collect::<Result<_>>()?;
    order.sort();

    // slot `capacity` is the sentinel meaning "past the end"
    let mut free = FreeList::new(capacity);
    let mut cells = BTreeMap::new();
    for (target, id) in order {
        let mut slot = free.find(target);
        if slot == capacity {
            slot = free.find(0);
        }
        free.take(slot);
        if cells.insert(id.to_string(), hilbert_d2xy(r, slot)?).is_some() {
            return Err(Error::DuplicateId(id.to_string()));
        }
    }
    Ok(GridAssignment {
        level: r,
        curve: CURVE.to_string(),
        collision_policy: COLLISION_POLICY.to_string(),
        cells,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::collections::HashSet;

    fn layout(points: &[(f64, f64)]) -> Layout2D<f64> {
        Layout2D::new(
            (0..points.len()).map(|i| format!("p{i:03}")).collect(),
            points.iter().map(|&(x, y)| [x, y]).collect(),
        )
        .unwrap()
    }

    #[test]
    fn order_one_curve() {
        let cells: Vec<_> = (0..4).map(|d| hilbert_d2xy(1, d).unwrap()).collect();
        assert_eq!(cells, vec![(0, 0), (0, 1), (1, 1), (1, 0)]);
        assert_eq!(hilbert_xy2d(1, 0, 0).unwrap(), 0);
        assert_eq!(hilbert_xy2d(1, 1, 0).unwrap(), 3);
        assert!(hilbert_d2xy(1, 4).is_err());
        assert!(hilbert_xy2d(2, 4, 0).is_err());
    }

    #[test]
    fn origin_and_end() {
        for r in 0..=10 {
            assert_eq!(hilbert_d2xy(r, 0).unwrap(), (0, 0));
            let last = cell_count(r) - 1;
            assert_eq!(hilbert_d2xy(r, last).unwrap(), ((1 << r) - 1, 0));
        }
    }

    #[test]
    fn matches_recursive_construction() {
        for r in 0..=6 {
            let oracle = metalmap_testkit::hilbert_enumerate(r);
            for (d, &cell) in oracle.iter().enumerate() {
                assert_eq!(hilbert_d2xy(r, d as u64).unwrap(), cell, "r={r} d={d}");
            }
        }
    }

    #[test]
    fn unit_steps_level_two() {
        for d in 0..15 {
            let (x0, y0) = hilbert_d2xy(2, d).unwrap();
            let (x1, y1) = hilbert_d2xy(2, d + 1).unwrap();
            assert_eq!(x0.abs_diff(x1) + y0.abs_diff(y1), 1);
        }
    }

    #[test]
    fn levels() {
        assert_eq!(choose_level(1, 1.0).unwrap(), 0);
        assert_eq!(choose_level(4, 1.0).unwrap(), 1);
        assert_eq!(choose_level(5, 1.0).unwrap(), 2);
        assert_eq!(choose_level(16, 0.5).unwrap(), 3);
        assert!(choose_level(0, 1.0).is_err());
        assert!(choose_level(3, 0.0).is_err());
        assert!(choose_level(3, 1.5).is_err());
    }

    #[test]
    fn quantize_rules() {
        let same = layout(&[(2.0, 2.0), (2.0, 2.0), (2.0, 2.0)]);
        assert_eq!(quantize_points(&same, 3).unwrap(), vec![(0, 0); 3]);
        let ends = layout(&[(-1.0, 5.0), (3.0, 9.0)]);
        assert_eq!(quantize_points(&ends, 1).unwrap(), vec![(0, 0), (1, 1)]);
        assert_eq!(quantize_points(&ends, 0).unwrap(), vec![(0, 0), (0, 0)]);
    }

    #[test]
    fn distinct_cells_do_not_move() {
        let pts = layout(&[(0.0, 0.0), (1.0, 1.0), (0.0, 1.0), (1.0, 0.0)]);
        let quantized = quantize_points(&pts, 1).unwrap();
        let grid = assign_cells(&pts, 1).unwrap();
        for (id, q) in pts.ids.iter().zip(quantized) {
            assert_eq!(grid.cells[id], q);
        }
    }

    #[test]
    fn tie_goes_to_smaller_id() {
        let mut pts = layout(&[(0.0, 0.0), (0.0, 0.0), (1.0, 1.0)]);
        pts.ids = vec!["b".into(), "a".into(), "z".into()];
        let grid = assign_cells(&pts, 1).unwrap();
        assert_eq!(grid.cells["a"], (0, 0));
        assert_eq!(grid.cells["b"], (0, 1));
        assert_eq!(grid.cells["z"], (1, 1) /* quantized (1,1) is index 2 */);
    }

    #[test]
    fn wraps_past_the_end() {
        // two items on the last curve cell (1,0): the second wraps to index 0
        let mut pts = layout(&[(1.0, 0.0), (1.0, 0.0), (0.0, 1.0)]);
        pts.ids = vec!["a".into(), "b".into(), "c".into()];
        let grid = assign_cells(&pts, 1).unwrap();
        assert_eq!(grid.cells["c"], (0, 1));
        assert_eq!(grid.cells["a"], (1, 0));
        assert_eq!(grid.cells["b"], (0, 0));
    }

    #[test]
    fn capacity_error() {
        let pts = layout(&[(0.0, 0.0); 5]);
        assert!(matches!(assign_cells(&pts, 1), Err(Error::Capacity { .. })));
    }

    proptest! {
        #[test]
        fn bijection(r in 0u32..12, seed in any::<u64>()) {
            let d = seed % cell_count(r);
            let (x, y) = hilbert_d2xy(r, d).unwrap();
            prop_assert_eq!(hilbert_xy2d(r, x, y).unwrap(), d);
        }

        #[test]
        fn injective(points in proptest::collection::vec((-50.0f64..50.0, -50.0f64..50.0), 1..300),
                     occupancy in 0.2f64..=1.0) {
            let pts = layout(&points);
            let r = choose_level(pts.len(), occupancy).unwrap();
            let grid = assign_cells(&pts, r).unwrap();
            let distinct: HashSet<_> = grid.cells.values().collect();
            prop_assert_eq!(distinct.len(), pts.len());
            let side = 1u32 << r;
            prop_assert!(grid.cells.values().all(|&(x, y)| x < side && y < side));
        }
    }
}
