//! Axis-aligned boxes in space-time and regular grids over them.
//!
//! Coordinate convention everywhere in this crate: index 0 is the time axis,
//! indices 1..=n are the space axes, so a box in `R^{n+1}` stores `n + 1`
//! coordinate ranges.

use serde::{Deserialize, Serialize};

use crate::kernel::SpacetimePoint;
use crate::num::{cast, Real};

/// Closed axis-aligned box, possibly degenerate in some coordinates
/// (`lo[i] == hi[i]` encodes points and slits).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AaBox<T> {
    pub lo: Vec<T>,
    pub hi: Vec<T>,
}

impl<T: Real> AaBox<T> {
    /// Builds a box from coordinate ranges, panicking on malformed input;
    /// data-driven callers validate with [`AaBox::check`] first.
    pub fn new(lo: Vec<T>, hi: Vec<T>) -> Self {
        let b = Self { lo, hi };
        b.check().expect("malformed box");
        b
    }

    /// Convenience constructor from `f64` coordinate pairs.
    pub fn from_ranges(ranges: &[(f64, f64)]) -> Self {
        Self::new(
            ranges.iter().map(|r| cast(r.0)).collect(),
            ranges.iter().map(|r| cast(r.1)).collect(),
        )
    }

    pub fn check(&self) -> Result<(), String> {
        if self.lo.is_empty() || self.lo.len() != self.hi.len() {
            return Err(format!(
                "box needs matching nonempty lo/hi, got {}/{}",
                self.lo.len(),
                self.hi.len()
            ));
        }
        for (c, (l, h)) in self.lo.iter().zip(&self.hi).enumerate() {
            if !(*l <= *h) {
                return Err(format!("box coordinate {c} has lo > hi ({l} > {h})"));
            }
        }
        Ok(())
    }

    /// Total coordinate count (`n + 1` for points of `R^{n+1}`).
    pub fn dim(&self) -> usize {
        self.lo.len()
    }

    pub fn side(&self, c: usize) -> T {
        self.hi[c] - self.lo[c]
    }

    /// Membership in the closed box.
    pub fn contains(&self, p: &SpacetimePoint<T>) -> bool {
        self.contains_coords(&p.coords())
    }

    pub fn contains_coords(&self, coords: &[T]) -> bool {
        coords.len() == self.dim()
            && coords
                .iter()
                .enumerate()
                .all(|(c, v)| self.lo[c] <= *v && *v <= self.hi[c])
    }

    /// Membership in the open interior (empty for degenerate boxes).
    pub fn contains_interior(&self, p: &SpacetimePoint<T>) -> bool {
        let coords = p.coords();
        coords.len() == self.dim()
            && coords
                .iter()
                .enumerate()
                .all(|(c, v)| self.lo[c] < *v && *v < self.hi[c])
    }

    /// Whether `other` lies entirely inside this closed box.
    pub fn contains_box(&self, other: &AaBox<T>) -> bool {
        self.dim() == other.dim()
            && (0..self.dim()).all(|c| self.lo[c] <= other.lo[c] && other.hi[c] <= self.hi[c])
    }

    /// Whether the closed boxes intersect (touching counts).
    pub fn intersects(&self, other: &AaBox<T>) -> bool {
        self.dim() == other.dim()
            && (0..self.dim()).all(|c| self.lo[c] <= other.hi[c] && other.lo[c] <= self.hi[c])
    }

    pub fn center(&self) -> SpacetimePoint<T> {
        let half = cast::<T>(0.5);
        let coords: Vec<T> = (0..self.dim())
            .map(|c| (self.lo[c] + self.hi[c]) * half)
            .collect();
        SpacetimePoint::from_coords(&coords)
    }

    /// Regular grid with `counts[c]` points per coordinate, endpoints included
    /// (a single point sits at the coordinate midpoint). Points are emitted in
    /// lexicographic order of the index tuple, time axis slowest.
    pub fn grid(&self, counts: &[usize]) -> Vec<SpacetimePoint<T>> {
        assert_eq!(counts.len(), self.dim(), "one count per coordinate");
        assert!(counts.iter().all(|&c| c >= 1), "counts must be positive");
        let axes: Vec<Vec<T>> = (0..self.dim())
            .map(|c| axis_points(self.lo[c], self.hi[c], counts[c]))
            .collect();
        let total: usize = counts.iter().product();
        let mut out = Vec::with_capacity(total);
        let mut idx = vec![0usize; self.dim()];
        for _ in 0..total {
            let coords: Vec<T> = idx.iter().enumerate().map(|(c, &i)| axes[c][i]).collect();
            out.push(SpacetimePoint::from_coords(&coords));
            for c in (0..self.dim()).rev() {
                idx[c] += 1;
                if idx[c] < counts[c] {
                    break;
                }
                idx[c] = 0;
            }
        }
        out
    }

    /// Same count along every coordinate.
    pub fn uniform_grid(&self, per_axis: usize) -> Vec<SpacetimePoint<T>> {
        self.grid(&vec![per_axis; self.dim()])
    }
}

fn axis_points<T: Real>(lo: T, hi: T, count: usize) -> Vec<T> {
    if count == 1 {
        return vec![(lo + hi) * cast(0.5)];
    }
    let step = (hi - lo) / cast(count as f64 - 1.0);
    (0..count)
        .map(|i| {
            if i + 1 == count {
                hi
            } else {
                lo + step * cast(i as f64)
            }
        })
        .collect()
}
