//! Slice geometry for box-complement regions: time slices, connected
//! components of slice complements, the Jones single-region condition, the
//! Diaz nested-pair condition, and pole-set coverage validation.
//!
//! A region is an open set `ambient \ (union of closed obstacle boxes)`,
//! where the ambient is either all of `R^{n+1}` or an open box. Obstacles may
//! be degenerate (points, slits). Because all geometry is a box arrangement,
//! the topology of the slice `H(t)` is constant on the open intervals between
//! obstacle time-endpoints, so sampling every endpoint and every interval
//! midpoint decides the slice conditions exactly for this region class.
//!
//! Slices are computed exactly as interval unions when the space dimension is
//! 1 and by raster labeling when it is 2. Raster verdicts are approximate and
//! are labeled as such in reports.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geom::AaBox;
use crate::kernel::SpacetimePoint;
use crate::num::{cast, Real};

/// Default raster resolution (pixels per axis) for two-dimensional slices.
pub const DEFAULT_RASTER_RESOLUTION: usize = 512;

/// Open subset of `R^{n+1}`: an ambient box (or all of space-time) minus
/// finitely many closed, possibly degenerate obstacle boxes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Region<T> {
    /// `None` means all of `R^{n+1}`.
    pub ambient: Option<AaBox<T>>,
    #[serde(default)]
    pub obstacles: Vec<AaBox<T>>,
    /// Total coordinate count `n + 1`; 0 means "infer from the boxes".
    #[serde(default)]
    pub dim: usize,
}

impl<T: Real> Region<T> {
    /// All of `R^{n+1}` with the given total coordinate count.
    pub fn full(dim: usize) -> Self {
        Self {
            ambient: None,
            obstacles: Vec::new(),
            dim,
        }
    }

    pub fn new(
        dim: usize,
        ambient: Option<AaBox<T>>,
        obstacles: Vec<AaBox<T>>,
    ) -> Result<Self, RungeError<T>> {
        let r = Self {
            ambient,
            obstacles,
            dim,
        };
        r.validated()
    }

    /// Open set with the given points removed (field validity descriptor).
    pub fn except_points(dim: usize, points: &[SpacetimePoint<T>]) -> Self {
        Self {
            ambient: None,
            obstacles: points
                .iter()
                .map(|p| AaBox {
                    lo: p.coords(),
                    hi: p.coords(),
                })
                .collect(),
            dim,
        }
    }

    /// Checks box shapes and infers `dim` when it was left at 0.
    pub fn validated(mut self) -> Result<Self, RungeError<T>> {
        let inferred = self
            .ambient
            .as_ref()
            .map(|b| b.dim())
            .or_else(|| self.obstacles.first().map(|b| b.dim()));
        if self.dim == 0 {
            match inferred {
                Some(d) => self.dim = d,
                None => {
                    return Err(RungeError::MalformedRegion {
                        reason: "dimension not given and no boxes to infer it from".into(),
                    })
                }
            }
        }
        if self.dim < 2 {
            return Err(RungeError::MalformedRegion {
                reason: format!("need at least one space axis, got dim={}", self.dim),
            });
        }
        for b in self.ambient.iter().chain(&self.obstacles) {
            b.check()
                .map_err(|reason| RungeError::MalformedRegion { reason })?;
            if b.dim() != self.dim {
                return Err(RungeError::MalformedRegion {
                    reason: format!("box dimension {} != region dimension {}", b.dim(), self.dim),
                });
            }
        }
        Ok(self)
    }

    /// Space dimension `n`.
    pub fn space_dim(&self) -> usize {
        self.dim - 1
    }

    /// Membership in the open set.
    pub fn contains(&self, p: &SpacetimePoint<T>) -> bool {
        if let Some(amb) = &self.ambient {
            if !amb.contains_interior(p) {
                return false;
            }
        }
        self.obstacles.iter().all(|b| !b.contains(p))
    }

    /// Region with one more obstacle (used by monotonicity tests).
    pub fn with_obstacle(&self, obstacle: AaBox<T>) -> Self {
        let mut r = self.clone();
        r.obstacles.push(obstacle);
        r
    }
}

/// One connected component of a time slice: an exact interval for `n = 1`,
/// a raster blob for `n = 2`. Interval ends of `None` are unbounded.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ComponentGeometry<T> {
    Interval {
        lo: Option<T>,
        hi: Option<T>,
    },
    Blob {
        /// Spatial bounding box `[x1_lo, x1_hi, x2_lo, x2_hi]`.
        bbox: [T; 4],
        pixel_count: usize,
        /// Center of one pixel of the blob.
        sample: Vec<T>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SliceComponent<T> {
    pub geometry: ComponentGeometry<T>,
    pub compact: bool,
}

/// Components of `H(t) \ Ω` at one time.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SliceReport<T> {
    pub t: T,
    pub components: Vec<SliceComponent<T>>,
    pub method: SliceMethod,
}

/// How slice components were computed; raster results are approximations.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SliceMethod {
    ExactIntervals,
    Raster { resolution: usize },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SliceWitness<T> {
    pub t: T,
    pub component: ComponentGeometry<T>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "verdict", rename_all = "snake_case")]
pub enum JonesVerdict<T> {
    Runge,
    NotRunge { witness: SliceWitness<T> },
}

impl<T> JonesVerdict<T> {
    pub fn is_runge(&self) -> bool {
        matches!(self, JonesVerdict::Runge)
    }
}

/// Verdict on the nested-pair slice condition. Deliberately says "condition
/// satisfied", not "is a Runge pair": only the slice condition is decided.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "verdict", rename_all = "snake_case")]
pub enum DiazVerdict<T> {
    ConditionSatisfied,
    Fails { witness: SliceWitness<T> },
}

impl<T> DiazVerdict<T> {
    pub fn is_satisfied(&self) -> bool {
        matches!(self, DiazVerdict::ConditionSatisfied)
    }
}

#[derive(Debug, Clone, Error, PartialEq)]
pub enum RungeError<T: Real> {
    #[error("unsupported space dimension n={n}; slices are computed for n in {{1, 2}}")]
    UnsupportedDimension { n: usize },
    #[error("regions are not nested: {reason}")]
    NotNested { reason: String },
    #[error("pole {pole} lies inside the target compact")]
    PoleInsideK { pole: SpacetimePoint<T> },
    #[error("malformed region: {reason}")]
    MalformedRegion { reason: String },
}

/// All obstacle and ambient time-endpoints, deduplicated and sorted.
pub fn critical_times<T: Real>(r: &Region<T>) -> Vec<T> {
    let mut ts: Vec<T> = Vec::new();
    if let Some(amb) = &r.ambient {
        ts.push(amb.lo[0]);
        ts.push(amb.hi[0]);
    }
    for b in &r.obstacles {
        ts.push(b.lo[0]);
        ts.push(b.hi[0]);
    }
    ts.sort_by(|a, b| a.partial_cmp(b).expect("finite times"));
    ts.dedup();
    ts
}

/// Times at which slice checks run: midpoints of the open intervals between
/// consecutive critical times first (the generic topology), then the critical
/// times themselves (the degenerate instants). For box arrangements nothing
/// changes beyond the outermost endpoints, so these samples are exhaustive.
pub fn sample_times<T: Real>(critical: &[T]) -> Vec<T> {
    if critical.is_empty() {
        return vec![T::zero()];
    }
    let half = cast::<T>(0.5);
    let mut out: Vec<T> = critical
        .windows(2)
        .filter(|w| w[0] < w[1])
        .map(|w| (w[0] + w[1]) * half)
        .collect();
    out.extend_from_slice(critical);
    out
}

/// Merged sample times for a pair of regions.
fn joint_sample_times<T: Real>(a: &Region<T>, b: &Region<T>) -> Vec<T> {
    let mut ts = critical_times(a);
    ts.extend(critical_times(b));
    ts.sort_by(|x, y| x.partial_cmp(y).expect("finite times"));
    ts.dedup();
    sample_times(&ts)
}

/// Components of the complement `H(t) \ Ω`.
pub fn slice_complement<T: Real>(r: &Region<T>, t: T) -> Result<SliceReport<T>, RungeError<T>> {
    slice_complement_with_resolution(r, t, DEFAULT_RASTER_RESOLUTION)
}

pub fn slice_complement_with_resolution<T: Real>(
    r: &Region<T>,
    t: T,
    resolution: usize,
) -> Result<SliceReport<T>, RungeError<T>> {
    match r.space_dim() {
        1 => Ok(SliceReport {
            t,
            components: complement_components_1d(r, t),
            method: SliceMethod::ExactIntervals,
        }),
        2 => Ok(SliceReport {
            t,
            components: complement_components_2d(r, t, resolution),
            method: SliceMethod::Raster { resolution },
        }),
        n => Err(RungeError::UnsupportedDimension { n }),
    }
}

/// Jones condition: `Ω` passes iff no sampled slice complement has a compact
/// component.
pub fn jones_check<T: Real>(r: &Region<T>) -> Result<JonesVerdict<T>, RungeError<T>> {
    jones_check_with_resolution(r, DEFAULT_RASTER_RESOLUTION)
}

pub fn jones_check_with_resolution<T: Real>(
    r: &Region<T>,
    resolution: usize,
) -> Result<JonesVerdict<T>, RungeError<T>> {
    for t in sample_times(&critical_times(r)) {
        let slice = slice_complement_with_resolution(r, t, resolution)?;
        if let Some(c) = slice.components.iter().find(|c| c.compact) {
            return Ok(JonesVerdict::NotRunge {
                witness: SliceWitness {
                    t,
                    component: c.geometry.clone(),
                },
            });
        }
    }
    Ok(JonesVerdict::Runge)
}

/// Nested-pair condition: fails iff some compact component of `H(t) \ Ω₁`
/// lies entirely inside `Ω₂ ∩ H(t)`.
pub fn diaz_check<T: Real>(
    omega1: &Region<T>,
    omega2: &Region<T>,
) -> Result<DiazVerdict<T>, RungeError<T>> {
    diaz_check_with_resolution(omega1, omega2, DEFAULT_RASTER_RESOLUTION)
}

pub fn diaz_check_with_resolution<T: Real>(
    omega1: &Region<T>,
    omega2: &Region<T>,
    resolution: usize,
) -> Result<DiazVerdict<T>, RungeError<T>> {
    check_nested(omega1, omega2)?;
    for t in joint_sample_times(omega1, omega2) {
        let slice = slice_complement_with_resolution(omega1, t, resolution)?;
        for c in slice.components.iter().filter(|c| c.compact) {
            if component_inside_region(&c.geometry, omega2, t) {
                return Ok(DiazVerdict::Fails {
                    witness: SliceWitness {
                        t,
                        component: c.geometry.clone(),
                    },
                });
            }
        }
    }
    Ok(DiazVerdict::ConditionSatisfied)
}

/// Sufficient nesting check for `Ω₁ ⊆ Ω₂`: the ambient of `Ω₁` must sit
/// inside the ambient of `Ω₂`, and every obstacle of `Ω₂` must be covered by
/// a single obstacle of `Ω₁` (or lie outside `Ω₁`'s ambient entirely).
fn check_nested<T: Real>(omega1: &Region<T>, omega2: &Region<T>) -> Result<(), RungeError<T>> {
    if omega1.dim != omega2.dim {
        return Err(RungeError::NotNested {
            reason: format!("dimensions differ: {} vs {}", omega1.dim, omega2.dim),
        });
    }
    match (&omega1.ambient, &omega2.ambient) {
        (_, None) => {}
        (None, Some(_)) => {
            return Err(RungeError::NotNested {
                reason: "omega1 has full ambient but omega2 does not".into(),
            })
        }
        (Some(a1), Some(a2)) => {
            if !a2.contains_box(a1) {
                return Err(RungeError::NotNested {
                    reason: "ambient of omega1 is not contained in ambient of omega2".into(),
                });
            }
        }
    }
    for (i, obs2) in omega2.obstacles.iter().enumerate() {
        let outside_omega1 = match &omega1.ambient {
            Some(a1) => !a1.intersects(obs2),
            None => false,
        };
        let covered = omega1.obstacles.iter().any(|obs1| obs1.contains_box(obs2));
        if !covered && !outside_omega1 {
            return Err(RungeError::NotNested {
                reason: format!("obstacle {i} of omega2 is not covered by an obstacle of omega1"),
            });
        }
    }
    Ok(())
}

/// Whether a compact slice component lies entirely inside `Ω₂(t)`.
fn component_inside_region<T: Real>(c: &ComponentGeometry<T>, omega2: &Region<T>, t: T) -> bool {
    match c {
        ComponentGeometry::Interval {
            lo: Some(lo),
            hi: Some(hi),
        } => {
            if let Some(amb) = &omega2.ambient {
                if !(amb.lo[0] < t && t < amb.hi[0] && amb.lo[1] < *lo && *hi < amb.hi[1]) {
                    return false;
                }
            }
            omega2
                .obstacles
                .iter()
                .filter(|b| b.lo[0] <= t && t <= b.hi[0])
                .all(|b| *hi < b.lo[1] || b.hi[1] < *lo)
        }
        ComponentGeometry::Interval { .. } => false,
        ComponentGeometry::Blob { bbox, .. } => {
            // Conservative: the blob's bounding box must avoid every active
            // obstacle of omega2 and sit inside its ambient.
            if let Some(amb) = &omega2.ambient {
                if !(amb.lo[0] < t
                    && t < amb.hi[0]
                    && amb.lo[1] < bbox[0]
                    && bbox[1] < amb.hi[1]
                    && amb.lo[2] < bbox[2]
                    && bbox[3] < amb.hi[2])
                {
                    return false;
                }
            }
            omega2
                .obstacles
                .iter()
                .filter(|b| b.lo[0] <= t && t <= b.hi[0])
                .all(|b| {
                    bbox[1] < b.lo[1] || b.hi[1] < bbox[0] || bbox[3] < b.lo[2] || b.hi[2] < bbox[2]
                })
        }
    }
}

// ---------------------------------------------------------------------------
// n = 1: exact interval arithmetic
// ---------------------------------------------------------------------------

/// Closed interval with optional (unbounded) ends.
#[derive(Debug, Clone, PartialEq)]
struct ClosedInterval<T> {
    lo: Option<T>,
    hi: Option<T>,
}

/// Merges closed intervals; touching intervals coalesce.
fn merge_closed_intervals<T: Real>(mut ivals: Vec<ClosedInterval<T>>) -> Vec<ClosedInterval<T>> {
    ivals.sort_by(|a, b| match (&a.lo, &b.lo) {
        (None, None) => std::cmp::Ordering::Equal,
        (None, _) => std::cmp::Ordering::Less,
        (_, None) => std::cmp::Ordering::Greater,
        (Some(x), Some(y)) => x.partial_cmp(y).expect("finite interval ends"),
    });
    let mut out: Vec<ClosedInterval<T>> = Vec::new();
    for iv in ivals {
        if let Some(last) = out.last_mut() {
            let overlaps = match (&last.hi, &iv.lo) {
                (None, _) => true,
                (Some(h), Some(l)) => *l <= *h,
                (Some(_), None) => true,
            };
            if overlaps {
                last.hi = match (&last.hi, &iv.hi) {
                    (None, _) | (_, None) => None,
                    (Some(a), Some(b)) => Some(if *a >= *b { *a } else { *b }),
                };
                continue;
            }
        }
        out.push(iv);
    }
    out
}

/// Complement of `Ω(t)` in the line, as merged closed intervals.
fn complement_intervals_1d<T: Real>(r: &Region<T>, t: T) -> Vec<ClosedInterval<T>> {
    let mut ivals: Vec<ClosedInterval<T>> = Vec::new();
    if let Some(amb) = &r.ambient {
        if !(amb.lo[0] < t && t < amb.hi[0]) {
            // The open ambient box misses this hyperplane entirely.
            return vec![ClosedInterval { lo: None, hi: None }];
        }
        ivals.push(ClosedInterval {
            lo: None,
            hi: Some(amb.lo[1]),
        });
        ivals.push(ClosedInterval {
            lo: Some(amb.hi[1]),
            hi: None,
        });
    }
    for b in &r.obstacles {
        if b.lo[0] <= t && t <= b.hi[0] {
            ivals.push(ClosedInterval {
                lo: Some(b.lo[1]),
                hi: Some(b.hi[1]),
            });
        }
    }
    merge_closed_intervals(ivals)
}

fn complement_components_1d<T: Real>(r: &Region<T>, t: T) -> Vec<SliceComponent<T>> {
    complement_intervals_1d(r, t)
        .into_iter()
        .map(|iv| SliceComponent {
            compact: iv.lo.is_some() && iv.hi.is_some(),
            geometry: ComponentGeometry::Interval {
                lo: iv.lo,
                hi: iv.hi,
            },
        })
        .collect()
}

/// Open components of `Ω(t)` itself (gaps between complement intervals).
/// Used for pole coverage. Ends of `None` are unbounded.
fn set_components_1d<T: Real>(r: &Region<T>, t: T) -> Vec<(Option<T>, Option<T>)> {
    let comp = complement_intervals_1d(r, t);
    if comp.is_empty() {
        return vec![(None, None)];
    }
    let mut out = Vec::new();
    if comp[0].lo.is_some() {
        out.push((None, comp[0].lo));
    }
    for w in comp.windows(2) {
        out.push((w[0].hi, w[1].lo));
    }
    if comp.last().unwrap().hi.is_some() {
        out.push((comp.last().unwrap().hi, None));
    }
    // Degenerate gaps (touching complement intervals were merged, so every
    // gap here is genuinely open and nonempty).
    out
}

// ---------------------------------------------------------------------------
// n = 2: raster labeling
// ---------------------------------------------------------------------------

struct Raster<T> {
    x_lo: [T; 2],
    pixel: [T; 2],
    res: usize,
    /// Labels, row-major over (i1, i2); usize::MAX marks "not in the mask".
    labels: Vec<usize>,
    component_count: usize,
}

impl<T: Real> Raster<T> {
    fn pixel_rect(&self, i1: usize, i2: usize) -> AaBox<T> {
        AaBox {
            lo: vec![
                self.x_lo[0] + self.pixel[0] * cast(i1 as f64),
                self.x_lo[1] + self.pixel[1] * cast(i2 as f64),
            ],
            hi: vec![
                self.x_lo[0] + self.pixel[0] * cast((i1 + 1) as f64),
                self.x_lo[1] + self.pixel[1] * cast((i2 + 1) as f64),
            ],
        }
    }

    fn pixel_center(&self, i1: usize, i2: usize) -> Vec<T> {
        let half = cast::<T>(0.5);
        vec![
            self.x_lo[0] + self.pixel[0] * (cast::<T>(i1 as f64) + half),
            self.x_lo[1] + self.pixel[1] * (cast::<T>(i2 as f64) + half),
        ]
    }

    fn index_of(&self, x: &[T]) -> Option<(usize, usize)> {
        let mut idx = [0usize; 2];
        for c in 0..2 {
            let rel = (x[c] - self.x_lo[c]) / self.pixel[c];
            if rel < T::zero() {
                return None;
            }
            let i = rel.floor().to_usize()?;
            if i >= self.res {
                return None;
            }
            idx[c] = i;
        }
        Some((idx[0], idx[1]))
    }
}

/// Spatial window over which two-dimensional slices are rasterised: the
/// bounding box of all geometry padded by one plus the largest obstacle
/// extent, so obstacles never reach the frame when the ambient is full.
fn raster_window<T: Real>(r: &Region<T>, t: T) -> Option<([T; 2], [T; 2])> {
    let mut lo = [T::infinity(), T::infinity()];
    let mut hi = [T::neg_infinity(), T::neg_infinity()];
    let mut any = false;
    let mut max_extent = T::zero();
    for b in &r.obstacles {
        for c in 0..2 {
            let side = b.hi[c + 1] - b.lo[c + 1];
            if side > max_extent {
                max_extent = side;
            }
        }
        if b.lo[0] <= t && t <= b.hi[0] {
            any = true;
            for c in 0..2 {
                lo[c] = lo[c].min(b.lo[c + 1]);
                hi[c] = hi[c].max(b.hi[c + 1]);
            }
        }
    }
    if let Some(amb) = &r.ambient {
        any = true;
        for c in 0..2 {
            lo[c] = lo[c].min(amb.lo[c + 1]);
            hi[c] = hi[c].max(amb.hi[c + 1]);
        }
    }
    if !any {
        return None;
    }
    let pad = T::one() + max_extent;
    Some(([lo[0] - pad, lo[1] - pad], [hi[0] + pad, hi[1] + pad]))
}

/// Labels the pixels selected by `mask` with 4-neighbor connectivity.
fn label_mask<T: Real>(raster: &mut Raster<T>, mask: &[bool]) {
    let res = raster.res;
    let mut next = 0usize;
    let mut stack: Vec<(usize, usize)> = Vec::new();
    for start in 0..mask.len() {
        if !mask[start] || raster.labels[start] != usize::MAX {
            continue;
        }
        raster.labels[start] = next;
        stack.push((start / res, start % res));
        while let Some((i1, i2)) = stack.pop() {
            let neighbors = [
                (i1.wrapping_sub(1), i2),
                (i1 + 1, i2),
                (i1, i2.wrapping_sub(1)),
                (i1, i2 + 1),
            ];
            for (j1, j2) in neighbors {
                if j1 < res && j2 < res {
                    let idx = j1 * res + j2;
                    if mask[idx] && raster.labels[idx] == usize::MAX {
                        raster.labels[idx] = next;
                        stack.push((j1, j2));
                    }
                }
            }
        }
        next += 1;
    }
    raster.component_count = next;
}

struct RasterComponents<T> {
    raster: Raster<T>,
    /// Per component: (pixel_count, bbox over centers as [lo1, hi1, lo2, hi2],
    /// sample center, touches_frame).
    summaries: Vec<(usize, [T; 4], Vec<T>, bool)>,
}

fn raster_components<T: Real>(
    r: &Region<T>,
    t: T,
    resolution: usize,
    keep: impl Fn(&AaBox<T>) -> bool,
) -> Option<RasterComponents<T>> {
    let (lo, hi) = raster_window(r, t)?;
    let resf = cast::<T>(resolution as f64);
    let mut raster = Raster {
        x_lo: lo,
        pixel: [(hi[0] - lo[0]) / resf, (hi[1] - lo[1]) / resf],
        res: resolution,
        labels: vec![usize::MAX; resolution * resolution],
        component_count: 0,
    };
    let mut mask = vec![false; resolution * resolution];
    for i1 in 0..resolution {
        for i2 in 0..resolution {
            let rect = raster.pixel_rect(i1, i2);
            mask[i1 * resolution + i2] = keep(&rect);
        }
    }
    label_mask(&mut raster, &mask);
    let mut summaries: Vec<(usize, [T; 4], Vec<T>, bool)> = Vec::new();
    for _ in 0..raster.component_count {
        summaries.push((
            0,
            [
                T::infinity(),
                T::neg_infinity(),
                T::infinity(),
                T::neg_infinity(),
            ],
            Vec::new(),
            false,
        ));
    }
    for i1 in 0..resolution {
        for i2 in 0..resolution {
            let label = raster.labels[i1 * resolution + i2];
            if label == usize::MAX {
                continue;
            }
            let center = raster.pixel_center(i1, i2);
            let s = &mut summaries[label];
            s.0 += 1;
            s.1[0] = s.1[0].min(center[0]);
            s.1[1] = s.1[1].max(center[0]);
            s.1[2] = s.1[2].min(center[1]);
            s.1[3] = s.1[3].max(center[1]);
            if s.2.is_empty() {
                s.2 = center;
            }
            if i1 == 0 || i2 == 0 || i1 + 1 == resolution || i2 + 1 == resolution {
                s.3 = true;
            }
        }
    }
    Some(RasterComponents { raster, summaries })
}

/// Pixel rect meets the slice complement: it is not entirely inside the open
/// ambient, or it touches an active obstacle.
fn rect_meets_complement<T: Real>(r: &Region<T>, t: T, rect: &AaBox<T>) -> bool {
    if let Some(amb) = &r.ambient {
        let inside = amb.lo[0] < t
            && t < amb.hi[0]
            && (0..2).all(|c| amb.lo[c + 1] < rect.lo[c] && rect.hi[c] < amb.hi[c + 1]);
        if !inside {
            return true;
        }
    }
    r.obstacles.iter().any(|b| {
        b.lo[0] <= t
            && t <= b.hi[0]
            && (0..2).all(|c| b.lo[c + 1] <= rect.hi[c] && rect.lo[c] <= b.hi[c + 1])
    })
}

/// Pixel rect lies entirely inside `Ω(t)`.
fn rect_inside_set<T: Real>(r: &Region<T>, t: T, rect: &AaBox<T>) -> bool {
    !rect_meets_complement(r, t, rect)
}

fn complement_components_2d<T: Real>(
    r: &Region<T>,
    t: T,
    resolution: usize,
) -> Vec<SliceComponent<T>> {
    let Some(rc) = raster_components(r, t, resolution, |rect| rect_meets_complement(r, t, rect))
    else {
        // Full ambient with no obstacles anywhere: empty complement.
        return Vec::new();
    };
    rc.summaries
        .into_iter()
        .map(
            |(pixel_count, bbox, sample, touches_frame)| SliceComponent {
                compact: !touches_frame,
                geometry: ComponentGeometry::Blob {
                    bbox,
                    pixel_count,
                    sample,
                },
            },
        )
        .collect()
}

// ---------------------------------------------------------------------------
// Pole-set validation
// ---------------------------------------------------------------------------

/// A slice component of `U \ K` that contains no candidate pole.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UncoveredComponent<T> {
    pub t: T,
    pub component: ComponentGeometry<T>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PoleSetVerdict<T> {
    pub valid: bool,
    pub uncovered: Vec<UncoveredComponent<T>>,
    pub method: SliceMethod,
}

/// Checks that every connected component of every time slice of `U \ K`
/// contains a candidate pole. `K` is a finite union of closed boxes. A pole
/// counts for an endpoint slice when its time matches exactly, and for a
/// midpoint slice when its time falls in the corresponding open interval (the
/// slice topology is constant there).
pub fn validate_pole_set<T: Real>(
    k_boxes: &[AaBox<T>],
    u: &Region<T>,
    poles: &[SpacetimePoint<T>],
    resolution: usize,
) -> Result<PoleSetVerdict<T>, RungeError<T>> {
    for p in poles {
        if k_boxes.iter().any(|b| b.contains(p)) {
            return Err(RungeError::PoleInsideK { pole: p.clone() });
        }
    }
    // U \ K is itself a box-complement region.
    let mut diff = u.clone().validated()?;
    for b in k_boxes {
        if b.dim() != diff.dim {
            return Err(RungeError::MalformedRegion {
                reason: "K box dimension differs from U".into(),
            });
        }
        diff.obstacles.push(b.clone());
    }
    let n = diff.space_dim();
    if n != 1 && n != 2 {
        return Err(RungeError::UnsupportedDimension { n });
    }

    let critical = critical_times(&diff);
    let mut uncovered = Vec::new();
    // Endpoint slices: poles with exactly matching time.
    for &t in &critical {
        let at_t: Vec<&SpacetimePoint<T>> = poles.iter().filter(|p| p.t == t).collect();
        uncovered.extend(uncovered_at(&diff, t, &at_t, resolution)?);
    }
    // Midpoint slices: poles anywhere in the open interval.
    for w in critical.windows(2) {
        if !(w[0] < w[1]) {
            continue;
        }
        let mid = (w[0] + w[1]) * cast::<T>(0.5);
        let inside: Vec<&SpacetimePoint<T>> =
            poles.iter().filter(|p| w[0] < p.t && p.t < w[1]).collect();
        uncovered.extend(uncovered_at(&diff, mid, &inside, resolution)?);
    }
    if critical.is_empty() {
        let all: Vec<&SpacetimePoint<T>> = poles.iter().collect();
        uncovered.extend(uncovered_at(&diff, T::zero(), &all, resolution)?);
    }
    Ok(PoleSetVerdict {
        valid: uncovered.is_empty(),
        uncovered,
        method: if n == 1 {
            SliceMethod::ExactIntervals
        } else {
            SliceMethod::Raster { resolution }
        },
    })
}

fn uncovered_at<T: Real>(
    diff: &Region<T>,
    t: T,
    poles: &[&SpacetimePoint<T>],
    resolution: usize,
) -> Result<Vec<UncoveredComponent<T>>, RungeError<T>> {
    let mut out = Vec::new();
    match diff.space_dim() {
        1 => {
            for (lo, hi) in set_components_1d(diff, t) {
                // Skip empty slices (a completely covered line has no gaps).
                let hit = poles.iter().any(|p| {
                    let x = p.x[0];
                    lo.is_none_or(|l| l < x) && hi.is_none_or(|h| x < h)
                });
                if !hit {
                    out.push(UncoveredComponent {
                        t,
                        component: ComponentGeometry::Interval { lo, hi },
                    });
                }
            }
        }
        2 => {
            let Some(rc) =
                raster_components(diff, t, resolution, |rect| rect_inside_set(diff, t, rect))
            else {
                return Ok(out);
            };
            // With a full ambient every frame-touching component continues
            // beyond the window, so they are all one logical component.
            let frame_labels: Vec<bool> = rc.summaries.iter().map(|s| s.3).collect();
            let mut frame_hit =
                diff.ambient.is_none() && poles.iter().any(|p| rc.raster.index_of(&p.x).is_none());
            let mut hits = vec![false; rc.summaries.len()];
            for p in poles {
                if let Some((i1, i2)) = rc.raster.index_of(&p.x) {
                    let label = rc.raster.labels[i1 * rc.raster.res + i2];
                    if label != usize::MAX {
                        hits[label] = true;
                        if frame_labels[label] {
                            frame_hit = true;
                        }
                    }
                }
            }
            for (label, (pixel_count, bbox, sample, touches_frame)) in
                rc.summaries.into_iter().enumerate()
            {
                let merged_frame = diff.ambient.is_none() && touches_frame;
                let covered = if merged_frame { frame_hit } else { hits[label] };
                if !covered {
                    // Report the merged exterior only once.
                    if merged_frame && frame_labels[..label].iter().any(|&f| f) {
                        continue;
                    }
                    out.push(UncoveredComponent {
                        t,
                        component: ComponentGeometry::Blob {
                            bbox,
                            pixel_count,
                            sample,
                        },
                    });
                }
            }
        }
        n => return Err(RungeError::UnsupportedDimension { n }),
    }
    Ok(out)
}
