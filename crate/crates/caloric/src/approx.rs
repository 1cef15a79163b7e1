//! Rational approximation of caloric functions by finite sums of kernel
//! derivatives.
//!
//! Two engines:
//!
//! * [`riemann_approximate`] — the constructive route. Multiply the target by
//!   a `C²` cutoff that is 1 on the inner box `K` and 0 outside the outer box
//!   `U`; the source density `(∂_t - Δ)(χu)` then lives on the box shell
//!   between them, and its heat potential reproduces the target on `K`.
//!   Discretising the potential integral by midpoint Riemann sums yields one
//!   simple kernel pole per cell, every pole inside the shell and hence
//!   outside `K`.
//! * [`fit_fixed_poles`] / [`greedy_fit`] — collocation with a prescribed
//!   candidate pole set: build the design matrix of kernel derivatives at the
//!   samples, drop causally dead columns, and solve by truncated SVD (with
//!   orthogonal-matching-pursuit selection in the greedy variant).

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::fields::{EvalError, HeatField};
use crate::geom::AaBox;
use crate::kernel::{DerivativeLimits, DerivativeOrder, KernelError, KernelTerm, SpacetimePoint};
use crate::linalg::{dot, norm2, truncated_lstsq, ColMatrix};
use crate::num::{cast, Real};
use crate::runge::Region;

/// Default relative singular-value truncation for the least-squares solves.
pub const DEFAULT_SVD_THRESHOLD: f64 = 1e-10;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum ApproxError<T: Real> {
    #[error("mesh parameter must be positive and finite, got {mesh}")]
    MeshTooCoarse { mesh: T },
    #[error("every candidate column vanishes on the samples (all poles causally disconnected)")]
    AllColumnsDegenerate,
    #[error("invalid box pair: {reason}")]
    InvalidBoxPair { reason: String },
    #[error("need at least one sample")]
    EmptySamples,
    #[error("need at least one candidate pole")]
    EmptyPoles,
    #[error(transparent)]
    Eval(#[from] EvalError<T>),
    #[error(transparent)]
    Kernel(#[from] KernelError),
}

/// Target compact box `K` inside an open neighbourhood box `U`, with strictly
/// positive margin in every coordinate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoxPair<T> {
    k: AaBox<T>,
    u: AaBox<T>,
}

impl<T: Real> BoxPair<T> {
    pub fn new(k: AaBox<T>, u: AaBox<T>) -> Result<Self, ApproxError<T>> {
        for b in [&k, &u] {
            b.check()
                .map_err(|reason| ApproxError::InvalidBoxPair { reason })?;
        }
        if k.dim() != u.dim() {
            return Err(ApproxError::InvalidBoxPair {
                reason: "K and U have different dimensions".into(),
            });
        }
        for c in 0..k.dim() {
            if !(u.lo[c] < k.lo[c] && k.hi[c] < u.hi[c]) {
                return Err(ApproxError::InvalidBoxPair {
                    reason: format!("coordinate {c}: K must sit strictly inside U"),
                });
            }
            if !(k.lo[c] < k.hi[c]) {
                return Err(ApproxError::InvalidBoxPair {
                    reason: format!("coordinate {c}: K is degenerate"),
                });
            }
        }
        Ok(Self { k, u })
    }

    pub fn inner(&self) -> &AaBox<T> {
        &self.k
    }

    pub fn outer(&self) -> &AaBox<T> {
        &self.u
    }

    pub fn dim(&self) -> usize {
        self.k.dim()
    }
}

/// Quintic smoothstep `s(θ) = 6θ⁵ - 15θ⁴ + 10θ³` and its derivatives.
fn smoothstep<T: Real>(theta: T) -> (T, T, T) {
    let t2 = theta * theta;
    let t3 = t2 * theta;
    let s = (cast::<T>(6.0) * t2 - cast::<T>(15.0) * theta + cast::<T>(10.0)) * t3;
    let ds = cast::<T>(30.0) * t2 * (theta - T::one()) * (theta - T::one());
    let dds = cast::<T>(120.0) * t3 - cast::<T>(180.0) * t2 + cast::<T>(60.0) * theta;
    (s, ds, dds)
}

/// One coordinate's `C²` ramp: 1 on `[k_lo, k_hi]`, 0 outside `(u_lo, u_hi)`.
#[derive(Debug, Clone)]
struct Ramp<T> {
    u_lo: T,
    k_lo: T,
    k_hi: T,
    u_hi: T,
}

impl<T: Real> Ramp<T> {
    /// Value and first two derivatives at `y`.
    fn eval(&self, y: T) -> (T, T, T) {
        let zero = T::zero();
        if y <= self.u_lo || y >= self.u_hi {
            (zero, zero, zero)
        } else if y >= self.k_lo && y <= self.k_hi {
            (T::one(), zero, zero)
        } else if y < self.k_lo {
            let w = self.k_lo - self.u_lo;
            let (s, ds, dds) = smoothstep((y - self.u_lo) / w);
            (s, ds / w, dds / (w * w))
        } else {
            let w = self.u_hi - self.k_hi;
            let (s, ds, dds) = smoothstep((self.u_hi - y) / w);
            (s, -ds / w, dds / (w * w))
        }
    }
}

/// Tensor-product cutoff over all `n + 1` coordinates: identically 1 on `K`,
/// identically 0 outside `U`, `C²` in between, with closed-form value, time
/// derivative, spatial gradient and spatial Laplacian.
#[derive(Debug, Clone)]
pub struct Cutoff<T> {
    ramps: Vec<Ramp<T>>,
}

impl<T: Real> Cutoff<T> {
    pub fn new(boxes: &BoxPair<T>) -> Self {
        let ramps = (0..boxes.dim())
            .map(|c| Ramp {
                u_lo: boxes.u.lo[c],
                k_lo: boxes.k.lo[c],
                k_hi: boxes.k.hi[c],
                u_hi: boxes.u.hi[c],
            })
            .collect();
        Self { ramps }
    }

    fn per_coordinate(&self, p: &SpacetimePoint<T>) -> Vec<(T, T, T)> {
        let coords = p.coords();
        self.ramps
            .iter()
            .zip(&coords)
            .map(|(r, &y)| r.eval(y))
            .collect()
    }

    pub fn value(&self, p: &SpacetimePoint<T>) -> T {
        self.per_coordinate(p)
            .iter()
            .fold(T::one(), |acc, (v, _, _)| acc * *v)
    }

    pub fn time_derivative(&self, p: &SpacetimePoint<T>) -> T {
        let parts = self.per_coordinate(p);
        parts[0].1 * parts[1..].iter().fold(T::one(), |acc, (v, _, _)| acc * *v)
    }

    pub fn spatial_gradient(&self, p: &SpacetimePoint<T>) -> Vec<T> {
        let parts = self.per_coordinate(p);
        (1..parts.len())
            .map(|i| {
                let mut g = parts[i].1;
                for (c, (v, _, _)) in parts.iter().enumerate() {
                    if c != i {
                        g *= *v;
                    }
                }
                g
            })
            .collect()
    }

    pub fn spatial_laplacian(&self, p: &SpacetimePoint<T>) -> T {
        let parts = self.per_coordinate(p);
        let mut lap = T::zero();
        for i in 1..parts.len() {
            let mut term = parts[i].2;
            for (c, (v, _, _)) in parts.iter().enumerate() {
                if c != i {
                    term *= *v;
                }
            }
            lap += term;
        }
        lap
    }

    /// Whether every cutoff derivative entering the source density vanishes
    /// at `p` (χ locally constant there, or a flat zero factor kills all
    /// products).
    fn derivatives_vanish(&self, p: &SpacetimePoint<T>) -> bool {
        self.time_derivative(p) == T::zero()
            && self.spatial_laplacian(p) == T::zero()
            && self.spatial_gradient(p).iter().all(|g| *g == T::zero())
    }
}

/// `(∂_t - Δ)(χ u)` at `q`, expanded by the product rule under `u_t = Δu`:
/// `u (χ_t - Δχ) - 2 ∇χ · ∇u`. Exactly zero wherever χ is locally constant.
pub fn source_density<T: Real, F: HeatField<T>>(
    target: &F,
    chi: &Cutoff<T>,
    q: &SpacetimePoint<T>,
) -> Result<T, EvalError<T>> {
    if chi.derivatives_vanish(q) {
        return Ok(T::zero());
    }
    let u = target.value(q)?;
    let grad_u = target.spatial_gradient(q)?;
    let chi_t = chi.time_derivative(q);
    let lap_chi = chi.spatial_laplacian(q);
    let grad_chi = chi.spatial_gradient(q);
    let cross = grad_chi
        .iter()
        .zip(&grad_u)
        .fold(T::zero(), |acc, (&a, &b)| acc + a * b);
    Ok(u * (chi_t - lap_chi) - cast::<T>(2.0) * cross)
}

/// Finite sum of kernel-derivative terms; caloric away from its poles.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RationalHeatSolution<T> {
    #[serde(rename = "n")]
    pub dim: usize,
    pub terms: Vec<KernelTerm<T>>,
}

impl<T: Real> RationalHeatSolution<T> {
    pub fn empty(dim: usize) -> Self {
        Self {
            dim,
            terms: Vec::new(),
        }
    }

    pub fn pole_points(&self) -> Vec<SpacetimePoint<T>> {
        self.terms.iter().map(|t| t.pole.clone()).collect()
    }

    pub fn earliest_pole_time(&self) -> Option<T> {
        self.terms
            .iter()
            .map(|t| t.pole.t)
            .fold(None, |acc, t| match acc {
                None => Some(t),
                Some(a) => Some(a.min(t)),
            })
    }
}

impl<T: Real> HeatField<T> for RationalHeatSolution<T> {
    fn dim(&self) -> usize {
        self.dim
    }

    fn value(&self, p: &SpacetimePoint<T>) -> Result<T, EvalError<T>> {
        if p.dim() != self.dim {
            return Err(EvalError::DimensionMismatch {
                expected: self.dim,
                found: p.dim(),
            });
        }
        Ok(self
            .terms
            .iter()
            .fold(T::zero(), |acc, term| acc + term.value(p)))
    }

    fn spatial_gradient(&self, p: &SpacetimePoint<T>) -> Result<Vec<T>, EvalError<T>> {
        if p.dim() != self.dim {
            return Err(EvalError::DimensionMismatch {
                expected: self.dim,
                found: p.dim(),
            });
        }
        let mut g = vec![T::zero(); self.dim];
        for term in &self.terms {
            for (a, b) in g.iter_mut().zip(term.spatial_gradient(p)) {
                *a += b;
            }
        }
        Ok(g)
    }

    fn time_derivative(&self, p: &SpacetimePoint<T>) -> Result<T, EvalError<T>> {
        if p.dim() != self.dim {
            return Err(EvalError::DimensionMismatch {
                expected: self.dim,
                found: p.dim(),
            });
        }
        Ok(self
            .terms
            .iter()
            .fold(T::zero(), |acc, term| acc + term.time_derivative(p)))
    }

    fn validity(&self) -> Region<T> {
        Region::except_points(self.dim + 1, &self.pole_points())
    }
}

impl<T: Real> From<RationalHeatSolution<T>> for crate::fields::Field<T> {
    fn from(sol: RationalHeatSolution<T>) -> Self {
        if sol.terms.is_empty() {
            crate::fields::Field::zero(sol.dim)
        } else {
            crate::fields::Field::Sum(
                sol.terms
                    .into_iter()
                    .map(crate::fields::Field::Pole)
                    .collect(),
            )
        }
    }
}

/// Summary of one Riemann-sum construction.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RiemannReport<T> {
    pub mesh: T,
    pub cell_count: usize,
    pub shell_volume: T,
}

/// Discretises the source-density potential over the shell `closure(U) \ K°`
/// into one simple pole per cell. The shell is split into its `3^{n+1} - 1`
/// rectangular blocks (so the integrand is smooth inside every cell), each
/// block into cells of diameter at most `h`; the pole sits at the cell center
/// with coefficient `density · volume`.
pub fn riemann_approximate<T: Real, F: HeatField<T>>(
    target: &F,
    boxes: &BoxPair<T>,
    mesh: T,
) -> Result<(RationalHeatSolution<T>, RiemannReport<T>), ApproxError<T>> {
    if !(mesh > T::zero()) || !mesh.is_finite() {
        return Err(ApproxError::MeshTooCoarse { mesh });
    }
    let dim = boxes.dim();
    let chi = Cutoff::new(boxes);
    let side = mesh / cast::<T>(dim as f64).sqrt();

    // Per-coordinate segments: [u_lo, k_lo], [k_lo, k_hi], [k_hi, u_hi].
    let segments: Vec<[(T, T); 3]> = (0..dim)
        .map(|c| {
            [
                (boxes.u.lo[c], boxes.k.lo[c]),
                (boxes.k.lo[c], boxes.k.hi[c]),
                (boxes.k.hi[c], boxes.u.hi[c]),
            ]
        })
        .collect();

    let mut terms = Vec::new();
    let mut shell_volume = T::zero();
    let mut combo = vec![0usize; dim];
    'blocks: loop {
        if combo.iter().any(|&s| s != 1) {
            // A shell block; the all-middle combination is K itself.
            let ranges: Vec<(T, T)> = (0..dim).map(|c| segments[c][combo[c]]).collect();
            emit_block_cells(&ranges, side, &mut |center, volume| {
                let density = source_density(target, &chi, &center)?;
                shell_volume += volume;
                terms.push(KernelTerm::simple(center, density * volume));
                Ok(())
            })?;
        }
        // Advance the mixed-radix counter.
        for c in (0..dim).rev() {
            combo[c] += 1;
            if combo[c] < 3 {
                continue 'blocks;
            }
            combo[c] = 0;
        }
        break;
    }

    let report = RiemannReport {
        mesh,
        cell_count: terms.len(),
        shell_volume,
    };
    Ok((
        RationalHeatSolution {
            dim: dim - 1,
            terms,
        },
        report,
    ))
}

/// Iterates midpoint cells of a rectangular block, lexicographically.
fn emit_block_cells<T: Real>(
    ranges: &[(T, T)],
    side: T,
    emit: &mut impl FnMut(SpacetimePoint<T>, T) -> Result<(), EvalError<T>>,
) -> Result<(), EvalError<T>> {
    let dim = ranges.len();
    let counts: Vec<usize> = ranges
        .iter()
        .map(|&(lo, hi)| {
            let len = hi - lo;
            ((len / side).ceil().to_usize().unwrap_or(1)).max(1)
        })
        .collect();
    let sizes: Vec<T> = ranges
        .iter()
        .zip(&counts)
        .map(|(&(lo, hi), &m)| (hi - lo) / cast(m as f64))
        .collect();
    let volume = sizes.iter().fold(T::one(), |acc, &s| acc * s);
    let half = cast::<T>(0.5);
    let total: usize = counts.iter().product();
    let mut idx = vec![0usize; dim];
    for _ in 0..total {
        let coords: Vec<T> = (0..dim)
            .map(|c| ranges[c].0 + sizes[c] * (cast::<T>(idx[c] as f64) + half))
            .collect();
        emit(SpacetimePoint::from_coords(&coords), volume)?;
        for c in (0..dim).rev() {
            idx[c] += 1;
            if idx[c] < counts[c] {
                break;
            }
            idx[c] = 0;
        }
    }
    Ok(())
}

/// Candidate pole with the derivative orders its column may use.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PoleCandidate<T> {
    pub point: SpacetimePoint<T>,
    /// Defaults to the simple kernel (no derivatives).
    #[serde(default)]
    pub orders: Option<Vec<DerivativeOrder>>,
}

impl<T: Real> PoleCandidate<T> {
    pub fn simple(point: SpacetimePoint<T>) -> Self {
        Self {
            point,
            orders: None,
        }
    }

    fn orders(&self) -> Vec<DerivativeOrder> {
        self.orders
            .clone()
            .unwrap_or_else(|| vec![DerivativeOrder::simple(self.point.dim())])
    }
}

/// Prescribed candidate poles for fixed-singularity fitting.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PoleSet<T> {
    pub candidates: Vec<PoleCandidate<T>>,
}

impl<T: Real> PoleSet<T> {
    pub fn simple(points: Vec<SpacetimePoint<T>>) -> Self {
        Self {
            candidates: points.into_iter().map(PoleCandidate::simple).collect(),
        }
    }

    /// Flattens candidates into (pole, order) columns, validating ceilings.
    fn columns(&self) -> Result<Vec<(SpacetimePoint<T>, DerivativeOrder)>, KernelError> {
        let limits = DerivativeLimits::default();
        let mut out = Vec::new();
        for cand in &self.candidates {
            for order in cand.orders() {
                if order.space.len() != cand.point.dim() {
                    return Err(KernelError::DimensionMismatch {
                        point_dim: cand.point.dim(),
                        order_dim: order.space.len(),
                    });
                }
                if !limits.admits(&order) {
                    return Err(KernelError::OrderTooHigh {
                        order,
                        max_time: limits.max_time_order,
                        max_space: limits.max_space_order,
                    });
                }
                out.push((cand.point.clone(), order));
            }
        }
        Ok(out)
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FitReport<T> {
    pub rms_residual: T,
    pub sup_residual: T,
    /// Flat column indices that survived the causal-degeneracy filter.
    pub kept_columns: Vec<usize>,
    pub dropped_columns: Vec<usize>,
    pub rank: usize,
    pub sigma_max: T,
}

/// Least-squares fit with a fixed pole set. Columns that vanish identically
/// on the samples (poles at or after every sample time contribute nothing,
/// since the kernel vanishes for nonpositive time lags) are dropped before
/// the truncated-SVD solve.
pub fn fit_fixed_poles<T: Real>(
    samples: &[(SpacetimePoint<T>, T)],
    poles: &PoleSet<T>,
    reg: T,
) -> Result<(RationalHeatSolution<T>, FitReport<T>), ApproxError<T>> {
    if samples.is_empty() {
        return Err(ApproxError::EmptySamples);
    }
    let columns = poles.columns()?;
    if columns.is_empty() {
        return Err(ApproxError::EmptyPoles);
    }
    let dim = samples[0].0.dim();

    let mut kept_columns = Vec::new();
    let mut dropped_columns = Vec::new();
    let mut kept_values: Vec<Vec<T>> = Vec::new();
    for (idx, (pole, order)) in columns.iter().enumerate() {
        let term = KernelTerm {
            pole: pole.clone(),
            coefficient: T::one(),
            order: order.clone(),
        };
        let col: Vec<T> = samples.iter().map(|(s, _)| term.value(s)).collect();
        if col.iter().all(|v| *v == T::zero()) {
            dropped_columns.push(idx);
        } else {
            kept_columns.push(idx);
            kept_values.push(col);
        }
    }
    if kept_columns.is_empty() {
        return Err(ApproxError::AllColumnsDegenerate);
    }

    let a = ColMatrix::from_columns(samples.len(), &kept_values);
    let b: Vec<T> = samples.iter().map(|(_, v)| *v).collect();
    let sol = truncated_lstsq(&a, &b, reg);

    let fitted = a.mul_vec(&sol.coefficients);
    let (rms, sup) = residual_stats(&fitted, &b);

    let terms: Vec<KernelTerm<T>> = kept_columns
        .iter()
        .zip(&sol.coefficients)
        .map(|(&idx, &c)| KernelTerm {
            pole: columns[idx].0.clone(),
            coefficient: c,
            order: columns[idx].1.clone(),
        })
        .collect();

    Ok((
        RationalHeatSolution { dim, terms },
        FitReport {
            rms_residual: rms,
            sup_residual: sup,
            kept_columns,
            dropped_columns,
            rank: sol.rank,
            sigma_max: sol.sigma_max,
        },
    ))
}

fn residual_stats<T: Real>(fitted: &[T], b: &[T]) -> (T, T) {
    let mut sum_sq = T::zero();
    let mut sup = T::zero();
    for (f, y) in fitted.iter().zip(b) {
        let r = (*f - *y).abs();
        sum_sq += r * r;
        if r > sup {
            sup = r;
        }
    }
    let rms = (sum_sq / cast(b.len() as f64)).sqrt();
    (rms, sup)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GreedyReport<T> {
    pub achieved_sup_residual: T,
    /// Flat column indices selected, in selection order.
    pub selected: Vec<usize>,
    pub iterations: usize,
}

/// Orthogonal matching pursuit over the candidate columns: each step selects
/// the column with the largest normalized correlation against the current
/// residual (ties break to the lowest index), then refits all selected
/// coefficients by truncated SVD. Stops when the sup residual over the grid
/// reaches `tol` or after `max_terms` selections.
pub fn greedy_fit<T: Real, F: HeatField<T>>(
    target: &F,
    grid: &[SpacetimePoint<T>],
    poles: &PoleSet<T>,
    max_terms: usize,
    tol: T,
    reg: T,
) -> Result<(RationalHeatSolution<T>, GreedyReport<T>), ApproxError<T>> {
    if grid.is_empty() {
        return Err(ApproxError::EmptySamples);
    }
    let columns = poles.columns()?;
    if columns.is_empty() {
        return Err(ApproxError::EmptyPoles);
    }
    let dim = grid[0].dim();

    let mut b = Vec::with_capacity(grid.len());
    for p in grid {
        b.push(target.value(p)?);
    }

    // Candidate column values, computed once.
    let col_values: Vec<Vec<T>> = columns
        .iter()
        .map(|(pole, order)| {
            let term = KernelTerm {
                pole: pole.clone(),
                coefficient: T::one(),
                order: order.clone(),
            };
            grid.iter().map(|p| term.value(p)).collect()
        })
        .collect();
    let col_norms: Vec<T> = col_values.iter().map(|c| norm2(c)).collect();
    let usable: Vec<usize> = (0..columns.len())
        .filter(|&j| col_norms[j] > T::zero())
        .collect();

    let sup = |r: &[T]| r.iter().fold(T::zero(), |acc, v| acc.max(v.abs()));

    let mut residual = b.clone();
    let mut selected: Vec<usize> = Vec::new();
    let mut coeffs: Vec<T> = Vec::new();
    let mut iterations = 0usize;

    while selected.len() < max_terms {
        if sup(&residual) <= tol {
            break;
        }
        if usable.is_empty() {
            return Err(ApproxError::AllColumnsDegenerate);
        }
        let mut best: Option<(usize, T)> = None;
        for &j in &usable {
            if selected.contains(&j) {
                continue;
            }
            let score = dot(&col_values[j], &residual).abs() / col_norms[j];
            match best {
                Some((_, s)) if score <= s => {}
                _ => best = Some((j, score)),
            }
        }
        let Some((pick, score)) = best else { break };
        if score == T::zero() {
            // No remaining column correlates with the residual.
            break;
        }
        selected.push(pick);
        iterations += 1;

        let a = ColMatrix::from_columns(
            grid.len(),
            &selected
                .iter()
                .map(|&j| col_values[j].clone())
                .collect::<Vec<_>>(),
        );
        let sol = truncated_lstsq(&a, &b, reg);
        coeffs = sol.coefficients;
        let fitted = a.mul_vec(&coeffs);
        residual = b.iter().zip(&fitted).map(|(y, f)| *y - *f).collect();
    }

    let achieved = sup(&residual);
    let terms: Vec<KernelTerm<T>> = selected
        .iter()
        .zip(&coeffs)
        .map(|(&j, &c)| KernelTerm {
            pole: columns[j].0.clone(),
            coefficient: c,
            order: columns[j].1.clone(),
        })
        .collect();
    Ok((
        RationalHeatSolution { dim, terms },
        GreedyReport {
            achieved_sup_residual: achieved,
            selected,
            iterations,
        },
    ))
}

/// `max |f - g|` over the grid; every point must be valid for both fields.
pub fn sup_error<T: Real, F: HeatField<T>, G: HeatField<T>>(
    f: &F,
    g: &G,
    grid: &[SpacetimePoint<T>],
) -> Result<T, EvalError<T>> {
    let vf = f.validity();
    let vg = g.validity();
    for p in grid {
        if !vf.contains(p) || !vg.contains(p) {
            return Err(EvalError::OutsideValidity { point: p.clone() });
        }
    }
    let mut sup = T::zero();
    for p in grid {
        let d = (f.value(p)? - g.value(p)?).abs();
        if d > sup {
            sup = d;
        }
    }
    Ok(sup)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fields::{heat_residual_fd, EntireDictionaryMember, Field};
    use crate::kernel::phi;

    fn pt(t: f64, x: &[f64]) -> SpacetimePoint<f64> {
        SpacetimePoint::new(t, x.to_vec())
    }

    fn test_boxes() -> BoxPair<f64> {
        BoxPair::new(
            AaBox::from_ranges(&[(0.0, 1.0), (-1.0, 1.0)]),
            AaBox::from_ranges(&[(-0.5, 1.5), (-2.0, 2.0)]),
        )
        .unwrap()
    }

    #[test]
    fn box_pair_rejects_zero_margin() {
        let r: Result<BoxPair<f64>, _> = BoxPair::new(
            AaBox::from_ranges(&[(0.0, 1.0), (-1.0, 1.0)]),
            AaBox::from_ranges(&[(0.0, 1.5), (-2.0, 2.0)]),
        );
        assert!(matches!(r, Err(ApproxError::InvalidBoxPair { .. })));
    }

    #[test]
    fn cutoff_is_one_on_k_zero_outside_u_and_c2() {
        let chi = Cutoff::new(&test_boxes());
        assert_eq!(chi.value(&pt(0.5, &[0.0])), 1.0);
        assert_eq!(chi.value(&pt(2.0, &[0.0])), 0.0);
        assert_eq!(chi.value(&pt(0.5, &[3.0])), 0.0);
        let q = pt(-0.2, &[1.3]);
        let v = chi.value(&q);
        assert!((0.0..=1.0).contains(&v));
        // Closed-form derivatives against finite differences in the shell.
        let h = 1e-5;
        let dt_fd =
            (chi.value(&pt(-0.2 + h, &[1.3])) - chi.value(&pt(-0.2 - h, &[1.3]))) / (2.0 * h);
        assert!((chi.time_derivative(&q) - dt_fd).abs() < 1e-8);
        let gx_fd =
            (chi.value(&pt(-0.2, &[1.3 + h])) - chi.value(&pt(-0.2, &[1.3 - h]))) / (2.0 * h);
        assert!((chi.spatial_gradient(&q)[0] - gx_fd).abs() < 1e-8);
        let lap_fd = (chi.value(&pt(-0.2, &[1.3 + h])) - 2.0 * v
            + chi.value(&pt(-0.2, &[1.3 - h])))
            / (h * h);
        assert!((chi.spatial_laplacian(&q) - lap_fd).abs() < 1e-5);
    }

    #[test]
    fn source_density_vanishes_where_cutoff_is_constant() {
        let boxes = test_boxes();
        let chi = Cutoff::new(&boxes);
        let target = Field::Member(EntireDictionaryMember::HeatPolynomial { degree: 2 });
        // Interior of K.
        assert_eq!(
            source_density(&target, &chi, &pt(0.5, &[0.0])).unwrap(),
            0.0
        );
        // Outside U.
        assert_eq!(
            source_density(&target, &chi, &pt(3.0, &[0.0])).unwrap(),
            0.0
        );
    }

    #[test]
    fn source_density_matches_finite_difference_in_shell() {
        let boxes = test_boxes();
        let chi = Cutoff::new(&boxes);
        let target = Field::Member(EntireDictionaryMember::HeatPolynomial { degree: 2 });
        let q = pt(1.2, &[1.4]);
        let analytic = source_density(&target, &chi, &q).unwrap();
        // (∂_t - Δ)(χ u) by central differences on the product.
        let h = 1e-4;
        let prod = |t: f64, x: f64| {
            let p = pt(t, &[x]);
            chi.value(&p) * target.value(&p).unwrap()
        };
        let dt = (prod(1.2 + h, 1.4) - prod(1.2 - h, 1.4)) / (2.0 * h);
        let lap = (prod(1.2, 1.4 + h) - 2.0 * prod(1.2, 1.4) + prod(1.2, 1.4 - h)) / (h * h);
        let fd = dt - lap;
        assert!(
            (analytic - fd).abs() < 1e-5,
            "analytic {analytic} vs fd {fd}"
        );
    }

    #[test]
    fn riemann_zero_target_gives_zero_solution() {
        let (sol, report) = riemann_approximate(&Field::zero(1), &test_boxes(), 0.5).unwrap();
        assert!(report.cell_count > 0);
        assert!(sol.terms.iter().all(|t| t.coefficient == 0.0));
        let grid = test_boxes().inner().uniform_grid(5);
        assert_eq!(sup_error(&sol, &Field::zero(1), &grid).unwrap(), 0.0);
    }

    #[test]
    fn riemann_poles_stay_outside_k() {
        let target = Field::Pole(KernelTerm::simple(pt(-2.0, &[0.0]), 1.0));
        let boxes = test_boxes();
        let (sol, _) = riemann_approximate(&target, &boxes, 0.4).unwrap();
        for term in &sol.terms {
            assert!(
                !boxes.inner().contains(&term.pole),
                "pole {} inside K",
                term.pole
            );
        }
    }

    #[test]
    fn riemann_error_decreases_with_mesh() {
        let target = Field::Pole(KernelTerm::simple(pt(-2.0, &[0.0]), 1.0));
        let boxes = test_boxes();
        let grid = boxes.inner().uniform_grid(11);
        let mut errors = Vec::new();
        for mesh in [0.5, 0.25] {
            let (sol, _) = riemann_approximate(&target, &boxes, mesh).unwrap();
            errors.push(sup_error(&sol, &target, &grid).unwrap());
        }
        assert!(
            errors[1] < errors[0],
            "no decrease: e(h)={}, e(h/2)={}",
            errors[0],
            errors[1]
        );
    }

    #[test]
    fn riemann_polynomial_target_hits_relative_tolerance() {
        // Mesh frozen from a one-time convergence run: 0.0625 puts the sup
        // error at ~3.5% of the target's sup over K (bound 5%).
        let target: Field<f64> =
            Field::Member(EntireDictionaryMember::HeatPolynomial { degree: 2 });
        let boxes = test_boxes();
        let grid = boxes.inner().uniform_grid(21);
        let sup_target = grid
            .iter()
            .map(|p| target.value(p).unwrap().abs())
            .fold(0.0f64, f64::max);
        let (sol, _) = riemann_approximate(&target, &boxes, 0.0625).unwrap();
        let err = sup_error(&sol, &target, &grid).unwrap();
        assert!(
            err <= 0.05 * sup_target,
            "sup error {err} above 5% of target scale {sup_target}"
        );
    }

    #[test]
    fn riemann_rejects_bad_mesh() {
        let r = riemann_approximate(&Field::zero(1), &test_boxes(), 0.0);
        assert!(matches!(r, Err(ApproxError::MeshTooCoarse { .. })));
        let r = riemann_approximate(&Field::zero(1), &test_boxes(), f64::NAN);
        assert!(matches!(r, Err(ApproxError::MeshTooCoarse { .. })));
    }

    #[test]
    fn riemann_converges_in_two_space_dimensions() {
        let target: Field<f64> =
            Field::Pole(KernelTerm::simple(SpacetimePoint::new(-2.0, vec![0.0, 0.0]), 1.0));
        let boxes = BoxPair::new(
            AaBox::from_ranges(&[(0.0, 1.0), (-1.0, 1.0), (-1.0, 1.0)]),
            AaBox::from_ranges(&[(-0.5, 1.5), (-2.0, 2.0), (-2.0, 2.0)]),
        )
        .unwrap();
        let grid = boxes.inner().uniform_grid(5);
        let mut errors = Vec::new();
        for mesh in [0.8, 0.4] {
            let (sol, _) = riemann_approximate(&target, &boxes, mesh).unwrap();
            for term in &sol.terms {
                assert!(!boxes.inner().contains(&term.pole));
            }
            errors.push(sup_error(&sol, &target, &grid).unwrap());
        }
        assert!(
            errors[1] < errors[0],
            "no decrease in n=2: {} -> {}",
            errors[0],
            errors[1]
        );
    }

    #[test]
    fn fit_exercises_derivative_order_columns() {
        // Target built from a mixed-derivative potential; the candidate set
        // offers several orders per pole and must reproduce it.
        let q_star = pt(-1.0, &[0.25]);
        let truth = KernelTerm {
            pole: q_star.clone(),
            coefficient: 1.5,
            order: DerivativeOrder::new(1, vec![1]),
        };
        let samples: Vec<(SpacetimePoint<f64>, f64)> =
            AaBox::from_ranges(&[(0.0, 1.0), (-1.0, 1.0)])
                .uniform_grid(6)
                .into_iter()
                .map(|p| {
                    let v = truth.value(&p);
                    (p, v)
                })
                .collect();
        let orders = vec![
            DerivativeOrder::new(0, vec![0]),
            DerivativeOrder::new(0, vec![1]),
            DerivativeOrder::new(1, vec![0]),
            DerivativeOrder::new(1, vec![1]),
            DerivativeOrder::new(0, vec![2]),
        ];
        let poles = PoleSet {
            candidates: vec![
                PoleCandidate {
                    point: q_star,
                    orders: Some(orders.clone()),
                },
                PoleCandidate {
                    point: pt(-2.0, &[-0.5]),
                    orders: Some(orders),
                },
            ],
        };
        let (sol, report) = fit_fixed_poles(&samples, &poles, 1e-12).unwrap();
        assert!(
            report.sup_residual <= 1e-8,
            "sup residual {}",
            report.sup_residual
        );
        // The fitted sum is still caloric away from its poles.
        let p = pt(0.5, &[0.6]);
        let r1 = heat_residual_fd(&sol, &p, 1e-2).unwrap().abs();
        let r2 = heat_residual_fd(&sol, &p, 5e-3).unwrap().abs();
        assert!(r2 <= 0.3 * r1 + 1e-12, "r1={r1}, r2={r2}");
    }

    #[test]
    fn fit_rejects_orders_beyond_ceilings() {
        let poles = PoleSet {
            candidates: vec![PoleCandidate {
                point: pt(-1.0, &[0.0]),
                orders: Some(vec![DerivativeOrder::new(0, vec![5])]),
            }],
        };
        let samples = vec![(pt(0.5, &[0.0]), 1.0)];
        assert!(matches!(
            fit_fixed_poles(&samples, &poles, 1e-10),
            Err(ApproxError::Kernel(KernelError::OrderTooHigh { .. }))
        ));
    }

    #[test]
    fn riemann_solution_is_caloric_away_from_poles() {
        let target = Field::Pole(KernelTerm::simple(pt(-2.0, &[0.0]), 1.0));
        let (sol, _) = riemann_approximate(&target, &test_boxes(), 0.4).unwrap();
        // Point inside K, at distance >= 0.1 from the shell.
        let p = pt(0.5, &[0.0]);
        let r1 = heat_residual_fd(&sol, &p, 1e-2).unwrap().abs();
        let r2 = heat_residual_fd(&sol, &p, 5e-3).unwrap().abs();
        assert!(r2 <= 0.3 * r1 + 1e-12, "r1={r1}, r2={r2}");
    }

    #[test]
    fn fit_recovers_exactly_representable_target() {
        let q_star = pt(-1.0, &[0.5]);
        let truth = KernelTerm::simple(q_star.clone(), 2.0);
        let candidates = vec![
            pt(-1.0, &[-0.5]),
            q_star.clone(),
            pt(-2.0, &[0.0]),
            pt(-1.5, &[1.0]),
        ];
        let samples: Vec<(SpacetimePoint<f64>, f64)> =
            AaBox::from_ranges(&[(0.0, 1.0), (-1.0, 1.0)])
                .uniform_grid(6)
                .into_iter()
                .map(|p| {
                    let v = truth.value(&p);
                    (p, v)
                })
                .collect();
        let (sol, report) = fit_fixed_poles(&samples, &PoleSet::simple(candidates), 1e-10).unwrap();
        assert!(report.sup_residual <= 1e-8, "sup {}", report.sup_residual);
        // The fitted sum reproduces the samples even if coefficients spread.
        for (p, v) in &samples {
            assert!((sol.value(p).unwrap() - v).abs() <= 1e-7);
        }
    }

    #[test]
    fn fit_zero_targets_give_zero_coefficients() {
        let samples: Vec<(SpacetimePoint<f64>, f64)> =
            vec![(pt(0.5, &[0.0]), 0.0), (pt(0.75, &[0.5]), 0.0)];
        let poles = PoleSet::simple(vec![pt(-1.0, &[0.0]), pt(-0.5, &[1.5])]);
        let (sol, report) = fit_fixed_poles(&samples, &poles, 1e-10).unwrap();
        assert!(sol.terms.iter().all(|t| t.coefficient.abs() < 1e-14));
        assert_eq!(report.sup_residual, 0.0);
    }

    #[test]
    fn fit_rejects_causally_dead_pole_sets() {
        let samples: Vec<(SpacetimePoint<f64>, f64)> =
            vec![(pt(0.0, &[0.0]), 1.0), (pt(0.5, &[0.5]), 2.0)];
        // Poles at or after every sample time: columns vanish identically.
        let poles = PoleSet::simple(vec![pt(0.5, &[0.0]), pt(2.0, &[0.0])]);
        assert!(matches!(
            fit_fixed_poles(&samples, &poles, 1e-10),
            Err(ApproxError::AllColumnsDegenerate)
        ));
    }

    #[test]
    fn fit_drops_dead_columns_but_keeps_live_ones() {
        let truth = KernelTerm::simple(pt(-1.0, &[0.0]), 1.0);
        let samples: Vec<(SpacetimePoint<f64>, f64)> = vec![
            (pt(0.0, &[0.1]), truth.value(&pt(0.0, &[0.1]))),
            (pt(0.5, &[0.4]), truth.value(&pt(0.5, &[0.4]))),
            (pt(1.0, &[-0.3]), truth.value(&pt(1.0, &[-0.3]))),
        ];
        let poles = PoleSet::simple(vec![pt(-1.0, &[0.0]), pt(5.0, &[0.0])]);
        let (_, report) = fit_fixed_poles(&samples, &poles, 1e-10).unwrap();
        assert_eq!(report.kept_columns, vec![0]);
        assert_eq!(report.dropped_columns, vec![1]);
    }

    #[test]
    fn fitted_solution_vanishes_before_earliest_pole() {
        let truth = KernelTerm::simple(pt(-1.0, &[0.0]), 3.0);
        let samples: Vec<(SpacetimePoint<f64>, f64)> =
            AaBox::from_ranges(&[(0.0, 1.0), (-1.0, 1.0)])
                .uniform_grid(4)
                .into_iter()
                .map(|p| {
                    let v = truth.value(&p);
                    (p, v)
                })
                .collect();
        let poles = PoleSet::simple(vec![pt(-1.0, &[0.0]), pt(-0.5, &[0.5])]);
        let (sol, _) = fit_fixed_poles(&samples, &poles, 1e-10).unwrap();
        let early = sol.earliest_pole_time().unwrap();
        for x in [-2.0, 0.0, 1.0] {
            assert_eq!(sol.value(&pt(early - 0.25, &[x])).unwrap(), 0.0);
        }
    }

    #[test]
    fn greedy_recovers_two_term_target() {
        let t1 = KernelTerm::simple(pt(-1.0, &[-0.5]), 1.5);
        let t2 = KernelTerm::simple(pt(-0.5, &[0.75]), -0.8);
        let target = RationalHeatSolution {
            dim: 1,
            terms: vec![t1.clone(), t2.clone()],
        };
        let mut candidates = vec![
            pt(-2.0, &[0.0]),
            t1.pole.clone(),
            pt(-1.5, &[1.0]),
            t2.pole.clone(),
            pt(-0.25, &[-1.0]),
        ];
        candidates.push(pt(-3.0, &[2.0]));
        let grid = AaBox::from_ranges(&[(0.0, 1.0), (-1.0, 1.0)]).uniform_grid(6);
        let (sol, report) =
            greedy_fit(&target, &grid, &PoleSet::simple(candidates), 8, 1e-8, 1e-12).unwrap();
        assert!(
            report.achieved_sup_residual <= 1e-8,
            "sup {}",
            report.achieved_sup_residual
        );
        assert!(sol.terms.len() <= 4, "used {} terms", sol.terms.len());
    }

    #[test]
    fn greedy_edge_cases() {
        let target = Field::Pole(KernelTerm::simple(pt(-1.0, &[0.0]), 1.0));
        let grid = AaBox::from_ranges(&[(0.0, 1.0), (-1.0, 1.0)]).uniform_grid(4);
        let poles = PoleSet::simple(vec![pt(-1.0, &[0.0])]);
        // Infinite tolerance: empty solution.
        let (sol, _) = greedy_fit(&target, &grid, &poles, 10, f64::INFINITY, 1e-12).unwrap();
        assert!(sol.terms.is_empty());
        // Zero terms allowed: residual is the target's sup.
        let (sol, report) = greedy_fit(&target, &grid, &poles, 0, 1e-8, 1e-12).unwrap();
        assert!(sol.terms.is_empty());
        let expect = grid
            .iter()
            .map(|p| target.value(p).unwrap().abs())
            .fold(0.0f64, f64::max);
        assert_eq!(report.achieved_sup_residual, expect);
    }

    #[test]
    fn sup_error_basics() {
        let f: Field<f64> = Field::Member(EntireDictionaryMember::HeatPolynomial { degree: 2 });
        let grid = AaBox::from_ranges(&[(0.0, 1.0), (-1.0, 1.0)]).uniform_grid(4);
        assert_eq!(sup_error(&f, &f.clone(), &grid).unwrap(), 0.0);
        let g = Field::Sum(vec![f.clone(), Field::Constant { dim: 1, value: 1.0 }]);
        assert!((sup_error(&f, &g, &grid).unwrap() - 1.0).abs() < 1e-12);
        let zero = Field::zero(1);
        let kernel_field = Field::Pole(KernelTerm::simple(pt(0.0, &[0.0]), 1.0));
        let one_point = vec![pt(1.0, &[0.0])];
        let e = sup_error(&kernel_field, &zero, &one_point).unwrap();
        assert!((e - phi(&pt(1.0, &[0.0]))).abs() < 1e-15);
    }

    #[test]
    fn solution_serde_matches_wire_format() {
        let sol = RationalHeatSolution {
            dim: 1,
            terms: vec![KernelTerm::simple(pt(-2.0, &[0.0]), 1.0)],
        };
        let json = serde_json::to_value(&sol).unwrap();
        assert_eq!(json["n"], 1);
        assert_eq!(json["terms"][0]["pole"]["t"], -2.0);
        assert_eq!(json["terms"][0]["coeff"], 1.0);
        assert_eq!(json["terms"][0]["j"], 0);
        let back: RationalHeatSolution<f64> = serde_json::from_value(json).unwrap();
        assert_eq!(back, sol);
    }
}
