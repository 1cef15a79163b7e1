//! The Cole-Hopf change of variables and Burgers-side fields.
//!
//! For the quasilinear equation `p_t = Δp + a(p)|∇p|²` the strictly monotone
//! substitution `u = U(p)` with `U'(p) = U₁ exp(-∫₀^p a)` turns solutions
//! into caloric functions and back: `p = U⁻¹(u)`. With constant `a` the map
//! has closed forms
//!
//! ```text
//! U(p)    = U₀ + U₁ (1 - e^{-a p}) / a
//! U⁻¹(u)  = -(1/a) log(1 - a (u - U₀) / U₁)
//! ```
//!
//! degenerating to the affine map as `a → 0`; near-zero `a` switches to a
//! two-term series to dodge the 0/0. The inverse exists exactly where
//! `a (u - U₀) / U₁ < 1`, checked pointwise at evaluation time.
//!
//! With `U' = U₁ exp(-∫a)` the chain rule gives `U''/U' = -a`, so the
//! coefficient multiplying `|∇p|²` in the equation these fields satisfy is
//! `U''/U'`, exposed as [`ColeHopfMap::quasilinear_coefficient`]; the
//! residual oracle measures exactly that equation.
//!
//! Addition of caloric functions transports to the composition symmetry
//! `p₁ ∘ p₂ = U⁻¹(U(p₁) + U(p₂))` on the Burgers side.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::approx::{
    riemann_approximate, ApproxError, BoxPair, RationalHeatSolution, RiemannReport,
};
use crate::fields::{EvalError, Field, HeatField};
use crate::kernel::SpacetimePoint;
use crate::num::{cast, Real};

/// Below this magnitude the constant-`a` closed forms switch to their series.
pub const SMALL_A_THRESHOLD: f64 = 1e-8;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum ColeHopfError<T: Real> {
    #[error("composed fields use different transform maps")]
    MapMismatch,
    #[error("invalid map: {reason}")]
    InvalidMap { reason: String },
    #[error("operation requires a constant coefficient a")]
    NonConstantCoefficient,
    #[error(transparent)]
    Eval(#[from] EvalError<T>),
    #[error(transparent)]
    Approx(#[from] ApproxError<T>),
}

/// Coefficient `a` of the quasilinear term: a constant, or a continuous
/// function of `p` given by a sorted sample table with linear interpolation
/// (clamped beyond the table ends).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Coefficient<T> {
    Constant(T),
    Tabulated { points: Vec<(T, T)> },
}

impl<T: Real> Coefficient<T> {
    pub fn eval(&self, p: T) -> T {
        match self {
            Coefficient::Constant(a) => *a,
            Coefficient::Tabulated { points } => {
                if points.is_empty() {
                    return T::zero();
                }
                if p <= points[0].0 {
                    return points[0].1;
                }
                for w in points.windows(2) {
                    if p <= w[1].0 {
                        let span = w[1].0 - w[0].0;
                        if span == T::zero() {
                            return w[1].1;
                        }
                        let frac = (p - w[0].0) / span;
                        return w[0].1 + frac * (w[1].1 - w[0].1);
                    }
                }
                points.last().unwrap().1
            }
        }
    }

    pub fn as_constant(&self) -> Option<T> {
        match self {
            Coefficient::Constant(a) => Some(*a),
            Coefficient::Tabulated { .. } => None,
        }
    }
}

/// The transform triple `(a, U₀, U₁)` with `U₁ > 0`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ColeHopfMap<T> {
    pub a: Coefficient<T>,
    #[serde(rename = "U0")]
    pub u0: T,
    #[serde(rename = "U1")]
    pub u1: T,
}

impl<T: Real> ColeHopfMap<T> {
    pub fn new(a: Coefficient<T>, u0: T, u1: T) -> Result<Self, ColeHopfError<T>> {
        if !(u1 > T::zero()) {
            return Err(ColeHopfError::InvalidMap {
                reason: format!("U1 must be positive, got {u1}"),
            });
        }
        if let Coefficient::Tabulated { points } = &a {
            if points.is_empty() {
                return Err(ColeHopfError::InvalidMap {
                    reason: "tabulated coefficient needs at least one point".into(),
                });
            }
            if points.windows(2).any(|w| !(w[0].0 <= w[1].0)) {
                return Err(ColeHopfError::InvalidMap {
                    reason: "tabulated coefficient must be sorted by p".into(),
                });
            }
        }
        Ok(Self { a, u0, u1 })
    }

    /// Constant-`a` map with the default normalization `U₀ = 0`, `U₁ = 1`,
    /// which makes the zero field the neutral element of composition.
    pub fn constant(a: T) -> Self {
        Self {
            a: Coefficient::Constant(a),
            u0: T::zero(),
            u1: T::one(),
        }
    }

    fn small_a(&self) -> bool {
        matches!(&self.a, Coefficient::Constant(a) if a.abs() < cast(SMALL_A_THRESHOLD))
    }

    /// `U(p)`.
    pub fn forward(&self, p: T) -> T {
        match &self.a {
            Coefficient::Constant(a) => {
                if self.small_a() {
                    // Two-term series of (1 - e^{-ap})/a.
                    self.u0 + self.u1 * (p - *a * p * p * cast(0.5))
                } else {
                    self.u0 + self.u1 * (T::one() - (-*a * p).exp()) / *a
                }
            }
            Coefficient::Tabulated { .. } => self.u0 + self.u1 * self.cumulative_u_prime(p),
        }
    }

    /// `U'(p) = U₁ exp(-∫₀^p a)`.
    pub fn forward_derivative(&self, p: T) -> T {
        match &self.a {
            Coefficient::Constant(a) => self.u1 * (-*a * p).exp(),
            Coefficient::Tabulated { .. } => self.u1 * (-self.integral_a(p)).exp(),
        }
    }

    /// `U''(p) / U'(p)`, the coefficient of `|∇p|²` in the quasilinear
    /// equation solved by `U⁻¹` of a caloric field. Equal to `-a(p)` for the
    /// exponential-form derivative used here.
    pub fn quasilinear_coefficient(&self, p: T) -> T {
        -self.a.eval(p)
    }

    /// `U⁻¹(u)`; errors where the inverse is undefined.
    pub fn inverse(&self, u: T) -> Result<T, EvalError<T>> {
        match &self.a {
            Coefficient::Constant(a) => {
                let w = (u - self.u0) / self.u1;
                if self.small_a() {
                    Ok(w + *a * w * w * cast(0.5))
                } else {
                    let arg = T::one() - *a * w;
                    if arg <= T::zero() {
                        return Err(EvalError::DomainViolation {
                            value: u,
                            point: None,
                        });
                    }
                    Ok(-arg.ln() / *a)
                }
            }
            Coefficient::Tabulated { .. } => self.inverse_by_rootfinding(u),
        }
    }

    /// Domain of the inverse: `a (u - U₀) / U₁ < 1`, strict; all of the line
    /// for `a = 0`. For a non-constant coefficient the domain is probed by
    /// bracketing the monotone `U`.
    pub fn domain_valid(&self, u: T) -> bool {
        match &self.a {
            Coefficient::Constant(a) => {
                if self.small_a() {
                    true
                } else {
                    *a * (u - self.u0) / self.u1 < T::one()
                }
            }
            Coefficient::Tabulated { .. } => self.inverse_by_rootfinding(u).is_ok(),
        }
    }

    /// `∫₀^p a(s) ds` by adaptive Simpson quadrature.
    fn integral_a(&self, p: T) -> T {
        adaptive_simpson(|s| self.a.eval(s), T::zero(), p, cast(1e-12), 24)
    }

    /// `∫₀^p exp(-∫₀^s a) ds` by adaptive Simpson on the outer integral.
    fn cumulative_u_prime(&self, p: T) -> T {
        adaptive_simpson(
            |s| (-self.integral_a(s)).exp(),
            T::zero(),
            p,
            cast(1e-12),
            20,
        )
    }

    /// Monotone bracketing, bisection, then Newton polish to 1e-12.
    fn inverse_by_rootfinding(&self, u: T) -> Result<T, EvalError<T>> {
        let mut lo = -T::one();
        let mut hi = T::one();
        let target = u;
        let f = |p: T| self.forward(p) - target;
        let mut flo = f(lo);
        let mut fhi = f(hi);
        let mut expansions = 0;
        while flo > T::zero() || fhi < T::zero() {
            if expansions > 60 {
                return Err(EvalError::DomainViolation {
                    value: u,
                    point: None,
                });
            }
            if flo > T::zero() {
                lo *= cast(2.0);
                flo = f(lo);
            }
            if fhi < T::zero() {
                hi *= cast(2.0);
                fhi = f(hi);
            }
            expansions += 1;
            if !flo.is_finite() || !fhi.is_finite() {
                return Err(EvalError::DomainViolation {
                    value: u,
                    point: None,
                });
            }
        }
        // Bisect to a rough root.
        let half = cast::<T>(0.5);
        for _ in 0..60 {
            let mid = (lo + hi) * half;
            if f(mid) <= T::zero() {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        // Newton polish with the closed-form derivative.
        let tol = cast::<T>(1e-12).max(T::epsilon() * cast(4.0));
        let mut p = (lo + hi) * half;
        for _ in 0..30 {
            let d = self.forward_derivative(p);
            if d <= T::zero() {
                break;
            }
            let step = f(p) / d;
            p -= step;
            if step.abs() <= tol * p.abs().max(T::one()) {
                break;
            }
        }
        Ok(p)
    }
}

/// Adaptive Simpson with absolute tolerance and bounded recursion depth.
fn adaptive_simpson<T: Real>(f: impl Fn(T) -> T + Copy, a: T, b: T, tol: T, depth: u32) -> T {
    if a == b {
        return T::zero();
    }
    fn simpson<T: Real>(f: impl Fn(T) -> T, a: T, b: T) -> T {
        let half = cast::<T>(0.5);
        let mid = (a + b) * half;
        (b - a) * (f(a) + cast::<T>(4.0) * f(mid) + f(b)) / cast(6.0)
    }
    fn rec<T: Real>(f: impl Fn(T) -> T + Copy, a: T, b: T, whole: T, tol: T, depth: u32) -> T {
        let half = cast::<T>(0.5);
        let mid = (a + b) * half;
        let left = simpson(f, a, mid);
        let right = simpson(f, mid, b);
        let delta = left + right - whole;
        if depth == 0 || delta.abs() <= cast::<T>(15.0) * tol {
            left + right + delta / cast(15.0)
        } else {
            rec(f, a, mid, left, tol * half, depth - 1)
                + rec(f, mid, b, right, tol * half, depth - 1)
        }
    }
    let (lo, hi, sign) = if a < b {
        (a, b, T::one())
    } else {
        (b, a, -T::one())
    };
    sign * rec(f, lo, hi, simpson(f, lo, hi), tol, depth)
}

/// Solution of `p_t = Δp + a(p)|∇p|²` realized as `U⁻¹` of a caloric field,
/// defined where the underlying values stay in the domain of the inverse.
#[derive(Debug, Clone, PartialEq)]
pub struct BurgersField<T> {
    pub map: ColeHopfMap<T>,
    pub heat: Field<T>,
}

impl<T: Real> BurgersField<T> {
    pub fn dim(&self) -> usize {
        self.heat.dim()
    }

    pub fn value(&self, p: &SpacetimePoint<T>) -> Result<T, EvalError<T>> {
        let u = self.heat.value(p)?;
        self.map.inverse(u).map_err(|e| match e {
            EvalError::DomainViolation { value, .. } => EvalError::DomainViolation {
                value,
                point: Some(p.clone()),
            },
            other => other,
        })
    }

    /// `∇p = ∇u / U'(p)`.
    pub fn spatial_gradient(&self, p: &SpacetimePoint<T>) -> Result<Vec<T>, EvalError<T>> {
        let v = self.value(p)?;
        let du = self.map.forward_derivative(v);
        Ok(self
            .heat
            .spatial_gradient(p)?
            .into_iter()
            .map(|g| g / du)
            .collect())
    }

    pub fn time_derivative(&self, p: &SpacetimePoint<T>) -> Result<T, EvalError<T>> {
        let v = self.value(p)?;
        let du = self.map.forward_derivative(v);
        Ok(self.heat.time_derivative(p)? / du)
    }

    /// Pointwise validity: the underlying field is valid and the value stays
    /// in the domain of the inverse.
    pub fn is_valid_at(&self, p: &SpacetimePoint<T>) -> bool {
        self.heat.is_valid_at(p)
            && self
                .heat
                .value(p)
                .map(|u| self.map.domain_valid(u))
                .unwrap_or(false)
    }

    /// Pointwise scalar multiple of the profile. Note this is a plain
    /// rescaling of values; the equation is not preserved under it.
    pub fn pointwise_scale(&self, factor: T) -> ScaledProfile<'_, T> {
        ScaledProfile { base: self, factor }
    }
}

/// Values of a Burgers field scaled by a constant factor.
pub struct ScaledProfile<'a, T> {
    base: &'a BurgersField<T>,
    factor: T,
}

impl<T: Real> ScaledProfile<'_, T> {
    pub fn value(&self, p: &SpacetimePoint<T>) -> Result<T, EvalError<T>> {
        Ok(self.factor * self.base.value(p)?)
    }
}

/// Wraps a caloric field as a Burgers solution via `U⁻¹`.
pub fn heat_to_burgers<T: Real>(map: ColeHopfMap<T>, u: Field<T>) -> BurgersField<T> {
    BurgersField { map, heat: u }
}

/// Composition symmetry `p₁ ∘ p₂ = U⁻¹(U(p₁) + U(p₂))`, realized as the sum
/// of the underlying caloric fields. Both fields must share the same map.
pub fn compose<T: Real>(
    p1: &BurgersField<T>,
    p2: &BurgersField<T>,
) -> Result<BurgersField<T>, ColeHopfError<T>> {
    if p1.map != p2.map {
        return Err(ColeHopfError::MapMismatch);
    }
    Ok(BurgersField {
        map: p1.map.clone(),
        heat: Field::Sum(vec![p1.heat.clone(), p2.heat.clone()]),
    })
}

/// Rational Burgers solution `U⁻¹` of a kernel-pole sum. With `shift` the
/// underlying caloric field is `U₀ + Σ terms`, so the solution vanishes
/// wherever the pole sum does; without it the pole sum is used as-is.
pub fn rational_burgers<T: Real>(
    map: ColeHopfMap<T>,
    solution: RationalHeatSolution<T>,
    shift: bool,
) -> Result<BurgersField<T>, ColeHopfError<T>> {
    if map.a.as_constant().is_none() {
        return Err(ColeHopfError::NonConstantCoefficient);
    }
    let dim = solution.dim;
    let sum: Field<T> = solution.into();
    let heat = if shift {
        Field::Sum(vec![Field::Constant { dim, value: map.u0 }, sum])
    } else {
        sum
    };
    Ok(BurgersField { map, heat })
}

/// Central-difference estimate of the quasilinear residual
/// `p_t - Δp - (U''/U')(p) |∇p|²` at `q` with step `h`, built from Burgers
/// values alone.
pub fn burgers_residual_fd<T: Real>(
    p: &BurgersField<T>,
    q: &SpacetimePoint<T>,
    h: T,
) -> Result<T, EvalError<T>> {
    assert!(h > T::zero(), "stencil step must be positive");
    let center = p.value(q)?;
    let two = cast::<T>(2.0);
    let mut tq = q.clone();
    tq.t = q.t + h;
    let v_tp = p.value(&tq)?;
    tq.t = q.t - h;
    let v_tm = p.value(&tq)?;
    let dt = (v_tp - v_tm) / (two * h);
    let mut lap = T::zero();
    let mut grad_sq = T::zero();
    for i in 0..q.dim() {
        let mut xq = q.clone();
        xq.x[i] = q.x[i] + h;
        let plus = p.value(&xq)?;
        xq.x[i] = q.x[i] - h;
        let minus = p.value(&xq)?;
        lap += (plus - two * center + minus) / (h * h);
        let g = (plus - minus) / (two * h);
        grad_sq += g * g;
    }
    let a_here = p.map.quasilinear_coefficient(center);
    Ok(dt - lap - a_here * grad_sq)
}

/// Report for [`approximate_burgers`].
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BurgersApproxReport<T> {
    pub riemann: RiemannReport<T>,
    pub sup_p_error: T,
    pub sup_u_error: T,
    /// `sup |(U⁻¹)'|` over the u-values met on the evaluation grid.
    pub inverse_derivative_bound: T,
}

/// Approximates a Burgers solution by a rational one: transport to the heat
/// side (the underlying caloric field is exactly `U ∘ target`), run the
/// Riemann-sum construction there, transport back, and report the sup error
/// in the `p` variable over a grid on `K`.
pub fn approximate_burgers<T: Real>(
    target: &BurgersField<T>,
    boxes: &BoxPair<T>,
    mesh: T,
    grid_per_axis: usize,
) -> Result<(BurgersField<T>, BurgersApproxReport<T>), ColeHopfError<T>> {
    let (rational, riemann) = riemann_approximate(&target.heat, boxes, mesh)?;
    let approx = BurgersField {
        map: target.map.clone(),
        heat: rational.into(),
    };
    let grid = boxes.inner().uniform_grid(grid_per_axis);
    let mut sup_p = T::zero();
    let mut sup_u = T::zero();
    let mut bound = T::zero();
    for q in &grid {
        let u_target = target.heat.value(q)?;
        let u_approx = approx.heat.value(q)?;
        sup_u = sup_u.max((u_target - u_approx).abs());
        let p_target = target.value(q)?;
        let p_approx = approx.value(q)?;
        sup_p = sup_p.max((p_target - p_approx).abs());
        for u in [u_target, u_approx] {
            let p_val = target.map.inverse(u)?;
            let d = target.map.forward_derivative(p_val).recip();
            bound = bound.max(d.abs());
        }
    }
    Ok((
        approx,
        BurgersApproxReport {
            riemann,
            sup_p_error: sup_p,
            sup_u_error: sup_u,
            inverse_derivative_bound: bound,
        },
    ))
}
