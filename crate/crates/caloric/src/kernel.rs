//! The heat kernel and its space/time derivatives.
//!
//! ```text
//! Φ(t, x) = (4πt)^{-n/2} exp(-|x|²/(4t))   for t > 0,
//! Φ(t, x) = 0                              for t ≤ 0.
//! ```
//!
//! Evaluation goes through log space so that far-field points underflow to a
//! clean zero instead of producing `0 · ∞` artifacts. The kernel factorises
//! over space coordinates, so a mixed spatial derivative is the kernel times
//! a product of one-dimensional Gaussian-derivative polynomials, each obtained
//! from the recurrence `P_{k+1} = P_k' - y/(2t) · P_k`. Time derivatives are
//! rewritten as iterated spatial Laplacians (`∂_t Φ = ΔΦ` for `t > 0`) before
//! evaluation, so every order reduces to the spatial case.

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::num::{cast, Real};

/// Exponent below which the kernel is flushed to exactly zero.
const LOG_FLOOR: f64 = -700.0;

/// A point `(t, x)` of `R^{n+1}`, time first.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpacetimePoint<T> {
    pub t: T,
    pub x: Vec<T>,
}

impl<T: Real> SpacetimePoint<T> {
    pub fn new(t: T, x: Vec<T>) -> Self {
        assert!(!x.is_empty(), "space dimension must be at least 1");
        Self { t, x }
    }

    /// Space dimension `n`.
    pub fn dim(&self) -> usize {
        self.x.len()
    }

    /// Flat coordinate vector, time first.
    pub fn coords(&self) -> Vec<T> {
        let mut c = Vec::with_capacity(1 + self.x.len());
        c.push(self.t);
        c.extend_from_slice(&self.x);
        c
    }

    pub fn from_coords(coords: &[T]) -> Self {
        assert!(
            coords.len() >= 2,
            "need a time and at least one space coordinate"
        );
        Self {
            t: coords[0],
            x: coords[1..].to_vec(),
        }
    }

    /// Componentwise difference `self - other`.
    pub fn minus(&self, other: &Self) -> Self {
        assert_eq!(self.dim(), other.dim());
        Self {
            t: self.t - other.t,
            x: self.x.iter().zip(&other.x).map(|(a, b)| *a - *b).collect(),
        }
    }

    pub fn plus(&self, other: &Self) -> Self {
        assert_eq!(self.dim(), other.dim());
        Self {
            t: self.t + other.t,
            x: self.x.iter().zip(&other.x).map(|(a, b)| *a + *b).collect(),
        }
    }

    /// Euclidean norm of the full space-time coordinate vector.
    pub fn norm(&self) -> T {
        let mut s = self.t * self.t;
        for &v in &self.x {
            s += v * v;
        }
        s.sqrt()
    }
}

impl<T: Real> fmt::Display for SpacetimePoint<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(t={}", self.t)?;
        for v in &self.x {
            write!(f, ", {v}")?;
        }
        write!(f, ")")
    }
}

/// Mixed derivative order: `j` time derivatives and a spatial multi-index.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DerivativeOrder {
    #[serde(rename = "j")]
    pub time: u32,
    #[serde(rename = "alpha")]
    pub space: Vec<u32>,
}

impl DerivativeOrder {
    pub fn new(time: u32, space: Vec<u32>) -> Self {
        Self { time, space }
    }

    /// The plain kernel itself: `j = 0`, `α = 0`.
    pub fn simple(dim: usize) -> Self {
        Self {
            time: 0,
            space: vec![0; dim],
        }
    }

    pub fn space_total(&self) -> u32 {
        self.space.iter().sum()
    }

    pub fn is_simple(&self) -> bool {
        self.time == 0 && self.space_total() == 0
    }
}

impl fmt::Display for DerivativeOrder {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "j={}, alpha={:?}", self.time, self.space)
    }
}

/// Ceilings on the derivative orders accepted by [`phi_derivative`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct DerivativeLimits {
    pub max_time_order: u32,
    pub max_space_order: u32,
}

impl Default for DerivativeLimits {
    fn default() -> Self {
        Self {
            max_time_order: 2,
            max_space_order: 4,
        }
    }
}

impl DerivativeLimits {
    pub fn admits(&self, d: &DerivativeOrder) -> bool {
        d.time <= self.max_time_order && d.space_total() <= self.max_space_order
    }
}

#[derive(Debug, Clone, Error, PartialEq)]
pub enum KernelError {
    #[error("derivative order too high: {order} exceeds j <= {max_time}, |alpha| <= {max_space}")]
    OrderTooHigh {
        order: DerivativeOrder,
        max_time: u32,
        max_space: u32,
    },
    #[error("dimension mismatch: point has n={point_dim}, multi-index has n={order_dim}")]
    DimensionMismatch { point_dim: usize, order_dim: usize },
}

/// Kernel value at `p`. Total: returns exactly 0 for `t <= 0` and flushes to
/// 0 when the log-space exponent drops below the representable floor.
pub fn phi<T: Real>(p: &SpacetimePoint<T>) -> T {
    gaussian_with_polynomials(p.t, &p.x, &[])
}

/// Mixed derivative `∂_t^j ∂_x^α Φ` at `p`; 0 for `t <= 0`.
pub fn phi_derivative<T: Real>(
    p: &SpacetimePoint<T>,
    d: &DerivativeOrder,
) -> Result<T, KernelError> {
    phi_derivative_with_limits(p, d, &DerivativeLimits::default())
}

/// As [`phi_derivative`] with explicit order ceilings.
pub fn phi_derivative_with_limits<T: Real>(
    p: &SpacetimePoint<T>,
    d: &DerivativeOrder,
    limits: &DerivativeLimits,
) -> Result<T, KernelError> {
    if d.space.len() != p.dim() {
        return Err(KernelError::DimensionMismatch {
            point_dim: p.dim(),
            order_dim: d.space.len(),
        });
    }
    if !limits.admits(d) {
        return Err(KernelError::OrderTooHigh {
            order: d.clone(),
            max_time: limits.max_time_order,
            max_space: limits.max_space_order,
        });
    }
    Ok(phi_derivative_raw(p.t, &p.x, d.time, &d.space))
}

/// Derivative evaluation without order ceilings. Internal entry point used to
/// form gradients and time derivatives of maximal-order terms.
pub(crate) fn phi_derivative_raw<T: Real>(t: T, x: &[T], time_order: u32, space: &[u32]) -> T {
    debug_assert_eq!(x.len(), space.len());
    if t <= T::zero() {
        return T::zero();
    }
    if time_order == 0 {
        return gaussian_with_polynomials(t, x, space);
    }
    // ∂_t = Δ on the smooth region: expand one Laplacian and recurse.
    let mut sum = T::zero();
    for i in 0..x.len() {
        let mut bumped = space.to_vec();
        bumped[i] += 2;
        sum += phi_derivative_raw(t, x, time_order - 1, &bumped);
    }
    sum
}

/// Computes `Φ(t,x) · Π_i P_{k_i}(x_i)` where `P_k` is the polynomial factor
/// of the k-th Gaussian derivative, with the Gaussian part in log space.
fn gaussian_with_polynomials<T: Real>(t: T, x: &[T], orders: &[u32]) -> T {
    if t <= T::zero() {
        return T::zero();
    }
    let four_t = cast::<T>(4.0) * t;
    let norm_sq = x.iter().fold(T::zero(), |acc, &v| acc + v * v);
    let n_half = cast::<T>(x.len() as f64 / 2.0);
    let log_phi = -n_half * (four_t * T::PI()).ln() - norm_sq / four_t;
    if log_phi < cast(LOG_FLOOR) {
        return T::zero();
    }
    let mut value = log_phi.exp();
    for (i, &k) in orders.iter().enumerate() {
        if k > 0 {
            value *= gaussian_derivative_polynomial(t, x[i], k);
        }
    }
    value
}

/// Polynomial `P_k(y)` with `∂_y^k e^{-y²/4t} = P_k(y) e^{-y²/4t}`, evaluated
/// at `y`. Recurrence on coefficient vectors: `P_{k+1} = P_k' - y/(2t) P_k`.
fn gaussian_derivative_polynomial<T: Real>(t: T, y: T, k: u32) -> T {
    let inv_2t = (cast::<T>(2.0) * t).recip();
    let mut coeffs: Vec<T> = vec![T::one()];
    for _ in 0..k {
        let mut next = vec![T::zero(); coeffs.len() + 1];
        for (i, &c) in coeffs.iter().enumerate() {
            if i > 0 {
                next[i - 1] += c * cast(i as f64);
            }
            next[i + 1] -= c * inv_2t;
        }
        coeffs = next;
    }
    // Horner evaluation.
    let mut acc = T::zero();
    for &c in coeffs.iter().rev() {
        acc = acc * y + c;
    }
    acc
}

/// One weighted derivative of the kernel anchored at a pole:
/// `c · ∂_t^j ∂_x^α Φ(p - pole)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KernelTerm<T> {
    pub pole: SpacetimePoint<T>,
    #[serde(rename = "coeff")]
    pub coefficient: T,
    #[serde(flatten)]
    pub order: DerivativeOrder,
}

impl<T: Real> KernelTerm<T> {
    /// Simple pole: the kernel itself, no derivatives.
    pub fn simple(pole: SpacetimePoint<T>, coefficient: T) -> Self {
        let order = DerivativeOrder::simple(pole.dim());
        Self {
            pole,
            coefficient,
            order,
        }
    }

    pub fn dim(&self) -> usize {
        self.pole.dim()
    }

    pub fn value(&self, p: &SpacetimePoint<T>) -> T {
        let d = p.minus(&self.pole);
        self.coefficient * phi_derivative_raw(d.t, &d.x, self.order.time, &self.order.space)
    }

    pub fn spatial_gradient(&self, p: &SpacetimePoint<T>) -> Vec<T> {
        let d = p.minus(&self.pole);
        (0..self.dim())
            .map(|i| {
                let mut space = self.order.space.clone();
                space[i] += 1;
                self.coefficient * phi_derivative_raw(d.t, &d.x, self.order.time, &space)
            })
            .collect()
    }

    pub fn time_derivative(&self, p: &SpacetimePoint<T>) -> T {
        let d = p.minus(&self.pole);
        self.coefficient * phi_derivative_raw(d.t, &d.x, self.order.time + 1, &self.order.space)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pt(t: f64, x: &[f64]) -> SpacetimePoint<f64> {
        SpacetimePoint::new(t, x.to_vec())
    }

    #[test]
    fn phi_vanishes_for_nonpositive_time() {
        assert_eq!(phi(&pt(-1.0, &[0.3])), 0.0);
        assert_eq!(phi(&pt(0.0, &[2.0])), 0.0);
        assert_eq!(phi(&pt(-0.5, &[1.0, 2.0])), 0.0);
    }

    #[test]
    fn phi_matches_closed_form_at_reference_points() {
        // (4π)^{-1/2}
        let expected = (4.0 * std::f64::consts::PI).powf(-0.5);
        assert!((phi(&pt(1.0, &[0.0])) - expected).abs() < 1e-15);
        // (4π)^{-1/2} e^{-1}
        let expected2 = expected * (-1.0f64).exp();
        assert!((phi(&pt(1.0, &[2.0])) - expected2).abs() < 1e-15);
        // n = 2 at the origin: (4πt)^{-1}
        let expected3 = 1.0 / (4.0 * std::f64::consts::PI * 0.5);
        assert!((phi(&pt(0.5, &[0.0, 0.0])) - expected3).abs() < 1e-15);
    }

    #[test]
    fn far_field_flushes_to_exact_zero() {
        // Exponent ~ -2.5e5, far below the floor.
        assert_eq!(phi(&pt(1e-3, &[100.0])), 0.0);
    }

    #[test]
    fn phi_is_even_in_space() {
        let p = pt(0.7, &[1.3, -0.4]);
        let m = pt(0.7, &[-1.3, 0.4]);
        assert_eq!(phi(&p), phi(&m));
    }

    #[test]
    fn first_space_derivative_is_odd() {
        let d = DerivativeOrder::new(0, vec![1]);
        assert_eq!(phi_derivative(&pt(1.0, &[0.0]), &d).unwrap(), 0.0);
        let left = phi_derivative(&pt(1.0, &[-0.8]), &d).unwrap();
        let right = phi_derivative(&pt(1.0, &[0.8]), &d).unwrap();
        assert!((left + right).abs() < 1e-16);
    }

    #[test]
    fn derivatives_vanish_for_nonpositive_time() {
        let d = DerivativeOrder::new(1, vec![2]);
        assert_eq!(phi_derivative(&pt(-0.5, &[1.0]), &d).unwrap(), 0.0);
        assert_eq!(phi_derivative(&pt(0.0, &[1.0]), &d).unwrap(), 0.0);
    }

    #[test]
    fn time_derivative_equals_laplacian() {
        let dt = DerivativeOrder::new(1, vec![0]);
        let dxx = DerivativeOrder::new(0, vec![2]);
        let p = pt(1.0, &[0.0]);
        let lhs = phi_derivative(&p, &dt).unwrap();
        let rhs = phi_derivative(&p, &dxx).unwrap();
        assert_eq!(lhs, rhs);
    }

    #[test]
    fn derivatives_match_finite_differences() {
        let h = 1e-4;
        let probes = [
            (0.8, vec![0.3], DerivativeOrder::new(0, vec![1])),
            (1.4, vec![-0.6], DerivativeOrder::new(0, vec![2])),
            (0.9, vec![0.2, -0.5], DerivativeOrder::new(0, vec![1, 1])),
        ];
        for (t, x, d) in probes {
            let p = pt(t, &x);
            let analytic = phi_derivative(&p, &d).unwrap();
            let fd = fd_space_derivative(t, &x, &d.space, h);
            let scale = analytic.abs().max(1e-3);
            assert!(
                (analytic - fd).abs() / scale < 1e-6,
                "mismatch at t={t} x={x:?} {d}: analytic={analytic} fd={fd}"
            );
        }
        // Time derivative against a central difference in t.
        let p = pt(1.0, &[0.4]);
        let d = DerivativeOrder::new(1, vec![0]);
        let analytic = phi_derivative(&p, &d).unwrap();
        let fd = (phi(&pt(1.0 + h, &[0.4])) - phi(&pt(1.0 - h, &[0.4]))) / (2.0 * h);
        assert!((analytic - fd).abs() / analytic.abs().max(1e-3) < 1e-6);
    }

    fn fd_space_derivative(t: f64, x: &[f64], space: &[u32], h: f64) -> f64 {
        // Apply second-order central stencils coordinate by coordinate.
        fn rec(t: f64, x: &mut Vec<f64>, space: &[u32], c: usize, h: f64) -> f64 {
            if c == space.len() {
                return phi(&SpacetimePoint::new(t, x.clone()));
            }
            match space[c] {
                0 => rec(t, x, space, c + 1, h),
                1 => {
                    x[c] += h;
                    let plus = rec(t, x, space, c + 1, h);
                    x[c] -= 2.0 * h;
                    let minus = rec(t, x, space, c + 1, h);
                    x[c] += h;
                    (plus - minus) / (2.0 * h)
                }
                2 => {
                    let mid = rec(t, x, space, c + 1, h);
                    x[c] += h;
                    let plus = rec(t, x, space, c + 1, h);
                    x[c] -= 2.0 * h;
                    let minus = rec(t, x, space, c + 1, h);
                    x[c] += h;
                    (plus - 2.0 * mid + minus) / (h * h)
                }
                _ => unreachable!("test stencils stop at order 2"),
            }
        }
        rec(t, &mut x.to_vec(), space, 0, h)
    }

    #[test]
    fn order_ceilings_are_enforced() {
        let p = pt(1.0, &[0.0]);
        let too_much_time = DerivativeOrder::new(3, vec![0]);
        assert!(matches!(
            phi_derivative(&p, &too_much_time),
            Err(KernelError::OrderTooHigh { .. })
        ));
        let too_much_space = DerivativeOrder::new(0, vec![5]);
        assert!(matches!(
            phi_derivative(&p, &too_much_space),
            Err(KernelError::OrderTooHigh { .. })
        ));
        let wrong_dim = DerivativeOrder::new(0, vec![1, 1]);
        assert!(matches!(
            phi_derivative(&p, &wrong_dim),
            Err(KernelError::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn second_time_derivative_is_biharmonic() {
        // j = 2 must agree with the fourth space derivative plus cross terms;
        // in n = 1 that is just ∂_x^4.
        let p = pt(0.9, &[0.5]);
        let d2t = DerivativeOrder::new(2, vec![0]);
        let d4x = DerivativeOrder::new(0, vec![4]);
        let a = phi_derivative(&p, &d2t).unwrap();
        let b = phi_derivative(&p, &d4x).unwrap();
        assert!((a - b).abs() <= 1e-14 * a.abs().max(1.0));
    }

    #[test]
    fn kernel_term_gradient_and_time_derivative_are_consistent() {
        let term = KernelTerm::simple(pt(-2.0, &[0.0]), 1.5);
        let p = pt(0.5, &[0.7]);
        let h = 1e-5;
        let g = term.spatial_gradient(&p)[0];
        let fd = (term.value(&pt(0.5, &[0.7 + h])) - term.value(&pt(0.5, &[0.7 - h]))) / (2.0 * h);
        assert!((g - fd).abs() < 1e-7 * g.abs().max(1e-3));
        let dt = term.time_derivative(&p);
        let fd_t =
            (term.value(&pt(0.5 + h, &[0.7])) - term.value(&pt(0.5 - h, &[0.7]))) / (2.0 * h);
        assert!((dt - fd_t).abs() < 1e-7 * dt.abs().max(1e-3));
    }

    #[test]
    fn maximal_order_terms_still_differentiate_consistently() {
        // Gradients and time derivatives of ceiling-order terms go through
        // the internal path one order beyond the public limits.
        let term = KernelTerm {
            pole: pt(-1.0, &[0.2]),
            coefficient: 0.8,
            order: DerivativeOrder::new(2, vec![4]),
        };
        let p = pt(0.6, &[0.9]);
        let h = 1e-5;
        let g = term.spatial_gradient(&p)[0];
        let fd = (term.value(&pt(0.6, &[0.9 + h])) - term.value(&pt(0.6, &[0.9 - h]))) / (2.0 * h);
        assert!(
            (g - fd).abs() / g.abs().max(1.0) < 1e-6,
            "gradient {g} vs fd {fd}"
        );
        let dt = term.time_derivative(&p);
        let fd = (term.value(&pt(0.6 + h, &[0.9])) - term.value(&pt(0.6 - h, &[0.9]))) / (2.0 * h);
        assert!(
            (dt - fd).abs() / dt.abs().max(1.0) < 1e-6,
            "time derivative {dt} vs fd {fd}"
        );
    }

    #[test]
    fn high_space_orders_match_differences_of_lower_orders() {
        // ∂_x^{k+1} from a central difference of the analytic ∂_x^k.
        let h = 1e-5;
        for k in 1..=4u32 {
            let d_hi = DerivativeOrder::new(0, vec![k]);
            let d_lo = DerivativeOrder::new(0, vec![k - 1]);
            let at = |t: f64, x: f64, d: &DerivativeOrder| phi_derivative(&pt(t, &[x]), d).unwrap();
            let analytic = at(0.8, 0.7, &d_hi);
            let fd = (at(0.8, 0.7 + h, &d_lo) - at(0.8, 0.7 - h, &d_lo)) / (2.0 * h);
            assert!(
                (analytic - fd).abs() / analytic.abs().max(1.0) < 1e-6,
                "order {k}: {analytic} vs {fd}"
            );
        }
    }

    #[test]
    fn works_in_f32_too() {
        let p: SpacetimePoint<f32> = SpacetimePoint::new(1.0, vec![0.0]);
        let expected = (4.0 * std::f32::consts::PI).powf(-0.5);
        assert!((phi(&p) - expected).abs() < 1e-6);
    }

    #[test]
    fn kernel_term_serde_round_trip() {
        let term = KernelTerm {
            pole: pt(-2.0, &[0.0]),
            coefficient: 1.5,
            order: DerivativeOrder::new(1, vec![2]),
        };
        let json = serde_json::to_string(&term).unwrap();
        assert!(json.contains("\"coeff\":1.5"));
        assert!(json.contains("\"j\":1"));
        assert!(json.contains("\"alpha\":[2]"));
        let back: KernelTerm<f64> = serde_json::from_str(&json).unwrap();
        assert_eq!(back, term);
    }
}
