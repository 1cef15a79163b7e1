//! Evaluable caloric fields.
//!
//! [`HeatField`] is the common abstraction: value, spatial gradient and time
//! derivative at a point, plus a validity region where the field solves
//! `u_t = Δu`. The concrete [`Field`] enum covers constants, kernel pole
//! terms, the entire dictionary members (exponential, trig, heat-polynomial),
//! finite sums, scalings and translates.
//!
//! [`heat_residual_fd`] is the independent residual oracle: a second-order
//! central-difference estimate of `u_t - Δu` built from field values alone,
//! so it catches systematic errors in both the analytic derivatives and the
//! closed forms.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::kernel::{KernelTerm, SpacetimePoint};
use crate::num::{cast, Real};
use crate::runge::Region;

/// Evaluation-time errors shared by heat-side and Burgers-side fields.
#[derive(Debug, Clone, Error, PartialEq)]
pub enum EvalError<T: Real> {
    #[error("point {point} is outside the field's validity region")]
    OutsideValidity { point: SpacetimePoint<T> },
    #[error("value {value} leaves the domain of the inverse transform{}", point_suffix(.point))]
    DomainViolation {
        value: T,
        point: Option<SpacetimePoint<T>>,
    },
    #[error("dimension mismatch: field has n={expected}, point has n={found}")]
    DimensionMismatch { expected: usize, found: usize },
}

fn point_suffix<T: Real>(p: &Option<SpacetimePoint<T>>) -> String {
    match p {
        Some(p) => format!(" at {p}"),
        None => String::new(),
    }
}

/// Error from building a field out of a declarative description.
#[derive(Debug, Clone, Error, PartialEq)]
pub enum SpecError {
    #[error("malformed field spec: {reason}")]
    MalformedSpec { reason: String },
}

/// An evaluable solution of the heat equation on its validity region.
pub trait HeatField<T: Real> {
    /// Space dimension `n`.
    fn dim(&self) -> usize;
    fn value(&self, p: &SpacetimePoint<T>) -> Result<T, EvalError<T>>;
    fn spatial_gradient(&self, p: &SpacetimePoint<T>) -> Result<Vec<T>, EvalError<T>>;
    fn time_derivative(&self, p: &SpacetimePoint<T>) -> Result<T, EvalError<T>>;
    /// Open set on which the field is caloric.
    fn validity(&self) -> Region<T>;

    fn is_valid_at(&self, p: &SpacetimePoint<T>) -> bool {
        self.validity().contains(p)
    }
}

/// Closed-form entire solutions used as approximation dictionaries.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum EntireDictionaryMember<T> {
    /// `exp(<k, x> + |k|² t)`
    Exponential { k: Vec<T> },
    /// `exp(-|k|² t) cos(<k, x>)`
    TrigCos { k: Vec<T> },
    /// `exp(-|k|² t) sin(<k, x>)`
    TrigSin { k: Vec<T> },
    /// One-dimensional heat polynomial
    /// `v_d(t, x) = Σ_{0 <= 2m <= d} d!/(m!(d-2m)!) x^{d-2m} t^m`.
    HeatPolynomial { degree: u32 },
}

/// Largest heat-polynomial degree whose coefficients stay exact in `u128`.
pub const MAX_HEAT_POLY_DEGREE: u32 = 20;

impl<T: Real> EntireDictionaryMember<T> {
    pub fn dim(&self) -> usize {
        match self {
            Self::Exponential { k } | Self::TrigCos { k } | Self::TrigSin { k } => k.len(),
            Self::HeatPolynomial { .. } => 1,
        }
    }

    fn k_norm_sq(k: &[T]) -> T {
        k.iter().fold(T::zero(), |acc, &v| acc + v * v)
    }

    fn k_dot_x(k: &[T], x: &[T]) -> T {
        k.iter().zip(x).fold(T::zero(), |acc, (&a, &b)| acc + a * b)
    }

    pub fn value(&self, p: &SpacetimePoint<T>) -> T {
        match self {
            Self::Exponential { k } => (Self::k_dot_x(k, &p.x) + Self::k_norm_sq(k) * p.t).exp(),
            Self::TrigCos { k } => (-Self::k_norm_sq(k) * p.t).exp() * Self::k_dot_x(k, &p.x).cos(),
            Self::TrigSin { k } => (-Self::k_norm_sq(k) * p.t).exp() * Self::k_dot_x(k, &p.x).sin(),
            Self::HeatPolynomial { degree } => heat_polynomial(*degree, p.t, p.x[0]),
        }
    }

    pub fn spatial_gradient(&self, p: &SpacetimePoint<T>) -> Vec<T> {
        match self {
            Self::Exponential { k } => {
                let v = self.value(p);
                k.iter().map(|&ki| ki * v).collect()
            }
            Self::TrigCos { k } => {
                let damp = (-Self::k_norm_sq(k) * p.t).exp();
                let s = Self::k_dot_x(k, &p.x).sin();
                k.iter().map(|&ki| -ki * damp * s).collect()
            }
            Self::TrigSin { k } => {
                let damp = (-Self::k_norm_sq(k) * p.t).exp();
                let c = Self::k_dot_x(k, &p.x).cos();
                k.iter().map(|&ki| ki * damp * c).collect()
            }
            Self::HeatPolynomial { degree } => {
                // ∂_x v_d = d v_{d-1}
                let d = *degree;
                if d == 0 {
                    vec![T::zero()]
                } else {
                    vec![cast::<T>(d as f64) * heat_polynomial(d - 1, p.t, p.x[0])]
                }
            }
        }
    }

    pub fn time_derivative(&self, p: &SpacetimePoint<T>) -> T {
        match self {
            Self::Exponential { k } => Self::k_norm_sq(k) * self.value(p),
            Self::TrigCos { .. } | Self::TrigSin { .. } => {
                let k = match self {
                    Self::TrigCos { k } | Self::TrigSin { k } => k,
                    _ => unreachable!(),
                };
                -Self::k_norm_sq(k) * self.value(p)
            }
            Self::HeatPolynomial { degree } => {
                // ∂_t v_d = d (d-1) v_{d-2}
                let d = *degree;
                if d < 2 {
                    T::zero()
                } else {
                    cast::<T>((d * (d - 1)) as f64) * heat_polynomial(d - 2, p.t, p.x[0])
                }
            }
        }
    }
}

/// `v_d(t, x) = Σ_{0 <= 2m <= d} d!/(m!(d-2m)!) x^{d-2m} t^m`, caloric on all
/// of `R^2`.
fn heat_polynomial<T: Real>(degree: u32, t: T, x: T) -> T {
    let mut sum = T::zero();
    let mut m = 0u32;
    while 2 * m <= degree {
        let coeff = factorial(degree) / (factorial(m) * factorial(degree - 2 * m));
        sum += cast::<T>(coeff as f64) * x.powi((degree - 2 * m) as i32) * t.powi(m as i32);
        m += 1;
    }
    sum
}

fn factorial(k: u32) -> u128 {
    (1..=k as u128).product()
}

/// Concrete evaluable field. Closed under the operations the crate needs:
/// sums, scalar multiples and translates of the base catalogue.
#[derive(Debug, Clone, PartialEq)]
pub enum Field<T> {
    Constant {
        dim: usize,
        value: T,
    },
    Pole(KernelTerm<T>),
    Member(EntireDictionaryMember<T>),
    Sum(Vec<Field<T>>),
    Scaled {
        factor: T,
        inner: Box<Field<T>>,
    },
    Translated {
        offset: SpacetimePoint<T>,
        inner: Box<Field<T>>,
    },
}

impl<T: Real> Field<T> {
    pub fn zero(dim: usize) -> Self {
        Field::Constant {
            dim,
            value: T::zero(),
        }
    }

    pub fn scaled(self, factor: T) -> Self {
        Field::Scaled {
            factor,
            inner: Box::new(self),
        }
    }

    pub fn translated(self, offset: SpacetimePoint<T>) -> Self {
        Field::Translated {
            offset,
            inner: Box::new(self),
        }
    }

    /// Pole points excluded from the validity region.
    fn excluded_points(&self, out: &mut Vec<SpacetimePoint<T>>, shift: Option<&SpacetimePoint<T>>) {
        match self {
            Field::Constant { .. } | Field::Member(_) => {}
            Field::Pole(term) => {
                let p = match shift {
                    Some(s) => term.pole.plus(s),
                    None => term.pole.clone(),
                };
                out.push(p);
            }
            Field::Sum(parts) => {
                for part in parts {
                    part.excluded_points(out, shift);
                }
            }
            Field::Scaled { inner, .. } => inner.excluded_points(out, shift),
            Field::Translated { offset, inner } => {
                let total = match shift {
                    Some(s) => offset.plus(s),
                    None => offset.clone(),
                };
                inner.excluded_points(out, Some(&total));
            }
        }
    }

    fn check_dim(&self, p: &SpacetimePoint<T>) -> Result<(), EvalError<T>> {
        if p.dim() != self.dim() {
            return Err(EvalError::DimensionMismatch {
                expected: self.dim(),
                found: p.dim(),
            });
        }
        Ok(())
    }
}

impl<T: Real> HeatField<T> for Field<T> {
    fn dim(&self) -> usize {
        match self {
            Field::Constant { dim, .. } => *dim,
            Field::Pole(term) => term.dim(),
            Field::Member(m) => m.dim(),
            Field::Sum(parts) => parts.first().map(|f| f.dim()).unwrap_or(0),
            Field::Scaled { inner, .. } => inner.dim(),
            Field::Translated { inner, .. } => inner.dim(),
        }
    }

    fn value(&self, p: &SpacetimePoint<T>) -> Result<T, EvalError<T>> {
        self.check_dim(p)?;
        match self {
            Field::Constant { value, .. } => Ok(*value),
            Field::Pole(term) => Ok(term.value(p)),
            Field::Member(m) => Ok(m.value(p)),
            Field::Sum(parts) => {
                let mut acc = T::zero();
                for part in parts {
                    acc += part.value(p)?;
                }
                Ok(acc)
            }
            Field::Scaled { factor, inner } => Ok(*factor * inner.value(p)?),
            Field::Translated { offset, inner } => inner.value(&p.minus(offset)),
        }
    }

    fn spatial_gradient(&self, p: &SpacetimePoint<T>) -> Result<Vec<T>, EvalError<T>> {
        self.check_dim(p)?;
        match self {
            Field::Constant { dim, .. } => Ok(vec![T::zero(); *dim]),
            Field::Pole(term) => Ok(term.spatial_gradient(p)),
            Field::Member(m) => Ok(m.spatial_gradient(p)),
            Field::Sum(parts) => {
                let mut acc = vec![T::zero(); self.dim()];
                for part in parts {
                    for (a, g) in acc.iter_mut().zip(part.spatial_gradient(p)?) {
                        *a += g;
                    }
                }
                Ok(acc)
            }
            Field::Scaled { factor, inner } => Ok(inner
                .spatial_gradient(p)?
                .into_iter()
                .map(|g| *factor * g)
                .collect()),
            Field::Translated { offset, inner } => inner.spatial_gradient(&p.minus(offset)),
        }
    }

    fn time_derivative(&self, p: &SpacetimePoint<T>) -> Result<T, EvalError<T>> {
        self.check_dim(p)?;
        match self {
            Field::Constant { .. } => Ok(T::zero()),
            Field::Pole(term) => Ok(term.time_derivative(p)),
            Field::Member(m) => Ok(m.time_derivative(p)),
            Field::Sum(parts) => {
                let mut acc = T::zero();
                for part in parts {
                    acc += part.time_derivative(p)?;
                }
                Ok(acc)
            }
            Field::Scaled { factor, inner } => Ok(*factor * inner.time_derivative(p)?),
            Field::Translated { offset, inner } => inner.time_derivative(&p.minus(offset)),
        }
    }

    fn validity(&self) -> Region<T> {
        let mut excluded = Vec::new();
        self.excluded_points(&mut excluded, None);
        Region::except_points(self.dim() + 1, &excluded)
    }
}

/// Declarative, JSON-expressible field description.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum FieldSpec<T> {
    Constant {
        n: usize,
        value: T,
    },
    KernelPole {
        pole: SpacetimePoint<T>,
        coeff: T,
        #[serde(default)]
        j: u32,
        #[serde(default)]
        alpha: Option<Vec<u32>>,
    },
    Exponential {
        k: Vec<T>,
    },
    TrigCos {
        k: Vec<T>,
    },
    TrigSin {
        k: Vec<T>,
    },
    HeatPolynomial {
        degree: u32,
    },
    Sum {
        parts: Vec<FieldSpec<T>>,
    },
    Scaled {
        factor: T,
        inner: Box<FieldSpec<T>>,
    },
    Translated {
        offset: SpacetimePoint<T>,
        inner: Box<FieldSpec<T>>,
    },
}

/// Builds an evaluable field from its description, validating dimensions.
pub fn make_field<T: Real>(spec: &FieldSpec<T>) -> Result<Field<T>, SpecError> {
    let field = match spec {
        FieldSpec::Constant { n, value } => {
            if *n == 0 {
                return Err(SpecError::MalformedSpec {
                    reason: "constant field needs n >= 1".into(),
                });
            }
            Field::Constant {
                dim: *n,
                value: *value,
            }
        }
        FieldSpec::KernelPole {
            pole,
            coeff,
            j,
            alpha,
        } => {
            let space = alpha.clone().unwrap_or_else(|| vec![0; pole.dim()]);
            if space.len() != pole.dim() {
                return Err(SpecError::MalformedSpec {
                    reason: format!(
                        "alpha has {} entries but the pole has n={}",
                        space.len(),
                        pole.dim()
                    ),
                });
            }
            let limits = crate::kernel::DerivativeLimits::default();
            let order = crate::kernel::DerivativeOrder::new(*j, space);
            if !limits.admits(&order) {
                return Err(SpecError::MalformedSpec {
                    reason: format!("derivative order out of range: {order}"),
                });
            }
            Field::Pole(KernelTerm {
                pole: pole.clone(),
                coefficient: *coeff,
                order,
            })
        }
        FieldSpec::Exponential { k } => {
            ensure_nonempty_k(k)?;
            Field::Member(EntireDictionaryMember::Exponential { k: k.clone() })
        }
        FieldSpec::TrigCos { k } => {
            ensure_nonempty_k(k)?;
            Field::Member(EntireDictionaryMember::TrigCos { k: k.clone() })
        }
        FieldSpec::TrigSin { k } => {
            ensure_nonempty_k(k)?;
            Field::Member(EntireDictionaryMember::TrigSin { k: k.clone() })
        }
        FieldSpec::HeatPolynomial { degree } => {
            if *degree > MAX_HEAT_POLY_DEGREE {
                return Err(SpecError::MalformedSpec {
                    reason: format!(
                        "heat polynomial degree {degree} exceeds {MAX_HEAT_POLY_DEGREE}"
                    ),
                });
            }
            Field::Member(EntireDictionaryMember::HeatPolynomial { degree: *degree })
        }
        FieldSpec::Sum { parts } => {
            if parts.is_empty() {
                return Err(SpecError::MalformedSpec {
                    reason: "sum needs at least one part".into(),
                });
            }
            let built: Vec<Field<T>> = parts.iter().map(make_field).collect::<Result<_, _>>()?;
            let dim = built[0].dim();
            if built.iter().any(|f| f.dim() != dim) {
                return Err(SpecError::MalformedSpec {
                    reason: "sum parts have mismatched dimensions".into(),
                });
            }
            Field::Sum(built)
        }
        FieldSpec::Scaled { factor, inner } => make_field(inner)?.scaled(*factor),
        FieldSpec::Translated { offset, inner } => {
            let f = make_field(inner)?;
            if offset.dim() != f.dim() {
                return Err(SpecError::MalformedSpec {
                    reason: "translate offset dimension differs from field".into(),
                });
            }
            f.translated(offset.clone())
        }
    };
    Ok(field)
}

fn ensure_nonempty_k<T>(k: &[T]) -> Result<(), SpecError> {
    if k.is_empty() {
        Err(SpecError::MalformedSpec {
            reason: "frequency vector k must be nonempty".into(),
        })
    } else {
        Ok(())
    }
}

/// Central-difference estimate of the heat residual `∂_t f - Δf` at `p` with
/// step `h` in every coordinate. Uses field values only.
pub fn heat_residual_fd<T: Real, F: HeatField<T>>(
    f: &F,
    p: &SpacetimePoint<T>,
    h: T,
) -> Result<T, EvalError<T>> {
    assert!(h > T::zero(), "stencil step must be positive");
    let validity = f.validity();
    let mut stencil: Vec<SpacetimePoint<T>> = vec![p.clone()];
    for sign in [T::one(), -T::one()] {
        let mut q = p.clone();
        q.t += sign * h;
        stencil.push(q);
        for i in 0..p.dim() {
            let mut q = p.clone();
            q.x[i] += sign * h;
            stencil.push(q);
        }
    }
    for q in &stencil {
        if !validity.contains(q) {
            return Err(EvalError::OutsideValidity { point: q.clone() });
        }
    }
    let center = f.value(p)?;
    let two = cast::<T>(2.0);
    let t_plus = f.value(&stencil[1])?;
    let t_minus = f.value(&stencil[2 + p.dim()])?;
    let dt = (t_plus - t_minus) / (two * h);
    let mut lap = T::zero();
    for i in 0..p.dim() {
        let plus = f.value(&stencil[2 + i])?;
        let minus = f.value(&stencil[3 + p.dim() + i])?;
        lap += (plus - two * center + minus) / (h * h);
    }
    Ok(dt - lap)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel::phi;

    fn pt(t: f64, x: &[f64]) -> SpacetimePoint<f64> {
        SpacetimePoint::new(t, x.to_vec())
    }

    fn poly_field(degree: u32) -> Field<f64> {
        Field::Member(EntireDictionaryMember::HeatPolynomial { degree })
    }

    #[test]
    fn heat_polynomial_degree_two_is_x2_plus_2t() {
        let f = poly_field(2);
        for (t, x) in [(0.0, 1.0), (0.3, -0.7), (2.0, 0.5)] {
            let v = f.value(&pt(t, &[x])).unwrap();
            assert!((v - (x * x + 2.0 * t)).abs() < 1e-14);
        }
        let r = heat_residual_fd(&f, &pt(0.4, &[0.8]), 1e-3).unwrap();
        assert!(r.abs() < 1e-9, "residual {r}");
    }

    #[test]
    fn exponential_member_is_caloric() {
        let f = make_field(&FieldSpec::Exponential { k: vec![1.0] }).unwrap();
        let p = pt(0.2, &[0.4]);
        let v = f.value(&p).unwrap();
        assert!((v - (0.4f64 + 0.2).exp()).abs() < 1e-14);
        let r = heat_residual_fd(&f, &p, 1e-3).unwrap();
        assert!(r.abs() < 1e-6, "residual {r}");
    }

    #[test]
    fn kernel_pole_field_matches_phi_on_grid() {
        let spec = FieldSpec::KernelPole {
            pole: pt(0.0, &[0.0]),
            coeff: 1.0,
            j: 0,
            alpha: None,
        };
        let f = make_field(&spec).unwrap();
        for t in [0.25, 0.5, 1.0, 2.0] {
            for x in [-1.0, -0.3, 0.0, 0.7, 1.5] {
                let p = pt(t, &[x]);
                assert_eq!(f.value(&p).unwrap(), phi(&p));
            }
        }
    }

    #[test]
    fn constant_field_has_zero_residual_exactly() {
        let f = Field::Constant { dim: 1, value: 5.0 };
        let r = heat_residual_fd(&f, &pt(0.3, &[0.1]), 1e-3).unwrap();
        assert_eq!(r, 0.0);
    }

    #[test]
    fn kernel_pole_residual_is_small_away_from_pole() {
        let f = Field::Pole(KernelTerm::simple(pt(0.0, &[0.0]), 1.0));
        let r = heat_residual_fd(&f, &pt(1.0, &[1.0]), 1e-3).unwrap();
        assert!(r.abs() <= 1e-5, "residual {r}");
    }

    #[test]
    fn residual_richardson_decays_quadratically() {
        let fields: Vec<Field<f64>> = vec![
            Field::Member(EntireDictionaryMember::Exponential { k: vec![1.0] }),
            Field::Member(EntireDictionaryMember::TrigCos { k: vec![2.0] }),
            Field::Pole(KernelTerm::simple(pt(-1.0, &[0.0]), 1.0)),
        ];
        let p = pt(0.5, &[0.6]);
        for f in &fields {
            let h = 1e-2;
            let r1 = heat_residual_fd(f, &p, h).unwrap().abs();
            let r2 = heat_residual_fd(f, &p, h / 2.0).unwrap().abs();
            assert!(
                r2 <= 0.3 * r1 + 1e-12,
                "no quadratic decay: r(h)={r1}, r(h/2)={r2}"
            );
        }
    }

    #[test]
    fn residual_is_additive_over_sums() {
        let f = Field::Member(EntireDictionaryMember::Exponential { k: vec![1.0] });
        let g = Field::Member(EntireDictionaryMember::HeatPolynomial { degree: 3 });
        let sum = Field::Sum(vec![f.clone(), g.clone()]);
        let p = pt(0.2, &[0.4]);
        // A coarse step keeps the roundoff in the stencil below the bound.
        let h = 0.1;
        let rs = heat_residual_fd(&sum, &p, h).unwrap();
        let rf = heat_residual_fd(&f, &p, h).unwrap();
        let rg = heat_residual_fd(&g, &p, h).unwrap();
        assert!((rs - (rf + rg)).abs() < 1e-12);
    }

    #[test]
    fn gradient_and_time_derivative_match_finite_differences() {
        let fields: Vec<Field<f64>> = vec![
            Field::Member(EntireDictionaryMember::Exponential { k: vec![0.8] }),
            Field::Member(EntireDictionaryMember::TrigSin { k: vec![1.5] }),
            Field::Member(EntireDictionaryMember::HeatPolynomial { degree: 4 }),
            Field::Pole(KernelTerm::simple(pt(-2.0, &[0.3]), 2.0)),
        ];
        let p = pt(0.7, &[0.9]);
        let h = 1e-4;
        for f in &fields {
            let g = f.spatial_gradient(&p).unwrap()[0];
            let v_plus = f.value(&pt(0.7, &[0.9 + h])).unwrap();
            let v_minus = f.value(&pt(0.7, &[0.9 - h])).unwrap();
            let g_fd = (v_plus - v_minus) / (2.0 * h);
            assert!(
                (g - g_fd).abs() / g.abs().max(1e-3) < 1e-6,
                "gradient mismatch for {f:?}: {g} vs {g_fd}"
            );
            let dt = f.time_derivative(&p).unwrap();
            let v_plus = f.value(&pt(0.7 + h, &[0.9])).unwrap();
            let v_minus = f.value(&pt(0.7 - h, &[0.9])).unwrap();
            let dt_fd = (v_plus - v_minus) / (2.0 * h);
            assert!(
                (dt - dt_fd).abs() / dt.abs().max(1e-3) < 1e-6,
                "time derivative mismatch for {f:?}: {dt} vs {dt_fd}"
            );
        }
    }

    #[test]
    fn residual_rejects_stencils_touching_poles() {
        let f = Field::Pole(KernelTerm::simple(pt(1.0, &[0.0]), 1.0));
        let err = heat_residual_fd(&f, &pt(1.0, &[1e-3]), 1e-3).unwrap_err();
        assert!(matches!(err, EvalError::OutsideValidity { .. }));
    }

    #[test]
    fn translated_field_shifts_evaluation() {
        let base = Field::Member(EntireDictionaryMember::HeatPolynomial { degree: 2 });
        let offset = pt(1.0, &[2.0]);
        let shifted = base.clone().translated(offset);
        let p = pt(1.5, &[2.5]);
        let expected = base.value(&pt(0.5, &[0.5])).unwrap();
        assert_eq!(shifted.value(&p).unwrap(), expected);
    }

    #[test]
    fn malformed_specs_are_rejected() {
        assert!(make_field(&FieldSpec::<f64>::Sum { parts: vec![] }).is_err());
        let mixed = FieldSpec::Sum {
            parts: vec![
                FieldSpec::Constant { n: 1, value: 0.0 },
                FieldSpec::Constant { n: 2, value: 0.0 },
            ],
        };
        assert!(make_field(&mixed).is_err());
        let too_deep = FieldSpec::<f64>::KernelPole {
            pole: pt(0.0, &[0.0]),
            coeff: 1.0,
            j: 5,
            alpha: None,
        };
        assert!(make_field(&too_deep).is_err());
    }

    #[test]
    fn field_spec_round_trips_through_json() {
        let spec: FieldSpec<f64> = FieldSpec::Sum {
            parts: vec![
                FieldSpec::HeatPolynomial { degree: 2 },
                FieldSpec::Scaled {
                    factor: -1.0,
                    inner: Box::new(FieldSpec::TrigCos { k: vec![1.0] }),
                },
            ],
        };
        let json = serde_json::to_string(&spec).unwrap();
        let back: FieldSpec<f64> = serde_json::from_str(&json).unwrap();
        assert_eq!(back, spec);
    }
}
