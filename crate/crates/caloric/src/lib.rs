//! Rational approximation of caloric functions and their transport to a
//! quasilinear Burgers-type equation.
//!
//! The crate provides, at desk scale:
//!
//! * numerically stable evaluation of the heat kernel and its derivatives
//!   ([`kernel`]);
//! * an evaluable-field abstraction with a catalogue of entire solutions and
//!   an independent finite-difference residual oracle ([`fields`]);
//! * two rational-approximation engines: a constructive cutoff/Riemann-sum
//!   scheme and fixed-pole least-squares fitting with greedy selection
//!   ([`approx`]);
//! * the Cole-Hopf change of variables, rational Burgers solutions and the
//!   composition symmetry ([`colehopf`]);
//! * slice geometry for box-complement regions: the Jones and Diaz conditions
//!   and pole-set coverage validation ([`runge`]);
//! * constructive universal-series and universal-translate runs with
//!   certified per-target errors ([`universal`]).
//!
//! All numerics are generic over the scalar type through [`num::Real`];
//! the aliases below fix `f64`, which every test and the CLI use.

// Negated comparisons like `!(h > 0)` are used on purpose: unlike `h <= 0`
// they also reject NaN inputs.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod approx;
pub mod colehopf;
pub mod fields;
pub mod geom;
pub mod kernel;
pub mod linalg;
pub mod num;
pub mod runge;
pub mod universal;

pub use fields::{heat_residual_fd, make_field, EvalError, Field, FieldSpec, HeatField};
pub use kernel::{phi, phi_derivative, DerivativeOrder, SpacetimePoint};
pub use num::Real;

/// `f64` instances of the core types.
pub type SpacetimePoint64 = kernel::SpacetimePoint<f64>;
pub type DerivativeLimits64 = kernel::DerivativeLimits;
pub type Field64 = fields::Field<f64>;
pub type FieldSpec64 = fields::FieldSpec<f64>;
pub type AaBox64 = geom::AaBox<f64>;
pub type BoxPair64 = approx::BoxPair<f64>;
pub type RationalHeatSolution64 = approx::RationalHeatSolution<f64>;
pub type PoleSet64 = approx::PoleSet<f64>;
pub type ColeHopfMap64 = colehopf::ColeHopfMap<f64>;
pub type BurgersField64 = colehopf::BurgersField<f64>;
pub type Region64 = runge::Region<f64>;
pub type Dictionary64 = universal::Dictionary<f64>;
