//! Exact harmonic calculus and energy-measure fields on self-similar
//! fractals, index (martingale dimension) estimation from cell-level
//! density matrices, and resistance-based dimension reports for
//! generalized Sierpinski carpets.
//!
//! The p.c.f. code is generic over [`Scalar`]: use [`Rational`] for exact
//! identities and `f64` when speed matters. Carpet resistance solves are
//! generic over [`num_traits::Float`].

pub mod carpet;
pub mod config;
pub mod dimension;
pub mod error;
mod exact;
pub mod harmonic;
pub mod io;
pub mod linalg;
pub mod measures;
pub mod scalar;
pub mod structure;

pub use error::{Error, Result};
pub use scalar::{Rational, Scalar};

/// Harmonic model over exact rationals.
pub type ExactModel = harmonic::HarmonicModel<Rational>;
/// Harmonic model over `f64`.
pub type FloatModel = harmonic::HarmonicModel<f64>;
/// Piecewise harmonic function with exact values.
pub type ExactFunction = harmonic::PiecewiseHarmonic<Rational>;
/// Piecewise harmonic function with `f64` values.
pub type FloatFunction = harmonic::PiecewiseHarmonic<f64>;
/// Exact cell-level energy measure table.
pub type ExactMeasureTable = measures::CellMeasureTable<Rational>;
/// Exact Φ-matrix field.
pub type ExactPhiField = measures::PhiCellField<Rational>;
