//! Symbolic expected-utility compiler for integrating decision support systems.
//!
//! A model document describes a structural equation model on a DAG, the panel
//! that has jurisdiction over each vertex, a polynomial utility and a policy
//! set. [`ceu::compile`] rewrites the conditional expected utility as a
//! polynomial in panel parameters, [`separability::derive_adequacy`] lists what
//! panels must deliver and which cross-panel independences are assumed, and
//! [`evaluate::score`] ranks the policies from the delivered moments.

pub mod ceu;
pub mod evaluate;
pub mod model;
pub mod paths;
pub mod pipeline;
pub mod poly;
pub mod report;
pub mod separability;

pub use ceu::CeuReport;
pub use num_rational::BigRational;

/// Exact coefficient field.
pub type Rational = BigRational;
/// Polynomial over SEM indeterminates with exact coefficients.
pub type Poly = poly::Polynomial<poly::Indeterminate, Rational>;
/// Polynomial in criterion weights and utility coefficients.
pub type CoefficientPoly = poly::Polynomial<poly::UtilitySymbol, Rational>;
/// CEU whose coefficients keep the k and ρ symbols unevaluated.
pub type SymbolicPoly = poly::Polynomial<poly::Indeterminate, CoefficientPoly>;
pub type ScoreBoard64 = evaluate::ScoreBoard<f64>;
pub type ScoreBoard32 = evaluate::ScoreBoard<f32>;

/// The bundled food-security model: four attributes, three policies and the
/// additive (`u1`) and multilinear (`u2`) utility classes.
pub const FOOD_SECURITY_MODEL: &str = include_str!("../models/food_security.json");
