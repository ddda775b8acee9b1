//! Finite-volume simulation and diagnostics for the three-species
//! forager-exploiter chemotaxis system on rectangles with no-flux boundaries.
//!
//! The numerical core is generic over [`Scalar`] (`f32` or `f64`); the
//! aliases below fix the precision. The [`harness`] layer (configuration,
//! scenario suites, sweeps, persistence) works in `f64`.

pub mod diagnostics;
pub mod grid;
pub mod harness;
pub mod model;
pub mod scalar;
pub mod solver;

pub use scalar::Scalar;

pub type Grid64 = grid::Grid<f64>;
pub type Field64 = grid::Field<f64>;
pub type State64 = model::State<f64>;
pub type ModelParams64 = model::ModelParams<f64>;
pub type NutrientSource64 = model::NutrientSource<f64>;
pub type RegimeQuantities64 = model::RegimeQuantities<f64>;
pub type StepControl64 = solver::StepControl<f64>;
pub type NormSeries64 = diagnostics::NormSeries<f64>;

pub type Grid32 = grid::Grid<f32>;
pub type Field32 = grid::Field<f32>;
pub type State32 = model::State<f32>;
pub type ModelParams32 = model::ModelParams<f32>;
pub type StepControl32 = solver::StepControl<f32>;
