//! Averaging operators, decreasing rearrangements and Lorentz norms on finite
//! metric measure spaces.
//!
//! The building blocks are
//!
//! - [`space`]: finite atomic metric measure spaces, balls, doubling
//!   constants, separated sets and the greedy 5r covering selection;
//! - [`rearrange`]: exact distribution functions, decreasing rearrangements
//!   `f*` and the maximal profile `f**`;
//! - [`norms`]: the Lorentz norms `‖·‖_{p,q}` and `‖·‖_{(p,q)}`, Lebesgue norms
//!   and the Hölder constants `λ`, `α(A)`;
//! - [`averaging`]: the operator `A_r f(x) = μ(B(x,r))⁻¹ ∫_{B(x,r)} f dμ` and
//!   checkers for the inequalities it satisfies;
//! - [`compactness`]: covering numbers of sampled images, the separated
//!   witness sequence and the simple-function approximation;
//! - [`report`], [`plot`]: JSON/CSV reports and deterministic SVG output.

pub mod averaging;
pub mod compactness;
pub mod error;
pub mod norms;
pub mod plot;
mod quadrature;
pub mod rearrange;
pub mod report;
pub mod space;

pub use error::{Error, Result};
pub use norms::{NormSpec, Variant};
pub use rearrange::{FunctionOnSpace, MaximalProfile, StepFunction};
pub use space::{BallSpec, MetricMeasureSpace, SpaceDescription};
