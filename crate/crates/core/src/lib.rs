//! Certification of quantum teleportation from the teleportation data
//! (assemblages) alone.
//!
//! Everything numeric is generic over [`Real`] (`f64` or `f32`); the aliases
//! below fix the scalar to `f64`.

pub mod certify;
pub mod error;
pub mod qlinalg;
pub mod scalar;
pub mod scenario;
pub mod sdp;
pub mod sepset;

pub use certify::{DetectionDirection, SolveDiagnostics, WitnessCheck};
pub use error::{Error, Result};
pub use scalar::Real;
pub use sdp::{SolveOptions, SolveStatus};
pub use sepset::SepRelaxation;

pub type HermitianOperator = qlinalg::HermitianOperator<f64>;
pub type ComplexMatrix = qlinalg::ComplexMatrix<f64>;
pub type InputEnsemble = scenario::InputEnsemble<f64>;
pub type Measurement = scenario::Measurement<f64>;
pub type Assemblage = scenario::Assemblage<f64>;
pub type ClassicalStrategy = scenario::ClassicalStrategy<f64>;
pub type Scenario = scenario::Scenario<f64>;
pub type ConicProgram = sdp::ConicProgram<f64>;
pub type LinExpr = sdp::LinExpr<f64>;
pub type HermExpr = sdp::HermExpr<f64>;
pub type Solution = sdp::Solution<f64>;
pub type TeleportationWitness = certify::TeleportationWitness<f64>;
pub type RobustnessResult = certify::RobustnessResult<f64>;
pub type ClassicalBound = certify::ClassicalBound<f64>;
