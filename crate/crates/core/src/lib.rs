//! Three-mode entangled states generated by two interlinked bilinear
//! interactions in a χ⁽²⁾ crystal.
//!
//! * [`dynamics`]: closed-form Heisenberg evolution, populations and the
//!   symmetric operating point.
//! * [`gaussian`]: covariance matrix, characteristic function and the
//!   partial-transpose inseparability test.
//! * [`fock`]: truncated Fock-space states used as a brute-force reference.
//! * [`telecloning`]: 1→2 telecloning of coherent states, analytic and
//!   Monte Carlo.
//! * [`conditional`]: twin-beam generation by on/off photodetection.
//! * [`classical`]: classical energy-transfer model of the seeded crystal.
//!
//! Everything numerical is generic over [`Real`] (`f32` or `f64`); the
//! `*F64` aliases below fix the precision used by the command-line tool.

pub mod classical;
pub mod conditional;
pub mod dynamics;
pub mod error;
pub mod fock;
pub mod gaussian;
pub mod linalg;
pub mod scalar;
pub mod telecloning;

pub use error::{Error, Result};
pub use scalar::{lit, Real};

pub use classical::ClassicalParams;
pub use conditional::TwbReport;
pub use dynamics::{CouplingConfig, ModeCoefficients, Populations, Regime, SymmetricPoint};
pub use fock::{DensityMatrix, Mode, TriFockState, Truncation};
pub use gaussian::{Covariance6, PptReport};
pub use telecloning::{CloneReport, TeleclonePlan};

pub type CouplingConfigF64 = CouplingConfig<f64>;
pub type ModeCoefficientsF64 = ModeCoefficients<f64>;
pub type PopulationsF64 = Populations<f64>;
pub type Covariance6F64 = Covariance6<f64>;
pub type PptReportF64 = PptReport<f64>;
pub type TriFockStateF64 = TriFockState<f64>;
pub type DensityMatrixF64 = DensityMatrix<f64>;
pub type TeleclonePlanF64 = TeleclonePlan<f64>;
pub type CloneReportF64 = CloneReport<f64>;
pub type TwbReportF64 = TwbReport<f64>;
pub type ClassicalParamsF64 = ClassicalParams<f64>;

pub type CouplingConfigF32 = CouplingConfig<f32>;
pub type Covariance6F32 = Covariance6<f32>;
