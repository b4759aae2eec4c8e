//! Geometric phases induced by sequences of weak measurements on a qubit.
//!
//! The crate is layered bottom-up:
//!
//! * [`qmat`]: exact 2×2 complex linear algebra and phase unwrapping.
//! * [`measurement`]: null-type Kraus operators, measurement-axis rotations
//!   and the step matrix `δR`.
//! * [`analytic`]: the quasicontinuous closed form of the post-selected
//!   amplitude, its critical measurement strengths and winding sweeps.
//! * [`trajectory`]: finite-N post-selected products and stochastic readout
//!   sampling.
//! * [`landscape`]: N–c grid sweeps, phase-noise ensembles and stability
//!   summaries.
//!
//! Every computation is a pure function of its inputs; seeded randomness is
//! derived per work unit so parallel execution order never changes results.

pub mod analytic;
mod error;
pub mod landscape;
pub mod measurement;
pub mod qmat;
mod seed;
pub mod trajectory;

pub use analytic::{AnalyticParams, CriticalPoint, Jump};
pub use error::{Error, Result};
pub use landscape::{CellRecord, GridSpec, LandscapeResult, NoiseMode, NoiseModel, Validity};
pub use measurement::{KrausPair, Orientation, Readout};
pub use qmat::{Complex, Mat2, Vec2};
pub use seed::derive_seed;
pub use trajectory::{GeophaseResult, ProtocolParams, Regime, TrajectoryRecord};
