//! Wavelet-lifted dynamic mode decomposition for input-output system
//! identification, with the classical DMD family, LTI utilities, a beam
//! finite-element truth model and error metrics.

pub mod beamfem;
pub mod error;
pub mod fit;
pub mod lifting;
pub mod linalg;
pub mod lti;
pub mod metrics;
pub mod modwt;
mod par;
pub mod signals;
pub mod trajectory;

pub use error::{Error, Result};
pub use fit::{fit, FitConfig, FitResult, Method, PreparedFit};
pub use lti::{ContinuousStateSpace, DiscreteStateSpace, ModeSet};
pub use lifting::WaveletBasis;
pub use modwt::FilterBank;
pub use signals::{SignalSpec, TimeGrid};
pub use trajectory::TrajectorySet;
pub use par::worker_count;
