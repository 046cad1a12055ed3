//! Location-aided channel parameter estimation for RIS-assisted mmWave MIMO.
//!
//! Geometry priors shape the training beams, decoupled atomic norm denoising
//! recovers the MS angle of arrival and the RIS angular difference, and the
//! evaluation/harness modules run the Monte-Carlo comparisons.

pub mod error;
pub mod linalg;
pub mod geometry;
pub mod channel;
pub mod codebook;
pub mod anm;
pub mod evaluation;
pub mod harness;

pub use error::{Error, Result};
