//! Decoupled atomic norm denoising and gridless frequency recovery.

mod admm;
mod estimate;
mod frequencies;
mod roots;

pub use admm::regularized_denoise;
pub use estimate::{estimate_multipath, estimate_single_path, pairing_residuals, recover_gains, EstimationResult};
pub use frequencies::{extract_frequencies, FrequencyExtraction};
pub use roots::polynomial_roots;

use crate::linalg::{CMat, C64};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum MuRule {
    /// `select_mu` times a scale factor.
    Auto { scale: f64 },
    Fixed(f64),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AnmConfig {
    pub mu: MuRule,
    pub solver_tolerance: f64,
    pub max_iterations: usize,
    /// Initial penalty for data normalised to unit Frobenius norm; adapted during the run.
    pub admm_penalty: f64,
}

impl Default for AnmConfig {
    fn default() -> Self {
        Self {
            mu: MuRule::Auto { scale: 1.0 },
            solver_tolerance: 1e-4,
            max_iterations: 10_000,
            admm_penalty: 1.0,
        }
    }
}

impl AnmConfig {
    /// Regularisation weight for one orientation of the problem. The automatic rule is
    /// floored at `MU_FLOOR·‖Y‖_F`: far below that the ADMM iterations stall before the
    /// frequencies settle, and the floor's own bias is negligible.
    pub fn mu_for(&self, noise_std: f64, dim: usize, snapshots: usize, y: &CMat) -> f64 {
        match self.mu {
            MuRule::Fixed(m) => m,
            MuRule::Auto { scale } => (scale * select_mu(noise_std, dim, snapshots)).max(MU_FLOOR * y.norm_l2()),
        }
    }
}

pub const MU_FLOOR: f64 = 1e-3;

#[derive(Debug, Clone, PartialEq)]
pub struct AnmSolution {
    /// First row of the Toeplitz block.
    pub u: Vec<C64>,
    pub z: CMat,
    pub denoised: CMat,
    pub objective: f64,
    pub iterations: usize,
    pub residuals: (f64, f64),
}

/// σ·sqrt(N·T·ln N); zero when σ = 0.
pub fn select_mu(noise_std: f64, dim: usize, snapshots: usize) -> f64 {
    let n = dim as f64;
    let ln = if dim > 1 { n.ln() } else { 1.0 };
    noise_std * (n * snapshots as f64 * ln).sqrt()
}
