//! Error metrics, receiver design, spectral efficiency, baselines and Cramér-Rao bounds.

mod crlb;

pub use crlb::{crlb_frequencies, CrlbPath};

use crate::anm::EstimationResult;
use crate::codebook::{design_codebook, project_constant_modulus, Codebook, CodebookDesignSpec};
use crate::error::{Error, Result};
use crate::geometry::FrequencyInterval;
use crate::linalg::{col_vec, column, steer, wrap_freq, CMat, C64};

pub fn mse_frequency(estimates: &[f64], truths: &[f64]) -> Result<f64> {
    if estimates.len() != truths.len() || estimates.is_empty() {
        return Err(Error::Dimension(format!(
            "{} estimates for {} truths",
            estimates.len(),
            truths.len()
        )));
    }
    let s: f64 = estimates.iter().zip(truths).map(|(e, t)| wrap_freq(e - t).powi(2)).sum();
    Ok(s / estimates.len() as f64)
}

/// Mean squared wrapped error after the best one-to-one assignment of estimates to truths.
pub fn matched_mse(estimates: &[f64], truths: &[f64]) -> Result<f64> {
    if estimates.len() != truths.len() || estimates.is_empty() || estimates.len() > 8 {
        return Err(Error::Dimension("matched MSE needs equal, small, nonempty lists".into()));
    }
    fn best(est: &[f64], truths: &[f64], used: &mut Vec<bool>, k: usize) -> f64 {
        if k == est.len() {
            return 0.0;
        }
        let mut b = f64::INFINITY;
        for j in 0..truths.len() {
            if !used[j] {
                used[j] = true;
                b = b.min(wrap_freq(est[k] - truths[j]).powi(2) + best(est, truths, used, k + 1));
                used[j] = false;
            }
        }
        b
    }
    let mut used = vec![false; truths.len()];
    Ok(best(estimates, truths, &mut used, 0) / estimates.len() as f64)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DesignSource {
    AnmEstimate,
    BeamAlignment,
    WideBeam,
}

/// Data-phase MS combiner and RIS profile. Both have unit Euclidean norm; RIS
/// entries share the modulus 1/sqrt(N_R).
#[derive(Debug, Clone, PartialEq)]
pub struct ReceiverDesign {
    pub ms_combiner: Vec<C64>,
    pub ris_profile: Vec<C64>,
    pub source: DesignSource,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeConfig {
    pub coherence_length: usize,
    pub training_length: usize,
    pub noise_variance: f64,
}

/// Phase profile whose effective RIS response α_R(f)^T ω peaks at f.
pub fn ris_alignment_profile(n_r: usize, f: f64) -> Vec<C64> {
    steer(n_r, -f)
}

/// Align MS and RIS to the strongest estimated path.
pub fn design_receiver(result: &EstimationResult, n_m: usize, n_r: usize) -> Result<ReceiverDesign> {
    let l = result.aoa_freqs.len();
    if l == 0 || result.diff_freqs.len() != l {
        return Err(Error::Domain("empty estimation result".into()));
    }
    let best = if result.gains.len() == l {
        (0..l).fold(0, |b, i| if result.gains[i].norm() > result.gains[b].norm() { i } else { b })
    } else {
        0
    };
    Ok(ReceiverDesign {
        ms_combiner: steer(n_m, result.aoa_freqs[best]),
        ris_profile: ris_alignment_profile(n_r, result.diff_freqs[best]),
        source: DesignSource::AnmEstimate,
    })
}

/// |w^H H_RM diag(ω) H_BR f|
pub fn beamforming_gain(design: &ReceiverDesign, h_br: &CMat, h_rm: &CMat, f: &[C64]) -> C64 {
    let g = h_br * col_vec(f);
    let mixed: Vec<C64> = (0..g.nrows()).map(|n| design.ris_profile[n] * g[(n, 0)]).collect();
    let r = h_rm * col_vec(&mixed);
    (0..r.nrows()).map(|i| design.ms_combiner[i].conj() * r[(i, 0)]).sum()
}

pub fn effective_se(design: &ReceiverDesign, h_br: &CMat, h_rm: &CMat, f: &[C64], cfg: &SeConfig) -> f64 {
    if cfg.training_length >= cfg.coherence_length {
        return 0.0;
    }
    let frac = (cfg.coherence_length - cfg.training_length) as f64 / cfg.coherence_length as f64;
    let g = beamforming_gain(design, h_br, h_rm, f).norm_sqr();
    let snr = if cfg.noise_variance > 0.0 { g / cfg.noise_variance } else if g > 0.0 { f64::INFINITY } else { 0.0 };
    frac * (1.0 + snr).log2()
}

/// Beam pair with the largest received magnitude; ties go to the smallest (l, k).
pub fn benchmark_beam_alignment(y: &CMat, ms_codebook: &CMat, ris_codebook: &CMat) -> ReceiverDesign {
    let (mut bl, mut bk, mut bv) = (0, 0, f64::NEG_INFINITY);
    for l in 0..y.nrows() {
        for k in 0..y.ncols() {
            let v = y[(l, k)].norm();
            if v > bv {
                (bl, bk, bv) = (l, k, v);
            }
        }
    }
    let mut ris = CMat::from_fn(ris_codebook.nrows(), 1, |i, _| ris_codebook[(i, bk)]);
    project_constant_modulus(&mut ris);
    ReceiverDesign {
        ms_combiner: column(ms_codebook, bl),
        ris_profile: column(&ris, 0),
        source: DesignSource::BeamAlignment,
    }
}

fn single_wide_beam(n: usize, band: FrequencyInterval, constant_modulus: bool) -> Result<Vec<C64>> {
    let spec = CodebookDesignSpec::new(n, band, 1, constant_modulus);
    match design_codebook(&spec) {
        Ok(cb) => Ok(cb.beam(0)),
        // a band narrower than one dictionary cell: a plain steering vector
        Err(Error::Codebook(_)) if band.width() < 2.0 / spec.dictionary_size as f64 => {
            Ok(steer(n, 0.5 * (band.a + band.b)))
        }
        Err(e) => Err(e),
    }
}

/// One LS wide beam per side covering the whole uncertainty band; no training.
/// `ris_band` is the band in which the RIS profile needs gain (see
/// [`crate::codebook::ris_training_band`]).
pub fn benchmark_wide_beam(ms_band: FrequencyInterval, ris_band: FrequencyInterval, n_m: usize, n_r: usize) -> Result<ReceiverDesign> {
    Ok(ReceiverDesign {
        ms_combiner: single_wide_beam(n_m, ms_band, false)?,
        ris_profile: single_wide_beam(n_r, ris_band, true)?,
        source: DesignSource::WideBeam,
    })
}

/// Concatenate codebooks column-wise.
pub fn stack_codebooks(books: &[Codebook]) -> CMat {
    let n = books[0].beams.nrows();
    let cols: Vec<Vec<C64>> = books.iter().flat_map(|b| (0..b.num_beams()).map(move |j| b.beam(j))).collect();
    CMat::from_fn(n, cols.len(), |i, j| cols[j][i])
}
