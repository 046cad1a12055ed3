//! Least-squares training-beam synthesis over an over-complete steering dictionary.

use std::fmt::Write as _;

use faer::Mat;

use crate::error::{Error, Result};
use crate::geometry::FrequencyInterval;
use crate::linalg::{pinv, steer, wrap_freq, CMat, C64};

const CEIL_SLACK: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CodebookDesignSpec {
    pub num_antennas: usize,
    pub dictionary_size: usize,
    pub target: FrequencyInterval,
    pub num_beams: usize,
    pub constant_modulus: bool,
}

impl CodebookDesignSpec {
    /// Spec with the default dictionary size of four times the array length.
    pub fn new(num_antennas: usize, target: FrequencyInterval, num_beams: usize, constant_modulus: bool) -> Self {
        Self {
            num_antennas,
            dictionary_size: 4 * num_antennas,
            target,
            num_beams,
            constant_modulus,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.num_antennas == 0 || self.num_beams == 0 {
            return Err(Error::Codebook("need at least one antenna and one beam".into()));
        }
        if self.dictionary_size <= self.num_antennas {
            return Err(Error::Codebook(format!(
                "dictionary size {} must exceed the array length {}",
                self.dictionary_size, self.num_antennas
            )));
        }
        FrequencyInterval::new(self.target.a, self.target.b)?;
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Codebook {
    /// num_antennas x N, one beam per column
    pub beams: CMat,
    pub covered: FrequencyInterval,
    pub per_beam_width: f64,
    pub constant_modulus: bool,
}

impl Codebook {
    pub fn num_beams(&self) -> usize {
        self.beams.ncols()
    }

    pub fn beam(&self, j: usize) -> Vec<C64> {
        crate::linalg::column(&self.beams, j)
    }

    /// Interleaved real/imaginary CSV: one row per antenna, two columns per beam.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        let header: Vec<String> = (0..self.beams.ncols())
            .flat_map(|j| [format!("beam{j}_re"), format!("beam{j}_im")])
            .collect();
        out.push_str(&header.join(","));
        out.push('\n');
        for i in 0..self.beams.nrows() {
            for j in 0..self.beams.ncols() {
                if j > 0 {
                    out.push(',');
                }
                let v = self.beams[(i, j)];
                let _ = write!(out, "{:?},{:?}", v.re, v.im);
            }
            out.push('\n');
        }
        out
    }
}

pub fn dictionary_frequency(i: usize, m: usize) -> f64 {
    -1.0 + (2 * i + 1) as f64 / m as f64
}

pub fn build_dictionary(num_antennas: usize, m: usize) -> Result<CMat> {
    if m <= num_antennas {
        return Err(Error::Codebook(format!("dictionary size {m} must exceed {num_antennas}")));
    }
    let cols: Vec<Vec<C64>> = (0..m).map(|i| steer(num_antennas, dictionary_frequency(i, m))).collect();
    Ok(Mat::from_fn(num_antennas, m, |r, c| cols[c][r]))
}

fn ceil_slack(x: f64) -> i64 {
    (x - CEIL_SLACK).ceil() as i64
}

/// Ones per column and 0-based first row of the selection matrix.
fn selection_layout(spec: &CodebookDesignSpec) -> Result<(usize, usize)> {
    let m = spec.dictionary_size as f64;
    let q = ceil_slack(spec.target.width() * m / (2.0 * spec.num_beams as f64));
    if q <= 0 {
        return Err(Error::Codebook(format!(
            "empty target band [{}, {}]",
            spec.target.a, spec.target.b
        )));
    }
    let start = ceil_slack((spec.target.a + 1.0) * m / 2.0).max(1) as usize - 1;
    Ok((q as usize, start))
}

/// Binary M x N matrix marking which dictionary directions each beam should cover.
pub fn selection_matrix(spec: &CodebookDesignSpec) -> Result<Mat<f64>> {
    spec.validate()?;
    let (q, start) = selection_layout(spec)?;
    let m = spec.dictionary_size;
    let mut g = Mat::<f64>::zeros(m, spec.num_beams);
    for c in 0..spec.num_beams {
        for r in 0..q {
            g[((start + c * q + r) % m, c)] = 1.0;
        }
    }
    Ok(g)
}

/// Frequencies actually spanned by the selected dictionary rows.
pub fn tiled_band(spec: &CodebookDesignSpec) -> Result<FrequencyInterval> {
    let (q, start) = selection_layout(spec)?;
    let m = spec.dictionary_size as f64;
    let lo = -1.0 + 2.0 * start as f64 / m;
    let hi = (lo + 2.0 * (q * spec.num_beams) as f64 / m).min(1.0);
    Ok(FrequencyInterval { a: lo, b: hi })
}

pub fn design_codebook(spec: &CodebookDesignSpec) -> Result<Codebook> {
    let g = selection_matrix(spec)?;
    let a = build_dictionary(spec.num_antennas, spec.dictionary_size)?;
    let gc = Mat::from_fn(g.nrows(), g.ncols(), |i, j| C64::new(g[(i, j)], 0.0));
    // least squares A^H F = G
    let mut f = pinv(&a.adjoint().to_owned(), 1e-12) * gc;
    let n = spec.num_antennas;
    for j in 0..f.ncols() {
        let nrm = f.col(j).norm_l2();
        if nrm > 0.0 {
            for i in 0..n {
                f[(i, j)] /= nrm;
            }
        }
    }
    if spec.constant_modulus {
        project_constant_modulus(&mut f);
    }
    Ok(Codebook {
        beams: f,
        covered: spec.target,
        per_beam_width: spec.target.width() / spec.num_beams as f64,
        constant_modulus: spec.constant_modulus,
    })
}

/// Replace every entry by a phase-only value of modulus 1/sqrt(rows); zeros map to phase 0.
pub fn project_constant_modulus(f: &mut CMat) {
    let s = 1.0 / (f.nrows() as f64).sqrt();
    for j in 0..f.ncols() {
        for i in 0..f.nrows() {
            let v = f[(i, j)];
            let phase = if v.norm() == 0.0 { 0.0 } else { v.arg() };
            f[(i, j)] = C64::from_polar(s, phase);
        }
    }
}

/// |α(f)^H beam|² for each beam over the grid f_g = -1 + 2g/grid_size.
pub fn gain_pattern(codebook: &Codebook, grid_size: usize) -> Mat<f64> {
    assert!(grid_size >= 2, "grid needs at least two points");
    let n = codebook.beams.nrows();
    let mut out = Mat::<f64>::zeros(codebook.num_beams(), grid_size);
    for g in 0..grid_size {
        let a = steer(n, pattern_frequency(g, grid_size));
        for j in 0..codebook.num_beams() {
            let v: C64 = (0..n).map(|i| a[i].conj() * codebook.beams[(i, j)]).sum();
            out[(j, g)] = v.norm_sqr();
        }
    }
    out
}

pub fn pattern_frequency(g: usize, grid_size: usize) -> f64 {
    -1.0 + 2.0 * g as f64 / grid_size as f64
}

/// Target band for RIS training profiles.
///
/// The observation sees the RIS profile through α_R(f_diff)^T ω, so a profile must
/// have high gain at -f_diff. With f_diff ∈ sinφ_BR - [a, b] that band is
/// [a - sinφ_BR, b - sinφ_BR]. If the shifted band wraps only partially it cannot be
/// tiled contiguously and the full band is returned.
pub fn ris_training_band(prior: FrequencyInterval, sin_phi_br: f64) -> FrequencyInterval {
    let (lo, hi) = (prior.a - sin_phi_br, prior.b - sin_phi_br);
    if hi - lo >= 2.0 {
        return FrequencyInterval::FULL;
    }
    if lo >= -1.0 && hi <= 1.0 {
        return FrequencyInterval { a: lo, b: hi };
    }
    let (wl, wh) = (wrap_freq(lo), wrap_freq(hi));
    if wl <= wh && (lo < -1.0) == (hi < -1.0) && (lo > 1.0) == (hi > 1.0) {
        FrequencyInterval { a: wl, b: wh }
    } else {
        FrequencyInterval::FULL
    }
}

/// Range of the effective angular-difference frequency f_diff = sinφ_BR - sinθ_RM.
pub fn diff_frequency_band(prior: FrequencyInterval, sin_phi_br: f64) -> FrequencyInterval {
    let t = ris_training_band(prior, sin_phi_br);
    if t == FrequencyInterval::FULL {
        t
    } else {
        FrequencyInterval { a: -t.b, b: -t.a }
    }
}
