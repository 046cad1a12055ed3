use faer::Mat;

use crate::error::{Error, Result};
use crate::linalg::{eigh, hpd_inverse, steer, CMat, C64};

/// True parameters of one RIS-MS path as seen by the estimator.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CrlbPath {
    pub aoa_freq: f64,
    pub diff_freq: f64,
    /// ξ = N_R sqrt(N_B N_M) ρ_BR ρ_RM (times α_B^H f)
    pub gain: C64,
}

/// Mean of one path and its derivatives with respect to (sin φ, f_diff).
fn path_terms(w: &CMat, om: &CMat, p: &CrlbPath) -> [Vec<C64>; 3] {
    let (nm, pp) = (w.nrows(), w.ncols());
    let (nr, t) = (om.nrows(), om.ncols());
    let am = steer(nm, p.aoa_freq);
    let ad = steer(nr, p.diff_freq);
    let jpi = C64::new(0.0, std::f64::consts::PI);
    let left = |d: bool| -> Vec<C64> {
        (0..pp)
            .map(|l| (0..nm).map(|i| w[(i, l)].conj() * am[i] * if d { jpi * i as f64 } else { C64::new(1.0, 0.0) }).sum())
            .collect()
    };
    let right = |d: bool| -> Vec<C64> {
        (0..t)
            .map(|k| (0..nr).map(|i| ad[i] * om[(i, k)] * if d { jpi * i as f64 } else { C64::new(1.0, 0.0) }).sum())
            .collect()
    };
    let (l0, l1, r0, r1) = (left(false), left(true), right(false), right(true));
    let s = 1.0 / (nr as f64).sqrt();
    let outer = |a: &[C64], b: &[C64]| -> Vec<C64> {
        let mut v = Vec::with_capacity(pp * t);
        for k in 0..t {
            for l in 0..pp {
                v.push(a[l] * b[k] * s);
            }
        }
        v
    };
    [outer(&l0, &r0), outer(&l1, &r0), outer(&l0, &r1)]
}

/// Slepian-Bangs bound for the LoS path (first entry of `paths`) under Y = mean + CN(0, σ²)
/// white noise. Per path the real parameters are (sin φ, f_diff, Re ξ, Im ξ).
pub fn crlb_frequencies(paths: &[CrlbPath], w: &CMat, om: &CMat, noise_variance: f64) -> Result<(f64, f64)> {
    if paths.is_empty() {
        return Err(Error::Domain("need at least one path".into()));
    }
    if !(noise_variance > 0.0) {
        return Err(Error::Domain("noise variance must be positive".into()));
    }
    let mut cols: Vec<Vec<C64>> = Vec::with_capacity(4 * paths.len());
    for p in paths {
        let [x, ds, dd] = path_terms(w, om, p);
        cols.push(ds.iter().map(|v| v * p.gain).collect());
        cols.push(dd.iter().map(|v| v * p.gain).collect());
        cols.push(x.clone());
        cols.push(x.iter().map(|v| v * C64::new(0.0, 1.0)).collect());
    }
    let k = cols.len();
    let fim = Mat::from_fn(k, k, |i, j| {
        let v: C64 = cols[i].iter().zip(&cols[j]).map(|(a, b)| a.conj() * b).sum();
        C64::new(2.0 * v.re / noise_variance, 0.0)
    });
    let (ev, _) = eigh(&fim);
    if !(ev[0] > 1e-12 * ev[k - 1]) {
        return Err(Error::SingularFisher);
    }
    let inv = hpd_inverse(&fim);
    Ok((inv[(0, 0)].re, inv[(1, 1)].re))
}
