use faer::Mat;

use super::roots::polynomial_roots;
use crate::error::{Error, Result};
use crate::linalg::{eigh, toeplitz, wrap_freq, C64};

const PAIR_TOL: f64 = 1e-4;

#[derive(Debug, Clone, PartialEq)]
pub struct FrequencyExtraction {
    /// Spatial frequencies in [-1, 1), ascending.
    pub freqs: Vec<f64>,
    /// Toep(u) has fewer than L significant eigenvalues.
    pub rank_deficient: bool,
    /// No gap between the L-th largest eigenvalue and the rest (white spectrum).
    pub no_spectral_gap: bool,
    /// Eigenvalues of Toep(u), ascending.
    pub eigenvalues: Vec<f64>,
}

/// Root-MUSIC on Toep(u): roots of a(z)^H E_n E_n^H a(z) closest to the unit circle.
pub fn extract_frequencies(u: &[C64], num_paths: usize) -> Result<FrequencyExtraction> {
    let n = u.len();
    if num_paths == 0 || num_paths >= n {
        return Err(Error::Domain(format!(
            "need 1 <= L < {n} for a {n}x{n} Toeplitz matrix, got L={num_paths}"
        )));
    }
    let (w, e) = eigh(&toeplitz(u));
    let lmax = w[n - 1].abs();
    let signal_min = w[n - num_paths];
    let noise_max = w[n - num_paths - 1];
    let rank_deficient = !(signal_min > 1e-8 * lmax);
    let no_spectral_gap = !(signal_min - noise_max > 1e-6 * lmax);

    let m = n - num_paths;
    let en = Mat::from_fn(n, m, |i, k| e[(i, k)]);
    let c = &en * en.adjoint();
    // coefficient of z^{k+n-1} is the sum of the k-th diagonal
    let mut coeffs = vec![C64::new(0.0, 0.0); 2 * n - 1];
    for i in 0..n {
        for j in 0..n {
            coeffs[j + n - 1 - i] += c[(i, j)];
        }
    }
    let mirrored: Vec<C64> = polynomial_roots(&coeffs)
        .into_iter()
        .map(|z| if z.norm() > 1.0 { 1.0 / z.conj() } else { z })
        .collect();
    if mirrored.is_empty() {
        return Err(Error::RankDeficient("root polynomial is identically zero".into()));
    }

    let mut order: Vec<usize> = (0..mirrored.len()).collect();
    order.sort_by(|&a, &b| (1.0 - mirrored[a].norm()).total_cmp(&(1.0 - mirrored[b].norm())));
    let mut used = vec![false; mirrored.len()];
    let mut picked = Vec::with_capacity(num_paths);
    for &i in &order {
        if picked.len() == num_paths {
            break;
        }
        if used[i] {
            continue;
        }
        used[i] = true;
        let partner = (0..mirrored.len())
            .filter(|&j| !used[j])
            .min_by(|&a, &b| (mirrored[a] - mirrored[i]).norm().total_cmp(&(mirrored[b] - mirrored[i]).norm()));
        let z = match partner {
            Some(j) if (mirrored[j] - mirrored[i]).norm() < PAIR_TOL => {
                used[j] = true;
                (mirrored[i] + mirrored[j]) * 0.5
            }
            _ => mirrored[i],
        };
        picked.push(z);
    }
    if picked.len() < num_paths {
        return Err(Error::RankDeficient(format!(
            "only {} candidate roots for {num_paths} paths",
            picked.len()
        )));
    }
    let mut freqs: Vec<f64> = picked.iter().map(|z| wrap_freq(z.arg() / std::f64::consts::PI)).collect();
    freqs.sort_by(f64::total_cmp);
    Ok(FrequencyExtraction {
        freqs,
        rank_deficient,
        no_spectral_gap,
        eigenvalues: w,
    })
}
