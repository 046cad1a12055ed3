use faer::Mat;

use super::{extract_frequencies, regularized_denoise, AnmConfig};
use crate::error::{Error, Result};
use crate::linalg::{eigh, hpd_inverse, steer, CMat, C64};

const MAX_PATHS: usize = 6;

#[derive(Debug, Clone, PartialEq)]
pub struct EstimationResult {
    /// sin φ̂_RM per path
    pub aoa_freqs: Vec<f64>,
    /// f̂_diff per path, paired with `aoa_freqs`
    pub diff_freqs: Vec<f64>,
    pub gains: Vec<C64>,
    pub pairing_residual: f64,
    /// ADMM iterations for the (AoA, diff) problems.
    pub iterations: (usize, usize),
    pub warnings: Vec<String>,
}

/// Regressor of one path: (W^H α_M(f_a)) (α_R(f_d)^T Ω̄) / sqrt(N_R), so that the
/// fitted coefficient is ξ = N_R sqrt(N_B N_M) ρ_BR ρ_RM.
fn path_regressor(w: &CMat, om: &CMat, fa: f64, fd: f64) -> CMat {
    let (nm, p) = (w.nrows(), w.ncols());
    let (nr, t) = (om.nrows(), om.ncols());
    let am = steer(nm, fa);
    let ad = steer(nr, fd);
    let left: Vec<C64> = (0..p).map(|l| (0..nm).map(|i| w[(i, l)].conj() * am[i]).sum()).collect();
    let right: Vec<C64> = (0..t).map(|k| (0..nr).map(|i| ad[i] * om[(i, k)]).sum()).collect();
    let s = 1.0 / (nr as f64).sqrt();
    Mat::from_fn(p, t, |l, k| left[l] * right[k] * s)
}

fn inner(a: &CMat, b: &CMat) -> C64 {
    let mut s = C64::new(0.0, 0.0);
    for j in 0..a.ncols() {
        for i in 0..a.nrows() {
            s += a[(i, j)].conj() * b[(i, j)];
        }
    }
    s
}

/// Least-squares path gains and the Frobenius residual of the fit.
pub fn recover_gains(y: &CMat, w: &CMat, om: &CMat, aoa_freqs: &[f64], diff_freqs: &[f64]) -> Result<(Vec<C64>, f64)> {
    if aoa_freqs.len() != diff_freqs.len() || aoa_freqs.is_empty() {
        return Err(Error::Dimension(format!(
            "frequency lists of lengths {} and {}",
            aoa_freqs.len(),
            diff_freqs.len()
        )));
    }
    if y.nrows() != w.ncols() || y.ncols() != om.ncols() {
        return Err(Error::Dimension("Y must be P x T for the given W and RIS profiles".into()));
    }
    let l = aoa_freqs.len();
    let xs: Vec<CMat> = aoa_freqs.iter().zip(diff_freqs).map(|(&a, &d)| path_regressor(w, om, a, d)).collect();
    let gram = Mat::from_fn(l, l, |i, j| inner(&xs[i], &xs[j]));
    let (ev, _) = eigh(&gram);
    if !(ev[0] > 1e-10 * ev[l - 1].max(f64::MIN_POSITIVE)) {
        return Err(Error::RankDeficient("path regressors are collinear".into()));
    }
    let rhs = Mat::from_fn(l, 1, |i, _| inner(&xs[i], y));
    let g = hpd_inverse(&gram) * rhs;
    let gains: Vec<C64> = (0..l).map(|i| g[(i, 0)]).collect();
    let mut r = y.clone();
    for (x, &gi) in xs.iter().zip(&gains) {
        r -= x * faer::Scale(gi);
    }
    Ok((gains, r.norm_l2()))
}

fn permutations(n: usize) -> Vec<Vec<usize>> {
    if n == 0 {
        return vec![Vec::new()];
    }
    let mut out = Vec::new();
    for p in permutations(n - 1) {
        for pos in 0..=p.len() {
            let mut q = p.clone();
            q.insert(pos, n - 1);
            out.push(q);
        }
    }
    out.sort();
    out
}

struct Decoupled {
    aoa: Vec<f64>,
    diff: Vec<f64>,
    iterations: (usize, usize),
    warnings: Vec<String>,
}

fn decoupled_anm(y: &CMat, w: &CMat, om: &CMat, l: usize, noise_std: f64, cfg: &AnmConfig) -> Result<Decoupled> {
    let (p, t) = (y.nrows(), y.ncols());
    if w.ncols() != p || om.ncols() != t {
        return Err(Error::Dimension(format!(
            "Y is {p}x{t}, W has {} columns, RIS profiles {}",
            w.ncols(),
            om.ncols()
        )));
    }
    let mut warnings = Vec::new();

    let wh = w.adjoint().to_owned();
    let mu_a = cfg.mu_for(noise_std, w.nrows(), t, y);
    let sol_a = regularized_denoise(y, &wh, mu_a, cfg)?;
    let ex_a = extract_frequencies(&sol_a.u, l)?;

    // transposed model: Y^T = Ω̄^T (ξ α_R(f_d)) (W^H α_M)^T
    let yt = y.transpose().to_owned();
    let omt = om.transpose().to_owned();
    let mu_d = cfg.mu_for(noise_std, om.nrows(), p, &yt);
    let sol_d = regularized_denoise(&yt, &omt, mu_d, cfg)?;
    let ex_d = extract_frequencies(&sol_d.u, l)?;

    for (name, ex) in [("aoa", &ex_a), ("diff", &ex_d)] {
        if ex.rank_deficient {
            warnings.push(format!("{name}: Toeplitz block has rank below {l}"));
        }
        if ex.no_spectral_gap {
            warnings.push(format!("{name}: no spectral gap at order {l}"));
        }
    }
    Ok(Decoupled {
        aoa: ex_a.freqs,
        diff: ex_d.freqs,
        iterations: (sol_a.iterations, sol_d.iterations),
        warnings,
    })
}

/// Single-path estimate: AoA from Y, angular difference from Y^T, then the gain.
pub fn estimate_single_path(y: &CMat, w: &CMat, om: &CMat, noise_std: f64, cfg: &AnmConfig) -> Result<EstimationResult> {
    let d = decoupled_anm(y, w, om, 1, noise_std, cfg)?;
    let (gains, residual) = recover_gains(y, w, om, &d.aoa, &d.diff)?;
    Ok(EstimationResult {
        aoa_freqs: d.aoa,
        diff_freqs: d.diff,
        gains,
        pairing_residual: residual,
        iterations: d.iterations,
        warnings: d.warnings,
    })
}

/// L-path estimate; the AoA/diff pairing minimises the least-squares residual over all L! assignments.
pub fn estimate_multipath(y: &CMat, w: &CMat, om: &CMat, l: usize, noise_std: f64, cfg: &AnmConfig) -> Result<EstimationResult> {
    if l == 0 || l > MAX_PATHS {
        return Err(Error::Domain(format!("path count must be in 1..={MAX_PATHS}, got {l}")));
    }
    let mut d = decoupled_anm(y, w, om, l, noise_std, cfg)?;
    let mut best: Option<(f64, Vec<f64>, Vec<C64>)> = None;
    for perm in permutations(l) {
        let diff: Vec<f64> = perm.iter().map(|&k| d.diff[k]).collect();
        let fit = match recover_gains(y, w, om, &d.aoa, &diff) {
            Ok(f) => f,
            Err(Error::RankDeficient(_)) => continue,
            Err(e) => return Err(e),
        };
        if best.as_ref().is_none_or(|b| fit.1 < b.0) {
            best = Some((fit.1, diff, fit.0));
        }
    }
    let (residual, diff, gains) = best.ok_or_else(|| {
        d.warnings.push("every pairing is rank deficient".into());
        Error::RankDeficient("no pairing yields independent path regressors".into())
    })?;
    Ok(EstimationResult {
        aoa_freqs: d.aoa,
        diff_freqs: diff,
        gains,
        pairing_residual: residual,
        iterations: d.iterations,
        warnings: d.warnings,
    })
}

/// Residual of every pairing, in the order of the lexicographic permutations.
pub fn pairing_residuals(y: &CMat, w: &CMat, om: &CMat, aoa: &[f64], diff: &[f64]) -> Vec<(Vec<usize>, f64)> {
    permutations(aoa.len())
        .into_iter()
        .filter_map(|perm| {
            let d: Vec<f64> = perm.iter().map(|&k| diff[k]).collect();
            recover_gains(y, w, om, aoa, &d).ok().map(|(_, r)| (perm, r))
        })
        .collect()
}
