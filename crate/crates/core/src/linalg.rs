//! Small dense helpers over faer matrices.

use faer::{Mat, Side};
use num_complex::Complex64;

pub type C64 = Complex64;
pub type CMat = Mat<C64>;

pub const J: C64 = C64 { re: 0.0, im: 1.0 };

/// Wrap a spatial frequency into [-1, 1).
pub fn wrap_freq(f: f64) -> f64 {
    let w = (f + 1.0).rem_euclid(2.0) - 1.0;
    if w >= 1.0 {
        -1.0
    } else {
        w
    }
}

/// Unit-norm ULA steering vector at spatial frequency `f`.
pub fn steer(n: usize, f: f64) -> Vec<C64> {
    let s = 1.0 / (n as f64).sqrt();
    (0..n)
        .map(|k| C64::from_polar(s, std::f64::consts::PI * k as f64 * f))
        .collect()
}

pub fn col_vec(v: &[C64]) -> CMat {
    Mat::from_fn(v.len(), 1, |i, _| v[i])
}

pub fn column(m: &CMat, j: usize) -> Vec<C64> {
    (0..m.nrows()).map(|i| m[(i, j)]).collect()
}

pub fn columns_from(cols: &[Vec<C64>]) -> CMat {
    let n = cols.first().map_or(0, |c| c.len());
    Mat::from_fn(n, cols.len(), |i, j| cols[j][i])
}

/// x^H y
pub fn dotc(x: &[C64], y: &[C64]) -> C64 {
    x.iter().zip(y).map(|(a, b)| a.conj() * b).sum()
}

/// x^T y
pub fn dotu(x: &[C64], y: &[C64]) -> C64 {
    x.iter().zip(y).map(|(a, b)| a * b).sum()
}

pub fn norm(x: &[C64]) -> f64 {
    x.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
}

pub fn frob(m: &CMat) -> f64 {
    m.norm_l2()
}

pub fn adjoint(m: &CMat) -> CMat {
    m.adjoint().to_owned()
}

pub fn matvec(m: &CMat, x: &[C64]) -> Vec<C64> {
    (0..m.nrows())
        .map(|i| (0..m.ncols()).map(|j| m[(i, j)] * x[j]).sum())
        .collect()
}

/// Hermitian eigendecomposition with eigenvalues ascending.
pub fn eigh(m: &CMat) -> (Vec<f64>, CMat) {
    let e = m
        .as_ref()
        .self_adjoint_eigen(Side::Lower)
        .expect("hermitian eigendecomposition failed");
    let s = e.S();
    let vals = (0..m.nrows()).map(|i| s[i].re).collect();
    (vals, e.U().to_owned())
}

/// Moore-Penrose pseudo-inverse via SVD with a relative singular-value cutoff.
pub fn pinv(m: &CMat, rcond: f64) -> CMat {
    let (r, c) = (m.nrows(), m.ncols());
    let svd = m.as_ref().thin_svd().expect("svd failed");
    let s = svd.S();
    let k = r.min(c);
    let smax = (0..k).map(|i| s[i].re).fold(0.0, f64::max);
    let u = svd.U();
    let v = svd.V();
    let mut out = Mat::<C64>::zeros(c, r);
    for t in 0..k {
        let sv = s[t].re;
        if sv <= rcond * smax || sv == 0.0 {
            continue;
        }
        let inv = 1.0 / sv;
        for i in 0..c {
            let vi = v[(i, t)] * inv;
            for j in 0..r {
                out[(i, j)] += vi * u[(j, t)].conj();
            }
        }
    }
    out
}

pub fn singular_values(m: &CMat) -> Vec<f64> {
    let s = m.as_ref().singular_values().expect("svd failed");
    s.into_iter().collect()
}

/// Solve the Hermitian positive definite system A x = B.
pub fn hpd_inverse(a: &CMat) -> CMat {
    let n = a.nrows();
    let llt = a.as_ref().llt(Side::Lower).expect("matrix is not positive definite");
    let mut id = Mat::<C64>::identity(n, n);
    faer::linalg::solvers::SolveCore::solve_in_place_with_conj(&llt, faer::Conj::No, id.as_mut());
    id
}

/// Hermitian Toeplitz matrix whose first row is `u`.
pub fn toeplitz(u: &[C64]) -> CMat {
    let n = u.len();
    Mat::from_fn(n, n, |i, j| if j >= i { u[j - i] } else { u[i - j].conj() })
}

/// Adjoint-averaging projection onto Hermitian Toeplitz: for each lag, average the
/// upper diagonal and the conjugated lower diagonal.
pub fn toeplitz_average(m: &CMat, n: usize) -> Vec<C64> {
    let mut u = vec![C64::new(0.0, 0.0); n];
    for (k, uk) in u.iter_mut().enumerate() {
        let mut s = C64::new(0.0, 0.0);
        for i in 0..n - k {
            s += m[(i, i + k)] + m[(i + k, i)].conj();
        }
        *uk = s / (2.0 * (n - k) as f64);
    }
    u[0] = C64::new(u[0].re, 0.0);
    u
}
