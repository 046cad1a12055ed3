//! Simultaneous polynomial root finding (Aberth-Ehrlich iteration).

use crate::linalg::C64;

const MAX_SWEEPS: usize = 2000;

/// p(z)/p'(z) for ascending coefficients; uses the reversed polynomial outside the unit disk.
fn newton_ratio(c: &[C64], z: C64) -> C64 {
    let n = c.len() - 1;
    if z.norm() <= 1.0 {
        let (mut p, mut dp) = (c[n], C64::new(0.0, 0.0));
        for k in (0..n).rev() {
            dp = dp * z + p;
            p = p * z + c[k];
        }
        if dp.norm() == 0.0 {
            return if p.norm() == 0.0 { C64::new(0.0, 0.0) } else { p * 1e10 };
        }
        p / dp
    } else {
        let y = 1.0 / z;
        // q(y) = Σ c_k y^{n-k}
        let (mut q, mut dq) = (c[0], C64::new(0.0, 0.0));
        for k in 1..=n {
            dq = dq * y + q;
            q = q * y + c[k];
        }
        if q.norm() == 0.0 {
            return C64::new(0.0, 0.0);
        }
        z / (n as f64 - y * dq / q)
    }
}

/// All roots of Σ c_k z^k (ascending coefficients). Leading coefficients that vanish
/// relative to the largest one are dropped; vanishing low-order ones yield exact zeros.
pub fn polynomial_roots(coeffs: &[C64]) -> Vec<C64> {
    let cmax = coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max);
    if cmax == 0.0 {
        return Vec::new();
    }
    let small = cmax * 1e-14;
    let mut hi = coeffs.len();
    while hi > 0 && coeffs[hi - 1].norm() <= small {
        hi -= 1;
    }
    let mut lo = 0;
    while lo < hi && coeffs[lo].norm() <= small {
        lo += 1;
    }
    let mut roots = vec![C64::new(0.0, 0.0); lo];
    let c = &coeffs[lo..hi];
    let n = c.len().saturating_sub(1);
    if n == 0 {
        return roots;
    }
    if n == 1 {
        roots.push(-c[0] / c[1]);
        return roots;
    }

    let radius = (c[0].norm() / c[n].norm()).powf(1.0 / n as f64);
    let mut z: Vec<C64> = (0..n)
        .map(|k| C64::from_polar(radius, 2.0 * std::f64::consts::PI * k as f64 / n as f64 + 0.4))
        .collect();
    let mut done = vec![false; n];
    for _ in 0..MAX_SWEEPS {
        let mut all_done = true;
        for i in 0..n {
            if done[i] {
                continue;
            }
            let w = newton_ratio(c, z[i]);
            let s: C64 = (0..n).filter(|&j| j != i).map(|j| 1.0 / (z[i] - z[j])).sum();
            let denom = C64::new(1.0, 0.0) - w * s;
            let step = if denom.norm() == 0.0 { w } else { w / denom };
            if !(step.re.is_finite() && step.im.is_finite()) {
                continue;
            }
            z[i] -= step;
            if step.norm() <= 4.0 * f64::EPSILON * z[i].norm().max(1e-300) {
                done[i] = true;
            } else {
                all_done = false;
            }
        }
        if all_done {
            break;
        }
    }
    roots.extend(z);
    roots
}

#[cfg(test)]
mod tests {
    use super::*;

    fn from_roots(r: &[C64]) -> Vec<C64> {
        let mut c = vec![C64::new(1.0, 0.0)];
        for &x in r {
            let mut next = vec![C64::new(0.0, 0.0); c.len() + 1];
            for (k, &ck) in c.iter().enumerate() {
                next[k + 1] += ck;
                next[k] -= ck * x;
            }
            c = next;
        }
        c
    }

    fn matched(found: &[C64], want: &[C64], tol: f64) -> bool {
        let mut used = vec![false; found.len()];
        want.iter().all(|w| {
            let best = (0..found.len()).filter(|&i| !used[i]).min_by(|&a, &b| (found[a] - w).norm().total_cmp(&(found[b] - w).norm()));
            match best {
                Some(i) if (found[i] - w).norm() < tol => {
                    used[i] = true;
                    true
                }
                _ => false,
            }
        })
    }

    #[test]
    fn recovers_simple_roots() {
        let want = [C64::new(1.0, 0.0), C64::new(-2.0, 0.5), C64::new(0.1, -0.3), C64::new(3.0, 3.0)];
        let found = polynomial_roots(&from_roots(&want));
        assert_eq!(found.len(), 4);
        assert!(matched(&found, &want, 1e-10));
    }

    #[test]
    fn zero_and_degenerate_coefficients() {
        // z^2 (z - 2) with a vanishing leading term appended
        let c = [C64::new(0.0, 0.0), C64::new(0.0, 0.0), C64::new(-2.0, 0.0), C64::new(1.0, 0.0), C64::new(0.0, 0.0)];
        let found = polynomial_roots(&c);
        assert_eq!(found.len(), 3);
        assert!(matched(&found, &[C64::new(0.0, 0.0), C64::new(0.0, 0.0), C64::new(2.0, 0.0)], 1e-12));
        assert!(polynomial_roots(&[C64::new(0.0, 0.0); 3]).is_empty());
        assert!(polynomial_roots(&[C64::new(5.0, 0.0)]).is_empty());
    }

    #[test]
    fn unit_circle_pairs_at_high_degree() {
        // conjugate-reciprocal polynomial; every third pair is a double root on the circle
        let mut want = Vec::new();
        let mut doubles = Vec::new();
        for k in 0..20 {
            let z = C64::from_polar(1.0 + 0.05 * (k % 3) as f64, 0.3 * k as f64 - 2.9);
            want.push(z);
            want.push(1.0 / z.conj());
            if k % 3 == 0 {
                doubles.push(z);
            }
        }
        let found = polynomial_roots(&from_roots(&want));
        assert_eq!(found.len(), 40);
        // a double root splits by O(sqrt(eps)); its pair mean stays accurate
        assert!(matched(&found, &want, 1e-4));
        for d in doubles {
            let mut near: Vec<C64> = found.clone();
            near.sort_by(|a, b| (a - d).norm().total_cmp(&(b - d).norm()));
            let mean = (near[0] + near[1]) * 0.5;
            assert!((mean - d).norm() < 1e-8, "{d}: {:e}", (mean - d).norm());
        }
    }
}
