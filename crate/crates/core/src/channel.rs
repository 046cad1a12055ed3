//! Array responses, BS-RIS / RIS-MS channels and the training observation.

use faer::Mat;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::linalg::{dotc, steer, wrap_freq, CMat, C64};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct UlaConfig {
    pub num_elements: usize,
}

impl UlaConfig {
    pub fn new(num_elements: usize) -> Self {
        assert!(num_elements >= 1, "array needs at least one element");
        Self { num_elements }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PathParams {
    pub gain: C64,
    pub aod: f64,
    pub aoa: f64,
}

/// RIS-MS channel: path 0 is the LoS path.
#[derive(Debug, Clone, PartialEq)]
pub struct MultipathChannel {
    pub paths: Vec<PathParams>,
    pub tx_array: UlaConfig,
    pub rx_array: UlaConfig,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainingSetup {
    pub bs_beam: Vec<C64>,
    /// N_M x P
    pub ms_combiners: CMat,
    /// N_R x T, one RIS profile per column
    pub ris_profiles: CMat,
    pub noise_variance: f64,
}

pub fn ula_response(array: UlaConfig, angle: f64) -> Vec<C64> {
    steer(array.num_elements, angle.sin())
}

fn outer(a: &[C64], b: &[C64], scale: C64) -> CMat {
    Mat::from_fn(a.len(), b.len(), |i, j| scale * a[i] * b[j].conj())
}

/// sqrt(N_B N_R) ρ α_R(φ) α_B(θ)^H
pub fn bs_ris_channel(rho: C64, theta_br: f64, phi_br: f64, bs: UlaConfig, ris: UlaConfig) -> CMat {
    let s = ((bs.num_elements * ris.num_elements) as f64).sqrt();
    outer(&ula_response(ris, phi_br), &ula_response(bs, theta_br), rho * s)
}

pub fn ris_ms_channel(ch: &MultipathChannel) -> CMat {
    let (nr, nm) = (ch.tx_array.num_elements, ch.rx_array.num_elements);
    let s = ((nr * nm) as f64).sqrt();
    let mut h = Mat::<C64>::zeros(nm, nr);
    for p in &ch.paths {
        h += outer(&ula_response(ch.rx_array, p.aoa), &ula_response(ch.tx_array, p.aod), p.gain * s);
    }
    h
}

/// Spatial frequency of α_R*(θ_RM) ∘ α_R(φ_BR), wrapped into [-1, 1).
pub fn effective_frequency_diff(theta_rm: f64, phi_br: f64) -> f64 {
    wrap_freq(phi_br.sin() - theta_rm.sin())
}

fn check_dims(setup: &TrainingSetup, h_br: &CMat, h_rm: &CMat) -> Result<()> {
    let nb = setup.bs_beam.len();
    let (nr, nm) = (setup.ris_profiles.nrows(), setup.ms_combiners.nrows());
    if h_br.nrows() != nr || h_br.ncols() != nb || h_rm.nrows() != nm || h_rm.ncols() != nr {
        return Err(Error::Dimension(format!(
            "H_BR {}x{}, H_RM {}x{} incompatible with N_B={nb}, N_R={nr}, N_M={nm}",
            h_br.nrows(),
            h_br.ncols(),
            h_rm.nrows(),
            h_rm.ncols()
        )));
    }
    if setup.ms_combiners.ncols() == 0 || setup.ris_profiles.ncols() == 0 {
        return Err(Error::Dimension("need at least one combiner and one RIS profile".into()));
    }
    Ok(())
}

/// Noiseless part of the training observation, one column per RIS profile.
pub fn noiseless_observation(setup: &TrainingSetup, h_br: &CMat, h_rm: &CMat) -> Result<CMat> {
    check_dims(setup, h_br, h_rm)?;
    let nb = setup.bs_beam.len();
    let g = h_br * Mat::from_fn(nb, 1, |i, _| setup.bs_beam[i]);
    let t = setup.ris_profiles.ncols();
    let nr = setup.ris_profiles.nrows();
    // column t of H_RM diag(ω_t) g is H_RM (ω_t ∘ g)
    let mixed = Mat::from_fn(nr, t, |n, k| setup.ris_profiles[(n, k)] * g[(n, 0)]);
    Ok(setup.ms_combiners.adjoint() * (h_rm * &mixed))
}

/// Circularly-symmetric complex Gaussian matrix with per-entry variance `var`.
pub fn complex_gaussian(rows: usize, cols: usize, var: f64, rng: &mut impl rand::Rng) -> CMat {
    let s = (var / 2.0).sqrt();
    let mut z = Mat::<C64>::zeros(rows, cols);
    for j in 0..cols {
        for i in 0..rows {
            let re: f64 = StandardNormal.sample(rng);
            let im: f64 = StandardNormal.sample(rng);
            z[(i, j)] = C64::new(s * re, s * im);
        }
    }
    z
}

/// Y = W^H H_RM diag(ω_t) H_BR f + W^H Z with Z ~ CN(0, σ²) of size N_M x T.
pub fn training_observation(setup: &TrainingSetup, h_br: &CMat, h_rm: &CMat, rng_seed: u64) -> Result<CMat> {
    let mut y = noiseless_observation(setup, h_br, h_rm)?;
    if setup.noise_variance > 0.0 {
        let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
        let z = complex_gaussian(
            setup.ms_combiners.nrows(),
            setup.ris_profiles.ncols(),
            setup.noise_variance,
            &mut rng,
        );
        y += setup.ms_combiners.adjoint() * z;
    }
    Ok(y)
}

/// Hadamard form of the noiseless observation: the BS-RIS link enters only
/// through the RIS-side steering vector α_R(φ_BR) multiplied into each profile.
pub fn hadamard_observation(
    setup: &TrainingSetup,
    rho_br: C64,
    theta_br: f64,
    phi_br: f64,
    h_rm: &CMat,
) -> CMat {
    let nb = setup.bs_beam.len();
    let nr = setup.ris_profiles.nrows();
    let a_r = steer(nr, phi_br.sin());
    let c = rho_br * ((nb * nr) as f64).sqrt() * dotc(&steer(nb, theta_br.sin()), &setup.bs_beam);
    let t = setup.ris_profiles.ncols();
    let mixed = Mat::from_fn(nr, t, |n, k| c * setup.ris_profiles[(n, k)] * a_r[n]);
    setup.ms_combiners.adjoint() * (h_rm * &mixed)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{dotu, singular_values};
    use proptest::prelude::*;
    use std::f64::consts::PI;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn ula_examples() {
        let a = ula_response(UlaConfig::new(4), 0.0);
        assert!(a.iter().all(|x| (x - c(0.5, 0.0)).norm() < 1e-15));
        assert_eq!(ula_response(UlaConfig::new(1), 0.7), vec![c(1.0, 0.0)]);
        let a = ula_response(UlaConfig::new(4), PI / 6.0);
        let want = [c(0.5, 0.0), c(0.0, 0.5), c(-0.5, 0.0), c(0.0, -0.5)];
        for (x, w) in a.iter().zip(want) {
            assert!((x - w).norm() < 1e-12);
        }
    }

    #[test]
    fn bs_ris_examples() {
        let h = bs_ris_channel(c(0.0, 0.0), 0.3, 0.4, UlaConfig::new(4), UlaConfig::new(8));
        assert_eq!(h.norm_l2(), 0.0);
        let h = bs_ris_channel(c(1.0, 0.0), 0.3, 0.4, UlaConfig::new(1), UlaConfig::new(1));
        assert!((h[(0, 0)] - c(1.0, 0.0)).norm() < 1e-15);
        let h = bs_ris_channel(c(1.0, 0.0), 0.0, 0.0, UlaConfig::new(2), UlaConfig::new(2));
        for i in 0..2 {
            for j in 0..2 {
                assert!((h[(i, j)] - c(1.0, 0.0)).norm() < 1e-15);
            }
        }
        let rho = c(0.3, -1.2);
        let h = bs_ris_channel(rho, 0.9, 2.0, UlaConfig::new(16), UlaConfig::new(64));
        assert!((h.norm_l2() - 32.0 * rho.norm()).abs() < 1e-12);
    }

    #[test]
    fn ris_ms_rank() {
        let ch = MultipathChannel {
            paths: vec![PathParams { gain: c(0.7, 0.2), aod: 0.4, aoa: 0.5 }],
            tx_array: UlaConfig::new(64),
            rx_array: UlaConfig::new(16),
        };
        let h = ris_ms_channel(&ch);
        assert!((h.norm_l2() - 32.0 * c(0.7, 0.2).norm()).abs() < 1e-12);
        let sv = singular_values(&h);
        assert!(sv[1] < 1e-10 * sv[0]);

        let mut two = ch.clone();
        two.paths.push(PathParams { gain: c(-0.3, 0.1), aod: 1.1, aoa: 0.9 });
        let sv = singular_values(&ris_ms_channel(&two));
        assert!(sv[1] > 1e-3 * sv[0] && sv[2] < 1e-10 * sv[0]);

        let mut zero = ch;
        zero.paths[0].gain = c(0.0, 0.0);
        assert_eq!(ris_ms_channel(&zero).norm_l2(), 0.0);
    }

    #[test]
    fn frequency_diff_examples() {
        assert_eq!(effective_frequency_diff(0.8, 0.8), 0.0);
        let v = effective_frequency_diff((-0.5f64).asin(), 0.9f64.asin());
        assert!((v + 0.6).abs() < 1e-12);
        let v = effective_frequency_diff(0.5f64.asin(), 0.3f64.asin());
        assert!((v + 0.2).abs() < 1e-12);
    }

    #[test]
    fn hadamard_identity_entrywise() {
        let n = 64;
        for &(st, sp) in &[(0.3, 0.9), (-0.5, 0.9), (0.6, 0.0), (0.95, -0.8)] {
            let a_t = steer(n, st);
            let a_p = steer(n, sp);
            let fd = wrap_freq(sp - st);
            let d = steer(n, fd);
            for k in 0..n {
                let lhs = a_t[k].conj() * a_p[k];
                assert!((lhs - d[k] / (n as f64).sqrt()).norm() < 1e-14);
            }
        }
    }

    fn single_path_setup(p: usize, t: usize, seed: u64) -> (TrainingSetup, C64, C64, f64, f64, f64, f64) {
        use rand::Rng;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (nb, nr, nm) = (16, 64, 16);
        let w = complex_gaussian(nm, p, 1.0, &mut rng);
        let om = Mat::from_fn(nr, t, |_, _| C64::from_polar(1.0, rng.gen_range(-PI..PI)));
        let theta_br = rng.gen_range(0.1..3.0);
        let phi_br = PI - theta_br;
        let theta_rm = rng.gen_range(0.1..3.0);
        let phi_rm = rng.gen_range(0.1..3.0);
        let rho_br = c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
        let rho_rm = c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
        let setup = TrainingSetup {
            bs_beam: ula_response(UlaConfig::new(nb), theta_br),
            ms_combiners: w,
            ris_profiles: om,
            noise_variance: 0.0,
        };
        (setup, rho_br, rho_rm, theta_br, phi_br, theta_rm, phi_rm)
    }

    #[test]
    fn factored_single_path_form() {
        let (nb, nr, nm) = (16usize, 64usize, 16usize);
        for seed in 0..10 {
            let (setup, rho_br, rho_rm, theta_br, phi_br, theta_rm, phi_rm) = single_path_setup(4, 16, seed);
            let h_br = bs_ris_channel(rho_br, theta_br, phi_br, UlaConfig::new(nb), UlaConfig::new(nr));
            let ch = MultipathChannel {
                paths: vec![PathParams { gain: rho_rm, aod: theta_rm, aoa: phi_rm }],
                tx_array: UlaConfig::new(nr),
                rx_array: UlaConfig::new(nm),
            };
            let y = training_observation(&setup, &h_br, &ris_ms_channel(&ch), 1).unwrap();
            let xi = rho_br * rho_rm * (nr as f64) * ((nb * nm) as f64).sqrt();
            let a_m = steer(nm, phi_rm.sin());
            let a_d = steer(nr, effective_frequency_diff(theta_rm, phi_br));
            for l in 0..4 {
                let wl: Vec<C64> = (0..nm).map(|i| setup.ms_combiners[(i, l)]).collect();
                let left = dotc(&wl, &a_m);
                for k in 0..16 {
                    let ok: Vec<C64> = (0..nr).map(|i| setup.ris_profiles[(i, k)]).collect();
                    let v = xi * left * dotu(&a_d, &ok) / (nr as f64).sqrt();
                    assert!((v - y[(l, k)]).norm() < 1e-10);
                }
            }
        }
    }

    #[test]
    fn aligned_beams_reach_full_gain() {
        let (nb, nr, nm) = (16usize, 64usize, 16usize);
        let (theta_br, theta_rm, phi_rm): (f64, f64, f64) = (1.2, 0.5, 0.7);
        let phi_br = PI - theta_br;
        let rho_br = c(0.6, -0.3);
        let rho_rm = c(-0.2, 0.9);
        let fd = effective_frequency_diff(theta_rm, phi_br);
        let om: Vec<C64> = steer(nr, fd).iter().map(|x| x.conj() * (nr as f64).sqrt()).collect();
        let setup = TrainingSetup {
            bs_beam: ula_response(UlaConfig::new(nb), theta_br),
            ms_combiners: Mat::from_fn(nm, 1, |i, _| steer(nm, phi_rm.sin())[i]),
            ris_profiles: Mat::from_fn(nr, 1, |i, _| om[i]),
            noise_variance: 0.0,
        };
        let ch = MultipathChannel {
            paths: vec![PathParams { gain: rho_rm, aod: theta_rm, aoa: phi_rm }],
            tx_array: UlaConfig::new(nr),
            rx_array: UlaConfig::new(nm),
        };
        let h_br = bs_ris_channel(rho_br, theta_br, phi_br, UlaConfig::new(nb), UlaConfig::new(nr));
        let y = training_observation(&setup, &h_br, &ris_ms_channel(&ch), 0).unwrap();
        let want = 64.0 * 16.0 * (rho_br * rho_rm).norm();
        assert!((y[(0, 0)].norm() - want).abs() < 1e-9 * want);
    }

    #[test]
    fn zero_channels_and_dimension_errors() {
        let (setup, ..) = single_path_setup(4, 16, 3);
        let y = training_observation(&setup, &Mat::zeros(64, 16), &Mat::zeros(16, 64), 9).unwrap();
        assert_eq!(y.norm_l2(), 0.0);
        assert!(training_observation(&setup, &Mat::zeros(64, 15), &Mat::zeros(16, 64), 9).is_err());
        assert!(training_observation(&setup, &Mat::zeros(64, 16), &Mat::zeros(16, 63), 9).is_err());
    }

    #[test]
    fn noise_is_seeded_and_has_requested_variance() {
        let (mut setup, ..) = single_path_setup(16, 400, 5);
        setup.ms_combiners = Mat::identity(16, 16);
        setup.noise_variance = 2.5;
        let h_br = Mat::zeros(64, 16);
        let h_rm = Mat::zeros(16, 64);
        let a = training_observation(&setup, &h_br, &h_rm, 42).unwrap();
        let b = training_observation(&setup, &h_br, &h_rm, 42).unwrap();
        assert_eq!(a, b);
        let var = a.squared_norm_l2() / (16.0 * 400.0);
        assert!((var - 2.5).abs() < 0.15, "sample variance {var}");
        let mean: C64 = (0..16).flat_map(|i| (0..400).map(move |j| (i, j))).map(|(i, j)| a[(i, j)]).sum();
        assert!((mean / 6400.0).norm() < 0.06);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(50))]

        #[test]
        fn matrix_and_hadamard_forms_agree(seed in 0u64..1_000_000, l in 1usize..4) {
            use rand::Rng;
            let (nb, nr, nm) = (16usize, 64usize, 16usize);
            let (setup, rho_br, _, theta_br, phi_br, ..) = single_path_setup(4, 16, seed);
            let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0xabcdef);
            let paths = (0..l).map(|_| PathParams {
                gain: c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)),
                aod: rng.gen_range(0.0..PI),
                aoa: rng.gen_range(0.0..PI),
            }).collect();
            let ch = MultipathChannel { paths, tx_array: UlaConfig::new(nr), rx_array: UlaConfig::new(nm) };
            let h_rm = ris_ms_channel(&ch);
            let h_br = bs_ris_channel(rho_br, theta_br, phi_br, UlaConfig::new(nb), UlaConfig::new(nr));
            let y7 = noiseless_observation(&setup, &h_br, &h_rm).unwrap();
            let y8 = hadamard_observation(&setup, rho_br, theta_br, phi_br, &h_rm);
            prop_assert!((y7 - y8).norm_max() <= 1e-10);
        }

        #[test]
        fn unit_norm_response(n in 1usize..128, angle in -10.0..10.0f64) {
            let a = ula_response(UlaConfig::new(n), angle);
            prop_assert!((crate::linalg::norm(&a) - 1.0).abs() < 1e-12);
        }

        #[test]
        fn noiseless_linear_in_gains(seed in 0u64..100_000, s1 in -3.0..3.0f64, s2 in -3.0..3.0f64) {
            let (nb, nr, nm) = (16usize, 64usize, 16usize);
            let (setup, rho_br, rho_rm, theta_br, phi_br, theta_rm, phi_rm) = single_path_setup(3, 5, seed);
            let ch = |g: C64| ris_ms_channel(&MultipathChannel {
                paths: vec![PathParams { gain: g, aod: theta_rm, aoa: phi_rm }],
                tx_array: UlaConfig::new(nr), rx_array: UlaConfig::new(nm),
            });
            let hb = |g: C64| bs_ris_channel(g, theta_br, phi_br, UlaConfig::new(nb), UlaConfig::new(nr));
            let base = noiseless_observation(&setup, &hb(rho_br), &ch(rho_rm)).unwrap();
            let scaled = noiseless_observation(&setup, &hb(rho_br * s1), &ch(rho_rm * s2)).unwrap();
            let diff = scaled - &base * faer::Scale(C64::new(s1 * s2, 0.0));
            prop_assert!(diff.norm_max() < 1e-9);
        }
    }
}
