use std::f64::consts::{PI, TAU};
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::config::ExperimentConfig;
use super::csv::{MetricName, MetricRecord};
use crate::anm::{estimate_multipath, estimate_single_path, EstimationResult};
use crate::channel::{
    bs_ris_channel, complex_gaussian, ris_ms_channel, training_observation, MultipathChannel, PathParams,
    TrainingSetup, UlaConfig,
};
use crate::codebook::{design_codebook, ris_training_band, CodebookDesignSpec};
use crate::error::{Error, Result};
use crate::evaluation::{
    benchmark_beam_alignment, benchmark_wide_beam, crlb_frequencies, design_receiver, effective_se, matched_mse,
    stack_codebooks, CrlbPath, SeConfig,
};
use crate::geometry::{
    aoa_interval_from_aod, aod_uncertainty_interval, bearing_angles, interval_to_frequency, los_angle_estimate,
    AngularInterval, FrequencyInterval, LocationPrior, Position2D,
};
use crate::linalg::{steer, wrap_freq, CMat, C64};

const MAX_FAILURE_RATE: f64 = 0.02;
pub const METHOD_PRIOR: &str = "anm_prior";
pub const METHOD_NO_PRIOR: &str = "anm_noprior";
pub const METHOD_B1: &str = "benchmark1";
pub const METHOD_B2: &str = "benchmark2";

#[derive(Debug, Clone)]
pub struct Report {
    pub config: ExperimentConfig,
    pub records: Vec<MetricRecord>,
    /// Failed estimator runs and the number attempted.
    pub failures: usize,
    pub attempts: usize,
    pub wall_time: Duration,
}

impl Report {
    pub fn failure_rate(&self) -> f64 {
        if self.attempts == 0 {
            0.0
        } else {
            self.failures as f64 / self.attempts as f64
        }
    }

    /// Error when more than 2% of estimator runs failed.
    pub fn check(&self) -> Result<()> {
        if self.failure_rate() > MAX_FAILURE_RATE {
            return Err(Error::Config(format!(
                "{} of {} estimator runs failed",
                self.failures, self.attempts
            )));
        }
        Ok(())
    }

    pub fn value(&self, method: &str, metric: MetricName, snr_db: f64) -> Option<f64> {
        self.records
            .iter()
            .find(|r| r.method == method && r.metric_name == metric && r.snr_db == snr_db)
            .map(|r| r.value)
    }

    /// One line per SNR point.
    pub fn summary_lines(&self) -> Vec<String> {
        self.config
            .snr_db_grid
            .iter()
            .map(|&snr| {
                let parts: Vec<String> = self
                    .records
                    .iter()
                    .filter(|r| r.snr_db == snr)
                    .map(|r| format!("{}/{}={:.4e}", r.method, r.metric_name, r.value))
                    .collect();
                format!("snr {snr:>6.1} dB: {}", parts.join(" "))
            })
            .collect()
    }
}

fn splitmix(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    let mut z = x;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed for one (stream, trial) pair. Stream `u64::MAX` draws the channel so that all
/// SNR points share channel realisations; stream `snr_index` draws that point's noise.
pub fn trial_seed(seed: u64, stream: u64, trial: u64) -> u64 {
    splitmix(splitmix(splitmix(seed) ^ stream) ^ trial)
}

const CHANNEL_STREAM: u64 = u64::MAX;

/// Per-path bands after geometry has been applied.
#[derive(Debug, Clone, Copy)]
struct PathBands {
    gain_variance: f64,
    aoa: FrequencyInterval,
    aod: FrequencyInterval,
}

struct Scene {
    theta_br: f64,
    phi_br: f64,
    bands: Vec<PathBands>,
    geometry: Option<super::config::CustomGeometry>,
}

fn resolve(cfg: &ExperimentConfig) -> Result<Scene> {
    let mut bands: Vec<PathBands> = cfg
        .paths
        .iter()
        .map(|p| PathBands { gain_variance: p.gain_variance, aoa: p.prior, aod: p.prior })
        .collect();
    let (theta_br, phi_br) = match &cfg.geometry {
        Some(g) => {
            let (t, p) = bearing_angles(g.bs, g.ris)?;
            let prior = LocationPrior { reported_position: g.ms_reported, error_bound_epsilon: g.epsilon };
            let theta_hat = los_angle_estimate(g.ris, &prior)?;
            let aod = aod_uncertainty_interval(theta_hat, g.ris.distance(&g.ms_reported), g.epsilon)?;
            let aoa = aoa_interval_from_aod(aod);
            let aoa = AngularInterval::new(
                (aoa.lower - g.ms_orientation).clamp(0.0, PI),
                (aoa.upper - g.ms_orientation).clamp(0.0, PI),
            );
            bands[0].aod = interval_to_frequency(aod);
            bands[0].aoa = interval_to_frequency(aoa);
            (t, p)
        }
        None => {
            let p = cfg.sin_phi_br.asin();
            (PI - p, p)
        }
    };
    Ok(Scene { theta_br, phi_br, bands, geometry: cfg.geometry })
}

/// Split `total` beams over bands in proportion to their widths, at least one each.
fn allocate(total: usize, widths: &[f64]) -> Vec<usize> {
    let n = widths.len();
    let sum: f64 = widths.iter().map(|w| w.max(1e-12)).sum();
    let ideal: Vec<f64> = widths.iter().map(|w| total as f64 * w.max(1e-12) / sum).collect();
    let mut c: Vec<usize> = ideal.iter().map(|x| (x.floor() as usize).max(1)).collect();
    while c.iter().sum::<usize>() < total {
        let i = (0..n).max_by(|&a, &b| (ideal[a] - c[a] as f64).total_cmp(&(ideal[b] - c[b] as f64))).unwrap();
        c[i] += 1;
    }
    while c.iter().sum::<usize>() > total {
        let i = (0..n).filter(|&i| c[i] > 1).min_by(|&a, &b| (ideal[a] - c[a] as f64).total_cmp(&(ideal[b] - c[b] as f64))).unwrap();
        c[i] -= 1;
    }
    c
}

struct Training {
    w: CMat,
    om: CMat,
}

fn build_training(ms_bands: &[FrequencyInterval], ris_bands: &[FrequencyInterval], cfg: &ExperimentConfig) -> Result<Training> {
    let (_, nr, nm) = cfg.dims;
    let (p, t) = cfg.beams;
    let book = |n: usize, bands: &[FrequencyInterval], total: usize, cm: bool| -> Result<CMat> {
        let counts = allocate(total, &bands.iter().map(|b| b.width()).collect::<Vec<_>>());
        let books = bands
            .iter()
            .zip(counts)
            .map(|(&b, k)| design_codebook(&CodebookDesignSpec::new(n, b, k, cm)))
            .collect::<Result<Vec<_>>>()?;
        Ok(stack_codebooks(&books))
    };
    Ok(Training { w: book(nm, ms_bands, p, false)?, om: book(nr, ris_bands, t, true)? })
}

fn hull(bands: &[FrequencyInterval]) -> FrequencyInterval {
    FrequencyInterval {
        a: bands.iter().map(|b| b.a).fold(f64::INFINITY, f64::min),
        b: bands.iter().map(|b| b.b).fold(f64::NEG_INFINITY, f64::max),
    }
}

/// Channel realisation of one trial.
struct Draw {
    rho_br: C64,
    /// (sin φ_RM, sin θ_RM, ρ_RM) per path
    paths: Vec<(f64, f64, C64)>,
}

fn cn(rng: &mut ChaCha8Rng, var: f64) -> C64 {
    complex_gaussian(1, 1, var, rng)[(0, 0)]
}

fn draw(scene: &Scene, seed: u64, trial: u64) -> Result<Draw> {
    let mut rng = ChaCha8Rng::seed_from_u64(trial_seed(seed, CHANNEL_STREAM, trial));
    let rho_br = cn(&mut rng, 1.0);
    let mut paths = Vec::with_capacity(scene.bands.len());
    for (l, b) in scene.bands.iter().enumerate() {
        let gain = cn(&mut rng, b.gain_variance);
        let (aoa, aod) = match (&scene.geometry, l) {
            (Some(g), 0) => {
                // uniform in the ε-disk around the reported position
                let r = g.epsilon * rng.gen::<f64>().sqrt();
                let a = TAU * rng.gen::<f64>();
                let m = Position2D::new(g.ms_reported.x + r * a.cos(), g.ms_reported.y + r * a.sin());
                let (theta_rm, phi_rm) = bearing_angles(g.ris, m)?;
                ((phi_rm - g.ms_orientation).clamp(0.0, PI).sin(), theta_rm.sin())
            }
            (_, 0) => {
                let s = uniform(&mut rng, b.aod);
                (s, s)
            }
            _ => (uniform(&mut rng, b.aoa), uniform(&mut rng, b.aod)),
        };
        paths.push((aoa, aod, gain));
    }
    Ok(Draw { rho_br, paths })
}

fn uniform(rng: &mut ChaCha8Rng, b: FrequencyInterval) -> f64 {
    if b.width() == 0.0 {
        b.a
    } else {
        rng.gen_range(b.a..=b.b)
    }
}

#[derive(Clone, Copy)]
struct Slot {
    method: &'static str,
    metric: MetricName,
}

fn slots(cfg: &ExperimentConfig) -> Vec<Slot> {
    let mut v = Vec::new();
    if cfg.reports.mse {
        for method in [METHOD_PRIOR, METHOD_NO_PRIOR] {
            for metric in [MetricName::MseAoa, MetricName::MseDiff, MetricName::CrlbAoa, MetricName::CrlbDiff] {
                v.push(Slot { method, metric });
            }
        }
    }
    if cfg.reports.se {
        for method in [METHOD_PRIOR, METHOD_B1, METHOD_B2, METHOD_NO_PRIOR] {
            v.push(Slot { method, metric: MetricName::EffectiveSe });
        }
    }
    v
}

struct Context<'a> {
    cfg: &'a ExperimentConfig,
    scene: Scene,
    prior: Training,
    no_prior: Training,
    wide_ms: FrequencyInterval,
    wide_ris: FrequencyInterval,
    slots: Vec<Slot>,
}

struct Outcome {
    values: Vec<Option<f64>>,
    failures: usize,
    attempts: usize,
}

impl Context<'_> {
    fn trial(&self, snr_index: usize, trial: u64) -> Result<Outcome> {
        let cfg = self.cfg;
        let (nb, nr, nm) = cfg.dims;
        let snr_db = cfg.snr_db_grid[snr_index];
        let sigma2 = 10f64.powf(-snr_db / 10.0);
        let d = draw(&self.scene, cfg.seed, trial)?;

        let (theta_br, phi_br) = (self.scene.theta_br, self.scene.phi_br);
        let h_br = bs_ris_channel(d.rho_br, theta_br, phi_br, UlaConfig::new(nb), UlaConfig::new(nr));
        let ch = MultipathChannel {
            paths: d
                .paths
                .iter()
                .map(|&(aoa, aod, gain)| PathParams { gain, aod: aod.asin(), aoa: aoa.asin() })
                .collect(),
            tx_array: UlaConfig::new(nr),
            rx_array: UlaConfig::new(nm),
        };
        let h_rm = ris_ms_channel(&ch);
        let f = steer(nb, theta_br.sin());
        let xi_scale = nr as f64 * ((nb * nm) as f64).sqrt() * crate::linalg::dotc(&steer(nb, theta_br.sin()), &f);
        let truth_aoa: Vec<f64> = d.paths.iter().map(|p| p.0).collect();
        let truth_diff: Vec<f64> = d.paths.iter().map(|p| wrap_freq(phi_br.sin() - p.1)).collect();
        let crlb_paths: Vec<CrlbPath> = d
            .paths
            .iter()
            .zip(&truth_diff)
            .map(|(p, &fd)| CrlbPath { aoa_freq: p.0, diff_freq: fd, gain: xi_scale * d.rho_br * p.2 })
            .collect();

        let noise_seed = trial_seed(cfg.seed, snr_index as u64, trial);
        let observe = |tr: &Training| -> Result<CMat> {
            let setup = TrainingSetup {
                bs_beam: f.clone(),
                ms_combiners: tr.w.clone(),
                ris_profiles: tr.om.clone(),
                noise_variance: sigma2,
            };
            training_observation(&setup, &h_br, &h_rm, noise_seed)
        };
        let estimate = |y: &CMat, tr: &Training| -> Result<EstimationResult> {
            let l = cfg.num_paths();
            if l == 1 {
                estimate_single_path(y, &tr.w, &tr.om, sigma2.sqrt(), &cfg.anm)
            } else {
                estimate_multipath(y, &tr.w, &tr.om, l, sigma2.sqrt(), &cfg.anm)
            }
        };

        let y_prior = observe(&self.prior)?;
        let y_none = observe(&self.no_prior)?;
        let mut failures = 0;
        let mut keep = |r: Result<EstimationResult>| {
            if r.is_err() {
                failures += 1;
            }
            r.ok()
        };
        let est_prior = keep(estimate(&y_prior, &self.prior));
        let est_none = keep(estimate(&y_none, &self.no_prior));
        let attempts = 2;

        let se_cfg = SeConfig {
            coherence_length: cfg.coherence_length,
            training_length: cfg.training_length,
            noise_variance: sigma2,
        };
        let se_of = |e: &Option<EstimationResult>| -> Option<f64> {
            let design = design_receiver(e.as_ref()?, nm, nr).ok()?;
            Some(effective_se(&design, &h_br, &h_rm, &f, &se_cfg))
        };
        let crlb = |tr: &Training| crlb_frequencies(&crlb_paths, &tr.w, &tr.om, sigma2).ok();
        let (crlb_prior, crlb_none) = if cfg.reports.mse { (crlb(&self.prior), crlb(&self.no_prior)) } else { (None, None) };

        let values = self
            .slots
            .iter()
            .map(|s| {
                let (est, crlb) = match s.method {
                    METHOD_PRIOR => (&est_prior, crlb_prior),
                    METHOD_NO_PRIOR => (&est_none, crlb_none),
                    _ => (&None, None),
                };
                match (s.method, s.metric) {
                    (_, MetricName::MseAoa) => est.as_ref().and_then(|e| matched_mse(&e.aoa_freqs, &truth_aoa).ok()),
                    (_, MetricName::MseDiff) => est.as_ref().and_then(|e| matched_mse(&e.diff_freqs, &truth_diff).ok()),
                    (_, MetricName::CrlbAoa) => crlb.map(|c| c.0),
                    (_, MetricName::CrlbDiff) => crlb.map(|c| c.1),
                    (METHOD_B1, _) => {
                        let design = benchmark_beam_alignment(&y_prior, &self.prior.w, &self.prior.om);
                        Some(effective_se(&design, &h_br, &h_rm, &f, &se_cfg))
                    }
                    (METHOD_B2, _) => {
                        let design = benchmark_wide_beam(self.wide_ms, self.wide_ris, nm, nr).ok()?;
                        let no_training = SeConfig { training_length: 0, ..se_cfg };
                        Some(effective_se(&design, &h_br, &h_rm, &f, &no_training))
                    }
                    (_, MetricName::EffectiveSe) => se_of(est),
                }
            })
            .collect();
        Ok(Outcome { values, failures, attempts })
    }
}

/// Run every (SNR, trial) pair and average the per-trial metrics.
pub fn run(cfg: &ExperimentConfig) -> Result<Report> {
    cfg.validate()?;
    let start = Instant::now();
    let scene = resolve(cfg)?;
    let sin_phi_br = scene.phi_br.sin();
    let ms_bands: Vec<FrequencyInterval> = scene.bands.iter().map(|b| b.aoa).collect();
    let ris_bands: Vec<FrequencyInterval> = scene.bands.iter().map(|b| ris_training_band(b.aod, sin_phi_br)).collect();
    let prior = build_training(&ms_bands, &ris_bands, cfg)?;
    let no_prior = build_training(&[FrequencyInterval::FULL], &[FrequencyInterval::FULL], cfg)?;
    let ctx = Context {
        cfg,
        wide_ms: hull(&ms_bands),
        wide_ris: hull(&ris_bands),
        scene,
        prior,
        no_prior,
        slots: slots(cfg),
    };

    let n_snr = cfg.snr_db_grid.len();
    let jobs: Vec<(usize, u64)> = (0..n_snr).flat_map(|s| (0..cfg.trials as u64).map(move |t| (s, t))).collect();
    let outcomes: Vec<Outcome> = jobs
        .par_iter()
        .map(|&(s, t)| ctx.trial(s, t))
        .collect::<Result<Vec<_>>>()?;

    let mut records = Vec::with_capacity(n_snr * ctx.slots.len());
    let (mut failures, mut attempts) = (0, 0);
    for (s, &snr_db) in cfg.snr_db_grid.iter().enumerate() {
        let chunk = &outcomes[s * cfg.trials..(s + 1) * cfg.trials];
        for o in chunk {
            failures += o.failures;
            attempts += o.attempts;
        }
        for (k, slot) in ctx.slots.iter().enumerate() {
            let vals: Vec<f64> = chunk.iter().filter_map(|o| o.values[k]).collect();
            if vals.is_empty() {
                // every trial failed for this slot; the failure count already reports it
                continue;
            }
            let value = vals.iter().sum::<f64>() / vals.len() as f64;
            records.push(MetricRecord {
                scenario: cfg.scenario.to_string(),
                method: slot.method.to_string(),
                snr_db,
                metric_name: slot.metric,
                value,
                trials: vals.len(),
                seed: cfg.seed,
            });
        }
    }
    Ok(Report { config: cfg.clone(), records, failures, attempts, wall_time: start.elapsed() })
}
