use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use crate::anm::{AnmConfig, MuRule};
use crate::error::{Error, Result};
use crate::geometry::{FrequencyInterval, Position2D};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Scenario {
    Fig3,
    Fig4,
    Fig5,
    Fig6,
    Custom,
}

impl FromStr for Scenario {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "fig3" => Ok(Self::Fig3),
            "fig4" => Ok(Self::Fig4),
            "fig5" => Ok(Self::Fig5),
            "fig6" => Ok(Self::Fig6),
            "custom" => Ok(Self::Custom),
            other => Err(Error::Config(format!("unknown scenario '{other}'"))),
        }
    }
}

impl fmt::Display for Scenario {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Fig3 => "fig3",
            Self::Fig4 => "fig4",
            Self::Fig5 => "fig5",
            Self::Fig6 => "fig6",
            Self::Custom => "custom",
        })
    }
}

/// Gain variance of one RIS-MS path and the frequency interval known to contain
/// both its AoA at the MS and its AoD at the RIS.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PathPrior {
    pub gain_variance: f64,
    pub prior: FrequencyInterval,
}

/// Positions for scenarios whose LoS prior comes from geometry instead of a fixed interval.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CustomGeometry {
    pub bs: Position2D,
    pub ris: Position2D,
    pub ms_reported: Position2D,
    pub epsilon: f64,
    /// MS array rotation, subtracted from MS-side angles before any interval is built.
    pub ms_orientation: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Reports {
    pub mse: bool,
    pub se: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub scenario: Scenario,
    pub snr_db_grid: Vec<f64>,
    pub trials: usize,
    pub seed: u64,
    /// (N_B, N_R, N_M)
    pub dims: (usize, usize, usize),
    /// (P, T)
    pub beams: (usize, usize),
    pub paths: Vec<PathPrior>,
    pub coherence_length: usize,
    pub training_length: usize,
    /// sin φ_BR when no geometry is given
    pub sin_phi_br: f64,
    pub geometry: Option<CustomGeometry>,
    pub anm: AnmConfig,
    pub reports: Reports,
    pub output_path: Option<PathBuf>,
}

const SNR_GRID: [f64; 5] = [-20.0, -15.0, -10.0, -5.0, 0.0];

fn iv(a: f64, b: f64) -> FrequencyInterval {
    FrequencyInterval { a, b }
}

pub fn preset(scenario: Scenario) -> ExperimentConfig {
    let single = vec![PathPrior { gain_variance: 1.0, prior: iv(0.2, 0.6) }];
    let double = vec![
        PathPrior { gain_variance: 1.0, prior: iv(0.2, 0.6) },
        PathPrior { gain_variance: 0.1, prior: iv(0.7, 0.9) },
    ];
    let (beams, paths, reports) = match scenario {
        Scenario::Fig3 => ((4, 16), single, Reports { mse: true, se: false }),
        Scenario::Fig4 => ((4, 16), single, Reports { mse: false, se: true }),
        Scenario::Fig5 => ((6, 24), double, Reports { mse: true, se: false }),
        Scenario::Fig6 => ((6, 24), double, Reports { mse: false, se: true }),
        Scenario::Custom => ((4, 16), single, Reports { mse: true, se: true }),
    };
    ExperimentConfig {
        scenario,
        snr_db_grid: SNR_GRID.to_vec(),
        trials: 500,
        seed: 1,
        dims: (16, 64, 16),
        beams,
        paths,
        coherence_length: 500,
        // one symbol per (combiner, RIS profile) pair with a single RF chain
        training_length: beams.0 * beams.1,
        sin_phi_br: 0.0,
        geometry: None,
        anm: AnmConfig::default(),
        reports,
        output_path: None,
    }
}

impl ExperimentConfig {
    pub fn num_paths(&self) -> usize {
        self.paths.len()
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Config(m));
        if self.trials == 0 {
            return bad("trials must be at least 1".into());
        }
        if self.snr_db_grid.is_empty() || self.snr_db_grid.iter().any(|s| !s.is_finite()) {
            return bad("SNR grid must be non-empty and finite".into());
        }
        let (nb, nr, nm) = self.dims;
        if nb == 0 || nr < 2 || nm < 2 {
            return bad(format!("invalid array sizes {:?}", self.dims));
        }
        if self.beams.0 == 0 || self.beams.1 == 0 {
            return bad("need at least one MS combiner and one RIS profile".into());
        }
        if self.paths.is_empty() || self.paths.len() > 6 {
            return bad("between 1 and 6 paths are supported".into());
        }
        if self.paths.len() > self.beams.0 || self.paths.len() > self.beams.1 {
            return bad("each path needs at least one MS and one RIS training beam".into());
        }
        for p in &self.paths {
            FrequencyInterval::new(p.prior.a, p.prior.b)?;
            if !(p.gain_variance > 0.0) {
                return bad("gain variances must be positive".into());
            }
        }
        if self.training_length > self.coherence_length || self.coherence_length == 0 {
            return bad("need 0 <= T_t <= T_c and T_c > 0".into());
        }
        if !(-1.0..=1.0).contains(&self.sin_phi_br) {
            return bad("sin_phi_br must lie in [-1, 1]".into());
        }
        if let Some(g) = &self.geometry {
            if !(g.epsilon >= 0.0) {
                return bad("epsilon must be non-negative".into());
            }
        }
        if !(self.anm.solver_tolerance > 0.0) || self.anm.max_iterations == 0 || !(self.anm.admm_penalty > 0.0) {
            return bad("solver tolerance, iteration cap and penalty must be positive".into());
        }
        match self.anm.mu {
            MuRule::Fixed(m) | MuRule::Auto { scale: m } if !(m > 0.0 && m.is_finite()) => {
                return bad("mu and its scale must be positive".into());
            }
            _ => {}
        }
        if !self.reports.mse && !self.reports.se {
            return bad("nothing to report".into());
        }
        Ok(())
    }

    /// Flat `key = value` form; parsing it back yields the same config.
    pub fn to_key_values(&self) -> Vec<(String, String)> {
        let mut kv = vec![
            ("scenario".to_string(), self.scenario.to_string()),
            ("snr_db_grid".into(), join(&self.snr_db_grid)),
            ("trials".into(), self.trials.to_string()),
            ("seed".into(), self.seed.to_string()),
            ("n_b".into(), self.dims.0.to_string()),
            ("n_r".into(), self.dims.1.to_string()),
            ("n_m".into(), self.dims.2.to_string()),
            ("p".into(), self.beams.0.to_string()),
            ("t".into(), self.beams.1.to_string()),
            (
                "paths".into(),
                self.paths
                    .iter()
                    .map(|p| format!("{:?}:{:?}:{:?}", p.gain_variance, p.prior.a, p.prior.b))
                    .collect::<Vec<_>>()
                    .join(";"),
            ),
            ("coherence_length".into(), self.coherence_length.to_string()),
            ("training_length".into(), self.training_length.to_string()),
            ("sin_phi_br".into(), format!("{:?}", self.sin_phi_br)),
            ("mu".into(), format_mu(self.anm.mu)),
            ("solver_tolerance".into(), format!("{:?}", self.anm.solver_tolerance)),
            ("max_iterations".into(), self.anm.max_iterations.to_string()),
            ("admm_penalty".into(), format!("{:?}", self.anm.admm_penalty)),
            ("report_mse".into(), self.reports.mse.to_string()),
            ("report_se".into(), self.reports.se.to_string()),
        ];
        if let Some(g) = &self.geometry {
            for (k, v) in [
                ("bs_x", g.bs.x),
                ("bs_y", g.bs.y),
                ("ris_x", g.ris.x),
                ("ris_y", g.ris.y),
                ("ms_x", g.ms_reported.x),
                ("ms_y", g.ms_reported.y),
                ("epsilon", g.epsilon),
                ("ms_orientation", g.ms_orientation),
            ] {
                kv.push((k.into(), format!("{v:?}")));
            }
        }
        if let Some(p) = &self.output_path {
            kv.push(("output_path".into(), p.display().to_string()));
        }
        kv
    }

    /// Parse a flat config file. A `scenario` key selects the preset that the other keys override.
    pub fn from_key_values(text: &str) -> Result<Self> {
        let mut pairs = Vec::new();
        for (no, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("line {}: expected key = value", no + 1)))?;
            pairs.push((k.trim().to_string(), v.trim().to_string()));
        }
        let scenario = match pairs.iter().find(|(k, _)| k == "scenario") {
            Some((_, v)) => v.parse()?,
            None => Scenario::Custom,
        };
        let mut cfg = preset(scenario);
        let mut geo = GeometryBuilder::default();
        for (k, v) in &pairs {
            cfg.set(k, v, &mut geo)?;
        }
        cfg.geometry = geo.finish()?;
        Ok(cfg)
    }

    fn set(&mut self, key: &str, v: &str, geo: &mut GeometryBuilder) -> Result<()> {
        match key {
            "scenario" => {}
            "snr_db_grid" => self.snr_db_grid = parse_list(v)?,
            "trials" => self.trials = num(key, v)?,
            "seed" => self.seed = num(key, v)?,
            "n_b" => self.dims.0 = num(key, v)?,
            "n_r" => self.dims.1 = num(key, v)?,
            "n_m" => self.dims.2 = num(key, v)?,
            "p" => self.beams.0 = num(key, v)?,
            "t" => self.beams.1 = num(key, v)?,
            "paths" => self.paths = parse_paths(v)?,
            "coherence_length" => self.coherence_length = num(key, v)?,
            "training_length" => self.training_length = num(key, v)?,
            "sin_phi_br" => self.sin_phi_br = num(key, v)?,
            "mu" => self.anm.mu = parse_mu(v)?,
            "solver_tolerance" => self.anm.solver_tolerance = num(key, v)?,
            "max_iterations" => self.anm.max_iterations = num(key, v)?,
            "admm_penalty" => self.anm.admm_penalty = num(key, v)?,
            "report_mse" => self.reports.mse = num(key, v)?,
            "report_se" => self.reports.se = num(key, v)?,
            "output_path" => self.output_path = Some(PathBuf::from(v)),
            "bs_x" => geo.bs.0 = Some(num(key, v)?),
            "bs_y" => geo.bs.1 = Some(num(key, v)?),
            "ris_x" => geo.ris.0 = Some(num(key, v)?),
            "ris_y" => geo.ris.1 = Some(num(key, v)?),
            "ms_x" => geo.ms.0 = Some(num(key, v)?),
            "ms_y" => geo.ms.1 = Some(num(key, v)?),
            "epsilon" => geo.epsilon = Some(num(key, v)?),
            "ms_orientation" => geo.orientation = Some(num(key, v)?),
            other => return Err(Error::Config(format!("unknown key '{other}'"))),
        }
        Ok(())
    }
}

#[derive(Default)]
struct GeometryBuilder {
    bs: (Option<f64>, Option<f64>),
    ris: (Option<f64>, Option<f64>),
    ms: (Option<f64>, Option<f64>),
    epsilon: Option<f64>,
    orientation: Option<f64>,
}

impl GeometryBuilder {
    fn finish(self) -> Result<Option<CustomGeometry>> {
        let coords = [self.bs.0, self.bs.1, self.ris.0, self.ris.1, self.ms.0, self.ms.1];
        let given = coords.iter().filter(|c| c.is_some()).count();
        if given == 0 && self.epsilon.is_none() && self.orientation.is_none() {
            return Ok(None);
        }
        if given != 6 || self.epsilon.is_none() {
            return Err(Error::Config(
                "geometry needs bs_x, bs_y, ris_x, ris_y, ms_x, ms_y and epsilon".into(),
            ));
        }
        let c: Vec<f64> = coords.iter().map(|c| c.unwrap()).collect();
        Ok(Some(CustomGeometry {
            bs: Position2D::new(c[0], c[1]),
            ris: Position2D::new(c[2], c[3]),
            ms_reported: Position2D::new(c[4], c[5]),
            epsilon: self.epsilon.unwrap(),
            ms_orientation: self.orientation.unwrap_or(0.0),
        }))
    }
}

fn num<T: FromStr>(key: &str, v: &str) -> Result<T> {
    v.trim()
        .parse()
        .map_err(|_| Error::Config(format!("bad value '{v}' for {key}")))
}

fn join(v: &[f64]) -> String {
    v.iter().map(|x| format!("{x:?}")).collect::<Vec<_>>().join(",")
}

pub fn parse_list(v: &str) -> Result<Vec<f64>> {
    v.split(',')
        .filter(|s| !s.trim().is_empty())
        .map(|s| num("list", s))
        .collect()
}

/// `var:a:b;var:a:b;...`, LoS path first.
fn parse_paths(v: &str) -> Result<Vec<PathPrior>> {
    v.split(';')
        .filter(|s| !s.trim().is_empty())
        .map(|s| {
            let f: Vec<f64> = s.split(':').map(|x| num("paths", x)).collect::<Result<_>>()?;
            if f.len() != 3 {
                return Err(Error::Config(format!("path '{s}' must be variance:a:b")));
            }
            Ok(PathPrior { gain_variance: f[0], prior: FrequencyInterval::new(f[1], f[2])? })
        })
        .collect()
}

/// `auto`, `auto:<scale>` or a positive number.
pub fn parse_mu(v: &str) -> Result<MuRule> {
    let v = v.trim();
    if v == "auto" {
        return Ok(MuRule::Auto { scale: 1.0 });
    }
    if let Some(s) = v.strip_prefix("auto:") {
        return Ok(MuRule::Auto { scale: num("mu", s)? });
    }
    Ok(MuRule::Fixed(num("mu", v)?))
}

fn format_mu(m: MuRule) -> String {
    match m {
        MuRule::Auto { scale: 1.0 } => "auto".into(),
        MuRule::Auto { scale } => format!("auto:{scale:?}"),
        MuRule::Fixed(x) => format!("{x:?}"),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn preset_values() {
        let f3 = preset(Scenario::Fig3);
        assert_eq!(f3.beams, (4, 16));
        assert_eq!(f3.dims, (16, 64, 16));
        assert_eq!(f3.snr_db_grid, vec![-20.0, -15.0, -10.0, -5.0, 0.0]);
        assert_eq!(preset(Scenario::Fig4).training_length, 64);
        assert_eq!(preset(Scenario::Fig4).coherence_length, 500);
        let f6 = preset(Scenario::Fig6);
        assert_eq!(f6.training_length, 144);
        assert_eq!(f6.beams, (6, 24));
        assert_eq!(f6.paths[1].gain_variance, 0.1);
        assert_eq!(f6.paths[1].prior, FrequencyInterval { a: 0.7, b: 0.9 });
        for s in [Scenario::Fig3, Scenario::Fig4, Scenario::Fig5, Scenario::Fig6, Scenario::Custom] {
            preset(s).validate().unwrap();
        }
        assert!("fig7".parse::<Scenario>().is_err());
    }

    #[test]
    fn key_value_round_trip() {
        let mut cfg = preset(Scenario::Fig5);
        cfg.anm.mu = MuRule::Auto { scale: 0.5 };
        cfg.snr_db_grid = vec![-7.5, 3.0];
        cfg.geometry = Some(CustomGeometry {
            bs: Position2D::new(0.0, 0.0),
            ris: Position2D::new(10.0, 5.0),
            ms_reported: Position2D::new(20.0, 1.0),
            epsilon: 0.5,
            ms_orientation: 0.1,
        });
        cfg.output_path = Some("out.csv".into());
        let text: String = cfg.to_key_values().iter().map(|(k, v)| format!("{k} = {v}\n")).collect();
        assert_eq!(ExperimentConfig::from_key_values(&text).unwrap(), cfg);
    }

    #[test]
    fn config_errors() {
        assert!(ExperimentConfig::from_key_values("trials = x").is_err());
        assert!(ExperimentConfig::from_key_values("colour = red").is_err());
        assert!(ExperimentConfig::from_key_values("bs_x = 1").is_err());
        assert!(ExperimentConfig::from_key_values("no equals sign").is_err());
        let cfg = ExperimentConfig::from_key_values("# comment\nscenario = fig3\ntrials = 0\n").unwrap();
        assert!(cfg.validate().is_err());
        assert_eq!(parse_mu("auto:2").unwrap(), MuRule::Auto { scale: 2.0 });
        assert_eq!(parse_mu("0.5").unwrap(), MuRule::Fixed(0.5));
        assert!(parse_mu("often").is_err());
    }
}
