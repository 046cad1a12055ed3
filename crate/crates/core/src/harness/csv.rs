use std::fmt;
use std::fs;
use std::io::Write;
use std::path::Path;

use super::run::Report;
use crate::error::Result;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum MetricName {
    MseAoa,
    MseDiff,
    CrlbAoa,
    CrlbDiff,
    EffectiveSe,
}

impl fmt::Display for MetricName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::MseAoa => "mse_aoa",
            Self::MseDiff => "mse_diff",
            Self::CrlbAoa => "crlb_aoa",
            Self::CrlbDiff => "crlb_diff",
            Self::EffectiveSe => "effective_se",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MetricRecord {
    pub scenario: String,
    pub method: String,
    pub snr_db: f64,
    pub metric_name: MetricName,
    pub value: f64,
    pub trials: usize,
    pub seed: u64,
}

pub const HEADER: &str = "scenario,method,snr_db,metric_name,value,trials,seed";

/// CSV text: `#` metadata lines, the header, then one row per record.
pub fn render_csv(report: &Report, include_wall_time: bool) -> String {
    let mut out = String::new();
    for (k, v) in report.config.to_key_values() {
        if k != "output_path" {
            out.push_str(&format!("# {k}={v}\n"));
        }
    }
    out.push_str(&format!(
        "# solver_failures={} attempts={}\n",
        report.failures, report.attempts
    ));
    if include_wall_time {
        out.push_str(&format!("# wall_time_s={:.3}\n", report.wall_time.as_secs_f64()));
    }
    out.push_str(HEADER);
    out.push('\n');
    for r in &report.records {
        out.push_str(&format!(
            "{},{},{:?},{},{:?},{},{}\n",
            r.scenario, r.method, r.snr_db, r.metric_name, r.value, r.trials, r.seed
        ));
    }
    out
}

/// Write through a sibling temporary file and rename it into place.
pub fn write_csv(report: &Report, path: &Path, include_wall_time: bool) -> Result<()> {
    let text = render_csv(report, include_wall_time);
    let name = path
        .file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_else(|| "results.csv".into());
    let tmp = path.with_file_name(format!(".{name}.{}.tmp", std::process::id()));
    {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(text.as_bytes())?;
        f.sync_all()?;
    }
    if let Err(e) = fs::rename(&tmp, path) {
        let _ = fs::remove_file(&tmp);
        return Err(e.into());
    }
    Ok(())
}
