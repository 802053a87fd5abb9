//! Command implementations behind the `follow` binary.
//!
//! Exit codes: 0 success, 2 usage or configuration error, 3 I/O error,
//! 1 any other runtime failure.

pub mod calibrate;
pub mod config;

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use thiserror::Error;

use crate::bench::{compare_backends, BenchError, BenchReport, Draws, LatencyProfile};
use crate::detection::{ssd_prediction_count, Backend, DetectionError, SSD300_LAYERS};
use crate::simworld::{run_episode, EpisodeError, Metrics, Mode};
pub use calibrate::{calibrate, Calibration, CalibrationError, GridSpec};
pub use config::{ConfigError, ScenarioConfig};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Calibration(#[from] CalibrationError),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: io::Error },
    #[error(transparent)]
    Episode(#[from] EpisodeError),
    #[error(transparent)]
    Bench(BenchError),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(ConfigError::Read { .. }) | CliError::Io { .. } | CliError::Bench(BenchError::Io(_)) => 3,
            CliError::Usage(_) | CliError::Config(_) | CliError::Calibration(_) => 2,
            CliError::Bench(_) | CliError::Episode(_) => 1,
        }
    }
}

fn io_err(path: &Path) -> impl FnOnce(io::Error) -> CliError + '_ {
    move |source| CliError::Io {
        path: path.to_owned(),
        source,
    }
}

fn create(path: &Path) -> Result<BufWriter<File>, CliError> {
    File::create(path).map(BufWriter::new).map_err(io_err(path))
}

/// Runs one episode, writes the JSONL trace to `trace_out` and prints the
/// metrics as JSON.
pub fn cmd_run(
    configs: &[PathBuf],
    trace_out: &Path,
    seed: Option<u64>,
    mode: Mode,
    stdout: &mut dyn Write,
) -> Result<Metrics, CliError> {
    let cfg = ScenarioConfig::load(configs)?;
    let scenario = cfg.scenario()?;
    let seed = seed.unwrap_or(cfg.sim.seed);
    let episode = run_episode(&scenario, seed, mode)?;

    let mut out = create(trace_out)?;
    for record in &episode.trace {
        serde_json::to_writer(&mut out, record).map_err(|e| CliError::Io {
            path: trace_out.to_owned(),
            source: e.into(),
        })?;
        out.write_all(b"\n").map_err(io_err(trace_out))?;
    }
    out.flush().map_err(io_err(trace_out))?;

    let json = serde_json::to_string_pretty(&episode.metrics).expect("metrics serialize");
    writeln!(stdout, "{json}").map_err(io_err(Path::new("<stdout>")))?;
    Ok(episode.metrics)
}

/// Compares latency profiles, writes the CSV report and prints a table.
/// An empty `backends` list compares the three SSD variants.
pub fn cmd_bench(
    backends: &[String],
    draws: Draws,
    seed: u64,
    csv_out: &Path,
    stdout: &mut dyn Write,
) -> Result<BenchReport, CliError> {
    let chosen: Vec<Backend> = if backends.is_empty() {
        Backend::SSD_FAMILY.to_vec()
    } else {
        backends
            .iter()
            .map(|b| b.parse().map_err(|e: DetectionError| CliError::Usage(e.to_string())))
            .collect::<Result<_, _>>()?
    };
    let profiles: Vec<LatencyProfile> = chosen
        .iter()
        .map(|b| LatencyProfile::builtin(*b).map_err(|e| CliError::Usage(e.to_string())))
        .collect::<Result<_, _>>()?;
    let report = compare_backends(&profiles, draws, seed).map_err(|e| match e {
        BenchError::TooFewProfiles(_) | BenchError::ZeroDraws | BenchError::NotEmpirical(_) => {
            CliError::Usage(e.to_string())
        }
        other => CliError::Bench(other),
    })?;
    let mut out = create(csv_out)?;
    report.write_csv(&mut out).map_err(|e| match e {
        BenchError::Io(source) => CliError::Io {
            path: csv_out.to_owned(),
            source,
        },
        other => CliError::Bench(other),
    })?;
    out.flush().map_err(io_err(csv_out))?;
    write!(stdout, "{}", report.render_table()).map_err(io_err(Path::new("<stdout>")))?;
    Ok(report)
}

/// Calibrates bracket thresholds for the configured camera and writes a
/// TOML fragment to `out`.
pub fn cmd_calibrate(
    configs: &[PathBuf],
    grid: Option<&str>,
    out: &Path,
    stdout: &mut dyn Write,
) -> Result<Calibration, CliError> {
    let cfg = ScenarioConfig::load(configs)?;
    let standoff = cfg.target.standoff_m;
    let grid = match grid {
        Some(text) => GridSpec::parse(text, standoff)?,
        None => GridSpec::around(standoff),
    };
    let cal = calibrate(
        &grid,
        &cfg.follower(),
        &cfg.shape()?,
        &cfg.camera()?,
        cfg.target.point_cx,
        standoff,
    )?;
    let skipped = cal.grid.iter().filter(|o| o.delta.is_none()).count();
    let fragment = cal.to_toml_fragment();
    std::fs::write(out, &fragment).map_err(io_err(out))?;
    let t = &cal.thresholds;
    writeln!(
        stdout,
        "point_cy = {:.4}\nx_thr = {:.4}\ny_fwd_thr = {:.4}\ny_rev_thr = {:.4}\n{} of {} grid cells out of view",
        t.point_cy,
        t.x_thr,
        t.y_fwd_thr,
        t.y_rev_thr,
        skipped,
        cal.grid.len()
    )
    .map_err(io_err(Path::new("<stdout>")))?;
    Ok(cal)
}

/// Parses `"38x4,19x6"` into `(feature-map side, boxes per location)` pairs.
pub fn parse_layers(text: &str) -> Result<Vec<(u64, u64)>, CliError> {
    text.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| {
            let bad = || CliError::Usage(format!("layer `{s}` is not SIDExBOXES with positive integers"));
            let (side, boxes) = s.split_once(['x', 'X']).ok_or_else(bad)?;
            let side: u64 = side.trim().parse().map_err(|_| bad())?;
            let boxes: u64 = boxes.trim().parse().map_err(|_| bad())?;
            if side == 0 || boxes == 0 {
                return Err(bad());
            }
            Ok((side, boxes))
        })
        .collect()
}

/// Prints the per-layer and total default-box counts.
pub fn cmd_priors(layers: Option<&str>, stdout: &mut dyn Write) -> Result<u64, CliError> {
    let layers = match layers {
        Some(text) => parse_layers(text)?,
        None => SSD300_LAYERS.to_vec(),
    };
    let mut w = || -> io::Result<u64> {
        for (i, (side, boxes)) in layers.iter().enumerate() {
            writeln!(
                stdout,
                "layer {}: {side}x{side} x {boxes} = {}",
                i + 1,
                ssd_prediction_count(&[(*side, *boxes)])
            )?;
        }
        let total = ssd_prediction_count(&layers);
        writeln!(stdout, "total: {total}")?;
        Ok(total)
    };
    w().map_err(io_err(Path::new("<stdout>")))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn layer_parsing() {
        assert_eq!(parse_layers("38x4, 19x6").unwrap(), vec![(38, 4), (19, 6)]);
        assert_eq!(parse_layers("").unwrap(), vec![]);
        assert!(parse_layers("38x").is_err());
        assert!(parse_layers("0x4").is_err());
        assert!(parse_layers("38*4").is_err());
    }

    #[test]
    fn priors_default_total() {
        let mut out = Vec::new();
        assert_eq!(cmd_priors(None, &mut out).unwrap(), 8732);
        let text = String::from_utf8(out).unwrap();
        assert!(text.ends_with("total: 8732\n"));
        assert_eq!(text.lines().count(), 7);
    }

    #[test]
    fn exit_codes() {
        assert_eq!(CliError::Usage("x".into()).exit_code(), 2);
        let io = CliError::Io {
            path: "a".into(),
            source: io::Error::other("x"),
        };
        assert_eq!(io.exit_code(), 3);
        let read = CliError::Config(ConfigError::Read {
            path: "a".into(),
            source: io::Error::other("x"),
        });
        assert_eq!(read.exit_code(), 3);
    }
}
