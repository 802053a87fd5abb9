//! Detector latency profiles and the backend comparison harness.
//!
//! Builtin profiles are the published forward-direction execution times for
//! SSD, SSD on a neural compute stick, and SSD Lite. The raw numbers are
//! stored unchanged and interpreted as seconds per inference.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::io;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, LogNormal};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::detection::Backend;

const SSD_FORWARD: &str = include_str!("../data/latency_ssd_forward.txt");
const SSD_NCS_FORWARD: &str = include_str!("../data/latency_ssd_ncs_forward.txt");
const SSD_LITE_FORWARD: &str = include_str!("../data/latency_ssd_lite_forward.txt");

#[derive(Debug, Error)]
pub enum BenchError {
    #[error("empirical profile needs at least one sample")]
    NoSamples,
    #[error("latency samples must be finite and non-negative, got {0}")]
    BadSample(f64),
    #[error("lognormal sigma must be non-negative and finite, got {0}")]
    BadSigma(f64),
    #[error("line {line}: cannot parse `{text}` as a latency sample")]
    Parse { line: usize, text: String },
    #[error("need at least two profiles to compare, got {0}")]
    TooFewProfiles(usize),
    #[error("no builtin profile for backend {0}")]
    NoBuiltin(Backend),
    #[error("exact-sample mode needs an empirical profile ({0} is not)")]
    NotEmpirical(Backend),
    #[error("need at least one draw per backend")]
    ZeroDraws,
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Io(#[from] io::Error),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ProfileKind {
    Empirical { samples: Vec<f64> },
    Lognormal { mu: f64, sigma: f64 },
    Constant { value: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LatencyProfile {
    pub backend: Backend,
    #[serde(flatten)]
    pub kind: ProfileKind,
}

/// Parses `#`-commented text with one sample per line.
pub fn parse_samples(text: &str) -> Result<Vec<f64>, BenchError> {
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let v: f64 = line.parse().map_err(|_| BenchError::Parse {
            line: i + 1,
            text: line.to_owned(),
        })?;
        out.push(v);
    }
    Ok(out)
}

impl LatencyProfile {
    pub fn empirical(backend: Backend, samples: Vec<f64>) -> Result<Self, BenchError> {
        let p = Self {
            backend,
            kind: ProfileKind::Empirical { samples },
        };
        p.validate()?;
        Ok(p)
    }

    pub fn constant(backend: Backend, value: f64) -> Self {
        Self {
            backend,
            kind: ProfileKind::Constant { value },
        }
    }

    pub fn lognormal(backend: Backend, mu: f64, sigma: f64) -> Self {
        Self {
            backend,
            kind: ProfileKind::Lognormal { mu, sigma },
        }
    }

    /// Method-of-moments fit on the log-samples.
    pub fn fit_lognormal(backend: Backend, samples: &[f64]) -> Result<Self, BenchError> {
        if samples.is_empty() {
            return Err(BenchError::NoSamples);
        }
        if let Some(&bad) = samples.iter().find(|s| !(**s > 0.0 && s.is_finite())) {
            return Err(BenchError::BadSample(bad));
        }
        let logs: Vec<f64> = samples.iter().map(|s| s.ln()).collect();
        let n = logs.len() as f64;
        let mu = logs.iter().sum::<f64>() / n;
        let var = if logs.len() > 1 {
            logs.iter().map(|l| (l - mu).powi(2)).sum::<f64>() / (n - 1.0)
        } else {
            0.0
        };
        Ok(Self::lognormal(backend, mu, var.sqrt()))
    }

    pub fn builtin(backend: Backend) -> Result<Self, BenchError> {
        let text = match backend {
            Backend::Ssd => SSD_FORWARD,
            Backend::SsdNcs => SSD_NCS_FORWARD,
            Backend::SsdLite => SSD_LITE_FORWARD,
            Backend::Perfect => return Err(BenchError::NoBuiltin(backend)),
        };
        Self::empirical(backend, parse_samples(text)?)
    }

    pub fn validate(&self) -> Result<(), BenchError> {
        let sample_ok = |s: f64| s >= 0.0 && s.is_finite();
        match &self.kind {
            ProfileKind::Empirical { samples } => {
                if samples.is_empty() {
                    return Err(BenchError::NoSamples);
                }
                if let Some(&bad) = samples.iter().find(|s| !sample_ok(**s)) {
                    return Err(BenchError::BadSample(bad));
                }
            }
            ProfileKind::Lognormal { mu, sigma } => {
                if !(*sigma >= 0.0 && sigma.is_finite()) {
                    return Err(BenchError::BadSigma(*sigma));
                }
                if !mu.is_finite() {
                    return Err(BenchError::BadSample(*mu));
                }
            }
            ProfileKind::Constant { value } => {
                if !sample_ok(*value) {
                    return Err(BenchError::BadSample(*value));
                }
            }
        }
        Ok(())
    }

    pub fn is_zero(&self) -> bool {
        matches!(self.kind, ProfileKind::Constant { value } if value == 0.0)
    }

    pub fn samples(&self) -> Option<&[f64]> {
        match &self.kind {
            ProfileKind::Empirical { samples } => Some(samples),
            _ => None,
        }
    }

    /// One inference time in seconds.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match &self.kind {
            ProfileKind::Empirical { samples } => {
                if samples.len() == 1 {
                    samples[0]
                } else {
                    samples[rng.random_range(0..samples.len())]
                }
            }
            ProfileKind::Lognormal { mu, sigma } => {
                if *sigma == 0.0 {
                    mu.exp()
                } else {
                    LogNormal::new(*mu, *sigma)
                        .expect("validated sigma")
                        .sample(rng)
                }
            }
            ProfileKind::Constant { value } => *value,
        }
    }
}

/// The three SSD-family forward profiles keyed by backend.
pub fn builtin_profiles() -> BTreeMap<Backend, LatencyProfile> {
    Backend::SSD_FAMILY
        .iter()
        .map(|b| (*b, LatencyProfile::builtin(*b).expect("bundled data parses")))
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LatencyStats {
    pub count: usize,
    pub mean: f64,
    /// Sample standard deviation (n - 1); zero for a single sample.
    pub sd: f64,
    pub median: f64,
    pub p95: f64,
    pub min: f64,
    pub max: f64,
}

/// Linear interpolation between order statistics at rank `q * (n - 1)`.
fn quantile(sorted: &[f64], q: f64) -> f64 {
    let rank = q * (sorted.len() - 1) as f64;
    let lo = rank.floor() as usize;
    let hi = rank.ceil() as usize;
    let frac = rank - lo as f64;
    sorted[lo] + frac * (sorted[hi] - sorted[lo])
}

pub fn summarize(samples: &[f64]) -> Result<LatencyStats, BenchError> {
    if samples.is_empty() {
        return Err(BenchError::NoSamples);
    }
    let mut sorted = samples.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len() as f64;
    // summing in sorted order keeps the result permutation-invariant
    let mean = sorted.iter().sum::<f64>() / n;
    let sd = if sorted.len() > 1 {
        (sorted.iter().map(|s| (s - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
    } else {
        0.0
    };
    Ok(LatencyStats {
        count: sorted.len(),
        mean,
        sd,
        median: quantile(&sorted, 0.5),
        p95: quantile(&sorted, 0.95),
        min: sorted[0],
        max: sorted[sorted.len() - 1],
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Draws {
    /// Use each empirical profile's sample list as-is.
    Exact,
    Resample(usize),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BackendRow {
    pub backend: Backend,
    pub stats: LatencyStats,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpeedupRatio {
    pub numerator: Backend,
    pub denominator: Backend,
    /// mean(numerator) / mean(denominator)
    pub ratio: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchReport {
    pub draws: Draws,
    pub rows: Vec<BackendRow>,
    pub ratios: Vec<SpeedupRatio>,
}

fn stream_id(backend: Backend) -> u64 {
    match backend {
        Backend::Ssd => 1,
        Backend::SsdNcs => 2,
        Backend::SsdLite => 3,
        Backend::Perfect => 4,
    }
}

/// Independent per-backend random stream; results do not depend on the order
/// in which backends are drawn.
pub fn backend_rng(seed: u64, backend: Backend) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream_id(backend));
    rng
}

pub fn compare_backends(
    profiles: &[LatencyProfile],
    draws: Draws,
    seed: u64,
) -> Result<BenchReport, BenchError> {
    if profiles.len() < 2 {
        return Err(BenchError::TooFewProfiles(profiles.len()));
    }
    let mut rows = Vec::with_capacity(profiles.len());
    for p in profiles {
        p.validate()?;
        let samples = match draws {
            Draws::Exact => p
                .samples()
                .ok_or(BenchError::NotEmpirical(p.backend))?
                .to_vec(),
            Draws::Resample(0) => return Err(BenchError::ZeroDraws),
            Draws::Resample(n) => {
                let mut rng = backend_rng(seed, p.backend);
                (0..n).map(|_| p.sample(&mut rng)).collect()
            }
        };
        rows.push(BackendRow {
            backend: p.backend,
            stats: summarize(&samples)?,
        });
    }
    let mut ratios = Vec::new();
    for a in &rows {
        for b in &rows {
            if std::ptr::eq(a, b) {
                continue;
            }
            ratios.push(SpeedupRatio {
                numerator: a.backend,
                denominator: b.backend,
                ratio: a.stats.mean / b.stats.mean,
            });
        }
    }
    Ok(BenchReport {
        draws,
        rows,
        ratios,
    })
}

impl BenchReport {
    pub fn stats(&self, backend: Backend) -> Option<&LatencyStats> {
        self.rows.iter().find(|r| r.backend == backend).map(|r| &r.stats)
    }

    pub fn ratio(&self, numerator: Backend, denominator: Backend) -> Option<f64> {
        self.ratios
            .iter()
            .find(|r| r.numerator == numerator && r.denominator == denominator)
            .map(|r| r.ratio)
    }

    /// Per-backend rows (`backend,count,mean,sd,median,p95,min,max`), a blank
    /// line, then the pairwise ratio table.
    pub fn write_csv<W: io::Write>(&self, out: W) -> Result<(), BenchError> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["backend", "count", "mean", "sd", "median", "p95", "min", "max"])?;
        for r in &self.rows {
            let s = &r.stats;
            w.write_record([
                r.backend.to_string(),
                s.count.to_string(),
                s.mean.to_string(),
                s.sd.to_string(),
                s.median.to_string(),
                s.p95.to_string(),
                s.min.to_string(),
                s.max.to_string(),
            ])?;
        }
        let mut out = w.into_inner().map_err(|e| BenchError::Io(e.into_error()))?;
        io::Write::write_all(&mut out, b"\n")?;
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["numerator", "denominator", "speedup_ratio"])?;
        for r in &self.ratios {
            w.write_record([
                r.numerator.to_string(),
                r.denominator.to_string(),
                r.ratio.to_string(),
            ])?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn render_table(&self) -> String {
        let mut s = String::new();
        let mode = match self.draws {
            Draws::Exact => "exact samples".to_owned(),
            Draws::Resample(n) => format!("{n} resampled draws per backend"),
        };
        let _ = writeln!(s, "latency per inference (seconds), {mode}");
        let _ = writeln!(
            s,
            "{:<10} {:>7} {:>9} {:>9} {:>9} {:>9} {:>9} {:>9}",
            "backend", "count", "mean", "sd", "median", "p95", "min", "max"
        );
        for r in &self.rows {
            let t = &r.stats;
            let _ = writeln!(
                s,
                "{:<10} {:>7} {:>9.5} {:>9.5} {:>9.5} {:>9.5} {:>9.5} {:>9.5}",
                r.backend.as_str(),
                t.count,
                t.mean,
                t.sd,
                t.median,
                t.p95,
                t.min,
                t.max
            );
        }
        let _ = writeln!(s, "\nspeedup (mean A / mean B)");
        for r in &self.ratios {
            let _ = writeln!(
                s,
                "{:<10} / {:<10} {:>7.3}",
                r.numerator.as_str(),
                r.denominator.as_str(),
                r.ratio
            );
        }
        s
    }
}
