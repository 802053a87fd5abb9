//! Simulated object-detection node.
//!
//! A [`DetectorModel`] turns a ground-truth box into a noisy, possibly missing
//! detection with an inference time drawn from the backend's latency profile.
//! [`compute_delta`] then measures the box center against the target point.

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::bench::LatencyProfile;
use crate::camera::{bbox_center, BoundingBox};

#[derive(Debug, Error, PartialEq)]
pub enum DetectionError {
    #[error("jitter sigmas must be non-negative and finite (center {center}, size {size})")]
    Sigma { center: f64, size: f64 },
    #[error("miss probability must lie in [0, 1], got {0}")]
    MissProbability(f64),
    #[error("PERFECT backend must have zero jitter, zero miss probability and zero latency")]
    ImperfectPerfect,
    #[error("target point ({0}, {1}) must lie in [0, 1]^2")]
    TargetPoint(f64, f64),
    #[error("unknown backend `{0}` (expected SSD, SSD_NCS, SSD_LITE or PERFECT)")]
    UnknownBackend(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Backend {
    #[serde(rename = "SSD")]
    Ssd,
    #[serde(rename = "SSD_NCS")]
    SsdNcs,
    #[serde(rename = "SSD_LITE")]
    SsdLite,
    #[serde(rename = "PERFECT")]
    Perfect,
}

impl Backend {
    pub const SSD_FAMILY: [Backend; 3] = [Backend::Ssd, Backend::SsdNcs, Backend::SsdLite];

    pub fn as_str(&self) -> &'static str {
        match self {
            Backend::Ssd => "SSD",
            Backend::SsdNcs => "SSD_NCS",
            Backend::SsdLite => "SSD_LITE",
            Backend::Perfect => "PERFECT",
        }
    }
}

impl fmt::Display for Backend {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Backend {
    type Err = DetectionError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_uppercase().replace('-', "_").as_str() {
            "SSD" => Ok(Backend::Ssd),
            "SSD_NCS" => Ok(Backend::SsdNcs),
            "SSD_LITE" => Ok(Backend::SsdLite),
            "PERFECT" => Ok(Backend::Perfect),
            _ => Err(DetectionError::UnknownBackend(s.to_owned())),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DetectorModel {
    pub backend: Backend,
    pub center_sigma: f64,
    pub size_sigma: f64,
    pub miss_prob: f64,
    pub latency: LatencyProfile,
}

impl DetectorModel {
    pub fn perfect() -> Self {
        Self {
            backend: Backend::Perfect,
            center_sigma: 0.0,
            size_sigma: 0.0,
            miss_prob: 0.0,
            latency: LatencyProfile::constant(Backend::Perfect, 0.0),
        }
    }

    /// Default noise for the SSD family with the backend's builtin latency.
    pub fn ssd_family(backend: Backend) -> Self {
        if backend == Backend::Perfect {
            return Self::perfect();
        }
        Self {
            backend,
            center_sigma: 0.01,
            size_sigma: 0.02,
            miss_prob: 0.02,
            latency: LatencyProfile::builtin(backend)
                .expect("every SSD-family backend has a builtin profile"),
        }
    }

    pub fn validate(&self) -> Result<(), DetectionError> {
        let sigma_ok = |s: f64| s >= 0.0 && s.is_finite();
        if !sigma_ok(self.center_sigma) || !sigma_ok(self.size_sigma) {
            return Err(DetectionError::Sigma {
                center: self.center_sigma,
                size: self.size_sigma,
            });
        }
        if !(0.0..=1.0).contains(&self.miss_prob) {
            return Err(DetectionError::MissProbability(self.miss_prob));
        }
        if self.backend == Backend::Perfect
            && (self.center_sigma != 0.0
                || self.size_sigma != 0.0
                || self.miss_prob != 0.0
                || !self.latency.is_zero())
        {
            return Err(DetectionError::ImperfectPerfect);
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Detection {
    #[serde(rename = "box")]
    pub bbox: BoundingBox,
    pub confidence: f64,
    /// Seconds.
    pub inference_time: f64,
    pub frame: u64,
}

/// Normalized error between the detected box center and the target point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DetectionDelta {
    pub delta_x: f64,
    pub delta_y: f64,
    pub detected: bool,
}

impl DetectionDelta {
    pub const MISSING: DetectionDelta = DetectionDelta {
        delta_x: 0.0,
        delta_y: 0.0,
        detected: false,
    };

    pub fn magnitude(&self) -> f64 {
        self.delta_x.hypot(self.delta_y)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TargetPoint {
    pub cx: f64,
    pub cy: f64,
}

impl Default for TargetPoint {
    fn default() -> Self {
        Self { cx: 0.5, cy: 0.5 }
    }
}

impl TargetPoint {
    pub fn new(cx: f64, cy: f64) -> Result<Self, DetectionError> {
        if (0.0..=1.0).contains(&cx) && (0.0..=1.0).contains(&cy) {
            Ok(Self { cx, cy })
        } else {
            Err(DetectionError::TargetPoint(cx, cy))
        }
    }
}

fn gaussian<R: Rng + ?Sized>(rng: &mut R, sigma: f64) -> f64 {
    if sigma == 0.0 {
        0.0
    } else {
        Normal::new(0.0, sigma)
            .expect("sigma validated non-negative and finite")
            .sample(rng)
    }
}

/// Runs the simulated detector on one frame's ground truth. Only the noise and
/// miss draws come from `rng`; the inference time is the caller's concern
/// (see [`Detector`]), so `inference_time` is left at zero.
pub fn detect<R: Rng + ?Sized>(
    truth: Option<&BoundingBox>,
    model: &DetectorModel,
    frame: u64,
    rng: &mut R,
) -> Option<Detection> {
    let truth = truth?;
    if model.miss_prob > 0.0 && rng.random::<f64>() < model.miss_prob {
        return None;
    }
    let bbox = if model.center_sigma == 0.0 && model.size_sigma == 0.0 {
        *truth
    } else {
        let (cx, cy) = bbox_center(truth);
        let cx = cx + gaussian(rng, model.center_sigma);
        let cy = cy + gaussian(rng, model.center_sigma);
        let w = truth.width() + gaussian(rng, model.size_sigma);
        let h = truth.height() + gaussian(rng, model.size_sigma);
        if w <= 0.0 || h <= 0.0 {
            return None;
        }
        BoundingBox::clipped(cx - w / 2.0, cy - h / 2.0, cx + w / 2.0, cy + h / 2.0)?
    };
    let confidence = (1.0 - gaussian(rng, model.center_sigma).abs()).clamp(0.0, 1.0);
    Some(Detection {
        bbox,
        confidence,
        inference_time: 0.0,
        frame,
    })
}

/// A detector backend with its own noise and latency random streams.
#[derive(Debug, Clone)]
pub struct Detector<R> {
    pub model: DetectorModel,
    noise_rng: R,
    latency_rng: R,
}

impl<R: Rng> Detector<R> {
    pub fn new(model: DetectorModel, noise_rng: R, latency_rng: R) -> Self {
        Self {
            model,
            noise_rng,
            latency_rng,
        }
    }

    /// Returns the detection (if any) and the inference time for this frame.
    /// Inference runs, and costs time, whether or not anything is found.
    pub fn infer(&mut self, truth: Option<&BoundingBox>, frame: u64) -> (Option<Detection>, f64) {
        let latency = self.model.latency.sample(&mut self.latency_rng);
        let det = detect(truth, &self.model, frame, &mut self.noise_rng).map(|mut d| {
            d.inference_time = latency;
            d
        });
        (det, latency)
    }
}

pub fn compute_delta(detection: Option<&Detection>, target: &TargetPoint) -> DetectionDelta {
    match detection {
        Some(d) => {
            let (cx, cy) = bbox_center(&d.bbox);
            DetectionDelta {
                delta_x: cx - target.cx,
                delta_y: cy - target.cy,
                detected: true,
            }
        }
        None => DetectionDelta::MISSING,
    }
}

/// Number of default boxes an SSD head predicts: sum of `side^2 * boxes`
/// over `(grid side, boxes per cell)` layers.
pub fn ssd_prediction_count(layers: &[(u64, u64)]) -> u64 {
    layers.iter().map(|&(side, boxes)| side * side * boxes).sum()
}

/// The standard SSD300 head: six feature maps from 38x38 down to 1x1.
pub const SSD300_LAYERS: [(u64, u64); 6] = [(38, 4), (19, 6), (10, 6), (5, 6), (3, 4), (1, 4)];

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn rng(seed: u64) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(seed)
    }

    fn boxed(cx: f64, cy: f64) -> Detection {
        Detection {
            bbox: BoundingBox::new(cx - 0.1, cy - 0.1, cx + 0.1, cy + 0.1).unwrap(),
            confidence: 1.0,
            inference_time: 0.0,
            frame: 0,
        }
    }

    #[test]
    fn perfect_backend_returns_truth() {
        let b = BoundingBox::new(0.3, 0.2, 0.45, 0.9).unwrap();
        let mut det = Detector::new(DetectorModel::perfect(), rng(1), rng(2));
        let (d, latency) = det.infer(Some(&b), 4);
        let d = d.unwrap();
        assert_eq!(d.bbox, b);
        assert_eq!(d.inference_time, 0.0);
        assert_eq!(latency, 0.0);
        assert_eq!(d.confidence, 1.0);
        assert_eq!(d.frame, 4);
    }

    #[test]
    fn nothing_to_detect() {
        let model = DetectorModel::ssd_family(Backend::Ssd);
        assert!(detect(None, &model, 0, &mut rng(3)).is_none());
    }

    #[test]
    fn certain_miss() {
        let b = BoundingBox::new(0.3, 0.2, 0.45, 0.9).unwrap();
        let model = DetectorModel {
            miss_prob: 1.0,
            ..DetectorModel::ssd_family(Backend::SsdLite)
        };
        let mut r = rng(4);
        assert!((0..1000).all(|i| detect(Some(&b), &model, i, &mut r).is_none()));
    }

    #[test]
    fn delta_examples() {
        let t = TargetPoint::new(0.5, 0.6).unwrap();
        let d = compute_delta(Some(&boxed(0.5, 0.6)), &t);
        assert_eq!((d.delta_x, d.delta_y, d.detected), (0.0, 0.0, true));
        let d = compute_delta(Some(&boxed(0.7, 0.4)), &t);
        assert!((d.delta_x - 0.2).abs() < 1e-12 && (d.delta_y + 0.2).abs() < 1e-12);
        assert!(d.detected);
        let d = compute_delta(None, &t);
        assert_eq!(d, DetectionDelta::MISSING);
        assert_eq!(d.delta_x.to_bits(), 0.0f64.to_bits());
        assert_eq!(d.delta_y.to_bits(), 0.0f64.to_bits());
    }

    #[test]
    fn prediction_counts() {
        assert_eq!(ssd_prediction_count(&SSD300_LAYERS), 8732);
        assert_eq!(ssd_prediction_count(&[(38, 4)]), 5776);
        assert_eq!(ssd_prediction_count(&[]), 0);
    }

    #[test]
    fn model_validation() {
        assert!(DetectorModel::perfect().validate().is_ok());
        assert!(DetectorModel::ssd_family(Backend::SsdNcs).validate().is_ok());
        let bad = DetectorModel {
            miss_prob: 1.5,
            ..DetectorModel::perfect()
        };
        assert_eq!(bad.validate(), Err(DetectionError::MissProbability(1.5)));
        let noisy_perfect = DetectorModel {
            center_sigma: 0.01,
            ..DetectorModel::perfect()
        };
        assert_eq!(noisy_perfect.validate(), Err(DetectionError::ImperfectPerfect));
        let neg = DetectorModel {
            size_sigma: -0.1,
            ..DetectorModel::ssd_family(Backend::Ssd)
        };
        assert!(neg.validate().is_err());
        assert!(TargetPoint::new(1.2, 0.5).is_err());
    }

    #[test]
    fn backend_names_round_trip() {
        for b in [Backend::Ssd, Backend::SsdNcs, Backend::SsdLite, Backend::Perfect] {
            assert_eq!(b.as_str().parse::<Backend>().unwrap(), b);
        }
        assert_eq!("ssd-lite".parse::<Backend>().unwrap(), Backend::SsdLite);
        assert!("BOGUS".parse::<Backend>().is_err());
    }

    #[test]
    fn center_jitter_statistics() {
        let s = 0.01;
        let model = DetectorModel {
            center_sigma: s,
            size_sigma: 0.0,
            miss_prob: 0.0,
            ..DetectorModel::ssd_family(Backend::Ssd)
        };
        let truth = BoundingBox::new(0.4, 0.3, 0.6, 0.7).unwrap();
        let target = TargetPoint::default();
        let exact = compute_delta(Some(&boxed(0.5, 0.5)), &target).delta_x;
        let mut r = rng(11);
        let errors: Vec<f64> = (0..100_000)
            .map(|i| {
                let d = detect(Some(&truth), &model, i, &mut r).unwrap();
                compute_delta(Some(&d), &target).delta_x - exact
            })
            .collect();
        let n = errors.len() as f64;
        let mean = errors.iter().sum::<f64>() / n;
        let sd = (errors.iter().map(|e| (e - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt();
        assert!((sd - s).abs() / s < 0.05, "sd {sd}");
    }

    #[test]
    fn identical_seeds_give_identical_streams() {
        let truth = BoundingBox::new(0.4, 0.3, 0.6, 0.7).unwrap();
        let run = || {
            let mut det = Detector::new(DetectorModel::ssd_family(Backend::Ssd), rng(9), rng(10));
            (0..200).map(|i| det.infer(Some(&truth), i)).collect::<Vec<_>>()
        };
        assert_eq!(run(), run());
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        fn any_box() -> impl Strategy<Value = BoundingBox> {
            (0.0f64..0.99, 0.0f64..0.99, 0.001f64..1.0, 0.001f64..1.0).prop_filter_map(
                "non-empty",
                |(x, y, w, h)| BoundingBox::new(x, y, (x + w).min(1.0), (y + h).min(1.0)).ok(),
            )
        }

        proptest! {
            #[test]
            fn delta_is_bounded(b in any_box(), cx in 0.0f64..=1.0, cy in 0.0f64..=1.0) {
                let d = Detection { bbox: b, confidence: 1.0, inference_time: 0.0, frame: 0 };
                let delta = compute_delta(Some(&d), &TargetPoint::new(cx, cy).unwrap());
                prop_assert!(delta.delta_x.abs() <= 1.0 && delta.delta_y.abs() <= 1.0);
            }

            #[test]
            fn perfect_round_trip(b in any_box(), cx in 0.0f64..=1.0, cy in 0.0f64..=1.0, seed in any::<u64>()) {
                let target = TargetPoint::new(cx, cy).unwrap();
                let det = detect(Some(&b), &DetectorModel::perfect(), 0, &mut rng(seed));
                let direct = Detection { bbox: b, confidence: 1.0, inference_time: 0.0, frame: 0 };
                prop_assert_eq!(compute_delta(det.as_ref(), &target), compute_delta(Some(&direct), &target));
            }

            #[test]
            fn noisy_detections_are_valid_boxes(b in any_box(), seed in any::<u64>()) {
                let model = DetectorModel { center_sigma: 0.2, size_sigma: 0.2, ..DetectorModel::ssd_family(Backend::Ssd) };
                if let Some(d) = detect(Some(&b), &model, 0, &mut rng(seed)) {
                    prop_assert!(BoundingBox::new(d.bbox.x_min, d.bbox.y_min, d.bbox.x_max, d.bbox.y_max).is_ok());
                    prop_assert!((0.0..=1.0).contains(&d.confidence));
                }
            }
        }
    }
}
