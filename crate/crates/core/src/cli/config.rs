//! Scenario configuration file (TOML).
//!
//! Every key is optional; an empty file is the default scenario. Several files
//! may be layered, later files overriding earlier ones key by key, which is
//! how calibration fragments are merged into a base scenario.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::bench::LatencyProfile;
use crate::camera::{CameraIntrinsics, TargetShape};
use crate::detection::{Backend, DetectorModel, TargetPoint};
use crate::navigation::{ActionTable, BracketConfig};
use crate::servo::{ChannelCalibration, Polarity, ServoCalibration};
use crate::simworld::{Curve, Point2, Pose, Scenario, TargetTrajectory, VehicleParams, Waypoint};

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read config `{path}`: {source}")]
    Read {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("config `{path}`: {source}")]
    Parse {
        path: PathBuf,
        source: toml::de::Error,
    },
    #[error("invalid `{key}`: {message}")]
    Invalid { key: String, message: String },
}

fn invalid(key: &str, message: impl ToString) -> ConfigError {
    ConfigError::Invalid {
        key: key.to_owned(),
        message: message.to_string(),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CameraSection {
    pub hfov_deg: f64,
    pub aspect: f64,
    pub mount_height_m: f64,
    /// Downward tilt of the optical axis.
    pub pitch_deg: f64,
    pub min_box_area: f64,
}

impl Default for CameraSection {
    fn default() -> Self {
        let c = CameraIntrinsics::default();
        Self {
            hfov_deg: c.hfov.to_degrees().round(),
            aspect: c.aspect,
            mount_height_m: c.mount_height,
            pitch_deg: c.pitch.to_degrees().round(),
            min_box_area: c.min_box_area,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TargetSection {
    pub height_m: f64,
    pub width_m: f64,
    pub point_cx: f64,
    /// Derived from `standoff_m` when absent.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub point_cy: Option<f64>,
    pub standoff_m: f64,
}

impl Default for TargetSection {
    fn default() -> Self {
        let s = TargetShape::default();
        Self {
            height_m: s.height,
            width_m: s.width,
            point_cx: 0.5,
            point_cy: None,
            standoff_m: 2.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum LatencySection {
    /// Published samples for `backend` (default: the detector's backend).
    Builtin {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        backend: Option<String>,
    },
    Constant { value_s: f64 },
    Lognormal { mu: f64, sigma: f64 },
    Empirical { samples: Vec<f64> },
    None,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DetectorSection {
    pub backend: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub center_sigma: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub size_sigma: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub miss_prob: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub latency: Option<LatencySection>,
}

impl Default for DetectorSection {
    fn default() -> Self {
        Self {
            backend: Backend::SsdLite.to_string(),
            center_sigma: None,
            size_sigma: None,
            miss_prob: None,
            latency: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NavSection {
    pub x_thr: f64,
    pub y_fwd_thr: f64,
    pub y_rev_thr: f64,
    pub steer_mag: f64,
    pub fwd_throttle: f64,
    pub rev_throttle: f64,
    pub hysteresis: u32,
}

impl Default for NavSection {
    fn default() -> Self {
        let b = BracketConfig::default();
        let a = ActionTable::default();
        Self {
            x_thr: b.x_thr,
            y_fwd_thr: b.y_fwd_thr,
            y_rev_thr: b.y_rev_thr,
            steer_mag: a.steer_mag,
            fwd_throttle: a.fwd_throttle,
            rev_throttle: a.rev_throttle,
            hysteresis: 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ChannelSection {
    pub min: f64,
    pub mid: f64,
    pub max: f64,
    pub polarity: i8,
}

impl Default for ChannelSection {
    fn default() -> Self {
        let c = ChannelCalibration::default();
        Self {
            min: c.min,
            mid: c.mid,
            max: c.max,
            polarity: 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ServoSection {
    pub steering: ChannelSection,
    pub throttle: ChannelSection,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct VehicleSection {
    pub wheelbase_m: f64,
    pub max_steer_deg: f64,
    pub max_speed_mps: f64,
}

impl Default for VehicleSection {
    fn default() -> Self {
        let v = VehicleParams::default();
        Self {
            wheelbase_m: v.wheelbase,
            max_steer_deg: v.max_steer.to_degrees().round(),
            max_speed_mps: v.max_speed,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FollowerSection {
    pub x_m: f64,
    pub y_m: f64,
    pub heading_deg: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimSection {
    pub period_s: f64,
    pub duration_s: f64,
    pub seed: u64,
}

impl Default for SimSection {
    fn default() -> Self {
        Self {
            period_s: 1.0 / 15.0,
            duration_s: 40.0,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TrajectoryKind {
    #[default]
    Stationary,
    Waypoints,
    Parametric,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "snake_case", deny_unknown_fields)]
pub enum CurveSection {
    Line {
        origin: [f64; 2],
        velocity: [f64; 2],
    },
    Circle {
        center: [f64; 2],
        radius_m: f64,
        omega_rad_s: f64,
        #[serde(default)]
        phase_rad: f64,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrajectorySection {
    pub kind: TrajectoryKind,
    /// Stationary target position, metres.
    pub position: [f64; 2],
    /// `[t_s, x_m, y_m]` rows.
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub waypoints: Vec<[f64; 3]>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub curve: Option<CurveSection>,
}

impl Default for TrajectorySection {
    fn default() -> Self {
        Self {
            kind: TrajectoryKind::Stationary,
            position: [3.0, 0.5],
            waypoints: Vec::new(),
            curve: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScenarioConfig {
    pub camera: CameraSection,
    pub target: TargetSection,
    pub detector: DetectorSection,
    pub nav: NavSection,
    pub servo: ServoSection,
    pub vehicle: VehicleSection,
    pub follower: FollowerSection,
    pub sim: SimSection,
    pub trajectory: TrajectorySection,
}

fn merge_tables(base: &mut toml::Table, overlay: toml::Table) {
    for (key, value) in overlay {
        match (base.get_mut(&key), value) {
            (Some(toml::Value::Table(b)), toml::Value::Table(o)) => merge_tables(b, o),
            (_, v) => {
                base.insert(key, v);
            }
        }
    }
}

impl ScenarioConfig {
    pub fn from_toml_str(text: &str, origin: &Path) -> Result<Self, ConfigError> {
        toml::from_str(text).map_err(|source| ConfigError::Parse {
            path: origin.to_owned(),
            source,
        })
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("config is always representable as TOML")
    }

    /// Loads and layers config files; each file must be valid on its own.
    pub fn load(paths: &[PathBuf]) -> Result<Self, ConfigError> {
        let mut merged = toml::Table::new();
        for path in paths {
            let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Read {
                path: path.clone(),
                source,
            })?;
            Self::from_toml_str(&text, path)?;
            let table: toml::Table = toml::from_str(&text).map_err(|source| ConfigError::Parse {
                path: path.clone(),
                source,
            })?;
            merge_tables(&mut merged, table);
        }
        let merged_origin = paths.last().cloned().unwrap_or_default();
        Self::from_toml_str(&toml::to_string(&merged).expect("merged table serializes"), &merged_origin)
    }

    pub fn camera(&self) -> Result<CameraIntrinsics, ConfigError> {
        let c = &self.camera;
        let cam = CameraIntrinsics {
            hfov: c.hfov_deg.to_radians(),
            aspect: c.aspect,
            mount_height: c.mount_height_m,
            pitch: c.pitch_deg.to_radians(),
            min_box_area: c.min_box_area,
        };
        cam.validate().map_err(|e| invalid("camera", e))?;
        Ok(cam)
    }

    pub fn shape(&self) -> Result<TargetShape, ConfigError> {
        let s = TargetShape {
            height: self.target.height_m,
            width: self.target.width_m,
        };
        s.validate().map_err(|e| invalid("target", e))?;
        Ok(s)
    }

    pub fn follower(&self) -> Pose {
        let f = &self.follower;
        Pose::new(f.x_m, f.y_m, f.heading_deg.to_radians())
    }

    pub fn backend(&self) -> Result<Backend, ConfigError> {
        self.detector
            .backend
            .parse()
            .map_err(|e| invalid("detector.backend", e))
    }

    pub fn detector(&self) -> Result<DetectorModel, ConfigError> {
        let d = &self.detector;
        let backend = self.backend()?;
        let base = DetectorModel::ssd_family(backend);
        let latency = match &d.latency {
            None => base.latency.clone(),
            Some(LatencySection::Builtin { backend: b }) => {
                let which = match b {
                    Some(name) => name.parse().map_err(|e| invalid("detector.latency.backend", e))?,
                    None => backend,
                };
                LatencyProfile::builtin(which).map_err(|e| invalid("detector.latency", e))?
            }
            Some(LatencySection::Constant { value_s }) => LatencyProfile::constant(backend, *value_s),
            Some(LatencySection::Lognormal { mu, sigma }) => LatencyProfile::lognormal(backend, *mu, *sigma),
            Some(LatencySection::Empirical { samples }) => LatencyProfile::empirical(backend, samples.clone())
                .map_err(|e| invalid("detector.latency", e))?,
            Some(LatencySection::None) => LatencyProfile::constant(backend, 0.0),
        };
        latency.validate().map_err(|e| invalid("detector.latency", e))?;
        let model = DetectorModel {
            backend,
            center_sigma: d.center_sigma.unwrap_or(base.center_sigma),
            size_sigma: d.size_sigma.unwrap_or(base.size_sigma),
            miss_prob: d.miss_prob.unwrap_or(base.miss_prob),
            latency,
        };
        model.validate().map_err(|e| {
            let key = match e {
                crate::detection::DetectionError::MissProbability(_) => "detector.miss_prob",
                _ => "detector",
            };
            invalid(key, e)
        })?;
        Ok(model)
    }

    pub fn brackets(&self) -> Result<BracketConfig, ConfigError> {
        let b = BracketConfig {
            x_thr: self.nav.x_thr,
            y_fwd_thr: self.nav.y_fwd_thr,
            y_rev_thr: self.nav.y_rev_thr,
        };
        b.validate().map_err(|e| match e {
            crate::navigation::NavigationError::Threshold { name, .. } => invalid(&format!("nav.{name}"), e),
            _ => invalid("nav", e),
        })?;
        Ok(b)
    }

    pub fn actions(&self) -> Result<ActionTable, ConfigError> {
        let a = ActionTable {
            steer_mag: self.nav.steer_mag,
            fwd_throttle: self.nav.fwd_throttle,
            rev_throttle: self.nav.rev_throttle,
        };
        a.validate().map_err(|e| match e {
            crate::navigation::NavigationError::Magnitude { name, .. } => invalid(&format!("nav.{name}"), e),
            _ => invalid("nav", e),
        })?;
        Ok(a)
    }

    pub fn servo(&self) -> Result<ServoCalibration, ConfigError> {
        let channel = |c: &ChannelSection, key: &str| -> Result<ChannelCalibration, ConfigError> {
            let polarity = Polarity::try_from(c.polarity).map_err(|e| invalid(&format!("{key}.polarity"), e))?;
            Ok(ChannelCalibration {
                min: c.min,
                mid: c.mid,
                max: c.max,
                polarity,
            })
        };
        let cal = ServoCalibration {
            steering: channel(&self.servo.steering, "servo.steering")?,
            throttle: channel(&self.servo.throttle, "servo.throttle")?,
        };
        cal.validate().map_err(|e| match &e {
            crate::servo::ServoError::Duty { channel, .. } => {
                let text = e.to_string();
                invalid(channel, text.trim_start_matches(&format!("{channel}: ")))
            }
            _ => invalid("servo", &e),
        })?;
        Ok(cal)
    }

    pub fn vehicle(&self) -> Result<VehicleParams, ConfigError> {
        let v = VehicleParams {
            wheelbase: self.vehicle.wheelbase_m,
            max_steer: self.vehicle.max_steer_deg.to_radians(),
            max_speed: self.vehicle.max_speed_mps,
        };
        v.validate().map_err(|e| invalid("vehicle", e))?;
        Ok(v)
    }

    pub fn trajectory(&self) -> Result<TargetTrajectory, ConfigError> {
        let t = &self.trajectory;
        let p = |a: [f64; 2]| Point2::new(a[0], a[1]);
        let traj = match t.kind {
            TrajectoryKind::Stationary => TargetTrajectory::Stationary(p(t.position)),
            TrajectoryKind::Waypoints => TargetTrajectory::Waypoints(
                t.waypoints
                    .iter()
                    .map(|w| Waypoint {
                        t: w[0],
                        point: Point2::new(w[1], w[2]),
                    })
                    .collect(),
            ),
            TrajectoryKind::Parametric => match &t.curve {
                None => return Err(invalid("trajectory.curve", "parametric trajectory needs a curve")),
                Some(CurveSection::Line { origin, velocity }) => TargetTrajectory::Parametric(Curve::Line {
                    origin: p(*origin),
                    velocity: p(*velocity),
                }),
                Some(CurveSection::Circle {
                    center,
                    radius_m,
                    omega_rad_s,
                    phase_rad,
                }) => TargetTrajectory::Parametric(Curve::Circle {
                    center: p(*center),
                    radius: *radius_m,
                    angular_speed: *omega_rad_s,
                    phase: *phase_rad,
                }),
            },
        };
        traj.validate().map_err(|e| invalid("trajectory", e))?;
        Ok(traj)
    }

    /// Target point; `cy` defaults to the box-center height of a target
    /// standing straight ahead at the standoff distance.
    pub fn target_point(&self) -> Result<TargetPoint, ConfigError> {
        let cy = match self.target.point_cy {
            Some(cy) => cy,
            None => super::calibrate::standoff_cy(&self.camera()?, &self.shape()?, self.target.standoff_m)
                .ok_or_else(|| invalid("target.standoff_m", "target is not visible at the standoff distance"))?,
        };
        TargetPoint::new(self.target.point_cx, cy).map_err(|e| invalid("target.point_cx", e))
    }

    pub fn scenario(&self) -> Result<Scenario, ConfigError> {
        if self.nav.hysteresis == 0 {
            return Err(invalid("nav.hysteresis", "must be at least 1"));
        }
        let ok = |v: f64| v > 0.0 && v.is_finite();
        if !ok(self.sim.period_s) {
            return Err(invalid("sim.period_s", "must be positive"));
        }
        if !ok(self.sim.duration_s) {
            return Err(invalid("sim.duration_s", "must be positive"));
        }
        if !ok(self.target.standoff_m) {
            return Err(invalid("target.standoff_m", "must be positive"));
        }
        let scenario = Scenario {
            camera: self.camera()?,
            shape: self.shape()?,
            detector: self.detector()?,
            target_point: self.target_point()?,
            brackets: self.brackets()?,
            actions: self.actions()?,
            hysteresis: self.nav.hysteresis,
            servo: self.servo()?,
            vehicle: self.vehicle()?,
            start: self.follower(),
            trajectory: self.trajectory()?,
            period: self.sim.period_s,
            duration: self.sim.duration_s,
        };
        scenario.validate().map_err(|e| invalid("scenario", e))?;
        Ok(scenario)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(text: &str) -> Result<ScenarioConfig, ConfigError> {
        ScenarioConfig::from_toml_str(text, Path::new("test.toml"))
    }

    #[test]
    fn empty_file_is_the_default_scenario() {
        let c = parse("").unwrap();
        assert_eq!(c, ScenarioConfig::default());
        let s = c.scenario().unwrap();
        assert_eq!(s.camera, CameraIntrinsics {
            hfov: 120f64.to_radians(),
            pitch: 40f64.to_radians(),
            ..CameraIntrinsics::default()
        });
        assert_eq!(s.detector.backend, Backend::SsdLite);
        assert_eq!(s.brackets, BracketConfig::default());
        assert_eq!(s.trajectory, TargetTrajectory::Stationary(Point2::new(3.0, 0.5)));
        assert!((s.period - 1.0 / 15.0).abs() < 1e-15);
    }

    #[test]
    fn normative_keys_parse() {
        let c = parse(
            r#"
            [camera]
            hfov_deg = 90.0
            mount_height_m = 0.2
            [detector]
            backend = "SSD"
            miss_prob = 0.1
            [nav]
            x_thr = 0.2
            y_fwd_thr = 0.05
            y_rev_thr = 0.06
            steer_mag = 0.5
            fwd_throttle = 0.4
            rev_throttle = 0.3
            [servo.steering]
            min = 0.04
            mid = 0.07
            max = 0.11
            [servo.throttle]
            min = 0.05
            mid = 0.075
            max = 0.1
            [vehicle]
            wheelbase_m = 0.2
            max_steer_deg = 25.0
            max_speed_mps = 1.0
            [sim]
            period_s = 0.1
            duration_s = 5.0
            seed = 9
            [target]
            point_cx = 0.45
            point_cy = 0.3
            standoff_m = 1.5
            [trajectory]
            kind = "waypoints"
            waypoints = [[0.0, 2.0, 0.0], [5.0, 4.0, 1.0]]
            "#,
        )
        .unwrap();
        let s = c.scenario().unwrap();
        assert_eq!(s.detector.backend, Backend::Ssd);
        assert_eq!(s.detector.miss_prob, 0.1);
        assert_eq!(s.target_point, TargetPoint { cx: 0.45, cy: 0.3 });
        assert_eq!(s.servo.steering.max, 0.11);
        assert!(matches!(s.trajectory, TargetTrajectory::Waypoints(ref w) if w.len() == 2));
        assert_eq!(c.sim.seed, 9);
    }

    #[test]
    fn parse_errors_are_line_anchored() {
        let err = parse("[nav]\nx_thr = 0.2\ny_fwd_thr = = 1\n").unwrap_err();
        assert!(err.to_string().contains("line 3"), "{err}");
        let err = parse("[nav]\nbogus_key = 1\n").unwrap_err();
        assert!(err.to_string().contains("bogus_key"), "{err}");
    }

    #[test]
    fn invariant_violations_name_their_key() {
        let c = parse("[servo.steering]\nmin = 0.2\nmid = 0.075\nmax = 0.1\n").unwrap();
        let err = c.scenario().unwrap_err();
        assert!(err.to_string().contains("servo.steering"), "{err}");
        let c = parse("[detector]\nbackend = \"BOGUS\"\n").unwrap();
        assert!(c.scenario().unwrap_err().to_string().contains("detector.backend"));
        let c = parse("[nav]\ny_rev_thr = 0.0\n").unwrap();
        assert!(c.scenario().unwrap_err().to_string().contains("nav.y_rev_thr"));
        let c = parse("[detector]\nbackend = \"PERFECT\"\ncenter_sigma = 0.1\n").unwrap();
        assert!(c.scenario().unwrap_err().to_string().contains("detector"));
        let c = parse("[trajectory]\nkind = \"parametric\"\n").unwrap();
        assert!(c.scenario().unwrap_err().to_string().contains("trajectory.curve"));
    }

    #[test]
    fn latency_overrides() {
        let c = parse("[detector]\nbackend = \"SSD\"\nlatency = { kind = \"constant\", value_s = 0.25 }\n").unwrap();
        assert_eq!(c.detector().unwrap().latency, LatencyProfile::constant(Backend::Ssd, 0.25));
        let c = parse("[detector]\nbackend = \"SSD_LITE\"\nlatency = { kind = \"builtin\", backend = \"SSD\" }\n").unwrap();
        assert_eq!(c.detector().unwrap().latency.samples().unwrap()[0], 0.42902);
        let c = parse("[detector]\nbackend = \"PERFECT\"\n").unwrap();
        assert!(c.detector().unwrap().latency.is_zero());
    }

    #[test]
    fn parametric_curves() {
        let c = parse(
            "[trajectory]\nkind = \"parametric\"\ncurve = { name = \"line\", origin = [2.0, 0.0], velocity = [0.0, 0.5] }\n",
        )
        .unwrap();
        assert!(matches!(c.trajectory().unwrap(), TargetTrajectory::Parametric(Curve::Line { .. })));
        let c = parse(
            "[trajectory]\nkind = \"parametric\"\ncurve = { name = \"circle\", center = [3.0, 0.0], radius_m = 1.0, omega_rad_s = 0.2 }\n",
        )
        .unwrap();
        assert!(matches!(c.trajectory().unwrap(), TargetTrajectory::Parametric(Curve::Circle { .. })));
    }

    #[test]
    fn layered_files_override_key_by_key() {
        let dir = tempfile::tempdir().unwrap();
        let base = dir.path().join("base.toml");
        let frag = dir.path().join("frag.toml");
        std::fs::write(&base, "[nav]\nx_thr = 0.2\nsteer_mag = 0.9\n[sim]\nseed = 3\n").unwrap();
        std::fs::write(&frag, "[nav]\nx_thr = 0.05\n[target]\npoint_cy = 0.2\n").unwrap();
        let c = ScenarioConfig::load(&[base, frag]).unwrap();
        assert_eq!(c.nav.x_thr, 0.05);
        assert_eq!(c.nav.steer_mag, 0.9);
        assert_eq!(c.sim.seed, 3);
        assert_eq!(c.target.point_cy, Some(0.2));
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn emit_then_load_is_identity(
                x_thr in 0.01f64..0.9, period in 0.01f64..0.5, seed in any::<u64>(),
                cy in prop::option::of(0.0f64..1.0), miss in prop::option::of(0.0f64..1.0),
                backend in prop::sample::select(vec!["SSD", "SSD_NCS", "SSD_LITE", "PERFECT"]),
                waypoints in prop::collection::vec(prop::array::uniform3(-10.0f64..10.0), 0..4),
            ) {
                let mut c = ScenarioConfig::default();
                c.nav.x_thr = x_thr;
                c.sim.period_s = period;
                c.sim.seed = seed;
                c.target.point_cy = cy;
                c.detector.backend = backend.to_owned();
                c.detector.miss_prob = miss;
                c.detector.latency = Some(LatencySection::Empirical { samples: vec![0.1, period] });
                c.trajectory.waypoints = waypoints;
                let text = c.to_toml_string();
                prop_assert_eq!(parse(&text).unwrap(), c);
            }
        }
    }
}
