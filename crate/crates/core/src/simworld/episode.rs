//! Closed-loop episode runner.
//!
//! Each control tick runs camera, detection, navigation and servo in that
//! order, then advances the world by one period. Detector latency is honored
//! on the simulation clock: the detector works on one frame at a time, frames
//! that arrive while it is busy are skipped, and the action derived from a
//! frame takes effect at `frame time + inference time`. Until then the
//! previous servo setting stays applied.

use std::sync::mpsc;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::{
    compute_metrics, step_kinematics, target_position, KinematicsError, Metrics, Point2, Pose,
    TargetTrajectory, TrajectoryError, VehicleParams,
};
use crate::camera::{project_target, BoundingBox, CameraError, CameraIntrinsics, TargetShape};
use crate::detection::{
    compute_delta, Detection, DetectionDelta, DetectionError, Detector, DetectorModel, TargetPoint,
};
use crate::msgbus::{self, Bus, BusError, CameraFrame, Envelope, Message};
use crate::navigation::{ActionCommand, ActionTable, BracketConfig, CaseId, NavigationError, Navigator};
use crate::servo::{setting_to_action, ServoCalibration, ServoError, ServoSetting};

#[derive(Debug, Error)]
pub enum EpisodeError {
    #[error("camera: {0}")]
    Camera(#[from] CameraError),
    #[error("detector: {0}")]
    Detection(#[from] DetectionError),
    #[error("navigation: {0}")]
    Navigation(#[from] NavigationError),
    #[error("servo: {0}")]
    Servo(#[from] ServoError),
    #[error("vehicle: {0}")]
    Kinematics(#[from] KinematicsError),
    #[error("trajectory: {0}")]
    Trajectory(#[from] TrajectoryError),
    #[error("latency profile: {0}")]
    Latency(#[from] crate::bench::BenchError),
    #[error("bus: {0}")]
    Bus(#[from] BusError),
    #[error("sim: period and duration must be positive and finite (period {period}, duration {duration})")]
    Timing { period: f64, duration: f64 },
    #[error("a pipeline stage thread stopped unexpectedly")]
    StageDied,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    /// All stages on the calling thread in fixed order.
    #[default]
    Deterministic,
    /// Detection, navigation and servo each on their own thread.
    Concurrent,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub camera: CameraIntrinsics,
    pub shape: TargetShape,
    pub detector: DetectorModel,
    pub target_point: TargetPoint,
    pub brackets: BracketConfig,
    pub actions: ActionTable,
    pub hysteresis: u32,
    pub servo: ServoCalibration,
    pub vehicle: VehicleParams,
    pub start: Pose,
    pub trajectory: TargetTrajectory,
    /// Control period, seconds.
    pub period: f64,
    /// Episode length, seconds.
    pub duration: f64,
}

impl Scenario {
    pub fn validate(&self) -> Result<(), EpisodeError> {
        self.camera.validate()?;
        self.shape.validate()?;
        self.detector.validate()?;
        self.detector.latency.validate()?;
        TargetPoint::new(self.target_point.cx, self.target_point.cy)?;
        self.brackets.validate()?;
        self.actions.validate()?;
        if self.hysteresis == 0 {
            return Err(NavigationError::Hysteresis.into());
        }
        self.servo.validate()?;
        self.vehicle.validate()?;
        self.trajectory.validate()?;
        let ok = |v: f64| v > 0.0 && v.is_finite();
        if !ok(self.period) || !ok(self.duration) {
            return Err(EpisodeError::Timing {
                period: self.period,
                duration: self.duration,
            });
        }
        Ok(())
    }

    pub fn ticks(&self) -> u64 {
        // tolerate durations that are an exact multiple up to rounding
        ((self.duration / self.period) - 1e-9).ceil().max(1.0) as u64
    }
}

/// One line of the episode trace.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceRecord {
    pub tick: u64,
    /// Simulation time at the start of the tick, seconds.
    pub t: f64,
    /// Follower pose the camera saw this tick.
    pub pose: Pose,
    pub target: Point2,
    pub truth_box: Option<BoundingBox>,
    /// Detector was still busy with an earlier frame.
    pub frame_skipped: bool,
    /// Inference time of the frame started this tick.
    pub inference_time: Option<f64>,
    /// Detection that finished during this tick.
    pub detection: Option<Detection>,
    /// Latest published delta at the end of the tick.
    pub delta: DetectionDelta,
    pub case_id: CaseId,
    pub steering: f64,
    pub throttle: f64,
    pub steering_duty: f64,
    pub throttle_duty: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Episode {
    pub trace: Vec<TraceRecord>,
    pub metrics: Metrics,
    /// Pose after the last tick.
    pub final_pose: Pose,
}

#[derive(Debug, Clone, Copy)]
struct Tick {
    index: u64,
    start: f64,
    end: f64,
}

#[derive(Debug, Clone, Copy, Default)]
struct DetectionReport {
    skipped: bool,
    started: Option<f64>,
    completed: Option<Detection>,
}

struct Pending {
    ready_at: f64,
    detection: Option<Detection>,
}

struct DetectionStage {
    detector: Detector<ChaCha8Rng>,
    target: TargetPoint,
    pending: Option<Pending>,
}

impl DetectionStage {
    fn tick(&mut self, bus: &Bus, tick: Tick) -> Result<DetectionReport, EpisodeError> {
        let mut report = DetectionReport::default();
        if self.pending.is_none() {
            if let Some(env) = bus.poll_latest(msgbus::CAMERA_FRAME)? {
                if let Message::CameraFrame(frame) = env.payload {
                    let (detection, latency) = self.detector.infer(frame.truth.as_ref(), frame.frame);
                    report.started = Some(latency);
                    self.pending = Some(Pending {
                        ready_at: env.timestamp + latency,
                        detection,
                    });
                }
            }
        } else {
            report.skipped = true;
        }
        if let Some(p) = self.pending.take_if(|p| p.ready_at < tick.end) {
            if let Some(d) = &p.detection {
                bus.publish(msgbus::DETECTION_BOX, *d, p.ready_at)?;
            }
            let delta = compute_delta(p.detection.as_ref(), &self.target);
            bus.publish(msgbus::DETECTION_DELTA, delta, p.ready_at)?;
            report.completed = p.detection;
        }
        Ok(report)
    }
}

struct NavigationStage {
    navigator: Navigator,
    seen: u64,
}

impl NavigationStage {
    fn tick(&mut self, bus: &Bus) -> Result<(), EpisodeError> {
        if let Some(env) = bus.poll_latest(msgbus::DETECTION_DELTA)? {
            if env.sequence > self.seen {
                self.seen = env.sequence;
                if let Message::DetectionDelta(delta) = env.payload {
                    let action = self.navigator.step(&delta);
                    bus.publish(msgbus::NAV_ACTION, action, env.timestamp)?;
                }
            }
        }
        Ok(())
    }
}

struct ServoStage {
    calibration: ServoCalibration,
    seen: u64,
}

impl ServoStage {
    fn tick(&mut self, bus: &Bus) -> Result<(), EpisodeError> {
        if let Some(env) = bus.poll_latest(msgbus::NAV_ACTION)? {
            if env.sequence > self.seen {
                self.seen = env.sequence;
                if let Message::ActionCommand(cmd) = env.payload {
                    let setting = crate::servo::apply_action(&cmd, &self.calibration);
                    bus.publish(msgbus::SERVO_SETTING, setting, env.timestamp)?;
                }
            }
        }
        Ok(())
    }
}

/// Camera, world integration and trace assembly. Runs on the caller's thread
/// in both modes.
struct World<'a> {
    scenario: &'a Scenario,
    pose: Pose,
    applied: ServoSetting,
    applied_seq: u64,
    trace: Vec<TraceRecord>,
}

impl<'a> World<'a> {
    fn new(scenario: &'a Scenario) -> Self {
        Self {
            scenario,
            pose: scenario.start,
            applied: scenario.servo.neutral(),
            applied_seq: 0,
            trace: Vec::with_capacity(scenario.ticks() as usize),
        }
    }

    fn tick_of(&self, index: u64) -> Tick {
        Tick {
            index,
            start: index as f64 * self.scenario.period,
            end: (index + 1) as f64 * self.scenario.period,
        }
    }

    /// Publishes the frame for this tick; returns the target and truth box.
    fn camera(&self, bus: &Bus, tick: Tick) -> Result<(Point2, Option<BoundingBox>), EpisodeError> {
        let s = self.scenario;
        let target = target_position(&s.trajectory, tick.start);
        let truth = project_target(&self.pose, target, &s.shape, &s.camera);
        bus.publish(
            msgbus::CAMERA_FRAME,
            CameraFrame {
                frame: tick.index,
                truth,
            },
            tick.start,
        )?;
        Ok((target, truth))
    }

    fn drive(&self, pose: &Pose, setting: &ServoSetting, dt: f64) -> Result<Pose, EpisodeError> {
        let s = self.scenario;
        let (steer, throttle) = setting_to_action(setting, &s.servo);
        // positive steering command turns right, i.e. clockwise
        let angle = -steer * s.vehicle.max_steer;
        let speed = throttle * s.vehicle.max_speed;
        Ok(step_kinematics(pose, angle, speed, &s.vehicle, dt)?)
    }

    fn finish_tick(
        &mut self,
        bus: &Bus,
        tick: Tick,
        target: Point2,
        truth: Option<BoundingBox>,
        report: DetectionReport,
    ) -> Result<(), EpisodeError> {
        let seen_pose = self.pose;
        let mut t = tick.start;
        if let Some(env) = bus.poll_latest(msgbus::SERVO_SETTING)? {
            if env.sequence > self.applied_seq {
                if let Message::ServoSetting(next) = env.payload {
                    let switch = env.timestamp.clamp(tick.start, tick.end);
                    if switch > t {
                        self.pose = self.drive(&self.pose, &self.applied, switch - t)?;
                        t = switch;
                    }
                    self.applied = next;
                    self.applied_seq = env.sequence;
                }
            }
        }
        if tick.end > t {
            self.pose = self.drive(&self.pose, &self.applied, tick.end - t)?;
        }

        let delta = match bus.poll_latest(msgbus::DETECTION_DELTA)? {
            Some(Envelope {
                payload: Message::DetectionDelta(d),
                ..
            }) => d,
            _ => DetectionDelta::MISSING,
        };
        let action = match bus.poll_latest(msgbus::NAV_ACTION)? {
            Some(Envelope {
                payload: Message::ActionCommand(a),
                ..
            }) => a,
            _ => ActionCommand::NULL,
        };
        self.trace.push(TraceRecord {
            tick: tick.index,
            t: tick.start,
            pose: seen_pose,
            target,
            truth_box: truth,
            frame_skipped: report.skipped,
            inference_time: report.started,
            detection: report.completed,
            delta,
            case_id: action.case_id,
            steering: action.steering,
            throttle: action.throttle,
            steering_duty: self.applied.steering_duty,
            throttle_duty: self.applied.throttle_duty,
        });
        Ok(())
    }
}

/// Random stream for the detector's noise (`stream` 0) or latency (1).
pub fn stage_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(0xD7EC_7000 + stream);
    rng
}

fn build_stages(
    scenario: &Scenario,
    seed: u64,
) -> Result<(DetectionStage, NavigationStage, ServoStage), EpisodeError> {
    let detection = DetectionStage {
        detector: Detector::new(
            scenario.detector.clone(),
            stage_rng(seed, 0),
            stage_rng(seed, 1),
        ),
        target: scenario.target_point,
        pending: None,
    };
    let navigation = NavigationStage {
        navigator: Navigator::new(scenario.brackets, scenario.actions, scenario.hysteresis)?,
        seen: 0,
    };
    let servo = ServoStage {
        calibration: scenario.servo,
        seen: 0,
    };
    Ok((detection, navigation, servo))
}

pub fn run_episode(scenario: &Scenario, seed: u64, mode: Mode) -> Result<Episode, EpisodeError> {
    scenario.validate()?;
    let bus = Bus::pipeline();
    let (mut detection, mut navigation, mut servo) = build_stages(scenario, seed)?;
    let mut world = World::new(scenario);

    match mode {
        Mode::Deterministic => {
            for k in 0..scenario.ticks() {
                let tick = world.tick_of(k);
                let (target, truth) = world.camera(&bus, tick)?;
                let report = detection.tick(&bus, tick)?;
                navigation.tick(&bus)?;
                servo.tick(&bus)?;
                world.finish_tick(&bus, tick, target, truth, report)?;
            }
        }
        Mode::Concurrent => {
            // Ticks travel world -> detection -> navigation -> servo -> world;
            // every stage owns its state on its own thread and talks through
            // the shared bus.
            let bus = &bus;
            std::thread::scope(|scope| -> Result<(), EpisodeError> {
                let (to_det, det_rx) = mpsc::channel::<Tick>();
                let (to_nav, nav_rx) = mpsc::channel::<(Tick, DetectionReport)>();
                let (to_servo, servo_rx) = mpsc::channel::<(Tick, DetectionReport)>();
                let (to_world, world_rx) = mpsc::channel::<(Tick, DetectionReport)>();

                let det = scope.spawn(move || -> Result<(), EpisodeError> {
                    for tick in det_rx {
                        let report = detection.tick(bus, tick)?;
                        if to_nav.send((tick, report)).is_err() {
                            break;
                        }
                    }
                    Ok(())
                });
                let nav = scope.spawn(move || -> Result<(), EpisodeError> {
                    for msg in nav_rx {
                        navigation.tick(bus)?;
                        if to_servo.send(msg).is_err() {
                            break;
                        }
                    }
                    Ok(())
                });
                let srv = scope.spawn(move || -> Result<(), EpisodeError> {
                    for msg in servo_rx {
                        servo.tick(bus)?;
                        if to_world.send(msg).is_err() {
                            break;
                        }
                    }
                    Ok(())
                });

                let mut result = Ok(());
                for k in 0..scenario.ticks() {
                    let tick = world.tick_of(k);
                    let step = (|| {
                        let (target, truth) = world.camera(bus, tick)?;
                        to_det.send(tick).map_err(|_| EpisodeError::StageDied)?;
                        let (_, report) = world_rx.recv().map_err(|_| EpisodeError::StageDied)?;
                        world.finish_tick(bus, tick, target, truth, report)
                    })();
                    if step.is_err() {
                        result = step;
                        break;
                    }
                }
                drop(to_det);
                for handle in [det, nav, srv] {
                    let joined = handle.join().expect("stage thread panicked");
                    // a stage's own error explains a StageDied seen by the world
                    if joined.is_err() && matches!(result, Ok(()) | Err(EpisodeError::StageDied)) {
                        result = joined;
                    }
                }
                result
            })?;
        }
    }

    let final_pose = world.pose;
    let metrics = compute_metrics(&world.trace).expect("at least one tick ran");
    Ok(Episode {
        trace: world.trace,
        metrics,
        final_pose,
    })
}
