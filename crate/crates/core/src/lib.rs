//! Simulated person-following pipeline.
//!
//! Four stages talk over a latest-wins topic bus: a pinhole camera renders the
//! followed person as a ground-truth box, a detector backend perturbs it and
//! measures the box-center error against a target point, a bracket navigator
//! picks one of nine discrete (steering, throttle) cases, and a servo stage
//! maps the command to PWM duty cycles that drive a kinematic Ackermann
//! vehicle. The `bench` module compares detector latency profiles built from
//! published SSD, SSD + neural compute stick, and SSD Lite timings.

pub mod bench;
pub mod camera;
pub mod cli;
pub mod detection;
pub mod msgbus;
pub mod navigation;
pub mod servo;
pub mod simworld;

pub use bench::{compare_backends, summarize, BenchReport, Draws, LatencyProfile, LatencyStats};
pub use camera::{bbox_center, project_target, BoundingBox, CameraIntrinsics, TargetShape};
pub use detection::{
    compute_delta, detect, ssd_prediction_count, Backend, Detection, DetectionDelta, DetectorModel,
    TargetPoint,
};
pub use msgbus::{Bus, Envelope, Message, MessageKind};
pub use navigation::{classify_case, plan_action, ActionCommand, ActionTable, BracketConfig, CaseId};
pub use servo::{action_to_duty, apply_action, ChannelCalibration, ServoCalibration, ServoSetting};
pub use simworld::{run_episode, Episode, Metrics, Mode, Point2, Pose, Scenario, TraceRecord};
