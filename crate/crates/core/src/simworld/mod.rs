//! Ground-plane world: Ackermann follower kinematics, scripted target paths,
//! the closed-loop episode runner and its summary metrics.

mod episode;
mod kinematics;
mod metrics;
mod trajectory;

pub use episode::{run_episode, stage_rng, Episode, EpisodeError, Mode, Scenario, TraceRecord};
pub use kinematics::{normalize_angle, step_kinematics, KinematicsError, Point2, Pose, VehicleParams};
pub use metrics::{compute_metrics, Metrics, MetricsError, CONVERGE_HOLD_S};
pub use trajectory::{target_position, Curve, TargetTrajectory, TrajectoryError, Waypoint};
