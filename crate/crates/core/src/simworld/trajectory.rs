use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::Point2;

#[derive(Debug, Error, PartialEq)]
pub enum TrajectoryError {
    #[error("waypoint list is empty")]
    NoWaypoints,
    #[error("waypoint times must be strictly increasing (index {0})")]
    NotIncreasing(usize),
    #[error("trajectory values must be finite")]
    NotFinite,
    #[error("circle radius must be positive, got {0}")]
    Radius(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Waypoint {
    pub t: f64,
    pub point: Point2,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Curve {
    /// Constant-velocity walk from `origin`.
    Line { origin: Point2, velocity: Point2 },
    /// Counter-clockwise for positive `angular_speed`.
    Circle {
        center: Point2,
        radius: f64,
        angular_speed: f64,
        phase: f64,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum TargetTrajectory {
    Stationary(Point2),
    Waypoints(Vec<Waypoint>),
    Parametric(Curve),
}

impl TargetTrajectory {
    pub fn validate(&self) -> Result<(), TrajectoryError> {
        let finite = |p: &Point2| p.x.is_finite() && p.y.is_finite();
        match self {
            TargetTrajectory::Stationary(p) => finite(p).then_some(()).ok_or(TrajectoryError::NotFinite),
            TargetTrajectory::Waypoints(w) => {
                if w.is_empty() {
                    return Err(TrajectoryError::NoWaypoints);
                }
                if w.iter().any(|w| !finite(&w.point) || !w.t.is_finite()) {
                    return Err(TrajectoryError::NotFinite);
                }
                match w.windows(2).position(|p| p[1].t <= p[0].t) {
                    Some(i) => Err(TrajectoryError::NotIncreasing(i + 1)),
                    None => Ok(()),
                }
            }
            TargetTrajectory::Parametric(Curve::Line { origin, velocity }) => (finite(origin)
                && finite(velocity))
            .then_some(())
            .ok_or(TrajectoryError::NotFinite),
            TargetTrajectory::Parametric(Curve::Circle {
                center,
                radius,
                angular_speed,
                phase,
            }) => {
                if !(finite(center) && angular_speed.is_finite() && phase.is_finite()) {
                    return Err(TrajectoryError::NotFinite);
                }
                if !(*radius > 0.0 && radius.is_finite()) {
                    return Err(TrajectoryError::Radius(*radius));
                }
                Ok(())
            }
        }
    }

    pub fn is_stationary(&self) -> bool {
        match self {
            TargetTrajectory::Stationary(_) => true,
            TargetTrajectory::Waypoints(w) => w.windows(2).all(|p| p[0].point == p[1].point),
            TargetTrajectory::Parametric(Curve::Line { velocity, .. }) => {
                velocity.x == 0.0 && velocity.y == 0.0
            }
            TargetTrajectory::Parametric(Curve::Circle { angular_speed, .. }) => *angular_speed == 0.0,
        }
    }
}

/// Target position at time `t` (seconds). Waypoint paths are linearly
/// interpolated and clamped to their first and last points.
pub fn target_position(traj: &TargetTrajectory, t: f64) -> Point2 {
    match traj {
        TargetTrajectory::Stationary(p) => *p,
        TargetTrajectory::Waypoints(w) => {
            let first = w.first().expect("validated non-empty");
            let last = w.last().expect("validated non-empty");
            if t <= first.t {
                return first.point;
            }
            if t >= last.t {
                return last.point;
            }
            let i = w.partition_point(|wp| wp.t <= t);
            let (a, b) = (&w[i - 1], &w[i]);
            let s = (t - a.t) / (b.t - a.t);
            Point2::new(
                a.point.x + s * (b.point.x - a.point.x),
                a.point.y + s * (b.point.y - a.point.y),
            )
        }
        TargetTrajectory::Parametric(Curve::Line { origin, velocity }) => {
            Point2::new(origin.x + velocity.x * t, origin.y + velocity.y * t)
        }
        TargetTrajectory::Parametric(Curve::Circle {
            center,
            radius,
            angular_speed,
            phase,
        }) => {
            let a = phase + angular_speed * t;
            Point2::new(center.x + radius * a.cos(), center.y + radius * a.sin())
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn wp(t: f64, x: f64, y: f64) -> Waypoint {
        Waypoint {
            t,
            point: Point2::new(x, y),
        }
    }

    #[test]
    fn stationary() {
        let p = Point2::new(3.0, 0.5);
        let tr = TargetTrajectory::Stationary(p);
        assert!([0.0, 1.0, 1e6].iter().all(|t| target_position(&tr, *t) == p));
        assert!(tr.is_stationary());
    }

    #[test]
    fn waypoint_interpolation_and_clamp() {
        let tr = TargetTrajectory::Waypoints(vec![wp(0.0, 0.0, 0.0), wp(10.0, 10.0, 0.0)]);
        assert_eq!(target_position(&tr, 5.0), Point2::new(5.0, 0.0));
        assert_eq!(target_position(&tr, 25.0), Point2::new(10.0, 0.0));
        let tr = TargetTrajectory::Waypoints(vec![wp(1.0, 0.0, 0.0), wp(2.0, 0.0, 2.0), wp(4.0, 2.0, 2.0)]);
        assert_eq!(target_position(&tr, 0.0), Point2::new(0.0, 0.0));
        assert_eq!(target_position(&tr, 1.5), Point2::new(0.0, 1.0));
        assert_eq!(target_position(&tr, 2.0), Point2::new(0.0, 2.0));
        assert_eq!(target_position(&tr, 3.0), Point2::new(1.0, 2.0));
        assert!(!tr.is_stationary());
    }

    #[test]
    fn curves() {
        let line = TargetTrajectory::Parametric(Curve::Line {
            origin: Point2::new(2.0, 0.0),
            velocity: Point2::new(0.5, 0.0),
        });
        assert_eq!(target_position(&line, 4.0), Point2::new(4.0, 0.0));
        let circle = TargetTrajectory::Parametric(Curve::Circle {
            center: Point2::new(0.0, 0.0),
            radius: 2.0,
            angular_speed: std::f64::consts::FRAC_PI_2,
            phase: 0.0,
        });
        let p = target_position(&circle, 1.0);
        assert!(p.x.abs() < 1e-12 && (p.y - 2.0).abs() < 1e-12);
    }

    #[test]
    fn validation() {
        assert_eq!(
            TargetTrajectory::Waypoints(vec![]).validate(),
            Err(TrajectoryError::NoWaypoints)
        );
        assert_eq!(
            TargetTrajectory::Waypoints(vec![wp(0.0, 0.0, 0.0), wp(0.0, 1.0, 0.0)]).validate(),
            Err(TrajectoryError::NotIncreasing(1))
        );
        let bad_circle = TargetTrajectory::Parametric(Curve::Circle {
            center: Point2::default(),
            radius: 0.0,
            angular_speed: 1.0,
            phase: 0.0,
        });
        assert!(bad_circle.validate().is_err());
    }
}
