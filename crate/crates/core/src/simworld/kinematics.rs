use std::f64::consts::PI;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Below this |tan(steering)| the step is integrated as a straight line.
const STRAIGHT_TAN: f64 = 1e-9;

#[derive(Debug, Error, PartialEq)]
pub enum KinematicsError {
    #[error("vehicle parameter `{name}` is invalid: {value}")]
    Param { name: &'static str, value: f64 },
    #[error("steering angle {angle} exceeds limit {limit}")]
    Steering { angle: f64, limit: f64 },
    #[error("speed {speed} exceeds limit {limit}")]
    Speed { speed: f64, limit: f64 },
    #[error("time step must be positive, got {0}")]
    Step(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Point2 {
    pub x: f64,
    pub y: f64,
}

impl Point2 {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn distance(&self, other: &Point2) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }
}

/// Wraps an angle into (-pi, pi].
pub fn normalize_angle(a: f64) -> f64 {
    let mut r = a.rem_euclid(2.0 * PI);
    if r > PI {
        r -= 2.0 * PI;
    }
    r
}

/// Rear-axle pose on the ground plane. Heading is counter-clockwise from +x.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Pose {
    pub x: f64,
    pub y: f64,
    pub heading: f64,
}

impl Pose {
    pub fn new(x: f64, y: f64, heading: f64) -> Self {
        Self {
            x,
            y,
            heading: normalize_angle(heading),
        }
    }

    pub fn position(&self) -> Point2 {
        Point2::new(self.x, self.y)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VehicleParams {
    pub wheelbase: f64,
    /// Radians.
    pub max_steer: f64,
    /// Metres per second.
    pub max_speed: f64,
}

impl Default for VehicleParams {
    fn default() -> Self {
        Self {
            wheelbase: 0.16,
            max_steer: 30f64.to_radians(),
            max_speed: 1.5,
        }
    }
}

impl VehicleParams {
    pub fn validate(&self) -> Result<(), KinematicsError> {
        let positive = |name, value: f64| {
            if value > 0.0 && value.is_finite() {
                Ok(())
            } else {
                Err(KinematicsError::Param { name, value })
            }
        };
        positive("wheelbase", self.wheelbase)?;
        positive("max_steer", self.max_steer)?;
        positive("max_speed", self.max_speed)?;
        if self.max_steer >= PI / 2.0 {
            return Err(KinematicsError::Param {
                name: "max_steer",
                value: self.max_steer,
            });
        }
        Ok(())
    }
}

/// Kinematic bicycle model, integrated exactly along the circular arc.
///
/// `steering` is the front-wheel angle in radians, positive turning left
/// (counter-clockwise); `speed` is signed, negative reverses.
pub fn step_kinematics(
    pose: &Pose,
    steering: f64,
    speed: f64,
    params: &VehicleParams,
    dt: f64,
) -> Result<Pose, KinematicsError> {
    if steering.abs() > params.max_steer {
        return Err(KinematicsError::Steering {
            angle: steering,
            limit: params.max_steer,
        });
    }
    if speed.abs() > params.max_speed {
        return Err(KinematicsError::Speed {
            speed,
            limit: params.max_speed,
        });
    }
    if dt.is_nan() || dt <= 0.0 {
        return Err(KinematicsError::Step(dt));
    }
    if speed == 0.0 {
        return Ok(*pose);
    }
    let tan = steering.tan();
    if tan.abs() <= STRAIGHT_TAN {
        let (s, c) = pose.heading.sin_cos();
        return Ok(Pose {
            x: pose.x + speed * dt * c,
            y: pose.y + speed * dt * s,
            heading: pose.heading,
        });
    }
    let radius = params.wheelbase / tan;
    let heading = pose.heading + speed * dt / radius;
    Ok(Pose {
        x: pose.x + radius * (heading.sin() - pose.heading.sin()),
        y: pose.y - radius * (heading.cos() - pose.heading.cos()),
        heading: normalize_angle(heading),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn no_motion_without_speed() {
        let p = Pose::new(1.0, 2.0, 0.3);
        let q = step_kinematics(&p, 0.2, 0.0, &VehicleParams::default(), 0.1).unwrap();
        assert_eq!(p, q);
    }

    #[test]
    fn straight_line() {
        let p = Pose::new(0.0, 0.0, 0.0);
        let q = step_kinematics(&p, 0.0, 1.2, &VehicleParams::default(), 0.5).unwrap();
        assert_eq!((q.x, q.y, q.heading), (0.6, 0.0, 0.0));
        let r = step_kinematics(&p, 0.0, -1.0, &VehicleParams::default(), 0.5).unwrap();
        assert_eq!(r.x, -0.5);
    }

    #[test]
    fn positive_steering_turns_left() {
        let p = Pose::new(0.0, 0.0, 0.0);
        let q = step_kinematics(&p, 0.3, 1.0, &VehicleParams::default(), 0.1).unwrap();
        assert!(q.heading > 0.0 && q.y > 0.0);
    }

    #[test]
    fn precondition_errors() {
        let v = VehicleParams::default();
        let p = Pose::default();
        assert!(step_kinematics(&p, 1.0, 1.0, &v, 0.1).is_err());
        assert!(step_kinematics(&p, 0.0, 2.0, &v, 0.1).is_err());
        assert!(step_kinematics(&p, 0.0, 1.0, &v, 0.0).is_err());
        assert!(VehicleParams { max_steer: 2.0, ..v }.validate().is_err());
        assert!(VehicleParams { wheelbase: 0.0, ..v }.validate().is_err());
    }

    #[test]
    fn angles_wrap_into_half_open_interval() {
        assert_eq!(normalize_angle(PI), PI);
        assert_eq!(normalize_angle(-PI), PI);
        assert!((normalize_angle(3.0 * PI / 2.0) + PI / 2.0).abs() < 1e-12);
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn displacement_bounded_by_speed(
                h in -3.2f64..3.2, steer in -0.5f64..0.5, speed in -1.5f64..1.5, dt in 1e-4f64..0.5,
            ) {
                let v = VehicleParams::default();
                let p = Pose::new(0.0, 0.0, h);
                let q = step_kinematics(&p, steer, speed, &v, dt).unwrap();
                prop_assert!(p.position().distance(&q.position()) <= speed.abs() * dt + 1e-9);
                prop_assert!(q.heading > -PI && q.heading <= PI);
            }
        }
    }
}
