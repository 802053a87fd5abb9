//! Pinhole camera mounted on the follower.
//!
//! The followed person is an upright rectangle standing on the ground plane,
//! turned to face the camera. Projection clips the rectangle against the near
//! plane, projects it, clips the image polygon to the unit square, and returns
//! the bounding box in normalized coordinates (x right, y down).

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::simworld::{Point2, Pose};

/// Depth (metres) below which rectangle geometry is clipped away.
const NEAR_PLANE: f64 = 1e-6;

#[derive(Debug, Error, PartialEq)]
pub enum CameraError {
    #[error("horizontal field of view must lie in (0, pi), got {0}")]
    FieldOfView(f64),
    #[error("aspect ratio must be positive, got {0}")]
    Aspect(f64),
    #[error("mount height must be positive, got {0}")]
    MountHeight(f64),
    #[error("mount pitch must lie in (-pi/2, pi/2), got {0}")]
    Pitch(f64),
    #[error("minimum box area must lie in [0, 1), got {0}")]
    MinArea(f64),
    #[error("target height and width must be positive, got {height} x {width}")]
    TargetShape { height: f64, width: f64 },
    #[error("invalid bounding box ({0}, {1}, {2}, {3})")]
    Box(f64, f64, f64, f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CameraIntrinsics {
    /// Horizontal field of view, radians.
    pub hfov: f64,
    /// Image width / height.
    pub aspect: f64,
    /// Lens height above the ground, metres.
    pub mount_height: f64,
    /// Downward tilt of the optical axis, radians. Zero is level.
    pub pitch: f64,
    /// Boxes whose clipped area (fraction of the frame) does not exceed this
    /// are treated as not visible.
    pub min_box_area: f64,
}

impl Default for CameraIntrinsics {
    fn default() -> Self {
        Self {
            hfov: 120f64.to_radians(),
            aspect: 4.0 / 3.0,
            mount_height: 0.15,
            pitch: 40f64.to_radians(),
            min_box_area: 1e-4,
        }
    }
}

impl CameraIntrinsics {
    pub fn validate(&self) -> Result<(), CameraError> {
        if !(self.hfov > 0.0 && self.hfov < std::f64::consts::PI) {
            return Err(CameraError::FieldOfView(self.hfov));
        }
        if !(self.aspect > 0.0 && self.aspect.is_finite()) {
            return Err(CameraError::Aspect(self.aspect));
        }
        if !(self.mount_height > 0.0 && self.mount_height.is_finite()) {
            return Err(CameraError::MountHeight(self.mount_height));
        }
        if self.pitch.is_nan() || self.pitch.abs() >= std::f64::consts::FRAC_PI_2 {
            return Err(CameraError::Pitch(self.pitch));
        }
        if !(0.0..1.0).contains(&self.min_box_area) {
            return Err(CameraError::MinArea(self.min_box_area));
        }
        Ok(())
    }

    fn half_width_tan(&self) -> f64 {
        (self.hfov / 2.0).tan()
    }

    fn half_height_tan(&self) -> f64 {
        self.half_width_tan() / self.aspect
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TargetShape {
    pub height: f64,
    pub width: f64,
}

impl Default for TargetShape {
    fn default() -> Self {
        Self {
            height: 1.7,
            width: 0.5,
        }
    }
}

impl TargetShape {
    pub fn validate(&self) -> Result<(), CameraError> {
        if self.height > 0.0 && self.width > 0.0 && self.height.is_finite() && self.width.is_finite()
        {
            Ok(())
        } else {
            Err(CameraError::TargetShape {
                height: self.height,
                width: self.width,
            })
        }
    }
}

/// Normalized image rectangle, `0 <= x_min < x_max <= 1`, same for y.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundingBox {
    pub x_min: f64,
    pub y_min: f64,
    pub x_max: f64,
    pub y_max: f64,
}

impl BoundingBox {
    pub fn new(x_min: f64, y_min: f64, x_max: f64, y_max: f64) -> Result<Self, CameraError> {
        let ok = 0.0 <= x_min && x_min < x_max && x_max <= 1.0 && 0.0 <= y_min && y_min < y_max && y_max <= 1.0;
        if ok {
            Ok(Self {
                x_min,
                y_min,
                x_max,
                y_max,
            })
        } else {
            Err(CameraError::Box(x_min, y_min, x_max, y_max))
        }
    }

    /// Clips an arbitrary rectangle to the unit square; `None` when nothing
    /// with positive area remains.
    pub fn clipped(x_min: f64, y_min: f64, x_max: f64, y_max: f64) -> Option<Self> {
        Self::new(
            x_min.clamp(0.0, 1.0),
            y_min.clamp(0.0, 1.0),
            x_max.clamp(0.0, 1.0),
            y_max.clamp(0.0, 1.0),
        )
        .ok()
    }

    pub fn width(&self) -> f64 {
        self.x_max - self.x_min
    }

    pub fn height(&self) -> f64 {
        self.y_max - self.y_min
    }

    pub fn area(&self) -> f64 {
        self.width() * self.height()
    }

    pub fn center(&self) -> (f64, f64) {
        bbox_center(self)
    }
}

pub fn bbox_center(b: &BoundingBox) -> (f64, f64) {
    ((b.x_min + b.x_max) / 2.0, (b.y_min + b.y_max) / 2.0)
}

#[derive(Debug, Clone, Copy)]
struct Vec3 {
    x: f64,
    y: f64,
    z: f64,
}

impl Vec3 {
    fn dot(self, o: Vec3) -> f64 {
        self.x * o.x + self.y * o.y + self.z * o.z
    }

    fn sub(self, o: Vec3) -> Vec3 {
        Vec3 {
            x: self.x - o.x,
            y: self.y - o.y,
            z: self.z - o.z,
        }
    }
}

/// Camera-frame coordinates: right, down, depth along the optical axis.
#[derive(Debug, Clone, Copy)]
struct CamPoint {
    right: f64,
    down: f64,
    depth: f64,
}

struct CameraFrame {
    origin: Vec3,
    forward: Vec3,
    right: Vec3,
    down: Vec3,
}

impl CameraFrame {
    fn new(pose: &Pose, cam: &CameraIntrinsics) -> Self {
        let (sh, ch) = pose.heading.sin_cos();
        let (sp, cp) = cam.pitch.sin_cos();
        Self {
            origin: Vec3 {
                x: pose.x,
                y: pose.y,
                z: cam.mount_height,
            },
            forward: Vec3 {
                x: ch * cp,
                y: sh * cp,
                z: -sp,
            },
            right: Vec3 {
                x: sh,
                y: -ch,
                z: 0.0,
            },
            down: Vec3 {
                x: -ch * sp,
                y: -sh * sp,
                z: -cp,
            },
        }
    }

    fn to_camera(&self, p: Vec3) -> CamPoint {
        let v = p.sub(self.origin);
        CamPoint {
            right: v.dot(self.right),
            down: v.dot(self.down),
            depth: v.dot(self.forward),
        }
    }
}

/// Keeps the part of a convex polygon with `depth >= NEAR_PLANE`.
fn clip_near(poly: &[CamPoint]) -> Vec<CamPoint> {
    let inside = |p: &CamPoint| p.depth >= NEAR_PLANE;
    let mut out = Vec::with_capacity(poly.len() + 2);
    for (i, cur) in poly.iter().enumerate() {
        let prev = &poly[(i + poly.len() - 1) % poly.len()];
        let lerp = |a: &CamPoint, b: &CamPoint| {
            let s = (NEAR_PLANE - a.depth) / (b.depth - a.depth);
            CamPoint {
                right: a.right + s * (b.right - a.right),
                down: a.down + s * (b.down - a.down),
                depth: NEAR_PLANE,
            }
        };
        match (inside(prev), inside(cur)) {
            (true, true) => out.push(*cur),
            (true, false) => out.push(lerp(prev, cur)),
            (false, true) => {
                out.push(lerp(prev, cur));
                out.push(*cur);
            }
            (false, false) => {}
        }
    }
    out
}

/// Sutherland-Hodgman clip of an image polygon against the unit square.
fn clip_unit_square(poly: Vec<(f64, f64)>) -> Vec<(f64, f64)> {
    // (axis, bound, keep_greater)
    let edges = [(0, 0.0, true), (0, 1.0, false), (1, 0.0, true), (1, 1.0, false)];
    let mut poly = poly;
    for (axis, bound, keep_greater) in edges {
        if poly.is_empty() {
            break;
        }
        let coord = |p: &(f64, f64)| if axis == 0 { p.0 } else { p.1 };
        let inside = |p: &(f64, f64)| {
            if keep_greater {
                coord(p) >= bound
            } else {
                coord(p) <= bound
            }
        };
        let cross = |a: &(f64, f64), b: &(f64, f64)| {
            let s = (bound - coord(a)) / (coord(b) - coord(a));
            let p = (a.0 + s * (b.0 - a.0), a.1 + s * (b.1 - a.1));
            // pin the clipped coordinate exactly onto the edge
            if axis == 0 {
                (bound, p.1)
            } else {
                (p.0, bound)
            }
        };
        let mut out = Vec::with_capacity(poly.len() + 2);
        for (i, cur) in poly.iter().enumerate() {
            let prev = &poly[(i + poly.len() - 1) % poly.len()];
            match (inside(prev), inside(cur)) {
                (true, true) => out.push(*cur),
                (true, false) => out.push(cross(prev, cur)),
                (false, true) => {
                    out.push(cross(prev, cur));
                    out.push(*cur);
                }
                (false, false) => {}
            }
        }
        poly = out;
    }
    poly
}

/// Projects the target standing at `target` into the follower's camera.
///
/// Returns `None` when the target center is not in front of the camera, when
/// nothing of the target lands in the frame, or when the visible box is no
/// larger than `cam.min_box_area`.
pub fn project_target(
    pose: &Pose,
    target: Point2,
    shape: &TargetShape,
    cam: &CameraIntrinsics,
) -> Option<BoundingBox> {
    let frame = CameraFrame::new(pose, cam);
    let center = frame.to_camera(Vec3 {
        x: target.x,
        y: target.y,
        z: shape.height / 2.0,
    });
    if center.depth <= 0.0 {
        return None;
    }

    // Face the camera: the rectangle spans the ground-plane direction
    // perpendicular to the camera-to-target bearing.
    let (bx, by) = (target.x - pose.x, target.y - pose.y);
    let bearing_len = bx.hypot(by);
    let (px, py) = if bearing_len > 0.0 {
        (by / bearing_len, -bx / bearing_len)
    } else {
        (frame.right.x, frame.right.y)
    };
    let half = shape.width / 2.0;
    let corner = |side: f64, z: f64| Vec3 {
        x: target.x + side * half * px,
        y: target.y + side * half * py,
        z,
    };
    let world = [
        corner(-1.0, 0.0),
        corner(1.0, 0.0),
        corner(1.0, shape.height),
        corner(-1.0, shape.height),
    ];
    let cam_poly: Vec<CamPoint> = world.iter().map(|p| frame.to_camera(*p)).collect();
    let visible = clip_near(&cam_poly);
    if visible.len() < 3 {
        return None;
    }

    let sx = 2.0 * cam.half_width_tan();
    let sy = 2.0 * cam.half_height_tan();
    let image: Vec<(f64, f64)> = visible
        .iter()
        .map(|p| (0.5 + p.right / p.depth / sx, 0.5 + p.down / p.depth / sy))
        .collect();
    let clipped = clip_unit_square(image);
    if clipped.len() < 3 {
        return None;
    }
    let (mut x0, mut y0, mut x1, mut y1) = (f64::INFINITY, f64::INFINITY, f64::NEG_INFINITY, f64::NEG_INFINITY);
    for (x, y) in &clipped {
        x0 = x0.min(*x);
        y0 = y0.min(*y);
        x1 = x1.max(*x);
        y1 = y1.max(*y);
    }
    let b = BoundingBox::clipped(x0, y0, x1, y1)?;
    (b.area() > cam.min_box_area).then_some(b)
}
