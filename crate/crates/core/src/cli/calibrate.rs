//! Bracket-threshold calibration from a grid of known target placements.
//!
//! With the vehicle held still, the (noise-free) target is placed at each
//! `lateral x distance` grid cell and the box-center delta is recorded.
//! Thresholds sit halfway to the deltas observed at the reference offsets:
//! `x_thr` from `+-off_center` at the standoff distance, `y_fwd_thr` from the
//! far distance and `y_rev_thr` from the near distance.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::camera::{bbox_center, project_target, CameraIntrinsics, TargetShape};
use crate::detection::{compute_delta, Detection, DetectionDelta, TargetPoint};
use crate::simworld::{Point2, Pose};

#[derive(Debug, Error, PartialEq)]
pub enum CalibrationError {
    #[error("grid spec: {0}")]
    Grid(String),
    #[error("every grid position is outside the field of view")]
    AllSkipped,
    #[error("reference cell (lateral {lateral} m, distance {distance} m) is outside the field of view")]
    ReferenceNotVisible { lateral: f64, distance: f64 },
    #[error("degenerate calibration: `{0}` came out as zero")]
    Degenerate(&'static str),
}

/// Placement grid. Lateral offsets are metres to the vehicle's right.
#[derive(Debug, Clone, PartialEq)]
pub struct GridSpec {
    pub laterals: Vec<f64>,
    pub distances: Vec<f64>,
    pub off_center: f64,
    pub near: f64,
    pub far: f64,
}

impl GridSpec {
    /// Grid around a standoff distance: references at `standoff -+ 0.25 m`
    /// and `0.4 m` to either side.
    pub fn around(standoff: f64) -> Self {
        Self {
            laterals: vec![-0.8, -0.4, 0.0, 0.4, 0.8],
            distances: [-0.5, -0.25, 0.0, 0.25, 0.5].iter().map(|d| standoff + d).collect(),
            off_center: 0.4,
            near: standoff - 0.25,
            far: standoff + 0.25,
        }
    }

    /// Parses `key=v1,v2;key=v` overrides on top of [`GridSpec::around`].
    /// Keys: `lateral`, `distance`, `off_center`, `near`, `far`.
    pub fn parse(text: &str, standoff: f64) -> Result<Self, CalibrationError> {
        let mut g = Self::around(standoff);
        for part in text.split(';').map(str::trim).filter(|p| !p.is_empty()) {
            let (key, values) = part
                .split_once('=')
                .ok_or_else(|| CalibrationError::Grid(format!("`{part}` is not key=values")))?;
            let values: Vec<f64> = values
                .split(',')
                .map(|v| {
                    v.trim()
                        .parse::<f64>()
                        .map_err(|_| CalibrationError::Grid(format!("`{v}` is not a number")))
                })
                .collect::<Result<_, _>>()?;
            let single = |values: &[f64]| match values {
                [v] => Ok(*v),
                _ => Err(CalibrationError::Grid(format!("`{key}` takes a single value"))),
            };
            match key.trim() {
                "lateral" => g.laterals = values,
                "distance" => g.distances = values,
                "off_center" => g.off_center = single(&values)?,
                "near" => g.near = single(&values)?,
                "far" => g.far = single(&values)?,
                other => return Err(CalibrationError::Grid(format!("unknown key `{other}`"))),
            }
        }
        g.validate(standoff)?;
        Ok(g)
    }

    pub fn validate(&self, standoff: f64) -> Result<(), CalibrationError> {
        let bad = |m: &str| Err(CalibrationError::Grid(m.to_owned()));
        if self.laterals.is_empty() || self.distances.is_empty() {
            return bad("grid needs at least one lateral offset and one distance");
        }
        if self.laterals.iter().chain(&self.distances).any(|v| !v.is_finite()) {
            return bad("grid values must be finite");
        }
        if self.distances.iter().any(|d| *d <= 0.0) {
            return bad("distances must be positive");
        }
        if self.off_center.is_nan() || self.off_center <= 0.0 {
            return bad("off_center must be positive");
        }
        if !(self.near > 0.0 && self.near < standoff && standoff < self.far) {
            return bad("need 0 < near < standoff < far");
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Observation {
    pub lateral: f64,
    pub distance: f64,
    /// `None` when the target is outside the field of view.
    pub delta: Option<DetectionDelta>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CalibratedThresholds {
    pub point_cy: f64,
    pub x_thr: f64,
    pub y_fwd_thr: f64,
    pub y_rev_thr: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Calibration {
    pub grid: Vec<Observation>,
    pub thresholds: CalibratedThresholds,
}

#[derive(Serialize)]
struct Fragment {
    target: FragmentTarget,
    nav: FragmentNav,
}

#[derive(Serialize)]
struct FragmentTarget {
    point_cy: f64,
}

#[derive(Serialize)]
struct FragmentNav {
    x_thr: f64,
    y_fwd_thr: f64,
    y_rev_thr: f64,
}

impl Calibration {
    /// TOML fragment that layers onto a scenario config.
    pub fn to_toml_fragment(&self) -> String {
        let t = &self.thresholds;
        let body = toml::to_string(&Fragment {
            target: FragmentTarget { point_cy: t.point_cy },
            nav: FragmentNav {
                x_thr: t.x_thr,
                y_fwd_thr: t.y_fwd_thr,
                y_rev_thr: t.y_rev_thr,
            },
        })
        .expect("fragment serializes");
        let mut out = String::from("# bracket calibration; layer after the scenario config\n");
        for o in &self.grid {
            match o.delta {
                Some(d) => writeln!(
                    out,
                    "# lateral {:+.3} m, distance {:.3} m: dx {:+.4}, dy {:+.4}",
                    o.lateral, o.distance, d.delta_x, d.delta_y
                ),
                None => writeln!(out, "# lateral {:+.3} m, distance {:.3} m: out of view", o.lateral, o.distance),
            }
            .expect("writing to a String");
        }
        out.push_str(&body);
        out
    }
}

/// Box-center `cy` of a target standing straight ahead at `distance`.
pub fn standoff_cy(cam: &CameraIntrinsics, shape: &TargetShape, distance: f64) -> Option<f64> {
    let pose = Pose::new(0.0, 0.0, 0.0);
    project_target(&pose, Point2::new(distance, 0.0), shape, cam).map(|b| bbox_center(&b).1)
}

fn observe(
    pose: &Pose,
    lateral: f64,
    distance: f64,
    shape: &TargetShape,
    cam: &CameraIntrinsics,
    target: &TargetPoint,
) -> Option<DetectionDelta> {
    let (s, c) = pose.heading.sin_cos();
    // right of heading is (sin, -cos)
    let at = Point2::new(pose.x + distance * c + lateral * s, pose.y + distance * s - lateral * c);
    let bbox = project_target(pose, at, shape, cam)?;
    let det = Detection {
        bbox,
        confidence: 1.0,
        inference_time: 0.0,
        frame: 0,
    };
    Some(compute_delta(Some(&det), target))
}

pub fn calibrate(
    grid: &GridSpec,
    pose: &Pose,
    shape: &TargetShape,
    cam: &CameraIntrinsics,
    point_cx: f64,
    standoff: f64,
) -> Result<Calibration, CalibrationError> {
    grid.validate(standoff)?;
    let point_cy = standoff_cy(cam, shape, standoff).ok_or(CalibrationError::ReferenceNotVisible {
        lateral: 0.0,
        distance: standoff,
    })?;
    let target = TargetPoint { cx: point_cx, cy: point_cy };

    let mut cells = Vec::with_capacity(grid.laterals.len() * grid.distances.len());
    for &distance in &grid.distances {
        for &lateral in &grid.laterals {
            cells.push(Observation {
                lateral,
                distance,
                delta: observe(pose, lateral, distance, shape, cam, &target),
            });
        }
    }
    if cells.iter().all(|o| o.delta.is_none()) {
        return Err(CalibrationError::AllSkipped);
    }

    let reference = |lateral: f64, distance: f64| {
        observe(pose, lateral, distance, shape, cam, &target)
            .ok_or(CalibrationError::ReferenceNotVisible { lateral, distance })
    };
    let left = reference(-grid.off_center, standoff)?;
    let right = reference(grid.off_center, standoff)?;
    let near = reference(0.0, grid.near)?;
    let far = reference(0.0, grid.far)?;

    let thresholds = CalibratedThresholds {
        point_cy,
        x_thr: 0.25 * (left.delta_x.abs() + right.delta_x.abs()),
        y_fwd_thr: 0.5 * far.delta_y.abs(),
        y_rev_thr: 0.5 * near.delta_y.abs(),
    };
    for (name, v) in [
        ("x_thr", thresholds.x_thr),
        ("y_fwd_thr", thresholds.y_fwd_thr),
        ("y_rev_thr", thresholds.y_rev_thr),
    ] {
        if !(v > 0.0 && v < 1.0) {
            return Err(CalibrationError::Degenerate(name));
        }
    }
    Ok(Calibration { grid: cells, thresholds })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::navigation::{classify_case, BracketConfig, CaseId};

    fn run(grid: &GridSpec) -> Result<Calibration, CalibrationError> {
        calibrate(
            grid,
            &Pose::default(),
            &TargetShape::default(),
            &CameraIntrinsics::default(),
            0.5,
            2.0,
        )
    }

    #[test]
    fn reference_cells_classify_as_intended() {
        let g = GridSpec::around(2.0);
        let cal = run(&g).unwrap();
        let t = cal.thresholds;
        let b = BracketConfig {
            x_thr: t.x_thr,
            y_fwd_thr: t.y_fwd_thr,
            y_rev_thr: t.y_rev_thr,
        };
        let target = TargetPoint { cx: 0.5, cy: t.point_cy };
        let cam = CameraIntrinsics::default();
        let shape = TargetShape::default();
        let pose = Pose::default();
        let case = |lat, dist| classify_case(&observe(&pose, lat, dist, &shape, &cam, &target).unwrap(), &b);
        assert_eq!(case(0.0, 2.0), CaseId::NULL);
        assert_eq!(case(0.0, g.far).get(), 2);
        assert_eq!(case(0.0, g.near).get(), 8);
        assert_eq!(case(g.off_center, 2.0).get(), 6);
        assert_eq!(case(-g.off_center, 2.0).get(), 4);
    }

    #[test]
    fn standoff_point_has_zero_delta() {
        let cal = run(&GridSpec::around(2.0)).unwrap();
        let centre = cal
            .grid
            .iter()
            .find(|o| o.lateral == 0.0 && o.distance == 2.0)
            .and_then(|o| o.delta)
            .unwrap();
        assert!(centre.delta_x.abs() < 1e-12 && centre.delta_y.abs() < 1e-12);
    }

    #[test]
    fn out_of_view_cells_are_skipped() {
        let mut g = GridSpec::around(2.0);
        g.laterals.push(50.0);
        let cal = run(&g).unwrap();
        assert!(cal.grid.iter().any(|o| o.lateral == 50.0 && o.delta.is_none()));
        g.laterals = vec![50.0];
        assert_eq!(run(&g), Err(CalibrationError::AllSkipped));
        let mut g = GridSpec::around(2.0);
        g.off_center = 50.0;
        assert!(matches!(run(&g), Err(CalibrationError::ReferenceNotVisible { .. })));
    }

    #[test]
    fn grid_spec_parsing() {
        let g = GridSpec::parse("lateral=-1,0,1; distance=1.5,2.5; near=1.8", 2.0).unwrap();
        assert_eq!(g.laterals, vec![-1.0, 0.0, 1.0]);
        assert_eq!(g.distances, vec![1.5, 2.5]);
        assert_eq!(g.near, 1.8);
        assert_eq!(g.far, 2.25);
        assert!(GridSpec::parse("near=2.1", 2.0).is_err());
        assert!(GridSpec::parse("wat=1", 2.0).is_err());
        assert!(GridSpec::parse("lateral=a", 2.0).is_err());
        assert!(GridSpec::parse("off_center=1,2", 2.0).is_err());
    }

    #[test]
    fn fragment_is_valid_toml_with_the_thresholds() {
        let cal = run(&GridSpec::around(2.0)).unwrap();
        let table: toml::Table = toml::from_str(&cal.to_toml_fragment()).unwrap();
        assert_eq!(table["nav"]["x_thr"].as_float(), Some(cal.thresholds.x_thr));
        assert_eq!(table["target"]["point_cy"].as_float(), Some(cal.thresholds.point_cy));
    }
}
