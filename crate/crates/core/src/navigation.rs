//! Bracket-based navigation: each detection delta selects one of nine
//! discrete (steering, throttle) cases.
//!
//! Case layout, rows by throttle and columns by the x bracket of the delta:
//!
//! ```text
//!             LEFT   CENTER  RIGHT
//! forward       1       2      3     steer left / none / right
//! hold          4       5      6     steer left / none / right
//! back          7       8      9     steer right / none / left (mirrored)
//! ```
//!
//! Reversing mirrors the steering so the tail swings away from the side the
//! target drifted to.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::detection::DetectionDelta;

#[derive(Debug, Error, PartialEq)]
pub enum NavigationError {
    #[error("bracket threshold `{name}` must lie in (0, 1), got {value}")]
    Threshold { name: &'static str, value: f64 },
    #[error("action magnitude `{name}` must lie in (0, 1], got {value}")]
    Magnitude { name: &'static str, value: f64 },
    #[error("case id must be 1..=9, got {0}")]
    CaseId(u8),
    #[error("hysteresis must be at least 1")]
    Hysteresis,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BracketConfig {
    pub x_thr: f64,
    pub y_fwd_thr: f64,
    pub y_rev_thr: f64,
}

impl Default for BracketConfig {
    fn default() -> Self {
        Self {
            x_thr: 0.15,
            y_fwd_thr: 0.10,
            y_rev_thr: 0.10,
        }
    }
}

impl BracketConfig {
    pub fn validate(&self) -> Result<(), NavigationError> {
        for (name, value) in [
            ("x_thr", self.x_thr),
            ("y_fwd_thr", self.y_fwd_thr),
            ("y_rev_thr", self.y_rev_thr),
        ] {
            if !(value > 0.0 && value < 1.0) {
                return Err(NavigationError::Threshold { name, value });
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ActionTable {
    pub steer_mag: f64,
    pub fwd_throttle: f64,
    pub rev_throttle: f64,
}

impl Default for ActionTable {
    fn default() -> Self {
        Self {
            steer_mag: 0.7,
            fwd_throttle: 0.6,
            rev_throttle: 0.5,
        }
    }
}

impl ActionTable {
    pub fn validate(&self) -> Result<(), NavigationError> {
        for (name, value) in [
            ("steer_mag", self.steer_mag),
            ("fwd_throttle", self.fwd_throttle),
            ("rev_throttle", self.rev_throttle),
        ] {
            if !(value > 0.0 && value <= 1.0) {
                return Err(NavigationError::Magnitude { name, value });
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum XBracket {
    Left,
    Center,
    Right,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum YBracket {
    Forward,
    Hold,
    Back,
}

/// One of the nine discrete cases, 1..=9.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "u8", into = "u8")]
pub struct CaseId(u8);

impl CaseId {
    pub const NULL: CaseId = CaseId(5);

    pub fn new(id: u8) -> Result<Self, NavigationError> {
        if (1..=9).contains(&id) {
            Ok(Self(id))
        } else {
            Err(NavigationError::CaseId(id))
        }
    }

    pub fn from_brackets(x: XBracket, y: YBracket) -> Self {
        let row = match y {
            YBracket::Forward => 0,
            YBracket::Hold => 1,
            YBracket::Back => 2,
        };
        let col = match x {
            XBracket::Left => 1,
            XBracket::Center => 2,
            XBracket::Right => 3,
        };
        Self(row * 3 + col)
    }

    pub fn get(self) -> u8 {
        self.0
    }
}

impl TryFrom<u8> for CaseId {
    type Error = NavigationError;

    fn try_from(v: u8) -> Result<Self, Self::Error> {
        CaseId::new(v)
    }
}

impl From<CaseId> for u8 {
    fn from(c: CaseId) -> u8 {
        c.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ActionCommand {
    pub case_id: CaseId,
    /// Positive steers right.
    pub steering: f64,
    /// Positive drives forward.
    pub throttle: f64,
}

impl ActionCommand {
    pub const NULL: ActionCommand = ActionCommand {
        case_id: CaseId::NULL,
        steering: 0.0,
        throttle: 0.0,
    };
}

pub fn x_bracket(delta_x: f64, brackets: &BracketConfig) -> XBracket {
    if delta_x < -brackets.x_thr {
        XBracket::Left
    } else if delta_x > brackets.x_thr {
        XBracket::Right
    } else {
        XBracket::Center
    }
}

/// Box center above the target point means the target is too far.
pub fn y_bracket(delta_y: f64, brackets: &BracketConfig) -> YBracket {
    if delta_y < -brackets.y_fwd_thr {
        YBracket::Forward
    } else if delta_y > brackets.y_rev_thr {
        YBracket::Back
    } else {
        YBracket::Hold
    }
}

pub fn classify_case(delta: &DetectionDelta, brackets: &BracketConfig) -> CaseId {
    if !delta.detected {
        return CaseId::NULL;
    }
    CaseId::from_brackets(
        x_bracket(delta.delta_x, brackets),
        y_bracket(delta.delta_y, brackets),
    )
}

pub fn plan_action(case: CaseId, table: &ActionTable) -> ActionCommand {
    let m = table.steer_mag;
    let steering = match case.get() {
        1 | 4 | 9 => -m,
        3 | 6 | 7 => m,
        _ => 0.0,
    };
    let throttle = match case.get() {
        1..=3 => table.fwd_throttle,
        4..=6 => 0.0,
        _ => -table.rev_throttle,
    };
    ActionCommand {
        case_id: case,
        steering,
        throttle,
    }
}

/// Stateful navigation node: classification plus optional hysteresis.
///
/// With hysteresis `h`, a new case is adopted only once it has been observed
/// on `h` consecutive deltas. Losing the target bypasses hysteresis and stops
/// immediately.
#[derive(Debug, Clone)]
pub struct Navigator {
    pub brackets: BracketConfig,
    pub table: ActionTable,
    hysteresis: u32,
    current: CaseId,
    candidate: CaseId,
    streak: u32,
}

impl Navigator {
    pub fn new(
        brackets: BracketConfig,
        table: ActionTable,
        hysteresis: u32,
    ) -> Result<Self, NavigationError> {
        brackets.validate()?;
        table.validate()?;
        if hysteresis == 0 {
            return Err(NavigationError::Hysteresis);
        }
        Ok(Self {
            brackets,
            table,
            hysteresis,
            current: CaseId::NULL,
            candidate: CaseId::NULL,
            streak: 0,
        })
    }

    pub fn step(&mut self, delta: &DetectionDelta) -> ActionCommand {
        let observed = classify_case(delta, &self.brackets);
        if !delta.detected {
            self.current = CaseId::NULL;
            self.candidate = CaseId::NULL;
            self.streak = 0;
        } else if observed == self.current {
            self.streak = 0;
        } else {
            if observed == self.candidate {
                self.streak += 1;
            } else {
                self.candidate = observed;
                self.streak = 1;
            }
            if self.streak >= self.hysteresis {
                self.current = observed;
                self.streak = 0;
            }
        }
        plan_action(self.current, &self.table)
    }
}

/// Maps a delta stream to an action stream.
pub fn navigate<'a>(
    deltas: impl IntoIterator<Item = &'a DetectionDelta> + 'a,
    navigator: &'a mut Navigator,
) -> impl Iterator<Item = ActionCommand> + 'a {
    deltas.into_iter().map(move |d| navigator.step(d))
}
