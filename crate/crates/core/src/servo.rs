//! PWM servo mapping.
//!
//! A command in [-1, 1] becomes a duty-cycle fraction through a piecewise
//! linear map with separate slopes below and above the channel's mid duty.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::navigation::ActionCommand;

#[derive(Debug, Error, PartialEq)]
pub enum ServoError {
    #[error("{channel}: duties must satisfy 0 <= min < mid < max <= 1 (got {min}, {mid}, {max})")]
    Duty {
        channel: &'static str,
        min: f64,
        mid: f64,
        max: f64,
    },
    #[error("polarity must be +1 or -1, got {0}")]
    Polarity(i8),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "i8", into = "i8")]
pub enum Polarity {
    Normal,
    Reversed,
}

impl Polarity {
    pub fn sign(self) -> f64 {
        match self {
            Polarity::Normal => 1.0,
            Polarity::Reversed => -1.0,
        }
    }
}

impl TryFrom<i8> for Polarity {
    type Error = ServoError;

    fn try_from(v: i8) -> Result<Self, Self::Error> {
        match v {
            1 => Ok(Polarity::Normal),
            -1 => Ok(Polarity::Reversed),
            other => Err(ServoError::Polarity(other)),
        }
    }
}

impl From<Polarity> for i8 {
    fn from(p: Polarity) -> i8 {
        match p {
            Polarity::Normal => 1,
            Polarity::Reversed => -1,
        }
    }
}

/// Duty-cycle endpoints for one channel, as fractions of the PWM period.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChannelCalibration {
    pub min: f64,
    pub mid: f64,
    pub max: f64,
    pub polarity: Polarity,
}

impl Default for ChannelCalibration {
    /// 1 / 1.5 / 2 ms pulses on a 20 ms period.
    fn default() -> Self {
        Self {
            min: 0.05,
            mid: 0.075,
            max: 0.10,
            polarity: Polarity::Normal,
        }
    }
}

impl ChannelCalibration {
    pub fn validate(&self, channel: &'static str) -> Result<(), ServoError> {
        let ok = 0.0 <= self.min && self.min < self.mid && self.mid < self.max && self.max <= 1.0;
        if ok {
            Ok(())
        } else {
            Err(ServoError::Duty {
                channel,
                min: self.min,
                mid: self.mid,
                max: self.max,
            })
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct ServoCalibration {
    pub steering: ChannelCalibration,
    pub throttle: ChannelCalibration,
}

impl ServoCalibration {
    pub fn validate(&self) -> Result<(), ServoError> {
        self.steering.validate("servo.steering")?;
        self.throttle.validate("servo.throttle")
    }

    pub fn neutral(&self) -> ServoSetting {
        ServoSetting {
            steering_duty: self.steering.mid,
            throttle_duty: self.throttle.mid,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ServoSetting {
    pub steering_duty: f64,
    pub throttle_duty: f64,
}

impl Default for ServoSetting {
    fn default() -> Self {
        ServoCalibration::default().neutral()
    }
}

pub fn action_to_duty(value: f64, cal: &ChannelCalibration) -> f64 {
    let v = (value * cal.polarity.sign()).clamp(-1.0, 1.0);
    // endpoints and mid are returned verbatim so they are bit-exact
    if v == 0.0 {
        cal.mid
    } else if v == 1.0 {
        cal.max
    } else if v == -1.0 {
        cal.min
    } else if v > 0.0 {
        cal.mid + v * (cal.max - cal.mid)
    } else {
        cal.mid + v * (cal.mid - cal.min)
    }
}

/// Inverse of [`action_to_duty`]; duties outside the calibrated range clamp.
pub fn duty_to_action(duty: f64, cal: &ChannelCalibration) -> f64 {
    let v = if duty >= cal.mid {
        ((duty - cal.mid) / (cal.max - cal.mid)).min(1.0)
    } else {
        ((duty - cal.mid) / (cal.mid - cal.min)).max(-1.0)
    };
    v * cal.polarity.sign()
}

pub fn apply_action(cmd: &ActionCommand, cal: &ServoCalibration) -> ServoSetting {
    ServoSetting {
        steering_duty: action_to_duty(cmd.steering, &cal.steering),
        throttle_duty: action_to_duty(cmd.throttle, &cal.throttle),
    }
}

/// Recovers (steering, throttle) in [-1, 1] from a setting.
pub fn setting_to_action(setting: &ServoSetting, cal: &ServoCalibration) -> (f64, f64) {
    (
        duty_to_action(setting.steering_duty, &cal.steering),
        duty_to_action(setting.throttle_duty, &cal.throttle),
    )
}
