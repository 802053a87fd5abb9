//! Typed, topic-based publish/subscribe bus with latest-wins (depth 1) slots.
//!
//! Every topic carries exactly one message kind. Subscribers poll; a poll is
//! non-destructive and returns the newest envelope until something newer is
//! published. The bus is `Sync`, so stages running on separate threads can
//! share it behind an `Arc` or a scoped borrow.

use std::collections::HashMap;
use std::fmt;
use std::sync::Mutex;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::camera::BoundingBox;
use crate::detection::{Detection, DetectionDelta};
use crate::navigation::ActionCommand;
use crate::servo::ServoSetting;

pub const CAMERA_FRAME: &str = "camera/frame";
pub const DETECTION_BOX: &str = "detection/box";
pub const DETECTION_DELTA: &str = "detection/delta";
pub const NAV_ACTION: &str = "nav/action";
pub const SERVO_SETTING: &str = "servo/setting";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum MessageKind {
    CameraFrame,
    Detection,
    DetectionDelta,
    ActionCommand,
    ServoSetting,
}

impl fmt::Display for MessageKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

/// A simulated camera frame. The simulation carries the ground-truth box
/// instead of pixels.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CameraFrame {
    pub frame: u64,
    pub truth: Option<BoundingBox>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Message {
    CameraFrame(CameraFrame),
    Detection(Detection),
    DetectionDelta(DetectionDelta),
    ActionCommand(ActionCommand),
    ServoSetting(ServoSetting),
}

impl Message {
    pub fn kind(&self) -> MessageKind {
        match self {
            Message::CameraFrame(_) => MessageKind::CameraFrame,
            Message::Detection(_) => MessageKind::Detection,
            Message::DetectionDelta(_) => MessageKind::DetectionDelta,
            Message::ActionCommand(_) => MessageKind::ActionCommand,
            Message::ServoSetting(_) => MessageKind::ServoSetting,
        }
    }
}

macro_rules! message_from {
    ($($variant:ident),*) => {
        $(impl From<$variant> for Message {
            fn from(v: $variant) -> Self {
                Message::$variant(v)
            }
        })*
    };
}

message_from!(CameraFrame, Detection, DetectionDelta, ActionCommand, ServoSetting);

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Envelope {
    pub sequence: u64,
    /// Simulation time in seconds.
    pub timestamp: f64,
    pub payload: Message,
}

#[derive(Debug, Error, PartialEq)]
pub enum BusError {
    #[error("unknown topic `{0}`")]
    UnknownTopic(String),
    #[error("topic `{0}` is already registered")]
    DuplicateTopic(String),
    #[error("topic `{topic}` carries {expected}, got {got}")]
    KindMismatch {
        topic: String,
        expected: MessageKind,
        got: MessageKind,
    },
    #[error("topic `{topic}`: timestamp {got} precedes previous {previous}")]
    TimeWentBackwards { topic: String, previous: f64, got: f64 },
}

#[derive(Debug)]
struct Slot {
    kind: MessageKind,
    sequence: u64,
    latest: Option<Envelope>,
}

#[derive(Debug, Default)]
pub struct Bus {
    topics: HashMap<String, Mutex<Slot>>,
}

impl Bus {
    pub fn new() -> Self {
        Self::default()
    }

    /// A bus with the five pipeline topics registered.
    pub fn pipeline() -> Self {
        let mut bus = Self::new();
        for (name, kind) in [
            (CAMERA_FRAME, MessageKind::CameraFrame),
            (DETECTION_BOX, MessageKind::Detection),
            (DETECTION_DELTA, MessageKind::DetectionDelta),
            (NAV_ACTION, MessageKind::ActionCommand),
            (SERVO_SETTING, MessageKind::ServoSetting),
        ] {
            bus.register(name, kind).expect("pipeline topic names are distinct");
        }
        bus
    }

    pub fn register(&mut self, name: &str, kind: MessageKind) -> Result<(), BusError> {
        if self.topics.contains_key(name) {
            return Err(BusError::DuplicateTopic(name.to_owned()));
        }
        self.topics.insert(
            name.to_owned(),
            Mutex::new(Slot {
                kind,
                sequence: 0,
                latest: None,
            }),
        );
        Ok(())
    }

    pub fn kind_of(&self, topic: &str) -> Result<MessageKind, BusError> {
        Ok(self.slot(topic)?.lock().expect("bus slot poisoned").kind)
    }

    fn slot(&self, topic: &str) -> Result<&Mutex<Slot>, BusError> {
        self.topics
            .get(topic)
            .ok_or_else(|| BusError::UnknownTopic(topic.to_owned()))
    }

    /// Stores `payload` as the topic's latest value and returns its envelope.
    /// Sequence numbers start at 1 and have no gaps.
    pub fn publish(
        &self,
        topic: &str,
        payload: impl Into<Message>,
        now: f64,
    ) -> Result<Envelope, BusError> {
        let payload = payload.into();
        let mut slot = self.slot(topic)?.lock().expect("bus slot poisoned");
        if payload.kind() != slot.kind {
            return Err(BusError::KindMismatch {
                topic: topic.to_owned(),
                expected: slot.kind,
                got: payload.kind(),
            });
        }
        if let Some(prev) = &slot.latest {
            if now < prev.timestamp {
                return Err(BusError::TimeWentBackwards {
                    topic: topic.to_owned(),
                    previous: prev.timestamp,
                    got: now,
                });
            }
        }
        slot.sequence += 1;
        let envelope = Envelope {
            sequence: slot.sequence,
            timestamp: now,
            payload,
        };
        slot.latest = Some(envelope.clone());
        Ok(envelope)
    }

    pub fn poll_latest(&self, topic: &str) -> Result<Option<Envelope>, BusError> {
        Ok(self
            .slot(topic)?
            .lock()
            .expect("bus slot poisoned")
            .latest
            .clone())
    }
}
