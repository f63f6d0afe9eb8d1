//! Recorded grasp data shared by the simulator, the file format and the
//! analysis: frames, sessions and the object being held.

use std::cmp::Ordering;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::finger::{Finger, Shape};

/// Largest count a 10-bit converter can report.
pub const ADC_MAX: u16 = 1023;
pub const DEFAULT_PERIOD_MS: u32 = 50;
pub const SESSION_DURATION_MS: u32 = 5000;
/// Frames in a session recorded at the default period.
pub const FRAMES_PER_SESSION: usize = (SESSION_DURATION_MS / DEFAULT_PERIOD_MS) as usize;

/// Object diameter in centimetres, totally ordered so it can key maps.
///
/// Only finite values can be constructed.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct Diameter(f64);

impl Diameter {
    pub fn new(cm: f64) -> Result<Self> {
        if cm.is_finite() && cm > 0.0 {
            Ok(Self(cm))
        } else {
            Err(Error::Argument(format!(
                "diameter must be finite and > 0, got {cm}"
            )))
        }
    }

    pub fn cm(self) -> f64 {
        self.0
    }
}

impl TryFrom<f64> for Diameter {
    type Error = Error;

    fn try_from(v: f64) -> Result<Self> {
        Diameter::new(v)
    }
}

impl From<Diameter> for f64 {
    fn from(d: Diameter) -> f64 {
        d.0
    }
}

impl Eq for Diameter {}

impl PartialOrd for Diameter {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Diameter {
    fn cmp(&self, other: &Self) -> Ordering {
        self.0.total_cmp(&other.0)
    }
}

impl fmt::Display for Diameter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct GraspObject {
    pub shape: Shape,
    pub diameter: Diameter,
}

impl GraspObject {
    pub fn new(shape: Shape, diameter_cm: f64) -> Result<Self> {
        Ok(Self {
            shape,
            diameter: Diameter::new(diameter_cm)?,
        })
    }

    /// Objects outside the 6–16 cm range the default profiles were tuned on.
    pub fn is_extrapolated(&self) -> bool {
        !(6.0..=16.0).contains(&self.diameter.cm())
    }
}

/// One simultaneous reading of all five sensors.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Frame {
    /// Milliseconds since the start of the session.
    pub t_ms: u32,
    /// Counts in frame slot order (see [`crate::finger::CHANNELS`]).
    pub adc: [u16; 5],
}

impl Frame {
    pub fn reading(&self, finger: Finger) -> u16 {
        self.adc[finger.channel()]
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GraspSession {
    pub user_id: String,
    pub object: GraspObject,
    pub sample_period_ms: u32,
    pub frames: Vec<Frame>,
}

impl GraspSession {
    /// Frame count a complete recording at this period should have.
    pub fn expected_frames(&self) -> usize {
        SESSION_DURATION_MS
            .checked_div(self.sample_period_ms)
            .unwrap_or(0) as usize
    }

    pub fn duration_ms(&self) -> u32 {
        self.frames.len() as u32 * self.sample_period_ms
    }
}
