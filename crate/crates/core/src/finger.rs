use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Finger {
    Thumb,
    Index,
    Middle,
    Ring,
    Pinky,
}

/// Analog input pin wired to each finger, in the order the glove firmware
/// scans them and writes them onto a frame line.
///
/// This is the only place the pin order lives. Frame slot `i` holds the
/// reading from `CHANNELS[i]`; the simulator and the parser both index
/// through [`Finger::channel`].
pub const CHANNELS: [(Finger, &str); 5] = [
    (Finger::Thumb, "A4"),
    (Finger::Index, "A0"),
    (Finger::Middle, "A1"),
    (Finger::Ring, "A2"),
    (Finger::Pinky, "A3"),
];

pub const FINGERS: [Finger; 5] = [
    CHANNELS[0].0,
    CHANNELS[1].0,
    CHANNELS[2].0,
    CHANNELS[3].0,
    CHANNELS[4].0,
];

impl Finger {
    /// Slot of this finger within a frame.
    pub fn channel(self) -> usize {
        CHANNELS
            .iter()
            .position(|(f, _)| *f == self)
            .expect("every finger has a channel")
    }

    pub fn pin(self) -> &'static str {
        CHANNELS[self.channel()].1
    }

    pub fn name(self) -> &'static str {
        match self {
            Finger::Thumb => "thumb",
            Finger::Index => "index",
            Finger::Middle => "middle",
            Finger::Ring => "ring",
            Finger::Pinky => "pinky",
        }
    }
}

impl fmt::Display for Finger {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Finger {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        FINGERS
            .iter()
            .copied()
            .find(|f| f.name() == s)
            .ok_or_else(|| Error::Argument(format!("unknown finger `{s}`")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Shape {
    Sphere,
    Cylinder,
}

pub const SHAPES: [Shape; 2] = [Shape::Sphere, Shape::Cylinder];

impl Shape {
    pub fn name(self) -> &'static str {
        match self {
            Shape::Sphere => "sphere",
            Shape::Cylinder => "cylinder",
        }
    }
}

impl fmt::Display for Shape {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Shape {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "sphere" => Ok(Shape::Sphere),
            "cylinder" => Ok(Shape::Cylinder),
            _ => Err(Error::Argument(format!("unknown shape `{s}`"))),
        }
    }
}
