//! Synthetic grasp sessions standing in for a human cohort.
//!
//! Each user has a [`HandProfile`] mapping an object's diameter to the bend
//! diameter each finger's sensor ends up at. The grasp is static, so within
//! a session only the sampling noise varies.

use std::io::Read;
use std::path::Path;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, ParseError, ParseErrorKind, Result};
use crate::finger::{Finger, Shape, FINGERS, SHAPES};
use crate::seed::{derive_seed, rng_for};
use crate::sensor::SensorConfig;
use crate::session::{Frame, GraspObject, GraspSession, DEFAULT_PERIOD_MS, FRAMES_PER_SESSION};

const DEFAULT_PROFILE_CSV: &str = include_str!("../data/default_profile.csv");

const PROFILE_STREAM: u64 = 0x5052_4f46;
const SESSION_STREAM: u64 = 0x5345_5353;

/// How one finger's sensor bends for one grasp type.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FingerMapping {
    pub gain: f64,
    pub offset_cm: f64,
    /// Object diameter past which the finger stops conforming to the object.
    pub contact_limit_cm: Option<f64>,
}

impl FingerMapping {
    pub const IDENTITY: FingerMapping = FingerMapping {
        gain: 1.0,
        offset_cm: 0.0,
        contact_limit_cm: None,
    };

    fn validate(&self) -> Result<()> {
        if !(self.gain.is_finite() && self.gain > 0.0) {
            return Err(Error::Argument(format!(
                "gain must be > 0, got {}",
                self.gain
            )));
        }
        if !self.offset_cm.is_finite() {
            return Err(Error::Argument("offset must be finite".into()));
        }
        if let Some(limit) = self.contact_limit_cm {
            if !(limit.is_finite() && limit > 0.0) {
                return Err(Error::Argument(format!(
                    "contact limit must be > 0, got {limit}"
                )));
            }
        }
        Ok(())
    }

    /// `gain * min(diameter, limit) + offset`, before any sensor clamp.
    pub fn unclamped_bend(&self, object_diameter_cm: f64) -> f64 {
        let conformed = match self.contact_limit_cm {
            Some(limit) => object_diameter_cm.min(limit),
            None => object_diameter_cm,
        };
        self.gain * conformed + self.offset_cm
    }
}

/// Per-finger, per-shape mappings. Indexed by shape then frame slot.
#[derive(Debug, Clone, PartialEq)]
pub struct ProfileTable {
    mappings: [[FingerMapping; 5]; 2],
}

#[derive(Debug, Deserialize, Serialize)]
struct ProfileRow {
    finger: Finger,
    shape: Shape,
    gain: f64,
    offset_cm: f64,
    contact_limit_cm: Option<f64>,
}

fn shape_slot(shape: Shape) -> usize {
    match shape {
        Shape::Sphere => 0,
        Shape::Cylinder => 1,
    }
}

impl ProfileTable {
    pub fn uniform(mapping: FingerMapping) -> Self {
        Self {
            mappings: [[mapping; 5]; 2],
        }
    }

    pub fn get(&self, finger: Finger, shape: Shape) -> FingerMapping {
        self.mappings[shape_slot(shape)][finger.channel()]
    }

    pub fn set(&mut self, finger: Finger, shape: Shape, mapping: FingerMapping) {
        self.mappings[shape_slot(shape)][finger.channel()] = mapping;
    }

    /// Read a profile table from CSV. Every (finger, shape) pair must appear
    /// exactly once; `#` lines are comments.
    pub fn from_reader<R: Read>(reader: R) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new()
            .comment(Some(b'#'))
            .trim(csv::Trim::All)
            .from_reader(reader);
        let mut seen = [[None::<FingerMapping>; 5]; 2];
        for row in rdr.deserialize() {
            let row: ProfileRow = row?;
            let mapping = FingerMapping {
                gain: row.gain,
                offset_cm: row.offset_cm,
                contact_limit_cm: row.contact_limit_cm,
            };
            mapping.validate()?;
            let slot = &mut seen[shape_slot(row.shape)][row.finger.channel()];
            if slot.is_some() {
                return Err(ParseError::new(
                    ParseErrorKind::MalformedTable,
                    format!("duplicate row for {} {}", row.finger, row.shape),
                )
                .into());
            }
            *slot = Some(mapping);
        }
        let mut table = Self::uniform(FingerMapping::IDENTITY);
        for shape in SHAPES {
            for finger in FINGERS {
                let m = seen[shape_slot(shape)][finger.channel()].ok_or_else(|| {
                    ParseError::new(
                        ParseErrorKind::MalformedTable,
                        format!("missing row for {finger} {shape}"),
                    )
                })?;
                table.set(finger, shape, m);
            }
        }
        Ok(table)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_reader(std::fs::File::open(path)?)
    }

    pub fn to_csv(&self) -> String {
        let mut wtr = csv::Writer::from_writer(Vec::new());
        for shape in SHAPES {
            for finger in FINGERS {
                let m = self.get(finger, shape);
                wtr.serialize(ProfileRow {
                    finger,
                    shape,
                    gain: m.gain,
                    offset_cm: m.offset_cm,
                    contact_limit_cm: m.contact_limit_cm,
                })
                .expect("in-memory csv write");
            }
        }
        String::from_utf8(wtr.into_inner().expect("flush")).expect("utf8")
    }
}

impl Default for ProfileTable {
    fn default() -> Self {
        Self::from_reader(DEFAULT_PROFILE_CSV.as_bytes()).expect("bundled profile table parses")
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct HandProfile {
    pub user_id: String,
    pub table: ProfileTable,
}

/// What to do when a mapping asks the sensor to bend tighter than it can.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ClampPolicy {
    /// Pin the bend at the sensor's tightest diameter.
    #[default]
    Clamp,
    /// Report a domain error instead.
    Strict,
}

/// Bend diameter a finger's sensor is held at while grasping `object`.
pub fn finger_bend_diameter(
    object: &GraspObject,
    finger: Finger,
    profile: &HandProfile,
    sensor: &SensorConfig,
    policy: ClampPolicy,
) -> Result<f64> {
    let mapping = profile.table.get(finger, object.shape);
    let bend = mapping.unclamped_bend(object.diameter.cm());
    let tightest = sensor.curve.d_tightest_cm;
    if bend >= tightest {
        return Ok(bend);
    }
    match policy {
        ClampPolicy::Clamp => Ok(tightest),
        ClampPolicy::Strict => Err(Error::Domain(format!(
            "{finger} bend of {bend:.3} cm for {} {} cm is tighter than the sensor limit",
            object.shape, object.diameter
        ))),
    }
}

/// Spread of per-user hand geometry around the default table.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Jitter {
    /// Gains are scaled by a factor uniform in `1 ± gain_frac`.
    pub gain_frac: f64,
    /// Offsets are shifted by an amount uniform in `± offset_cm`.
    pub offset_cm: f64,
}

impl Default for Jitter {
    fn default() -> Self {
        Self {
            gain_frac: 0.10,
            offset_cm: 0.5,
        }
    }
}

impl Jitter {
    pub const NONE: Jitter = Jitter {
        gain_frac: 0.0,
        offset_cm: 0.0,
    };
}

pub fn default_diameters(shape: Shape) -> Vec<f64> {
    match shape {
        Shape::Sphere => (6..=16).map(f64::from).collect(),
        // no 10 cm cylinder in the reference object set
        Shape::Cylinder => (6..=16).filter(|&d| d != 10).map(f64::from).collect(),
    }
}

pub fn default_users(shape: Shape) -> usize {
    match shape {
        Shape::Sphere => 11,
        Shape::Cylinder => 8,
    }
}

pub fn user_id(index: usize) -> String {
    format!("u{:02}", index + 1)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Simulator {
    pub sensor: SensorConfig,
    pub table: ProfileTable,
    pub jitter: Jitter,
    pub clamp: ClampPolicy,
}

impl Default for Simulator {
    fn default() -> Self {
        Self {
            sensor: SensorConfig::default(),
            table: ProfileTable::default(),
            jitter: Jitter::default(),
            clamp: ClampPolicy::Clamp,
        }
    }
}

impl Simulator {
    /// Profile for the `index`-th user drawn from `base_seed`. Depends only on
    /// the seed and index, so the same user appears in every cohort built
    /// from that seed.
    pub fn hand_profile(&self, base_seed: u64, index: usize) -> HandProfile {
        let mut rng = rng_for(derive_seed(base_seed, &[PROFILE_STREAM, index as u64]));
        let mut table = self.table.clone();
        for shape in SHAPES {
            for finger in FINGERS {
                let mut m = self.table.get(finger, shape);
                let g = self.jitter.gain_frac;
                let o = self.jitter.offset_cm;
                m.gain *= 1.0 + rng.gen_range(-g..=g);
                m.offset_cm += rng.gen_range(-o..=o);
                table.set(finger, shape, m);
            }
        }
        HandProfile {
            user_id: user_id(index),
            table,
        }
    }

    /// Noise-free counts for the five fingers.
    pub fn clean_counts(&self, object: &GraspObject, profile: &HandProfile) -> Result<[u16; 5]> {
        let mut clean = [0u16; 5];
        for finger in FINGERS {
            let bend = finger_bend_diameter(object, finger, profile, &self.sensor, self.clamp)?;
            clean[finger.channel()] = self.sensor.clean_adc_at_diameter(bend)?;
        }
        Ok(clean)
    }

    /// 100 frames at 50 ms of a static grasp.
    pub fn simulate_session(
        &self,
        object: &GraspObject,
        profile: &HandProfile,
        seed: u64,
    ) -> Result<GraspSession> {
        let clean = self.clean_counts(object, profile)?;
        let mut rng = rng_for(seed);
        let frames = (0..FRAMES_PER_SESSION)
            .map(|i| {
                let mut adc = [0u16; 5];
                for (slot, &c) in adc.iter_mut().zip(clean.iter()) {
                    *slot = self.sensor.sample_with_noise(c, &mut rng);
                }
                Frame {
                    t_ms: i as u32 * DEFAULT_PERIOD_MS,
                    adc,
                }
            })
            .collect();
        Ok(GraspSession {
            user_id: profile.user_id.clone(),
            object: *object,
            sample_period_ms: DEFAULT_PERIOD_MS,
            frames,
        })
    }

    pub fn session_seed(base_seed: u64, user_index: usize, object: &GraspObject) -> u64 {
        derive_seed(
            base_seed,
            &[
                SESSION_STREAM,
                user_index as u64,
                shape_slot(object.shape) as u64,
                object.diameter.cm().to_bits(),
            ],
        )
    }

    /// One session per (user, object), users in order, objects in the given
    /// order within each user.
    pub fn simulate_cohort(
        &self,
        objects: &[GraspObject],
        n_users: usize,
        base_seed: u64,
    ) -> Result<Vec<GraspSession>> {
        if objects.is_empty() {
            return Err(Error::Argument("cohort needs at least one object".into()));
        }
        if n_users == 0 {
            return Err(Error::Argument("cohort needs at least one user".into()));
        }
        let profiles: Vec<HandProfile> = (0..n_users)
            .map(|u| self.hand_profile(base_seed, u))
            .collect();
        let jobs: Vec<(usize, &GraspObject)> = (0..n_users)
            .flat_map(|u| objects.iter().map(move |o| (u, o)))
            .collect();
        jobs.par_iter()
            .map(|&(u, object)| {
                let seed = Self::session_seed(base_seed, u, object);
                self.simulate_session(object, &profiles[u], seed)
            })
            .collect()
    }
}

/// Cohort sizes and object sets for both grasp types.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CohortPlan {
    pub users_sphere: usize,
    pub users_cylinder: usize,
    pub sphere_diameters: Vec<f64>,
    pub cylinder_diameters: Vec<f64>,
}

impl Default for CohortPlan {
    fn default() -> Self {
        Self {
            users_sphere: default_users(Shape::Sphere),
            users_cylinder: default_users(Shape::Cylinder),
            sphere_diameters: default_diameters(Shape::Sphere),
            cylinder_diameters: default_diameters(Shape::Cylinder),
        }
    }
}

impl CohortPlan {
    pub fn objects(&self, shape: Shape) -> Result<Vec<GraspObject>> {
        let ds = match shape {
            Shape::Sphere => &self.sphere_diameters,
            Shape::Cylinder => &self.cylinder_diameters,
        };
        ds.iter().map(|&d| GraspObject::new(shape, d)).collect()
    }

    pub fn users(&self, shape: Shape) -> usize {
        match shape {
            Shape::Sphere => self.users_sphere,
            Shape::Cylinder => self.users_cylinder,
        }
    }

    /// Sphere sessions followed by cylinder sessions.
    pub fn simulate(&self, sim: &Simulator, base_seed: u64) -> Result<Vec<GraspSession>> {
        let mut out = Vec::new();
        for shape in SHAPES {
            let objects = self.objects(shape)?;
            out.extend(sim.simulate_cohort(&objects, self.users(shape), base_seed)?);
        }
        Ok(out)
    }
}
