//! End-to-end steps: bench characterization of a single sensor and cohort
//! analysis of grasp sessions.

use std::collections::{BTreeMap, BTreeSet};

use crate::classify::{
    build_centroids, discriminability, Centroid, Classifier, DiscriminabilityReport,
    NormalizationContext,
};
use crate::error::{Error, Result};
use crate::finger::{Finger, Shape, FINGERS, SHAPES};
use crate::seed::{derive_seed, rng_for};
use crate::sensor::SensorConfig;
use crate::session::{Diameter, GraspSession, FRAMES_PER_SESSION};
use crate::stats::{
    collate, linear_fit, mean_of, sem, session_mean, CohortTable, RegressionFit, UserSweep,
};

/// Diameters above this are the "large object" subrange.
pub const SUBRANGE_ABOVE_CM: f64 = 10.0;

pub const SWEEP_START_CM: u32 = 22;
pub const SWEEP_END_CM: u32 = 5;
pub const SWEEP_TRIALS: usize = 5;
pub const STABILITY_SAMPLES: usize = 1000;
pub const STABILITY_DIAMETER_CM: f64 = 12.0;
pub const STABILITY_PERIOD_MS: u32 = 480;

const SWEEP_STREAM: u64 = 0x5357;
const STABILITY_STREAM: u64 = 0x5354;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepRow {
    pub diameter_cm: u32,
    pub mean_adc: f64,
    pub sem_adc: f64,
    pub trials: usize,
    pub clean_adc: u16,
}

/// Ring sweep from 22 cm down to 5 cm. Each trial is one 100-sample noisy
/// capture; a row reports the mean and SEM of the trial means.
pub fn ring_sweep(sensor: &SensorConfig, seed: u64) -> Result<Vec<SweepRow>> {
    sensor.validate()?;
    (SWEEP_END_CM..=SWEEP_START_CM)
        .rev()
        .map(|cm| {
            let clean = sensor.clean_adc_at_diameter(f64::from(cm))?;
            let trial_means: Vec<f64> = (0..SWEEP_TRIALS)
                .map(|t| {
                    let mut rng =
                        rng_for(derive_seed(seed, &[SWEEP_STREAM, u64::from(cm), t as u64]));
                    let total: u64 = (0..FRAMES_PER_SESSION)
                        .map(|_| u64::from(sensor.sample_with_noise(clean, &mut rng)))
                        .sum();
                    total as f64 / FRAMES_PER_SESSION as f64
                })
                .collect();
            Ok(SweepRow {
                diameter_cm: cm,
                mean_adc: mean_of(&trial_means),
                sem_adc: sem(&trial_means)?,
                trials: SWEEP_TRIALS,
                clean_adc: clean,
            })
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct StabilitySample {
    pub index: usize,
    pub t_ms: u32,
    pub adc: u16,
}

/// Long capture at a fixed bend to show the noise floor.
pub fn stability_trace(sensor: &SensorConfig, seed: u64) -> Result<Vec<StabilitySample>> {
    sensor.validate()?;
    let clean = sensor.clean_adc_at_diameter(STABILITY_DIAMETER_CM)?;
    let mut rng = rng_for(derive_seed(seed, &[STABILITY_STREAM]));
    Ok((0..STABILITY_SAMPLES)
        .map(|i| StabilitySample {
            index: i,
            t_ms: i as u32 * STABILITY_PERIOD_MS,
            adc: sensor.sample_with_noise(clean, &mut rng),
        })
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum FitRange {
    Full,
    AboveSubrange,
}

impl FitRange {
    pub fn name(self) -> &'static str {
        match self {
            FitRange::Full => "full",
            FitRange::AboveSubrange => "gt10",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FitRow {
    pub shape: Shape,
    pub finger: Finger,
    pub range: FitRange,
    pub fit: RegressionFit,
}

/// Raw per-user sweeps: one entry per (user, shape, finger) holding the
/// session mean at each diameter.
pub fn raw_sweeps(sessions: &[GraspSession]) -> Result<Vec<UserSweep>> {
    let mut grouped: BTreeMap<(String, Shape, Finger), BTreeMap<Diameter, f64>> = BTreeMap::new();
    let mut seen = BTreeSet::new();
    for s in sessions {
        let key = (s.user_id.clone(), s.object.shape, s.object.diameter);
        if !seen.insert(key) {
            return Err(Error::Precondition(format!(
                "user {} has more than one {} {} cm session",
                s.user_id, s.object.shape, s.object.diameter
            )));
        }
        for finger in FINGERS {
            let m = session_mean(s, finger)?;
            grouped
                .entry((s.user_id.clone(), s.object.shape, finger))
                .or_default()
                .insert(s.object.diameter, m);
        }
    }
    Ok(grouped
        .into_iter()
        .map(|((user_id, shape, finger), values)| UserSweep {
            user_id,
            shape,
            finger,
            values,
        })
        .collect())
}

/// Everything derived from a cohort of sessions.
#[derive(Debug, Clone)]
pub struct Analysis {
    pub table: CohortTable,
    pub fits: Vec<FitRow>,
    /// `None` when no diameter was tested with both shapes.
    pub discriminability: Option<DiscriminabilityReport>,
    pub centroids: Vec<Centroid>,
    pub context: NormalizationContext,
}

impl Analysis {
    pub fn fit(&self, shape: Shape, finger: Finger, range: FitRange) -> Option<&RegressionFit> {
        self.fits
            .iter()
            .find(|r| r.shape == shape && r.finger == finger && r.range == range)
            .map(|r| &r.fit)
    }

    pub fn classifier(&self) -> Classifier {
        Classifier::new(self.centroids.clone(), self.context)
    }
}

/// Normalize, collate, fit and compare. Subrange fits are only reported
/// where a shape has at least two diameters above the cut.
pub fn analyze(sessions: &[GraspSession]) -> Result<Analysis> {
    if sessions.is_empty() {
        return Err(Error::Precondition("no sessions to analyze".into()));
    }
    let normalized = raw_sweeps(sessions)?
        .iter()
        .map(UserSweep::normalized)
        .collect::<Result<Vec<_>>>()?;
    let table = collate(&normalized)?;

    let mut fits = Vec::new();
    for shape in SHAPES {
        for finger in FINGERS {
            let full = table.curve(shape, finger, None);
            if full.is_empty() {
                continue;
            }
            fits.push(FitRow {
                shape,
                finger,
                range: FitRange::Full,
                fit: linear_fit(&full)?,
            });
            let sub = table.curve(shape, finger, Some(SUBRANGE_ABOVE_CM));
            if sub.len() >= 2 {
                fits.push(FitRow {
                    shape,
                    finger,
                    range: FitRange::AboveSubrange,
                    fit: linear_fit(&sub)?,
                });
            }
        }
    }

    Ok(Analysis {
        discriminability: match discriminability(&table) {
            Ok(r) => Some(r),
            Err(Error::Precondition(_)) => None,
            Err(e) => return Err(e),
        },
        centroids: build_centroids(&table)?,
        context: NormalizationContext::from_sessions(sessions)?,
        table,
        fits,
    })
}
