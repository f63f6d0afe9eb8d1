//! Shape discriminability at shared diameters and the nearest-centroid
//! classifier.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::finger::{Finger, Shape, FINGERS, SHAPES};
use crate::session::{Diameter, GraspSession};
use crate::stats::{intervals_overlap, session_mean, CohortTable, FingerStats};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FingerVerdict {
    pub finger: Finger,
    pub sphere: FingerStats,
    pub cylinder: FingerStats,
    pub discriminable: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DiameterVerdict {
    pub diameter: Diameter,
    pub fingers: Vec<FingerVerdict>,
    /// True when at least one finger separates the shapes.
    pub discriminable: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DiscriminabilityReport {
    pub diameters: Vec<DiameterVerdict>,
    /// Diameters tested with only one of the two shapes.
    pub not_comparable: Vec<(Shape, Diameter)>,
}

impl DiscriminabilityReport {
    pub fn verdict(&self, diameter: Diameter) -> Option<&DiameterVerdict> {
        self.diameters.iter().find(|v| v.diameter == diameter)
    }

    pub fn non_discriminable(&self) -> Vec<Diameter> {
        self.diameters
            .iter()
            .filter(|v| !v.discriminable)
            .map(|v| v.diameter)
            .collect()
    }
}

/// Compare sphere and cylinder mean ± SEM intervals finger by finger at every
/// diameter both shapes share.
pub fn discriminability(table: &CohortTable) -> Result<DiscriminabilityReport> {
    let spheres = table.diameters(Shape::Sphere);
    let cylinders = table.diameters(Shape::Cylinder);
    let mut not_comparable: Vec<(Shape, Diameter)> = spheres
        .iter()
        .filter(|d| !cylinders.contains(d))
        .map(|&d| (Shape::Sphere, d))
        .collect();
    not_comparable.extend(
        cylinders
            .iter()
            .filter(|d| !spheres.contains(d))
            .map(|&d| (Shape::Cylinder, d)),
    );

    let mut diameters = Vec::new();
    for &d in spheres.iter().filter(|d| cylinders.contains(d)) {
        let fingers: Vec<FingerVerdict> = FINGERS
            .iter()
            .filter_map(|&finger| {
                let s = table.get(Shape::Sphere, d, finger)?.stats;
                let c = table.get(Shape::Cylinder, d, finger)?.stats;
                Some(FingerVerdict {
                    finger,
                    sphere: s,
                    cylinder: c,
                    discriminable: !intervals_overlap(&s, &c),
                })
            })
            .collect();
        let discriminable = fingers.iter().any(|f| f.discriminable);
        diameters.push(DiameterVerdict {
            diameter: d,
            fingers,
            discriminable,
        });
    }
    if diameters.is_empty() {
        return Err(Error::Precondition(
            "no diameter was tested with both shapes".into(),
        ));
    }
    Ok(DiscriminabilityReport {
        diameters,
        not_comparable,
    })
}

/// Normalized five-finger signature of one (shape, diameter).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Centroid {
    pub shape: Shape,
    pub diameter: Diameter,
    pub values: [f64; 5],
}

pub fn build_centroids(table: &CohortTable) -> Result<Vec<Centroid>> {
    let mut out = Vec::new();
    for shape in SHAPES {
        for d in table.diameters(shape) {
            let mut values = [0.0; 5];
            for finger in FINGERS {
                let cell = table.get(shape, d, finger).ok_or_else(|| {
                    Error::Precondition(format!("{shape} {d} cm has no {finger} cell"))
                })?;
                values[finger.channel()] = cell.stats.mean;
            }
            out.push(Centroid {
                shape,
                diameter: d,
                values,
            });
        }
    }
    Ok(out)
}

/// Raw-count range per shape and finger used to place an unseen session on
/// the same scale as the centroids.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NormalizationContext {
    /// `[shape][channel] = (min, max)`; shape index follows [`SHAPES`].
    ranges: [Option<[(f64, f64); 5]>; 2],
}

fn shape_slot(shape: Shape) -> usize {
    match shape {
        Shape::Sphere => 0,
        Shape::Cylinder => 1,
    }
}

impl NormalizationContext {
    pub fn empty() -> Self {
        Self { ranges: [None; 2] }
    }

    pub fn set(&mut self, shape: Shape, ranges: [(f64, f64); 5]) -> Result<()> {
        for (i, &(lo, hi)) in ranges.iter().enumerate() {
            if !(lo.is_finite() && hi.is_finite() && hi > lo) {
                return Err(Error::DegenerateRange(format!(
                    "{shape} {} range [{lo}, {hi}] is empty",
                    FINGERS[i]
                )));
            }
        }
        self.ranges[shape_slot(shape)] = Some(ranges);
        Ok(())
    }

    pub fn get(&self, shape: Shape) -> Option<[(f64, f64); 5]> {
        self.ranges[shape_slot(shape)]
    }

    /// Ranges from cohort-averaged raw session means: for each (shape,
    /// finger), the minimum and maximum over diameters.
    pub fn from_sessions(sessions: &[GraspSession]) -> Result<Self> {
        let mut sums: BTreeMap<(Shape, Diameter), ([f64; 5], usize)> = BTreeMap::new();
        for s in sessions {
            let entry = sums
                .entry((s.object.shape, s.object.diameter))
                .or_insert(([0.0; 5], 0));
            for finger in FINGERS {
                entry.0[finger.channel()] += session_mean(s, finger)?;
            }
            entry.1 += 1;
        }
        let mut ctx = Self::empty();
        for shape in SHAPES {
            let mut ranges = [(f64::INFINITY, f64::NEG_INFINITY); 5];
            let mut seen = 0;
            for (_, (sum, n)) in sums.iter().filter(|((sh, _), _)| *sh == shape) {
                seen += 1;
                for (slot, r) in ranges.iter_mut().enumerate() {
                    let m = sum[slot] / *n as f64;
                    r.0 = r.0.min(m);
                    r.1 = r.1.max(m);
                }
            }
            if seen > 0 {
                ctx.set(shape, ranges)?;
            }
        }
        Ok(ctx)
    }

    pub fn normalize(&self, shape: Shape, raw: &[f64; 5]) -> Option<[f64; 5]> {
        let ranges = self.get(shape)?;
        let mut out = [0.0; 5];
        for (slot, v) in out.iter_mut().enumerate() {
            let (lo, hi) = ranges[slot];
            *v = (raw[slot] - lo) / (hi - lo);
        }
        Some(out)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Classification {
    pub shape: Shape,
    pub diameter: Diameter,
    pub distance: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Classifier {
    pub centroids: Vec<Centroid>,
    pub context: NormalizationContext,
}

fn euclidean(a: &[f64; 5], b: &[f64; 5]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

impl Classifier {
    pub fn new(centroids: Vec<Centroid>, context: NormalizationContext) -> Self {
        Self { centroids, context }
    }

    /// Nearest centroid over both shape hypotheses. Exact distance ties go
    /// to the smaller diameter, then to sphere.
    pub fn classify_means(&self, raw: &[f64; 5]) -> Result<Classification> {
        let mut best: Option<Classification> = None;
        for shape in SHAPES {
            let Some(point) = self.context.normalize(shape, raw) else {
                continue;
            };
            for c in self.centroids.iter().filter(|c| c.shape == shape) {
                let cand = Classification {
                    shape,
                    diameter: c.diameter,
                    distance: euclidean(&point, &c.values),
                };
                let better = match &best {
                    None => true,
                    Some(b) => {
                        (cand.distance, cand.diameter, cand.shape)
                            .partial_cmp(&(b.distance, b.diameter, b.shape))
                            == Some(std::cmp::Ordering::Less)
                    }
                };
                if better {
                    best = Some(cand);
                }
            }
        }
        best.ok_or_else(|| Error::Precondition("classifier has no usable centroids".into()))
    }

    pub fn classify_session(&self, session: &GraspSession) -> Result<Classification> {
        let mut raw = [0.0; 5];
        for finger in FINGERS {
            raw[finger.channel()] = session_mean(session, finger)?;
        }
        self.classify_means(&raw)
    }
}
