//! Session averaging, per-user min-max normalization, cohort collation,
//! standard error of the mean and least-squares line fits.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::finger::{Finger, Shape};
use crate::session::{Diameter, GraspSession};

/// Mean ± SEM of one (shape, diameter, finger) cell over users.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FingerStats {
    pub mean: f64,
    pub sem: f64,
    pub n: usize,
}

impl FingerStats {
    pub fn lower(&self) -> f64 {
        self.mean - self.sem
    }

    pub fn upper(&self) -> f64 {
        self.mean + self.sem
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RegressionFit {
    pub slope: f64,
    pub intercept: f64,
    pub r2: f64,
    pub n_points: usize,
}

/// Mean count of one finger over a complete session.
pub fn session_mean(session: &GraspSession, finger: Finger) -> Result<f64> {
    let expected = session.expected_frames();
    if session.frames.len() != expected || expected == 0 {
        return Err(Error::Precondition(format!(
            "session {} {} {} cm has {} frames, expected {}",
            session.user_id,
            session.object.shape,
            session.object.diameter,
            session.frames.len(),
            expected
        )));
    }
    let slot = finger.channel();
    let total: u64 = session.frames.iter().map(|f| u64::from(f.adc[slot])).sum();
    Ok(total as f64 / session.frames.len() as f64)
}

/// Map one user's sweep onto [0, 1]: the smallest raw mean becomes exactly 0
/// and the largest exactly 1.
pub fn min_max_normalize(values: &BTreeMap<Diameter, f64>) -> Result<BTreeMap<Diameter, f64>> {
    if values.len() < 2 {
        return Err(Error::Precondition(format!(
            "normalization needs at least 2 diameters, got {}",
            values.len()
        )));
    }
    let min = values.values().copied().fold(f64::INFINITY, f64::min);
    let max = values.values().copied().fold(f64::NEG_INFINITY, f64::max);
    if max <= min {
        return Err(Error::DegenerateRange(format!(
            "all values equal {min}; flat sensor or dead channel"
        )));
    }
    let span = max - min;
    Ok(values
        .iter()
        .map(|(&d, &v)| (d, (v - min) / span))
        .collect())
}

pub fn mean_of(values: &[f64]) -> f64 {
    values.iter().sum::<f64>() / values.len() as f64
}

/// Standard error of the mean with the n − 1 sample deviation.
pub fn sem(values: &[f64]) -> Result<f64> {
    let n = values.len();
    if n < 2 {
        return Err(Error::Precondition(format!(
            "SEM needs at least 2 values, got {n}"
        )));
    }
    let m = mean_of(values);
    let ss: f64 = values.iter().map(|v| (v - m) * (v - m)).sum();
    let sd = (ss / (n - 1) as f64).sqrt();
    Ok(sd / (n as f64).sqrt())
}

/// Ordinary least squares `y = slope * x + intercept` with R².
///
/// When every y is identical the line is exact and R² is 1.
pub fn linear_fit(points: &[(f64, f64)]) -> Result<RegressionFit> {
    let n = points.len();
    let first_x = points.first().map(|p| p.0);
    if n < 2 || points.iter().all(|p| Some(p.0) == first_x) {
        return Err(Error::Precondition(
            "line fit needs at least 2 distinct x values".into(),
        ));
    }
    let xs: Vec<f64> = points.iter().map(|p| p.0).collect();
    let ys: Vec<f64> = points.iter().map(|p| p.1).collect();
    if ys.iter().all(|&y| y == ys[0]) {
        return Ok(RegressionFit {
            slope: 0.0,
            intercept: ys[0],
            r2: 1.0,
            n_points: n,
        });
    }
    let mx = mean_of(&xs);
    let my = mean_of(&ys);
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let sxy: f64 = points.iter().map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss_tot: f64 = ys.iter().map(|y| (y - my) * (y - my)).sum();
    let ss_res: f64 = points
        .iter()
        .map(|(x, y)| {
            let r = y - (slope * x + intercept);
            r * r
        })
        .sum();
    let r2 = (1.0 - ss_res / ss_tot).clamp(0.0, 1.0);
    Ok(RegressionFit {
        slope,
        intercept,
        r2,
        n_points: n,
    })
}

/// Closed-interval test on mean ± 1 SEM. Touching endpoints overlap.
pub fn intervals_overlap(a: &FingerStats, b: &FingerStats) -> bool {
    a.lower() <= b.upper() && b.lower() <= a.upper()
}

/// One user's values for one finger across a diameter sweep of one shape.
#[derive(Debug, Clone, PartialEq)]
pub struct UserSweep {
    pub user_id: String,
    pub shape: Shape,
    pub finger: Finger,
    pub values: BTreeMap<Diameter, f64>,
}

impl UserSweep {
    pub fn normalized(&self) -> Result<UserSweep> {
        let values = min_max_normalize(&self.values).map_err(|e| match e {
            Error::DegenerateRange(msg) => Error::DegenerateRange(format!(
                "user {} {} {}: {msg}",
                self.user_id, self.shape, self.finger
            )),
            other => other,
        })?;
        Ok(UserSweep {
            values,
            ..self.clone()
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub struct CellKey {
    pub shape: Shape,
    pub diameter: Diameter,
    pub finger: Finger,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Cell {
    pub stats: FingerStats,
    /// (user id, normalized value) pairs behind the statistics.
    pub values: Vec<(String, f64)>,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct CohortTable {
    cells: BTreeMap<CellKey, Cell>,
}

impl CohortTable {
    pub fn get(&self, shape: Shape, diameter: Diameter, finger: Finger) -> Option<&Cell> {
        self.cells.get(&CellKey {
            shape,
            diameter,
            finger,
        })
    }

    pub fn cells(&self) -> impl Iterator<Item = (&CellKey, &Cell)> {
        self.cells.iter()
    }

    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    pub fn diameters(&self, shape: Shape) -> Vec<Diameter> {
        let mut ds: Vec<Diameter> = self
            .cells
            .keys()
            .filter(|k| k.shape == shape)
            .map(|k| k.diameter)
            .collect();
        ds.dedup();
        ds
    }

    /// Insert a cell directly from summary statistics.
    pub fn insert_stats(&mut self, key: CellKey, stats: FingerStats) {
        self.cells.insert(
            key,
            Cell {
                stats,
                values: Vec::new(),
            },
        );
    }

    /// (diameter, mean) points for one finger and shape, optionally only
    /// diameters strictly above `above_cm`.
    pub fn curve(&self, shape: Shape, finger: Finger, above_cm: Option<f64>) -> Vec<(f64, f64)> {
        self.cells
            .iter()
            .filter(|(k, _)| k.shape == shape && k.finger == finger)
            .filter(|(k, _)| above_cm.is_none_or(|a| k.diameter.cm() > a))
            .map(|(k, c)| (k.diameter.cm(), c.stats.mean))
            .collect()
    }
}

/// Average normalized per-user sweeps into cells. Every cell needs at
/// least two users.
pub fn collate(sweeps: &[UserSweep]) -> Result<CohortTable> {
    let mut grouped: BTreeMap<CellKey, Vec<(String, f64)>> = BTreeMap::new();
    for sweep in sweeps {
        for (&diameter, &v) in &sweep.values {
            if !(0.0..=1.0).contains(&v) {
                return Err(Error::Precondition(format!(
                    "user {} has un-normalized value {v}",
                    sweep.user_id
                )));
            }
            let key = CellKey {
                shape: sweep.shape,
                diameter,
                finger: sweep.finger,
            };
            grouped
                .entry(key)
                .or_default()
                .push((sweep.user_id.clone(), v));
        }
    }
    let mut table = CohortTable::default();
    for (key, values) in grouped {
        let vs: Vec<f64> = values.iter().map(|(_, v)| *v).collect();
        if vs.len() < 2 {
            return Err(Error::Precondition(format!(
                "{} {} cm {} has {} user(s); SEM needs at least 2",
                key.shape,
                key.diameter,
                key.finger,
                vs.len()
            )));
        }
        let stats = FingerStats {
            mean: mean_of(&vs),
            sem: sem(&vs)?,
            n: vs.len(),
        };
        table.cells.insert(key, Cell { stats, values });
    }
    Ok(table)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::finger::FINGERS;
    use crate::session::{Frame, GraspObject};

    fn d(cm: f64) -> Diameter {
        Diameter::new(cm).unwrap()
    }

    fn session_with(values: impl Iterator<Item = u16>) -> GraspSession {
        GraspSession {
            user_id: "u01".into(),
            object: GraspObject::new(Shape::Sphere, 8.0).unwrap(),
            sample_period_ms: 50,
            frames: values
                .enumerate()
                .map(|(i, v)| Frame {
                    t_ms: 50 * i as u32,
                    adc: [v; 5],
                })
                .collect(),
        }
    }

    #[test]
    fn session_mean_examples() {
        let s = session_with(std::iter::repeat_n(512, 100));
        assert_eq!(session_mean(&s, Finger::Ring).unwrap(), 512.0);
        let s = session_with((0..100).map(|i| if i % 2 == 0 { 500 } else { 502 }));
        assert_eq!(session_mean(&s, Finger::Thumb).unwrap(), 501.0);
        let s = session_with(std::iter::repeat_n(512, 99));
        assert!(matches!(
            session_mean(&s, Finger::Thumb),
            Err(Error::Precondition(_))
        ));
    }

    #[test]
    fn normalize_examples() {
        let raw: BTreeMap<_, _> = [(d(6.0), 600.0), (d(11.0), 450.0), (d(16.0), 300.0)].into();
        let n = min_max_normalize(&raw).unwrap();
        assert_eq!(n[&d(6.0)], 1.0);
        assert_eq!(n[&d(11.0)], 0.5);
        assert_eq!(n[&d(16.0)], 0.0);

        let flat: BTreeMap<_, _> = [(d(6.0), 700.0), (d(16.0), 700.0)].into();
        assert!(matches!(
            min_max_normalize(&flat),
            Err(Error::DegenerateRange(_))
        ));

        let one: BTreeMap<_, _> = [(d(6.0), 700.0)].into();
        assert!(matches!(
            min_max_normalize(&one),
            Err(Error::Precondition(_))
        ));
    }

    #[test]
    fn sem_examples() {
        assert_eq!(sem(&[0.5, 0.5, 0.5]).unwrap(), 0.0);
        assert!((sem(&[2.0, 4.0, 6.0]).unwrap() - 2.0 / 3f64.sqrt()).abs() < 1e-12);
        assert!((sem(&[2.0, 4.0, 6.0]).unwrap() - 1.154_700_538_379_251_5).abs() < 1e-12);
        let shifted: Vec<f64> = [2.0, 4.0, 6.0].iter().map(|v| v + 100.0).collect();
        assert!((sem(&shifted).unwrap() - sem(&[2.0, 4.0, 6.0]).unwrap()).abs() < 1e-12);
        assert!(matches!(sem(&[1.0]), Err(Error::Precondition(_))));
        assert!(matches!(sem(&[]), Err(Error::Precondition(_))));
    }

    #[test]
    fn fit_examples() {
        let f = linear_fit(&[(1.0, 1.0), (2.0, 2.0), (3.0, 3.0)]).unwrap();
        assert!((f.slope - 1.0).abs() < 1e-12);
        assert!(f.intercept.abs() < 1e-12);
        assert!((f.r2 - 1.0).abs() < 1e-12);

        let f = linear_fit(&[(0.0, 0.0), (1.0, 1.0), (2.0, 0.0)]).unwrap();
        assert_eq!(f.slope, 0.0);
        assert_eq!(f.r2, 0.0);

        let pts = [(6.0, 0.9), (8.0, 0.7), (10.0, 0.2), (12.0, 0.25)];
        let neg: Vec<_> = pts.iter().map(|&(x, y)| (x, -y)).collect();
        let (a, b) = (linear_fit(&pts).unwrap(), linear_fit(&neg).unwrap());
        assert!((a.slope + b.slope).abs() < 1e-12);
        assert!((a.r2 - b.r2).abs() < 1e-12);

        let flat = linear_fit(&[(1.0, 0.1), (2.0, 0.1), (3.0, 0.1)]).unwrap();
        assert_eq!(flat.r2, 1.0);
        assert_eq!(flat.slope, 0.0);

        assert!(matches!(
            linear_fit(&[(3.0, 1.0), (3.0, 2.0)]),
            Err(Error::Precondition(_))
        ));
        assert!(matches!(
            linear_fit(&[(3.0, 1.0)]),
            Err(Error::Precondition(_))
        ));
    }

    fn st(mean: f64, sem: f64) -> FingerStats {
        FingerStats { mean, sem, n: 2 }
    }

    #[test]
    fn overlap_examples() {
        assert!(!intervals_overlap(&st(0.4, 0.05), &st(0.6, 0.05)));
        // touching at exactly 0.5
        assert!(intervals_overlap(&st(0.25, 0.25), &st(0.75, 0.25)));
        assert!(intervals_overlap(&st(0.4, 0.1), &st(0.6, 0.1)));
        let a = st(0.3, 0.0);
        assert!(intervals_overlap(&a, &a));
    }

    fn sweep(user: &str, values: &[(f64, f64)]) -> UserSweep {
        UserSweep {
            user_id: user.into(),
            shape: Shape::Cylinder,
            finger: Finger::Pinky,
            values: values.iter().map(|&(k, v)| (d(k), v)).collect(),
        }
    }

    #[test]
    fn collate_examples() {
        let t = collate(&[sweep("a", &[(8.0, 0.4)]), sweep("b", &[(8.0, 0.6)])]).unwrap();
        let cell = t.get(Shape::Cylinder, d(8.0), Finger::Pinky).unwrap();
        assert!((cell.stats.mean - 0.5).abs() < 1e-15);
        assert_eq!(cell.stats.n, 2);
        assert_eq!(cell.values.len(), 2);

        let err = collate(&[
            sweep("a", &[(8.0, 0.4), (9.0, 0.1)]),
            sweep("b", &[(8.0, 0.6)]),
        ]);
        assert!(matches!(err, Err(Error::Precondition(_))));

        let err = collate(&[sweep("a", &[(8.0, 1.4)]), sweep("b", &[(8.0, 0.6)])]);
        assert!(matches!(err, Err(Error::Precondition(_))));
    }

    #[test]
    fn curve_filters_by_diameter() {
        let mut t = CohortTable::default();
        for (i, f) in FINGERS.iter().enumerate() {
            for cm in [6.0, 10.0, 11.0, 16.0] {
                let key = CellKey {
                    shape: Shape::Sphere,
                    diameter: d(cm),
                    finger: *f,
                };
                t.insert_stats(key, st(i as f64 / 10.0, 0.01));
            }
        }
        assert_eq!(t.curve(Shape::Sphere, Finger::Ring, None).len(), 4);
        let sub = t.curve(Shape::Sphere, Finger::Ring, Some(10.0));
        assert_eq!(
            sub.iter().map(|p| p.0).collect::<Vec<_>>(),
            vec![11.0, 16.0]
        );
        assert_eq!(t.diameters(Shape::Sphere).len(), 4);
        assert!(t.diameters(Shape::Cylinder).is_empty());
    }
}
