//! CSV reports. Every file has a header row and real numbers are written
//! with six decimal places.

use std::collections::BTreeMap;
use std::io::Read;
use std::path::Path;

use crate::classify::{Centroid, Classifier, DiscriminabilityReport, NormalizationContext};
use crate::error::{Error, ParseError, ParseErrorKind, Result};
use crate::finger::{Shape, FINGERS};
use crate::pipeline::{FitRow, StabilitySample, SweepRow};
use crate::session::Diameter;
use crate::stats::CohortTable;

fn f6(v: f64) -> String {
    format!("{v:.6}")
}

fn finger_columns() -> String {
    FINGERS
        .iter()
        .map(|f| f.name())
        .collect::<Vec<_>>()
        .join(",")
}

pub fn sweep_csv(rows: &[SweepRow]) -> String {
    let mut out = String::from("diameter_cm,mean_adc,sem_adc,trials,clean_adc\n");
    for r in rows {
        out.push_str(&format!(
            "{},{},{},{},{}\n",
            r.diameter_cm,
            f6(r.mean_adc),
            f6(r.sem_adc),
            r.trials,
            r.clean_adc
        ));
    }
    out
}

pub fn stability_csv(samples: &[StabilitySample]) -> String {
    let mut out = String::from("sample,t_ms,adc\n");
    for s in samples {
        out.push_str(&format!("{},{},{}\n", s.index, s.t_ms, s.adc));
    }
    out
}

pub fn cohort_csv(table: &CohortTable) -> String {
    let mut out = String::from("shape,diameter_cm,finger,mean,sem,n\n");
    for (k, c) in table.cells() {
        out.push_str(&format!(
            "{},{},{},{},{},{}\n",
            k.shape,
            f6(k.diameter.cm()),
            k.finger,
            f6(c.stats.mean),
            f6(c.stats.sem),
            c.stats.n
        ));
    }
    out
}

pub fn regression_csv(fits: &[FitRow]) -> String {
    let mut out = String::from("shape,finger,range,slope,intercept,r2,n_points\n");
    for r in fits {
        out.push_str(&format!(
            "{},{},{},{},{},{},{}\n",
            r.shape,
            r.finger,
            r.range.name(),
            f6(r.fit.slope),
            f6(r.fit.intercept),
            f6(r.fit.r2),
            r.fit.n_points
        ));
    }
    out
}

/// One row per finger and one `all` row per shared diameter, then one row
/// per diameter that only one shape covers.
pub fn discriminability_csv(report: &DiscriminabilityReport) -> String {
    let mut out = String::from(
        "diameter_cm,finger,sphere_mean,sphere_sem,cylinder_mean,cylinder_sem,verdict\n",
    );
    let verdict = |sep: bool| if sep { "separated" } else { "overlap" };
    for v in &report.diameters {
        for f in &v.fingers {
            out.push_str(&format!(
                "{},{},{},{},{},{},{}\n",
                f6(v.diameter.cm()),
                f.finger,
                f6(f.sphere.mean),
                f6(f.sphere.sem),
                f6(f.cylinder.mean),
                f6(f.cylinder.sem),
                verdict(f.discriminable)
            ));
        }
        out.push_str(&format!(
            "{},all,,,,,{}\n",
            f6(v.diameter.cm()),
            verdict(v.discriminable)
        ));
    }
    for (shape, d) in &report.not_comparable {
        out.push_str(&format!("{},all,,,,,{}_only\n", f6(d.cm()), shape));
    }
    out
}

/// Centroids plus the normalization context. `kind` is `centroid`,
/// `ctx_min` or `ctx_max`; context rows leave `diameter_cm` empty.
pub fn centroids_csv(centroids: &[Centroid], context: &NormalizationContext) -> String {
    let mut out = format!("kind,shape,diameter_cm,{}\n", finger_columns());
    let row = |kind: &str, shape: Shape, d: String, values: [f64; 5]| {
        let vs: Vec<String> = values.iter().map(|v| f6(*v)).collect();
        format!("{kind},{shape},{d},{}\n", vs.join(","))
    };
    for c in centroids {
        out.push_str(&row("centroid", c.shape, f6(c.diameter.cm()), c.values));
    }
    for shape in crate::finger::SHAPES {
        if let Some(ranges) = context.get(shape) {
            out.push_str(&row("ctx_min", shape, String::new(), ranges.map(|r| r.0)));
            out.push_str(&row("ctx_max", shape, String::new(), ranges.map(|r| r.1)));
        }
    }
    out
}

fn table_error(line: Option<u64>, detail: impl Into<String>) -> Error {
    let e = ParseError::new(ParseErrorKind::MalformedTable, detail);
    match line {
        Some(l) => e.at_line(l as usize).into(),
        None => e.into(),
    }
}

/// Read a centroid file written by [`centroids_csv`].
pub fn read_centroids<R: Read>(source: R) -> Result<Classifier> {
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(source);
    let expected = format!("kind,shape,diameter_cm,{}", finger_columns());
    let header = reader.headers()?.iter().collect::<Vec<_>>().join(",");
    if header != expected {
        return Err(table_error(
            Some(1),
            format!("expected header {expected:?}, got {header:?}"),
        ));
    }

    let mut centroids = Vec::new();
    let mut bounds: BTreeMap<(Shape, bool), [f64; 5]> = BTreeMap::new();
    for record in reader.records() {
        let record = record?;
        let line = record.position().map(|p| p.line());
        let shape: Shape = record[1]
            .parse()
            .map_err(|_| table_error(line, format!("unknown shape {:?}", &record[1])))?;
        let mut values = [0.0; 5];
        for (i, v) in values.iter_mut().enumerate() {
            *v = record[3 + i]
                .parse::<f64>()
                .ok()
                .filter(|x| x.is_finite())
                .ok_or_else(|| table_error(line, format!("bad value {:?}", &record[3 + i])))?;
        }
        match &record[0] {
            "centroid" => {
                let diameter = record[2]
                    .parse::<f64>()
                    .ok()
                    .and_then(|d| Diameter::new(d).ok())
                    .ok_or_else(|| table_error(line, format!("bad diameter {:?}", &record[2])))?;
                centroids.push(Centroid {
                    shape,
                    diameter,
                    values,
                });
            }
            kind @ ("ctx_min" | "ctx_max") => {
                if bounds.insert((shape, kind == "ctx_max"), values).is_some() {
                    return Err(table_error(
                        line,
                        format!("duplicate {kind} row for {shape}"),
                    ));
                }
            }
            other => return Err(table_error(line, format!("unknown row kind {other:?}"))),
        }
    }

    let mut context = NormalizationContext::empty();
    for shape in crate::finger::SHAPES {
        match (bounds.get(&(shape, false)), bounds.get(&(shape, true))) {
            (Some(lo), Some(hi)) => {
                let mut ranges = [(0.0, 0.0); 5];
                for i in 0..5 {
                    ranges[i] = (lo[i], hi[i]);
                }
                context.set(shape, ranges)?;
            }
            (None, None) => {
                if centroids.iter().any(|c| c.shape == shape) {
                    return Err(table_error(
                        None,
                        format!("{shape} centroids have no ctx_min/ctx_max rows"),
                    ));
                }
            }
            _ => {
                return Err(table_error(
                    None,
                    format!("{shape} needs both ctx_min and ctx_max"),
                ))
            }
        }
    }
    Ok(Classifier::new(centroids, context))
}

pub fn read_centroids_file(path: &Path) -> Result<Classifier> {
    read_centroids(std::fs::File::open(path)?)
}
