//! Frame-line wire protocol and the on-disk session format.
//!
//! A session file is a five-line header followed by one frame per line:
//!
//! ```text
//! # schema=1
//! # user=u03
//! # shape=sphere
//! # diameter_cm=8
//! # period_ms=50
//! 0,612,598,540,577,623
//! 50,613,598,541,576,622
//! ```
//!
//! Frame fields are `<t_ms>,<thumb>,<index>,<middle>,<ring>,<pinky>` in
//! ASCII decimal with no padding; every line ends in `\n`. A live capture
//! is the frame lines alone.

use std::io::{BufRead, BufReader, Read, Write};
use std::path::Path;

use crate::error::{Error, ParseError, ParseErrorKind, Result};
use crate::finger::Shape;
use crate::session::{Diameter, Frame, GraspObject, GraspSession, ADC_MAX};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq)]
pub struct SessionHeader {
    pub schema_version: u32,
    pub user_id: String,
    pub shape: Shape,
    pub diameter: Diameter,
    pub sample_period_ms: u32,
}

impl SessionHeader {
    pub fn of(session: &GraspSession) -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            user_id: session.user_id.clone(),
            shape: session.object.shape,
            diameter: session.object.diameter,
            sample_period_ms: session.sample_period_ms,
        }
    }
}

fn malformed(detail: impl Into<String>) -> ParseError {
    ParseError::new(ParseErrorKind::MalformedFrame, detail)
}

fn digits(field: &str) -> Option<&str> {
    (!field.is_empty() && field.bytes().all(|b| b.is_ascii_digit())).then_some(field)
}

/// Parse one frame line. A single trailing `\n` (or `\r\n`) is ignored.
pub fn parse_frame(line: &str) -> std::result::Result<Frame, ParseError> {
    let line = line.strip_suffix('\n').unwrap_or(line);
    let line = line.strip_suffix('\r').unwrap_or(line);
    let fields: Vec<&str> = line.split(',').collect();
    if fields.len() != 6 {
        return Err(malformed(format!(
            "expected 6 fields, found {}",
            fields.len()
        )));
    }
    let mut numeric = [""; 6];
    for (i, f) in fields.iter().enumerate() {
        numeric[i] = digits(f).ok_or_else(|| {
            malformed(format!(
                "field {} is not a non-negative integer: {f:?}",
                i + 1
            ))
        })?;
    }
    let t_ms: u32 = numeric[0]
        .parse()
        .map_err(|_| malformed(format!("timestamp {} does not fit in 32 bits", numeric[0])))?;
    let mut adc = [0u16; 5];
    for (slot, text) in adc.iter_mut().zip(&numeric[1..]) {
        // all-digit strings only fail to parse on overflow, which is out of range too
        let value = text.parse::<u64>().unwrap_or(u64::MAX);
        if value > u64::from(ADC_MAX) {
            return Err(ParseError::new(
                ParseErrorKind::RangeViolation,
                format!("count {text} exceeds {ADC_MAX}"),
            ));
        }
        *slot = value as u16;
    }
    Ok(Frame { t_ms, adc })
}

pub fn format_frame(frame: &Frame) -> String {
    let a = frame.adc;
    format!(
        "{},{},{},{},{},{}",
        frame.t_ms, a[0], a[1], a[2], a[3], a[4]
    )
}

fn header_value<'a>(
    line: Option<&'a str>,
    key: &str,
    lineno: usize,
) -> std::result::Result<&'a str, ParseError> {
    let prefix = format!("# {key}=");
    let line = line.ok_or_else(|| {
        ParseError::new(
            ParseErrorKind::MalformedHeader,
            format!("missing `{prefix}` line"),
        )
        .at_line(lineno)
    })?;
    let value = line.strip_prefix(&prefix).ok_or_else(|| {
        ParseError::new(
            ParseErrorKind::MalformedHeader,
            format!("expected `{prefix}...`, found {line:?}"),
        )
        .at_line(lineno)
    })?;
    if value.is_empty() {
        return Err(
            ParseError::new(ParseErrorKind::MalformedHeader, format!("empty `{key}`"))
                .at_line(lineno),
        );
    }
    Ok(value)
}

fn header_error(detail: String, lineno: usize) -> Error {
    ParseError::new(ParseErrorKind::MalformedHeader, detail)
        .at_line(lineno)
        .into()
}

/// Read and validate a session. Frame timestamps must strictly increase.
pub fn read_session<R: Read>(source: R) -> Result<GraspSession> {
    let mut lines = BufReader::new(source).lines();
    let next = |lines: &mut std::io::Lines<BufReader<R>>| -> Result<Option<String>> {
        lines.next().transpose().map_err(Error::from)
    };

    let l1 = next(&mut lines)?;
    let schema = header_value(l1.as_deref(), "schema", 1)?;
    let schema_version: u32 = schema
        .parse()
        .map_err(|_| header_error(format!("schema version {schema:?} is not an integer"), 1))?;
    if schema_version != SCHEMA_VERSION {
        return Err(Error::Schema(format!(
            "unsupported session schema {schema_version} (this build reads {SCHEMA_VERSION})"
        )));
    }

    let l2 = next(&mut lines)?;
    let user_id = header_value(l2.as_deref(), "user", 2)?.to_string();

    let l3 = next(&mut lines)?;
    let shape_text = header_value(l3.as_deref(), "shape", 3)?;
    let shape: Shape = shape_text
        .parse()
        .map_err(|_| header_error(format!("unknown shape {shape_text:?}"), 3))?;

    let l4 = next(&mut lines)?;
    let d_text = header_value(l4.as_deref(), "diameter_cm", 4)?;
    let diameter = d_text
        .parse::<f64>()
        .ok()
        .and_then(|d| Diameter::new(d).ok())
        .ok_or_else(|| header_error(format!("diameter {d_text:?} is not a positive number"), 4))?;

    let l5 = next(&mut lines)?;
    let p_text = header_value(l5.as_deref(), "period_ms", 5)?;
    let sample_period_ms = p_text
        .parse::<u32>()
        .ok()
        .filter(|&p| p > 0)
        .ok_or_else(|| header_error(format!("period {p_text:?} is not a positive integer"), 5))?;

    let mut frames: Vec<Frame> = Vec::new();
    let mut lineno = 5;
    while let Some(line) = next(&mut lines)? {
        lineno += 1;
        let frame = parse_frame(&line).map_err(|e| e.at_line(lineno))?;
        if let Some(prev) = frames.last() {
            if frame.t_ms <= prev.t_ms {
                return Err(ParseError::new(
                    ParseErrorKind::OrderViolation,
                    format!("timestamp {} does not follow {}", frame.t_ms, prev.t_ms),
                )
                .at_line(lineno)
                .into());
            }
        }
        frames.push(frame);
    }

    Ok(GraspSession {
        user_id,
        object: GraspObject { shape, diameter },
        sample_period_ms,
        frames,
    })
}

pub fn read_session_file(path: &Path) -> Result<GraspSession> {
    read_session(std::fs::File::open(path)?)
}

fn check_writable(session: &GraspSession) -> Result<()> {
    let id = &session.user_id;
    if id.is_empty() || id.chars().any(|c| c.is_whitespace() || c.is_control()) {
        return Err(Error::Argument(format!(
            "user id {id:?} must be non-empty with no whitespace"
        )));
    }
    if session.sample_period_ms == 0 {
        return Err(Error::Argument("sample period must be > 0".into()));
    }
    for pair in session.frames.windows(2) {
        if pair[1].t_ms <= pair[0].t_ms {
            return Err(Error::Argument(format!(
                "frame timestamps must strictly increase ({} then {})",
                pair[0].t_ms, pair[1].t_ms
            )));
        }
    }
    if let Some(f) = session
        .frames
        .iter()
        .find(|f| f.adc.iter().any(|&a| a > ADC_MAX))
    {
        return Err(Error::Argument(format!(
            "frame at {} ms has a count above {ADC_MAX}",
            f.t_ms
        )));
    }
    Ok(())
}

pub fn write_session<W: Write>(session: &GraspSession, mut sink: W) -> Result<()> {
    check_writable(session)?;
    let h = SessionHeader::of(session);
    let mut out = String::with_capacity(64 + session.frames.len() * 24);
    out.push_str(&format!("# schema={}\n", h.schema_version));
    out.push_str(&format!("# user={}\n", h.user_id));
    out.push_str(&format!("# shape={}\n", h.shape));
    out.push_str(&format!("# diameter_cm={}\n", h.diameter));
    out.push_str(&format!("# period_ms={}\n", h.sample_period_ms));
    for frame in &session.frames {
        out.push_str(&format_frame(frame));
        out.push('\n');
    }
    sink.write_all(out.as_bytes())?;
    sink.flush()?;
    Ok(())
}

pub fn write_session_file(session: &GraspSession, path: &Path) -> Result<()> {
    let file = std::fs::File::create(path)?;
    write_session(session, std::io::BufWriter::new(file))
}

/// Canonical file name, e.g. `sphere_8cm_u03.session`.
pub fn session_file_name(session: &GraspSession) -> String {
    format!(
        "{}_{}cm_{}.session",
        session.object.shape, session.object.diameter, session.user_id
    )
}
