//! Electrical model of one flex sensor: bend diameter → resistance →
//! divider voltage → 10-bit count, plus bounded sampling noise.
//!
//! The sensor sits on the ground side of a two-resistor divider and the
//! converter taps the node between the two resistors, so the count rises as
//! the sensor is bent tighter:
//!
//! ```text
//!   vcc ── r_fixed ──┬── r_flex ── gnd
//!                    └── ADC
//! ```

use std::path::Path;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, ParseError, ParseErrorKind, Result};

/// Number of decay lengths between the tightest bend and the knee. At the
/// knee the excess resistance over `r_flat` has fallen to e^-3 (about 5%)
/// of its value at the tightest bend.
pub const KNEE_DECAY_LENGTHS: f64 = 3.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CalibrationCurve {
    /// Resistance of the flat sensor (the limit as diameter grows without bound).
    pub r_flat_ohm: f64,
    /// Resistance at the tightest supported bend.
    pub r_min_diam_ohm: f64,
    pub d_knee_cm: f64,
    pub d_tightest_cm: f64,
}

impl Default for CalibrationCurve {
    fn default() -> Self {
        Self {
            r_flat_ohm: 25_000.0,
            r_min_diam_ohm: 100_000.0,
            d_knee_cm: 12.0,
            d_tightest_cm: 5.0,
        }
    }
}

impl CalibrationCurve {
    pub fn validate(&self) -> Result<()> {
        let finite = [
            self.r_flat_ohm,
            self.r_min_diam_ohm,
            self.d_knee_cm,
            self.d_tightest_cm,
        ]
        .iter()
        .all(|v| v.is_finite());
        if !finite {
            return Err(Error::Argument(
                "calibration curve values must be finite".into(),
            ));
        }
        if !(self.r_flat_ohm > 0.0 && self.r_min_diam_ohm > self.r_flat_ohm) {
            return Err(Error::Argument(format!(
                "calibration curve needs r_min_diam_ohm > r_flat_ohm > 0 (got {} and {})",
                self.r_min_diam_ohm, self.r_flat_ohm
            )));
        }
        if !(self.d_tightest_cm > 0.0 && self.d_knee_cm > self.d_tightest_cm) {
            return Err(Error::Argument(format!(
                "calibration curve needs d_knee_cm > d_tightest_cm > 0 (got {} and {})",
                self.d_knee_cm, self.d_tightest_cm
            )));
        }
        Ok(())
    }

    /// Exponential decay length of the excess resistance, in cm.
    pub fn decay_length_cm(&self) -> f64 {
        (self.d_knee_cm - self.d_tightest_cm) / KNEE_DECAY_LENGTHS
    }

    /// Sensor resistance when bent around a circle of diameter `d_cm`.
    ///
    /// `r(d) = r_flat + (r_min_diam - r_flat) * exp(-(d - d_tightest) / λ)`.
    /// Infinite `d_cm` is the flat sensor.
    pub fn resistance_at_diameter(&self, d_cm: f64) -> Result<f64> {
        if d_cm.is_nan() || d_cm < self.d_tightest_cm {
            return Err(Error::OutOfRange(format!(
                "bend diameter {d_cm} cm is tighter than the sensor limit of {} cm",
                self.d_tightest_cm
            )));
        }
        let excess = self.r_min_diam_ohm - self.r_flat_ohm;
        let decay = (-(d_cm - self.d_tightest_cm) / self.decay_length_cm()).exp();
        Ok(self.r_flat_ohm + excess * decay)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SensorConfig {
    pub curve: CalibrationCurve,
    pub r_fixed_ohm: f64,
    pub vcc: f64,
    pub adc_levels: u32,
    /// Peak sampling noise in counts.
    pub noise_amplitude: u16,
}

impl Default for SensorConfig {
    fn default() -> Self {
        Self {
            curve: CalibrationCurve::default(),
            r_fixed_ohm: 47_000.0,
            vcc: 5.0,
            adc_levels: 1024,
            noise_amplitude: 1,
        }
    }
}

impl SensorConfig {
    pub fn validate(&self) -> Result<()> {
        self.curve.validate()?;
        if !(self.r_fixed_ohm.is_finite() && self.r_fixed_ohm > 0.0) {
            return Err(Error::Argument(format!(
                "r_fixed_ohm must be > 0, got {}",
                self.r_fixed_ohm
            )));
        }
        if !(self.vcc.is_finite() && self.vcc > 0.0) {
            return Err(Error::Argument(format!(
                "vcc must be > 0, got {}",
                self.vcc
            )));
        }
        if self.adc_levels != 1024 {
            return Err(Error::Argument(format!(
                "adc_levels must be 1024 (10-bit frames), got {}",
                self.adc_levels
            )));
        }
        Ok(())
    }

    pub fn adc_max(&self) -> u16 {
        (self.adc_levels - 1) as u16
    }

    /// Voltage across the fixed resistor, `vcc * r_fixed / (r_fixed + r_flex)`.
    pub fn divider_voltage(&self, r_flex_ohm: f64) -> Result<f64> {
        if r_flex_ohm.is_nan() || r_flex_ohm <= 0.0 {
            return Err(Error::Domain(format!(
                "sensor resistance must be > 0, got {r_flex_ohm}"
            )));
        }
        if r_flex_ohm.is_infinite() {
            return Ok(0.0);
        }
        Ok(self.vcc * self.r_fixed_ohm / (self.r_fixed_ohm + r_flex_ohm))
    }

    /// Voltage at the converter input: the drop across the sensor itself,
    /// which rises with bend.
    pub fn sensor_node_voltage(&self, r_flex_ohm: f64) -> Result<f64> {
        let across_fixed = self.divider_voltage(r_flex_ohm)?;
        Ok(self.vcc - across_fixed)
    }

    /// `floor(v * levels / vcc)` clamped to the converter range.
    pub fn quantize(&self, volts: f64) -> Result<u16> {
        if volts.is_nan() || volts < 0.0 {
            return Err(Error::Domain(format!("voltage must be >= 0, got {volts}")));
        }
        let raw = (volts * f64::from(self.adc_levels) / self.vcc).floor();
        Ok(raw.min(f64::from(self.adc_max())) as u16)
    }

    pub fn adc_to_voltage(&self, adc: u16) -> Result<f64> {
        if adc > self.adc_max() {
            return Err(Error::Domain(format!(
                "count {adc} exceeds converter maximum {}",
                self.adc_max()
            )));
        }
        Ok(f64::from(adc) * self.vcc / f64::from(self.adc_levels))
    }

    /// Noise-free count for a sensor bent to `d_cm`.
    pub fn clean_adc_at_diameter(&self, d_cm: f64) -> Result<u16> {
        let r = self.curve.resistance_at_diameter(d_cm)?;
        self.quantize(self.sensor_node_voltage(r)?)
    }

    /// One noisy sample around `clean`: uniform over
    /// `clean - noise_amplitude ..= clean + noise_amplitude`, clamped.
    pub fn sample_with_noise<R: Rng + ?Sized>(&self, clean: u16, rng: &mut R) -> u16 {
        let amp = i32::from(self.noise_amplitude);
        let clean = i32::from(clean.min(self.adc_max()));
        if amp == 0 {
            return clean as u16;
        }
        let offset = rng.gen_range(-amp..=amp);
        (clean + offset).clamp(0, i32::from(self.adc_max())) as u16
    }

    pub fn from_toml_str(text: &str) -> Result<Self> {
        let cfg: SensorConfig = toml::from_str(text)
            .map_err(|e| ParseError::new(ParseErrorKind::MalformedConfig, e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("sensor config serializes")
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_toml_str(&std::fs::read_to_string(path)?)
    }
}
