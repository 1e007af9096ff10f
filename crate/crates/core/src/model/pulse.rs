use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::{Error, Result, C64};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PulseKind {
    SineSquare,
    TanhSwitch,
    Rectangular,
    Zero,
}

impl fmt::Display for PulseKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            PulseKind::SineSquare => "sine-square",
            PulseKind::TanhSwitch => "tanh-switch",
            PulseKind::Rectangular => "rectangular",
            PulseKind::Zero => "zero",
        })
    }
}

impl FromStr for PulseKind {
    type Err = ();

    fn from_str(s: &str) -> Result<Self, ()> {
        match s {
            "sine-square" => Ok(PulseKind::SineSquare),
            "tanh-switch" => Ok(PulseKind::TanhSwitch),
            "rectangular" => Ok(PulseKind::Rectangular),
            "zero" => Ok(PulseKind::Zero),
            _ => Err(()),
        }
    }
}

/// Envelope of one optical pulse, in units of `Γ` with times in `1/Γ`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PulseShape {
    pub kind: PulseKind,
    pub amplitude: f64,
    pub t_start: f64,
    pub t_end: f64,
    /// Switching time scale; only read for [`PulseKind::TanhSwitch`].
    pub rise: f64,
    /// Constant carrier phase [rad].
    pub phase: f64,
}

impl PulseShape {
    pub const ZERO: PulseShape = PulseShape {
        kind: PulseKind::Zero,
        amplitude: 0.0,
        t_start: 0.0,
        t_end: 1.0,
        rise: 0.0,
        phase: 0.0,
    };

    pub fn sine_square(amplitude: f64, t_start: f64, t_end: f64) -> Self {
        PulseShape {
            kind: PulseKind::SineSquare,
            amplitude,
            t_start,
            t_end,
            rise: 0.0,
            phase: 0.0,
        }
    }

    pub fn tanh_switch(amplitude: f64, t_start: f64, t_end: f64, rise: f64) -> Self {
        PulseShape {
            kind: PulseKind::TanhSwitch,
            amplitude,
            t_start,
            t_end,
            rise,
            phase: 0.0,
        }
    }

    pub fn rectangular(amplitude: f64, t_start: f64, t_end: f64) -> Self {
        PulseShape {
            kind: PulseKind::Rectangular,
            amplitude,
            t_start,
            t_end,
            rise: 0.0,
            phase: 0.0,
        }
    }

    pub fn with_phase(mut self, phase: f64) -> Self {
        self.phase = phase;
        self
    }

    /// Checks the shape invariants; `key` prefixes the error.
    pub fn validate(&self, key: &str) -> Result<()> {
        let finite = [
            self.amplitude,
            self.t_start,
            self.t_end,
            self.rise,
            self.phase,
        ]
        .iter()
        .all(|v| v.is_finite());
        if !finite {
            return Err(Error::invalid(key, "non-finite pulse parameter"));
        }
        if self.kind == PulseKind::Zero {
            return Ok(());
        }
        if self.amplitude < 0.0 {
            return Err(Error::invalid(format!("{key}.amplitude"), "must be >= 0"));
        }
        if self.t_end <= self.t_start {
            return Err(Error::invalid(
                format!("{key}.t_end"),
                "must exceed t_start",
            ));
        }
        if self.kind == PulseKind::TanhSwitch && self.rise <= 0.0 {
            return Err(Error::invalid(format!("{key}.rise"), "must be > 0"));
        }
        Ok(())
    }

    /// Real envelope without the carrier phase.
    pub fn envelope(&self, t: f64) -> f64 {
        match self.kind {
            PulseKind::Zero => 0.0,
            PulseKind::SineSquare => {
                if t < self.t_start || t > self.t_end {
                    0.0
                } else {
                    let s = (PI * (t - self.t_start) / (self.t_end - self.t_start)).sin();
                    self.amplitude * s * s
                }
            }
            PulseKind::TanhSwitch => {
                let on = ((t - self.t_start) / self.rise).tanh();
                let off = ((t - self.t_end) / self.rise).tanh();
                0.5 * self.amplitude * (on - off)
            }
            PulseKind::Rectangular => {
                if t >= self.t_start && t < self.t_end {
                    self.amplitude
                } else {
                    0.0
                }
            }
        }
    }

    pub fn evaluate(&self, t: f64) -> C64 {
        let env = self.envelope(t);
        if self.phase == 0.0 {
            C64::new(env, 0.0)
        } else {
            C64::from_polar(env, self.phase)
        }
    }
}

/// A control field: a storage segment plus an optional release segment that
/// shares its kind, amplitude, rise and phase.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ControlField {
    pub shape: PulseShape,
    /// `(t_start, t_end)` of the release segment.
    pub release: Option<(f64, f64)>,
}

impl ControlField {
    pub fn single(shape: PulseShape) -> Self {
        ControlField {
            shape,
            release: None,
        }
    }

    pub fn with_release(shape: PulseShape, t_start: f64, t_end: f64) -> Self {
        ControlField {
            shape,
            release: Some((t_start, t_end)),
        }
    }

    pub fn release_shape(&self) -> Option<PulseShape> {
        self.release.map(|(t_start, t_end)| PulseShape {
            t_start,
            t_end,
            ..self.shape
        })
    }

    pub fn validate(&self, key: &str) -> Result<()> {
        self.shape.validate(key)?;
        if let Some(rel) = self.release_shape() {
            rel.validate(&format!("{key}.release"))?;
        }
        Ok(())
    }

    pub fn envelope(&self, t: f64) -> f64 {
        let mut e = self.shape.envelope(t);
        if let Some(rel) = self.release_shape() {
            e += rel.envelope(t);
        }
        e
    }

    pub fn evaluate(&self, t: f64) -> C64 {
        let env = self.envelope(t);
        if self.shape.phase == 0.0 {
            C64::new(env, 0.0)
        } else {
            C64::from_polar(env, self.shape.phase)
        }
    }

    pub fn peak(&self) -> f64 {
        match self.shape.kind {
            PulseKind::Zero => 0.0,
            _ => self.shape.amplitude,
        }
    }
}
