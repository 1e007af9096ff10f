use std::f64::consts::TAU;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Atomic unit of time in seconds.
pub const AU_TIME_SECONDS: f64 = 2.418_884_326_585_7e-17;
/// Atomic unit of magnetic induction in tesla.
pub const AU_MAGNETIC_TESLA: f64 = 2.350_517_567_58e5;
pub const SPEED_OF_LIGHT_CM_S: f64 = 2.997_924_58e10;

/// Default spontaneous emission rate, in atomic units of angular frequency.
pub const DEFAULT_GAMMA_AU: f64 = 4e-10;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Unit {
    /// Angular frequency in atomic units (hartree / hbar).
    AuFrequency,
    RadPerSecond,
    /// Cyclic frequency, `omega / 2 pi`.
    Megahertz,
    /// Angular frequency in units of `Γ`.
    Gamma,
    Microsecond,
    InverseGamma,
    Tesla,
    AuMagnetic,
    Centimeter,
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Dimension {
    Frequency,
    Time,
    Magnetic,
    Length,
}

impl Unit {
    fn dimension(self) -> Dimension {
        use Unit::*;
        match self {
            AuFrequency | RadPerSecond | Megahertz | Gamma => Dimension::Frequency,
            Microsecond | InverseGamma => Dimension::Time,
            Tesla | AuMagnetic => Dimension::Magnetic,
            Centimeter => Dimension::Length,
        }
    }
}

impl fmt::Display for Unit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Unit::AuFrequency => "a.u. frequency",
            Unit::RadPerSecond => "rad/s",
            Unit::Megahertz => "MHz",
            Unit::Gamma => "Gamma",
            Unit::Microsecond => "us",
            Unit::InverseGamma => "1/Gamma",
            Unit::Tesla => "T",
            Unit::AuMagnetic => "a.u. magnetic field",
            Unit::Centimeter => "cm",
        };
        f.write_str(s)
    }
}

/// Conversion context pinned to one value of `Γ`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct UnitContext {
    /// `Γ` as an SI angular frequency [rad/s].
    pub gamma_si: f64,
}

impl Default for UnitContext {
    fn default() -> Self {
        Self::from_gamma_au(DEFAULT_GAMMA_AU)
    }
}

impl UnitContext {
    pub fn from_gamma_au(gamma_au: f64) -> Self {
        Self {
            gamma_si: gamma_au / AU_TIME_SECONDS,
        }
    }

    pub fn from_gamma_mhz(mhz: f64) -> Self {
        Self {
            gamma_si: TAU * mhz * 1e6,
        }
    }

    pub fn gamma_au(&self) -> f64 {
        self.gamma_si * AU_TIME_SECONDS
    }

    pub fn gamma_mhz(&self) -> f64 {
        self.gamma_si / (TAU * 1e6)
    }

    /// `c / (L Γ)`: the speed of light in internal units for a sample of
    /// length `length_cm`.
    pub fn light_speed_internal(&self, length_cm: f64) -> f64 {
        SPEED_OF_LIGHT_CM_S / (length_cm * self.gamma_si)
    }

    /// Factor taking a value in `unit` to the SI-like base of its dimension
    /// (rad/s, s, T, cm).
    fn to_base(self, unit: Unit) -> f64 {
        match unit {
            Unit::AuFrequency => 1.0 / AU_TIME_SECONDS,
            Unit::RadPerSecond => 1.0,
            Unit::Megahertz => TAU * 1e6,
            Unit::Gamma => self.gamma_si,
            Unit::Microsecond => 1e-6,
            Unit::InverseGamma => 1.0 / self.gamma_si,
            Unit::Tesla => 1.0,
            Unit::AuMagnetic => AU_MAGNETIC_TESLA,
            Unit::Centimeter => 1.0,
        }
    }

    pub fn convert(&self, value: f64, from: Unit, to: Unit) -> Result<f64> {
        if from == to {
            return Ok(value);
        }
        if from.dimension() != to.dimension() {
            return Err(Error::UnsupportedUnits {
                from: from.to_string(),
                to: to.to_string(),
            });
        }
        Ok(value * self.to_base(from) / self.to_base(to))
    }

    pub fn us_to_internal(&self, us: f64) -> f64 {
        us * 1e-6 * self.gamma_si
    }

    pub fn internal_to_us(&self, t: f64) -> f64 {
        t / self.gamma_si * 1e6
    }

    pub fn tesla_to_au(&self, b: f64) -> f64 {
        b / AU_MAGNETIC_TESLA
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn default_gamma_is_about_2_6_mhz() {
        let ctx = UnitContext::default();
        let mhz = ctx
            .convert(4e-10, Unit::AuFrequency, Unit::Megahertz)
            .unwrap();
        assert!((mhz - 2.6).abs() / 2.6 < 0.02, "{mhz}");
        assert!((ctx.gamma_mhz() - mhz).abs() < 1e-12);
    }

    #[test]
    fn signal_width_in_inverse_gamma() {
        let ctx = UnitContext::default();
        let t = ctx
            .convert(2.4, Unit::Microsecond, Unit::InverseGamma)
            .unwrap();
        // 2.4e-6 s * 4e-10 / 2.4188843e-17 s
        let oracle = 2.4e-6 * (4e-10 / 2.418_884_3e-17);
        assert!((t - oracle).abs() / oracle < 1e-6);
        assert!((t - 39.7).abs() < 0.05);
    }

    #[test]
    fn identity_and_dimension_errors() {
        let ctx = UnitContext::default();
        assert_eq!(ctx.convert(3.25, Unit::Tesla, Unit::Tesla).unwrap(), 3.25);
        assert!(matches!(
            ctx.convert(1.0, Unit::Tesla, Unit::Microsecond),
            Err(Error::UnsupportedUnits { .. })
        ));
    }

    fn unit_pair() -> impl Strategy<Value = (Unit, Unit)> {
        use Unit::*;
        prop_oneof![
            (
                prop::sample::select(vec![AuFrequency, RadPerSecond, Megahertz, Gamma]),
                prop::sample::select(vec![AuFrequency, RadPerSecond, Megahertz, Gamma])
            ),
            (
                prop::sample::select(vec![Microsecond, InverseGamma]),
                prop::sample::select(vec![Microsecond, InverseGamma])
            ),
            (
                prop::sample::select(vec![Tesla, AuMagnetic]),
                prop::sample::select(vec![Tesla, AuMagnetic])
            ),
        ]
    }

    proptest! {
        #[test]
        fn round_trip_keeps_twelve_digits(x in -1e6f64..1e6, (a, b) in unit_pair(), mhz in 0.5f64..20.0) {
            let ctx = UnitContext::from_gamma_mhz(mhz);
            let y = ctx.convert(x, a, b).unwrap();
            let back = ctx.convert(y, b, a).unwrap();
            prop_assert!((back - x).abs() <= 1e-12 * x.abs().max(1e-300));
        }
    }
}
