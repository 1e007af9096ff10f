use serde::{Deserialize, Serialize};

use super::scenario::{Level, Scenario};
use crate::{Error, Result};

/// Angular-momentum labels of one Zeeman sublevel.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LevelZeeman {
    pub f_quantum: f64,
    pub m_quantum: f64,
    pub g_factor: f64,
}

impl LevelZeeman {
    pub fn new(f_quantum: f64, m_quantum: f64, g_factor: f64) -> Self {
        LevelZeeman {
            f_quantum,
            m_quantum,
            g_factor,
        }
    }

    pub fn validate(&self, key: &str) -> Result<()> {
        if ![self.f_quantum, self.m_quantum, self.g_factor]
            .iter()
            .all(|v| v.is_finite())
        {
            return Err(Error::invalid(key, "non-finite Zeeman parameter"));
        }
        if self.f_quantum < 0.0 {
            return Err(Error::invalid(format!("{key}.f"), "must be >= 0"));
        }
        if self.m_quantum.abs() > self.f_quantum {
            return Err(Error::invalid(format!("{key}.m"), "|m| must not exceed f"));
        }
        Ok(())
    }
}

/// Level shift `g_F B M / 2` in atomic units (`mu_B = 1/2`), for `b_field` in
/// atomic units of magnetic induction.
pub fn zeeman_shift(level: &LevelZeeman, b_field: f64) -> f64 {
    level.g_factor * b_field * level.m_quantum / 2.0
}

/// Phases accumulated by the two ground coherences over the magnetic stage.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PhaseArea {
    /// Extra phase of `σ_bc` (the pulse area `δ`).
    pub sigma_bc: f64,
    /// Companion phase of `σ_bd`.
    pub sigma_bd: f64,
}

/// Phase areas `-(ΔE_c - ΔE_b) T` and `-(ΔE_d - ΔE_b) T` of the scenario's
/// magnetic stage, with energies converted to `Γ` units (`ħ = 1`).
pub fn magnetic_phase_area(scenario: &Scenario) -> Result<PhaseArea> {
    let stage = scenario.magnetic.as_ref().ok_or(Error::NoMagneticStage)?;
    let units = &scenario.units;
    let rates = scenario
        .system
        .zeeman_rates(units.tesla_to_au(stage.b_tesla), units.gamma_au());
    let duration = stage.duration(units);
    Ok(PhaseArea {
        sigma_bc: -(rates[Level::C as usize] - rates[Level::B as usize]) * duration,
        sigma_bd: -(rates[Level::D as usize] - rates[Level::B as usize]) * duration,
    })
}
