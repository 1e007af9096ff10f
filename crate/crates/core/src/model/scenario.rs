use serde::{Deserialize, Serialize};

use super::pulse::{ControlField, PulseShape};
use super::units::{UnitContext, AU_MAGNETIC_TESLA};
use super::zeeman::{zeeman_shift, LevelZeeman};
use crate::{Error, Result, C64};

/// Control norm below which the medium counts as dark [Γ].
pub const CONTROL_OFF_THRESHOLD: f64 = 1e-3;
/// All optical fields must stay below this during the magnetic stage [Γ].
pub const DARK_FIELD_LIMIT: f64 = 1e-6;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Level {
    A = 0,
    B = 1,
    C = 2,
    D = 3,
}

impl Level {
    pub const ALL: [Level; 4] = [Level::A, Level::B, Level::C, Level::D];

    pub fn name(self) -> &'static str {
        ["a", "b", "c", "d"][self as usize]
    }
}

/// Rates and couplings of the tripod atom, in units of `Γ`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AtomicSystem {
    pub gamma_ab: f64,
    pub gamma_ac: f64,
    pub gamma_ad: f64,
    pub gamma_total: f64,
    pub delta1: f64,
    pub delta2: f64,
    pub delta3: f64,
    /// `κ`, derived from the coupling group `α`, the sample length and `Γ`.
    pub kappa: f64,
    /// Atom density [cm⁻³]; metadata only.
    pub density_cm3: Option<f64>,
    /// Zeeman data for levels a, b, c, d.
    pub zeeman: [LevelZeeman; 4],
}

impl AtomicSystem {
    /// ⁸⁷Rb assignment: a = (2, 0), b = (2, -1), c = (2, 1), d = (1, 1).
    pub const RUBIDIUM_ZEEMAN: [LevelZeeman; 4] = [
        LevelZeeman {
            f_quantum: 2.0,
            m_quantum: 0.0,
            g_factor: 0.5,
        },
        LevelZeeman {
            f_quantum: 2.0,
            m_quantum: -1.0,
            g_factor: 0.5,
        },
        LevelZeeman {
            f_quantum: 2.0,
            m_quantum: 1.0,
            g_factor: 0.5,
        },
        LevelZeeman {
            f_quantum: 1.0,
            m_quantum: 1.0,
            g_factor: -0.5,
        },
    ];

    pub fn new(gamma_ab: f64, gamma_ac: f64, gamma_ad: f64, deltas: [f64; 3], kappa: f64) -> Self {
        AtomicSystem {
            gamma_ab,
            gamma_ac,
            gamma_ad,
            gamma_total: gamma_ab + gamma_ac + gamma_ad,
            delta1: deltas[0],
            delta2: deltas[1],
            delta3: deltas[2],
            kappa,
            density_cm3: None,
            zeeman: Self::RUBIDIUM_ZEEMAN,
        }
    }

    /// Resonant system decaying at `Γ` into each ground state.
    pub fn resonant(kappa: f64) -> Self {
        Self::new(1.0, 1.0, 1.0, [0.0; 3], kappa)
    }

    /// Closed system: no decay, resonant.
    pub fn lossless(kappa: f64) -> Self {
        Self::new(0.0, 0.0, 0.0, [0.0; 3], kappa)
    }

    pub fn validate(&self) -> Result<()> {
        for (key, v) in [
            ("gamma_ab", self.gamma_ab),
            ("gamma_ac", self.gamma_ac),
            ("gamma_ad", self.gamma_ad),
        ] {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(Error::invalid(key, "decay rate must be finite and >= 0"));
            }
        }
        for (key, v) in [
            ("delta1", self.delta1),
            ("delta2", self.delta2),
            ("delta3", self.delta3),
        ] {
            if !v.is_finite() {
                return Err(Error::invalid(key, "must be finite"));
            }
        }
        if self.gamma_total != self.gamma_ab + self.gamma_ac + self.gamma_ad {
            return Err(Error::invalid(
                "gamma_total",
                "must equal gamma_ab + gamma_ac + gamma_ad",
            ));
        }
        if !(self.kappa > 0.0 && self.kappa.is_finite()) {
            return Err(Error::invalid("kappa", "must be finite and > 0"));
        }
        for lvl in Level::ALL {
            self.zeeman[lvl as usize].validate(&format!("zeeman.{}", lvl.name()))?;
        }
        Ok(())
    }

    /// Zeeman shifts of levels a..d in units of `Γ` for a field `b_au`.
    pub fn zeeman_rates(&self, b_au: f64, gamma_au: f64) -> [f64; 4] {
        self.zeeman.map(|z| zeeman_shift(&z, b_au) / gamma_au)
    }
}

/// Rectangular magnetic pulse applied while the medium is dark. Kept in the
/// units of the config file so that rendering and parsing are exact inverses.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MagneticStage {
    pub b_tesla: f64,
    pub t_start_us: f64,
    pub duration_us: f64,
}

impl MagneticStage {
    pub fn b_au(&self) -> f64 {
        self.b_tesla / AU_MAGNETIC_TESLA
    }

    pub fn t_start(&self, units: &UnitContext) -> f64 {
        units.us_to_internal(self.t_start_us)
    }

    pub fn duration(&self, units: &UnitContext) -> f64 {
        units.us_to_internal(self.duration_us)
    }

    pub fn t_end(&self, units: &UnitContext) -> f64 {
        self.t_start(units) + self.duration(units)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub n_xi: usize,
    /// Time step [1/Γ].
    pub d_tau: f64,
    /// End of the run [1/Γ].
    pub t_final: f64,
}

impl GridSpec {
    pub fn n_tau(&self) -> usize {
        (self.t_final / self.d_tau).round() as usize
    }

    pub fn tau(&self, step: usize) -> f64 {
        step as f64 * self.d_tau
    }

    pub fn step_of(&self, tau: f64) -> usize {
        ((tau / self.d_tau).round().max(0.0) as usize).min(self.n_tau())
    }

    pub fn refined(&self, factor: usize) -> GridSpec {
        GridSpec {
            n_xi: (self.n_xi - 1) * factor + 1,
            d_tau: self.d_tau / factor as f64,
            t_final: self.t_final,
        }
    }
}

/// Full-grid frames taken every `every` steps inside `[t_start, t_end]`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DenseWindow {
    pub t_start: f64,
    pub t_end: f64,
    pub every: usize,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct OutputSpec {
    /// Extra snapshot times [1/Γ].
    pub snapshot_times: Vec<f64>,
    pub dense: Option<DenseWindow>,
}

/// Everything needed for one run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub system: AtomicSystem,
    /// Boundary value of `Ω₁` at the entrance face.
    pub signal: PulseShape,
    pub control2: ControlField,
    pub control3: ControlField,
    pub magnetic: Option<MagneticStage>,
    pub sample_length_cm: f64,
    /// `α = κ² L / (c Γ)`.
    pub coupling_alpha: f64,
    pub grid: GridSpec,
    pub outputs: OutputSpec,
    pub units: UnitContext,
}

/// Switching times derived from the control envelopes.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct StorageTimeline {
    /// First time the controls drop below [`CONTROL_OFF_THRESHOLD`].
    pub storage_end: Option<f64>,
    /// First time after `storage_end` the controls come back.
    pub release_start: Option<f64>,
    /// Time at which the stored coherences are sampled.
    pub stored_at: Option<f64>,
    /// Time after the manipulation stage, before release.
    pub kicked_at: Option<f64>,
}

impl Scenario {
    /// Storage / magnetic manipulation / release with identical real controls
    /// of 5Γ, a 0.025Γ sine-square signal of 2.4 μs and α = 4000. The
    /// magnetic stage starts with zero field; use [`Scenario::with_delta`].
    pub fn reference_storage() -> Scenario {
        let units = UnitContext::default();
        let width = units.us_to_internal(2.4);
        let control =
            ControlField::with_release(PulseShape::tanh_switch(5.0, -200.0, 60.0, 3.0), 160.0, 1e9);
        Scenario {
            system: AtomicSystem::resonant(1.0),
            signal: PulseShape::sine_square(0.025, 0.0, width),
            control2: control,
            control3: control,
            magnetic: Some(MagneticStage {
                b_tesla: 0.0,
                t_start_us: 5.5,
                duration_us: 2.4,
            }),
            sample_length_cm: 1.0,
            coupling_alpha: 4000.0,
            grid: GridSpec {
                n_xi: 300,
                d_tau: 0.01,
                t_final: 260.0,
            },
            outputs: OutputSpec::default(),
            units,
        }
        .validated()
        .expect("built-in scenario is valid")
    }

    /// Constant 5Γ controls, no storage: slow-light transmission.
    pub fn reference_transparency() -> Scenario {
        let mut s = Scenario::reference_storage();
        let on = ControlField::single(PulseShape::tanh_switch(5.0, -200.0, 1e9, 3.0));
        s.control2 = on;
        s.control3 = on;
        s.magnetic = None;
        s.grid.t_final = 200.0;
        s.validated().expect("built-in scenario is valid")
    }

    /// Storage with proportional controls, release with control 3 leading
    /// control 2 by `lead_us`.
    pub fn reference_delayed_release(lead_us: f64) -> Scenario {
        let mut s = Scenario::reference_storage();
        s.magnetic = None;
        s.set_control3_lead(s.units.us_to_internal(lead_us));
        s.grid.t_final = 360.0;
        s.validated().expect("built-in scenario is valid")
    }

    /// Shift the release of control 2 so that control 3 precedes it by
    /// `lead` [1/Γ]; control 3 keeps its release time.
    pub fn set_control3_lead(&mut self, lead: f64) {
        if let (Some((t3, _)), Some((_, e2))) = (self.control3.release, self.control2.release) {
            self.control2.release = Some((t3 + lead, e2));
        }
    }

    pub fn with_b_tesla(mut self, b_tesla: f64) -> Scenario {
        if let Some(m) = self.magnetic.as_mut() {
            m.b_tesla = b_tesla;
        }
        self
    }

    /// Field [T] that gives `σ_bc` the phase area `delta` over the stage.
    pub fn b_tesla_for_delta(&self, delta: f64) -> Result<f64> {
        let stage = self.magnetic.as_ref().ok_or(Error::NoMagneticStage)?;
        let unit = self.system.zeeman_rates(1.0, self.units.gamma_au());
        let per_au =
            -(unit[Level::C as usize] - unit[Level::B as usize]) * stage.duration(&self.units);
        if per_au == 0.0 {
            return Err(Error::invalid(
                "zeeman",
                "levels b and c shift equally; delta cannot be set",
            ));
        }
        Ok(delta / per_au * AU_MAGNETIC_TESLA)
    }

    pub fn with_delta(self, delta: f64) -> Result<Scenario> {
        let b = self.b_tesla_for_delta(delta)?;
        Ok(self.with_b_tesla(b))
    }

    pub fn with_grid(mut self, grid: GridSpec) -> Scenario {
        self.grid = grid;
        self
    }

    /// `c / (L Γ)` for this sample.
    pub fn light_speed(&self) -> f64 {
        self.units.light_speed_internal(self.sample_length_cm)
    }

    /// Co-moving speed of the dark polariton, `c cot²θ = Ω² / α` [L Γ].
    pub fn polariton_speed(&self, omega_sq: f64) -> f64 {
        omega_sq / self.coupling_alpha
    }

    pub fn controls_at(&self, t: f64) -> (C64, C64) {
        (self.control2.evaluate(t), self.control3.evaluate(t))
    }

    pub fn control_norm(&self, t: f64) -> f64 {
        self.control2.envelope(t).hypot(self.control3.envelope(t))
    }

    /// Recomputes `κ` and checks every invariant.
    pub fn validated(mut self) -> Result<Scenario> {
        if !(self.coupling_alpha > 0.0 && self.coupling_alpha.is_finite()) {
            return Err(Error::invalid("alpha", "must be finite and > 0"));
        }
        if !(self.sample_length_cm > 0.0 && self.sample_length_cm.is_finite()) {
            return Err(Error::invalid("sample_length_cm", "must be finite and > 0"));
        }
        if !(self.units.gamma_si > 0.0 && self.units.gamma_si.is_finite()) {
            return Err(Error::invalid("gamma_mhz", "must be finite and > 0"));
        }
        self.system.gamma_total =
            self.system.gamma_ab + self.system.gamma_ac + self.system.gamma_ad;
        self.system.kappa = (self.coupling_alpha * self.light_speed()).sqrt();
        self.system.validate()?;
        self.signal.validate("signal")?;
        self.control2.validate("control2")?;
        self.control3.validate("control3")?;
        let g = &self.grid;
        if g.n_xi < 2 {
            return Err(Error::invalid("grid.n_xi", "must be >= 2"));
        }
        if !(g.d_tau > 0.0 && g.d_tau.is_finite()) {
            return Err(Error::invalid("grid.d_tau", "must be finite and > 0"));
        }
        if !(g.t_final > g.d_tau && g.t_final.is_finite()) {
            return Err(Error::invalid(
                "grid.t_final",
                "must be finite and exceed grid.d_tau",
            ));
        }
        for &t in &self.outputs.snapshot_times {
            if !(0.0..=g.t_final).contains(&t) {
                return Err(Error::invalid(
                    "output.snapshots",
                    format!("time {t} outside [0, t_final]"),
                ));
            }
        }
        if let Some(d) = &self.outputs.dense {
            if d.every == 0 {
                return Err(Error::invalid("output.dense.every", "must be >= 1"));
            }
            if d.t_end.partial_cmp(&d.t_start) != Some(std::cmp::Ordering::Greater) {
                return Err(Error::invalid(
                    "output.dense.t_end",
                    "must exceed output.dense.t_start",
                ));
            }
        }
        if let Some(m) = &self.magnetic {
            if !(m.b_tesla.is_finite() && m.t_start_us.is_finite()) {
                return Err(Error::invalid("magnetic.b_tesla", "must be finite"));
            }
            if !(m.duration_us > 0.0 && m.duration_us.is_finite()) {
                return Err(Error::invalid(
                    "magnetic.duration_us",
                    "must be finite and > 0",
                ));
            }
            if m.t_start(&self.units) < 0.0 || m.t_end(&self.units) > g.t_final {
                return Err(Error::invalid(
                    "magnetic.t_start_us",
                    "stage must lie inside [0, t_final]",
                ));
            }
        }
        Ok(self)
    }

    /// Rejects a magnetic stage that overlaps any optical field above
    /// [`DARK_FIELD_LIMIT`], sampling the stage on the time grid.
    pub fn check_magnetic_dark(&self) -> Result<()> {
        let Some(m) = &self.magnetic else {
            return Ok(());
        };
        let (t0, t1) = (m.t_start(&self.units), m.t_end(&self.units));
        let n = ((t1 - t0) / self.grid.d_tau).ceil() as usize;
        for k in 0..=n {
            let tau = (t0 + k as f64 * self.grid.d_tau).min(t1);
            for (field, value) in [
                ("Omega2", self.control2.envelope(tau).abs()),
                ("Omega3", self.control3.envelope(tau).abs()),
                ("Omega1(0)", self.signal.envelope(tau).abs()),
            ] {
                if value >= DARK_FIELD_LIMIT {
                    return Err(Error::MagneticOverlap { tau, field, value });
                }
            }
        }
        Ok(())
    }

    pub fn timeline(&self) -> StorageTimeline {
        let n = self.grid.n_tau();
        let mut storage_end = None;
        let mut release_start = None;
        let mut was_on = false;
        for k in 0..=n {
            let t = self.grid.tau(k);
            let on = self.control_norm(t) >= CONTROL_OFF_THRESHOLD;
            match (storage_end, on) {
                (None, true) => was_on = true,
                (None, false) if was_on => storage_end = Some(t),
                (Some(_), true) => {
                    release_start = Some(t);
                    break;
                }
                _ => {}
            }
        }
        let (stored_at, kicked_at) = match (&self.magnetic, storage_end) {
            (Some(m), Some(_)) => (Some(m.t_start(&self.units)), Some(m.t_end(&self.units))),
            (None, Some(end)) => {
                let mid = 0.5 * (end + release_start.unwrap_or(self.grid.t_final));
                (Some(mid), Some(mid))
            }
            _ => (None, None),
        };
        StorageTimeline {
            storage_end,
            release_start,
            stored_at,
            kicked_at,
        }
    }
}
