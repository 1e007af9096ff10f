//! Density-matrix equations of the tripod atom and a fixed-step RK4 step for
//! one spatial cell.
//!
//! Only the upper triangle of `σ` is stored; `σ_ba = conj(σ_ab)` and so on.
//! Populations are real by construction.

use serde::{Deserialize, Serialize};

use crate::model::AtomicSystem;
use crate::{Error, Result, C64};

const I: C64 = C64 { re: 0.0, im: 1.0 };

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct SigmaState {
    pub pop_a: f64,
    pub pop_b: f64,
    pub pop_c: f64,
    pub pop_d: f64,
    pub coh_ab: C64,
    pub coh_ac: C64,
    pub coh_ad: C64,
    pub coh_bc: C64,
    pub coh_bd: C64,
    pub coh_cd: C64,
}

impl SigmaState {
    /// All population in the initial ground state `b`.
    pub fn ground() -> Self {
        SigmaState {
            pop_b: 1.0,
            ..Default::default()
        }
    }

    pub fn trace(&self) -> f64 {
        self.pop_a + self.pop_b + self.pop_c + self.pop_d
    }

    /// `Tr σ²`.
    pub fn purity(&self) -> f64 {
        let pops = self.pop_a * self.pop_a
            + self.pop_b * self.pop_b
            + self.pop_c * self.pop_c
            + self.pop_d * self.pop_d;
        let cohs = self.coh_ab.norm_sqr()
            + self.coh_ac.norm_sqr()
            + self.coh_ad.norm_sqr()
            + self.coh_bc.norm_sqr()
            + self.coh_bd.norm_sqr()
            + self.coh_cd.norm_sqr();
        pops + 2.0 * cohs
    }

    pub fn min_population(&self) -> f64 {
        self.pop_a.min(self.pop_b).min(self.pop_c).min(self.pop_d)
    }

    /// `σ_ba`, the coherence that drives the signal field.
    pub fn coh_ba(&self) -> C64 {
        self.coh_ab.conj()
    }

    /// `self + h * k`
    #[inline]
    pub fn add_scaled(&self, k: &SigmaState, h: f64) -> SigmaState {
        SigmaState {
            pop_a: self.pop_a + h * k.pop_a,
            pop_b: self.pop_b + h * k.pop_b,
            pop_c: self.pop_c + h * k.pop_c,
            pop_d: self.pop_d + h * k.pop_d,
            coh_ab: self.coh_ab + k.coh_ab * h,
            coh_ac: self.coh_ac + k.coh_ac * h,
            coh_ad: self.coh_ad + k.coh_ad * h,
            coh_bc: self.coh_bc + k.coh_bc * h,
            coh_bd: self.coh_bd + k.coh_bd * h,
            coh_cd: self.coh_cd + k.coh_cd * h,
        }
    }

    pub fn is_finite(&self) -> bool {
        [self.pop_a, self.pop_b, self.pop_c, self.pop_d]
            .iter()
            .all(|v| v.is_finite())
            && [
                self.coh_ab,
                self.coh_ac,
                self.coh_ad,
                self.coh_bc,
                self.coh_bd,
                self.coh_cd,
            ]
            .iter()
            .all(|c| c.is_finite())
    }

    /// Multiplies every coherence `σ_ij` by `exp(-i (s_j - s_i))`, the free
    /// evolution under level shifts `s` (in radians already integrated).
    pub fn apply_level_phases(&mut self, s: [f64; 4]) {
        let rot = |i: usize, j: usize| C64::from_polar(1.0, -(s[j] - s[i]));
        self.coh_ab *= rot(0, 1);
        self.coh_ac *= rot(0, 2);
        self.coh_ad *= rot(0, 3);
        self.coh_bc *= rot(1, 2);
        self.coh_bd *= rot(1, 3);
        self.coh_cd *= rot(2, 3);
    }
}

/// Fields seen by one atom at one instant.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct FieldSample {
    pub omega1: C64,
    pub omega2: C64,
    pub omega3: C64,
    /// Zeeman corrections `ΔE_j - ΔE_a` [Γ] for j = b, c, d.
    pub detuning_shift_b: f64,
    pub detuning_shift_c: f64,
    pub detuning_shift_d: f64,
}

/// `dσ/dt` of the tripod equations.
///
/// Level shifts enter as `Δ₁ → Δ₁ + (ΔE_b - ΔE_a)`, `Δ₂ → Δ₂ + (ΔE_c - ΔE_a)`,
/// `Δ₃ → Δ₃ + (ΔE_d - ΔE_a)`. Per coherence this adds to the rotation
/// frequency `ω` in `i σ̇ = ω σ + ...`:
///   σ_ab: ΔE_b - ΔE_a    σ_ac: ΔE_c - ΔE_a    σ_ad: ΔE_d - ΔE_a
///   σ_bc: ΔE_c - ΔE_b    σ_bd: ΔE_d - ΔE_b    σ_cd: ΔE_d - ΔE_c
/// so with the fields off `arg σ_bc` advances at `-(ΔE_c - ΔE_b)`.
#[inline]
pub fn bloch_rhs(s: &SigmaState, f: &FieldSample, sys: &AtomicSystem) -> SigmaState {
    let (o1, o2, o3) = (f.omega1, f.omega2, f.omega3);
    let d1 = sys.delta1 + f.detuning_shift_b;
    let d2 = sys.delta2 + f.detuning_shift_c;
    let d3 = sys.delta3 + f.detuning_shift_d;
    let half_gamma = 0.5 * sys.gamma_total;

    // Ω_j σ_aj; the population equations only need their imaginary parts:
    // -Ω*σ_ba + Ωσ_ab = 2i Im(Ωσ_ab).
    let w1 = (o1 * s.coh_ab).im;
    let w2 = (o2 * s.coh_ac).im;
    let w3 = (o3 * s.coh_ad).im;

    let pop_a = 2.0 * (w1 + w2 + w3) - sys.gamma_total * s.pop_a;
    let pop_b = -2.0 * w1 + sys.gamma_ab * s.pop_a;
    let pop_c = -2.0 * w2 + sys.gamma_ac * s.pop_a;
    let pop_d = -2.0 * w3 + sys.gamma_ad * s.pop_a;

    let (cb, db, dc) = (s.coh_bc.conj(), s.coh_bd.conj(), s.coh_cd.conj());
    let (ba, ca) = (s.coh_ab.conj(), s.coh_ac.conj());

    // i σ̇_ab = (Δ₁ - iγ/2) σ_ab - Ω₁*(σ_bb - σ_aa) - Ω₂* σ_cb - Ω₃* σ_db
    let ab = C64::new(d1, -half_gamma) * s.coh_ab
        - o1.conj() * (s.pop_b - s.pop_a)
        - o2.conj() * cb
        - o3.conj() * db;
    // i σ̇_ac = (Δ₂ - iγ/2) σ_ac - Ω₂*(σ_cc - σ_aa) - Ω₁* σ_bc - Ω₃* σ_dc
    let ac = C64::new(d2, -half_gamma) * s.coh_ac
        - o2.conj() * (s.pop_c - s.pop_a)
        - o1.conj() * s.coh_bc
        - o3.conj() * dc;
    // i σ̇_ad = (Δ₃ - iγ/2) σ_ad - Ω₃*(σ_dd - σ_aa) - Ω₁* σ_bd - Ω₂* σ_cd
    let ad = C64::new(d3, -half_gamma) * s.coh_ad
        - o3.conj() * (s.pop_d - s.pop_a)
        - o1.conj() * s.coh_bd
        - o2.conj() * s.coh_cd;
    // i σ̇_bc = (Δ₂ - Δ₁) σ_bc - Ω₁ σ_ac + Ω₂* σ_ba
    let bc = s.coh_bc * (d2 - d1) - o1 * s.coh_ac + o2.conj() * ba;
    // i σ̇_bd = (Δ₃ - Δ₁) σ_bd - Ω₁ σ_ad + Ω₃* σ_ba
    let bd = s.coh_bd * (d3 - d1) - o1 * s.coh_ad + o3.conj() * ba;
    // i σ̇_cd = (Δ₃ - Δ₂) σ_cd - Ω₂ σ_ad + Ω₃* σ_ca
    let cd = s.coh_cd * (d3 - d2) - o2 * s.coh_ad + o3.conj() * ca;

    SigmaState {
        pop_a,
        pop_b,
        pop_c,
        pop_d,
        coh_ab: -I * ab,
        coh_ac: -I * ac,
        coh_ad: -I * ad,
        coh_bc: -I * bc,
        coh_bd: -I * bd,
        coh_cd: -I * cd,
    }
}

/// One classical RK4 step of length `dt` starting at `t`; `fields` holds the
/// samples at `t`, `t + dt/2` and `t + dt`.
#[inline]
pub fn rk4_step(
    state: &SigmaState,
    fields: &[FieldSample; 3],
    sys: &AtomicSystem,
    t: f64,
    dt: f64,
) -> Result<SigmaState> {
    let next = rk4_raw(state, fields, sys, dt);
    if next.is_finite() {
        Ok(next)
    } else {
        Err(Error::Divergence { tau: t, dt })
    }
}

#[inline]
pub(crate) fn rk4_raw(
    state: &SigmaState,
    fields: &[FieldSample; 3],
    sys: &AtomicSystem,
    dt: f64,
) -> SigmaState {
    let k1 = bloch_rhs(state, &fields[0], sys);
    let k2 = bloch_rhs(&state.add_scaled(&k1, 0.5 * dt), &fields[1], sys);
    let k3 = bloch_rhs(&state.add_scaled(&k2, 0.5 * dt), &fields[1], sys);
    let k4 = bloch_rhs(&state.add_scaled(&k3, dt), &fields[2], sys);
    state
        .add_scaled(&k1, dt / 6.0)
        .add_scaled(&k2, dt / 3.0)
        .add_scaled(&k3, dt / 3.0)
        .add_scaled(&k4, dt / 6.0)
}
