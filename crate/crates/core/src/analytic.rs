//! Closed-form layer: splitting of the stored coherences into a releasable
//! (dark-polariton) part and a trapped (`Z`) part after a phase kick, the
//! resulting release height and trapped amplitude, the rigid-transport
//! prediction of the released pulse, and adiabaticity residuals of the
//! reduced model on simulation data.

use serde::{Deserialize, Serialize};

use crate::model::{magnetic_phase_area, CONTROL_OFF_THRESHOLD};
use crate::polariton::{mixing_frame, PolaritonFrame};
use crate::propagator::SimulationRecord;
use crate::{Error, Result, C64};

/// Largest snapshot spacing, in time steps, used for finite differences.
const DENSE_LIMIT: f64 = 50.0;

/// Relative tolerance of the storage alignment `cos φ σ_bd = sin φ σ_bc`.
pub const STORAGE_ALIGNMENT_TOL: f64 = 1e-6;

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct CoherenceSplit {
    pub sigma_bc_prime: C64,
    pub sigma_bd_prime: C64,
    pub sigma_bc_dprime: C64,
    pub sigma_bd_dprime: C64,
}

impl CoherenceSplit {
    pub fn sigma_bc(&self) -> C64 {
        self.sigma_bc_prime + self.sigma_bc_dprime
    }

    pub fn sigma_bd(&self) -> C64 {
        self.sigma_bd_prime + self.sigma_bd_dprime
    }

    /// `Z` carried by the trapped parts: `sin φ σ″_bc - cos φ σ″_bd`.
    pub fn z(&self, phi: f64) -> C64 {
        let (s, c) = phi.sin_cos();
        self.sigma_bc_dprime * s - self.sigma_bd_dprime * c
    }

    /// Atomic part of `Ψ` at `θ = π/2`: `-κ (cos φ σ′_bc + sin φ σ′_bd)`.
    pub fn stored_psi(&self, phi: f64, kappa: f64) -> C64 {
        let (s, c) = phi.sin_cos();
        -(self.sigma_bc_prime * c + self.sigma_bd_prime * s) * kappa
    }
}

fn alignment_residual(sigma_bc0: C64, sigma_bd0: C64, phi: f64) -> f64 {
    let (s, c) = phi.sin_cos();
    let scale = sigma_bc0.norm().max(sigma_bd0.norm());
    if scale == 0.0 {
        0.0
    } else {
        (sigma_bd0 * c - sigma_bc0 * s).norm() / scale
    }
}

/// Splits coherences stored with branch angle `φ` after `σ_bc` picked up the
/// phase `δ`:
///
/// `σ″_bc = sin²φ (e^{iδ} - 1) σ⁰_bc`, `σ″_bd = -cos²φ (e^{iδ} - 1) σ⁰_bd`,
/// `σ′ = σ⁰ (cos²φ e^{iδ} + sin²φ)` for both.
pub fn split_coherences(
    sigma_bc0: C64,
    sigma_bd0: C64,
    phi: f64,
    delta: f64,
) -> Result<CoherenceSplit> {
    let residual = alignment_residual(sigma_bc0, sigma_bd0, phi);
    if residual > STORAGE_ALIGNMENT_TOL {
        return Err(Error::StorageCondition { residual });
    }
    let (s, c) = phi.sin_cos();
    let kick = C64::from_polar(1.0, delta) - 1.0;
    let keep = C64::from_polar(c * c, delta) + s * s;
    Ok(CoherenceSplit {
        sigma_bc_prime: sigma_bc0 * keep,
        sigma_bd_prime: sigma_bd0 * keep,
        sigma_bc_dprime: sigma_bc0 * kick * (s * s),
        sigma_bd_dprime: -sigma_bd0 * kick * (c * c),
    })
}

/// Orthogonal projection of arbitrary coherences onto the dark direction
/// `(cos φ, sin φ)` and its complement. Reduces to [`split_coherences`] for
/// aligned storage and a kick on `σ_bc` only.
pub fn project_coherences(sigma_bc: C64, sigma_bd: C64, phi: f64) -> CoherenceSplit {
    let (s, c) = phi.sin_cos();
    let dark = sigma_bc * c + sigma_bd * s;
    let trapped = sigma_bc * s - sigma_bd * c;
    CoherenceSplit {
        sigma_bc_prime: dark * c,
        sigma_bd_prime: dark * s,
        sigma_bc_dprime: trapped * s,
        sigma_bd_dprime: -trapped * c,
    }
}

/// `sqrt(1 - sin²2φ sin²(δ/2))`, the released height relative to an
/// unmanipulated release.
pub fn released_height_factor(phi: f64, delta: f64) -> f64 {
    let s2 = (2.0 * phi).sin().powi(2) * (0.5 * delta).sin().powi(2);
    (1.0 - s2).max(0.0).sqrt()
}

/// Phase of the released pulse relative to `δ = 0`.
pub fn released_phase_shift(phi: f64, delta: f64) -> f64 {
    let (s, c) = phi.sin_cos();
    (C64::from_polar(c * c, delta) + s * s).arg()
}

/// `Z(t₁) = sin φ (e^{iδ} - 1) σ⁰_bc` for aligned storage.
pub fn trapped_z_amplitude(sigma_bc0: C64, phi: f64, delta: f64) -> C64 {
    sigma_bc0 * (C64::from_polar(1.0, delta) - 1.0) * phi.sin()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReleasePrediction {
    pub tau: Vec<f64>,
    /// Predicted `Ω₁(ξ = L, τ)`.
    pub omega1: Vec<C64>,
    /// Part of the profile is still inside the medium at the last time.
    pub incomplete: bool,
}

impl ReleasePrediction {
    pub fn peak(&self) -> (f64, f64) {
        self.tau
            .iter()
            .zip(&self.omega1)
            .map(|(&t, o)| (t, o.norm()))
            .fold((0.0, 0.0), |best, x| if x.1 > best.1 { x } else { best })
    }
}

fn interpolate(xi: &[f64], profile: &[C64], x: f64) -> C64 {
    if x < xi[0] || x > xi[xi.len() - 1] {
        return C64::default();
    }
    let k = xi.partition_point(|&p| p <= x).clamp(1, xi.len() - 1);
    let (x0, x1) = (xi[k - 1], xi[k]);
    let w = (x - x0) / (x1 - x0);
    profile[k - 1] * (1.0 - w) + profile[k] * w
}

/// Moves the stored `Ψ(ξ)` rigidly by `∫ c cos²θ dt` and reads off
/// `Ω₁ = Ψ cos θ` at the exit face.
///
/// In the co-moving frame the displacement rate is `(κ²/α) cot²θ = Ω²/α`
/// (units of `L` per `1/Γ`). `history` lists `(τ, frame)` from the start of
/// release onward; the displacement is accumulated with the trapezoidal rule.
pub fn released_pulse_prediction(
    xi: &[f64],
    psi_profile: &[C64],
    history: &[(f64, PolaritonFrame)],
    alpha: f64,
) -> ReleasePrediction {
    let speed = |f: &PolaritonFrame| {
        let (s, c) = f.theta.sin_cos();
        f.kappa * f.kappa / alpha * (c / s).powi(2)
    };
    let mut shift = 0.0;
    let mut tau = Vec::with_capacity(history.len());
    let mut omega1 = Vec::with_capacity(history.len());
    for (k, (t, frame)) in history.iter().enumerate() {
        if k > 0 {
            let (tp, fp) = &history[k - 1];
            shift += 0.5 * (t - tp) * (speed(fp) + speed(frame));
        }
        tau.push(*t);
        omega1.push(interpolate(xi, psi_profile, 1.0 - shift) * frame.theta.cos());
    }
    ReleasePrediction {
        tau,
        omega1,
        incomplete: shift < 1.0,
    }
}

/// Predicted exit series of a storage run from its `stored` frame: the
/// coherences are kicked by the magnetic phase areas, split, and the
/// releasable part transported.
pub fn predict_release(record: &SimulationRecord) -> Result<ReleasePrediction> {
    let s = &record.scenario;
    let stored = record
        .snapshot("stored")
        .ok_or(Error::InsufficientSnapshots {
            needed: 1,
            found: 0,
        })?;
    let phi = stored.polariton.frame.phi;
    let kappa = s.system.kappa;
    let (d_bc, d_bd) = match magnetic_phase_area(s) {
        Ok(a) => (a.sigma_bc, a.sigma_bd),
        Err(Error::NoMagneticStage) => (0.0, 0.0),
        Err(e) => return Err(e),
    };
    let psi = stored
        .sigma
        .iter()
        .map(|x| {
            let split = if d_bd == 0.0 {
                split_coherences(x.coh_bc, x.coh_bd, phi, d_bc)?
            } else {
                project_coherences(
                    x.coh_bc * C64::from_polar(1.0, d_bc),
                    x.coh_bd * C64::from_polar(1.0, d_bd),
                    phi,
                )
            };
            Ok(split.stored_psi(phi, kappa))
        })
        .collect::<Result<Vec<_>>>()?;
    let t1 = record.timeline.kicked_at.unwrap_or(stored.tau);
    let history: Vec<_> = record
        .tau
        .iter()
        .filter(|&&t| t >= t1)
        .map(|&t| {
            let (o2, o3) = s.controls_at(t);
            (t, mixing_frame(o2, o3, kappa, 0.0, phi))
        })
        .collect();
    Ok(released_pulse_prediction(
        &record.xi,
        &psi,
        &history,
        s.coupling_alpha,
    ))
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct AdiabaticResidual {
    /// `max |Ω₁ + Ω₂σ_bc + Ω₃σ_bd| / max |Ω₁|`.
    pub omega1_residual: f64,
    /// `max |σ̇_bc/Ω₂* - σ̇_bd/Ω₃*|` relative to the larger of the two rates.
    pub rate_match_residual: f64,
    pub frames_used: usize,
}

/// Checks the two algebraic relations of the adiabatic reduced model on every
/// frame where both controls exceed [`CONTROL_OFF_THRESHOLD`].
pub fn adiabatic_check(record: &SimulationRecord) -> Result<AdiabaticResidual> {
    let s = &record.scenario;
    let frames: Vec<_> = record
        .snapshots
        .iter()
        .filter(|f| {
            let (o2, o3) = s.controls_at(f.tau);
            o2.norm() > CONTROL_OFF_THRESHOLD && o3.norm() > CONTROL_OFF_THRESHOLD
        })
        .collect();
    if frames.is_empty() {
        return Err(Error::NoQualifyingWindow {
            threshold: CONTROL_OFF_THRESHOLD,
        });
    }
    let mut field_max: f64 = 0.0;
    let mut field_dev: f64 = 0.0;
    for f in &frames {
        let (o2, o3) = s.controls_at(f.tau);
        for (o1, x) in f.omega1.iter().zip(&f.sigma) {
            field_max = field_max.max(o1.norm());
            field_dev = field_dev.max((o1 + o2 * x.coh_bc + o3 * x.coh_bd).norm());
        }
    }
    let mut rate_max: f64 = 0.0;
    let mut rate_dev: f64 = 0.0;
    for w in frames.windows(3) {
        let (p, c, n) = (w[0], w[1], w[2]);
        let span = n.tau - p.tau;
        let uneven = ((n.tau - c.tau) - (c.tau - p.tau)).abs();
        if span <= 0.0
            || uneven > 1e-9 * span
            || span > 4.0 * record.scenario.grid.d_tau * DENSE_LIMIT
        {
            continue;
        }
        let (o2, o3) = s.controls_at(c.tau);
        for j in 0..c.sigma.len() {
            let r2 = (n.sigma[j].coh_bc - p.sigma[j].coh_bc) / span / o2.conj();
            let r3 = (n.sigma[j].coh_bd - p.sigma[j].coh_bd) / span / o3.conj();
            rate_max = rate_max.max(r2.norm()).max(r3.norm());
            rate_dev = rate_dev.max((r2 - r3).norm());
        }
    }
    let rel = |dev: f64, max: f64| if max > 0.0 { dev / max } else { 0.0 };
    Ok(AdiabaticResidual {
        omega1_residual: rel(field_dev, field_max),
        rate_match_residual: rel(rate_dev, rate_max),
        frames_used: frames.len(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::f64::consts::{FRAC_PI_2, FRAC_PI_3, FRAC_PI_4, PI, TAU};

    const EPS: f64 = 1e-12;

    #[test]
    fn zero_kick_keeps_everything_releasable() {
        let bc = C64::new(0.1, -0.03);
        let phi: f64 = 0.4;
        let sp = split_coherences(bc, bc * phi.tan(), phi, 0.0).unwrap();
        assert!(sp.sigma_bc_dprime.norm() < EPS && sp.sigma_bd_dprime.norm() < EPS);
        assert!((sp.sigma_bc_prime - bc).norm() < EPS);
    }

    #[test]
    fn full_turn_is_the_identity() {
        let bc = C64::new(0.1, 0.02);
        let sp = split_coherences(bc, bc, FRAC_PI_4, TAU).unwrap();
        assert!(sp.sigma_bc_dprime.norm() < EPS && sp.sigma_bd_dprime.norm() < EPS);
    }

    #[test]
    fn half_turn_at_equal_controls_traps_everything() {
        let bc = C64::new(0.1, 0.0);
        let sp = split_coherences(bc, bc, FRAC_PI_4, PI).unwrap();
        assert!(sp.sigma_bc_prime.norm() < EPS);
        assert!((sp.sigma_bc_dprime + bc).norm() < EPS);
    }

    #[test]
    fn misaligned_storage_is_rejected() {
        let err =
            split_coherences(C64::new(0.1, 0.0), C64::new(0.05, 0.0), FRAC_PI_4, 1.0).unwrap_err();
        assert!(matches!(err, Error::StorageCondition { .. }));
    }

    #[test]
    fn height_factor_values() {
        assert_eq!(released_height_factor(0.3, 0.0), 1.0);
        for d in [0.3, 1.0, 2.5, 4.0] {
            assert!((released_height_factor(FRAC_PI_4, d) - (d / 2.0).cos().abs()).abs() < EPS);
        }
        assert!((released_height_factor(FRAC_PI_3, FRAC_PI_2) - 0.625f64.sqrt()).abs() < EPS);
        assert!((0.625f64.sqrt() - 0.790_57).abs() < 1e-5);
    }

    #[test]
    fn trapped_amplitude_values() {
        assert_eq!(
            trapped_z_amplitude(C64::new(0.1, 0.0), 0.5, 0.0),
            C64::default()
        );
        let z = trapped_z_amplitude(C64::new(0.1, 0.0), FRAC_PI_4, PI);
        assert!((z.norm() - 0.141_421_356_237_309_5).abs() < EPS);
        let bc = C64::new(0.07, 0.01);
        for d in [0.5, 1.5, 3.0, 5.0] {
            let z = trapped_z_amplitude(bc, 0.6, d);
            assert!(
                (z.norm() - 2.0 * 0.6f64.sin() * (d / 2.0).sin().abs() * bc.norm()).abs() < EPS
            );
        }
    }

    #[test]
    fn prediction_limits() {
        let xi: Vec<f64> = (0..11).map(|j| j as f64 / 10.0).collect();
        let psi: Vec<C64> = xi
            .iter()
            .map(|&x| C64::new((-(x - 0.5f64).powi(2) * 50.0).exp(), 0.0))
            .collect();
        let dark = mixing_frame(C64::default(), C64::default(), 100.0, 0.0, FRAC_PI_4);
        let hist: Vec<_> = (0..50).map(|k| (k as f64, dark)).collect();
        let p = released_pulse_prediction(&xi, &psi, &hist, 400.0);
        assert!(p.omega1.iter().all(|o| o.norm() < 1e-12));
        assert!(p.incomplete);

        // Ω = 10, κ = 100, α = 400: speed 100/400 = 0.25 L per 1/Γ.
        let on = mixing_frame(C64::new(10.0, 0.0), C64::default(), 100.0, 0.0, 0.0);
        let hist: Vec<_> = (0..=100).map(|k| (k as f64 * 0.05, on)).collect();
        let p = released_pulse_prediction(&xi, &psi, &hist, 400.0);
        let (t_peak, h) = p.peak();
        assert!((t_peak - 2.0).abs() < 1e-9, "{t_peak}");
        assert!((h - on.theta.cos()).abs() < 1e-12);
        assert!(!p.incomplete);
    }

    proptest! {
        #[test]
        fn height_factor_is_the_keep_modulus(phi in 0.0f64..FRAC_PI_2, delta in -10.0f64..10.0) {
            let (s, c) = phi.sin_cos();
            let keep = (C64::from_polar(c * c, delta) + s * s).norm();
            prop_assert!((released_height_factor(phi, delta) - keep).abs() <= 1e-12);
            prop_assert!((released_height_factor(phi, delta + TAU) - released_height_factor(phi, delta)).abs() <= 1e-12);
        }

        #[test]
        fn split_invariants(
            phi in 0.01f64..1.56,
            delta in -10.0f64..10.0,
            re in -1.0f64..1.0,
            im in -1.0f64..1.0,
        ) {
            let bc0 = C64::new(re, im);
            let bd0 = bc0 * phi.tan();
            let sp = split_coherences(bc0, bd0, phi, delta).unwrap();
            let (s, c) = phi.sin_cos();
            let scale = 1.0 + bc0.norm() + bd0.norm();
            prop_assert!((sp.sigma_bc() - bc0 * C64::from_polar(1.0, delta)).norm() <= EPS * scale);
            prop_assert!((sp.sigma_bd() - bd0).norm() <= EPS * scale);
            prop_assert!((sp.sigma_bc_prime * s - sp.sigma_bd_prime * c).norm() <= EPS * scale);
            prop_assert!((sp.sigma_bc_dprime * c + sp.sigma_bd_dprime * s).norm() <= EPS * scale);

            // projection route agrees with the closed forms
            let pr = project_coherences(sp.sigma_bc(), sp.sigma_bd(), phi);
            prop_assert!((pr.sigma_bc_prime - sp.sigma_bc_prime).norm() <= 1e-10 * scale);
            prop_assert!((pr.sigma_bd_dprime - sp.sigma_bd_dprime).norm() <= 1e-10 * scale);

            // Z from the trapped parts equals the reduced expression
            prop_assert!((sp.z(phi) - trapped_z_amplitude(bc0, phi, delta)).norm() <= 1e-10 * scale);

            let shifted = split_coherences(bc0, bd0, phi, delta + TAU).unwrap();
            prop_assert!((shifted.sigma_bc_prime - sp.sigma_bc_prime).norm() <= 1e-10 * scale);
            prop_assert!((shifted.sigma_bd_dprime - sp.sigma_bd_dprime).norm() <= 1e-10 * scale);
        }
    }
}
