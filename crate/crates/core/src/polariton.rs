//! Dark-state polariton `Ψ`, the orthogonal coherence combination `Z`, their
//! mixing angles, and finite-difference residuals of the polariton equations
//! evaluated on simulation frames.

use std::f64::consts::FRAC_PI_2;

use serde::{Deserialize, Serialize};

use crate::bloch::SigmaState;
use crate::propagator::SimulationRecord;
use crate::{Error, Result, C64};

/// Control norm below which `φ` is undefined and kept frozen [Γ].
pub const PHI_FREEZE_THRESHOLD: f64 = 1e-6;

const I: C64 = C64 { re: 0.0, im: 1.0 };

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PolaritonFrame {
    /// `tan θ = κ / Ω`.
    pub theta: f64,
    /// `tan φ = |Ω₃| / |Ω₂|`.
    pub phi: f64,
    pub chi2: f64,
    pub chi3: f64,
    pub chi: f64,
    /// `Ω = sqrt(|Ω₂|² + |Ω₃|²)` [Γ].
    pub omega_norm: f64,
    pub kappa: f64,
    /// Set when `Ω` is below [`PHI_FREEZE_THRESHOLD`] and `φ` was carried over.
    pub phi_frozen: bool,
}

pub fn mixing_frame(
    omega2: C64,
    omega3: C64,
    kappa: f64,
    chi_accumulated: f64,
    last_phi: f64,
) -> PolaritonFrame {
    let (a2, a3) = (omega2.norm(), omega3.norm());
    let omega = a2.hypot(a3);
    let frozen = omega < PHI_FREEZE_THRESHOLD;
    PolaritonFrame {
        theta: if omega == 0.0 {
            FRAC_PI_2
        } else {
            kappa.atan2(omega)
        },
        phi: if frozen { last_phi } else { a3.atan2(a2) },
        chi2: omega2.arg(),
        chi3: omega3.arg(),
        chi: chi_accumulated,
        omega_norm: omega,
        kappa,
        phi_frozen: frozen,
    }
}

/// `χ̇ = sin²θ (cos²φ χ̇₂ + sin²φ χ̇₃)`.
pub fn chi_rate(frame: &PolaritonFrame, chi2_dot: f64, chi3_dot: f64) -> f64 {
    let (s, c) = frame.phi.sin_cos();
    frame.theta.sin().powi(2) * (c * c * chi2_dot + s * s * chi3_dot)
}

/// `Ψ = e^{-iχ} [cos θ Ω₁ - κ sin θ (cos φ e^{iχ₂} σ_bc + sin φ e^{iχ₃} σ_bd)]`.
pub fn dark_polariton(omega1: C64, coh_bc: C64, coh_bd: C64, frame: &PolaritonFrame) -> C64 {
    let (st, ct) = frame.theta.sin_cos();
    let (sp, cp) = frame.phi.sin_cos();
    let atomic =
        C64::from_polar(cp, frame.chi2) * coh_bc + C64::from_polar(sp, frame.chi3) * coh_bd;
    C64::from_polar(1.0, -frame.chi) * (omega1 * ct - atomic * (frame.kappa * st))
}

/// `Z = sin φ e^{-iχ₃} σ_bc - cos φ e^{-iχ₂} σ_bd`.
pub fn z_polariton(coh_bc: C64, coh_bd: C64, frame: &PolaritonFrame) -> C64 {
    let (sp, cp) = frame.phi.sin_cos();
    C64::from_polar(sp, -frame.chi3) * coh_bc - C64::from_polar(cp, -frame.chi2) * coh_bd
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PolaritonFields {
    pub psi: Vec<C64>,
    pub z: Vec<C64>,
    pub frame: PolaritonFrame,
}

impl PolaritonFields {
    pub fn compute(omega1: &[C64], sigma: &[SigmaState], frame: PolaritonFrame) -> Self {
        let psi = omega1
            .iter()
            .zip(sigma)
            .map(|(&o, s)| dark_polariton(o, s.coh_bc, s.coh_bd, &frame))
            .collect();
        let z = sigma
            .iter()
            .map(|s| z_polariton(s.coh_bc, s.coh_bd, &frame))
            .collect();
        PolaritonFields { psi, z, frame }
    }
}

/// Normalised residuals of the two polariton equations, both with their
/// coupling terms and with the coupling dropped.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct DecouplingResidual {
    pub residual_psi: f64,
    pub residual_z: f64,
    pub residual_psi_decoupled: f64,
    pub residual_z_decoupled: f64,
    /// Largest `|φ̇|` seen in the window.
    pub max_phi_rate: f64,
}

fn wrap(a: f64) -> f64 {
    C64::from_polar(1.0, a).arg()
}

/// Evaluates the polariton equations on the record's frames inside
/// `[t_start, t_end]` with centred differences.
///
/// In the co-moving frame `∂_t + c cos²θ ∂_z` becomes
/// `sin²θ ∂_τ + (κ²/α) cos²θ ∂_ξ`. Residuals are rates [Γ]: the `Ψ` residual
/// is divided by the window's largest `|Ψ|`, the `Z` residual by the larger of
/// `max |Z|` and `max |Ψ| / κ`.
pub fn decoupling_residual(
    record: &SimulationRecord,
    t_start: f64,
    t_end: f64,
) -> Result<DecouplingResidual> {
    let mut frames: Vec<_> = record
        .snapshots
        .iter()
        .filter(|s| s.tau >= t_start && s.tau <= t_end)
        .collect();
    frames.dedup_by(|a, b| a.tau == b.tau);
    if frames.len() < 3 {
        return Err(Error::InsufficientSnapshots {
            needed: 3,
            found: frames.len(),
        });
    }
    let s = &record.scenario;
    let kappa = s.system.kappa;
    let light = kappa * kappa / s.coupling_alpha;
    let n = record.xi.len();
    let h = record.xi[1] - record.xi[0];

    let psi_max = frames
        .iter()
        .flat_map(|f| f.polariton.psi.iter())
        .map(|p| p.norm())
        .fold(0.0, f64::max);
    let z_max = frames
        .iter()
        .flat_map(|f| f.polariton.z.iter())
        .map(|p| p.norm())
        .fold(0.0, f64::max);
    let psi_scale = psi_max;
    let z_scale = z_max.max(psi_max / kappa);

    let mut out = DecouplingResidual::default();
    for k in 1..frames.len() - 1 {
        let (prev, cur, next) = (frames[k - 1], frames[k], frames[k + 1]);
        let span = next.tau - prev.tau;
        let (fp, f, fnx) = (
            &prev.polariton.frame,
            &cur.polariton.frame,
            &next.polariton.frame,
        );
        let phi_dot = (fnx.phi - fp.phi) / span;
        let chi2_dot = wrap(fnx.chi2 - fp.chi2) / span;
        let chi3_dot = wrap(fnx.chi3 - fp.chi3) / span;
        out.max_phi_rate = out.max_phi_rate.max(phi_dot.abs());

        let (st, ct) = f.theta.sin_cos();
        let (sp, cp) = f.phi.sin_cos();
        let root = f.omega_norm.hypot(kappa);
        // tan²θ cosθ Ω = κ² / sqrt(Ω² + κ²);  cosθ / Ω = 1 / sqrt(Ω² + κ²)
        let psi_coupling = C64::from_polar(kappa * kappa / root, f.chi2 + f.chi3 - f.chi)
            * C64::new(phi_dot, sp * cp * (chi3_dot - chi2_dot));
        let z_coupling = C64::from_polar(1.0 / root, f.chi - f.chi2 - f.chi3)
            * C64::new(-phi_dot, sp * cp * (chi3_dot - chi2_dot));
        let z_rotation = -I * (cp * cp * chi2_dot + sp * sp * chi3_dot);

        for j in 1..n - 1 {
            let psi = &cur.polariton.psi;
            let z = &cur.polariton.z;
            let dpsi_dt = (next.polariton.psi[j] - prev.polariton.psi[j]) / span;
            let dpsi_dx = (psi[j + 1] - psi[j - 1]) / (2.0 * h);
            let lhs_psi = dpsi_dt * (st * st) + dpsi_dx * (light * ct * ct);
            let rhs_psi = psi_coupling * z[j];
            let dz_dt = (next.polariton.z[j] - prev.polariton.z[j]) / span;
            let rhs_z = z_rotation * z[j] + z_coupling * psi[j];
            if psi_scale > 0.0 {
                out.residual_psi = out.residual_psi.max((lhs_psi - rhs_psi).norm() / psi_scale);
                out.residual_psi_decoupled =
                    out.residual_psi_decoupled.max(lhs_psi.norm() / psi_scale);
            }
            if z_scale > 0.0 {
                out.residual_z = out.residual_z.max((dz_dt - rhs_z).norm() / z_scale);
                out.residual_z_decoupled = out.residual_z_decoupled.max(dz_dt.norm() / z_scale);
            }
        }
    }
    Ok(out)
}
