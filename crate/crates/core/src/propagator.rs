//! Couples the per-cell density matrices to the signal envelope in the
//! co-moving frame (`ξ = z`, `τ = t - z/c`) and marches whole runs.
//!
//! In the co-moving frame the envelope equation is a pure spatial ODE,
//! `∂Ω₁/∂ξ = -i α σ_ba` with `ξ` in units of `L`. Each time step
//!
//! 1. advances every cell with RK4, `Ω₁` interpolated linearly between its
//!    value at the step start and a guess for the step end (parallel),
//! 2. solves the causal trapezoid recurrence for the step-end field with the
//!    cell response linearised around that guess (sequential, scalar),
//! 3. re-advances every cell with the solved end values (parallel),
//! 4. re-solves the field from the new coherences with [`field_slice`].
//!
//! Steps 2-4 repeat until the field used by the cells and the field implied
//! by them agree. The coupling is therefore trapezoidal in time, which stays
//! stable at optical depths where freezing `Ω₁` over the step does not.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::bloch::{rk4_raw, FieldSample, SigmaState};
use crate::model::{Scenario, StorageTimeline, DARK_FIELD_LIMIT};
use crate::par::{self, Execution};
use crate::polariton::{self, PolaritonFields, PolaritonFrame};
use crate::{Error, Result, C64};

const I: C64 = C64 { re: 0.0, im: 1.0 };
/// Relative agreement demanded between the assumed and re-solved field.
const COUPLING_TOL: f64 = 1e-11;
const MAX_COUPLING_PASSES: usize = 8;

/// Uniform spatial grid on `[0, 1]` plus the time stepping.
#[derive(Clone, Debug, PartialEq)]
pub struct Grid {
    pub xi: Vec<f64>,
    pub d_tau: f64,
    pub n_tau: usize,
}

impl Grid {
    pub fn new(spec: &crate::model::GridSpec) -> Grid {
        let n = spec.n_xi;
        let xi = (0..n).map(|j| j as f64 / (n - 1) as f64).collect();
        Grid {
            xi,
            d_tau: spec.d_tau,
            n_tau: spec.n_tau(),
        }
    }

    pub fn spacing(&self) -> f64 {
        1.0 / (self.xi.len() - 1) as f64
    }

    pub fn tau(&self, step: usize) -> f64 {
        step as f64 * self.d_tau
    }
}

/// How the magnetic stage is applied.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub enum MagneticMode {
    /// Integrate the Bloch equations with Zeeman-shifted detunings.
    #[default]
    FullBloch,
    /// Multiply the coherences by the accumulated phases when the stage ends.
    PhaseKick,
}

#[derive(Clone, Copy, Debug, Default)]
pub struct RunOptions {
    pub execution: Execution,
    pub magnetic: MagneticMode,
}

/// One full-grid frame.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Snapshot {
    pub label: String,
    pub tau: f64,
    pub omega1: Vec<C64>,
    pub sigma: Vec<SigmaState>,
    pub polariton: PolaritonFields,
}

impl Snapshot {
    pub fn has_label(&self, label: &str) -> bool {
        self.label.split('+').any(|l| l == label)
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    pub incident_peak: f64,
    pub incident_peak_time: f64,
    /// Height the stored excitation would have if released by the
    /// release-stage controls without manipulation.
    pub stored_peak: f64,
    /// Stored atomic excitation relative to the incident photon number.
    pub stored_fraction: f64,
    pub coherence_scale: f64,
    pub released_peak: f64,
    pub release_time: f64,
    pub released_phase: f64,
    pub released_fraction: f64,
    /// Exit-peak time minus incident-peak time.
    pub group_delay: f64,
    pub transmitted_fraction: f64,
    /// Largest `|Z|` in the final frame.
    pub z_peak: f64,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Diagnostics {
    pub max_trace_drift: f64,
    pub min_population: f64,
    pub max_purity: f64,
    /// Largest relative mismatch between the field the cells were advanced
    /// with and the field re-solved from them.
    pub max_coupling_residual: f64,
    pub max_coupling_passes: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SimulationRecord {
    pub scenario: Scenario,
    pub xi: Vec<f64>,
    pub tau: Vec<f64>,
    /// `Ω₁(ξ = L, τ)`.
    pub boundary_series: Vec<C64>,
    pub snapshots: Vec<Snapshot>,
    pub timeline: StorageTimeline,
    pub metrics: Metrics,
    pub diagnostics: Diagnostics,
    pub warnings: Vec<String>,
}

impl SimulationRecord {
    pub fn snapshot(&self, label: &str) -> Option<&Snapshot> {
        self.snapshots.iter().find(|s| s.has_label(label))
    }

    /// Exit-face series with its time axis.
    pub fn exit_series(&self) -> impl Iterator<Item = (f64, C64)> + '_ {
        self.tau
            .iter()
            .copied()
            .zip(self.boundary_series.iter().copied())
    }
}

/// Integrates `dΩ₁/dξ = -i α σ_ba` from `ξ = 0` with the trapezoidal rule on
/// a uniform grid over `[0, 1]`.
pub fn field_slice(sigma_ba: &[C64], boundary: C64, alpha: f64) -> Result<Vec<C64>> {
    let mut out = vec![C64::default(); sigma_ba.len()];
    field_slice_into(sigma_ba.iter().copied(), boundary, alpha, &mut out)?;
    Ok(out)
}

fn field_slice_into(
    sigma_ba: impl Iterator<Item = C64>,
    boundary: C64,
    alpha: f64,
    out: &mut [C64],
) -> Result<()> {
    let n = out.len();
    let half = -I * (0.5 * alpha / (n - 1) as f64);
    let mut prev_field = boundary;
    let mut prev_sigma = C64::default();
    for (j, s) in sigma_ba.enumerate().take(n) {
        if !s.is_finite() {
            return Err(Error::Divergence {
                tau: f64::NAN,
                dt: f64::NAN,
            });
        }
        let field = if j == 0 {
            boundary
        } else {
            prev_field + half * (prev_sigma + s)
        };
        out[j] = field;
        prev_field = field;
        prev_sigma = s;
    }
    Ok(())
}

/// RK4 sub-interval of one time step with its field templates (`Ω₁` left
/// zero) and the interpolation weight of the step-end field at each sample.
#[derive(Clone, Copy)]
struct SubStep {
    dt: f64,
    base: [FieldSample; 3],
    weight: [f64; 3],
}

struct StepPlan {
    subs: Vec<SubStep>,
}

impl StepPlan {
    fn build(
        scenario: &Scenario,
        mode: MagneticMode,
        zeeman: Option<(f64, f64, [f64; 4])>,
        t0: f64,
        dt: f64,
    ) -> StepPlan {
        let t1 = t0 + dt;
        let mut cuts = vec![t0];
        if let (MagneticMode::FullBloch, Some((on, off, _))) = (mode, zeeman) {
            for e in [on, off] {
                if e > t0 && e < t1 {
                    cuts.push(e);
                }
            }
        }
        cuts.push(t1);
        cuts.sort_by(f64::total_cmp);
        let subs = cuts
            .windows(2)
            .map(|w| {
                let (a, b) = (w[0], w[1]);
                let mid = 0.5 * (a + b);
                let shifts = match (mode, zeeman) {
                    (MagneticMode::FullBloch, Some((on, off, s))) if mid >= on && mid < off => s,
                    _ => [0.0; 4],
                };
                let sample = |t: f64| {
                    let (o2, o3) = scenario.controls_at(t);
                    FieldSample {
                        omega1: C64::default(),
                        omega2: o2,
                        omega3: o3,
                        detuning_shift_b: shifts[1] - shifts[0],
                        detuning_shift_c: shifts[2] - shifts[0],
                        detuning_shift_d: shifts[3] - shifts[0],
                    }
                };
                SubStep {
                    dt: b - a,
                    base: [sample(a), sample(mid), sample(b)],
                    weight: [(a - t0) / dt, (mid - t0) / dt, (b - t0) / dt],
                }
            })
            .collect();
        StepPlan { subs }
    }

    #[inline]
    fn advance(&self, cell: &SigmaState, start: C64, end: C64, scenario: &Scenario) -> SigmaState {
        let sys = &scenario.system;
        let mut s = *cell;
        for sub in &self.subs {
            let mut f = sub.base;
            for (fs, w) in f.iter_mut().zip(sub.weight) {
                fs.omega1 = start + (end - start) * w;
            }
            s = rk4_raw(&s, &f, sys, sub.dt);
        }
        s
    }
}

/// Tracks the mixing angles across the run; `φ` is frozen while dark.
struct FrameTracker {
    kappa: f64,
    phi: f64,
    chi: f64,
    chi_rate_prev: f64,
    prev_controls: (C64, C64),
}

impl FrameTracker {
    fn new(scenario: &Scenario) -> Self {
        let (o2, o3) = scenario.controls_at(0.0);
        let frame = polariton::mixing_frame(o2, o3, scenario.system.kappa, 0.0, PI / 4.0);
        FrameTracker {
            kappa: scenario.system.kappa,
            phi: frame.phi,
            chi: 0.0,
            chi_rate_prev: 0.0,
            prev_controls: (o2, o3),
        }
    }

    fn advance(&mut self, scenario: &Scenario, t1: f64, dt: f64) {
        let (o2, o3) = scenario.controls_at(t1);
        let rate = |prev: C64, now: C64| {
            if prev.norm() < DARK_FIELD_LIMIT || now.norm() < DARK_FIELD_LIMIT {
                0.0
            } else {
                (now * prev.conj()).arg() / dt
            }
        };
        let frame = polariton::mixing_frame(o2, o3, self.kappa, self.chi, self.phi);
        let chi_dot = polariton::chi_rate(
            &frame,
            rate(self.prev_controls.0, o2),
            rate(self.prev_controls.1, o3),
        );
        self.chi += 0.5 * (self.chi_rate_prev + chi_dot) * dt;
        self.chi_rate_prev = chi_dot;
        self.phi = frame.phi;
        self.prev_controls = (o2, o3);
    }

    fn frame(&self, scenario: &Scenario, t: f64) -> PolaritonFrame {
        let (o2, o3) = scenario.controls_at(t);
        polariton::mixing_frame(o2, o3, self.kappa, self.chi, self.phi)
    }
}

pub fn run_simulation(scenario: &Scenario) -> Result<SimulationRecord> {
    run_with(scenario, RunOptions::default(), &|t| {
        scenario.signal.evaluate(t)
    })
}

/// Runs `scenario` with an arbitrary entrance-face signal `boundary(τ)`.
pub fn run_with(
    scenario: &Scenario,
    opts: RunOptions,
    boundary: &(dyn Fn(f64) -> C64 + Sync),
) -> Result<SimulationRecord> {
    let scenario = scenario.clone().validated()?;
    scenario.check_magnetic_dark()?;
    let grid = Grid::new(&scenario.grid);
    let n = grid.xi.len();
    let h = grid.spacing();
    let dt = grid.d_tau;
    let alpha = scenario.coupling_alpha;
    let sys = scenario.system;
    let timeline = scenario.timeline();

    let zeeman = scenario.magnetic.as_ref().map(|m| {
        let rates = sys.zeeman_rates(m.b_au(), scenario.units.gamma_au());
        (m.t_start(&scenario.units), m.t_end(&scenario.units), rates)
    });
    let mut kick_pending = opts.magnetic == MagneticMode::PhaseKick && zeeman.is_some();

    let requests = snapshot_requests(&scenario, &timeline, grid.n_tau);
    let mut next_request = 0;

    let mut cells = vec![SigmaState::ground(); n];
    let mut trial = cells.clone();
    let mut fresh = cells.clone();
    let mut om_prev = vec![C64::default(); n];
    let mut om_now = vec![C64::default(); n];
    om_now[0] = boundary(0.0);
    let mut guess = om_now.clone();
    let mut om_end = om_now.clone();
    let mut om_new = om_now.clone();
    let mut linear = vec![C64::default(); n];

    let scale = scenario.signal.amplitude.max(f64::MIN_POSITIVE);
    let mut tracker = FrameTracker::new(&scenario);
    let mut tau = Vec::with_capacity(grid.n_tau + 1);
    let mut exit = Vec::with_capacity(grid.n_tau + 1);
    let mut snapshots = Vec::new();
    let mut diag = Diagnostics {
        min_population: 0.0,
        max_purity: 1.0,
        ..Default::default()
    };

    tau.push(0.0);
    exit.push(om_now[n - 1]);
    take_snapshots(
        &requests,
        &mut next_request,
        0,
        &grid,
        &scenario,
        &tracker,
        &om_now,
        &cells,
        &mut snapshots,
    );

    let half = -I * (0.5 * alpha * h);
    for step in 0..grid.n_tau {
        let t0 = grid.tau(step);
        let t1 = grid.tau(step + 1);
        let plan = StepPlan::build(&scenario, opts.magnetic, zeeman, t0, dt);
        let b1 = boundary(t1);

        for j in 0..n {
            guess[j] = if step == 0 {
                om_now[j]
            } else {
                2.0 * om_now[j] - om_prev[j]
            };
        }
        guess[0] = b1;

        // Sensitivity of σ_ba(t1) to the step-end field through the
        // -Ω₁*(σ_bb - σ_aa) drive, RK4 weights summed, first decay correction.
        let lam = C64::new(-0.5 * sys.gamma_total, sys.delta1);
        let decay = C64::new(1.0, 0.0) + lam * (dt / 3.0);
        for (k, c) in linear.iter_mut().zip(&cells) {
            *k = -I * (0.5 * dt * (c.pop_b - c.pop_a)) * decay;
        }

        par::fill_indexed(opts.execution, &mut trial, |j| {
            plan.advance(&cells[j], om_now[j], guess[j], &scenario)
        });

        let mut passes = 0;
        loop {
            passes += 1;
            // causal recurrence for the step-end field
            om_end[0] = b1;
            let mut prev_s = trial[0].coh_ba() + linear[0] * (b1 - guess[0]);
            for j in 1..n {
                let rhs = om_end[j - 1]
                    + half * prev_s
                    + half * (trial[j].coh_ba() - linear[j] * guess[j]);
                let field = rhs / (C64::new(1.0, 0.0) - half * linear[j]);
                om_end[j] = field;
                prev_s = trial[j].coh_ba() + linear[j] * (field - guess[j]);
            }
            par::fill_indexed(opts.execution, &mut fresh, |j| {
                plan.advance(&cells[j], om_now[j], om_end[j], &scenario)
            });
            field_slice_into(fresh.iter().map(|c| c.coh_ba()), b1, alpha, &mut om_new)
                .map_err(|_| Error::Divergence { tau: t0, dt })?;
            let residual = om_new
                .iter()
                .zip(&om_end)
                .map(|(a, b)| (a - b).norm())
                .fold(0.0, f64::max)
                / scale;
            if residual <= COUPLING_TOL || passes == MAX_COUPLING_PASSES {
                diag.max_coupling_residual = diag.max_coupling_residual.max(residual);
                diag.max_coupling_passes = diag.max_coupling_passes.max(passes);
                break;
            }
            std::mem::swap(&mut trial, &mut fresh);
            guess.copy_from_slice(&om_end);
        }

        std::mem::swap(&mut cells, &mut fresh);
        std::mem::swap(&mut om_prev, &mut om_now);
        std::mem::swap(&mut om_now, &mut om_new);

        if kick_pending {
            let (_, off, rates) = zeeman.expect("kick implies a stage");
            if t1 >= off {
                let duration = scenario
                    .magnetic
                    .as_ref()
                    .expect("stage")
                    .duration(&scenario.units);
                let phases = rates.map(|r| r * duration);
                cells.iter_mut().for_each(|c| c.apply_level_phases(phases));
                kick_pending = false;
            }
        }

        for c in &cells {
            if !c.is_finite() {
                return Err(Error::Divergence { tau: t0, dt });
            }
            diag.max_trace_drift = diag.max_trace_drift.max((c.trace() - 1.0).abs());
            diag.min_population = diag.min_population.min(c.min_population());
            diag.max_purity = diag.max_purity.max(c.purity());
        }

        tracker.advance(&scenario, t1, dt);
        tau.push(t1);
        exit.push(om_now[n - 1]);
        take_snapshots(
            &requests,
            &mut next_request,
            step + 1,
            &grid,
            &scenario,
            &tracker,
            &om_now,
            &cells,
            &mut snapshots,
        );
    }

    let mut record = SimulationRecord {
        scenario,
        xi: grid.xi,
        tau,
        boundary_series: exit,
        snapshots,
        timeline,
        metrics: Metrics::default(),
        diagnostics: diag,
        warnings: Vec::new(),
    };
    record.metrics = compute_metrics(&record, boundary);
    record.warnings = collect_warnings(&record);
    Ok(record)
}

fn snapshot_requests(
    scenario: &Scenario,
    timeline: &StorageTimeline,
    n_tau: usize,
) -> Vec<(usize, String)> {
    let g = &scenario.grid;
    let mut req: Vec<(usize, String)> = Vec::new();
    if let Some(t) = timeline.stored_at {
        req.push((g.step_of(t), "stored".into()));
    }
    if let Some(t) = timeline.kicked_at {
        req.push((g.step_of(t), "kicked".into()));
    }
    if let Some(t) = timeline.release_start {
        req.push((g.step_of(t), "release".into()));
    }
    req.push((n_tau, "final".into()));
    for &t in &scenario.outputs.snapshot_times {
        req.push((g.step_of(t), "requested".into()));
    }
    if let Some(d) = &scenario.outputs.dense {
        let (a, b) = (g.step_of(d.t_start), g.step_of(d.t_end));
        req.extend((a..=b).step_by(d.every).map(|k| (k, "dense".to_string())));
    }
    req.sort_by_key(|(k, _)| *k);
    let mut merged: Vec<(usize, String)> = Vec::new();
    for (k, label) in req {
        match merged.last_mut() {
            Some((last, l)) if *last == k => {
                if !l.split('+').any(|x| x == label) {
                    l.push('+');
                    l.push_str(&label);
                }
            }
            _ => merged.push((k, label)),
        }
    }
    merged
}

#[allow(clippy::too_many_arguments)]
fn take_snapshots(
    requests: &[(usize, String)],
    next: &mut usize,
    step: usize,
    grid: &Grid,
    scenario: &Scenario,
    tracker: &FrameTracker,
    omega1: &[C64],
    cells: &[SigmaState],
    out: &mut Vec<Snapshot>,
) {
    while *next < requests.len() && requests[*next].0 <= step {
        let tau = grid.tau(step);
        let frame = tracker.frame(scenario, tau);
        out.push(Snapshot {
            label: requests[*next].1.clone(),
            tau,
            omega1: omega1.to_vec(),
            sigma: cells.to_vec(),
            polariton: PolaritonFields::compute(omega1, cells, frame),
        });
        *next += 1;
    }
}

fn trapezoid(tau: &[f64], values: impl Iterator<Item = f64>) -> f64 {
    let v: Vec<f64> = values.collect();
    tau.windows(2)
        .zip(v.windows(2))
        .map(|(t, y)| 0.5 * (t[1] - t[0]) * (y[0] + y[1]))
        .sum()
}

fn argmax(values: impl Iterator<Item = f64>) -> (usize, f64) {
    values
        .enumerate()
        .fold((0, f64::NEG_INFINITY), |best, (i, v)| {
            if v > best.1 {
                (i, v)
            } else {
                best
            }
        })
}

/// Recomputes every metric from the record's series and snapshots.
pub fn compute_metrics(record: &SimulationRecord, boundary: &dyn Fn(f64) -> C64) -> Metrics {
    let s = &record.scenario;
    let tau = &record.tau;
    let incident: Vec<C64> = tau.iter().map(|&t| boundary(t)).collect();
    let exit = &record.boundary_series;

    let (i_in, incident_peak) = argmax(incident.iter().map(|c| c.norm()));
    let incident_energy = trapezoid(tau, incident.iter().map(|c| c.norm_sqr()));
    let exit_energy = trapezoid(tau, exit.iter().map(|c| c.norm_sqr()));
    let ratio = |x: f64| {
        if incident_energy > 0.0 {
            x / incident_energy
        } else {
            0.0
        }
    };
    let (i_out, _) = argmax(exit.iter().map(|c| c.norm()));

    let start = record
        .timeline
        .release_start
        .map_or(0, |t| tau.partition_point(|&x| x < t));
    let (k, released_peak) = argmax(exit[start..].iter().map(|c| c.norm()));
    let released_energy = trapezoid(&tau[start..], exit[start..].iter().map(|c| c.norm_sqr()));

    let release_norm = tau[start..]
        .iter()
        .map(|&t| s.control_norm(t))
        .fold(0.0, f64::max);
    let kappa = s.system.kappa;
    let cos_theta = release_norm / release_norm.hypot(kappa);

    let (mut stored_peak, mut coherence_scale, mut stored_fraction) = (0.0, 0.0, 0.0);
    if let Some(snap) = record.snapshot("stored") {
        let phi = snap.polariton.frame.phi;
        let (c, sn) = (phi.cos(), phi.sin());
        stored_peak = snap
            .sigma
            .iter()
            .map(|x| (x.coh_bc * c + x.coh_bd * sn).norm())
            .fold(0.0, f64::max)
            * kappa
            * cos_theta;
        coherence_scale = snap
            .sigma
            .iter()
            .map(|x| x.coh_bc.norm_sqr() + x.coh_bd.norm_sqr())
            .fold(0.0, f64::max)
            .sqrt();
        let atomic = trapezoid(
            &record.xi,
            snap.sigma
                .iter()
                .map(|x| x.coh_bc.norm_sqr() + x.coh_bd.norm_sqr()),
        );
        stored_fraction = ratio(s.coupling_alpha * atomic);
    }

    let z_peak = record.snapshot("final").map_or(0.0, |f| {
        f.polariton.z.iter().map(|z| z.norm()).fold(0.0, f64::max)
    });

    Metrics {
        incident_peak,
        incident_peak_time: tau[i_in],
        stored_peak,
        stored_fraction,
        coherence_scale,
        released_peak,
        release_time: tau[start + k],
        released_phase: exit[start + k].arg(),
        released_fraction: ratio(released_energy),
        group_delay: tau[i_out] - tau[i_in],
        transmitted_fraction: ratio(exit_energy),
        z_peak,
    }
}

fn collect_warnings(record: &SimulationRecord) -> Vec<String> {
    let mut w = Vec::new();
    let peak = record
        .boundary_series
        .iter()
        .map(|c| c.norm())
        .fold(0.0, f64::max);
    if let Some(last) = record.boundary_series.last() {
        if peak > 0.0 && last.norm() > 0.01 * peak {
            w.push(format!(
                "exit field still at {:.1}% of its peak at t_final; released pulse clipped",
                100.0 * last.norm() / peak
            ));
        }
    }
    if record.diagnostics.max_coupling_residual > COUPLING_TOL {
        w.push(format!(
            "field coupling did not converge (relative residual {:e})",
            record.diagnostics.max_coupling_residual
        ));
    }
    if record.diagnostics.min_population < -1e-9 {
        w.push(format!(
            "negative population {:e}",
            record.diagnostics.min_population
        ));
    }
    w
}

/// Relative change of the released peak when both `n_xi - 1` and `1/d_tau`
/// are multiplied by `factor`.
pub fn convergence_probe(scenario: &Scenario, factor: usize) -> Result<f64> {
    convergence_probe_with(scenario, factor, Execution::default())
}

pub fn convergence_probe_with(
    scenario: &Scenario,
    factor: usize,
    execution: Execution,
) -> Result<f64> {
    if ![1, 2, 4].contains(&factor) {
        return Err(Error::invalid("refine", "factor must be 1, 2 or 4"));
    }
    if factor == 1 {
        scenario.clone().validated()?;
        return Ok(0.0);
    }
    let fine = scenario.clone().with_grid(scenario.grid.refined(factor));
    let opts = RunOptions {
        execution,
        ..Default::default()
    };
    let runs = par::map_collect(execution, &[scenario.clone(), fine], |s| {
        run_with(s, opts, &|t| s.signal.evaluate(t)).map(|r| r.metrics.released_peak)
    });
    let base = runs[0].as_ref().map_err(clone_err)?;
    let refined = runs[1].as_ref().map_err(clone_err)?;
    Ok((refined - base).abs() / base.abs().max(f64::MIN_POSITIVE))
}

fn clone_err(e: &Error) -> Error {
    match e {
        Error::Divergence { tau, dt } => Error::Divergence { tau: *tau, dt: *dt },
        Error::MagneticOverlap { tau, field, value } => Error::MagneticOverlap {
            tau: *tau,
            field,
            value: *value,
        },
        other => Error::invalid("simulation", other.to_string()),
    }
}

/// Σ_ξ (1 - σ_bb), the total atomic excitation of a frame.
pub fn total_excitation(sigma: &[SigmaState]) -> f64 {
    sigma.iter().map(|s| 1.0 - s.pop_b).sum()
}
