//! Acceptance gate. Prints one PASS/FAIL line per criterion and exits with
//! a failure status if any criterion fails.

use std::f64::consts::{PI, TAU};
use std::path::Path;
use std::process::ExitCode;
use std::time::Instant;

use tripodsim::analytic::predict_release;
use tripodsim::bloch::{rk4_step, FieldSample, SigmaState};
use tripodsim::model::{magnetic_phase_area, AtomicSystem, Scenario};
use tripodsim::par::{self, Execution};
use tripodsim::propagator::{convergence_probe, run_simulation, SimulationRecord};
use tripodsim::shell::cli::magnetic_mode_gap;
use tripodsim::shell::io::read_boundary;
use tripodsim::shell::{parse_config, run_sweep, SweepParam, SweepSpec};
use tripodsim::{Result, C64};

struct Gate {
    failures: usize,
}

impl Gate {
    fn report(&mut self, id: u32, pass: bool, detail: String) {
        println!(
            "{} criterion {id}: {detail}",
            if pass { "PASS" } else { "FAIL" }
        );
        if !pass {
            self.failures += 1;
        }
    }

    fn error(&mut self, id: u32, e: impl std::fmt::Display) {
        self.report(id, false, format!("error: {e}"));
    }
}

fn base_scenario() -> Scenario {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs/storage_kick.cfg");
    let text = std::fs::read_to_string(&path).expect("configs/storage_kick.cfg");
    let parsed = parse_config(&text).expect("storage_kick.cfg parses");
    let mut builtin = Scenario::reference_storage();
    builtin.system.density_cm3 = parsed.system.density_cm3;
    assert_eq!(
        parsed, builtin,
        "storage_kick.cfg drifted from the built-in scenario"
    );
    parsed
}

const DELTAS: [f64; 5] = [0.0, 0.5 * PI, PI, 1.5 * PI, TAU];

struct SweepOutcome {
    rows: Vec<tripodsim::shell::sweep::SweepRow>,
    seconds_per_run: f64,
    runs: usize,
    dir: tempfile::TempDir,
}

fn delta_sweep(base: &Scenario) -> Result<SweepOutcome> {
    let dir = tempfile::tempdir().expect("temp dir");
    let spec = SweepSpec {
        parameter: SweepParam::Delta,
        values: DELTAS.to_vec(),
        base: base.clone(),
        outputs_dir: Some(dir.path().to_path_buf()),
    };
    let start = Instant::now();
    let summary = par::with_thread_cap(Some(1), || run_sweep(&spec, Execution::Sequential))?;
    let elapsed = start.elapsed().as_secs_f64();
    let runs = std::fs::read_dir(dir.path())
        .map(|d| {
            d.filter(|e| e.as_ref().is_ok_and(|e| e.path().is_dir()))
                .count()
        })
        .unwrap_or(0)
        .max(1);
    Ok(SweepOutcome {
        rows: summary.rows,
        seconds_per_run: elapsed / runs as f64,
        runs,
        dir,
    })
}

fn max_deviation<'a>(pairs: impl Iterator<Item = (&'a f64, f64, f64)>) -> (f64, String) {
    let mut worst: f64 = 0.0;
    let mut parts = Vec::new();
    for (delta, got, want) in pairs {
        worst = worst.max((got - want).abs());
        parts.push(format!("{:.3}:{got:.4}/{want:.4}", delta));
    }
    (worst, parts.join(" "))
}

fn criteria_1_to_3(gate: &mut Gate, base: &Scenario) {
    let sweep = match delta_sweep(base) {
        Ok(s) => s,
        Err(e) => {
            for id in 1..=3 {
                gate.error(id, &e);
            }
            return;
        }
    };
    let rows = &sweep.rows;

    let (dev, detail) = max_deviation(
        DELTAS
            .iter()
            .zip(rows)
            .map(|(d, r)| (d, r.released_peak_ratio, (0.5 * d).cos().abs())),
    );
    gate.report(
        1,
        dev <= 0.05 && sweep.seconds_per_run <= 60.0,
        format!(
            "released ratio vs |cos(delta/2)| max dev {dev:.4} (limit 0.05) [{detail}]; {:.1} s per run on one core over {} runs (limit 60)",
            sweep.seconds_per_run, sweep.runs
        ),
    );

    let (dev, detail) = max_deviation(
        DELTAS
            .iter()
            .zip(rows)
            .map(|(d, r)| (d, r.z_peak_ratio, (0.5 * d).sin().abs())),
    );
    gate.report(
        2,
        dev <= 0.05,
        format!("Z ratio vs |sin(delta/2)| max dev {dev:.4} (limit 0.05) [{detail}]"),
    );

    let read = |k: usize| {
        let name = format!("run_{k:03}_delta_{}", DELTAS[k]);
        read_boundary(&sweep.dir.path().join(name).join("boundary.csv"))
    };
    match (read(0), read(4)) {
        (Ok(zero), Ok(full)) => {
            let peak = zero.iter().map(|r| r.abs_omega1).fold(0.0, f64::max);
            let release = base.timeline().release_start.unwrap_or(0.0);
            let gap = zero
                .iter()
                .zip(&full)
                .filter(|(a, _)| a.tau >= release)
                .map(|(a, b)| C64::new(a.re_omega1 - b.re_omega1, a.im_omega1 - b.im_omega1).norm())
                .fold(0.0, f64::max);
            let rel = gap / peak;
            gate.report(
                3,
                rel <= 0.02,
                format!("delta = 2 pi vs delta = 0 released pulse max pointwise gap {rel:.2e} of peak (limit 0.02)"),
            );
        }
        (Err(e), _) | (_, Err(e)) => gate.error(3, e),
    }
}

fn criterion_4(gate: &mut Gate, records: &[(f64, &SimulationRecord)]) {
    let mut worst: f64 = 0.0;
    let mut parts = Vec::new();
    for (delta, rec) in records {
        match predict_release(rec) {
            Ok(p) => {
                let (_, predicted) = p.peak();
                let rel = (predicted - rec.metrics.released_peak).abs() / rec.metrics.released_peak;
                worst = worst.max(rel);
                parts.push(format!(
                    "delta {delta:.3}: predicted {predicted:.5e} simulated {:.5e}",
                    rec.metrics.released_peak
                ));
            }
            Err(e) => return gate.error(4, e),
        }
    }
    gate.report(
        4,
        worst <= 0.05,
        format!(
            "release prediction vs simulation max rel dev {worst:.4} (limit 0.05) [{}]",
            parts.join("; ")
        ),
    );
}

fn criterion_5(gate: &mut Gate) -> Option<SimulationRecord> {
    let s = Scenario::reference_transparency();
    let rec = match run_simulation(&s) {
        Ok(r) => r,
        Err(e) => {
            gate.error(5, e);
            return None;
        }
    };
    let t = 0.5 * s.grid.t_final;
    let omega_sq = s.control2.envelope(t).powi(2) + s.control3.envelope(t).powi(2);
    let expected = s.coupling_alpha / omega_sq;
    let rel = (rec.metrics.group_delay - expected).abs() / expected;
    gate.report(
        5,
        rel <= 0.10,
        format!(
            "group delay {:.2} vs alpha/Omega^2 = {expected:.2} rel dev {rel:.4} (limit 0.10)",
            rec.metrics.group_delay
        ),
    );
    Some(rec)
}

fn local_maxima(series: &[f64], floor: f64) -> Vec<usize> {
    // maxima above `floor`, merged unless separated by a dip of at least 5%
    let mut peaks: Vec<usize> = Vec::new();
    for k in 1..series.len().saturating_sub(1) {
        if series[k] > floor && series[k] >= series[k - 1] && series[k] > series[k + 1] {
            if let Some(&last) = peaks.last() {
                let dip = series[last..=k]
                    .iter()
                    .cloned()
                    .fold(f64::INFINITY, f64::min);
                if dip > 0.95 * series[last].min(series[k]) {
                    if series[k] > series[last] {
                        *peaks.last_mut().unwrap() = k;
                    }
                    continue;
                }
            }
            peaks.push(k);
        }
    }
    peaks
}

fn criterion_6(gate: &mut Gate) -> Option<SimulationRecord> {
    let s = Scenario::reference_delayed_release(3.6);
    let rec = match run_simulation(&s) {
        Ok(r) => r,
        Err(e) => {
            gate.error(6, e);
            return None;
        }
    };
    let m = &rec.metrics;
    let exit: Vec<f64> = rec.boundary_series.iter().map(|c| c.norm()).collect();
    let peaks = local_maxima(&exit, 0.1 * m.stored_peak);
    let a = peaks.len() == 2;

    let z_rel = m.z_peak / m.coherence_scale;
    let b = z_rel > 0.3;

    let (mut c, mut worst_mod, mut worst_re) = (false, f64::NAN, f64::NAN);
    if let Some(last) = rec.snapshot("final") {
        let amp = |x: &SigmaState| x.coh_bc.norm().max(x.coh_bd.norm());
        let peak = last.sigma.iter().map(amp).fold(0.0, f64::max);
        let max_bc = last
            .sigma
            .iter()
            .map(|x| x.coh_bc.norm())
            .fold(0.0, f64::max);
        let cells: Vec<_> = last.sigma.iter().filter(|x| amp(x) > 0.1 * peak).collect();
        worst_mod = cells
            .iter()
            .map(|x| (x.coh_bc.norm() - x.coh_bd.norm()).abs() / max_bc)
            .fold(0.0, f64::max);
        worst_re = cells
            .iter()
            .map(|x| (x.coh_bc * x.coh_bd.conj()).re)
            .fold(f64::NEG_INFINITY, f64::max);
        c = !cells.is_empty() && worst_mod <= 0.1 && worst_re < 0.0;
    }
    let times: Vec<String> = peaks
        .iter()
        .map(|&k| format!("{:.1}", rec.tau[k]))
        .collect();
    gate.report(
        6,
        a && b && c,
        format!(
            "(a) {} exit maxima above 10% of stored peak at tau [{}]; (b) final max|Z| / coherence scale = {z_rel:.3} (> 0.3); (c) max ||s_bc|-|s_bd||/max|s_bc| = {worst_mod:.2e} (<= 0.1), max Re(s_bc s_bd*) = {worst_re:.2e} (< 0)",
            peaks.len(),
            times.join(", ")
        ),
    );
    Some(rec)
}

fn rabi_error() -> f64 {
    let omega = 0.7;
    let dt = 0.01;
    let sys = AtomicSystem::new(0.0, 0.0, 0.0, [0.0; 3], 1.0);
    let field = FieldSample {
        omega1: C64::new(omega, 0.0),
        ..Default::default()
    };
    let mut state = SigmaState::ground();
    let mut worst: f64 = 0.0;
    let steps = (4.0 * PI / omega / dt) as usize;
    for n in 1..=steps {
        state = rk4_step(&state, &[field; 3], &sys, (n - 1) as f64 * dt, dt).expect("finite");
        let t = n as f64 * dt;
        worst = worst.max((state.pop_b - (omega * t).cos().powi(2)).abs());
    }
    worst
}

fn criterion_7(gate: &mut Gate, records: &[&SimulationRecord], kicked: &SimulationRecord) {
    let drift = records
        .iter()
        .map(|r| r.diagnostics.max_trace_drift)
        .fold(0.0, f64::max);
    let rabi = rabi_error();
    let gap = match magnetic_mode_gap(kicked, &kicked.scenario) {
        Ok(g) => g,
        Err(e) => return gate.error(7, e),
    };
    // independent chain: T -> a.u. field, us -> a.u. time, delta = -B t / 2
    let oracle = (3e-5 / 2.3505e5) * (2.4e-6 / 2.4189e-17) / 2.0;
    let area = magnetic_phase_area(&Scenario::reference_storage().with_b_tesla(3e-5))
        .map(|a| a.sigma_bc.abs())
        .unwrap_or(f64::NAN);
    let zeeman_ok = (area - TAU).abs() / TAU <= 0.01 && (area - oracle).abs() / oracle <= 1e-3;
    gate.report(
        7,
        drift <= 1e-6 && rabi <= 1e-5 && gap <= 1e-6 && zeeman_ok,
        format!(
            "trace drift {drift:.2e} (<= 1e-6); Rabi error {rabi:.2e} (<= 1e-5); full Bloch vs phase kick {gap:.2e} (<= 1e-6); |delta| at 3e-5 T over 2.4 us = {area:.4} vs oracle {oracle:.4}, 2 pi within {:.2}%",
            100.0 * (area - TAU).abs() / TAU
        ),
    );
}

fn criterion_8(gate: &mut Gate, base: &Scenario) {
    match convergence_probe(base, 2) {
        Ok(change) => gate.report(
            8,
            change <= 0.01,
            format!("relative released-peak change under x2 refinement {change:.2e} (limit 0.01)"),
        ),
        Err(e) => gate.error(8, e),
    }
}

fn main() -> ExitCode {
    // libtest-style arguments are ignored; listing mode prints nothing
    if std::env::args().any(|a| a == "--list") {
        return ExitCode::SUCCESS;
    }
    let mut gate = Gate { failures: 0 };
    let base = base_scenario();

    criteria_1_to_3(&mut gate, &base);

    let zero = run_simulation(&base);
    let quarter = base
        .clone()
        .with_delta(0.5 * PI)
        .and_then(|s| run_simulation(&s));
    let (zero, quarter) = match (zero, quarter) {
        (Ok(z), Ok(q)) => (z, q),
        (Err(e), _) | (_, Err(e)) => {
            gate.error(4, e);
            println!("acceptance: {} criteria failed", gate.failures + 1);
            return ExitCode::FAILURE;
        }
    };
    criterion_4(&mut gate, &[(0.0, &zero), (0.5 * PI, &quarter)]);
    let transparency = criterion_5(&mut gate);
    let delayed = criterion_6(&mut gate);

    let mut all = vec![&zero, &quarter];
    all.extend(transparency.as_ref());
    all.extend(delayed.as_ref());
    criterion_7(&mut gate, &all, &quarter);
    criterion_8(&mut gate, &base);

    if gate.failures == 0 {
        println!("acceptance: all 8 criteria pass");
        ExitCode::SUCCESS
    } else {
        println!("acceptance: {} criteria failed", gate.failures);
        ExitCode::FAILURE
    }
}
