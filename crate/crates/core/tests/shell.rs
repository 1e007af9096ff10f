mod common;

use std::fs;
use std::path::Path;
use std::process::Command;

use common::{coarse_storage, coarse_transparency};
use proptest::prelude::*;
use tripodsim::model::GridSpec;
use tripodsim::par::Execution;
use tripodsim::propagator::run_simulation;
use tripodsim::shell::io::{
    read_boundary, read_metrics, read_snapshots, BOUNDARY_FILE, METRICS_FILE, SNAPSHOT_FILE,
};
use tripodsim::shell::sweep::SUMMARY_FILE;
use tripodsim::shell::{
    parse_config, render, run_sweep, write_outputs, SweepParam, SweepSpec, SweepSummary,
};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_tripodsim"))
}

fn small_storage() -> tripodsim::model::Scenario {
    let s = coarse_storage();
    let grid = GridSpec { n_xi: 30, ..s.grid };
    s.with_grid(grid)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn rendered_configs_parse_back_exactly(
        gammas in prop::array::uniform3(0.0..1.0f64),
        deltas in prop::array::uniform3(-2.0..2.0f64),
        alpha in 1.0..1e4f64,
        signal_amp in 1e-4..0.1f64,
        phase in -3.0..3.0f64,
        delta in 0.0..6.0f64,
        n_xi in 2usize..400,
        density in prop::option::of(1e9..1e13f64),
        times in prop::collection::vec(0.0..250.0f64, 0..4),
    ) {
        let mut s = coarse_storage();
        s.system.gamma_ab = gammas[0];
        s.system.gamma_ac = gammas[1];
        s.system.gamma_ad = gammas[2];
        s.system.gamma_total = gammas.iter().sum();
        s.system.delta1 = deltas[0];
        s.system.delta2 = deltas[1];
        s.system.delta3 = deltas[2];
        s.system.density_cm3 = density;
        s.coupling_alpha = alpha;
        s.signal.amplitude = signal_amp;
        s.control3.shape.phase = phase;
        s.grid.n_xi = n_xi;
        s.outputs.snapshot_times = times;
        let s = s.with_delta(delta).unwrap().validated().unwrap();
        let back = parse_config(&render(&s)).unwrap();
        prop_assert_eq!(back, s);
    }
}

#[test]
fn example_configs_parse() {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs");
    let mut seen = 0;
    for entry in fs::read_dir(dir).unwrap() {
        let path = entry.unwrap().path();
        if path.extension().is_some_and(|e| e == "cfg") {
            let s = parse_config(&fs::read_to_string(&path).unwrap()).unwrap();
            assert_eq!(parse_config(&render(&s)).unwrap(), s, "{}", path.display());
            seen += 1;
        }
    }
    assert!(seen >= 3);
}

#[test]
fn output_files_reflect_the_record() {
    let mut s = coarse_transparency();
    s.outputs.snapshot_times = vec![100.0];
    let rec = run_simulation(&s).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let paths = write_outputs(&rec, dir.path()).unwrap();
    assert_eq!(paths.len(), 3);

    let lines = fs::read_to_string(dir.path().join(SNAPSHOT_FILE)).unwrap();
    assert_eq!(lines.lines().count(), 2);
    let snaps = read_snapshots(&dir.path().join(SNAPSHOT_FILE)).unwrap();
    assert_eq!(snaps.len(), rec.snapshots.len());
    assert_eq!(snaps[0].tau, 100.0);

    let header = fs::read_to_string(dir.path().join(BOUNDARY_FILE)).unwrap();
    assert!(header.starts_with("tau_invGamma,re_omega1,im_omega1,abs_omega1\n"));
    let rows = read_boundary(&dir.path().join(BOUNDARY_FILE)).unwrap();
    assert_eq!(rows.len(), s.grid.n_tau() + 1);
    for (r, (t, o)) in rows.iter().zip(rec.exit_series()) {
        assert_eq!((r.tau, r.re_omega1, r.im_omega1), (t, o.re, o.im));
    }

    let m = read_metrics(&dir.path().join(METRICS_FILE)).unwrap();
    assert_eq!(m.metrics, rec.metrics);
    assert_eq!(parse_config(&m.config).unwrap(), s);

    // a second run writes identical bytes
    let again = tempfile::tempdir().unwrap();
    write_outputs(&run_simulation(&s).unwrap(), again.path()).unwrap();
    for f in [BOUNDARY_FILE, SNAPSHOT_FILE, METRICS_FILE] {
        assert_eq!(
            fs::read(dir.path().join(f)).unwrap(),
            fs::read(again.path().join(f)).unwrap(),
            "{f}"
        );
    }
}

#[test]
fn sweep_is_schedule_independent() {
    let values = vec![0.5, std::f64::consts::PI];
    let mut files = Vec::new();
    for exec in [Execution::Sequential, Execution::Parallel] {
        let dir = tempfile::tempdir().unwrap();
        let spec = SweepSpec {
            parameter: SweepParam::Delta,
            values: values.clone(),
            base: small_storage(),
            outputs_dir: Some(dir.path().into()),
        };
        let summary = run_sweep(&spec, exec).unwrap();
        assert_eq!(summary.rows.len(), 2);
        assert_eq!(
            SweepSummary::read(&dir.path().join(SUMMARY_FILE)).unwrap(),
            summary.rows
        );
        // the pi point doubles as the trapped-coherence reference
        assert!((summary.rows[1].z_peak_ratio - 1.0).abs() < 1e-12);
        let mut runs: Vec<_> = fs::read_dir(dir.path())
            .unwrap()
            .map(|e| e.unwrap().file_name().into_string().unwrap())
            .collect();
        runs.sort();
        assert_eq!(runs.len(), 4, "{runs:?}");
        files.push(fs::read(dir.path().join(SUMMARY_FILE)).unwrap());
    }
    assert_eq!(files[0], files[1]);
}

#[test]
fn cli_run_check_plot() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("t.cfg");
    fs::write(&cfg, render(&coarse_transparency())).unwrap();
    let out = dir.path().join("out");

    let st = bin()
        .args(["--quiet", "run", "--config"])
        .arg(&cfg)
        .arg("--out")
        .arg(&out)
        .status()
        .unwrap();
    assert!(st.success());
    for f in [BOUNDARY_FILE, SNAPSHOT_FILE, METRICS_FILE] {
        assert!(out.join(f).exists(), "{f}");
    }

    let plots = dir.path().join("svg");
    let st = bin()
        .args(["--quiet", "plot"])
        .arg(out.join(BOUNDARY_FILE))
        .arg(out.join(SNAPSHOT_FILE))
        .arg(out.join(METRICS_FILE))
        .arg("--out")
        .arg(&plots)
        .status()
        .unwrap();
    assert!(st.success());
    let svgs: Vec<_> = fs::read_dir(&plots)
        .unwrap()
        .map(|e| e.unwrap().path())
        .collect();
    assert!(svgs.len() >= 3);
    for p in &svgs {
        assert!(
            fs::read_to_string(p).unwrap().starts_with("<svg"),
            "{}",
            p.display()
        );
    }

    let o = bin()
        .args(["check", "--refine", "1", "--config"])
        .arg(&cfg)
        .output()
        .unwrap();
    let text = String::from_utf8(o.stdout).unwrap();
    assert!(text
        .lines()
        .all(|l| l.starts_with("PASS") || l.starts_with("FAIL")));
    assert!(text.contains("convergence x1"));
}

#[test]
fn cli_sweep_honours_thread_cap() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("s.cfg");
    fs::write(&cfg, render(&small_storage())).unwrap();
    let out = dir.path().join("sweep");
    let st = bin()
        .env("TRIPODSIM_THREADS", "1")
        .args([
            "--quiet", "sweep", "--param", "delta", "--values", "0,1.5", "--config",
        ])
        .arg(&cfg)
        .arg("--out")
        .arg(&out)
        .status()
        .unwrap();
    assert!(st.success());
    let rows = SweepSummary::read(&out.join(SUMMARY_FILE)).unwrap();
    assert_eq!(rows.len(), 2);
    assert!((rows[0].released_peak_ratio - 1.0).abs() < 1e-12);
}

#[test]
fn cli_reports_config_errors() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.cfg");
    let mut text = render(&coarse_transparency());
    text.push_str("# trailing\nwarp_factor = 9\n");
    let line = text.lines().count();
    fs::write(&cfg, text).unwrap();
    let o = bin().args(["run", "--config"]).arg(&cfg).output().unwrap();
    assert_eq!(o.status.code(), Some(2));
    let err = String::from_utf8(o.stderr).unwrap();
    assert!(err.contains("warp_factor"), "{err}");
    assert!(err.contains(&format!("line {line}")), "{err}");

    let o = bin()
        .args(["run", "--config"])
        .arg(dir.path().join("missing.cfg"))
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(2));
}
