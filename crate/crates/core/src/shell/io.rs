//! Run outputs: `boundary.csv`, `snapshots.ndjson` and `metrics.json`.
//!
//! Floats are written in their shortest round-trip form, so reading a file
//! back yields the exact values that were written.

use std::fs::{self, File};
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::config::render;
use crate::model::{Scenario, StorageTimeline};
use crate::propagator::{Diagnostics, Metrics, SimulationRecord, Snapshot};
use crate::{Error, Result};

pub const BOUNDARY_FILE: &str = "boundary.csv";
pub const SNAPSHOT_FILE: &str = "snapshots.ndjson";
pub const METRICS_FILE: &str = "metrics.json";

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundaryRow {
    #[serde(rename = "tau_invGamma")]
    pub tau: f64,
    pub re_omega1: f64,
    pub im_omega1: f64,
    pub abs_omega1: f64,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct SnapshotRow {
    pub label: String,
    pub tau: f64,
    pub xi: Vec<f64>,
    pub re_omega1: Vec<f64>,
    pub im_omega1: Vec<f64>,
    pub pop_a: Vec<f64>,
    pub pop_b: Vec<f64>,
    pub pop_c: Vec<f64>,
    pub pop_d: Vec<f64>,
    pub re_coh_ab: Vec<f64>,
    pub im_coh_ab: Vec<f64>,
    pub re_coh_ac: Vec<f64>,
    pub im_coh_ac: Vec<f64>,
    pub re_coh_ad: Vec<f64>,
    pub im_coh_ad: Vec<f64>,
    pub re_coh_bc: Vec<f64>,
    pub im_coh_bc: Vec<f64>,
    pub re_coh_bd: Vec<f64>,
    pub im_coh_bd: Vec<f64>,
    pub re_coh_cd: Vec<f64>,
    pub im_coh_cd: Vec<f64>,
    pub re_psi: Vec<f64>,
    pub im_psi: Vec<f64>,
    pub re_z: Vec<f64>,
    pub im_z: Vec<f64>,
    pub theta: f64,
    pub phi: f64,
}

impl SnapshotRow {
    pub fn from_snapshot(xi: &[f64], s: &Snapshot) -> SnapshotRow {
        let re = |v: &mut Vec<f64>, im: &mut Vec<f64>, c: crate::C64| {
            v.push(c.re);
            im.push(c.im);
        };
        let mut r = SnapshotRow {
            label: s.label.clone(),
            tau: s.tau,
            xi: xi.to_vec(),
            theta: s.polariton.frame.theta,
            phi: s.polariton.frame.phi,
            ..Default::default()
        };
        for (j, x) in s.sigma.iter().enumerate() {
            re(&mut r.re_omega1, &mut r.im_omega1, s.omega1[j]);
            r.pop_a.push(x.pop_a);
            r.pop_b.push(x.pop_b);
            r.pop_c.push(x.pop_c);
            r.pop_d.push(x.pop_d);
            re(&mut r.re_coh_ab, &mut r.im_coh_ab, x.coh_ab);
            re(&mut r.re_coh_ac, &mut r.im_coh_ac, x.coh_ac);
            re(&mut r.re_coh_ad, &mut r.im_coh_ad, x.coh_ad);
            re(&mut r.re_coh_bc, &mut r.im_coh_bc, x.coh_bc);
            re(&mut r.re_coh_bd, &mut r.im_coh_bd, x.coh_bd);
            re(&mut r.re_coh_cd, &mut r.im_coh_cd, x.coh_cd);
            re(&mut r.re_psi, &mut r.im_psi, s.polariton.psi[j]);
            re(&mut r.re_z, &mut r.im_z, s.polariton.z[j]);
        }
        r
    }
}

/// Contents of `metrics.json`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MetricsFile {
    pub metrics: Metrics,
    pub diagnostics: Diagnostics,
    pub timeline: StorageTimeline,
    pub warnings: Vec<String>,
    /// Scenario in config syntax.
    pub config: String,
    pub scenario: Scenario,
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| Error::io(path, e))
}

/// Writes the three output files into `dir`, creating it if needed.
pub fn write_outputs(record: &SimulationRecord, dir: &Path) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;

    let boundary = dir.join(BOUNDARY_FILE);
    let mut w = csv::Writer::from_writer(create(&boundary)?);
    for (tau, o) in record.exit_series() {
        w.serialize(BoundaryRow {
            tau,
            re_omega1: o.re,
            im_omega1: o.im,
            abs_omega1: o.norm(),
        })?;
    }
    w.flush().map_err(|e| Error::io(&boundary, e))?;

    let snaps = dir.join(SNAPSHOT_FILE);
    let mut w = create(&snaps)?;
    for s in &record.snapshots {
        serde_json::to_writer(&mut w, &SnapshotRow::from_snapshot(&record.xi, s))?;
        w.write_all(b"\n").map_err(|e| Error::io(&snaps, e))?;
    }
    w.flush().map_err(|e| Error::io(&snaps, e))?;

    let metrics = dir.join(METRICS_FILE);
    let mut w = create(&metrics)?;
    let file = MetricsFile {
        metrics: record.metrics,
        diagnostics: record.diagnostics,
        timeline: record.timeline,
        warnings: record.warnings.clone(),
        config: render(&record.scenario),
        scenario: record.scenario.clone(),
    };
    serde_json::to_writer_pretty(&mut w, &file)?;
    w.write_all(b"\n").map_err(|e| Error::io(&metrics, e))?;
    w.flush().map_err(|e| Error::io(&metrics, e))?;

    Ok(vec![boundary, snaps, metrics])
}

pub fn read_csv<T: serde::de::DeserializeOwned>(path: &Path) -> Result<Vec<T>> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    csv::Reader::from_reader(file)
        .deserialize()
        .collect::<std::result::Result<_, _>>()
        .map_err(|e| Error::Format {
            path: path.into(),
            message: e.to_string(),
        })
}

pub fn read_boundary(path: &Path) -> Result<Vec<BoundaryRow>> {
    read_csv(path)
}

pub fn read_snapshots(path: &Path) -> Result<Vec<SnapshotRow>> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut rows = Vec::new();
    for (k, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|e| Error::io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        rows.push(serde_json::from_str(&line).map_err(|e| Error::Format {
            path: path.into(),
            message: format!("line {}: {e}", k + 1),
        })?);
    }
    Ok(rows)
}

pub fn read_metrics(path: &Path) -> Result<MetricsFile> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| Error::Format {
        path: path.into(),
        message: e.to_string(),
    })
}
