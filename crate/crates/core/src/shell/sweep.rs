//! Parameter sweeps over independent runs.

use std::f64::consts::PI;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::io::write_outputs;
use crate::analytic::released_height_factor;
use crate::model::{magnetic_phase_area, Scenario};
use crate::par::{self, Execution};
use crate::propagator::{run_simulation, SimulationRecord};
use crate::{Error, Result};

pub const SUMMARY_FILE: &str = "summary.csv";
pub const THREADS_ENV: &str = "TRIPODSIM_THREADS";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepParam {
    /// Magnetic phase area on `σ_bc` [rad].
    Delta,
    /// Magnetic induction [T].
    BField,
    /// Lead of control 3 over control 2 at release [μs].
    Control3Lead,
}

impl SweepParam {
    pub fn name(self) -> &'static str {
        match self {
            SweepParam::Delta => "delta",
            SweepParam::BField => "b_field",
            SweepParam::Control3Lead => "control3_lead",
        }
    }

    pub fn apply(self, base: &Scenario, value: f64) -> Result<Scenario> {
        let s = match self {
            SweepParam::Delta => base.clone().with_delta(value)?,
            SweepParam::BField => {
                if base.magnetic.is_none() {
                    return Err(Error::NoMagneticStage);
                }
                base.clone().with_b_tesla(value)
            }
            SweepParam::Control3Lead => {
                let mut s = base.clone();
                if s.control2.release.is_none() || s.control3.release.is_none() {
                    return Err(Error::invalid(
                        "control3_lead",
                        "both controls need a release segment",
                    ));
                }
                s.set_control3_lead(s.units.us_to_internal(value));
                s
            }
        };
        s.validated()
    }

    fn is_magnetic(self) -> bool {
        matches!(self, SweepParam::Delta | SweepParam::BField)
    }
}

impl fmt::Display for SweepParam {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SweepParam {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "delta" => Ok(SweepParam::Delta),
            "b_field" => Ok(SweepParam::BField),
            "control3_lead" => Ok(SweepParam::Control3Lead),
            _ => Err(Error::invalid(
                "param",
                format!("`{s}` is not one of delta, b_field, control3_lead"),
            )),
        }
    }
}

#[derive(Clone, Debug)]
pub struct SweepSpec {
    pub parameter: SweepParam,
    pub values: Vec<f64>,
    pub base: Scenario,
    /// Per-run output directories go here when set.
    pub outputs_dir: Option<PathBuf>,
}

impl SweepSpec {
    pub fn validate(&self) -> Result<()> {
        if self.values.is_empty() {
            return Err(Error::invalid("values", "empty list"));
        }
        if let Some(v) = self.values.iter().find(|v| !v.is_finite()) {
            return Err(Error::invalid("values", format!("non-finite value {v}")));
        }
        Ok(())
    }
}

/// One summary line. Ratios of magnetic sweeps are taken against a run
/// with zero phase area (released peak) and a run with phase area `π`
/// (trapped `Z`); lead sweeps use the zero-lead release and the run's own
/// stored coherence scale.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub value: f64,
    /// Phase area on `σ_bc` [rad]; empty when the run has no magnetic stage.
    pub delta: Option<f64>,
    pub released_peak: f64,
    pub released_peak_ratio: f64,
    pub z_peak: f64,
    pub z_peak_ratio: f64,
    pub predicted_ratio: Option<f64>,
    pub predicted_z_ratio: Option<f64>,
    pub deviation: Option<f64>,
    pub stored_fraction: f64,
    pub release_time: f64,
    pub warnings: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SweepSummary {
    pub parameter: SweepParam,
    pub rows: Vec<SweepRow>,
}

impl SweepSummary {
    pub fn write(&self, path: &Path) -> Result<()> {
        let mut w = csv::Writer::from_path(path)?;
        for r in &self.rows {
            w.serialize(r)?;
        }
        w.flush().map_err(|e| Error::io(path, e))
    }

    pub fn read(path: &Path) -> Result<Vec<SweepRow>> {
        super::io::read_csv(path)
    }
}

/// Worker cap from [`THREADS_ENV`], if set to a positive integer.
pub fn thread_cap() -> Option<usize> {
    std::env::var(THREADS_ENV)
        .ok()?
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
}

fn run_dir(root: &Path, param: SweepParam, index: usize, value: f64) -> PathBuf {
    root.join(format!("run_{index:03}_{param}_{value}"))
}

/// Runs every sweep point (plus the reference runs) and writes per-run
/// outputs and `summary.csv` when an output directory is set.
pub fn run_sweep(spec: &SweepSpec, execution: Execution) -> Result<SweepSummary> {
    spec.validate()?;
    let p = spec.parameter;
    let mut scenarios = spec
        .values
        .iter()
        .map(|&v| p.apply(&spec.base, v))
        .collect::<Result<Vec<_>>>()?;

    let (zero_ref, pi_ref) = match p {
        SweepParam::Delta | SweepParam::BField => {
            let zero = spec.base.clone().with_delta(0.0)?;
            let pi = spec.base.clone().with_delta(PI)?;
            (Some(zero), Some(pi))
        }
        SweepParam::Control3Lead => (Some(p.apply(&spec.base, 0.0)?), None),
    };
    let mut index_of = |s: Option<Scenario>| {
        s.map(|s| match scenarios.iter().position(|x| *x == s) {
            Some(k) => k,
            None => {
                scenarios.push(s);
                scenarios.len() - 1
            }
        })
    };
    let zero_idx = index_of(zero_ref);
    let pi_idx = index_of(pi_ref);

    let records: Vec<Result<SimulationRecord>> = par::with_thread_cap(thread_cap(), || {
        par::map_collect(execution, &scenarios, run_simulation)
    });
    let records = records.into_iter().collect::<Result<Vec<_>>>()?;

    if let Some(root) = &spec.outputs_dir {
        std::fs::create_dir_all(root).map_err(|e| Error::io(root, e))?;
        for (k, r) in records.iter().enumerate() {
            let dir = match spec.values.get(k) {
                Some(&v) => run_dir(root, p, k, v),
                None => root.join(format!("reference_{k:03}")),
            };
            write_outputs(r, &dir)?;
        }
    }

    let released_ref = zero_idx.map(|k| records[k].metrics.released_peak);
    let z_ref = pi_idx.map(|k| records[k].metrics.z_peak);
    let ratio = |x: f64, r: Option<f64>| match r {
        Some(r) if r > 0.0 => x / r,
        _ => 0.0,
    };

    let mut rows = Vec::with_capacity(spec.values.len());
    for (k, &value) in spec.values.iter().enumerate() {
        let rec = &records[k];
        let m = &rec.metrics;
        let delta = match magnetic_phase_area(&rec.scenario) {
            Ok(a) => Some(a.sigma_bc),
            Err(Error::NoMagneticStage) => None,
            Err(e) => return Err(e),
        };
        let phi = rec.snapshot("stored").map(|s| s.polariton.frame.phi);
        let (predicted, predicted_z) = match (p.is_magnetic(), delta, phi) {
            (true, Some(d), Some(phi)) => (
                Some(released_height_factor(phi, d)),
                Some((0.5 * d).sin().abs()),
            ),
            _ => (None, None),
        };
        let released_peak_ratio = ratio(m.released_peak, released_ref);
        let z_peak_ratio = if p.is_magnetic() {
            ratio(m.z_peak, z_ref)
        } else {
            ratio(m.z_peak, Some(m.coherence_scale))
        };
        rows.push(SweepRow {
            value,
            delta,
            released_peak: m.released_peak,
            released_peak_ratio,
            z_peak: m.z_peak,
            z_peak_ratio,
            predicted_ratio: predicted,
            predicted_z_ratio: predicted_z,
            deviation: predicted.map(|x| released_peak_ratio - x),
            stored_fraction: m.stored_fraction,
            release_time: m.release_time,
            warnings: rec.warnings.len(),
        });
    }
    let summary = SweepSummary { parameter: p, rows };
    if let Some(root) = &spec.outputs_dir {
        summary.write(&root.join(SUMMARY_FILE))?;
    }
    Ok(summary)
}
