//! Scenario files: flat `key = value` lines, `#` starts a comment.
//!
//! Times are in `1/Γ`, rates and amplitudes in `Γ`, phases in radians. The
//! magnetic stage is given in tesla and microseconds.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::str::FromStr;

use crate::model::{
    AtomicSystem, ControlField, DenseWindow, GridSpec, Level, LevelZeeman, MagneticStage,
    OutputSpec, PulseKind, PulseShape, Scenario, UnitContext,
};
use crate::{Error, Result};

const PULSE_REQUIRED: [&str; 4] = ["kind", "amplitude", "t_start", "t_end"];

/// Keys that must appear in every file, in canonical order.
pub fn required_keys() -> Vec<String> {
    let mut keys: Vec<String> = [
        "gamma_ab", "gamma_ac", "gamma_ad", "delta1", "delta2", "delta3", "alpha",
    ]
    .iter()
    .map(|k| k.to_string())
    .collect();
    for pulse in ["signal", "control2", "control3"] {
        keys.extend(PULSE_REQUIRED.iter().map(|f| format!("{pulse}.{f}")));
    }
    keys.extend(["grid.n_xi", "grid.d_tau", "grid.t_final"].map(String::from));
    keys
}

/// Every accepted key.
pub fn known_keys() -> Vec<String> {
    let mut keys = required_keys();
    keys.extend(
        [
            "gamma_mhz",
            "sample_length_cm",
            "density_cm3",
            "magnetic.b_tesla",
            "magnetic.t_start_us",
            "magnetic.duration_us",
        ]
        .map(String::from),
    );
    for pulse in ["signal", "control2", "control3"] {
        keys.extend(["rise", "phase"].map(|f| format!("{pulse}.{f}")));
    }
    for control in ["control2", "control3"] {
        keys.extend(["release.t_start", "release.t_end"].map(|f| format!("{control}.{f}")));
    }
    for level in Level::ALL {
        keys.extend(["f", "m", "g"].map(|f| format!("zeeman.{}.{f}", level.name())));
    }
    keys.extend(
        [
            "output.snapshots",
            "output.dense.t_start",
            "output.dense.t_end",
            "output.dense.every",
        ]
        .map(String::from),
    );
    keys
}

struct Entries {
    map: BTreeMap<String, String>,
}

impl Entries {
    fn parse(text: &str) -> Result<Entries> {
        let known = known_keys();
        let mut map = BTreeMap::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let Some((key, value)) = content.split_once('=') else {
                return Err(Error::Syntax {
                    line,
                    message: format!("expected `key = value`, found `{content}`"),
                });
            };
            let (key, value) = (key.trim(), value.trim());
            if key.is_empty() {
                return Err(Error::Syntax {
                    line,
                    message: "empty key".into(),
                });
            }
            if !known.iter().any(|k| k == key) {
                return Err(Error::UnknownKey {
                    line,
                    key: key.into(),
                });
            }
            if map.insert(key.to_string(), value.to_string()).is_some() {
                return Err(Error::DuplicateKey {
                    line,
                    key: key.into(),
                });
            }
        }
        let missing: Vec<String> = required_keys()
            .into_iter()
            .filter(|k| !map.contains_key(k))
            .collect();
        if !missing.is_empty() {
            return Err(Error::MissingKeys(missing));
        }
        Ok(Entries { map })
    }

    fn raw(&self, key: &str) -> Option<&str> {
        self.map.get(key).map(String::as_str)
    }

    fn opt<T: FromStr>(&self, key: &str, expected: &'static str) -> Result<Option<T>> {
        self.raw(key)
            .map(|v| {
                v.parse().map_err(|_| Error::Malformed {
                    key: key.into(),
                    value: v.into(),
                    expected,
                })
            })
            .transpose()
    }

    fn num(&self, key: &str) -> Result<f64> {
        self.opt_num(key)?
            .ok_or_else(|| Error::MissingKeys(vec![key.into()]))
    }

    fn opt_num(&self, key: &str) -> Result<Option<f64>> {
        self.opt(key, "a number")
    }

    fn pulse(&self, prefix: &str) -> Result<PulseShape> {
        let kind_key = format!("{prefix}.kind");
        let kind_raw = self.raw(&kind_key).unwrap_or_default();
        let kind = PulseKind::from_str(kind_raw).map_err(|_| Error::Malformed {
            key: kind_key,
            value: kind_raw.into(),
            expected: "one of sine-square, tanh-switch, rectangular, zero",
        })?;
        Ok(PulseShape {
            kind,
            amplitude: self.num(&format!("{prefix}.amplitude"))?,
            t_start: self.num(&format!("{prefix}.t_start"))?,
            t_end: self.num(&format!("{prefix}.t_end"))?,
            rise: self.opt_num(&format!("{prefix}.rise"))?.unwrap_or(0.0),
            phase: self.opt_num(&format!("{prefix}.phase"))?.unwrap_or(0.0),
        })
    }

    fn control(&self, prefix: &str) -> Result<ControlField> {
        let shape = self.pulse(prefix)?;
        let start = self.opt_num(&format!("{prefix}.release.t_start"))?;
        let end = self.opt_num(&format!("{prefix}.release.t_end"))?;
        match (start, end) {
            (None, None) => Ok(ControlField::single(shape)),
            (Some(s), Some(e)) => Ok(ControlField::with_release(shape, s, e)),
            (Some(_), None) => Err(Error::MissingKeys(vec![format!("{prefix}.release.t_end")])),
            (None, Some(_)) => Err(Error::MissingKeys(vec![format!(
                "{prefix}.release.t_start"
            )])),
        }
    }

    fn magnetic(&self) -> Result<Option<MagneticStage>> {
        let keys = [
            "magnetic.b_tesla",
            "magnetic.t_start_us",
            "magnetic.duration_us",
        ];
        let present: Vec<bool> = keys.iter().map(|k| self.map.contains_key(*k)).collect();
        if present.iter().all(|p| !p) {
            return Ok(None);
        }
        let missing: Vec<String> = keys
            .iter()
            .zip(&present)
            .filter(|(_, p)| !**p)
            .map(|(k, _)| k.to_string())
            .collect();
        if !missing.is_empty() {
            return Err(Error::MissingKeys(missing));
        }
        Ok(Some(MagneticStage {
            b_tesla: self.num(keys[0])?,
            t_start_us: self.num(keys[1])?,
            duration_us: self.num(keys[2])?,
        }))
    }

    fn zeeman(&self) -> Result<[LevelZeeman; 4]> {
        let mut levels = AtomicSystem::RUBIDIUM_ZEEMAN;
        for level in Level::ALL {
            let prefix = format!("zeeman.{}", level.name());
            let z = &mut levels[level as usize];
            if let Some(f) = self.opt_num(&format!("{prefix}.f"))? {
                z.f_quantum = f;
            }
            if let Some(m) = self.opt_num(&format!("{prefix}.m"))? {
                z.m_quantum = m;
            }
            if let Some(g) = self.opt_num(&format!("{prefix}.g"))? {
                z.g_factor = g;
            }
        }
        Ok(levels)
    }

    fn outputs(&self) -> Result<OutputSpec> {
        let snapshot_times = match self.raw("output.snapshots") {
            None => Vec::new(),
            Some(list) => parse_list(list).map_err(|value| Error::Malformed {
                key: "output.snapshots".into(),
                value,
                expected: "a comma-separated list of numbers",
            })?,
        };
        let dense = match (
            self.opt_num("output.dense.t_start")?,
            self.opt_num("output.dense.t_end")?,
        ) {
            (None, None) => None,
            (Some(t_start), Some(t_end)) => Some(DenseWindow {
                t_start,
                t_end,
                every: self
                    .opt("output.dense.every", "a positive integer")?
                    .unwrap_or(1),
            }),
            (Some(_), None) => return Err(Error::MissingKeys(vec!["output.dense.t_end".into()])),
            (None, Some(_)) => return Err(Error::MissingKeys(vec!["output.dense.t_start".into()])),
        };
        Ok(OutputSpec {
            snapshot_times,
            dense,
        })
    }
}

/// Parses a comma-separated list of numbers; the error carries the bad item.
pub fn parse_list(text: &str) -> std::result::Result<Vec<f64>, String> {
    text.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| s.parse::<f64>().map_err(|_| s.to_string()))
        .collect()
}

/// Parses and validates a scenario file.
pub fn parse_config(text: &str) -> Result<Scenario> {
    let e = Entries::parse(text)?;
    let units = match e.opt_num("gamma_mhz")? {
        Some(mhz) => UnitContext::from_gamma_mhz(mhz),
        None => UnitContext::default(),
    };
    let mut system = AtomicSystem::new(
        e.num("gamma_ab")?,
        e.num("gamma_ac")?,
        e.num("gamma_ad")?,
        [e.num("delta1")?, e.num("delta2")?, e.num("delta3")?],
        1.0,
    );
    system.density_cm3 = e.opt_num("density_cm3")?;
    system.zeeman = e.zeeman()?;
    let grid = GridSpec {
        n_xi: e.opt("grid.n_xi", "a non-negative integer")?.unwrap_or(0),
        d_tau: e.num("grid.d_tau")?,
        t_final: e.num("grid.t_final")?,
    };
    Scenario {
        system,
        signal: e.pulse("signal")?,
        control2: e.control("control2")?,
        control3: e.control("control3")?,
        magnetic: e.magnetic()?,
        sample_length_cm: e.opt_num("sample_length_cm")?.unwrap_or(1.0),
        coupling_alpha: e.num("alpha")?,
        grid,
        outputs: e.outputs()?,
        units,
    }
    .validated()
}

/// `gamma_mhz` value that parses back to exactly `units`.
fn exact_gamma_mhz(units: &UnitContext) -> f64 {
    let mut mhz = units.gamma_mhz();
    for _ in 0..8 {
        let back = UnitContext::from_gamma_mhz(mhz).gamma_si;
        if back == units.gamma_si {
            break;
        }
        mhz = if back < units.gamma_si {
            mhz.next_up()
        } else {
            mhz.next_down()
        };
    }
    mhz
}

fn write_pulse(out: &mut String, prefix: &str, p: &PulseShape) {
    let _ = writeln!(out, "{prefix}.kind = {}", p.kind);
    let _ = writeln!(out, "{prefix}.amplitude = {}", p.amplitude);
    let _ = writeln!(out, "{prefix}.t_start = {}", p.t_start);
    let _ = writeln!(out, "{prefix}.t_end = {}", p.t_end);
    let _ = writeln!(out, "{prefix}.rise = {}", p.rise);
    let _ = writeln!(out, "{prefix}.phase = {}", p.phase);
}

/// Renders a scenario so that [`parse_config`] reproduces it exactly.
pub fn render(s: &Scenario) -> String {
    let mut out = String::new();
    let sys = &s.system;
    out.push_str("# rates and detunings [Gamma]\n");
    for (k, v) in [
        ("gamma_ab", sys.gamma_ab),
        ("gamma_ac", sys.gamma_ac),
        ("gamma_ad", sys.gamma_ad),
        ("delta1", sys.delta1),
        ("delta2", sys.delta2),
        ("delta3", sys.delta3),
        ("alpha", s.coupling_alpha),
        ("sample_length_cm", s.sample_length_cm),
    ] {
        let _ = writeln!(out, "{k} = {v}");
    }
    if s.units != UnitContext::default() {
        let _ = writeln!(out, "gamma_mhz = {}", exact_gamma_mhz(&s.units));
    }
    if let Some(n) = sys.density_cm3 {
        let _ = writeln!(out, "density_cm3 = {n}");
    }
    for level in Level::ALL {
        let z = &sys.zeeman[level as usize];
        if *z != AtomicSystem::RUBIDIUM_ZEEMAN[level as usize] {
            let name = level.name();
            let _ = writeln!(out, "zeeman.{name}.f = {}", z.f_quantum);
            let _ = writeln!(out, "zeeman.{name}.m = {}", z.m_quantum);
            let _ = writeln!(out, "zeeman.{name}.g = {}", z.g_factor);
        }
    }
    out.push_str("\n# pulses: times [1/Gamma], amplitudes [Gamma], phases [rad]\n");
    write_pulse(&mut out, "signal", &s.signal);
    for (name, c) in [("control2", &s.control2), ("control3", &s.control3)] {
        write_pulse(&mut out, name, &c.shape);
        if let Some((a, b)) = c.release {
            let _ = writeln!(out, "{name}.release.t_start = {a}");
            let _ = writeln!(out, "{name}.release.t_end = {b}");
        }
    }
    if let Some(m) = &s.magnetic {
        out.push_str("\n# magnetic stage [T, us]\n");
        let _ = writeln!(out, "magnetic.b_tesla = {}", m.b_tesla);
        let _ = writeln!(out, "magnetic.t_start_us = {}", m.t_start_us);
        let _ = writeln!(out, "magnetic.duration_us = {}", m.duration_us);
    }
    out.push_str("\n# grid\n");
    let _ = writeln!(out, "grid.n_xi = {}", s.grid.n_xi);
    let _ = writeln!(out, "grid.d_tau = {}", s.grid.d_tau);
    let _ = writeln!(out, "grid.t_final = {}", s.grid.t_final);
    if !s.outputs.snapshot_times.is_empty() {
        let list: Vec<String> = s
            .outputs
            .snapshot_times
            .iter()
            .map(f64::to_string)
            .collect();
        let _ = writeln!(out, "output.snapshots = {}", list.join(", "));
    }
    if let Some(d) = &s.outputs.dense {
        let _ = writeln!(out, "output.dense.t_start = {}", d.t_start);
        let _ = writeln!(out, "output.dense.t_end = {}", d.t_end);
        let _ = writeln!(out, "output.dense.every = {}", d.every);
    }
    out
}
