//! Experiment configuration files.
//!
//! TOML with flat sections. Exact fields (`g1sq`, `g2sq`) take an integer or
//! a string holding an integer, a decimal or a fraction `"p/q"`. Unknown keys
//! are errors.

use num_rational::Ratio;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use stratflow_core::dynamics::{RandomInit, Scheme, SimulationConfig};
use stratflow_core::lattice::{LatticeDescriptor, LatticeKind};

use crate::CliError;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ExactValue {
    Int(i64),
    Text(String),
}

impl ExactValue {
    /// Reduced `(p, q)` with `q > 0`.
    pub fn to_fraction(&self) -> Result<(i64, i64), String> {
        let r = match self {
            ExactValue::Int(p) => Ratio::from_integer(*p),
            ExactValue::Text(s) => parse_exact(s)?,
        };
        Ok((*r.numer(), *r.denom()))
    }
}

/// Parses `"p/q"`, `"p"` or a decimal such as `"1.25"` exactly.
pub fn parse_exact(s: &str) -> Result<Ratio<i64>, String> {
    let s = s.trim();
    let bad =
        || format!("`{s}` is not an exact number (expected \"p/q\", an integer or a decimal)");
    if let Some((p, q)) = s.split_once('/') {
        let p: i64 = p.trim().parse().map_err(|_| bad())?;
        let q: i64 = q.trim().parse().map_err(|_| bad())?;
        if q == 0 {
            return Err(format!("`{s}` has a zero denominator"));
        }
        return Ok(Ratio::new(p, q));
    }
    if let Some((int, frac)) = s.split_once('.') {
        if frac.is_empty() || !frac.bytes().all(|b| b.is_ascii_digit()) || frac.len() > 15 {
            return Err(bad());
        }
        let neg = int.trim_start().starts_with('-');
        let ip: i64 = if int.is_empty() || int == "-" {
            0
        } else {
            int.parse().map_err(|_| bad())?
        };
        let scale = 10i64.pow(frac.len() as u32);
        let fp: i64 = frac.parse().map_err(|_| bad())?;
        let mag = ip
            .abs()
            .checked_mul(scale)
            .and_then(|x| x.checked_add(fp))
            .ok_or_else(bad)?;
        return Ok(Ratio::new(if neg { -mag } else { mag }, scale));
    }
    s.parse::<i64>().map(Ratio::from_integer).map_err(|_| bad())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Physics {
    pub nu: f64,
    pub kappa: f64,
    pub g: f64,
    #[serde(rename = "calN")]
    pub cal_n: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Time {
    #[serde(rename = "T")]
    pub t_end: f64,
    pub dt: f64,
    #[serde(default)]
    pub sample_interval: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LatticeSection {
    pub kind: LatticeKind,
    #[serde(rename = "M")]
    pub m: u32,
    pub g1sq: ExactValue,
    pub g2sq: ExactValue,
}

fn yes() -> bool {
    true
}

fn one() -> f64 {
    1.0
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InitSection {
    /// Excited shell radius; defaults to `M`.
    #[serde(default)]
    pub shell: Option<f64>,
    #[serde(default = "one")]
    pub amplitude: f64,
    #[serde(default = "yes")]
    pub waves: bool,
    #[serde(default = "yes")]
    pub vortex: bool,
    #[serde(default = "yes")]
    pub density: bool,
    #[serde(default)]
    pub plane_only: bool,
}

impl Default for InitSection {
    fn default() -> Self {
        InitSection {
            shell: None,
            amplitude: 1.0,
            waves: true,
            vortex: true,
            density: true,
            plane_only: false,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SchemeName {
    #[default]
    Ifrk4,
    Phase,
}

#[derive(Clone, Debug, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Options {
    #[serde(default)]
    pub qg_unit_diffusion: bool,
    #[serde(default)]
    pub drop_cancelling: bool,
    #[serde(default)]
    pub scheme: SchemeName,
    /// Directory for cached triad tables.
    #[serde(default)]
    pub cache_dir: Option<String>,
}

fn default_n_list() -> Vec<f64> {
    vec![10.0, 100.0, 1000.0]
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Converge {
    #[serde(rename = "N_list", default = "default_n_list")]
    pub n_list: Vec<f64>,
}

impl Default for Converge {
    fn default() -> Self {
        Converge {
            n_list: default_n_list(),
        }
    }
}

fn default_shells() -> Vec<u32> {
    vec![1, 2, 3]
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Census {
    #[serde(default = "default_shells")]
    pub shells: Vec<u32>,
}

impl Default for Census {
    fn default() -> Self {
        Census {
            shells: default_shells(),
        }
    }
}

fn default_pancake_n() -> f64 {
    1000.0
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Pancake {
    #[serde(rename = "N", default = "default_pancake_n")]
    pub n: f64,
    /// Grid points per axis; defaults to `2M+1`.
    #[serde(default)]
    pub grid: Option<[usize; 3]>,
}

impl Default for Pancake {
    fn default() -> Self {
        Pancake {
            n: default_pancake_n(),
            grid: None,
        }
    }
}

/// Contents of a configuration file.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawConfig {
    #[serde(default)]
    pub physics: Option<Physics>,
    #[serde(default)]
    pub time: Option<Time>,
    pub lattice: LatticeSection,
    #[serde(default)]
    pub init: InitSection,
    #[serde(default)]
    pub options: Options,
    #[serde(default)]
    pub converge: Converge,
    #[serde(default)]
    pub census: Census,
    #[serde(default)]
    pub pancake: Pancake,
}

/// Validated configuration.
#[derive(Clone, Debug, PartialEq)]
pub struct ParsedConfig {
    pub raw: RawConfig,
    pub lattice: LatticeDescriptor,
    /// Present when the file has `[physics]` and `[time]` sections.
    pub sim: Option<SimulationConfig>,
}

impl ParsedConfig {
    pub fn simulation(&self) -> Result<&SimulationConfig, CliError> {
        self.sim.as_ref().ok_or_else(|| {
            CliError::Config("this command needs [physics] and [time] sections".into())
        })
    }

    pub fn scheme(&self) -> Scheme {
        match self.raw.options.scheme {
            SchemeName::Ifrk4 => Scheme::IfRk4,
            SchemeName::Phase => Scheme::PhaseMidpoint,
        }
    }

    pub fn random_init(&self, seed: u64) -> RandomInit {
        let i = &self.raw.init;
        RandomInit {
            seed,
            shell: i.shell.unwrap_or(self.lattice.m as f64),
            amplitude: i.amplitude,
            sectors: [i.waves, i.vortex, i.waves],
            plane_only: i.plane_only,
            density: i.density,
        }
    }

    /// Effective configuration as TOML.
    pub fn to_toml(&self) -> String {
        toml::to_string(&self.raw).expect("configuration serializes")
    }

    /// SHA-256 of the effective configuration.
    pub fn hash_hex(&self) -> String {
        let d = Sha256::digest(self.to_toml().as_bytes());
        d.iter().map(|b| format!("{b:02x}")).collect()
    }
}

/// 1-based line of `key` inside `[section]`, for error messages.
fn locate(text: &str, section: &str, key: &str) -> Option<usize> {
    let mut current = String::new();
    for (i, line) in text.lines().enumerate() {
        let l = line.trim();
        if let Some(rest) = l.strip_prefix('[') {
            current = rest.trim_end_matches(']').trim().to_string();
            continue;
        }
        if current == section {
            if let Some((k, _)) = l.split_once('=') {
                if k.trim().trim_matches('"') == key {
                    return Some(i + 1);
                }
            }
        }
    }
    None
}

fn field_error(text: &str, section: &str, key: &str, why: &str) -> CliError {
    match locate(text, section, key) {
        Some(line) => CliError::Config(format!("line {line}: {section}.{key}: {why}")),
        None => CliError::Config(format!("{section}.{key}: {why}")),
    }
}

/// Splits `key=value`; the value is read as a TOML value, or as a string if
/// it does not parse.
fn parse_override(s: &str) -> Result<(Vec<String>, toml::Value), CliError> {
    let (k, v) = s
        .split_once('=')
        .ok_or_else(|| CliError::Config(format!("override `{s}` is not of the form key=value")))?;
    let path: Vec<String> = k.trim().split('.').map(str::to_string).collect();
    if path.iter().any(|p| p.is_empty()) {
        return Err(CliError::Config(format!("override `{s}` has an empty key")));
    }
    let v = v.trim();
    let value = toml::from_str::<toml::Table>(&format!("x = {v}"))
        .ok()
        .and_then(|mut t| t.remove("x"))
        .unwrap_or_else(|| toml::Value::String(v.to_string()));
    Ok((path, value))
}

fn apply_override(
    root: &mut toml::Table,
    path: &[String],
    value: toml::Value,
) -> Result<(), CliError> {
    let (last, parents) = path.split_last().expect("non-empty key path");
    let mut t = root;
    for p in parents {
        t = t
            .entry(p.clone())
            .or_insert_with(|| toml::Value::Table(toml::Table::new()))
            .as_table_mut()
            .ok_or_else(|| {
                CliError::Config(format!(
                    "override key `{}` is not a section",
                    path.join(".")
                ))
            })?;
    }
    t.insert(last.clone(), value);
    Ok(())
}

/// Parses and validates a configuration, applying `key=value` overrides.
pub fn parse_config(text: &str, overrides: &[String]) -> Result<ParsedConfig, CliError> {
    let mut raw: RawConfig =
        toml::from_str(text).map_err(|e| CliError::Config(e.to_string().trim_end().to_string()))?;
    if !overrides.is_empty() {
        let mut table: toml::Table =
            toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))?;
        for o in overrides {
            let (path, value) = parse_override(o)?;
            apply_override(&mut table, &path, value)?;
        }
        raw = toml::Value::Table(table)
            .try_into()
            .map_err(|e: toml::de::Error| {
                CliError::Config(format!("after overrides: {}", e.to_string().trim_end()))
            })?;
    }
    let l = &raw.lattice;
    let g1 = l
        .g1sq
        .to_fraction()
        .map_err(|e| field_error(text, "lattice", "g1sq", &e))?;
    let g2 = l
        .g2sq
        .to_fraction()
        .map_err(|e| field_error(text, "lattice", "g2sq", &e))?;
    let lattice = LatticeDescriptor {
        kind: l.kind,
        m: l.m,
        g1sq: [g1.0, g1.1],
        g2sq: [g2.0, g2.1],
    };
    if lattice.m == 0 {
        return Err(field_error(text, "lattice", "M", "must be at least 1"));
    }
    if let Err(e) = lattice.dilation() {
        return Err(field_error(text, "lattice", "g1sq", &e.to_string()));
    }
    let init = &raw.init;
    if !(init.amplitude > 0.0 && init.amplitude.is_finite()) {
        return Err(field_error(text, "init", "amplitude", "must be positive"));
    }
    if let Some(s) = init.shell {
        if s.is_nan() || s < 1.0 {
            return Err(field_error(text, "init", "shell", "must be at least 1"));
        }
    }
    if !(init.waves || init.vortex) {
        return Err(field_error(
            text,
            "init",
            "waves",
            "at least one of waves and vortex must be set",
        ));
    }
    let nl = &raw.converge.n_list;
    if nl.is_empty()
        || nl.iter().any(|&n| n.is_nan() || n <= 0.0)
        || nl.windows(2).any(|w| w[1] <= w[0])
    {
        return Err(field_error(
            text,
            "converge",
            "N_list",
            "must be positive and strictly increasing",
        ));
    }
    if raw.pancake.n.is_nan() || raw.pancake.n <= 0.0 {
        return Err(field_error(text, "pancake", "N", "must be positive"));
    }
    let sim = match (&raw.physics, &raw.time) {
        (Some(p), Some(t)) => {
            let c = SimulationConfig {
                nu: p.nu,
                kappa: p.kappa,
                g: p.g,
                cal_n: p.cal_n,
                t_end: t.t_end,
                dt: t.dt,
                sample_interval: t.sample_interval.unwrap_or(t.dt),
                lattice: lattice.clone(),
                qg_unit_diffusion: raw.options.qg_unit_diffusion,
                drop_cancelling: raw.options.drop_cancelling,
            };
            if let Err(e) = c.validate() {
                let msg = e.to_string();
                let (field, why) = msg.split_once(": ").unwrap_or(("physics", &msg));
                let section = match field {
                    "nu" | "kappa" | "g" | "calN" => "physics",
                    _ => "time",
                };
                return Err(field_error(text, section, field, why));
            }
            Some(c)
        }
        (None, None) => None,
        (None, Some(_)) => return Err(CliError::Config("[time] given without [physics]".into())),
        (Some(_), None) => return Err(CliError::Config("[physics] given without [time]".into())),
    };
    Ok(ParsedConfig { raw, lattice, sim })
}
