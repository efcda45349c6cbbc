use std::fs;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use serde_json::{json, Value};

use stratflow_core::dynamics::{
    convergence_study, integrate_with, pancake_experiment, qg_equiv_check, random_initial_state,
    state_to_json, theta_from_c0, write_diagnostics_csv, write_fields_binary, Model, System,
};
use stratflow_core::interaction::{load_or_build, AmplitudeState};
use stratflow_core::resonance::{
    gamma_scan, max_resonant_fiber, restricted_convolution_census, CensusShell,
};

use crate::config::{parse_config, ParsedConfig};
use crate::CliError;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Command {
    Simulate,
    Limit,
    Converge,
    GammaCheck,
    ResonanceCensus,
    QgEquiv,
    Pancake,
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Simulate => "simulate",
            Command::Limit => "limit",
            Command::Converge => "converge",
            Command::GammaCheck => "gamma-check",
            Command::ResonanceCensus => "resonance-census",
            Command::QgEquiv => "qg-equiv",
            Command::Pancake => "pancake",
        }
    }
}

/// One invocation.
#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentSpec {
    pub command: Command,
    pub config: PathBuf,
    pub out: PathBuf,
    pub seed: u64,
    pub overrides: Vec<String>,
}

/// Files written and non-fatal findings.
#[derive(Clone, Debug, PartialEq)]
pub struct RunSummary {
    pub outputs: Vec<String>,
    pub warnings: Vec<String>,
    pub manifest: PathBuf,
}

struct Outputs<'a> {
    dir: &'a Path,
    files: Vec<String>,
}

impl Outputs<'_> {
    fn path(&mut self, name: &str) -> PathBuf {
        self.files.push(name.to_string());
        self.dir.join(name)
    }

    fn text(&mut self, name: &str, body: &str) -> Result<(), CliError> {
        Ok(fs::write(self.path(name), body)?)
    }

    fn json(&mut self, name: &str, v: &Value) -> Result<(), CliError> {
        self.text(
            name,
            &(serde_json::to_string_pretty(v).expect("json value serializes") + "\n"),
        )
    }

    fn csv<F>(&mut self, name: &str, f: F) -> Result<(), CliError>
    where
        F: FnOnce(&mut dyn Write) -> std::io::Result<()>,
    {
        let mut w = BufWriter::new(fs::File::create(self.path(name))?);
        f(&mut w)?;
        w.flush()?;
        Ok(())
    }
}

fn model(cfg: &ParsedConfig, with_table: bool) -> Result<Model, CliError> {
    let set = cfg.lattice.build()?;
    match (&cfg.raw.options.cache_dir, with_table) {
        (Some(dir), true) => {
            let tmp = Model::new(set.clone())?;
            let table = load_or_build(&set, &tmp.basis, Path::new(dir))?;
            Ok(Model::with_table(set, table)?)
        }
        _ => Ok(Model::new(set)?),
    }
}

fn random_init(cfg: &ParsedConfig, model: &Model, seed: u64) -> Result<AmplitudeState, CliError> {
    Ok(random_initial_state(model, &cfg.random_init(seed))?)
}

fn default_grid(cfg: &ParsedConfig) -> [usize; 3] {
    cfg.raw
        .pancake
        .grid
        .unwrap_or([2 * cfg.lattice.m as usize + 1; 3])
}

/// Runs one command and writes its artifacts and `manifest.json` to the
/// output directory.
pub fn run(spec: &ExperimentSpec) -> Result<RunSummary, CliError> {
    let text = fs::read_to_string(&spec.config)
        .map_err(|e| CliError::Io(format!("cannot read {}: {e}", spec.config.display())))?;
    let cfg = parse_config(&text, &spec.overrides)?;
    fs::create_dir_all(&spec.out)
        .map_err(|e| CliError::Io(format!("cannot create {}: {e}", spec.out.display())))?;
    let mut out = Outputs {
        dir: &spec.out,
        files: Vec::new(),
    };
    let mut warnings = Vec::new();
    if let Some(sim) = &cfg.sim {
        warnings.extend(sim.warnings());
    }
    out.text("config.toml", &cfg.to_toml())?;
    let summary = match spec.command {
        Command::Simulate | Command::Limit => {
            let sim = cfg.simulation()?;
            let limit = spec.command == Command::Limit;
            let m = model(&cfg, limit)?;
            let init = random_init(&cfg, &m, spec.seed)?;
            let system = if limit {
                System::Limit
            } else {
                System::Full { n: sim.n_big() }
            };
            let scheme = if limit {
                Default::default()
            } else {
                cfg.scheme()
            };
            let tr = integrate_with(&m, system, scheme, sim, &init)?;
            write_diagnostics_csv(&out.path("diagnostics.csv"), &tr.diagnostics)?;
            out.json("initial_state.json", &state_to_json(&m.set, &init))?;
            out.json("final_state.json", &state_to_json(&m.set, tr.last()))?;
            let last = tr.diagnostics.last().expect("trajectory is non-empty");
            json!({
                "N": if limit { Value::Null } else { json!(sim.n_big()) },
                "samples": tr.times.len(),
                "final_l1": last.l1,
                "final_energy": last.energy,
            })
        }
        Command::Converge => {
            let sim = cfg.simulation()?;
            let m = model(&cfg, true)?;
            let init = random_init(&cfg, &m, spec.seed)?;
            let rows = convergence_study(&m, sim, &init, &cfg.raw.converge.n_list)?;
            out.csv("converge.csv", |w| {
                writeln!(w, "N,sup_remainder,ratio,dt")?;
                for r in &rows {
                    let ratio = r.ratio.map(|x| x.to_string()).unwrap_or_default();
                    writeln!(w, "{},{},{},{}", r.n, r.sup_remainder, ratio, r.dt)?;
                }
                Ok(())
            })?;
            json!({
                "strictly_decreasing": rows.windows(2).all(|w| w[1].sup_remainder < w[0].sup_remainder),
                "last_over_first": rows.last().map(|r| r.sup_remainder / rows[0].sup_remainder),
            })
        }
        Command::GammaCheck => {
            let set = cfg.lattice.build()?;
            let report = gamma_scan(&set);
            out.csv("gamma_check.csv", |w| report.write_csv(w))?;
            json!({
                "triads_scanned": report.triads_scanned,
                "skipped_horizontal_zero": report.skipped_horizontal_zero,
                "rows": report.rows.len(),
                "generic_rows": report.generic_rows().count(),
                "certifies": report.certifies(),
            })
        }
        Command::ResonanceCensus => {
            let set = cfg.lattice.build()?;
            let rows = cfg
                .raw
                .census
                .shells
                .iter()
                .map(|&i| restricted_convolution_census(&set, i))
                .collect::<stratflow_core::Result<Vec<_>>>()?;
            out.csv("census.csv", |w| CensusShell::write_csv(&rows, w))?;
            let fiber = max_resonant_fiber(&set)?;
            json!({
                "max_implied_constant": rows.iter().map(|r| r.implied_constant).fold(0.0, f64::max),
                "truncated_shells": rows.iter().filter(|r| r.truncated).map(|r| r.i).collect::<Vec<_>>(),
                "max_fiber": fiber.max_count,
                "max_fiber_at": { "n": fiber.n.as_array(), "k_h": [fiber.k_h.0, fiber.k_h.1] },
            })
        }
        Command::QgEquiv => {
            let sim = cfg.simulation()?;
            let m = model(&cfg, false)?;
            let mut r = cfg.random_init(spec.seed);
            r.sectors = [false, true, false];
            let mut c0 = random_initial_state(&m, &r)?;
            for (x, h) in c0.modes.iter_mut().zip(&m.basis.hnorm) {
                if *h == 0.0 {
                    x[1] = Default::default();
                }
            }
            let err = qg_equiv_check(&m, sim, &theta_from_c0(&c0))?;
            out.csv("qg_equiv.csv", |w| writeln!(w, "max_error\n{err}"))?;
            json!({ "max_error": err })
        }
        Command::Pancake => {
            let sim = cfg.simulation()?;
            let m = model(&cfg, false)?;
            let init = random_init(&cfg, &m, spec.seed)?;
            let n = cfg.raw.pancake.n;
            let rep = pancake_experiment(&m, sim, &init, n, default_grid(&cfg))?;
            out.csv("pancake.csv", |w| {
                writeln!(w, "t,anisotropy_N0,anisotropy_N")?;
                for (a, b) in rep.series_n0.iter().zip(&rep.series_n) {
                    writeln!(w, "{},{},{}", a.t, a.anisotropy, b.anisotropy)?;
                }
                Ok(())
            })?;
            for (stem, f) in [("fields_N0", &rep.fields_n0), ("fields_N", &rep.fields_n)] {
                for p in write_fields_binary(&spec.out, stem, f)? {
                    out.files.push(
                        p.file_name()
                            .expect("file path")
                            .to_string_lossy()
                            .into_owned(),
                    );
                }
            }
            let (a0, an) = rep.final_anisotropy();
            json!({ "N": n, "anisotropy_N0": a0, "anisotropy_N": an })
        }
    };
    for w in &warnings {
        eprintln!("warning: {w}");
    }
    let manifest = spec.out.join("manifest.json");
    let body = json!({
        "command": spec.command.name(),
        "seed": spec.seed,
        "code_version": env!("CARGO_PKG_VERSION"),
        "config_hash": cfg.hash_hex(),
        "config_file": "config.toml",
        "overrides": spec.overrides,
        "warnings": warnings,
        "outputs": out.files,
        "summary": summary,
    });
    fs::write(
        &manifest,
        serde_json::to_string_pretty(&body).expect("json value serializes") + "\n",
    )?;
    Ok(RunSummary {
        outputs: out.files,
        warnings,
        manifest,
    })
}
