//! Time integration of the full, limit, QG and 2D-type systems, initial data,
//! physical reconstruction and diagnostics.

mod experiments;
mod init;
mod io;
mod phase;
mod physical;
mod qg;
pub mod stepper;

pub use experiments::{
    convergence_study, local_time_heuristic, pancake_experiment, sup_l1_distance, ConvergenceRow,
    LocalTimeReport, PancakeReport,
};
pub use init::{initial_state_from_physical, random_initial_state, RandomInit};
pub use io::{state_to_json, write_diagnostics_csv, write_fields_binary};
pub use phase::PhaseWeights;
pub use physical::{reconstruct_physical, PhysicalFields};
pub use qg::{
    c0_from_theta, integrate_ns2d, integrate_qg, qg_equiv_check, theta_from_c0, theta_from_w,
    w_from_theta, PlanarField, ScalarField,
};

use std::sync::OnceLock;

use num_complex::Complex64;

use crate::basis::ModeBasis;
use crate::error::{Error, Result};
use crate::interaction::{
    build_triad_table, nonlinear_limit, rotate_phases, AmplitudeState, Convolution, RhsParams,
    TriadTable, Triple,
};
use crate::lattice::{FrequencySet, LatticeDescriptor};
use stepper::{phase_midpoint_step, IfRk4};

/// Physical and numerical parameters of a run.
#[derive(Clone, Debug, PartialEq)]
pub struct SimulationConfig {
    pub nu: f64,
    pub kappa: f64,
    pub g: f64,
    /// Brunt-Väisälä frequency `𝒩`.
    pub cal_n: f64,
    pub t_end: f64,
    pub dt: f64,
    /// Spacing of trajectory samples.
    pub sample_interval: f64,
    pub lattice: LatticeDescriptor,
    /// Use the printed unit diffusion in the QG and 2D-type systems instead
    /// of `ν`.
    pub qg_unit_diffusion: bool,
    /// Drop the cancelling pair `B̄⁰(c¹,c⁻¹) + B̄⁰(c⁻¹,c¹)` from the limit.
    pub drop_cancelling: bool,
}

impl SimulationConfig {
    /// `N = 𝒩√g`.
    pub fn n_big(&self) -> f64 {
        self.cal_n * self.g.sqrt()
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |field: &str, why: &str| Err(Error::InvalidInput(format!("{field}: {why}")));
        if !(self.nu > 0.0 && self.nu.is_finite()) {
            return bad("nu", "must be positive");
        }
        if !(self.kappa >= 0.0 && self.kappa.is_finite()) {
            return bad("kappa", "must be non-negative");
        }
        if !(self.g > 0.0 && self.g.is_finite()) {
            return bad("g", "must be positive");
        }
        if !(self.cal_n > 0.0 && self.cal_n.is_finite()) {
            return bad("calN", "must be positive");
        }
        if !(self.t_end > 0.0 && self.t_end.is_finite()) {
            return bad("T", "must be positive");
        }
        if !(self.dt > 0.0 && self.dt <= self.t_end) {
            return bad("dt", "must lie in (0, T]");
        }
        if !(self.sample_interval > 0.0 && self.sample_interval <= self.t_end) {
            return bad("sample_interval", "must lie in (0, T]");
        }
        self.lattice.dilation()?;
        Ok(())
    }

    /// Non-fatal findings, e.g. `N ≤ g`.
    pub fn warnings(&self) -> Vec<String> {
        let mut w = Vec::new();
        if self.n_big() <= self.g {
            w.push(format!(
                "N = {} does not exceed g = {}; large-N theory assumes N > g",
                self.n_big(),
                self.g
            ));
        }
        w
    }

    pub fn params(&self) -> RhsParams {
        self.params_with_n(self.n_big())
    }

    pub fn params_with_n(&self, n: f64) -> RhsParams {
        RhsParams {
            n,
            nu: self.nu,
            kappa: self.kappa,
        }
    }
}

/// Frequency set with its frames and interaction data.
pub struct Model {
    pub set: FrequencySet,
    pub basis: ModeBasis,
    pub conv: Convolution,
    omega_bound: f64,
    table: OnceLock<TriadTable>,
    qg: OnceLock<qg::QgKernel>,
}

impl Model {
    pub fn new(set: FrequencySet) -> Result<Self> {
        let basis = ModeBasis::new(&set);
        let conv = Convolution::new(&set, &basis)?;
        let om = &conv.mode_omega;
        let omega_bound = (0..set.len())
            .flat_map(|n| {
                conv.pairs_for(n)
                    .iter()
                    .map(move |&(k, m)| om[n] + om[k as usize] + om[m as usize])
            })
            .fold(0.0, f64::max);
        Ok(Model {
            set,
            basis,
            conv,
            omega_bound,
            table: OnceLock::new(),
            qg: OnceLock::new(),
        })
    }

    pub fn from_descriptor(d: &LatticeDescriptor) -> Result<Self> {
        Model::new(d.build()?)
    }

    pub fn with_table(set: FrequencySet, table: TriadTable) -> Result<Self> {
        let m = Model::new(set)?;
        if table.set_hash != m.set.hash_hex() {
            return Err(Error::Misaligned(
                "triad table belongs to another set".into(),
            ));
        }
        let _ = m.table.set(table);
        Ok(m)
    }

    pub fn len(&self) -> usize {
        self.set.len()
    }

    pub fn is_empty(&self) -> bool {
        self.set.is_empty()
    }

    /// Triad table, built on first use.
    pub fn table(&self) -> &TriadTable {
        self.table.get_or_init(|| {
            build_triad_table(&self.set, &self.basis).expect("basis is aligned with its set")
        })
    }

    fn qg_kernel(&self) -> &qg::QgKernel {
        self.qg
            .get_or_init(|| qg::QgKernel::new(&self.set, &self.basis))
    }

    /// Upper bound on `|ω^σ|` over all triads.
    pub fn omega_bound(&self) -> f64 {
        self.omega_bound
    }

    /// Oscillation-resolving step bound `0.2/(N·ω_max)`.
    pub fn dt_limit(&self, n_big: f64) -> f64 {
        if n_big == 0.0 || self.omega_bound == 0.0 {
            f64::INFINITY
        } else {
            0.2 / (n_big * self.omega_bound)
        }
    }

    /// `μ_σ|ñ|²` per flattened component.
    pub fn decay(&self, params: &RhsParams) -> Vec<f64> {
        self.basis
            .ksq
            .iter()
            .flat_map(|k2| [params.mu(-1) * k2, params.mu(0) * k2, params.mu(1) * k2])
            .collect()
    }
}

/// Amplitude system to integrate.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum System {
    /// Full system at stiffness `N`.
    Full { n: f64 },
    /// Limit equations.
    Limit,
}

/// Time stepping scheme.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum Scheme {
    /// Integrating-factor RK4.
    #[default]
    IfRk4,
    /// Phase-integrated midpoint for the full system at large `N`; the
    /// oscillation bound on `dt` does not apply.
    PhaseMidpoint,
}

/// Diagnostics of one sample.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Diagnostics {
    pub t: f64,
    pub l1: f64,
    pub energy: f64,
    pub l12: f64,
    pub anisotropy: f64,
}

/// Samples of a run.
#[derive(Clone, Debug, PartialEq)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<AmplitudeState>,
    pub diagnostics: Vec<Diagnostics>,
}

impl Trajectory {
    pub fn last(&self) -> &AmplitudeState {
        self.states
            .last()
            .expect("trajectory holds the initial sample")
    }
}

pub(crate) fn flatten(s: &AmplitudeState) -> Vec<Complex64> {
    s.modes.iter().flatten().copied().collect()
}

pub(crate) fn unflatten(t: f64, y: &[Complex64]) -> AmplitudeState {
    AmplitudeState::from_modes(t, y.chunks_exact(3).map(|c| [c[0], c[1], c[2]]).collect())
}

/// `ℓ^α_p = (Σ_n Σ_σ |ñ|^{pα}|c^σ_n|^p)^{1/p}`.
pub fn ell_alpha_p(state: &AmplitudeState, ksq: &[f64], alpha: f64, p: f64) -> f64 {
    state
        .modes
        .iter()
        .zip(ksq)
        .map(|(x, k2)| k2.powf(0.5 * p * alpha) * x.iter().map(|z| z.norm().powf(p)).sum::<f64>())
        .sum::<f64>()
        .powf(1.0 / p)
}

/// Norms and the vertical-to-horizontal kinetic energy ratio at stiffness `N`.
pub fn diagnostics(model: &Model, state: &AmplitudeState, n_big: f64) -> Diagnostics {
    let a = rotate_phases(&model.conv.mode_omega, state, n_big * state.t, 1.0);
    let v = model.conv.velocity(&a);
    let (mut vert, mut horiz) = (0.0, 0.0);
    for x in &v {
        vert += x[2].norm_sqr();
        horiz += x[0].norm_sqr() + x[1].norm_sqr();
    }
    Diagnostics {
        t: state.t,
        l1: state.l1_norm(),
        energy: state.energy(),
        l12: ell_alpha_p(state, &model.basis.ksq, 1.0, 2.0),
        anisotropy: if horiz > 0.0 { vert / horiz } else { 0.0 },
    }
}

fn check_finite(t: f64, y: &[Complex64]) -> Result<()> {
    if y.iter().all(|z| z.re.is_finite() && z.im.is_finite()) {
        Ok(())
    } else {
        Err(Error::NonFinite { t })
    }
}

/// Uniform sample grid: `(sample count, substeps per sample, step)`.
pub(crate) fn grid(t_end: f64, sample: f64, dt: f64) -> (usize, usize, f64) {
    let samples = ((t_end / sample).round() as usize).max(1);
    let ds = t_end / samples as f64;
    let sub = ((ds / dt) * (1.0 - 1e-12)).ceil().max(1.0) as usize;
    (samples, sub, ds / sub as f64)
}

/// Integrate with the default scheme.
pub fn integrate(
    model: &Model,
    system: System,
    cfg: &SimulationConfig,
    init: &AmplitudeState,
) -> Result<Trajectory> {
    integrate_with(model, system, Scheme::IfRk4, cfg, init)
}

pub fn integrate_with(
    model: &Model,
    system: System,
    scheme: Scheme,
    cfg: &SimulationConfig,
    init: &AmplitudeState,
) -> Result<Trajectory> {
    init.check_aligned(model.len())?;
    let (samples, sub, h) = grid(cfg.t_end, cfg.sample_interval, cfg.dt);
    let n_big = match system {
        System::Full { n } => n,
        System::Limit => 0.0,
    };
    if let (System::Full { n }, Scheme::IfRk4) = (system, scheme) {
        let limit = model.dt_limit(n);
        if cfg.dt > limit {
            return Err(Error::StepTooLarge { dt: cfg.dt, limit });
        }
    }
    if scheme == Scheme::PhaseMidpoint && system == System::Limit {
        return Err(Error::InvalidInput(
            "the phase-integrated scheme applies to the full system only".into(),
        ));
    }
    let params = cfg.params_with_n(n_big);
    let decay = model.decay(&params);
    let mut y = flatten(init);
    let mut t = init.t;
    let mut traj = Trajectory {
        times: vec![t],
        states: vec![init.clone()],
        diagnostics: vec![diagnostics(model, init, n_big)],
    };
    let weights = if scheme == Scheme::PhaseMidpoint {
        Some((
            PhaseWeights::new(&model.conv, n_big, 0.5 * h),
            PhaseWeights::new(&model.conv, n_big, h),
        ))
    } else {
        None
    };
    let rk = IfRk4::new(&decay);
    let full = |t: f64, y: &[Complex64]| -> Vec<Complex64> {
        let s = unflatten(t, y);
        flat(model.conv.nonlinear_full(&s, t, n_big))
    };
    let limit = |_t: f64, y: &[Complex64]| -> Vec<Complex64> {
        let s = unflatten(0.0, y);
        flat(nonlinear_limit(model.table(), &s, cfg.drop_cancelling))
    };
    let phi = |t: f64, tau: f64, y: &[Complex64]| -> Vec<Complex64> {
        let (wh, wf) = weights
            .as_ref()
            .expect("weights exist for the phase scheme");
        let w = if tau < 0.75 * h { wh } else { wf };
        flat(w.integrate(&model.conv, &unflatten(t, y), t))
    };
    for s in 1..=samples {
        for _ in 0..sub {
            y = match (system, scheme) {
                (System::Full { .. }, Scheme::IfRk4) => rk.step(&full, t, &y, h),
                (System::Full { .. }, Scheme::PhaseMidpoint) => {
                    phase_midpoint_step(&decay, &phi, t, &y, h)
                }
                (System::Limit, _) => rk.step(&limit, t, &y, h),
            };
            t += h;
            check_finite(t, &y)?;
        }
        let t_s = init.t + s as f64 * (cfg.t_end / samples as f64);
        t = t_s;
        let st = unflatten(t, &y);
        traj.diagnostics.push(diagnostics(model, &st, n_big));
        traj.times.push(t);
        traj.states.push(st);
    }
    Ok(traj)
}

fn flat(v: Vec<Triple>) -> Vec<Complex64> {
    v.into_iter().flatten().collect()
}
