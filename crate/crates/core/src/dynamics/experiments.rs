//! Convergence, stratification and local-time studies.

use super::{
    integrate, integrate_with, reconstruct_physical, Diagnostics, Model, PhysicalFields, Scheme,
    SimulationConfig, System, Trajectory,
};
use crate::error::{Error, Result};
use crate::interaction::AmplitudeState;

/// One stiffness value of a convergence study.
#[derive(Clone, Debug, PartialEq)]
pub struct ConvergenceRow {
    pub n: f64,
    /// `sup_t ‖c_N(t) − b(t)‖_{ℓ¹}` over the shared sample grid.
    pub sup_remainder: f64,
    /// Ratio to the previous row.
    pub ratio: Option<f64>,
    /// Step used for the full system.
    pub dt: f64,
}

/// `sup_t ‖c − b‖_{ℓ¹}` over matching samples.
pub fn sup_l1_distance(a: &Trajectory, b: &Trajectory) -> f64 {
    a.states
        .iter()
        .zip(&b.states)
        .map(|(x, y)| x.sub(y).l1_norm())
        .fold(0.0, f64::max)
}

/// Integrates the limit system once and the full system per `N` on the same
/// sample grid. The full system uses `min(dt, 0.2/(Nω_max))`.
pub fn convergence_study(
    model: &Model,
    cfg: &SimulationConfig,
    init: &AmplitudeState,
    n_list: &[f64],
) -> Result<Vec<ConvergenceRow>> {
    if n_list.windows(2).any(|w| w[1] <= w[0]) || n_list.iter().any(|&n| n.is_nan() || n <= 0.0) {
        return Err(Error::InvalidInput(
            "N_list must be positive and strictly increasing".into(),
        ));
    }
    let b = integrate(model, System::Limit, cfg, init)?;
    let mut rows: Vec<ConvergenceRow> = Vec::with_capacity(n_list.len());
    for &n in n_list {
        let mut c = cfg.clone();
        c.dt = cfg.dt.min(model.dt_limit(n));
        let full = integrate(model, System::Full { n }, &c, init)?;
        let sup = sup_l1_distance(&full, &b);
        let ratio = rows.last().map(|r| sup / r.sup_remainder);
        rows.push(ConvergenceRow {
            n,
            sup_remainder: sup,
            ratio,
            dt: c.dt,
        });
    }
    Ok(rows)
}

/// Anisotropy series of the full system at `N = 0` and at `N`.
#[derive(Clone, Debug)]
pub struct PancakeReport {
    pub n: f64,
    pub series_n0: Vec<Diagnostics>,
    pub series_n: Vec<Diagnostics>,
    pub fields_n0: PhysicalFields,
    pub fields_n: PhysicalFields,
}

impl PancakeReport {
    pub fn final_anisotropy(&self) -> (f64, f64) {
        let last = |s: &[Diagnostics]| s.last().map(|d| d.anisotropy).unwrap_or(0.0);
        (last(&self.series_n0), last(&self.series_n))
    }
}

/// Runs the non-stratified flow with integrating-factor RK4 and the
/// stratified one with the phase-integrated scheme at step `dt`, then
/// reconstructs both final fields on `dims`.
pub fn pancake_experiment(
    model: &Model,
    cfg: &SimulationConfig,
    init: &AmplitudeState,
    n: f64,
    dims: [usize; 3],
) -> Result<PancakeReport> {
    let plain = integrate(model, System::Full { n: 0.0 }, cfg, init)?;
    let strat = integrate_with(model, System::Full { n }, Scheme::PhaseMidpoint, cfg, init)?;
    let fields_n0 = reconstruct_physical(model, plain.last(), 0.0, dims, cfg.g, cfg.cal_n)?;
    let fields_n = reconstruct_physical(model, strat.last(), n, dims, cfg.g, cfg.cal_n)?;
    Ok(PancakeReport {
        n,
        series_n0: plain.diagnostics,
        series_n: strat.diagnostics,
        fields_n0,
        fields_n,
    })
}

/// Growth horizons of scaled initial data.
#[derive(Clone, Debug, PartialEq)]
pub struct LocalTimeReport {
    /// `(‖c(0)‖_{ℓ¹}, horizon)` per scale.
    pub rows: Vec<(f64, f64)>,
    /// `min horizon·‖c(0)‖²`, so that every horizon exceeds `C/‖c(0)‖²`.
    pub fitted_c: f64,
}

/// For each scale, the first sample time at which `‖c(t)‖_{ℓ¹}` exceeds
/// twice its initial value (or the end time, or the failure time).
pub fn local_time_heuristic(
    model: &Model,
    system: System,
    cfg: &SimulationConfig,
    base: &AmplitudeState,
    scales: &[f64],
) -> Result<LocalTimeReport> {
    let mut rows = Vec::with_capacity(scales.len());
    for &s in scales {
        let init = base.scaled(s);
        let norm0 = init.l1_norm();
        let horizon = match integrate(model, system, cfg, &init) {
            Ok(tr) => tr
                .diagnostics
                .iter()
                .find(|d| d.l1 > 2.0 * norm0)
                .map(|d| d.t)
                .unwrap_or(cfg.t_end),
            Err(Error::NonFinite { t }) => t,
            Err(e) => return Err(e),
        };
        rows.push((norm0, horizon));
    }
    let fitted_c = rows
        .iter()
        .map(|(n, h)| h * n * n)
        .fold(f64::INFINITY, f64::min);
    Ok(LocalTimeReport { rows, fitted_c })
}
