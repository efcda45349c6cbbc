//! Quasi-geostrophic and 2D-type Navier-Stokes systems and the `θ ↔ w`
//! correspondence.

use num_complex::Complex64;
use rayon::prelude::*;

use super::stepper::IfRk4;
use super::{grid, Model, SimulationConfig};
use crate::basis::ModeBasis;
use crate::error::{Error, Result};
use crate::interaction::AmplitudeState;
use crate::lattice::FrequencySet;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const I: Complex64 = Complex64::new(0.0, 1.0);
/// Amplitudes below this count as zero on horizontal-zero modes.
const HZ_TOL: f64 = 1e-14;

/// Scalar amplitudes `θ̂_n` aligned with the set ordinals.
#[derive(Clone, Debug, PartialEq)]
pub struct ScalarField {
    pub t: f64,
    pub values: Vec<Complex64>,
}

/// Horizontal vector amplitudes `ŵ_n = (ŵ₁, ŵ₂)`.
#[derive(Clone, Debug, PartialEq)]
pub struct PlanarField {
    pub t: f64,
    pub values: Vec<[Complex64; 2]>,
}

impl ScalarField {
    pub fn zeros(len: usize) -> Self {
        ScalarField {
            t: 0.0,
            values: vec![ZERO; len],
        }
    }

    pub fn l1_distance(&self, other: &ScalarField) -> f64 {
        self.values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a - b).norm())
            .sum()
    }
}

fn hz_error(basis: &ModeBasis, i: usize) -> Error {
    let w = basis.wavevectors[i];
    Error::HorizontalZeroMode(format!("({}, {}, {})", w[0], w[1], w[2]))
}

fn check_len(basis: &ModeBasis, len: usize) -> Result<()> {
    if basis.len() != len {
        return Err(Error::Misaligned(format!(
            "field has {len} modes, basis has {}",
            basis.len()
        )));
    }
    Ok(())
}

/// `θ̂ = (iñ₂ŵ₁ − iñ₁ŵ₂)/|ñ|_h`.
pub fn theta_from_w(basis: &ModeBasis, w: &PlanarField) -> Result<ScalarField> {
    check_len(basis, w.values.len())?;
    let mut out = Vec::with_capacity(w.values.len());
    for (i, x) in w.values.iter().enumerate() {
        let h = basis.hnorm[i];
        if h == 0.0 {
            if x[0].norm() > HZ_TOL || x[1].norm() > HZ_TOL {
                return Err(hz_error(basis, i));
            }
            out.push(ZERO);
            continue;
        }
        let n = basis.wavevectors[i];
        let div = (n[0] * x[0] + n[1] * x[1]).norm();
        let scale = (x[0].norm() + x[1].norm()) * (n[0].abs() + n[1].abs());
        if div > 1e-12 * scale.max(1.0) {
            return Err(Error::DivergenceViolation {
                mode: format!("{i}"),
                residual: div,
            });
        }
        out.push((I * n[1] * x[0] - I * n[0] * x[1]) / h);
    }
    Ok(ScalarField {
        t: w.t,
        values: out,
    })
}

/// `ŵ = (−iñ₂, iñ₁)θ̂/|ñ|_h`.
pub fn w_from_theta(basis: &ModeBasis, theta: &ScalarField) -> Result<PlanarField> {
    check_len(basis, theta.values.len())?;
    let mut out = Vec::with_capacity(theta.values.len());
    for (i, &th) in theta.values.iter().enumerate() {
        let h = basis.hnorm[i];
        if h == 0.0 {
            if th.norm() > HZ_TOL {
                return Err(hz_error(basis, i));
            }
            out.push([ZERO; 2]);
            continue;
        }
        let n = basis.wavevectors[i];
        out.push([-I * n[1] * th / h, I * n[0] * th / h]);
    }
    Ok(PlanarField {
        t: theta.t,
        values: out,
    })
}

/// `c⁰ = iθ`, other branches zero.
pub fn c0_from_theta(theta: &ScalarField) -> AmplitudeState {
    AmplitudeState::from_modes(
        theta.t,
        theta.values.iter().map(|&x| [ZERO, I * x, ZERO]).collect(),
    )
}

/// `θ = −i c⁰`.
pub fn theta_from_c0(state: &AmplitudeState) -> ScalarField {
    ScalarField {
        t: state.t,
        values: state.modes.iter().map(|x| -I * x[1]).collect(),
    }
}

/// Interaction kernel `(k̃₁m̃₂ − k̃₂m̃₁)|m̃|_h/(|k̃|_h|ñ|_h)` over pairs with all
/// horizontal parts nonzero.
pub(crate) struct QgKernel {
    entries: Vec<(u32, u32, f64)>,
    offsets: Vec<usize>,
}

impl QgKernel {
    pub(crate) fn new(set: &FrequencySet, basis: &ModeBasis) -> Self {
        let h = &basis.hnorm;
        let wv = &basis.wavevectors;
        let rows: Vec<Vec<(u32, u32, f64)>> = (0..set.len())
            .into_par_iter()
            .map(|n| {
                if h[n] == 0.0 {
                    return Vec::new();
                }
                set.pairs_for(n)
                    .filter(|&(k, m)| h[k] != 0.0 && h[m] != 0.0)
                    .map(|(k, m)| {
                        let cross = wv[k][0] * wv[m][1] - wv[k][1] * wv[m][0];
                        (k as u32, m as u32, cross * h[m] / (h[k] * h[n]))
                    })
                    .collect()
            })
            .collect();
        let mut entries = Vec::new();
        let mut offsets = vec![0];
        for r in rows {
            entries.extend(r);
            offsets.push(entries.len());
        }
        QgKernel { entries, offsets }
    }

    fn apply(&self, theta: &[Complex64]) -> Vec<Complex64> {
        (0..self.offsets.len() - 1)
            .into_par_iter()
            .map(|n| {
                self.entries[self.offsets[n]..self.offsets[n + 1]]
                    .iter()
                    .map(|&(k, m, w)| w * theta[k as usize] * theta[m as usize])
                    .sum()
            })
            .collect()
    }
}

fn diffusion(cfg: &SimulationConfig) -> f64 {
    if cfg.qg_unit_diffusion {
        1.0
    } else {
        cfg.nu
    }
}

fn march<F>(
    cfg: &SimulationConfig,
    t0: f64,
    y0: Vec<Complex64>,
    decay: &[f64],
    f: F,
) -> Result<Vec<(f64, Vec<Complex64>)>>
where
    F: Fn(f64, &[Complex64]) -> Vec<Complex64>,
{
    let (samples, sub, h) = grid(cfg.t_end, cfg.sample_interval, cfg.dt);
    let rk = IfRk4::new(decay);
    let mut y = y0;
    let mut t = t0;
    let mut out = vec![(t, y.clone())];
    for s in 1..=samples {
        for _ in 0..sub {
            y = rk.step(&f, t, &y, h);
            t += h;
            if !y.iter().all(|z| z.re.is_finite() && z.im.is_finite()) {
                return Err(Error::NonFinite { t });
            }
        }
        t = t0 + s as f64 * (cfg.t_end / samples as f64);
        out.push((t, y.clone()));
    }
    Ok(out)
}

/// `∂θ_n = −D|ñ|²θ_n + Σ K_{nkm}θ_kθ_m` with `D = ν` (or 1 when the unit
/// diffusion flag is set).
pub fn integrate_qg(
    model: &Model,
    cfg: &SimulationConfig,
    theta0: &ScalarField,
) -> Result<Vec<ScalarField>> {
    check_len(&model.basis, theta0.values.len())?;
    for (i, x) in theta0.values.iter().enumerate() {
        if model.basis.hnorm[i] == 0.0 && x.norm() > HZ_TOL {
            return Err(hz_error(&model.basis, i));
        }
    }
    let d = diffusion(cfg);
    let decay: Vec<f64> = model.basis.ksq.iter().map(|k| d * k).collect();
    let kernel = model.qg_kernel();
    let rows = march(cfg, theta0.t, theta0.values.clone(), &decay, |_, y| {
        kernel.apply(y)
    })?;
    Ok(rows
        .into_iter()
        .map(|(t, values)| ScalarField { t, values })
        .collect())
}

/// `∂ŵ_n = −D|ñ|²ŵ_n − P_h[iΣ(ŵ_k·m̃_h)ŵ_m]`.
pub fn integrate_ns2d(
    model: &Model,
    cfg: &SimulationConfig,
    w0: &PlanarField,
) -> Result<Vec<PlanarField>> {
    theta_from_w(&model.basis, w0)?;
    let d = diffusion(cfg);
    let decay: Vec<f64> = model
        .basis
        .ksq
        .iter()
        .flat_map(|k| [d * k, d * k])
        .collect();
    let y0: Vec<Complex64> = w0.values.iter().flatten().copied().collect();
    let b = &model.basis;
    let conv = &model.conv;
    let f = |_t: f64, y: &[Complex64]| -> Vec<Complex64> {
        (0..b.len())
            .into_par_iter()
            .flat_map_iter(|n| {
                let hn = b.hnorm[n];
                if hn == 0.0 {
                    return [ZERO; 2];
                }
                let mut acc = [ZERO; 2];
                for &(k, m) in conv.pairs_for(n) {
                    let (k, m) = (k as usize, m as usize);
                    let mv = b.wavevectors[m];
                    let adv = y[2 * k] * mv[0] + y[2 * k + 1] * mv[1];
                    acc[0] += adv * y[2 * m];
                    acc[1] += adv * y[2 * m + 1];
                }
                let nv = b.wavevectors[n];
                let dot = (nv[0] * acc[0] + nv[1] * acc[1]) / (hn * hn);
                [-I * (acc[0] - nv[0] * dot), -I * (acc[1] - nv[1] * dot)]
            })
            .collect()
    };
    let rows = march(cfg, w0.t, y0, &decay, f)?;
    Ok(rows
        .into_iter()
        .map(|(t, y)| PlanarField {
            t,
            values: y.chunks_exact(2).map(|c| [c[0], c[1]]).collect(),
        })
        .collect())
}

/// Twin integration of QG from `θ₀` and of the 2D-type system from
/// `w(θ₀)`; returns `sup_t ‖θ_QG(t) − θ(w(t))‖_{ℓ¹}`.
pub fn qg_equiv_check(model: &Model, cfg: &SimulationConfig, theta0: &ScalarField) -> Result<f64> {
    let qg = integrate_qg(model, cfg, theta0)?;
    let w0 = w_from_theta(&model.basis, theta0)?;
    let ns = integrate_ns2d(model, cfg, &w0)?;
    let mut err: f64 = 0.0;
    for (a, w) in qg.iter().zip(&ns) {
        err = err.max(a.l1_distance(&theta_from_w(&model.basis, w)?));
    }
    Ok(err)
}
