//! Initial amplitudes from physical data or seeded random fields.

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use super::{Model, SimulationConfig};
use crate::basis::{hdot, norm4, ModeBasis, C4, TOL_DIV};
use crate::error::{Error, Result};
use crate::interaction::{AmplitudeState, Triple};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Frame amplitudes of `P_n v̂`. The divergence residual is measured against
/// the unprojected input, so data that projects to zero is accepted.
fn project(basis: &ModeBasis, i: usize, v: &C4) -> Result<Triple> {
    let f = &basis.frames[i];
    let pv = basis.projector(i).apply(v);
    let div = hdot(&pv, &f.qdiv).norm();
    if div > TOL_DIV * norm4(v) {
        return Err(Error::DivergenceViolation {
            mode: format!("{i}"),
            residual: div,
        });
    }
    Ok([hdot(&pv, &f.qm), hdot(&pv, &f.q0), hdot(&pv, &f.qp)])
}

/// `v̂ = (û, (√g/𝒩)ρ̂)`, projected and decomposed on the frames. Phases are
/// one at `t = 0`, so the result is `c(0)`.
pub fn initial_state_from_physical(
    model: &Model,
    u0hat: &[[Complex64; 3]],
    rho0hat: &[Complex64],
    cfg: &SimulationConfig,
) -> Result<AmplitudeState> {
    let len = model.len();
    if u0hat.len() != len || rho0hat.len() != len {
        return Err(Error::Misaligned(format!(
            "initial data has {} velocity and {} density modes, set has {len}",
            u0hat.len(),
            rho0hat.len()
        )));
    }
    let s = cfg.g.sqrt() / cfg.cal_n;
    let mut modes = Vec::with_capacity(len);
    for i in 0..len {
        let u = u0hat[i];
        let v: C4 = [u[0], u[1], u[2], s * rho0hat[i]];
        modes.push(project(&model.basis, i, &v)?);
    }
    Ok(AmplitudeState::from_modes(0.0, modes))
}

/// Seeded random initial data.
#[derive(Clone, Debug, PartialEq)]
pub struct RandomInit {
    pub seed: u64,
    /// Modes with `1 ≤ |n| ≤ shell` (index norm) are excited.
    pub shell: f64,
    /// Target `ℓ¹` norm.
    pub amplitude: f64,
    /// Branches kept, in the order `σ = −1, 0, +1`.
    pub sectors: [bool; 3],
    /// Excite only modes with `n₃ = 0`.
    pub plane_only: bool,
    /// Draw the fourth (density) component; when false it starts at zero.
    pub density: bool,
}

impl RandomInit {
    pub fn new(seed: u64, shell: f64, amplitude: f64) -> Self {
        RandomInit {
            seed,
            shell,
            amplitude,
            sectors: [true; 3],
            plane_only: false,
            density: true,
        }
    }
}

/// Complex Gaussian `v̂` on the shell with `v̂_{−n} = conj(v̂_n)`, projected,
/// decomposed, restricted to the chosen branches and `ℓ¹`-normalized.
pub fn random_initial_state(model: &Model, spec: &RandomInit) -> Result<AmplitudeState> {
    let set = &model.set;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut gauss = || -> Complex64 {
        let re: f64 = StandardNormal.sample(&mut rng);
        let im: f64 = StandardNormal.sample(&mut rng);
        Complex64::new(re, im)
    };
    let mut v: Vec<C4> = vec![[ZERO; 4]; set.len()];
    for i in 0..set.len() {
        let j = set.negated(i);
        if j < i {
            continue;
        }
        let n = set.member(i);
        let r = ((n.n1 as f64).powi(2) + (n.n2 as f64).powi(2) + (n.n3 as f64).powi(2)).sqrt();
        if r > spec.shell || (spec.plane_only && n.n3 != 0) {
            continue;
        }
        let mut draw = [gauss(), gauss(), gauss(), gauss()];
        if !spec.density {
            draw[3] = ZERO;
        }
        v[i] = draw;
        v[j] = draw.map(|z| z.conj());
    }
    let mut modes: Vec<Triple> = Vec::with_capacity(set.len());
    for (i, x) in v.iter().enumerate() {
        let mut a = project(&model.basis, i, x)?;
        for (s, keep) in spec.sectors.iter().enumerate() {
            if !keep {
                a[s] = ZERO;
            }
        }
        modes.push(a);
    }
    let state = AmplitudeState::from_modes(0.0, modes);
    let l1 = state.l1_norm();
    if l1 == 0.0 {
        return Err(Error::EmptyShell(format!(
            "no excited amplitude within |n| ≤ {}",
            spec.shell
        )));
    }
    Ok(state.scaled(spec.amplitude / l1))
}
