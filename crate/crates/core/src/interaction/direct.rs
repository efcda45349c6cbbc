use rayon::prelude::*;

use super::{rotate_phases, sidx, AmplitudeState, RhsParams, Triple, I, ZERO};
use crate::basis::{hdot, ModeBasis, C4};
use crate::error::{Error, Result};
use crate::lattice::FrequencySet;

/// Direct pair-sum evaluation of the full nonlinearity.
///
/// Instead of visiting 27 branch combinations per triad, the velocity
/// `v̂_k = Σ_σ a^σ_k q^σ_k` is rebuilt, the convolution
/// `−i Σ_{n=k+m} (v̂_k·m̃) v̂_m` is formed once per pair and projected on
/// `q^{σ₀*}_n`. This is algebraically the sum over all table entries.
#[derive(Clone, Debug)]
pub struct Convolution {
    pairs: Vec<(u32, u32)>,
    offsets: Vec<usize>,
    frames: Vec<[C4; 3]>,
    wavevectors: Vec<[f64; 3]>,
    pub ksq: Vec<f64>,
    pub mode_omega: Vec<f64>,
}

impl Convolution {
    pub fn new(set: &FrequencySet, basis: &ModeBasis) -> Result<Self> {
        if basis.len() != set.len() {
            return Err(Error::Misaligned(format!(
                "basis has {} frames, set has {} modes",
                basis.len(),
                set.len()
            )));
        }
        let mut pairs = Vec::new();
        let mut offsets = Vec::with_capacity(set.len() + 1);
        offsets.push(0);
        for n in 0..set.len() {
            pairs.extend(set.pairs_for(n).map(|(k, m)| (k as u32, m as u32)));
            offsets.push(pairs.len());
        }
        Ok(Convolution {
            pairs,
            offsets,
            frames: basis.frames.iter().map(|f| [f.qm, f.q0, f.qp]).collect(),
            wavevectors: basis.wavevectors.clone(),
            ksq: basis.ksq.clone(),
            mode_omega: basis.frames.iter().map(|f| f.omega).collect(),
        })
    }

    pub fn len(&self) -> usize {
        self.frames.len()
    }

    pub fn is_empty(&self) -> bool {
        self.frames.is_empty()
    }

    pub fn pairs_for(&self, n: usize) -> &[(u32, u32)] {
        &self.pairs[self.offsets[n]..self.offsets[n + 1]]
    }

    pub fn pair_count(&self) -> usize {
        self.pairs.len()
    }

    /// Frame vectors of mode `n` in branch order.
    pub fn frame(&self, n: usize) -> &[C4; 3] {
        &self.frames[n]
    }

    pub fn wavevector(&self, n: usize) -> [f64; 3] {
        self.wavevectors[n]
    }

    /// `v̂_n = Σ_σ a^σ_n q^σ_n`.
    pub fn velocity(&self, a: &[Triple]) -> Vec<C4> {
        a.iter()
            .zip(&self.frames)
            .map(|(x, q)| {
                let mut v = [ZERO; 4];
                for s in 0..3 {
                    for j in 0..4 {
                        v[j] += x[s] * q[s][j];
                    }
                }
                v
            })
            .collect()
    }

    /// Projected nonlinearity in `a`-variables.
    pub fn nonlinear_a(&self, a: &[Triple]) -> Vec<Triple> {
        let v = self.velocity(a);
        let wv = &self.wavevectors;
        (0..self.len())
            .into_par_iter()
            .map(|n| {
                let mut w = [ZERO; 4];
                for &(k, m) in self.pairs_for(n) {
                    let (vk, vm, mv) = (&v[k as usize], &v[m as usize], wv[m as usize]);
                    let adv = vk[0] * mv[0] + vk[1] * mv[1] + vk[2] * mv[2];
                    for j in 0..4 {
                        w[j] += adv * vm[j];
                    }
                }
                let q = &self.frames[n];
                [
                    -I * hdot(&w, &q[0]),
                    -I * hdot(&w, &q[1]),
                    -I * hdot(&w, &q[2]),
                ]
            })
            .collect()
    }

    /// Nonlinearity of the full system in `c`-variables at time `t`.
    pub fn nonlinear_full(&self, state: &AmplitudeState, t: f64, n_big: f64) -> Vec<Triple> {
        let nt = n_big * t;
        let a = rotate_phases(&self.mode_omega, state, nt, 1.0);
        let out = self.nonlinear_a(&a);
        rotate_phases(
            &self.mode_omega,
            &AmplitudeState::from_modes(t, out),
            nt,
            -1.0,
        )
    }

    /// Full right-hand side, identical to the table evaluation up to rounding.
    pub fn rhs_full(&self, state: &AmplitudeState, t: f64, params: &RhsParams) -> AmplitudeState {
        let mut out = self.nonlinear_full(state, t, params.n);
        let mu = [params.mu(-1), params.mu(0), params.mu(1)];
        for ((o, x), k2) in out.iter_mut().zip(&state.modes).zip(&self.ksq) {
            for s in [-1i8, 0, 1] {
                let j = sidx(s);
                o[j] -= mu[j] * k2 * x[j];
            }
        }
        AmplitudeState::from_modes(t, out)
    }
}
