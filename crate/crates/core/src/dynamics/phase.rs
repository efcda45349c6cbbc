//! Per-step phase integrals of the full nonlinearity.

use num_complex::Complex64;
use rayon::prelude::*;

use crate::basis::hdot;
use crate::interaction::{rotate_phases, AmplitudeState, Convolution, Triple};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const I: Complex64 = Complex64::new(0.0, 1.0);

/// `∫₀^τ e^{iNωs} ds = τ e^{ix} sin(x)/x` with `x = Nωτ/2`.
fn phase_integral(n_big: f64, omega: f64, tau: f64) -> Complex64 {
    let x = 0.5 * n_big * omega * tau;
    let sinc = if x.abs() < 1e-8 {
        1.0 - x * x / 6.0
    } else {
        x.sin() / x
    };
    Complex64::cis(x) * (tau * sinc)
}

/// Interaction coefficients of every pair and branch triple, multiplied by
/// the exact integral of their phase over a step of length `τ`.
pub struct PhaseWeights {
    n_big: f64,
    tau: f64,
    offsets: Vec<usize>,
    weights: Vec<[Complex64; 27]>,
}

impl PhaseWeights {
    pub fn new(conv: &Convolution, n_big: f64, tau: f64) -> Self {
        let om = &conv.mode_omega;
        let mut offsets = vec![0];
        for n in 0..conv.len() {
            offsets.push(offsets[n] + conv.pairs_for(n).len());
        }
        let weights = (0..conv.len())
            .into_par_iter()
            .flat_map_iter(|n| {
                let qn = conv.frame(n);
                conv.pairs_for(n).iter().map(move |&(k, m)| {
                    let (k, m) = (k as usize, m as usize);
                    let (qk, qm, mv) = (conv.frame(k), conv.frame(m), conv.wavevector(m));
                    let mut w = [ZERO; 27];
                    for s1 in 0..3 {
                        let adv = qk[s1][0] * mv[0] + qk[s1][1] * mv[1] + qk[s1][2] * mv[2];
                        for s2 in 0..3 {
                            for s0 in 0..3 {
                                let coeff = -I * adv * hdot(&qm[s2], &qn[s0]);
                                let omega = -(s0 as f64 - 1.0) * om[n]
                                    + (s1 as f64 - 1.0) * om[k]
                                    + (s2 as f64 - 1.0) * om[m];
                                w[s0 * 9 + s1 * 3 + s2] = coeff * phase_integral(n_big, omega, tau);
                            }
                        }
                    }
                    w
                })
            })
            .collect();
        PhaseWeights {
            n_big,
            tau,
            offsets,
            weights,
        }
    }

    pub fn tau(&self) -> f64 {
        self.tau
    }

    /// `∫_t^{t+τ}` of the nonlinearity with `c` frozen.
    pub fn integrate(&self, conv: &Convolution, state: &AmplitudeState, t: f64) -> Vec<Triple> {
        let nt = self.n_big * t;
        let a = rotate_phases(&conv.mode_omega, state, nt, 1.0);
        let out: Vec<Triple> = (0..conv.len())
            .into_par_iter()
            .map(|n| {
                let mut acc = [ZERO; 3];
                let ws = &self.weights[self.offsets[n]..self.offsets[n + 1]];
                for (&(k, m), w) in conv.pairs_for(n).iter().zip(ws) {
                    let (ak, am) = (&a[k as usize], &a[m as usize]);
                    let mut prod = [ZERO; 9];
                    for s1 in 0..3 {
                        for s2 in 0..3 {
                            prod[s1 * 3 + s2] = ak[s1] * am[s2];
                        }
                    }
                    for (s0, x) in acc.iter_mut().enumerate() {
                        let row = &w[s0 * 9..s0 * 9 + 9];
                        *x += row.iter().zip(&prod).map(|(w, p)| w * p).sum::<Complex64>();
                    }
                }
                acc
            })
            .collect();
        rotate_phases(
            &conv.mode_omega,
            &AmplitudeState::from_modes(t, out),
            nt,
            -1.0,
        )
    }
}
