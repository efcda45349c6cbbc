//! Physical-space reconstruction on one fundamental cell.

use num_complex::Complex64;
use rayon::prelude::*;

use super::Model;
use crate::error::{Error, Result};
use crate::interaction::{rotate_phases, AmplitudeState};
use crate::lattice::FrequencyIndex;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Gridded `(u, ρ)` on the cell `{Σ s_j e_j : s ∈ [0,1)³}`.
#[derive(Clone, Debug, PartialEq)]
pub struct PhysicalFields {
    pub t: f64,
    pub dims: [usize; 3],
    /// Cell edge vectors `e_j` (columns of `2πA^{−T}`), where `A` maps
    /// generator coordinates to dilated wavevectors.
    pub cell: [[f64; 3]; 3],
    /// Velocity components, row-major with the first axis slowest.
    pub u: [Vec<f64>; 3],
    /// Fourth component `v₄`.
    pub v4: Vec<f64>,
    /// `ρ = (𝒩/√g)v₄`; absent when `𝒩 = 0`.
    pub rho: Option<Vec<f64>>,
    /// Largest imaginary part relative to the largest modulus.
    pub imag_residue: f64,
}

impl PhysicalFields {
    /// Grid mean of `|u|² + v₄²`.
    pub fn mean_square(&self) -> f64 {
        let n = self.v4.len() as f64;
        (0..self.v4.len())
            .map(|i| {
                self.u[0][i].powi(2)
                    + self.u[1][i].powi(2)
                    + self.u[2][i].powi(2)
                    + self.v4[i].powi(2)
            })
            .sum::<f64>()
            / n
    }

    /// Grid point at integer coordinates.
    pub fn point(&self, idx: [usize; 3]) -> [f64; 3] {
        let mut x = [0.0; 3];
        for (j, e) in self.cell.iter().enumerate() {
            let s = idx[j] as f64 / self.dims[j] as f64;
            for (xi, ei) in x.iter_mut().zip(e) {
                *xi += s * ei;
            }
        }
        x
    }
}

fn inverse_transpose(a: [[f64; 3]; 3]) -> [[f64; 3]; 3] {
    let det = a[0][0] * (a[1][1] * a[2][2] - a[1][2] * a[2][1])
        - a[0][1] * (a[1][0] * a[2][2] - a[1][2] * a[2][0])
        + a[0][2] * (a[1][0] * a[2][1] - a[1][1] * a[2][0]);
    // cofactor C_ij / det is (A^{-1})_ji, i.e. (A^{-T})_ij
    std::array::from_fn(|i| {
        std::array::from_fn(|j| {
            let (i1, i2) = ((i + 1) % 3, (i + 2) % 3);
            let (j1, j2) = ((j + 1) % 3, (j + 2) % 3);
            (a[i1][j1] * a[i2][j2] - a[i1][j2] * a[i2][j1]) / det
        })
    })
}

/// Rotate `c` back to `a = e^{iσωNt}c`, rebuild `v̂_n` and sum
/// `Σ v̂_n e^{iñ·x}` on a `dims` grid. Since `ñ·x = 2π n·s` on the cell, the
/// sum separates along the three generator axes.
pub fn reconstruct_physical(
    model: &Model,
    state: &AmplitudeState,
    n_big: f64,
    dims: [usize; 3],
    g: f64,
    cal_n: f64,
) -> Result<PhysicalFields> {
    state.check_aligned(model.len())?;
    let radius = model.set.radius();
    let l = 2 * radius as usize + 1;
    if let Some(&got) = dims.iter().find(|&&d| d < l) {
        return Err(Error::GridTooCoarse {
            got,
            need: l,
            radius,
        });
    }
    let kind = model.set.kind();
    let (g1, g2) = model.set.dilation().gamma();
    let mut a_mat = [[0.0; 3]; 3];
    for j in 0..3 {
        let mut e = [0; 3];
        e[j] = 1;
        let x = kind.physical(FrequencyIndex::new(e[0], e[1], e[2]));
        let w = [g1 * x[0], g2 * x[1], x[2]];
        for i in 0..3 {
            a_mat[i][j] = w[i];
        }
    }
    let it = inverse_transpose(a_mat);
    let tau = 2.0 * std::f64::consts::PI;
    let cell = [0, 1, 2].map(|j| [tau * it[0][j], tau * it[1][j], tau * it[2][j]]);

    let a = rotate_phases(&model.conv.mode_omega, state, n_big * state.t, 1.0);
    let v = model.conv.velocity(&a);
    let r = radius as i32;
    let mut dense = vec![[ZERO; 4]; l * l * l];
    for (i, vi) in v.iter().enumerate() {
        let n = model.set.member(i);
        let idx = (((n.n1 + r) as usize * l) + (n.n2 + r) as usize) * l + (n.n3 + r) as usize;
        dense[idx] = *vi;
    }
    let phases: Vec<Vec<Complex64>> = (0..3)
        .map(|j| {
            (0..l)
                .flat_map(|c| {
                    let nj = c as f64 - r as f64;
                    (0..dims[j]).map(move |p| Complex64::cis(tau * nj * p as f64 / dims[j] as f64))
                })
                .collect()
        })
        .collect();
    let [d1, d2, d3] = dims;
    // axis 3: (a, b, c) -> (a, b, z)
    let mut t1 = vec![[ZERO; 4]; l * l * d3];
    t1.par_chunks_mut(d3).enumerate().for_each(|(ab, row)| {
        for c in 0..l {
            let x = dense[ab * l + c];
            if x == [ZERO; 4] {
                continue;
            }
            for (z, o) in row.iter_mut().enumerate() {
                let p = phases[2][c * d3 + z];
                for q in 0..4 {
                    o[q] += x[q] * p;
                }
            }
        }
    });
    // axis 2: (a, b, z) -> (a, y, z)
    let mut t2 = vec![[ZERO; 4]; l * d2 * d3];
    t2.par_chunks_mut(d2 * d3)
        .enumerate()
        .for_each(|(a_i, block)| {
            for b in 0..l {
                let src = &t1[(a_i * l + b) * d3..(a_i * l + b + 1) * d3];
                for y in 0..d2 {
                    let p = phases[1][b * d2 + y];
                    for z in 0..d3 {
                        for q in 0..4 {
                            block[y * d3 + z][q] += src[z][q] * p;
                        }
                    }
                }
            }
        });
    // axis 1: (a, y, z) -> (x, y, z)
    let mut f = vec![[ZERO; 4]; d1 * d2 * d3];
    f.par_chunks_mut(d2 * d3)
        .enumerate()
        .for_each(|(x, block)| {
            for a_i in 0..l {
                let p = phases[0][a_i * d1 + x];
                let src = &t2[a_i * d2 * d3..(a_i + 1) * d2 * d3];
                for (o, s) in block.iter_mut().zip(src) {
                    for q in 0..4 {
                        o[q] += s[q] * p;
                    }
                }
            }
        });
    let (mut max_im, mut max_abs) = (0.0f64, 0.0f64);
    for x in &f {
        for z in x {
            max_im = max_im.max(z.im.abs());
            max_abs = max_abs.max(z.norm());
        }
    }
    let comp = |q: usize| f.iter().map(|x| x[q].re).collect::<Vec<f64>>();
    let v4 = comp(3);
    let rho = (cal_n != 0.0).then(|| v4.iter().map(|x| cal_n / g.sqrt() * x).collect());
    Ok(PhysicalFields {
        t: state.t,
        dims,
        cell,
        u: [comp(0), comp(1), comp(2)],
        v4,
        rho,
        imag_residue: if max_abs > 0.0 { max_im / max_abs } else { 0.0 },
    })
}
