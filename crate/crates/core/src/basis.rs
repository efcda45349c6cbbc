//! Craya-Herring eigenframes, the extended Leray projector and amplitude
//! decomposition of divergence-free 4-vectors `v̂ = (û₁, û₂, û₃, v̂₄)`.

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::lattice::{
    dilated_geometry_kind, DilationFactors, FrequencyIndex, FrequencySet, LatticeKind,
};

pub type C4 = [Complex64; 4];

/// Relative tolerance on `|v̂·q_div*| / |v̂|` accepted by [`decompose`].
pub const TOL_DIV: f64 = 1e-10;

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

fn re(x: f64) -> Complex64 {
    Complex64::new(x, 0.0)
}

/// Hermitian inner product `a · b*`.
pub fn hdot(a: &C4, b: &C4) -> Complex64 {
    a.iter().zip(b).map(|(x, y)| x * y.conj()).sum()
}

pub fn norm4(a: &C4) -> f64 {
    a.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt()
}

/// Orthonormal frame `{q⁺¹, q⁻¹, q⁰, q_div}` of one mode.
#[derive(Clone, Debug, PartialEq)]
pub struct CrayaHerringFrame {
    pub qp: C4,
    pub qm: C4,
    pub q0: C4,
    pub qdiv: C4,
    /// `ω = |ñ|_h / |ñ|`.
    pub omega: f64,
    pub horizontal_zero: bool,
}

impl CrayaHerringFrame {
    /// Frame vector for wave branch `σ ∈ {-1, 0, 1}`.
    pub fn q(&self, sigma: i8) -> &C4 {
        match sigma {
            1 => &self.qp,
            -1 => &self.qm,
            0 => &self.q0,
            _ => panic!("branch index {sigma} outside {{-1,0,1}}"),
        }
    }

    fn from_geometry(w: [f64; 3], hsq: f64, fsq: f64, horizontal_zero: bool) -> Self {
        if horizontal_zero {
            let h = 0.5;
            let s = std::f64::consts::FRAC_1_SQRT_2;
            return CrayaHerringFrame {
                qp: [re(h), re(h), re(0.0), re(s)],
                qm: [re(-h), re(-h), re(0.0), re(s)],
                q0: [re(-s), re(s), re(0.0), re(0.0)],
                qdiv: [re(0.0), re(0.0), re(1.0), re(0.0)],
                omega: 0.0,
                horizontal_zero: true,
            };
        }
        let omega = (hsq / fsq).sqrt();
        let hn = hsq.sqrt();
        let fnorm = fsq.sqrt();
        let pref = 1.0 / (std::f64::consts::SQRT_2 * hsq);
        let qp = [
            I * (pref * omega * w[0] * w[2]),
            I * (pref * omega * w[1] * w[2]),
            -I * (pref * hsq * omega),
            re(pref * hsq),
        ];
        let qm = [qp[0].conj(), qp[1].conj(), qp[2].conj(), qp[3].conj()];
        CrayaHerringFrame {
            qp,
            qm,
            q0: [re(-w[1] / hn), re(w[0] / hn), re(0.0), re(0.0)],
            qdiv: [
                re(w[0] / fnorm),
                re(w[1] / fnorm),
                re(w[2] / fnorm),
                re(0.0),
            ],
            omega,
            horizontal_zero: false,
        }
    }
}

fn cubic_wavevector(n: FrequencyIndex, dilation: &DilationFactors) -> [f64; 3] {
    let (g1, g2) = dilation.gamma();
    [g1 * n.n1 as f64, g2 * n.n2 as f64, n.n3 as f64]
}

/// Craya-Herring frame of a cubic-lattice mode under the given dilation.
pub fn frame(n: FrequencyIndex, dilation: &DilationFactors) -> Result<CrayaHerringFrame> {
    let g = dilated_geometry_kind(LatticeKind::Cubic, n, dilation)?;
    Ok(CrayaHerringFrame::from_geometry(
        cubic_wavevector(n, dilation),
        g.hsq.to_f64(),
        g.fsq.to_f64(),
        g.hsq.is_zero(),
    ))
}

/// 4×4 real matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct Projector4 {
    pub entries: [[f64; 4]; 4],
}

impl Projector4 {
    fn from_wavevector(w: [f64; 3]) -> Self {
        let fsq = w[0] * w[0] + w[1] * w[1] + w[2] * w[2];
        let mut e = [[0.0; 4]; 4];
        for (i, row) in e.iter_mut().enumerate() {
            for (j, x) in row.iter_mut().enumerate() {
                let delta = if i == j { 1.0 } else { 0.0 };
                *x = if i < 3 && j < 3 {
                    delta - w[i] * w[j] / fsq
                } else {
                    delta
                };
            }
        }
        Projector4 { entries: e }
    }

    pub fn apply(&self, v: &C4) -> C4 {
        let mut out = [Complex64::new(0.0, 0.0); 4];
        for (o, row) in out.iter_mut().zip(&self.entries) {
            *o = row.iter().zip(v).map(|(a, x)| x * *a).sum();
        }
        out
    }

    pub fn matmul(&self, other: &Projector4) -> Projector4 {
        let mut e = [[0.0; 4]; 4];
        for (i, row) in e.iter_mut().enumerate() {
            for (j, x) in row.iter_mut().enumerate() {
                *x = (0..4)
                    .map(|l| self.entries[i][l] * other.entries[l][j])
                    .sum();
            }
        }
        Projector4 { entries: e }
    }
}

/// Stratification coupling `J` acting on `(u₁, u₂, u₃, v₄)`, oriented so
/// that `S_n q^σ = iσω_n q^σ` and the linear flow is `e^{tNS_n}`.
pub fn stratification_matrix() -> Projector4 {
    let mut e = [[0.0; 4]; 4];
    e[2][3] = 1.0;
    e[3][2] = -1.0;
    Projector4 { entries: e }
}

/// Extended Leray projector `P_n` on the dilated wavevector.
pub fn extended_leray(n: FrequencyIndex, dilation: &DilationFactors) -> Result<Projector4> {
    if n.is_zero() {
        return Err(Error::ZeroMode);
    }
    Ok(Projector4::from_wavevector(cubic_wavevector(n, dilation)))
}

/// `S_n = P_n J P_n`.
pub fn wave_matrix(n: FrequencyIndex, dilation: &DilationFactors) -> Result<Projector4> {
    let p = extended_leray(n, dilation)?;
    Ok(p.matmul(&stratification_matrix()).matmul(&p))
}

/// Amplitudes along `q⁻¹`, `q⁰`, `q⁺¹`.
#[derive(Clone, Copy, Debug, PartialEq, Default)]
pub struct WaveAmplitudes {
    pub am: Complex64,
    pub a0: Complex64,
    pub ap: Complex64,
}

impl WaveAmplitudes {
    pub fn new(am: Complex64, a0: Complex64, ap: Complex64) -> Self {
        WaveAmplitudes { am, a0, ap }
    }

    pub fn as_array(&self) -> [Complex64; 3] {
        [self.am, self.a0, self.ap]
    }
}

/// Project a divergence-free 4-vector onto the frame.
pub fn decompose(vhat: &C4, frame: &CrayaHerringFrame) -> Result<WaveAmplitudes> {
    let div = hdot(vhat, &frame.qdiv).norm();
    if div > TOL_DIV * norm4(vhat) {
        return Err(Error::DivergenceViolation {
            mode: format!("omega={}", frame.omega),
            residual: div,
        });
    }
    Ok(WaveAmplitudes {
        am: hdot(vhat, &frame.qm),
        a0: hdot(vhat, &frame.q0),
        ap: hdot(vhat, &frame.qp),
    })
}

/// `v̂ = Σ a^σ q^σ`.
pub fn reconstruct(a: &WaveAmplitudes, frame: &CrayaHerringFrame) -> C4 {
    let mut v = [Complex64::new(0.0, 0.0); 4];
    for (i, x) in v.iter_mut().enumerate() {
        *x = a.am * frame.qm[i] + a.a0 * frame.q0[i] + a.ap * frame.qp[i];
    }
    v
}

/// Helmholtz-Leray split `û = ŵ + iñπ̂` of a 3-vector on a cubic mode.
pub fn helmholtz_decompose(
    uhat: &[Complex64; 3],
    n: FrequencyIndex,
    dilation: &DilationFactors,
) -> Result<([Complex64; 3], Complex64)> {
    if n.is_zero() {
        return Err(Error::ZeroMode);
    }
    let w = cubic_wavevector(n, dilation);
    let fsq = w[0] * w[0] + w[1] * w[1] + w[2] * w[2];
    let ndotu: Complex64 = (0..3).map(|i| uhat[i] * w[i]).sum();
    let pi = -(I * ndotu) / fsq;
    let mut sol = [Complex64::new(0.0, 0.0); 3];
    for i in 0..3 {
        sol[i] = uhat[i] - w[i] * ndotu / fsq;
    }
    Ok((sol, pi))
}

/// Frames and dilated geometry for every member of a frequency set, aligned
/// with set ordinals.
#[derive(Clone, Debug)]
pub struct ModeBasis {
    pub frames: Vec<CrayaHerringFrame>,
    /// Dilated wavevectors `ñ`.
    pub wavevectors: Vec<[f64; 3]>,
    /// `|ñ|²`.
    pub ksq: Vec<f64>,
    /// `|ñ|_h`.
    pub hnorm: Vec<f64>,
}

impl ModeBasis {
    pub fn new(set: &FrequencySet) -> Self {
        let rows: Vec<_> = (0..set.len())
            .into_par_iter()
            .map(|i| {
                let g = set.geometry(i);
                let w = set.wavevector(i);
                let hsq = g.hsq.to_f64();
                let fsq = g.fsq.to_f64();
                let fr = CrayaHerringFrame::from_geometry(w, hsq, fsq, g.hsq.is_zero());
                (fr, w, fsq, hsq.sqrt())
            })
            .collect();
        let mut b = ModeBasis {
            frames: Vec::with_capacity(rows.len()),
            wavevectors: Vec::with_capacity(rows.len()),
            ksq: Vec::with_capacity(rows.len()),
            hnorm: Vec::with_capacity(rows.len()),
        };
        for (f, w, k, h) in rows {
            b.frames.push(f);
            b.wavevectors.push(w);
            b.ksq.push(k);
            b.hnorm.push(h);
        }
        b
    }

    pub fn len(&self) -> usize {
        self.frames.len()
    }

    pub fn is_empty(&self) -> bool {
        self.frames.is_empty()
    }

    pub fn projector(&self, ordinal: usize) -> Projector4 {
        Projector4::from_wavevector(self.wavevectors[ordinal])
    }

    pub fn wave_matrix(&self, ordinal: usize) -> Projector4 {
        let p = self.projector(ordinal);
        p.matmul(&stratification_matrix()).matmul(&p)
    }
}
