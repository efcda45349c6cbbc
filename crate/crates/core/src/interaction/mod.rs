//! Triad interaction coefficients and the bilinear forms of the amplitude
//! system.
//!
//! With `a^σ_n = e^{iσω_nNt} c^σ_n` the amplitudes satisfy
//!
//! ```text
//! ∂_t c^{σ₀}_n = −μ_{σ₀}|ñ|² c^{σ₀}_n
//!              − i Σ_{n=k+m} Σ_{σ₁,σ₂} e^{iNtω^σ} (q^{σ₁}_k·m̃)(q^{σ₂}_m·q^{σ₀*}_n) c^{σ₁}_k c^{σ₂}_m
//! ```
//!
//! Entries with `ω^σ = 0` (decided exactly) form the resonant forms `B̄`; the
//! rest form the oscillatory forms `B̃`.

mod cache;
mod direct;

pub use cache::{cache_path, load_or_build};
pub use direct::Convolution;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::basis::{hdot, ModeBasis};
use crate::error::{Error, Result};
use crate::lattice::{DilationFactors, FrequencySet};
use crate::resonance::{ResonanceClassifier, SigmaTriple};

/// Coefficients at or below this magnitude are rounding residue of exact
/// zeros and are not admitted to the table.
pub const COEFF_CUTOFF: f64 = 1e-14;

/// Amplitudes of one mode in branch order `(σ = −1, 0, +1)`.
pub type Triple = [Complex64; 3];

/// Position of branch `σ` inside a [`Triple`].
#[inline]
pub fn sidx(sigma: i8) -> usize {
    (sigma + 1) as usize
}

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const I: Complex64 = Complex64::new(0.0, 1.0);

/// Per-mode amplitude triples aligned with set ordinals, tagged with a time.
#[derive(Clone, Debug, PartialEq)]
pub struct AmplitudeState {
    pub t: f64,
    pub modes: Vec<Triple>,
}

impl AmplitudeState {
    pub fn zeros(len: usize) -> Self {
        AmplitudeState {
            t: 0.0,
            modes: vec![[ZERO; 3]; len],
        }
    }

    pub fn from_modes(t: f64, modes: Vec<Triple>) -> Self {
        AmplitudeState { t, modes }
    }

    pub fn len(&self) -> usize {
        self.modes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.modes.is_empty()
    }

    pub fn check_aligned(&self, len: usize) -> Result<()> {
        if self.modes.len() != len {
            return Err(Error::Misaligned(format!(
                "state has {} modes, set has {len}",
                self.modes.len()
            )));
        }
        Ok(())
    }

    pub fn is_finite(&self) -> bool {
        self.modes
            .iter()
            .flatten()
            .all(|z| z.re.is_finite() && z.im.is_finite())
    }

    /// `Σ_n Σ_σ |c^σ_n|`.
    pub fn l1_norm(&self) -> f64 {
        self.modes.iter().flatten().map(|z| z.norm()).sum()
    }

    /// `Σ_n Σ_σ |c^σ_n|²`.
    pub fn energy(&self) -> f64 {
        self.modes.iter().flatten().map(|z| z.norm_sqr()).sum()
    }

    /// `Σ x·conj(y)` over all entries.
    pub fn inner(&self, other: &AmplitudeState) -> Complex64 {
        self.modes
            .iter()
            .flatten()
            .zip(other.modes.iter().flatten())
            .map(|(x, y)| x * y.conj())
            .sum()
    }

    /// Copy keeping only branch `sigma`.
    pub fn sector(&self, sigma: i8) -> AmplitudeState {
        let j = sidx(sigma);
        let modes = self
            .modes
            .iter()
            .map(|x| {
                let mut y = [ZERO; 3];
                y[j] = x[j];
                y
            })
            .collect();
        AmplitudeState { t: self.t, modes }
    }

    pub fn scaled(&self, s: f64) -> AmplitudeState {
        AmplitudeState {
            t: self.t,
            modes: self.modes.iter().map(|x| x.map(|z| z * s)).collect(),
        }
    }

    /// `self + alpha·x`, keeping `self.t`.
    pub fn axpy(&self, alpha: Complex64, x: &AmplitudeState) -> AmplitudeState {
        AmplitudeState {
            t: self.t,
            modes: self
                .modes
                .iter()
                .zip(&x.modes)
                .map(|(a, b)| {
                    [
                        a[0] + alpha * b[0],
                        a[1] + alpha * b[1],
                        a[2] + alpha * b[2],
                    ]
                })
                .collect(),
        }
    }

    pub fn sub(&self, x: &AmplitudeState) -> AmplitudeState {
        self.axpy(Complex64::new(-1.0, 0.0), x)
    }

    pub fn add(&self, x: &AmplitudeState) -> AmplitudeState {
        self.axpy(Complex64::new(1.0, 0.0), x)
    }

    pub fn max_abs_diff(&self, x: &AmplitudeState) -> f64 {
        self.modes
            .iter()
            .flatten()
            .zip(x.modes.iter().flatten())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }
}

/// Physical parameters entering the right-hand sides.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RhsParams {
    /// Stiffness `N = 𝒩√g`.
    pub n: f64,
    pub nu: f64,
    pub kappa: f64,
}

impl RhsParams {
    /// `μ₀ = ν`, `μ_{±1} = (ν+κ)/2`.
    pub fn mu(&self, sigma: i8) -> f64 {
        if sigma == 0 {
            self.nu
        } else {
            0.5 * (self.nu + self.kappa)
        }
    }
}

/// Set of allowed `(σ₁, σ₂)` branch pairs.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SigmaPairs(u16);

impl SigmaPairs {
    pub const ALL: SigmaPairs = SigmaPairs(0x1ff);
    pub const NONE: SigmaPairs = SigmaPairs(0);

    fn bit(s1: i8, s2: i8) -> u16 {
        1 << (sidx(s1) * 3 + sidx(s2))
    }

    pub fn from_pairs(pairs: &[(i8, i8)]) -> Self {
        SigmaPairs(pairs.iter().fold(0, |acc, &(a, b)| acc | Self::bit(a, b)))
    }

    pub fn single(s1: i8, s2: i8) -> Self {
        SigmaPairs(Self::bit(s1, s2))
    }

    pub fn without(self, pairs: &[(i8, i8)]) -> Self {
        SigmaPairs(self.0 & !Self::from_pairs(pairs).0)
    }

    #[inline]
    pub fn contains(&self, s1: i8, s2: i8) -> bool {
        self.0 & Self::bit(s1, s2) != 0
    }
}

/// One `(n, k, m, σ)` interaction.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TriadEntry {
    pub n: u32,
    pub k: u32,
    pub m: u32,
    pub sigma: SigmaTriple,
    /// `−i(q^{σ₁}_k·m̃)(q^{σ₂}_m·q^{σ₀*}_n)`.
    pub coeff: Complex64,
    /// `ω^σ_{nkm}`; exactly `0.0` for resonant entries.
    pub omega: f64,
    pub resonant: bool,
}

/// A partition of entries grouped by output ordinal.
#[derive(Clone, Debug, PartialEq, Default)]
pub struct Partition {
    pub entries: Vec<TriadEntry>,
    /// Entries of output `n` are `entries[offsets[n]..offsets[n+1]]`.
    pub offsets: Vec<usize>,
}

impl Partition {
    pub fn for_output(&self, n: usize) -> &[TriadEntry] {
        &self.entries[self.offsets[n]..self.offsets[n + 1]]
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    fn from_groups(groups: Vec<Vec<TriadEntry>>) -> Self {
        let mut offsets = Vec::with_capacity(groups.len() + 1);
        offsets.push(0);
        let mut entries = Vec::with_capacity(groups.iter().map(Vec::len).sum());
        for g in groups {
            entries.extend(g);
            offsets.push(entries.len());
        }
        Partition { entries, offsets }
    }
}

/// Precomputed coefficients split by exact resonance verdict.
#[derive(Clone, Debug, PartialEq)]
pub struct TriadTable {
    pub set_hash: String,
    pub dilation: DilationFactors,
    pub resonant: Partition,
    pub nonresonant: Partition,
    /// `|ñ|²` per mode.
    pub ksq: Vec<f64>,
    /// `ω_n` per mode.
    pub mode_omega: Vec<f64>,
    /// Largest `|ω^σ|` over all entries.
    pub omega_max: f64,
    /// Smallest `|ω^σ|` over non-resonant entries.
    pub omega_min_nonresonant: f64,
}

/// Interaction coefficient `−i(q^{σ₁}_k·m̃)(q^{σ₂}_m·q^{σ₀*}_n)`.
pub fn triad_coefficient(
    basis: &ModeBasis,
    n: usize,
    k: usize,
    m: usize,
    sigma: SigmaTriple,
) -> Complex64 {
    let qk = basis.frames[k].q(sigma.s1);
    let mv = basis.wavevectors[m];
    let adv = qk[0] * mv[0] + qk[1] * mv[1] + qk[2] * mv[2];
    let proj = hdot(basis.frames[m].q(sigma.s2), basis.frames[n].q(sigma.s0));
    -I * adv * proj
}

/// Build the coefficient table; entries within each output are ordered by
/// `(k, σ)`.
pub fn build_triad_table(set: &FrequencySet, basis: &ModeBasis) -> Result<TriadTable> {
    if basis.len() != set.len() {
        return Err(Error::Misaligned(format!(
            "basis has {} frames, set has {} modes",
            basis.len(),
            set.len()
        )));
    }
    let cls = ResonanceClassifier::new(set);
    let om: Vec<f64> = basis.frames.iter().map(|f| f.omega).collect();
    let sigmas: Vec<SigmaTriple> = SigmaTriple::all().collect();
    let groups: Vec<(Vec<TriadEntry>, Vec<TriadEntry>)> = (0..set.len())
        .into_par_iter()
        .map(|n| {
            let mut res = Vec::new();
            let mut non = Vec::new();
            let mut memo = std::collections::HashMap::new();
            for (k, m) in set.pairs_for(n) {
                for &s in &sigmas {
                    let coeff = triad_coefficient(basis, n, k, m, s);
                    if coeff.norm() <= COEFF_CUTOFF {
                        continue;
                    }
                    let key = (cls.class_of(n), cls.class_of(k), cls.class_of(m), s.code());
                    let resonant = *memo.entry(key).or_insert_with(|| cls.decide(n, k, m, s));
                    let w = s.weights();
                    let omega = if resonant {
                        0.0
                    } else {
                        w[0] as f64 * om[n] + w[1] as f64 * om[k] + w[2] as f64 * om[m]
                    };
                    let e = TriadEntry {
                        n: n as u32,
                        k: k as u32,
                        m: m as u32,
                        sigma: s,
                        coeff,
                        omega,
                        resonant,
                    };
                    if resonant {
                        res.push(e);
                    } else {
                        non.push(e);
                    }
                }
            }
            (res, non)
        })
        .collect();
    let (res, non): (Vec<_>, Vec<_>) = groups.into_iter().unzip();
    let resonant = Partition::from_groups(res);
    let nonresonant = Partition::from_groups(non);
    let omega_max = nonresonant
        .entries
        .iter()
        .map(|e| e.omega.abs())
        .fold(0.0, f64::max);
    let omega_min_nonresonant = nonresonant
        .entries
        .iter()
        .map(|e| e.omega.abs())
        .fold(f64::INFINITY, f64::min);
    Ok(TriadTable {
        set_hash: set.hash_hex(),
        dilation: *set.dilation(),
        resonant,
        nonresonant,
        ksq: basis.ksq.clone(),
        mode_omega: om,
        omega_max,
        omega_min_nonresonant,
    })
}

impl TriadTable {
    pub fn len(&self) -> usize {
        self.ksq.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ksq.is_empty()
    }

    pub fn entry_count(&self) -> usize {
        self.resonant.len() + self.nonresonant.len()
    }

    pub fn check_state(&self, s: &AmplitudeState) -> Result<()> {
        s.check_aligned(self.len())
    }
}

/// Sum `Σ weight(e)·g^{σ₁}_k h^{σ₂}_m` per output, all branches `σ₀` at once.
fn accumulate<F>(part: &Partition, g: &AmplitudeState, h: &AmplitudeState, weight: F) -> Vec<Triple>
where
    F: Fn(&TriadEntry) -> Option<Complex64> + Sync,
{
    let outputs = part.offsets.len() - 1;
    (0..outputs)
        .into_par_iter()
        .map(|n| {
            let mut acc = [ZERO; 3];
            for e in part.for_output(n) {
                if let Some(w) = weight(e) {
                    let s = e.sigma;
                    acc[sidx(s.s0)] +=
                        w * g.modes[e.k as usize][sidx(s.s1)] * h.modes[e.m as usize][sidx(s.s2)];
                }
            }
            acc
        })
        .collect()
}

fn column(v: Vec<Triple>, sigma0: i8) -> Vec<Complex64> {
    v.into_iter().map(|t| t[sidx(sigma0)]).collect()
}

/// Resonant form `B̄^{σ₀}(g, h)` restricted to allowed `(σ₁, σ₂)`.
pub fn apply_bbar(
    table: &TriadTable,
    g: &AmplitudeState,
    h: &AmplitudeState,
    sigma0: i8,
    allowed: SigmaPairs,
) -> Vec<Complex64> {
    column(
        accumulate(&table.resonant, g, h, |e| {
            (e.sigma.s0 == sigma0 && allowed.contains(e.sigma.s1, e.sigma.s2)).then_some(e.coeff)
        }),
        sigma0,
    )
}

/// Oscillatory form `B̃^{σ₀}(Nt; g, h)`: each entry carries `e^{iω^σNt}`.
pub fn apply_btilde(
    table: &TriadTable,
    nt: f64,
    g: &AmplitudeState,
    h: &AmplitudeState,
    sigma0: i8,
    allowed: SigmaPairs,
) -> Vec<Complex64> {
    column(
        accumulate(&table.nonresonant, g, h, |e| {
            (e.sigma.s0 == sigma0 && allowed.contains(e.sigma.s1, e.sigma.s2))
                .then(|| e.coeff * Complex64::cis(e.omega * nt))
        }),
        sigma0,
    )
}

/// Antiderivative form `ℬ̃^{σ₀}`: each entry carries `e^{iNtω^σ}/(iNω^σ)`.
pub fn apply_bscript(
    table: &TriadTable,
    nt: f64,
    g: &AmplitudeState,
    h: &AmplitudeState,
    sigma0: i8,
    n_big: f64,
    allowed: SigmaPairs,
) -> Vec<Complex64> {
    column(
        accumulate(&table.nonresonant, g, h, |e| {
            (e.sigma.s0 == sigma0 && allowed.contains(e.sigma.s1, e.sigma.s2))
                .then(|| e.coeff * Complex64::cis(e.omega * nt) / (I * (n_big * e.omega)))
        }),
        sigma0,
    )
}

/// Add `−μ_σ|ñ|² x` to `out`.
fn add_dissipation(table: &TriadTable, params: &RhsParams, x: &AmplitudeState, out: &mut [Triple]) {
    let mu = [params.mu(-1), params.mu(0), params.mu(1)];
    for ((o, xi), k2) in out.iter_mut().zip(&x.modes).zip(&table.ksq) {
        for j in 0..3 {
            o[j] -= mu[j] * k2 * xi[j];
        }
    }
}

fn add_into(out: &mut [Triple], v: &[Triple]) {
    for (o, x) in out.iter_mut().zip(v) {
        for j in 0..3 {
            o[j] += x[j];
        }
    }
}

/// Nonlinear part of the full system: `Σ_σ (B̄ + B̃)(c, c)` at time `t`.
pub fn nonlinear_full(
    table: &TriadTable,
    state: &AmplitudeState,
    t: f64,
    n_big: f64,
) -> Vec<Triple> {
    let nt = n_big * t;
    let mut out = accumulate(&table.resonant, state, state, |e| Some(e.coeff));
    let osc = accumulate(&table.nonresonant, state, state, |e| {
        Some(e.coeff * Complex64::cis(e.omega * nt))
    });
    add_into(&mut out, &osc);
    out
}

/// Right-hand side of the full amplitude system.
pub fn rhs_full(
    table: &TriadTable,
    state: &AmplitudeState,
    t: f64,
    params: &RhsParams,
) -> AmplitudeState {
    let mut out = nonlinear_full(table, state, t, params.n);
    add_dissipation(table, params, state, &mut out);
    AmplitudeState::from_modes(t, out)
}

/// Allowed `(σ₁, σ₂)` of the limit equations for output branch `σ₀`.
pub fn limit_pairs(sigma0: i8, drop_cancelling: bool) -> SigmaPairs {
    match sigma0 {
        0 if drop_cancelling => SigmaPairs::single(0, 0),
        0 => SigmaPairs::from_pairs(&[(0, 0), (1, -1), (-1, 1)]),
        s => SigmaPairs::ALL.without(&[(0, 0), (-s, 0), (0, -s)]),
    }
}

/// Nonlinear part of the limit equations.
pub fn nonlinear_limit(
    table: &TriadTable,
    state: &AmplitudeState,
    drop_cancelling: bool,
) -> Vec<Triple> {
    let allowed = [
        limit_pairs(-1, drop_cancelling),
        limit_pairs(0, drop_cancelling),
        limit_pairs(1, drop_cancelling),
    ];
    accumulate(&table.resonant, state, state, |e| {
        allowed[sidx(e.sigma.s0)]
            .contains(e.sigma.s1, e.sigma.s2)
            .then_some(e.coeff)
    })
}

/// Right-hand side of the limit equations (resonant interactions only).
pub fn rhs_limit(
    table: &TriadTable,
    state: &AmplitudeState,
    params: &RhsParams,
    drop_cancelling: bool,
) -> AmplitudeState {
    let mut out = nonlinear_limit(table, state, drop_cancelling);
    add_dissipation(table, params, state, &mut out);
    AmplitudeState::from_modes(state.t, out)
}

/// Right-hand side for the remainder `r = c − b`:
/// `−μ|ñ|²r + Σ_σ [B̄(r, c) + B̄(b, r)] + Σ_σ B̃(Nt; c, c)`.
pub fn rhs_remainder(
    table: &TriadTable,
    r: &AmplitudeState,
    c: &AmplitudeState,
    b: &AmplitudeState,
    t: f64,
    params: &RhsParams,
) -> AmplitudeState {
    let nt = params.n * t;
    let mut out = accumulate(&table.resonant, r, c, |e| Some(e.coeff));
    add_into(
        &mut out,
        &accumulate(&table.resonant, b, r, |e| Some(e.coeff)),
    );
    add_into(
        &mut out,
        &accumulate(&table.nonresonant, c, c, |e| {
            Some(e.coeff * Complex64::cis(e.omega * nt))
        }),
    );
    add_dissipation(table, params, r, &mut out);
    AmplitudeState::from_modes(t, out)
}

/// `a^σ_n = e^{iσω_nNt} c^σ_n` (`sign = 1`) or its inverse (`sign = −1`).
pub fn rotate_phases(
    mode_omega: &[f64],
    state: &AmplitudeState,
    nt: f64,
    sign: f64,
) -> Vec<Triple> {
    state
        .modes
        .iter()
        .zip(mode_omega)
        .map(|(x, &w)| {
            let p = Complex64::cis(sign * w * nt);
            [x[0] * p.conj(), x[1], x[2] * p]
        })
        .collect()
}
