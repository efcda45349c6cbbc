//! Exact resonance classification of triads.
//!
//! A triad `n = k + m` with branch signs `σ = (σ₀, σ₁, σ₂)` is resonant when
//! `ω^σ = -σ₀ω_n + σ₁ω_k + σ₂ω_m` vanishes. Every `ω` is the square root of
//! an exact ratio `H/F` of scaled squared norms, so the question reduces to
//! polynomial identities in `H` and `F` that are settled without floats.

mod census;

pub use census::{max_resonant_fiber, restricted_convolution_census, CensusShell, FiberReport};

use std::cmp::Ordering;
use std::collections::HashMap;
use std::io::Write;

use num_bigint::BigInt;
use num_rational::BigRational;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::lattice::{
    scaled_norms, DilationFactors, FrequencyIndex, FrequencySet, LatticeKind, ScaledNorms, Surd,
    SurdScalar,
};

/// Branch signs `(σ₀, σ₁, σ₂)`, each in `{-1, 0, 1}`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SigmaTriple {
    pub s0: i8,
    pub s1: i8,
    pub s2: i8,
}

impl SigmaTriple {
    pub fn new(s0: i8, s1: i8, s2: i8) -> Result<Self> {
        if [s0, s1, s2].iter().any(|s| !(-1..=1).contains(s)) {
            return Err(Error::InvalidInput(format!(
                "branch signs ({s0},{s1},{s2}) outside {{-1,0,1}}"
            )));
        }
        Ok(SigmaTriple { s0, s1, s2 })
    }

    /// All 27 triples in lexicographic order.
    pub fn all() -> impl Iterator<Item = SigmaTriple> {
        (-1..=1i8).flat_map(|s0| {
            (-1..=1i8).flat_map(move |s1| (-1..=1i8).map(move |s2| SigmaTriple { s0, s1, s2 }))
        })
    }

    /// Coefficients multiplying `(ω_n, ω_k, ω_m)`.
    pub fn weights(&self) -> [i8; 3] {
        [-self.s0, self.s1, self.s2]
    }

    /// Dense code in `0..27`.
    pub fn code(&self) -> u8 {
        ((self.s0 + 1) * 9 + (self.s1 + 1) * 3 + (self.s2 + 1)) as u8
    }

    pub fn from_code(code: u8) -> Self {
        let c = code as i8;
        SigmaTriple {
            s0: c / 9 - 1,
            s1: (c / 3) % 3 - 1,
            s2: c % 3 - 1,
        }
    }

    pub fn is_wave_triple(&self) -> bool {
        self.s0 != 0 && self.s1 != 0 && self.s2 != 0
    }
}

/// Exact resonance decision with its floating-point shadow.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ResonanceVerdict {
    pub resonant: bool,
    pub omega_value: f64,
}

fn check_triad(n: FrequencyIndex, k: FrequencyIndex, m: FrequencyIndex) -> Result<()> {
    if n.is_zero() || k.is_zero() || m.is_zero() {
        return Err(Error::ZeroMode);
    }
    if k + m != n {
        return Err(Error::NotATriad {
            n: n.to_string(),
            k: k.to_string(),
            m: m.to_string(),
        });
    }
    Ok(())
}

/// `ω = √(H/F)` from exact scaled norms.
pub fn omega_of(norms: &ScaledNorms) -> f64 {
    (norms.h.to_f64() / norms.f.to_f64()).sqrt()
}

/// `ω^σ_{nkm}` on a cubic lattice with the given dilation.
pub fn omega_sigma(
    n: FrequencyIndex,
    k: FrequencyIndex,
    m: FrequencyIndex,
    sigma: SigmaTriple,
    dilation: &DilationFactors,
) -> Result<f64> {
    omega_sigma_kind(LatticeKind::Cubic, n, k, m, sigma, dilation)
}

pub fn omega_sigma_kind(
    kind: LatticeKind,
    n: FrequencyIndex,
    k: FrequencyIndex,
    m: FrequencyIndex,
    sigma: SigmaTriple,
    dilation: &DilationFactors,
) -> Result<f64> {
    check_triad(n, k, m)?;
    let w = [n, k, m].map(|x| omega_of(&scaled_norms(kind, x, dilation)));
    let s = sigma.weights();
    Ok(s[0] as f64 * w[0] + s[1] as f64 * w[1] + s[2] as f64 * w[2])
}

fn exact_verdict<T: SurdScalar>(
    h: [&Surd<T>; 3],
    f: [&Surd<T>; 3],
    weights: [i8; 3],
) -> Option<bool> {
    // terms with zero weight or zero frequency contribute nothing
    let active: Vec<(i8, usize)> = (0..3)
        .filter(|&i| weights[i] != 0 && !h[i].is_zero())
        .map(|i| (weights[i], i))
        .collect();
    match active.len() {
        0 => Some(true),
        1 => Some(false),
        2 => {
            let (sa, a) = active[0];
            let (sb, b) = active[1];
            if sa == sb {
                return Some(false);
            }
            // ω_a = ω_b ⟺ H_a F_b = H_b F_a
            Some(h[a].checked_mul(f[b])? == h[b].checked_mul(f[a])?)
        }
        _ => {
            let pos = active.iter().filter(|(s, _)| *s > 0).count();
            if pos == 0 || pos == 3 {
                return Some(false);
            }
            let lone_sign = if pos == 1 { 1 } else { -1 };
            let x = active.iter().find(|(s, _)| *s == lone_sign)?.1;
            let others: Vec<usize> = active
                .iter()
                .filter(|(s, _)| *s != lone_sign)
                .map(|t| t.1)
                .collect();
            let (y, z) = (others[0], others[1]);
            // ω_x = ω_y + ω_z: square once, check sign, square again
            let fyfz = f[y].checked_mul(f[z])?;
            let fxfz = f[x].checked_mul(f[z])?;
            let fxfy = f[x].checked_mul(f[y])?;
            let r = h[x]
                .checked_mul(&fyfz)?
                .checked_sub(&h[y].checked_mul(&fxfz)?)?
                .checked_sub(&h[z].checked_mul(&fxfy)?)?;
            if r.signum()? == Ordering::Less {
                return Some(false);
            }
            let lhs = r.checked_mul(&r)?;
            let four = T::from_i64(4);
            let rhs = h[y]
                .checked_mul(h[z])?
                .checked_mul(&f[x].checked_mul(f[x])?)?
                .checked_mul(&fyfz)?
                .checked_scale(&four)?;
            Some(lhs == rhs)
        }
    }
}

/// Exact resonance verdict from scaled norms of `(n, k, m)`.
pub fn resonant_from_norms(norms: [&ScaledNorms; 3], sigma: SigmaTriple) -> bool {
    let h = [&norms[0].h, &norms[1].h, &norms[2].h];
    let f = [&norms[0].f, &norms[1].f, &norms[2].f];
    if let Some(v) = exact_verdict(h, f, sigma.weights()) {
        return v;
    }
    let hb = h.map(|x| x.to_big());
    let fb = f.map(|x| x.to_big());
    exact_verdict(
        [&hb[0], &hb[1], &hb[2]],
        [&fb[0], &fb[1], &fb[2]],
        sigma.weights(),
    )
    .expect("big-integer arithmetic cannot overflow")
}

/// Exact resonance test on a cubic lattice.
pub fn is_resonant_exact(
    n: FrequencyIndex,
    k: FrequencyIndex,
    m: FrequencyIndex,
    sigma: SigmaTriple,
    dilation: &DilationFactors,
) -> Result<ResonanceVerdict> {
    is_resonant_exact_kind(LatticeKind::Cubic, n, k, m, sigma, dilation)
}

pub fn is_resonant_exact_kind(
    kind: LatticeKind,
    n: FrequencyIndex,
    k: FrequencyIndex,
    m: FrequencyIndex,
    sigma: SigmaTriple,
    dilation: &DilationFactors,
) -> Result<ResonanceVerdict> {
    check_triad(n, k, m)?;
    let norms = [n, k, m].map(|x| scaled_norms(kind, x, dilation));
    let resonant = resonant_from_norms([&norms[0], &norms[1], &norms[2]], sigma);
    let omega_value = omega_sigma_kind(kind, n, k, m, sigma, dilation)?;
    Ok(ResonanceVerdict {
        resonant,
        omega_value,
    })
}

/// Exact value `num / den` of the discriminant.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ExactDiscriminant {
    pub num: Surd<BigInt>,
    pub den: BigInt,
}

impl ExactDiscriminant {
    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    pub fn to_rational(&self) -> Option<BigRational> {
        self.num
            .is_rational()
            .then(|| BigRational::new(self.num.c[0].clone(), self.den.clone()))
    }

    /// `P = Q²`, the degree-24 form.
    pub fn squared(&self) -> ExactDiscriminant {
        ExactDiscriminant {
            num: self.num.checked_mul(&self.num).expect("big ints"),
            den: &self.den * &self.den,
        }
    }

    pub fn to_f64(&self) -> f64 {
        self.num.to_f64() / num_traits::ToPrimitive::to_f64(&self.den).unwrap_or(f64::NAN)
    }

    /// `(numerator, denominator)` strings; rational values are reduced.
    pub fn csv_parts(&self) -> (String, String) {
        match self.to_rational() {
            Some(r) => (r.numer().to_string(), r.denom().to_string()),
            None => (self.num.to_string(), self.den.to_string()),
        }
    }
}

fn q_scaled<T: SurdScalar>(
    n: (&Surd<T>, &Surd<T>),
    k: (&Surd<T>, &Surd<T>),
    m: (&Surd<T>, &Surd<T>),
) -> Option<Surd<T>> {
    let a2 = n.0.checked_mul(k.1)?.checked_mul(m.1)?;
    let b2 = n.1.checked_mul(k.0)?.checked_mul(m.1)?;
    let c2 = n.1.checked_mul(k.1)?.checked_mul(m.0)?;
    let s = a2.checked_sub(&b2)?.checked_sub(&c2)?;
    let four = T::from_i64(4);
    s.checked_mul(&s)?
        .checked_sub(&b2.checked_mul(&c2)?.checked_scale(&four)?)
}

/// Scaled discriminant `Q' = D⁶·Q`, zero exactly when some wave triple
/// `σ ∈ {±1}³` is resonant.
pub fn discriminant_scaled(n: &ScaledNorms, k: &ScaledNorms, m: &ScaledNorms) -> Surd<BigInt> {
    if let Some(q) = q_scaled((&n.h, &n.f), (&k.h, &k.f), (&m.h, &m.f)) {
        return q.to_big();
    }
    let (nh, nf, kh, kf, mh, mf) = (
        n.h.to_big(),
        n.f.to_big(),
        k.h.to_big(),
        k.f.to_big(),
        m.h.to_big(),
        m.f.to_big(),
    );
    q_scaled((&nh, &nf), (&kh, &kf), (&mh, &mf)).expect("big ints")
}

/// Zero test of the discriminant without leaving fixed-width integers when
/// possible.
pub fn discriminant_vanishes(n: &ScaledNorms, k: &ScaledNorms, m: &ScaledNorms) -> bool {
    match q_scaled((&n.h, &n.f), (&k.h, &k.f), (&m.h, &m.f)) {
        Some(q) => q.is_zero(),
        None => discriminant_scaled(n, k, m).is_zero(),
    }
}

/// `Q = (A² − B² − C²)² − 4B²C²` with `A² = |ñ|_h²|k̃|²|m̃|²`,
/// `B² = |ñ|²|k̃|_h²|m̃|²`, `C² = |ñ|²|k̃|²|m̃|_h²`.
pub fn resonance_discriminant(
    n: FrequencyIndex,
    k: FrequencyIndex,
    m: FrequencyIndex,
    dilation: &DilationFactors,
) -> Result<ExactDiscriminant> {
    resonance_discriminant_kind(LatticeKind::Cubic, n, k, m, dilation)
}

pub fn resonance_discriminant_kind(
    kind: LatticeKind,
    n: FrequencyIndex,
    k: FrequencyIndex,
    m: FrequencyIndex,
    dilation: &DilationFactors,
) -> Result<ExactDiscriminant> {
    if n.is_zero() || k.is_zero() || m.is_zero() {
        return Err(Error::ZeroMode);
    }
    let [a, b, c] = [n, k, m].map(|x| scaled_norms(kind, x, dilation));
    let (d, _, _) = dilation.integer_weights();
    let d = BigInt::from(d);
    let den = d.pow(6);
    Ok(ExactDiscriminant {
        num: discriminant_scaled(&a, &b, &c),
        den,
    })
}

/// One triad with vanishing discriminant.
#[derive(Clone, Debug, PartialEq)]
pub struct AdmissibilityRow {
    pub n: FrequencyIndex,
    pub k: FrequencyIndex,
    pub m: FrequencyIndex,
    pub q: ExactDiscriminant,
    /// Some (but not all) horizontal parts vanish. Such triads resonate for
    /// every dilation; only rows with all horizontal parts nonzero bear on
    /// admissibility.
    pub degenerate: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct AdmissibilityReport {
    pub descriptor: crate::lattice::LatticeDescriptor,
    pub triads_scanned: usize,
    pub skipped_horizontal_zero: usize,
    pub rows: Vec<AdmissibilityRow>,
}

impl AdmissibilityReport {
    pub fn generic_rows(&self) -> impl Iterator<Item = &AdmissibilityRow> {
        self.rows.iter().filter(|r| !r.degenerate)
    }

    /// No triad with all three horizontal parts nonzero resonates.
    pub fn certifies(&self) -> bool {
        self.generic_rows().next().is_none()
    }

    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "n1,n2,n3,k1,k2,k3,m1,m2,m3,Q_num,Q_den,degenerate")?;
        for r in &self.rows {
            let (qn, qd) = r.q.csv_parts();
            writeln!(
                w,
                "{},{},{},{},{},{},{},{},{},{},{},{}",
                r.n.n1,
                r.n.n2,
                r.n.n3,
                r.k.n1,
                r.k.n2,
                r.k.n3,
                r.m.n1,
                r.m.n2,
                r.m.n3,
                qn,
                qd,
                r.degenerate as u8
            )?;
        }
        Ok(())
    }
}

/// Scan every triad with some nonzero horizontal part for a vanishing
/// discriminant.
pub fn gamma_scan(set: &FrequencySet) -> AdmissibilityReport {
    let norms: Vec<ScaledNorms> = (0..set.len()).map(|i| set.scaled_norms(i)).collect();
    let (d, _, _) = set.dilation().integer_weights();
    let den = BigInt::from(d).pow(6);
    let per_n: Vec<(usize, usize, Vec<AdmissibilityRow>)> = (0..set.len())
        .into_par_iter()
        .map(|ni| {
            let mut scanned = 0;
            let mut skipped = 0;
            let mut rows = Vec::new();
            for (ki, mi) in set.pairs_for(ni) {
                let zeros = [ni, ki, mi]
                    .iter()
                    .filter(|&&i| norms[i].h.is_zero())
                    .count();
                if zeros == 3 {
                    skipped += 1;
                    continue;
                }
                scanned += 1;
                if discriminant_vanishes(&norms[ni], &norms[ki], &norms[mi]) {
                    rows.push(AdmissibilityRow {
                        n: set.member(ni),
                        k: set.member(ki),
                        m: set.member(mi),
                        q: ExactDiscriminant {
                            num: Surd::<BigInt>::zero(),
                            den: den.clone(),
                        },
                        degenerate: zeros > 0,
                    });
                }
            }
            (scanned, skipped, rows)
        })
        .collect();
    let mut report = AdmissibilityReport {
        descriptor: set.descriptor(),
        triads_scanned: 0,
        skipped_horizontal_zero: 0,
        rows: Vec::new(),
    };
    for (s, k, rows) in per_n {
        report.triads_scanned += s;
        report.skipped_horizontal_zero += k;
        report.rows.extend(rows);
    }
    report
}

/// Equivalence classes of exactly equal mode frequencies, with memoized
/// triad verdicts keyed by class.
pub struct ResonanceClassifier {
    norms: Vec<ScaledNorms>,
    class_of: Vec<u32>,
    omega: Vec<f64>,
    memo: HashMap<(u32, u32, u32, u8), bool>,
}

impl ResonanceClassifier {
    pub fn new(set: &FrequencySet) -> Self {
        let norms: Vec<ScaledNorms> = (0..set.len()).map(|i| set.scaled_norms(i)).collect();
        let omega: Vec<f64> = norms.iter().map(omega_of).collect();
        let mut order: Vec<usize> = (0..norms.len()).collect();
        order.sort_by(|&a, &b| omega[a].total_cmp(&omega[b]).then(a.cmp(&b)));
        let mut class_of = vec![u32::MAX; norms.len()];
        // representatives sorted by ω; compare exactly within a float window
        let mut reps: Vec<usize> = Vec::new();
        for &i in &order {
            let mut found = None;
            for (ci, &r) in reps.iter().enumerate().rev() {
                if omega[i] - omega[r] > 1e-9 {
                    break;
                }
                if same_frequency(&norms[i], &norms[r]) {
                    found = Some(ci);
                    break;
                }
            }
            class_of[i] = match found {
                Some(c) => c as u32,
                None => {
                    reps.push(i);
                    (reps.len() - 1) as u32
                }
            };
        }
        ResonanceClassifier {
            norms,
            class_of,
            omega,
            memo: HashMap::new(),
        }
    }

    pub fn omega(&self, ordinal: usize) -> f64 {
        self.omega[ordinal]
    }

    pub fn class_count(&self) -> usize {
        self.class_of
            .iter()
            .map(|&c| c as usize + 1)
            .max()
            .unwrap_or(0)
    }

    pub fn class_of(&self, ordinal: usize) -> u32 {
        self.class_of[ordinal]
    }

    pub fn is_resonant(&mut self, n: usize, k: usize, m: usize, sigma: SigmaTriple) -> bool {
        let key = (
            self.class_of[n],
            self.class_of[k],
            self.class_of[m],
            sigma.code(),
        );
        if let Some(&v) = self.memo.get(&key) {
            return v;
        }
        let v = self.decide(n, k, m, sigma);
        self.memo.insert(key, v);
        v
    }

    /// Verdict without touching the memo; usable from shared references.
    pub fn decide(&self, n: usize, k: usize, m: usize, sigma: SigmaTriple) -> bool {
        resonant_from_norms([&self.norms[n], &self.norms[k], &self.norms[m]], sigma)
    }
}

fn same_frequency(a: &ScaledNorms, b: &ScaledNorms) -> bool {
    if let (Some(x), Some(y)) = (a.h.checked_mul(&b.f), b.h.checked_mul(&a.f)) {
        return x == y;
    }
    let (ah, af, bh, bf) = (a.h.to_big(), a.f.to_big(), b.h.to_big(), b.f.to_big());
    ah.checked_mul(&bf) == bh.checked_mul(&af)
}
