//! Truncated sum-closed frequency sets and their anisotropic dilations.
//!
//! Members are stored by integer generator coordinates. The physical
//! wavevector of a member is `B·n` for the generator matrix `B` of the
//! lattice kind, dilated horizontally by `(γ₁, γ₂)`. All squared norms are
//! kept exactly in ℤ[√2, √3] scaled by a common integer denominator.

mod surd;

pub use surd::{Surd, SurdScalar, ToF64};

use std::fmt;
use std::ops::{Add, Neg, Sub};

use num_integer::Integer;
use num_rational::Ratio;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

/// Integer generator coordinates of a frequency.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct FrequencyIndex {
    pub n1: i32,
    pub n2: i32,
    pub n3: i32,
}

impl FrequencyIndex {
    pub const fn new(n1: i32, n2: i32, n3: i32) -> Self {
        FrequencyIndex { n1, n2, n3 }
    }

    pub fn is_zero(&self) -> bool {
        self.n1 == 0 && self.n2 == 0 && self.n3 == 0
    }

    pub fn max_norm(&self) -> i32 {
        self.n1.abs().max(self.n2.abs()).max(self.n3.abs())
    }

    pub fn as_array(&self) -> [i32; 3] {
        [self.n1, self.n2, self.n3]
    }
}

impl fmt::Display for FrequencyIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{},{})", self.n1, self.n2, self.n3)
    }
}

impl Add for FrequencyIndex {
    type Output = FrequencyIndex;
    fn add(self, o: Self) -> Self {
        FrequencyIndex::new(self.n1 + o.n1, self.n2 + o.n2, self.n3 + o.n3)
    }
}

impl Sub for FrequencyIndex {
    type Output = FrequencyIndex;
    fn sub(self, o: Self) -> Self {
        FrequencyIndex::new(self.n1 - o.n1, self.n2 - o.n2, self.n3 - o.n3)
    }
}

impl Neg for FrequencyIndex {
    type Output = FrequencyIndex;
    fn neg(self) -> Self {
        FrequencyIndex::new(-self.n1, -self.n2, -self.n3)
    }
}

/// Generator families of sum-closed sets.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LatticeKind {
    /// ℤ³, the periodic case.
    Cubic,
    /// `{m₁e₁ + √2 m₂e₂ + m₃e₃}`.
    #[serde(rename = "oblique_a")]
    ObliqueA,
    /// `{m₁e₁ + m₂(e₁ + √2 e₂) + m₃(e₂ + √3 e₃)}`.
    #[serde(rename = "oblique_b")]
    ObliqueB,
}

impl LatticeKind {
    pub fn name(&self) -> &'static str {
        match self {
            LatticeKind::Cubic => "cubic",
            LatticeKind::ObliqueA => "oblique_a",
            LatticeKind::ObliqueB => "oblique_b",
        }
    }

    /// Physical (undilated) coordinates as floats.
    pub fn physical(&self, n: FrequencyIndex) -> [f64; 3] {
        let (m1, m2, m3) = (n.n1 as f64, n.n2 as f64, n.n3 as f64);
        let r2 = std::f64::consts::SQRT_2;
        match self {
            LatticeKind::Cubic => [m1, m2, m3],
            LatticeKind::ObliqueA => [m1, r2 * m2, m3],
            LatticeKind::ObliqueB => [m1 + m2, r2 * m2 + m3, 3f64.sqrt() * m3],
        }
    }

    /// Exact squares of the physical coordinates `(x₁², x₂², x₃²)`.
    fn physical_squares(&self, n: FrequencyIndex) -> [Surd<i128>; 3] {
        let (m1, m2, m3) = (n.n1 as i128, n.n2 as i128, n.n3 as i128);
        match self {
            LatticeKind::Cubic => [
                Surd::from_int(m1 * m1),
                Surd::from_int(m2 * m2),
                Surd::from_int(m3 * m3),
            ],
            LatticeKind::ObliqueA => [
                Surd::from_int(m1 * m1),
                Surd::from_int(2 * m2 * m2),
                Surd::from_int(m3 * m3),
            ],
            LatticeKind::ObliqueB => [
                Surd::from_int((m1 + m2) * (m1 + m2)),
                Surd::new(2 * m2 * m2 + m3 * m3, 2 * m2 * m3, 0, 0),
                Surd::from_int(3 * m3 * m3),
            ],
        }
    }
}

/// Squared horizontal dilation factors `(γ₁², γ₂²)`, stored exactly.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct DilationFactors {
    g1sq: Ratio<i64>,
    g2sq: Ratio<i64>,
}

impl DilationFactors {
    pub fn new(g1sq: Ratio<i64>, g2sq: Ratio<i64>) -> Result<Self> {
        for (name, g) in [("g1sq", g1sq), ("g2sq", g2sq)] {
            if *g.numer() <= 0 || *g.denom() <= 0 {
                return Err(Error::InvalidLattice(format!(
                    "{name} must be a strictly positive rational, got {g}"
                )));
            }
        }
        Ok(DilationFactors { g1sq, g2sq })
    }

    /// Dilation from integer fractions `(p₁/q₁, p₂/q₂)`.
    pub fn from_fractions(p1: i64, q1: i64, p2: i64, q2: i64) -> Result<Self> {
        if q1 == 0 || q2 == 0 {
            return Err(Error::InvalidLattice("zero denominator in dilation".into()));
        }
        DilationFactors::new(Ratio::new(p1, q1), Ratio::new(p2, q2))
    }

    pub fn periodic() -> Self {
        DilationFactors {
            g1sq: Ratio::from_integer(1),
            g2sq: Ratio::from_integer(1),
        }
    }

    pub fn g1sq(&self) -> Ratio<i64> {
        self.g1sq
    }

    pub fn g2sq(&self) -> Ratio<i64> {
        self.g2sq
    }

    pub fn gamma(&self) -> (f64, f64) {
        let f = |r: Ratio<i64>| (*r.numer() as f64 / *r.denom() as f64).sqrt();
        (f(self.g1sq), f(self.g2sq))
    }

    /// Common denominator `D` and integer weights `(D·γ₁², D·γ₂²)`.
    pub fn integer_weights(&self) -> (i128, i128, i128) {
        let d = (*self.g1sq.denom() as i128).lcm(&(*self.g2sq.denom() as i128));
        let a1 = *self.g1sq.numer() as i128 * (d / *self.g1sq.denom() as i128);
        let a2 = *self.g2sq.numer() as i128 * (d / *self.g2sq.denom() as i128);
        (d, a1, a2)
    }

    pub fn is_periodic_unit(&self) -> bool {
        self.g1sq == Ratio::from_integer(1) && self.g2sq == Ratio::from_integer(1)
    }
}

/// An exact value `num / den` with `num ∈ ℤ[√2,√3]` and `den > 0`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ExactValue {
    pub num: Surd<i128>,
    pub den: i128,
}

impl ExactValue {
    /// Reduced rational form when the value has no surd part.
    pub fn to_rational(&self) -> Option<Ratio<i128>> {
        self.num
            .is_rational()
            .then(|| Ratio::new(self.num.c[0], self.den))
    }

    pub fn to_f64(&self) -> f64 {
        self.num.to_f64() / self.den as f64
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }
}

/// Exact squared horizontal and full norms of a dilated mode.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ModeGeometrySquares {
    pub hsq: ExactValue,
    pub fsq: ExactValue,
}

/// Integer-scaled squared norms `(H, F) = D·(|ñ|_h², |ñ|²)`, sharing the
/// dilation's common denominator. Ratios and products of these are what
/// the resonance arithmetic works on.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct ScaledNorms {
    pub h: Surd<i128>,
    pub f: Surd<i128>,
}

pub(crate) fn scaled_norms(
    kind: LatticeKind,
    n: FrequencyIndex,
    dilation: &DilationFactors,
) -> ScaledNorms {
    let (d, a1, a2) = dilation.integer_weights();
    let [x1, x2, x3] = kind.physical_squares(n);
    let h = x1
        .checked_scale(&a1)
        .and_then(|p| p.checked_add(&x2.checked_scale(&a2)?))
        .expect("horizontal norm overflow");
    let f = h
        .checked_add(&x3.checked_scale(&d).expect("vertical norm overflow"))
        .expect("full norm overflow");
    ScaledNorms { h, f }
}

/// Exact `|ñ|_h²` and `|ñ|²` for a generator index on a cubic lattice.
pub fn dilated_geometry(
    n: FrequencyIndex,
    dilation: &DilationFactors,
) -> Result<ModeGeometrySquares> {
    dilated_geometry_kind(LatticeKind::Cubic, n, dilation)
}

/// Exact `|ñ|_h²` and `|ñ|²` for any lattice kind.
pub fn dilated_geometry_kind(
    kind: LatticeKind,
    n: FrequencyIndex,
    dilation: &DilationFactors,
) -> Result<ModeGeometrySquares> {
    if n.is_zero() {
        return Err(Error::ZeroMode);
    }
    let (d, _, _) = dilation.integer_weights();
    let s = scaled_norms(kind, n, dilation);
    Ok(ModeGeometrySquares {
        hsq: ExactValue { num: s.h, den: d },
        fsq: ExactValue { num: s.f, den: d },
    })
}

/// JSON-serializable lattice descriptor.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LatticeDescriptor {
    pub kind: LatticeKind,
    #[serde(rename = "M")]
    pub m: u32,
    pub g1sq: [i64; 2],
    pub g2sq: [i64; 2],
}

impl LatticeDescriptor {
    pub fn dilation(&self) -> Result<DilationFactors> {
        DilationFactors::from_fractions(self.g1sq[0], self.g1sq[1], self.g2sq[0], self.g2sq[1])
    }

    pub fn build(&self) -> Result<FrequencySet> {
        build_truncated_set(self.kind, self.m, self.dilation()?)
    }
}

/// The truncated set `{n : max|nᵢ| ≤ M} \ {0}` in lexicographic order.
#[derive(Clone, Debug)]
pub struct FrequencySet {
    kind: LatticeKind,
    m: u32,
    dilation: DilationFactors,
    members: Vec<FrequencyIndex>,
}

/// Build the truncated, negation-closed frequency set.
pub fn build_truncated_set(
    kind: LatticeKind,
    m: u32,
    dilation: DilationFactors,
) -> Result<FrequencySet> {
    if m == 0 {
        return Err(Error::InvalidLattice(
            "truncation radius M must be at least 1".into(),
        ));
    }
    if m > 64 {
        return Err(Error::InvalidLattice(format!(
            "truncation radius M = {m} exceeds 64"
        )));
    }
    DilationFactors::new(dilation.g1sq, dilation.g2sq)?;
    let r = m as i32;
    let mut members = Vec::with_capacity(((2 * r + 1).pow(3) - 1) as usize);
    for n1 in -r..=r {
        for n2 in -r..=r {
            for n3 in -r..=r {
                let n = FrequencyIndex::new(n1, n2, n3);
                if !n.is_zero() {
                    members.push(n);
                }
            }
        }
    }
    Ok(FrequencySet {
        kind,
        m,
        dilation,
        members,
    })
}

impl FrequencySet {
    pub fn kind(&self) -> LatticeKind {
        self.kind
    }

    pub fn radius(&self) -> u32 {
        self.m
    }

    pub fn dilation(&self) -> &DilationFactors {
        &self.dilation
    }

    pub fn members(&self) -> &[FrequencyIndex] {
        &self.members
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn member(&self, ordinal: usize) -> FrequencyIndex {
        self.members[ordinal]
    }

    fn side(&self) -> i64 {
        2 * self.m as i64 + 1
    }

    pub fn contains(&self, n: FrequencyIndex) -> bool {
        !n.is_zero() && n.max_norm() <= self.m as i32
    }

    /// Dense ordinal of a member, computed arithmetically.
    pub fn index_of(&self, n: FrequencyIndex) -> Option<usize> {
        if !self.contains(n) {
            return None;
        }
        let r = self.m as i64;
        let s = self.side();
        let lin = ((n.n1 as i64 + r) * s + (n.n2 as i64 + r)) * s + (n.n3 as i64 + r);
        let zero = (s * s * s - 1) / 2;
        Some(if lin < zero {
            lin as usize
        } else {
            (lin - 1) as usize
        })
    }

    /// Ordinal of `-n` given the ordinal of `n`.
    pub fn negated(&self, ordinal: usize) -> usize {
        self.members.len() - 1 - ordinal
    }

    pub fn descriptor(&self) -> LatticeDescriptor {
        let g1 = self.dilation.g1sq;
        let g2 = self.dilation.g2sq;
        LatticeDescriptor {
            kind: self.kind,
            m: self.m,
            g1sq: [*g1.numer(), *g1.denom()],
            g2sq: [*g2.numer(), *g2.denom()],
        }
    }

    /// SHA-256 over the descriptor JSON, hex-encoded.
    pub fn hash_hex(&self) -> String {
        let json = serde_json::to_string(&self.descriptor()).expect("descriptor serializes");
        let digest = Sha256::digest(json.as_bytes());
        digest.iter().map(|b| format!("{b:02x}")).collect()
    }

    pub fn scaled_norms(&self, ordinal: usize) -> ScaledNorms {
        scaled_norms(self.kind, self.members[ordinal], &self.dilation)
    }

    pub fn geometry(&self, ordinal: usize) -> ModeGeometrySquares {
        dilated_geometry_kind(self.kind, self.members[ordinal], &self.dilation)
            .expect("members are nonzero")
    }

    /// Dilated physical wavevector `ñ` as floats.
    pub fn wavevector(&self, ordinal: usize) -> [f64; 3] {
        let x = self.kind.physical(self.members[ordinal]);
        let (g1, g2) = self.dilation.gamma();
        [g1 * x[0], g2 * x[1], x[2]]
    }

    /// Ordinals `(k, m)` with `n = k + m` and both in the set, ascending in `k`.
    pub fn pairs_for(&self, n_ord: usize) -> impl Iterator<Item = (usize, usize)> + '_ {
        let n = self.members[n_ord];
        let r = self.m as i32;
        // k ranges over the intersection of the two cubes
        let lo = |c: i32| (-r).max(c - r);
        let hi = |c: i32| r.min(c + r);
        let (l1, h1) = (lo(n.n1), hi(n.n1));
        let (l2, h2) = (lo(n.n2), hi(n.n2));
        let (l3, h3) = (lo(n.n3), hi(n.n3));
        (l1..=h1).flat_map(move |k1| {
            (l2..=h2).flat_map(move |k2| {
                (l3..=h3).filter_map(move |k3| {
                    let k = FrequencyIndex::new(k1, k2, k3);
                    let m = n - k;
                    if k.is_zero() || m.is_zero() {
                        return None;
                    }
                    Some((self.index_of(k)?, self.index_of(m)?))
                })
            })
        })
    }

    /// All `(n, k, m)` ordinal triples with `n = k + m`, ordered by `(n, k)`.
    pub fn triads(&self) -> impl Iterator<Item = (usize, usize, usize)> + '_ {
        (0..self.len()).flat_map(move |n| self.pairs_for(n).map(move |(k, m)| (n, k, m)))
    }

    /// Number of triads, counted without enumeration.
    pub fn triad_count(&self) -> usize {
        (0..self.len()).map(|n| self.pairs_for(n).count()).sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fi(a: i32, b: i32, c: i32) -> FrequencyIndex {
        FrequencyIndex::new(a, b, c)
    }

    #[test]
    fn member_counts() {
        let s = build_truncated_set(LatticeKind::Cubic, 1, DilationFactors::periodic()).unwrap();
        assert_eq!(s.len(), 26);
        let d = DilationFactors::from_fractions(2, 1, 3, 1).unwrap();
        let s = build_truncated_set(LatticeKind::Cubic, 2, d).unwrap();
        assert_eq!(s.len(), 124);
    }

    #[test]
    fn rejects_bad_inputs() {
        assert!(build_truncated_set(LatticeKind::Cubic, 0, DilationFactors::periodic()).is_err());
        assert!(DilationFactors::from_fractions(0, 1, 1, 1).is_err());
        assert!(DilationFactors::from_fractions(-2, 1, 1, 1).is_err());
        assert!(DilationFactors::from_fractions(1, 1, 1, 0).is_err());
    }

    #[test]
    fn index_roundtrip_and_negation() {
        for kind in [LatticeKind::Cubic, LatticeKind::ObliqueB] {
            let s = build_truncated_set(kind, 3, DilationFactors::periodic()).unwrap();
            for (i, &n) in s.members().iter().enumerate() {
                assert_eq!(s.index_of(n), Some(i));
                assert_eq!(s.index_of(-n), Some(s.negated(i)));
            }
            assert!(s.members().windows(2).all(|w| w[0] < w[1]));
            assert_eq!(s.index_of(fi(0, 0, 0)), None);
            assert_eq!(s.index_of(fi(4, 0, 0)), None);
        }
    }

    #[test]
    fn geometry_examples() {
        let d = DilationFactors::from_fractions(2, 1, 3, 1).unwrap();
        let g = dilated_geometry(fi(1, 2, 3), &d).unwrap();
        assert_eq!(g.hsq.to_rational(), Some(Ratio::from_integer(14)));
        assert_eq!(g.fsq.to_rational(), Some(Ratio::from_integer(23)));

        let d = DilationFactors::from_fractions(7, 5, 11, 13).unwrap();
        let g = dilated_geometry(fi(0, 0, 1), &d).unwrap();
        assert_eq!(g.hsq.to_rational(), Some(Ratio::from_integer(0)));
        assert_eq!(g.fsq.to_rational(), Some(Ratio::from_integer(1)));

        let g = dilated_geometry(fi(1, 0, 1), &DilationFactors::periodic()).unwrap();
        assert_eq!(g.hsq.to_rational(), Some(Ratio::from_integer(1)));
        assert_eq!(g.fsq.to_rational(), Some(Ratio::from_integer(2)));
        assert!(dilated_geometry(fi(0, 0, 0), &d).is_err());
    }

    #[test]
    fn geometry_invariant_under_common_scaling() {
        let a = DilationFactors::from_fractions(2, 3, 5, 7).unwrap();
        let b = DilationFactors::from_fractions(6, 9, 20, 28).unwrap();
        for n in [fi(1, 2, 3), fi(-3, 1, 0), fi(2, -2, -1)] {
            let ga = dilated_geometry(n, &a).unwrap();
            let gb = dilated_geometry(n, &b).unwrap();
            assert_eq!(ga.hsq.to_rational(), gb.hsq.to_rational());
            assert_eq!(ga.fsq.to_rational(), gb.fsq.to_rational());
        }
    }

    #[test]
    fn oblique_norms_match_floats() {
        let d = DilationFactors::from_fractions(2, 1, 3, 5).unwrap();
        for kind in [LatticeKind::ObliqueA, LatticeKind::ObliqueB] {
            let s = build_truncated_set(kind, 2, d).unwrap();
            for i in 0..s.len() {
                let w = s.wavevector(i);
                let g = s.geometry(i);
                let h = w[0] * w[0] + w[1] * w[1];
                assert!((g.hsq.to_f64() - h).abs() < 1e-9);
                assert!((g.fsq.to_f64() - h - w[2] * w[2]).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn triads_match_brute_force() {
        for m in 1..=2u32 {
            let s =
                build_truncated_set(LatticeKind::Cubic, m, DilationFactors::periodic()).unwrap();
            let mut brute = Vec::new();
            for (ni, &n) in s.members().iter().enumerate() {
                for (ki, &k) in s.members().iter().enumerate() {
                    for (mi, &mm) in s.members().iter().enumerate() {
                        if k + mm == n {
                            brute.push((ni, ki, mi));
                        }
                    }
                }
            }
            let fast: Vec<_> = s.triads().collect();
            assert_eq!(fast, brute);
            assert_eq!(s.triad_count(), brute.len());
        }
    }

    #[test]
    fn triad_membership_examples() {
        let s = build_truncated_set(LatticeKind::Cubic, 2, DilationFactors::periodic()).unwrap();
        let n = s.index_of(fi(2, 0, 2)).unwrap();
        let k = s.index_of(fi(1, 0, 1)).unwrap();
        assert!(s.triads().any(|t| t == (n, k, k)));
        // zero never appears in any slot
        assert!(s.index_of(fi(0, 0, 0)).is_none());
        assert!(s
            .triads()
            .all(|(a, b, c)| a < s.len() && b < s.len() && c < s.len()));
    }

    #[test]
    fn descriptor_json_roundtrip() {
        let d = DilationFactors::from_fractions(2, 1, 3, 1).unwrap();
        let s = build_truncated_set(LatticeKind::ObliqueA, 2, d).unwrap();
        let json = serde_json::to_string(&s.descriptor()).unwrap();
        assert_eq!(
            json,
            r#"{"kind":"oblique_a","M":2,"g1sq":[2,1],"g2sq":[3,1]}"#
        );
        let back: LatticeDescriptor = serde_json::from_str(&json).unwrap();
        assert_eq!(back.build().unwrap().len(), s.len());
    }
}
