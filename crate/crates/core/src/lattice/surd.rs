//! Exact arithmetic in the ring ℤ[√2, √3].
//!
//! Elements are `a + b√2 + c√3 + d√6`. The basis `{1, √2, √3, √6}` is
//! linearly independent over ℚ, so equality is componentwise and zero
//! testing is exact. Signs are decided by repeated squaring inside the
//! subring ℤ[√2].

use std::cmp::Ordering;
use std::fmt;

use num_bigint::BigInt;
use num_traits::{CheckedAdd, CheckedMul, CheckedSub, One, Signed, Zero};

/// Integer-like coefficient type usable inside [`Surd`].
pub trait SurdScalar:
    Clone + Ord + Zero + One + Signed + CheckedAdd + CheckedSub + CheckedMul + fmt::Debug
{
    fn from_i64(v: i64) -> Self;
}

impl SurdScalar for i128 {
    fn from_i64(v: i64) -> Self {
        v as i128
    }
}

impl SurdScalar for BigInt {
    fn from_i64(v: i64) -> Self {
        BigInt::from(v)
    }
}

/// `c[0] + c[1]√2 + c[2]√3 + c[3]√6`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Surd<T> {
    pub c: [T; 4],
}

fn cadd<T: SurdScalar>(a: &T, b: &T) -> Option<T> {
    a.checked_add(b)
}

fn csub<T: SurdScalar>(a: &T, b: &T) -> Option<T> {
    a.checked_sub(b)
}

fn cmul<T: SurdScalar>(a: &T, b: &T) -> Option<T> {
    a.checked_mul(b)
}

fn scale<T: SurdScalar>(a: &T, k: i64) -> Option<T> {
    a.checked_mul(&T::from_i64(k))
}

impl<T: SurdScalar> Surd<T> {
    pub fn zero() -> Self {
        Surd {
            c: [T::zero(), T::zero(), T::zero(), T::zero()],
        }
    }

    pub fn from_int(v: T) -> Self {
        Surd {
            c: [v, T::zero(), T::zero(), T::zero()],
        }
    }

    pub fn new(a: T, b: T, c: T, d: T) -> Self {
        Surd { c: [a, b, c, d] }
    }

    pub fn is_zero(&self) -> bool {
        self.c.iter().all(|x| x.is_zero())
    }

    /// True when the element lies in ℤ (no surd parts).
    pub fn is_rational(&self) -> bool {
        self.c[1..].iter().all(|x| x.is_zero())
    }

    pub fn checked_add(&self, o: &Self) -> Option<Self> {
        Some(Surd {
            c: [
                cadd(&self.c[0], &o.c[0])?,
                cadd(&self.c[1], &o.c[1])?,
                cadd(&self.c[2], &o.c[2])?,
                cadd(&self.c[3], &o.c[3])?,
            ],
        })
    }

    pub fn checked_sub(&self, o: &Self) -> Option<Self> {
        Some(Surd {
            c: [
                csub(&self.c[0], &o.c[0])?,
                csub(&self.c[1], &o.c[1])?,
                csub(&self.c[2], &o.c[2])?,
                csub(&self.c[3], &o.c[3])?,
            ],
        })
    }

    pub fn checked_scale(&self, k: &T) -> Option<Self> {
        Some(Surd {
            c: [
                cmul(&self.c[0], k)?,
                cmul(&self.c[1], k)?,
                cmul(&self.c[2], k)?,
                cmul(&self.c[3], k)?,
            ],
        })
    }

    pub fn checked_mul(&self, o: &Self) -> Option<Self> {
        let [a1, b1, c1, d1] = &self.c;
        let [a2, b2, c2, d2] = &o.c;
        // (√2)² = 2, (√3)² = 3, (√6)² = 6, √2√3 = √6, √2√6 = 2√3, √3√6 = 3√2
        let sum = |terms: &[(i64, &T, &T)]| -> Option<T> {
            let mut acc = T::zero();
            for (k, x, y) in terms {
                acc = cadd(&acc, &scale(&cmul(*x, *y)?, *k)?)?;
            }
            Some(acc)
        };
        Some(Surd {
            c: [
                sum(&[(1, a1, a2), (2, b1, b2), (3, c1, c2), (6, d1, d2)])?,
                sum(&[(1, a1, b2), (1, b1, a2), (3, c1, d2), (3, d1, c2)])?,
                sum(&[(1, a1, c2), (1, c1, a2), (2, b1, d2), (2, d1, b2)])?,
                sum(&[(1, a1, d2), (1, d1, a2), (1, b1, c2), (1, c1, b2)])?,
            ],
        })
    }

    /// Exact sign of the real number represented.
    pub fn signum(&self) -> Option<Ordering> {
        let u = (self.c[0].clone(), self.c[1].clone());
        let v = (self.c[2].clone(), self.c[3].clone());
        let su = sign_q2(&u)?;
        let sv = sign_q2(&v)?;
        if sv == Ordering::Equal || su == sv {
            return Some(if su == Ordering::Equal { sv } else { su });
        }
        if su == Ordering::Equal {
            return Some(sv);
        }
        // u + √3 v with opposite signs: compare u² against 3v² in ℤ[√2]
        let u2 = mul_q2(&u, &u)?;
        let v2 = mul_q2(&v, &v)?;
        let diff = (
            csub(&u2.0, &scale(&v2.0, 3)?)?,
            csub(&u2.1, &scale(&v2.1, 3)?)?,
        );
        match sign_q2(&diff)? {
            Ordering::Greater => Some(su),
            Ordering::Less => Some(sv),
            // u² = 3v² forces u = v = 0 since √3 ∉ ℚ(√2)
            Ordering::Equal => Some(Ordering::Equal),
        }
    }

    pub fn to_f64(&self) -> f64
    where
        T: ToF64,
    {
        let s2 = std::f64::consts::SQRT_2;
        let s3 = 3f64.sqrt();
        let s6 = 6f64.sqrt();
        self.c[0].to_f64_lossy()
            + self.c[1].to_f64_lossy() * s2
            + self.c[2].to_f64_lossy() * s3
            + self.c[3].to_f64_lossy() * s6
    }
}

pub trait ToF64 {
    fn to_f64_lossy(&self) -> f64;
}

impl ToF64 for i128 {
    fn to_f64_lossy(&self) -> f64 {
        *self as f64
    }
}

impl ToF64 for BigInt {
    fn to_f64_lossy(&self) -> f64 {
        num_traits::ToPrimitive::to_f64(self).unwrap_or(f64::NAN)
    }
}

fn mul_q2<T: SurdScalar>(x: &(T, T), y: &(T, T)) -> Option<(T, T)> {
    let a = cadd(&cmul(&x.0, &y.0)?, &scale(&cmul(&x.1, &y.1)?, 2)?)?;
    let b = cadd(&cmul(&x.0, &y.1)?, &cmul(&x.1, &y.0)?)?;
    Some((a, b))
}

fn sign_of<T: SurdScalar>(x: &T) -> Ordering {
    if x.is_zero() {
        Ordering::Equal
    } else if x.is_positive() {
        Ordering::Greater
    } else {
        Ordering::Less
    }
}

/// Sign of `p + q√2`.
fn sign_q2<T: SurdScalar>(x: &(T, T)) -> Option<Ordering> {
    let sp = sign_of(&x.0);
    let sq = sign_of(&x.1);
    if sq == Ordering::Equal || sp == sq {
        return Some(if sp == Ordering::Equal { sq } else { sp });
    }
    if sp == Ordering::Equal {
        return Some(sq);
    }
    let p2 = cmul(&x.0, &x.0)?;
    let q2 = scale(&cmul(&x.1, &x.1)?, 2)?;
    Some(match p2.cmp(&q2) {
        Ordering::Greater => sp,
        Ordering::Less => sq,
        Ordering::Equal => Ordering::Equal,
    })
}

impl Surd<i128> {
    pub fn to_big(&self) -> Surd<BigInt> {
        Surd {
            c: [
                BigInt::from(self.c[0]),
                BigInt::from(self.c[1]),
                BigInt::from(self.c[2]),
                BigInt::from(self.c[3]),
            ],
        }
    }
}

impl<T: SurdScalar + fmt::Display> fmt::Display for Surd<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_rational() {
            return write!(f, "{}", self.c[0]);
        }
        write!(
            f,
            "{}+{}r2+{}r3+{}r6",
            self.c[0], self.c[1], self.c[2], self.c[3]
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn s(a: i128, b: i128, c: i128, d: i128) -> Surd<i128> {
        Surd::new(a, b, c, d)
    }

    #[test]
    fn product_matches_float() {
        let x = s(3, -2, 1, 5);
        let y = s(-1, 4, 2, -3);
        let p = x.checked_mul(&y).unwrap();
        assert!((p.to_f64() - x.to_f64() * y.to_f64()).abs() < 1e-9);
    }

    #[test]
    fn sign_of_near_cancellation() {
        // 99 - 70√2 ≈ 0.00505 > 0 ; 70√2 - 99 < 0
        assert_eq!(s(99, -70, 0, 0).signum(), Some(Ordering::Greater));
        assert_eq!(s(-99, 70, 0, 0).signum(), Some(Ordering::Less));
        // √3 - √2 - 0.3... : 5√3 - 6√2 ≈ 0.1753 > 0
        assert_eq!(s(0, -6, 5, 0).signum(), Some(Ordering::Greater));
        assert_eq!(s(0, 0, 0, 0).signum(), Some(Ordering::Equal));
        // 2√6 - 4.898979... : 2√6 - 5 < 0
        assert_eq!(s(-5, 0, 0, 2).signum(), Some(Ordering::Less));
    }

    #[test]
    fn overflow_reported() {
        let big = s(i128::MAX / 2, 0, 0, 0);
        assert!(big.checked_mul(&big).is_none());
        let bb = big.to_big().checked_mul(&big.to_big()).unwrap();
        assert!(!bb.is_zero());
    }

    proptest::proptest! {
        #[test]
        fn sign_agrees_with_float(a in -500i128..500, b in -500i128..500, c in -500i128..500, d in -500i128..500) {
            let x = s(a, b, c, d);
            let f = x.to_f64();
            let sg = x.signum().unwrap();
            if f > 1e-6 { proptest::prop_assert_eq!(sg, Ordering::Greater); }
            if f < -1e-6 { proptest::prop_assert_eq!(sg, Ordering::Less); }
            if sg == Ordering::Equal { proptest::prop_assert!(x.is_zero()); }
        }
    }
}
