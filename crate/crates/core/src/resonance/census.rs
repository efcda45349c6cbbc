use std::io::Write;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::lattice::{FrequencyIndex, FrequencySet, LatticeKind};

/// Census of one dyadic shell.
#[derive(Clone, Debug, PartialEq)]
pub struct CensusShell {
    pub i: u32,
    pub shell_size: usize,
    /// Outer radius `2^{i+1}` exceeds the truncation radius.
    pub truncated: bool,
    pub sup_sum: f64,
    pub argmax: FrequencyIndex,
    pub implied_constant: f64,
}

impl CensusShell {
    pub fn write_csv<W: Write>(rows: &[CensusShell], mut w: W) -> std::io::Result<()> {
        writeln!(w, "i,sup_sum,implied_constant")?;
        for r in rows {
            writeln!(w, "{},{:.17e},{:.17e}", r.i, r.sup_sum, r.implied_constant)?;
        }
        Ok(())
    }
}

/// Largest number of resonant `k₃` over all `n` with `|n|_h ≠ 0` and all
/// horizontal `(k₁, k₂)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct FiberReport {
    pub max_count: usize,
    pub n: FrequencyIndex,
    pub k_h: (i32, i32),
}

fn require_periodic(set: &FrequencySet) -> Result<()> {
    if set.kind() != LatticeKind::Cubic || !set.dilation().is_periodic_unit() {
        return Err(Error::InvalidInput(
            "the census requires the periodic cubic lattice with unit dilation".into(),
        ));
    }
    Ok(())
}

/// Discriminant zero test on the periodic lattice in plain integers.
fn chi(n: FrequencyIndex, k: FrequencyIndex, m: FrequencyIndex) -> bool {
    let hf = |x: FrequencyIndex| {
        let h = (x.n1 as i128).pow(2) + (x.n2 as i128).pow(2);
        (h, h + (x.n3 as i128).pow(2))
    };
    let (hn, fn_) = hf(n);
    let (hk, fk) = hf(k);
    let (hm, fm) = hf(m);
    let a2 = hn * fk * fm;
    let b2 = fn_ * hk * fm;
    let c2 = fn_ * fk * hm;
    let s = a2 - b2 - c2;
    s * s == 4 * b2 * c2
}

/// Representatives of `n` modulo sign flips of each axis and the swap of the
/// horizontal axes, restricted to `|n|_h ≠ 0`.
fn fundamental_domain(radius: i32) -> Vec<FrequencyIndex> {
    let mut out = Vec::new();
    for n1 in 1..=radius {
        for n2 in 0..=n1 {
            for n3 in 0..=radius {
                out.push(FrequencyIndex::new(n1, n2, n3));
            }
        }
    }
    out
}

fn in_set(set: &FrequencySet, x: FrequencyIndex) -> bool {
    !x.is_zero() && x.max_norm() <= set.radius() as i32
}

/// `sup_n Σ_{k ∈ Σ_i, k+m+n=0} χ(n,k,m)/|k|` over `n` with `|n|_h ≠ 0`.
pub fn restricted_convolution_census(set: &FrequencySet, i: u32) -> Result<CensusShell> {
    require_periodic(set)?;
    if i > 30 {
        return Err(Error::InvalidInput(format!("shell index {i} too large")));
    }
    let lo = 1i64 << i;
    let hi = 1i64 << (i + 1);
    let (lo2, hi2) = (lo * lo, hi * hi);
    let shell: Vec<(FrequencyIndex, f64)> = set
        .members()
        .iter()
        .filter_map(|&k| {
            let r2 = (k.n1 as i64).pow(2) + (k.n2 as i64).pow(2) + (k.n3 as i64).pow(2);
            (lo2 <= r2 && r2 <= hi2).then(|| (k, (r2 as f64).sqrt()))
        })
        .collect();
    if shell.is_empty() {
        return Err(Error::EmptyShell(format!(
            "shell {i} ({lo} <= |k| <= {hi}) has no member within radius {}",
            set.radius()
        )));
    }
    let sums: Vec<(f64, FrequencyIndex)> = fundamental_domain(set.radius() as i32)
        .into_par_iter()
        .map(|n| {
            let mut s = 0.0;
            for &(k, norm) in &shell {
                let m = -n - k;
                if in_set(set, m) && chi(n, k, m) {
                    s += 1.0 / norm;
                }
            }
            (s, n)
        })
        .collect();
    let (sup_sum, argmax) = sums
        .into_iter()
        .fold((0.0, FrequencyIndex::new(1, 0, 0)), |acc, x| {
            if x.0 > acc.0 {
                x
            } else {
                acc
            }
        });
    Ok(CensusShell {
        i,
        shell_size: shell.len(),
        truncated: hi > set.radius() as i64,
        sup_sum,
        argmax,
        implied_constant: sup_sum / lo as f64,
    })
}

/// Largest fiber of resonant vertical frequencies `k₃` at fixed `(n, k₁, k₂)`.
pub fn max_resonant_fiber(set: &FrequencySet) -> Result<FiberReport> {
    require_periodic(set)?;
    let r = set.radius() as i32;
    let best = fundamental_domain(r)
        .into_par_iter()
        .map(|n| {
            let mut best = FiberReport {
                max_count: 0,
                n,
                k_h: (0, 0),
            };
            for k1 in -r..=r {
                for k2 in -r..=r {
                    let mut count = 0;
                    for k3 in -r..=r {
                        let k = FrequencyIndex::new(k1, k2, k3);
                        let m = -n - k;
                        if in_set(set, k) && in_set(set, m) && chi(n, k, m) {
                            count += 1;
                        }
                    }
                    if count > best.max_count {
                        best = FiberReport {
                            max_count: count,
                            n,
                            k_h: (k1, k2),
                        };
                    }
                }
            }
            best
        })
        .reduce_with(|a, b| if b.max_count > a.max_count { b } else { a });
    Ok(best.expect("fundamental domain is nonempty"))
}
