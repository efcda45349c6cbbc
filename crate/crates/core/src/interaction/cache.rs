//! Binary persistence of triad tables.
//!
//! Layout (little endian): magic, format version, set hash, dilation as four
//! `i64`, then per-mode `|ñ|²` and `ω_n`, the two frequency bounds and both
//! partitions. Floats are stored by bit pattern, so a reload is bit-identical.

use std::fs;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::{Path, PathBuf};

use num_complex::Complex64;
use num_rational::Ratio;

use super::{build_triad_table, Partition, TriadEntry, TriadTable};
use crate::basis::ModeBasis;
use crate::error::{Error, Result};
use crate::lattice::{DilationFactors, FrequencySet};
use crate::resonance::SigmaTriple;

const MAGIC: &[u8; 8] = b"SFTRIADS";
const VERSION: u32 = 1;

struct Out<W: Write>(W);

impl<W: Write> Out<W> {
    fn u8(&mut self, v: u8) -> Result<()> {
        Ok(self.0.write_all(&[v])?)
    }
    fn u32(&mut self, v: u32) -> Result<()> {
        Ok(self.0.write_all(&v.to_le_bytes())?)
    }
    fn u64(&mut self, v: u64) -> Result<()> {
        Ok(self.0.write_all(&v.to_le_bytes())?)
    }
    fn i64(&mut self, v: i64) -> Result<()> {
        Ok(self.0.write_all(&v.to_le_bytes())?)
    }
    fn f64(&mut self, v: f64) -> Result<()> {
        self.u64(v.to_bits())
    }
}

struct In<R: Read>(R);

impl<R: Read> In<R> {
    fn bytes<const K: usize>(&mut self) -> Result<[u8; K]> {
        let mut b = [0u8; K];
        self.0.read_exact(&mut b)?;
        Ok(b)
    }
    fn u8(&mut self) -> Result<u8> {
        Ok(self.bytes::<1>()?[0])
    }
    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.bytes()?))
    }
    fn u64(&mut self) -> Result<u64> {
        Ok(u64::from_le_bytes(self.bytes()?))
    }
    fn i64(&mut self) -> Result<i64> {
        Ok(i64::from_le_bytes(self.bytes()?))
    }
    fn f64(&mut self) -> Result<f64> {
        Ok(f64::from_bits(self.u64()?))
    }
}

fn write_partition<W: Write>(o: &mut Out<W>, p: &Partition) -> Result<()> {
    o.u64(p.offsets.len() as u64)?;
    for &x in &p.offsets {
        o.u64(x as u64)?;
    }
    o.u64(p.entries.len() as u64)?;
    for e in &p.entries {
        o.u32(e.n)?;
        o.u32(e.k)?;
        o.u32(e.m)?;
        o.u8(e.sigma.code())?;
        o.f64(e.coeff.re)?;
        o.f64(e.coeff.im)?;
        o.f64(e.omega)?;
        o.u8(e.resonant as u8)?;
    }
    Ok(())
}

fn read_partition<R: Read>(i: &mut In<R>) -> Result<Partition> {
    let no = i.u64()? as usize;
    let offsets = (0..no)
        .map(|_| i.u64().map(|x| x as usize))
        .collect::<Result<Vec<_>>>()?;
    let ne = i.u64()? as usize;
    let mut entries = Vec::with_capacity(ne);
    for _ in 0..ne {
        let (n, k, m) = (i.u32()?, i.u32()?, i.u32()?);
        let code = i.u8()?;
        if code >= 27 {
            return Err(Error::Cache(format!("invalid branch code {code}")));
        }
        let coeff = Complex64::new(i.f64()?, i.f64()?);
        let omega = i.f64()?;
        let resonant = i.u8()? != 0;
        entries.push(TriadEntry {
            n,
            k,
            m,
            sigma: SigmaTriple::from_code(code),
            coeff,
            omega,
            resonant,
        });
    }
    if offsets.last().copied() != Some(entries.len()) {
        return Err(Error::Cache(
            "partition offsets do not match entry count".into(),
        ));
    }
    Ok(Partition { entries, offsets })
}

impl TriadTable {
    pub fn save(&self, path: &Path) -> Result<()> {
        let mut o = Out(BufWriter::new(fs::File::create(path)?));
        o.0.write_all(MAGIC)?;
        o.u32(VERSION)?;
        o.u64(self.set_hash.len() as u64)?;
        o.0.write_all(self.set_hash.as_bytes())?;
        for r in [self.dilation.g1sq(), self.dilation.g2sq()] {
            o.i64(*r.numer())?;
            o.i64(*r.denom())?;
        }
        o.u64(self.ksq.len() as u64)?;
        for (&k, &w) in self.ksq.iter().zip(&self.mode_omega) {
            o.f64(k)?;
            o.f64(w)?;
        }
        o.f64(self.omega_max)?;
        o.f64(self.omega_min_nonresonant)?;
        write_partition(&mut o, &self.resonant)?;
        write_partition(&mut o, &self.nonresonant)?;
        o.0.flush()?;
        Ok(())
    }

    /// Load a cached table, verifying it belongs to `set`.
    pub fn load(path: &Path, set: &FrequencySet) -> Result<TriadTable> {
        let mut i = In(BufReader::new(fs::File::open(path)?));
        if &i.bytes::<8>()? != MAGIC {
            return Err(Error::Cache("bad magic".into()));
        }
        let v = i.u32()?;
        if v != VERSION {
            return Err(Error::Cache(format!(
                "format version {v}, expected {VERSION}"
            )));
        }
        let hl = i.u64()? as usize;
        if hl > 1024 {
            return Err(Error::Cache("corrupt header".into()));
        }
        let mut hash = vec![0u8; hl];
        i.0.read_exact(&mut hash)?;
        let set_hash = String::from_utf8(hash).map_err(|_| Error::Cache("corrupt hash".into()))?;
        if set_hash != set.hash_hex() {
            return Err(Error::Cache(
                "table belongs to a different frequency set".into(),
            ));
        }
        let (a, b, c, d) = (i.i64()?, i.i64()?, i.i64()?, i.i64()?);
        let dilation = DilationFactors::new(Ratio::new(a, b), Ratio::new(c, d))
            .map_err(|e| Error::Cache(e.to_string()))?;
        if dilation != *set.dilation() {
            return Err(Error::Cache("dilation mismatch".into()));
        }
        let len = i.u64()? as usize;
        if len != set.len() {
            return Err(Error::Cache("mode count mismatch".into()));
        }
        let mut ksq = Vec::with_capacity(len);
        let mut mode_omega = Vec::with_capacity(len);
        for _ in 0..len {
            ksq.push(i.f64()?);
            mode_omega.push(i.f64()?);
        }
        let omega_max = i.f64()?;
        let omega_min_nonresonant = i.f64()?;
        let resonant = read_partition(&mut i)?;
        let nonresonant = read_partition(&mut i)?;
        Ok(TriadTable {
            set_hash,
            dilation,
            resonant,
            nonresonant,
            ksq,
            mode_omega,
            omega_max,
            omega_min_nonresonant,
        })
    }
}

/// Cache file name for a set.
pub fn cache_path(dir: &Path, set: &FrequencySet) -> PathBuf {
    dir.join(format!("triads-{}.bin", &set.hash_hex()[..16]))
}

/// Load the table from `dir` if a valid cache exists, otherwise build and
/// store it.
pub fn load_or_build(set: &FrequencySet, basis: &ModeBasis, dir: &Path) -> Result<TriadTable> {
    let path = cache_path(dir, set);
    if path.exists() {
        if let Ok(t) = TriadTable::load(&path, set) {
            return Ok(t);
        }
    }
    let t = build_triad_table(set, basis)?;
    fs::create_dir_all(dir)?;
    t.save(&path)?;
    Ok(t)
}
