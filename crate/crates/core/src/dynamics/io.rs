//! Output of diagnostics, states and gridded fields.

use std::fs;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use serde_json::{json, Value};

use super::{Diagnostics, PhysicalFields};
use crate::error::Result;
use crate::interaction::AmplitudeState;
use crate::lattice::FrequencySet;

/// CSV with columns `t,l1,energy,l12,anisotropy`.
pub fn write_diagnostics_csv(path: &Path, rows: &[Diagnostics]) -> Result<()> {
    let mut w = BufWriter::new(fs::File::create(path)?);
    writeln!(w, "t,l1,energy,l12,anisotropy")?;
    for d in rows {
        writeln!(
            w,
            "{},{},{},{},{}",
            d.t, d.l1, d.energy, d.l12, d.anisotropy
        )?;
    }
    w.flush()?;
    Ok(())
}

/// Mode list with complex triples `[[re, im]; 3]` in branch order `−1, 0, +1`.
pub fn state_to_json(set: &FrequencySet, state: &AmplitudeState) -> Value {
    let modes: Vec<Value> = state
        .modes
        .iter()
        .enumerate()
        .map(|(i, x)| {
            json!({
                "n": set.member(i).as_array(),
                "c": x.iter().map(|z| [z.re, z.im]).collect::<Vec<_>>(),
            })
        })
        .collect();
    json!({
        "t": state.t,
        "lattice": set.descriptor(),
        "modes": modes,
    })
}

/// Writes `{stem}.bin` (little-endian `f64`, component-major, each component
/// row-major with the first axis slowest) and a `{stem}.json` sidecar.
/// Returns both paths.
pub fn write_fields_binary(
    dir: &Path,
    stem: &str,
    fields: &PhysicalFields,
) -> Result<Vec<PathBuf>> {
    let bin = dir.join(format!("{stem}.bin"));
    let side = dir.join(format!("{stem}.json"));
    let mut comps: Vec<(&str, &[f64])> = vec![
        ("u1", &fields.u[0]),
        ("u2", &fields.u[1]),
        ("u3", &fields.u[2]),
    ];
    match &fields.rho {
        Some(r) => comps.push(("rho", r)),
        None => comps.push(("v4", &fields.v4)),
    }
    let mut w = BufWriter::new(fs::File::create(&bin)?);
    for (_, c) in &comps {
        for x in c.iter() {
            w.write_all(&x.to_le_bytes())?;
        }
    }
    w.flush()?;
    let meta = json!({
        "t": fields.t,
        "dims": fields.dims,
        "cell": fields.cell,
        "components": comps.iter().map(|(n, _)| *n).collect::<Vec<_>>(),
        "dtype": "f64le",
        "layout": "component-major; each component row-major with the first axis slowest",
        "imag_residue": fields.imag_residue,
    });
    fs::write(
        &side,
        serde_json::to_string_pretty(&meta).expect("json value serializes") + "\n",
    )?;
    Ok(vec![bin, side])
}
