//! On-disk bundle layout (all integers little-endian):
//!
//! ```text
//! <dir>/manifest.json   users, item keys, provenance, stats, file names
//! <dir>/source.rows     "XDR1" u32 n_rows, per row: u32 len, len × (u32 item, i64 ts)
//! <dir>/target.rows     same layout; ts = i64::MIN means "absent"
//! <dir>/aux.f64         optional: "XDA1" u32 rows, u32 dim, rows·dim f64 row-major
//! <dir>/split.json      optional leave-one-out split
//! ```

use std::fs;
use std::path::Path;

use ndarray::Array2;
use serde::{Deserialize, Serialize};

use super::aux::AuxMatrix;
use super::domains::{BundleStats, DatasetBundle, DomainMatrix, DomainTag, Provenance};
use super::splits::LeaveOneOutSplit;
use crate::error::read_file;
use crate::{Error, Result};

pub const BUNDLE_MANIFEST: &str = "manifest.json";
const FORMAT: &str = "xdvae-bundle";
const VERSION: u32 = 1;
const ROWS_MAGIC: &[u8; 4] = b"XDR1";
const AUX_MAGIC: &[u8; 4] = b"XDA1";
const NO_TIMESTAMP: i64 = i64::MIN;

#[derive(Debug, Serialize, Deserialize)]
struct Manifest {
    format: String,
    version: u32,
    users: Vec<String>,
    source_items: Vec<String>,
    target_items: Vec<String>,
    provenance: Provenance,
    stats: BundleStats,
    source_rows: String,
    target_rows: String,
    aux: Option<String>,
    #[serde(default)]
    aux_missing: Vec<String>,
    split: Option<String>,
}

fn encode_rows(m: &DomainMatrix) -> Vec<u8> {
    let mut out = Vec::with_capacity(8 + m.num_positives() * 12 + m.n_users() * 4);
    out.extend_from_slice(ROWS_MAGIC);
    out.extend_from_slice(&(m.rows.len() as u32).to_le_bytes());
    for (row, ts) in m.rows.iter().zip(&m.timestamps) {
        out.extend_from_slice(&(row.len() as u32).to_le_bytes());
        for (&item, &t) in row.iter().zip(ts) {
            out.extend_from_slice(&item.to_le_bytes());
            out.extend_from_slice(&t.unwrap_or(NO_TIMESTAMP).to_le_bytes());
        }
    }
    out
}

struct Cursor<'a> {
    bytes: &'a [u8],
    pos: usize,
    what: &'a str,
}

impl<'a> Cursor<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        let end = self.pos + n;
        let slice = self
            .bytes
            .get(self.pos..end)
            .ok_or_else(|| Error::BundleFormat(format!("{} is truncated", self.what)))?;
        self.pos = end;
        Ok(slice)
    }

    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }

    fn i64(&mut self) -> Result<i64> {
        Ok(i64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }

    fn f64(&mut self) -> Result<f64> {
        Ok(f64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }

    fn magic(&mut self, expected: &[u8; 4]) -> Result<()> {
        if self.take(4)? != expected {
            return Err(Error::BundleFormat(format!("{} has a bad magic number", self.what)));
        }
        Ok(())
    }

    fn finish(&self) -> Result<()> {
        if self.pos != self.bytes.len() {
            return Err(Error::BundleFormat(format!("{} has trailing bytes", self.what)));
        }
        Ok(())
    }
}

type Rows = (Vec<Vec<u32>>, Vec<Vec<Option<i64>>>);

fn decode_rows(bytes: &[u8], what: &str) -> Result<Rows> {
    let mut c = Cursor { bytes, pos: 0, what };
    c.magic(ROWS_MAGIC)?;
    let n = c.u32()? as usize;
    let mut rows = Vec::with_capacity(n);
    let mut stamps = Vec::with_capacity(n);
    for _ in 0..n {
        let len = c.u32()? as usize;
        let mut row = Vec::with_capacity(len);
        let mut ts = Vec::with_capacity(len);
        for _ in 0..len {
            row.push(c.u32()?);
            let t = c.i64()?;
            ts.push((t != NO_TIMESTAMP).then_some(t));
        }
        rows.push(row);
        stamps.push(ts);
    }
    c.finish()?;
    Ok((rows, stamps))
}

fn encode_aux(aux: &AuxMatrix) -> Vec<u8> {
    let mut out = Vec::with_capacity(12 + aux.values.len() * 8);
    out.extend_from_slice(AUX_MAGIC);
    out.extend_from_slice(&(aux.values.nrows() as u32).to_le_bytes());
    out.extend_from_slice(&(aux.values.ncols() as u32).to_le_bytes());
    for &x in aux.values.iter() {
        out.extend_from_slice(&x.to_le_bytes());
    }
    out
}

fn decode_aux(bytes: &[u8]) -> Result<Array2<f64>> {
    let mut c = Cursor { bytes, pos: 0, what: "aux.f64" };
    c.magic(AUX_MAGIC)?;
    let rows = c.u32()? as usize;
    let dim = c.u32()? as usize;
    let mut data = Vec::with_capacity(rows * dim);
    for _ in 0..rows * dim {
        data.push(c.f64()?);
    }
    c.finish()?;
    Array2::from_shape_vec((rows, dim), data).map_err(|e| Error::BundleFormat(e.to_string()))
}

/// Writes the bundle (and optionally its split) into `dir`, creating it.
pub fn save_bundle(
    dir: impl AsRef<Path>,
    bundle: &DatasetBundle,
    split: Option<&LeaveOneOutSplit>,
) -> Result<()> {
    let dir = dir.as_ref();
    bundle.validate()?;
    fs::create_dir_all(dir)?;
    fs::write(dir.join("source.rows"), encode_rows(&bundle.source))?;
    fs::write(dir.join("target.rows"), encode_rows(&bundle.target))?;
    if let Some(aux) = &bundle.aux {
        fs::write(dir.join("aux.f64"), encode_aux(aux))?;
    }
    if let Some(split) = split {
        fs::write(dir.join("split.json"), serde_json::to_vec_pretty(split)?)?;
    }
    let manifest = Manifest {
        format: FORMAT.into(),
        version: VERSION,
        users: bundle.source.user_index.clone(),
        source_items: bundle.source.item_index.clone(),
        target_items: bundle.target.item_index.clone(),
        provenance: bundle.provenance.clone(),
        stats: bundle.stats(),
        source_rows: "source.rows".into(),
        target_rows: "target.rows".into(),
        aux: bundle.aux.as_ref().map(|_| "aux.f64".into()),
        aux_missing: bundle.aux.as_ref().map(|a| a.missing.clone()).unwrap_or_default(),
        split: split.map(|_| "split.json".into()),
    };
    fs::write(dir.join(BUNDLE_MANIFEST), serde_json::to_vec_pretty(&manifest)?)?;
    Ok(())
}

/// Reads a bundle written by [`save_bundle`].
pub fn load_bundle(dir: impl AsRef<Path>) -> Result<(DatasetBundle, Option<LeaveOneOutSplit>)> {
    let dir = dir.as_ref();
    let manifest: Manifest = serde_json::from_slice(&read_file(dir.join(BUNDLE_MANIFEST))?)?;
    if manifest.format != FORMAT || manifest.version != VERSION {
        return Err(Error::BundleFormat(format!(
            "unsupported bundle format {} v{}",
            manifest.format, manifest.version
        )));
    }
    let (s_rows, s_ts) = decode_rows(&read_file(dir.join(&manifest.source_rows))?, "source.rows")?;
    let (t_rows, t_ts) = decode_rows(&read_file(dir.join(&manifest.target_rows))?, "target.rows")?;
    let aux = match &manifest.aux {
        Some(name) => Some(AuxMatrix {
            values: decode_aux(&read_file(dir.join(name))?)?,
            missing: manifest.aux_missing.clone(),
        }),
        None => None,
    };
    let bundle = DatasetBundle {
        source: DomainMatrix {
            domain: DomainTag::Source,
            user_index: manifest.users.clone(),
            item_index: manifest.source_items,
            rows: s_rows,
            timestamps: s_ts,
        },
        target: DomainMatrix {
            domain: DomainTag::Target,
            user_index: manifest.users,
            item_index: manifest.target_items,
            rows: t_rows,
            timestamps: t_ts,
        },
        aux,
        provenance: manifest.provenance,
    };
    bundle.validate()?;
    let split = match &manifest.split {
        Some(name) => {
            let split: LeaveOneOutSplit = serde_json::from_slice(&read_file(dir.join(name))?)?;
            if split.users.len() != bundle.m() {
                return Err(Error::BundleFormat("split does not cover every user".into()));
            }
            Some(split)
        }
        None => None,
    };
    Ok((bundle, split))
}
