//! Field files.
//!
//! Binary layout: the 8-byte magic `PSFIELD1`, a little-endian `u32` header
//! length, a JSON header, then the samples as interleaved little-endian
//! `f64` `(re, im)` pairs in row-major order.
//!
//! CSV layout: a `# {header json}` comment line, a column line
//! `i0,…,i{2n-1},re,im`, then one row per sample in row-major order.

use std::fs;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::grid::{for_each_multi, AxisSpec, Field, PhaseSpaceGrid};
use crate::json::format_f64;

pub const MAGIC: &[u8; 8] = b"PSFIELD1";
const ENCODING: &str = "f64le_interleaved_re_im";
const ORDER: &str = "row_major";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FieldFormat {
    Binary,
    Csv,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FieldHeader {
    pub dim_n: usize,
    /// `x_1..x_n` then `p_1..p_n`.
    pub axes: Vec<AxisSpec>,
    pub hbar: f64,
    pub label: String,
    pub encoding: String,
    pub order: String,
}

impl FieldHeader {
    pub fn of(field: &Field) -> Self {
        let g = field.grid();
        FieldHeader {
            dim_n: g.dim_n,
            axes: g.axes(),
            hbar: g.hbar,
            label: field.label().to_string(),
            encoding: ENCODING.into(),
            order: ORDER.into(),
        }
    }

    pub fn grid(&self) -> Result<PhaseSpaceGrid> {
        if self.encoding != ENCODING || self.order != ORDER {
            return Err(Error::Format(format!(
                "unsupported encoding {:?} / order {:?}",
                self.encoding, self.order
            )));
        }
        if self.axes.len() != 2 * self.dim_n {
            return Err(Error::Format(format!(
                "header lists {} axes for dim_n = {}",
                self.axes.len(),
                self.dim_n
            )));
        }
        let (x, p) = self.axes.split_at(self.dim_n);
        PhaseSpaceGrid::new(x.to_vec(), p.to_vec(), self.hbar)
    }
}

pub fn to_binary(field: &Field) -> Result<Vec<u8>> {
    let header = serde_json::to_vec(&FieldHeader::of(field))?;
    let mut out = Vec::with_capacity(12 + header.len() + 16 * field.values().len());
    out.extend_from_slice(MAGIC);
    let len = u32::try_from(header.len()).map_err(|_| Error::Format("header too long".into()))?;
    out.extend_from_slice(&len.to_le_bytes());
    out.extend_from_slice(&header);
    for v in field.values() {
        out.extend_from_slice(&v.re.to_le_bytes());
        out.extend_from_slice(&v.im.to_le_bytes());
    }
    Ok(out)
}

pub fn from_binary(bytes: &[u8]) -> Result<Field> {
    if bytes.len() < 12 || &bytes[..8] != MAGIC {
        return Err(Error::Format("missing PSFIELD1 magic".into()));
    }
    let len = u32::from_le_bytes(bytes[8..12].try_into().expect("4 bytes")) as usize;
    let body = bytes.get(12..12 + len).ok_or_else(|| Error::Format("truncated header".into()))?;
    let header: FieldHeader = serde_json::from_slice(body)?;
    let grid = header.grid()?;
    let data = &bytes[12 + len..];
    if data.len() != 16 * grid.len() {
        return Err(Error::Format(format!(
            "expected {} bytes of samples, found {}",
            16 * grid.len(),
            data.len()
        )));
    }
    let values = data
        .chunks_exact(16)
        .map(|c| {
            Complex64::new(
                f64::from_le_bytes(c[..8].try_into().expect("8 bytes")),
                f64::from_le_bytes(c[8..].try_into().expect("8 bytes")),
            )
        })
        .collect();
    Field::new(grid, values, header.label)
}

pub fn to_csv(field: &Field) -> Result<String> {
    let header = serde_json::to_string(&FieldHeader::of(field))?;
    let shape = field.grid().shape();
    let mut out = String::with_capacity(64 * field.values().len());
    out.push_str("# ");
    out.push_str(&header);
    out.push('\n');
    for a in 0..shape.len() {
        out.push_str(&format!("i{a},"));
    }
    out.push_str("re,im\n");
    for_each_multi(&shape, |flat, idx| {
        for i in idx {
            out.push_str(&i.to_string());
            out.push(',');
        }
        let v = field.values()[flat];
        out.push_str(&format_f64(v.re));
        out.push(',');
        out.push_str(&format_f64(v.im));
        out.push('\n');
    });
    Ok(out)
}

pub fn from_csv<R: BufRead>(reader: R) -> Result<Field> {
    let mut lines = reader.lines();
    let first = lines.next().ok_or_else(|| Error::Format("empty CSV".into()))??;
    let json = first.strip_prefix('#').ok_or_else(|| Error::Format("missing '# {header}' line".into()))?;
    let header: FieldHeader = serde_json::from_str(json.trim())?;
    let grid = header.grid()?;
    let shape = grid.shape();
    let strides = crate::grid::strides(&shape);
    let _columns = lines.next().ok_or_else(|| Error::Format("missing column line".into()))??;
    let mut values = vec![Complex64::new(0.0, 0.0); grid.len()];
    let mut seen = vec![false; grid.len()];
    for (row, line) in lines.enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let cols: Vec<&str> = line.split(',').map(str::trim).collect();
        if cols.len() != shape.len() + 2 {
            return Err(Error::Format(format!("row {row}: expected {} columns", shape.len() + 2)));
        }
        let mut flat = 0;
        for (a, c) in cols[..shape.len()].iter().enumerate() {
            let i: usize = c.parse().map_err(|_| Error::Format(format!("row {row}: bad index {c:?}")))?;
            if i >= shape[a] {
                return Err(Error::Format(format!("row {row}: index {i} out of range")));
            }
            flat += i * strides[a];
        }
        let parse = |s: &str| -> Result<f64> {
            if s == "null" {
                return Ok(f64::NAN);
            }
            s.parse().map_err(|_| Error::Format(format!("row {row}: bad number {s:?}")))
        };
        values[flat] = Complex64::new(parse(cols[shape.len()])?, parse(cols[shape.len() + 1])?);
        seen[flat] = true;
    }
    if let Some(missing) = seen.iter().position(|s| !s) {
        return Err(Error::Format(format!("sample {missing} missing from CSV")));
    }
    Field::new(grid, values, header.label)
}

pub fn write_field(path: &Path, field: &Field, format: FieldFormat) -> Result<()> {
    let mut file = fs::File::create(path)?;
    match format {
        FieldFormat::Binary => file.write_all(&to_binary(field)?)?,
        FieldFormat::Csv => file.write_all(to_csv(field)?.as_bytes())?,
    }
    Ok(())
}

/// Reads either format, recognizing the binary one by its magic.
pub fn read_field(path: &Path) -> Result<Field> {
    let bytes = fs::read(path)?;
    if bytes.starts_with(MAGIC) {
        from_binary(&bytes)
    } else {
        from_csv(BufReader::new(bytes.as_slice()))
    }
}

/// SHA-256 over the header and raw sample bytes, hex encoded.
pub fn field_digest(field: &Field) -> String {
    let mut h = Sha256::new();
    let g = field.grid();
    h.update(g.dim_n.to_le_bytes());
    for a in g.axes() {
        h.update(a.points.to_le_bytes());
        h.update(a.half_extent.to_le_bytes());
    }
    h.update(g.hbar.to_le_bytes());
    for v in field.values() {
        h.update(v.re.to_le_bytes());
        h.update(v.im.to_le_bytes());
    }
    hex::encode(h.finalize())
}

/// SHA-256 of arbitrary floats, for certificates computed from reports.
pub fn floats_digest(values: &[f64]) -> String {
    let mut h = Sha256::new();
    for v in values {
        h.update(v.to_le_bytes());
    }
    hex::encode(h.finalize())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> Field {
        let grid = PhaseSpaceGrid::new(
            vec![AxisSpec::new(4, 1.5).unwrap()],
            vec![AxisSpec::new(8, 2.0).unwrap()],
            0.5,
        )
        .unwrap();
        Field::from_fn(grid, "sample", |z| Complex64::new(z[0] * 0.1 + z[1], -z[0] / 3.0)).unwrap()
    }

    #[test]
    fn binary_round_trip() {
        let f = sample();
        let g = from_binary(&to_binary(&f).unwrap()).unwrap();
        assert_eq!(f, g);
        assert!(from_binary(b"NOTMAGIC0000").is_err());
        let mut truncated = to_binary(&f).unwrap();
        truncated.pop();
        assert!(from_binary(&truncated).is_err());
    }

    #[test]
    fn csv_round_trip() {
        let f = sample();
        let text = to_csv(&f).unwrap();
        assert!(text.starts_with("# {"));
        assert!(text.lines().nth(1).unwrap() == "i0,i1,re,im");
        let g = from_csv(BufReader::new(text.as_bytes())).unwrap();
        assert_eq!(f, g);
    }

    #[test]
    fn files_and_digest() {
        let dir = tempfile::tempdir().unwrap();
        let f = sample();
        for (name, fmt) in [("a.psf", FieldFormat::Binary), ("a.csv", FieldFormat::Csv)] {
            let p = dir.path().join(name);
            write_field(&p, &f, fmt).unwrap();
            let g = read_field(&p).unwrap();
            assert_eq!(field_digest(&f), field_digest(&g));
        }
        let other = f.scaled(Complex64::new(2.0, 0.0));
        assert_ne!(field_digest(&f), field_digest(&other));
        assert_eq!(field_digest(&f).len(), 64);
    }
}
