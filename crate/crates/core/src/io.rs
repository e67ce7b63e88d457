//! Binary profile/field files, snapshot indices and CSV tables.
//!
//! Profile files (`NLSP`, version 1, little-endian): magic, u32 version, u8 kind,
//! u8 d, f64 ω, f64 origin, f64 spacing, u64 count, then `count` f64 samples, or
//! `count` (re, im) pairs for the complex Gross–Pitaevskii kink. Kind codes are
//! 0 ground state, 1 real kink, 2 complex kink; bit 7 marks radial sampling.
//!
//! Field files (`NLSF`, version 1): magic, u32 version, u8 d, per axis u64 N and
//! f64 L, f64 time, then interleaved (re, im) f64 in row-major order.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::{Path, PathBuf};

use byteorder::{LittleEndian, ReadBytesExt, WriteBytesExt};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{NlsError, Result};
use crate::grid::{Field, Grid};
use crate::profiles::{Geometry, Profile, ProfileKind};

pub const PROFILE_MAGIC: &[u8; 4] = b"NLSP";
pub const FIELD_MAGIC: &[u8; 4] = b"NLSF";
pub const FORMAT_VERSION: u32 = 1;

const KIND_GROUND: u8 = 0;
const KIND_KINK: u8 = 1;
const KIND_COMPLEX_KINK: u8 = 2;
const RADIAL_BIT: u8 = 0x80;

fn check_header(r: &mut impl Read, magic: &[u8; 4]) -> Result<()> {
    let mut m = [0u8; 4];
    r.read_exact(&mut m)?;
    if &m != magic {
        return Err(NlsError::Format(format!(
            "bad magic {:?}, expected {:?}",
            String::from_utf8_lossy(&m),
            String::from_utf8_lossy(magic)
        )));
    }
    let version = r.read_u32::<LittleEndian>()?;
    if version != FORMAT_VERSION {
        return Err(NlsError::Format(format!("unsupported version {version}")));
    }
    Ok(())
}

pub fn write_profile(w: &mut impl Write, p: &Profile) -> Result<()> {
    let (origin, spacing, radial) = match p.geometry() {
        Geometry::Line { origin, spacing } => (origin, spacing, 0),
        Geometry::Radial { spacing } => (0.0, spacing, RADIAL_BIT),
    };
    let kind = match (p.kind(), p.is_complex()) {
        (_, true) => KIND_COMPLEX_KINK,
        (ProfileKind::Kink, false) => KIND_KINK,
        (ProfileKind::GroundState, false) => KIND_GROUND,
    };
    w.write_all(PROFILE_MAGIC)?;
    w.write_u32::<LittleEndian>(FORMAT_VERSION)?;
    w.write_u8(kind | radial)?;
    w.write_u8(p.dim() as u8)?;
    w.write_f64::<LittleEndian>(p.omega())?;
    w.write_f64::<LittleEndian>(origin)?;
    w.write_f64::<LittleEndian>(spacing)?;
    match p.complex_values() {
        Some(values) => {
            w.write_u64::<LittleEndian>(values.len() as u64)?;
            for z in values {
                w.write_f64::<LittleEndian>(z.re)?;
                w.write_f64::<LittleEndian>(z.im)?;
            }
        }
        None => {
            w.write_u64::<LittleEndian>(p.values().len() as u64)?;
            for &v in p.values() {
                w.write_f64::<LittleEndian>(v)?;
            }
        }
    }
    Ok(())
}

pub fn read_profile(r: &mut impl Read) -> Result<Profile> {
    check_header(r, PROFILE_MAGIC)?;
    let code = r.read_u8()?;
    let dim = r.read_u8()? as usize;
    let omega = r.read_f64::<LittleEndian>()?;
    let origin = r.read_f64::<LittleEndian>()?;
    let spacing = r.read_f64::<LittleEndian>()?;
    let count = r.read_u64::<LittleEndian>()? as usize;
    if dim == 0 || !(spacing > 0.0) || count > (1 << 32) {
        return Err(NlsError::Format(format!("bad profile header (d={dim}, spacing={spacing}, count={count})")));
    }
    let geometry = if code & RADIAL_BIT != 0 {
        Geometry::Radial { spacing }
    } else {
        Geometry::Line { origin, spacing }
    };
    match code & !RADIAL_BIT {
        KIND_COMPLEX_KINK => {
            let mut values = Vec::with_capacity(count);
            for _ in 0..count {
                let re = r.read_f64::<LittleEndian>()?;
                let im = r.read_f64::<LittleEndian>()?;
                values.push(Complex64::new(re, im));
            }
            // the imaginary part is the constant c/√2
            let c = values.iter().map(|z| z.im).sum::<f64>() / count.max(1) as f64 * 2f64.sqrt();
            Profile::gp_from_samples(c, geometry, values)
        }
        kind @ (KIND_GROUND | KIND_KINK) => {
            let mut values = vec![0.0; count];
            r.read_f64_into::<LittleEndian>(&mut values)?;
            let kind = if kind == KIND_KINK { ProfileKind::Kink } else { ProfileKind::GroundState };
            Profile::from_samples(kind, omega, dim, geometry, values)
        }
        other => Err(NlsError::Format(format!("unknown profile kind code {other}"))),
    }
}

pub fn save_profile(path: &Path, p: &Profile) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    write_profile(&mut w, p)?;
    w.flush()?;
    Ok(())
}

pub fn load_profile(path: &Path) -> Result<Profile> {
    read_profile(&mut BufReader::new(File::open(path)?))
}

pub fn write_field(w: &mut impl Write, f: &Field) -> Result<()> {
    w.write_all(FIELD_MAGIC)?;
    w.write_u32::<LittleEndian>(FORMAT_VERSION)?;
    w.write_u8(f.grid.dim() as u8)?;
    for (&n, &l) in f.grid.counts().iter().zip(f.grid.lengths()) {
        w.write_u64::<LittleEndian>(n as u64)?;
        w.write_f64::<LittleEndian>(l)?;
    }
    w.write_f64::<LittleEndian>(f.time)?;
    for z in &f.values {
        w.write_f64::<LittleEndian>(z.re)?;
        w.write_f64::<LittleEndian>(z.im)?;
    }
    Ok(())
}

pub fn read_field(r: &mut impl Read) -> Result<Field> {
    check_header(r, FIELD_MAGIC)?;
    let d = r.read_u8()? as usize;
    if !(1..=2).contains(&d) {
        return Err(NlsError::Format(format!("field dimension {d} not supported")));
    }
    let mut counts = Vec::with_capacity(d);
    let mut lengths = Vec::with_capacity(d);
    for _ in 0..d {
        counts.push(r.read_u64::<LittleEndian>()? as usize);
        lengths.push(r.read_f64::<LittleEndian>()?);
    }
    let grid = Grid::new(lengths, counts).map_err(|e| NlsError::Format(e.to_string()))?;
    let time = r.read_f64::<LittleEndian>()?;
    let mut raw = vec![0.0; 2 * grid.len()];
    r.read_f64_into::<LittleEndian>(&mut raw)?;
    let values = raw.chunks_exact(2).map(|c| Complex64::new(c[0], c[1])).collect();
    Field::new(grid, values, time)
}

pub fn save_field(path: &Path, f: &Field) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    write_field(&mut w, f)?;
    w.flush()?;
    Ok(())
}

pub fn load_field(path: &Path) -> Result<Field> {
    read_field(&mut BufReader::new(File::open(path)?))
}

/// One entry of a trajectory index; `file` is relative to the index.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SnapshotEntry {
    pub file: String,
    pub time: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SnapshotIndex {
    pub snapshots: Vec<SnapshotEntry>,
}

/// Writes `snap_00000.nlsf, …` plus `index.json` into `dir`; returns the index path.
pub fn save_snapshots(dir: &Path, snapshots: &[Field]) -> Result<PathBuf> {
    std::fs::create_dir_all(dir)?;
    let mut index = SnapshotIndex { snapshots: Vec::with_capacity(snapshots.len()) };
    for (i, f) in snapshots.iter().enumerate() {
        let file = format!("snap_{i:05}.nlsf");
        save_field(&dir.join(&file), f)?;
        index.snapshots.push(SnapshotEntry { file, time: f.time });
    }
    let path = dir.join("index.json");
    std::fs::write(&path, serde_json::to_string_pretty(&index).map_err(|e| NlsError::Format(e.to_string()))?)?;
    Ok(path)
}

pub fn load_snapshots(index_path: &Path) -> Result<Vec<Field>> {
    let text = std::fs::read_to_string(index_path)?;
    let index: SnapshotIndex = serde_json::from_str(&text).map_err(|e| NlsError::Format(e.to_string()))?;
    let dir = index_path.parent().unwrap_or(Path::new("."));
    index.snapshots.iter().map(|e| load_field(&dir.join(&e.file))).collect()
}

/// Number formatting of every CSV cell: 17 significant digits.
pub fn format_number(x: f64) -> String {
    format!("{x:.16e}")
}

/// Column-oriented numeric table.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl Table {
    pub fn new<S: Into<String>>(header: impl IntoIterator<Item = S>) -> Self {
        Self {
            header: header.into_iter().map(Into::into).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<f64>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn write(&self, w: impl Write) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        let csv_err = |e: csv::Error| NlsError::Format(e.to_string());
        out.write_record(&self.header).map_err(csv_err)?;
        for row in &self.rows {
            out.write_record(row.iter().map(|&x| format_number(x))).map_err(csv_err)?;
        }
        out.flush()?;
        Ok(())
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        self.write(BufWriter::new(File::create(path)?))
    }

    pub fn read(r: impl Read) -> Result<Self> {
        let mut rd = csv::Reader::from_reader(r);
        let csv_err = |e: csv::Error| NlsError::Format(e.to_string());
        let header = rd.headers().map_err(csv_err)?.iter().map(String::from).collect();
        let mut rows = Vec::new();
        for rec in rd.records() {
            let rec = rec.map_err(csv_err)?;
            let row = rec
                .iter()
                .map(|s| s.parse::<f64>().map_err(|e| NlsError::Format(format!("bad number {s:?}: {e}"))))
                .collect::<Result<Vec<f64>>>()?;
            rows.push(row);
        }
        Ok(Self { header, rows })
    }

    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let j = self.header.iter().position(|h| h == name)?;
        Some(self.rows.iter().map(|r| r[j]).collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn number_format_has_17_digits() {
        assert_eq!(format_number(0.1), "1.0000000000000001e-1");
        assert_eq!(format_number(-2.0), "-2.0000000000000000e0");
        assert_eq!(format_number(0.1).parse::<f64>().unwrap(), 0.1);
    }

    #[test]
    fn bad_magic_rejected() {
        let bytes = b"XXXX\x01\x00\x00\x00";
        assert!(matches!(read_field(&mut &bytes[..]), Err(NlsError::Format(_))));
        assert!(matches!(read_profile(&mut &bytes[..]), Err(NlsError::Format(_))));
    }
}
