//! Binary field dumps: one little-endian f64 file per component in row-major order,
//! plus a JSON header.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::field::SpectralField;
use super::grid::Grid;
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DumpHeader {
    pub dim: usize,
    pub n: usize,
    pub period: Vec<f64>,
    pub components: usize,
    pub time: f64,
}

fn component_path(dir: &Path, stem: &str, c: usize) -> PathBuf {
    dir.join(format!("{stem}.c{c}.bin"))
}

/// Writes `<stem>.c<k>.bin` for every component and `<stem>.json`.
pub fn write_field(dir: &Path, stem: &str, field: &SpectralField, time: f64) -> Result<()> {
    fs::create_dir_all(dir)?;
    let g = field.grid();
    let header = DumpHeader {
        dim: g.dim(),
        n: g.n(),
        period: g.period().to_vec(),
        components: field.components(),
        time,
    };
    for c in 0..field.components() {
        let bytes: Vec<u8> = field.values(c).iter().flat_map(|v| v.to_le_bytes()).collect();
        fs::write(component_path(dir, stem, c), bytes)?;
    }
    fs::write(dir.join(format!("{stem}.json")), serde_json::to_vec_pretty(&header)?)?;
    Ok(())
}

pub fn read_field(dir: &Path, stem: &str) -> Result<(SpectralField, DumpHeader)> {
    let header: DumpHeader = serde_json::from_slice(&fs::read(dir.join(format!("{stem}.json")))?)?;
    let grid = Grid::new(header.dim, header.n, &header.period)?;
    let mut values = Vec::with_capacity(header.components);
    for c in 0..header.components {
        let bytes = fs::read(component_path(dir, stem, c))?;
        if bytes.len() != 8 * grid.len() {
            return Err(Error::SizeMismatch { expected: 8 * grid.len(), found: bytes.len() });
        }
        values.push(
            bytes
                .chunks_exact(8)
                .map(|b| f64::from_le_bytes(b.try_into().expect("chunk of 8")))
                .collect(),
        );
    }
    Ok((SpectralField::from_values(&grid, values)?, header))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dump_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let g = Grid::new(2, 8, &[1.0, 2.0]).unwrap();
        let f = SpectralField::from_fn(&g, 2, |x, c| x[0] * (c as f64 + 1.0) - x[1]);
        write_field(dir.path(), "u", &f, 1.5).unwrap();
        let (back, h) = read_field(dir.path(), "u").unwrap();
        assert_eq!(h.components, 2);
        assert_eq!(h.time, 1.5);
        assert_eq!(back.all_values(), f.all_values());
        let raw = std::fs::read(dir.path().join("u.c1.bin")).unwrap();
        assert_eq!(f64::from_le_bytes(raw[8..16].try_into().unwrap()), f.values(1)[1]);
    }
}
