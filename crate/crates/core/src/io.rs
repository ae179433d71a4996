//! Grid and table serialization.
//!
//! CSV grids: `#`-prefixed header lines (the second holds the metadata as
//! one JSON object), then `omega1,omega3,re,im` rows with ω₃ varying
//! fastest. Binary grids: interleaved little-endian `f64` pairs `re, im` in
//! the same order, with axes and metadata in a JSON sidecar.

use crate::error::Error;
use crate::spectra::{Axis, ComplexGrid2D, SpectrumResult};
use ndarray::Array2;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::fs;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

/// Sidecar describing a binary grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BinarySidecar {
    pub data_file: String,
    pub layout: String,
    pub axis1: Axis,
    pub axis2: Axis,
    pub center_frequency: f64,
    pub method: String,
    pub t2: Option<f64>,
    pub normalization: f64,
    pub metadata: std::collections::BTreeMap<String, serde_json::Value>,
}

const LAYOUT: &str = "row-major [axis1][axis2], interleaved re,im, little-endian f64";

fn header(spectrum: &SpectrumResult) -> Result<serde_json::Value, Error> {
    Ok(serde_json::json!({
        "method": spectrum.method,
        "t2": spectrum.t2,
        "center_frequency": spectrum.center_frequency,
        "normalization": spectrum.normalization,
        "axis1": spectrum.grid.axis1,
        "axis2": spectrum.grid.axis2,
        "metadata": spectrum.metadata,
    }))
}

pub fn write_csv(path: &Path, spectrum: &SpectrumResult) -> Result<(), Error> {
    let mut w = BufWriter::new(fs::File::create(path)?);
    let g = &spectrum.grid;
    writeln!(w, "# omega1 [{}], omega3 [{}], re, im", g.axis1.unit, g.axis2.unit)?;
    writeln!(w, "# {}", serde_json::to_string(&header(spectrum)?)?)?;
    writeln!(w, "omega1,omega3,re,im")?;
    for i in 0..g.axis1.count {
        let a = g.axis1.value(i);
        for j in 0..g.axis2.count {
            let z = g.values[[i, j]];
            writeln!(w, "{},{},{},{}", a, g.axis2.value(j), z.re, z.im)?;
        }
    }
    w.flush()?;
    Ok(())
}

/// Reads a grid written by [`write_csv`]. Axes come from the header.
pub fn read_csv(path: &Path) -> Result<SpectrumResult, Error> {
    let r = BufReader::new(fs::File::open(path)?);
    let mut meta: Option<serde_json::Value> = None;
    let mut data = Vec::new();
    for line in r.lines() {
        let line = line?;
        if let Some(rest) = line.strip_prefix("# ") {
            if rest.starts_with('{') {
                meta = Some(serde_json::from_str(rest)?);
            }
            continue;
        }
        if line.starts_with("omega1") || line.is_empty() {
            continue;
        }
        let f: Vec<f64> = line.split(',').map(|s| s.trim().parse::<f64>()).collect::<Result<_, _>>().map_err(bad)?;
        if f.len() != 4 {
            return Err(bad(format!("expected 4 columns in {line:?}")));
        }
        data.push(Complex64::new(f[2], f[3]));
    }
    let meta = meta.ok_or_else(|| bad("missing metadata header"))?;
    let axis1: Axis = serde_json::from_value(meta["axis1"].clone())?;
    let axis2: Axis = serde_json::from_value(meta["axis2"].clone())?;
    let values = Array2::from_shape_vec((axis1.count, axis2.count), data).map_err(bad)?;
    let grid = ComplexGrid2D::new(axis1, axis2, values).map_err(bad)?;
    let mut out = SpectrumResult::new(
        grid,
        meta["center_frequency"].as_f64().unwrap_or(0.0),
        meta["method"].as_str().unwrap_or_default(),
        meta["t2"].as_f64(),
    );
    out.normalization = meta["normalization"].as_f64().unwrap_or(1.0);
    out.metadata = serde_json::from_value(meta["metadata"].clone()).unwrap_or_default();
    Ok(out)
}

fn bad(e: impl ToString) -> Error {
    Error::Io(std::io::Error::new(std::io::ErrorKind::InvalidData, e.to_string()))
}

/// Writes `<stem>.bin` and `<stem>.json` next to each other.
pub fn write_binary(dir: &Path, stem: &str, spectrum: &SpectrumResult) -> Result<(), Error> {
    let data_file = format!("{stem}.bin");
    let mut w = BufWriter::new(fs::File::create(dir.join(&data_file))?);
    for z in spectrum.grid.values.iter() {
        w.write_all(&z.re.to_le_bytes())?;
        w.write_all(&z.im.to_le_bytes())?;
    }
    w.flush()?;
    let sidecar = BinarySidecar {
        data_file,
        layout: LAYOUT.to_string(),
        axis1: spectrum.grid.axis1.clone(),
        axis2: spectrum.grid.axis2.clone(),
        center_frequency: spectrum.center_frequency,
        method: spectrum.method.clone(),
        t2: spectrum.t2,
        normalization: spectrum.normalization,
        metadata: spectrum.metadata.clone(),
    };
    fs::write(dir.join(format!("{stem}.json")), serde_json::to_string_pretty(&sidecar)?)?;
    Ok(())
}

pub fn read_binary(sidecar_path: &Path) -> Result<SpectrumResult, Error> {
    let s: BinarySidecar = serde_json::from_str(&fs::read_to_string(sidecar_path)?)?;
    let dir = sidecar_path.parent().unwrap_or(Path::new("."));
    let bytes = fs::read(dir.join(&s.data_file))?;
    if bytes.len() != 16 * s.axis1.count * s.axis2.count {
        return Err(bad(format!("{} bytes for a {}×{} grid", bytes.len(), s.axis1.count, s.axis2.count)));
    }
    let f = |k: usize| f64::from_le_bytes(bytes[8 * k..8 * k + 8].try_into().expect("8 bytes"));
    let data: Vec<Complex64> = (0..bytes.len() / 16).map(|k| Complex64::new(f(2 * k), f(2 * k + 1))).collect();
    let values = Array2::from_shape_vec((s.axis1.count, s.axis2.count), data).map_err(bad)?;
    let grid = ComplexGrid2D::new(s.axis1, s.axis2, values).map_err(bad)?;
    let mut out = SpectrumResult::new(grid, s.center_frequency, s.method, s.t2);
    out.normalization = s.normalization;
    out.metadata = s.metadata;
    Ok(out)
}

/// Column table as CSV with a `#` comment line on top.
pub fn write_table(path: &Path, comment: &str, columns: &[(&str, &[f64])]) -> Result<(), Error> {
    let rows = columns.iter().map(|c| c.1.len()).max().unwrap_or(0);
    if columns.iter().any(|c| c.1.len() != rows) {
        return Err(bad("table columns differ in length"));
    }
    let mut w = BufWriter::new(fs::File::create(path)?);
    writeln!(w, "# {comment}")?;
    writeln!(w, "{}", columns.iter().map(|c| c.0).collect::<Vec<_>>().join(","))?;
    for k in 0..rows {
        let row: Vec<String> = columns.iter().map(|c| c.1[k].to_string()).collect();
        writeln!(w, "{}", row.join(","))?;
    }
    w.flush()?;
    Ok(())
}

/// Reads a table written by [`write_table`] into (names, columns).
pub fn read_table(path: &Path) -> Result<(Vec<String>, Vec<Vec<f64>>), Error> {
    let text = fs::read_to_string(path)?;
    let mut lines = text.lines().filter(|l| !l.starts_with('#') && !l.is_empty());
    let names: Vec<String> = lines.next().ok_or_else(|| bad("empty table"))?.split(',').map(String::from).collect();
    let mut cols = vec![Vec::new(); names.len()];
    for line in lines {
        for (c, v) in cols.iter_mut().zip(line.split(',')) {
            c.push(v.parse::<f64>().map_err(bad)?);
        }
    }
    Ok((names, cols))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> SpectrumResult {
        let a1 = Axis::centered(0.0, 1.0, 3, "rad/us").unwrap();
        let a2 = Axis::new(-2.0, 0.5, 4, "rad/us").unwrap();
        let v = Array2::from_shape_fn((3, 4), |(i, j)| Complex64::new(i as f64 + 0.1, -(j as f64) / 3.0));
        SpectrumResult::new(ComplexGrid2D::new(a1, a2, v).unwrap(), 12.5, "rf", Some(0.24)).with_metadata("k", 1.5)
    }

    #[test]
    fn csv_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("g.csv");
        write_csv(&p, &sample()).unwrap();
        assert_eq!(read_csv(&p).unwrap(), sample());
    }

    #[test]
    fn binary_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        write_binary(dir.path(), "g", &sample()).unwrap();
        assert_eq!(read_binary(&dir.path().join("g.json")).unwrap(), sample());
        assert_eq!(fs::metadata(dir.path().join("g.bin")).unwrap().len(), 3 * 4 * 16);
    }

    #[test]
    fn table_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("t.csv");
        let a = [0.0, 0.5, 1.0];
        let b = [1.0, 0.1 + 0.2, -3e-17];
        write_table(&p, "demo", &[("t", &a), ("y", &b)]).unwrap();
        let (names, cols) = read_table(&p).unwrap();
        assert_eq!(names, ["t", "y"]);
        assert_eq!(cols, vec![a.to_vec(), b.to_vec()]);
        assert!(write_table(&p, "x", &[("t", &a), ("y", &b[..2])]).is_err());
    }
}
