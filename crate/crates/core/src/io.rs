//! File formats.
//!
//! A [`GridFunction`] is stored as a JSON header
//!
//! ```json
//! {"lower": [...], "upper": [...], "shape": [...], "spacing": [...],
//!  "encoding": "csv" | "f64le", "data": "name.csv"}
//! ```
//!
//! next to a data file holding the samples in column-major order, either one value
//! per line or as raw little-endian `f64`. The `data` path is relative to the header.
//! Profiles and distributions are two-column CSV files with a header row.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::grid::GridFunction;
use crate::rearrange::{RadialProfile, StepDistribution};
use crate::reduction::OneDProfile;
use crate::weights::WeightSpec;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Encoding {
    Csv,
    F64le,
}

impl Encoding {
    fn extension(self) -> &'static str {
        match self {
            Encoding::Csv => "csv",
            Encoding::F64le => "f64",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridHeader {
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
    pub shape: Vec<usize>,
    pub spacing: Vec<f64>,
    pub encoding: Encoding,
    pub data: String,
}

fn format_error(path: &Path, message: impl Into<String>) -> Error {
    Error::Format {
        path: path.to_path_buf(),
        message: message.into(),
    }
}

/// Pretty JSON with a trailing newline.
pub fn to_json<T: Serialize + ?Sized>(value: &T) -> Result<String> {
    let mut s = serde_json::to_string_pretty(value)?;
    s.push('\n');
    Ok(s)
}

pub fn write_json<T: Serialize + ?Sized>(path: &Path, value: &T) -> Result<()> {
    fs::write(path, to_json(value)?)?;
    Ok(())
}

pub fn read_weight(path: &Path) -> Result<WeightSpec> {
    let text = fs::read_to_string(path)?;
    WeightSpec::from_json(&text)
}

/// Writes the header at `path` and the samples next to it.
pub fn write_grid(f: &GridFunction, path: &Path, encoding: Encoding) -> Result<()> {
    let data = path.with_extension(encoding.extension());
    let name = data
        .file_name()
        .and_then(|n| n.to_str())
        .ok_or_else(|| format_error(path, "header path has no file name"))?
        .to_string();
    if data == path {
        return Err(format_error(path, "header and data file would coincide"));
    }
    let header = GridHeader {
        lower: f.lower().to_vec(),
        upper: f.upper().to_vec(),
        shape: f.shape().to_vec(),
        spacing: f.spacings(),
        encoding,
        data: name,
    };
    match encoding {
        Encoding::Csv => {
            let mut out = String::with_capacity(f.len() * 24);
            for v in f.values() {
                out.push_str(&format!("{v:e}\n"));
            }
            fs::write(&data, out)?;
        }
        Encoding::F64le => {
            let bytes: Vec<u8> = f.values().iter().flat_map(|v| v.to_le_bytes()).collect();
            fs::write(&data, bytes)?;
        }
    }
    write_json(path, &header)
}

pub fn read_grid(path: &Path) -> Result<GridFunction> {
    let text = fs::read_to_string(path)?;
    let header: GridHeader =
        serde_json::from_str(&text).map_err(|e| format_error(path, format!("bad grid header: {e}")))?;
    let data: PathBuf = path.parent().unwrap_or(Path::new(".")).join(&header.data);
    let values = match header.encoding {
        Encoding::Csv => fs::read_to_string(&data)?
            .lines()
            .map(str::trim)
            .filter(|l| !l.is_empty())
            .map(|l| {
                l.parse::<f64>()
                    .map_err(|e| format_error(&data, format!("bad sample {l:?}: {e}")))
            })
            .collect::<Result<Vec<f64>>>()?,
        Encoding::F64le => {
            let bytes = fs::read(&data)?;
            if bytes.len() % 8 != 0 {
                return Err(format_error(&data, "length is not a multiple of 8 bytes"));
            }
            bytes
                .chunks_exact(8)
                .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
                .collect()
        }
    };
    let f = GridFunction::new(header.lower, header.upper, header.shape, values)
        .map_err(|e| format_error(path, e.to_string()))?;
    let spacing = f.spacings();
    if header.spacing.len() != spacing.len()
        || header
            .spacing
            .iter()
            .zip(&spacing)
            .any(|(a, b)| (a - b).abs() > 1e-9 * b.abs())
    {
        return Err(format_error(path, "spacing does not match box and shape"));
    }
    Ok(f)
}

pub fn write_pairs<I>(path: &Path, columns: [&str; 2], rows: I) -> Result<()>
where
    I: IntoIterator<Item = (f64, f64)>,
{
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(columns)?;
    for (a, b) in rows {
        w.write_record([a.to_string(), b.to_string()])?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_pairs(path: &Path) -> Result<Vec<(f64, f64)>> {
    let mut r = csv::Reader::from_path(path)?;
    let mut rows = Vec::new();
    for record in r.records() {
        let record = record?;
        if record.len() != 2 {
            return Err(format_error(path, "expected two columns"));
        }
        let parse = |s: &str| {
            s.trim()
                .parse::<f64>()
                .map_err(|e| format_error(path, format!("bad number {s:?}: {e}")))
        };
        rows.push((parse(&record[0])?, parse(&record[1])?));
    }
    Ok(rows)
}

pub fn write_radial_profile(path: &Path, profile: &RadialProfile) -> Result<()> {
    write_pairs(path, ["r", "U"], profile.rows())
}

pub fn read_radial_profile(path: &Path) -> Result<RadialProfile> {
    let (radii, values) = read_pairs(path)?.into_iter().unzip();
    RadialProfile::new(radii, values)
}

pub fn write_one_d_profile(path: &Path, phi: &OneDProfile) -> Result<()> {
    write_pairs(path, ["t", "phi"], phi.rows())
}

pub fn read_one_d_profile(path: &Path) -> Result<OneDProfile> {
    let (times, values) = read_pairs(path)?.into_iter().unzip();
    OneDProfile::new(times, values)
}

pub fn write_distribution(path: &Path, dist: &StepDistribution) -> Result<()> {
    write_pairs(
        path,
        ["tau", "measure"],
        dist.thresholds().iter().copied().zip(dist.measures().iter().copied()),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::{weight_x1, Fixture};

    #[test]
    fn grid_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let f = Fixture::TwoBump.sample(&weight_x1(), 16).unwrap();
        for enc in [Encoding::Csv, Encoding::F64le] {
            let path = dir.path().join("f.json");
            write_grid(&f, &path, enc).unwrap();
            assert_eq!(read_grid(&path).unwrap(), f);
        }
    }

    #[test]
    fn profile_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("u.csv");
        let u = RadialProfile::new(vec![0.0, 0.3, 1.0], vec![2.0, 1.0 / 3.0, 0.0]).unwrap();
        write_radial_profile(&path, &u).unwrap();
        assert_eq!(read_radial_profile(&path).unwrap(), u);
        assert!(fs::read_to_string(&path).unwrap().starts_with("r,U\n"));
    }

    #[test]
    fn malformed_header() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bad.json");
        fs::write(&path, "{\"lower\": [0]}").unwrap();
        assert!(matches!(read_grid(&path), Err(Error::Format { .. })));
    }
}
