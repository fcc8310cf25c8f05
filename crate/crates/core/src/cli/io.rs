use crate::diagnostics::FunctionalRecord;
use crate::error::{Error, Result};
use crate::grid::Grid1D;
use crate::solver::SimState;
use serde::{Deserialize, Serialize};
use std::path::Path;

pub const FAILED_MARKER: &str = "FAILED";

fn csv_error(path: &Path, e: csv::Error) -> Error {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::io(path, io),
        other => Error::format(path, format!("{other:?}")),
    }
}

pub fn create_dir(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))
}

pub fn write_text(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}

/// Header row from the field names, then one row per record.
pub fn write_csv<T: Serialize>(path: &Path, rows: &[T]) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(|e| csv_error(path, e))?;
    for r in rows {
        w.serialize(r).map_err(|e| csv_error(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

/// Writes a header even when `rows` is empty.
pub fn write_csv_with_header<T: Serialize>(path: &Path, header: &[&str], rows: &[T]) -> Result<()> {
    let mut w = csv::WriterBuilder::new()
        .has_headers(false)
        .from_path(path)
        .map_err(|e| csv_error(path, e))?;
    w.write_record(header).map_err(|e| csv_error(path, e))?;
    for r in rows {
        w.serialize(r).map_err(|e| csv_error(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

pub fn read_csv<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<Vec<T>> {
    let mut r = csv::Reader::from_path(path).map_err(|e| csv_error(path, e))?;
    r.deserialize()
        .map(|row| row.map_err(|e| csv_error(path, e)))
        .collect()
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)
        .map_err(|e| Error::format(path, e.to_string()))?;
    text.push('\n');
    write_text(path, &text)
}

pub fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| Error::format(path, e.to_string()))
}

/// One row of `snapshots.csv`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SnapshotRow {
    pub t: f64,
    pub x: f64,
    pub rho: f64,
    pub m: f64,
}

pub fn write_snapshots(path: &Path, grid: &Grid1D, snaps: &[SimState]) -> Result<()> {
    let xs = grid.centers();
    let rows: Vec<SnapshotRow> = snaps
        .iter()
        .flat_map(|s| {
            xs.iter().enumerate().map(move |(i, &x)| SnapshotRow {
                t: s.t,
                x,
                rho: s.rho[i],
                m: s.m[i],
            })
        })
        .collect();
    write_csv_with_header(path, &["t", "x", "rho", "m"], &rows)
}

/// Groups the rows of `snapshots.csv` into states on `grid`.
pub fn read_snapshots(path: &Path, grid: &Grid1D) -> Result<Vec<SimState>> {
    let rows: Vec<SnapshotRow> = read_csv(path)?;
    if rows.len() % grid.n != 0 {
        return Err(Error::format(
            path,
            format!("{} rows is not a multiple of the {} grid cells", rows.len(), grid.n),
        ));
    }
    let tol = 1e-9 * grid.dx();
    rows.chunks(grid.n)
        .map(|chunk| {
            let t = chunk[0].t;
            for (i, r) in chunk.iter().enumerate() {
                if r.t != t || (r.x - grid.center(i)).abs() > tol {
                    return Err(Error::format(
                        path,
                        format!("snapshot at t = {t} is not laid out on the run grid"),
                    ));
                }
            }
            Ok(SimState {
                t,
                rho: chunk.iter().map(|r| r.rho).collect(),
                m: chunk.iter().map(|r| r.m).collect(),
            })
        })
        .collect()
}

pub fn read_functionals(path: &Path) -> Result<Vec<FunctionalRecord>> {
    read_csv(path)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn snapshots_round_trip_exactly() {
        let dir = tempfile::tempdir().unwrap();
        let grid = Grid1D::new(-1.0, 2.0, 16).unwrap();
        let snaps: Vec<SimState> = (0..3)
            .map(|k| SimState {
                t: k as f64 / 3.0,
                rho: (0..16).map(|i| 1.0 + (i * k) as f64 / 7.0).collect(),
                m: (0..16).map(|i| (i as f64).sin() / 3.0).collect(),
            })
            .collect();
        let p = dir.path().join("s.csv");
        write_snapshots(&p, &grid, &snaps).unwrap();
        assert_eq!(read_snapshots(&p, &grid).unwrap(), snaps);
        let other = Grid1D::new(-1.0, 2.5, 16).unwrap();
        assert!(read_snapshots(&p, &other).is_err());
    }

    #[test]
    fn empty_series_keeps_header() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("s.csv");
        write_snapshots(&p, &Grid1D::new(0.0, 1.0, 16).unwrap(), &[]).unwrap();
        assert_eq!(std::fs::read_to_string(&p).unwrap(), "t,x,rho,m\n");
    }
}
