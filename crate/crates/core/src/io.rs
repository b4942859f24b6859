//! Plain-text snapshot files and fixed-format numeric tables.
//!
//! A snapshot is a CSV file with header `r,value,velocity` and one row per
//! node, next to a JSON sidecar `{formulation, time, n_points, dr}` with the
//! same stem. Floats are written with 17 significant digits so that a
//! round trip is exact.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::RadialGrid;
use crate::model::{FieldState, Formulation};

/// 17 significant digits in scientific notation.
pub fn format_f64(x: f64) -> String {
    if x.is_nan() {
        "NaN".to_string()
    } else if x.is_infinite() {
        if x > 0.0 { "inf" } else { "-inf" }.to_string()
    } else {
        format!("{x:.16e}")
    }
}

/// CSV text with `\n` line endings; every cell is formatted by [`format_f64`].
pub fn csv_table<'a>(header: &[&str], rows: impl IntoIterator<Item = &'a [f64]>) -> String {
    let mut out = header.join(",");
    out.push('\n');
    for row in rows {
        for (k, x) in row.iter().enumerate() {
            if k > 0 {
                out.push(',');
            }
            out.push_str(&format_f64(*x));
        }
        out.push('\n');
    }
    out
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SnapshotMeta {
    pub formulation: Formulation,
    pub time: f64,
    pub n_points: usize,
    pub dr: f64,
}

/// The sidecar path: `dir/name.csv` becomes `dir/name.json`.
pub fn sidecar_path(csv: &Path) -> PathBuf {
    csv.with_extension("json")
}

pub fn snapshot_csv(state: &FieldState, grid: &RadialGrid) -> Result<String> {
    state.require(state.formulation, grid)?;
    let mut out = String::from("r,value,velocity\n");
    for (j, r) in grid.nodes().enumerate() {
        let _ = writeln!(
            out,
            "{},{},{}",
            format_f64(r),
            format_f64(state.value[j]),
            format_f64(state.velocity[j])
        );
    }
    Ok(out)
}

pub fn write_snapshot(path: &Path, state: &FieldState, grid: &RadialGrid) -> Result<()> {
    fs::write(path, snapshot_csv(state, grid)?)?;
    let meta = SnapshotMeta {
        formulation: state.formulation,
        time: state.time,
        n_points: grid.n_points(),
        dr: grid.dr(),
    };
    let json = serde_json::to_string_pretty(&meta).map_err(|e| Error::Format(e.to_string()))?;
    fs::write(sidecar_path(path), json + "\n")?;
    Ok(())
}

fn parse_cell(cell: &str, line: usize) -> Result<f64> {
    cell.trim()
        .parse()
        .map_err(|_| Error::Format(format!("line {line}: '{cell}' is not a number")))
}

/// Reads a snapshot and its sidecar. The radii must match the grid implied
/// by the sidecar to within `1e−9·dr`.
pub fn read_snapshot(path: &Path) -> Result<(FieldState, RadialGrid)> {
    let meta_text = fs::read_to_string(sidecar_path(path))?;
    let meta: SnapshotMeta =
        serde_json::from_str(&meta_text).map_err(|e| Error::Format(format!("sidecar: {e}")))?;
    let r_max = meta.dr * meta.n_points as f64;
    let grid = RadialGrid::new(r_max, meta.n_points)?;
    let text = fs::read_to_string(path)?;
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, h)) if h.trim() == "r,value,velocity" => {}
        _ => return Err(Error::Format("expected header 'r,value,velocity'".into())),
    }
    let mut value = Vec::with_capacity(grid.len());
    let mut velocity = Vec::with_capacity(grid.len());
    for (k, line) in lines {
        if line.trim().is_empty() {
            continue;
        }
        let cells: Vec<&str> = line.split(',').collect();
        if cells.len() != 3 {
            return Err(Error::Format(format!("line {}: expected 3 columns", k + 1)));
        }
        let j = value.len();
        let r = parse_cell(cells[0], k + 1)?;
        if j >= grid.len() || (r - grid.r(j)).abs() > 1e-9 * meta.dr {
            return Err(Error::Format(format!(
                "line {}: radius {r} does not match the sidecar grid",
                k + 1
            )));
        }
        value.push(parse_cell(cells[1], k + 1)?);
        velocity.push(parse_cell(cells[2], k + 1)?);
    }
    if value.len() != grid.len() {
        return Err(Error::Format(format!(
            "expected {} rows, found {}",
            grid.len(),
            value.len()
        )));
    }
    let state = FieldState::new(meta.formulation, value, velocity, meta.time)?;
    Ok((state, grid))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn float_format() {
        assert_eq!(format_f64(0.1), "1.0000000000000001e-1");
        assert_eq!(format_f64(-2.0), "-2.0000000000000000e0");
        assert_eq!(format_f64(f64::NAN), "NaN");
        assert_eq!(csv_table(&["a", "b"], [&[1.0, 0.5][..]]), "a,b\n1.0000000000000000e0,5.0000000000000000e-1\n");
    }

    #[test]
    fn snapshot_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let grid = RadialGrid::new(4.0, 40).unwrap();
        let state = FieldState::from_fn(Formulation::U5d, &grid, 0.3, |r| (-r * r).exp() / 3.0, |r| r.sin()).unwrap();
        let path = dir.path().join("snap.csv");
        write_snapshot(&path, &state, &grid).unwrap();
        let (back, g2) = read_snapshot(&path).unwrap();
        assert_eq!(back, state);
        assert_eq!(g2, grid);
    }

    #[test]
    fn rejects_mismatched_grid() {
        let dir = tempfile::tempdir().unwrap();
        let grid = RadialGrid::new(4.0, 40).unwrap();
        let path = dir.path().join("snap.csv");
        write_snapshot(&path, &FieldState::zero(Formulation::U5d, &grid, 0.0), &grid).unwrap();
        let text = fs::read_to_string(&path).unwrap();
        let cut: String = text.lines().take(10).map(|l| format!("{l}\n")).collect();
        fs::write(&path, cut).unwrap();
        assert!(read_snapshot(&path).is_err());
        fs::write(&path, text.replace("r,value,velocity", "r,u,v")).unwrap();
        assert!(read_snapshot(&path).is_err());
    }

    proptest! {
        #[test]
        fn formatted_floats_parse_back(x in proptest::num::f64::NORMAL | proptest::num::f64::SUBNORMAL | proptest::num::f64::ZERO) {
            prop_assert_eq!(format_f64(x).parse::<f64>().unwrap(), x);
        }
    }
}
