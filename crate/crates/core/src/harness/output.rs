//! Legacy VTK snapshots, CSV reports and the plain-text run manifest.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::diagnostics::{ConvergenceRow, EnergyReport, NormTable, TranslationReport};
use crate::domain::Grid;
use crate::error::{Error, Result};
use crate::model::SimState;

fn write_text(path: &Path, text: &str) -> Result<()> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

fn push_values(out: &mut String, values: impl Iterator<Item = f64>) {
    for v in values {
        let _ = writeln!(out, "{v:e}");
    }
}

/// Renders a state as legacy ASCII `STRUCTURED_POINTS` with one point per
/// cell center; face velocities are averaged to the centers.
pub fn vtk_string(state: &SimState, grid: &Grid, run_id: &str) -> String {
    let [nx, ny, nz] = grid.cell_shape();
    let [dx, dy, dz] = grid.spacing();
    let n = grid.n_cells();
    let mut out = String::with_capacity(n * 64);
    let _ = writeln!(out, "# vtk DataFile Version 3.0");
    let _ = writeln!(
        out,
        "{} t={:e} step={}",
        run_id.replace('\n', " "),
        state.t,
        state.step
    );
    let _ = writeln!(out, "ASCII");
    let _ = writeln!(out, "DATASET STRUCTURED_POINTS");
    let _ = writeln!(out, "DIMENSIONS {nx} {ny} {nz}");
    let _ = writeln!(out, "ORIGIN {:e} {:e} {:e}", 0.5 * dx, 0.5 * dy, 0.5 * dz);
    let _ = writeln!(out, "SPACING {dx:e} {dy:e} {dz:e}");
    let _ = writeln!(out, "POINT_DATA {n}");
    // VTK orders points with x fastest
    let order =
        || (0..nz).flat_map(move |k| (0..ny).flat_map(move |j| (0..nx).map(move |i| [i, j, k])));
    let _ = writeln!(out, "SCALARS C double 1\nLOOKUP_TABLE default");
    push_values(&mut out, order().map(|q| state.c.values[q]));
    let p = state.p.to_volume(grid);
    let _ = writeln!(out, "SCALARS p double 1\nLOOKUP_TABLE default");
    push_values(&mut out, order().map(|q| p.values[q]));
    let uc = state.u.cell_centered();
    let _ = writeln!(out, "VECTORS velocity double");
    for q in order() {
        let _ = writeln!(out, "{:e} {:e} {:e}", uc[0][q], uc[1][q], uc[2][q]);
    }
    out
}

pub fn write_vtk(state: &SimState, grid: &Grid, run_id: &str, path: &Path) -> Result<()> {
    write_text(path, &vtk_string(state, grid, run_id))
}

fn write_rows(
    path: &Path,
    header: &[&str],
    rows: impl IntoIterator<Item = Vec<String>>,
) -> Result<()> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    let csv_err = |e: csv::Error| Error::Csv {
        path: path.to_path_buf(),
        source: e,
    };
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_path(path)
        .map_err(csv_err)?;
    w.write_record(header).map_err(csv_err)?;
    for r in rows {
        w.write_record(&r).map_err(csv_err)?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

fn num(v: f64) -> String {
    format!("{v:e}")
}

pub const ENERGY_HEADER: [&str; 6] = ["t", "E", "D", "W", "Q", "slack"];

pub fn write_energy_csv(report: &EnergyReport, path: &Path) -> Result<()> {
    write_rows(
        path,
        &ENERGY_HEADER,
        report.records.iter().map(|r| {
            vec![
                num(r.t),
                num(r.e),
                num(r.d),
                num(r.w),
                num(r.q),
                num(r.slack),
            ]
        }),
    )
}

pub fn write_norms_csv(norms: &NormTable, path: &Path) -> Result<()> {
    write_rows(
        path,
        &["norm", "value"],
        norms.entries().into_iter().map(|(n, v)| vec![n, num(v)]),
    )
}

pub fn write_translation_csv(report: &TranslationReport, path: &Path) -> Result<()> {
    write_rows(
        path,
        &["h", "modulus"],
        report
            .h
            .iter()
            .zip(&report.modulus)
            .map(|(h, m)| vec![num(*h), num(*m)]),
    )
}

pub const SWEEP_HEADER: [&str; 6] = [
    "eps",
    "err_uH",
    "err_u3",
    "err_C",
    "energy_slack_min",
    "runtime_s",
];

/// One line of `sweep.csv`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepRecord {
    pub row: ConvergenceRow,
    pub energy_slack_min: f64,
    pub runtime_s: f64,
}

pub fn write_sweep_csv(records: &[SweepRecord], path: &Path) -> Result<()> {
    write_rows(
        path,
        &SWEEP_HEADER,
        records.iter().map(|r| {
            vec![
                num(r.row.eps),
                num(r.row.err_uh),
                num(r.row.err_u3),
                num(r.row.err_c),
                num(r.energy_slack_min),
                num(r.runtime_s),
            ]
        }),
    )
}

pub fn read_sweep_csv(path: &Path) -> Result<Vec<SweepRecord>> {
    let csv_err = |e: csv::Error| Error::Csv {
        path: path.to_path_buf(),
        source: e,
    };
    let mut r = csv::Reader::from_path(path).map_err(csv_err)?;
    let header = r.headers().map_err(csv_err)?.clone();
    if header.iter().ne(SWEEP_HEADER.iter().copied()) {
        return Err(Error::Diagnostics(format!(
            "{}: unexpected header {:?}",
            path.display(),
            header
        )));
    }
    let mut out = Vec::new();
    for rec in r.records() {
        let rec = rec.map_err(csv_err)?;
        let v: Vec<f64> = rec
            .iter()
            .map(|s| s.parse::<f64>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|e| Error::Diagnostics(format!("{}: {e}", path.display())))?;
        out.push(SweepRecord {
            row: ConvergenceRow {
                eps: v[0],
                err_uh: v[1],
                err_u3: v[2],
                err_c: v[3],
            },
            energy_slack_min: v[4],
            runtime_s: v[5],
        });
    }
    Ok(out)
}

/// Norms of every run of a sweep, one row per run.
pub fn write_sweep_norms_csv(runs: &[(String, NormTable)], path: &Path) -> Result<()> {
    let names: Vec<String> = runs
        .first()
        .map(|r| r.1.entries().into_iter().map(|e| e.0).collect())
        .unwrap_or_default();
    let mut header = vec!["run"];
    header.extend(names.iter().map(String::as_str));
    write_rows(
        path,
        &header,
        runs.iter().map(|(id, t)| {
            let mut row = vec![id.clone()];
            row.extend(t.entries().into_iter().map(|e| num(e.1)));
            row
        }),
    )
}

/// `key=value` lines.
pub fn write_manifest(entries: &[(&str, String)], path: &Path) -> Result<()> {
    let mut out = String::new();
    for (k, v) in entries {
        let _ = writeln!(out, "{k}={}", v.replace('\n', " "));
    }
    write_text(path, &out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::GridSpec;
    use crate::model::Mode;

    #[test]
    fn zero_state_vtk_layout() {
        let g = Grid::new(GridSpec::new(4, 5, 6, 1.0, 1.0, 1.0)).unwrap();
        let s = SimState::zero(&g, Mode::Anisotropic);
        let text = vtk_string(&s, &g, "run-a");
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "# vtk DataFile Version 3.0");
        assert!(lines[1].starts_with("run-a"));
        assert_eq!(lines[3], "DATASET STRUCTURED_POINTS");
        assert_eq!(lines[4], "DIMENSIONS 4 5 6");
        assert_eq!(lines[7], "POINT_DATA 120");
        let header: usize = lines[..8].iter().map(|l| l.len() + 1).sum();
        // two scalar blocks and one vector block of "0e0"
        let body = 2 * ("SCALARS C double 1\nLOOKUP_TABLE default\n".len() + 120 * 4)
            + "VECTORS velocity double\n".len()
            + 120 * "0e0 0e0 0e0\n".len();
        assert_eq!(text.len(), header + body);
    }

    #[test]
    fn sweep_csv_roundtrip_is_exact() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("sweep.csv");
        let recs: Vec<SweepRecord> = [0.5, 0.25, 1.0 / 3.0]
            .iter()
            .map(|&e| SweepRecord {
                row: ConvergenceRow {
                    eps: e,
                    err_uh: e * 0.1234567890123,
                    err_u3: e.sqrt(),
                    err_c: 1e-300 * e,
                },
                energy_slack_min: -e * 1e-17,
                runtime_s: 0.0,
            })
            .collect();
        write_sweep_csv(&recs, &path).unwrap();
        let text = fs::read_to_string(&path).unwrap();
        assert!(text.starts_with("eps,err_uH,err_u3,err_C,energy_slack_min,runtime_s\n"));
        assert!(!text.contains('\r'));
        assert_eq!(read_sweep_csv(&path).unwrap(), recs);
    }
}
