//! CSV emission. Floats use Rust's shortest round-trip formatting, so files
//! are locale independent and re-parse to identical values.

use std::path::{Path, PathBuf};

use crate::error::{Error, Result};

use super::run::{ResultRow, RunReport, Snapshot};

pub const RESULTS_HEADER: [&str; 7] = ["gamma", "s", "err_w1", "err_w2", "iters", "tol", "seconds"];
pub const SERIES_HEADER: [&str; 3] = ["t", "err1_sq", "err2_sq"];

fn csv_error(e: csv::Error) -> Error {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::Io(io),
        other => Error::Config(format!("csv: {other:?}")),
    }
}

fn writer(path: &Path) -> Result<csv::Writer<std::fs::File>> {
    csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_path(path)
        .map_err(csv_error)
}

pub fn write_results(path: &Path, rows: &[ResultRow]) -> Result<()> {
    let mut w = writer(path)?;
    w.write_record(RESULTS_HEADER).map_err(csv_error)?;
    for r in rows {
        w.write_record([
            r.gamma.to_string(),
            r.s.to_string(),
            r.err_w1.to_string(),
            r.err_w2.to_string(),
            r.iters.to_string(),
            r.tol.to_string(),
            r.seconds.to_string(),
        ])
        .map_err(csv_error)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_results(path: &Path) -> Result<Vec<ResultRow>> {
    let mut r = csv::Reader::from_path(path).map_err(csv_error)?;
    let header: Vec<String> = r
        .headers()
        .map_err(csv_error)?
        .iter()
        .map(str::to_string)
        .collect();
    if header != RESULTS_HEADER {
        return Err(Error::Config(format!(
            "unexpected results header {header:?}"
        )));
    }
    let mut rows = Vec::new();
    for record in r.records() {
        let rec = record.map_err(csv_error)?;
        let f = |i: usize| -> Result<f64> {
            rec[i]
                .parse()
                .map_err(|_| Error::Config(format!("bad number `{}`", &rec[i])))
        };
        rows.push(ResultRow {
            gamma: f(0)?,
            s: f(1)?,
            err_w1: f(2)?,
            err_w2: f(3)?,
            iters: rec[4]
                .parse()
                .map_err(|_| Error::Config(format!("bad count `{}`", &rec[4])))?,
            tol: f(5)?,
            seconds: f(6)?,
        });
    }
    Ok(rows)
}

pub fn write_series(path: &Path, series: &[[f64; 3]]) -> Result<()> {
    let mut w = writer(path)?;
    w.write_record(SERIES_HEADER).map_err(csv_error)?;
    for p in series {
        w.write_record(p.iter().map(f64::to_string))
            .map_err(csv_error)?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_snapshot(path: &Path, snap: &Snapshot) -> Result<()> {
    let mut w = writer(path)?;
    if snap.dimension == 1 {
        w.write_record(["x", "w"]).map_err(csv_error)?;
        for (p, v) in snap.points.iter().zip(&snap.values) {
            w.write_record([p[0].to_string(), v.to_string()])
                .map_err(csv_error)?;
        }
    } else {
        w.write_record(["x", "y", "w"]).map_err(csv_error)?;
        for (p, v) in snap.points.iter().zip(&snap.values) {
            w.write_record([p[0].to_string(), p[1].to_string(), v.to_string()])
                .map_err(csv_error)?;
        }
    }
    w.flush()?;
    Ok(())
}

fn row_stem(name: &str, gamma: f64, s: f64) -> String {
    format!("{name}_g{gamma}_s{s}")
}

/// Writes `results.csv` plus per-row series and snapshot files; returns the
/// paths written, in row order.
pub fn emit_outputs(
    dir: &Path,
    report: &RunReport,
    series: bool,
    snapshots: bool,
) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(dir)?;
    let mut written = Vec::new();
    let results = dir.join(format!("{}_results.csv", report.scenario));
    write_results(&results, &report.rows())?;
    written.push(results);
    for o in &report.outcomes {
        let stem = row_stem(&report.scenario, o.row.gamma, o.row.s);
        if series && !o.series.is_empty() {
            let path = dir.join(format!("{stem}_series.csv"));
            write_series(&path, &o.series)?;
            written.push(path);
        }
        if let (true, Some(snap)) = (snapshots, &o.snapshot) {
            let path = dir.join(format!("{stem}_state.csv"));
            write_snapshot(&path, snap)?;
            written.push(path);
        }
    }
    Ok(written)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_table_is_header_only() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("r.csv");
        write_results(&path, &[]).unwrap();
        assert_eq!(
            std::fs::read_to_string(&path).unwrap(),
            "gamma,s,err_w1,err_w2,iters,tol,seconds\n"
        );
    }

    #[test]
    fn rows_round_trip_exactly() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("r.csv");
        let rows = vec![ResultRow {
            gamma: 0.6,
            s: 0.1 + 0.2,
            err_w1: 6.676e-1 / 3.0,
            err_w2: 1e-300,
            iters: 17,
            tol: 3.3e-11,
            seconds: 0.123456789,
        }];
        write_results(&path, &rows).unwrap();
        let back = read_results(&path).unwrap();
        assert_eq!(back.len(), 1);
        for (a, b) in [
            (rows[0].gamma, back[0].gamma),
            (rows[0].s, back[0].s),
            (rows[0].err_w1, back[0].err_w1),
            (rows[0].err_w2, back[0].err_w2),
            (rows[0].tol, back[0].tol),
            (rows[0].seconds, back[0].seconds),
        ] {
            assert_eq!(a.to_bits(), b.to_bits());
        }
        assert_eq!(back[0].iters, 17);
    }

    #[test]
    fn snapshot_headers() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("s.csv");
        let snap = Snapshot {
            dimension: 2,
            points: vec![[0.5, 0.25]],
            values: vec![-1.5],
        };
        write_snapshot(&path, &snap).unwrap();
        assert_eq!(
            std::fs::read_to_string(&path).unwrap(),
            "x,y,w\n0.5,0.25,-1.5\n"
        );
    }
}
