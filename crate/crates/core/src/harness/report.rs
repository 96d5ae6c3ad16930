//! Trace and summary writers.

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::Serialize;

use super::config::{ScenarioConfig, SnapshotFormat};
use super::scenario::{FinalField, RunArtifacts, Setup};
use crate::error::{Error, Result};
use crate::grid::snapshot;

/// One value with 17 significant digits.
pub fn fmt_value(x: f64) -> String {
    format!("{x:.16e}")
}

/// Header row, then one row per entry of `rows`.
pub fn write_csv_trace<I>(path: &Path, header: &[&str], rows: I) -> Result<()>
where
    I: IntoIterator<Item = Vec<f64>>,
{
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    let io = |e| Error::io(path, e);
    writeln!(w, "{}", header.join(",")).map_err(io)?;
    for row in rows {
        let cells: Vec<String> = row.into_iter().map(fmt_value).collect();
        writeln!(w, "{}", cells.join(",")).map_err(io)?;
    }
    w.flush().map_err(io)
}

pub fn write_json<T: Serialize + ?Sized>(path: &Path, value: &T) -> Result<()> {
    let text = serde_json::to_string_pretty(value)?;
    fs::write(path, text + "\n").map_err(|e| Error::io(path, e))
}

pub fn ensure_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))
}

pub(crate) fn write_run(dir: &Path, cfg: &ScenarioConfig, setup: &Setup, art: &mut RunArtifacts) -> Result<()> {
    ensure_dir(dir)?;
    let mut files: Vec<PathBuf> = Vec::new();

    let path = dir.join("energy.csv");
    let e = &art.energy;
    write_csv_trace(
        &path,
        &["t", "total_energy", "physical_energy"],
        (0..e.len()).map(|i| vec![e.times[i], e.total[i], e.physical[i]]),
    )?;
    files.push(path);

    if !art.reflection.is_empty() {
        let path = dir.join("reflection.csv");
        write_csv_trace(&path, &["t", "max_reflection"], art.reflection.iter().map(|r| vec![r.0, r.1]))?;
        files.push(path);
    }

    if cfg.outputs.write_profile {
        let path = dir.join("profile.json");
        write_json(&path, &setup.profile.to_record())?;
        files.push(path);
    }

    if let Some(format) = cfg.outputs.snapshot {
        let (name, ext) = match format {
            SnapshotFormat::Binary => ("final_u", "bin"),
            SnapshotFormat::Csv => ("final_u", "csv"),
        };
        let path = dir.join(format!("{name}.{ext}"));
        let file = File::create(&path).map_err(|e| Error::io(&path, e))?;
        let mut w = BufWriter::new(file);
        let res = match (&art.final_u, format) {
            (FinalField::Real(f), SnapshotFormat::Binary) => snapshot::write_binary(f, &mut w),
            (FinalField::Real(f), SnapshotFormat::Csv) => snapshot::write_csv(f, &mut w),
            (FinalField::Complex(f), SnapshotFormat::Binary) => snapshot::write_binary(f, &mut w),
            (FinalField::Complex(f), SnapshotFormat::Csv) => snapshot::write_csv(f, &mut w),
        };
        res.and_then(|_| w.flush()).map_err(|e| Error::io(&path, e))?;
        art.snapshot = Some(path.clone());
        files.push(path);
    }

    let path = dir.join("config.json");
    fs::write(&path, cfg.to_json()? + "\n").map_err(|e| Error::io(&path, e))?;
    files.push(path);

    let path = dir.join("summary.json");
    write_json(&path, &art.summary)?;
    files.push(path);

    art.files = files;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seventeen_significant_digits() {
        assert_eq!(fmt_value(0.1), "1.0000000000000001e-1");
        let x = std::f64::consts::PI;
        assert_eq!(fmt_value(x).parse::<f64>().unwrap(), x);
    }

    #[test]
    fn trace_layout() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("t.csv");
        write_csv_trace(&path, &["t", "e"], vec![vec![0.0, 1.0], vec![0.5, 0.25]]).unwrap();
        let text = fs::read_to_string(&path).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines, vec!["t,e", "0.0000000000000000e0,1.0000000000000000e0", "5.0000000000000000e-1,2.5000000000000000e-1"]);
    }

    #[test]
    fn unwritable_path_reports_the_path() {
        let err = write_csv_trace(Path::new("/nonexistent-dir/x.csv"), &["t"], Vec::<Vec<f64>>::new()).unwrap_err();
        assert!(err.to_string().contains("/nonexistent-dir/x.csv"));
    }
}
