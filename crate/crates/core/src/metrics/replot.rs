use std::collections::HashMap;
use std::path::{Path, PathBuf};

use super::svg::{LinePlot, Series};
use super::{curves_svg, MetricsError};

/// A CSV file as named numeric columns plus its `run_hash`.
struct Table {
    columns: HashMap<String, Vec<f64>>,
    run_hash: String,
}

impl Table {
    fn read(path: &Path) -> Result<Self, MetricsError> {
        let err = |e: csv::Error| MetricsError::Env(format!("{}: {e}", path.display()));
        let mut r = csv::Reader::from_path(path).map_err(err)?;
        let headers: Vec<String> = r.headers().map_err(err)?.iter().map(str::to_owned).collect();
        let mut columns: HashMap<String, Vec<f64>> = headers.iter().map(|h| (h.clone(), Vec::new())).collect();
        let mut run_hash = String::new();
        for rec in r.records() {
            let rec = rec.map_err(err)?;
            for (h, v) in headers.iter().zip(rec.iter()) {
                if h == "run_hash" {
                    run_hash = v.to_owned();
                } else if let Some(c) = columns.get_mut(h) {
                    c.push(v.parse().unwrap_or(f64::NAN));
                }
            }
        }
        Ok(Self { columns, run_hash })
    }

    fn col(&self, name: &str) -> Result<&[f64], MetricsError> {
        self.columns
            .get(name)
            .map(Vec::as_slice)
            .ok_or_else(|| MetricsError::Env(format!("missing column {name}")))
    }

    fn points(&self, x: &str, y: &str) -> Result<Vec<(f64, f64)>, MetricsError> {
        Ok(self
            .col(x)?
            .iter()
            .zip(self.col(y)?)
            .map(|(&a, &b)| (a, b))
            .filter(|(a, b)| a.is_finite() && b.is_finite())
            .collect())
    }
}

fn write(path: PathBuf, svg: String, out: &mut Vec<PathBuf>) -> Result<(), MetricsError> {
    std::fs::write(&path, svg).map_err(|e| MetricsError::Env(e.to_string()))?;
    out.push(path);
    Ok(())
}

fn training_plots(dir: &Path, t: &Table, out: &mut Vec<PathBuf>) -> Result<(), MetricsError> {
    let note = Some(format!("run_hash {}", t.run_hash));
    let mut p = LinePlot::new("Training return", "iteration", "mean episode return");
    p.note = note.clone();
    p.push(Series::new("mean return", t.points("iteration", "mean_return")?));
    write(dir.join("training_return.svg"), p.render(), out)?;
    let mut p = LinePlot::new("Symmetry scores during training", "iteration", "rad");
    p.note = note;
    p.push(Series::new("Spat-S", t.points("iteration", "spat_s")?));
    p.push(Series::new("Temp-S", t.points("iteration", "temp_s")?).color(1));
    write(dir.join("training_symmetry.svg"), p.render(), out)
}

fn error_plots(dir: &Path, t: &Table, out: &mut Vec<PathBuf>) -> Result<(), MetricsError> {
    let dt = match t.col("time")? {
        [a, b, ..] => b - a,
        _ => 1.0,
    };
    for (col, file, title, label) in [
        ("te_p", "te_p.svg", "Position tracking error", "TE-P (m)"),
        ("te_o", "te_o.svg", "Orientation tracking error", "TE-O (rad)"),
    ] {
        let svg = curves_svg(title, label, dt, &[("mean".into(), t.col(col)?.to_vec())], &t.run_hash);
        write(dir.join(file), svg, out)?;
    }
    Ok(())
}

fn overlay_plot(dir: &Path, tables: &[Table], out: &mut Vec<PathBuf>) -> Result<(), MetricsError> {
    let mut p = LinePlot::new("Eight-direction tracking", "x (m)", "y (m)");
    p.equal_axes = true;
    p.note = tables.first().map(|t| format!("run_hash {}", t.run_hash));
    for (i, t) in tables.iter().enumerate() {
        p.push(Series::new(format!("dir {i}"), t.points("x", "y")?).color(i));
        p.push(Series::new("", t.points("ideal_x", "ideal_y")?).dashed().color(i));
    }
    p.series.retain(|s| !s.points.is_empty());
    write(dir.join("eight_dir_overlay.svg"), p.render(), out)
}

fn drive_plot(dir: &Path, t: &Table, out: &mut Vec<PathBuf>) -> Result<(), MetricsError> {
    let mut p = LinePlot::new("Drive magnitude per side", "distance (m)", "|u| (rad/s)");
    p.note = Some(format!("run_hash {}", t.run_hash));
    p.push(Series::new("left", t.points("distance", "drive_left")?));
    p.push(Series::new("right", t.points("distance", "drive_right")?).color(1));
    write(dir.join("drive_profile.svg"), p.render(), out)
}

/// Re-renders every SVG whose source CSV is present in `dir`:
/// `metrics.csv`, `error_curves.csv`, `dir_*.csv` and `drive_profile.csv`.
/// Returns the files written.
pub fn replot_dir(dir: &Path) -> Result<Vec<PathBuf>, MetricsError> {
    let mut out = Vec::new();
    let metrics = dir.join("metrics.csv");
    if metrics.exists() {
        training_plots(dir, &Table::read(&metrics)?, &mut out)?;
    }
    let errors = dir.join("error_curves.csv");
    if errors.exists() {
        error_plots(dir, &Table::read(&errors)?, &mut out)?;
    }
    let mut tables = Vec::new();
    for i in 0.. {
        let p = dir.join(format!("dir_{i}.csv"));
        if !p.exists() {
            break;
        }
        tables.push(Table::read(&p)?);
    }
    if !tables.is_empty() {
        overlay_plot(dir, &tables, &mut out)?;
    }
    let drive = dir.join("drive_profile.csv");
    if drive.exists() {
        drive_plot(dir, &Table::read(&drive)?, &mut out)?;
    }
    Ok(out)
}
