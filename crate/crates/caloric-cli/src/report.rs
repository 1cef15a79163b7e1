//! Report and CSV emission with deterministic formatting.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::Context as _;
use caloric::kernel::SpacetimePoint;
use serde::Serialize;

/// A headline number: raw full-precision value plus a human-rounded string.
#[derive(Debug, Clone, Serialize)]
pub struct Figure {
    pub raw: f64,
    pub display: String,
}

impl Figure {
    pub fn new(raw: f64) -> Self {
        Self {
            raw,
            display: format!("{raw:.4e}"),
        }
    }
}

pub fn write_report<T: Serialize>(
    out_dir: &Path,
    command: &str,
    report: &T,
) -> anyhow::Result<PathBuf> {
    fs::create_dir_all(out_dir)
        .with_context(|| format!("creating output directory {}", out_dir.display()))?;
    let path = out_dir.join(format!("{}.report.json", command.replace('-', "_")));
    let mut text = serde_json::to_string_pretty(report)?;
    text.push('\n');
    fs::write(&path, text).with_context(|| format!("writing {}", path.display()))?;
    Ok(path)
}

/// CSV grid `t,x1[,x2],value` with 17 significant digits per field.
pub fn write_grid_csv(
    out_dir: &Path,
    command: &str,
    suffix: &str,
    points: &[SpacetimePoint<f64>],
    values: &[f64],
) -> anyhow::Result<PathBuf> {
    assert_eq!(points.len(), values.len());
    fs::create_dir_all(out_dir)?;
    let path = out_dir.join(format!("{}.{suffix}.csv", command.replace('-', "_")));
    let n = points.first().map(|p| p.dim()).unwrap_or(1);
    let mut text = String::from("t");
    for i in 1..=n {
        text.push_str(&format!(",x{i}"));
    }
    text.push_str(",value\n");
    for (p, v) in points.iter().zip(values) {
        text.push_str(&format!("{:.16e}", p.t));
        for xi in &p.x {
            text.push_str(&format!(",{xi:.16e}"));
        }
        text.push_str(&format!(",{v:.16e}\n"));
    }
    fs::write(&path, text).with_context(|| format!("writing {}", path.display()))?;
    Ok(path)
}

pub fn write_json<T: Serialize>(
    out_dir: &Path,
    command: &str,
    suffix: &str,
    value: &T,
) -> anyhow::Result<PathBuf> {
    fs::create_dir_all(out_dir)?;
    let path = out_dir.join(format!("{}.{suffix}.json", command.replace('-', "_")));
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    fs::write(&path, text).with_context(|| format!("writing {}", path.display()))?;
    Ok(path)
}

/// Reads samples back from the CSV grid format.
pub fn read_samples_csv(path: &Path) -> anyhow::Result<Vec<(SpacetimePoint<f64>, f64)>> {
    let text =
        fs::read_to_string(path).with_context(|| format!("reading samples {}", path.display()))?;
    let mut lines = text.lines();
    let header = lines.next().context("empty samples file")?;
    let columns: Vec<&str> = header.split(',').collect();
    anyhow::ensure!(
        columns.first() == Some(&"t") && columns.last() == Some(&"value") && columns.len() >= 3,
        "samples header must be t,x1[,..],value"
    );
    let n = columns.len() - 2;
    let mut out = Vec::new();
    for (lineno, line) in lines.enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        anyhow::ensure!(
            fields.len() == n + 2,
            "line {}: expected {} fields, got {}",
            lineno + 2,
            n + 2,
            fields.len()
        );
        let parse = |s: &str| -> anyhow::Result<f64> {
            s.trim()
                .parse::<f64>()
                .with_context(|| format!("line {}: bad number {s:?}", lineno + 2))
        };
        let t = parse(fields[0])?;
        let x: Vec<f64> = fields[1..=n]
            .iter()
            .map(|s| parse(s))
            .collect::<anyhow::Result<_>>()?;
        let value = parse(fields[n + 1])?;
        out.push((SpacetimePoint::new(t, x), value));
    }
    Ok(out)
}
