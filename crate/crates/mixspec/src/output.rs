//! Report files. Every file is written to a temporary sibling and renamed
//! into place, so readers never see a partial report.

use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::Value;

use mixspec_core::{EigenResult, ExperimentReport, Grid, SweepRow};

pub fn write_atomic(path: &Path, bytes: &[u8]) -> io::Result<()> {
    let dir = path
        .parent()
        .filter(|p| !p.as_os_str().is_empty())
        .unwrap_or(Path::new("."));
    fs::create_dir_all(dir)?;
    let file_name = path.file_name().ok_or_else(|| {
        io::Error::new(io::ErrorKind::InvalidInput, "output path has no file name")
    })?;
    let tmp: PathBuf = dir.join(format!(
        ".{}.{}.tmp",
        file_name.to_string_lossy(),
        std::process::id()
    ));
    let result = (|| {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(bytes)?;
        f.sync_all()?;
        fs::rename(&tmp, path)
    })();
    if result.is_err() {
        let _ = fs::remove_file(&tmp);
    }
    result
}

fn json_bytes<T: Serialize>(value: &T) -> io::Result<Vec<u8>> {
    let mut out = serde_json::to_vec_pretty(value).map_err(io::Error::other)?;
    out.push(b'\n');
    Ok(out)
}

#[derive(Serialize)]
struct ReportFile<'a> {
    check: &'a str,
    #[serde(flatten)]
    report: &'a ExperimentReport,
    seed: Option<u64>,
    config: &'a Value,
}

pub fn report_json(
    report: &ExperimentReport,
    kind: &str,
    seed: Option<u64>,
    config: &Value,
) -> io::Result<Vec<u8>> {
    json_bytes(&ReportFile {
        check: kind,
        report,
        seed,
        config,
    })
}

pub fn rows_csv(rows: &[SweepRow]) -> io::Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.serialize(r).map_err(io::Error::other)?;
    }
    if rows.is_empty() {
        w.write_record([
            "parameter",
            "lambda1",
            "lambda2",
            "gap",
            "residual1",
            "min_v",
            "max_v",
        ])
        .map_err(io::Error::other)?;
    }
    w.into_inner().map_err(|e| io::Error::other(e.to_string()))
}

#[derive(Serialize)]
struct EigenFile<'a> {
    lambdas: &'a [f64],
    gap: Option<f64>,
    residuals: &'a [f64],
    sign_profile: &'a [(f64, f64)],
}

pub fn eigen_json(r: &EigenResult) -> io::Result<Vec<u8>> {
    json_bytes(&EigenFile {
        lambdas: &r.lambdas,
        gap: r.gap,
        residuals: &r.residuals,
        sign_profile: &r.sign_profile,
    })
}

/// Columns `x, component, v1..vk`.
pub fn eigenvectors_csv(grid: &Grid, r: &EigenResult) -> io::Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let mut header = vec!["x".to_string(), "component".to_string()];
    header.extend((1..=r.vectors.len()).map(|i| format!("v{i}")));
    w.write_record(&header).map_err(io::Error::other)?;
    for (i, node) in grid.nodes().iter().enumerate() {
        let mut rec = vec![node.x.to_string(), node.component.to_string()];
        rec.extend(r.vectors.iter().map(|v| v[i].to_string()));
        w.write_record(&rec).map_err(io::Error::other)?;
    }
    w.into_inner().map_err(|e| io::Error::other(e.to_string()))
}
