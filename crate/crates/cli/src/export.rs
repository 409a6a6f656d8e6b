//! CSV persistence for traces and field dumps.
//!
//! Numbers are written with Rust's shortest round-trip float formatting,
//! so re-exporting identical results yields byte-identical files.

use crate::run::RunResult;
use anyhow::{Context, Result};
use std::io::Write;
use std::path::Path;

pub fn write_trace(result: &RunResult, path: &Path) -> Result<()> {
    let mut out = String::from("epoch,train_loss,normalized_l2_error\n");
    for row in &result.trace.rows {
        match row.normalized_error {
            Some(e) => out.push_str(&format!("{},{},{}\n", row.epoch, row.loss, e)),
            None => out.push_str(&format!("{},{},\n", row.epoch, row.loss)),
        }
    }
    std::fs::File::create(path)
        .and_then(|mut f| f.write_all(out.as_bytes()))
        .with_context(|| format!("writing trace to {}", path.display()))
}

pub fn write_field(result: &RunResult, path: &Path) -> Result<()> {
    let dim = result.grid.first().map(|p| p.len()).unwrap_or(0);
    let coords = ["x", "y", "z", "w"];
    let mut header: Vec<&str> = coords[..dim].to_vec();
    header.push("u_pred");
    if result.u_exact.is_some() {
        header.push("u_exact");
        header.push("abs_err");
    }
    let mut out = header.join(",");
    out.push('\n');
    for (i, p) in result.grid.iter().enumerate() {
        for c in p {
            out.push_str(&format!("{c},"));
        }
        match &result.u_exact {
            Some(ex) => out.push_str(&format!(
                "{},{},{}\n",
                result.u_pred[i],
                ex[i],
                (result.u_pred[i] - ex[i]).abs()
            )),
            None => out.push_str(&format!("{}\n", result.u_pred[i])),
        }
    }
    std::fs::File::create(path)
        .and_then(|mut f| f.write_all(out.as_bytes()))
        .with_context(|| format!("writing field to {}", path.display()))
}

/// Write `trace.csv` and `field.csv` into `dir` (created if missing).
pub fn export(result: &RunResult, dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir)
        .with_context(|| format!("creating output directory {}", dir.display()))?;
    write_trace(result, &dir.join("trace.csv"))?;
    write_field(result, &dir.join("field.csv"))?;
    Ok(())
}
