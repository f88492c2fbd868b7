//! CSV tables and atomic file writes.
//!
//! Numbers use the shortest decimal text that parses back to the same
//! `f64`, except the `qgrid` table which uses 17 significant digits.

use std::io::Write;
use std::path::{Path, PathBuf};

use crate::runner::{QRow, RunOutput};
use crate::scenario::{Output, SweepField};
use crate::CliError;

pub const PURITY_HEADER: &[&str] = &["generator", "t", "purity"];
pub const FIDELITY_HEADER: &[&str] = &["generator", "t", "fidelity"];
pub const DFS_HEADER: &[&str] = &["generator", "t", "trace_distance"];
pub const CHI_HEADER: &[&str] = &[
    "generator",
    "t",
    "re_lambda1",
    "im_lambda1",
    "re_lambda2",
    "im_lambda2",
    "re_chi_numeric",
    "im_chi_numeric",
    "re_chi_analytic",
    "im_chi_analytic",
    "abs_diff",
];
pub const Q_HEADER: &[&str] = &[
    "generator",
    "t",
    "re_delta1",
    "im_delta1",
    "re_delta2",
    "im_delta2",
    "q_analytic",
    "q_numeric",
    "abs_diff",
];
pub const QGRID_HEADER: &[&str] = &[
    "re_delta1",
    "im_delta1",
    "re_delta2",
    "im_delta2",
    "q_analytic",
    "q_numeric",
    "abs_diff",
];
pub const SWEEP_HEADER: &[&str] = &["swept_field", "swept_value", "generator", "t", "observable", "value"];

/// Shortest round-trip representation.
pub fn num(x: f64) -> String {
    format!("{x:?}")
}

/// Scientific notation with 17 significant digits.
pub fn num17(x: f64) -> String {
    format!("{x:.16e}")
}

#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    fn new(header: &[&str]) -> Self {
        Table {
            header: header.iter().map(|s| s.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn to_csv(&self) -> Result<Vec<u8>, CliError> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(&self.header).map_err(csv_err)?;
        for r in &self.rows {
            w.write_record(r).map_err(csv_err)?;
        }
        w.into_inner().map_err(|e| CliError::Io(e.to_string()))
    }
}

fn csv_err(e: csv::Error) -> CliError {
    CliError::Io(e.to_string())
}

fn scalar_series(run: &crate::runner::GeneratorRun, o: Output) -> &[f64] {
    match o {
        Output::Purity => &run.purity,
        Output::Fidelity => &run.fidelity,
        Output::Dfs => &run.trace_distance,
        Output::ChiGrid | Output::QGrid => &[],
    }
}

/// One table per requested output.
pub fn run_tables(out: &RunOutput) -> Vec<(Output, Table)> {
    out.outputs
        .iter()
        .map(|&o| {
            let mut table = match o {
                Output::Purity => Table::new(PURITY_HEADER),
                Output::Fidelity => Table::new(FIDELITY_HEADER),
                Output::Dfs => Table::new(DFS_HEADER),
                Output::ChiGrid => Table::new(CHI_HEADER),
                Output::QGrid => Table::new(Q_HEADER),
            };
            for run in &out.runs {
                let g = run.generator.to_string();
                match o {
                    Output::ChiGrid => {
                        for r in &run.chi {
                            let mut row = vec![g.clone(), num(r.t)];
                            row.extend(r.lambda.iter().map(|&x| num(x)));
                            row.extend([r.numeric.re, r.numeric.im, r.analytic.re, r.analytic.im].map(num));
                            row.push(num((r.numeric - r.analytic).norm()));
                            table.rows.push(row);
                        }
                    }
                    Output::QGrid => {
                        for r in &run.q {
                            let mut row = vec![g.clone(), num(r.t)];
                            row.extend(r.delta.iter().map(|&x| num(x)));
                            row.extend([r.analytic, r.numeric, (r.analytic - r.numeric).abs()].map(num));
                            table.rows.push(row);
                        }
                    }
                    _ => {
                        for (&t, &v) in run.times.iter().zip(scalar_series(run, o)) {
                            table.rows.push(vec![g.clone(), num(t), num(v)]);
                        }
                    }
                }
            }
            (o, table)
        })
        .collect()
}

pub fn qgrid_table(rows: &[QRow]) -> Table {
    let mut table = Table::new(QGRID_HEADER);
    for r in rows {
        let mut row: Vec<String> = r.delta.iter().map(|&x| num17(x)).collect();
        row.extend([r.analytic, r.numeric, (r.analytic - r.numeric).abs()].map(num17));
        table.rows.push(row);
    }
    table
}

/// Long format: one row per (swept value, generator, time, observable).
pub fn sweep_table(field: SweepField, results: &[(f64, RunOutput)]) -> Table {
    let mut table = Table::new(SWEEP_HEADER);
    for (value, out) in results {
        for run in &out.runs {
            for &o in &out.outputs {
                for (&t, &v) in run.times.iter().zip(scalar_series(run, o)) {
                    table.rows.push(vec![
                        field.name().to_string(),
                        num(*value),
                        run.generator.to_string(),
                        num(t),
                        o.name().to_string(),
                        num(v),
                    ]);
                }
            }
        }
    }
    table
}

/// Writes through a temporary file in the target directory and renames it
/// into place, so readers never see a partial file.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    let dir = path.parent().filter(|d| !d.as_os_str().is_empty()).unwrap_or(Path::new("."));
    std::fs::create_dir_all(dir)?;
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(bytes)?;
    tmp.as_file().sync_all()?;
    tmp.persist(path).map_err(|e| CliError::Io(e.to_string()))?;
    Ok(())
}

pub fn write_table(path: &Path, table: &Table) -> Result<(), CliError> {
    write_atomic(path, &table.to_csv()?)
}

/// `<out_dir>/<stem>_<suffix>.csv`
pub fn output_path(out_dir: &Path, scenario: &Path, suffix: &str) -> PathBuf {
    let stem = scenario
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "scenario".into());
    out_dir.join(format!("{stem}_{suffix}.csv"))
}
