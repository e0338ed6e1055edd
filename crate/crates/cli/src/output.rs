//! Grid output files with frozen schemas: runs.csv (one row per run),
//! cells.csv (one row per cell) and report.json (machine-readable mirror of
//! cells.csv plus the spec echo and tool version). Identical invocations
//! produce byte-identical files.

use std::fmt::Write as _;
use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use serde::Serialize;

use rtslab_core::experiments::{CellOutcome, Report};

pub const RUNS_HEADER: &str = "protocol,algorithm,policy,distance,n,mu,w,run_index,seed,status,\
                               generations,lone,best_branch0,best_branch1,min_branch_best";
pub const CELLS_HEADER: &str = "protocol,algorithm,policy,distance,n,mu,w,runs,success_count,\
                                mean_generations,std_generations,lone_count,\
                                mean_min_branch_best,std_min_branch_best";

fn prefix(report: &Report, mu: usize, w: usize) -> String {
    let spec = &report.spec;
    format!(
        "{},rts,{},{},{},{},{}",
        spec.protocol.token(),
        spec.policy.token(),
        spec.distance.token(),
        spec.n,
        mu,
        w
    )
}

pub fn runs_csv(report: &Report) -> String {
    let mut out = String::new();
    out.push_str(RUNS_HEADER);
    out.push('\n');
    for cell in &report.cells {
        let CellOutcome::Completed(cell) = cell else {
            // failed cells carry no complete run set; they appear in
            // report.json with their diagnostic
            continue;
        };
        let prefix = prefix(report, cell.key.mu, cell.key.w);
        for record in &cell.records {
            let r = &record.result;
            writeln!(
                out,
                "{prefix},{},{},{},{},{},{},{},{}",
                record.run_index,
                record.seed,
                r.status.token(),
                r.generations,
                u8::from(r.lone_occurred),
                r.best_branch0,
                r.best_branch1,
                r.min_branch_best()
            )
            .unwrap();
        }
    }
    out
}

pub fn cells_csv(report: &Report) -> String {
    let mut out = String::new();
    out.push_str(CELLS_HEADER);
    out.push('\n');
    for cell in &report.cells {
        let CellOutcome::Completed(cell) = cell else {
            continue;
        };
        writeln!(
            out,
            "{},{},{},{},{},{},{},{}",
            prefix(report, cell.key.mu, cell.key.w),
            cell.runs,
            cell.success_count,
            cell.mean_generations,
            cell.std_generations,
            cell.lone_count,
            cell.mean_min_branch_best,
            cell.std_min_branch_best
        )
        .unwrap();
    }
    out
}

#[derive(Serialize)]
struct ToolInfo {
    name: &'static str,
    version: &'static str,
}

#[derive(Serialize)]
struct JsonReport<'a> {
    tool: ToolInfo,
    spec: &'a rtslab_core::experiments::ExperimentSpec,
    cells: &'a [CellOutcome],
}

pub fn report_json(report: &Report) -> String {
    let doc = JsonReport {
        tool: ToolInfo {
            name: "rtslab",
            version: env!("CARGO_PKG_VERSION"),
        },
        spec: &report.spec,
        cells: &report.cells,
    };
    let mut text = serde_json::to_string_pretty(&doc).expect("report serialization");
    text.push('\n');
    text
}

/// Write all three artifacts into `dir`, creating it when needed.
pub fn write_outputs(dir: &Path, report: &Report) -> io::Result<[PathBuf; 3]> {
    fs::create_dir_all(dir)?;
    let runs = dir.join("runs.csv");
    let cells = dir.join("cells.csv");
    let json = dir.join("report.json");
    fs::write(&runs, runs_csv(report))?;
    fs::write(&cells, cells_csv(report))?;
    fs::write(&json, report_json(report))?;
    Ok([runs, cells, json])
}
