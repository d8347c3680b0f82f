//! Result tables: versioned CSV, a JSON mirror and the console summary.

use std::fs;
use std::path::Path;

use serde::Serialize;

use symlab_core::report::COLUMNS;
use symlab_core::stats::Verdict;

use crate::dispatch::ExperimentResult;
use crate::error::CliError;

pub const CSV_VERSION_LINE: &str = "# symlab-csv v1";

#[derive(Debug, Clone, Serialize)]
pub struct RunSummary {
    pub schema: &'static str,
    pub tool_version: &'static str,
    pub verdict: Verdict,
    pub experiments: Vec<ExperimentResult>,
}

impl RunSummary {
    pub fn new(experiments: Vec<ExperimentResult>) -> Self {
        let verdict = Verdict::from_bool(experiments.iter().all(|e| e.verdict.passed()));
        Self { schema: "symlab-results v1", tool_version: env!("CARGO_PKG_VERSION"), verdict, experiments }
    }

    pub fn exit_code(&self) -> i32 {
        if self.verdict.passed() {
            0
        } else {
            1
        }
    }
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> CliError + '_ {
    move |source| CliError::Output { path: path.display().to_string(), source }
}

pub fn csv_string(summary: &RunSummary) -> Result<String, CliError> {
    let mut writer = csv::WriterBuilder::new().from_writer(Vec::new());
    let csv_err = |e: csv::Error| CliError::Output { path: "results.csv".into(), source: std::io::Error::other(e) };
    let mut header: Vec<&str> = COLUMNS.to_vec();
    header.push("config_hash");
    writer.write_record(&header).map_err(csv_err)?;
    for exp in &summary.experiments {
        for row in &exp.rows {
            let mut cells = row.cells();
            cells.push(exp.config_hash.clone());
            writer.write_record(&cells).map_err(csv_err)?;
        }
    }
    let body = writer.into_inner().map_err(|e| CliError::Output { path: "results.csv".into(), source: std::io::Error::other(e.to_string()) })?;
    Ok(format!("{CSV_VERSION_LINE}\n{}", String::from_utf8_lossy(&body)))
}

/// Writes `results.csv` and `results.json` into `dir`.
pub fn write_results(dir: &Path, summary: &RunSummary) -> Result<(), CliError> {
    fs::create_dir_all(dir).map_err(io_err(dir))?;
    let csv_path = dir.join("results.csv");
    fs::write(&csv_path, csv_string(summary)?).map_err(io_err(&csv_path))?;
    let json_path = dir.join("results.json");
    let json = serde_json::to_string_pretty(summary).map_err(|e| CliError::Output { path: json_path.display().to_string(), source: e.into() })?;
    fs::write(&json_path, json + "\n").map_err(io_err(&json_path))?;
    Ok(())
}

pub fn print_summary(summary: &RunSummary) {
    for exp in &summary.experiments {
        println!(
            "[{}] {} (config {}, seed {}): {} rows in {:.2}s",
            exp.verdict.as_str().to_uppercase(),
            exp.kind,
            exp.config_hash,
            exp.seed,
            exp.rows.len(),
            exp.wall_time.as_secs_f64()
        );
        for row in exp.rows.iter().filter(|r| !r.verdict.passed()) {
            println!("    failing row: {}", row.label);
        }
        for note in &exp.notes {
            println!("    {note}");
        }
    }
    println!("overall: {}", summary.verdict.as_str().to_uppercase());
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::time::Duration;
    use symlab_core::report::ResultRow;

    #[test]
    fn csv_has_version_line_and_hash_column() {
        let row = ResultRow::check("covering", "eps=0.5", 3.0, 2.0, true, 9);
        let exp = ExperimentResult::new("covering".into(), "abcd".into(), 9, vec![row], vec![], Duration::ZERO);
        let text = csv_string(&RunSummary::new(vec![exp])).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next(), Some(CSV_VERSION_LINE));
        assert!(lines.next().unwrap().ends_with("seed,verdict,config_hash"));
        assert_eq!(lines.next(), Some("covering,eps=0.5,,,,,,,,,3.0,,2.0,,,,,,9,pass,abcd"));
    }
}
