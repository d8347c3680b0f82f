//! The acceptance grid as a CLI suite.

use std::time::Duration;

use symlab_core::acceptance::{run_criterion, Scale, CRITERIA};
use symlab_core::report::ResultRow;
use symlab_core::stats::Verdict;

use crate::config::hash_hex;
use crate::dispatch::ExperimentResult;

pub fn run_suite(scale: Scale) -> Vec<ExperimentResult> {
    CRITERIA
        .iter()
        .map(|&(id, _, _)| {
            let kind = format!("criterion-{id}");
            let hash = hash_hex(&format!("suite:{}:{id}", scale.as_str()));
            match run_criterion(id, scale) {
                Ok(outcome) => {
                    let mut notes = outcome.notes.clone();
                    if !outcome.within_budget() {
                        notes.push(format!("over time budget: {:.1}s > {}s", outcome.wall_time.as_secs_f64(), outcome.budget.as_secs()));
                    }
                    notes.insert(0, outcome.title.to_owned());
                    let seed = outcome.rows.first().map_or(0, |r| r.seed);
                    ExperimentResult::new(kind, hash, seed, outcome.rows, notes, outcome.wall_time)
                }
                Err(e) => ExperimentResult::new(kind.clone(), hash, 0, vec![ResultRow::new(&kind, "error", 0, Verdict::Fail)], vec![e.to_string()], Duration::ZERO),
            }
        })
        .collect()
}
