//! Step-level training log: one line per optimizer step.

use std::path::Path;

use polyseq_tensor::io::atomic_write;

use crate::error::TrainError;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepRecord {
    pub step: u64,
    pub lr: f64,
    pub loss: f64,
}

/// Tab-separated `step lr loss` lines.
pub fn write_step_log(path: &Path, records: &[StepRecord]) -> Result<(), TrainError> {
    let mut text = String::with_capacity(records.len() * 32);
    for r in records {
        text.push_str(&format!("{}\t{}\t{}\n", r.step, r.lr, r.loss));
    }
    atomic_write(path, text.as_bytes())?;
    Ok(())
}
