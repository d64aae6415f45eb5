//! Parameter-space experiments: verdicts, parapuzzle windows and sweeps.

mod classify;
mod sweep;
mod window;

use thiserror::Error;

use crate::nest::NestError;

pub use classify::{classify_parameter, Classification, Evidence, ParamBudgets, Verdict};
pub use sweep::{csv_record, sweep, write_sweep_csv, Histogram, SweepConfig, SweepSummary, CSV_HEADER};
pub use window::{
    branch_windows, critical_combinatorics, locate_window, phase_parameter_report, ratio_rows, Combinatorics,
    ParameterWindow, PhaseParameterReport, RatioRow, WindowConfig, WindowFamily, WindowKind,
};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ParamError {
    #[error("combinatorics not realized: {0}")]
    CombinatoricsUnstable(String),
    #[error("probe budget of {0} exhausted")]
    BudgetExceeded(usize),
    #[error("need at least {needed} windows, have {have}")]
    InsufficientWindows { needed: usize, have: usize },
    #[error("parameter {0} outside [-1/4, 2]")]
    OutOfRange(String),
    #[error(transparent)]
    Nest(#[from] NestError),
}
