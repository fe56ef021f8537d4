//! Luenberger observer driven by continuous measurements of a reference
//! trajectory, error bookkeeping and the Bellman-lemma trace diagnostic.

mod bellman;
mod twin;

pub use bellman::{bellman_diagnostic, log_decay_rate, BellmanReport, BellmanThresholds, BellmanWindow};
pub use twin::{
    observer_step, run_twin, run_twin_with, ErrorNorm, ErrorTrace, Observer, ObserverConfig,
    ERROR_TRACE_HEADER,
};
