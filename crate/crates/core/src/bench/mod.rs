//! Experiment harness: TOML experiment files, replicated runs on a worker
//! pool, MSE against reference values, and CSV export.

mod mse;
pub mod quadrature;
mod records;
mod runner;
mod spec;

pub use mse::{compute_mse, group_by_point, MseReport};
pub use records::{export_csv, format_float, header, parse_csv, read_csv, write_csv, ResultRecord};
pub use runner::{run_experiment, run_replication};
pub use spec::{AdaptationChoice, ExperimentSpec, ReferenceSource, Scale, SchemeChoice, SweepPoint};
