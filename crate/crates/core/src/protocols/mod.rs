//! Benchmarking protocols: randomized/interleaved benchmarking, the
//! deterministic pulse-pair protocol, direct fidelity estimation, process
//! fidelity estimation, and cross-entropy benchmarking of random circuits.

pub mod clifford;
pub mod db;
pub mod dfe;
pub mod pfe;
pub mod rb;
pub mod xeb;

pub use clifford::{CliffordGroup1Q, Primitive};
pub use db::{
    db_fit_records, db_run, db_sequence_preference, db_temperature, learning_sequences,
    DbConfig, DbResult,
};
pub use dfe::{dfe_process, dfe_state, DfePlan, DfeProcessResult, DfeStateResult};
pub use pfe::{pfe_exact, pfe_run, PfeResult};
pub use rb::{
    default_depths, depolarizing_map, irb_run, rb_first_order_model, rb_run, ChannelOracle,
    CliffordOracle, IrbResult, PulseOracle, RbResult,
};
pub use xeb::{rcs_benchmark, xeb_estimators, RcsConfig, XebEstimates, XebResult};
