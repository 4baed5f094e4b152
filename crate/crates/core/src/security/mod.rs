//! Security parameters and bounds for commitments against a dishonest
//! receiver with limited or noisy quantum memory.

pub mod conditions;
pub mod entropy;
pub mod optimize;
pub mod params;
pub mod region;
pub mod repro;
pub mod storage;

pub use conditions::{signals_required, SignalRequirement};
pub use params::{derive_params, required_distance, total_error, SecurityParams};
pub use region::{evaluate, security_region, Axis, AxisSpec, Region, RegionParams, SecurityVerdict};
pub use storage::{Erasures, StorageAssumption, StorageModel};
