//! Experiment drivers: band sweeps, payoff surfaces and deviation probes,
//! plus JSON/CSV plumbing for their results.
//!
//! Every driver is a pure function of its inputs. Work is spread over a
//! thread pool but results always come back in canonical order.

mod probe;
mod surface;
mod sweep;
mod table;

use std::path::Path;

use crate::error::Result;
use crate::netmodel::{NetworkInstance, NodeId, ScenarioConfig};

pub use probe::{
    deviation_probe, select_probe_agents, AgentRole, AgentSelector, DeviationReport, ProbeGrid, ProbePoint,
};
pub use surface::{payoff_surface, GridSpec, PayoffSurface, SurfaceCell};
pub use sweep::{run_band_sweep, MeansTable, SweepMean, SweepResult, SweepRow};
pub use table::{to_csv_string, write_csv, CsvTable};

/// Default number of trials per band count.
pub const DEFAULT_TRIALS: usize = 20;

/// Reads and validates a scenario config from a JSON file.
pub fn load_config(path: impl AsRef<Path>) -> Result<ScenarioConfig> {
    ScenarioConfig::load(path)
}

/// Lowest-id buyer with exactly two requests, if any.
pub fn designated_buyer(instance: &NetworkInstance) -> Option<NodeId> {
    instance
        .buyer_ids()
        .into_iter()
        .find(|&b| instance.requests.iter().filter(|r| r.buyer_id == b).count() == 2)
}
