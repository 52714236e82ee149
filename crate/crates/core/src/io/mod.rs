//! Configuration, field dumps and the scenario runner.

pub mod config;
pub mod dump;
pub mod run;

pub use config::{load_config, parse_config, RunConfig, ScenarioKind};
pub use dump::{decode_dump, encode_dump, read_dump, sha256_hex, write_dump};
pub use run::{provenance, resolve_scenario, run_scenario, Provenance, RunSummary};
