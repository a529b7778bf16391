//! Structure-aware, stateful fuzzing of BGP router configurations.
//!
//! The pipeline: parse Cisco-style configuration text into a grammar
//! derivation tree ([`parse`], [`tree`]), mutate it under the grammar or
//! with a byte-level baseline ([`mutate`]), deploy to a deterministic
//! eBGP simulator ([`sim`], [`forward`]), and evaluate runtime oracles
//! against the converged baseline ([`oracle`]). The fuzzing loop
//! ([`fuzz`]) tracks a three-state machine with automatic recovery;
//! campaigns ([`campaign`]) run budgeted trials and archive findings as
//! replayable directories.

pub mod campaign;
pub mod config;
pub mod event;
pub mod forward;
pub mod fuzz;
pub mod mutate;
pub mod oracle;
pub mod parse;
pub mod prefix;
pub mod rib;
pub mod sim;
pub mod topology;
pub mod tree;
pub mod util;

pub use config::RouterConfig;
pub use parse::{parse_config, ParseError};
pub use prefix::Prefix;
pub use sim::Network;
pub use topology::Topology;
