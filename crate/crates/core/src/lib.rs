//! View synchronization for partially synchronous BFT protocols.
//!
//! Three synchronizers (view doubling, all-to-all broadcast and the
//! leader-relayed Cogsworth protocol) behind one [`sync::Synchronizer`]
//! trait, plus a deterministic discrete-event simulator, trace metrics and a
//! scenario harness.

pub mod cert;
pub mod config;
pub mod error;
pub mod harness;
pub mod leader;
pub mod metrics;
pub mod par;
pub mod sim;
pub mod sync;
pub mod time;
pub mod trace;
pub mod types;

pub use config::{AdversarySpec, Behavior, DelayMode, LeaderMapSpec, ScenarioConfig, Target};
pub use error::{ConfigError, Error, ParseError, Result};
pub use leader::LeaderMap;
pub use sync::SyncKind;
pub use time::Time;
pub use types::{Message, NodeId, View};
