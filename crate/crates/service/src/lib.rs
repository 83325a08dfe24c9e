//! Service side of clinitime: configuration file, snapshot persistence,
//! the HTTP API with its change-event stream, and the `clinitime` CLI.

pub mod api;
pub mod cli;
pub mod config;
pub mod store;

pub use config::Config;
pub use store::{ChangeEvent, ChangeKind, IngestReceipt, Snapshot, Store, StoreError};
