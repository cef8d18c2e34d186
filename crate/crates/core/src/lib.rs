//! Service discovery simulation for mobile ad hoc networks where every node
//! mines frequent itemsets over the request sessions it has logged and
//! piggybacks predicted related services onto its discovery replies.
//!
//! The crate is organized bottom-up:
//!
//! - [`mining`]: FP-tree construction, FP-Growth, a brute-force reference
//!   miner and the related-service lookup used when building replies.
//! - [`sessionlog`]: the bounded circular log of request sessions each node mines.
//! - [`workload`]: the correlated request generator (correlation matrix,
//!   candidate sets, probabilistic sessions, per-consumer schedules).
//! - [`node`]: the FIFO service table, SREQ/SREP wire codec and the per-node
//!   protocol state machine.
//! - [`netsim`]: the deterministic discrete-event engine over a unit-disk topology.
//! - [`experiment`]: config parsing, paired seed sweeps, CSV and summary output.
//!
//! ```
//! use corrdisc::netsim::{run, SimConfig};
//!
//! let mut config = SimConfig::new(20, 10);
//! config.seed = 7;
//! config.sessions_per_consumer = 2;
//! let metrics = run(&config);
//! assert!(metrics.locally_satisfied <= metrics.requests_issued);
//! ```

pub mod experiment;
pub mod mining;
pub mod netsim;
pub mod node;
pub mod sessionlog;
pub mod workload;

mod ids;
mod time;

pub use ids::{NodeId, ServiceId};
pub use time::SimTime;
