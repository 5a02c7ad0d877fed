//! Quasi-stationary distributions and exact hitting-time laws for
//! reversible Markov chains, with the bounds comparing the hitting time of
//! a set from stationarity to the exponential law from quasi-stationarity.
//!
//! The pipeline is `graphs` → `chain` → `killed` → `laws` → `bounds`;
//! `montecarlo` simulates the same quantities and `suite` batches them.

// `!(x > 0.0)` is how NaN inputs get rejected.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bounds;
pub mod chain;
pub mod error;
pub mod graphs;
pub mod killed;
pub mod laws;
pub mod linalg;
pub mod montecarlo;
pub mod quadrature;
pub mod suite;
pub mod transient;

pub use bounds::{BoundReport, Tolerances, Verdict, VerdictKind};
pub use chain::ReversibleChain;
pub use error::{Error, Result};
pub use graphs::{Graph, GraphSpec, MetricProfile};
pub use killed::{KilledSpectrum, QuasiStationaryComponent, SetSpec, TargetSet};
pub use laws::HittingLaw;
