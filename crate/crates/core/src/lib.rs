//! Balanced exchange markets on capacitated preference digraphs.
//!
//! Agents trade goods along directed cycles; each agent ranks the agents it
//! may receive from. The crate computes Pareto-optimal balanced exchanges
//! with a top-trading-cycles variant, recognizes and repairs exchanges that
//! are not Pareto optimal, and finds max-weight exchanges by exact LP.
//! All arithmetic is exact rational.

pub mod characterize;
pub mod concordant;
pub mod error;
pub mod exchange;
pub mod fixtures;
pub mod generate;
pub mod lp;
pub mod maxweight;
pub mod oracle;
pub mod preprocess;
pub mod rational;
pub mod recognize;
pub mod ttc;

mod instance;
mod residual;

pub use error::{Error, Result};
pub use exchange::{
    arc_flow, decompose_circulation, dominates, prefers, received_vector, validate, weight, ArcFlow, Cycle,
    Exchange, ReceivedVector, Violation, ViolationKind,
};
pub use instance::{AgentId, AgentSpec, ArcInfo, ArcKind, ExchangeArc, Instance, InstanceBuilder, Mode};
pub use rational::Rational;
