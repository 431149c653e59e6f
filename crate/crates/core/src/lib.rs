//! Switched 2D Roesser systems with interval state delays, norm-bounded uncertainty and
//! actuator faults: simulation, Lyapunov–Krasovskii certificates, LMI assembly and
//! state-feedback synthesis.

pub mod cli;
pub mod config;
pub mod error;
pub mod lmi;
pub mod lyapunov;
pub mod matrixcore;
pub mod model;
pub mod simulator;
pub mod synthesis;

pub use error::{Error, InfeasibleReason, Result};
