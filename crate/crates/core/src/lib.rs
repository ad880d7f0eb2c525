//! Resource allocation for multi-user OFDM-DCSK with reference averaging.

pub mod analytic;
pub mod cardano;
pub mod chaos;
pub mod cli;
pub mod dinkelbach;
pub mod error;
pub mod model;
pub mod simulator;

pub use error::{Error, Result};
pub use model::{Allocation, PowerAlloc, SubcarrierAlloc, SystemParams};
