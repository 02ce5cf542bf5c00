//! Periodically driven two-band chain: Floquet operators, winding numbers,
//! quench-based detection of the invariants, open-chain edge modes and pulse
//! schedules.

pub mod error;
pub mod lattice;
pub mod model;
pub mod pulsegen;
pub mod quench;
pub mod spinalg;
pub mod topology;

pub use error::{Error, Result};
pub use model::{Frame, ModelParams};
