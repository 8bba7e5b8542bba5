//! Classical simulation and optimization of quantum partial search over a
//! database with several target blocks and several target items per block.

pub mod asymptotic;
pub mod config;
pub mod error;
pub mod record;
pub mod reduced3d;
pub mod statevector;
pub mod surephase;
pub mod sweep;

pub use config::{Angles, SearchGeometry};
pub use error::{Error, Result};
pub use reduced3d::{PhaseIntermediates, ReducedState};
pub use statevector::{FullState, Step3Ordering, TargetPlacement};

/// Crate version, stamped into every run record.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
