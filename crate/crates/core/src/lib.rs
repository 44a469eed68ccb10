//! Deciders for information-flow security of finite synchronous machines
//! with two agents, H (high) and L (low).
//!
//! Three properties are checked: nondeducibility on inputs ([`ndi`]),
//! nondeducibility on strategies ([`nds`]) and restrictiveness via
//! synchronous unwinding ([`res`]). Violations come with witnesses that can
//! be replayed independently of the search that found them.

pub mod error;
pub mod fixtures;
pub mod format;
pub mod model;
pub mod ndi;
pub mod nds;
pub mod oracle;
pub mod random;
pub mod reductions;
pub mod res;
pub mod stateset;

pub use error::{ModelError, ResourceExceeded, WitnessError};
pub use model::{AgentId, Machine, MachineDef, Run, ValidationReport, View};
pub use stateset::StateSet;
