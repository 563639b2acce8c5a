//! Adder-tree extraction: cuts, NPN matching, HA/FA detection and weight
//! propagation.

pub mod cuts;
pub mod detect;
pub mod npn;
pub mod weights;

pub use cuts::{enumerate_cuts, Cut, CutSet};
pub use detect::{detect_adders, AdderInstance, AdderKind};
pub use weights::{propagate_weights, signature_weights, WeightError, WeightMap};
