//! Group averaging operators, generalisation-gap simulations and equivariant
//! layer tools for compact (finite or quadrature) groups.

pub mod acceptance;
pub mod averaging;
pub mod error;
pub mod group;
pub mod kernel;
pub mod layers;
pub mod linalg;
pub mod linear_gap;
pub mod orbit;
pub mod report;
pub mod stats;

pub use acceptance::{CriterionOutcome, Scale};
pub use averaging::{build_phi, build_psi, IntertwinerTensor, ProjectionMatrix};
pub use error::{Error, Result};
pub use group::{build_group, FiniteGroup, GroupDescriptor, RepDescriptor, Representation};
pub use kernel::{BaseKernel, KernelSpec};
pub use layers::{Activation, LayerSpec};
pub use linear_gap::{GapReport, LinearGapConfig};
pub use report::ResultRow;
pub use stats::{Estimate, InputDistribution, Verdict};
