//! Trust-region methods for regularized binary classification, with
//! low-fidelity corrective steps computed in a reduced feature space.
//!
//! Three methods share one driver ([`driver::minimize`]):
//!
//! * classical trust region (`Method::Tr`);
//! * a sketched variant (`Method::Str`) that projects the features with a
//!   fresh Gaussian sketch every iteration;
//! * an SVD variant (`Method::Svdtr`) that projects onto the leading left
//!   singular vectors of the data matrix, computed once.
//!
//! In both reduced variants the corrective step is only kept when it strictly
//! lowers the full objective, and step acceptance uses a composite ratio
//! that credits the extra decrease.
//!
//! See the programs under `examples/` for one walkthrough per capability.

pub mod dataset;
pub mod driver;
mod error;
pub mod harness;
pub mod loss;
pub mod projection;
pub mod subproblem;
pub mod svd;

pub use dataset::{parse_libsvm, read_libsvm, reduce_features, serialize_libsvm, Dataset};
pub use driver::{
    composite_rho, low_fidelity_correction, minimize, AlphaStrategy, FullSolver, IterationRecord,
    Method, Outcome, Status, TrustRegionConfig,
};
pub use error::{Error, Result};
pub use loss::{LossKind, LossModel};
pub use projection::{Projection, ProjectionKind};
pub use subproblem::{cauchy_point, steihaug_cg, LinearOperator, SubproblemResult, Termination};
