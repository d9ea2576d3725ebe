//! Piecewise-constant fields with values in a finite label set, and the
//! lower-semicontinuity theory of surface energies on them.
//!
//! A field `u` is stored as a partition of an interval or a polygonal
//! domain with one label per cell. From it the crate computes the jump set,
//! the total variation `|Du|(Ω)`, L¹ distances between fields, surface
//! energies `F(u) = ∫_{S_u} g(x, u⁺, u⁻, ν) dH^{d−1}`, the lifting measure of
//! the field and the cut-off integrands `f_δ` built on the simplex embedding
//! of the labels.
//!
//! The `examples/` directory has one runnable program per capability:
//!
//! * `remark_counterexample` – strict convergence without convergence of the energy
//! * `embedding_cutoffs` – the simplex embedding, segment cores and `f_δ`
//! * `surface_energy` – built-in and polynomial integrands, symmetry probing
//! * `lifting_identities` – the lifting measure and its two identities
//! * `convergence_sweep` – every sequence family through the harness
//! * `sawtooth_necessity` – what goes wrong when the jump-set measure does not converge
//! * `partition_io` – reading, validating and writing partition files
//!
//! The `caccioppoli` binary runs the same machinery from JSON scenario files.

pub mod error;
pub mod functional;
pub mod labels;
pub mod lifting;
pub mod partition;
pub mod quadrature;
pub mod random;
pub mod scenario;
pub mod sequences;

pub use error::{Error, Result};
pub use functional::{evaluate_functional, SurfaceIntegrand};
pub use labels::{CutoffProfile, FDelta, LabelSet};
pub use lifting::LiftingMeasure;
pub use partition::{Partition, Partition1D, Partition2D};
pub use quadrature::QuadratureSpec;
pub use sequences::{run_convergence_experiment, SequenceFamily};
