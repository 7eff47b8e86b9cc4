//! Construction kit and verifier for equivariant feed-forward networks over
//! finite matrix groups.
//!
//! The pieces, bottom up:
//!
//! * [`numerics`]: dense matrices, nullspaces, Gram-Schmidt.
//! * [`group`]: finite groups closed from generator matrices.
//! * [`rep`]: representations given by generator images.
//! * [`intertwiner`]: equivariant weight spaces and a character oracle for
//!   their dimension.
//! * [`activation`]: pointwise nonlinearities and their compatibility with a
//!   representation.
//! * [`structured`]: Toeplitz, BTTB and circulant weights.
//! * [`network`]: networks in intertwiner coordinates, with training.
//! * [`tasks`]: center of mass, image decoloring, Slater determinants.

pub mod activation;
pub mod error;
pub mod group;
pub mod intertwiner;
pub mod network;
pub mod numerics;
pub mod rep;
pub mod report;
pub mod rng;
pub mod structured;
pub mod tasks;

pub use activation::ActivationSpec;
pub use error::{Error, Result};
pub use group::{FiniteGroup, NamedGroup};
pub use intertwiner::{hom_dim_oracle, solve_basis, IntertwinerBasis};
pub use network::{BiasSpace, Dataset, EquivariantNetwork};
pub use numerics::Matrix;
pub use rep::{RepSpec, Representation};
pub use report::{Report, Witness};
