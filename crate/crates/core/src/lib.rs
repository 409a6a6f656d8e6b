//! Mesh-free PDE solving with approximate distance fields and neural networks.
//!
//! The crate builds smooth approximate distance fields (ADFs) to domain
//! boundaries from R-function joins or mean-value potentials, composes them
//! with boundary data and a small MLP into trial functions that satisfy the
//! prescribed boundary conditions identically, and trains the network by
//! collocation or Ritz energy minimization.

pub mod autodiff;
pub mod error;
pub mod field;
pub mod geometry;
pub mod jet;
pub mod net;
pub mod sample;
pub mod scalar;
pub mod solver;
pub mod structures;
pub mod tape;

pub use error::{AutodiffError, GeometryError, NetError, SolverError};
pub use field::Field;
pub use geometry::{AdfConfig, AdfMethod, ParametricCurve, Point, Polygon, Segment};
pub use jet::{Jet, Jet2, Jet3, Jet4, Jet5};
pub use net::{Activation, AdamState, Mlp, Network, RbfNet};
pub use scalar::Scalar;
pub use structures::{Ansatz, BoundaryPiece, PieceKind};
pub use tape::{param_gradient, Var};
