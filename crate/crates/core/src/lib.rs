//! Copula representations of xor, probabilistic logic over Boolean
//! expressions, and small feedforward networks trained by backpropagation.
//!
//! The crate is organised bottom-up:
//!
//! * [`linalg`]: a tiny dense matrix kernel and the normal-equations solve.
//! * [`copula`]: Frank's associative copula family and the xor family built on it.
//! * [`problogic`]: Boolean expressions, sample spaces and compositional
//!   probability evaluation.
//! * [`network`]: bias-augmented feedforward networks, gradients and the
//!   linear layer collapse.
//! * [`datasets`]: the built-in tables, copula-synthesised sets, baseline
//!   candidate functions and CSV I/O.
//! * [`trainer`]: gradient descent, restart sweeps and classification of
//!   trained networks against the copula limit functions.
//! * [`surface`]: two-weight projections of the error surface.

pub mod copula;
pub mod datasets;
pub mod fmt;
pub mod linalg;
pub mod network;
pub mod problogic;
pub mod surface;
pub mod trainer;

pub use copula::{CopulaParam, UnitValue};
pub use datasets::{Dataset, Sample};
pub use linalg::Matrix;
pub use network::{Activation, Network, Topology};
pub use problogic::{BoolExpr, SampleSpace};
pub use surface::{SurfaceGrid, WeightCoord};
pub use trainer::{FunctionLabel, TrainConfig, TrainResult};
