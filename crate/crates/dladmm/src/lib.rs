//! Linearized ADMM for the constrained problem
//! min lambda*|Z|_1 + |E|_1 s.t. X = A Z + E, together with its trainable
//! unrolled variant: a K-layer network whose per-layer weight, step and
//! penalty parameters are learned by SGD through hand-derived gradients.
//! Includes convergence diagnostics (KKT residuals, contraction checks,
//! error-bound ratios), synthetic data generation, and patch-based image
//! denoising.

pub mod data;
pub mod diagnostics;
pub mod error;
pub mod ladmm;
pub mod matrix;
pub mod model;
pub mod network;
pub mod prox;
pub mod train;

pub use error::{Error, Result};
pub use matrix::Matrix;
pub use model::{IterateState, LayerParams, ProblemInstance};
pub use network::Network;
