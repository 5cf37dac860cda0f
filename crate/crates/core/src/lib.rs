//! Networks built on the elementary universal activation σ: exact gadgets,
//! dense point fitting, constructive approximators in one and several
//! dimensions, classifiers, smooth and sigmoidal variants, and training.

// `!(x > 0.0)` is the NaN-rejecting form used throughout parameter validation.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::type_complexity)]

pub mod activation;
pub mod approx1d;
pub mod approxnd;
pub mod autodiff;
pub mod builtins;
pub mod classify;
pub mod cli;
pub mod gadgets;
pub mod network;
pub mod pointfit;
pub mod sampling;
pub mod uaf_variants;

pub use activation::ActivationKind;
pub use network::{AffineLayer, Branch, Domain, Network, NetworkError};
