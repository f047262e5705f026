//! Sparse CorEx topic modeling.
//!
//! Topics are binary latent factors chosen to explain as much of the total
//! correlation among binary word-occurrence variables as possible. The crate
//! covers the whole pipeline: corpus ingestion and binarization
//! ([`corpus`]), exact information-theoretic primitives used as oracles
//! ([`info`]), the fixed-point optimizer with its sparse posterior update
//! ([`model`]), anchor words ([`anchor`]), stacked hierarchies
//! ([`hierarchy`]), evaluation ([`metrics`]) and the on-disk model format
//! ([`store`]).

pub mod anchor;
pub mod corpus;
mod error;
pub mod hierarchy;
pub mod info;
pub mod metrics;
pub mod model;
pub mod store;
pub mod synthetic;

pub use anchor::{AnchorBinding, AnchorSpec, ResolvedAnchors};
pub use corpus::{Documents, SparseBinaryMatrix, Vocabulary};
pub use error::{Error, Result};
pub use model::{fit, AnnealSchedule, FittedModel, ModelConfig, PosteriorPath};
