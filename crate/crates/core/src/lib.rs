//! Fused neighbor sampling and mean aggregation for 1-2 hop GraphSAGE.
//!
//! The fused operators ([`ops::fused_1hop_forward`], [`ops::fused_2hop_forward`])
//! sample neighbors and accumulate their feature means in one pass, without
//! materializing sampled blocks or gathered feature copies. Sampling is
//! driven by deterministic per-root streams ([`rng::RngStream`]), and saved
//! indices let the backward replay the exact sampled sets.
//!
//! [`ops::baseline_forward`] is the conventional sample -> materialize ->
//! aggregate pipeline using the same sampler and streams; it is both the
//! correctness oracle and the performance comparator. [`train`] wraps
//! either variant in a complete training step and [`bench`] runs the
//! benchmark grid and summarizes its CSV output.

pub mod bench;
pub mod data;
pub mod error;
pub mod graph;
pub mod meter;
pub mod ops;
pub mod rng;
pub mod sampler;
pub mod scalar;
pub mod train;
pub mod verify;
pub mod workers;

pub use data::{DatasetSpec, FeatureMatrix, SeedBatch};
pub use error::{Error, Result};
pub use graph::{build_csr, CsrGraph};
pub use meter::MemoryMeter;
pub use rng::RngStream;
pub use scalar::Scalar;
pub use workers::Workers;
