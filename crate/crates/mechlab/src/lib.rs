//! mechlab is a numerical laboratory for multi-item auction competition
//! complexity: how many extra bidders a prior-independent simple mechanism
//! needs before it beats the optimal one-bidder revenue.
//!
//! The crate evaluates simple mechanisms and benchmarks (welfare, per-item
//! VCG, bundle second-price, separate and bundle Myerson pricing, the
//! quantile duality benchmark), computes the competition-complexity constant
//! C(n, alpha) with a verifiable certificate, and checks the surrounding
//! structural claims by closed form, adaptive quadrature, seeded Monte Carlo,
//! and exact enumeration. Quantile space is the canonical coordinate
//! throughout: expectations integrate F^{-1}(q) against polynomial weights on
//! [0, 1], which keeps heavy-tailed families tractable.

pub mod competition;
pub mod distributions;
mod error;
pub mod mechanisms;
pub mod order_stats;
pub mod quadrature;
pub mod quantile_game;
pub mod sampling;
pub mod suites;

pub use error::{Error, Result};
