//! Inverse scattering, long-time asymptotics and a reference spectral solver
//! for the elastic beam equation `q_t = (q_xx (1 + q_x²)^{-3/2})_x`.

#![allow(clippy::neg_cmp_op_on_partial_ord)] // `!(x > 0.0)` also rejects NaN

pub mod asymptotics;
pub mod cli;
pub mod config;
pub mod deltafn;
pub mod error;
pub mod numerics;
pub mod pcmodel;
pub mod pdesolver;
pub mod phase;
pub mod profile;
pub mod scattering;

pub use error::{EbError, Result};
