//! Exact conformally equivariant quantization on flat `R^{p,q}`.

#![allow(clippy::needless_range_loop, clippy::result_large_err)]

pub mod algebra;
pub mod linalg;
pub mod poly;
pub mod symbol;
pub mod spectral;
pub mod sample;
pub mod quantizer;
pub mod curved;
pub mod io;
pub mod cli;
