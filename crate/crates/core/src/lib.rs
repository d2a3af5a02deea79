//! Retina-inspired motion prediction.
//!
//! DVS event emulation from grayscale frames, an algorithmic retina with
//! gap-junction coupling, a functional model of the digital prediction
//! array, AER readout and a closed-form energy comparison.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod aer;
pub mod cli;
pub mod config;
pub mod digital;
pub mod energy;
pub mod error;
pub mod grid;
pub mod io;
pub mod retina;
pub mod stimulus;

pub use error::{Error, Result};
pub use grid::Grid;
