//! Simulation core for the silicon G center metastable spin triplet.
//!
//! Units throughout: MHz for frequencies, mT for fields, µs for times
//! (microwave pulse lengths in ns where noted), µW for optical power.
//! The crate is `no_std` and only needs an allocator.
#![no_std]
#![cfg_attr(test, allow(unused_imports))]

extern crate alloc;

pub mod coherence;
pub mod error;
pub mod fitting;
pub mod linalg;
pub mod photodynamics;
pub mod sequencer;
pub mod spin_model;

pub use error::{Error, Result};
