//! Core algorithms for synthetic icon-detection datasets: window sampling and
//! icon compositing, multi-scale tiling, proposal aggregation, detection
//! metrics, and text/tag summarization models.
//!
//! The crate is `no_std` (alloc required); file formats, codecs and the CLI
//! live in the companion `iconforge` crate.

#![no_std]
#![deny(unsafe_code)]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod aggregate;
pub mod error;
pub mod eval;
pub mod geometry;
pub mod imaging;
pub mod proposals;
pub mod summarize;
pub mod synthgen;
pub mod tiler;

pub use error::{Error, Result};
pub use geometry::{BBox, PixelRect};
