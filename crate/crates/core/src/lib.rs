//! Fast-decodable space-time block codes for 2×2 and 4×2 MIMO.
//!
//! This crate is the allocation-only core: code construction
//! ([`codebook`]), the Rayleigh block-fading model ([`channel`]), exact ML
//! detectors with complexity instrumentation ([`detector`]), the exhaustive
//! distance-spectrum engine ([`spectrum`]) and the design searches
//! ([`search`]). It is `no_std` and only needs `alloc`; threading, file
//! formats and the command line live in the `stbc` crate.
//!
//! ```
//! use stbc_core::codebook::{catalog, Constellation};
//! use stbc_core::spectrum::min_determinant;
//!
//! let golden = catalog::by_name("golden").unwrap();
//! let qam4 = Constellation::qam(4).unwrap();
//! let d = min_determinant(&golden, &qam4, 1 << 20).unwrap();
//! assert!((d - 3.2).abs() < 1e-9);
//! ```
#![no_std]
// Float methods come from `num_traits::Float` without std; with std in the
// dependency graph the inherent ones win and the imports go unused.

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod channel;
pub mod codebook;
pub mod detector;
mod error;
pub mod numerics;
pub mod par;
pub mod search;
pub mod spectrum;

pub use error::{Error, Result};
pub use num_complex::Complex64 as C64;
