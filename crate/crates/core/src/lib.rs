//! Semiclassical edge-state spectra of the magnetic Robin Laplacian in planar
//! domains: half-line dispersion curves, the effective boundary operator and
//! its quantisations, and an exact disk solver to compare against.

pub mod degennes;
pub mod diskmode;
pub mod effective;
pub mod error;
pub mod geometry;
pub mod numerics;

pub use error::{Error, Result};

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/half-line.md")]
    pub struct HalfLine;

    #[doc = include_str!("../../../book/src/geometry.md")]
    pub struct Geometry;

    #[doc = include_str!("../../../book/src/effective.md")]
    pub struct Effective;

    #[doc = include_str!("../../../book/src/disk.md")]
    pub struct Disk;

    #[doc = include_str!("../../../book/src/cli.md")]
    pub struct Cli;

    #[doc = include_str!("../../../README.md")]
    pub struct Readme;
}
