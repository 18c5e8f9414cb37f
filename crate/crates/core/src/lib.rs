//! Area-preserving maps of the 2-torus built from exactly symplectic
//! generators, with their flux and action invariants, the disk-twist and
//! band-shear perturbation families, and a Newton search for periodic orbits
//! that drives the closing scan.

pub mod bump;
pub mod error;
pub mod generator;
pub mod geometry;
pub mod invariants;
pub mod map;
pub mod orbits;
pub mod perturb;
pub mod quadrature;

pub use bump::BumpProfile;
pub use error::{Error, Result};
pub use generator::{Band, Disk, DiskTwist, Generator, Shear};
pub use geometry::{project, torus_distance, Lattice, Mat2, Point2};
pub use map::TorusMap;
