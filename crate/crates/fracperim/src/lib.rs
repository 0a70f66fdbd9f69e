//! Numerical toolkit for fractional (nonlocal) perimeters of convex bodies and
//! nearly spherical sets: s-perimeter estimators, isoperimetric deficits,
//! barycentric and Fraenkel asymmetries, and executable checks for the
//! quantitative isoperimetric inequalities these quantities satisfy.
//!
//! The crate is `no_std` (with `alloc`); all floating-point math goes through
//! `libm`, so results are bit-reproducible across platforms. IO, file formats
//! and the command-line driver live in the companion crate `fracperim-cli`.

#![no_std]
#![deny(unsafe_code)]

extern crate alloc;

pub mod asymmetry;
pub mod error;
pub mod experiments;
pub mod geometry;
pub mod math;
pub mod optim;
pub mod perimeter;
pub mod sampling;
pub mod spherical;
pub mod twoball;
pub mod verify;

pub use error::{Error, Result};
pub use geometry::ConvexBody;
pub use math::Vector;
pub use perimeter::{EvaluableSet, McConfig, Method, PerimeterEstimate, StrataConfig};
pub use spherical::{NearlySphericalSet, SphereGrid};
