//! Synthesis and inversion of phaseless near-field acoustic scattering data.
//!
//! The crate models a 2D time-harmonic scene (a sound-soft, sound-hard or
//! impedance obstacle excited by a handful of point sources), generates the
//! modulus-only measurements on a receiver ring together with the data
//! obtained after superposing scaled reference sources, and reconstructs
//! both the sources and the obstacle from those moduli alone.
//!
//! Modules, bottom-up:
//!
//! - [`specialfn`]: Hankel functions of orders 0/1 and the fundamental solution.
//! - [`geometry`]: parametric boundaries, sensor rings and sampling grids.
//! - [`forward`]: Nyström boundary-integral solver for the exterior problem.
//! - [`acquisition`]: phaseless datasets, the noise model and the dataset file format.
//! - [`inversion`]: modulus decoupling, the obstacle and source indicators, peak extraction.
//! - [`export`]: CSV and PGM writers for indicator grids and peak tables.
//! - [`metrics`]: scoring helpers comparing reconstructions against a known scene.
//!
//! ```
//! use coinv::acquisition::{add_noise, synthesize, AcquisitionGeometry};
//! use coinv::forward::{BoundaryCondition, Discretization, Obstacle, Scene};
//! use coinv::geometry::{ParametricCurve, Ring, SamplingGrid};
//! use coinv::inversion::{default_min_sep, extract_peaks, indicator_source, normalize, DEFAULT_TAU};
//! use coinv::Point;
//!
//! let disk = ParametricCurve::circle(Point::ORIGIN, 1.0)?;
//! let scene = Scene::new(10.0, vec![Obstacle::new(disk, BoundaryCondition::SoundSoft)], vec![Point::new(3.0, 1.0)])?;
//! let geom = AcquisitionGeometry::new(Ring::full(10.0, 64)?, Ring::full(9.0, 64)?, 1.0)?;
//! let data = add_noise(&synthesize(&scene, &geom, &Discretization::default_for(&scene))?, 0.05, 1)?;
//! let image = normalize(&indicator_source(&data, &SamplingGrid::square(5.0, 101)?)?);
//! let peaks = extract_peaks(&image, DEFAULT_TAU, default_min_sep(scene.k));
//! assert!(peaks.peaks[0].point.distance(Point::new(3.0, 1.0)) < 0.2);
//! # Ok::<(), coinv::Error>(())
//! ```

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod acquisition;
pub mod error;
pub mod export;
pub mod forward;
pub mod geometry;
pub mod inversion;
pub mod metrics;
pub mod point;
pub mod specialfn;

pub use error::{Error, Result};
pub use num_complex::Complex64;
pub use point::Point;
