//! Full-reference image quality assessment with the QGL feature: the
//! quadratic sum of divisively normalized gradient-magnitude and
//! Laplacian-of-Gaussian responses.
//!
//! * [`filters`] builds the sampled kernels and convolves with mirrored borders.
//! * [`qgl`] computes features, similarity maps and the mQGL / sQGL scores.
//! * [`edge_analysis`] evaluates the closed-form 1-D step-edge theory.
//! * [`stats`] provides SROCC, PSNR and weighted averaging.
//! * [`bench`] runs database evaluations and translation experiments.
//!
//! ```
//! use qgl_core::{score_pair, synthetic, QglConfig};
//!
//! let reference = synthetic::natural_image(64, 64, 1).unwrap();
//! let noisy = synthetic::add_gaussian_noise(&reference, 10.0, 7).unwrap();
//! let scores = score_pair(&reference, &noisy, &QglConfig::default()).unwrap();
//! assert!(scores.mqgl < 1.0 && scores.sqgl > 0.0);
//! ```

pub mod bench;
pub mod edge_analysis;
mod error;
pub mod filters;
mod plane;
pub mod qgl;
pub mod stats;
pub mod synthetic;

pub use error::{Error, Result};
pub use filters::{Boundary, Kernel2D};
pub use plane::{GrayImage, Plane};
pub use qgl::{score_pair, FeaturePair, QglConfig, QglScores};
