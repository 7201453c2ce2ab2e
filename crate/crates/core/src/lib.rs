//! Texture-based image scoring built on gray-level co-occurrence matrices.
//!
//! The pipeline runs in stages: quantize a grayscale image to a small number
//! of gray levels, count pixel-pair transitions under one or more spatial
//! relationships ([`glcm`]), restrict the co-occurrence entries to a feature
//! mask learned from representative patches ([`mask`]), and feed the masked
//! entries to a bagged CART ensemble ([`forest`]). On top of that sit salient
//! pixel back-projection ([`salience`]), margin-based co-training over split
//! feature sets ([`cotrain`]), a Gaussian-mixture separation analyzer
//! ([`theory`]), and a deterministic synthetic corpus generator ([`synth`]).
//!
//! Numeric kernels are generic over the scalar type via [`Scalar`]; the
//! concrete aliases below fix `f64` as the default used by the CLI and the
//! on-disk formats.

pub mod cotrain;
pub mod error;
pub mod forest;
pub mod glcm;
pub mod linalg;
pub mod mask;
pub mod raster;
pub mod rng;
pub mod salience;
pub mod scalar;
pub mod synth;
pub mod tables;
pub mod theory;

pub use error::{Error, Result};
pub use scalar::Scalar;

/// Scalar type used by the command-line tools and all file formats.
pub type Real = f64;

/// Labeled feature matrix over [`Real`].
pub type RealDataset = forest::Dataset<Real>;
/// Trained ensemble over [`Real`] features.
pub type RealForest = forest::Forest<Real>;
/// Dense square matrix over [`Real`].
pub type RealMat = linalg::SquareMat<Real>;
/// Gaussian mixture description over [`Real`].
pub type RealMixture = theory::MixtureSpec<Real>;
