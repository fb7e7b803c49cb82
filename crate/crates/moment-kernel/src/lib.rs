//! High-precision spectral analysis of multidimensional moment sequences.
//!
//! This crate turns a moment multisequence `s_α` into computable evidence
//! about the underlying measure: truncated Hankel matrices and their
//! smallest-eigenvalue sequences across dilation scalings, orthonormal
//! polynomial bases, reproducing-kernel partial sums, the spectral duality
//! between a Hankel truncation and the torus Gram matrix of its orthonormal
//! basis, and finite-degree determinacy diagnostics built from all of the
//! above.
//!
//! Arithmetic is exact rational wherever the moment family admits it and
//! arbitrary-precision floating point elsewhere, with per-call working
//! precision and automatic escalation when a result cannot be certified at
//! the configured precision.
//!
//! A narrative guide with runnable examples lives in the `book/` directory
//! of the repository; its code blocks are compiled as doc-tests.

pub mod cli;
pub mod diagnostics;
pub mod error;
pub mod hankel;
pub mod matrix;
pub mod moment_source;
pub mod multi_index;
pub mod ortho_basis;
pub mod scalar;
pub mod torus;

mod exact;
mod jacobi;

#[cfg(doctest)]
mod book;

pub use error::{Error, Result};
pub use hankel::{
    assemble, assemble_marginal, eigen_sequence, rank_and_kernel, spectrum, EigenOptions,
    HankelTruncation, SpectrumResult,
};
pub use matrix::Mat;
pub use moment_source::{
    gaussian_moments, load_table, lognormal_moments, product, AtomicMeasure1D, MomentSource,
    RatPoly,
};
pub use multi_index::{enumerate, IndexOrder, MultiIndex};
pub use ortho_basis::{build_basis, BuildOptions, KernelEvaluation, KernelShape, OrthoBasis};
pub use scalar::{parse_rat, BigFloat, Complex, Prec, Rat, Scalar};
pub use torus::{build_torus_gram, duality_check, trace_bound_check, DualityReport, TorusGram};
