//! Doc-test bindings for the guide in `book/`.
//!
//! mdbook renders the chapters but does not compile their code fences.
//! Including each chapter as a doc comment here makes `cargo test --doc`
//! build and run every `rust` block, so the guide cannot drift from the
//! library.

#[doc = include_str!("../../../book/src/introduction.md")]
mod introduction {}

#[doc = include_str!("../../../book/src/moment-sequences.md")]
mod moment_sequences {}

#[doc = include_str!("../../../book/src/hankel-spectra.md")]
mod hankel_spectra {}

#[doc = include_str!("../../../book/src/orthonormal-bases.md")]
mod orthonormal_bases {}

#[doc = include_str!("../../../book/src/torus-duality.md")]
mod torus_duality {}

#[doc = include_str!("../../../book/src/determinacy-diagnostics.md")]
mod determinacy_diagnostics {}

#[doc = include_str!("../../../book/src/precision.md")]
mod precision {}

#[doc = include_str!("../../../book/src/cli.md")]
mod cli_reference {}
