//! Construction and verification toolkit for Grassmann-graph agreement tests
//! and the PCP machinery built on top of them, at experiment scale.
//!
//! The crate is organized bottom-up:
//!
//! * [`field`]: exact arithmetic in F_q, q = p^m up to 2^16, with traces and
//!   additive characters.
//! * [`subspace`]: canonical (reduced row echelon) subspaces of F_q^n, the
//!   subspace lattice, Gaussian binomials, and zoom enumeration/sampling.
//! * [`tables`]: linear functionals on subspaces, side conditions, and the
//!   assignment tables the agreement tests consume.
//! * [`agreement`]: the two-table inclusion agreement test, planted
//!   counterexamples, brute-force zoom decoding, list-size bounds, and BLR
//!   linearity testing with self-correction.
//! * [`covering`]: the smoothing distribution over tuples of vectors, its
//!   closed-form density, and the atypicality events used to compare it with
//!   the uniform distribution.
//! * [`outer`]: 3Lin instances, the equation gadget, and the smooth
//!   advice-augmented two-prover game.
//! * [`composed`]: the composed bipartite instance: side-condition vertices,
//!   the clique equivalence, constraint sampling, honest assignments, and
//!   value estimation.
//! * [`generic`]: generic subspace families, sunflower extraction, and the
//!   sampling statistics they satisfy.
//! * [`decoding`]: maximal zoom-outs, the excellence scan, the restriction
//!   walk, agreement graphs, and clique gluing into a global linear function.
//! * [`fourier`]: exact Fourier analysis over small matrix spaces, the
//!   column-average operators, eigenvalue checks, and pseudo-randomness spot
//!   checks.
//! * [`transforms`]: bipartite constraint-graph surgery: trivial-vertex
//!   removal, left-regularization, certified expanders, and right degree
//!   reduction.
//!
//! Shared plumbing lives in [`error`], [`rng`], and [`stats`].

pub mod agreement;
pub mod composed;
pub mod covering;
pub mod decoding;
pub mod outer;
pub mod error;
pub mod field;
pub mod fourier;
pub mod generic;
pub mod rng;
pub mod stats;
pub mod subspace;
pub mod tables;
pub mod transforms;

pub use error::{Error, Result};
pub use field::{Elem, Field};
