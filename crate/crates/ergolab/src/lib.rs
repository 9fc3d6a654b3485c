//! Finite-dimensional laboratory for ergodic averages of twisted operator
//! products.
//!
//! The objects of study are Cesàro means of twisted products
//!
//! ```text
//! A_N(X) = (1/N) Σ_{n<N} U^{n·k1} · X · U^{n·(k2−k1)},
//! ```
//!
//! built from a unitary U with invariant state vector Ω, an operator
//! algebra M acting standardly, and a pair of nonzero distinct integer
//! exponents (k1, k2).  Everything is dense complex linear algebra over
//! hand-rolled matrices, so every limit, projection, and modular operator
//! is an explicit matrix that can be printed, compared, and round-tripped.
//!
//! ## Capabilities, one runnable example each
//!
//! ```text
//! examples/
//! ├── hypothesis_check.rs    # cyclic / separating / ergodic / abelian predicates
//! ├── modular_data.rs        # Tomita pair (J, Δ) and its defining identities
//! ├── tensor_fixed_space.rs  # resonant spectrum pairs = fixed space of U^k1 ⊗ U^k2
//! ├── ergodic_limit.rs       # limit partial isometry of the means on M + M′
//! ├── three_point.rs         # correlation ladders ω(A₀ αⁿᵏ¹(A₁) αⁿᵏ²(A₂)) and limits
//! ├── compact_averages.rs    # unconditional resonance-sum route, norm measurements
//! ├── decomposition.rs       # non-ergodic systems split into ergodic blocks
//! └── counterexample.rs      # truncated shift whose three-point means diverge
//! ```
//!
//! Run any of them with
//!
//! ```bash
//! cargo run --example ergodic_limit
//! ```
//!
//! Each example prints the quantities it computes alongside the structural
//! identities it verifies, and panics if an identity fails, so the examples
//! double as an executable tour of the mathematics.
//!
//! ## Module map
//!
//! - [`linalg`]: dense complex matrices, Jacobi eigensolvers for Hermitian
//!   and normal operators, null spaces, clustering of near-coincident
//!   eigenvalues.
//! - [`algebra`]: operator-subspace bases, generated *-algebras,
//!   commutants, centers.
//! - [`system`]: dynamical systems (U, Ω, M), hypothesis predicates,
//!   modular data.
//! - [`spectral`]: spectral resolutions, resonant pair sets, the tensor
//!   fixed-space identity, eigenoperators.
//! - [`cesaro`]: the means themselves, their limit bundles on ergodic
//!   systems, the compact resonance-sum route, three-point ladders.
//! - [`decomposition`]: direct-sum splittings over the fixed commutant,
//!   fiberwise limits and modular data.
//! - [`counterexample`]: the truncated-shift construction with exactly
//!   prescribed, divergent three-point correlations.
//! - [`models`]: bundled model families (rotations, tracial systems, the
//!   truncated shift) and file serialization.
//! - [`cli`]: the `ergolab` binary, exposing the above as subcommands with
//!   deterministic CSV/JSON output.

pub mod algebra;
pub mod cesaro;
pub mod cli;
pub mod counterexample;
pub mod decomposition;
pub mod error;
pub mod linalg;
pub mod models;
pub mod spectral;
pub mod system;

pub use error::{Error, Result};
