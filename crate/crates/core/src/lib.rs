//! Core library for the n-bit parity-oblivious multiplexing (POM) game:
//! strategy construction, scoring, exact classical bounds, and
//! device-independent certification.
//!
//! In the POM game a sender encodes a uniformly random n-bit string into a
//! quantum state and a receiver, asked for one position, measures a
//! dichotomic observable to guess that bit. The twist is the obliviousness
//! constraint: no parity of two or more input bits may be recoverable from
//! the transmitted system, which pins the two sums of states over any parity
//! split to be equal as operators.
//!
//! What lives where:
//!
//! - [`matrix`]: dense complex matrices, Hermitian/dichotomic certification,
//!   spectral decomposition, Kronecker products.
//! - [`task`]: bit strings, parity sets, strategies, the obliviousness
//!   checker, the success functional, and the closed-form classical
//!   `(n+1)/(2n)` and quantum `(1 + 1/sqrt(n))/2` bounds.
//! - [`oracle`]: an exact-rational linear program over noncontextual
//!   hidden-variable models; the brute-force classical bound oracle.
//! - [`optimal`]: the bound-attaining strategy for any n, built from
//!   mutually anticommuting observables in dimension `2^ceil((n-1)/2)`,
//!   plus hypercube geometry and a seeded scrambler for round-trip tests.
//! - [`extract`]: the certification engine; recursively builds the unitary
//!   that maps black-box observables onto the canonical Pauli tensor forms
//!   and reports residuals and conjugation sectors.
//! - [`json`]: canonical JSON encodings for every file format the CLI reads
//!   and writes.

pub mod error;
pub mod extract;
pub mod json;
pub mod matrix;
pub mod optimal;
pub mod oracle;
pub mod task;
pub mod tol;

pub use error::Error;
pub use extract::{certify, extract_unitary, CertificationReport, UnitaryFactorization};
pub use matrix::{ComplexMatrix, DichotomicObservable, Eigensystem, HermitianOperator};
pub use optimal::{canonical_observables, optimal_preparations, optimal_strategy, scramble};
pub use oracle::{build_lp, solve_exact, verify_model, LinearProgram, LpSolution};
pub use task::{
    check_parity_oblivious, classical_bound, parity_set, quantum_bound, success_probability,
    BitString, MeasurementSet, ParitySet, PreparationEnsemble, Strategy,
};
pub use tol::Tolerances;
