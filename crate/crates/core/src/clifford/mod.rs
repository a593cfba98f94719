//! Pauli strings, Clifford tableaux and exact Clifford sampling.

pub mod pauli;
pub mod small;
pub mod synth;
pub mod tableau;

use rand::Rng;

pub use pauli::{Letter, PauliString, PauliSupport};
pub use synth::{line_clifford_depth, synthesize_line};
pub use tableau::CliffordTableau;

use crate::error::Result;

/// `U Q U†` as a signed Pauli.
pub fn conjugate(t: &CliffordTableau, p: &PauliString) -> Result<PauliString> {
    t.conjugate(p)
}

/// `t1 ∘ t2`: conjugating by the result equals conjugating by `t2`, then `t1`.
pub fn compose(t1: &CliffordTableau, t2: &CliffordTableau) -> Result<CliffordTableau> {
    CliffordTableau::compose(t1, t2)
}

pub fn embed(t: &CliffordTableau, sites: &[usize], n_total: usize) -> Result<CliffordTableau> {
    t.embed(sites, n_total)
}

/// Uniform element of the `n`-qubit Clifford group.
pub fn sample_uniform_clifford<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Result<CliffordTableau> {
    CliffordTableau::sample_uniform(n, rng)
}

/// Uniform element of `P*_n` (unsigned, non-identity).
pub fn random_pauli<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Result<PauliString> {
    PauliString::random_nonidentity(n, rng)
}

pub fn pauli_support(p: &PauliString) -> PauliSupport {
    p.support()
}
