//! Permutation-driven cellular automata on periodic Ising spin chains.
//!
//! The crate provides
//!
//! * [`states`]: bit-encoded chain states, spin-exchange transpositions and the
//!   one-step chain update with its orbit structure;
//! * [`cogwheel`]: the `N`-state cyclic shift and its Hermitian generator in the
//!   diagonal and standard bases;
//! * [`hilbert`]: sparse superpositions over the chain basis and the dense
//!   Pauli form of a transposition;
//! * [`hamiltonian`]: the chain Hamiltonian as a polynomial in the update,
//!   its per-orbit exponential check and the leading-term approximation;
//! * [`hybrid`]: two-chain interaction experiments and Schmidt analysis.

pub mod cogwheel;
pub mod error;
pub mod hamiltonian;
pub mod hilbert;
pub mod hybrid;
pub mod linalg;
pub mod states;

pub use cogwheel::{CogwheelHamiltonian, CogwheelSpec, GeneratorReport, HamiltonianBasis};
pub use error::{Error, Result};
pub use hamiltonian::{BchReport, ChainHamiltonian, HamiltonianForm, OrbitCheck};
pub use hilbert::{QState, SparseVector};
pub use hybrid::{
    Bipartition, Classification, ClassicalState, HybridReport, HybridState, HybridVerdict,
    Schedule,
};
pub use num_complex::Complex64;
pub use states::{ChainConfig, OntState, Orbit};
