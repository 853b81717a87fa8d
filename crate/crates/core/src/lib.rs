//! Exact diagonalization of the non-Hermitian dimerized Kitaev-Hubbard chain
//! and the correlator features derived from its ground-state manifold.

mod arnoldi;
pub mod boundaries;
pub mod correlators;
pub mod dataset;
pub mod fock;
pub mod hamiltonian;
pub mod spectra;

pub use fock::{FockState, Parity, SectorBasis};
pub use hamiltonian::{ModelParams, SectorHamiltonian, SparseComplexMatrix};
pub use spectra::{ChiClass, EigenSystem, GroundManifold, SpectraConfig};
