//! Sparse matrix of the dimerized Kitaev-Hubbard chain with complex
//! interaction `U - iδ`, assembled in the occupation-number basis.

use faer::Mat;
use num_complex::Complex64 as C64;
use thiserror::Error;

use crate::fock::{self, apply_product, FockError, FockState, Ladder, Parity, SectorBasis};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ModelError {
    #[error("hopping t must be positive and finite, got {0}")]
    BadHopping(f64),
    #[error("dimerization eta must satisfy -1 < eta < 1, got {0}")]
    BadDimerization(f64),
    #[error("chain length must be at least 2, got {0}")]
    TooShort(usize),
    #[error("parameter {0} is not finite")]
    NotFinite(&'static str),
    #[error(transparent)]
    Fock(#[from] FockError),
}

/// Physical parameters of the chain. `t` sets the energy unit.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ModelParams {
    pub t: f64,
    /// Superconducting pairing amplitude Δ.
    pub delta_pair: f64,
    /// Real part of the interaction strength.
    pub u: f64,
    /// Non-Hermiticity δ; the bond interaction is `U - iδ`.
    pub delta_nh: f64,
    pub eta: f64,
    pub length: usize,
}

impl ModelParams {
    /// The exactly solvable line Δ = t with t = 1.
    pub fn solvable(length: usize, u: f64, delta_nh: f64, eta: f64) -> Self {
        ModelParams {
            t: 1.0,
            delta_pair: 1.0,
            u,
            delta_nh,
            eta,
            length,
        }
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        for (name, v) in [
            ("t", self.t),
            ("delta_pair", self.delta_pair),
            ("u", self.u),
            ("delta_nh", self.delta_nh),
            ("eta", self.eta),
        ] {
            if !v.is_finite() {
                return Err(ModelError::NotFinite(name));
            }
        }
        if self.t <= 0.0 {
            return Err(ModelError::BadHopping(self.t));
        }
        if !(self.eta > -1.0 && self.eta < 1.0) {
            return Err(ModelError::BadDimerization(self.eta));
        }
        if self.length < 2 {
            return Err(ModelError::TooShort(self.length));
        }
        if self.length > fock::MAX_SITES {
            return Err(FockError::UnsupportedLength(self.length).into());
        }
        Ok(())
    }

    /// Couplings of bond `j` (between sites j and j+1), 1 ≤ j ≤ L-1.
    pub fn bond(&self, j: usize) -> BondCouplings {
        BondCouplings {
            t: dimerized(self.t, self.eta, j),
            delta_pair: dimerized(self.delta_pair, self.eta, j),
            interaction: C64::new(
                dimerized(self.u, self.eta, j),
                -dimerized(self.delta_nh, self.eta, j),
            ),
        }
    }

    /// True when the matrix is Hermitian by construction.
    pub fn is_hermitian(&self) -> bool {
        self.delta_nh == 0.0
    }
}

/// Dimerized couplings of one bond.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BondCouplings {
    pub t: f64,
    pub delta_pair: f64,
    /// `U_j - i δ_j`
    pub interaction: C64,
}

/// Odd bonds are strong `o(1+η)`, even bonds weak `o(1-η)`.
#[inline]
pub fn dimerized(o: f64, eta: f64, j: usize) -> f64 {
    if j % 2 == 1 {
        o * (1.0 + eta)
    } else {
        o * (1.0 - eta)
    }
}

/// Compressed-row sparse complex matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct SparseComplexMatrix {
    dim: usize,
    row_ptr: Vec<usize>,
    cols: Vec<usize>,
    vals: Vec<C64>,
}

impl SparseComplexMatrix {
    /// Builds from (row, col, value) triplets, summing duplicates.
    pub fn from_triplets(dim: usize, mut triplets: Vec<(usize, usize, C64)>) -> Self {
        triplets.sort_by_key(|&(r, c, _)| (r, c));
        let mut row_ptr = vec![0usize; dim + 1];
        let mut cols = Vec::with_capacity(triplets.len());
        let mut vals: Vec<C64> = Vec::with_capacity(triplets.len());
        let mut last: Option<(usize, usize)> = None;
        for (r, c, v) in triplets {
            assert!(r < dim && c < dim, "entry ({r}, {c}) outside {dim}x{dim}");
            if last == Some((r, c)) {
                *vals.last_mut().unwrap() += v;
            } else {
                cols.push(c);
                vals.push(v);
                row_ptr[r + 1] += 1;
                last = Some((r, c));
            }
        }
        for r in 0..dim {
            row_ptr[r + 1] += row_ptr[r];
        }
        SparseComplexMatrix {
            dim,
            row_ptr,
            cols,
            vals,
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn nnz(&self) -> usize {
        self.vals.len()
    }

    /// Iterates stored entries in row-major order.
    pub fn entries(&self) -> impl Iterator<Item = (usize, usize, C64)> + '_ {
        (0..self.dim).flat_map(move |r| {
            (self.row_ptr[r]..self.row_ptr[r + 1]).map(move |k| (r, self.cols[k], self.vals[k]))
        })
    }

    pub fn get(&self, row: usize, col: usize) -> C64 {
        let range = self.row_ptr[row]..self.row_ptr[row + 1];
        match self.cols[range.clone()].binary_search(&col) {
            Ok(k) => self.vals[range.start + k],
            Err(_) => C64::new(0.0, 0.0),
        }
    }

    /// y = A x
    pub fn matvec(&self, x: &[C64], y: &mut [C64]) {
        assert_eq!(x.len(), self.dim);
        assert_eq!(y.len(), self.dim);
        for (r, yr) in y.iter_mut().enumerate() {
            let mut acc = C64::new(0.0, 0.0);
            for k in self.row_ptr[r]..self.row_ptr[r + 1] {
                acc += self.vals[k] * x[self.cols[k]];
            }
            *yr = acc;
        }
    }

    pub fn to_dense(&self) -> Mat<C64> {
        let mut m = Mat::<C64>::zeros(self.dim, self.dim);
        for (r, c, v) in self.entries() {
            m[(r, c)] += v;
        }
        m
    }

    /// Largest entry modulus.
    pub fn max_abs(&self) -> f64 {
        self.vals.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    /// max |A_rc - conj(A_cr)| over all stored entries.
    pub fn hermiticity_defect(&self) -> f64 {
        self.entries()
            .map(|(r, c, v)| (v - self.get(c, r).conj()).norm())
            .fold(0.0, f64::max)
    }

    pub fn is_real(&self) -> bool {
        self.vals.iter().all(|v| v.im == 0.0)
    }
}

fn assemble(
    p: &ModelParams,
    states: &[FockState],
    index_of: impl Fn(FockState) -> Option<usize>,
) -> SparseComplexMatrix {
    let l = p.length;
    let mut triplets = Vec::with_capacity(states.len() * (4 * (l - 1) + 1));
    for (col, &s) in states.iter().enumerate() {
        let mut diag = C64::new(0.0, 0.0);
        for j in 1..l {
            let b = p.bond(j);
            let zj = if s.is_occupied(j) { 1.0 } else { -1.0 };
            let zk = if s.is_occupied(j + 1) { 1.0 } else { -1.0 };
            diag += b.interaction * (zj * zk);

            let off: [(f64, [(Ladder, usize); 2]); 4] = [
                (-b.t, [(Ladder::Create, j), (Ladder::Annihilate, j + 1)]),
                (-b.t, [(Ladder::Create, j + 1), (Ladder::Annihilate, j)]),
                (
                    -b.delta_pair,
                    [(Ladder::Create, j), (Ladder::Create, j + 1)],
                ),
                (
                    -b.delta_pair,
                    [(Ladder::Annihilate, j + 1), (Ladder::Annihilate, j)],
                ),
            ];
            for (amp, ops) in off {
                if amp == 0.0 {
                    continue;
                }
                if let Some((target, sign)) = apply_product(s, &ops) {
                    let row = index_of(target).expect("parity-conserving term left the basis");
                    triplets.push((row, col, C64::new(amp * sign, 0.0)));
                }
            }
        }
        if diag != C64::new(0.0, 0.0) {
            triplets.push((col, col, diag));
        }
    }
    SparseComplexMatrix::from_triplets(states.len(), triplets)
}

/// One parity block of the Hamiltonian together with its basis.
#[derive(Clone, Debug)]
pub struct SectorHamiltonian {
    pub basis: SectorBasis,
    pub matrix: SparseComplexMatrix,
}

/// Hamiltonian restricted to one fermion-parity sector.
pub fn build_hamiltonian(p: &ModelParams, parity: Parity) -> Result<SectorHamiltonian, ModelError> {
    p.validate()?;
    let basis = fock::build_sector(p.length, parity)?;
    let matrix = assemble(p, basis.states(), |s| basis.index_of(s));
    Ok(SectorHamiltonian { basis, matrix })
}

/// Both parity blocks, even first.
pub fn build_sectors(p: &ModelParams) -> Result<[SectorHamiltonian; 2], ModelError> {
    Ok([
        build_hamiltonian(p, Parity::Even)?,
        build_hamiltonian(p, Parity::Odd)?,
    ])
}

/// Hamiltonian on the full 2^L space, row/column index equal to the bitmask.
pub fn build_full_hamiltonian(p: &ModelParams) -> Result<SparseComplexMatrix, ModelError> {
    p.validate()?;
    let states: Vec<FockState> = (0..1u32 << p.length).map(FockState).collect();
    Ok(assemble(p, &states, |s| Some(s.0 as usize)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn params(l: usize, t: f64, dp: f64, u: f64, dnh: f64, eta: f64) -> ModelParams {
        ModelParams {
            t,
            delta_pair: dp,
            u,
            delta_nh: dnh,
            eta,
            length: l,
        }
    }

    #[test]
    fn dimerization_rule() {
        assert_eq!(dimerized(1.0, 0.5, 1), 1.5);
        assert_eq!(dimerized(1.0, 0.5, 2), 0.5);
        assert_eq!(dimerized(2.0, 0.0, 3), 2.0);
    }

    #[test]
    fn rejects_invalid_parameters() {
        assert_eq!(
            params(4, 0.0, 1.0, 0.0, 0.0, 0.0).validate(),
            Err(ModelError::BadHopping(0.0))
        );
        assert_eq!(
            params(4, 1.0, 1.0, 0.0, 0.0, 1.0).validate(),
            Err(ModelError::BadDimerization(1.0))
        );
        assert_eq!(
            params(1, 1.0, 1.0, 0.0, 0.0, 0.0).validate(),
            Err(ModelError::TooShort(1))
        );
        assert!(params(4, 1.0, f64::NAN, 0.0, 0.0, 0.0).validate().is_err());
    }

    #[test]
    fn two_site_blocks_by_hand() {
        let p = params(2, 0.7, 1.3, 0.4, 0.25, 0.2);
        let (u1, d1, t1, dp1) = (0.4 * 1.2, 0.25 * 1.2, 0.7 * 1.2, 1.3 * 1.2);
        let w = C64::new(u1, -d1);

        let sector = build_hamiltonian(&p, Parity::Even).unwrap();
        assert_eq!(sector.basis.dim(), 2);
        let even = sector.matrix;
        // |00⟩ and |11⟩ both see (2n-1)(2n-1) = +1
        assert_abs_diff_eq!((even.get(0, 0) - w).norm(), 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!((even.get(1, 1) - w).norm(), 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(even.get(0, 1).norm(), dp1, epsilon = 1e-15);
        assert_abs_diff_eq!(even.get(1, 0).norm(), dp1, epsilon = 1e-15);

        let odd = build_hamiltonian(&p, Parity::Odd).unwrap().matrix;
        assert_abs_diff_eq!((odd.get(0, 0) + w).norm(), 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!((odd.get(1, 1) + w).norm(), 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(odd.get(0, 1).re, -t1, epsilon = 1e-15);
        assert_abs_diff_eq!(odd.get(1, 0).re, -t1, epsilon = 1e-15);
    }

    #[test]
    fn triplets_are_summed() {
        let m = SparseComplexMatrix::from_triplets(
            2,
            vec![
                (0, 1, C64::new(1.0, 0.0)),
                (0, 1, C64::new(0.5, 1.0)),
                (1, 0, C64::new(2.0, 0.0)),
            ],
        );
        assert_eq!(m.nnz(), 2);
        assert_eq!(m.get(0, 1), C64::new(1.5, 1.0));
        assert_eq!(m.get(1, 1), C64::new(0.0, 0.0));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(40))]

        #[test]
        fn hermitian_at_zero_nonhermiticity(l in 2usize..=7, t in 0.1f64..2.0, dp in -2.0f64..2.0,
                                            u in -4.0f64..4.0, eta in -0.95f64..0.95) {
            let p = params(l, t, dp, u, 0.0, eta);
            for parity in Parity::BOTH {
                let h = build_hamiltonian(&p, parity).unwrap().matrix;
                prop_assert!(h.hermiticity_defect() <= 1e-12 * h.max_abs().max(1.0));
            }
        }

        #[test]
        fn full_space_never_mixes_parity(l in 2usize..=7, dp in -2.0f64..2.0, u in -4.0f64..4.0,
                                         dnh in -1.0f64..1.0, eta in -0.95f64..0.95) {
            let h = build_full_hamiltonian(&params(l, 1.0, dp, u, dnh, eta)).unwrap();
            let off_block: f64 = h
                .entries()
                .filter(|&(r, c, _)| (r as u32).count_ones() % 2 != (c as u32).count_ones() % 2)
                .map(|(_, _, v)| v.norm())
                .sum();
            prop_assert_eq!(off_block, 0.0);
        }

        #[test]
        fn interaction_separates_real_and_imaginary(l in 2usize..=6, u in -4.0f64..4.0,
                                                    dnh in -1.0f64..1.0, eta in -0.95f64..0.95) {
            let build = |u, d| build_full_hamiltonian(&params(l, 1.0, 0.8, u, d, eta)).unwrap().to_dense();
            let both = build(u, dnh);
            let recombined = &build(u, 0.0) + &build(0.0, dnh) - &build(0.0, 0.0);
            let diff = (&both - &recombined).norm_max();
            prop_assert!(diff <= 1e-13);
        }

        #[test]
        fn sectors_are_blocks_of_the_full_matrix(l in 2usize..=6, u in -4.0f64..4.0,
                                                 dnh in -1.0f64..1.0, eta in -0.95f64..0.95) {
            let p = params(l, 1.0, 1.1, u, dnh, eta);
            let full = build_full_hamiltonian(&p).unwrap();
            for parity in Parity::BOTH {
                let SectorHamiltonian { basis, matrix: h } = build_hamiltonian(&p, parity).unwrap();
                for (r, c, v) in h.entries() {
                    let fr = basis.states()[r].0 as usize;
                    let fc = basis.states()[c].0 as usize;
                    prop_assert_eq!(full.get(fr, fc), v);
                }
            }
        }
    }
}
