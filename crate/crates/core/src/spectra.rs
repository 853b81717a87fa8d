//! Spectrum of both parity blocks, ground-state manifold selection and the
//! quasi-degeneracy `χ = Σ_α exp(-λ |ε_α - ε_0|)`.

use faer::{Mat, Side};
use num_complex::Complex64 as C64;
use thiserror::Error;

use crate::arnoldi::{self, ArnoldiConfig};
use crate::fock::Parity;
use crate::hamiltonian::{self, ModelError, ModelParams, SectorHamiltonian, SparseComplexMatrix};

/// Default number of retained low-lying states.
pub const DEFAULT_N_KEEP: usize = 16;
/// Default energy resolution `1/λ`.
pub const DEFAULT_INV_LAMBDA: f64 = 0.005;
/// Largest total dimension handled by full dense diagonalization.
pub const DENSE_LIMIT: usize = 8192;
/// Overlap above which two retained eigenvectors are treated as coalescing.
pub const COALESCENCE_OVERLAP: f64 = 1.0 - 1e-6;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SpectraError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("dense eigensolver failed on the {0} block")]
    Dense(&'static str),
    #[error(
        "iterative eigensolver did not converge on the {sector} block after {restarts} restarts"
    )]
    NoConvergence {
        sector: &'static str,
        restarts: usize,
    },
    #[error("eigenpair residual {residual:.3e} exceeds bound {bound:.3e}")]
    Residual { residual: f64, bound: f64 },
    #[error("requested {n_keep} states but the space has dimension {dim}")]
    TooManyStates { n_keep: usize, dim: usize },
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SpectraConfig {
    pub n_keep: usize,
    pub inv_lambda: f64,
    pub dense_limit: usize,
}

impl Default for SpectraConfig {
    fn default() -> Self {
        SpectraConfig {
            n_keep: DEFAULT_N_KEEP,
            inv_lambda: DEFAULT_INV_LAMBDA,
            dense_limit: DENSE_LIMIT,
        }
    }
}

/// Merged spectrum of both parity sectors.
///
/// `energies` is sorted ascending by real part, ties by imaginary part. On the
/// dense path it holds the whole spectrum, on the iterative path only the
/// converged low-lying part. `vectors[k]` is the unit-norm right eigenvector of
/// `energies[k]` embedded in the full 2^L space (index = occupation bitmask).
#[derive(Clone, Debug)]
pub struct EigenSystem {
    pub length: usize,
    pub energies: Vec<C64>,
    pub vectors: Vec<Vec<C64>>,
    pub sector_of: Vec<Parity>,
    pub full_spectrum: bool,
    /// Two retained eigenvectors are nearly parallel.
    pub near_exceptional: bool,
}

impl EigenSystem {
    pub fn n_keep(&self) -> usize {
        self.vectors.len()
    }

    pub fn ground_energy(&self) -> C64 {
        self.energies[0]
    }
}

struct SectorSpectrum {
    parity: Parity,
    energies: Vec<C64>,
    // sector-local vectors, same order as `energies`
    vectors: Vec<Vec<C64>>,
    full: bool,
}

fn sector_name(p: Parity) -> &'static str {
    p.as_str()
}

fn dense_sector(h: &SparseComplexMatrix, parity: Parity) -> Result<SectorSpectrum, SpectraError> {
    let n = h.dim();
    let hermitian = h.hermiticity_defect() == 0.0;
    let (energies, vectors) = if hermitian && h.is_real() {
        let mut m = Mat::<f64>::zeros(n, n);
        for (r, c, v) in h.entries() {
            m[(r, c)] += v.re;
        }
        let evd = m
            .self_adjoint_eigen(Side::Lower)
            .map_err(|_| SpectraError::Dense(sector_name(parity)))?;
        let s = evd.S();
        let u = evd.U();
        let energies = (0..n).map(|k| C64::new(s[k], 0.0)).collect();
        let vectors = (0..n)
            .map(|k| (0..n).map(|i| C64::new(u[(i, k)], 0.0)).collect())
            .collect();
        (energies, vectors)
    } else if hermitian {
        let evd = h
            .to_dense()
            .self_adjoint_eigen(Side::Lower)
            .map_err(|_| SpectraError::Dense(sector_name(parity)))?;
        let s = evd.S();
        let u = evd.U();
        let energies = (0..n).map(|k| C64::new(s[k].re, 0.0)).collect();
        let vectors = (0..n)
            .map(|k| (0..n).map(|i| u[(i, k)]).collect())
            .collect();
        (energies, vectors)
    } else {
        let evd = h
            .to_dense()
            .eigen()
            .map_err(|_| SpectraError::Dense(sector_name(parity)))?;
        let s = evd.S();
        let u = evd.U();
        let energies = (0..n).map(|k| s[k]).collect();
        let vectors = (0..n)
            .map(|k| {
                let mut v: Vec<C64> = (0..n).map(|i| u[(i, k)]).collect();
                normalize(&mut v);
                v
            })
            .collect();
        (energies, vectors)
    };
    Ok(SectorSpectrum {
        parity,
        energies,
        vectors,
        full: true,
    })
}

fn iterative_sector(
    h: &SparseComplexMatrix,
    parity: Parity,
    n_want: usize,
) -> Result<SectorSpectrum, SpectraError> {
    let cfg = ArnoldiConfig::for_count(n_want, h.dim());
    let out = arnoldi::smallest_real(h, &cfg).map_err(|restarts| SpectraError::NoConvergence {
        sector: sector_name(parity),
        restarts,
    })?;
    let full = out.energies.len() == h.dim();
    Ok(SectorSpectrum {
        parity,
        energies: out.energies,
        vectors: out.vectors,
        full,
    })
}

pub(crate) fn normalize(v: &mut [C64]) {
    let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    if norm > 0.0 {
        v.iter_mut().for_each(|z| *z /= norm);
    }
}

/// Orders complex energies by real part, then imaginary part.
pub fn energy_order(a: &C64, b: &C64) -> std::cmp::Ordering {
    a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im))
}

/// Diagonalizes both parity blocks and merges them into one sorted spectrum,
/// keeping eigenvectors for the lowest `n_keep` states.
pub fn diagonalize(
    even: &SectorHamiltonian,
    odd: &SectorHamiltonian,
    cfg: &SpectraConfig,
) -> Result<EigenSystem, SpectraError> {
    let length = even.basis.length();
    let total = even.basis.dim() + odd.basis.dim();
    if cfg.n_keep == 0 || cfg.n_keep > total {
        return Err(SpectraError::TooManyStates {
            n_keep: cfg.n_keep,
            dim: total,
        });
    }
    let dense = total <= cfg.dense_limit;
    let mut parts = Vec::with_capacity(2);
    for sector in [even, odd] {
        let parity = sector.basis.parity();
        let spec = if dense || sector.matrix.dim() <= cfg.n_keep + 1 {
            dense_sector(&sector.matrix, parity)?
        } else {
            iterative_sector(&sector.matrix, parity, cfg.n_keep)?
        };
        check_residuals(&sector.matrix, &spec)?;
        parts.push((sector, spec));
    }

    let mut order: Vec<(C64, usize, usize)> = parts
        .iter()
        .enumerate()
        .flat_map(|(p, (_, spec))| {
            spec.energies
                .iter()
                .enumerate()
                .map(move |(k, &e)| (e, p, k))
        })
        .collect();
    order.sort_by(|a, b| {
        energy_order(&a.0, &b.0)
            .then(a.1.cmp(&b.1))
            .then(a.2.cmp(&b.2))
    });

    let full_dim = 1usize << length;
    let mut vectors = Vec::with_capacity(cfg.n_keep);
    let mut sector_of = Vec::with_capacity(cfg.n_keep);
    for &(_, p, k) in order.iter().take(cfg.n_keep) {
        let (sector, spec) = &parts[p];
        let mut full = vec![C64::new(0.0, 0.0); full_dim];
        for (i, s) in sector.basis.states().iter().enumerate() {
            full[s.0 as usize] = spec.vectors[k][i];
        }
        vectors.push(full);
        sector_of.push(spec.parity);
    }

    let near_exceptional = coalescing(&vectors, &sector_of);
    Ok(EigenSystem {
        length,
        energies: order.iter().map(|o| o.0).collect(),
        vectors,
        sector_of,
        full_spectrum: parts.iter().all(|(_, s)| s.full),
        near_exceptional,
    })
}

/// Builds both blocks for `p` and diagonalizes them.
pub fn solve(p: &ModelParams, cfg: &SpectraConfig) -> Result<EigenSystem, SpectraError> {
    let [even, odd] = hamiltonian::build_sectors(p)?;
    let mut cfg = *cfg;
    cfg.n_keep = cfg.n_keep.min(1 << p.length);
    diagonalize(&even, &odd, &cfg)
}

fn check_residuals(h: &SparseComplexMatrix, spec: &SectorSpectrum) -> Result<(), SpectraError> {
    let n = h.dim();
    let bound = 1e-8 * h.max_abs().max(f64::MIN_POSITIVE) * n as f64;
    let mut hv = vec![C64::new(0.0, 0.0); n];
    for (e, v) in spec.energies.iter().zip(&spec.vectors) {
        h.matvec(v, &mut hv);
        let residual = hv
            .iter()
            .zip(v)
            .map(|(a, b)| (a - e * b).norm_sqr())
            .sum::<f64>()
            .sqrt();
        if residual > bound {
            return Err(SpectraError::Residual { residual, bound });
        }
    }
    Ok(())
}

fn coalescing(vectors: &[Vec<C64>], sector_of: &[Parity]) -> bool {
    for a in 0..vectors.len() {
        for b in a + 1..vectors.len() {
            if sector_of[a] != sector_of[b] {
                continue;
            }
            let overlap: C64 = vectors[a]
                .iter()
                .zip(&vectors[b])
                .map(|(x, y)| x.conj() * y)
                .sum();
            if overlap.norm() > COALESCENCE_OVERLAP {
                return true;
            }
        }
    }
    false
}

/// `χ = Σ_α exp(-λ |ε_α - ε_0|)` over the given (sorted) energies.
pub fn quasi_degeneracy(energies: &[C64], lambda: f64) -> f64 {
    assert!(
        !energies.is_empty(),
        "quasi-degeneracy of an empty spectrum"
    );
    assert!(lambda > 0.0, "lambda must be positive");
    let e0 = energies[0];
    energies
        .iter()
        .map(|e| (-lambda * (e - e0).norm()).exp())
        .sum()
}

/// Allowed degeneracy classes of the ground-state manifold.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ChiClass {
    One,
    Two,
    Four,
}

impl ChiClass {
    pub const ALL: [ChiClass; 3] = [ChiClass::One, ChiClass::Two, ChiClass::Four];

    /// Nearest of {1, 2, 4}; the tie at 3 goes to 2.
    pub fn from_chi_int(chi_int: usize) -> ChiClass {
        assert!(chi_int >= 1, "[chi] must be at least 1");
        match chi_int {
            1 => ChiClass::One,
            2 | 3 => ChiClass::Two,
            _ => ChiClass::Four,
        }
    }

    pub fn value(self) -> u8 {
        match self {
            ChiClass::One => 1,
            ChiClass::Two => 2,
            ChiClass::Four => 4,
        }
    }

    pub fn from_value(v: u8) -> Option<ChiClass> {
        match v {
            1 => Some(ChiClass::One),
            2 => Some(ChiClass::Two),
            4 => Some(ChiClass::Four),
            _ => None,
        }
    }

    /// Position in the fixed one-hot order (1, 2, 4).
    pub fn index(self) -> usize {
        match self {
            ChiClass::One => 0,
            ChiClass::Two => 1,
            ChiClass::Four => 2,
        }
    }

    pub fn from_index(i: usize) -> ChiClass {
        Self::ALL[i]
    }
}

/// Free function form of [`ChiClass::from_chi_int`].
pub fn chi_class(chi_int: usize) -> ChiClass {
    ChiClass::from_chi_int(chi_int)
}

/// The `[χ]` lowest eigenstates together with χ and its class.
#[derive(Clone, Debug)]
pub struct GroundManifold {
    pub length: usize,
    pub chi: f64,
    pub chi_int: usize,
    pub chi_class: ChiClass,
    pub states: Vec<Vec<C64>>,
    pub sectors: Vec<Parity>,
}

impl GroundManifold {
    /// χ is summed over the retained subset `energies[..n_keep]`.
    pub fn from_eigensystem(sys: &EigenSystem, inv_lambda: f64) -> GroundManifold {
        let n_keep = sys.n_keep();
        let chi = quasi_degeneracy(&sys.energies[..n_keep], 1.0 / inv_lambda);
        let chi_int = (chi.round() as usize).clamp(1, n_keep);
        GroundManifold {
            length: sys.length,
            chi,
            chi_int,
            chi_class: ChiClass::from_chi_int(chi_int),
            states: sys.vectors[..chi_int].to_vec(),
            sectors: sys.sector_of[..chi_int].to_vec(),
        }
    }

    /// A manifold made of explicitly given full-space states.
    pub fn from_states(length: usize, states: Vec<Vec<C64>>) -> GroundManifold {
        let chi_int = states.len();
        assert!(chi_int >= 1);
        assert!(states.iter().all(|s| s.len() == 1 << length));
        GroundManifold {
            length,
            chi: chi_int as f64,
            chi_int,
            chi_class: ChiClass::from_chi_int(chi_int),
            sectors: states
                .iter()
                .map(|s| {
                    let (k, _) = s
                        .iter()
                        .enumerate()
                        .max_by(|a, b| a.1.norm().total_cmp(&b.1.norm()))
                        .unwrap();
                    crate::fock::FockState(k as u32).parity()
                })
                .collect(),
            states,
        }
    }
}
