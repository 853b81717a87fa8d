//! Manifold-averaged correlators.
//!
//! For an operator `Â` and a ground-state manifold `{Ψ_l}` of size `[χ]`, the
//! manifold expectation is `|det A|` with `A_{ll'} = ⟨Ψ_l|Â|Ψ_{l'}⟩`. All states
//! are stored in the full 2^L occupation basis so matrix elements between
//! different parity sectors vanish without special casing.

use faer::{Mat, Side};
use num_complex::Complex64 as C64;
use thiserror::Error;

use crate::fock::{apply_product, FockState, Ladder};
use crate::spectra::GroundManifold;

/// Sites in the feature window.
pub const WINDOW_LEN: usize = 4;
/// Flattened length of the two-point features (d, f).
pub const TWO_POINT_LEN: usize = 2 * WINDOW_LEN * WINDOW_LEN;
/// Flattened length of all features (d, f, k, p).
pub const ALL_FEATURES_LEN: usize = 4 * WINDOW_LEN * WINDOW_LEN;
/// Pre-clamp eigenvalue excursion that counts as a data-quality problem.
pub const EXCURSION_TOL: f64 = 1e-6;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CorrelatorError {
    #[error("chain length {0} is too short for a {WINDOW_LEN}-site middle window (need L >= 4)")]
    WindowTooShort(usize),
}

/// The four neighboring middle sites `{L/2-1, L/2, L/2+1, L/2+2}` (1-indexed).
pub fn window(length: usize) -> Result<[usize; WINDOW_LEN], CorrelatorError> {
    if length < 4 {
        return Err(CorrelatorError::WindowTooShort(length));
    }
    let h = length / 2;
    Ok([h - 1, h, h + 1, h + 2])
}

/// Correlators sampled as features.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Correlator {
    /// `c†_i c_j`
    Hopping,
    /// `c†_i c†_j`
    Pairing,
    /// `κ_ij κ†_ij` with `κ_ij = c_i c_j`
    PairDensity,
    /// `n_i n_j`
    Density,
}

impl Correlator {
    pub const ALL: [Correlator; 4] = [
        Correlator::Hopping,
        Correlator::Pairing,
        Correlator::PairDensity,
        Correlator::Density,
    ];

    /// Operator product for sites `(i, j)`, leftmost factor applied last.
    pub fn operator(self, i: usize, j: usize) -> Vec<(Ladder, usize)> {
        use Ladder::{Annihilate as A, Create as C};
        match self {
            Correlator::Hopping => vec![(C, i), (A, j)],
            Correlator::Pairing => vec![(C, i), (C, j)],
            Correlator::PairDensity => vec![(A, i), (A, j), (C, j), (C, i)],
            Correlator::Density => vec![(C, i), (A, i), (C, j), (A, j)],
        }
    }
}

/// `|det A|` for a square `n×n` row-major complex matrix.
pub fn manifold_expectation(a: &[C64], n: usize) -> f64 {
    assert_eq!(a.len(), n * n, "expected a {n}x{n} matrix");
    let mut m = a.to_vec();
    let mut det_abs = 1.0;
    for col in 0..n {
        let (pivot, best) = (col..n)
            .map(|r| (r, m[r * n + col].norm()))
            .max_by(|x, y| x.1.total_cmp(&y.1))
            .unwrap();
        if best == 0.0 {
            return 0.0;
        }
        if pivot != col {
            for k in 0..n {
                m.swap(pivot * n + k, col * n + k);
            }
        }
        let p = m[col * n + col];
        det_abs *= p.norm();
        for r in col + 1..n {
            let factor = m[r * n + col] / p;
            if factor != C64::new(0.0, 0.0) {
                for k in col..n {
                    let v = m[col * n + k];
                    m[r * n + k] -= factor * v;
                }
            }
        }
    }
    det_abs
}

/// `Ô |ψ⟩` in the full occupation basis.
pub fn apply_operator(ops: &[(Ladder, usize)], psi: &[C64]) -> Vec<C64> {
    let mut out = vec![C64::new(0.0, 0.0); psi.len()];
    for (s, &amp) in psi.iter().enumerate() {
        if amp == C64::new(0.0, 0.0) {
            continue;
        }
        if let Some((target, sign)) = apply_product(FockState(s as u32), ops) {
            out[target.0 as usize] += amp * sign;
        }
    }
    out
}

/// Row-major `[χ]×[χ]` matrix `⟨Ψ_l|Ô|Ψ_{l'}⟩`.
pub fn matrix_elements(states: &[Vec<C64>], ops: &[(Ladder, usize)]) -> Vec<C64> {
    let n = states.len();
    let mut a = vec![C64::new(0.0, 0.0); n * n];
    for (lp, psi) in states.iter().enumerate() {
        let image = apply_operator(ops, psi);
        for (l, bra) in states.iter().enumerate() {
            a[l * n + lp] = bra.iter().zip(&image).map(|(x, y)| x.conj() * y).sum();
        }
    }
    a
}

/// `⟨Ô⟩_[χ]` over the manifold.
pub fn expectation(manifold: &GroundManifold, ops: &[(Ladder, usize)]) -> f64 {
    manifold_expectation(
        &matrix_elements(&manifold.states, ops),
        manifold.states.len(),
    )
}

/// Short-range correlator features on the middle window.
#[derive(Clone, Debug, PartialEq)]
pub struct FeatureVector {
    pub window: [usize; WINDOW_LEN],
    pub d: [[f64; WINDOW_LEN]; WINDOW_LEN],
    pub f: [[f64; WINDOW_LEN]; WINDOW_LEN],
    pub k: [[f64; WINDOW_LEN]; WINDOW_LEN],
    pub p: [[f64; WINDOW_LEN]; WINDOW_LEN],
    pub two_point_only: bool,
}

impl FeatureVector {
    pub fn table(&self, c: Correlator) -> &[[f64; WINDOW_LEN]; WINDOW_LEN] {
        match c {
            Correlator::Hopping => &self.d,
            Correlator::Pairing => &self.f,
            Correlator::PairDensity => &self.k,
            Correlator::Density => &self.p,
        }
    }

    /// d and f row-major (32 entries), followed by k and p unless two-point only.
    pub fn flatten(&self) -> Vec<f64> {
        let tables: &[Correlator] = if self.two_point_only {
            &Correlator::ALL[..2]
        } else {
            &Correlator::ALL
        };
        tables
            .iter()
            .flat_map(|&c| self.table(c).iter().flatten().copied())
            .collect()
    }
}

/// Computes d, f (and k, p when `include_four_point`) for every ordered pair
/// of window sites.
pub fn feature_vector(
    manifold: &GroundManifold,
    include_four_point: bool,
) -> Result<FeatureVector, CorrelatorError> {
    let w = window(manifold.length)?;
    let mut tables = [[[0.0; WINDOW_LEN]; WINDOW_LEN]; 4];
    let wanted = if include_four_point { 4 } else { 2 };
    for (t, c) in Correlator::ALL.iter().take(wanted).enumerate() {
        for (a, &i) in w.iter().enumerate() {
            for (b, &j) in w.iter().enumerate() {
                tables[t][a][b] = expectation(manifold, &c.operator(i, j));
            }
        }
    }
    let [d, f, k, p] = tables;
    Ok(FeatureVector {
        window: w,
        d,
        f,
        k,
        p,
        two_point_only: !include_four_point,
    })
}

/// Eigenvalues of the correlation matrix and the resulting entropy.
#[derive(Clone, Debug, PartialEq)]
pub struct CorrelationSpectrum {
    /// Clamped eigenvalues in [0, 1], ascending.
    pub s: Vec<f64>,
    pub c_corr: f64,
    /// Smallest and largest eigenvalue before clamping.
    pub raw_range: (f64, f64),
    /// max |C_ij - C_ji| before symmetrization.
    pub asymmetry: f64,
}

impl CorrelationSpectrum {
    /// Pre-clamp eigenvalues left `[-1e-6, 1 + 1e-6]`.
    pub fn has_excursion(&self) -> bool {
        self.raw_range.0 < -EXCURSION_TOL || self.raw_range.1 > 1.0 + EXCURSION_TOL
    }
}

/// `C_ij = |det ρ_ij|` with `ρ_ij^{ll'} = ⟨Ψ_l|c†_i c_j|Ψ_{l'}⟩`, row-major L×L.
pub fn correlation_matrix(manifold: &GroundManifold) -> Vec<f64> {
    let l = manifold.length;
    let mut c = vec![0.0; l * l];
    for i in 1..=l {
        for j in 1..=l {
            c[(i - 1) * l + (j - 1)] = expectation(manifold, &Correlator::Hopping.operator(i, j));
        }
    }
    c
}

/// `-(1/L) Σ s log s` (natural log) with `0 log 0 = 0`.
pub fn entropy_of(s: &[f64], length: usize) -> f64 {
    -s.iter()
        .filter(|&&x| x > 0.0)
        .map(|&x| x * x.ln())
        .sum::<f64>()
        / length as f64
}

pub fn correlation_entropy(manifold: &GroundManifold) -> CorrelationSpectrum {
    let l = manifold.length;
    let c = correlation_matrix(manifold);
    let mut asymmetry: f64 = 0.0;
    let sym = Mat::<f64>::from_fn(l, l, |i, j| {
        asymmetry = asymmetry.max((c[i * l + j] - c[j * l + i]).abs());
        0.5 * (c[i * l + j] + c[j * l + i])
    });
    let raw = sym
        .self_adjoint_eigenvalues(Side::Lower)
        .expect("symmetric eigenvalue problem of a small real matrix");
    let raw_range = (
        raw.iter().copied().fold(f64::INFINITY, f64::min),
        raw.iter().copied().fold(f64::NEG_INFINITY, f64::max),
    );
    let s: Vec<f64> = raw.iter().map(|x| x.clamp(0.0, 1.0)).collect();
    let spectrum = CorrelationSpectrum {
        c_corr: entropy_of(&s, l),
        s,
        raw_range,
        asymmetry,
    };
    if spectrum.has_excursion() {
        log::warn!(
            "correlation-matrix eigenvalues outside [0, 1] before clamping: [{:.3e}, {:.3e}]",
            raw_range.0,
            raw_range.1
        );
    }
    spectrum
}
