//! Implicitly restarted Arnoldi for the eigenvalues of smallest real part of a
//! sparse complex matrix.
//!
//! Restarts use exact shifts (the unwanted Ritz values) applied as complex
//! shifted QR sweeps on the projected Hessenberg matrix; orthogonalization is
//! classical Gram-Schmidt with one full reorthogonalization pass.

use num_complex::Complex64 as C64;

use crate::hamiltonian::SparseComplexMatrix;
use crate::spectra::{energy_order, normalize};

#[derive(Clone, Copy, Debug)]
pub struct ArnoldiConfig {
    /// Number of eigenpairs returned.
    pub n_want: usize,
    /// Ritz pairs that must converge (`n_want` plus a small buffer).
    pub n_track: usize,
    /// Krylov subspace dimension.
    pub n_krylov: usize,
    pub max_restarts: usize,
    /// Relative residual tolerance.
    pub tol: f64,
}

impl ArnoldiConfig {
    pub fn for_count(n_want: usize, dim: usize) -> Self {
        let n_want = n_want.min(dim);
        let n_track = (n_want + 4).min(dim);
        let n_krylov = (2 * n_track + 16).max(n_track + 24).min(dim);
        ArnoldiConfig {
            n_want,
            n_track,
            n_krylov,
            max_restarts: 2000,
            tol: 1e-12,
        }
    }
}

pub struct ArnoldiOutput {
    pub energies: Vec<C64>,
    pub vectors: Vec<Vec<C64>>,
}

const ZERO: C64 = C64 { re: 0.0, im: 0.0 };

fn dot(a: &[C64], b: &[C64]) -> C64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

fn norm(a: &[C64]) -> f64 {
    a.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

fn splitmix(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9E37_79B9_7F4A_7C15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

fn seeded_vector(n: usize, seed: u64) -> Vec<C64> {
    let mut s = seed;
    let mut unit = || (splitmix(&mut s) >> 11) as f64 / (1u64 << 53) as f64 - 0.5;
    (0..n).map(|_| C64::new(unit(), unit())).collect()
}

/// Orthogonalizes `w` against the columns of `basis` (two passes), returning
/// the projection coefficients.
fn orthogonalize(basis: &[Vec<C64>], w: &mut [C64]) -> Vec<C64> {
    let mut coeffs = vec![ZERO; basis.len()];
    for _ in 0..2 {
        let h: Vec<C64> = basis.iter().map(|v| dot(v, w)).collect();
        for (v, &hk) in basis.iter().zip(&h) {
            for (wi, vi) in w.iter_mut().zip(v) {
                *wi -= hk * vi;
            }
        }
        for (c, hk) in coeffs.iter_mut().zip(h) {
            *c += hk;
        }
    }
    coeffs
}

struct Factorization<'a> {
    a: &'a SparseComplexMatrix,
    m: usize,
    // columns of the Krylov basis
    v: Vec<Vec<C64>>,
    // m×m upper Hessenberg, row-major
    h: Vec<C64>,
    f: Vec<C64>,
    seed: u64,
}

impl<'a> Factorization<'a> {
    fn hij(&mut self, i: usize, j: usize) -> &mut C64 {
        &mut self.h[i * self.m + j]
    }

    /// Extends the factorization from `v.len()` columns to `m`.
    fn extend(&mut self) {
        let n = self.a.dim();
        let scale = self
            .h
            .iter()
            .map(|z| z.norm())
            .fold(self.a.max_abs(), f64::max);
        while self.v.len() < self.m {
            let j = self.v.len();
            let mut next = std::mem::take(&mut self.f);
            let beta = norm(&next);
            if j > 0 {
                if beta <= 1e-14 * scale {
                    // invariant subspace found; continue with a fresh direction
                    *self.hij(j, j - 1) = ZERO;
                    self.seed = self.seed.wrapping_add(1);
                    next = seeded_vector(n, self.seed);
                    orthogonalize(&self.v, &mut next);
                    normalize(&mut next);
                } else {
                    *self.hij(j, j - 1) = C64::new(beta, 0.0);
                    next.iter_mut().for_each(|z| *z /= beta);
                }
            } else {
                normalize(&mut next);
            }
            self.v.push(next);
            let mut w = vec![ZERO; n];
            self.a.matvec(&self.v[j], &mut w);
            let coeffs = orthogonalize(&self.v, &mut w);
            for (i, c) in coeffs.into_iter().enumerate() {
                *self.hij(i, j) = c;
            }
            self.f = w;
        }
    }

    fn hessenberg(&self) -> faer::Mat<C64> {
        faer::Mat::from_fn(self.m, self.m, |i, j| self.h[i * self.m + j])
    }

    /// Applies shifted QR sweeps with `shifts` and truncates to `keep` columns.
    fn restart(&mut self, shifts: &[C64], keep: usize) {
        let m = self.m;
        let mut q = vec![ZERO; m * m];
        for i in 0..m {
            q[i * m + i] = C64::new(1.0, 0.0);
        }
        for &mu in shifts {
            for i in 0..m {
                self.h[i * m + i] -= mu;
            }
            let mut rots = Vec::with_capacity(m - 1);
            for i in 0..m - 1 {
                let a = self.h[i * m + i];
                let b = self.h[(i + 1) * m + i];
                let r = (a.norm_sqr() + b.norm_sqr()).sqrt();
                let (c, s) = if r == 0.0 {
                    (1.0, ZERO)
                } else if a.norm() == 0.0 {
                    (0.0, C64::new(1.0, 0.0))
                } else {
                    let an = a.norm();
                    (an / r, (a / an) * b.conj() / r)
                };
                for col in i..m {
                    let x = self.h[i * m + col];
                    let y = self.h[(i + 1) * m + col];
                    self.h[i * m + col] = c * x + s * y;
                    self.h[(i + 1) * m + col] = -s.conj() * x + c * y;
                }
                rots.push((c, s));
            }
            for (i, &(c, s)) in rots.iter().enumerate() {
                for row in 0..m {
                    let x = self.h[row * m + i];
                    let y = self.h[row * m + i + 1];
                    self.h[row * m + i] = x * c + y * s.conj();
                    self.h[row * m + i + 1] = -x * s + y * c;
                    let x = q[row * m + i];
                    let y = q[row * m + i + 1];
                    q[row * m + i] = x * c + y * s.conj();
                    q[row * m + i + 1] = -x * s + y * c;
                }
            }
            for i in 0..m {
                self.h[i * m + i] += mu;
            }
            // the sweep leaves rounding noise below the subdiagonal
            for i in 0..m {
                for j in 0..i.saturating_sub(1) {
                    self.h[i * m + j] = ZERO;
                }
            }
        }

        let n = self.a.dim();
        let rotate = |col: usize| -> Vec<C64> {
            let mut out = vec![ZERO; n];
            for (i, vi) in self.v.iter().enumerate() {
                let coef = q[i * m + col];
                if coef != ZERO {
                    for (o, x) in out.iter_mut().zip(vi) {
                        *o += coef * x;
                    }
                }
            }
            out
        };
        let new_v: Vec<Vec<C64>> = (0..=keep).map(rotate).collect();
        let beta_k = self.h[keep * m + keep - 1];
        let sigma = q[(m - 1) * m + keep - 1];
        let mut f: Vec<C64> = new_v[keep].iter().map(|x| beta_k * x).collect();
        for (fi, ri) in f.iter_mut().zip(&self.f) {
            *fi += sigma * ri;
        }
        self.f = f;
        self.v = new_v;
        self.v.truncate(keep);
        for i in 0..m {
            for j in 0..m {
                if i >= keep || j >= keep {
                    self.h[i * m + j] = ZERO;
                }
            }
        }
    }
}

/// Computes the `cfg.n_want` eigenpairs with smallest real part. On failure
/// returns the number of restarts performed.
pub fn smallest_real(a: &SparseComplexMatrix, cfg: &ArnoldiConfig) -> Result<ArnoldiOutput, usize> {
    let n = a.dim();
    let m = cfg.n_krylov.min(n);
    let n_track = cfg.n_track.min(m);
    let mut fact = Factorization {
        a,
        m,
        v: Vec::with_capacity(m),
        h: vec![ZERO; m * m],
        f: seeded_vector(n, 0x5EED),
        seed: 0x5EED,
    };

    for restart in 0..=cfg.max_restarts {
        fact.extend();
        let evd = fact.hessenberg().eigen().map_err(|_| restart)?;
        let s = evd.S();
        let y = evd.U();
        let mut order: Vec<usize> = (0..m).collect();
        order.sort_by(|&i, &j| energy_order(&s[i], &s[j]));

        let f_norm = norm(&fact.f);
        let scale = (0..m)
            .map(|i| s[i].norm())
            .fold(f64::MIN_POSITIVE, f64::max);
        let converged = |k: usize| {
            let col = order[k];
            let ynorm = (0..m).map(|i| y[(i, col)].norm_sqr()).sum::<f64>().sqrt();
            f_norm * y[(m - 1, col)].norm() / ynorm <= cfg.tol * scale
        };
        let n_conv = (0..n_track).take_while(|&k| converged(k)).count();
        if n_conv == n_track || m == n {
            let mut energies = Vec::with_capacity(cfg.n_want);
            let mut vectors = Vec::with_capacity(cfg.n_want);
            for &col in order.iter().take(cfg.n_want) {
                let mut x = vec![ZERO; n];
                for (i, vi) in fact.v.iter().enumerate() {
                    let coef = y[(i, col)];
                    for (xo, vv) in x.iter_mut().zip(vi) {
                        *xo += coef * vv;
                    }
                }
                normalize(&mut x);
                energies.push(s[col]);
                vectors.push(x);
            }
            return Ok(ArnoldiOutput { energies, vectors });
        }
        let keep = (n_track + n_conv.min((m - n_track) / 2)).min(m - 1);
        let shifts: Vec<C64> = order[keep..].iter().map(|&i| s[i]).collect();
        fact.restart(&shifts, keep);
    }
    Err(cfg.max_restarts)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn diag_plus_noise(n: usize) -> SparseComplexMatrix {
        let mut t = Vec::new();
        for i in 0..n {
            t.push((i, i, C64::new(i as f64 * 0.5, (i % 3) as f64 * 0.1)));
            if i + 1 < n {
                t.push((i, i + 1, C64::new(0.3, 0.0)));
                t.push((i + 1, i, C64::new(0.2, 0.05)));
            }
        }
        SparseComplexMatrix::from_triplets(n, t)
    }

    #[test]
    fn finds_leftmost_eigenvalues_of_a_tridiagonal_matrix() {
        let a = diag_plus_noise(300);
        let dense = a.to_dense().eigenvalues().unwrap();
        let mut dense = dense;
        dense.sort_by(energy_order);
        let out = smallest_real(&a, &ArnoldiConfig::for_count(6, 300)).unwrap();
        for (k, e) in out.energies.iter().enumerate() {
            assert!((e - dense[k]).norm() < 1e-9, "{k}: {e} vs {}", dense[k]);
        }
        let mut av = vec![ZERO; 300];
        for (e, v) in out.energies.iter().zip(&out.vectors) {
            a.matvec(v, &mut av);
            let r: f64 = av
                .iter()
                .zip(v)
                .map(|(x, y)| (x - e * y).norm_sqr())
                .sum::<f64>()
                .sqrt();
            assert!(r < 1e-9);
        }
    }

    #[test]
    fn full_krylov_space_is_exact() {
        let a = diag_plus_noise(12);
        let out = smallest_real(&a, &ArnoldiConfig::for_count(3, 12)).unwrap();
        let mut dense = a.to_dense().eigenvalues().unwrap();
        dense.sort_by(energy_order);
        for (k, e) in out.energies.iter().enumerate() {
            assert!((e - dense[k]).norm() < 1e-10);
        }
    }
}
