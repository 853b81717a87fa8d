//! Brute-force reference built from dense Kronecker products of single-site
//! matrices. Shares nothing with the library beyond the number type.
#![allow(dead_code)]

use faer::Mat;
use num_complex::Complex64 as C64;

fn c(re: f64) -> C64 {
    C64::new(re, 0.0)
}

fn single(kind: char) -> Mat<C64> {
    match kind {
        'a' => Mat::from_fn(2, 2, |i, j| if i == 0 && j == 1 { c(1.0) } else { c(0.0) }),
        'z' => Mat::from_fn(2, 2, |i, j| match (i, j) {
            (0, 0) => c(1.0),
            (1, 1) => c(-1.0),
            _ => c(0.0),
        }),
        _ => Mat::identity(2, 2),
    }
}

/// Jordan-Wigner `c_j` (1-based) on an `l`-site chain. The basis index is the
/// occupation bitmask with site 1 as the least significant bit.
pub fn annihilator(l: usize, j: usize) -> Mat<C64> {
    let mut out = Mat::<C64>::identity(1, 1);
    for site in (1..=l).rev() {
        let f = if site == j {
            single('a')
        } else if site < j {
            single('z')
        } else {
            single('i')
        };
        out = out.kron(&f);
    }
    out
}

pub fn creator(l: usize, j: usize) -> Mat<C64> {
    annihilator(l, j).adjoint().to_owned()
}

fn scale(m: &Mat<C64>, s: C64) -> Mat<C64> {
    Mat::from_fn(m.nrows(), m.ncols(), |i, j| m[(i, j)] * s)
}

fn number(l: usize, j: usize) -> Mat<C64> {
    &creator(l, j) * &annihilator(l, j)
}

pub struct Params {
    pub length: usize,
    pub t: f64,
    pub delta_pair: f64,
    pub u: f64,
    pub delta_nh: f64,
    pub eta: f64,
}

fn dimer(x: f64, eta: f64, bond: usize) -> f64 {
    if bond % 2 == 1 {
        x * (1.0 + eta)
    } else {
        x * (1.0 - eta)
    }
}

pub fn hamiltonian(p: &Params) -> Mat<C64> {
    let l = p.length;
    let n = 1 << l;
    let id = Mat::<C64>::identity(n, n);
    let mut h = Mat::<C64>::zeros(n, n);
    for j in 1..l {
        let (cj, cj1) = (annihilator(l, j), annihilator(l, j + 1));
        let (dj, dj1) = (creator(l, j), creator(l, j + 1));
        let t = dimer(p.t, p.eta, j);
        let dp = dimer(p.delta_pair, p.eta, j);
        let w = C64::new(dimer(p.u, p.eta, j), -dimer(p.delta_nh, p.eta, j));
        let hop = &(&dj * &cj1) + &(&dj1 * &cj);
        let pair = &(&dj * &dj1) + &(&cj1 * &cj);
        let nj = &scale(&number(l, j), c(2.0)) - &id;
        let nj1 = &scale(&number(l, j + 1), c(2.0)) - &id;
        let inter = &nj * &nj1;
        h = &h - &scale(&hop, c(t));
        h = &h - &scale(&pair, c(dp));
        h = &h + &scale(&inter, w);
    }
    h
}

/// `|det ⟨Ψ_l|O|Ψ_l'⟩|`.
pub fn manifold_expectation(states: &[Vec<C64>], op: &Mat<C64>) -> f64 {
    let k = states.len();
    let dim = op.nrows();
    let psi = Mat::from_fn(dim, k, |i, l| states[l][i]);
    let m = &(&psi.adjoint() * op) * &psi;
    m.determinant().norm()
}

pub fn window(l: usize) -> [usize; 4] {
    let h = l / 2;
    [h - 1, h, h + 1, h + 2]
}

/// d, f, k, p over the window, each row-major.
pub fn features(states: &[Vec<C64>], l: usize) -> Vec<f64> {
    let w = window(l);
    let mut out = Vec::with_capacity(64);
    for kind in 0..4 {
        for &i in &w {
            for &j in &w {
                let (ci, cj, di, dj) = (
                    annihilator(l, i),
                    annihilator(l, j),
                    creator(l, i),
                    creator(l, j),
                );
                let op = match kind {
                    0 => &di * &cj,
                    1 => &di * &dj,
                    2 => &(&(&ci * &cj) * &dj) * &di,
                    _ => &(&(&di * &ci) * &dj) * &cj,
                };
                out.push(manifold_expectation(states, &op));
            }
        }
    }
    out
}

/// Row-major `C_ij = |det ⟨Ψ_l|c†_i c_j|Ψ_l'⟩|`.
pub fn correlation_matrix(states: &[Vec<C64>], l: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(l * l);
    for i in 1..=l {
        for j in 1..=l {
            out.push(manifold_expectation(
                states,
                &(&creator(l, i) * &annihilator(l, j)),
            ));
        }
    }
    out
}
