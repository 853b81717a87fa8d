//! Central finite-difference check of backpropagation.
#![allow(dead_code)]

use ndarray::Array2;
use nhkh_nn::{ArchSpec, Network, OutputKind};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub const STEP: f64 = 1e-6;
/// Denominator floor for entries whose true gradient is (near) zero. The
/// difference quotient carries about `eps·|loss|/STEP ≈ 1e-9` of round-off.
pub const FLOOR: f64 = 1e-5;

/// Largest elementwise relative error between backprop and central
/// differences on a random net of widths ≤ 8.
pub fn worst_relative_error(output: OutputKind, seed: u64) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let arch = ArchSpec {
        input_dim: rng.random_range(2..=8),
        hidden: (0..rng.random_range(1..=3))
            .map(|_| rng.random_range(2..=8))
            .collect(),
        output,
    };
    let mut net = Network::init(arch.clone(), seed).unwrap();
    for layer in &mut net.layers {
        layer.b.mapv_inplace(|_| rng.random_range(-0.5..0.5));
    }
    let n = 6;
    let x = Array2::from_shape_fn((n, arch.input_dim), |_| rng.random_range(-1.0..1.0));
    let y = match output {
        // far from any output so the absolute value stays differentiable
        OutputKind::Regression => Array2::from_shape_fn((n, 1), |_| {
            rng.random_range(3.0..4.0) * if rng.random_bool(0.5) { 1.0 } else { -1.0 }
        }),
        OutputKind::Classification => {
            let mut y = Array2::zeros((n, 3));
            for r in 0..n {
                y[(r, rng.random_range(0..3))] = 1.0;
            }
            y
        }
    };
    let (_, grads) = net.loss_and_gradients(x.view(), y.view()).unwrap();

    let mut worst: f64 = 0.0;
    for k in 0..net.layers.len() {
        for idx in 0..net.layers[k].w.len() + net.layers[k].b.len() {
            let analytic = {
                let g = &grads[k];
                if idx < g.w.len() {
                    g.w.as_slice().unwrap()[idx]
                } else {
                    g.b[idx - g.w.len()]
                }
            };
            let probe = |delta: f64| {
                let mut p = net.clone();
                let l = &mut p.layers[k];
                if idx < l.w.len() {
                    l.w.as_slice_mut().unwrap()[idx] += delta;
                } else {
                    let j = idx - l.w.len();
                    l.b[j] += delta;
                }
                p.loss(x.view(), y.view()).unwrap()
            };
            let numeric = (probe(STEP) - probe(-STEP)) / (2.0 * STEP);
            let rel = (analytic - numeric).abs() / analytic.abs().max(numeric.abs()).max(FLOOR);
            worst = worst.max(rel);
        }
    }
    worst
}
