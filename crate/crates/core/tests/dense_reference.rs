mod oracle;

use nhkh_core::correlators::{correlation_entropy, correlation_matrix, feature_vector};
use nhkh_core::hamiltonian::build_full_hamiltonian;
use nhkh_core::spectra::{self, GroundManifold, SpectraConfig};
use nhkh_core::ModelParams;
use num_complex::Complex64 as C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_params(rng: &mut ChaCha8Rng, length: usize, delta_nh: f64) -> ModelParams {
    ModelParams {
        t: 1.0,
        delta_pair: rng.random_range(0.0..1.5),
        u: rng.random_range(-2.0..2.0),
        delta_nh,
        eta: rng.random_range(-0.9..0.9),
        length,
    }
}

fn to_oracle(p: &ModelParams) -> oracle::Params {
    oracle::Params {
        length: p.length,
        t: p.t,
        delta_pair: p.delta_pair,
        u: p.u,
        delta_nh: p.delta_nh,
        eta: p.eta,
    }
}

fn max_diff(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len());
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}

#[test]
fn hamiltonian_matches_kronecker_construction() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for length in 2..=6 {
        for k in 0..6 {
            let p = random_params(&mut rng, length, if k % 2 == 0 { 0.0 } else { 0.5 });
            let ours = build_full_hamiltonian(&p).unwrap().to_dense();
            let reference = oracle::hamiltonian(&to_oracle(&p));
            let n = 1 << length;
            for i in 0..n {
                for j in 0..n {
                    let d = (ours[(i, j)] - reference[(i, j)]).norm();
                    assert!(
                        d <= 1e-12,
                        "L={length} ({i},{j}): {} vs {}",
                        ours[(i, j)],
                        reference[(i, j)]
                    );
                }
            }
        }
    }
}

#[test]
fn two_site_spectrum_has_closed_form() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for _ in 0..50 {
        let p = ModelParams {
            length: 2,
            delta_nh: rng.random_range(0.0..1.0),
            ..random_params(&mut rng, 2, 0.0)
        };
        let sys = spectra::solve(
            &p,
            &SpectraConfig {
                n_keep: 4,
                ..SpectraConfig::default()
            },
        )
        .unwrap();
        let (t1, d1) = (p.t * (1.0 + p.eta), p.delta_pair * (1.0 + p.eta));
        let w = C64::new(p.u * (1.0 + p.eta), -p.delta_nh * (1.0 + p.eta));
        let mut want = vec![w + d1, w - d1, -w + t1, -w - t1];
        want.sort_by(spectra::energy_order);
        for (e, x) in sys.energies.iter().zip(&want) {
            assert!((e - x).norm() <= 1e-12, "{e} vs {x}");
        }
    }
}

#[test]
fn features_and_correlation_matrix_match_reference() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let cfg = SpectraConfig::default();
    for k in 0..25 {
        let length = [4, 5, 6][k % 3];
        let p = random_params(&mut rng, length, if k % 2 == 0 { 0.0 } else { 0.5 });
        let sys = spectra::solve(&p, &cfg).unwrap();
        let manifold = GroundManifold::from_eigensystem(&sys, cfg.inv_lambda);
        let ours = feature_vector(&manifold, true).unwrap().flatten();
        let reference = oracle::features(&manifold.states, length);
        assert!(max_diff(&ours, &reference) <= 1e-10, "point {k}");
        let cm = correlation_matrix(&manifold);
        assert!(max_diff(&cm, &oracle::correlation_matrix(&manifold.states, length)) <= 1e-10);
    }
}

#[test]
fn kitaev_point_features_at_length_eight() {
    let p = ModelParams::solvable(8, 0.0, 0.0, 0.0);
    let cfg = SpectraConfig::default();
    let sys = spectra::solve(&p, &cfg).unwrap();
    let manifold = GroundManifold::from_eigensystem(&sys, cfg.inv_lambda);
    assert_eq!(manifold.chi_int, 2);
    let ours = feature_vector(&manifold, true).unwrap().flatten();
    let reference = oracle::features(&manifold.states, 8);
    assert!(max_diff(&ours, &reference) <= 1e-10);
}

#[test]
fn free_chain_entropy_matches_reference() {
    let p = ModelParams {
        delta_pair: 0.0,
        ..ModelParams::solvable(8, 0.0, 0.0, 0.0)
    };
    let cfg = SpectraConfig::default();
    let sys = spectra::solve(&p, &cfg).unwrap();
    let manifold = GroundManifold::from_eigensystem(&sys, cfg.inv_lambda);
    let spectrum = correlation_entropy(&manifold);

    let c = oracle::correlation_matrix(&manifold.states, 8);
    let sym = faer::Mat::<f64>::from_fn(8, 8, |i, j| 0.5 * (c[i * 8 + j] + c[j * 8 + i]));
    let s = sym.self_adjoint_eigenvalues(faer::Side::Lower).unwrap();
    let want: f64 = -s
        .iter()
        .map(|x| x.clamp(0.0, 1.0))
        .filter(|&x| x > 0.0)
        .map(|x| x * x.ln())
        .sum::<f64>()
        / 8.0;
    assert!((spectrum.c_corr - want).abs() <= 1e-10);
    assert!(spectrum.c_corr >= 0.0 && spectrum.c_corr <= (-1.0f64).exp() + 1e-12);
}
