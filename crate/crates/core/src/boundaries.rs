//! Closed-form thermodynamic-limit regime boundaries on the solvable line Δ = t.
//!
//! With `r± = (1 ± η)/(1 ∓ η)` the real-line gap closes at
//! `U/t = ±√|δ²/t² − r±²|` and zero imaginary degeneracies appear at
//! `U/t = ±r±`. The two families coincide at δ = 0.

use std::io::Write;

use thiserror::Error;

use crate::hamiltonian::ModelParams;

/// Tolerance used to merge coinciding branch values.
pub const DEDUP_TOL: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum BoundaryError {
    #[error("dimerization must satisfy |eta| < 1, got {0}")]
    Dimerization(f64),
    #[error("hopping must be positive, got {0}")]
    Hopping(f64),
    #[error("no analytic boundary: the model is solvable only at delta_pair = t (got delta_pair = {delta_pair}, t = {t})")]
    NotSolvable { delta_pair: f64, t: f64 },
}

fn ratios(eta: f64) -> Result<(f64, f64), BoundaryError> {
    if !(eta.abs() < 1.0) {
        return Err(BoundaryError::Dimerization(eta));
    }
    Ok(((1.0 + eta) / (1.0 - eta), (1.0 - eta) / (1.0 + eta)))
}

fn sorted_unique(mut v: Vec<f64>) -> Vec<f64> {
    v.sort_by(f64::total_cmp);
    v.dedup_by(|a, b| (*a - *b).abs() <= DEDUP_TOL);
    v
}

/// U/t values where the real-line gap closes.
pub fn real_gap_boundary(eta: f64, delta_nh: f64, t: f64) -> Result<Vec<f64>, BoundaryError> {
    if !(t > 0.0) {
        return Err(BoundaryError::Hopping(t));
    }
    let (rp, rm) = ratios(eta)?;
    let d2 = (delta_nh / t).powi(2);
    let mut out = Vec::with_capacity(4);
    for r in [rp, rm] {
        let x = (d2 - r * r).abs().sqrt();
        out.push(x);
        out.push(-x);
    }
    Ok(sorted_unique(out))
}

/// U/t values where zero degeneracies of the imaginary spectrum appear.
pub fn imag_zero_boundary(eta: f64) -> Result<Vec<f64>, BoundaryError> {
    let (rp, rm) = ratios(eta)?;
    Ok(sorted_unique(vec![rp, -rp, rm, -rm]))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Family {
    RealGap,
    ImagZero,
}

impl Family {
    pub fn as_str(self) -> &'static str {
        match self {
            Family::RealGap => "real_gap",
            Family::ImagZero => "imag_zero",
        }
    }
}

/// Both boundary families at one η.
#[derive(Clone, Debug, PartialEq)]
pub struct BoundarySet {
    pub eta: f64,
    pub real_gap: Vec<f64>,
    pub imag_zero: Vec<f64>,
}

impl BoundarySet {
    /// Refuses models off the solvable line.
    pub fn for_model(p: &ModelParams) -> Result<BoundarySet, BoundaryError> {
        if (p.delta_pair - p.t).abs() > DEDUP_TOL * p.t.abs().max(1.0) {
            return Err(BoundaryError::NotSolvable {
                delta_pair: p.delta_pair,
                t: p.t,
            });
        }
        Ok(BoundarySet {
            eta: p.eta,
            real_gap: real_gap_boundary(p.eta, p.delta_nh, p.t)?,
            imag_zero: imag_zero_boundary(p.eta)?,
        })
    }
}

/// One continuous boundary branch as (η, U/t) vertices.
#[derive(Clone, Debug, PartialEq)]
pub struct Polyline {
    pub family: Family,
    /// e.g. `real_gap:+:r+`, sign of U then the ratio branch.
    pub branch_id: String,
    pub vertices: Vec<(f64, f64)>,
}

/// Evaluates each branch on `resolution` evenly spaced η values in
/// `[eta_min, eta_max]`. At δ = 0 only the real-gap family is emitted since
/// both families coincide.
pub fn boundary_polylines(
    eta_range: (f64, f64),
    delta_nh_over_t: f64,
    resolution: usize,
) -> Result<Vec<Polyline>, BoundaryError> {
    assert!(resolution >= 2, "resolution must be at least 2");
    let (lo, hi) = eta_range;
    if !(lo <= hi) {
        return Ok(Vec::new());
    }
    ratios(lo)?;
    ratios(hi)?;
    let etas: Vec<f64> = (0..resolution)
        .map(|k| lo + (hi - lo) * k as f64 / (resolution - 1) as f64)
        .collect();
    let d2 = delta_nh_over_t * delta_nh_over_t;
    let mut families = vec![Family::RealGap];
    if delta_nh_over_t != 0.0 {
        families.push(Family::ImagZero);
    }

    let mut out = Vec::new();
    for family in families {
        for (sign_name, sign) in [("+", 1.0), ("-", -1.0)] {
            for (ratio_name, plus) in [("r+", true), ("r-", false)] {
                let vertices = etas
                    .iter()
                    .map(|&eta| {
                        let r = if plus {
                            (1.0 + eta) / (1.0 - eta)
                        } else {
                            (1.0 - eta) / (1.0 + eta)
                        };
                        let u = match family {
                            Family::RealGap => (d2 - r * r).abs().sqrt(),
                            Family::ImagZero => r,
                        };
                        (eta, sign * u)
                    })
                    .collect();
                out.push(Polyline {
                    family,
                    branch_id: format!("{}:{}:{}", family.as_str(), sign_name, ratio_name),
                    vertices,
                });
            }
        }
    }
    Ok(out)
}

/// CSV with columns `branch_id,eta,u_over_t`.
pub fn write_polylines_csv<W: Write>(lines: &[Polyline], mut w: W) -> std::io::Result<()> {
    writeln!(w, "branch_id,eta,u_over_t")?;
    for line in lines {
        for (eta, u) in &line.vertices {
            writeln!(w, "{},{:.16e},{:.16e}", line.branch_id, eta, u)?;
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn assert_set(got: &[f64], want: &[f64]) {
        let want = sorted_unique(want.to_vec());
        assert_eq!(got.len(), want.len(), "{got:?} vs {want:?}");
        for (a, b) in got.iter().zip(&want) {
            assert_abs_diff_eq!(a, b, epsilon = 1e-12);
        }
    }

    #[test]
    fn real_gap_examples() {
        assert_set(&real_gap_boundary(0.0, 0.0, 1.0).unwrap(), &[1.0, -1.0]);
        let x = 0.75f64.sqrt();
        assert_set(&real_gap_boundary(0.0, 0.5, 1.0).unwrap(), &[x, -x]);
        assert_abs_diff_eq!(x, 0.86603, epsilon = 1e-5);
        assert_set(
            &real_gap_boundary(1.0 / 3.0, 0.0, 1.0).unwrap(),
            &[2.0, -2.0, 0.5, -0.5],
        );
        assert!(real_gap_boundary(1.0, 0.0, 1.0).is_err());
    }

    #[test]
    fn imag_zero_examples() {
        assert_set(&imag_zero_boundary(0.0).unwrap(), &[1.0, -1.0]);
        assert_set(
            &imag_zero_boundary(0.5).unwrap(),
            &[3.0, -3.0, 1.0 / 3.0, -1.0 / 3.0],
        );
        assert_set(
            &imag_zero_boundary(-0.5).unwrap(),
            &[1.0 / 3.0, -1.0 / 3.0, 3.0, -3.0],
        );
        assert!(imag_zero_boundary(-1.0).is_err());
    }

    #[test]
    fn refuses_off_the_solvable_line() {
        let mut p = ModelParams::solvable(8, 0.0, 0.5, 0.2);
        assert!(BoundarySet::for_model(&p).is_ok());
        p.delta_pair = 0.7;
        assert!(matches!(
            BoundarySet::for_model(&p),
            Err(BoundaryError::NotSolvable { .. })
        ));
    }

    #[test]
    fn polyline_examples() {
        let lines = boundary_polylines((-0.9, 0.9), 0.0, 3).unwrap();
        assert_eq!(lines.len(), 4);
        assert!(lines.iter().all(|l| l.family == Family::RealGap));
        let rplus = lines
            .iter()
            .find(|l| l.branch_id == "real_gap:+:r+")
            .unwrap();
        assert_eq!(rplus.vertices.len(), 3);
        assert_abs_diff_eq!(rplus.vertices[0].1, 0.1 / 1.9, epsilon = 1e-14);
        assert_abs_diff_eq!(rplus.vertices[1].1, 1.0, epsilon = 1e-14);
        assert_abs_diff_eq!(rplus.vertices[2].1, 19.0, epsilon = 1e-12);

        let lines = boundary_polylines((-0.9, 0.9), 0.5, 5).unwrap();
        assert_eq!(lines.len(), 8);
        assert!(lines.iter().any(|l| l.family == Family::ImagZero));

        assert!(boundary_polylines((0.5, -0.5), 0.5, 4).unwrap().is_empty());
    }

    #[test]
    fn csv_export() {
        let lines = boundary_polylines((0.0, 0.5), 0.0, 2).unwrap();
        let mut buf = Vec::new();
        write_polylines_csv(&lines, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut rows = text.lines();
        assert_eq!(rows.next(), Some("branch_id,eta,u_over_t"));
        assert_eq!(rows.count(), 8);
    }

    proptest! {
        #[test]
        fn families_coincide_without_nonhermiticity(eta in -0.95f64..0.95) {
            let a = real_gap_boundary(eta, 0.0, 1.0).unwrap();
            let b = imag_zero_boundary(eta).unwrap();
            prop_assert_eq!(a.len(), b.len());
            for (x, y) in a.iter().zip(&b) {
                prop_assert!((x - y).abs() <= 1e-12);
            }
        }

        #[test]
        fn symmetric_under_eta_and_u_reflection(eta in -0.95f64..0.95, d in 0.0f64..2.0) {
            for set in [real_gap_boundary(eta, d, 1.0).unwrap(), imag_zero_boundary(eta).unwrap()] {
                prop_assert!(set.iter().all(|x| x.is_finite()));
                let mirrored = sorted_unique(set.iter().map(|x| -x).collect());
                prop_assert_eq!(mirrored.len(), set.len());
            }
            let a = real_gap_boundary(eta, d, 1.0).unwrap();
            let b = real_gap_boundary(-eta, d, 1.0).unwrap();
            prop_assert_eq!(a.len(), b.len());
            for (x, y) in a.iter().zip(&b) {
                prop_assert!((x - y).abs() <= 1e-9 * x.abs().max(1.0));
            }
        }
    }
}
