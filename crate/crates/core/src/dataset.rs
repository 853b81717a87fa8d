//! Parameter sweeps over the (U/t, η) plane and the labeled-sample CSV format.
//!
//! Random sampling uses ChaCha8 (a counter-based stream cipher, identical on
//! every platform) seeded with `seed_from_u64(seed)`. Each point consumes two
//! 64-bit words, first for U/t and then for η, and each word is mapped to
//! `[0, 1)` as `(w >> 11) * 2^-53`.
//!
//! Grids are row-major with η as the outer and U/t as the inner axis.

use std::io::{Read, Write};
use std::path::Path;

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use thiserror::Error;

use crate::correlators::{self, CorrelationSpectrum, WINDOW_LEN};
use crate::hamiltonian::ModelParams;
use crate::spectra::{self, ChiClass, GroundManifold, SpectraConfig};

/// Largest |η| allowed in a sweep.
pub const ETA_LIMIT: f64 = 0.95;
pub const N_FEATURES: usize = 4 * WINDOW_LEN * WINDOW_LEN;
pub const N_SCALARS: usize = 7;

#[derive(Debug, Error)]
pub enum DatasetError {
    #[error("invalid sweep: {0}")]
    InvalidSpec(String),
    #[error("line {line}: {message}")]
    Parse { line: u64, message: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Sampling {
    RandomUniform { count: usize },
    RegularGrid { n_eta: usize, n_u: usize },
}

#[derive(Clone, Debug, PartialEq)]
pub struct SweepSpec {
    pub u_range: (f64, f64),
    pub eta_range: (f64, f64),
    pub delta_over_t: f64,
    /// Pairing Δ/t; the analytic boundaries need 1.
    pub delta_pair_over_t: f64,
    pub sampling: Sampling,
    pub seed: u64,
    pub length: usize,
    pub n_keep: usize,
    pub inv_lambda: f64,
}

impl Default for SweepSpec {
    /// 20000 random points at δ = 0 on an L = 8 chain.
    fn default() -> Self {
        SweepSpec {
            u_range: (-4.0, 4.0),
            eta_range: (-ETA_LIMIT, ETA_LIMIT),
            delta_over_t: 0.0,
            delta_pair_over_t: 1.0,
            sampling: Sampling::RandomUniform { count: 20000 },
            seed: 0,
            length: 8,
            n_keep: spectra::DEFAULT_N_KEEP,
            inv_lambda: spectra::DEFAULT_INV_LAMBDA,
        }
    }
}

impl SweepSpec {
    pub fn validate(&self) -> Result<(), DatasetError> {
        let bad = |m: String| Err(DatasetError::InvalidSpec(m));
        let (elo, ehi) = self.eta_range;
        if !(elo >= -ETA_LIMIT && ehi <= ETA_LIMIT && elo <= ehi) {
            return bad(format!(
                "eta range [{elo}, {ehi}] must lie within [-{ETA_LIMIT}, {ETA_LIMIT}]"
            ));
        }
        let (ulo, uhi) = self.u_range;
        if !(ulo.is_finite() && uhi.is_finite() && ulo <= uhi) {
            return bad(format!("u range [{ulo}, {uhi}] is not an interval"));
        }
        if !self.delta_over_t.is_finite() || !self.delta_pair_over_t.is_finite() {
            return bad("delta values must be finite".into());
        }
        match self.sampling {
            Sampling::RandomUniform { count } if count == 0 => {
                return bad("count must be >= 1".into())
            }
            Sampling::RegularGrid { n_eta, n_u } if n_eta == 0 || n_u == 0 => {
                return bad("grid shape must be at least 1x1".into())
            }
            _ => {}
        }
        if self.length < 4 || self.length > crate::fock::MAX_SITES {
            return bad(format!(
                "chain length {} outside 4..={}",
                self.length,
                crate::fock::MAX_SITES
            ));
        }
        if self.n_keep == 0 || self.n_keep > 1 << self.length {
            return bad(format!("n_keep {} outside 1..=2^L", self.n_keep));
        }
        if !(self.inv_lambda > 0.0) {
            return bad("inv_lambda must be positive".into());
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        match self.sampling {
            Sampling::RandomUniform { count } => count,
            Sampling::RegularGrid { n_eta, n_u } => n_eta * n_u,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn spectra_config(&self) -> SpectraConfig {
        SpectraConfig {
            n_keep: self.n_keep,
            inv_lambda: self.inv_lambda,
            ..SpectraConfig::default()
        }
    }

    pub fn params(&self, u_over_t: f64, eta: f64) -> ModelParams {
        ModelParams {
            t: 1.0,
            delta_pair: self.delta_pair_over_t,
            u: u_over_t,
            delta_nh: self.delta_over_t,
            eta,
            length: self.length,
        }
    }

    /// Parameter points `(u_over_t, eta)` in canonical order.
    pub fn points(&self) -> Vec<(f64, f64)> {
        let lerp = |(lo, hi): (f64, f64), x: f64| lo + (hi - lo) * x;
        match self.sampling {
            Sampling::RandomUniform { count } => {
                let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
                let mut unit = || (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64);
                (0..count)
                    .map(|_| {
                        let u = lerp(self.u_range, unit());
                        let eta = lerp(self.eta_range, unit());
                        (u, eta)
                    })
                    .collect()
            }
            Sampling::RegularGrid { n_eta, n_u } => {
                let axis = |n: usize, range| -> Vec<f64> {
                    if n == 1 {
                        vec![lerp(range, 0.0)]
                    } else {
                        (0..n)
                            .map(|k| lerp(range, k as f64 / (n - 1) as f64))
                            .collect()
                    }
                };
                let etas = axis(n_eta, self.eta_range);
                let us = axis(n_u, self.u_range);
                etas.iter()
                    .flat_map(|&eta| us.iter().map(move |&u| (u, eta)))
                    .collect()
            }
        }
    }
}

/// One labeled parameter point.
#[derive(Clone, Debug, PartialEq)]
pub struct SampleRecord {
    pub u_over_t: f64,
    pub eta: f64,
    pub delta_over_t: f64,
    pub chi: f64,
    /// `None` when the spectrum could not be computed.
    pub chi_class: Option<ChiClass>,
    pub c_corr: f64,
    pub valid: bool,
    /// d, f, k, p row-major; empty for invalid points.
    pub features: Vec<f64>,
}

impl SampleRecord {
    pub fn two_point(&self) -> &[f64] {
        &self.features[..correlators::TWO_POINT_LEN]
    }
}

/// A record plus the diagnostics behind it.
#[derive(Clone, Debug)]
pub struct PointOutcome {
    pub record: SampleRecord,
    pub spectrum: Option<CorrelationSpectrum>,
    pub problem: Option<String>,
}

/// Runs Hamiltonian → spectrum → manifold → correlators for one point.
/// Failures are reported as invalid records, never as errors.
pub fn compute_point(p: &ModelParams, cfg: &SpectraConfig) -> PointOutcome {
    let mut record = SampleRecord {
        u_over_t: p.u / p.t,
        eta: p.eta,
        delta_over_t: p.delta_nh / p.t,
        chi: f64::NAN,
        chi_class: None,
        c_corr: f64::NAN,
        valid: false,
        features: Vec::new(),
    };
    let sys = match spectra::solve(p, cfg) {
        Ok(sys) => sys,
        Err(e) => {
            return PointOutcome {
                record,
                spectrum: None,
                problem: Some(e.to_string()),
            }
        }
    };
    let manifold = GroundManifold::from_eigensystem(&sys, cfg.inv_lambda);
    record.chi = manifold.chi;
    record.chi_class = Some(manifold.chi_class);
    if sys.near_exceptional {
        return PointOutcome {
            record,
            spectrum: None,
            problem: Some("retained eigenvectors nearly coalesce".into()),
        };
    }
    let features = match correlators::feature_vector(&manifold, true) {
        Ok(f) => f.flatten(),
        Err(e) => {
            return PointOutcome {
                record,
                spectrum: None,
                problem: Some(e.to_string()),
            }
        }
    };
    let spectrum = correlators::correlation_entropy(&manifold);
    record.c_corr = spectrum.c_corr;
    record.features = features;
    record.valid = true;
    PointOutcome {
        record,
        spectrum: Some(spectrum),
        problem: None,
    }
}

/// All points of the sweep with diagnostics, in canonical order.
pub fn generate_detailed(spec: &SweepSpec) -> Result<Vec<PointOutcome>, DatasetError> {
    spec.validate()?;
    let cfg = spec.spectra_config();
    Ok(spec
        .points()
        .into_par_iter()
        .map(|(u, eta)| compute_point(&spec.params(u, eta), &cfg))
        .collect())
}

pub fn generate(spec: &SweepSpec) -> Result<Vec<SampleRecord>, DatasetError> {
    Ok(generate_detailed(spec)?
        .into_iter()
        .map(|o| o.record)
        .collect())
}

/// Exact header of the dataset CSV.
pub fn csv_header() -> Vec<String> {
    let mut h: Vec<String> = [
        "u_over_t",
        "eta",
        "delta_over_t",
        "chi",
        "chi_class",
        "c_corr",
        "valid",
    ]
    .iter()
    .map(|s| s.to_string())
    .collect();
    for name in ["d", "f", "k", "p"] {
        for a in 0..WINDOW_LEN {
            for b in 0..WINDOW_LEN {
                h.push(format!("{name}_{a}{b}"));
            }
        }
    }
    h
}

/// 17 significant digits, enough to round-trip any f64.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn write_csv_to<W: Write>(records: &[SampleRecord], w: W) -> Result<(), DatasetError> {
    let mut out = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(w);
    out.write_record(csv_header())?;
    for r in records {
        let mut row = vec![
            fmt_f64(r.u_over_t),
            fmt_f64(r.eta),
            fmt_f64(r.delta_over_t),
            fmt_f64(r.chi),
            r.chi_class
                .map(|c| c.value().to_string())
                .unwrap_or_default(),
            fmt_f64(r.c_corr),
            if r.valid { "1" } else { "0" }.to_string(),
        ];
        if r.features.is_empty() {
            row.extend(std::iter::repeat_n(String::new(), N_FEATURES));
        } else {
            assert_eq!(
                r.features.len(),
                N_FEATURES,
                "feature vector must have {N_FEATURES} entries"
            );
            row.extend(r.features.iter().map(|&x| fmt_f64(x)));
        }
        out.write_record(&row)?;
    }
    out.flush()?;
    Ok(())
}

pub fn write_csv(records: &[SampleRecord], path: impl AsRef<Path>) -> Result<(), DatasetError> {
    let file = std::fs::File::create(path)?;
    write_csv_to(records, std::io::BufWriter::new(file))
}

fn parse_f64(field: &str, line: u64, column: &str) -> Result<f64, DatasetError> {
    field.parse::<f64>().map_err(|_| DatasetError::Parse {
        line,
        message: format!("column {column}: cannot parse {field:?} as a number"),
    })
}

pub fn read_csv_from<R: Read>(r: R) -> Result<Vec<SampleRecord>, DatasetError> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .from_reader(r);
    let header = csv_header();
    let mut records = Vec::new();
    for (k, row) in reader.records().enumerate() {
        let row = row?;
        let line = row.position().map(|p| p.line()).unwrap_or(k as u64 + 1);
        if row.len() != header.len() {
            return Err(DatasetError::Parse {
                line,
                message: format!("expected {} columns, found {}", header.len(), row.len()),
            });
        }
        if k == 0 {
            if row.iter().ne(header.iter().map(String::as_str)) {
                return Err(DatasetError::Parse {
                    line,
                    message: "header does not match the dataset layout".into(),
                });
            }
            continue;
        }
        let f = |i: usize| parse_f64(&row[i], line, &header[i]);
        let chi_class = match &row[4] {
            "" => None,
            s => Some(
                s.parse::<u8>()
                    .ok()
                    .and_then(ChiClass::from_value)
                    .ok_or_else(|| DatasetError::Parse {
                        line,
                        message: format!("column chi_class: {s:?} is not one of 1, 2, 4"),
                    })?,
            ),
        };
        let valid = match &row[6] {
            "1" => true,
            "0" => false,
            s => {
                return Err(DatasetError::Parse {
                    line,
                    message: format!("column valid: expected 0 or 1, found {s:?}"),
                })
            }
        };
        let features = if row.iter().skip(N_SCALARS).all(str::is_empty) {
            Vec::new()
        } else {
            (N_SCALARS..header.len()).map(f).collect::<Result<_, _>>()?
        };
        records.push(SampleRecord {
            u_over_t: f(0)?,
            eta: f(1)?,
            delta_over_t: f(2)?,
            chi: f(3)?,
            chi_class,
            c_corr: f(5)?,
            valid,
            features,
        });
    }
    if records.is_empty() && reader.position().line() == 1 {
        // nothing read at all: not even a header
        return Err(DatasetError::Parse {
            line: 1,
            message: "missing header".into(),
        });
    }
    Ok(records)
}

pub fn read_csv(path: impl AsRef<Path>) -> Result<Vec<SampleRecord>, DatasetError> {
    let file = std::fs::File::open(path)?;
    read_csv_from(std::io::BufReader::new(file))
}
