//! Prediction grids: CSV columns `eta,u_over_t,true,pred,diff,valid`.

use std::io::Write;
use std::path::Path;

use anyhow::{bail, Result};

use crate::table::Table;

pub const GRID_HEADER: [&str; 6] = ["eta", "u_over_t", "true", "pred", "diff", "valid"];

#[derive(Clone, Debug, PartialEq)]
pub struct GridCell {
    pub eta: f64,
    pub u_over_t: f64,
    pub truth: f64,
    pub pred: f64,
    pub diff: f64,
    pub valid: bool,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct PhaseGrid {
    pub cells: Vec<GridCell>,
}

/// Sorted distinct values and each cell's `(row, col)` position, with η as
/// rows and U/t as columns.
#[derive(Clone, Debug, PartialEq)]
pub struct Axes {
    pub etas: Vec<f64>,
    pub us: Vec<f64>,
    pub index: Vec<(usize, usize)>,
}

fn distinct(mut v: Vec<f64>) -> Vec<f64> {
    v.sort_by(f64::total_cmp);
    v.dedup();
    v
}

/// Checks that every (η, U/t) pair occurs exactly once.
pub fn axes_of(points: &[(f64, f64)]) -> Result<Axes> {
    let etas = distinct(points.iter().map(|p| p.0).collect());
    let us = distinct(points.iter().map(|p| p.1).collect());
    if etas.len() * us.len() != points.len() {
        bail!(
            "grid is not rectangular: {} points for {} eta values x {} U/t values",
            points.len(),
            etas.len(),
            us.len()
        );
    }
    let mut seen = vec![false; points.len()];
    let mut index = Vec::with_capacity(points.len());
    for &(eta, u) in points {
        let r = etas
            .binary_search_by(|x| x.total_cmp(&eta))
            .expect("present");
        let c = us.binary_search_by(|x| x.total_cmp(&u)).expect("present");
        if std::mem::replace(&mut seen[r * us.len() + c], true) {
            bail!("grid point (eta={eta}, u_over_t={u}) appears twice");
        }
        index.push((r, c));
    }
    Ok(Axes { etas, us, index })
}

impl PhaseGrid {
    pub fn axes(&self) -> Result<Axes> {
        axes_of(
            &self
                .cells
                .iter()
                .map(|c| (c.eta, c.u_over_t))
                .collect::<Vec<_>>(),
        )
    }

    pub fn write_to<W: Write>(&self, w: W) -> Result<()> {
        let mut out = csv::WriterBuilder::new()
            .terminator(csv::Terminator::Any(b'\n'))
            .from_writer(w);
        out.write_record(GRID_HEADER)?;
        for c in &self.cells {
            out.write_record([
                c.eta.to_string(),
                c.u_over_t.to_string(),
                c.truth.to_string(),
                c.pred.to_string(),
                c.diff.to_string(),
                u8::from(c.valid).to_string(),
            ])?;
        }
        out.flush()?;
        Ok(())
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        self.write_to(std::io::BufWriter::new(std::fs::File::create(path)?))
    }

    pub fn read(path: &Path) -> Result<PhaseGrid> {
        let t = Table::read(path)?;
        let cols: Vec<usize> = GRID_HEADER
            .iter()
            .map(|h| t.column(h))
            .collect::<Result<_>>()?;
        let vals: Vec<Vec<f64>> = cols.iter().map(|&c| t.reals(c)).collect::<Result<_>>()?;
        let cells = (0..t.rows.len())
            .map(|r| GridCell {
                eta: vals[0][r],
                u_over_t: vals[1][r],
                truth: vals[2][r],
                pred: vals[3][r],
                diff: vals[4][r],
                valid: vals[5][r] == 1.0,
            })
            .collect();
        Ok(PhaseGrid { cells })
    }
}
