//! Portable model container.
//!
//! Byte layout, all integers and reals little-endian:
//!
//! | field | encoding |
//! |---|---|
//! | magic | 8 bytes `NHKHMODL` |
//! | version | u32, currently 1 |
//! | input_dim | u32 |
//! | hidden count, then each width | u32 each |
//! | output kind | u8: 0 regression (linear), 1 classification (softmax) |
//! | tag | u32 byte length, then UTF-8 |
//! | scaler mean, scaler scale | input_dim f64 each |
//! | seed | u64 |
//! | epochs | u32 |
//! | final train loss, final validation loss | f64 each |
//! | layers, input side first | weights fan_in×fan_out row-major f64, then fan_out bias f64 |

use std::path::Path;

use ndarray::{Array1, Array2, ArrayView2};
use thiserror::Error;

use crate::network::{ArchSpec, Layer, NetError, Network, OutputKind, CLASS_VALUES};
use crate::scaler::Scaler;

pub const MAGIC: &[u8; 8] = b"NHKHMODL";
pub const VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum ModelFileError {
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("malformed model file: {0}")]
    Format(String),
}

#[derive(Clone, Debug, PartialEq)]
pub struct TrainingMeta {
    pub seed: u64,
    pub epochs: u32,
    pub train_loss: f64,
    pub val_loss: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ModelFile {
    /// Free-form description of the task and feature set.
    pub tag: String,
    pub scaler: Scaler,
    pub network: Network,
    pub meta: TrainingMeta,
}

#[derive(Clone, Debug, PartialEq)]
pub enum Predictions {
    Regression(Vec<f64>),
    Classification {
        /// Argmax class value from {1, 2, 4}.
        classes: Vec<u8>,
        probabilities: Array2<f64>,
    },
}

const PREDICT_CHUNK: usize = 512;

/// First index of the row maximum.
pub fn argmax(row: &[f64]) -> usize {
    let mut best = 0;
    for (k, &v) in row.iter().enumerate() {
        if v > row[best] {
            best = k;
        }
    }
    best
}

impl ModelFile {
    pub fn input_dim(&self) -> usize {
        self.network.arch.input_dim
    }

    /// Scales the raw features and runs the network.
    pub fn predict(&self, x: ArrayView2<f64>) -> Result<Predictions, NetError> {
        if x.ncols() != self.input_dim() {
            return Err(NetError::WidthMismatch {
                want: self.input_dim(),
                got: x.ncols(),
            });
        }
        let width = self.network.arch.output.width();
        let mut out = Array2::zeros((x.nrows(), width));
        for start in (0..x.nrows()).step_by(PREDICT_CHUNK) {
            let end = (start + PREDICT_CHUNK).min(x.nrows());
            let chunk = self.scaler.transform(x.slice(ndarray::s![start..end, ..]));
            out.slice_mut(ndarray::s![start..end, ..])
                .assign(&self.network.forward(chunk.view())?);
        }
        Ok(match self.network.arch.output {
            OutputKind::Regression => Predictions::Regression(out.column(0).to_vec()),
            OutputKind::Classification => Predictions::Classification {
                classes: out
                    .rows()
                    .into_iter()
                    .map(|r| CLASS_VALUES[argmax(r.as_slice().expect("standard layout"))])
                    .collect(),
                probabilities: out,
            },
        })
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let arch = &self.network.arch;
        let mut b = Vec::with_capacity(64 + 8 * arch.n_params());
        b.extend_from_slice(MAGIC);
        b.extend_from_slice(&VERSION.to_le_bytes());
        b.extend_from_slice(&(arch.input_dim as u32).to_le_bytes());
        b.extend_from_slice(&(arch.hidden.len() as u32).to_le_bytes());
        for &h in &arch.hidden {
            b.extend_from_slice(&(h as u32).to_le_bytes());
        }
        b.push(match arch.output {
            OutputKind::Regression => 0,
            OutputKind::Classification => 1,
        });
        b.extend_from_slice(&(self.tag.len() as u32).to_le_bytes());
        b.extend_from_slice(self.tag.as_bytes());
        let reals = |b: &mut Vec<u8>, xs: &mut dyn Iterator<Item = f64>| {
            for x in xs {
                b.extend_from_slice(&x.to_le_bytes());
            }
        };
        reals(&mut b, &mut self.scaler.mean.iter().copied());
        reals(&mut b, &mut self.scaler.scale.iter().copied());
        b.extend_from_slice(&self.meta.seed.to_le_bytes());
        b.extend_from_slice(&self.meta.epochs.to_le_bytes());
        reals(
            &mut b,
            &mut [self.meta.train_loss, self.meta.val_loss].into_iter(),
        );
        for layer in &self.network.layers {
            reals(&mut b, &mut layer.w.iter().copied());
            reals(&mut b, &mut layer.b.iter().copied());
        }
        b
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<ModelFile, ModelFileError> {
        let mut r = Cursor { bytes, pos: 0 };
        if r.take(8)? != MAGIC {
            return Err(ModelFileError::Format("bad magic".into()));
        }
        let version = r.u32()?;
        if version != VERSION {
            return Err(ModelFileError::Format(format!(
                "unsupported version {version}"
            )));
        }
        let input_dim = r.u32()? as usize;
        let n_hidden = r.u32()? as usize;
        let hidden = (0..n_hidden)
            .map(|_| r.u32().map(|h| h as usize))
            .collect::<Result<Vec<_>, _>>()?;
        let output = match r.take(1)?[0] {
            0 => OutputKind::Regression,
            1 => OutputKind::Classification,
            k => return Err(ModelFileError::Format(format!("unknown output kind {k}"))),
        };
        let arch = ArchSpec {
            input_dim,
            hidden,
            output,
        };
        arch.validate()
            .map_err(|e| ModelFileError::Format(e.to_string()))?;
        let tag_len = r.u32()? as usize;
        let tag = String::from_utf8(r.take(tag_len)?.to_vec())
            .map_err(|_| ModelFileError::Format("tag is not UTF-8".into()))?;
        let scaler = Scaler {
            mean: r.reals(input_dim)?,
            scale: r.reals(input_dim)?,
        };
        let seed = u64::from_le_bytes(r.take(8)?.try_into().expect("8 bytes"));
        let epochs = r.u32()?;
        let losses = r.reals(2)?;
        let mut layers = Vec::new();
        for (fan_in, fan_out) in arch.layer_shapes() {
            let w = Array2::from_shape_vec((fan_in, fan_out), r.reals(fan_in * fan_out)?)
                .expect("shape");
            let b = Array1::from(r.reals(fan_out)?);
            layers.push(Layer { w, b });
        }
        if r.pos != bytes.len() {
            return Err(ModelFileError::Format(format!(
                "{} trailing bytes",
                bytes.len() - r.pos
            )));
        }
        Ok(ModelFile {
            tag,
            scaler,
            network: Network { arch, layers },
            meta: TrainingMeta {
                seed,
                epochs,
                train_loss: losses[0],
                val_loss: losses[1],
            },
        })
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<(), ModelFileError> {
        Ok(std::fs::write(path, self.to_bytes())?)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<ModelFile, ModelFileError> {
        ModelFile::from_bytes(&std::fs::read(path)?)
    }
}

struct Cursor<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8], ModelFileError> {
        let end = self
            .pos
            .checked_add(n)
            .filter(|&e| e <= self.bytes.len())
            .ok_or_else(|| ModelFileError::Format(format!("truncated at byte {}", self.pos)))?;
        let s = &self.bytes[self.pos..end];
        self.pos = end;
        Ok(s)
    }

    fn u32(&mut self) -> Result<u32, ModelFileError> {
        Ok(u32::from_le_bytes(
            self.take(4)?.try_into().expect("4 bytes"),
        ))
    }

    fn reals(&mut self, n: usize) -> Result<Vec<f64>, ModelFileError> {
        let raw = self.take(
            n.checked_mul(8)
                .ok_or_else(|| ModelFileError::Format("size overflow".into()))?,
        )?;
        Ok(raw
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().expect("8 bytes")))
            .collect())
    }
}
