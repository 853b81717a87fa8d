use ndarray::{Array2, ArrayView2, Axis};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::model_file::{argmax, ModelFile, TrainingMeta};
use crate::network::{one_hot, ArchSpec, NetError, Network, OutputKind};
use crate::optim::Adam;
use crate::scaler::Scaler;

#[derive(Clone, Debug, PartialEq)]
pub enum Targets {
    Regression(Vec<f64>),
    /// Class indices into (1, 2, 4).
    Classes(Vec<usize>),
}

impl Targets {
    pub fn len(&self) -> usize {
        match self {
            Targets::Regression(v) => v.len(),
            Targets::Classes(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    fn matrix(&self, rows: &[usize]) -> Array2<f64> {
        match self {
            Targets::Regression(v) => Array2::from_shape_fn((rows.len(), 1), |(r, _)| v[rows[r]]),
            Targets::Classes(c) => one_hot(&rows.iter().map(|&r| c[r]).collect::<Vec<_>>()),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct TrainConfig {
    pub learning_rate: f64,
    pub batch_size: usize,
    pub max_epochs: usize,
    pub val_fraction: f64,
    pub target_val_loss: f64,
    pub seed: u64,
    pub normalize_features: bool,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            learning_rate: 1e-6,
            batch_size: 64,
            max_epochs: 50,
            val_fraction: 0.1,
            target_val_loss: 0.005,
            seed: 0,
            normalize_features: true,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct EpochStats {
    pub epoch: usize,
    pub train_loss: f64,
    pub val_loss: f64,
    /// Accuracy for classification, mean absolute error for regression.
    pub val_metric: f64,
}

#[derive(Clone, Debug)]
pub struct TrainOutcome {
    pub model: ModelFile,
    pub curve: Vec<EpochStats>,
}

fn rows(x: ArrayView2<f64>, idx: &[usize]) -> Array2<f64> {
    x.select(Axis(0), idx)
}

fn metric(
    net: &Network,
    x: ArrayView2<f64>,
    targets: &Targets,
    idx: &[usize],
) -> Result<f64, NetError> {
    let out = net.forward(x)?;
    Ok(match targets {
        Targets::Regression(v) => {
            idx.iter()
                .zip(out.column(0))
                .map(|(&i, o)| (o - v[i]).abs())
                .sum::<f64>()
                / idx.len() as f64
        }
        Targets::Classes(c) => {
            let hits = idx
                .iter()
                .zip(out.rows())
                .filter(|(&i, row)| argmax(row.as_slice().expect("standard layout")) == c[i])
                .count();
            hits as f64 / idx.len() as f64
        }
    })
}

/// Trains with Adam on a seeded shuffle; the first `val_fraction` of the
/// shuffled samples are held out. Stops once the validation loss reaches
/// `target_val_loss` or after `max_epochs`.
pub fn train(
    x: ArrayView2<f64>,
    targets: &Targets,
    arch: ArchSpec,
    cfg: &TrainConfig,
    tag: &str,
) -> Result<TrainOutcome, NetError> {
    let n = x.nrows();
    if targets.len() != n {
        return Err(NetError::LabelCount(targets.len(), n));
    }
    if n == 0 {
        return Err(NetError::Arch("empty training set".into()));
    }
    match (arch.output, targets) {
        (OutputKind::Regression, Targets::Regression(_))
        | (OutputKind::Classification, Targets::Classes(_)) => {}
        _ => {
            return Err(NetError::Arch(
                "targets do not match the output layer".into(),
            ))
        }
    }
    if x.iter().any(|v| !v.is_finite()) {
        return Err(NetError::NonFinite("features"));
    }
    if x.ncols() != arch.input_dim {
        return Err(NetError::WidthMismatch {
            want: arch.input_dim,
            got: x.ncols(),
        });
    }

    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut rng);
    let n_val = ((cfg.val_fraction * n as f64).round() as usize).min(n - 1);
    let (val_idx, train_idx) = order.split_at(n_val);
    let mut train_idx = train_idx.to_vec();
    let val_idx = if val_idx.is_empty() {
        train_idx.clone()
    } else {
        val_idx.to_vec()
    };

    let scaler = if cfg.normalize_features {
        Scaler::fit(rows(x, &train_idx).view())
    } else {
        Scaler::identity(x.ncols())
    };
    let xs = scaler.transform(x);
    let x_val = rows(xs.view(), &val_idx);
    let y_val = targets.matrix(&val_idx);

    let mut net = Network::init(arch, cfg.seed)?;
    let mut adam = Adam::new(cfg.learning_rate);
    let batch = cfg.batch_size.clamp(1, train_idx.len());
    let mut curve = Vec::new();
    let (mut train_loss, mut val_loss) = (f64::NAN, f64::NAN);

    for epoch in 1..=cfg.max_epochs {
        train_idx.shuffle(&mut rng);
        let mut total = 0.0;
        for chunk in train_idx.chunks(batch) {
            let xb = rows(xs.view(), chunk);
            let yb = targets.matrix(chunk);
            let (loss, grads) = net.loss_and_gradients(xb.view(), yb.view())?;
            total += loss * chunk.len() as f64;
            let params = net
                .layers
                .iter_mut()
                .flat_map(|l| {
                    [
                        l.w.as_slice_mut().expect("standard layout"),
                        l.b.as_slice_mut().expect("standard layout"),
                    ]
                })
                .collect();
            let g = grads
                .iter()
                .flat_map(|l| {
                    [
                        l.w.as_slice().expect("standard layout"),
                        l.b.as_slice().expect("standard layout"),
                    ]
                })
                .collect();
            adam.step(params, g);
        }
        train_loss = total / train_idx.len() as f64;
        val_loss = net.loss(x_val.view(), y_val.view())?;
        if !train_loss.is_finite() || !val_loss.is_finite() {
            return Err(NetError::NonFinite("loss"));
        }
        let val_metric = metric(&net, x_val.view(), targets, &val_idx)?;
        log::info!("epoch {epoch}: train {train_loss:.6} val {val_loss:.6} metric {val_metric:.4}");
        curve.push(EpochStats {
            epoch,
            train_loss,
            val_loss,
            val_metric,
        });
        if val_loss <= cfg.target_val_loss {
            break;
        }
    }

    Ok(TrainOutcome {
        model: ModelFile {
            tag: tag.to_string(),
            scaler,
            network: net,
            meta: TrainingMeta {
                seed: cfg.seed,
                epochs: curve.len() as u32,
                train_loss,
                val_loss,
            },
        },
        curve,
    })
}
