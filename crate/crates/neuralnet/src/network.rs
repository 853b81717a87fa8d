use ndarray::{Array1, Array2, ArrayView2, Axis, Zip};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use thiserror::Error;

/// Class values in output-unit order.
pub const CLASS_VALUES: [u8; 3] = [1, 2, 4];

#[derive(Debug, Error, PartialEq)]
pub enum NetError {
    #[error("input width {got} does not match the network input width {want}")]
    WidthMismatch { want: usize, got: usize },
    #[error("{0} labels for {1} samples")]
    LabelCount(usize, usize),
    #[error("non-finite value in {0}")]
    NonFinite(&'static str),
    #[error("invalid architecture: {0}")]
    Arch(String),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum OutputKind {
    /// One linear unit, mean absolute error.
    Regression,
    /// Softmax over the three χ classes, cross-entropy.
    Classification,
}

impl OutputKind {
    pub fn width(self) -> usize {
        match self {
            OutputKind::Regression => 1,
            OutputKind::Classification => CLASS_VALUES.len(),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ArchSpec {
    pub input_dim: usize,
    /// Rectifier layer widths.
    pub hidden: Vec<usize>,
    pub output: OutputKind,
}

impl ArchSpec {
    pub fn entropy(input_dim: usize) -> Self {
        ArchSpec {
            input_dim,
            hidden: vec![1024, 1024],
            output: OutputKind::Regression,
        }
    }

    pub fn chi_regression(input_dim: usize) -> Self {
        ArchSpec {
            input_dim,
            hidden: vec![128, 1024, 2048, 1024, 128],
            output: OutputKind::Regression,
        }
    }

    pub fn chi_classification(input_dim: usize) -> Self {
        ArchSpec {
            input_dim,
            hidden: vec![128, 1024, 3072, 1024, 128],
            output: OutputKind::Classification,
        }
    }

    /// `(fan_in, fan_out)` of every dense layer.
    pub fn layer_shapes(&self) -> Vec<(usize, usize)> {
        let mut widths = vec![self.input_dim];
        widths.extend(&self.hidden);
        widths.push(self.output.width());
        widths.windows(2).map(|w| (w[0], w[1])).collect()
    }

    pub fn validate(&self) -> Result<(), NetError> {
        if self.input_dim == 0 || self.hidden.contains(&0) {
            return Err(NetError::Arch("layer widths must be positive".into()));
        }
        Ok(())
    }

    pub fn n_params(&self) -> usize {
        self.layer_shapes().iter().map(|(i, o)| i * o + o).sum()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Layer {
    /// fan_in × fan_out; `z = a·W + b`.
    pub w: Array2<f64>,
    pub b: Array1<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Network {
    pub arch: ArchSpec,
    pub layers: Vec<Layer>,
}

/// Per-layer gradients, same shapes as the network.
pub type Gradients = Vec<Layer>;

pub fn relu(x: f64) -> f64 {
    if x > 0.0 {
        x
    } else {
        0.0
    }
}

/// Row-wise softmax, shifted by the row maximum.
pub fn softmax_rows(z: &Array2<f64>) -> Array2<f64> {
    let mut p = z.clone();
    for mut row in p.rows_mut() {
        let m = row.fold(f64::NEG_INFINITY, |a, &b| a.max(b));
        row.mapv_inplace(|x| (x - m).exp());
        let s = row.sum();
        row.mapv_inplace(|x| x / s);
    }
    p
}

impl Network {
    /// He initialization: `W ~ N(0, 2/fan_in)` drawn layer by layer, row-major,
    /// from ChaCha8 seeded with `seed`; biases zero.
    pub fn init(arch: ArchSpec, seed: u64) -> Result<Network, NetError> {
        arch.validate()?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let layers = arch
            .layer_shapes()
            .into_iter()
            .map(|(fan_in, fan_out)| {
                let std = (2.0 / fan_in as f64).sqrt();
                let w = Array2::from_shape_simple_fn((fan_in, fan_out), || {
                    let z: f64 = StandardNormal.sample(&mut rng);
                    std * z
                });
                Layer {
                    w,
                    b: Array1::zeros(fan_out),
                }
            })
            .collect();
        Ok(Network { arch, layers })
    }

    pub fn zeros(arch: ArchSpec) -> Network {
        let layers = arch
            .layer_shapes()
            .into_iter()
            .map(|(i, o)| Layer {
                w: Array2::zeros((i, o)),
                b: Array1::zeros(o),
            })
            .collect();
        Network { arch, layers }
    }

    fn check_width(&self, x: &ArrayView2<f64>) -> Result<(), NetError> {
        if x.ncols() != self.arch.input_dim {
            return Err(NetError::WidthMismatch {
                want: self.arch.input_dim,
                got: x.ncols(),
            });
        }
        Ok(())
    }

    /// Pre-activations of every layer.
    fn pre_activations(&self, x: ArrayView2<f64>) -> Vec<Array2<f64>> {
        let mut zs: Vec<Array2<f64>> = Vec::with_capacity(self.layers.len());
        for (k, layer) in self.layers.iter().enumerate() {
            let mut z = if k == 0 {
                x.dot(&layer.w)
            } else {
                zs[k - 1].mapv(relu).dot(&layer.w)
            };
            z += &layer.b;
            zs.push(z);
        }
        zs
    }

    /// Outputs: regression values (n×1) or class probabilities (n×3).
    pub fn forward(&self, x: ArrayView2<f64>) -> Result<Array2<f64>, NetError> {
        self.check_width(&x)?;
        let z = self.pre_activations(x).pop().expect("at least one layer");
        Ok(match self.arch.output {
            OutputKind::Regression => z,
            OutputKind::Classification => softmax_rows(&z),
        })
    }

    /// Mean loss over the batch and its exact gradient.
    ///
    /// `targets` is n×1 for regression and one-hot n×3 for classification.
    /// The absolute-error subgradient at zero residual is 0.
    pub fn loss_and_gradients(
        &self,
        x: ArrayView2<f64>,
        targets: ArrayView2<f64>,
    ) -> Result<(f64, Gradients), NetError> {
        self.check_width(&x)?;
        let n = x.nrows();
        if targets.nrows() != n || targets.ncols() != self.arch.output.width() {
            return Err(NetError::LabelCount(targets.nrows(), n));
        }
        let zs = self.pre_activations(x);
        let out = zs.last().expect("at least one layer");
        if out.iter().any(|v| !v.is_finite()) {
            return Err(NetError::NonFinite("forward pass"));
        }
        let inv_n = 1.0 / n as f64;
        let (loss, mut delta) = match self.arch.output {
            OutputKind::Regression => {
                let r = out - &targets;
                let loss = r.iter().map(|v| v.abs()).sum::<f64>() * inv_n;
                let d = r.mapv(|v| {
                    if v > 0.0 {
                        inv_n
                    } else if v < 0.0 {
                        -inv_n
                    } else {
                        0.0
                    }
                });
                (loss, d)
            }
            OutputKind::Classification => {
                let p = softmax_rows(out);
                let mut loss = 0.0;
                for (zr, yr) in out.rows().into_iter().zip(targets.rows()) {
                    let m = zr.fold(f64::NEG_INFINITY, |a, &b| a.max(b));
                    let lse = m + zr.iter().map(|v| (v - m).exp()).sum::<f64>().ln();
                    loss -= Zip::from(&zr)
                        .and(&yr)
                        .fold(0.0, |acc, &z, &y| acc + y * (z - lse));
                }
                ((loss * inv_n), (p - &targets) * inv_n)
            }
        };

        let mut grads: Vec<Layer> = Vec::with_capacity(self.layers.len());
        for k in (0..self.layers.len()).rev() {
            let input = if k == 0 {
                x.to_owned()
            } else {
                zs[k - 1].mapv(relu)
            };
            let mut gw = input.t().dot(&delta);
            if !gw.is_standard_layout() {
                gw = gw.as_standard_layout().into_owned();
            }
            let gb = delta.sum_axis(Axis(0));
            if k > 0 {
                let mut back = delta.dot(&self.layers[k].w.t());
                Zip::from(&mut back).and(&zs[k - 1]).for_each(|d, &z| {
                    if z <= 0.0 {
                        *d = 0.0
                    }
                });
                delta = back;
            }
            grads.push(Layer { w: gw, b: gb });
        }
        grads.reverse();
        if !loss.is_finite() {
            return Err(NetError::NonFinite("loss"));
        }
        Ok((loss, grads))
    }

    /// Mean loss without gradients.
    pub fn loss(&self, x: ArrayView2<f64>, targets: ArrayView2<f64>) -> Result<f64, NetError> {
        self.check_width(&x)?;
        let z = self.pre_activations(x).pop().expect("at least one layer");
        let n = x.nrows() as f64;
        Ok(match self.arch.output {
            OutputKind::Regression => (&z - &targets).iter().map(|v| v.abs()).sum::<f64>() / n,
            OutputKind::Classification => {
                let mut loss = 0.0;
                for (zr, yr) in z.rows().into_iter().zip(targets.rows()) {
                    let m = zr.fold(f64::NEG_INFINITY, |a, &b| a.max(b));
                    let lse = m + zr.iter().map(|v| (v - m).exp()).sum::<f64>().ln();
                    loss -= Zip::from(&zr)
                        .and(&yr)
                        .fold(0.0, |acc, &z, &y| acc + y * (z - lse));
                }
                loss / n
            }
        })
    }
}

/// One-hot rows for class indices.
pub fn one_hot(classes: &[usize]) -> Array2<f64> {
    let mut y = Array2::zeros((classes.len(), CLASS_VALUES.len()));
    for (r, &c) in classes.iter().enumerate() {
        y[(r, c)] = 1.0;
    }
    y
}
