use ndarray::{Array2, ArrayView2, Axis};

/// Standard deviations at or below this are treated as constant columns.
pub const CONSTANT_STD: f64 = 1e-12;

/// Per-column z-score `(x - mean) / scale`.
#[derive(Clone, Debug, PartialEq)]
pub struct Scaler {
    pub mean: Vec<f64>,
    /// Population standard deviation, or 1 for constant columns.
    pub scale: Vec<f64>,
}

impl Scaler {
    pub fn identity(width: usize) -> Self {
        Scaler {
            mean: vec![0.0; width],
            scale: vec![1.0; width],
        }
    }

    pub fn fit(x: ArrayView2<f64>) -> Self {
        if x.nrows() == 0 {
            return Scaler::identity(x.ncols());
        }
        let mean = x.mean_axis(Axis(0)).expect("nonempty").to_vec();
        let scale = x
            .std_axis(Axis(0), 0.0)
            .iter()
            .map(|&s| if s <= CONSTANT_STD { 1.0 } else { s })
            .collect();
        Scaler { mean, scale }
    }

    pub fn width(&self) -> usize {
        self.mean.len()
    }

    pub fn transform(&self, x: ArrayView2<f64>) -> Array2<f64> {
        let mut out = x.to_owned();
        for mut row in out.rows_mut() {
            for ((v, m), s) in row.iter_mut().zip(&self.mean).zip(&self.scale) {
                *v = (*v - m) / s;
            }
        }
        out
    }
}
