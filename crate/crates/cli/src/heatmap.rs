//! Binary PPM (P6) heatmaps with boundary overlays.
//!
//! Rows run from the largest η at the top to the smallest at the bottom;
//! columns run from the smallest U/t on the left. Each grid cell is a square
//! block of `cell_px` pixels. Values map linearly from `[vmin, vmax]` onto
//! [`COLORMAP`]; invalid or non-finite cells are painted [`INVALID_COLOR`].

use nhkh_core::boundaries::{Family, Polyline};

use crate::grid::Axes;

pub type Rgb = [u8; 3];

/// Anchors of the color scale, evenly spaced from low to high values.
pub const COLORMAP: [Rgb; 9] = [
    [68, 1, 84],
    [71, 44, 122],
    [59, 81, 139],
    [44, 113, 142],
    [33, 144, 141],
    [39, 173, 129],
    [92, 200, 99],
    [170, 220, 50],
    [253, 231, 37],
];
pub const INVALID_COLOR: Rgb = [128, 128, 128];
pub const REAL_GAP_COLOR: Rgb = [0, 255, 255];
pub const IMAG_ZERO_COLOR: Rgb = [0, 0, 0];

/// Color for a position `x ∈ [0, 1]` along the scale.
pub fn colormap(x: f64) -> Rgb {
    let x = x.clamp(0.0, 1.0) * (COLORMAP.len() - 1) as f64;
    let k = (x.floor() as usize).min(COLORMAP.len() - 2);
    let f = x - k as f64;
    let (a, b) = (COLORMAP[k], COLORMAP[k + 1]);
    std::array::from_fn(|c| (a[c] as f64 + f * (b[c] as f64 - a[c] as f64)).round() as u8)
}

#[derive(Clone, Debug, PartialEq)]
pub struct Image {
    pub width: usize,
    pub height: usize,
    pub pixels: Vec<Rgb>,
}

impl Image {
    pub fn pixel(&self, x: usize, y: usize) -> Rgb {
        self.pixels[y * self.width + x]
    }

    fn put(&mut self, x: i64, y: i64, c: Rgb) {
        if x >= 0 && y >= 0 && (x as usize) < self.width && (y as usize) < self.height {
            self.pixels[y as usize * self.width + x as usize] = c;
        }
    }

    pub fn to_ppm(&self) -> Vec<u8> {
        let mut out = format!("P6\n{} {}\n255\n", self.width, self.height).into_bytes();
        out.reserve(3 * self.pixels.len());
        for p in &self.pixels {
            out.extend_from_slice(p);
        }
        out
    }
}

/// Paints one block per cell; `values[k]` belongs at `axes.index[k]`.
pub fn render(
    axes: &Axes,
    values: &[f64],
    valid: &[bool],
    vmin: f64,
    vmax: f64,
    cell_px: usize,
) -> Image {
    let (rows, cols) = (axes.etas.len(), axes.us.len());
    let mut img = Image {
        width: cols * cell_px,
        height: rows * cell_px,
        pixels: vec![INVALID_COLOR; rows * cols * cell_px * cell_px],
    };
    let span = if vmax > vmin { vmax - vmin } else { 1.0 };
    for (k, &(r, c)) in axes.index.iter().enumerate() {
        let color = if valid[k] && values[k].is_finite() {
            colormap((values[k] - vmin) / span)
        } else {
            INVALID_COLOR
        };
        let top = (rows - 1 - r) * cell_px;
        for y in top..top + cell_px {
            for x in c * cell_px..(c + 1) * cell_px {
                img.pixels[y * img.width + x] = color;
            }
        }
    }
    img
}

fn to_pixel(axes: &Axes, cell_px: usize, eta: f64, u: f64) -> (f64, f64) {
    let cs = cell_px as f64;
    let place = |v: f64, axis: &[f64]| {
        let (first, last) = (axis[0], axis[axis.len() - 1]);
        if last > first {
            (v - first) / (last - first) * (axis.len() - 1) as f64
        } else {
            0.0
        }
    };
    let x = place(u, &axes.us) * cs + cs / 2.0;
    let y = (axes.etas.len() - 1) as f64 * cs - place(eta, &axes.etas) * cs + cs / 2.0;
    (x, y)
}

/// Whether arc length `s` (pixels) is inked: dashes for the real-gap family,
/// dash-dot for the imaginary-zero family.
fn inked(family: Family, s: f64) -> bool {
    match family {
        Family::RealGap => s.rem_euclid(10.0) < 6.0,
        Family::ImagZero => {
            let p = s.rem_euclid(14.0);
            p < 6.0 || (9.0..11.0).contains(&p)
        }
    }
}

/// Draws each polyline two pixels wide, clipped to the image.
pub fn overlay(img: &mut Image, axes: &Axes, lines: &[Polyline], cell_px: usize) {
    for line in lines {
        let color = match line.family {
            Family::RealGap => REAL_GAP_COLOR,
            Family::ImagZero => IMAG_ZERO_COLOR,
        };
        let mut s = 0.0;
        for seg in line.vertices.windows(2) {
            let (x0, y0) = to_pixel(axes, cell_px, seg[0].0, seg[0].1);
            let (x1, y1) = to_pixel(axes, cell_px, seg[1].0, seg[1].1);
            let len = (x1 - x0).hypot(y1 - y0);
            let steps = len.ceil().max(1.0) as usize;
            // skip the far-off part of steep branches
            let outside = |x: f64, y: f64| {
                x < -1.0 || y < -1.0 || x > img.width as f64 || y > img.height as f64
            };
            if outside(x0, y0) && outside(x1, y1) {
                s += len;
                continue;
            }
            for k in 0..steps {
                let f = k as f64 / steps as f64;
                if inked(line.family, s + f * len) {
                    let (x, y) = (
                        (x0 + f * (x1 - x0)).floor() as i64,
                        (y0 + f * (y1 - y0)).floor() as i64,
                    );
                    img.put(x, y, color);
                    img.put(x + 1, y, color);
                    img.put(x, y + 1, color);
                }
            }
            s += len;
        }
    }
}
