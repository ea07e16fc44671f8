//! Toy visual-token pipeline: handcrafted patch features, adaptive average
//! pooling of token grids, and zero-initialized early feature fusion.

use crate::error::{Error, Result};
use crate::glyph::Mask;

/// Channels produced by [`patch_features`].
pub const PATCH_CHANNELS: usize = 4;

/// A `rows`x`cols` grid of `dim`-channel tokens, row-major, channels innermost.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureGrid {
    rows: usize,
    cols: usize,
    dim: usize,
    data: Vec<f64>,
}

impl FeatureGrid {
    pub fn new(rows: usize, cols: usize, dim: usize, data: Vec<f64>) -> Result<Self> {
        if rows == 0 || cols == 0 || dim == 0 {
            return Err(Error::ShapeMismatch(format!("empty grid {rows}x{cols}x{dim}")));
        }
        if data.len() != rows * cols * dim {
            return Err(Error::ShapeMismatch(format!(
                "{} values for {rows}x{cols}x{dim}",
                data.len()
            )));
        }
        if data.iter().any(|v| !v.is_finite()) {
            return Err(Error::ShapeMismatch("non-finite feature value".into()));
        }
        Ok(Self {
            rows,
            cols,
            dim,
            data,
        })
    }

    pub fn from_fn(rows: usize, cols: usize, dim: usize, mut f: impl FnMut(usize, usize, usize) -> f64) -> Result<Self> {
        let mut data = Vec::with_capacity(rows * cols * dim);
        for r in 0..rows {
            for c in 0..cols {
                for k in 0..dim {
                    data.push(f(r, c, k));
                }
            }
        }
        Self::new(rows, cols, dim, data)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }
    pub fn cols(&self) -> usize {
        self.cols
    }
    pub fn dim(&self) -> usize {
        self.dim
    }
    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn tokens(&self) -> usize {
        self.rows * self.cols
    }

    pub fn token(&self, r: usize, c: usize) -> &[f64] {
        let start = (r * self.cols + c) * self.dim;
        &self.data[start..start + self.dim]
    }

    pub fn get(&self, r: usize, c: usize, k: usize) -> f64 {
        self.data[(r * self.cols + c) * self.dim + k]
    }

    /// Per-channel mean over all tokens.
    pub fn channel_means(&self) -> Vec<f64> {
        let mut sums = vec![0.0; self.dim];
        for tok in self.data.chunks(self.dim) {
            for (s, v) in sums.iter_mut().zip(tok) {
                *s += v;
            }
        }
        sums.iter().map(|s| s / self.tokens() as f64).collect()
    }
}

/// Equal partition of `len` into `parts` cells, remainder absorbed by the last.
fn partition(len: usize, parts: usize) -> Vec<(usize, usize)> {
    let step = len / parts;
    (0..parts)
        .map(|i| (i * step, if i + 1 == parts { len } else { (i + 1) * step }))
        .collect()
}

/// Mean intensity, horizontal edge density, vertical edge density and fill
/// ratio per cell of a `grid`x`grid` partition of the mask.
///
/// Horizontal edge density counts differing left/right neighbor pairs inside
/// the cell; vertical counts differing up/down pairs. Fill ratio is the
/// foreground count over the area of the cell's own foreground bounding box.
pub fn patch_features(mask: &Mask, grid: usize) -> FeatureGrid {
    assert!(grid > 0, "grid must be positive");
    let xs = partition(mask.width(), grid);
    let ys = partition(mask.height(), grid);
    let mut data = Vec::with_capacity(grid * grid * PATCH_CHANNELS);
    for &(y0, y1) in &ys {
        for &(x0, x1) in &xs {
            data.extend_from_slice(&cell_features(mask, x0, x1, y0, y1));
        }
    }
    FeatureGrid {
        rows: grid,
        cols: grid,
        dim: PATCH_CHANNELS,
        data,
    }
}

fn ratio(num: usize, den: usize) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

fn cell_features(m: &Mask, x0: usize, x1: usize, y0: usize, y1: usize) -> [f64; PATCH_CHANNELS] {
    let (mut fg, mut h_edges, mut v_edges) = (0, 0, 0);
    let (mut bx0, mut by0, mut bx1, mut by1) = (usize::MAX, usize::MAX, 0, 0);
    for y in y0..y1 {
        for x in x0..x1 {
            let v = m.get(x, y);
            if v {
                fg += 1;
                bx0 = bx0.min(x);
                by0 = by0.min(y);
                bx1 = bx1.max(x + 1);
                by1 = by1.max(y + 1);
            }
            if x + 1 < x1 && m.get(x + 1, y) != v {
                h_edges += 1;
            }
            if y + 1 < y1 && m.get(x, y + 1) != v {
                v_edges += 1;
            }
        }
    }
    let (w, h) = (x1 - x0, y1 - y0);
    let bbox = if fg > 0 { (bx1 - bx0) * (by1 - by0) } else { 0 };
    [
        ratio(fg, w * h),
        ratio(h_edges, w.saturating_sub(1) * h),
        ratio(v_edges, w * h.saturating_sub(1)),
        ratio(fg, bbox),
    ]
}

/// Adaptive-pooling bin for output index `i`: `[floor(i*n/m), ceil((i+1)*n/m))`.
fn bin(i: usize, input: usize, output: usize) -> (usize, usize) {
    let start = i * input / output;
    let end = ((i + 1) * input).div_ceil(output);
    (start, end)
}

/// Average-pool `f` to `out_rows`x`out_cols` tokens with adaptive bins.
pub fn adaptive_avg_pool(f: &FeatureGrid, out_rows: usize, out_cols: usize) -> Result<FeatureGrid> {
    if out_rows == 0 || out_cols == 0 || out_rows > f.rows || out_cols > f.cols {
        return Err(Error::InvalidOutputShape {
            rows: out_rows,
            cols: out_cols,
            in_rows: f.rows,
            in_cols: f.cols,
        });
    }
    let mut data = Vec::with_capacity(out_rows * out_cols * f.dim);
    for i in 0..out_rows {
        let (r0, r1) = bin(i, f.rows, out_rows);
        for j in 0..out_cols {
            let (c0, c1) = bin(j, f.cols, out_cols);
            let count = ((r1 - r0) * (c1 - c0)) as f64;
            for k in 0..f.dim {
                let mut s = 0.0;
                for r in r0..r1 {
                    for c in c0..c1 {
                        s += f.get(r, c, k);
                    }
                }
                data.push(s / count);
            }
        }
    }
    Ok(FeatureGrid {
        rows: out_rows,
        cols: out_cols,
        dim: f.dim,
        data,
    })
}

/// Linear map from `in_dim` to `out_dim` channels, weights row-major
/// `[out][in]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Projection {
    in_dim: usize,
    out_dim: usize,
    weights: Vec<f64>,
}

impl Projection {
    /// The fusion projection's starting point: every weight zero.
    pub fn zeros(in_dim: usize, out_dim: usize) -> Self {
        Self {
            in_dim,
            out_dim,
            weights: vec![0.0; in_dim * out_dim],
        }
    }

    pub fn identity(dim: usize) -> Self {
        let mut p = Self::zeros(dim, dim);
        for i in 0..dim {
            p.weights[i * dim + i] = 1.0;
        }
        p
    }

    pub fn new(in_dim: usize, out_dim: usize, weights: Vec<f64>) -> Result<Self> {
        if weights.len() != in_dim * out_dim {
            return Err(Error::ShapeMismatch(format!(
                "{} weights for {in_dim}->{out_dim}",
                weights.len()
            )));
        }
        Ok(Self {
            in_dim,
            out_dim,
            weights,
        })
    }

    pub fn in_dim(&self) -> usize {
        self.in_dim
    }

    pub fn out_dim(&self) -> usize {
        self.out_dim
    }

    fn apply_into(&self, x: &[f64], out: &mut [f64]) {
        for (o, row) in out.iter_mut().zip(self.weights.chunks(self.in_dim)) {
            *o = row.iter().zip(x).map(|(w, v)| w * v).sum();
        }
    }
}

/// `base + proj(early)`, token by token.
pub fn early_fusion(base: &FeatureGrid, early: &FeatureGrid, proj: &Projection) -> Result<FeatureGrid> {
    if base.rows != early.rows || base.cols != early.cols {
        return Err(Error::ShapeMismatch(format!(
            "base {}x{} vs early {}x{}",
            base.rows, base.cols, early.rows, early.cols
        )));
    }
    if proj.in_dim != early.dim || proj.out_dim != base.dim {
        return Err(Error::ShapeMismatch(format!(
            "projection {}->{} for early dim {} and base dim {}",
            proj.in_dim, proj.out_dim, early.dim, base.dim
        )));
    }
    let mut data = base.data.clone();
    let mut delta = vec![0.0; base.dim];
    for (out_tok, early_tok) in data.chunks_mut(base.dim).zip(early.data.chunks(early.dim)) {
        proj.apply_into(early_tok, &mut delta);
        for (o, d) in out_tok.iter_mut().zip(&delta) {
            // Adding a signed zero can flip -0.0 to +0.0; skip it.
            if *d != 0.0 {
                *o += d;
            }
        }
    }
    Ok(FeatureGrid {
        rows: base.rows,
        cols: base.cols,
        dim: base.dim,
        data,
    })
}
