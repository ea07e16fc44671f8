//! Binary glyph masks and the resampling they share with the compositor.

use std::ops::Deref;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::PixelBox;

/// Row-major binary occupancy grid. May be empty; see [`GlyphRaster`] for the
/// non-empty variant used as glyph input.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Mask {
    width: usize,
    height: usize,
    data: Vec<bool>,
}

impl Mask {
    pub fn new(width: usize, height: usize, data: Vec<bool>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::InvalidRaster(format!(
                "zero dimension {width}x{height}"
            )));
        }
        if data.len() != width * height {
            return Err(Error::InvalidRaster(format!(
                "{} values for {width}x{height}",
                data.len()
            )));
        }
        Ok(Self {
            width,
            height,
            data,
        })
    }

    /// All-background mask. Panics on a zero dimension.
    pub fn empty(width: usize, height: usize) -> Self {
        assert!(width > 0 && height > 0, "zero mask dimension");
        Self {
            width,
            height,
            data: vec![false; width * height],
        }
    }

    pub fn from_fn(width: usize, height: usize, mut f: impl FnMut(usize, usize) -> bool) -> Self {
        let mut m = Self::empty(width, height);
        for y in 0..height {
            for x in 0..width {
                m.data[y * width + x] = f(x, y);
            }
        }
        m
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn data(&self) -> &[bool] {
        &self.data
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> bool {
        self.data[y * self.width + x]
    }

    #[inline]
    pub fn set(&mut self, x: usize, y: usize, v: bool) {
        self.data[y * self.width + x] = v;
    }

    pub fn foreground_count(&self) -> usize {
        self.data.iter().filter(|&&v| v).count()
    }

    /// Tight bounding box of the foreground, exclusive on the right/bottom.
    pub fn content_bounds(&self) -> Option<PixelBox> {
        let (mut x0, mut y0, mut x1, mut y1) = (usize::MAX, usize::MAX, 0, 0);
        for y in 0..self.height {
            let row = &self.data[y * self.width..(y + 1) * self.width];
            if let Some(first) = row.iter().position(|&v| v) {
                let last = row.iter().rposition(|&v| v).unwrap();
                x0 = x0.min(first);
                x1 = x1.max(last + 1);
                y0 = y0.min(y);
                y1 = y + 1;
            }
        }
        (x0 != usize::MAX).then_some(PixelBox {
            left: x0 as i64,
            top: y0 as i64,
            right: x1 as i64,
            bottom: y1 as i64,
        })
    }

    /// Copy of the region `r`, which must lie inside the mask.
    pub fn crop(&self, r: PixelBox) -> Mask {
        let (w, h) = (r.width() as usize, r.height() as usize);
        let (ox, oy) = (r.left as usize, r.top as usize);
        Mask::from_fn(w, h, |x, y| self.get(ox + x, oy + y))
    }

    /// Copy of the mask surrounded by background borders.
    pub fn padded(&self, left: usize, top: usize, right: usize, bottom: usize) -> Mask {
        let w = self.width + left + right;
        let h = self.height + top + bottom;
        let mut out = Mask::empty(w, h);
        for y in 0..self.height {
            for x in 0..self.width {
                out.set(x + left, y + top, self.get(x, y));
            }
        }
        out
    }
}

/// A glyph's visual component: a binary mask with at least one foreground pixel.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct GlyphRaster(Mask);

impl GlyphRaster {
    pub fn new(width: usize, height: usize, data: Vec<bool>) -> Result<Self> {
        Self::from_mask(Mask::new(width, height, data)?)
    }

    pub fn from_mask(mask: Mask) -> Result<Self> {
        if !mask.data.iter().any(|&v| v) {
            return Err(Error::InvalidRaster("no foreground pixel".into()));
        }
        Ok(Self(mask))
    }

    /// Solid `width`x`height` block.
    pub fn filled(width: usize, height: usize) -> Self {
        Self(Mask::from_fn(width, height, |_, _| true))
    }

    pub fn mask(&self) -> &Mask {
        &self.0
    }

    pub fn into_mask(self) -> Mask {
        self.0
    }

    pub fn content_box(&self) -> PixelBox {
        self.0
            .content_bounds()
            .expect("glyph raster always has foreground")
    }

    /// The glyph cropped to its tight content box.
    pub fn tight(&self) -> GlyphRaster {
        GlyphRaster(self.0.crop(self.content_box()))
    }

    /// Width over height of the tight content box.
    pub fn aspect_ratio(&self) -> f64 {
        let b = self.content_box();
        b.width() as f64 / b.height() as f64
    }
}

impl Deref for GlyphRaster {
    type Target = Mask;

    fn deref(&self) -> &Mask {
        &self.0
    }
}

pub fn glyph_aspect_ratio(g: &GlyphRaster) -> f64 {
    g.aspect_ratio()
}

/// A character and its raster.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GlyphElement {
    text: String,
    raster: GlyphRaster,
}

impl GlyphElement {
    pub fn new(text: impl Into<String>, raster: GlyphRaster) -> Result<Self> {
        let text = text.into();
        if text.chars().count() != 1 {
            return Err(Error::InvalidGlyphText(text));
        }
        Ok(Self { text, raster })
    }

    pub fn text(&self) -> &str {
        &self.text
    }

    pub fn raster(&self) -> &GlyphRaster {
        &self.raster
    }

    pub fn aspect_ratio(&self) -> f64 {
        self.raster.aspect_ratio()
    }
}

/// Glyph input format.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GlyphMode {
    /// Pad the content box to a square before resizing; aspect ratio survives.
    Square,
    /// Stretch the content box to the frame.
    Tight,
}

/// Resize a glyph to a `side`x`side` frame in the given mode.
pub fn normalize_glyph(g: &GlyphRaster, mode: GlyphMode, side: usize) -> GlyphRaster {
    assert!(side > 0, "side must be positive");
    let tight = g.tight();
    let src = match mode {
        GlyphMode::Tight => tight.into_mask(),
        GlyphMode::Square => {
            let (w, h) = (tight.width(), tight.height());
            let s = w.max(h);
            let (px, py) = (s - w, s - h);
            tight.mask().padded(px / 2, py / 2, px - px / 2, py - py / 2)
        }
    };
    let full = PixelBox::new(0, 0, src.width() as i64, src.height() as i64);
    let mut out = resample_bilinear(&src, full, side, side);
    if out.foreground_count() == 0 {
        // Content thinner than one output pixel: keep the strongest sample.
        let vals = bilinear_values(&src, full, side, side);
        let (idx, _) = vals
            .iter()
            .enumerate()
            .fold((0, f64::MIN), |acc, (i, &v)| if v > acc.1 { (i, v) } else { acc });
        out.data[idx] = true;
    }
    GlyphRaster(out)
}

struct AxisTap {
    i0: usize,
    i1: usize,
    frac: f64,
}

fn axis_taps(src_len: usize, dst_len: usize) -> Vec<AxisTap> {
    let scale = src_len as f64 / dst_len as f64;
    let max = (src_len - 1) as f64;
    (0..dst_len)
        .map(|d| {
            let s = ((d as f64 + 0.5) * scale - 0.5).clamp(0.0, max);
            let i0 = s.floor() as usize;
            let i1 = (i0 + 1).min(src_len - 1);
            AxisTap {
                i0,
                i1,
                frac: s - i0 as f64,
            }
        })
        .collect()
}

/// Pixel-center-aligned bilinear interpolation of `region` of `src` onto a
/// `dst_w`x`dst_h` grid, edges clamped.
pub(crate) fn bilinear_values(src: &Mask, region: PixelBox, dst_w: usize, dst_h: usize) -> Vec<f64> {
    let (ox, oy) = (region.left as usize, region.top as usize);
    let xs = axis_taps(region.width() as usize, dst_w);
    let ys = axis_taps(region.height() as usize, dst_h);
    let v = |x: usize, y: usize| if src.get(ox + x, oy + y) { 1.0 } else { 0.0 };
    let mut out = Vec::with_capacity(dst_w * dst_h);
    for ty in &ys {
        for tx in &xs {
            let top = v(tx.i0, ty.i0) * (1.0 - tx.frac) + v(tx.i1, ty.i0) * tx.frac;
            let bot = v(tx.i0, ty.i1) * (1.0 - tx.frac) + v(tx.i1, ty.i1) * tx.frac;
            out.push(top * (1.0 - ty.frac) + bot * ty.frac);
        }
    }
    out
}

/// Bilinear resample of `region` to `dst_w`x`dst_h`, re-binarized at 0.5.
pub(crate) fn resample_bilinear(src: &Mask, region: PixelBox, dst_w: usize, dst_h: usize) -> Mask {
    let data = bilinear_values(src, region, dst_w, dst_h)
        .into_iter()
        .map(|v| v >= 0.5)
        .collect();
    Mask {
        width: dst_w,
        height: dst_h,
        data,
    }
}
