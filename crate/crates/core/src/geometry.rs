//! Normalized boxes, pixel boxes, layouts and logo instances.
//!
//! Coordinates are (left, top, right, bottom) with the origin at the top-left
//! corner of the canvas and y increasing downward.

use std::ops::Deref;

use serde::{Deserialize, Serialize};

use crate::constraints::ConstraintSet;
use crate::error::{Error, Result};
use crate::glyph::GlyphElement;

/// Upper bound on glyphs per logo.
pub const MAX_GLYPHS: usize = 64;

/// A box in canvas fractions: `0 <= left < right <= 1`, `0 <= top < bottom <= 1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "[f64; 4]", into = "[f64; 4]")]
pub struct NormBox {
    left: f64,
    top: f64,
    right: f64,
    bottom: f64,
}

impl NormBox {
    pub fn new(left: f64, top: f64, right: f64, bottom: f64) -> Result<Self> {
        let ok = (0.0..=1.0).contains(&left)
            && (0.0..=1.0).contains(&top)
            && (0.0..=1.0).contains(&right)
            && (0.0..=1.0).contains(&bottom)
            && left < right
            && top < bottom;
        if !ok {
            return Err(Error::InvalidBox {
                left,
                top,
                right,
                bottom,
            });
        }
        Ok(Self {
            left,
            top,
            right,
            bottom,
        })
    }

    /// Box of size `w`x`h` centered at `(cx, cy)`, shifted (not shrunk) to
    /// stay inside the canvas. Sizes are capped at 1.
    pub fn from_center(cx: f64, cy: f64, w: f64, h: f64) -> Result<Self> {
        let w = w.min(1.0);
        let h = h.min(1.0);
        let left = (cx - w / 2.0).clamp(0.0, 1.0 - w);
        let top = (cy - h / 2.0).clamp(0.0, 1.0 - h);
        Self::new(left, top, (left + w).min(1.0), (top + h).min(1.0))
    }

    pub fn full() -> Self {
        Self {
            left: 0.0,
            top: 0.0,
            right: 1.0,
            bottom: 1.0,
        }
    }

    pub fn left(&self) -> f64 {
        self.left
    }
    pub fn top(&self) -> f64 {
        self.top
    }
    pub fn right(&self) -> f64 {
        self.right
    }
    pub fn bottom(&self) -> f64 {
        self.bottom
    }
    pub fn width(&self) -> f64 {
        self.right - self.left
    }
    pub fn height(&self) -> f64 {
        self.bottom - self.top
    }
    pub fn center(&self) -> (f64, f64) {
        ((self.left + self.right) / 2.0, (self.top + self.bottom) / 2.0)
    }

    pub fn area(&self) -> f64 {
        box_area(self)
    }

    pub fn coords(&self) -> [f64; 4] {
        [self.left, self.top, self.right, self.bottom]
    }

    /// Translated copy; errors if the result leaves the canvas.
    pub fn translated(&self, dx: f64, dy: f64) -> Result<Self> {
        Self::new(
            self.left + dx,
            self.top + dy,
            self.right + dx,
            self.bottom + dy,
        )
    }
}

impl TryFrom<[f64; 4]> for NormBox {
    type Error = Error;

    fn try_from(c: [f64; 4]) -> Result<Self> {
        NormBox::new(c[0], c[1], c[2], c[3])
    }
}

impl From<NormBox> for [f64; 4] {
    fn from(b: NormBox) -> Self {
        b.coords()
    }
}

pub fn box_area(b: &NormBox) -> f64 {
    b.width() * b.height()
}

/// Pixel aspect ratio (width / height) of `b` on a concrete canvas.
pub fn box_aspect_ratio(b: &NormBox, canvas_w: usize, canvas_h: usize) -> f64 {
    (b.width() * canvas_w as f64) / (b.height() * canvas_h as f64)
}

/// Integer pixel box, exclusive on the right and bottom.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct PixelBox {
    pub left: i64,
    pub top: i64,
    pub right: i64,
    pub bottom: i64,
}

impl PixelBox {
    pub fn new(left: i64, top: i64, right: i64, bottom: i64) -> Self {
        Self {
            left,
            top,
            right,
            bottom,
        }
    }

    pub fn width(&self) -> i64 {
        self.right - self.left
    }

    pub fn height(&self) -> i64 {
        self.bottom - self.top
    }

    pub fn area(&self) -> i64 {
        self.width() * self.height()
    }
}

fn round_half_up(v: f64) -> i64 {
    (v + 0.5).floor() as i64
}

fn pixel_span(lo: f64, hi: f64, extent: usize) -> (i64, i64) {
    let n = extent as i64;
    let mut a = round_half_up(lo * extent as f64).clamp(0, n);
    let mut b = round_half_up(hi * extent as f64).clamp(0, n);
    if b <= a {
        b = a + 1;
        if b > n {
            b = n;
            a = n - 1;
        }
    }
    (a, b)
}

/// Discretize a normalized box onto a `canvas_w`x`canvas_h` canvas.
/// Never returns a zero-area box.
pub fn to_pixel_box(b: &NormBox, canvas_w: usize, canvas_h: usize) -> PixelBox {
    assert!(canvas_w > 0 && canvas_h > 0, "canvas must be non-empty");
    let (left, right) = pixel_span(b.left, b.right, canvas_w);
    let (top, bottom) = pixel_span(b.top, b.bottom, canvas_h);
    PixelBox {
        left,
        top,
        right,
        bottom,
    }
}

/// One box per glyph, in reading order.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Layout {
    boxes: Vec<NormBox>,
}

impl Layout {
    pub fn new(boxes: Vec<NormBox>) -> Self {
        Self { boxes }
    }

    pub fn boxes(&self) -> &[NormBox] {
        &self.boxes
    }

    pub fn boxes_mut(&mut self) -> &mut [NormBox] {
        &mut self.boxes
    }

    pub fn into_boxes(self) -> Vec<NormBox> {
        self.boxes
    }

    pub fn total_area(&self) -> f64 {
        self.boxes.iter().map(box_area).sum()
    }
}

impl Deref for Layout {
    type Target = [NormBox];

    fn deref(&self) -> &[NormBox] {
        &self.boxes
    }
}

impl FromIterator<NormBox> for Layout {
    fn from_iter<I: IntoIterator<Item = NormBox>>(iter: I) -> Self {
        Self::new(iter.into_iter().collect())
    }
}

/// A phrase to lay out: glyphs, canvas and optional reference layout and
/// user constraint.
#[derive(Debug, Clone)]
pub struct LogoInstance {
    glyphs: Vec<GlyphElement>,
    canvas_width: usize,
    canvas_height: usize,
    layout: Option<Layout>,
    constraint: Option<ConstraintSet>,
}

impl LogoInstance {
    pub fn new(glyphs: Vec<GlyphElement>, canvas_width: usize, canvas_height: usize) -> Result<Self> {
        if glyphs.is_empty() || glyphs.len() > MAX_GLYPHS {
            return Err(Error::InvalidInstance(format!(
                "{} glyphs (expected 1..={MAX_GLYPHS})",
                glyphs.len()
            )));
        }
        if canvas_width == 0 || canvas_height == 0 {
            return Err(Error::InvalidInstance(format!(
                "canvas {canvas_width}x{canvas_height}"
            )));
        }
        Ok(Self {
            glyphs,
            canvas_width,
            canvas_height,
            layout: None,
            constraint: None,
        })
    }

    pub fn with_layout(mut self, layout: Layout) -> Result<Self> {
        self.check_layout(&layout)?;
        self.layout = Some(layout);
        Ok(self)
    }

    pub fn with_constraint(mut self, constraint: ConstraintSet) -> Self {
        self.constraint = Some(constraint);
        self
    }

    pub fn check_layout(&self, layout: &Layout) -> Result<()> {
        if layout.len() != self.glyphs.len() {
            return Err(Error::LayoutLengthMismatch {
                expected: self.glyphs.len(),
                got: layout.len(),
            });
        }
        Ok(())
    }

    pub fn glyphs(&self) -> &[GlyphElement] {
        &self.glyphs
    }

    pub fn len(&self) -> usize {
        self.glyphs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.glyphs.is_empty()
    }

    pub fn canvas(&self) -> (usize, usize) {
        (self.canvas_width, self.canvas_height)
    }

    pub fn layout(&self) -> Option<&Layout> {
        self.layout.as_ref()
    }

    pub fn constraint(&self) -> Option<&ConstraintSet> {
        self.constraint.as_ref()
    }

    pub fn text(&self) -> String {
        self.glyphs.iter().map(|g| g.text()).collect()
    }
}
