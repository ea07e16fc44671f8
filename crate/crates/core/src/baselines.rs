//! Rule-based layouts: (a) one horizontal line, (b) a horizontal or vertical
//! line chosen by coin flip.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::geometry::{Layout, NormBox};
use crate::glyph::GlyphElement;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RuleConfig {
    /// Gap between neighbors, as a fraction of the canvas extent along the line.
    pub gap: f64,
    /// Maximum fraction of the canvas the line may span.
    pub max_fill: f64,
    /// Maximum cross-axis glyph extent, as a canvas fraction.
    pub max_height: f64,
}

impl Default for RuleConfig {
    fn default() -> Self {
        Self {
            gap: 0.02,
            max_fill: 0.9,
            max_height: 0.5,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Axis {
    Horizontal,
    Vertical,
}

/// Lays out extents along one axis. `ratios[i]` is the along/cross extent
/// ratio of glyph `i`; `along` and `cross` are the canvas extents in pixels.
/// Returns (start, end) pairs along the axis and the shared cross span, all in
/// canvas fractions.
fn line(ratios: &[f64], along: f64, cross: f64, cfg: &RuleConfig) -> (Vec<(f64, f64)>, (f64, f64)) {
    let n = ratios.len();
    let gap = if n > 1 {
        cfg.gap.min(0.5 * cfg.max_fill / (n - 1) as f64)
    } else {
        0.0
    };
    let gaps_px = (n.saturating_sub(1)) as f64 * gap * along;
    let ratio_sum: f64 = ratios.iter().sum();
    let thick = ((cfg.max_fill * along - gaps_px) / ratio_sum).min(cfg.max_height * cross);
    let total = thick * ratio_sum + gaps_px;
    let mut pos = (along - total) / 2.0;
    let spans = ratios
        .iter()
        .map(|r| {
            let len = thick * r;
            let s = (pos / along, (pos + len) / along);
            pos += len + gap * along;
            s
        })
        .collect();
    let c0 = (cross - thick) / 2.0;
    (spans, (c0 / cross, (c0 + thick) / cross))
}

/// All glyphs on one centered horizontal line with a shared height; each box
/// keeps its glyph's aspect ratio.
pub fn layout_rule_a(glyphs: &[GlyphElement], canvas_w: usize, canvas_h: usize) -> Layout {
    layout_line(glyphs, canvas_w, canvas_h, Axis::Horizontal, &RuleConfig::default())
}

pub fn layout_line(
    glyphs: &[GlyphElement],
    canvas_w: usize,
    canvas_h: usize,
    axis: Axis,
    cfg: &RuleConfig,
) -> Layout {
    assert!(!glyphs.is_empty(), "rule layouts need at least one glyph");
    let (w, h) = (canvas_w as f64, canvas_h as f64);
    match axis {
        Axis::Horizontal => {
            let ratios: Vec<f64> = glyphs.iter().map(|g| g.aspect_ratio()).collect();
            let (spans, (t, b)) = line(&ratios, w, h, cfg);
            spans
                .into_iter()
                .map(|(l, r)| NormBox::new(l, t, r, b).expect("line layout stays on canvas"))
                .collect()
        }
        Axis::Vertical => {
            let ratios: Vec<f64> = glyphs.iter().map(|g| 1.0 / g.aspect_ratio()).collect();
            let (spans, (l, r)) = line(&ratios, h, w, cfg);
            spans
                .into_iter()
                .map(|(t, b)| NormBox::new(l, t, r, b).expect("line layout stays on canvas"))
                .collect()
        }
    }
}

/// The axis rule (b) picks for `seed`.
pub fn rule_b_axis(seed: u64) -> Axis {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    if rng.random_bool(0.5) {
        Axis::Horizontal
    } else {
        Axis::Vertical
    }
}

pub fn layout_rule_b(glyphs: &[GlyphElement], canvas_w: usize, canvas_h: usize, seed: u64) -> Layout {
    layout_line(glyphs, canvas_w, canvas_h, rule_b_axis(seed), &RuleConfig::default())
}
