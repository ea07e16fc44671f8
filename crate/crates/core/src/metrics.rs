//! Geometric layout metrics, reported as percentages.

use serde::{Deserialize, Serialize};

use crate::compositor::{compose, OccupancyMap};
use crate::error::{Error, Result};
use crate::geometry::{box_aspect_ratio, Layout, LogoInstance};
use crate::glyph::GlyphElement;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricReport {
    pub overlap_iou: f64,
    pub visual_balance: f64,
    pub ratio_consistency: f64,
    pub per_glyph_ratio_dev: Vec<f64>,
}

/// Pixels covered twice or more over pixels covered at least once, ×100.
pub fn overlap_iou(occ: &OccupancyMap) -> f64 {
    let (overlap, union) = overlap_union(occ.counts());
    if union == 0 {
        0.0
    } else {
        100.0 * overlap as f64 / union as f64
    }
}

pub(crate) fn overlap_union(counts: &[u8]) -> (usize, usize) {
    counts.iter().fold((0, 0), |(o, u), &c| {
        (o + (c >= 2) as usize, u + (c >= 1) as usize)
    })
}

/// Distance of the area-weighted box centroid from the canvas center, ×100.
pub fn visual_balance(layout: &Layout) -> Result<f64> {
    if layout.is_empty() {
        return Err(Error::EmptyLayout);
    }
    let total = layout.total_area();
    let (mut sx, mut sy) = (0.0, 0.0);
    for b in layout.iter() {
        let (cx, cy) = b.center();
        sx += b.area() * cx;
        sy += b.area() * cy;
    }
    let (gx, gy) = (sx / total, sy / total);
    Ok(100.0 * (gx - 0.5).hypot(gy - 0.5))
}

/// Mean relative aspect-ratio deviation between each box and its glyph, ×100,
/// plus the per-glyph values.
pub fn ratio_consistency(
    layout: &Layout,
    glyphs: &[GlyphElement],
    canvas_w: usize,
    canvas_h: usize,
) -> Result<(f64, Vec<f64>)> {
    if layout.len() != glyphs.len() {
        return Err(Error::LayoutLengthMismatch {
            expected: glyphs.len(),
            got: layout.len(),
        });
    }
    let per: Vec<f64> = layout
        .iter()
        .zip(glyphs)
        .map(|(b, g)| {
            let want = g.aspect_ratio();
            100.0 * (box_aspect_ratio(b, canvas_w, canvas_h) - want).abs() / want
        })
        .collect();
    let mean = if per.is_empty() {
        0.0
    } else {
        per.iter().sum::<f64>() / per.len() as f64
    };
    Ok((mean, per))
}

pub fn evaluate(instance: &LogoInstance, layout: &Layout) -> Result<MetricReport> {
    let occ = compose(instance, layout)?;
    let (w, h) = instance.canvas();
    let (ratio, per) = ratio_consistency(layout, instance.glyphs(), w, h)?;
    Ok(MetricReport {
        overlap_iou: overlap_iou(&occ),
        visual_balance: visual_balance(layout)?,
        ratio_consistency: ratio,
        per_glyph_ratio_dev: per,
    })
}

/// Mean of each scalar metric over a set of reports.
pub fn mean_report(reports: &[MetricReport]) -> Option<MetricReport> {
    if reports.is_empty() {
        return None;
    }
    let n = reports.len() as f64;
    let avg = |f: fn(&MetricReport) -> f64| reports.iter().map(f).sum::<f64>() / n;
    Some(MetricReport {
        overlap_iou: avg(|r| r.overlap_iou),
        visual_balance: avg(|r| r.visual_balance),
        ratio_consistency: avg(|r| r.ratio_consistency),
        per_glyph_ratio_dev: Vec::new(),
    })
}

/// Independent overlap computation for cross-checking [`overlap_iou`].
///
/// Shares nothing with the compositor: boxes stay continuous, each canvas
/// pixel is sampled at 2×2 sub-pixel points, and glyph content is looked up
/// by nearest neighbor.
pub mod oracle {
    use crate::geometry::{Layout, LogoInstance};

    pub fn overlap_iou_oracle(instance: &LogoInstance, layout: &Layout) -> f64 {
        let (cw, ch) = instance.canvas();
        let (cwf, chf) = (cw as f64, ch as f64);
        let placed: Vec<_> = instance
            .glyphs()
            .iter()
            .zip(layout.iter())
            .map(|(g, b)| {
                let r = g.raster();
                let c = r.content_box();
                (
                    r,
                    c,
                    b.left() * cwf,
                    b.top() * chf,
                    b.width() * cwf,
                    b.height() * chf,
                )
            })
            .collect();
        let (mut overlap, mut union) = (0u64, 0u64);
        for py in 0..2 * ch {
            let sy = (py as f64 + 0.5) / 2.0;
            for px in 0..2 * cw {
                let sx = (px as f64 + 0.5) / 2.0;
                let mut hits = 0;
                for (r, c, l, t, w, h) in &placed {
                    if sx < *l || sx >= l + w || sy < *t || sy >= t + h {
                        continue;
                    }
                    let gx = (((sx - l) / w) * c.width() as f64).floor() as i64;
                    let gy = (((sy - t) / h) * c.height() as f64).floor() as i64;
                    let gx = gx.clamp(0, c.width() - 1) + c.left;
                    let gy = gy.clamp(0, c.height() - 1) + c.top;
                    if r.get(gx as usize, gy as usize) {
                        hits += 1;
                    }
                }
                union += (hits >= 1) as u64;
                overlap += (hits >= 2) as u64;
            }
        }
        if union == 0 {
            0.0
        } else {
            100.0 * overlap as f64 / union as f64
        }
    }
}

pub use oracle::overlap_iou_oracle;
