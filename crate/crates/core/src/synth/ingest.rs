//! Splitting an RGBA logo image into per-glyph masks via its alpha channel.

use image::DynamicImage;

use crate::error::{Error, Result};
use crate::geometry::{Layout, LogoInstance, NormBox, PixelBox};
use crate::glyph::{GlyphElement, GlyphRaster, Mask};
use crate::schema::words_of;

/// Alpha at or above this value is foreground.
pub const ALPHA_THRESHOLD: u8 = 128;
/// Components closer than this fraction of the image width may merge.
pub const MERGE_GAP: f64 = 0.02;
/// Minimum vertical overlap, relative to the shorter component, for merging.
pub const MERGE_OVERLAP: f64 = 0.5;
/// Center-y gap, as a fraction of image height, that starts a new text row.
pub const ROW_GAP: f64 = 0.05;

/// 8-connected foreground components, each as a list of row-major indices.
/// Components are returned in order of their first pixel.
pub fn connected_components(mask: &Mask) -> Vec<Vec<usize>> {
    let (w, h) = (mask.width(), mask.height());
    let mut label = vec![usize::MAX; w * h];
    let mut out = Vec::new();
    let mut stack = Vec::new();
    for start in 0..w * h {
        if !mask.data()[start] || label[start] != usize::MAX {
            continue;
        }
        let id = out.len();
        let mut comp = Vec::new();
        label[start] = id;
        stack.push(start);
        while let Some(p) = stack.pop() {
            comp.push(p);
            let (x, y) = ((p % w) as i64, (p / w) as i64);
            for dy in -1..=1 {
                for dx in -1..=1 {
                    let (nx, ny) = (x + dx, y + dy);
                    if nx < 0 || ny < 0 || nx >= w as i64 || ny >= h as i64 {
                        continue;
                    }
                    let q = ny as usize * w + nx as usize;
                    if mask.data()[q] && label[q] == usize::MAX {
                        label[q] = id;
                        stack.push(q);
                    }
                }
            }
        }
        comp.sort_unstable();
        out.push(comp);
    }
    out
}

#[derive(Debug, Clone)]
struct Component {
    pixels: Vec<usize>,
    bbox: PixelBox,
}

fn bbox_of(pixels: &[usize], w: usize) -> PixelBox {
    let (mut l, mut t, mut r, mut b) = (i64::MAX, i64::MAX, i64::MIN, i64::MIN);
    for &p in pixels {
        let (x, y) = ((p % w) as i64, (p / w) as i64);
        l = l.min(x);
        t = t.min(y);
        r = r.max(x + 1);
        b = b.max(y + 1);
    }
    PixelBox::new(l, t, r, b)
}

fn should_merge(a: &PixelBox, b: &PixelBox, max_gap: f64) -> bool {
    let gap = (b.left - a.right).max(a.left - b.right).max(0) as f64;
    let overlap = (a.bottom.min(b.bottom) - a.top.max(b.top)).max(0) as f64;
    let shorter = a.height().min(b.height()) as f64;
    gap < max_gap && overlap > MERGE_OVERLAP * shorter
}

fn merge_components(mut comps: Vec<Component>, width: usize) -> Vec<Component> {
    let max_gap = MERGE_GAP * width as f64;
    loop {
        let mut pair = None;
        'search: for i in 0..comps.len() {
            for j in i + 1..comps.len() {
                if should_merge(&comps[i].bbox, &comps[j].bbox, max_gap) {
                    pair = Some((i, j));
                    break 'search;
                }
            }
        }
        let Some((i, j)) = pair else { return comps };
        let b = comps.remove(j);
        let a = &mut comps[i];
        a.pixels.extend(b.pixels);
        a.pixels.sort_unstable();
        a.bbox = bbox_of(&a.pixels, width);
    }
}

/// Sort components into rows by center y, then left to right.
fn reading_order(comps: &mut Vec<Component>, height: usize) {
    let cy: Vec<f64> = comps
        .iter()
        .map(|c| (c.bbox.top + c.bbox.bottom) as f64 / 2.0 / height as f64)
        .collect();
    let rows = crate::constraints::cluster(&cy, ROW_GAP);
    let mut ordered = Vec::with_capacity(comps.len());
    for mut row in rows {
        row.sort_by_key(|&i| (comps[i].bbox.left, comps[i].bbox.top));
        ordered.extend(row);
    }
    let taken: Vec<Component> = ordered.iter().map(|&i| comps[i].clone()).collect();
    *comps = taken;
}

/// Alpha-derived foreground mask of an image.
pub fn alpha_mask(image: &DynamicImage) -> Result<Mask> {
    if !image.color().has_alpha() {
        return Err(Error::NoAlphaChannel);
    }
    let rgba = image.to_rgba8();
    let (w, h) = rgba.dimensions();
    Mask::new(
        w as usize,
        h as usize,
        rgba.pixels().map(|p| p.0[3] >= ALPHA_THRESHOLD).collect(),
    )
}

/// Segment `image` into one glyph per character of `text`. The returned
/// instance carries the normalized tight component boxes as its layout.
pub fn ingest_rgba(image: &DynamicImage, text: &str) -> Result<LogoInstance> {
    let mask = alpha_mask(image)?;
    let (w, h) = (mask.width(), mask.height());
    let comps: Vec<Component> = connected_components(&mask)
        .into_iter()
        .map(|pixels| Component {
            bbox: bbox_of(&pixels, w),
            pixels,
        })
        .collect();
    let mut comps = merge_components(comps, w);
    reading_order(&mut comps, h);
    let chars = words_of(text);
    if comps.len() != chars.len() {
        return Err(Error::GlyphCountMismatch {
            components: comps.len(),
            chars: chars.len(),
        });
    }
    let mut glyphs = Vec::with_capacity(comps.len());
    let mut boxes = Vec::with_capacity(comps.len());
    for (c, ch) in comps.iter().zip(chars) {
        let b = c.bbox;
        let mut local = Mask::empty(b.width() as usize, b.height() as usize);
        for &p in &c.pixels {
            let (x, y) = (p % w, p / w);
            local.set(x - b.left as usize, y - b.top as usize, true);
        }
        glyphs.push(GlyphElement::new(ch, GlyphRaster::from_mask(local)?)?);
        boxes.push(NormBox::new(
            b.left as f64 / w as f64,
            b.top as f64 / h as f64,
            b.right as f64 / w as f64,
            b.bottom as f64 / h as f64,
        )?);
    }
    LogoInstance::new(glyphs, w, h)?.with_layout(Layout::new(boxes))
}

#[cfg(test)]
mod tests {
    use super::*;
    use image::{Rgba, RgbaImage};

    fn rgba(w: u32, h: u32, rects: &[(u32, u32, u32, u32)]) -> DynamicImage {
        let img = RgbaImage::from_fn(w, h, |x, y| {
            let on = rects.iter().any(|&(l, t, r, b)| x >= l && x < r && y >= t && y < b);
            Rgba([10, 20, 30, if on { 255 } else { 0 }])
        });
        DynamicImage::ImageRgba8(img)
    }

    #[test]
    fn two_blobs_two_chars() {
        let img = rgba(200, 100, &[(20, 30, 60, 80), (120, 25, 170, 85)]);
        let inst = ingest_rgba(&img, "ab").unwrap();
        let l = inst.layout().unwrap();
        assert_eq!(l[0].coords(), [0.1, 0.3, 0.3, 0.8]);
        assert_eq!(l[1].coords(), [0.6, 0.25, 0.85, 0.85]);
        assert_eq!(inst.glyphs()[0].raster().width(), 40);
        assert_eq!(inst.glyphs()[1].raster().height(), 60);
        assert_eq!(inst.glyphs()[1].text(), "b");
    }

    #[test]
    fn transparent_image_has_no_components() {
        let img = rgba(50, 50, &[]);
        assert!(matches!(
            ingest_rgba(&img, "a"),
            Err(Error::GlyphCountMismatch { components: 0, chars: 1 })
        ));
    }

    #[test]
    fn count_mismatch() {
        let img = rgba(300, 100, &[(10, 10, 50, 90), (100, 10, 150, 90), (200, 10, 250, 90)]);
        assert!(matches!(
            ingest_rgba(&img, "ab"),
            Err(Error::GlyphCountMismatch { components: 3, chars: 2 })
        ));
    }

    #[test]
    fn rgb_image_rejected() {
        let img = DynamicImage::ImageRgb8(image::RgbImage::new(4, 4));
        assert!(matches!(ingest_rgba(&img, "a"), Err(Error::NoAlphaChannel)));
    }

    #[test]
    fn close_strokes_merge() {
        // Two strokes 2px apart on a 200px image (gap < 4px) with full vertical overlap.
        let img = rgba(200, 100, &[(20, 20, 30, 80), (32, 20, 42, 80), (100, 20, 140, 80)]);
        let inst = ingest_rgba(&img, "ab").unwrap();
        assert_eq!(inst.glyphs()[0].raster().width(), 22);
        assert_eq!(inst.glyphs()[0].raster().foreground_count(), 2 * 10 * 60);
    }

    #[test]
    fn stacked_strokes_do_not_merge() {
        // Vertically disjoint: no overlap, so they stay separate glyphs.
        let img = rgba(200, 200, &[(20, 20, 60, 60), (20, 120, 60, 160)]);
        let inst = ingest_rgba(&img, "ab").unwrap();
        let l = inst.layout().unwrap();
        assert!(l[0].top() < l[1].top());
    }

    #[test]
    fn reading_order_rows_then_x() {
        let img = rgba(
            300,
            300,
            &[(200, 20, 260, 80), (20, 30, 80, 90), (120, 200, 180, 260), (20, 190, 80, 250)],
        );
        let inst = ingest_rgba(&img, "abcd").unwrap();
        let l = inst.layout().unwrap();
        let lefts: Vec<f64> = l.iter().map(|b| (b.left() * 300.0).round()).collect();
        assert_eq!(lefts, vec![20.0, 200.0, 20.0, 120.0]);
    }

    #[test]
    fn diagonal_pixels_connect() {
        let m = Mask::from_fn(4, 4, |x, y| x == y);
        assert_eq!(connected_components(&m).len(), 1);
        let m = Mask::from_fn(5, 1, |x, _| x != 2);
        assert_eq!(connected_components(&m).len(), 2);
    }
}
