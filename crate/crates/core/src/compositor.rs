//! Places glyph masks into layout boxes and renders composites.

use std::path::Path;

use image::{GrayImage, Luma, Rgb, RgbImage};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::geometry::{to_pixel_box, Layout, LogoInstance, NormBox, PixelBox};
use crate::glyph::{resample_bilinear, GlyphRaster, Mask};

/// A glyph placed on a canvas. Only the pixel box region is stored; every
/// pixel outside it is background.
#[derive(Debug, Clone, PartialEq)]
pub struct PlacedMask {
    canvas_width: usize,
    canvas_height: usize,
    bbox: PixelBox,
    local: Mask,
}

impl PlacedMask {
    pub fn pixel_box(&self) -> PixelBox {
        self.bbox
    }

    pub fn canvas(&self) -> (usize, usize) {
        (self.canvas_width, self.canvas_height)
    }

    /// Canvas-coordinate lookup.
    pub fn get(&self, x: usize, y: usize) -> bool {
        let (x, y) = (x as i64, y as i64);
        if x < self.bbox.left || x >= self.bbox.right || y < self.bbox.top || y >= self.bbox.bottom {
            return false;
        }
        self.local
            .get((x - self.bbox.left) as usize, (y - self.bbox.top) as usize)
    }

    pub fn foreground_count(&self) -> usize {
        self.local.foreground_count()
    }

    /// Canvas-index of every foreground pixel, row-major.
    pub fn foreground_indices(&self) -> impl Iterator<Item = usize> + '_ {
        let w = self.local.width();
        let (l, t) = (self.bbox.left as usize, self.bbox.top as usize);
        let cw = self.canvas_width;
        self.local
            .data()
            .iter()
            .enumerate()
            .filter(|(_, &v)| v)
            .map(move |(i, _)| (t + i / w) * cw + l + i % w)
    }

    pub fn to_canvas_mask(&self) -> Mask {
        Mask::from_fn(self.canvas_width, self.canvas_height, |x, y| self.get(x, y))
    }
}

/// Resample the glyph's tight content box into `b` on the given canvas.
pub fn place_glyph(g: &GlyphRaster, b: &NormBox, canvas_w: usize, canvas_h: usize) -> PlacedMask {
    let bbox = to_pixel_box(b, canvas_w, canvas_h);
    let local = resample_bilinear(
        g.mask(),
        g.content_box(),
        bbox.width() as usize,
        bbox.height() as usize,
    );
    PlacedMask {
        canvas_width: canvas_w,
        canvas_height: canvas_h,
        bbox,
        local,
    }
}

/// Per-pixel glyph coverage counts plus each glyph's placement.
#[derive(Debug, Clone, PartialEq)]
pub struct OccupancyMap {
    width: usize,
    height: usize,
    counts: Vec<u8>,
    per_glyph: Vec<PlacedMask>,
}

impl OccupancyMap {
    pub fn from_placements(width: usize, height: usize, per_glyph: Vec<PlacedMask>) -> Self {
        let mut counts = vec![0u8; width * height];
        for p in &per_glyph {
            debug_assert_eq!(p.canvas(), (width, height));
            for i in p.foreground_indices() {
                counts[i] += 1;
            }
        }
        Self {
            width,
            height,
            counts,
            per_glyph,
        }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn counts(&self) -> &[u8] {
        &self.counts
    }

    pub fn count_at(&self, x: usize, y: usize) -> u8 {
        self.counts[y * self.width + x]
    }

    pub fn per_glyph(&self) -> &[PlacedMask] {
        &self.per_glyph
    }
}

/// Place each glyph raster in its box on a `canvas_w`x`canvas_h` canvas.
pub fn compose_rasters<'a, I>(rasters: I, layout: &Layout, canvas_w: usize, canvas_h: usize) -> Result<OccupancyMap>
where
    I: IntoIterator<Item = &'a GlyphRaster>,
{
    let rasters: Vec<&GlyphRaster> = rasters.into_iter().collect();
    if rasters.len() != layout.len() {
        return Err(Error::LayoutLengthMismatch {
            expected: rasters.len(),
            got: layout.len(),
        });
    }
    let placed = rasters
        .par_iter()
        .zip(layout.boxes().par_iter())
        .map(|(g, b)| place_glyph(g, b, canvas_w, canvas_h))
        .collect();
    Ok(OccupancyMap::from_placements(canvas_w, canvas_h, placed))
}

pub fn compose(instance: &LogoInstance, layout: &Layout) -> Result<OccupancyMap> {
    let (w, h) = instance.canvas();
    compose_rasters(instance.glyphs().iter().map(|g| g.raster()), layout, w, h)
}

/// Background 255, single coverage 0, collisions 128.
pub fn render_gray(occ: &OccupancyMap) -> GrayImage {
    GrayImage::from_fn(occ.width as u32, occ.height as u32, |x, y| {
        Luma([match occ.count_at(x as usize, y as usize) {
            0 => 255,
            1 => 0,
            _ => 128,
        }])
    })
}

const PALETTE: [[u8; 3]; 16] = [
    [230, 25, 75],
    [60, 180, 75],
    [0, 130, 200],
    [245, 130, 48],
    [145, 30, 180],
    [70, 240, 240],
    [240, 50, 230],
    [210, 245, 60],
    [250, 190, 212],
    [0, 128, 128],
    [220, 190, 255],
    [170, 110, 40],
    [128, 0, 0],
    [170, 255, 195],
    [128, 128, 0],
    [0, 0, 128],
];

/// Each glyph in its palette color (cycling by index); collisions gray.
pub fn render_colored(occ: &OccupancyMap) -> RgbImage {
    let mut img = RgbImage::from_pixel(occ.width as u32, occ.height as u32, Rgb([255, 255, 255]));
    for (i, p) in occ.per_glyph.iter().enumerate() {
        for idx in p.foreground_indices() {
            let (x, y) = ((idx % occ.width) as u32, (idx / occ.width) as u32);
            let c = if occ.counts[idx] >= 2 {
                [128, 128, 128]
            } else {
                PALETTE[i % PALETTE.len()]
            };
            img.put_pixel(x, y, Rgb(c));
        }
    }
    img
}

fn save_atomic<F>(path: &Path, save: F) -> Result<()>
where
    F: FnOnce(&Path) -> image::ImageResult<()>,
{
    let tmp = path.with_extension("png.tmp");
    save(&tmp).map_err(|e| match e {
        image::ImageError::IoError(io) => Error::io(path, io),
        other => Error::image(path, other),
    })?;
    std::fs::rename(&tmp, path).map_err(|e| Error::io(path, e))
}

pub fn render_png(occ: &OccupancyMap, path: &Path) -> Result<()> {
    let img = render_gray(occ);
    save_atomic(path, |p| img.save_with_format(p, image::ImageFormat::Png))
}

pub fn render_png_colored(occ: &OccupancyMap, path: &Path) -> Result<()> {
    let img = render_colored(occ);
    save_atomic(path, |p| img.save_with_format(p, image::ImageFormat::Png))
}
