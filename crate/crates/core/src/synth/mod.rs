//! Synthetic dataset generation: procedural glyphs, template layouts and
//! self-annotation, plus RGBA ingestion of existing logos.

pub mod ingest;
pub mod templates;

use std::fs;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::compositor::{compose_rasters, render_png};
use crate::constraints::{check_constraint, Alignment, ConstraintSet};
use crate::error::{Error, Result};
use crate::geometry::Layout;
use crate::glyph::{GlyphElement, GlyphRaster, Mask};
use crate::metrics::{overlap_iou, ratio_consistency};
use crate::schema::{
    words_of, write_json_atomic, write_mask_png, Annotation, DatasetManifest, LayoutRecord, SampleEntry,
    ANNOTATION_FILE, MANIFEST_FILE, MANIFEST_VERSION,
};
use crate::solver::derive_seed;

pub use ingest::{connected_components, ingest_rgba};
pub use templates::{constraint_layout, generate_template_layout, Template, TemplateOutput};

pub const CANVASES: [(usize, usize); 3] = [(512, 512), (640, 480), (480, 640)];
pub const MIN_GLYPHS: usize = 2;
pub const MAX_SYNTH_GLYPHS: usize = 12;
const MIN_AR: f64 = 0.3;
const MAX_AR: f64 = 3.0;

struct Canvas {
    mask: Mask,
}

impl Canvas {
    fn inside(&self, x: f64, y: f64) -> bool {
        x >= 0.0 && y >= 0.0 && x < self.mask.width() as f64 && y < self.mask.height() as f64
    }

    fn rect(&mut self, x0: f64, y0: f64, x1: f64, y1: f64) {
        let (w, h) = (self.mask.width() as f64, self.mask.height() as f64);
        let xa = x0.min(x1).clamp(0.0, w) as usize;
        let xb = (x0.max(x1).clamp(0.0, w).ceil() as usize).max(xa + 1).min(w as usize);
        let ya = y0.min(y1).clamp(0.0, h) as usize;
        let yb = (y0.max(y1).clamp(0.0, h).ceil() as usize).max(ya + 1).min(h as usize);
        for y in ya..yb {
            for x in xa..xb {
                self.mask.set(x, y, true);
            }
        }
    }

    fn disc(&mut self, cx: f64, cy: f64, r: f64) {
        let (w, h) = (self.mask.width() as i64, self.mask.height() as i64);
        let (x0, x1) = ((cx - r).floor() as i64, (cx + r).ceil() as i64);
        let (y0, y1) = ((cy - r).floor() as i64, (cy + r).ceil() as i64);
        for y in y0.max(0)..=y1.min(h - 1) {
            for x in x0.max(0)..=x1.min(w - 1) {
                let (dx, dy) = (x as f64 + 0.5 - cx, y as f64 + 0.5 - cy);
                if dx * dx + dy * dy <= r * r {
                    self.mask.set(x as usize, y as usize, true);
                }
            }
        }
        // The pixel under the center is always set so strokes stay connected.
        self.mask.set(cx as usize, cy as usize, true);
    }

    /// Stamp discs along a path until it leaves the canvas.
    fn stroke(&mut self, r: f64, points: impl Iterator<Item = (f64, f64)>) {
        for (x, y) in points {
            if !self.inside(x, y) {
                break;
            }
            self.disc(x, y, r);
        }
    }

    fn anchor<R: Rng + ?Sized>(&self, rng: &mut R) -> (f64, f64) {
        let fg: Vec<usize> = (0..self.mask.data().len()).filter(|&i| self.mask.data()[i]).collect();
        let p = fg[rng.random_range(0..fg.len())];
        let w = self.mask.width();
        ((p % w) as f64 + 0.5, (p / w) as f64 + 0.5)
    }
}

fn bar<R: Rng + ?Sized>(rng: &mut R, w: usize, h: usize, single: bool) -> Canvas {
    let mut c = Canvas { mask: Mask::empty(w, h) };
    let horizontal = rng.random_bool(0.5);
    let (along, across) = if horizontal { (w, h) } else { (h, w) };
    let short = along.min(across) as f64;
    let (len, thick) = if single {
        let thick = ((short * rng.random_range(0.12..0.3)) as usize).max(4);
        let lo = (1.2 * thick as f64).ceil() as usize;
        let hi = (2.8 * thick as f64).floor() as usize;
        let len = ((thick as f64 * rng.random_range(1.2..2.8)).round() as usize).clamp(lo, hi);
        (len, thick)
    } else {
        (
            ((along as f64 * rng.random_range(0.4..0.8)) as usize).max(2),
            ((short * rng.random_range(0.06..0.14)) as usize).max(2),
        )
    };
    let (bw, bh) = if horizontal { (len, thick) } else { (thick, len) };
    let (x0, y0) = ((w - bw) / 2, (h - bh) / 2);
    c.rect(x0 as f64, y0 as f64, (x0 + bw) as f64, (y0 + bh) as f64);
    c
}

fn add_stroke<R: Rng + ?Sized>(c: &mut Canvas, rng: &mut R, thick: f64) {
    let (w, h) = (c.mask.width() as f64, c.mask.height() as f64);
    let (ax, ay) = c.anchor(rng);
    let r = thick / 2.0;
    let sign = if rng.random_bool(0.5) { 1.0 } else { -1.0 };
    match rng.random_range(0..4) {
        0 => {
            let len = w * rng.random_range(0.2..0.6) * sign;
            c.rect(ax, ay - r, ax + len, ay + r);
        }
        1 => {
            let len = h * rng.random_range(0.2..0.6) * sign;
            c.rect(ax - r, ay, ax + r, ay + len);
        }
        2 => {
            let len = w.min(h) * rng.random_range(0.2..0.5);
            let angle = std::f64::consts::FRAC_PI_4 * (2 * rng.random_range(0..4) + 1) as f64;
            let (dx, dy) = (angle.cos(), angle.sin());
            let steps = (len * 2.0) as usize;
            c.stroke(r, (0..=steps).map(|s| (ax + dx * s as f64 * 0.5, ay + dy * s as f64 * 0.5)));
        }
        _ => {
            let radius = w.min(h) * rng.random_range(0.1..0.3);
            let theta: f64 = rng.random_range(0.0..std::f64::consts::TAU);
            let (ox, oy) = (ax + radius * theta.cos(), ay + radius * theta.sin());
            let start = theta + std::f64::consts::PI;
            let sweep = rng.random_range(std::f64::consts::FRAC_PI_2..1.5 * std::f64::consts::PI) * sign;
            let steps = ((sweep.abs() * radius) * 2.0).ceil() as usize;
            c.stroke(
                r,
                (0..=steps).map(|s| {
                    let a = start + sweep * s as f64 / steps as f64;
                    (ox + radius * a.cos(), oy + radius * a.sin())
                }),
            );
        }
    }
}

fn content_ar(m: &Mask) -> f64 {
    let b = m.content_bounds().expect("strokes are non-empty");
    b.width() as f64 / b.height() as f64
}

/// Deterministic stroke-composite glyph on a 64..=256 px grid. `complexity`
/// (clamped to 1..=8) is the number of strokes; 1 gives a single bar. Output
/// is 8-connected with content aspect ratio in [0.3, 3].
pub fn pseudo_glyph(seed: u64, complexity: usize) -> GlyphRaster {
    let complexity = complexity.clamp(1, 8);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let w = rng.random_range(64..=256);
    let h = rng.random_range(64..=256);
    if complexity > 1 {
        for _ in 0..32 {
            let mut c = bar(&mut rng, w, h, false);
            let thick = w.min(h) as f64 * rng.random_range(0.05..0.12);
            for _ in 1..complexity {
                add_stroke(&mut c, &mut rng, thick.max(2.0));
            }
            if (MIN_AR..=MAX_AR).contains(&content_ar(&c.mask)) {
                return GlyphRaster::from_mask(c.mask).expect("non-empty");
            }
        }
    }
    GlyphRaster::from_mask(bar(&mut rng, w, h, true).mask).expect("non-empty")
}

/// One generated sample, held in memory.
#[derive(Debug, Clone)]
pub struct SynthSample {
    pub id: String,
    pub text: String,
    pub canvas: (usize, usize),
    pub glyphs: Vec<GlyphElement>,
    pub layout: Layout,
    pub constraint: ConstraintSet,
    pub record: LayoutRecord,
    pub description: String,
}

fn random_text<R: Rng + ?Sized>(rng: &mut R, n: usize) -> String {
    (0..n)
        .map(|_| char::from_u32(0x4E00 + rng.random_range(0..0x51A6)).expect("CJK block"))
        .collect()
}

fn candidate_templates<R: Rng + ?Sized>(rng: &mut R, n: usize) -> Vec<Template> {
    let mut t = vec![
        Template::Horizontal,
        Template::Vertical,
        Template::TwoRow,
        Template::Staircase { up: rng.random_bool(0.5) },
        Template::EmphasisFirst,
    ];
    if n >= 4 {
        let cols = (n as f64).sqrt().ceil() as usize;
        t.push(Template::Grid {
            rows: n.div_ceil(cols),
            cols,
        });
    }
    t
}

fn verified(out: &TemplateOutput, glyphs: &[GlyphElement], canvas: (usize, usize)) -> Result<bool> {
    let occ = compose_rasters(glyphs.iter().map(|g| g.raster()), &out.layout, canvas.0, canvas.1)?;
    let (ratio, _) = ratio_consistency(&out.layout, glyphs, canvas.0, canvas.1)?;
    Ok(overlap_iou(&occ) == 0.0 && ratio < 1e-9 && check_constraint(&out.constraint, &out.layout).satisfied)
}

/// Generate sample `index` of the dataset seeded by `seed`.
pub fn generate_sample(seed: u64, index: usize) -> Result<SynthSample> {
    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, index as u64));
    let n = rng.random_range(MIN_GLYPHS..=MAX_SYNTH_GLYPHS);
    let canvas = CANVASES[rng.random_range(0..CANVASES.len())];
    let text = random_text(&mut rng, n);
    let glyphs = words_of(&text)
        .into_iter()
        .map(|c| {
            let g = pseudo_glyph(rng.random(), rng.random_range(1..=6));
            GlyphElement::new(c, g)
        })
        .collect::<Result<Vec<_>>>()?;
    let candidates = candidate_templates(&mut rng, n);
    let pick = candidates[rng.random_range(0..candidates.len())];
    let mut out = None;
    for t in [pick, Template::Horizontal] {
        if let Ok(o) = generate_template_layout(t, &glyphs, canvas, &mut rng) {
            if verified(&o, &glyphs, canvas)? {
                out = Some(o);
                break;
            }
        }
    }
    let mut out = out.ok_or_else(|| Error::TemplateIncompatible {
        template: pick.name(),
        glyphs: n,
    })?;
    if rng.random_bool(0.25) {
        let mut c = out.constraint;
        c.alignment = Some(Alignment::Center);
        if check_constraint(&c, &out.layout).satisfied {
            out.constraint = c;
        }
    }
    let words = words_of(&text);
    let record = LayoutRecord::from_layout(&words, &out.description.details, &out.layout);
    Ok(SynthSample {
        id: format!("sample_{index:05}"),
        text,
        canvas,
        glyphs,
        layout: out.layout,
        constraint: out.constraint,
        record,
        description: out.description.global,
    })
}

fn write_sample(s: &SynthSample, root: &Path) -> Result<SampleEntry> {
    let dir = root.join(&s.id);
    fs::create_dir_all(&dir).map_err(|e| Error::io(&dir, e))?;
    let mut mask_paths = Vec::with_capacity(s.glyphs.len());
    for (k, g) in s.glyphs.iter().enumerate() {
        let name = format!("glyph_{k}.png");
        write_mask_png(g.raster().mask(), &dir.join(&name))?;
        mask_paths.push(format!("{}/{name}", s.id));
    }
    let constraint = s.constraint.to_string();
    let ann = Annotation {
        canvas: [s.canvas.0, s.canvas.1],
        text: s.text.clone(),
        layout: s.record.to_json_value(),
        description: s.description.clone(),
        constraint: Some(constraint.clone()),
    };
    write_json_atomic(&ann, &dir.join(ANNOTATION_FILE))?;
    let occ = compose_rasters(s.glyphs.iter().map(|g| g.raster()), &s.layout, s.canvas.0, s.canvas.1)?;
    render_png(&occ, &dir.join("render.png"))?;
    Ok(SampleEntry {
        id: s.id.clone(),
        text: s.text.clone(),
        canvas: [s.canvas.0, s.canvas.1],
        glyph_mask_paths: mask_paths,
        annotation_path: format!("{}/{ANNOTATION_FILE}", s.id),
        description: s.description.clone(),
        constraint_text: Some(constraint),
    })
}

/// Generate `count` samples under `out_root` and write the manifest.
/// Output depends only on `(count, seed)`.
pub fn synthesize_dataset(count: usize, seed: u64, out_root: &Path) -> Result<DatasetManifest> {
    if count == 0 {
        return Err(Error::InvalidConfig("count must be positive".into()));
    }
    fs::create_dir_all(out_root).map_err(|e| Error::io(out_root, e))?;
    let samples = (0..count)
        .into_par_iter()
        .map(|i| write_sample(&generate_sample(seed, i)?, out_root))
        .collect::<Result<Vec<_>>>()?;
    let manifest = DatasetManifest {
        version: MANIFEST_VERSION,
        samples,
    };
    write_json_atomic(&manifest, &out_root.join(MANIFEST_FILE))?;
    log::info!("wrote {count} samples to {}", out_root.display());
    Ok(manifest)
}
