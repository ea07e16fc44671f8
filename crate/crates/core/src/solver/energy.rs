//! Composite layout objective and its incremental evaluation.

use serde::{Deserialize, Serialize};

use crate::constraints::{check_constraint, ConstraintSet};
use crate::error::Result;
use crate::geometry::{to_pixel_box, Layout, LogoInstance, NormBox};
use crate::glyph::{resample_bilinear, GlyphRaster, Mask};

use super::{SolverConfig, Weights};

/// Longest side of the downsampled glyph sprites used during search.
const SPRITE_SIDE: usize = 64;

/// Unweighted objective terms.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct EnergyTerms {
    /// Overlap IoU on the search grid, percent.
    pub overlap: f64,
    pub balance: f64,
    pub ratio: f64,
    /// Number of violated constraint clauses.
    pub constraint: f64,
    pub compact: f64,
    pub canvas: f64,
}

impl EnergyTerms {
    pub fn total(&self, w: &Weights) -> f64 {
        w.overlap * self.overlap
            + w.balance * self.balance
            + w.ratio * self.ratio
            + w.constraint * self.constraint
            + w.compact * self.compact
            + w.canvas * self.canvas
    }
}

fn sprite(g: &GlyphRaster) -> Mask {
    let c = g.content_box();
    let (w, h) = (c.width() as usize, c.height() as usize);
    let k = (SPRITE_SIDE as f64 / w.max(h) as f64).min(1.0);
    let (sw, sh) = (((w as f64 * k).round() as usize).max(1), ((h as f64 * k).round() as usize).max(1));
    let m = resample_bilinear(g.mask(), c, sw, sh);
    if m.foreground_count() == 0 {
        Mask::from_fn(sw, sh, |_, _| true)
    } else {
        m
    }
}

/// Fixed per-instance data needed to score layouts.
#[derive(Debug, Clone)]
pub struct Scorer {
    sprites: Vec<Mask>,
    glyph_ar: Vec<f64>,
    canvas: (usize, usize),
    grid: usize,
    constraint: Option<ConstraintSet>,
    target_fill: f64,
}

impl Scorer {
    pub fn new(instance: &LogoInstance, constraint: Option<&ConstraintSet>, cfg: &SolverConfig) -> Self {
        Self {
            sprites: instance.glyphs().iter().map(|g| sprite(g.raster())).collect(),
            glyph_ar: instance.glyphs().iter().map(|g| g.aspect_ratio()).collect(),
            canvas: instance.canvas(),
            grid: cfg.grid,
            constraint: constraint.filter(|c| !c.is_empty()).copied(),
            target_fill: cfg.target_fill,
        }
    }

    /// Grid cells covered by glyph `i` placed in `b`, nearest-neighbor sampled.
    fn cells(&self, i: usize, b: &NormBox, out: &mut Vec<u32>) {
        out.clear();
        let g = self.grid;
        let p = to_pixel_box(b, g, g);
        let s = &self.sprites[i];
        let (bw, bh) = (p.width() as usize, p.height() as usize);
        let xs: Vec<usize> = (0..bw)
            .map(|x| (((x as f64 + 0.5) * s.width() as f64 / bw as f64) as usize).min(s.width() - 1))
            .collect();
        for y in 0..bh {
            let sy = (((y as f64 + 0.5) * s.height() as f64 / bh as f64) as usize).min(s.height() - 1);
            let row = (p.top as usize + y) * g + p.left as usize;
            let src = &s.data()[sy * s.width()..(sy + 1) * s.width()];
            for (x, &sx) in xs.iter().enumerate() {
                if src[sx] {
                    out.push((row + x) as u32);
                }
            }
        }
    }

    /// Every term except overlap, which depends on the occupancy grid.
    fn box_terms(&self, boxes: &[NormBox]) -> EnergyTerms {
        let (cw, ch) = (self.canvas.0 as f64, self.canvas.1 as f64);
        let total: f64 = boxes.iter().map(|b| b.area()).sum();
        let (mut sx, mut sy, mut ratio) = (0.0, 0.0, 0.0);
        let mut outside = 0.0;
        for (b, &want) in boxes.iter().zip(&self.glyph_ar) {
            let (cx, cy) = b.center();
            sx += b.area() * cx;
            sy += b.area() * cy;
            let ar = b.width() * cw / (b.height() * ch);
            ratio += (ar - want).abs() / want;
            let inside = (b.right().min(1.0) - b.left().max(0.0)).max(0.0) * (b.bottom().min(1.0) - b.top().max(0.0)).max(0.0);
            outside += b.area() - inside;
        }
        let n = boxes.len() as f64;
        let balance = if total > 0.0 {
            100.0 * (sx / total - 0.5).hypot(sy / total - 0.5)
        } else {
            0.0
        };
        let constraint = match &self.constraint {
            Some(c) => check_constraint(c, &Layout::new(boxes.to_vec())).violations.len() as f64,
            None => 0.0,
        };
        EnergyTerms {
            overlap: 0.0,
            balance,
            ratio: 100.0 * ratio / n,
            constraint,
            compact: 100.0 * (1.0 - total / self.target_fill).abs(),
            canvas: if total > 0.0 { 100.0 * outside / total } else { 0.0 },
        }
    }

    pub fn terms(&self, boxes: &[NormBox]) -> EnergyTerms {
        State::new(self, boxes).terms
    }
}

fn iou(overlap: usize, union: usize) -> f64 {
    if union == 0 {
        0.0
    } else {
        100.0 * overlap as f64 / union as f64
    }
}

/// Layout plus occupancy grid, updated one or two boxes at a time.
#[derive(Debug, Clone)]
pub struct State<'a> {
    scorer: &'a Scorer,
    pub boxes: Vec<NormBox>,
    counts: Vec<u8>,
    cells: Vec<Vec<u32>>,
    overlap: usize,
    union: usize,
    pub terms: EnergyTerms,
    undo: Vec<(usize, NormBox, Vec<u32>)>,
    undo_terms: EnergyTerms,
    pool: Vec<Vec<u32>>,
}

impl<'a> State<'a> {
    pub fn new(scorer: &'a Scorer, boxes: &[NormBox]) -> Self {
        let g = scorer.grid;
        let mut s = Self {
            scorer,
            boxes: boxes.to_vec(),
            counts: vec![0; g * g],
            cells: vec![Vec::new(); boxes.len()],
            overlap: 0,
            union: 0,
            terms: EnergyTerms::default(),
            undo: Vec::with_capacity(2),
            undo_terms: EnergyTerms::default(),
            pool: Vec::new(),
        };
        for (i, b) in boxes.iter().enumerate() {
            let mut c = Vec::new();
            scorer.cells(i, b, &mut c);
            s.add(&c);
            s.cells[i] = c;
        }
        s.refresh_terms();
        s
    }

    fn add(&mut self, cells: &[u32]) {
        for &k in cells {
            let c = &mut self.counts[k as usize];
            *c += 1;
            match *c {
                1 => self.union += 1,
                2 => self.overlap += 1,
                _ => {}
            }
        }
    }

    fn remove(&mut self, cells: &[u32]) {
        for &k in cells {
            let c = &mut self.counts[k as usize];
            match *c {
                1 => self.union -= 1,
                2 => self.overlap -= 1,
                _ => {}
            }
            *c -= 1;
        }
    }

    fn refresh_terms(&mut self) {
        let mut t = self.scorer.box_terms(&self.boxes);
        t.overlap = iou(self.overlap, self.union);
        self.terms = t;
    }

    /// Tentatively replace boxes; follow with [`State::accept`] or [`State::reject`].
    pub fn propose(&mut self, changes: &[(usize, NormBox)]) {
        self.accept();
        self.undo_terms = self.terms;
        for &(i, b) in changes {
            let old = std::mem::take(&mut self.cells[i]);
            self.remove(&old);
            let mut fresh = self.pool.pop().unwrap_or_default();
            self.scorer.cells(i, &b, &mut fresh);
            self.add(&fresh);
            self.cells[i] = fresh;
            self.undo.push((i, self.boxes[i], old));
            self.boxes[i] = b;
        }
        self.refresh_terms();
    }

    pub fn accept(&mut self) {
        for (_, _, cells) in self.undo.drain(..) {
            self.pool.push(cells);
        }
    }

    /// Restore the state from before the last proposal.
    pub fn reject(&mut self) {
        while let Some((i, b, old)) = self.undo.pop() {
            let fresh = std::mem::replace(&mut self.cells[i], old);
            self.remove(&fresh);
            let old = std::mem::take(&mut self.cells[i]);
            self.add(&old);
            self.cells[i] = old;
            self.boxes[i] = b;
            self.pool.push(fresh);
        }
        self.terms = self.undo_terms;
    }

    /// Replace boxes and keep the result.
    pub fn set_boxes(&mut self, changes: &[(usize, NormBox)]) {
        self.propose(changes);
        self.accept();
    }

    pub fn energy(&self, w: &Weights) -> f64 {
        self.terms.total(w)
    }
}

pub fn energy_terms(instance: &LogoInstance, layout: &Layout, constraint: Option<&ConstraintSet>, cfg: &SolverConfig) -> Result<EnergyTerms> {
    instance.check_layout(layout)?;
    let scorer = Scorer::new(instance, constraint, cfg);
    Ok(scorer.terms(layout.boxes()))
}

/// Weighted objective of `layout`. Lower is better.
pub fn energy(instance: &LogoInstance, layout: &Layout, constraint: Option<&ConstraintSet>, cfg: &SolverConfig) -> Result<f64> {
    Ok(energy_terms(instance, layout, constraint, cfg)?.total(&cfg.weights))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::baselines::layout_rule_a;
    use crate::constraints::{Arrangement, ConstraintSet};
    use crate::glyph::GlyphElement;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn instance() -> LogoInstance {
        let g = vec![
            GlyphElement::new("a", GlyphRaster::filled(20, 30)).unwrap(),
            GlyphElement::new("b", GlyphRaster::filled(30, 20)).unwrap(),
            GlyphElement::new("c", GlyphRaster::filled(25, 25)).unwrap(),
        ];
        LogoInstance::new(g, 640, 480).unwrap()
    }

    #[test]
    fn rule_a_has_no_overlap_or_ratio_cost() {
        let inst = instance();
        let l = layout_rule_a(inst.glyphs(), 640, 480);
        let t = energy_terms(&inst, &l, None, &SolverConfig::default()).unwrap();
        assert_eq!(t.overlap, 0.0);
        assert!(t.ratio < 1e-9);
        assert!((t.balance - crate::metrics::visual_balance(&l).unwrap()).abs() < 1e-9);
        assert_eq!(t.canvas, 0.0);
    }

    #[test]
    fn identical_boxes_fully_overlap() {
        let inst = instance();
        let b = NormBox::new(0.2, 0.2, 0.6, 0.6).unwrap();
        let l = Layout::new(vec![b; 3]);
        let t = energy_terms(&inst, &l, None, &SolverConfig::default()).unwrap();
        assert_eq!(t.overlap, 100.0);
        let cfg = SolverConfig::default();
        assert!(energy(&inst, &l, None, &cfg).unwrap() >= cfg.weights.overlap * 100.0);
    }

    #[test]
    fn overlap_weight_is_linear() {
        let inst = instance();
        let l = Layout::new(vec![
            NormBox::new(0.1, 0.1, 0.5, 0.5).unwrap(),
            NormBox::new(0.3, 0.3, 0.7, 0.7).unwrap(),
            NormBox::new(0.6, 0.1, 0.9, 0.4).unwrap(),
        ]);
        let mut cfg = SolverConfig::default();
        let e1 = energy(&inst, &l, None, &cfg).unwrap();
        let t = energy_terms(&inst, &l, None, &cfg).unwrap();
        assert!(t.overlap > 0.0);
        cfg.weights.overlap *= 2.0;
        let e2 = energy(&inst, &l, None, &cfg).unwrap();
        assert!((e2 - e1 - 3.0 * t.overlap).abs() < 1e-9);
    }

    #[test]
    fn constraint_term_counts_violations() {
        let inst = instance();
        let l = Layout::new(vec![
            NormBox::new(0.1, 0.1, 0.2, 0.2).unwrap(),
            NormBox::new(0.05, 0.6, 0.15, 0.7).unwrap(),
            NormBox::new(0.6, 0.1, 0.7, 0.2).unwrap(),
        ]);
        let c = ConstraintSet::with_arrangement(Arrangement::HorizontalLine);
        let t = energy_terms(&inst, &l, Some(&c), &SolverConfig::default()).unwrap();
        assert_eq!(t.constraint, 2.0);
    }

    #[test]
    fn incremental_matches_fresh() {
        let inst = instance();
        let cfg = SolverConfig::default();
        let scorer = Scorer::new(&inst, None, &cfg);
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let rand_box = |rng: &mut ChaCha8Rng| {
            let (w, h) = (rng.random_range(0.05..0.5), rng.random_range(0.05..0.5));
            NormBox::from_center(rng.random(), rng.random(), w, h).unwrap()
        };
        let init: Vec<NormBox> = (0..3).map(|_| rand_box(&mut rng)).collect();
        let mut state = State::new(&scorer, &init);
        for _ in 0..300 {
            let i = rng.random_range(0..3);
            let b = rand_box(&mut rng);
            state.set_boxes(&[(i, b)]);
            let fresh = scorer.terms(&state.boxes);
            assert_eq!(fresh, state.terms);
            let before = (state.boxes.clone(), state.terms);
            state.propose(&[(0, rand_box(&mut rng)), (2, rand_box(&mut rng))]);
            state.reject();
            assert_eq!((state.boxes.clone(), state.terms), before);
            assert_eq!(scorer.terms(&state.boxes), state.terms);
        }
    }
}
