//! Arrangement templates that turn glyph aspect ratios into collision-free
//! layouts satisfying a known constraint.

use rand::{Rng, SeedableRng};
use serde::{Deserialize, Serialize};

use crate::constraints::{check_constraint, Alignment, Arrangement, ConstraintSet, Emphasis, EmphasisRelation};
use crate::error::{Error, Result};
use crate::geometry::{Layout, NormBox};
use crate::glyph::GlyphElement;
use crate::solver::describe::{describe_layout, LayoutDescription};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Template {
    Horizontal,
    Vertical,
    TwoRow,
    Staircase { up: bool },
    Grid { rows: usize, cols: usize },
    EmphasisFirst,
}

impl Template {
    pub fn name(&self) -> String {
        match self {
            Template::Horizontal => "horizontal".into(),
            Template::Vertical => "vertical".into(),
            Template::TwoRow => "two_row".into(),
            Template::Staircase { up: false } => "staircase".into(),
            Template::Staircase { up: true } => "staircase_up".into(),
            Template::Grid { rows, cols } => format!("grid({rows},{cols})"),
            Template::EmphasisFirst => "emphasis_first".into(),
        }
    }

    /// The constraint every output of this template satisfies.
    pub fn constraint(&self) -> ConstraintSet {
        match *self {
            Template::Horizontal => ConstraintSet::with_arrangement(Arrangement::HorizontalLine),
            Template::Vertical => ConstraintSet::with_arrangement(Arrangement::VerticalLine),
            Template::TwoRow => ConstraintSet::with_arrangement(Arrangement::Rows(2)),
            Template::Staircase { up: false } => ConstraintSet::with_arrangement(Arrangement::DiagonalDown),
            Template::Staircase { up: true } => ConstraintSet::with_arrangement(Arrangement::DiagonalUp),
            Template::Grid { rows, cols } => ConstraintSet::with_arrangement(Arrangement::Grid { rows, cols }),
            Template::EmphasisFirst => ConstraintSet {
                arrangement: Some(Arrangement::HorizontalLine),
                emphasis: Some(Emphasis {
                    glyph: 0,
                    relation: EmphasisRelation::Largest,
                }),
                ..Default::default()
            },
        }
    }
}

/// Spacing and fill parameters shared by all arrangements.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Spacing {
    /// Gap between neighbors along a line, canvas fraction.
    pub gap: f64,
    /// Extra random gap per neighbor pair, up to this canvas fraction.
    pub jitter: f64,
    /// Gap between rows (or columns), canvas fraction.
    pub group_gap: f64,
    /// Target total box area, canvas fraction.
    pub fill: f64,
    /// Maximum layout extent on each axis, canvas fraction.
    pub max_extent: f64,
}

impl Default for Spacing {
    fn default() -> Self {
        Self {
            gap: 0.02,
            jitter: 0.0,
            group_gap: 0.06,
            fill: 0.35,
            max_extent: 0.9,
        }
    }
}

/// Axis-aligned rectangle in pixels.
#[derive(Debug, Clone, Copy)]
struct Rect {
    x0: f64,
    y0: f64,
    x1: f64,
    y1: f64,
}

impl Rect {
    fn centered(cx: f64, cy: f64, w: f64, h: f64) -> Self {
        Rect {
            x0: cx - w / 2.0,
            y0: cy - h / 2.0,
            x1: cx + w / 2.0,
            y1: cy + h / 2.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Cross {
    Start,
    Center,
    End,
}

/// Pixel-space arrangement of base glyph sizes at scale `s`.
struct Plan<'a> {
    arrangement: Arrangement,
    /// Base (width, height) per glyph at scale 1.
    sizes: &'a [(f64, f64)],
    /// Gap after each glyph along its line, pixels.
    gaps: Vec<f64>,
    /// Gap between consecutive groups, pixels.
    group_gap: f64,
    cross: Cross,
}

fn split_even(n: usize, k: usize) -> Vec<Vec<usize>> {
    let k = k.clamp(1, n.max(1));
    let mut out = Vec::with_capacity(k);
    let mut start = 0;
    for j in 0..k {
        let len = (n - start).div_ceil(k - j);
        out.push((start..start + len).collect());
        start += len;
    }
    out
}

fn cross_offset(cross: Cross, slot: f64, len: f64) -> f64 {
    match cross {
        Cross::Start => 0.0,
        Cross::Center => (slot - len) / 2.0,
        Cross::End => slot - len,
    }
}

impl Plan<'_> {
    fn n(&self) -> usize {
        self.sizes.len()
    }

    /// Lines of glyphs along x (`horizontal`) or y, stacked on the other axis.
    fn lines(&self, groups: &[Vec<usize>], s: f64, horizontal: bool) -> Vec<Rect> {
        let mut rects = vec![Rect::centered(0.0, 0.0, 0.0, 0.0); self.n()];
        let along = |i: usize| if horizontal { self.sizes[i].0 } else { self.sizes[i].1 } * s;
        let across = |i: usize| if horizontal { self.sizes[i].1 } else { self.sizes[i].0 } * s;
        let lens: Vec<f64> = groups
            .iter()
            .map(|g| {
                g.iter().map(|&i| along(i)).sum::<f64>()
                    + g[..g.len() - 1].iter().map(|&i| self.gaps[i]).sum::<f64>()
            })
            .collect();
        let longest = lens.iter().cloned().fold(0.0, f64::max);
        let mut c = 0.0;
        for (g, len) in groups.iter().zip(&lens) {
            let thick = g.iter().map(|&i| across(i)).fold(0.0, f64::max);
            let mut a = (longest - len) / 2.0;
            for &i in g {
                let off = c + cross_offset(self.cross, thick, across(i));
                let (l, t) = (a, off);
                rects[i] = if horizontal {
                    Rect { x0: l, y0: t, x1: l + along(i), y1: t + across(i) }
                } else {
                    Rect { x0: t, y0: l, x1: t + across(i), y1: l + along(i) }
                };
                a += along(i) + self.gaps[i];
            }
            c += thick + self.group_gap;
        }
        rects
    }

    fn grid(&self, cols: usize, s: f64) -> Vec<Rect> {
        let rows = split_even_fixed(self.n(), cols);
        let col_w: Vec<f64> = (0..cols)
            .map(|j| {
                rows.iter()
                    .filter_map(|r| r.get(j))
                    .map(|&i| self.sizes[i].0 * s)
                    .fold(0.0, f64::max)
            })
            .collect();
        let mut col_x = Vec::with_capacity(cols);
        let mut x = 0.0;
        for w in &col_w {
            col_x.push(x + w / 2.0);
            x += w + self.group_gap;
        }
        let mut rects = vec![Rect::centered(0.0, 0.0, 0.0, 0.0); self.n()];
        let mut y = 0.0;
        for r in &rows {
            let thick = r.iter().map(|&i| self.sizes[i].1 * s).fold(0.0, f64::max);
            for (j, &i) in r.iter().enumerate() {
                let (w, h) = (self.sizes[i].0 * s, self.sizes[i].1 * s);
                let top = y + cross_offset(self.cross, thick, h);
                rects[i] = Rect {
                    x0: col_x[j] - w / 2.0,
                    y0: top,
                    x1: col_x[j] + w / 2.0,
                    y1: top + h,
                };
            }
            y += thick + self.group_gap;
        }
        rects
    }

    fn staircase(&self, s: f64, up: bool) -> Vec<Rect> {
        let mean_h = self.sizes.iter().map(|p| p.1).sum::<f64>() / self.n() as f64;
        let step = 0.6 * mean_h * s + self.group_gap * 0.5;
        let mut x = 0.0;
        (0..self.n())
            .map(|i| {
                let (w, h) = (self.sizes[i].0 * s, self.sizes[i].1 * s);
                let k = if up { (self.n() - 1 - i) as f64 } else { i as f64 };
                let r = Rect::centered(x + w / 2.0, k * step, w, h);
                x += w + self.gaps[i];
                r
            })
            .collect()
    }

    fn place(&self, s: f64) -> Vec<Rect> {
        let n = self.n();
        match self.arrangement {
            Arrangement::HorizontalLine => self.lines(&[(0..n).collect()], s, true),
            Arrangement::VerticalLine => self.lines(&[(0..n).collect()], s, false),
            Arrangement::Rows(k) => self.lines(&split_even(n, k), s, true),
            Arrangement::Columns(k) => self.lines(&split_even(n, k), s, false),
            Arrangement::Grid { cols, .. } => self.grid(cols.min(n), s),
            Arrangement::DiagonalDown => self.staircase(s, false),
            Arrangement::DiagonalUp => self.staircase(s, true),
        }
    }
}

/// Row-major chunks of `cols` (last chunk may be short).
fn split_even_fixed(n: usize, cols: usize) -> Vec<Vec<usize>> {
    (0..n).collect::<Vec<_>>().chunks(cols).map(|c| c.to_vec()).collect()
}

fn bounds(rects: &[Rect]) -> Rect {
    rects.iter().fold(
        Rect {
            x0: f64::INFINITY,
            y0: f64::INFINITY,
            x1: f64::NEG_INFINITY,
            y1: f64::NEG_INFINITY,
        },
        |b, r| Rect {
            x0: b.x0.min(r.x0),
            y0: b.y0.min(r.y0),
            x1: b.x1.max(r.x1),
            y1: b.y1.max(r.y1),
        },
    )
}

/// Requested shape of a template layout.
#[derive(Debug, Clone)]
pub(crate) struct Request {
    pub arrangement: Arrangement,
    pub alignment: Option<Alignment>,
    pub emphasis: Option<Emphasis>,
    pub uniform_size: bool,
}

fn base_sizes(req: &Request, ars: &[f64]) -> Vec<(f64, f64)> {
    let vertical_flow = matches!(req.arrangement, Arrangement::VerticalLine | Arrangement::Columns(_));
    let mut sizes: Vec<(f64, f64)> = ars
        .iter()
        .map(|&ar| {
            if req.uniform_size {
                let h = 1.0 / ar.sqrt();
                (h * ar, h)
            } else if vertical_flow {
                (1.0, 1.0 / ar)
            } else {
                (ar, 1.0)
            }
        })
        .collect();
    if let Some(e) = req.emphasis {
        if e.glyph < sizes.len() && sizes.len() > 1 {
            let area = |p: &(f64, f64)| p.0 * p.1;
            let others = sizes.iter().enumerate().filter(|&(i, _)| i != e.glyph).map(|(_, p)| area(p));
            let own = area(&sizes[e.glyph]);
            let k = match e.relation {
                EmphasisRelation::Largest => {
                    let max = others.fold(0.0, f64::max);
                    1.8 * (max / own).sqrt().max(1.0)
                }
                EmphasisRelation::Smallest => {
                    let min = others.fold(f64::INFINITY, f64::min);
                    0.6 * (min / own).sqrt().min(1.0)
                }
            };
            sizes[e.glyph].0 *= k;
            sizes[e.glyph].1 *= k;
        }
    }
    sizes
}

/// Build a layout for `req`. Gaps are drawn from `rng` when jitter is set.
pub(crate) fn build<R: Rng + ?Sized>(
    req: &Request,
    glyphs: &[GlyphElement],
    canvas: (usize, usize),
    spacing: &Spacing,
    rng: &mut R,
) -> Result<Layout> {
    let n = glyphs.len();
    let incompatible = || Error::TemplateIncompatible {
        template: req.arrangement.to_string(),
        glyphs: n,
    };
    if n == 0 {
        return Err(incompatible());
    }
    match req.arrangement {
        Arrangement::Rows(k) | Arrangement::Columns(k) if k > n => return Err(incompatible()),
        Arrangement::Grid { rows, cols } if rows * cols < n => return Err(incompatible()),
        _ => {}
    }
    let (w, h) = (canvas.0 as f64, canvas.1 as f64);
    let vertical_flow = matches!(req.arrangement, Arrangement::VerticalLine | Arrangement::Columns(_));
    let (along_px, across_px) = if vertical_flow { (h, w) } else { (w, h) };
    let ars: Vec<f64> = glyphs.iter().map(|g| g.aspect_ratio()).collect();
    let sizes = base_sizes(req, &ars);
    let cross = match (req.alignment, vertical_flow) {
        (Some(Alignment::Top), false) | (Some(Alignment::Left), true) => Cross::Start,
        (Some(Alignment::Bottom), false) | (Some(Alignment::Right), true) => Cross::End,
        _ => Cross::Center,
    };
    let mut plan = Plan {
        arrangement: req.arrangement,
        sizes: &sizes,
        gaps: (0..n)
            .map(|_| (spacing.gap + spacing.jitter * rng.random::<f64>()) * along_px)
            .collect(),
        group_gap: spacing.group_gap * across_px,
        cross,
    };

    // Gaps alone must leave room for glyphs.
    let limit = (spacing.max_extent * w, spacing.max_extent * h);
    let b0 = bounds(&plan.place(0.0));
    let shrink = (0.5 * limit.0 / (b0.x1 - b0.x0)).min(0.5 * limit.1 / (b0.y1 - b0.y0));
    if shrink < 1.0 {
        plan.gaps.iter_mut().for_each(|g| *g *= shrink);
        plan.group_gap *= shrink;
    }

    let area: f64 = sizes.iter().map(|p| p.0 * p.1).sum();
    let fits = |s: f64| {
        let b = bounds(&plan.place(s));
        b.x1 - b.x0 <= limit.0 && b.y1 - b.y0 <= limit.1 && s * s * area <= spacing.fill * w * h
    };
    let (mut lo, mut hi) = (0.0, 2.0 * w.max(h));
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        if fits(mid) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    if lo <= 0.0 {
        return Err(incompatible());
    }
    let rects = plan.place(lo);
    let b = bounds(&rects);
    let (dx, dy) = ((w - (b.x1 - b.x0)) / 2.0 - b.x0, (h - (b.y1 - b.y0)) / 2.0 - b.y0);
    let boxes = rects
        .iter()
        .map(|r| {
            NormBox::new(
                ((r.x0 + dx) / w).max(0.0),
                ((r.y0 + dy) / h).max(0.0),
                ((r.x1 + dx) / w).min(1.0),
                ((r.y1 + dy) / h).min(1.0),
            )
        })
        .collect::<Result<Vec<_>>>()
        .map_err(|_| incompatible())?;
    Ok(Layout::new(boxes))
}

/// Layout that targets every clause of `c`, used to seed the solver.
/// Unconstrained arrangements fall back to a horizontal line.
pub fn constraint_layout(
    c: &ConstraintSet,
    glyphs: &[GlyphElement],
    canvas: (usize, usize),
    fill: f64,
) -> Result<Layout> {
    let req = Request {
        arrangement: c.arrangement.unwrap_or(Arrangement::HorizontalLine),
        alignment: c.alignment,
        emphasis: c.emphasis,
        uniform_size: c.uniform_size,
    };
    let spacing = Spacing {
        gap: 0.025,
        fill,
        ..Spacing::default()
    };
    build(&req, glyphs, canvas, &spacing, &mut rand_chacha::ChaCha8Rng::seed_from_u64(0))
}

#[derive(Debug, Clone)]
pub struct TemplateOutput {
    pub layout: Layout,
    pub constraint: ConstraintSet,
    pub description: LayoutDescription,
}

/// Lay out `glyphs` with `template`, jittering gaps and fill from `rng`.
/// The returned constraint is satisfied by the layout.
pub fn generate_template_layout<R: Rng + ?Sized>(
    template: Template,
    glyphs: &[GlyphElement],
    canvas: (usize, usize),
    rng: &mut R,
) -> Result<TemplateOutput> {
    let constraint = template.constraint();
    let incompatible = || Error::TemplateIncompatible {
        template: template.name(),
        glyphs: glyphs.len(),
    };
    if template == Template::TwoRow && glyphs.len() < 2 {
        return Err(incompatible());
    }
    let req = Request {
        arrangement: constraint.arrangement.expect("templates fix an arrangement"),
        alignment: None,
        emphasis: constraint.emphasis,
        uniform_size: false,
    };
    let spacing = Spacing {
        jitter: 0.01,
        fill: rng.random_range(0.25..0.4),
        ..Spacing::default()
    };
    let layout = build(&req, glyphs, canvas, &spacing, rng)?;
    if !check_constraint(&constraint, &layout).satisfied {
        return Err(incompatible());
    }
    let description = describe_layout(&layout);
    Ok(TemplateOutput {
        layout,
        constraint,
        description,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::compositor::compose_rasters;
    use crate::glyph::GlyphRaster;
    use crate::metrics::{overlap_iou, ratio_consistency};
    use rand_chacha::ChaCha8Rng;

    fn glyphs(dims: &[(usize, usize)]) -> Vec<GlyphElement> {
        dims.iter()
            .map(|&(w, h)| GlyphElement::new("g", GlyphRaster::filled(w, h)).unwrap())
            .collect()
    }

    fn mixed(n: usize) -> Vec<GlyphElement> {
        let dims: Vec<_> = (0..n).map(|i| (10 + 7 * (i % 4), 12 + 5 * (i % 3))).collect();
        glyphs(&dims)
    }

    fn all_templates(n: usize) -> Vec<Template> {
        let cols = (n as f64).sqrt().ceil() as usize;
        vec![
            Template::Horizontal,
            Template::Vertical,
            Template::TwoRow,
            Template::Staircase { up: false },
            Template::Staircase { up: true },
            Template::Grid { rows: n.div_ceil(cols), cols },
            Template::EmphasisFirst,
        ]
    }

    #[test]
    fn horizontal_four_satisfies_line() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let out = generate_template_layout(Template::Horizontal, &mixed(4), (512, 512), &mut rng).unwrap();
        let c = ConstraintSet::with_arrangement(Arrangement::HorizontalLine);
        assert!(check_constraint(&c, &out.layout).satisfied);
        assert!(out.description.global.contains("arranged horizontally from left to right"));
    }

    #[test]
    fn emphasis_first_is_strictly_largest() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        // Narrow first glyph among wide ones.
        let g = glyphs(&[(5, 20), (30, 10), (30, 10)]);
        let out = generate_template_layout(Template::EmphasisFirst, &g, (640, 480), &mut rng).unwrap();
        let a0 = out.layout[0].area();
        assert!(out.layout[1..].iter().all(|b| b.area() < a0));
        assert!(out.description.details[0].contains("the largest"));
    }

    #[test]
    fn grid_requires_enough_cells() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let r = generate_template_layout(Template::Grid { rows: 2, cols: 2 }, &mixed(5), (512, 512), &mut rng);
        assert!(matches!(r, Err(Error::TemplateIncompatible { .. })));
        let r = generate_template_layout(Template::TwoRow, &mixed(1), (512, 512), &mut rng);
        assert!(matches!(r, Err(Error::TemplateIncompatible { .. })));
    }

    #[test]
    fn templates_have_zero_overlap_and_ratio() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for n in 2..=12 {
            for canvas in [(512, 512), (640, 480), (480, 640)] {
                let g = mixed(n);
                for t in all_templates(n) {
                    let out = match generate_template_layout(t, &g, canvas, &mut rng) {
                        Ok(o) => o,
                        Err(_) => continue,
                    };
                    let occ = compose_rasters(g.iter().map(|e| e.raster()), &out.layout, canvas.0, canvas.1).unwrap();
                    assert_eq!(overlap_iou(&occ), 0.0, "{t:?} n={n}");
                    let (ratio, _) = ratio_consistency(&out.layout, &g, canvas.0, canvas.1).unwrap();
                    assert!(ratio < 1e-9, "{t:?} n={n}: {ratio}");
                    assert!(check_constraint(&out.constraint, &out.layout).satisfied);
                }
            }
        }
    }

    #[test]
    fn every_template_works_for_moderate_n() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for t in all_templates(6) {
            assert!(generate_template_layout(t, &mixed(6), (512, 512), &mut rng).is_ok(), "{t:?}");
        }
    }

    #[test]
    fn constraint_layouts_for_every_production() {
        let g = mixed(6);
        let cases = [
            "horizontal line; align bottom",
            "vertical line; align left",
            "vertical line; align right",
            "rows 2",
            "rows 3; align center",
            "columns 2",
            "grid 2x3",
            "diagonal down",
            "diagonal up",
            "align center",
            "horizontal line; glyph 2 largest",
            "rows 2; glyph 4 smallest",
            "horizontal line; uniform size",
        ];
        for text in cases {
            let c = crate::constraints::parse_constraint(text).unwrap();
            let l = constraint_layout(&c, &g, (512, 512), 0.35).unwrap();
            let res = check_constraint(&c, &l);
            assert!(res.satisfied, "{text}: {:?}", res.violations);
            let occ = compose_rasters(g.iter().map(|e| e.raster()), &l, 512, 512).unwrap();
            assert_eq!(overlap_iou(&occ), 0.0, "{text}");
        }
    }

    #[test]
    fn split_helpers() {
        assert_eq!(split_even(5, 2), vec![vec![0, 1, 2], vec![3, 4]]);
        assert_eq!(split_even_fixed(5, 2), vec![vec![0, 1], vec![2, 3], vec![4]]);
    }
}
