//! Controlled constraint grammar and the geometric checker behind ViO.
//!
//! Grammar: semicolon-separated clauses, case-insensitive.
//!
//! ```text
//! horizontal line | vertical line | rows <k> | columns <k> | grid <r>x<c>
//! diagonal down | diagonal up | align <left|center|right|top|bottom>
//! glyph <i> <largest|smallest> | uniform size
//! ```

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{Layout, NormBox};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Arrangement {
    HorizontalLine,
    VerticalLine,
    Rows(usize),
    Columns(usize),
    Grid { rows: usize, cols: usize },
    DiagonalDown,
    DiagonalUp,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Alignment {
    Left,
    Center,
    Right,
    Top,
    Bottom,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EmphasisRelation {
    Largest,
    Smallest,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Emphasis {
    pub glyph: usize,
    pub relation: EmphasisRelation,
}

/// Structured user layout requirements. The default value is unconstrained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub struct ConstraintSet {
    pub arrangement: Option<Arrangement>,
    pub alignment: Option<Alignment>,
    pub emphasis: Option<Emphasis>,
    pub uniform_size: bool,
}

impl ConstraintSet {
    pub fn is_empty(&self) -> bool {
        *self == Self::default()
    }

    pub fn with_arrangement(a: Arrangement) -> Self {
        Self {
            arrangement: Some(a),
            ..Self::default()
        }
    }
}

impl fmt::Display for Arrangement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Arrangement::HorizontalLine => write!(f, "horizontal line"),
            Arrangement::VerticalLine => write!(f, "vertical line"),
            Arrangement::Rows(k) => write!(f, "rows {k}"),
            Arrangement::Columns(k) => write!(f, "columns {k}"),
            Arrangement::Grid { rows, cols } => write!(f, "grid {rows}x{cols}"),
            Arrangement::DiagonalDown => write!(f, "diagonal down"),
            Arrangement::DiagonalUp => write!(f, "diagonal up"),
        }
    }
}

impl fmt::Display for Alignment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Alignment::Left => "left",
            Alignment::Center => "center",
            Alignment::Right => "right",
            Alignment::Top => "top",
            Alignment::Bottom => "bottom",
        })
    }
}

impl fmt::Display for ConstraintSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut clauses = Vec::new();
        if let Some(a) = self.arrangement {
            clauses.push(a.to_string());
        }
        if let Some(a) = self.alignment {
            clauses.push(format!("align {a}"));
        }
        if let Some(e) = self.emphasis {
            let rel = match e.relation {
                EmphasisRelation::Largest => "largest",
                EmphasisRelation::Smallest => "smallest",
            };
            clauses.push(format!("glyph {} {rel}", e.glyph));
        }
        if self.uniform_size {
            clauses.push("uniform size".to_string());
        }
        f.write_str(&clauses.join("; "))
    }
}

enum Clause {
    Arrangement(Arrangement),
    Alignment(Alignment),
    Emphasis(Emphasis),
    UniformSize,
}

fn parse_count(s: &str) -> Option<usize> {
    s.parse::<usize>().ok().filter(|&k| k > 0)
}

fn parse_clause(tokens: &[&str]) -> Option<Clause> {
    use Clause::*;
    Some(match tokens {
        ["horizontal", "line"] => Arrangement(self::Arrangement::HorizontalLine),
        ["vertical", "line"] => Arrangement(self::Arrangement::VerticalLine),
        ["diagonal", "down"] => Arrangement(self::Arrangement::DiagonalDown),
        ["diagonal", "up"] => Arrangement(self::Arrangement::DiagonalUp),
        ["rows", k] => Arrangement(self::Arrangement::Rows(parse_count(k)?)),
        ["columns", k] => Arrangement(self::Arrangement::Columns(parse_count(k)?)),
        ["grid", rest @ ..] if !rest.is_empty() => {
            let dims = rest.concat();
            let (r, c) = dims.split_once('x')?;
            Arrangement(self::Arrangement::Grid {
                rows: parse_count(r)?,
                cols: parse_count(c)?,
            })
        }
        ["align", side] => Alignment(match *side {
            "left" => self::Alignment::Left,
            "center" => self::Alignment::Center,
            "right" => self::Alignment::Right,
            "top" => self::Alignment::Top,
            "bottom" => self::Alignment::Bottom,
            _ => return None,
        }),
        ["glyph", i, rel] => Emphasis(self::Emphasis {
            glyph: i.parse().ok()?,
            relation: match *rel {
                "largest" => EmphasisRelation::Largest,
                "smallest" => EmphasisRelation::Smallest,
                _ => return None,
            },
        }),
        ["uniform", "size"] => UniformSize,
        _ => return None,
    })
}

/// Parse constraint text. Empty text yields the unconstrained set.
pub fn parse_constraint(text: &str) -> Result<ConstraintSet> {
    let mut set = ConstraintSet::default();
    let mut offset = 0;
    for raw in text.split(';') {
        let lead = raw.len() - raw.trim_start().len();
        let clause = raw.trim();
        let (start, end) = (offset + lead, offset + lead + clause.len());
        offset += raw.len() + 1;
        if clause.is_empty() {
            continue;
        }
        let lower = clause.to_lowercase();
        let tokens: Vec<&str> = lower.split_whitespace().collect();
        let parsed = parse_clause(&tokens).ok_or_else(|| Error::UnrecognizedConstraint {
            clause: clause.to_string(),
            start,
            end,
        })?;
        let conflict = |kind| Error::ConflictingConstraint {
            clause: clause.to_string(),
            start,
            end,
            kind,
        };
        match parsed {
            Clause::Arrangement(a) => {
                if set.arrangement.replace(a).is_some() {
                    return Err(conflict("arrangement"));
                }
            }
            Clause::Alignment(a) => {
                if set.alignment.replace(a).is_some() {
                    return Err(conflict("alignment"));
                }
            }
            Clause::Emphasis(e) => {
                if set.emphasis.replace(e).is_some() {
                    return Err(conflict("emphasis"));
                }
            }
            Clause::UniformSize => {
                if set.uniform_size {
                    return Err(conflict("uniform size"));
                }
                set.uniform_size = true;
            }
        }
    }
    Ok(set)
}

/// Geometric tolerances, all in canvas fractions except `uniform_size`
/// (relative deviation from the mean area).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    pub line: f64,
    pub align: f64,
    pub row_gap: f64,
    pub uniform_size: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            line: 0.03,
            align: 0.03,
            row_gap: 0.05,
            uniform_size: 0.15,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Violation {
    VerticalSpread { spread: f64 },
    HorizontalSpread { spread: f64 },
    NotLeftToRight,
    NotTopToBottom,
    RowCount { expected: usize, found: usize },
    ColumnCount { expected: usize, found: usize },
    RowTooLong { row: usize, len: usize },
    ReadingOrder,
    GridTooSmall { cells: usize, glyphs: usize },
    DiagonalStep { index: usize },
    Misaligned { alignment: Alignment, spread: f64 },
    EmphasisOutOfRange { glyph: usize },
    NotEmphasized { glyph: usize, relation: EmphasisRelation },
    NonUniformSize { max_deviation: f64 },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::VerticalSpread { spread } => {
                write!(f, "vertical spread exceeds tolerance ({spread:.4})")
            }
            Violation::HorizontalSpread { spread } => {
                write!(f, "horizontal spread exceeds tolerance ({spread:.4})")
            }
            Violation::NotLeftToRight => write!(f, "boxes not ordered left to right"),
            Violation::NotTopToBottom => write!(f, "boxes not ordered top to bottom"),
            Violation::RowCount { expected, found } => {
                write!(f, "expected {expected} rows, found {found}")
            }
            Violation::ColumnCount { expected, found } => {
                write!(f, "expected {expected} columns, found {found}")
            }
            Violation::RowTooLong { row, len } => write!(f, "row {row} holds {len} glyphs"),
            Violation::ReadingOrder => write!(f, "groups out of reading order"),
            Violation::GridTooSmall { cells, glyphs } => {
                write!(f, "grid has {cells} cells for {glyphs} glyphs")
            }
            Violation::DiagonalStep { index } => {
                write!(f, "diagonal step {index} too shallow or reversed")
            }
            Violation::Misaligned { alignment, spread } => {
                write!(f, "{alignment} alignment off by {spread:.4}")
            }
            Violation::EmphasisOutOfRange { glyph } => {
                write!(f, "emphasized glyph {glyph} out of range")
            }
            Violation::NotEmphasized { glyph, relation } => {
                let r = match relation {
                    EmphasisRelation::Largest => "largest",
                    EmphasisRelation::Smallest => "smallest",
                };
                write!(f, "glyph {glyph} is not strictly the {r}")
            }
            Violation::NonUniformSize { max_deviation } => {
                write!(f, "box areas deviate {:.1}% from mean", 100.0 * max_deviation)
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConstraintCheck {
    pub satisfied: bool,
    pub violations: Vec<Violation>,
}

/// Group indices by 1-D position; a sorted gap larger than `gap` starts a new
/// group. Groups come back in ascending position order.
pub(crate) fn cluster(values: &[f64], gap: f64) -> Vec<Vec<usize>> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]).then(a.cmp(&b)));
    let mut groups: Vec<Vec<usize>> = Vec::new();
    let mut prev = f64::NEG_INFINITY;
    for i in order {
        if groups.is_empty() || values[i] - prev > gap {
            groups.push(Vec::new());
        }
        groups.last_mut().unwrap().push(i);
        prev = values[i];
    }
    groups
}

fn spread(values: impl Iterator<Item = f64> + Clone) -> f64 {
    let n = values.clone().count() as f64;
    if n == 0.0 {
        return 0.0;
    }
    let mean = values.clone().sum::<f64>() / n;
    values.map(|v| (v - mean).abs()).fold(0.0, f64::max)
}

fn range(values: impl Iterator<Item = f64>) -> f64 {
    let (lo, hi) = values.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| {
        (lo.min(v), hi.max(v))
    });
    if lo.is_finite() {
        hi - lo
    } else {
        0.0
    }
}

fn strictly_increasing(values: impl Iterator<Item = f64>) -> bool {
    let mut prev = f64::NEG_INFINITY;
    for v in values {
        if v <= prev {
            return false;
        }
        prev = v;
    }
    true
}

/// Checks groups (already in position order) for internal ordering along the
/// other axis and for reading order between groups.
fn check_groups(
    groups: &[Vec<usize>],
    along: &[f64],
    out: &mut Vec<Violation>,
    within_violation: Violation,
) {
    let mut within_ok = true;
    for g in groups {
        let mut members = g.clone();
        members.sort_unstable();
        within_ok &= strictly_increasing(members.iter().map(|&i| along[i]));
    }
    if !within_ok {
        out.push(within_violation);
    }
    let in_order = groups.windows(2).all(|w| {
        let a_max = w[0].iter().max().unwrap();
        let b_min = w[1].iter().min().unwrap();
        a_max < b_min
    });
    if !in_order {
        out.push(Violation::ReadingOrder);
    }
}

fn check_arrangement(a: Arrangement, boxes: &[NormBox], tol: &Tolerances, out: &mut Vec<Violation>) {
    let cx: Vec<f64> = boxes.iter().map(|b| b.center().0).collect();
    let cy: Vec<f64> = boxes.iter().map(|b| b.center().1).collect();
    let n = boxes.len();
    match a {
        Arrangement::HorizontalLine => {
            let s = spread(cy.iter().copied());
            if s > tol.line {
                out.push(Violation::VerticalSpread { spread: s });
            }
            if !strictly_increasing(cx.iter().copied()) {
                out.push(Violation::NotLeftToRight);
            }
        }
        Arrangement::VerticalLine => {
            let s = spread(cx.iter().copied());
            if s > tol.line {
                out.push(Violation::HorizontalSpread { spread: s });
            }
            if !strictly_increasing(cy.iter().copied()) {
                out.push(Violation::NotTopToBottom);
            }
        }
        Arrangement::Rows(k) => {
            let rows = cluster(&cy, tol.row_gap);
            if rows.len() != k {
                out.push(Violation::RowCount {
                    expected: k,
                    found: rows.len(),
                });
            }
            check_groups(&rows, &cx, out, Violation::NotLeftToRight);
        }
        Arrangement::Columns(k) => {
            let cols = cluster(&cx, tol.row_gap);
            if cols.len() != k {
                out.push(Violation::ColumnCount {
                    expected: k,
                    found: cols.len(),
                });
            }
            check_groups(&cols, &cy, out, Violation::NotTopToBottom);
        }
        Arrangement::Grid { rows: r, cols: c } => {
            if r * c < n {
                out.push(Violation::GridTooSmall {
                    cells: r * c,
                    glyphs: n,
                });
            }
            let rows = cluster(&cy, tol.row_gap);
            let expected_rows = n.div_ceil(c);
            if rows.len() != expected_rows {
                out.push(Violation::RowCount {
                    expected: expected_rows,
                    found: rows.len(),
                });
            }
            let cols = cluster(&cx, tol.row_gap);
            if cols.len() != c.min(n) {
                out.push(Violation::ColumnCount {
                    expected: c.min(n),
                    found: cols.len(),
                });
            }
            for (i, row) in rows.iter().enumerate() {
                if row.len() > c {
                    out.push(Violation::RowTooLong {
                        row: i,
                        len: row.len(),
                    });
                }
            }
            check_groups(&rows, &cx, out, Violation::NotLeftToRight);
        }
        Arrangement::DiagonalDown | Arrangement::DiagonalUp => {
            let down = a == Arrangement::DiagonalDown;
            for i in 1..n {
                let dx = cx[i] - cx[i - 1];
                let dy = if down { cy[i] - cy[i - 1] } else { cy[i - 1] - cy[i] };
                if dx <= 0.0 || dy <= tol.line {
                    out.push(Violation::DiagonalStep { index: i });
                }
            }
        }
    }
}

fn check_alignment(a: Alignment, boxes: &[NormBox], tol: &Tolerances, out: &mut Vec<Violation>) {
    let s = match a {
        Alignment::Left => range(boxes.iter().map(|b| b.left())),
        Alignment::Right => range(boxes.iter().map(|b| b.right())),
        Alignment::Top => range(boxes.iter().map(|b| b.top())),
        Alignment::Bottom => range(boxes.iter().map(|b| b.bottom())),
        Alignment::Center => {
            let l = boxes.iter().map(|b| b.left()).fold(f64::INFINITY, f64::min);
            let r = boxes.iter().map(|b| b.right()).fold(0.0, f64::max);
            let t = boxes.iter().map(|b| b.top()).fold(f64::INFINITY, f64::min);
            let b = boxes.iter().map(|b| b.bottom()).fold(0.0, f64::max);
            ((l + r) / 2.0 - 0.5).abs().max(((t + b) / 2.0 - 0.5).abs())
        }
    };
    if s > tol.align {
        out.push(Violation::Misaligned {
            alignment: a,
            spread: s,
        });
    }
}

/// Evaluate every clause of `c` against `layout`.
pub fn check_constraint_with(c: &ConstraintSet, layout: &Layout, tol: &Tolerances) -> ConstraintCheck {
    let boxes = layout.boxes();
    let mut violations = Vec::new();
    if !boxes.is_empty() {
        if let Some(a) = c.arrangement {
            check_arrangement(a, boxes, tol, &mut violations);
        }
        if let Some(a) = c.alignment {
            check_alignment(a, boxes, tol, &mut violations);
        }
        if let Some(e) = c.emphasis {
            if e.glyph >= boxes.len() {
                violations.push(Violation::EmphasisOutOfRange { glyph: e.glyph });
            } else {
                let target = boxes[e.glyph].area();
                let ok = boxes.iter().enumerate().all(|(i, b)| {
                    i == e.glyph
                        || match e.relation {
                            EmphasisRelation::Largest => target > b.area(),
                            EmphasisRelation::Smallest => target < b.area(),
                        }
                });
                if !ok {
                    violations.push(Violation::NotEmphasized {
                        glyph: e.glyph,
                        relation: e.relation,
                    });
                }
            }
        }
        if c.uniform_size {
            let mean = layout.total_area() / boxes.len() as f64;
            let dev = boxes
                .iter()
                .map(|b| (b.area() - mean).abs() / mean)
                .fold(0.0, f64::max);
            if dev > tol.uniform_size {
                violations.push(Violation::NonUniformSize { max_deviation: dev });
            }
        }
    }
    ConstraintCheck {
        satisfied: violations.is_empty(),
        violations,
    }
}

pub fn check_constraint(c: &ConstraintSet, layout: &Layout) -> ConstraintCheck {
    check_constraint_with(c, layout, &Tolerances::default())
}

/// Fraction of `(constraint, layout)` samples whose check fails (ViO).
pub fn violation_ratio<'a, I>(samples: I) -> Result<f64>
where
    I: IntoIterator<Item = (&'a ConstraintSet, &'a Layout)>,
{
    let (mut total, mut bad) = (0usize, 0usize);
    for (c, l) in samples {
        total += 1;
        if !check_constraint(c, l).satisfied {
            bad += 1;
        }
    }
    if total == 0 {
        return Err(Error::EmptySampleSet);
    }
    Ok(bad as f64 / total as f64)
}
