//! Templated natural-language descriptions derived from box geometry.

use serde::{Deserialize, Serialize};

use crate::constraints::{check_constraint, cluster, Arrangement, ConstraintSet, Tolerances};
use crate::geometry::{Layout, NormBox};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LayoutDescription {
    /// One sentence per glyph, in layout order.
    pub details: Vec<String>,
    pub global: String,
}

fn tercile(v: f64) -> usize {
    if v < 1.0 / 3.0 {
        0
    } else if v > 2.0 / 3.0 {
        2
    } else {
        1
    }
}

fn position_phrase(b: &NormBox) -> &'static str {
    let (cx, cy) = b.center();
    match (tercile(cy), tercile(cx)) {
        (1, 1) => "in the center",
        (1, 0) => "on the far left",
        (1, 2) => "on the far right",
        (0, 1) => "at the top",
        (2, 1) => "at the bottom",
        (0, 0) => "at the top left",
        (0, _) => "at the top right",
        (_, 0) => "at the bottom left",
        _ => "at the bottom right",
    }
}

fn superlative(boxes: &[NormBox], i: usize) -> Option<&'static str> {
    if boxes.len() < 2 {
        return None;
    }
    let a = boxes[i].area();
    let others = boxes.iter().enumerate().filter(|&(j, _)| j != i);
    if others.clone().all(|(_, b)| a > b.area()) {
        Some("the largest")
    } else if others.clone().all(|(_, b)| a < b.area()) {
        Some("the smallest")
    } else {
        None
    }
}

fn holds(layout: &Layout, a: Arrangement) -> bool {
    check_constraint(&ConstraintSet::with_arrangement(a), layout).satisfied
}

fn arrangement_phrase(layout: &Layout, rows: usize, cols: usize) -> String {
    if holds(layout, Arrangement::HorizontalLine) {
        "arranged horizontally from left to right".into()
    } else if holds(layout, Arrangement::VerticalLine) {
        "arranged vertically from top to bottom".into()
    } else if holds(layout, Arrangement::DiagonalDown) {
        "arranged diagonally from the top left to the bottom right".into()
    } else if holds(layout, Arrangement::DiagonalUp) {
        "arranged diagonally from the bottom left to the top right".into()
    } else if rows > 1 && holds(layout, Arrangement::Rows(rows)) {
        format!("arranged in {rows} rows")
    } else if cols > 1 && holds(layout, Arrangement::Columns(cols)) {
        format!("arranged in {cols} columns")
    } else {
        "arranged freely".into()
    }
}

/// Describe each box and the layout as a whole. Pure function of geometry.
pub fn describe_layout(layout: &Layout) -> LayoutDescription {
    let boxes = layout.boxes();
    let n = boxes.len();
    let gap = Tolerances::default().row_gap;
    let cy: Vec<f64> = boxes.iter().map(|b| b.center().1).collect();
    let cx: Vec<f64> = boxes.iter().map(|b| b.center().0).collect();
    let rows = cluster(&cy, gap);
    let cols = cluster(&cx, gap);
    let mut row_of = vec![0; n];
    for (r, members) in rows.iter().enumerate() {
        for &i in members {
            row_of[i] = r;
        }
    }
    let details = (0..n)
        .map(|i| {
            let pos = position_phrase(&boxes[i]);
            let mut s = match superlative(boxes, i) {
                Some(sup) => format!("This character is {sup} and positioned {pos}."),
                None => format!("This character is positioned {pos}."),
            };
            if rows.len() > 1 {
                s.push_str(&format!(" It sits in row {} of {}.", row_of[i] + 1, rows.len()));
            }
            s
        })
        .collect();
    let global = match n {
        0 => "There are no characters in this image.".to_string(),
        1 => "There is 1 character in this image.".to_string(),
        _ => format!(
            "There are {n} characters in this image, {}.",
            arrangement_phrase(layout, rows.len(), cols.len())
        ),
    };
    LayoutDescription { details, global }
}
