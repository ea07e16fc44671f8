//! Random perturbations of a single layout state.

use rand::Rng;
use rand_distr::StandardNormal;

use crate::geometry::NormBox;

use super::SolverConfig;

/// Smallest box side a move may produce, canvas fraction.
pub const MIN_SIDE: f64 = 0.01;

/// Which boxes a move touched.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Touched {
    One(usize),
    Two(usize, usize),
}

fn resized(b: &NormBox, fx: f64, fy: f64) -> NormBox {
    let (cx, cy) = b.center();
    let w = (b.width() * fx).clamp(MIN_SIDE.min(b.width()), 1.0);
    let h = (b.height() * fy).clamp(MIN_SIDE.min(b.height()), 1.0);
    NormBox::from_center(cx, cy, w, h).expect("clamped size is valid")
}

/// Apply one random move in place and report which boxes changed.
pub fn neighbor_in_place<R: Rng + ?Sized>(boxes: &mut [NormBox], rng: &mut R, cfg: &SolverConfig) -> Touched {
    let n = boxes.len();
    assert!(n > 0, "cannot perturb an empty layout");
    if n >= 2 && rng.random_bool(cfg.swap_prob.clamp(0.0, 1.0)) {
        let i = rng.random_range(0..n);
        let j = (i + rng.random_range(1..n)) % n;
        let (a, b) = (boxes[i], boxes[j]);
        let (ca, cb) = (a.center(), b.center());
        boxes[i] = NormBox::from_center(cb.0, cb.1, a.width(), a.height()).expect("valid size");
        boxes[j] = NormBox::from_center(ca.0, ca.1, b.width(), b.height()).expect("valid size");
        return Touched::Two(i, j);
    }
    let i = rng.random_range(0..n);
    let b = boxes[i];
    boxes[i] = if rng.random_bool(0.5) {
        let s = cfg.move_scales.translate;
        let dx: f64 = rng.sample::<f64, _>(StandardNormal) * s;
        let dy: f64 = rng.sample::<f64, _>(StandardNormal) * s;
        let (cx, cy) = b.center();
        NormBox::from_center(cx + dx, cy + dy, b.width(), b.height()).expect("valid size")
    } else {
        let span = (1.0 + cfg.move_scales.resize).ln();
        let factor = |rng: &mut R| if span > 0.0 { rng.random_range(-span..=span).exp() } else { 1.0 };
        if rng.random_bool(cfg.ar_preserve_prob.clamp(0.0, 1.0)) {
            let lo = (MIN_SIDE / b.width()).max(MIN_SIDE / b.height()).min(1.0);
            let hi = (1.0 / b.width()).min(1.0 / b.height());
            let f = factor(rng).clamp(lo, hi);
            resized(&b, f, f)
        } else {
            let (fx, fy) = (factor(rng), factor(rng));
            resized(&b, fx, fy)
        }
    };
    Touched::One(i)
}
