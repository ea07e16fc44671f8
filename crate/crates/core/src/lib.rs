//! Text-logo layout generation and evaluation.
//!
//! A logo is a phrase of glyph masks plus one normalized box per glyph. This
//! crate places glyphs into boxes, scores layouts (pixel overlap, balance,
//! aspect-ratio fidelity, constraint adherence), produces rule-based and
//! annealed layouts, synthesizes annotated datasets and reads them back.

pub mod baselines;
pub mod compositor;
pub mod constraints;
pub mod error;
pub mod featpipe;
pub mod geometry;
pub mod glyph;
pub mod metrics;
pub mod schema;
pub mod solver;
pub mod synth;

pub use error::{Error, Result};
pub use geometry::{Layout, LogoInstance, NormBox, PixelBox};
pub use glyph::{GlyphElement, GlyphRaster, GlyphMode, Mask};
