use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid box ({left}, {top}, {right}, {bottom})")]
    InvalidBox {
        left: f64,
        top: f64,
        right: f64,
        bottom: f64,
    },
    #[error("invalid raster: {0}")]
    InvalidRaster(String),
    #[error("invalid glyph text {0:?}: expected exactly one character")]
    InvalidGlyphText(String),
    #[error("invalid instance: {0}")]
    InvalidInstance(String),
    #[error("layout has {got} boxes but instance has {expected} glyphs")]
    LayoutLengthMismatch { expected: usize, got: usize },
    #[error("layout is empty")]
    EmptyLayout,

    #[error("malformed JSON: {0}")]
    MalformedJson(String),
    #[error("schema violation at entry {index}: {message}")]
    SchemaViolation { index: usize, message: String },
    #[error("word mismatch at entry {index}: expected {expected:?}, found {found:?}")]
    WordMismatch {
        index: usize,
        expected: String,
        found: String,
    },
    #[error("inverted box at entry {index}: {coords:?}")]
    InvertedBox { index: usize, coords: [f64; 4] },

    #[error("missing file {0}")]
    MissingFile(PathBuf),
    #[error("manifest schema violation: {0}")]
    ManifestSchemaViolation(String),
    #[error("sample {id}: {masks} glyph masks for {chars} characters")]
    MaskGlyphCountMismatch {
        id: String,
        masks: usize,
        chars: usize,
    },

    #[error("unrecognized constraint {clause:?} at {start}..{end}")]
    UnrecognizedConstraint {
        clause: String,
        start: usize,
        end: usize,
    },
    #[error("conflicting constraint {clause:?} at {start}..{end}: {kind} already given")]
    ConflictingConstraint {
        clause: String,
        start: usize,
        end: usize,
        kind: &'static str,
    },
    #[error("empty sample set")]
    EmptySampleSet,

    #[error("template {template} incompatible with {glyphs} glyphs")]
    TemplateIncompatible { template: String, glyphs: usize },
    #[error("image has no alpha channel")]
    NoAlphaChannel,
    #[error("found {components} foreground components for {chars} characters")]
    GlyphCountMismatch { components: usize, chars: usize },

    #[error("invalid output shape {rows}x{cols} for input {in_rows}x{in_cols}")]
    InvalidOutputShape {
        rows: usize,
        cols: usize,
        in_rows: usize,
        in_cols: usize,
    },
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("invalid solver config: {0}")]
    InvalidConfig(String),

    #[error("i/o failure on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("image failure on {path}: {source}")]
    Image {
        path: PathBuf,
        #[source]
        source: image::ImageError,
    },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn image(path: impl Into<PathBuf>, source: image::ImageError) -> Self {
        Error::Image {
            path: path.into(),
            source,
        }
    }
}
