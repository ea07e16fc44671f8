//! JSON layout records and the on-disk dataset format.
//!
//! A layout record is a JSON array of `{"word", "detail", "box"}` objects,
//! one per glyph in reading order, with `box` = `[left, top, right, bottom]`
//! in canvas fractions (or `[]` when not yet placed).
//!
//! Dataset layout under a root directory:
//!
//! ```text
//! manifest.json
//! <id>/glyph_<k>.png      8-bit grayscale, >= 128 is foreground
//! <id>/annotation.json    {"canvas": [w, h], "text", "layout", "description", "constraint"?}
//! <id>/render.png         optional composite
//! ```

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use image::GrayImage;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::constraints::{parse_constraint, ConstraintSet};
use crate::error::{Error, Result};
use crate::geometry::{Layout, LogoInstance, NormBox};
use crate::glyph::{GlyphElement, GlyphRaster, Mask};

pub const MANIFEST_FILE: &str = "manifest.json";
pub const ANNOTATION_FILE: &str = "annotation.json";
pub const MANIFEST_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq)]
pub struct LayoutEntry {
    pub word: String,
    pub detail: String,
    pub bbox: Option<NormBox>,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct LayoutRecord {
    pub entries: Vec<LayoutEntry>,
}

impl LayoutRecord {
    pub fn from_layout(words: &[String], details: &[String], layout: &Layout) -> Self {
        let entries = words
            .iter()
            .zip(layout.iter())
            .enumerate()
            .map(|(i, (w, b))| LayoutEntry {
                word: w.clone(),
                detail: details.get(i).cloned().unwrap_or_default(),
                bbox: Some(*b),
            })
            .collect();
        Self { entries }
    }

    pub fn words(&self) -> Vec<String> {
        self.entries.iter().map(|e| e.word.clone()).collect()
    }

    /// Every entry must carry a box.
    pub fn to_layout(&self) -> Result<Layout> {
        self.entries
            .iter()
            .enumerate()
            .map(|(index, e)| {
                e.bbox.ok_or_else(|| Error::SchemaViolation {
                    index,
                    message: "box is empty".into(),
                })
            })
            .collect::<Result<Vec<_>>>()
            .map(Layout::new)
    }

    /// Full-precision JSON value (shortest round-trip float representation).
    pub fn to_json_value(&self) -> Value {
        Value::Array(
            self.entries
                .iter()
                .map(|e| {
                    let b: Vec<f64> = e.bbox.map(|b| b.coords().to_vec()).unwrap_or_default();
                    json!({"word": e.word, "detail": e.detail, "box": b})
                })
                .collect(),
        )
    }
}

/// Parse outcome: the record plus the indices of entries whose coordinates
/// were clamped into [0, 1].
#[derive(Debug, Clone, PartialEq)]
pub struct ParsedRecord {
    pub record: LayoutRecord,
    pub clamped: Vec<usize>,
}

fn violation(index: usize, message: impl Into<String>) -> Error {
    Error::SchemaViolation {
        index,
        message: message.into(),
    }
}

fn parse_box(index: usize, v: &Value) -> Result<(Option<NormBox>, bool)> {
    let arr = v
        .as_array()
        .ok_or_else(|| violation(index, "box is not an array"))?;
    if arr.is_empty() {
        return Ok((None, false));
    }
    if arr.len() != 4 {
        return Err(violation(index, format!("box has {} values, expected 4", arr.len())));
    }
    let mut c = [0.0; 4];
    for (k, x) in arr.iter().enumerate() {
        c[k] = x
            .as_f64()
            .ok_or_else(|| violation(index, format!("box[{k}] is not a number")))?;
    }
    if c[0] >= c[2] || c[1] >= c[3] {
        return Err(Error::InvertedBox { index, coords: c });
    }
    let clamped_c = c.map(|x| x.clamp(0.0, 1.0));
    let b = NormBox::new(clamped_c[0], clamped_c[1], clamped_c[2], clamped_c[3])
        .map_err(|_| Error::InvertedBox { index, coords: c })?;
    Ok((Some(b), clamped_c != c))
}

/// Validate an already-decoded JSON value as a layout record.
pub fn parse_layout_value(v: &Value, expected_words: Option<&[String]>) -> Result<ParsedRecord> {
    let arr = v
        .as_array()
        .ok_or_else(|| Error::MalformedJson("layout is not a JSON array".into()))?;
    let mut entries = Vec::with_capacity(arr.len());
    let mut clamped = Vec::new();
    for (index, item) in arr.iter().enumerate() {
        let obj = item
            .as_object()
            .ok_or_else(|| violation(index, "entry is not an object"))?;
        let field = |key: &str| obj.get(key).ok_or_else(|| violation(index, format!("missing key {key:?}")));
        let word = field("word")?
            .as_str()
            .ok_or_else(|| violation(index, "word is not a string"))?
            .to_string();
        if word.is_empty() {
            return Err(violation(index, "word is empty"));
        }
        let detail = field("detail")?
            .as_str()
            .ok_or_else(|| violation(index, "detail is not a string"))?
            .to_string();
        let (bbox, was_clamped) = parse_box(index, field("box")?)?;
        if was_clamped {
            log::warn!("layout entry {index}: coordinates clamped into [0, 1]");
            clamped.push(index);
        }
        entries.push(LayoutEntry { word, detail, bbox });
    }
    if let Some(expected) = expected_words {
        for (index, (e, want)) in entries.iter().zip(expected).enumerate() {
            if &e.word != want {
                return Err(Error::WordMismatch {
                    index,
                    expected: want.clone(),
                    found: e.word.clone(),
                });
            }
        }
        if entries.len() != expected.len() {
            let index = entries.len().min(expected.len());
            return Err(Error::WordMismatch {
                index,
                expected: expected.get(index).cloned().unwrap_or_default(),
                found: entries.get(index).map(|e| e.word.clone()).unwrap_or_default(),
            });
        }
    }
    Ok(ParsedRecord {
        record: LayoutRecord { entries },
        clamped,
    })
}

pub fn parse_layout_json(text: &str, expected_words: Option<&[String]>) -> Result<ParsedRecord> {
    let v: Value = serde_json::from_str(text).map_err(|e| Error::MalformedJson(e.to_string()))?;
    parse_layout_value(&v, expected_words)
}

/// Coordinate rendering for [`serialize_layout_record_with`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Precision {
    /// Fixed number of decimals.
    Decimals(usize),
    /// Shortest representation that parses back to the same `f64`.
    RoundTrip,
}

/// Record as JSON text with coordinates at 4 decimals.
pub fn serialize_layout_record(r: &LayoutRecord) -> String {
    serialize_layout_record_with(r, Precision::Decimals(4))
}

pub fn serialize_layout_record_with(r: &LayoutRecord, precision: Precision) -> String {
    if r.entries.is_empty() {
        return "[]".to_string();
    }
    let fmt = |x: f64| match precision {
        Precision::Decimals(d) => format!("{x:.d$}"),
        Precision::RoundTrip => format!("{x:?}"),
    };
    let mut out = String::from("[\n");
    for (i, e) in r.entries.iter().enumerate() {
        let coords = e
            .bbox
            .map(|b| b.coords().iter().map(|&c| fmt(c)).collect::<Vec<_>>().join(", "))
            .unwrap_or_default();
        let _ = write!(
            out,
            "  {{\"word\": {}, \"detail\": {}, \"box\": [{}]}}",
            Value::from(e.word.as_str()),
            Value::from(e.detail.as_str()),
            coords
        );
        out.push_str(if i + 1 < r.entries.len() { ",\n" } else { "\n" });
    }
    out.push(']');
    out
}

/// Skeleton record: one entry per text, empty detail and box.
pub fn empty_record_for(texts: &[String]) -> LayoutRecord {
    LayoutRecord {
        entries: texts
            .iter()
            .map(|t| LayoutEntry {
                word: t.clone(),
                detail: String::new(),
                bbox: None,
            })
            .collect(),
    }
}

/// Characters of `text` as one-character words.
pub fn words_of(text: &str) -> Vec<String> {
    text.chars().map(String::from).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleEntry {
    pub id: String,
    pub text: String,
    pub canvas: [usize; 2],
    pub glyph_mask_paths: Vec<String>,
    pub annotation_path: String,
    pub description: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub constraint_text: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetManifest {
    pub version: u32,
    pub samples: Vec<SampleEntry>,
}

impl Default for DatasetManifest {
    fn default() -> Self {
        Self {
            version: MANIFEST_VERSION,
            samples: Vec::new(),
        }
    }
}

/// Per-sample annotation file contents.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Annotation {
    pub canvas: [usize; 2],
    pub text: String,
    pub layout: Value,
    pub description: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub constraint: Option<String>,
}

#[derive(Debug, Clone)]
pub struct LoadedSample {
    pub id: String,
    pub instance: LogoInstance,
    pub record: LayoutRecord,
    pub description: String,
    pub constraint_text: Option<String>,
}

impl LoadedSample {
    pub fn ground_truth(&self) -> &Layout {
        self.instance
            .layout()
            .expect("loaded samples always carry a layout")
    }
}

#[derive(Debug, Clone)]
pub struct Dataset {
    pub root: PathBuf,
    pub manifest: DatasetManifest,
    pub samples: Vec<LoadedSample>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DatasetStats {
    pub samples: usize,
    pub glyphs_per_image: f64,
    pub total_glyphs: usize,
}

pub fn dataset_stats(m: &DatasetManifest) -> DatasetStats {
    let total: usize = m.samples.iter().map(|s| s.glyph_mask_paths.len()).sum();
    let n = m.samples.len();
    DatasetStats {
        samples: n,
        glyphs_per_image: if n == 0 { 0.0 } else { total as f64 / n as f64 },
        total_glyphs: total,
    }
}

fn read_file(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| {
        if e.kind() == std::io::ErrorKind::NotFound {
            Error::MissingFile(path.to_path_buf())
        } else {
            Error::io(path, e)
        }
    })
}

/// Read a grayscale mask; pixels >= 128 are foreground.
pub fn read_mask_png(path: &Path) -> Result<Mask> {
    if !path.is_file() {
        return Err(Error::MissingFile(path.to_path_buf()));
    }
    let img = image::open(path).map_err(|e| Error::image(path, e))?.to_luma8();
    let (w, h) = img.dimensions();
    Mask::new(
        w as usize,
        h as usize,
        img.pixels().map(|p| p.0[0] >= 128).collect(),
    )
}

/// Write a mask as 8-bit grayscale, foreground 255.
pub fn write_mask_png(mask: &Mask, path: &Path) -> Result<()> {
    let img = GrayImage::from_fn(mask.width() as u32, mask.height() as u32, |x, y| {
        image::Luma([if mask.get(x as usize, y as usize) { 255 } else { 0 }])
    });
    img.save_with_format(path, image::ImageFormat::Png)
        .map_err(|e| match e {
            image::ImageError::IoError(io) => Error::io(path, io),
            other => Error::image(path, other),
        })
}

pub fn write_json_atomic<T: Serialize>(value: &T, path: &Path) -> Result<()> {
    let text = serde_json::to_string_pretty(value).expect("serializable value");
    write_text_atomic(&text, path)
}

pub fn write_text_atomic(text: &str, path: &Path) -> Result<()> {
    let tmp = path.with_extension("tmp");
    fs::write(&tmp, text).map_err(|e| Error::io(&tmp, e))?;
    fs::rename(&tmp, path).map_err(|e| Error::io(path, e))
}

fn schema_err(id: &str, e: impl std::fmt::Display) -> Error {
    Error::ManifestSchemaViolation(format!("sample {id}: {e}"))
}

fn load_glyphs(id: &str, text: &str, paths: &[PathBuf]) -> Result<Vec<GlyphElement>> {
    let chars = words_of(text);
    if chars.len() != paths.len() {
        return Err(Error::MaskGlyphCountMismatch {
            id: id.to_string(),
            masks: paths.len(),
            chars: chars.len(),
        });
    }
    chars
        .into_iter()
        .zip(paths)
        .map(|(c, p)| {
            let raster = GlyphRaster::from_mask(read_mask_png(p)?)
                .map_err(|e| schema_err(id, format!("{}: {e}", p.display())))?;
            GlyphElement::new(c, raster)
        })
        .collect()
}

fn build_sample(
    id: &str,
    annotation_path: &Path,
    mask_paths: &[PathBuf],
    expect: Option<(&str, [usize; 2])>,
) -> Result<LoadedSample> {
    let ann: Annotation = serde_json::from_str(&read_file(annotation_path)?).map_err(|e| schema_err(id, e))?;
    if let Some((text, canvas)) = expect {
        if ann.text != text || ann.canvas != canvas {
            return Err(schema_err(id, "annotation disagrees with manifest"));
        }
    }
    let glyphs = load_glyphs(id, &ann.text, mask_paths)?;
    let words = words_of(&ann.text);
    let record = parse_layout_value(&ann.layout, Some(&words))
        .map_err(|e| schema_err(id, e))?
        .record;
    let layout = record.to_layout().map_err(|e| schema_err(id, e))?;
    let mut instance = LogoInstance::new(glyphs, ann.canvas[0], ann.canvas[1])
        .map_err(|e| schema_err(id, e))?
        .with_layout(layout)?;
    if let Some(c) = &ann.constraint {
        let set: ConstraintSet = parse_constraint(c).map_err(|e| schema_err(id, e))?;
        instance = instance.with_constraint(set);
    }
    Ok(LoadedSample {
        id: id.to_string(),
        instance,
        record,
        description: ann.description,
        constraint_text: ann.constraint,
    })
}

/// Load a single sample directory (`annotation.json` plus `glyph_<k>.png`).
pub fn load_sample_dir(dir: &Path) -> Result<LoadedSample> {
    let ann_path = dir.join(ANNOTATION_FILE);
    let ann: Annotation = serde_json::from_str(&read_file(&ann_path)?)
        .map_err(|e| Error::ManifestSchemaViolation(format!("{}: {e}", ann_path.display())))?;
    let n = ann.text.chars().count();
    let masks: Vec<PathBuf> = (0..n).map(|k| dir.join(format!("glyph_{k}.png"))).collect();
    let id = dir
        .file_name()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    build_sample(&id, &ann_path, &masks, None)
}

pub fn load_manifest(root: &Path) -> Result<DatasetManifest> {
    let path = root.join(MANIFEST_FILE);
    let m: DatasetManifest = serde_json::from_str(&read_file(&path)?)
        .map_err(|e| Error::ManifestSchemaViolation(e.to_string()))?;
    if m.version != MANIFEST_VERSION {
        return Err(Error::ManifestSchemaViolation(format!(
            "unsupported manifest version {}",
            m.version
        )));
    }
    Ok(m)
}

/// Load and validate every sample listed in `root/manifest.json`.
pub fn load_dataset(root: &Path) -> Result<Dataset> {
    let manifest = load_manifest(root)?;
    for s in &manifest.samples {
        let chars = s.text.chars().count();
        if s.glyph_mask_paths.len() != chars {
            return Err(Error::MaskGlyphCountMismatch {
                id: s.id.clone(),
                masks: s.glyph_mask_paths.len(),
                chars,
            });
        }
    }
    let samples = manifest
        .samples
        .par_iter()
        .map(|s| {
            let masks: Vec<PathBuf> = s.glyph_mask_paths.iter().map(|p| root.join(p)).collect();
            let loaded = build_sample(&s.id, &root.join(&s.annotation_path), &masks, Some((&s.text, s.canvas)))?;
            if loaded.constraint_text != s.constraint_text {
                return Err(schema_err(&s.id, "constraint disagrees with manifest"));
            }
            Ok(loaded)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Dataset {
        root: root.to_path_buf(),
        manifest,
        samples,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    const PAPER_RECORD: &str = r#"[{"word":"T0","detail":"","box":[0.4759,0.0231,0.5863,0.3790]}]"#;

    fn nb(l: f64, t: f64, r: f64, b: f64) -> NormBox {
        NormBox::new(l, t, r, b).unwrap()
    }

    #[test]
    fn parses_prompt_example() {
        let p = parse_layout_json(PAPER_RECORD, None).unwrap();
        assert_eq!(p.record.entries.len(), 1);
        assert_eq!(p.record.entries[0].word, "T0");
        assert_eq!(p.record.entries[0].bbox.unwrap().coords(), [0.4759, 0.0231, 0.5863, 0.3790]);
        assert!(p.clamped.is_empty());
        let out = serialize_layout_record(&p.record);
        assert!(out.contains(r#""box": [0.4759, 0.0231, 0.5863, 0.3790]"#), "{out}");
    }

    #[test]
    fn empty_array_with_empty_expectation() {
        let p = parse_layout_json("[]", Some(&[])).unwrap();
        assert!(p.record.entries.is_empty());
    }

    #[test]
    fn inverted_box_rejected() {
        let t = r#"[{"word":"a","detail":"","box":[0.6,0.1,0.4,0.3]}]"#;
        assert!(matches!(parse_layout_json(t, None), Err(Error::InvertedBox { index: 0, .. })));
    }

    #[test]
    fn out_of_range_clamped_and_flagged() {
        let t = r#"[{"word":"a","detail":"","box":[-0.1,0.1,0.4,1.2]}]"#;
        let p = parse_layout_json(t, None).unwrap();
        assert_eq!(p.clamped, vec![0]);
        assert_eq!(p.record.entries[0].bbox.unwrap().coords(), [0.0, 0.1, 0.4, 1.0]);
        let gone = r#"[{"word":"a","detail":"","box":[1.1,0.1,1.4,0.3]}]"#;
        assert!(matches!(parse_layout_json(gone, None), Err(Error::InvertedBox { .. })));
    }

    #[test]
    fn schema_errors() {
        assert!(matches!(parse_layout_json("{", None), Err(Error::MalformedJson(_))));
        assert!(matches!(parse_layout_json("{}", None), Err(Error::MalformedJson(_))));
        let missing = r#"[{"word":"a","box":[0.1,0.1,0.4,0.3]}]"#;
        assert!(matches!(parse_layout_json(missing, None), Err(Error::SchemaViolation { index: 0, .. })));
        let arity = r#"[{"word":"a","detail":"","box":[0.1,0.1,0.4]}]"#;
        assert!(matches!(parse_layout_json(arity, None), Err(Error::SchemaViolation { .. })));
        let empty_word = r#"[{"word":"","detail":"","box":[]}]"#;
        assert!(matches!(parse_layout_json(empty_word, None), Err(Error::SchemaViolation { .. })));
    }

    #[test]
    fn word_mismatch_names_index() {
        let t = r#"[{"word":"a","detail":"","box":[]},{"word":"c","detail":"","box":[]}]"#;
        let want = vec!["a".to_string(), "b".to_string()];
        match parse_layout_json(t, Some(&want)) {
            Err(Error::WordMismatch { index, .. }) => assert_eq!(index, 1),
            other => panic!("{other:?}"),
        }
        assert!(matches!(
            parse_layout_json(t, Some(&want[..1])),
            Err(Error::WordMismatch { index: 1, .. })
        ));
    }

    #[test]
    fn serialize_format() {
        let r = LayoutRecord::from_layout(&["x".into()], &[], &Layout::new(vec![nb(0.5, 0.25, 0.75, 0.5)]));
        let s = serialize_layout_record(&r);
        assert!(s.contains(r#""box": [0.5000, 0.2500, 0.7500, 0.5000]"#));
        let word = s.find("\"word\"").unwrap();
        let detail = s.find("\"detail\"").unwrap();
        let bx = s.find("\"box\"").unwrap();
        assert!(word < detail && detail < bx);
        assert_eq!(serialize_layout_record(&LayoutRecord::default()), "[]");
    }

    #[test]
    fn skeleton_matches_prompt_shape() {
        let r = empty_record_for(&["你".into(), "好".into()]);
        assert_eq!(r.entries.len(), 2);
        assert!(r.entries.iter().all(|e| e.bbox.is_none() && e.detail.is_empty()));
        let s = serialize_layout_record(&r);
        assert!(s.contains(r#"{"word": "你", "detail": "", "box": []}"#), "{s}");
        assert_eq!(parse_layout_json(&s, None).unwrap().record, r);
        assert!(empty_record_for(&[]).entries.is_empty());
        assert!(r.to_layout().is_err());
    }

    #[test]
    fn escapes_strings() {
        let r = LayoutRecord {
            entries: vec![LayoutEntry {
                word: "\"".into(),
                detail: "a\nb".into(),
                bbox: Some(nb(0.1, 0.1, 0.2, 0.2)),
            }],
        };
        let back = parse_layout_json(&serialize_layout_record(&r), None).unwrap().record;
        assert_eq!(back, r);
    }

    #[test]
    fn round_trip_precision_is_exact() {
        let r = LayoutRecord::from_layout(
            &["q".into()],
            &["d".into()],
            &Layout::new(vec![nb(0.1, 1.0 / 3.0, 0.2 + 1e-13, 0.9)]),
        );
        let s = serialize_layout_record_with(&r, Precision::RoundTrip);
        assert_eq!(parse_layout_json(&s, None).unwrap().record, r);
        let v = r.to_json_value();
        assert_eq!(parse_layout_value(&v, None).unwrap().record, r);
    }

    #[test]
    fn stats_examples() {
        let sample = |n: usize| SampleEntry {
            id: String::new(),
            text: "x".repeat(n),
            canvas: [1, 1],
            glyph_mask_paths: vec![String::new(); n],
            annotation_path: String::new(),
            description: String::new(),
            constraint_text: None,
        };
        let m = DatasetManifest {
            version: 1,
            samples: vec![sample(3), sample(5)],
        };
        let s = dataset_stats(&m);
        assert_eq!((s.samples, s.total_glyphs), (2, 8));
        assert_eq!(s.glyphs_per_image, 4.0);

        let single = DatasetManifest {
            version: 1,
            samples: vec![sample(7)],
        };
        assert_eq!(dataset_stats(&single).glyphs_per_image, 7.0);

        // 3470 samples (3170 train + 300 test) holding 16274 glyphs.
        let mut samples: Vec<_> = (0..3470).map(|_| sample(4)).collect();
        for s in samples.iter_mut().take(16274 - 4 * 3470) {
            *s = sample(5);
        }
        let big = dataset_stats(&DatasetManifest { version: 1, samples });
        assert_eq!(big.total_glyphs, 16274);
        assert_eq!(format!("{:.2}", big.glyphs_per_image), "4.69");
    }

    #[test]
    fn empty_manifest_loads() {
        let dir = tempfile::tempdir().unwrap();
        write_json_atomic(&DatasetManifest::default(), &dir.path().join(MANIFEST_FILE)).unwrap();
        let d = load_dataset(dir.path()).unwrap();
        assert!(d.samples.is_empty());
    }

    #[test]
    fn missing_manifest_and_mask() {
        let dir = tempfile::tempdir().unwrap();
        assert!(matches!(load_dataset(dir.path()), Err(Error::MissingFile(_))));

        let m = DatasetManifest {
            version: 1,
            samples: vec![SampleEntry {
                id: "a".into(),
                text: "x".into(),
                canvas: [10, 10],
                glyph_mask_paths: vec!["a/glyph_0.png".into()],
                annotation_path: "a/annotation.json".into(),
                description: String::new(),
                constraint_text: None,
            }],
        };
        fs::create_dir(dir.path().join("a")).unwrap();
        let ann = Annotation {
            canvas: [10, 10],
            text: "x".into(),
            layout: json!([{"word": "x", "detail": "", "box": [0.1, 0.1, 0.5, 0.5]}]),
            description: String::new(),
            constraint: None,
        };
        write_json_atomic(&ann, &dir.path().join("a/annotation.json")).unwrap();
        write_json_atomic(&m, &dir.path().join(MANIFEST_FILE)).unwrap();
        assert!(matches!(load_dataset(dir.path()), Err(Error::MissingFile(p)) if p.ends_with("glyph_0.png")));

        write_mask_png(GlyphRaster::filled(3, 2).mask(), &dir.path().join("a/glyph_0.png")).unwrap();
        let d = load_dataset(dir.path()).unwrap();
        assert_eq!(d.samples.len(), 1);
        assert_eq!(d.samples[0].instance.glyphs()[0].raster().width(), 3);

        let mut bad = m.clone();
        bad.samples[0].glyph_mask_paths.push("a/glyph_1.png".into());
        write_json_atomic(&bad, &dir.path().join(MANIFEST_FILE)).unwrap();
        assert!(matches!(load_dataset(dir.path()), Err(Error::MaskGlyphCountMismatch { .. })));

        fs::write(dir.path().join(MANIFEST_FILE), "{\"samples\": 3}").unwrap();
        assert!(matches!(load_dataset(dir.path()), Err(Error::ManifestSchemaViolation(_))));
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        fn record() -> impl Strategy<Value = LayoutRecord> {
            prop::collection::vec(
                ("[a-z\u{4e00}-\u{4e20}]", ".{0,12}", 0.0f64..0.9, 0.0f64..0.9, 0.001f64..0.1, 0.001f64..0.1),
                0..10,
            )
            .prop_map(|v| LayoutRecord {
                entries: v
                    .into_iter()
                    .map(|(word, detail, l, t, w, h)| LayoutEntry {
                        word,
                        detail,
                        bbox: Some(nb(l, t, l + w, t + h)),
                    })
                    .collect(),
            })
        }

        fn round4(r: &LayoutRecord) -> LayoutRecord {
            let q = |x: f64| format!("{x:.4}").parse::<f64>().unwrap();
            LayoutRecord {
                entries: r
                    .entries
                    .iter()
                    .map(|e| LayoutEntry {
                        bbox: e.bbox.map(|b| {
                            let c = b.coords().map(q);
                            nb(c[0], c[1], c[2], c[3])
                        }),
                        ..e.clone()
                    })
                    .collect(),
            }
        }

        proptest! {
            #[test]
            fn serialize_parse_identity_at_4_decimals(r in record()) {
                let s = serialize_layout_record(&r);
                let back = parse_layout_json(&s, None).unwrap().record;
                prop_assert_eq!(&back, &round4(&r));
                prop_assert_eq!(serialize_layout_record(&back), s);
            }
        }
    }
}
