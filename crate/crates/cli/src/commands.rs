use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;

use glyphforge::baselines::{layout_rule_a, layout_rule_b};
use glyphforge::compositor::{compose, render_png};
use glyphforge::constraints::{check_constraint, parse_constraint, ConstraintSet};
use glyphforge::featpipe::{adaptive_avg_pool, patch_features};
use glyphforge::metrics::{evaluate, mean_report};
use glyphforge::schema::{
    dataset_stats, load_dataset, load_sample_dir, parse_layout_json, read_mask_png, serialize_layout_record,
    words_of, write_json_atomic, write_text_atomic, LayoutRecord, LoadedSample,
};
use glyphforge::solver::{derive_seed, describe_layout, solve as run_solver, SolverConfig};
use glyphforge::synth::synthesize_dataset;
use glyphforge::Layout;

use crate::report::{EvalReport, MeanScore, SampleScore, REPORT_VERSION};
use crate::{Failure, OrExit, EXIT_CONSTRAINT, EXIT_DATASET, EXIT_IO, EXIT_SCHEMA};

const LAYOUT_FILE: &str = "layout.json";

pub fn synth(count: usize, seed: u64, out: &Path) -> Result<(), Failure> {
    let manifest = synthesize_dataset(count, seed, out).or_exit(EXIT_IO)?;
    let stats = dataset_stats(&manifest);
    println!(
        "wrote {} samples to {} ({} glyphs, {:.2} per image)",
        stats.samples,
        out.display(),
        stats.total_glyphs,
        stats.glyphs_per_image
    );
    Ok(())
}

pub struct SolveArgs {
    pub input: PathBuf,
    pub out: PathBuf,
    pub constraint: Option<String>,
    pub config: Option<PathBuf>,
    pub seed: Option<u64>,
    pub render: bool,
    pub trace: bool,
}

fn parse_clause(text: &str) -> Result<ConstraintSet, Failure> {
    parse_constraint(text).map_err(|e| Failure::new(EXIT_CONSTRAINT, format!("{e} in {text:?}")))
}

/// Accepts a dataset root, a sample directory, or a sample's annotation.json.
fn load_input(input: &Path) -> Result<Vec<LoadedSample>, Failure> {
    if input.join("manifest.json").is_file() {
        return Ok(load_dataset(input).or_exit(EXIT_DATASET)?.samples);
    }
    let dir = if input.is_file() {
        input.parent().unwrap_or(Path::new("."))
    } else {
        input
    };
    if !dir.join("annotation.json").is_file() {
        return Err(Failure::new(
            EXIT_DATASET,
            format!("{} is neither a dataset nor a sample", input.display()),
        ));
    }
    Ok(vec![load_sample_dir(dir).or_exit(EXIT_DATASET)?])
}

fn sample_constraint(s: &LoadedSample, fixed: Option<&ConstraintSet>) -> Result<Option<ConstraintSet>, Failure> {
    match (fixed, &s.constraint_text) {
        (Some(c), _) => Ok(Some(*c)),
        (None, Some(t)) => parse_clause(t).map(Some),
        (None, None) => Ok(None),
    }
}

fn load_config(path: Option<&Path>) -> Result<SolverConfig, Failure> {
    let Some(path) = path else {
        return Ok(SolverConfig::default());
    };
    let text = fs::read_to_string(path).map_err(|e| Failure::new(EXIT_IO, format!("{}: {e}", path.display())))?;
    let cfg: SolverConfig =
        serde_json::from_str(&text).map_err(|e| Failure::new(1, format!("{}: {e}", path.display())))?;
    cfg.validate().or_exit(1)?;
    Ok(cfg)
}

pub fn solve(args: &SolveArgs) -> Result<(), Failure> {
    let fixed = args.constraint.as_deref().map(parse_clause).transpose()?;
    let mut cfg = load_config(args.config.as_deref())?;
    if let Some(seed) = args.seed {
        cfg.seed = seed;
    }
    let samples = load_input(&args.input)?;
    let constraints = samples
        .iter()
        .map(|s| sample_constraint(s, fixed.as_ref()))
        .collect::<Result<Vec<_>, _>>()?;
    fs::create_dir_all(&args.out).map_err(|e| Failure::new(EXIT_IO, format!("{}: {e}", args.out.display())))?;

    let outcomes = samples
        .par_iter()
        .zip(&constraints)
        .map(|(s, c)| -> Result<Option<bool>, Failure> {
            let (layout, trace) = run_solver(&s.instance, c.as_ref(), &cfg).or_exit(1)?;
            let dir = args.out.join(&s.id);
            fs::create_dir_all(&dir).map_err(|e| Failure::new(EXIT_IO, format!("{}: {e}", dir.display())))?;
            let words = s.record.words();
            let record = LayoutRecord::from_layout(&words, &describe_layout(&layout).details, &layout);
            write_text_atomic(&serialize_layout_record(&record), &dir.join(LAYOUT_FILE)).or_exit(EXIT_IO)?;
            if args.render {
                let occ = compose(&s.instance, &layout).or_exit(1)?;
                render_png(&occ, &dir.join("render.png")).or_exit(EXIT_IO)?;
            }
            if args.trace {
                write_json_atomic(&trace, &dir.join("trace.json")).or_exit(EXIT_IO)?;
            }
            let satisfied = c.as_ref().map(|c| check_constraint(c, &layout).satisfied);
            log::info!("{}: energy {:.4}, satisfied {satisfied:?}", s.id, trace.best_energy);
            Ok(satisfied)
        })
        .collect::<Result<Vec<_>, _>>()?;

    let checked: Vec<bool> = outcomes.iter().flatten().copied().collect();
    let ok = checked.iter().filter(|&&b| b).count();
    if checked.is_empty() {
        println!("solved {} samples into {}", samples.len(), args.out.display());
    } else {
        println!(
            "solved {} samples into {}; constraints satisfied {ok}/{}",
            samples.len(),
            args.out.display(),
            checked.len()
        );
    }
    Ok(())
}

fn layout_for(source: &str, s: &LoadedSample, index: usize, seed: u64) -> Result<Layout, Failure> {
    let (w, h) = s.instance.canvas();
    let glyphs = s.instance.glyphs();
    match source {
        "gt" => Ok(s.ground_truth().clone()),
        "rule-a" => Ok(layout_rule_a(glyphs, w, h)),
        "rule-b" => Ok(layout_rule_b(glyphs, w, h, derive_seed(seed, index as u64))),
        dir => {
            let path = Path::new(dir).join(&s.id).join(LAYOUT_FILE);
            let text = fs::read_to_string(&path)
                .map_err(|e| Failure::new(EXIT_DATASET, format!("{}: {e}", path.display())))?;
            let parsed = parse_layout_json(&text, Some(&s.record.words()))
                .map_err(|e| Failure::new(EXIT_SCHEMA, format!("{}: {e}", path.display())))?;
            parsed
                .record
                .to_layout()
                .map_err(|e| Failure::new(EXIT_SCHEMA, format!("{}: {e}", path.display())))
        }
    }
}

pub fn eval(
    dataset: &Path,
    source: &str,
    constraint: Option<&str>,
    seed: u64,
    report: Option<&Path>,
) -> Result<(), Failure> {
    let fixed = constraint.map(parse_clause).transpose()?;
    let ds = load_dataset(dataset).or_exit(EXIT_DATASET)?;
    if !matches!(source, "gt" | "rule-a" | "rule-b") && !Path::new(source).is_dir() {
        return Err(Failure::new(
            EXIT_DATASET,
            format!("layout source {source:?} is not gt, rule-a, rule-b or a directory"),
        ));
    }
    let scored = ds
        .samples
        .par_iter()
        .enumerate()
        .map(|(i, s)| {
            let layout = layout_for(source, s, i, seed)?;
            let m = evaluate(&s.instance, &layout).or_exit(EXIT_SCHEMA)?;
            let c = sample_constraint(s, fixed.as_ref())?;
            let violated = c.as_ref().map(|c| !check_constraint(c, &layout).satisfied);
            Ok((m, c, violated))
        })
        .collect::<Result<Vec<_>, Failure>>()?;

    let metrics: Vec<_> = scored.iter().map(|(m, _, _)| m.clone()).collect();
    let checked: Vec<bool> = scored.iter().filter_map(|(_, _, v)| *v).collect();
    let vio = (!checked.is_empty()).then(|| checked.iter().filter(|&&v| v).count() as f64 / checked.len() as f64);
    let mean = match mean_report(&metrics) {
        Some(m) => MeanScore {
            overlap_iou: m.overlap_iou,
            visual_balance: m.visual_balance,
            ratio_consistency: m.ratio_consistency,
            vio,
        },
        None => MeanScore {
            overlap_iou: 0.0,
            visual_balance: 0.0,
            ratio_consistency: 0.0,
            vio,
        },
    };
    let out = EvalReport {
        report_version: REPORT_VERSION,
        source: source.to_string(),
        samples: ds
            .samples
            .iter()
            .zip(&scored)
            .map(|(s, (m, c, v))| SampleScore::new(&s.id, m, c.map(|c| c.to_string()), *v))
            .collect(),
        mean,
    };
    print!("{}", out.table());
    if let Some(path) = report {
        write_json_atomic(&out, path).or_exit(EXIT_IO)?;
    }
    Ok(())
}

pub fn validate(layout: &Path, sample: Option<&Path>, text: Option<&str>) -> Result<(), Failure> {
    let json = fs::read_to_string(layout).map_err(|e| Failure::new(EXIT_IO, format!("{}: {e}", layout.display())))?;
    let expected = match (sample, text) {
        (Some(dir), _) => Some(load_sample_dir(dir).or_exit(EXIT_DATASET)?.record.words()),
        (None, Some(t)) => Some(words_of(t)),
        (None, None) => None,
    };
    let parsed = parse_layout_json(&json, expected.as_deref()).or_exit(EXIT_SCHEMA)?;
    for i in &parsed.clamped {
        eprintln!("warning: entry {i} had coordinates outside [0, 1] and was clamped");
    }
    println!("valid: {} entries", parsed.record.entries.len());
    Ok(())
}

pub fn inspect_features(mask: &Path, grid: usize, pool: usize) -> Result<(), Failure> {
    if grid == 0 {
        return Err(Failure::new(1, "grid must be positive"));
    }
    let m = read_mask_png(mask).or_exit(EXIT_IO)?;
    let f = patch_features(&m, grid);
    let pooled = adaptive_avg_pool(&f, pool, pool).or_exit(1)?;
    let fmt = |v: Vec<f64>| v.iter().map(|x| format!("{x:.4}")).collect::<Vec<_>>().join(" ");
    println!("mask {}x{}", m.width(), m.height());
    println!(
        "features {}x{}x{} ({} tokens), channel means {}",
        f.rows(),
        f.cols(),
        f.dim(),
        f.tokens(),
        fmt(f.channel_means())
    );
    println!(
        "pooled {}x{}x{} ({} tokens, {:.1}x fewer), channel means {}",
        pooled.rows(),
        pooled.cols(),
        pooled.dim(),
        pooled.tokens(),
        f.tokens() as f64 / pooled.tokens() as f64,
        fmt(pooled.channel_means())
    );
    Ok(())
}
