use serde::Serialize;

use glyphforge::metrics::MetricReport;

pub const REPORT_VERSION: u32 = 1;

#[derive(Debug, Serialize)]
pub struct SampleScore {
    pub id: String,
    pub overlap_iou: f64,
    pub visual_balance: f64,
    pub ratio_consistency: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub constraint: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub violated: Option<bool>,
}

#[derive(Debug, Serialize)]
pub struct MeanScore {
    pub overlap_iou: f64,
    pub visual_balance: f64,
    pub ratio_consistency: f64,
    /// Fraction of constrained samples that violate their constraint.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub vio: Option<f64>,
}

#[derive(Debug, Serialize)]
pub struct EvalReport {
    pub report_version: u32,
    pub source: String,
    pub samples: Vec<SampleScore>,
    pub mean: MeanScore,
}

impl SampleScore {
    pub fn new(id: &str, m: &MetricReport, constraint: Option<String>, violated: Option<bool>) -> Self {
        Self {
            id: id.to_string(),
            overlap_iou: m.overlap_iou,
            visual_balance: m.visual_balance,
            ratio_consistency: m.ratio_consistency,
            constraint,
            violated,
        }
    }
}

impl EvalReport {
    pub fn table(&self) -> String {
        let mut header = vec!["source".to_string(), "samples".into(), "IoU".into(), "V.B".into(), "Ratio".into()];
        let mut row = vec![
            self.source.clone(),
            self.samples.len().to_string(),
            format!("{:.2}", self.mean.overlap_iou),
            format!("{:.2}", self.mean.visual_balance),
            format!("{:.2}", self.mean.ratio_consistency),
        ];
        if let Some(v) = self.mean.vio {
            header.push("ViO".into());
            row.push(format!("{v:.2}"));
        }
        let widths: Vec<usize> = header.iter().zip(&row).map(|(h, r)| h.len().max(r.len())).collect();
        let line = |cells: &[String]| {
            cells
                .iter()
                .zip(&widths)
                .enumerate()
                .map(|(i, (c, w))| if i == 0 { format!("{c:<w$}") } else { format!("{c:>w$}") })
                .collect::<Vec<_>>()
                .join("  ")
        };
        format!("{}\n{}\n", line(&header), line(&row))
    }
}
