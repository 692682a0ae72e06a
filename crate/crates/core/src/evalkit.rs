//! Scoring the pipeline against labelled ground truth.
//!
//! A manifest lists page images and their ground-truth words; each word is
//! referenced either by its index in reading order (cheap, for manifests
//! authored against this crate's own segmentation) or by its bounding box
//! (robust, for external annotations), and carries its true script. The
//! result is a 3x4 confusion matrix — one row per script, one column per
//! prediction including `Unknown` — plus per-class and overall accuracy.
//!
//! Ground-truth words that cannot be matched to a segmented word are never
//! silently dropped: they are reported as unresolved.

use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::classifier::ScriptLabel;
use crate::pipeline::{classify_page, PipelineConfig, PipelineError};
use crate::raster::{load_image, RasterError};
use crate::segmenter::WordBox;

/// Errors produced while loading manifests or evaluating.
#[derive(Debug, Error)]
pub enum EvalError {
    #[error("failed to read manifest: {0}")]
    Io(String),
    #[error("failed to parse manifest: {0}")]
    Parse(#[from] serde_json::Error),
    #[error("invalid manifest: {0}")]
    Invalid(String),
    #[error(transparent)]
    Raster(#[from] RasterError),
    #[error(transparent)]
    Pipeline(#[from] PipelineError),
}

/// Row order of the confusion matrix (true classes).
pub const CLASS_ORDER: [ScriptLabel; 3] = [
    ScriptLabel::Kannada,
    ScriptLabel::English,
    ScriptLabel::Hindi,
];

/// Column order of the confusion matrix (predictions).
pub const PREDICTION_ORDER: [ScriptLabel; 4] = [
    ScriptLabel::Kannada,
    ScriptLabel::English,
    ScriptLabel::Hindi,
    ScriptLabel::Unknown,
];

/// An inclusive bounding box as written in manifests.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GtBox {
    pub x0: u32,
    pub y0: u32,
    pub x1: u32,
    pub y1: u32,
}

impl From<&WordBox> for GtBox {
    fn from(w: &WordBox) -> Self {
        Self {
            x0: w.x_left,
            y0: w.y_top,
            x1: w.x_right,
            y1: w.y_bottom,
        }
    }
}

/// Intersection-over-union of two inclusive boxes.
pub fn iou(a: &GtBox, b: &GtBox) -> f64 {
    let ix = (a.x1.min(b.x1) as i64 - a.x0.max(b.x0) as i64 + 1).max(0) as u64;
    let iy = (a.y1.min(b.y1) as i64 - a.y0.max(b.y0) as i64 + 1).max(0) as u64;
    let inter = ix * iy;
    if inter == 0 {
        return 0.0;
    }
    let area = |b: &GtBox| u64::from(b.x1 - b.x0 + 1) * u64::from(b.y1 - b.y0 + 1);
    inter as f64 / (area(a) + area(b) - inter) as f64
}

/// One labelled word: exactly one of `index` / `box` must be present.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GroundTruthWord {
    /// Index of the word on its page in reading order.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub index: Option<usize>,
    /// Bounding box of the word; matched to segmented boxes by IoU >= 0.5.
    #[serde(default, skip_serializing_if = "Option::is_none", rename = "box")]
    pub bbox: Option<GtBox>,
    /// The true script. `Unknown` is not a valid ground-truth label.
    pub label: ScriptLabel,
}

/// One page image and its ground truth.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ManifestEntry {
    /// Image path, resolved relative to the manifest's directory.
    pub image: String,
    pub words: Vec<GroundTruthWord>,
}

/// A labelled evaluation set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Manifest {
    pub entries: Vec<ManifestEntry>,
}

impl Manifest {
    /// Loads and validates a manifest file.
    pub fn from_path(path: impl AsRef<Path>) -> Result<Self, EvalError> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)
            .map_err(|e| EvalError::Io(format!("{}: {e}", path.display())))?;
        let manifest: Self = serde_json::from_str(&text)?;
        manifest.validate()?;
        Ok(manifest)
    }

    /// Checks that every word has exactly one reference and a real script
    /// as its label.
    pub fn validate(&self) -> Result<(), EvalError> {
        for entry in &self.entries {
            for (i, word) in entry.words.iter().enumerate() {
                match (word.index, &word.bbox) {
                    (Some(_), None) | (None, Some(_)) => {}
                    _ => {
                        return Err(EvalError::Invalid(format!(
                            "{}: word {i} must have exactly one of `index` or `box`",
                            entry.image
                        )))
                    }
                }
                if word.label == ScriptLabel::Unknown {
                    return Err(EvalError::Invalid(format!(
                        "{}: word {i} is labelled Unknown; ground truth must name a script",
                        entry.image
                    )));
                }
            }
        }
        Ok(())
    }
}

/// The outcome of one evaluation run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    /// `counts[i][j]`: words of true class [`CLASS_ORDER`]`[i]` predicted as
    /// [`PREDICTION_ORDER`]`[j]`.
    pub counts: [[u64; 4]; 3],
    /// `counts` as percentages of each row.
    pub row_percent: [[f64; 4]; 3],
    /// Diagonal of `row_percent`, as fractions.
    pub per_class_accuracy: [f64; 3],
    /// Correct predictions over all resolved words.
    pub overall_accuracy: f64,
    /// Number of resolved ground-truth words.
    pub total: u64,
    /// Ground-truth words that matched no segmented word, one message each.
    pub unresolved: Vec<String>,
}

impl EvalReport {
    /// Derives all the rates from raw counts.
    pub fn from_counts(counts: [[u64; 4]; 3], unresolved: Vec<String>) -> Self {
        let mut row_percent = [[0.0; 4]; 3];
        let mut per_class_accuracy = [0.0; 3];
        let mut total = 0u64;
        let mut correct = 0u64;
        for (i, row) in counts.iter().enumerate() {
            let row_total: u64 = row.iter().sum();
            total += row_total;
            correct += row[i];
            if row_total > 0 {
                for (j, &c) in row.iter().enumerate() {
                    row_percent[i][j] = 100.0 * c as f64 / row_total as f64;
                }
                per_class_accuracy[i] = counts[i][i] as f64 / row_total as f64;
            }
        }
        let overall_accuracy = if total > 0 {
            correct as f64 / total as f64
        } else {
            0.0
        };
        Self {
            counts,
            row_percent,
            per_class_accuracy,
            overall_accuracy,
            total,
            unresolved,
        }
    }

    pub fn unresolved_count(&self) -> usize {
        self.unresolved.len()
    }

    /// The report as an aligned text table.
    pub fn render_table(&self) -> String {
        use std::fmt::Write;

        let mut out = String::new();
        write!(out, "{:>10}", "").unwrap();
        for p in PREDICTION_ORDER {
            write!(out, "{:>10}", p.to_string()).unwrap();
        }
        out.push('\n');
        for (i, class) in CLASS_ORDER.iter().enumerate() {
            write!(out, "{:>10}", class.to_string()).unwrap();
            for j in 0..PREDICTION_ORDER.len() {
                write!(out, "{:>9.2}%", self.row_percent[i][j]).unwrap();
            }
            let row_total: u64 = self.counts[i].iter().sum();
            writeln!(out, "   ({row_total} words)").unwrap();
        }
        out.push('\n');
        write!(out, "per-class accuracy:").unwrap();
        for (i, class) in CLASS_ORDER.iter().enumerate() {
            write!(
                out,
                " {class} {:.2}%{}",
                100.0 * self.per_class_accuracy[i],
                if i + 1 < CLASS_ORDER.len() { "," } else { "" }
            )
            .unwrap();
        }
        out.push('\n');
        let correct: u64 = (0..3).map(|i| self.counts[i][i]).sum();
        writeln!(
            out,
            "overall accuracy: {:.3}% ({correct}/{} resolved words); unresolved: {}",
            100.0 * self.overall_accuracy,
            self.total,
            self.unresolved.len()
        )
        .unwrap();
        out
    }
}

fn class_row(label: ScriptLabel) -> usize {
    CLASS_ORDER
        .iter()
        .position(|&c| c == label)
        .expect("ground-truth labels are validated to be real scripts")
}

fn prediction_col(label: ScriptLabel) -> usize {
    PREDICTION_ORDER
        .iter()
        .position(|&c| c == label)
        .expect("every label appears in the prediction order")
}

/// A page's contribution to the report: confusion counts plus messages for
/// unresolved ground-truth words.
type PageTally = ([[u64; 4]; 3], Vec<String>);

/// Scores one entry against its page's predictions.
fn tally_entry(entry: &ManifestEntry, predictions: &[crate::pipeline::WordResult]) -> PageTally {
    let mut counts = [[0u64; 4]; 3];
    let mut unresolved = Vec::new();
    for (i, gt) in entry.words.iter().enumerate() {
        let predicted = match (gt.index, &gt.bbox) {
            (Some(idx), _) => {
                if idx < predictions.len() {
                    Some(predictions[idx].label)
                } else {
                    unresolved.push(format!(
                        "{}: word {i} references index {idx}, but only {} words were segmented",
                        entry.image,
                        predictions.len()
                    ));
                    None
                }
            }
            (None, Some(bbox)) => {
                let mut best: Option<(f64, ScriptLabel)> = None;
                for p in predictions {
                    let overlap = iou(bbox, &GtBox::from(&p.word));
                    if overlap >= 0.5 && best.is_none_or(|(b, _)| overlap > b) {
                        best = Some((overlap, p.label));
                    }
                }
                if best.is_none() {
                    unresolved.push(format!(
                        "{}: word {i} box ({},{})-({},{}) overlaps no segmented word at IoU >= 0.5",
                        entry.image, bbox.x0, bbox.y0, bbox.x1, bbox.y1
                    ));
                }
                best.map(|(_, label)| label)
            }
            (None, None) => unreachable!("manifest was validated"),
        };
        if let Some(label) = predicted {
            counts[class_row(gt.label)][prediction_col(label)] += 1;
        }
    }
    (counts, unresolved)
}

/// Runs the pipeline over every manifest entry and scores the predictions.
///
/// Image paths resolve relative to `base_dir`. Pages are processed in
/// parallel (bounded by the ambient rayon pool), but tallies are merged in
/// manifest order, so the report does not depend on thread count. A page
/// that fails to load or run is a hard error; a ground-truth word that
/// merely fails to match goes into [`EvalReport::unresolved`].
pub fn evaluate(
    manifest: &Manifest,
    base_dir: &Path,
    config: &PipelineConfig,
) -> Result<EvalReport, EvalError> {
    manifest.validate()?;
    config.validate().map_err(PipelineError::from)?;

    let tallies: Vec<Result<PageTally, EvalError>> = manifest
        .entries
        .par_iter()
        .map(|entry| {
            let img = load_image(base_dir.join(&entry.image))?;
            let predictions = classify_page(&img, config)?;
            Ok(tally_entry(entry, &predictions))
        })
        .collect();

    let mut counts = [[0u64; 4]; 3];
    let mut unresolved = Vec::new();
    for tally in tallies {
        let (entry_counts, entry_unresolved) = tally?;
        for (row, entry_row) in counts.iter_mut().zip(&entry_counts) {
            for (cell, &v) in row.iter_mut().zip(entry_row) {
                *cell += v;
            }
        }
        unresolved.extend(entry_unresolved);
    }
    Ok(EvalReport::from_counts(counts, unresolved))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::raster::save_png;
    use crate::synth::{make_page, FixtureSpec, WordSpec};

    fn two_word_page() -> (crate::raster::GrayImage, crate::synth::PageGroundTruth) {
        let spec = FixtureSpec {
            seed: 11,
            lines: vec![vec![
                WordSpec {
                    label: ScriptLabel::Hindi,
                    target_ratio: 0.16,
                    target_vs: 3,
                    height: 12,
                    width: 34,
                },
                WordSpec {
                    label: ScriptLabel::English,
                    target_ratio: 0.7,
                    target_vs: 2,
                    height: 12,
                    width: 30,
                },
            ]],
            word_gap: 8,
            line_gap: 6,
            margin: 5,
            page_width: None,
            page_height: None,
        };
        make_page(&spec).unwrap()
    }

    fn write_page(dir: &Path, name: &str, page: &crate::raster::GrayImage) {
        save_png(page, dir.join(name)).unwrap();
    }

    #[test]
    fn iou_of_boxes() {
        let a = GtBox {
            x0: 0,
            y0: 0,
            x1: 9,
            y1: 9,
        };
        assert_eq!(iou(&a, &a), 1.0);
        let disjoint = GtBox {
            x0: 20,
            y0: 0,
            x1: 29,
            y1: 9,
        };
        assert_eq!(iou(&a, &disjoint), 0.0);
        let half = GtBox {
            x0: 0,
            y0: 5,
            x1: 9,
            y1: 14,
        };
        assert!((iou(&a, &half) - 50.0 / 150.0).abs() < 1e-12);
    }

    #[test]
    fn manifest_validation_catches_bad_words() {
        let both = r#"{"entries":[{"image":"a.png","words":[
            {"index":0,"box":{"x0":0,"y0":0,"x1":1,"y1":1},"label":"Hindi"}]}]}"#;
        let manifest: Manifest = serde_json::from_str(both).unwrap();
        assert!(matches!(manifest.validate(), Err(EvalError::Invalid(_))));

        let neither = r#"{"entries":[{"image":"a.png","words":[{"label":"Hindi"}]}]}"#;
        let manifest: Manifest = serde_json::from_str(neither).unwrap();
        assert!(manifest.validate().is_err());

        let unknown = r#"{"entries":[{"image":"a.png","words":[{"index":0,"label":"Unknown"}]}]}"#;
        let manifest: Manifest = serde_json::from_str(unknown).unwrap();
        assert!(manifest.validate().is_err());
    }

    #[test]
    fn correct_predictions_score_perfectly() {
        let dir = tempfile::tempdir().unwrap();
        let (page, gt) = two_word_page();
        write_page(dir.path(), "page.png", &page);
        let manifest = Manifest {
            entries: vec![ManifestEntry {
                image: "page.png".into(),
                words: gt
                    .words
                    .iter()
                    .enumerate()
                    .map(|(i, w)| GroundTruthWord {
                        index: Some(i),
                        bbox: None,
                        label: w.label,
                    })
                    .collect(),
            }],
        };
        let report = evaluate(&manifest, dir.path(), &PipelineConfig::default()).unwrap();
        assert_eq!(report.total, 2);
        assert_eq!(report.overall_accuracy, 1.0);
        assert!(report.unresolved.is_empty());
        assert_eq!(report.counts[class_row(ScriptLabel::Hindi)][2], 1);
        assert_eq!(report.counts[class_row(ScriptLabel::English)][1], 1);
    }

    #[test]
    fn a_misprediction_lands_off_the_diagonal() {
        // Claim both words are Hindi; the second is printed as English.
        let dir = tempfile::tempdir().unwrap();
        let (page, _) = two_word_page();
        write_page(dir.path(), "page.png", &page);
        let manifest = Manifest {
            entries: vec![ManifestEntry {
                image: "page.png".into(),
                words: (0..2)
                    .map(|i| GroundTruthWord {
                        index: Some(i),
                        bbox: None,
                        label: ScriptLabel::Hindi,
                    })
                    .collect(),
            }],
        };
        let report = evaluate(&manifest, dir.path(), &PipelineConfig::default()).unwrap();
        let hindi = class_row(ScriptLabel::Hindi);
        assert_eq!(report.counts[hindi][prediction_col(ScriptLabel::Hindi)], 1);
        assert_eq!(
            report.counts[hindi][prediction_col(ScriptLabel::English)],
            1
        );
        assert_eq!(report.per_class_accuracy[hindi], 0.5);
        assert_eq!(report.overall_accuracy, 0.5);
        assert!(
            (report.row_percent[hindi][prediction_col(ScriptLabel::Hindi)] - 50.0).abs() < 1e-12
        );
    }

    #[test]
    fn boxes_resolve_by_iou() {
        let dir = tempfile::tempdir().unwrap();
        let (page, gt) = two_word_page();
        write_page(dir.path(), "page.png", &page);
        // Nudge each box by one pixel: still well above the IoU threshold.
        let words = gt
            .words
            .iter()
            .map(|w| GroundTruthWord {
                index: None,
                bbox: Some(GtBox {
                    x0: w.word.x_left + 1,
                    y0: w.word.y_top,
                    x1: w.word.x_right + 1,
                    y1: w.word.y_bottom,
                }),
                label: w.label,
            })
            .collect();
        let manifest = Manifest {
            entries: vec![ManifestEntry {
                image: "page.png".into(),
                words,
            }],
        };
        let report = evaluate(&manifest, dir.path(), &PipelineConfig::default()).unwrap();
        assert_eq!(report.total, 2);
        assert_eq!(report.overall_accuracy, 1.0);
    }

    #[test]
    fn unmatchable_words_are_reported_not_dropped() {
        let dir = tempfile::tempdir().unwrap();
        let (page, gt) = two_word_page();
        write_page(dir.path(), "page.png", &page);
        let manifest = Manifest {
            entries: vec![ManifestEntry {
                image: "page.png".into(),
                words: vec![
                    GroundTruthWord {
                        index: Some(0),
                        bbox: None,
                        label: gt.words[0].label,
                    },
                    GroundTruthWord {
                        index: Some(9), // page has two words
                        bbox: None,
                        label: ScriptLabel::English,
                    },
                    GroundTruthWord {
                        index: None,
                        bbox: Some(GtBox {
                            x0: 0,
                            y0: 0,
                            x1: 2,
                            y1: 2,
                        }),
                        label: ScriptLabel::Kannada,
                    },
                ],
            }],
        };
        let report = evaluate(&manifest, dir.path(), &PipelineConfig::default()).unwrap();
        assert_eq!(report.total, 1);
        assert_eq!(report.unresolved_count(), 2);
        assert!(report.unresolved[0].contains("index 9"));
    }

    #[test]
    fn missing_image_is_a_hard_error() {
        let manifest = Manifest {
            entries: vec![ManifestEntry {
                image: "no-such-page.png".into(),
                words: vec![],
            }],
        };
        let err = evaluate(
            &manifest,
            Path::new("/nonexistent"),
            &PipelineConfig::default(),
        )
        .unwrap_err();
        assert!(matches!(
            err,
            EvalError::Raster(RasterError::FileNotFound(_))
        ));
    }

    #[test]
    fn report_round_trips_through_json() {
        let counts = [[28, 1, 0, 1], [0, 30, 0, 0], [2, 0, 27, 1]];
        let report = EvalReport::from_counts(counts, vec!["page.png: word 3".into()]);
        let text = serde_json::to_string(&report).unwrap();
        let back: EvalReport = serde_json::from_str(&text).unwrap();
        assert_eq!(back, report);
    }

    #[test]
    fn table_lists_every_class_and_the_overall_rate() {
        let counts = [[30, 0, 0, 0], [0, 29, 0, 1], [0, 0, 30, 0]];
        let report = EvalReport::from_counts(counts, vec![]);
        let table = report.render_table();
        for name in ["Kannada", "English", "Hindi", "Unknown"] {
            assert!(table.contains(name), "missing {name} in:\n{table}");
        }
        assert!(table.contains("overall accuracy"));
        assert!(table.contains("(89/90"));
    }

    #[test]
    fn empty_report_has_zero_rates() {
        let report = EvalReport::from_counts([[0; 4]; 3], vec![]);
        assert_eq!(report.total, 0);
        assert_eq!(report.overall_accuracy, 0.0);
        assert_eq!(report.per_class_accuracy, [0.0; 3]);
    }
}
