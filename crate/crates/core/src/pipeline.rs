//! End-to-end page analysis behind a single serializable configuration.
//!
//! [`PipelineConfig`] is the one knob surface shared by the library, the CLI,
//! and the evaluation kit: binarization, optional glyph repair (closing),
//! optional deskew, segmentation thresholds, the stroke threshold `tau`, and
//! the classifier calibration. Unknown keys in a config file are rejected
//! rather than silently ignored.

use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::classifier::{
    classify, ClassifierConfig, ConfigError, RangeProfile, RatioRange, ScriptLabel,
};
use crate::features::{self, WordFeatures};
use crate::raster::{
    binarize, close, deskew, BinarizeMethod, BinaryImage, GrayImage, RasterError,
    StructuringElement,
};
use crate::segmenter::{segment_lines, segment_words, LineBand, MinGap, SegmenterConfig, WordBox};

/// Errors produced by the end-to-end pipeline.
#[derive(Debug, Error)]
pub enum PipelineError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Raster(#[from] RasterError),
    #[error("failed to read config file: {0}")]
    Io(String),
    #[error("failed to parse config file: {0}")]
    Parse(#[from] serde_json::Error),
}

/// How to choose the binarization threshold.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum BinarizeMethodKind {
    #[default]
    Otsu,
    Fixed,
}

/// Every knob of the page pipeline, JSON-serializable with defaults.
///
/// All fields are optional in a config file; missing fields take the
/// defaults below. `binarize_threshold` only matters with the `fixed`
/// method, and the nine range/gate overrides, when present, replace the
/// corresponding value of the selected calibration `profile`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineConfig {
    /// `otsu` (default) or `fixed`.
    pub binarize_method: BinarizeMethodKind,
    /// Ink threshold for the `fixed` method; pixels `<=` it are ink.
    pub binarize_threshold: u8,
    /// Structuring element size for closing.
    pub se_width: u32,
    pub se_height: u32,
    /// Repair broken glyphs by morphological closing before segmentation.
    pub close: bool,
    /// Straighten small page rotation before segmentation.
    pub deskew: bool,
    /// Deskew search half-range in degrees.
    pub deskew_max_angle: f64,
    /// Deskew candidate spacing in degrees.
    pub deskew_step: f64,
    /// Profile runs shorter than this many rows are not lines.
    pub min_line_height: u32,
    /// Word candidates narrower than this many columns are dropped.
    pub min_word_width: u32,
    /// Blank-column gap separating words; `null` scales with line height.
    pub min_gap: Option<u32>,
    /// Stroke threshold: a stroke column holds `>= ceil(tau * wh)` ink rows.
    pub tau: f64,
    /// Which built-in calibration to start from.
    pub profile: RangeProfile,
    /// Decide on the ratio alone, skipping the stroke gates.
    pub ratio_only: bool,
    pub hindi_lo: Option<f64>,
    pub hindi_hi: Option<f64>,
    pub kannada_lo: Option<f64>,
    pub kannada_hi: Option<f64>,
    pub english_lo: Option<f64>,
    pub english_hi: Option<f64>,
    pub hindi_min_vs: Option<u32>,
    pub english_min_vs: Option<u32>,
    pub kannada_max_vs: Option<u32>,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            binarize_method: BinarizeMethodKind::Otsu,
            binarize_threshold: 128,
            se_width: 3,
            se_height: 3,
            close: false,
            deskew: false,
            deskew_max_angle: 5.0,
            deskew_step: 0.5,
            min_line_height: 3,
            min_word_width: 2,
            min_gap: None,
            tau: 1.0,
            profile: RangeProfile::Table1,
            ratio_only: false,
            hindi_lo: None,
            hindi_hi: None,
            kannada_lo: None,
            kannada_hi: None,
            english_lo: None,
            english_hi: None,
            hindi_min_vs: None,
            english_min_vs: None,
            kannada_max_vs: None,
        }
    }
}

impl PipelineConfig {
    /// Parses a config from JSON text.
    pub fn from_json_str(text: &str) -> Result<Self, PipelineError> {
        let config: Self = serde_json::from_str(text)?;
        config.validate()?;
        Ok(config)
    }

    /// Loads and validates a JSON config file.
    pub fn from_path(path: impl AsRef<Path>) -> Result<Self, PipelineError> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)
            .map_err(|e| PipelineError::Io(format!("{}: {e}", path.display())))?;
        Self::from_json_str(&text)
    }

    /// Checks every knob once, so later stages can't hit bad values.
    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.se_width.is_multiple_of(2) || self.se_height.is_multiple_of(2) {
            return Err(ConfigError::Invalid(
                "se_width and se_height must be odd".into(),
            ));
        }
        if self.tau.is_nan() || self.tau <= 0.0 || self.tau > 1.0 {
            return Err(ConfigError::Invalid("tau must be in (0, 1]".into()));
        }
        if self.min_line_height == 0 || self.min_word_width == 0 {
            return Err(ConfigError::Invalid(
                "min_line_height and min_word_width must be at least 1".into(),
            ));
        }
        if self.deskew {
            if self.deskew_step.is_nan() || self.deskew_step <= 0.0 {
                return Err(ConfigError::Invalid("deskew_step must be positive".into()));
            }
            if self.deskew_max_angle.is_nan() || self.deskew_max_angle < 0.0 {
                return Err(ConfigError::Invalid(
                    "deskew_max_angle must be non-negative".into(),
                ));
            }
        }
        self.classifier_config().validate()
    }

    /// The classifier calibration: the selected profile with any overrides
    /// applied.
    pub fn classifier_config(&self) -> ClassifierConfig {
        let mut cfg = ClassifierConfig::from_profile(self.profile);
        let patch = |range: &mut RatioRange, lo: Option<f64>, hi: Option<f64>| {
            if let Some(lo) = lo {
                range.lo = lo;
            }
            if let Some(hi) = hi {
                range.hi = hi;
            }
        };
        patch(&mut cfg.hindi, self.hindi_lo, self.hindi_hi);
        patch(&mut cfg.kannada, self.kannada_lo, self.kannada_hi);
        patch(&mut cfg.english, self.english_lo, self.english_hi);
        if let Some(v) = self.hindi_min_vs {
            cfg.hindi_min_vs = v;
        }
        if let Some(v) = self.english_min_vs {
            cfg.english_min_vs = v;
        }
        if let Some(v) = self.kannada_max_vs {
            cfg.kannada_max_vs = v;
        }
        cfg.ratio_only = self.ratio_only;
        cfg
    }

    /// The segmentation thresholds.
    pub fn segmenter_config(&self) -> SegmenterConfig {
        SegmenterConfig {
            min_line_height: self.min_line_height,
            min_word_width: self.min_word_width,
            min_gap: match self.min_gap {
                Some(g) => MinGap::Fixed(g),
                None => MinGap::Auto,
            },
        }
    }

    fn binarize_method(&self) -> BinarizeMethod {
        match self.binarize_method {
            BinarizeMethodKind::Otsu => BinarizeMethod::Otsu,
            BinarizeMethodKind::Fixed => BinarizeMethod::Fixed(self.binarize_threshold),
        }
    }

    fn structuring_element(&self) -> StructuringElement {
        StructuringElement::rect(self.se_width, self.se_height)
    }
}

/// One classified word.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WordResult {
    pub word: WordBox,
    pub features: WordFeatures,
    pub label: ScriptLabel,
}

/// Everything the pipeline derives from one page.
#[derive(Debug, Clone)]
pub struct PageAnalysis {
    /// The page after binarization and any repair/deskew, as segmented.
    pub binary: BinaryImage,
    /// Rotation applied by deskew, if it ran.
    pub deskew_angle: Option<f64>,
    /// Text lines, top to bottom.
    pub lines: Vec<LineBand>,
    /// Classified words in reading order.
    pub words: Vec<WordResult>,
}

/// Runs the whole pipeline on a grayscale page.
///
/// Stages: binarize, optionally close, optionally deskew, segment into lines
/// and words, measure and classify every word in reading order. Degenerate
/// pages (blank, solid ink, shallow words) come back as empty or
/// `Unknown`-labelled results, never as errors.
pub fn analyze_page(
    img: &GrayImage,
    config: &PipelineConfig,
) -> Result<PageAnalysis, PipelineError> {
    config.validate()?;
    let mut binary = binarize(img, config.binarize_method());
    if config.close {
        binary = close(&binary, &config.structuring_element());
    }
    let mut deskew_angle = None;
    if config.deskew {
        let (rotated, angle) = deskew(&binary, config.deskew_max_angle, config.deskew_step)?;
        binary = rotated;
        deskew_angle = Some(angle);
    }

    let seg = config.segmenter_config();
    let classifier = config.classifier_config();
    let lines = segment_lines(&binary, seg.min_line_height);
    let words = lines
        .iter()
        .flat_map(|line| segment_words(&binary, line, seg.min_gap, seg.min_word_width))
        .map(|word| {
            let features =
                features::compute(&binary, &word, config.tau).expect("segmented words contain ink");
            let label = classify(&features, &classifier);
            WordResult {
                word,
                features,
                label,
            }
        })
        .collect();
    Ok(PageAnalysis {
        binary,
        deskew_angle,
        lines,
        words,
    })
}

/// Classifies every word of a grayscale page; see [`analyze_page`].
pub fn classify_page(
    img: &GrayImage,
    config: &PipelineConfig,
) -> Result<Vec<WordResult>, PipelineError> {
    Ok(analyze_page(img, config)?.words)
}
