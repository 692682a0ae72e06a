//! Ratio-range classification of word features into script labels.
//!
//! The discriminating quantity is `ratio = lp / lm`: how sharply the
//! horizontal profile collapses right below the earlier of the two peaks.
//! Devanagari words collapse hard below the headline (small ratio), Kannada
//! words taper gently (middle ratios), and Roman words stay dense between
//! x-height and baseline (large ratios). The stroke count `vs` acts as a
//! guard: Devanagari and Roman words carry at least two full-height stems,
//! Kannada words at most one.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::features::WordFeatures;

/// Errors produced while validating classifier or pipeline settings.
#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("invalid config: {0}")]
    Invalid(String),
}

/// The scripts this crate can tell apart, plus a rejection label.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ScriptLabel {
    Kannada,
    English,
    Hindi,
    /// The word fits none of the calibrated ranges (or is too shallow to
    /// measure) and is left unclassified rather than guessed.
    Unknown,
}

impl std::fmt::Display for ScriptLabel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let name = match self {
            ScriptLabel::Kannada => "Kannada",
            ScriptLabel::English => "English",
            ScriptLabel::Hindi => "Hindi",
            ScriptLabel::Unknown => "Unknown",
        };
        f.write_str(name)
    }
}

/// Built-in ratio calibrations.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum RangeProfile {
    /// The default calibration; widest coverage at the top of the scale.
    #[default]
    Table1,
    /// An alternative calibration with a lower Hindi/Kannada split and a
    /// tighter English ceiling.
    Alg6,
}

/// An interval of ratios assigned to one script.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RatioRange {
    pub lo: f64,
    pub hi: f64,
}

impl RatioRange {
    fn contains_half_open(&self, x: f64) -> bool {
        x >= self.lo && x < self.hi
    }

    fn contains_closed(&self, x: f64) -> bool {
        x >= self.lo && x <= self.hi
    }
}

/// Ranges and stroke gates for [`classify`].
///
/// Ranges are inclusive at the low end and exclusive at the high end, except
/// the topmost (English) range, which is closed so the calibrated ceiling
/// itself still classifies.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClassifierConfig {
    pub hindi: RatioRange,
    pub kannada: RatioRange,
    pub english: RatioRange,
    /// A Hindi word must have at least this many full-height strokes.
    pub hindi_min_vs: u32,
    /// An English word must have at least this many full-height strokes.
    pub english_min_vs: u32,
    /// A Kannada word must have at most this many full-height strokes.
    pub kannada_max_vs: u32,
    /// Skip the stroke gates and decide on the ratio alone.
    pub ratio_only: bool,
}

impl ClassifierConfig {
    /// The default calibration.
    pub fn table1() -> Self {
        Self {
            hindi: RatioRange {
                lo: 0.071,
                hi: 0.31,
            },
            kannada: RatioRange { lo: 0.31, hi: 0.50 },
            english: RatioRange { lo: 0.50, hi: 0.96 },
            hindi_min_vs: 2,
            english_min_vs: 2,
            kannada_max_vs: 1,
            ratio_only: false,
        }
    }

    /// The alternative calibration.
    pub fn alg6() -> Self {
        Self {
            hindi: RatioRange {
                lo: 0.071,
                hi: 0.258,
            },
            kannada: RatioRange { lo: 0.258, hi: 0.5 },
            english: RatioRange { lo: 0.5, hi: 0.9 },
            ..Self::table1()
        }
    }

    /// The named built-in calibration.
    pub fn from_profile(profile: RangeProfile) -> Self {
        match profile {
            RangeProfile::Table1 => Self::table1(),
            RangeProfile::Alg6 => Self::alg6(),
        }
    }

    /// Checks that every range is a proper interval and that the three
    /// ranges are ordered Hindi < Kannada < English on the ratio axis.
    pub fn validate(&self) -> Result<(), ConfigError> {
        for (name, r) in [
            ("hindi", &self.hindi),
            ("kannada", &self.kannada),
            ("english", &self.english),
        ] {
            if !(r.lo.is_finite() && r.hi.is_finite() && r.lo < r.hi) {
                return Err(ConfigError::Invalid(format!(
                    "{name} range [{}, {}) is not a proper interval",
                    r.lo, r.hi
                )));
            }
            if r.lo < 0.0 {
                return Err(ConfigError::Invalid(format!(
                    "{name} range must not extend below zero"
                )));
            }
        }
        if !(self.hindi.lo < self.kannada.lo && self.kannada.lo < self.english.lo) {
            return Err(ConfigError::Invalid(
                "ranges must be ordered hindi < kannada < english".into(),
            ));
        }
        Ok(())
    }
}

impl Default for ClassifierConfig {
    fn default() -> Self {
        Self::table1()
    }
}

/// Assigns a script label to one measured word.
///
/// The ranges are tried lowest first — Hindi, then Kannada, then English —
/// and the first range containing the ratio whose stroke gate also passes
/// wins. Everything else, including words without a ratio (a single ink
/// row), is `Unknown`.
pub fn classify(features: &WordFeatures, config: &ClassifierConfig) -> ScriptLabel {
    let Some(ratio) = features.ratio else {
        return ScriptLabel::Unknown;
    };
    let gate = |ok: bool| config.ratio_only || ok;
    if config.hindi.contains_half_open(ratio) && gate(features.vs >= config.hindi_min_vs) {
        ScriptLabel::Hindi
    } else if config.kannada.contains_half_open(ratio) && gate(features.vs <= config.kannada_max_vs)
    {
        ScriptLabel::Kannada
    } else if config.english.contains_closed(ratio) && gate(features.vs >= config.english_min_vs) {
        ScriptLabel::English
    } else {
        ScriptLabel::Unknown
    }
}
