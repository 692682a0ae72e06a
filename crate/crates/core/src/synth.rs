//! Deterministic synthetic fixtures with exactly known ground truth.
//!
//! Real labelled pages in all three scripts are scarce, so tests and
//! benchmarks use engineered words instead: rasters built directly from a
//! desired horizontal-profile shape rather than from fonts. A generated word
//! has
//!
//! * a dominant top row (the profile's first peak) and a second peak on the
//!   bottom row,
//! * exactly `target_vs` full-height vertical strokes, kept separated so
//!   they never fuse into one, and
//! * a row right below the top peak whose width is solved so the measured
//!   peak ratio lands within 0.02 of `target_ratio`.
//!
//! Everything is seeded: the same spec and seed always produce the identical
//! raster, byte for byte.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::classifier::{ClassifierConfig, ScriptLabel};
use crate::evalkit::{GroundTruthWord, ManifestEntry};
use crate::raster::{BinaryImage, GrayImage};
use crate::segmenter::{MinGap, WordBox};

/// Errors produced while generating fixtures.
#[derive(Debug, Error)]
pub enum SynthError {
    /// No raster with the requested measurements exists (or the solver
    /// cannot reach one within tolerance).
    #[error("unachievable word spec: {0}")]
    UnachievableSpec(String),
    /// The fixture description itself is inconsistent.
    #[error("invalid fixture spec: {0}")]
    InvalidSpec(String),
    /// The words do not fit the requested page size.
    #[error("fixture overflows the page: {0}")]
    LayoutOverflow(String),
}

/// Ratio tolerance the word generator guarantees.
pub const RATIO_TOLERANCE: f64 = 0.02;

/// One word to generate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WordSpec {
    /// The script this word should classify as.
    pub label: ScriptLabel,
    /// Peak ratio the raster should measure, within [`RATIO_TOLERANCE`].
    pub target_ratio: f64,
    /// Exact number of full-height vertical strokes.
    pub target_vs: u32,
    /// Word height in rows; at least 3.
    pub height: u32,
    /// Word width in columns.
    pub width: u32,
}

/// A page of words to generate.
#[derive(Debug, Clone, PartialEq)]
pub struct FixtureSpec {
    pub seed: u64,
    /// Words per line, top to bottom and left to right.
    pub lines: Vec<Vec<WordSpec>>,
    /// Blank columns between words; must be at least the auto word gap of
    /// the tallest line, so segmentation recovers the layout exactly.
    pub word_gap: u32,
    /// Blank rows between lines.
    pub line_gap: u32,
    /// Blank border on all four sides.
    pub margin: u32,
    /// Fixed page size; `None` sizes the page to fit.
    pub page_width: Option<u32>,
    pub page_height: Option<u32>,
}

/// A generated word's true box and script.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LabeledWord {
    pub word: WordBox,
    pub label: ScriptLabel,
}

/// Exact ground truth for a generated page, in reading order.
#[derive(Debug, Clone, PartialEq)]
pub struct PageGroundTruth {
    pub words: Vec<LabeledWord>,
}

impl PageGroundTruth {
    /// The page's manifest entry, referencing words by reading-order index.
    pub fn to_manifest_entry(&self, image: impl Into<String>) -> ManifestEntry {
        ManifestEntry {
            image: image.into(),
            words: self
                .words
                .iter()
                .enumerate()
                .map(|(i, w)| GroundTruthWord {
                    index: Some(i),
                    bbox: None,
                    label: w.label,
                })
                .collect(),
        }
    }
}

// ---------------------------------------------------------------------------
// Word generation
// ---------------------------------------------------------------------------

/// The row plan of one word: stems plus per-row body widths.
struct RowPlan {
    /// Number of full-height stems.
    vs: u32,
    /// Body width in columns.
    body: u32,
    /// Ink width of the body on each row.
    widths: Vec<u32>,
}

impl RowPlan {
    fn height(&self) -> u32 {
        self.widths.len() as u32
    }

    fn ink_sum(&self) -> u64 {
        self.widths.iter().map(|&w| u64::from(w)).sum()
    }

    /// The peak ratio this plan measures: the top row is the first peak, the
    /// bottom row the second, so `lm` averages every row and `lp` is row 1.
    fn ratio(&self) -> f64 {
        let h = u64::from(self.height());
        let lp = u64::from(self.vs + self.widths[1]);
        let denominator = u64::from(self.vs) * h + self.ink_sum();
        (lp * h) as f64 / denominator as f64
    }

    /// Total body ink must leave at least one hole per body column among the
    /// rows below the top one, or some body column would become a spurious
    /// full-height stroke.
    fn ink_budget(&self) -> u64 {
        u64::from(self.body) * u64::from(self.height() - 1)
    }
}

/// Solves for per-row body widths that measure `target_ratio`.
fn solve_plan(spec: &WordSpec, rng: &mut ChaCha8Rng) -> Result<RowPlan, SynthError> {
    let h = spec.height as usize;
    let vs = spec.target_vs;
    let stem_span = if vs > 0 { 2 * vs } else { 0 };
    if spec.height < 3 {
        return Err(SynthError::UnachievableSpec(format!(
            "height {} is too shallow; the profile needs a top peak, a probe row and a bottom peak",
            spec.height
        )));
    }
    if spec.width <= stem_span + 4 {
        return Err(SynthError::UnachievableSpec(format!(
            "width {} cannot hold {} separated stems and a measurable body",
            spec.width, vs
        )));
    }
    if !(spec.target_ratio > 0.0 && spec.target_ratio.is_finite()) {
        return Err(SynthError::UnachievableSpec(format!(
            "target ratio {} is not positive and finite",
            spec.target_ratio
        )));
    }
    let body = spec.width - stem_span;
    let target = spec.target_ratio;

    // Row widths: top row solid (first peak), bottom row one short (second
    // peak), row 1 is the probe row below the peak, middle rows are free.
    let floor = if vs > 0 { 0 } else { 1 };
    let cap = body - 2; // keep both peaks strictly dominant
    let mut plan = RowPlan {
        vs,
        body,
        widths: vec![0; h],
    };
    plan.widths[0] = body;
    plan.widths[h - 1] = body - 1;
    let mid_init = ((f64::from(body) / 2.0).round() as u32).clamp(floor, cap);
    for w in &mut plan.widths[2..h - 1] {
        *w = mid_init;
    }

    // Closed-form probe width, then clamp into every constraint.
    let others = u64::from(vs) * h as u64 + plan.ink_sum();
    let ideal = (target * others as f64 - f64::from(vs) * h as f64) / (h as f64 - target);
    let budget_cap = plan
        .ink_budget()
        .saturating_sub(plan.ink_sum())
        .min(u64::from(cap)) as u32;
    plan.widths[1] = (ideal.round().max(0.0) as u32).clamp(floor, cap.min(budget_cap).max(floor));

    // Greedy refinement: middle rows move the mean finely; the probe row
    // moves the numerator coarsely; a 3-row word can only thin its bottom.
    let mid_range = 2..h - 1;
    let mut cursor = if mid_range.is_empty() {
        0
    } else {
        rng.random_range(mid_range.clone())
    };
    for _ in 0..2000 {
        let err = plan.ratio() - target;
        if err.abs() <= 0.005 {
            break;
        }
        let mut moved = false;
        if err > 0.0 {
            // Ratio too high: add body ink (raises the mean) or thin the probe.
            for _ in mid_range.clone() {
                cursor = if cursor + 1 < h - 1 { cursor + 1 } else { 2 };
                if plan.widths[cursor] < cap && plan.ink_sum() < plan.ink_budget() {
                    plan.widths[cursor] += 1;
                    moved = true;
                    break;
                }
            }
            if !moved && plan.widths[1] > floor {
                plan.widths[1] -= 1;
                moved = true;
            }
        } else {
            // Ratio too low: remove body ink or widen the probe.
            for _ in mid_range.clone() {
                cursor = if cursor + 1 < h - 1 { cursor + 1 } else { 2 };
                if plan.widths[cursor] > floor {
                    plan.widths[cursor] -= 1;
                    moved = true;
                    break;
                }
            }
            if !moved
                && plan.widths[1] < cap.min(plan.widths[h - 1] - 1)
                && plan.ink_sum() < plan.ink_budget()
            {
                plan.widths[1] += 1;
                moved = true;
            }
            if !moved && h == 3 && plan.widths[2] > plan.widths[1] + 1 {
                plan.widths[2] -= 1;
                moved = true;
            }
        }
        if !moved {
            break;
        }
    }

    let err = plan.ratio() - target;
    if err.abs() > RATIO_TOLERANCE {
        return Err(SynthError::UnachievableSpec(format!(
            "no {}x{} raster with {} strokes measures ratio {} (best miss {:+.4})",
            spec.width, spec.height, vs, target, err
        )));
    }

    // Shuffle ink between middle rows without changing the sum: the ratio
    // stays exact while the texture varies with the seed.
    if h > 4 {
        for _ in 0..2 * h {
            let i = rng.random_range(2..h - 1);
            let j = rng.random_range(2..h - 1);
            if i != j && plan.widths[i] < cap && plan.widths[j] > floor {
                plan.widths[i] += 1;
                plan.widths[j] -= 1;
            }
        }
    }
    Ok(plan)
}

/// Rasterizes a plan: stems on even columns, then each body row as a cyclic
/// interval placed so that every body column misses at least one row.
fn rasterize_plan(plan: &RowPlan, width: u32, rng: &mut ChaCha8Rng) -> BinaryImage {
    let h = plan.height();
    let body = plan.body;
    let sx = width - body;
    let mut img = BinaryImage::zeros(width, h);

    for stem in 0..plan.vs {
        for y in 0..h {
            img.set(2 * stem, y, 1);
        }
    }
    for x in 0..body {
        img.set(sx + x, 0, 1);
    }

    // `uncovered` is the next body column still without a hole; holes are
    // dealt out left to right until every column has one.
    let mut uncovered = 0u32;
    for y in 1..h {
        let ink = plan.widths[y as usize];
        let hole = body - ink;
        let offset = if uncovered < body {
            (uncovered + body - (ink % body)) % body
        } else {
            rng.random_range(0..body)
        };
        for k in 0..ink {
            img.set(sx + (offset + k) % body, y, 1);
        }
        uncovered = uncovered.saturating_add(hole);
    }
    assert!(
        uncovered >= body,
        "hole budget must cover every body column"
    );
    img
}

/// Generates one word raster.
///
/// The result is `spec.width x spec.height`, tight on all four sides, with
/// exactly `target_vs` full-height strokes and a measured peak ratio within
/// [`RATIO_TOLERANCE`] of `target_ratio` (at `tau = 1`). The same spec and
/// seed always produce the identical raster.
pub fn make_word(spec: &WordSpec, seed: u64) -> Result<BinaryImage, SynthError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let plan = solve_plan(spec, &mut rng)?;
    Ok(rasterize_plan(&plan, spec.width, &mut rng))
}

// ---------------------------------------------------------------------------
// Page generation
// ---------------------------------------------------------------------------

impl FixtureSpec {
    /// Checks that the described page will survive the round trip: every
    /// word must classify as its label under the default calibration, and
    /// the layout gaps must exceed what segmentation needs to split on.
    pub fn validate(&self) -> Result<(), SynthError> {
        if self.lines.is_empty() || self.lines.iter().any(Vec::is_empty) {
            return Err(SynthError::InvalidSpec(
                "fixture must contain at least one line and no empty lines".into(),
            ));
        }
        let calibration = ClassifierConfig::table1();
        for word in self.lines.iter().flatten() {
            let (range, vs_ok) = match word.label {
                ScriptLabel::Hindi => (
                    calibration.hindi,
                    word.target_vs >= calibration.hindi_min_vs,
                ),
                ScriptLabel::Kannada => (
                    calibration.kannada,
                    word.target_vs <= calibration.kannada_max_vs,
                ),
                ScriptLabel::English => (
                    calibration.english,
                    word.target_vs >= calibration.english_min_vs,
                ),
                ScriptLabel::Unknown => {
                    return Err(SynthError::InvalidSpec(
                        "fixture words must target a real script, not Unknown".into(),
                    ))
                }
            };
            // Strictly inside, with the generator tolerance as a buffer, so
            // the achieved ratio cannot drift over a range edge.
            if !(word.target_ratio >= range.lo + RATIO_TOLERANCE
                && word.target_ratio <= range.hi - RATIO_TOLERANCE)
            {
                return Err(SynthError::InvalidSpec(format!(
                    "target ratio {} is not safely inside the {} range [{}, {})",
                    word.target_ratio, word.label, range.lo, range.hi
                )));
            }
            if !vs_ok {
                return Err(SynthError::InvalidSpec(format!(
                    "{} words cannot carry {} full-height strokes",
                    word.label, word.target_vs
                )));
            }
        }
        for line in &self.lines {
            let tallest = line
                .iter()
                .map(|w| w.height)
                .max()
                .expect("line is non-empty");
            let needed = MinGap::Auto.resolve(tallest);
            if self.word_gap < needed {
                return Err(SynthError::InvalidSpec(format!(
                    "word gap {} is below the auto segmentation gap {} of a {}-row line",
                    self.word_gap, needed, tallest
                )));
            }
        }
        if self.line_gap == 0 {
            return Err(SynthError::InvalidSpec(
                "line gap must be at least one blank row".into(),
            ));
        }
        if self.margin == 0 {
            return Err(SynthError::InvalidSpec(
                "margin must be at least one blank pixel".into(),
            ));
        }
        Ok(())
    }
}

/// Mixes a page seed with a word's position; splitmix64 finalizer.
fn word_seed(seed: u64, line: usize, word: usize) -> u64 {
    let mut z = seed
        ^ (line as u64)
            .wrapping_add(1)
            .wrapping_mul(0xA24B_AED4_963E_E407)
        ^ (word as u64)
            .wrapping_add(1)
            .wrapping_mul(0x9FB2_1C65_1E98_DF25);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Generates a whole page and its exact ground truth.
///
/// Words are laid out top-aligned within their line, lines top to bottom.
/// The returned boxes are exactly what segmentation recovers under the
/// default thresholds, and the ground-truth order is reading order.
pub fn make_page(spec: &FixtureSpec) -> Result<(GrayImage, PageGroundTruth), SynthError> {
    spec.validate()?;

    let line_heights: Vec<u32> = spec
        .lines
        .iter()
        .map(|line| {
            line.iter()
                .map(|w| w.height)
                .max()
                .expect("line is non-empty")
        })
        .collect();
    let line_widths: Vec<u32> = spec
        .lines
        .iter()
        .map(|line| {
            line.iter().map(|w| w.width).sum::<u32>() + (line.len() as u32 - 1) * spec.word_gap
        })
        .collect();
    let content_width = *line_widths.iter().max().expect("at least one line");
    let content_height =
        line_heights.iter().sum::<u32>() + (spec.lines.len() as u32 - 1) * spec.line_gap;

    let page_width = spec.page_width.unwrap_or(content_width + 2 * spec.margin);
    let page_height = spec.page_height.unwrap_or(content_height + 2 * spec.margin);
    if content_width + 2 * spec.margin > page_width
        || content_height + 2 * spec.margin > page_height
    {
        return Err(SynthError::LayoutOverflow(format!(
            "{content_width}x{content_height} content plus {} margin exceeds {page_width}x{page_height}",
            spec.margin
        )));
    }

    let mut page = BinaryImage::zeros(page_width, page_height);
    let mut ground_truth = Vec::new();
    let mut y = spec.margin;
    for (line_index, line) in spec.lines.iter().enumerate() {
        let mut x = spec.margin;
        for (word_index, word_spec) in line.iter().enumerate() {
            let raster = make_word(word_spec, word_seed(spec.seed, line_index, word_index))?;
            for wy in 0..raster.height() {
                for wx in 0..raster.width() {
                    if raster.get(wx, wy) == 1 {
                        page.set(x + wx, y + wy, 1);
                    }
                }
            }
            ground_truth.push(LabeledWord {
                word: WordBox {
                    line_index,
                    index_in_line: word_index,
                    x_left: x,
                    x_right: x + word_spec.width - 1,
                    y_top: y,
                    y_bottom: y + word_spec.height - 1,
                },
                label: word_spec.label,
            });
            x += word_spec.width + spec.word_gap;
        }
        y += line_heights[line_index] + spec.line_gap;
    }

    Ok((
        page.to_gray(0, 255),
        PageGroundTruth {
            words: ground_truth,
        },
    ))
}

// ---------------------------------------------------------------------------
// Canned fixtures
// ---------------------------------------------------------------------------

/// A page holding one word printed with a hairline crack: two solid pieces
/// separated by a 2-column gap. Plain segmentation splits it into two words;
/// with 3x3 closing enabled the crack is bridged and one word survives.
pub fn broken_word_page() -> GrayImage {
    let mut page = BinaryImage::zeros(19, 20);
    for y in 4..16 {
        for x in 4..8 {
            page.set(x, y, 1);
        }
        for x in 10..15 {
            page.set(x, y, 1);
        }
    }
    page.to_gray(0, 255)
}

fn sample_word(label: ScriptLabel, rng: &mut ChaCha8Rng) -> WordSpec {
    let (ratio, vs) = match label {
        ScriptLabel::Hindi => (rng.random_range(0.12..=0.20), rng.random_range(2..=4)),
        ScriptLabel::Kannada => (rng.random_range(0.36..=0.44), rng.random_range(0..=1)),
        ScriptLabel::English => (rng.random_range(0.60..=0.80), rng.random_range(2..=3)),
        ScriptLabel::Unknown => unreachable!("suites sample real scripts only"),
    };
    let height = rng.random_range(10..=16u32);
    // The stems alone put a floor of `vs` under the probe row, so a small
    // ratio needs enough body capacity: vs*h / (vs*h + s_max) <= ratio,
    // with s_max = 2b - 1 + (h-3)(b-2) the densest legal body.
    let h = f64::from(height);
    let ink_needed = f64::from(vs) * h * (1.0 - ratio) / ratio;
    let body_min = ((ink_needed + 2.0 * h - 5.0) / (h - 1.0)).ceil().max(8.0) as u32;
    let width = 2 * vs + body_min + rng.random_range(2..=10);
    WordSpec {
        label,
        target_ratio: ratio,
        target_vs: vs,
        height,
        width,
    }
}

/// A balanced evaluation suite: `per_class` words of each script, shuffled
/// and laid out 15 to a page (3 lines of 5). Fully determined by `seed`.
pub fn eval_suite(
    seed: u64,
    per_class: usize,
) -> Result<Vec<(GrayImage, PageGroundTruth)>, SynthError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut specs = Vec::with_capacity(3 * per_class);
    for label in [
        ScriptLabel::Kannada,
        ScriptLabel::English,
        ScriptLabel::Hindi,
    ] {
        for _ in 0..per_class {
            specs.push(sample_word(label, &mut rng));
        }
    }
    specs.shuffle(&mut rng);

    specs
        .chunks(15)
        .enumerate()
        .map(|(page_index, chunk)| {
            let fixture = FixtureSpec {
                seed: word_seed(seed, usize::MAX, page_index),
                lines: chunk.chunks(5).map(<[WordSpec]>::to_vec).collect(),
                word_gap: 8,
                line_gap: 6,
                margin: 6,
                page_width: None,
                page_height: None,
            };
            make_page(&fixture)
        })
        .collect()
}

/// A small mixed-script demo page.
pub fn demo_page(seed: u64) -> Result<(GrayImage, PageGroundTruth), SynthError> {
    let fixture = FixtureSpec {
        seed,
        lines: vec![
            vec![
                WordSpec {
                    label: ScriptLabel::Kannada,
                    target_ratio: 0.40,
                    target_vs: 0,
                    height: 12,
                    width: 26,
                },
                WordSpec {
                    label: ScriptLabel::English,
                    target_ratio: 0.70,
                    target_vs: 2,
                    height: 12,
                    width: 30,
                },
                WordSpec {
                    label: ScriptLabel::Hindi,
                    target_ratio: 0.16,
                    target_vs: 3,
                    height: 13,
                    width: 32,
                },
            ],
            vec![
                WordSpec {
                    label: ScriptLabel::Hindi,
                    target_ratio: 0.13,
                    target_vs: 2,
                    height: 11,
                    width: 28,
                },
                WordSpec {
                    label: ScriptLabel::Kannada,
                    target_ratio: 0.37,
                    target_vs: 1,
                    height: 14,
                    width: 30,
                },
            ],
        ],
        word_gap: 8,
        line_gap: 6,
        margin: 6,
        page_width: None,
        page_height: None,
    };
    make_page(&fixture)
}
