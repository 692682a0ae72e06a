//! Per-word measurements used to tell the three scripts apart.
//!
//! All features come from projection profiles of a single word box:
//!
//! * `wh` — the word height after tightening to ink rows.
//! * `vs` — the number of full-height vertical strokes. Devanagari and Roman
//!   glyphs are built on vertical stems; Kannada glyphs are round and almost
//!   never produce one.
//! * `l1`, `l2` — the two dominant peaks of the horizontal profile. In
//!   Devanagari the top peak is the shirorekha (headline); in Roman text the
//!   peaks sit at the x-height band and the baseline.
//! * `lm` — the mean profile value across the rows between the peaks,
//!   inclusive.
//! * `lp` — the profile value on the row immediately below the earlier peak.
//!   Right under a Devanagari headline the profile collapses to the few stems
//!   that continue downward, so `lp` is small; Roman words stay dense there.
//! * `ratio` — `lp / lm`, the quantity the classifier thresholds.
//! * `aspect_ratio` — tightened height over width; diagnostic only.

use thiserror::Error;

use crate::profiles::{horizontal_profile, nonzero_span, vertical_profile, Rect};
use crate::raster::BinaryImage;
use crate::segmenter::{tighten_rows, WordBox};

/// Errors produced while measuring a word.
#[derive(Debug, Error, Clone, Copy, PartialEq, Eq)]
pub enum FeatureError {
    /// The word box contains no ink at all.
    #[error("word region contains no ink")]
    EmptyWord,
    /// The word is too shallow to carry peak features (fewer than two ink
    /// rows).
    #[error("word is degenerate: fewer than two ink rows")]
    DegenerateWord,
}

/// Peak measurements of a horizontal profile.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PeakFeatures {
    /// Largest profile value; earliest row on ties.
    pub l1: u32,
    /// Row index of `l1` (into the profile handed in).
    pub l1_pos: u32,
    /// Largest value among the remaining rows; earliest row on ties.
    pub l2: u32,
    /// Row index of `l2`.
    pub l2_pos: u32,
    /// Mean profile value over the rows between the peaks, inclusive.
    pub lm: f64,
    /// Profile value on the row immediately after the earlier peak.
    pub lp: u32,
    /// `lp / lm`.
    pub ratio: f64,
}

/// Full feature vector of one word.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WordFeatures {
    /// Tightened word height in rows.
    pub wh: u32,
    /// Number of full-height vertical strokes.
    pub vs: u32,
    pub l1: u32,
    pub l1_pos: u32,
    pub l2: u32,
    pub l2_pos: u32,
    pub lm: f64,
    /// `None` for words with a single ink row, where no "row below the peak"
    /// exists.
    pub lp: Option<u32>,
    /// `None` whenever `lp` is.
    pub ratio: Option<f64>,
    /// Tightened height / width.
    pub aspect_ratio: f64,
}

/// Tightened height of the word: the row span of its ink within the box.
///
/// Tolerates untightened boxes; blank margin rows do not count.
pub fn word_height(img: &BinaryImage, word: &WordBox) -> Result<u32, FeatureError> {
    let (top, bottom) = tighten_rows(img, word.rect()).ok_or(FeatureError::EmptyWord)?;
    Ok(bottom - top + 1)
}

/// The stroke threshold: a column is part of a full-height stroke when it
/// holds at least `ceil(tau * wh)` ink pixels. The epsilon guards against
/// products like `0.8 * 5` landing just above their exact value.
fn stroke_threshold(tau: f64, wh: u32) -> u32 {
    let t = (tau * f64::from(wh) - 1e-9).ceil();
    (t as u32).max(1)
}

/// Number of full-height vertical strokes in the word.
///
/// A stroke is a maximal run of adjacent columns that each hold at least
/// `ceil(tau * wh)` ink pixels within the tightened rows; the run counts
/// once no matter how wide the stem is printed.
///
/// # Panics
///
/// Panics if `tau` is not in `(0, 1]`.
pub fn vertical_strokes(img: &BinaryImage, word: &WordBox, tau: f64) -> Result<u32, FeatureError> {
    assert!(tau > 0.0 && tau <= 1.0, "tau must be in (0, 1]");
    let (top, bottom) = tighten_rows(img, word.rect()).ok_or(FeatureError::EmptyWord)?;
    let wh = bottom - top + 1;
    let threshold = stroke_threshold(tau, wh);
    let region = Rect {
        x0: word.x_left,
        y0: top,
        x1: word.x_right,
        y1: bottom,
    };
    let columns = vertical_profile(img, region).expect("word region is in bounds");
    let mut strokes = 0;
    let mut in_run = false;
    for &c in &columns.counts {
        let qualifies = c >= threshold;
        if qualifies && !in_run {
            strokes += 1;
        }
        in_run = qualifies;
    }
    Ok(strokes)
}

/// Peak features of a word's horizontal profile.
///
/// Leading and trailing zero rows are ignored, so untightened profiles
/// measure the same as tightened ones. Fails with [`FeatureError::EmptyWord`]
/// on an all-zero profile and [`FeatureError::DegenerateWord`] when fewer
/// than two ink rows remain — a single row has no "row below the peak".
pub fn peak_features(counts: &[u32]) -> Result<PeakFeatures, FeatureError> {
    let (first, last) = nonzero_span(counts).ok_or(FeatureError::EmptyWord)?;
    let span = &counts[first..=last];
    if span.len() < 2 {
        return Err(FeatureError::DegenerateWord);
    }

    let (l1_pos, &l1) = span
        .iter()
        .enumerate()
        .max_by(|(ia, a), (ib, b)| a.cmp(b).then(ib.cmp(ia)))
        .expect("span is non-empty");
    let (l2_pos, &l2) = span
        .iter()
        .enumerate()
        .filter(|&(i, _)| i != l1_pos)
        .max_by(|(ia, a), (ib, b)| a.cmp(b).then(ib.cmp(ia)))
        .expect("span has at least two rows");

    let lo = l1_pos.min(l2_pos);
    let hi = l1_pos.max(l2_pos);
    let between: u64 = span[lo..=hi].iter().map(|&v| u64::from(v)).sum();
    let lm = between as f64 / (hi - lo + 1) as f64;
    let lp = span[lo + 1];
    Ok(PeakFeatures {
        l1,
        l1_pos: (first + l1_pos) as u32,
        l2,
        l2_pos: (first + l2_pos) as u32,
        lm,
        lp,
        ratio: f64::from(lp) / lm,
    })
}

/// Height-to-width ratio of the (tightened) word box.
pub fn aspect_ratio(word: &WordBox) -> f64 {
    f64::from(word.height()) / f64::from(word.width())
}

/// Measures everything about one word.
///
/// Shallow words (a single ink row) still measure; their `lp` and `ratio`
/// are `None` and the classifier maps them to `Unknown`.
///
/// # Panics
///
/// Panics if `tau` is not in `(0, 1]`.
pub fn compute(img: &BinaryImage, word: &WordBox, tau: f64) -> Result<WordFeatures, FeatureError> {
    let (top, bottom) = tighten_rows(img, word.rect()).ok_or(FeatureError::EmptyWord)?;
    let wh = bottom - top + 1;
    let vs = vertical_strokes(img, word, tau)?;
    let tight = Rect {
        x0: word.x_left,
        y0: top,
        x1: word.x_right,
        y1: bottom,
    };
    let rows = horizontal_profile(img, tight).expect("word region is in bounds");
    let aspect = f64::from(wh) / f64::from(word.width());

    match peak_features(&rows.counts) {
        Ok(pk) => Ok(WordFeatures {
            wh,
            vs,
            l1: pk.l1,
            l1_pos: pk.l1_pos,
            l2: pk.l2,
            l2_pos: pk.l2_pos,
            lm: pk.lm,
            lp: Some(pk.lp),
            ratio: Some(pk.ratio),
            aspect_ratio: aspect,
        }),
        Err(FeatureError::DegenerateWord) => {
            let v = rows.counts[0];
            Ok(WordFeatures {
                wh,
                vs,
                l1: v,
                l1_pos: 0,
                l2: v,
                l2_pos: 0,
                lm: f64::from(v),
                lp: None,
                ratio: None,
                aspect_ratio: aspect,
            })
        }
        Err(e) => Err(e),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    /// Builds an image whose horizontal profile (over the full image) equals
    /// `rows`, inking from the left edge.
    fn image_with_row_counts(width: u32, rows: &[u32]) -> BinaryImage {
        BinaryImage::from_fn(width, rows.len() as u32, |x, y| x < rows[y as usize])
    }

    fn full_box(img: &BinaryImage) -> WordBox {
        WordBox {
            line_index: 0,
            index_in_line: 0,
            x_left: 0,
            x_right: img.width() - 1,
            y_top: 0,
            y_bottom: img.height() - 1,
        }
    }

    #[test]
    fn word_height_ignores_blank_margin_rows() {
        let img = image_with_row_counts(5, &[0, 3, 5, 2, 0]);
        let word = full_box(&img);
        assert_eq!(word_height(&img, &word).unwrap(), 3);
    }

    #[test]
    fn word_height_of_blank_box_is_an_error() {
        let img = BinaryImage::zeros(4, 4);
        assert_eq!(
            word_height(&img, &full_box(&img)),
            Err(FeatureError::EmptyWord)
        );
    }

    #[test]
    fn strokes_count_runs_not_columns() {
        // Column profile [5,0,5,5,0,2] at word height 5: columns 0, 2 and 3
        // are full height, and 2-3 fuse into one stroke.
        let img = BinaryImage::from_fn(6, 5, |x, y| match x {
            0 | 2 | 3 => true,
            5 => y < 2,
            _ => false,
        });
        let word = full_box(&img);
        assert_eq!(vertical_strokes(&img, &word, 1.0).unwrap(), 2);
    }

    #[test]
    fn lower_tau_admits_shorter_stems() {
        // Column 5 holds 4 of 5 rows: a stroke at tau 0.8 but not at tau 1.
        let img = BinaryImage::from_fn(6, 5, |x, y| match x {
            0 => true,
            5 => y < 4,
            _ => y == 0,
        });
        let word = full_box(&img);
        assert_eq!(vertical_strokes(&img, &word, 1.0).unwrap(), 1);
        assert_eq!(vertical_strokes(&img, &word, 0.8).unwrap(), 2);
    }

    #[test]
    fn stroke_threshold_rounds_up_exactly() {
        assert_eq!(stroke_threshold(1.0, 5), 5);
        assert_eq!(stroke_threshold(0.8, 5), 4); // 0.8 * 5 is 4, not 5
        assert_eq!(stroke_threshold(0.75, 6), 5); // 4.5 rounds up
        assert_eq!(stroke_threshold(0.05, 3), 1); // clamped to at least 1
    }

    #[test]
    fn peak_features_worked_example() {
        let pk = peak_features(&[1, 5, 2, 4, 3]).unwrap();
        assert_eq!((pk.l1, pk.l1_pos), (5, 1));
        assert_eq!((pk.l2, pk.l2_pos), (4, 3));
        assert!((pk.lm - 11.0 / 3.0).abs() < 1e-12);
        assert_eq!(pk.lp, 2);
        assert!((pk.ratio - 6.0 / 11.0).abs() < 1e-12);
    }

    #[test]
    fn peak_ties_prefer_earlier_rows() {
        let pk = peak_features(&[4, 4, 4]).unwrap();
        assert_eq!((pk.l1_pos, pk.l2_pos), (0, 1));
        assert_eq!(pk.lp, 4);
        assert!((pk.ratio - 1.0).abs() < 1e-12);
    }

    #[test]
    fn adjacent_peaks_make_lp_the_second_peak() {
        let pk = peak_features(&[5, 4]).unwrap();
        assert_eq!((pk.l1, pk.l2), (5, 4));
        assert_eq!(pk.lp, 4);
        assert!((pk.lm - 4.5).abs() < 1e-12);
    }

    #[test]
    fn peak_positions_are_reported_in_input_indices() {
        let pk = peak_features(&[0, 0, 1, 5, 2, 4, 3, 0]).unwrap();
        assert_eq!((pk.l1_pos, pk.l2_pos), (3, 5));
        assert_eq!(pk.lp, 2);
    }

    #[test]
    fn single_row_profile_is_degenerate() {
        assert_eq!(peak_features(&[7]), Err(FeatureError::DegenerateWord));
        assert_eq!(peak_features(&[0, 7, 0]), Err(FeatureError::DegenerateWord));
    }

    #[test]
    fn empty_profiles_are_rejected() {
        assert_eq!(peak_features(&[]), Err(FeatureError::EmptyWord));
        assert_eq!(peak_features(&[0, 0, 0]), Err(FeatureError::EmptyWord));
    }

    #[test]
    fn aspect_is_height_over_width() {
        let word = WordBox {
            line_index: 0,
            index_in_line: 0,
            x_left: 10,
            x_right: 14,
            y_top: 0,
            y_bottom: 9,
        };
        assert!((aspect_ratio(&word) - 2.0).abs() < 1e-12);
    }

    #[test]
    fn compute_fills_the_whole_vector() {
        let img = image_with_row_counts(5, &[1, 5, 2, 4, 3]);
        let f = compute(&img, &full_box(&img), 1.0).unwrap();
        assert_eq!(f.wh, 5);
        assert_eq!(f.vs, 1); // only the leftmost column spans all rows
        assert_eq!((f.l1, f.l2), (5, 4));
        assert_eq!(f.lp, Some(2));
        assert!((f.ratio.unwrap() - 6.0 / 11.0).abs() < 1e-12);
        assert!((f.aspect_ratio - 1.0).abs() < 1e-12);
    }

    #[test]
    fn compute_on_one_row_word_has_no_ratio() {
        let img = BinaryImage::from_fn(4, 3, |x, y| y == 1 && x < 3);
        let f = compute(&img, &full_box(&img), 1.0).unwrap();
        assert_eq!(f.wh, 1);
        assert_eq!((f.l1, f.l2), (3, 3));
        assert_eq!(f.lp, None);
        assert_eq!(f.ratio, None);
    }

    #[test]
    fn compute_on_blank_box_is_an_error() {
        let img = BinaryImage::zeros(3, 3);
        assert_eq!(
            compute(&img, &full_box(&img), 1.0),
            Err(FeatureError::EmptyWord)
        );
    }

    fn stamp(img: &mut BinaryImage, x0: u32, y0: u32, pattern: &BinaryImage) {
        for y in 0..pattern.height() {
            for x in 0..pattern.width() {
                if pattern.get(x, y) == 1 {
                    img.set(x0 + x, y0 + y, 1);
                }
            }
        }
    }

    proptest! {
        /// Features depend only on the ink inside the box, not on where the
        /// box sits on the page.
        #[test]
        fn translation_invariance(
            rows in proptest::collection::vec(1u32..=6, 2..8),
            dx in 0u32..10,
            dy in 0u32..10,
        ) {
            let pattern = image_with_row_counts(6, &rows);
            let mut page = BinaryImage::zeros(20, 20);
            stamp(&mut page, dx, dy, &pattern);
            let word = WordBox {
                line_index: 0,
                index_in_line: 0,
                x_left: dx,
                x_right: dx + 5,
                y_top: dy,
                y_bottom: dy + rows.len() as u32 - 1,
            };
            let f = compute(&page, &word, 1.0).unwrap();
            let base = compute(&pattern, &full_box(&pattern), 1.0).unwrap();
            prop_assert_eq!(f, base);
        }

        /// Duplicating every column doubles the profile peaks but leaves the
        /// peak ratio and the stroke count unchanged.
        #[test]
        fn horizontal_scaling_preserves_ratio_and_strokes(
            rows in proptest::collection::vec(1u32..=5, 2..8),
        ) {
            let img = image_with_row_counts(5, &rows);
            let wide = BinaryImage::from_fn(10, rows.len() as u32, |x, y| img.get(x / 2, y) == 1);
            let f1 = compute(&img, &full_box(&img), 1.0).unwrap();
            let f2 = compute(&wide, &full_box(&wide), 1.0).unwrap();
            prop_assert_eq!(f2.l1, 2 * f1.l1);
            prop_assert_eq!(f2.l2, 2 * f1.l2);
            prop_assert_eq!(f2.vs, f1.vs);
            prop_assert!((f2.ratio.unwrap() - f1.ratio.unwrap()).abs() < 1e-12);
            prop_assert!((f2.aspect_ratio - f1.aspect_ratio / 2.0).abs() < 1e-12);
        }

        /// Raising tau can only shrink the set of stroke columns.
        #[test]
        fn stroke_columns_nest_as_tau_rises(
            data in proptest::collection::vec(0u8..=1, 60),
            t1 in 1u32..=10,
            t2 in 1u32..=10,
        ) {
            let img = BinaryImage::new(10, 6, data);
            if img.count_ones() == 0 {
                return Ok(());
            }
            let word = full_box(&img);
            let (tau_lo, tau_hi) = if t1 <= t2 {
                (f64::from(t1) / 10.0, f64::from(t2) / 10.0)
            } else {
                (f64::from(t2) / 10.0, f64::from(t1) / 10.0)
            };
            let (top, bottom) = tighten_rows(&img, word.rect()).unwrap();
            let wh = bottom - top + 1;
            let region = Rect { x0: 0, y0: top, x1: 9, y1: bottom };
            let cols = vertical_profile(&img, region).unwrap().counts;
            let q_lo: Vec<bool> =
                cols.iter().map(|&c| c >= stroke_threshold(tau_lo, wh)).collect();
            let q_hi: Vec<bool> =
                cols.iter().map(|&c| c >= stroke_threshold(tau_hi, wh)).collect();
            for (lo, hi) in q_lo.iter().zip(&q_hi) {
                prop_assert!(*lo || !*hi, "qualifying columns must nest");
            }
        }
    }
}
