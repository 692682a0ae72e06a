//! Line and word segmentation by zero valleys in projection profiles.
//!
//! Printed pages separate lines by blank scanlines and words by blank column
//! gaps inside a line, so segmentation amounts to finding maximal non-zero
//! runs of the profiles. Inter-character gaps are narrower than inter-word
//! gaps; runs separated by less than a minimum gap are merged back into one
//! word.

use crate::profiles::{horizontal_profile, nonzero_span, vertical_profile, Rect};
use crate::raster::BinaryImage;

/// A horizontal band of the page holding one text line.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LineBand {
    /// 0-based position of the line on the page, top to bottom.
    pub index: usize,
    /// First row of the band.
    pub y_top: u32,
    /// Last row of the band (inclusive).
    pub y_bottom: u32,
}

impl LineBand {
    pub fn height(&self) -> u32 {
        self.y_bottom - self.y_top + 1
    }
}

/// A word's bounding box, tightened to its ink on all four sides.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct WordBox {
    /// Index of the line the word sits on.
    pub line_index: usize,
    /// 0-based position of the word within its line, left to right.
    pub index_in_line: usize,
    pub x_left: u32,
    pub x_right: u32,
    pub y_top: u32,
    pub y_bottom: u32,
}

impl WordBox {
    pub fn width(&self) -> u32 {
        self.x_right - self.x_left + 1
    }

    pub fn height(&self) -> u32 {
        self.y_bottom - self.y_top + 1
    }

    /// The box as a profile region.
    pub fn rect(&self) -> Rect {
        Rect {
            x0: self.x_left,
            y0: self.y_top,
            x1: self.x_right,
            y1: self.y_bottom,
        }
    }
}

/// Minimum blank-column gap that separates two words.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MinGap {
    /// Scale with the line: `max(2, round(0.2 * line_height))`.
    Auto,
    /// A fixed number of columns.
    Fixed(u32),
}

impl MinGap {
    /// The concrete gap for a line of the given height.
    pub fn resolve(&self, line_height: u32) -> u32 {
        match *self {
            MinGap::Auto => (0.2 * f64::from(line_height)).round().max(2.0) as u32,
            MinGap::Fixed(g) => g,
        }
    }
}

/// Segmentation knobs.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SegmenterConfig {
    /// Profile runs shorter than this many rows are noise, not lines.
    pub min_line_height: u32,
    /// Word candidates narrower than this many columns are specks, not words.
    pub min_word_width: u32,
    /// Blank-column gap that separates words.
    pub min_gap: MinGap,
}

impl Default for SegmenterConfig {
    fn default() -> Self {
        Self {
            min_line_height: 3,
            min_word_width: 2,
            min_gap: MinGap::Auto,
        }
    }
}

/// Maximal runs of non-zero entries, as inclusive `(start, end)` index pairs.
fn nonzero_runs(counts: &[u32]) -> Vec<(usize, usize)> {
    let mut runs = Vec::new();
    let mut start = None;
    for (i, &c) in counts.iter().enumerate() {
        match (start, c > 0) {
            (None, true) => start = Some(i),
            (Some(s), false) => {
                runs.push((s, i - 1));
                start = None;
            }
            _ => {}
        }
    }
    if let Some(s) = start {
        runs.push((s, counts.len() - 1));
    }
    runs
}

/// Merges runs whose separating gap is shorter than `min_gap`.
fn merge_runs(runs: &[(usize, usize)], min_gap: usize) -> Vec<(usize, usize)> {
    let mut merged: Vec<(usize, usize)> = Vec::new();
    for &(start, end) in runs {
        match merged.last_mut() {
            Some(&mut (_, ref mut prev_end)) if start - *prev_end - 1 < min_gap => {
                *prev_end = end;
            }
            _ => merged.push((start, end)),
        }
    }
    merged
}

/// Finds the text lines of a page; top to bottom.
///
/// A line is a maximal run of non-blank rows at least `min_line_height` rows
/// tall; shorter runs are discarded as noise.
pub fn segment_lines(img: &BinaryImage, min_line_height: u32) -> Vec<LineBand> {
    let profile = horizontal_profile(img, Rect::full(img)).expect("full region is in bounds");
    nonzero_runs(&profile.counts)
        .into_iter()
        .filter(|&(top, bottom)| (bottom - top + 1) as u32 >= min_line_height)
        .enumerate()
        .map(|(index, (top, bottom))| LineBand {
            index,
            y_top: top as u32,
            y_bottom: bottom as u32,
        })
        .collect()
}

/// Finds the words of one line; left to right, tightened to their ink.
///
/// Candidate words are maximal non-blank column runs of the band's vertical
/// profile; runs separated by fewer than `min_gap` blank columns (resolved
/// against the band height) are merged, and anything narrower than
/// `min_word_width` is dropped. Each surviving word's rows are then tightened
/// to its own ink, so the returned boxes can be measured directly.
pub fn segment_words(
    img: &BinaryImage,
    line: &LineBand,
    min_gap: MinGap,
    min_word_width: u32,
) -> Vec<WordBox> {
    let band = Rect {
        x0: 0,
        y0: line.y_top,
        x1: img.width() - 1,
        y1: line.y_bottom,
    };
    let profile = vertical_profile(img, band).expect("band region is in bounds");
    let gap = min_gap.resolve(line.height()) as usize;

    let mut words = Vec::new();
    for (left, right) in merge_runs(&nonzero_runs(&profile.counts), gap) {
        if ((right - left + 1) as u32) < min_word_width {
            continue;
        }
        let x_left = left as u32;
        let x_right = right as u32;
        let columns = Rect {
            x0: x_left,
            y0: line.y_top,
            x1: x_right,
            y1: line.y_bottom,
        };
        let rows = horizontal_profile(img, columns).expect("word region is in bounds");
        let (top, bottom) = rows
            .nonzero_span()
            .expect("a word run contains ink by construction");
        words.push(WordBox {
            line_index: line.index,
            index_in_line: words.len(),
            x_left,
            x_right,
            y_top: line.y_top + top as u32,
            y_bottom: line.y_top + bottom as u32,
        });
    }
    words
}

/// Segments a whole page into words in reading order (top line first, then
/// left to right).
pub fn segment_page(img: &BinaryImage, config: &SegmenterConfig) -> Vec<WordBox> {
    segment_lines(img, config.min_line_height)
        .iter()
        .flat_map(|line| segment_words(img, line, config.min_gap, config.min_word_width))
        .collect()
}

// Used by the word-height feature, which must tolerate untightened regions.
pub(crate) fn tighten_rows(img: &BinaryImage, region: Rect) -> Option<(u32, u32)> {
    let rows = horizontal_profile(img, region).ok()?;
    let (top, bottom) = nonzero_span(&rows.counts)?;
    Some((region.y0 + top as u32, region.y0 + bottom as u32))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    /// A page with ink exactly on the given rows, spanning columns 1..=6.
    fn page_with_rows(rows: &[u32]) -> BinaryImage {
        BinaryImage::from_fn(8, 16, |x, y| (1..=6).contains(&x) && rows.contains(&y))
    }

    #[test]
    fn lines_are_nonzero_row_runs() {
        let img = page_with_rows(&[2, 3, 4, 5, 9, 10, 11, 12]);
        let lines = segment_lines(&img, 3);
        assert_eq!(
            lines,
            vec![
                LineBand {
                    index: 0,
                    y_top: 2,
                    y_bottom: 5
                },
                LineBand {
                    index: 1,
                    y_top: 9,
                    y_bottom: 12
                },
            ]
        );
    }

    #[test]
    fn short_runs_are_discarded_as_noise() {
        let img = page_with_rows(&[2, 3, 4, 5, 8, 12, 13, 14]);
        let lines = segment_lines(&img, 3);
        assert_eq!(lines.len(), 2);
        assert_eq!(lines[0].y_top, 2);
        assert_eq!(lines[1].y_top, 12);
        assert_eq!(lines[1].index, 1);
    }

    #[test]
    fn blank_page_has_no_lines() {
        let img = BinaryImage::zeros(10, 10);
        assert!(segment_lines(&img, 3).is_empty());
        assert!(segment_page(&img, &SegmenterConfig::default()).is_empty());
    }

    /// One band, ink columns as given, full band height.
    fn band_with_columns(width: u32, columns: &[u32]) -> (BinaryImage, LineBand) {
        let img = BinaryImage::from_fn(width, 6, |x, y| {
            (1..=4).contains(&y) && columns.contains(&x)
        });
        let line = LineBand {
            index: 0,
            y_top: 1,
            y_bottom: 4,
        };
        (img, line)
    }

    #[test]
    fn close_runs_merge_into_one_word() {
        // Columns 0-1 and 3-4: single blank column between them.
        let (img, line) = band_with_columns(7, &[0, 1, 3, 4]);
        let words = segment_words(&img, &line, MinGap::Fixed(2), 2);
        assert_eq!(words.len(), 1);
        assert_eq!((words[0].x_left, words[0].x_right), (0, 4));
    }

    #[test]
    fn wide_gap_separates_words() {
        let (img, line) = band_with_columns(9, &[0, 1, 5, 6]);
        let words = segment_words(&img, &line, MinGap::Fixed(2), 2);
        assert_eq!(words.len(), 2);
        assert_eq!((words[0].x_left, words[0].x_right), (0, 1));
        assert_eq!((words[1].x_left, words[1].x_right), (5, 6));
        assert_eq!(words[1].index_in_line, 1);
    }

    #[test]
    fn min_gap_boundary_is_exclusive() {
        // Gap of exactly min_gap splits; one less merges.
        let (img, line) = band_with_columns(10, &[0, 1, 2, 6, 7]);
        assert_eq!(segment_words(&img, &line, MinGap::Fixed(3), 2).len(), 2);
        assert_eq!(segment_words(&img, &line, MinGap::Fixed(4), 2).len(), 1);
    }

    #[test]
    fn narrow_specks_are_dropped() {
        let (img, line) = band_with_columns(9, &[0, 1, 5]);
        let words = segment_words(&img, &line, MinGap::Fixed(2), 2);
        assert_eq!(words.len(), 1);
        assert_eq!((words[0].x_left, words[0].x_right), (0, 1));
    }

    #[test]
    fn auto_gap_scales_with_line_height() {
        assert_eq!(MinGap::Auto.resolve(5), 2); // floor of the scale rule
        assert_eq!(MinGap::Auto.resolve(10), 2);
        assert_eq!(MinGap::Auto.resolve(13), 3);
        assert_eq!(MinGap::Auto.resolve(20), 4);
        assert_eq!(MinGap::Fixed(7).resolve(20), 7);
    }

    #[test]
    fn word_boxes_are_tightened_vertically() {
        // Band rows 1..=4, but the lone word only inks rows 2..=3.
        let img = BinaryImage::from_fn(6, 6, |x, y| (1..=3).contains(&x) && (2..=3).contains(&y));
        let line = LineBand {
            index: 0,
            y_top: 1,
            y_bottom: 4,
        };
        // Rows 1 and 4 belong to another word further right.
        let mut img = img;
        for y in 1..=4 {
            img.set(5, y, 1);
        }
        let words = segment_words(&img, &line, MinGap::Fixed(1), 1);
        assert_eq!(words.len(), 2);
        assert_eq!((words[0].y_top, words[0].y_bottom), (2, 3));
        assert_eq!((words[1].y_top, words[1].y_bottom), (1, 4));
    }

    #[test]
    fn reading_order_is_row_major() {
        let mut img = BinaryImage::zeros(20, 14);
        // Two lines of two words each.
        for (x0, y0) in [(1u32, 1u32), (10, 1), (1, 8), (10, 8)] {
            for y in y0..y0 + 4 {
                for x in x0..x0 + 5 {
                    img.set(x, y, 1);
                }
            }
        }
        let words = segment_page(&img, &SegmenterConfig::default());
        assert_eq!(words.len(), 4);
        let order: Vec<(usize, usize)> = words
            .iter()
            .map(|w| (w.line_index, w.index_in_line))
            .collect();
        assert_eq!(order, vec![(0, 0), (0, 1), (1, 0), (1, 1)]);
        assert!(words[0].x_left < words[1].x_left);
        assert!(words[1].y_top < words[2].y_top);
    }

    proptest! {
        /// Boxes never overlap, stay in bounds, and cover all ink on pages
        /// whose words are far enough apart.
        #[test]
        fn boxes_are_disjoint_and_in_bounds(seed in 0u64..64) {
            use rand::{Rng, SeedableRng};
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let mut img = BinaryImage::zeros(64, 40);
            for line in 0..2u32 {
                let y0 = 4 + line * 18;
                for word in 0..3u32 {
                    let x0 = 2 + word * 21;
                    let w = rng.random_range(4..=12u32);
                    let h = rng.random_range(4..=10u32);
                    for y in y0..y0 + h {
                        for x in x0..x0 + w {
                            img.set(x, y, 1);
                        }
                    }
                }
            }
            let words = segment_page(&img, &SegmenterConfig::default());
            prop_assert_eq!(words.len(), 6);
            for w in &words {
                prop_assert!(w.x_left <= w.x_right && w.x_right < img.width());
                prop_assert!(w.y_top <= w.y_bottom && w.y_bottom < img.height());
            }
            for a in &words {
                for b in &words {
                    if (a.line_index, a.index_in_line) == (b.line_index, b.index_in_line) {
                        continue;
                    }
                    let x_overlap = a.x_left <= b.x_right && b.x_left <= a.x_right;
                    let y_overlap = a.y_top <= b.y_bottom && b.y_top <= a.y_bottom;
                    prop_assert!(!(x_overlap && y_overlap), "boxes overlap");
                }
            }
            let covered: u64 = words
                .iter()
                .map(|w| {
                    let mut n = 0u64;
                    for y in w.y_top..=w.y_bottom {
                        for x in w.x_left..=w.x_right {
                            n += u64::from(img.get(x, y));
                        }
                    }
                    n
                })
                .sum();
            prop_assert_eq!(covered, img.count_ones(), "all ink is inside some box");
        }
    }
}
