//! Script identification for scanned trilingual document images.
//!
//! This crate identifies, word by word, whether a printed word on a document
//! page is set in Kannada, English (Roman), or Hindi (Devanagari) script. It
//! works on binarized page images and relies entirely on projection profiles:
//!
//! 1. [`raster`] loads a grayscale page, binarizes it (Otsu or a fixed
//!    threshold), and optionally repairs broken glyphs with morphological
//!    closing and straightens skew.
//! 2. [`segmenter`] cuts the page into text lines and words by finding zero
//!    valleys in the horizontal and vertical projection profiles.
//! 3. [`features`] measures each word: its height, the number of full-height
//!    vertical strokes, and the shape of its horizontal profile around the two
//!    dominant peaks.
//! 4. [`classifier`] maps those measurements to a script label through simple
//!    calibrated ratio ranges.
//!
//! [`pipeline`] wires the stages together behind a single serializable
//! configuration, [`evalkit`] scores predictions against labelled manifests,
//! and [`synth`] generates deterministic synthetic fixtures with exactly known
//! ground truth — useful for tests and benchmarks because real labelled pages
//! in all three scripts are hard to come by.

pub mod classifier;
pub mod evalkit;
pub mod features;
pub mod overlay;
pub mod pipeline;
pub mod profiles;
pub mod raster;
pub mod segmenter;
pub mod synth;

pub use classifier::{ClassifierConfig, RangeProfile, ScriptLabel};
pub use features::WordFeatures;
pub use pipeline::{analyze_page, classify_page, PageAnalysis, PipelineConfig, WordResult};
pub use profiles::{horizontal_profile, vertical_profile, Axis, ProjectionProfile, Rect};
pub use raster::{BinaryImage, GrayImage, StructuringElement};
pub use segmenter::{LineBand, SegmenterConfig, WordBox};
