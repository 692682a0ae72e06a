//! JSON document shapes emitted by the CLI and helpers for writing them.
//!
//! Every command that produces a report serializes one of these documents.
//! Field names and null conventions are stable: optional word features
//! (`lp`, `ratio`) serialize as JSON `null` rather than being omitted, so
//! consumers can rely on a fixed key set.

use std::fs;
use std::io::{self, Write as _};
use std::path::Path;

use anyhow::{Context, Result};
use scriptid_core::evalkit::EvalReport;
use scriptid_core::{PipelineConfig, ScriptLabel, WordBox, WordFeatures, WordResult};
use serde::Serialize;

/// Inclusive pixel bounding box, `x1`/`y1` being the last column/row inside.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct BoxJson {
    pub x0: u32,
    pub y0: u32,
    pub x1: u32,
    pub y1: u32,
}

impl From<&WordBox> for BoxJson {
    fn from(word: &WordBox) -> Self {
        BoxJson {
            x0: word.x_left,
            y0: word.y_top,
            x1: word.x_right,
            y1: word.y_bottom,
        }
    }
}

/// Per-word feature vector as exposed on the wire.
///
/// `lp` and `ratio` are `null` for degenerate words (height below two rows),
/// mirroring the library's `Option` fields.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct FeaturesJson {
    pub wh: u32,
    pub vs: u32,
    pub l1: u32,
    pub l2: u32,
    pub lm: f64,
    pub lp: Option<u32>,
    pub ratio: Option<f64>,
    pub aspect_ratio: f64,
}

impl From<&WordFeatures> for FeaturesJson {
    fn from(f: &WordFeatures) -> Self {
        FeaturesJson {
            wh: f.wh,
            vs: f.vs,
            l1: f.l1,
            l2: f.l2,
            lm: f.lm,
            lp: f.lp,
            ratio: f.ratio,
            aspect_ratio: f.aspect_ratio,
        }
    }
}

/// One classified word inside a `classify` report.
#[derive(Debug, Clone, Serialize)]
pub struct ClassifiedWordJson {
    #[serde(rename = "box")]
    pub bbox: BoxJson,
    pub line: usize,
    pub index: usize,
    pub features: FeaturesJson,
    pub label: ScriptLabel,
}

impl From<&WordResult> for ClassifiedWordJson {
    fn from(result: &WordResult) -> Self {
        ClassifiedWordJson {
            bbox: BoxJson::from(&result.word),
            line: result.word.line_index,
            index: result.word.index_in_line,
            features: FeaturesJson::from(&result.features),
            label: result.label,
        }
    }
}

/// Full report for one page processed by `classify`.
#[derive(Debug, Serialize)]
pub struct ClassifyDoc {
    pub image: String,
    pub config_echo: PipelineConfig,
    pub words: Vec<ClassifiedWordJson>,
}

/// One text line inside a `segment` report.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct LineJson {
    pub index: usize,
    pub y_top: u32,
    pub y_bottom: u32,
}

/// One word box inside a `segment` report.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct SegmentedWordJson {
    #[serde(rename = "box")]
    pub bbox: BoxJson,
    pub line: usize,
    pub index: usize,
}

/// Full report for one page processed by `segment`.
#[derive(Debug, Serialize)]
pub struct SegmentDoc {
    pub image: String,
    pub config_echo: PipelineConfig,
    pub lines: Vec<LineJson>,
    pub words: Vec<SegmentedWordJson>,
}

/// Report for `profile`: ink counts along both axes of the analyzed region.
#[derive(Debug, Serialize)]
pub struct ProfileDoc {
    pub image: String,
    pub config_echo: PipelineConfig,
    pub region: BoxJson,
    pub horizontal: Vec<u32>,
    pub vertical: Vec<u32>,
}

/// Report for `evaluate`: the resolved configuration plus the scored run.
#[derive(Debug, Serialize)]
pub struct EvaluateDoc {
    pub config_echo: PipelineConfig,
    pub report: EvalReport,
}

/// Summary printed by `synth` after writing a fixture set.
#[derive(Debug, Serialize)]
pub struct SynthDoc {
    pub out_dir: String,
    pub suite: String,
    pub seed: u64,
    pub pages: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub manifest: Option<String>,
    pub words: usize,
}

/// Serializes `doc` as pretty JSON with a trailing newline.
pub fn to_json_string<T: Serialize>(doc: &T) -> Result<String> {
    let mut text = serde_json::to_string_pretty(doc).context("serializing report")?;
    text.push('\n');
    Ok(text)
}

/// Writes `text` to `path` atomically (tempfile in the same directory, then
/// rename), creating parent directories as needed.
pub fn write_atomic(path: &Path, text: &str) -> Result<()> {
    let dir = match path.parent() {
        Some(parent) if !parent.as_os_str().is_empty() => parent,
        _ => Path::new("."),
    };
    fs::create_dir_all(dir).with_context(|| format!("creating directory {}", dir.display()))?;
    let mut file = tempfile::NamedTempFile::new_in(dir)
        .with_context(|| format!("creating temporary file in {}", dir.display()))?;
    file.write_all(text.as_bytes())
        .with_context(|| format!("writing {}", path.display()))?;
    file.persist(path)
        .with_context(|| format!("renaming into place at {}", path.display()))?;
    Ok(())
}

/// Prints to stdout, treating a closed pipe (`scriptid ... | head`) as
/// success instead of letting the `print!` machinery panic.
pub fn print_stdout(text: &str) -> Result<()> {
    let mut out = io::stdout().lock();
    match out.write_all(text.as_bytes()).and_then(|()| out.flush()) {
        Err(err) if err.kind() == io::ErrorKind::BrokenPipe => Ok(()),
        other => other.context("writing to stdout"),
    }
}

/// Emits a JSON document either to `out` (atomically) or to stdout.
pub fn emit_json<T: Serialize>(doc: &T, out: Option<&Path>) -> Result<()> {
    let text = to_json_string(doc)?;
    match out {
        Some(path) => write_atomic(path, &text),
        None => print_stdout(&text),
    }
}
