//! `scriptid` — word-level script identification for trilingual document
//! pages, from the command line.
//!
//! Subcommands cover the whole workflow: `classify` labels every word on a
//! page, `segment` reports the line/word boxes without labels, `profile`
//! dumps projection profiles for inspection, `synth` generates deterministic
//! fixture pages with ground truth, and `evaluate` scores predictions against
//! a labelled manifest.
//!
//! Exit codes: 0 on success, 2 on I/O, format, or configuration errors, and
//! 3 when an evaluation finishes but some ground-truth words could not be
//! resolved against the segmentation.

mod output;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{ensure, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;
use scriptid_core::evalkit::{evaluate, Manifest};
use scriptid_core::overlay::save_overlay_png;
use scriptid_core::raster::{load_image, save_pgm, save_png, GrayImage};
use scriptid_core::synth::{broken_word_page, demo_page, eval_suite};
use scriptid_core::{
    analyze_page, horizontal_profile, vertical_profile, PageAnalysis, PipelineConfig, RangeProfile,
    Rect,
};

use output::{
    emit_json, print_stdout, to_json_string, write_atomic, BoxJson, ClassifiedWordJson,
    ClassifyDoc, EvaluateDoc, LineJson, ProfileDoc, SegmentDoc, SegmentedWordJson, SynthDoc,
};

#[derive(Debug, Parser)]
#[command(
    name = "scriptid",
    version,
    about = "Identify the script (Kannada, English, Hindi) of every word on a document page"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Segment pages and label every word with its script
    Classify(ClassifyArgs),
    /// Report line bands and word boxes without classifying
    Segment(SegmentArgs),
    /// Dump horizontal and vertical projection profiles of a page region
    Profile(ProfileArgs),
    /// Score predictions against a labelled ground-truth manifest
    Evaluate(EvaluateArgs),
    /// Generate synthetic fixture pages with exact ground truth
    Synth(SynthArgs),
}

/// Decision-range calibration selectable from the command line.
#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ProfileArg {
    /// Default calibration (English band up to 0.96)
    Table1,
    /// Alternative calibration (lower Hindi/Kannada split, ceiling 0.90)
    Alg6,
}

impl From<ProfileArg> for RangeProfile {
    fn from(arg: ProfileArg) -> Self {
        match arg {
            ProfileArg::Table1 => RangeProfile::Table1,
            ProfileArg::Alg6 => RangeProfile::Alg6,
        }
    }
}

/// Pipeline options shared by every command that analyzes images.
///
/// A JSON config file (if given) is loaded first; individual flags then
/// override single fields of it.
#[derive(Debug, Args)]
struct PipelineFlags {
    /// JSON pipeline configuration file
    #[arg(long, value_name = "FILE", env = "SCRIPTID_CONFIG")]
    config: Option<PathBuf>,
    /// Decision-range calibration to classify with
    #[arg(long, value_enum, value_name = "NAME")]
    profile: Option<ProfileArg>,
    /// Classify by the peak-distance ratio alone, ignoring stroke-count gates
    #[arg(long)]
    ratio_only: bool,
    /// Repair broken glyphs with a morphological closing before segmenting
    #[arg(long, overrides_with = "no_close")]
    close: bool,
    /// Skip the closing step even if the config file enables it
    #[arg(long, overrides_with = "close")]
    no_close: bool,
    /// Estimate and undo page skew before segmenting
    #[arg(long)]
    deskew: bool,
    /// Full-height stroke threshold as a fraction of word height (0 < TAU <= 1)
    #[arg(long, value_name = "TAU")]
    tau: Option<f64>,
    /// Fixed word-merge gap in columns (default: derived from line height)
    #[arg(long, value_name = "COLS")]
    min_gap: Option<u32>,
}

impl PipelineFlags {
    /// Resolves the effective configuration: file (or defaults), then flags.
    fn resolve(&self) -> Result<PipelineConfig> {
        let mut config = match &self.config {
            Some(path) => PipelineConfig::from_path(path)
                .with_context(|| format!("loading config {}", path.display()))?,
            None => PipelineConfig::default(),
        };
        if let Some(profile) = self.profile {
            config.profile = profile.into();
        }
        if self.ratio_only {
            config.ratio_only = true;
        }
        if self.close {
            config.close = true;
        }
        if self.no_close {
            config.close = false;
        }
        if self.deskew {
            config.deskew = true;
        }
        if let Some(tau) = self.tau {
            config.tau = tau;
        }
        if let Some(gap) = self.min_gap {
            config.min_gap = Some(gap);
        }
        config
            .validate()
            .context("invalid pipeline configuration")?;
        Ok(config)
    }
}

#[derive(Debug, Args)]
struct ClassifyArgs {
    /// Input page images (PNG or PGM), processed in the order given
    #[arg(value_name = "IMAGE", num_args = 1..)]
    images: Vec<PathBuf>,
    #[command(flatten)]
    pipeline: PipelineFlags,
    /// Write the JSON report to this file instead of stdout
    #[arg(long, value_name = "FILE")]
    json: Option<PathBuf>,
    /// Write one segmentation overlay PNG per page into this directory
    #[arg(long, value_name = "DIR")]
    overlay: Option<PathBuf>,
    /// Number of pages to analyze in parallel
    #[arg(long, value_name = "N", default_value_t = 1)]
    jobs: usize,
}

#[derive(Debug, Args)]
struct SegmentArgs {
    /// Input page image (PNG or PGM)
    #[arg(value_name = "IMAGE")]
    image: PathBuf,
    #[command(flatten)]
    pipeline: PipelineFlags,
    /// Write the JSON report to this file instead of stdout
    #[arg(long, value_name = "FILE")]
    json: Option<PathBuf>,
    /// Write a segmentation overlay PNG into this directory
    #[arg(long, value_name = "DIR")]
    overlay: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct ProfileArgs {
    /// Input page image (PNG or PGM)
    #[arg(value_name = "IMAGE")]
    image: PathBuf,
    #[command(flatten)]
    pipeline: PipelineFlags,
    /// Restrict to an inclusive pixel region instead of the whole page
    #[arg(long, value_name = "X0,Y0,X1,Y1", value_parser = parse_region)]
    region: Option<RegionSpec>,
    /// Print bar charts of both profiles to stdout
    #[arg(long)]
    ascii: bool,
    /// Render both profiles as a bar-chart PNG
    #[arg(long, value_name = "FILE")]
    histogram_png: Option<PathBuf>,
    /// Write the JSON report to this file instead of stdout
    #[arg(long, value_name = "FILE")]
    json: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct EvaluateArgs {
    /// Ground-truth manifest (JSON); image paths resolve relative to it
    #[arg(value_name = "MANIFEST")]
    manifest: PathBuf,
    #[command(flatten)]
    pipeline: PipelineFlags,
    /// Also write the full report as JSON to this file
    #[arg(long, value_name = "FILE")]
    json: Option<PathBuf>,
    /// Number of pages to analyze in parallel
    #[arg(long, value_name = "N", default_value_t = 1)]
    jobs: usize,
}

/// Fixture set selectable for `synth`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum SuiteArg {
    /// One small mixed-script page (5 words on 2 lines)
    Demo,
    /// Balanced 90-word set: 30 words per script across 6 pages
    Eval90,
    /// One page with a cracked glyph, for demonstrating `--close`
    Broken,
}

impl SuiteArg {
    fn name(self) -> &'static str {
        match self {
            SuiteArg::Demo => "demo",
            SuiteArg::Eval90 => "eval90",
            SuiteArg::Broken => "broken",
        }
    }
}

/// Image format for generated fixture pages.
#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum FormatArg {
    Png,
    Pgm,
}

#[derive(Debug, Args)]
struct SynthArgs {
    /// Directory to write the pages and manifest into
    #[arg(long, value_name = "DIR")]
    out: PathBuf,
    /// Seed that fully determines every generated byte
    #[arg(long, value_name = "N", default_value_t = 0)]
    seed: u64,
    /// Which fixture set to generate
    #[arg(long, value_enum, default_value_t = SuiteArg::Demo)]
    suite: SuiteArg,
    /// Image format for the generated pages
    #[arg(long, value_enum, default_value_t = FormatArg::Png)]
    format: FormatArg,
}

/// Inclusive region given on the command line as `X0,Y0,X1,Y1`.
#[derive(Debug, Clone, Copy)]
struct RegionSpec {
    x0: u32,
    y0: u32,
    x1: u32,
    y1: u32,
}

fn parse_region(text: &str) -> Result<RegionSpec, String> {
    let parts: Vec<&str> = text.split(',').collect();
    if parts.len() != 4 {
        return Err(format!("expected X0,Y0,X1,Y1, got {text:?}"));
    }
    let mut coords = [0u32; 4];
    for (slot, part) in coords.iter_mut().zip(&parts) {
        *slot = part
            .trim()
            .parse()
            .map_err(|_| format!("invalid coordinate {part:?}"))?;
    }
    Ok(RegionSpec {
        x0: coords[0],
        y0: coords[1],
        x1: coords[2],
        y1: coords[3],
    })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(2)
        }
    }
}

fn run(cli: &Cli) -> Result<ExitCode> {
    match &cli.command {
        Command::Classify(args) => cmd_classify(args),
        Command::Segment(args) => cmd_segment(args),
        Command::Profile(args) => cmd_profile(args),
        Command::Evaluate(args) => cmd_evaluate(args),
        Command::Synth(args) => cmd_synth(args),
    }
}

/// Runs `f` on a dedicated rayon pool of `jobs` threads, so `--jobs 1`
/// genuinely means sequential regardless of the machine.
fn with_pool<T, F>(jobs: usize, f: F) -> Result<T>
where
    T: Send,
    F: FnOnce() -> T + Send,
{
    ensure!(jobs >= 1, "--jobs must be at least 1");
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .context("building worker pool")?;
    Ok(pool.install(f))
}

fn analyze_one(path: &Path, config: &PipelineConfig) -> Result<PageAnalysis> {
    let image = load_image(path).with_context(|| format!("loading {}", path.display()))?;
    let analysis =
        analyze_page(&image, config).with_context(|| format!("analyzing {}", path.display()))?;
    Ok(analysis)
}

/// Writes the segmentation overlay for `image` into `dir` as
/// `<stem>_overlay.png`.
fn write_overlay(dir: &Path, image: &Path, analysis: &PageAnalysis) -> Result<()> {
    std::fs::create_dir_all(dir)
        .with_context(|| format!("creating directory {}", dir.display()))?;
    let stem = image
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "page".to_string());
    let path = dir.join(format!("{stem}_overlay.png"));
    let page = analysis.binary.to_gray(0, 255);
    let boxes: Vec<_> = analysis.words.iter().map(|w| w.word).collect();
    save_overlay_png(&page, &analysis.lines, &boxes, &path)
        .with_context(|| format!("writing overlay {}", path.display()))?;
    Ok(())
}

fn cmd_classify(args: &ClassifyArgs) -> Result<ExitCode> {
    let config = args.pipeline.resolve()?;
    let analyses = with_pool(args.jobs, || {
        args.images
            .par_iter()
            .map(|path| analyze_one(path, &config))
            .collect::<Result<Vec<_>>>()
    })??;

    if let Some(dir) = &args.overlay {
        for (image, analysis) in args.images.iter().zip(&analyses) {
            write_overlay(dir, image, analysis)?;
        }
    }

    let docs: Vec<ClassifyDoc> = args
        .images
        .iter()
        .zip(&analyses)
        .map(|(image, analysis)| ClassifyDoc {
            image: image.display().to_string(),
            config_echo: config.clone(),
            words: analysis
                .words
                .iter()
                .map(ClassifiedWordJson::from)
                .collect(),
        })
        .collect();

    // A single input reads better as one object; several become an array.
    if let [doc] = docs.as_slice() {
        emit_json(doc, args.json.as_deref())?;
    } else {
        emit_json(&docs, args.json.as_deref())?;
    }
    Ok(ExitCode::SUCCESS)
}

fn cmd_segment(args: &SegmentArgs) -> Result<ExitCode> {
    let config = args.pipeline.resolve()?;
    let analysis = analyze_one(&args.image, &config)?;

    if let Some(dir) = &args.overlay {
        write_overlay(dir, &args.image, &analysis)?;
    }

    let doc = SegmentDoc {
        image: args.image.display().to_string(),
        config_echo: config,
        lines: analysis
            .lines
            .iter()
            .map(|line| LineJson {
                index: line.index,
                y_top: line.y_top,
                y_bottom: line.y_bottom,
            })
            .collect(),
        words: analysis
            .words
            .iter()
            .map(|result| SegmentedWordJson {
                bbox: BoxJson::from(&result.word),
                line: result.word.line_index,
                index: result.word.index_in_line,
            })
            .collect(),
    };
    emit_json(&doc, args.json.as_deref())?;
    Ok(ExitCode::SUCCESS)
}

/// One row of an ASCII bar chart, scaled to at most 40 columns.
fn ascii_chart(title: &str, counts: &[u32]) -> String {
    const WIDTH: usize = 40;
    let max = counts.iter().copied().max().unwrap_or(0);
    let mut out = format!("{title} ({} bins, max {max})\n", counts.len());
    for (i, &count) in counts.iter().enumerate() {
        let bar = if max == 0 {
            0
        } else {
            (((count as f64 / max as f64) * WIDTH as f64).round() as usize)
                .max(usize::from(count > 0))
        };
        out.push_str(&format!("{i:>5} |{:<WIDTH$}| {count}\n", "#".repeat(bar)));
    }
    out
}

/// Renders both profiles as stacked bar panels: horizontal counts on top
/// (one column per row of the region), vertical counts below.
fn histogram_image(horizontal: &[u32], vertical: &[u32]) -> GrayImage {
    const PANEL: u32 = 64;
    let width = horizontal.len().max(vertical.len()).max(1) as u32;
    let height = PANEL * 2 + 1;
    let mut img = GrayImage::new(width, height, vec![255; (width * height) as usize]);
    for x in 0..width {
        img.set(x, PANEL, 128);
    }
    for (panel, counts) in [(0u32, horizontal), (1u32, vertical)] {
        let max = counts.iter().copied().max().unwrap_or(0);
        if max == 0 {
            continue;
        }
        let base = panel * (PANEL + 1);
        for (i, &count) in counts.iter().enumerate() {
            let bar = ((count as f64 / max as f64) * PANEL as f64).round() as u32;
            for dy in 0..bar {
                img.set(i as u32, base + PANEL - 1 - dy, 0);
            }
        }
    }
    img
}

fn cmd_profile(args: &ProfileArgs) -> Result<ExitCode> {
    let config = args.pipeline.resolve()?;
    let analysis = analyze_one(&args.image, &config)?;
    let binary = &analysis.binary;

    let region = match args.region {
        Some(r) => Rect {
            x0: r.x0,
            y0: r.y0,
            x1: r.x1,
            y1: r.y1,
        },
        None => Rect::full(binary),
    };
    let horizontal = horizontal_profile(binary, region)
        .context("horizontal profile")?
        .counts;
    let vertical = vertical_profile(binary, region)
        .context("vertical profile")?
        .counts;

    if let Some(path) = &args.histogram_png {
        let chart = histogram_image(&horizontal, &vertical);
        save_png(&chart, path).with_context(|| format!("writing {}", path.display()))?;
    }

    let doc = ProfileDoc {
        image: args.image.display().to_string(),
        config_echo: config,
        region: BoxJson {
            x0: region.x0,
            y0: region.y0,
            x1: region.x1,
            y1: region.y1,
        },
        horizontal,
        vertical,
    };

    if args.ascii {
        print_stdout(&ascii_chart("rows", &doc.horizontal))?;
        print_stdout(&ascii_chart("columns", &doc.vertical))?;
        // With charts on stdout, only write JSON when a file was asked for.
        if let Some(path) = &args.json {
            write_atomic(path, &to_json_string(&doc)?)?;
        }
    } else {
        emit_json(&doc, args.json.as_deref())?;
    }
    Ok(ExitCode::SUCCESS)
}

fn cmd_evaluate(args: &EvaluateArgs) -> Result<ExitCode> {
    let config = args.pipeline.resolve()?;
    let manifest = Manifest::from_path(&args.manifest)
        .with_context(|| format!("loading manifest {}", args.manifest.display()))?;
    let base = match args.manifest.parent() {
        Some(parent) if !parent.as_os_str().is_empty() => parent,
        _ => Path::new("."),
    };

    let report = with_pool(args.jobs, || evaluate(&manifest, base, &config))?
        .context("evaluating manifest")?;

    print_stdout(&report.render_table())?;
    if let Some(path) = &args.json {
        let doc = EvaluateDoc {
            config_echo: config,
            report: report.clone(),
        };
        write_atomic(path, &to_json_string(&doc)?)?;
    }

    if report.unresolved_count() > 0 {
        eprintln!(
            "{} ground-truth word(s) could not be resolved against the segmentation",
            report.unresolved_count()
        );
        return Ok(ExitCode::from(3));
    }
    Ok(ExitCode::SUCCESS)
}

fn cmd_synth(args: &SynthArgs) -> Result<ExitCode> {
    let extension = match args.format {
        FormatArg::Png => "png",
        FormatArg::Pgm => "pgm",
    };
    let save = |image: &GrayImage, path: &Path| -> Result<()> {
        match args.format {
            FormatArg::Png => save_png(image, path),
            FormatArg::Pgm => save_pgm(image, path),
        }
        .with_context(|| format!("writing {}", path.display()))
    };

    std::fs::create_dir_all(&args.out)
        .with_context(|| format!("creating directory {}", args.out.display()))?;

    let mut pages = Vec::new();
    let mut entries = Vec::new();
    let mut words = 0usize;

    let generated = match args.suite {
        SuiteArg::Demo => vec![demo_page(args.seed).context("generating demo page")?],
        SuiteArg::Eval90 => eval_suite(args.seed, 30).context("generating evaluation suite")?,
        SuiteArg::Broken => Vec::new(),
    };

    if args.suite == SuiteArg::Broken {
        let name = format!("page_000.{extension}");
        save(&broken_word_page(), &args.out.join(&name))?;
        pages.push(name);
    } else {
        for (index, (image, truth)) in generated.iter().enumerate() {
            let name = format!("page_{index:03}.{extension}");
            save(image, &args.out.join(&name))?;
            words += truth.words.len();
            entries.push(truth.to_manifest_entry(name.clone()));
            pages.push(name);
        }
    }

    // The broken page has no word-level truth, so it ships without a manifest.
    let manifest = if entries.is_empty() {
        None
    } else {
        let manifest = Manifest { entries };
        write_atomic(&args.out.join("manifest.json"), &to_json_string(&manifest)?)?;
        Some("manifest.json".to_string())
    };

    let doc = SynthDoc {
        out_dir: args.out.display().to_string(),
        suite: args.suite.name().to_string(),
        seed: args.seed,
        pages,
        manifest,
        words,
    };
    emit_json(&doc, None)?;
    Ok(ExitCode::SUCCESS)
}
