//! Page rasters: grayscale and binary images, file I/O, binarization,
//! binary morphology, and projection-based deskew.
//!
//! All later stages of the pipeline operate on [`BinaryImage`], where `1`
//! means ink and `0` means background. Loading and binarization are the only
//! places that deal with gray values.

use std::fmt;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use thiserror::Error;

/// Errors produced while loading, saving, or transforming rasters.
#[derive(Debug, Error)]
pub enum RasterError {
    #[error("file not found: {0}")]
    FileNotFound(PathBuf),
    #[error("unsupported image format: {0}")]
    UnsupportedFormat(String),
    #[error("corrupt image: {0}")]
    CorruptImage(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("i/o error: {0}")]
    Io(String),
}

/// An 8-bit grayscale image in row-major order.
#[derive(Clone, PartialEq, Eq)]
pub struct GrayImage {
    width: u32,
    height: u32,
    data: Vec<u8>,
}

impl GrayImage {
    /// Wraps a row-major pixel buffer.
    ///
    /// # Panics
    ///
    /// Panics if either dimension is zero or if `data.len()` is not
    /// `width * height`.
    pub fn new(width: u32, height: u32, data: Vec<u8>) -> Self {
        assert!(width > 0 && height > 0, "image dimensions must be positive");
        assert_eq!(
            data.len(),
            width as usize * height as usize,
            "pixel buffer length must equal width * height"
        );
        Self {
            width,
            height,
            data,
        }
    }

    /// Creates an image where every pixel has the same gray `value`.
    pub fn filled(width: u32, height: u32, value: u8) -> Self {
        Self::new(width, height, vec![value; width as usize * height as usize])
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    pub fn data(&self) -> &[u8] {
        &self.data
    }

    /// Gray value at `(x, y)`.
    ///
    /// # Panics
    ///
    /// Panics if the coordinate is out of bounds.
    pub fn get(&self, x: u32, y: u32) -> u8 {
        assert!(x < self.width && y < self.height, "pixel out of bounds");
        self.data[y as usize * self.width as usize + x as usize]
    }

    pub fn set(&mut self, x: u32, y: u32, value: u8) {
        assert!(x < self.width && y < self.height, "pixel out of bounds");
        self.data[y as usize * self.width as usize + x as usize] = value;
    }
}

impl fmt::Debug for GrayImage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("GrayImage")
            .field("width", &self.width)
            .field("height", &self.height)
            .finish_non_exhaustive()
    }
}

/// A binary image in row-major order; `1` is ink, `0` is background.
#[derive(Clone, PartialEq, Eq)]
pub struct BinaryImage {
    width: u32,
    height: u32,
    data: Vec<u8>,
}

impl BinaryImage {
    /// Wraps a row-major buffer of `0`/`1` values.
    ///
    /// # Panics
    ///
    /// Panics if either dimension is zero, if `data.len()` is not
    /// `width * height`, or if any value is neither `0` nor `1`.
    pub fn new(width: u32, height: u32, data: Vec<u8>) -> Self {
        assert!(width > 0 && height > 0, "image dimensions must be positive");
        assert_eq!(
            data.len(),
            width as usize * height as usize,
            "pixel buffer length must equal width * height"
        );
        assert!(data.iter().all(|&v| v <= 1), "binary pixels must be 0 or 1");
        Self {
            width,
            height,
            data,
        }
    }

    /// Creates an all-background image.
    pub fn zeros(width: u32, height: u32) -> Self {
        assert!(width > 0 && height > 0, "image dimensions must be positive");
        Self {
            width,
            height,
            data: vec![0; width as usize * height as usize],
        }
    }

    /// Builds an image from a per-pixel predicate (`true` = ink).
    pub fn from_fn(width: u32, height: u32, mut ink: impl FnMut(u32, u32) -> bool) -> Self {
        let mut data = Vec::with_capacity(width as usize * height as usize);
        for y in 0..height {
            for x in 0..width {
                data.push(u8::from(ink(x, y)));
            }
        }
        Self::new(width, height, data)
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    pub fn data(&self) -> &[u8] {
        &self.data
    }

    /// Pixel value at `(x, y)`: `1` for ink, `0` for background.
    ///
    /// # Panics
    ///
    /// Panics if the coordinate is out of bounds.
    pub fn get(&self, x: u32, y: u32) -> u8 {
        assert!(x < self.width && y < self.height, "pixel out of bounds");
        self.data[y as usize * self.width as usize + x as usize]
    }

    pub fn set(&mut self, x: u32, y: u32, value: u8) {
        assert!(x < self.width && y < self.height, "pixel out of bounds");
        assert!(value <= 1, "binary pixels must be 0 or 1");
        self.data[y as usize * self.width as usize + x as usize] = value;
    }

    /// Pixel value with everything outside the image treated as background.
    pub(crate) fn get_or_zero(&self, x: i64, y: i64) -> u8 {
        if x < 0 || y < 0 || x >= i64::from(self.width) || y >= i64::from(self.height) {
            0
        } else {
            self.data[y as usize * self.width as usize + x as usize]
        }
    }

    /// Total number of ink pixels.
    pub fn count_ones(&self) -> u64 {
        self.data.iter().map(|&v| u64::from(v)).sum()
    }

    /// The transpose: rows become columns and vice versa.
    pub fn transposed(&self) -> BinaryImage {
        BinaryImage::from_fn(self.height, self.width, |x, y| self.get(y, x) == 1)
    }

    /// Renders the mask as a grayscale image (`1` -> `ink`, `0` -> `background`).
    pub fn to_gray(&self, ink: u8, background: u8) -> GrayImage {
        let data = self
            .data
            .iter()
            .map(|&v| if v == 1 { ink } else { background })
            .collect();
        GrayImage::new(self.width, self.height, data)
    }
}

impl fmt::Debug for BinaryImage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("BinaryImage")
            .field("width", &self.width)
            .field("height", &self.height)
            .field("ones", &self.count_ones())
            .finish_non_exhaustive()
    }
}

// ---------------------------------------------------------------------------
// Loading and saving
// ---------------------------------------------------------------------------

/// Loads a PNG or PGM/PNM file as grayscale.
///
/// Color images are converted with the usual luma weights
/// (`0.299 R + 0.587 G + 0.114 B`, rounded to nearest). Alpha channels are
/// ignored. 16-bit inputs are rejected as unsupported.
pub fn load_image(path: impl AsRef<Path>) -> Result<GrayImage, RasterError> {
    let path = path.as_ref();
    let bytes = fs::read(path).map_err(|e| {
        if e.kind() == std::io::ErrorKind::NotFound {
            RasterError::FileNotFound(path.to_path_buf())
        } else {
            RasterError::Io(format!("{}: {e}", path.display()))
        }
    })?;

    let format = image::guess_format(&bytes)
        .map_err(|_| RasterError::UnsupportedFormat(format!("{}", path.display())))?;
    if !matches!(format, image::ImageFormat::Png | image::ImageFormat::Pnm) {
        return Err(RasterError::UnsupportedFormat(format!(
            "{}: {format:?} (expected PNG or PNM)",
            path.display()
        )));
    }

    let decoded = image::load_from_memory_with_format(&bytes, format)
        .map_err(|e| RasterError::CorruptImage(format!("{}: {e}", path.display())))?;
    gray_from_dynamic(decoded, path)
}

fn gray_from_dynamic(decoded: image::DynamicImage, path: &Path) -> Result<GrayImage, RasterError> {
    use image::DynamicImage;

    let (width, height) = (decoded.width(), decoded.height());
    if width == 0 || height == 0 {
        return Err(RasterError::CorruptImage(format!(
            "{}: zero-sized image",
            path.display()
        )));
    }
    let data = match decoded {
        DynamicImage::ImageLuma8(img) => img.into_raw(),
        DynamicImage::ImageLumaA8(img) => img.pixels().map(|p| p.0[0]).collect(),
        DynamicImage::ImageRgb8(img) => {
            img.pixels().map(|p| luma(p.0[0], p.0[1], p.0[2])).collect()
        }
        DynamicImage::ImageRgba8(img) => {
            img.pixels().map(|p| luma(p.0[0], p.0[1], p.0[2])).collect()
        }
        other => {
            return Err(RasterError::UnsupportedFormat(format!(
                "{}: {:?} pixels (expected 8-bit gray or color)",
                path.display(),
                other.color()
            )))
        }
    };
    Ok(GrayImage::new(width, height, data))
}

/// Rec. 601 luma, rounded to nearest.
fn luma(r: u8, g: u8, b: u8) -> u8 {
    let y = 0.299 * f64::from(r) + 0.587 * f64::from(g) + 0.114 * f64::from(b);
    y.round() as u8
}

/// Saves a grayscale image as PNG.
pub fn save_png(img: &GrayImage, path: impl AsRef<Path>) -> Result<(), RasterError> {
    image::save_buffer_with_format(
        path.as_ref(),
        img.data(),
        img.width(),
        img.height(),
        image::ExtendedColorType::L8,
        image::ImageFormat::Png,
    )
    .map_err(|e| RasterError::Io(format!("{}: {e}", path.as_ref().display())))
}

/// Saves a grayscale image as binary PGM (`P5`).
pub fn save_pgm(img: &GrayImage, path: impl AsRef<Path>) -> Result<(), RasterError> {
    let path = path.as_ref();
    let mut out = Vec::with_capacity(img.data().len() + 32);
    write!(out, "P5\n{} {}\n255\n", img.width(), img.height())
        .expect("writing to a Vec cannot fail");
    out.extend_from_slice(img.data());
    fs::write(path, out).map_err(|e| RasterError::Io(format!("{}: {e}", path.display())))
}

// ---------------------------------------------------------------------------
// Binarization
// ---------------------------------------------------------------------------

/// How to pick the ink threshold during binarization.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BinarizeMethod {
    /// Choose the threshold automatically by Otsu's criterion.
    Otsu,
    /// Use the given threshold directly.
    Fixed(u8),
}

/// 256-bin intensity histogram of a grayscale image.
pub fn histogram(img: &GrayImage) -> [u64; 256] {
    let mut hist = [0u64; 256];
    for &v in img.data() {
        hist[v as usize] += 1;
    }
    hist
}

/// Between-class separation of the split `{0..=t} / {t+1..=255}`, up to a
/// constant factor. `d` is the exact integer `total*s0 - sum_all*w0`.
fn between_class_score(d: i128, w0: u64, w1: u64) -> f64 {
    let d = d as f64;
    (d * d) / (w0 as f64 * w1 as f64)
}

/// Otsu's threshold for a 256-bin histogram.
///
/// Returns the threshold `t` that maximizes the between-class variance of the
/// split into `{0..=t}` (ink) and `{t+1..=255}` (background); ties go to the
/// smallest `t`. Returns `None` when the histogram holds fewer than two
/// distinct intensities, in which case there is nothing to separate.
pub fn otsu_threshold(hist: &[u64; 256]) -> Option<u8> {
    let total: u64 = hist.iter().sum();
    if total == 0 {
        return None;
    }
    let sum_all: u64 = hist.iter().enumerate().map(|(i, &c)| i as u64 * c).sum();

    let mut w0: u64 = 0;
    let mut s0: u64 = 0;
    let mut best: Option<(u8, f64)> = None;
    for (t, &count) in hist.iter().enumerate() {
        w0 += count;
        s0 += t as u64 * count;
        if w0 == 0 {
            continue;
        }
        let w1 = total - w0;
        if w1 == 0 {
            break;
        }
        let d = i128::from(total) * i128::from(s0) - i128::from(sum_all) * i128::from(w0);
        let score = between_class_score(d, w0, w1);
        match best {
            Some((_, best_score)) if score <= best_score => {}
            _ => best = Some((t as u8, score)),
        }
    }
    best.map(|(t, _)| t)
}

/// Binarizes a grayscale image; pixels `<= threshold` become ink (`1`).
///
/// With [`BinarizeMethod::Otsu`], a single-intensity image has no threshold
/// and binarizes to all background.
pub fn binarize(img: &GrayImage, method: BinarizeMethod) -> BinaryImage {
    let threshold = match method {
        BinarizeMethod::Fixed(t) => t,
        BinarizeMethod::Otsu => match otsu_threshold(&histogram(img)) {
            Some(t) => t,
            None => return BinaryImage::zeros(img.width(), img.height()),
        },
    };
    let data = img
        .data()
        .iter()
        .map(|&v| u8::from(v <= threshold))
        .collect();
    BinaryImage::new(img.width(), img.height(), data)
}

// ---------------------------------------------------------------------------
// Morphology
// ---------------------------------------------------------------------------

/// A flat structuring element with its anchor at the center pixel.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StructuringElement {
    width: u32,
    height: u32,
    mask: Vec<u8>,
}

impl StructuringElement {
    /// A solid rectangle, e.g. `rect(3, 3)` for the usual 3x3 block.
    ///
    /// # Panics
    ///
    /// Panics if either dimension is even or zero (the anchor must be a
    /// center pixel).
    pub fn rect(width: u32, height: u32) -> Self {
        assert!(
            width % 2 == 1 && height % 2 == 1,
            "structuring element dimensions must be odd"
        );
        Self {
            width,
            height,
            mask: vec![1; width as usize * height as usize],
        }
    }

    /// A custom mask in row-major order (`1` = member).
    ///
    /// Dimensions must be odd and at least one mask entry must be set.
    pub fn from_mask(width: u32, height: u32, mask: Vec<u8>) -> Result<Self, RasterError> {
        if width.is_multiple_of(2) || height.is_multiple_of(2) || width == 0 || height == 0 {
            return Err(RasterError::InvalidParameter(
                "structuring element dimensions must be odd".into(),
            ));
        }
        if mask.len() != width as usize * height as usize {
            return Err(RasterError::InvalidParameter(
                "structuring element mask length must equal width * height".into(),
            ));
        }
        if mask.iter().any(|&v| v > 1) {
            return Err(RasterError::InvalidParameter(
                "structuring element mask entries must be 0 or 1".into(),
            ));
        }
        if mask.iter().all(|&v| v == 0) {
            return Err(RasterError::InvalidParameter(
                "structuring element mask must contain at least one member".into(),
            ));
        }
        Ok(Self {
            width,
            height,
            mask,
        })
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    /// Member offsets relative to the anchor.
    fn offsets(&self) -> Vec<(i64, i64)> {
        let cx = i64::from(self.width / 2);
        let cy = i64::from(self.height / 2);
        let mut offsets = Vec::new();
        for dy in 0..i64::from(self.height) {
            for dx in 0..i64::from(self.width) {
                if self.mask[(dy * i64::from(self.width) + dx) as usize] == 1 {
                    offsets.push((dx - cx, dy - cy));
                }
            }
        }
        offsets
    }
}

/// Binary dilation: a pixel is set when the reflected element placed on it
/// touches any ink pixel. Pixels outside the image count as background.
pub fn dilate(img: &BinaryImage, se: &StructuringElement) -> BinaryImage {
    let offsets = se.offsets();
    BinaryImage::from_fn(img.width(), img.height(), |x, y| {
        offsets
            .iter()
            .any(|&(dx, dy)| img.get_or_zero(i64::from(x) - dx, i64::from(y) - dy) == 1)
    })
}

/// Binary erosion: a pixel survives when every member of the element placed
/// on it lies on ink. Pixels outside the image count as background.
pub fn erode(img: &BinaryImage, se: &StructuringElement) -> BinaryImage {
    let offsets = se.offsets();
    BinaryImage::from_fn(img.width(), img.height(), |x, y| {
        offsets
            .iter()
            .all(|&(dx, dy)| img.get_or_zero(i64::from(x) + dx, i64::from(y) + dy) == 1)
    })
}

/// Morphological closing (dilation followed by erosion). Bridges small gaps
/// between glyph fragments without growing the overall extent much.
pub fn close(img: &BinaryImage, se: &StructuringElement) -> BinaryImage {
    erode(&dilate(img, se), se)
}

// ---------------------------------------------------------------------------
// Deskew
// ---------------------------------------------------------------------------

/// Rotates a binary image about its center by `degrees`, using
/// nearest-neighbor sampling. Pixels that map outside the source are
/// background.
pub fn rotate_nearest(img: &BinaryImage, degrees: f64) -> BinaryImage {
    if degrees == 0.0 {
        return img.clone();
    }
    let theta = degrees.to_radians();
    let (sin, cos) = theta.sin_cos();
    let cx = f64::from(img.width() - 1) / 2.0;
    let cy = f64::from(img.height() - 1) / 2.0;
    BinaryImage::from_fn(img.width(), img.height(), |x, y| {
        let rx = f64::from(x) - cx;
        let ry = f64::from(y) - cy;
        let sx = (cos * rx + sin * ry + cx).round() as i64;
        let sy = (-sin * rx + cos * ry + cy).round() as i64;
        img.get_or_zero(sx, sy) == 1
    })
}

/// Population variance of per-row ink counts; the criterion deskew maximizes.
fn row_count_variance(img: &BinaryImage) -> f64 {
    let w = img.width() as usize;
    let counts: Vec<u64> = img
        .data()
        .chunks_exact(w)
        .map(|row| row.iter().map(|&v| u64::from(v)).sum())
        .collect();
    let n = counts.len() as f64;
    let mean = counts.iter().sum::<u64>() as f64 / n;
    counts
        .iter()
        .map(|&c| {
            let d = c as f64 - mean;
            d * d
        })
        .sum::<f64>()
        / n
}

/// Straightens small page skew by trying rotation candidates in
/// `[-max_angle, +max_angle]` (degrees, spaced by `step`) and keeping the one
/// whose horizontal profile has maximal variance — straight text lines
/// concentrate ink into few rows.
///
/// Ties prefer the candidate of smallest magnitude, then the negative one.
/// Returns the rotated image together with the chosen angle.
pub fn deskew(
    img: &BinaryImage,
    max_angle: f64,
    step: f64,
) -> Result<(BinaryImage, f64), RasterError> {
    if step.is_nan() || step <= 0.0 {
        return Err(RasterError::InvalidParameter(
            "deskew step must be positive".into(),
        ));
    }
    if max_angle.is_nan() || max_angle < 0.0 {
        return Err(RasterError::InvalidParameter(
            "deskew max angle must be non-negative".into(),
        ));
    }

    let mut candidates = Vec::new();
    let mut k = 0u32;
    loop {
        let angle = -max_angle + f64::from(k) * step;
        if angle > max_angle + 1e-9 {
            break;
        }
        candidates.push(angle);
        k += 1;
    }
    // Evaluate nearest-zero first so that ties resolve toward small angles
    // (and, within a magnitude, toward the negative candidate).
    candidates.sort_by(|a, b| {
        (a.abs(), *a)
            .partial_cmp(&(b.abs(), *b))
            .expect("angles are finite")
    });

    let mut best: Option<(f64, f64)> = None; // (angle, variance)
    for &angle in &candidates {
        let variance = row_count_variance(&rotate_nearest(img, angle));
        match best {
            Some((_, best_var)) if variance <= best_var => {}
            _ => best = Some((angle, variance)),
        }
    }
    let (angle, _) = best.expect("candidate list is never empty");
    Ok((rotate_nearest(img, angle), angle))
}
