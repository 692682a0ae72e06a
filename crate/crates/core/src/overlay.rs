//! Debug overlays: the page with line bands and word boxes drawn on top.

use std::path::Path;

use crate::raster::{GrayImage, RasterError};
use crate::segmenter::{LineBand, WordBox};

const BAND_COLOR: [u8; 3] = [216, 84, 64]; // line bands: red
const BOX_COLOR: [u8; 3] = [48, 96, 224]; // word boxes: blue

fn draw_rect(rgb: &mut image::RgbImage, x0: u32, y0: u32, x1: u32, y1: u32, color: [u8; 3]) {
    for x in x0..=x1 {
        rgb.put_pixel(x, y0, image::Rgb(color));
        rgb.put_pixel(x, y1, image::Rgb(color));
    }
    for y in y0..=y1 {
        rgb.put_pixel(x0, y, image::Rgb(color));
        rgb.put_pixel(x1, y, image::Rgb(color));
    }
}

/// Renders the page with its segmentation outlined — one color for line
/// bands, another for word boxes — and writes it as a PNG.
pub fn save_overlay_png(
    page: &GrayImage,
    lines: &[LineBand],
    words: &[WordBox],
    path: impl AsRef<Path>,
) -> Result<(), RasterError> {
    let mut rgb = image::RgbImage::from_fn(page.width(), page.height(), |x, y| {
        let v = page.get(x, y);
        image::Rgb([v, v, v])
    });
    for line in lines {
        draw_rect(
            &mut rgb,
            0,
            line.y_top,
            page.width() - 1,
            line.y_bottom,
            BAND_COLOR,
        );
    }
    for word in words {
        draw_rect(
            &mut rgb,
            word.x_left,
            word.y_top,
            word.x_right,
            word.y_bottom,
            BOX_COLOR,
        );
    }
    rgb.save_with_format(path.as_ref(), image::ImageFormat::Png)
        .map_err(|e| RasterError::Io(format!("{}: {e}", path.as_ref().display())))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::raster::load_image;

    #[test]
    fn overlay_marks_bands_and_boxes() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("overlay.png");
        let page = GrayImage::filled(20, 12, 255);
        let lines = vec![LineBand {
            index: 0,
            y_top: 3,
            y_bottom: 8,
        }];
        let words = vec![WordBox {
            line_index: 0,
            index_in_line: 0,
            x_left: 4,
            x_right: 9,
            y_top: 4,
            y_bottom: 7,
        }];
        save_overlay_png(&page, &lines, &words, &path).unwrap();
        // The overlay is a color PNG; loading it as gray should still work.
        let back = load_image(&path).unwrap();
        assert_eq!(back.width(), 20);
        // Band row is tinted, so it is no longer pure white.
        assert_ne!(back.get(0, 3), 255);
        assert_ne!(back.get(4, 4), 255);
    }
}
