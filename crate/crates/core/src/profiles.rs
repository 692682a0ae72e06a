//! Projection profiles: per-row and per-column ink counts over a region.
//!
//! Profiles are the single measurement everything else in this crate is built
//! on — lines and words are valleys in them, and the script features are
//! shapes of them.

use thiserror::Error;

use crate::raster::BinaryImage;

/// Errors produced when computing profiles.
#[derive(Debug, Error)]
pub enum ProfileError {
    #[error("region x0..={x1} x y0..={y1} does not fit in a {width}x{height} image")]
    RegionOutOfBounds {
        x1: u32,
        y1: u32,
        width: u32,
        height: u32,
    },
}

/// Projection direction.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Axis {
    /// One count per row (ink per scanline).
    Horizontal,
    /// One count per column.
    Vertical,
}

/// An inclusive rectangular region of an image.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Rect {
    pub x0: u32,
    pub y0: u32,
    pub x1: u32,
    pub y1: u32,
}

impl Rect {
    /// The rectangle covering a whole image.
    pub fn full(img: &BinaryImage) -> Self {
        Self {
            x0: 0,
            y0: 0,
            x1: img.width() - 1,
            y1: img.height() - 1,
        }
    }

    pub fn width(&self) -> u32 {
        self.x1 - self.x0 + 1
    }

    pub fn height(&self) -> u32 {
        self.y1 - self.y0 + 1
    }

    fn check_in(&self, img: &BinaryImage) -> Result<(), ProfileError> {
        if self.x0 > self.x1
            || self.y0 > self.y1
            || self.x1 >= img.width()
            || self.y1 >= img.height()
        {
            return Err(ProfileError::RegionOutOfBounds {
                x1: self.x1,
                y1: self.y1,
                width: img.width(),
                height: img.height(),
            });
        }
        Ok(())
    }
}

/// Ink counts along one axis of a region.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProjectionProfile {
    pub axis: Axis,
    /// One count per row ([`Axis::Horizontal`]) or column ([`Axis::Vertical`])
    /// of the region, in top-to-bottom / left-to-right order.
    pub counts: Vec<u32>,
    /// The region the counts cover.
    pub region: Rect,
}

impl ProjectionProfile {
    /// Total ink in the region; the same for both axes.
    pub fn sum(&self) -> u64 {
        self.counts.iter().map(|&c| u64::from(c)).sum()
    }

    /// Index range `(first, last)` of the non-zero entries, if any.
    pub fn nonzero_span(&self) -> Option<(usize, usize)> {
        nonzero_span(&self.counts)
    }
}

/// Index range `(first, last)` of the non-zero entries of `counts`.
pub(crate) fn nonzero_span(counts: &[u32]) -> Option<(usize, usize)> {
    let first = counts.iter().position(|&c| c > 0)?;
    let last = counts
        .iter()
        .rposition(|&c| c > 0)
        .expect("some entry is non-zero");
    Some((first, last))
}

/// Per-row ink counts of `region`.
pub fn horizontal_profile(
    img: &BinaryImage,
    region: Rect,
) -> Result<ProjectionProfile, ProfileError> {
    region.check_in(img)?;
    let counts = (region.y0..=region.y1)
        .map(|y| {
            (region.x0..=region.x1)
                .map(|x| u32::from(img.get(x, y)))
                .sum()
        })
        .collect();
    Ok(ProjectionProfile {
        axis: Axis::Horizontal,
        counts,
        region,
    })
}

/// Per-column ink counts of `region`.
pub fn vertical_profile(
    img: &BinaryImage,
    region: Rect,
) -> Result<ProjectionProfile, ProfileError> {
    region.check_in(img)?;
    let counts = (region.x0..=region.x1)
        .map(|x| {
            (region.y0..=region.y1)
                .map(|y| u32::from(img.get(x, y)))
                .sum()
        })
        .collect();
    Ok(ProjectionProfile {
        axis: Axis::Vertical,
        counts,
        region,
    })
}
