//! Line and word segmentation from projection profiles.
//!
//! Lines are maximal runs of rows whose ink count exceeds a small noise
//! floor. Within a line, words are separated by runs of empty columns longer
//! than `gap_factor` times the line height; shorter empty runs are treated as
//! breaks between unjoined letters of the same word.

use std::fmt;

use crate::error::{Error, Result};
use crate::image_io::BinaryImage;

pub const DEFAULT_GAP_FACTOR: f64 = 0.2;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Axis {
    Row,
    Column,
}

/// Ink-pixel counts along one axis.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Profile {
    pub counts: Vec<u32>,
    pub axis: Axis,
}

impl Profile {
    pub fn total(&self) -> u64 {
        self.counts.iter().map(|&c| u64::from(c)).sum()
    }
}

impl fmt::Display for Profile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, c) in self.counts.iter().enumerate() {
            if i > 0 {
                f.write_str(" ")?;
            }
            write!(f, "{c}")?;
        }
        Ok(())
    }
}

/// Inclusive row span of one text line.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct LineBand {
    pub row_start: usize,
    pub row_end: usize,
}

impl LineBand {
    pub fn new(row_start: usize, row_end: usize) -> Self {
        assert!(row_start <= row_end, "empty line band");
        Self { row_start, row_end }
    }

    pub fn height(&self) -> usize {
        self.row_end - self.row_start + 1
    }

    pub fn contains_rows(&self, y1: usize, y2: usize) -> bool {
        self.row_start <= y1 && y2 <= self.row_end
    }
}

/// Inclusive pixel rectangle: `(x1, y1)` top-left, `(x2, y2)` bottom-right.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct WordBox {
    pub x1: usize,
    pub y1: usize,
    pub x2: usize,
    pub y2: usize,
}

impl WordBox {
    pub fn width(&self) -> usize {
        self.x2 - self.x1 + 1
    }

    pub fn height(&self) -> usize {
        self.y2 - self.y1 + 1
    }

    pub fn area(&self) -> usize {
        self.width() * self.height()
    }

    pub fn contains(&self, x: usize, y: usize) -> bool {
        (self.x1..=self.x2).contains(&x) && (self.y1..=self.y2).contains(&y)
    }

    pub fn intersection(&self, other: &WordBox) -> Option<WordBox> {
        let b = WordBox {
            x1: self.x1.max(other.x1),
            y1: self.y1.max(other.y1),
            x2: self.x2.min(other.x2),
            y2: self.y2.min(other.y2),
        };
        (b.x1 <= b.x2 && b.y1 <= b.y2).then_some(b)
    }

    /// Intersection over union of pixel areas.
    pub fn iou(&self, other: &WordBox) -> f64 {
        let inter = self.intersection(other).map_or(0, |b| b.area());
        let union = self.area() + other.area() - inter;
        inter as f64 / union as f64
    }
}

impl fmt::Display for WordBox {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {} {} {}", self.x1, self.y1, self.x2, self.y2)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SegmentParams {
    /// Rows with at most this many ink pixels separate lines. `None` picks
    /// [`default_noise_threshold`] from the page width.
    pub noise_threshold: Option<u32>,
    /// Empty column runs up to `gap_factor * line height` stay inside a word.
    pub gap_factor: f64,
}

impl Default for SegmentParams {
    fn default() -> Self {
        Self { noise_threshold: None, gap_factor: DEFAULT_GAP_FACTOR }
    }
}

impl SegmentParams {
    pub fn noise_threshold_for(&self, width: usize) -> u32 {
        self.noise_threshold.unwrap_or_else(|| default_noise_threshold(width))
    }
}

/// `max(1, round(0.005 * width))`
pub fn default_noise_threshold(width: usize) -> u32 {
    ((width as f64 * 0.005).round() as u32).max(1)
}

pub fn row_profile(img: &BinaryImage) -> Profile {
    Profile { counts: img.as_view().row_counts(0..=img.height() - 1), axis: Axis::Row }
}

/// Group maximal runs of rows with `count > noise_threshold` into bands.
pub fn segment_lines(profile: &Profile, noise_threshold: u32) -> Result<Vec<LineBand>> {
    if profile.axis != Axis::Row {
        return Err(Error::arg("segment_lines needs a row profile"));
    }
    Ok(runs(&profile.counts, |c| c > noise_threshold).map(|(a, b)| LineBand::new(a, b)).collect())
}

/// Ink count per column restricted to the band's rows.
pub fn column_profile(img: &BinaryImage, band: LineBand) -> Result<Profile> {
    check_band(img, band)?;
    let view = img.view(WordBox { x1: 0, y1: band.row_start, x2: img.width() - 1, y2: band.row_end })?;
    Ok(Profile { counts: view.column_counts(), axis: Axis::Column })
}

/// Split a line band into tight word boxes, ordered left to right.
pub fn segment_words(img: &BinaryImage, band: LineBand, gap_factor: f64) -> Result<Vec<WordBox>> {
    if !(gap_factor >= 0.0 && gap_factor.is_finite()) {
        return Err(Error::arg(format!("gap factor {gap_factor} must be finite and non-negative")));
    }
    let profile = column_profile(img, band)?;
    let max_gap = (gap_factor * band.height() as f64).round() as usize;

    let mut spans: Vec<(usize, usize)> = Vec::new();
    for (start, end) in runs(&profile.counts, |c| c > 0) {
        match spans.last_mut() {
            Some(last) if start - last.1 - 1 <= max_gap => last.1 = end,
            _ => spans.push((start, end)),
        }
    }

    let boxes = spans
        .into_iter()
        .map(|(x1, x2)| {
            let rows = img
                .view(WordBox { x1, y1: band.row_start, x2, y2: band.row_end })
                .expect("span lies inside the band")
                .row_counts(band.row_start..=band.row_end);
            // Spans start and end on ink columns, so some row has ink.
            let top = rows.iter().position(|&c| c > 0).expect("span has ink");
            let bottom = rows.iter().rposition(|&c| c > 0).expect("span has ink");
            WordBox { x1, y1: band.row_start + top, x2, y2: band.row_start + bottom }
        })
        .collect();
    Ok(boxes)
}

/// One segmented line: its band and the words inside it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SegmentedLine {
    pub band: LineBand,
    pub words: Vec<WordBox>,
}

/// Lines, then words per line, for a whole page.
pub fn segment_page(img: &BinaryImage, params: &SegmentParams) -> Result<Vec<SegmentedLine>> {
    let bands = page_lines(img, params)?;
    bands
        .into_iter()
        .map(|band| Ok(SegmentedLine { band, words: segment_words(img, band, params.gap_factor)? }))
        .collect()
}

pub fn page_lines(img: &BinaryImage, params: &SegmentParams) -> Result<Vec<LineBand>> {
    segment_lines(&row_profile(img), params.noise_threshold_for(img.width()))
}

fn check_band(img: &BinaryImage, band: LineBand) -> Result<()> {
    if band.row_start > band.row_end || band.row_end >= img.height() {
        return Err(Error::arg(format!(
            "line band {}..={} outside image of height {}",
            band.row_start,
            band.row_end,
            img.height()
        )));
    }
    Ok(())
}

/// Maximal runs of indices whose value satisfies `keep`, as inclusive pairs.
pub(crate) fn runs<'a>(
    counts: &'a [u32],
    keep: impl Fn(u32) -> bool + 'a,
) -> impl Iterator<Item = (usize, usize)> + 'a {
    let mut i = 0;
    std::iter::from_fn(move || {
        while i < counts.len() && !keep(counts[i]) {
            i += 1;
        }
        if i >= counts.len() {
            return None;
        }
        let start = i;
        while i < counts.len() && keep(counts[i]) {
            i += 1;
        }
        Some((start, i - 1))
    })
}
