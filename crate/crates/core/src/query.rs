//! Query answering: size prefilter, lazy shape tokens, edit-distance ranking.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::path::PathBuf;
use std::sync::Arc;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::image_io::{binarize, load_image, BinaryImage, DEFAULT_THRESHOLD_FRACTION};
use crate::index::{escape_field, WordIndex, WordRecord};
use crate::segment::{page_lines, LineBand, SegmentParams};
use crate::shape::{estimate_zones, query_to_wst, word_to_wst_with_zones, ShapeParams, Wst, ZoneBands, ZoneScope};

pub const DEFAULT_THRESHOLD: f64 = 2.5;
pub const DEFAULT_CHAR_WIDTH: u64 = 40;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SearchParams {
    /// Largest accepted edit distance.
    pub threshold: f64,
    /// Width of one character at the reference font size, in pixels.
    pub char_width: u64,
    /// Accepted length difference from the query, in characters.
    pub size_tolerance: u64,
    pub shape: ShapeParams,
    /// Used to recover a word's text line when its shape token is computed.
    pub segment: SegmentParams,
}

impl Default for SearchParams {
    fn default() -> Self {
        Self {
            threshold: DEFAULT_THRESHOLD,
            char_width: DEFAULT_CHAR_WIDTH,
            size_tolerance: 1,
            shape: ShapeParams::default(),
            segment: SegmentParams::default(),
        }
    }
}

impl SearchParams {
    pub fn validate(&self) -> Result<()> {
        if self.threshold.is_nan() || self.threshold < 0.0 {
            return Err(Error::arg(format!("threshold {} must be non-negative", self.threshold)));
        }
        if self.char_width == 0 {
            return Err(Error::arg("character width must be at least 1"));
        }
        self.shape.validate()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MatchResult<'a> {
    pub record: &'a WordRecord,
    pub distance: usize,
}

impl fmt::Display for MatchResult<'_> {
    /// `<distance> <doc_id> <line_idx> <word_idx> <x1> <y1> <x2> <y2>`
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let r = self.record;
        write!(f, "{} {} {} {} {}", self.distance, escape_field(&r.doc_id), r.line_idx, r.word_idx, r.bbox)
    }
}

/// Unit-cost edit distance between two symbol strings.
///
/// Runs in `O(|a| * |b|)` time with a single row of `min(|a|, |b|) + 1` cells.
pub fn levenshtein<T: PartialEq>(a: &[T], b: &[T]) -> usize {
    let (long, short) = if a.len() >= b.len() { (a, b) } else { (b, a) };
    if short.is_empty() {
        return long.len();
    }
    let mut row: Vec<usize> = (0..=short.len()).collect();
    for (i, x) in long.iter().enumerate() {
        let mut diag = row[0];
        row[0] = i + 1;
        for (j, y) in short.iter().enumerate() {
            let sub = diag + usize::from(x != y);
            diag = row[j + 1];
            row[j + 1] = sub.min(row[j] + 1).min(diag + 1);
        }
    }
    row[short.len()]
}

/// Records whose normalized length is within `size_tolerance` characters of
/// the query's expected length, `[(n - t) * w, (n + t) * w]`. Only the size buckets that
/// overlap that interval are scanned; results keep index order.
pub fn size_prefilter<'a>(idx: &'a WordIndex, query_len: usize, params: &SearchParams) -> Result<Vec<&'a WordRecord>> {
    if query_len == 0 {
        return Err(Error::arg("query must contain at least one letter"));
    }
    if params.char_width == 0 {
        return Err(Error::arg("character width must be at least 1"));
    }
    let (lo, hi) = length_window(query_len, params.char_width, params.size_tolerance);
    let mut positions: Vec<usize> = crate::index::SizeClass::ALL
        .into_iter()
        .filter(|c| c.intersects(lo, hi))
        .flat_map(|c| idx.bucket_positions(c).iter().copied())
        .filter(|&i| (lo..=hi).contains(&idx.records()[i].norm_length))
        .collect();
    positions.sort_unstable();
    Ok(positions.into_iter().map(|i| &idx.records()[i]).collect())
}

/// Accepted normalized-length interval for a query of `query_len` letters.
pub fn length_window(query_len: usize, char_width: u64, tolerance: u64) -> (u64, u64) {
    let n = query_len as u64;
    (n.saturating_sub(tolerance).saturating_mul(char_width), n.saturating_add(tolerance).saturating_mul(char_width))
}

/// Access to page images by document id, for computing shape tokens.
pub trait PageSource: Sync {
    fn page(&self, doc_id: &str) -> Result<Arc<BinaryImage>>;
}

/// Pages held in memory.
#[derive(Debug, Default, Clone)]
pub struct MemoryPages {
    pages: HashMap<String, Arc<BinaryImage>>,
}

impl MemoryPages {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, doc_id: impl Into<String>, image: BinaryImage) {
        self.pages.insert(doc_id.into(), Arc::new(image));
    }
}

impl PageSource for MemoryPages {
    fn page(&self, doc_id: &str) -> Result<Arc<BinaryImage>> {
        self.pages
            .get(doc_id)
            .cloned()
            .ok_or_else(|| Error::MissingPage { doc_id: doc_id.to_string(), reason: "not loaded".into() })
    }
}

/// Pages read from the paths recorded in an index and binarized on demand.
#[derive(Debug, Clone)]
pub struct DiskPages {
    paths: HashMap<String, PathBuf>,
    threshold_fraction: f64,
}

impl DiskPages {
    pub fn for_index(idx: &WordIndex) -> Self {
        Self {
            paths: idx.docs().iter().map(|d| (d.doc_id.clone(), PathBuf::from(&d.path))).collect(),
            threshold_fraction: DEFAULT_THRESHOLD_FRACTION,
        }
    }

    pub fn with_threshold_fraction(mut self, fraction: f64) -> Self {
        self.threshold_fraction = fraction;
        self
    }
}

impl PageSource for DiskPages {
    fn page(&self, doc_id: &str) -> Result<Arc<BinaryImage>> {
        let missing = |reason: String| Error::MissingPage { doc_id: doc_id.to_string(), reason };
        let path = self.paths.get(doc_id).ok_or_else(|| missing("no such document".into()))?;
        let bytes = std::fs::read(path).map_err(|e| missing(format!("{}: {e}", path.display())))?;
        let gray = load_image(&bytes).map_err(|e| missing(format!("{}: {e}", path.display())))?;
        Ok(Arc::new(binarize(&gray, self.threshold_fraction)?))
    }
}

/// Compute and cache shape tokens for the given records, loading each page once.
pub fn fill_wsts(records: &[&WordRecord], pages: &dyn PageSource, params: &SearchParams) -> Result<()> {
    let mut by_doc: BTreeMap<&str, Vec<&WordRecord>> = BTreeMap::new();
    for r in records.iter().filter(|r| r.wst().is_none()) {
        by_doc.entry(r.doc_id.as_str()).or_default().push(r);
    }
    for (doc_id, recs) in by_doc {
        let page = pages.page(doc_id)?;
        let bands = page_lines(&page, &params.segment)?;
        // Body bands per line, shared by all words on it.
        let mut zones: HashMap<usize, (LineBand, ZoneBands)> = HashMap::new();
        if params.shape.zone_scope == ZoneScope::Line {
            for r in &recs {
                if zones.contains_key(&r.line_idx) {
                    continue;
                }
                let band = line_band_for(&bands, r);
                let z = estimate_zones(&page.as_view(), band, params.shape.zone_fraction)?;
                zones.insert(r.line_idx, (band, z));
            }
        }
        recs.par_iter()
            .map(|r| {
                let (band, z) = match zones.get(&r.line_idx) {
                    Some(&(band, z)) if band.contains_rows(r.bbox.y1, r.bbox.y2) => (band, z),
                    _ => {
                        let band = line_band_for(&bands, r);
                        let word = page.view(r.bbox)?;
                        let own = LineBand::new(r.bbox.y1, r.bbox.y2);
                        (band, estimate_zones(&word, own, params.shape.zone_fraction)?)
                    }
                };
                let wst = word_to_wst_with_zones(&page, r.bbox, z, band.height(), &params.shape)?;
                r.cache_wst(wst);
                Ok(())
            })
            .collect::<Result<()>>()?;
    }
    Ok(())
}

/// The line band holding `r`, falling back to the word's own rows when the
/// page no longer segments the way it did at indexing time.
fn line_band_for(bands: &[LineBand], r: &WordRecord) -> LineBand {
    match bands.get(r.line_idx) {
        Some(b) if b.contains_rows(r.bbox.y1, r.bbox.y2) => *b,
        _ => LineBand::new(r.bbox.y1, r.bbox.y2),
    }
}

/// Find words whose shape token is within `params.threshold` edits of the
/// query's, ranked by distance then by position.
pub fn search<'a>(
    idx: &'a WordIndex,
    pages: &dyn PageSource,
    text: &str,
    params: &SearchParams,
) -> Result<Vec<MatchResult<'a>>> {
    params.validate()?;
    let query = query_to_wst(text)?;
    let candidates = size_prefilter(idx, text.chars().count(), params)?;
    fill_wsts(&candidates, pages, params)?;
    Ok(rank(&query, &candidates, params.threshold))
}

/// Score already-encoded candidates against a query token.
pub fn rank<'a>(query: &Wst, candidates: &[&'a WordRecord], threshold: f64) -> Vec<MatchResult<'a>> {
    let mut out: Vec<MatchResult<'a>> = candidates
        .iter()
        .filter_map(|&record| {
            let wst = record.wst()?;
            let distance = levenshtein(query.symbols(), wst.symbols());
            (distance as f64 <= threshold).then_some(MatchResult { record, distance })
        })
        .collect();
    out.sort_by(|a, b| {
        (a.distance, &a.record.doc_id, a.record.line_idx, a.record.word_idx).cmp(&(
            b.distance,
            &b.record.doc_id,
            b.record.line_idx,
            b.record.word_idx,
        ))
    });
    out
}
