//! Word shape tokens.
//!
//! A word image is cut into regions at the near-minimum valleys of its column
//! profile, and each region is labelled by whether its ink reaches above or
//! below the body (x-height) band: `A` for ascenders, `g` for descenders and
//! `x` for neither. Cursive strokes are routinely over-segmented; the per
//! letter code table used for queries accounts for that by mapping some
//! letters to two or three symbols.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::image_io::{BinaryImage, ImageView};
use crate::segment::{LineBand, WordBox};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ShapeSymbol {
    /// Ascender without descender.
    A,
    /// Neither ascender nor descender.
    X,
    /// Descender (with or without ascender).
    G,
}

impl ShapeSymbol {
    pub const ALL: [ShapeSymbol; 3] = [ShapeSymbol::A, ShapeSymbol::X, ShapeSymbol::G];

    pub fn as_char(self) -> char {
        match self {
            ShapeSymbol::A => 'A',
            ShapeSymbol::X => 'x',
            ShapeSymbol::G => 'g',
        }
    }

    pub fn from_char(c: char) -> Option<Self> {
        match c {
            'A' => Some(ShapeSymbol::A),
            'x' => Some(ShapeSymbol::X),
            'g' => Some(ShapeSymbol::G),
            _ => None,
        }
    }
}

/// Word shape token: the symbol sequence of one word.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Wst(pub Vec<ShapeSymbol>);

impl Wst {
    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn symbols(&self) -> &[ShapeSymbol] {
        &self.0
    }
}

impl fmt::Display for Wst {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.iter().try_for_each(|s| write!(f, "{}", s.as_char()))
    }
}

impl FromStr for Wst {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        s.chars()
            .enumerate()
            .map(|(position, ch)| ShapeSymbol::from_char(ch).ok_or(Error::UnsupportedChar { ch, position }))
            .collect::<Result<Vec<_>>>()
            .map(Wst)
    }
}

/// Body (x-height) band, in the row frame of the image it was estimated on.
/// Rows above `body_top` form the ascender zone, rows below `body_bottom`
/// the descender zone.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ZoneBands {
    pub body_top: usize,
    pub body_bottom: usize,
}

impl ZoneBands {
    pub fn body_height(&self) -> usize {
        self.body_bottom - self.body_top + 1
    }
}

/// Column span of a word, relative to the word's left edge.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Region {
    pub col_start: usize,
    pub col_end: usize,
}

impl Region {
    pub fn width(&self) -> usize {
        self.col_end - self.col_start + 1
    }
}

/// Where the body band is measured.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ZoneScope {
    /// Over the whole text line the word sits in.
    #[default]
    Line,
    /// Over the word's own box.
    Word,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ShapeParams {
    pub zone_fraction: f64,
    pub valley_slack: u32,
    pub min_region_width: f64,
    pub margin: f64,
    pub zone_scope: ZoneScope,
}

impl Default for ShapeParams {
    fn default() -> Self {
        Self { zone_fraction: 0.5, valley_slack: 1, min_region_width: 0.1, margin: 0.1, zone_scope: ZoneScope::Line }
    }
}

impl ShapeParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.zone_fraction > 0.0 && self.zone_fraction <= 1.0) {
            return Err(Error::arg(format!("zone fraction {} must be in (0, 1]", self.zone_fraction)));
        }
        if !(self.min_region_width >= 0.0 && self.min_region_width.is_finite()) {
            return Err(Error::arg("minimum region width must be finite and non-negative"));
        }
        if !(self.margin >= 0.0 && self.margin.is_finite()) {
            return Err(Error::arg("zone margin must be finite and non-negative"));
        }
        Ok(())
    }
}

/// Body band: the contiguous run of rows around the densest row whose ink
/// count is at least `zone_fraction` of the peak. Counts are taken over the
/// view's columns and the band's rows.
pub fn estimate_zones(view: &ImageView<'_>, band: LineBand, zone_fraction: f64) -> Result<ZoneBands> {
    let frame = view.bbox();
    if band.row_start > band.row_end || band.row_start < frame.y1 || band.row_end > frame.y2 {
        return Err(Error::arg(format!(
            "band {}..={} outside view rows {}..={}",
            band.row_start, band.row_end, frame.y1, frame.y2
        )));
    }
    let counts = view.row_counts(band.row_start..=band.row_end);
    let (peak_row, peak) =
        counts.iter().copied().enumerate().fold((0, 0), |best, (i, c)| if c > best.1 { (i, c) } else { best });
    if peak == 0 {
        return Err(Error::NoInk);
    }
    let cut = zone_fraction * f64::from(peak);
    let dense = |i: usize| f64::from(counts[i]) >= cut;
    let mut top = peak_row;
    while top > 0 && dense(top - 1) {
        top -= 1;
    }
    let mut bottom = peak_row;
    while bottom + 1 < counts.len() && dense(bottom + 1) {
        bottom += 1;
    }
    Ok(ZoneBands { body_top: band.row_start + top, body_bottom: band.row_start + bottom })
}

/// Cut a word into regions at interior valleys of its column profile.
///
/// Valleys are columns whose count is at most the minimum ink-column count
/// plus `valley_slack`. Each maximal valley run not touching the word's edge
/// is cut before its midpoint column. Regions narrower than
/// `round(min_region_width * font_size)` are then merged into their left
/// neighbour, or the right one for the leftmost region.
pub fn char_region_segment(
    word: &ImageView<'_>,
    font_size: usize,
    valley_slack: u32,
    min_region_width: f64,
) -> Result<Vec<Region>> {
    let counts = word.column_counts();
    let floor = counts.iter().copied().filter(|&c| c > 0).min().ok_or(Error::NoInk)?;
    let valley_max = floor.saturating_add(valley_slack);
    let last = counts.len() - 1;

    let mut regions = Vec::new();
    let mut start = 0;
    for (a, b) in crate::segment::runs(&counts, |c| c <= valley_max) {
        if a == 0 || b == last {
            continue;
        }
        let cut = a + (b - a) / 2;
        regions.push(Region { col_start: start, col_end: cut - 1 });
        start = cut;
    }
    regions.push(Region { col_start: start, col_end: last });

    let min_width = (min_region_width * font_size as f64).round() as usize;
    while regions.len() > 1 {
        let Some(i) = regions.iter().position(|r| r.width() < min_width) else {
            break;
        };
        if i == 0 {
            regions[1].col_start = regions[0].col_start;
            regions.remove(0);
        } else {
            regions[i - 1].col_end = regions[i].col_end;
            regions.remove(i);
        }
    }
    Ok(regions)
}

/// Label one region by where its ink lies relative to the body band.
///
/// Ink more than `round(margin * body height)` rows above the band is an
/// ascender, likewise below it a descender. A region with both is `g`.
pub fn classify_region(word: &ImageView<'_>, region: Region, zones: ZoneBands, margin: f64) -> ShapeSymbol {
    let frame = word.bbox();
    let slack = (margin * zones.body_height() as f64).round() as usize;
    let x_range = frame.x1 + region.col_start..=frame.x1 + region.col_end.min(frame.width() - 1);
    let mut ascender = false;
    let mut descender = false;
    for y in frame.y1..=frame.y2 {
        let above = y + slack < zones.body_top;
        let below = y > zones.body_bottom + slack;
        if !(above || below) {
            continue;
        }
        if x_range.clone().any(|x| word.is_ink(x, y)) {
            ascender |= above;
            descender |= below;
        }
    }
    match (ascender, descender) {
        (_, true) => ShapeSymbol::G,
        (true, false) => ShapeSymbol::A,
        (false, false) => ShapeSymbol::X,
    }
}

/// Shape token of the word at `word` inside `page`, with `band` being the
/// text line it belongs to.
pub fn word_to_wst(page: &BinaryImage, word: WordBox, band: LineBand, params: &ShapeParams) -> Result<Wst> {
    params.validate()?;
    let zones = match params.zone_scope {
        ZoneScope::Line => estimate_zones(&page.as_view(), band, params.zone_fraction)?,
        ZoneScope::Word => estimate_zones(&page.view(word)?, LineBand::new(word.y1, word.y2), params.zone_fraction)?,
    };
    word_to_wst_with_zones(page, word, zones, band.height(), params)
}

/// As [`word_to_wst`] with the body band already known.
pub fn word_to_wst_with_zones(
    page: &BinaryImage,
    word: WordBox,
    zones: ZoneBands,
    font_size: usize,
    params: &ShapeParams,
) -> Result<Wst> {
    let view = page.view(word)?;
    let regions = char_region_segment(&view, font_size, params.valley_slack, params.min_region_width)?;
    Ok(Wst(regions.into_iter().map(|r| classify_region(&view, r, zones, params.margin)).collect()))
}

/// Shape code of a single letter, or `None` for anything else.
pub fn letter_code(c: char) -> Option<&'static [ShapeSymbol]> {
    use ShapeSymbol::{A, G, X};
    Some(match c {
        'A'..='G' | 'I'..='K' | 'O'..='T' | 'X'..='Z' | 'b' | 'd' | 'k' | 'l' | 't' => &[A],
        'H' | 'M' | 'N' | 'U' | 'V' | 'W' => &[A, A],
        'L' | 'h' => &[A, X],
        'a' | 'c' | 'e' | 'i' | 'o' | 's' | 'x' | 'z' => &[X],
        'g' | 'p' | 'q' | 'j' | 'f' => &[G],
        'n' | 'r' | 'u' | 'v' => &[X, X],
        'y' => &[X, G],
        'm' | 'w' => &[X, X, X],
        _ => return None,
    })
}

/// Expand query text letter by letter into a shape token.
pub fn query_to_wst(text: &str) -> Result<Wst> {
    let mut out = Vec::with_capacity(text.len() * 2);
    for (position, ch) in text.chars().enumerate() {
        let code = letter_code(ch).ok_or(Error::UnsupportedChar { ch, position })?;
        out.extend_from_slice(code);
    }
    Ok(Wst(out))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn wst(s: &str) -> Wst {
        s.parse().unwrap()
    }

    /// Image whose column k holds `counts[k]` ink pixels stacked from the bottom.
    fn bars(counts: &[u32]) -> BinaryImage {
        let h = *counts.iter().max().unwrap() as usize;
        let mut img = BinaryImage::blank(counts.len(), h).unwrap();
        for (x, &c) in counts.iter().enumerate() {
            for y in h - c as usize..h {
                img.set_ink(x, y, true);
            }
        }
        img
    }

    fn rows_image(counts: &[usize]) -> BinaryImage {
        let w = *counts.iter().max().unwrap();
        let mut img = BinaryImage::blank(w, counts.len()).unwrap();
        for (y, &c) in counts.iter().enumerate() {
            for x in 0..c {
                img.set_ink(x, y, true);
            }
        }
        img
    }

    #[test]
    fn zones_from_dense_rows() {
        let img = rows_image(&[1, 1, 8, 9, 8, 1]);
        let z = estimate_zones(&img.as_view(), LineBand::new(0, 5), 0.5).unwrap();
        assert_eq!(z, ZoneBands { body_top: 2, body_bottom: 4 });

        let uniform = rows_image(&[3, 3, 3, 3]);
        let z = estimate_zones(&uniform.as_view(), LineBand::new(0, 3), 0.5).unwrap();
        assert_eq!(z, ZoneBands { body_top: 0, body_bottom: 3 });

        let single = BinaryImage::from_ascii("....\n.##.\n....").unwrap();
        let z = estimate_zones(&single.as_view(), LineBand::new(0, 2), 0.5).unwrap();
        assert_eq!(z, ZoneBands { body_top: 1, body_bottom: 1 });

        let blank = BinaryImage::blank(3, 3).unwrap();
        assert!(matches!(estimate_zones(&blank.as_view(), LineBand::new(0, 2), 0.5), Err(Error::NoInk)));
    }

    #[test]
    fn zones_offset_by_band_start() {
        let img = rows_image(&[9, 1, 1, 8, 9, 8, 1]);
        let z = estimate_zones(&img.as_view(), LineBand::new(1, 6), 0.5).unwrap();
        assert_eq!(z, ZoneBands { body_top: 3, body_bottom: 5 });
    }

    #[test]
    fn valley_cuts_at_midpoints() {
        let img = bars(&[5, 6, 1, 5, 6, 1, 5]);
        let regions = char_region_segment(&img.as_view(), 7, 0, 0.1).unwrap();
        let spans: Vec<_> = regions.iter().map(|r| (r.col_start, r.col_end)).collect();
        assert_eq!(spans, vec![(0, 1), (2, 4), (5, 6)]);
    }

    #[test]
    fn wide_valley_cut_at_middle_column() {
        let img = bars(&[5, 6, 7, 1, 1, 1, 7, 6, 5]);
        let regions = char_region_segment(&img.as_view(), 9, 0, 0.1).unwrap();
        let spans: Vec<_> = regions.iter().map(|r| (r.col_start, r.col_end)).collect();
        assert_eq!(spans, vec![(0, 3), (4, 8)]);
    }

    #[test]
    fn single_bump_is_one_region() {
        let img = bars(&[1, 2, 4, 6, 4, 2, 1]);
        assert_eq!(char_region_segment(&img.as_view(), 7, 0, 0.1).unwrap().len(), 1);
        // Uniform columns are one edge-touching valley run.
        let img = bars(&[3, 3, 3]);
        assert_eq!(char_region_segment(&img.as_view(), 3, 1, 0.1).unwrap().len(), 1);
    }

    #[test]
    fn empty_columns_inside_a_word_are_valleys() {
        let img = bars(&[4, 5, 0, 0, 5, 4]);
        let spans: Vec<_> =
            char_region_segment(&img.as_view(), 4, 0, 0.0).unwrap().iter().map(|r| (r.col_start, r.col_end)).collect();
        assert_eq!(spans, vec![(0, 1), (2, 5)]);
    }

    #[test]
    fn narrow_regions_merge() {
        let img = bars(&[5, 1, 5, 6, 1, 5, 5, 5, 5]);
        // min width round(0.1 * 30) = 3; first region [0,0] merges right
        let regions = char_region_segment(&img.as_view(), 30, 0, 0.1).unwrap();
        let spans: Vec<_> = regions.iter().map(|r| (r.col_start, r.col_end)).collect();
        assert_eq!(spans, vec![(0, 3), (4, 8)]);
        // raising the floor collapses to one region
        let regions = char_region_segment(&img.as_view(), 100, 0, 0.1).unwrap();
        assert_eq!(regions, vec![Region { col_start: 0, col_end: 8 }]);
    }

    #[test]
    fn no_ink_is_an_error() {
        let blank = BinaryImage::blank(4, 4).unwrap();
        assert!(matches!(char_region_segment(&blank.as_view(), 4, 1, 0.1), Err(Error::NoInk)));
    }

    const GLYPHS: &str = "
        ......#........
        ......#......#.
        .###..####.#.#.
        .###..####.###.
        .###..####...#.
        .###.........#.
        .............#.";

    #[test]
    fn classify_by_zone_touch() {
        let img = BinaryImage::from_ascii(GLYPHS).unwrap();
        let zones = ZoneBands { body_top: 2, body_bottom: 4 };
        let view = img.as_view();
        let region = |a, b| Region { col_start: a, col_end: b };
        assert_eq!(classify_region(&view, region(5, 9), zones, 0.0), ShapeSymbol::A);
        assert_eq!(classify_region(&view, region(10, 14), zones, 0.0), ShapeSymbol::G);
        // the first block dips one row below the body
        assert_eq!(classify_region(&view, region(0, 4), zones, 0.0), ShapeSymbol::G);
        // a margin of one row (round(0.34 * 3)) absorbs the dip
        assert_eq!(classify_region(&view, region(0, 4), zones, 0.34), ShapeSymbol::X);
        assert_eq!(classify_region(&view, region(5, 9), zones, 0.34), ShapeSymbol::A);
    }

    #[test]
    fn both_zones_map_to_g() {
        let img = BinaryImage::from_ascii(
            "..#.
             ..#.
             ####
             ####
             .#..
             .#..",
        )
        .unwrap();
        let zones = ZoneBands { body_top: 2, body_bottom: 3 };
        let r = Region { col_start: 0, col_end: 3 };
        assert_eq!(classify_region(&img.as_view(), r, zones, 0.1), ShapeSymbol::G);
    }

    #[test]
    fn vertical_bar_is_a() {
        // A stroke spanning the ascender zone beside a lower-case body.
        let img = BinaryImage::from_ascii(
            "##..........
             ##..........
             ##...####...
             ##...####...
             ##...####...",
        )
        .unwrap();
        let band = LineBand::new(0, 4);
        let bar = WordBox { x1: 0, y1: 0, x2: 1, y2: 4 };
        let params = ShapeParams::default();
        assert_eq!(word_to_wst(&img, bar, band, &params).unwrap(), wst("A"));
        let body = WordBox { x1: 5, y1: 2, x2: 8, y2: 4 };
        assert_eq!(word_to_wst(&img, body, band, &params).unwrap(), wst("x"));
    }

    #[test]
    fn query_codes() {
        assert_eq!(query_to_wst("transformation").unwrap(), wst("AxxxxxxgxxxxxxxAxxxx"));
        assert_eq!(query_to_wst("transformation").unwrap().len(), 20);
        assert_eq!(query_to_wst("cat").unwrap(), wst("xxA"));
        assert_eq!(query_to_wst("my").unwrap(), wst("xxxxg"));
        assert_eq!(query_to_wst("I").unwrap(), wst("A"));
        assert_eq!(query_to_wst("the").unwrap(), wst("AAxx"));
        assert_eq!(query_to_wst("").unwrap(), Wst::default());
    }

    #[test]
    fn unsupported_query_characters() {
        match query_to_wst("a1") {
            Err(Error::UnsupportedChar { ch: '1', position: 1 }) => {}
            other => panic!("{other:?}"),
        }
        assert!(query_to_wst("two words").is_err());
        assert!(query_to_wst("café").is_err());
    }

    #[test]
    fn code_rows_partition_letters() {
        let rows: [(&str, &str); 8] = [
            ("A", "ABCDEFGIJKOPQRSTXYZbdklt"),
            ("AA", "HMNUVW"),
            ("Ax", "Lh"),
            ("x", "aceiosxz"),
            ("g", "gpqjf"),
            ("xx", "nruv"),
            ("xg", "y"),
            ("xxx", "mw"),
        ];
        let mut seen = std::collections::HashSet::new();
        for (code, letters) in rows {
            for c in letters.chars() {
                assert!(seen.insert(c), "{c} listed twice");
                assert_eq!(query_to_wst(&c.to_string()).unwrap(), wst(code), "letter {c}");
            }
        }
        assert_eq!(seen.len(), 52);
        assert!(('a'..='z').chain('A'..='Z').all(|c| seen.contains(&c)));
    }

    #[test]
    fn wst_text_form() {
        assert_eq!(wst("AxgA").to_string(), "AxgA");
        assert!("AxG".parse::<Wst>().is_err());
    }

    proptest! {
        #[test]
        fn query_length_bounds(text in "[a-zA-Z]{0,30}") {
            let n = text.chars().count();
            let len = query_to_wst(&text).unwrap().len();
            prop_assert!(n <= len && len <= 3 * n);
        }

        #[test]
        fn regions_partition_columns(counts in proptest::collection::vec(0u32..8, 1..40), slack in 0u32..3, font in 1usize..60) {
            prop_assume!(counts.iter().any(|&c| c > 0));
            let img = bars(&counts);
            let regions = char_region_segment(&img.as_view(), font, slack, 0.1).unwrap();
            prop_assert_eq!(regions[0].col_start, 0);
            prop_assert_eq!(regions.last().unwrap().col_end, counts.len() - 1);
            for pair in regions.windows(2) {
                prop_assert_eq!(pair[0].col_end + 1, pair[1].col_start);
            }
            let again = char_region_segment(&img.as_view(), font, slack, 0.1).unwrap();
            prop_assert_eq!(regions, again);
        }
    }
}
