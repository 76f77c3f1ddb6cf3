//! Size-classified index of segmented words and its text file format.
//!
//! Word lengths are normalized to a reference font height `K` so that words
//! written at different sizes can be compared, then bucketed into five size
//! classes. The on-disk format is line oriented:
//!
//! ```text
//! WSIDX 1
//! K <ref_font_pixels>
//! DOC <doc_id> <path> <width> <height>
//! W <doc_id> <line_idx> <word_idx> <x1> <y1> <x2> <y2> <H> <L> <Lnorm> <class> <wst>
//! ```

use std::collections::{BTreeMap, HashSet};
use std::fmt::{self, Write as _};
use std::sync::OnceLock;

use percent_encoding::{percent_decode_str, utf8_percent_encode, AsciiSet, CONTROLS};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::image_io::BinaryImage;
use crate::segment::{segment_page, SegmentParams, WordBox};
use crate::shape::Wst;

pub const FORMAT_VERSION: u32 = 1;
pub const DEFAULT_REF_FONT: u32 = 60;

/// Bytes escaped in doc ids and paths.
const FIELD_ESCAPES: &AsciiSet = &CONTROLS.add(b' ').add(b'%');

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum SizeClass {
    VerySmall,
    Small,
    Medium,
    Large,
    VeryLarge,
}

impl SizeClass {
    pub const ALL: [SizeClass; 5] =
        [SizeClass::VerySmall, SizeClass::Small, SizeClass::Medium, SizeClass::Large, SizeClass::VeryLarge];

    /// Half-open pixel range `[lo, hi)` of normalized lengths; `None` is unbounded.
    pub fn range(self) -> (u64, Option<u64>) {
        match self {
            SizeClass::VerySmall => (0, Some(80)),
            SizeClass::Small => (80, Some(240)),
            SizeClass::Medium => (240, Some(320)),
            SizeClass::Large => (320, Some(480)),
            SizeClass::VeryLarge => (480, None),
        }
    }

    pub fn code(self) -> &'static str {
        match self {
            SizeClass::VerySmall => "VS",
            SizeClass::Small => "S",
            SizeClass::Medium => "M",
            SizeClass::Large => "L",
            SizeClass::VeryLarge => "VL",
        }
    }

    pub fn from_code(code: &str) -> Option<Self> {
        SizeClass::ALL.into_iter().find(|c| c.code() == code)
    }

    /// Whether any length in `lo..=hi` falls in this class.
    pub fn intersects(self, lo: u64, hi: u64) -> bool {
        let (start, end) = self.range();
        hi >= start && end.is_none_or(|end| lo < end)
    }
}

impl fmt::Display for SizeClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.code())
    }
}

/// `round(K * L / H)`, rounding halves up, in exact integer arithmetic.
pub fn normalize_length(length: u64, height: u64, ref_font: u64) -> Result<u64> {
    if height == 0 {
        return Err(Error::arg("word height must be at least 1"));
    }
    if ref_font == 0 {
        return Err(Error::arg("reference font size must be at least 1"));
    }
    let num = u128::from(ref_font) * u128::from(length);
    let h = u128::from(height);
    Ok(((2 * num + h) / (2 * h)) as u64)
}

pub fn classify_size(norm_length: u64) -> SizeClass {
    match norm_length {
        0..=79 => SizeClass::VerySmall,
        80..=239 => SizeClass::Small,
        240..=319 => SizeClass::Medium,
        320..=479 => SizeClass::Large,
        _ => SizeClass::VeryLarge,
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DocEntry {
    pub doc_id: String,
    pub path: String,
    pub width: usize,
    pub height: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WordRecord {
    pub doc_id: String,
    pub line_idx: usize,
    pub word_idx: usize,
    pub bbox: WordBox,
    /// Box height in pixels, `y2 - y1 + 1`.
    pub height: u64,
    /// Box width in pixels, `x2 - x1 + 1`.
    pub length: u64,
    pub norm_length: u64,
    pub size_class: SizeClass,
    wst: OnceLock<Wst>,
}

impl WordRecord {
    pub fn new(
        doc_id: impl Into<String>,
        line_idx: usize,
        word_idx: usize,
        bbox: WordBox,
        ref_font: u32,
    ) -> Result<Self> {
        if bbox.x1 > bbox.x2 || bbox.y1 > bbox.y2 {
            return Err(Error::arg(format!("inverted box {bbox}")));
        }
        let height = bbox.height() as u64;
        let length = bbox.width() as u64;
        let norm_length = normalize_length(length, height, u64::from(ref_font))?;
        Ok(Self {
            doc_id: doc_id.into(),
            line_idx,
            word_idx,
            bbox,
            height,
            length,
            norm_length,
            size_class: classify_size(norm_length),
            wst: OnceLock::new(),
        })
    }

    pub fn with_wst(self, wst: Wst) -> Self {
        let _ = self.wst.set(wst);
        self
    }

    /// Cached shape token, if computed.
    pub fn wst(&self) -> Option<&Wst> {
        self.wst.get()
    }

    /// Cache a shape token. The first write wins; later writes are ignored.
    pub fn cache_wst(&self, wst: Wst) -> &Wst {
        self.wst.get_or_init(|| wst)
    }

    pub fn key(&self) -> (&str, usize, usize) {
        (&self.doc_id, self.line_idx, self.word_idx)
    }
}

/// All words of a document set, bucketed by size class.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WordIndex {
    ref_font: u32,
    docs: Vec<DocEntry>,
    records: Vec<WordRecord>,
    buckets: BTreeMap<SizeClass, Vec<usize>>,
}

impl WordIndex {
    /// Assemble an index, checking that doc ids and word keys are unique and
    /// every record belongs to a listed document.
    pub fn from_parts(ref_font: u32, docs: Vec<DocEntry>, records: Vec<WordRecord>) -> Result<Self> {
        if ref_font == 0 {
            return Err(Error::arg("reference font size must be at least 1"));
        }
        let mut ids = HashSet::new();
        for d in &docs {
            check_field(&d.doc_id)?;
            if !ids.insert(d.doc_id.as_str()) {
                return Err(Error::arg(format!("duplicate document id {:?}", d.doc_id)));
            }
        }
        let mut keys = HashSet::new();
        for r in &records {
            if !ids.contains(r.doc_id.as_str()) {
                return Err(Error::arg(format!("record refers to unknown document {:?}", r.doc_id)));
            }
            if !keys.insert(r.key()) {
                return Err(Error::arg(format!("duplicate word {} {} {}", r.doc_id, r.line_idx, r.word_idx)));
            }
        }
        let mut buckets: BTreeMap<SizeClass, Vec<usize>> = BTreeMap::new();
        for (i, r) in records.iter().enumerate() {
            buckets.entry(r.size_class).or_default().push(i);
        }
        Ok(Self { ref_font, docs, records, buckets })
    }

    pub fn ref_font(&self) -> u32 {
        self.ref_font
    }

    pub fn docs(&self) -> &[DocEntry] {
        &self.docs
    }

    pub fn doc(&self, doc_id: &str) -> Option<&DocEntry> {
        self.docs.iter().find(|d| d.doc_id == doc_id)
    }

    pub fn records(&self) -> &[WordRecord] {
        &self.records
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    /// Records of one size class, in index order.
    pub fn bucket(&self, class: SizeClass) -> impl Iterator<Item = &WordRecord> + '_ {
        self.buckets.get(&class).into_iter().flatten().map(move |&i| &self.records[i])
    }

    pub(crate) fn bucket_positions(&self, class: SizeClass) -> &[usize] {
        self.buckets.get(&class).map_or(&[], Vec::as_slice)
    }

    pub fn class_counts(&self) -> BTreeMap<SizeClass, usize> {
        SizeClass::ALL.into_iter().map(|c| (c, self.bucket_positions(c).len())).collect()
    }

    /// Serialize to the text index format.
    pub fn save(&self) -> String {
        let mut out = format!("WSIDX {FORMAT_VERSION}\nK {}\n", self.ref_font);
        for d in &self.docs {
            let _ = writeln!(out, "DOC {} {} {} {}", escape_field(&d.doc_id), escape_field(&d.path), d.width, d.height);
        }
        for r in &self.records {
            let b = r.bbox;
            let _ = writeln!(
                out,
                "W {} {} {} {} {} {} {} {} {} {} {} {}",
                escape_field(&r.doc_id),
                r.line_idx,
                r.word_idx,
                b.x1,
                b.y1,
                b.x2,
                b.y2,
                r.height,
                r.length,
                r.norm_length,
                r.size_class,
                r.wst().map_or_else(|| "-".to_string(), Wst::to_string)
            );
        }
        out
    }

    /// Parse the text index format. Errors carry 1-based line numbers.
    pub fn load(text: &str) -> Result<Self> {
        let body = text.strip_suffix('\n').unwrap_or(text);
        let mut lines = body.split('\n').enumerate().map(|(i, l)| (i + 1, l));

        match lines.next() {
            Some((_, "WSIDX 1")) => {}
            Some((n, l)) if l.starts_with("WSIDX ") => {
                return Err(Error::index(n, format!("unsupported index version {:?}", &l[6..])))
            }
            Some((n, _)) => return Err(Error::index(n, "missing WSIDX header")),
            None => return Err(Error::index(1, "empty index")),
        }
        let ref_font = match lines.next() {
            Some((n, l)) => {
                let f: Vec<&str> = l.split(' ').collect();
                match f.as_slice() {
                    ["K", k] => match k.parse::<u32>() {
                        Ok(k) if k >= 1 => k,
                        _ => return Err(Error::index(n, format!("bad reference font size {k:?}"))),
                    },
                    _ => return Err(Error::index(n, "expected `K <ref_font_pixels>`")),
                }
            }
            None => return Err(Error::index(2, "missing K line")),
        };

        let mut docs = Vec::new();
        let mut doc_ids = HashSet::new();
        let mut records = Vec::new();
        let mut keys = HashSet::new();
        for (n, line) in lines {
            if line.is_empty() {
                return Err(Error::index(n, "empty line"));
            }
            let fields: Vec<&str> = line.split(' ').collect();
            match fields[0] {
                "DOC" => {
                    let doc = parse_doc(&fields).map_err(|m| Error::index(n, m))?;
                    if !doc_ids.insert(doc.doc_id.clone()) {
                        return Err(Error::index(n, format!("duplicate document {:?}", doc.doc_id)));
                    }
                    docs.push(doc);
                }
                "W" => {
                    let rec = parse_record(&fields, ref_font).map_err(|m| Error::index(n, m))?;
                    if !doc_ids.contains(&rec.doc_id) {
                        return Err(Error::index(n, format!("word refers to undeclared document {:?}", rec.doc_id)));
                    }
                    let key = (rec.doc_id.clone(), rec.line_idx, rec.word_idx);
                    if !keys.insert(key) {
                        return Err(Error::index(
                            n,
                            format!("duplicate word {} {} {}", rec.doc_id, rec.line_idx, rec.word_idx),
                        ));
                    }
                    records.push(rec);
                }
                other => return Err(Error::index(n, format!("unknown record type {other:?}"))),
            }
        }
        Self::from_parts(ref_font, docs, records)
    }
}

/// One page to index.
#[derive(Debug, Clone, Copy)]
pub struct IndexPage<'a> {
    pub doc_id: &'a str,
    pub path: &'a str,
    pub image: &'a BinaryImage,
}

/// Segment every page and record each word with its normalized length and
/// size class. Shape tokens are left uncached. Pages are segmented in
/// parallel; record order follows page, line and word order.
pub fn build_index(pages: &[IndexPage<'_>], ref_font: u32, params: &SegmentParams) -> Result<WordIndex> {
    if ref_font == 0 {
        return Err(Error::arg("reference font size must be at least 1"));
    }
    let per_page: Vec<Vec<WordRecord>> = pages
        .par_iter()
        .map(|page| {
            let lines = segment_page(page.image, params)?;
            let mut out = Vec::new();
            for (line_idx, line) in lines.iter().enumerate() {
                for (word_idx, &bbox) in line.words.iter().enumerate() {
                    out.push(WordRecord::new(page.doc_id, line_idx, word_idx, bbox, ref_font)?);
                }
            }
            Ok(out)
        })
        .collect::<Result<_>>()?;
    let docs = pages
        .iter()
        .map(|p| DocEntry {
            doc_id: p.doc_id.to_string(),
            path: p.path.to_string(),
            width: p.image.width(),
            height: p.image.height(),
        })
        .collect();
    WordIndex::from_parts(ref_font, docs, per_page.into_iter().flatten().collect())
}

fn check_field(s: &str) -> Result<()> {
    if s.is_empty() {
        return Err(Error::arg("document id must not be empty"));
    }
    Ok(())
}

/// Percent-escape a document id or path for a space-separated line.
pub fn escape_field(s: &str) -> String {
    utf8_percent_encode(s, FIELD_ESCAPES).to_string()
}

fn decode_field(s: &str) -> Result<String, String> {
    if s.is_empty() {
        return Err("empty field".into());
    }
    percent_decode_str(s)
        .decode_utf8()
        .map(|c| c.into_owned())
        .map_err(|_| format!("field {s:?} is not valid percent-encoded UTF-8"))
}

fn num<T: std::str::FromStr>(field: &str, what: &str) -> Result<T, String> {
    // reject signs and other forms `parse` would accept
    if field.is_empty() || !field.bytes().all(|b| b.is_ascii_digit()) {
        return Err(format!("{what} {field:?} is not a non-negative integer"));
    }
    field.parse().map_err(|_| format!("{what} {field:?} out of range"))
}

fn parse_doc(f: &[&str]) -> Result<DocEntry, String> {
    if f.len() != 5 {
        return Err(format!("DOC line needs 5 fields, found {}", f.len()));
    }
    let doc = DocEntry {
        doc_id: decode_field(f[1])?,
        path: decode_field(f[2])?,
        width: num(f[3], "width")?,
        height: num(f[4], "height")?,
    };
    if doc.width == 0 || doc.height == 0 {
        return Err("document dimensions must be non-zero".into());
    }
    Ok(doc)
}

fn parse_record(f: &[&str], ref_font: u32) -> Result<WordRecord, String> {
    if f.len() != 13 {
        return Err(format!("W line needs 13 fields, found {}", f.len()));
    }
    let doc_id = decode_field(f[1])?;
    let line_idx = num(f[2], "line index")?;
    let word_idx = num(f[3], "word index")?;
    let bbox = WordBox { x1: num(f[4], "x1")?, y1: num(f[5], "y1")?, x2: num(f[6], "x2")?, y2: num(f[7], "y2")? };
    if bbox.x1 > bbox.x2 || bbox.y1 > bbox.y2 {
        return Err(format!("inverted box {bbox}"));
    }
    let height: u64 = num(f[8], "H")?;
    let length: u64 = num(f[9], "L")?;
    let norm: u64 = num(f[10], "Lnorm")?;
    let class = SizeClass::from_code(f[11]).ok_or_else(|| format!("unknown size class {:?}", f[11]))?;
    let rec = WordRecord::new(doc_id, line_idx, word_idx, bbox, ref_font).map_err(|e| e.to_string())?;
    if rec.height != height || rec.length != length {
        return Err(format!("H/L {height}/{length} disagree with box {bbox}"));
    }
    if rec.norm_length != norm {
        return Err(format!("Lnorm {norm} should be {}", rec.norm_length));
    }
    if rec.size_class != class {
        return Err(format!("class {class} should be {}", rec.size_class));
    }
    Ok(match f[12] {
        "-" => rec,
        w => rec.with_wst(w.parse().map_err(|e: Error| format!("bad shape token: {e}"))?),
    })
}
