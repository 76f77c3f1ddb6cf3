//! OCR-free word spotting for cursive handwritten page images.
//!
//! Pages are binarized, cut into lines and words with projection profiles,
//! and indexed by normalized word length. A text query is turned into a
//! word shape token over the alphabet `{A, x, g}`; candidate words of similar
//! length are encoded the same way from their pixels and ranked by edit
//! distance.
//!
//! ```no_run
//! use wordspot::{binarize, build_index, load_image, search, IndexPage, MemoryPages, SearchParams, SegmentParams};
//!
//! let bytes = std::fs::read("page.pgm").unwrap();
//! let page = binarize(&load_image(&bytes).unwrap(), 0.5).unwrap();
//! let idx = build_index(
//!     &[IndexPage { doc_id: "page", path: "page.pgm", image: &page }],
//!     60,
//!     &SegmentParams::default(),
//! )
//! .unwrap();
//! let mut pages = MemoryPages::new();
//! pages.insert("page", page);
//! for m in search(&idx, &pages, "transformation", &SearchParams::default()).unwrap() {
//!     println!("{m}");
//! }
//! ```

pub mod error;
pub mod image_io;
pub mod index;
pub mod query;
pub mod segment;
pub mod shape;
pub mod synth;

pub use error::{Error, Result};
pub use image_io::{binarize, binary_to_gray, draw_border, load_image, write_gray, BinaryImage, GrayImage, ImageView};
pub use index::{build_index, classify_size, normalize_length, DocEntry, IndexPage, SizeClass, WordIndex, WordRecord};
pub use query::{levenshtein, search, size_prefilter, DiskPages, MatchResult, MemoryPages, PageSource, SearchParams};
pub use segment::{
    column_profile, row_profile, segment_lines, segment_page, segment_words, Axis, LineBand, Profile, SegmentParams,
    WordBox,
};
pub use shape::{
    char_region_segment, classify_region, estimate_zones, query_to_wst, word_to_wst, Region, ShapeParams, ShapeSymbol,
    Wst, ZoneBands, ZoneScope,
};
