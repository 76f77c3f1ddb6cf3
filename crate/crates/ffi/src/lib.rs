//! C ABI for the wordspot engine.
//!
//! Every function returns a [`WsStatus`]. On failure a message is available
//! from [`ws_last_error`] on the same thread until the next call. Handles are
//! opaque and must be released with their matching `_free` function. Strings
//! returned through out-parameters are owned by the caller and released with
//! [`ws_string_free`].

use std::cell::RefCell;
use std::collections::HashMap;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;
use std::sync::Arc;

use wordspot::index::DEFAULT_REF_FONT;
use wordspot::{
    binarize, build_index, levenshtein, load_image, query_to_wst, search, BinaryImage, DiskPages, Error, IndexPage,
    PageSource, SearchParams, SegmentParams, WordIndex,
};

/// Result code of every call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WsStatus {
    Ok = 0,
    InvalidArgument = 1,
    ParseError = 2,
    IoError = 3,
    UnsupportedQuery = 4,
    NoInk = 5,
    NullPointer = 6,
    /// No index has been built or loaded yet.
    NoIndex = 7,
    Panic = 8,
}

/// One ranked match. Coordinates are inclusive pixel positions.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct WsMatch {
    pub distance: u32,
    pub line_idx: u32,
    pub word_idx: u32,
    pub x1: u32,
    pub y1: u32,
    pub x2: u32,
    pub y2: u32,
}

/// Pages plus the index built from them or loaded from text.
pub struct WsEngine {
    ref_font: u32,
    pages: Vec<(String, String, Arc<BinaryImage>)>,
    index: Option<WordIndex>,
}

/// Results of one search.
pub struct WsResults {
    matches: Vec<WsMatch>,
    doc_ids: Vec<CString>,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

struct Failure(WsStatus, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let status = match e {
            Error::InvalidArgument(_) => WsStatus::InvalidArgument,
            Error::ImageParse { .. } | Error::IndexParse { .. } => WsStatus::ParseError,
            Error::Io { .. } | Error::MissingPage { .. } => WsStatus::IoError,
            Error::UnsupportedChar { .. } => WsStatus::UnsupportedQuery,
            Error::NoInk => WsStatus::NoInk,
        };
        Failure(status, e.to_string())
    }
}

fn set_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn guard(f: impl FnOnce() -> Result<(), Failure>) -> WsStatus {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => WsStatus::Ok,
        Ok(Err(Failure(status, msg))) => {
            set_error(&msg);
            status
        }
        Err(_) => {
            set_error("internal panic");
            WsStatus::Panic
        }
    }
}

fn null(what: &str) -> Failure {
    Failure(WsStatus::NullPointer, format!("{what} is null"))
}

unsafe fn str_arg<'a>(p: *const c_char, what: &str) -> Result<&'a str, Failure> {
    if p.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(p).to_str().map_err(|_| Failure(WsStatus::InvalidArgument, format!("{what} is not UTF-8")))
}

unsafe fn out_arg<'a, T>(p: *mut T, what: &str) -> Result<&'a mut T, Failure> {
    p.as_mut().ok_or_else(|| null(what))
}

fn to_c(s: String) -> Result<*mut c_char, Failure> {
    CString::new(s).map(CString::into_raw).map_err(|_| Failure(WsStatus::InvalidArgument, "string contains NUL".into()))
}

/// Message for the last failed call on this thread, or null. Valid until the
/// next call on this thread.
#[no_mangle]
pub extern "C" fn ws_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// # Safety
/// `s` must come from this library or be null.
#[no_mangle]
pub unsafe extern "C" fn ws_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Shape token for query text, e.g. "the" gives "AAxx".
///
/// # Safety
/// `text` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ws_query_to_wst(text: *const c_char, out: *mut *mut c_char) -> WsStatus {
    guard(|| {
        let text = str_arg(text, "text")?;
        let out = out_arg(out, "out")?;
        *out = to_c(query_to_wst(text)?.to_string())?;
        Ok(())
    })
}

/// Edit distance between two byte strings.
///
/// # Safety
/// `a` and `b` must be NUL-terminated; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ws_levenshtein(a: *const c_char, b: *const c_char, out: *mut usize) -> WsStatus {
    guard(|| {
        if a.is_null() || b.is_null() {
            return Err(null("input string"));
        }
        let out = out_arg(out, "out")?;
        *out = levenshtein(CStr::from_ptr(a).to_bytes(), CStr::from_ptr(b).to_bytes());
        Ok(())
    })
}

/// New engine with reference font size `ref_font` (0 selects the default).
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ws_engine_new(ref_font: u32, out: *mut *mut WsEngine) -> WsStatus {
    guard(|| {
        let out = out_arg(out, "out")?;
        let engine = WsEngine {
            ref_font: if ref_font == 0 { DEFAULT_REF_FONT } else { ref_font },
            pages: Vec::new(),
            index: None,
        };
        *out = Box::into_raw(Box::new(engine));
        Ok(())
    })
}

/// # Safety
/// `engine` must come from [`ws_engine_new`] or be null.
#[no_mangle]
pub unsafe extern "C" fn ws_engine_free(engine: *mut WsEngine) {
    if !engine.is_null() {
        drop(Box::from_raw(engine));
    }
}

/// Add a NetPBM page held in memory. `path` is recorded in the index and may
/// be null. Any built index is discarded.
///
/// # Safety
/// `data` must point to `len` readable bytes; strings must be NUL-terminated.
#[no_mangle]
pub unsafe extern "C" fn ws_engine_add_page(
    engine: *mut WsEngine,
    doc_id: *const c_char,
    path: *const c_char,
    data: *const u8,
    len: usize,
) -> WsStatus {
    guard(|| {
        let engine = out_arg(engine, "engine")?;
        let doc_id = str_arg(doc_id, "doc_id")?.to_string();
        let path = if path.is_null() { doc_id.clone() } else { str_arg(path, "path")?.to_string() };
        if data.is_null() {
            return Err(null("data"));
        }
        if engine.pages.iter().any(|(d, _, _)| *d == doc_id) {
            return Err(Failure(WsStatus::InvalidArgument, format!("duplicate document {doc_id}")));
        }
        let bytes = std::slice::from_raw_parts(data, len);
        let page = binarize(&load_image(bytes)?, wordspot::image_io::DEFAULT_THRESHOLD_FRACTION)?;
        engine.pages.push((doc_id, path, Arc::new(page)));
        engine.index = None;
        Ok(())
    })
}

/// Segment all added pages into a fresh index.
///
/// # Safety
/// `engine` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn ws_engine_build(engine: *mut WsEngine) -> WsStatus {
    guard(|| {
        let engine = out_arg(engine, "engine")?;
        let pages: Vec<IndexPage> =
            engine.pages.iter().map(|(doc_id, path, image)| IndexPage { doc_id, path, image }).collect();
        engine.index = Some(build_index(&pages, engine.ref_font, &SegmentParams::default())?);
        Ok(())
    })
}

/// Number of words in the current index.
///
/// # Safety
/// `engine` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ws_engine_word_count(engine: *const WsEngine, out: *mut usize) -> WsStatus {
    guard(|| {
        let engine = engine.as_ref().ok_or_else(|| null("engine"))?;
        let out = out_arg(out, "out")?;
        *out = index_of(engine)?.len();
        Ok(())
    })
}

/// Replace the index with one parsed from text. Pages added in memory are
/// used for documents they cover; others are read from their recorded paths.
///
/// # Safety
/// `engine` must be a live handle; `text` must be NUL-terminated.
#[no_mangle]
pub unsafe extern "C" fn ws_engine_load_index(engine: *mut WsEngine, text: *const c_char) -> WsStatus {
    guard(|| {
        let engine = out_arg(engine, "engine")?;
        let idx = WordIndex::load(str_arg(text, "text")?)?;
        engine.ref_font = idx.ref_font();
        engine.index = Some(idx);
        Ok(())
    })
}

/// Serialize the current index.
///
/// # Safety
/// `engine` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ws_engine_save_index(engine: *const WsEngine, out: *mut *mut c_char) -> WsStatus {
    guard(|| {
        let engine = engine.as_ref().ok_or_else(|| null("engine"))?;
        let out = out_arg(out, "out")?;
        *out = to_c(index_of(engine)?.save())?;
        Ok(())
    })
}

fn index_of(engine: &WsEngine) -> Result<&WordIndex, Failure> {
    engine.index.as_ref().ok_or_else(|| Failure(WsStatus::NoIndex, "no index built or loaded".into()))
}

struct EnginePages<'a> {
    memory: HashMap<&'a str, &'a Arc<BinaryImage>>,
    disk: DiskPages,
}

impl PageSource for EnginePages<'_> {
    fn page(&self, doc_id: &str) -> wordspot::Result<Arc<BinaryImage>> {
        match self.memory.get(doc_id) {
            Some(p) => Ok(Arc::clone(p)),
            None => self.disk.page(doc_id),
        }
    }
}

/// Ranked matches for `query`. A negative `threshold` or zero `char_width`
/// selects the default (2.5 and 40 respectively).
///
/// # Safety
/// `engine` must be a live handle; `query` must be NUL-terminated; `out`
/// must be writable.
#[no_mangle]
pub unsafe extern "C" fn ws_engine_search(
    engine: *const WsEngine,
    query: *const c_char,
    threshold: f64,
    char_width: u32,
    out: *mut *mut WsResults,
) -> WsStatus {
    guard(|| {
        let engine = engine.as_ref().ok_or_else(|| null("engine"))?;
        let query = str_arg(query, "query")?;
        let out = out_arg(out, "out")?;
        let idx = index_of(engine)?;
        let mut params = SearchParams::default();
        if threshold >= 0.0 {
            params.threshold = threshold;
        }
        if char_width > 0 {
            params.char_width = u64::from(char_width);
        }
        let pages = EnginePages {
            memory: engine.pages.iter().map(|(d, _, p)| (d.as_str(), p)).collect(),
            disk: DiskPages::for_index(idx),
        };
        let found = search(idx, &pages, query, &params)?;
        let narrow = |v: usize| u32::try_from(v).unwrap_or(u32::MAX);
        let results = WsResults {
            matches: found
                .iter()
                .map(|m| WsMatch {
                    distance: narrow(m.distance),
                    line_idx: narrow(m.record.line_idx),
                    word_idx: narrow(m.record.word_idx),
                    x1: narrow(m.record.bbox.x1),
                    y1: narrow(m.record.bbox.y1),
                    x2: narrow(m.record.bbox.x2),
                    y2: narrow(m.record.bbox.y2),
                })
                .collect(),
            doc_ids: found.iter().map(|m| CString::new(m.record.doc_id.as_str()).unwrap_or_default()).collect(),
        };
        *out = Box::into_raw(Box::new(results));
        Ok(())
    })
}

/// # Safety
/// `results` must be a live handle or null.
#[no_mangle]
pub unsafe extern "C" fn ws_results_len(results: *const WsResults) -> usize {
    results.as_ref().map_or(0, |r| r.matches.len())
}

/// # Safety
/// `results` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ws_results_get(results: *const WsResults, i: usize, out: *mut WsMatch) -> WsStatus {
    guard(|| {
        let results = results.as_ref().ok_or_else(|| null("results"))?;
        let out = out_arg(out, "out")?;
        *out = *results
            .matches
            .get(i)
            .ok_or_else(|| Failure(WsStatus::InvalidArgument, format!("index {i} out of range")))?;
        Ok(())
    })
}

/// Document id of match `i`, or null when out of range. Owned by `results`.
///
/// # Safety
/// `results` must be a live handle or null.
#[no_mangle]
pub unsafe extern "C" fn ws_results_doc_id(results: *const WsResults, i: usize) -> *const c_char {
    results.as_ref().and_then(|r| r.doc_ids.get(i)).map_or(ptr::null(), |c| c.as_ptr())
}

/// # Safety
/// `results` must come from [`ws_engine_search`] or be null.
#[no_mangle]
pub unsafe extern "C" fn ws_results_free(results: *mut WsResults) {
    if !results.is_null() {
        drop(Box::from_raw(results));
    }
}
