use std::collections::{BTreeMap, HashSet};
use std::fmt::Display;
use std::io::{self, BufRead, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{ArgGroup, Args, Parser, Subcommand, ValueEnum};
use wordspot::image_io::DEFAULT_THRESHOLD_FRACTION;
use wordspot::index::escape_field;
use wordspot::query::{fill_wsts, DEFAULT_CHAR_WIDTH, DEFAULT_THRESHOLD};
use wordspot::{
    binarize, build_index, column_profile, draw_border, estimate_zones, load_image, row_profile, search, segment_page,
    word_to_wst, write_gray, BinaryImage, DiskPages, Error, IndexPage, LineBand, SearchParams, SegmentParams,
    ShapeParams, SizeClass, WordBox, WordIndex,
};

const BORDER: usize = 2;

#[derive(Parser)]
#[command(name = "wordspot", version, about = "Search scanned handwriting for words without OCR")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Segment page images into words and write an index.
    Index {
        /// NetPBM page images (P1-P6).
        #[arg(required = true)]
        images: Vec<PathBuf>,
        /// Reference font size K in pixels.
        #[arg(long, default_value_t = wordspot::index::DEFAULT_REF_FONT)]
        ref_font: u32,
        /// Largest intra-word gap as a fraction of line height.
        #[arg(long, default_value_t = 0.2)]
        gap_factor: f64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Look up words by text.
    #[command(group(ArgGroup::new("source").required(true).args(["text", "stdin"])))]
    Query {
        index: PathBuf,
        text: Option<String>,
        /// Read one query per line from standard input.
        #[arg(long)]
        stdin: bool,
        #[command(flatten)]
        search: SearchArgs,
        /// Write matched pages with boxed matches as PGM.
        #[arg(long, value_name = "OUT.pgm")]
        annotate: Option<PathBuf>,
    },
    /// Query and write matched pages with boxed matches.
    Annotate {
        index: PathBuf,
        text: String,
        #[command(flatten)]
        search: SearchArgs,
        #[arg(long, value_name = "OUT.pgm")]
        out: PathBuf,
    },
    /// Print intermediate results for an image or index.
    Inspect {
        /// A NetPBM image or an index file.
        input: PathBuf,
        #[arg(long, value_enum)]
        what: What,
        #[arg(long, default_value_t = 0.2)]
        gap_factor: f64,
        #[command(flatten)]
        shape: ShapeArgs,
    },
}

#[derive(Args, Clone, Copy)]
struct SearchArgs {
    /// Largest accepted edit distance.
    #[arg(long, default_value_t = DEFAULT_THRESHOLD)]
    threshold: f64,
    /// Pixels per character at the reference font size.
    #[arg(long, default_value_t = DEFAULT_CHAR_WIDTH)]
    char_width: u64,
    #[command(flatten)]
    shape: ShapeArgs,
}

#[derive(Args, Clone, Copy)]
struct ShapeArgs {
    /// Columns within this many ink pixels of the minimum count as valleys.
    #[arg(long, default_value_t = 1)]
    valley_slack: u32,
    /// Rows with at least this fraction of the peak count form the body band.
    #[arg(long, default_value_t = 0.5)]
    zone_fraction: f64,
}

impl ShapeArgs {
    fn params(self) -> ShapeParams {
        ShapeParams { valley_slack: self.valley_slack, zone_fraction: self.zone_fraction, ..ShapeParams::default() }
    }
}

impl SearchArgs {
    fn params(self) -> SearchParams {
        SearchParams {
            threshold: self.threshold,
            char_width: self.char_width,
            shape: self.shape.params(),
            ..SearchParams::default()
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum What {
    Rows,
    Cols,
    Lines,
    Words,
    Zones,
    Wst,
}

/// An error with the exit status it maps to.
struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn usage(message: impl Display) -> Self {
        Self { code: 1, message: message.to_string() }
    }

    fn io(path: &Path, err: io::Error) -> Self {
        Self { code: 3, message: format!("{}: {err}", path.display()) }
    }

    fn from_lib(err: Error, context: Option<&Path>) -> Self {
        let code = match err {
            Error::InvalidArgument(_) | Error::NoInk => 1,
            Error::ImageParse { .. } | Error::IndexParse { .. } => 2,
            Error::Io { .. } | Error::MissingPage { .. } => 3,
            Error::UnsupportedChar { .. } => 4,
        };
        let message = match context {
            Some(p) => format!("{}: {err}", p.display()),
            None => err.to_string(),
        };
        Self { code, message }
    }
}

impl From<Error> for Failure {
    fn from(err: Error) -> Self {
        Failure::from_lib(err, None)
    }
}

impl From<io::Error> for Failure {
    fn from(err: io::Error) -> Self {
        Self { code: 3, message: err.to_string() }
    }
}

type CliResult<T = ()> = Result<T, Failure>;

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("wordspot: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}

fn run(command: Command) -> CliResult {
    let stdout = io::stdout();
    let mut out = BufWriter::new(stdout.lock());
    let result = match command {
        Command::Index { images, ref_font, gap_factor, out: dest } => {
            cmd_index(&images, ref_font, gap_factor, &dest, &mut out)
        }
        Command::Query { index, text, stdin, search, annotate } => {
            let queries = if stdin { None } else { text };
            cmd_query(&index, queries, search.params(), annotate.as_deref(), &mut out)
        }
        Command::Annotate { index, text, search, out: dest } => {
            cmd_query(&index, Some(text), search.params(), Some(&dest), &mut out)
        }
        Command::Inspect { input, what, gap_factor, shape } => {
            cmd_inspect(&input, what, gap_factor, shape.params(), &mut out)
        }
    };
    out.flush()?;
    result
}

fn read_page(path: &Path) -> CliResult<wordspot::GrayImage> {
    let bytes = std::fs::read(path).map_err(|e| Failure::io(path, e))?;
    load_image(&bytes).map_err(|e| Failure::from_lib(e, Some(path)))
}

fn read_index(path: &Path) -> CliResult<WordIndex> {
    let text = std::fs::read_to_string(path).map_err(|e| match e.kind() {
        io::ErrorKind::InvalidData => Failure { code: 2, message: format!("{}: not a text index", path.display()) },
        _ => Failure::io(path, e),
    })?;
    WordIndex::load(&text).map_err(|e| Failure::from_lib(e, Some(path)))
}

/// Write `bytes` to `dest` through a temporary file in the same directory.
fn write_atomic(dest: &Path, bytes: &[u8]) -> CliResult {
    let dir = match dest.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(|e| Failure::io(dest, e))?;
    tmp.write_all(bytes).map_err(|e| Failure::io(dest, e))?;
    tmp.persist(dest).map_err(|e| Failure::io(dest, e.error))?;
    Ok(())
}

fn cmd_index(images: &[PathBuf], ref_font: u32, gap_factor: f64, dest: &Path, out: &mut impl Write) -> CliResult {
    let segment = SegmentParams { gap_factor, ..SegmentParams::default() };
    let mut taken = HashSet::new();
    let mut pages: Vec<(String, String, BinaryImage)> = Vec::with_capacity(images.len());
    for path in images {
        let page = binarize(&read_page(path)?, DEFAULT_THRESHOLD_FRACTION)?;
        let stem = path
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .filter(|s| !s.is_empty())
            .unwrap_or_else(|| "page".into());
        let mut doc_id = stem.clone();
        let mut n = 2;
        while !taken.insert(doc_id.clone()) {
            doc_id = format!("{stem}-{n}");
            n += 1;
        }
        let stored = std::fs::canonicalize(path).unwrap_or_else(|_| path.clone());
        pages.push((doc_id, stored.to_string_lossy().into_owned(), page));
    }
    let refs: Vec<IndexPage> = pages.iter().map(|(doc_id, path, image)| IndexPage { doc_id, path, image }).collect();
    let idx = build_index(&refs, ref_font, &segment)?;
    write_atomic(dest, idx.save().as_bytes())?;

    let counts = idx.class_counts();
    for class in SizeClass::ALL {
        writeln!(out, "{} {}", class.code(), counts.get(&class).copied().unwrap_or(0))?;
    }
    writeln!(out, "total {}", idx.len())?;
    Ok(())
}

fn cmd_query(
    index: &Path,
    text: Option<String>,
    params: SearchParams,
    annotate: Option<&Path>,
    out: &mut impl Write,
) -> CliResult {
    params.validate()?;
    let idx = read_index(index)?;
    let pages = DiskPages::for_index(&idx);
    let mut boxes: BTreeMap<String, Vec<WordBox>> = BTreeMap::new();

    let mut run_one = |q: &str, out: &mut dyn Write| -> CliResult {
        let results = search(&idx, &pages, q, &params)?;
        for m in &results {
            writeln!(out, "{m}")?;
            boxes.entry(m.record.doc_id.clone()).or_default().push(m.record.bbox);
        }
        eprintln!("{} match{} for {q:?}", results.len(), if results.len() == 1 { "" } else { "es" });
        Ok(())
    };

    match text {
        Some(q) => run_one(&q, out)?,
        None => {
            for line in io::stdin().lock().lines() {
                let line = line?;
                let q = line.trim_end_matches('\r');
                if q.is_empty() {
                    continue;
                }
                writeln!(out, "Q {q}")?;
                let done = run_one(q, out);
                out.flush()?;
                done?;
            }
        }
    }

    if let Some(dest) = annotate {
        write_annotations(&idx, &boxes, dest)?;
    }
    Ok(())
}

/// One grayscale copy per matched page. With several pages the document id
/// is appended to the file stem.
fn write_annotations(idx: &WordIndex, boxes: &BTreeMap<String, Vec<WordBox>>, dest: &Path) -> CliResult {
    if boxes.is_empty() {
        eprintln!("no matches, nothing annotated");
        return Ok(());
    }
    for (doc_id, doc_boxes) in boxes {
        let doc = idx.doc(doc_id).ok_or_else(|| Failure::usage(format!("unknown document {doc_id}")))?;
        let source = Path::new(&doc.path);
        let mut page = read_page(source).map_err(|f| Failure { code: 3, ..f })?.to_8bit();
        for &b in doc_boxes {
            draw_border(&mut page, b, BORDER, 0);
        }
        let target = if boxes.len() == 1 { dest.to_path_buf() } else { suffixed(dest, doc_id) };
        write_atomic(&target, &write_gray(&page))?;
        eprintln!("annotated {doc_id} -> {}", target.display());
    }
    Ok(())
}

fn suffixed(dest: &Path, doc_id: &str) -> PathBuf {
    let stem = dest.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    let safe: String = doc_id.chars().map(|c| if c.is_alphanumeric() || "-_.".contains(c) { c } else { '_' }).collect();
    let name = match dest.extension() {
        Some(ext) => format!("{stem}-{safe}.{}", ext.to_string_lossy()),
        None => format!("{stem}-{safe}"),
    };
    dest.with_file_name(name)
}

fn is_netpbm(bytes: &[u8]) -> bool {
    matches!(bytes, [b'P', b'1'..=b'6', ..])
}

fn cmd_inspect(input: &Path, what: What, gap_factor: f64, shape: ShapeParams, out: &mut impl Write) -> CliResult {
    shape.validate()?;
    let segment = SegmentParams { gap_factor, ..SegmentParams::default() };
    let bytes = std::fs::read(input).map_err(|e| Failure::io(input, e))?;
    if !is_netpbm(&bytes) {
        return inspect_index(input, what, SearchParams { shape, segment, ..SearchParams::default() }, out);
    }
    let gray = load_image(&bytes).map_err(|e| Failure::from_lib(e, Some(input)))?;
    let page = binarize(&gray, DEFAULT_THRESHOLD_FRACTION)?;
    match what {
        What::Rows => writeln!(out, "{}", row_profile(&page))?,
        What::Cols => {
            if page.height() == 0 {
                writeln!(out)?;
            } else {
                writeln!(out, "{}", column_profile(&page, LineBand::new(0, page.height() - 1))?)?;
            }
        }
        What::Lines => {
            for line in segment_page(&page, &segment)? {
                writeln!(out, "{} {}", line.band.row_start, line.band.row_end)?;
            }
        }
        What::Words => {
            for line in segment_page(&page, &segment)? {
                for w in &line.words {
                    writeln!(out, "{w}")?;
                }
            }
        }
        What::Zones => {
            for line in segment_page(&page, &segment)? {
                let z = estimate_zones(&page.as_view(), line.band, shape.zone_fraction)?;
                writeln!(out, "{} {} {} {}", line.band.row_start, line.band.row_end, z.body_top, z.body_bottom)?;
            }
        }
        What::Wst => {
            for line in segment_page(&page, &segment)? {
                for &w in &line.words {
                    writeln!(out, "{}", word_to_wst(&page, w, line.band, &shape)?)?;
                }
            }
        }
    }
    Ok(())
}

fn inspect_index(input: &Path, what: What, params: SearchParams, out: &mut impl Write) -> CliResult {
    let idx = read_index(input)?;
    match what {
        What::Words => {
            for r in idx.records() {
                let (doc, line, word) = r.key();
                let doc = escape_field(doc);
                writeln!(out, "{doc} {line} {word} {}", r.bbox)?;
            }
        }
        What::Wst => {
            let all: Vec<_> = idx.records().iter().collect();
            fill_wsts(&all, &DiskPages::for_index(&idx), &params)?;
            for r in &all {
                let (doc, line, word) = r.key();
                let doc = escape_field(doc);
                let wst = r.wst().map(ToString::to_string).unwrap_or_default();
                writeln!(out, "{doc} {line} {word} {wst}")?;
            }
        }
        _ => return Err(Failure::usage("rows, cols, lines and zones need an image, not an index")),
    }
    Ok(())
}
