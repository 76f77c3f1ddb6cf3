//! Synthetic cursive-like pages built from block glyphs.
//!
//! Each letter is drawn as one to three strokes joined along the baseline by
//! thin connectors. A stroke is a filled x-height block, optionally with a
//! narrower stem reaching into the ascender zone, the descender zone, or
//! both. The glyph table is independent of [`crate::shape::letter_code`] so
//! fixtures drawn here can check the encoder.

use crate::error::{Error, Result};
use crate::image_io::BinaryImage;
use crate::segment::WordBox;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stroke {
    Body,
    Ascender,
    Descender,
    /// Stems above and below, as in a cursive `f`.
    Both,
}

/// Strokes making up one letter.
pub fn glyph(c: char) -> Option<&'static [Stroke]> {
    use Stroke::*;
    Some(match c {
        'f' => &[Both],
        'g' | 'j' | 'p' | 'q' => &[Descender],
        'a' | 'c' | 'e' | 'i' | 'o' | 's' | 'x' | 'z' => &[Body],
        'n' | 'r' | 'u' | 'v' => &[Body, Body],
        'm' | 'w' => &[Body, Body, Body],
        'y' => &[Body, Descender],
        'h' | 'L' => &[Ascender, Body],
        'H' | 'M' | 'N' | 'U' | 'V' | 'W' => &[Ascender, Ascender],
        'b' | 'd' | 'k' | 'l' | 't' => &[Ascender],
        c if c.is_ascii_uppercase() => &[Ascender],
        _ => return None,
    })
}

/// Vertical metrics and spacing derived from a font size (the full height
/// from ascender top to descender bottom).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GlyphStyle {
    pub font_size: usize,
    pub ascender: usize,
    pub descender: usize,
    pub x_height: usize,
    /// Horizontal advance of one letter.
    pub advance: usize,
    /// Connector width between strokes.
    pub joint: usize,
    /// Connector thickness.
    pub joint_thickness: usize,
}

impl GlyphStyle {
    pub fn new(font_size: usize) -> Result<Self> {
        if font_size < 16 {
            return Err(Error::arg("synthetic font size must be at least 16"));
        }
        let f = font_size as f64;
        let ascender = (0.3 * f).round() as usize;
        let descender = (0.3 * f).round() as usize;
        Ok(Self {
            font_size,
            ascender,
            descender,
            x_height: font_size - ascender - descender,
            advance: (2.0 * f / 3.0).round() as usize,
            joint: ((f / 12.0).round() as usize).max(2),
            joint_thickness: ((f / 30.0).round() as usize).max(1),
        })
    }
}

/// How one letter attaches to the next.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Join {
    Connected,
    /// Unjoined, with this many blank columns.
    Gap(usize),
}

/// Width in pixels of `text` drawn with `style` and the given joins.
pub fn word_width(text: &str, style: &GlyphStyle, joins: &[Join]) -> usize {
    let n = text.chars().count();
    if n == 0 {
        return 0;
    }
    let extra: isize = joins
        .iter()
        .take(n - 1)
        .map(|j| match j {
            Join::Connected => 0,
            Join::Gap(g) => *g as isize - style.joint as isize,
        })
        .sum();
    ((n * style.advance - style.joint) as isize + extra).max(0) as usize
}

/// Draw a word with its ascender line at row `top` and left edge at `x`.
/// `joins[i]` controls the link after letter `i`; missing entries are
/// connected. Returns the tight box of the ink drawn.
pub fn draw_word(
    img: &mut BinaryImage,
    text: &str,
    x: usize,
    top: usize,
    style: &GlyphStyle,
    joins: &[Join],
) -> Result<WordBox> {
    let letters: Vec<(char, &[Stroke])> = text
        .chars()
        .map(|c| glyph(c).map(|g| (c, g)).ok_or_else(|| Error::arg(format!("no glyph for {c:?}"))))
        .collect::<Result<_>>()?;
    if letters.is_empty() {
        return Err(Error::arg("empty word"));
    }
    let width = word_width(text, style, joins);
    if x + width > img.width() || top + style.font_size > img.height() {
        return Err(Error::arg(format!("word {text:?} does not fit at ({x}, {top})")));
    }

    let body_top = top + style.ascender;
    let body_bottom = body_top + style.x_height - 1;
    let mut ink = Ink::new(img);
    let mut cursor = x;
    for (li, (_, strokes)) in letters.iter().enumerate() {
        let k = strokes.len();
        let last_letter = li + 1 == letters.len();
        for (si, stroke) in strokes.iter().enumerate() {
            let cell = style.advance * (si + 1) / k - style.advance * si / k;
            let block = cell - style.joint;
            let stem = ((block as f64 / 3.0).round() as usize).max(1);
            ink.fill(cursor, body_top, cursor + block - 1, body_bottom);
            if matches!(stroke, Stroke::Ascender | Stroke::Both) {
                ink.fill(cursor, top, cursor + stem - 1, body_top - 1);
            }
            if matches!(stroke, Stroke::Descender | Stroke::Both) {
                let right = cursor + block - 1;
                ink.fill(right + 1 - stem, body_bottom + 1, right, top + style.font_size - 1);
            }
            cursor += block;
            let last_stroke = si + 1 == k;
            if last_stroke && last_letter {
                break;
            }
            let join = if last_stroke { joins.get(li).copied().unwrap_or(Join::Connected) } else { Join::Connected };
            match join {
                Join::Connected => {
                    ink.fill(cursor, body_bottom + 1 - style.joint_thickness, cursor + style.joint - 1, body_bottom);
                    cursor += style.joint;
                }
                Join::Gap(g) => cursor += g,
            }
        }
    }
    Ok(ink.bbox.expect("words always draw ink"))
}

struct Ink<'a> {
    img: &'a mut BinaryImage,
    bbox: Option<WordBox>,
}

impl<'a> Ink<'a> {
    fn new(img: &'a mut BinaryImage) -> Self {
        Self { img, bbox: None }
    }

    fn fill(&mut self, x1: usize, y1: usize, x2: usize, y2: usize) {
        if x1 > x2 || y1 > y2 {
            return;
        }
        for y in y1..=y2 {
            for x in x1..=x2 {
                self.img.set_ink(x, y, true);
            }
        }
        let b = WordBox { x1, y1, x2, y2 };
        self.bbox = Some(match self.bbox {
            None => b,
            Some(o) => WordBox { x1: o.x1.min(b.x1), y1: o.y1.min(b.y1), x2: o.x2.max(b.x2), y2: o.y2.max(b.y2) },
        });
    }
}

/// One word to place on a line.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WordSpec {
    pub text: String,
    pub joins: Vec<Join>,
    /// Blank columns before this word (ignored for the first word of a line).
    pub space_before: usize,
}

impl WordSpec {
    pub fn new(text: impl Into<String>, space_before: usize) -> Self {
        Self { text: text.into(), joins: Vec::new(), space_before }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LineSpec {
    pub font_size: usize,
    pub indent: usize,
    pub words: Vec<WordSpec>,
    /// Blank rows above this line's ascender line.
    pub space_above: usize,
}

/// A drawn word and where it landed.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PlacedWord {
    pub text: String,
    pub line: usize,
    pub word: usize,
    pub bbox: WordBox,
}

#[derive(Debug, Clone)]
pub struct SyntheticPage {
    pub image: BinaryImage,
    pub words: Vec<PlacedWord>,
}

/// Lay out lines top to bottom on a blank `width` x `height` page.
pub fn render_page(width: usize, height: usize, lines: &[LineSpec]) -> Result<SyntheticPage> {
    let mut image = BinaryImage::blank(width, height)?;
    let mut words = Vec::new();
    let mut y = 0;
    for (li, line) in lines.iter().enumerate() {
        let style = GlyphStyle::new(line.font_size)?;
        y += line.space_above;
        let mut x = line.indent;
        for (wi, spec) in line.words.iter().enumerate() {
            if wi > 0 {
                x += spec.space_before;
            }
            let bbox = draw_word(&mut image, &spec.text, x, y, &style, &spec.joins)?;
            x = bbox.x2 + 1;
            words.push(PlacedWord { text: spec.text.clone(), line: li, word: wi, bbox });
        }
        y += line.font_size;
    }
    Ok(SyntheticPage { image, words })
}

/// Render plain text, one string per line, at a single font size with word
/// spacing of one font size and a blank font size between lines.
pub fn render_text(lines: &[&str], font_size: usize, margin: usize) -> Result<SyntheticPage> {
    let style = GlyphStyle::new(font_size)?;
    let specs: Vec<LineSpec> = lines
        .iter()
        .enumerate()
        .map(|(i, l)| LineSpec {
            font_size,
            indent: margin,
            words: l.split_whitespace().map(|w| WordSpec::new(w, font_size)).collect(),
            space_above: if i == 0 { margin } else { font_size },
        })
        .collect();
    let width = specs
        .iter()
        .map(|l| {
            let words: usize = l.words.iter().map(|w| word_width(&w.text, &style, &[])).sum();
            words + l.words.len().saturating_sub(1) * font_size
        })
        .max()
        .unwrap_or(0)
        + 2 * margin;
    let height = lines.len() * 2 * font_size - font_size + 2 * margin;
    render_page(width.max(1), height.max(1), &specs)
}
