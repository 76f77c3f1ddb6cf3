#![allow(dead_code)]

use rand::rngs::StdRng;
use rand::Rng;
use wordspot::segment::default_noise_threshold;
use wordspot::synth::{glyph, render_page, GlyphStyle, Join, LineSpec, Stroke, SyntheticPage, WordSpec};

pub const TARGETS: [&str; 10] = [
    "transformation",
    "spotting",
    "handwriting",
    "typically",
    "shape",
    "geography",
    "delightful",
    "keyword",
    "position",
    "lexically",
];

pub const SHORT_QUERIES: [&str; 6] = ["dog", "big", "hay", "jolt", "gift", "play"];

pub const DISTRACTORS: [&str; 48] = [
    "document",
    "image",
    "retrieval",
    "query",
    "search",
    "cursive",
    "letters",
    "segment",
    "profile",
    "character",
    "archive",
    "journal",
    "scientific",
    "historical",
    "margin",
    "digital",
    "recognition",
    "optical",
    "threshold",
    "distance",
    "matching",
    "database",
    "reading",
    "written",
    "english",
    "pattern",
    "analysis",
    "vertical",
    "horizontal",
    "baseline",
    "symbol",
    "token",
    "method",
    "results",
    "accuracy",
    "process",
    "images",
    "collection",
    "machine",
    "through",
    "between",
    "several",
    "quickly",
    "people",
    "strong",
    "bag",
    "hot",
    "jog",
];

/// One page holding every target, short query word and distractor once,
/// spread over lines at three font sizes.
pub fn retrieval_corpus() -> SyntheticPage {
    let mut words: Vec<&str> = Vec::new();
    // interleave so targets are not grouped on one line
    let mut d = DISTRACTORS.iter();
    for (i, t) in TARGETS.iter().enumerate() {
        words.extend(d.by_ref().take(4));
        words.push(t);
        if let Some(s) = SHORT_QUERIES.get(i) {
            words.push(s);
        }
    }
    words.extend(d);

    let fonts = [40, 60, 80];
    let width = 2400;
    let margin = 40;
    let mut lines = Vec::new();
    let mut current: Vec<WordSpec> = Vec::new();
    let mut x = margin;
    let mut font = fonts[0];
    for w in words {
        let style = GlyphStyle::new(font).unwrap();
        let ww = wordspot::synth::word_width(w, &style, &[]);
        if !current.is_empty() && x + font + ww > width - margin {
            lines.push(LineSpec {
                font_size: font,
                indent: margin,
                words: std::mem::take(&mut current),
                space_above: if lines.is_empty() { margin } else { font },
            });
            font = fonts[lines.len() % fonts.len()];
            x = margin;
        }
        let style = GlyphStyle::new(font).unwrap();
        let ww = wordspot::synth::word_width(w, &style, &[]);
        x += if current.is_empty() { ww } else { font + ww };
        current.push(WordSpec::new(w, font));
    }
    lines.push(LineSpec { font_size: font, indent: margin, words: current, space_above: font });
    let height = lines.iter().map(|l| l.font_size + l.space_above).sum::<usize>() + margin;
    render_page(width, height, &lines).unwrap()
}

fn has_stroke(text: &str, pred: impl Fn(Stroke) -> bool) -> bool {
    text.chars().any(|c| glyph(c).unwrap().iter().any(|&s| pred(s)))
}

/// Generate one page of random block-glyph words.
///
/// Every line holds 4-8 words at one font size in 20-60 px, separated by
/// more than 0.2 x font size. Some letters are left unjoined with gaps of at
/// most 0.2 x font size. Lines are redrawn until every row of the line
/// carries more ink than the page's default noise floor, so each line's band
/// spans its full font height.
pub fn random_page(rng: &mut StdRng, width: usize, height: usize) -> SyntheticPage {
    const LOWER: &[u8] = b"abcdefghijklmnopqrstuvwxyz";
    let margin = 40;
    let noise = default_noise_threshold(width) as usize;
    let n_lines = rng.gen_range(5..=10);
    let mut lines = Vec::new();
    let mut used = margin;
    for li in 0..n_lines {
        let font = rng.gen_range(20..=60);
        let space_above = if li == 0 { margin } else { rng.gen_range(font / 3..=font) };
        if used + space_above + font + margin > height {
            break;
        }
        let style = GlyphStyle::new(font).unwrap();
        let line = loop {
            let n_words = rng.gen_range(4..=8);
            let spaces: Vec<usize> = (0..n_words).map(|_| rng.gen_range(font / 2..=font)).collect();
            let budget = (width - 2 * margin - spaces[1..].iter().sum::<usize>()) / n_words;
            let max_letters = ((budget + style.joint) / style.advance).clamp(1, 9);
            let words: Vec<WordSpec> = spaces
                .iter()
                .map(|&space| {
                    let n = rng.gen_range(1..=max_letters);
                    let mut text: String = (0..n).map(|_| LOWER[rng.gen_range(0..26)] as char).collect();
                    if rng.gen_bool(0.15) {
                        text = text[..1].to_uppercase() + &text[1..];
                    }
                    let max_gap = (font as f64 * 0.2).floor() as usize;
                    let joins = (1..n)
                        .map(
                            |_| if rng.gen_bool(0.2) { Join::Gap(rng.gen_range(1..=max_gap)) } else { Join::Connected },
                        )
                        .collect::<Vec<_>>();
                    WordSpec { text, joins, space_before: space }
                })
                .collect();
            let spec = LineSpec { font_size: font, indent: margin, words, space_above: 0 };
            let texts: Vec<&str> = spec.words.iter().map(|w| w.text.as_str()).collect();
            let all = texts.concat();
            if !has_stroke(&all, |s| matches!(s, Stroke::Ascender | Stroke::Both))
                || !has_stroke(&all, |s| matches!(s, Stroke::Descender | Stroke::Both))
            {
                continue;
            }
            let probe = render_page(width, font, std::slice::from_ref(&spec));
            let Ok(probe) = probe else { continue };
            let rows = wordspot::row_profile(&probe.image);
            if rows.counts.iter().all(|&c| c as usize > noise) {
                break LineSpec { space_above, ..spec };
            }
        };
        used += space_above + font;
        lines.push(line);
    }
    render_page(width, height, &lines).unwrap()
}
