//! Render lines of text as a synthetic block-glyph page.
//!
//! cargo run --example render_page -- out.pgm 60 "the quick fox" "jumps"

use wordspot::synth::render_text;
use wordspot::{binary_to_gray, write_gray};

fn main() {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let [out, font, lines @ ..] = args.as_slice() else {
        eprintln!("usage: render_page OUT.pgm FONT_SIZE LINE...");
        std::process::exit(1);
    };
    let font: usize = font.parse().expect("font size must be an integer");
    let lines: Vec<&str> = lines.iter().map(String::as_str).collect();
    let page = render_text(&lines, font, font).expect("text does not render");
    std::fs::write(out, write_gray(&binary_to_gray(&page.image))).expect("cannot write output");
    for w in &page.words {
        println!("{} {}", w.text, w.bbox);
    }
}
