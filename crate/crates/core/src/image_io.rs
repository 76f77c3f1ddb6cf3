//! NetPBM reading and writing, grayscale conversion and global thresholding.
//!
//! Supported inputs are the six classic NetPBM formats (P1 to P6). Output is
//! always a binary P5 graymap with maxval 255.

use crate::error::{Error, Result};
use crate::segment::WordBox;

/// Default fraction of maxval below which a pixel counts as ink.
pub const DEFAULT_THRESHOLD_FRACTION: f64 = 0.5;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GrayImage {
    width: usize,
    height: usize,
    maxval: u16,
    pixels: Vec<u16>,
}

impl GrayImage {
    pub fn new(width: usize, height: usize, maxval: u16, pixels: Vec<u16>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::arg("image dimensions must be at least 1x1"));
        }
        if maxval == 0 {
            return Err(Error::arg("maxval must be in 1..=65535"));
        }
        if pixels.len() != width * height {
            return Err(Error::arg(format!("expected {} pixels, got {}", width * height, pixels.len())));
        }
        if let Some(v) = pixels.iter().find(|&&v| v > maxval) {
            return Err(Error::arg(format!("pixel value {v} exceeds maxval {maxval}")));
        }
        Ok(Self { width, height, maxval, pixels })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn maxval(&self) -> u16 {
        self.maxval
    }

    pub fn pixels(&self) -> &[u16] {
        &self.pixels
    }

    pub fn get(&self, x: usize, y: usize) -> u16 {
        self.pixels[y * self.width + x]
    }

    pub fn set(&mut self, x: usize, y: usize, value: u16) {
        assert!(value <= self.maxval, "value {value} exceeds maxval");
        self.pixels[y * self.width + x] = value;
    }

    /// Copy rescaled to maxval 255.
    pub fn to_8bit(&self) -> GrayImage {
        if self.maxval == 255 {
            return self.clone();
        }
        let max = u32::from(self.maxval);
        let pixels = self.pixels.iter().map(|&v| ((u32::from(v) * 510 + max) / (2 * max)) as u16).collect();
        GrayImage { width: self.width, height: self.height, maxval: 255, pixels }
    }
}

/// Two-level raster: 0 is ink, 1 is background.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BinaryImage {
    width: usize,
    height: usize,
    bits: Vec<u8>,
}

impl BinaryImage {
    /// An all-background image.
    pub fn blank(width: usize, height: usize) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::arg("image dimensions must be at least 1x1"));
        }
        Ok(Self { width, height, bits: vec![1; width * height] })
    }

    pub fn from_bits(width: usize, height: usize, bits: Vec<u8>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::arg("image dimensions must be at least 1x1"));
        }
        if bits.len() != width * height {
            return Err(Error::arg(format!("expected {} bits, got {}", width * height, bits.len())));
        }
        if bits.iter().any(|&b| b > 1) {
            return Err(Error::arg("bits must be 0 or 1"));
        }
        Ok(Self { width, height, bits })
    }

    /// Parse rows of `#` (ink) and `.` (background). Handy for fixtures.
    pub fn from_ascii(art: &str) -> Result<Self> {
        let rows: Vec<&str> = art.lines().map(str::trim).filter(|l| !l.is_empty()).collect();
        let width = rows.first().map_or(0, |r| r.len());
        let mut bits = Vec::with_capacity(width * rows.len());
        for row in &rows {
            if row.len() != width {
                return Err(Error::arg("ragged ascii art"));
            }
            for c in row.bytes() {
                bits.push(match c {
                    b'#' => 0,
                    b'.' => 1,
                    _ => return Err(Error::arg(format!("unexpected art character {:?}", c as char))),
                });
            }
        }
        Self::from_bits(width, rows.len(), bits)
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn bits(&self) -> &[u8] {
        &self.bits
    }

    #[inline]
    pub fn is_ink(&self, x: usize, y: usize) -> bool {
        self.bits[y * self.width + x] == 0
    }

    pub fn set_ink(&mut self, x: usize, y: usize, ink: bool) {
        self.bits[y * self.width + x] = u8::from(!ink);
    }

    pub fn ink_count(&self) -> usize {
        self.bits.iter().filter(|&&b| b == 0).count()
    }

    #[inline]
    pub(crate) fn row(&self, y: usize) -> &[u8] {
        &self.bits[y * self.width..(y + 1) * self.width]
    }

    /// The whole image as a view.
    pub fn as_view(&self) -> ImageView<'_> {
        ImageView { image: self, bbox: WordBox { x1: 0, y1: 0, x2: self.width - 1, y2: self.height - 1 } }
    }

    /// A rectangular sub-view. Coordinates stay in this image's frame.
    pub fn view(&self, bbox: WordBox) -> Result<ImageView<'_>> {
        if bbox.x1 > bbox.x2 || bbox.y1 > bbox.y2 || bbox.x2 >= self.width || bbox.y2 >= self.height {
            return Err(Error::arg(format!("box {bbox} outside {}x{} image", self.width, self.height)));
        }
        Ok(ImageView { image: self, bbox })
    }
}

/// Borrowed rectangle of a [`BinaryImage`]. All coordinates passed to and
/// returned from a view are in the parent image's frame.
#[derive(Debug, Clone, Copy)]
pub struct ImageView<'a> {
    image: &'a BinaryImage,
    bbox: WordBox,
}

impl<'a> ImageView<'a> {
    pub fn image(&self) -> &'a BinaryImage {
        self.image
    }

    pub fn bbox(&self) -> WordBox {
        self.bbox
    }

    pub fn width(&self) -> usize {
        self.bbox.width()
    }

    pub fn height(&self) -> usize {
        self.bbox.height()
    }

    #[inline]
    pub fn is_ink(&self, x: usize, y: usize) -> bool {
        debug_assert!(self.bbox.contains(x, y));
        self.image.is_ink(x, y)
    }

    /// Ink count per column of the view, indexed from the view's left edge.
    pub fn column_counts(&self) -> Vec<u32> {
        let mut counts = vec![0u32; self.width()];
        for y in self.bbox.y1..=self.bbox.y2 {
            let row = &self.image.row(y)[self.bbox.x1..=self.bbox.x2];
            for (c, &b) in counts.iter_mut().zip(row) {
                *c += u32::from(b == 0);
            }
        }
        counts
    }

    /// Ink count for each row in `rows` (parent frame), restricted to the view's columns.
    pub fn row_counts(&self, rows: std::ops::RangeInclusive<usize>) -> Vec<u32> {
        rows.map(|y| self.image.row(y)[self.bbox.x1..=self.bbox.x2].iter().filter(|&&b| b == 0).count() as u32)
            .collect()
    }
}

/// Parse a NetPBM file (P1 to P6) into a grayscale image.
///
/// Bitmaps map ink (bit 1) to gray 0 and background to gray 1 with maxval 1.
/// Pixmaps are reduced to luma with BT.601 weights, rounded half up.
pub fn load_image(bytes: &[u8]) -> Result<GrayImage> {
    let mut cur = Cursor { bytes, pos: 0 };
    if bytes.len() < 2 || bytes[0] != b'P' {
        return Err(Error::image(0, "missing NetPBM magic number"));
    }
    let kind = bytes[1];
    if !(b'1'..=b'6').contains(&kind) {
        return Err(Error::image(1, format!("unknown magic number P{}", kind as char)));
    }
    cur.pos = 2;
    let (_, width) = cur.header_number("width")?;
    let (_, height) = cur.header_number("height")?;
    if width == 0 || height == 0 {
        return Err(Error::image(cur.pos, "image dimensions must be non-zero"));
    }
    let npix = width
        .checked_mul(height)
        .filter(|&n| n <= (1 << 34))
        .ok_or_else(|| Error::image(cur.pos, "image dimensions too large"))?;
    let maxval = if kind == b'1' || kind == b'4' {
        1
    } else {
        let (at, m) = cur.header_number("maxval")?;
        if m == 0 || m > 65535 {
            return Err(Error::image(at, format!("maxval {m} out of range 1..=65535")));
        }
        m as u16
    };
    let samples_per_pixel = if kind == b'3' || kind == b'6' { 3 } else { 1 };
    let nsamples = npix * samples_per_pixel;

    let samples: Vec<u16> = match kind {
        b'1' => {
            let mut out = Vec::with_capacity(npix);
            while out.len() < npix {
                cur.skip_space_and_comments();
                match cur.next_byte() {
                    Some(b'0') => out.push(0),
                    Some(b'1') => out.push(1),
                    Some(c) => {
                        return Err(Error::image(cur.pos - 1, format!("unexpected byte {c:#04x} in bitmap data")))
                    }
                    None => return Err(Error::image(cur.pos, "truncated pixel data")),
                }
            }
            out
        }
        b'2' | b'3' => {
            let mut out = Vec::with_capacity(nsamples);
            while out.len() < nsamples {
                let at = {
                    cur.skip_space_and_comments();
                    cur.pos
                };
                if cur.pos >= bytes.len() {
                    return Err(Error::image(cur.pos, "truncated pixel data"));
                }
                let v = cur.number()?;
                if v > usize::from(maxval) {
                    return Err(Error::image(at, format!("sample {v} exceeds maxval {maxval}")));
                }
                out.push(v as u16);
            }
            out
        }
        b'4' => {
            cur.single_whitespace()?;
            let stride = width.div_ceil(8);
            let data = cur.take(stride * height)?;
            let mut out = Vec::with_capacity(npix);
            for row in data.chunks_exact(stride) {
                for x in 0..width {
                    out.push(u16::from((row[x / 8] >> (7 - x % 8)) & 1));
                }
            }
            out
        }
        _ => {
            cur.single_whitespace()?;
            let wide = maxval > 255;
            let start = cur.pos;
            let data = cur.take(nsamples * if wide { 2 } else { 1 })?;
            let out: Vec<u16> = if wide {
                data.chunks_exact(2).map(|p| u16::from_be_bytes([p[0], p[1]])).collect()
            } else {
                data.iter().map(|&b| u16::from(b)).collect()
            };
            if let Some(i) = out.iter().position(|&v| v > maxval) {
                let width_bytes = if wide { 2 } else { 1 };
                return Err(Error::image(
                    start + i * width_bytes,
                    format!("sample {} exceeds maxval {maxval}", out[i]),
                ));
            }
            out
        }
    };

    let pixels = match kind {
        // Bitmaps store 1 for ink.
        b'1' | b'4' => samples.into_iter().map(|b| 1 - b).collect(),
        b'3' | b'6' => samples
            .chunks_exact(3)
            .map(|p| {
                let luma = 299 * u64::from(p[0]) + 587 * u64::from(p[1]) + 114 * u64::from(p[2]);
                ((luma + 500) / 1000) as u16
            })
            .collect(),
        _ => samples,
    };
    GrayImage::new(width, height, maxval, pixels)
}

/// Threshold a grayscale image: ink iff `gray < threshold_fraction * maxval`.
pub fn binarize(img: &GrayImage, threshold_fraction: f64) -> Result<BinaryImage> {
    if !(threshold_fraction > 0.0 && threshold_fraction < 1.0) {
        return Err(Error::arg(format!("threshold fraction {threshold_fraction} must lie strictly between 0 and 1")));
    }
    let cut = threshold_fraction * f64::from(img.maxval);
    let bits = img.pixels.iter().map(|&v| u8::from(f64::from(v) >= cut)).collect();
    Ok(BinaryImage { width: img.width, height: img.height, bits })
}

/// Encode as binary P5 with maxval 255, rescaling other maxvals.
pub fn write_gray(img: &GrayImage) -> Vec<u8> {
    let img = img.to_8bit();
    let header = format!("P5\n{} {}\n255\n", img.width, img.height);
    let mut out = Vec::with_capacity(header.len() + img.pixels.len());
    out.extend_from_slice(header.as_bytes());
    out.extend(img.pixels.iter().map(|&v| v as u8));
    out
}

/// Background-white, ink-black 8-bit rendering of a binary image.
pub fn binary_to_gray(img: &BinaryImage) -> GrayImage {
    GrayImage {
        width: img.width,
        height: img.height,
        maxval: 255,
        pixels: img.bits.iter().map(|&b| u16::from(b) * 255).collect(),
    }
}

/// Draw a rectangle `thickness` pixels wide just outside `bbox`, clipped to
/// the image. Pixels inside the box are left alone.
pub fn draw_border(img: &mut GrayImage, bbox: WordBox, thickness: usize, value: u16) {
    if img.width == 0 || img.height == 0 {
        return;
    }
    let value = value.min(img.maxval);
    let x0 = bbox.x1.saturating_sub(thickness);
    let y0 = bbox.y1.saturating_sub(thickness);
    let x3 = (bbox.x2 + thickness).min(img.width - 1);
    let y3 = (bbox.y2 + thickness).min(img.height - 1);
    for y in y0..=y3 {
        for x in x0..=x3 {
            if !bbox.contains(x, y) {
                img.set(x, y, value);
            }
        }
    }
}

struct Cursor<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn next_byte(&mut self) -> Option<u8> {
        let b = self.bytes.get(self.pos).copied();
        if b.is_some() {
            self.pos += 1;
        }
        b
    }

    fn skip_space_and_comments(&mut self) {
        while let Some(&b) = self.bytes.get(self.pos) {
            if b == b'#' {
                while let Some(&c) = self.bytes.get(self.pos) {
                    if c == b'\n' || c == b'\r' {
                        break;
                    }
                    self.pos += 1;
                }
            } else if b.is_ascii_whitespace() {
                self.pos += 1;
            } else {
                break;
            }
        }
    }

    fn number(&mut self) -> Result<usize> {
        let start = self.pos;
        let mut v: usize = 0;
        while let Some(&b) = self.bytes.get(self.pos) {
            if !b.is_ascii_digit() {
                break;
            }
            v = v
                .checked_mul(10)
                .and_then(|v| v.checked_add(usize::from(b - b'0')))
                .ok_or_else(|| Error::image(start, "number too large"))?;
            self.pos += 1;
        }
        if self.pos == start {
            return Err(match self.bytes.get(self.pos) {
                Some(&b) => Error::image(self.pos, format!("expected a decimal number, found byte {b:#04x}")),
                None => Error::image(self.pos, "unexpected end of data"),
            });
        }
        Ok(v)
    }

    /// Offset and value of the next header field.
    fn header_number(&mut self, what: &str) -> Result<(usize, usize)> {
        let before = self.pos;
        self.skip_space_and_comments();
        if self.pos == before {
            return Err(Error::image(self.pos, format!("expected whitespace before {what}")));
        }
        if self.pos >= self.bytes.len() {
            return Err(Error::image(self.pos, format!("missing {what}")));
        }
        let at = self.pos;
        Ok((at, self.number()?))
    }

    fn single_whitespace(&mut self) -> Result<()> {
        match self.next_byte() {
            Some(b) if b.is_ascii_whitespace() => Ok(()),
            Some(_) => Err(Error::image(self.pos - 1, "expected a single whitespace byte before raster")),
            None => Err(Error::image(self.pos, "truncated pixel data")),
        }
    }

    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        let end = self.pos + n;
        if end > self.bytes.len() {
            return Err(Error::image(
                self.bytes.len(),
                format!("truncated pixel data: need {n} bytes, have {}", self.bytes.len() - self.pos),
            ));
        }
        let s = &self.bytes[self.pos..end];
        self.pos = end;
        Ok(s)
    }
}
