//! Bitmaps to bits, and bitmaps to images.

use thiserror::Error;

use crate::glyphs::{Dims, Glyph, GlyphBitmap, GlyphError};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RasterError {
    #[error("glyph {index} is {found}, expected {expected}")]
    MixedDimensions {
        index: usize,
        expected: Dims,
        found: Dims,
    },
    #[error("empty glyph list")]
    NoGlyphs,
    #[error("malformed PBM: {0}")]
    Pbm(String),
    #[error(transparent)]
    Glyph(#[from] GlyphError),
}

/// One row of a glyph, left to right.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct BitRow(Vec<u8>);

impl BitRow {
    pub fn bits(&self) -> &[u8] {
        &self.0
    }
}

/// A glyph's pixels as bits, top row first, `1` is black.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct GlyphBits {
    glyph: Option<Glyph>,
    dims: Dims,
    rows: Vec<BitRow>,
}

impl GlyphBits {
    /// Splits a flat payload into rows. `payload.len()` must equal `dims.area()`.
    pub fn from_payload(dims: Dims, payload: &[u8]) -> Result<Self, GlyphError> {
        if payload.len() != dims.area() {
            return Err(GlyphError::PixelCount {
                expected: dims.area(),
                actual: payload.len(),
            });
        }
        let rows = payload
            .chunks(dims.width())
            .map(|c| BitRow(c.iter().map(|&b| b & 1).collect()))
            .collect();
        Ok(Self {
            glyph: None,
            dims,
            rows,
        })
    }

    pub fn with_glyph(mut self, glyph: Glyph) -> Self {
        self.glyph = Some(glyph);
        self
    }

    pub fn glyph(&self) -> Option<Glyph> {
        self.glyph
    }

    pub fn dims(&self) -> Dims {
        self.dims
    }

    pub fn rows(&self) -> &[BitRow] {
        &self.rows
    }

    pub fn flatten(&self) -> Vec<u8> {
        self.rows.iter().flat_map(|r| r.0.iter().copied()).collect()
    }

    pub fn to_bitmap(&self) -> GlyphBitmap {
        let pixels = self.rows.iter().flat_map(|r| r.0.iter().map(|&b| b == 1)).collect();
        GlyphBitmap::new(self.dims, pixels).expect("row lengths follow dims")
    }
}

pub fn serialize_glyph(bm: &GlyphBitmap) -> GlyphBits {
    let payload: Vec<u8> = bm.pixels().iter().map(|&p| u8::from(p)).collect();
    GlyphBits::from_payload(bm.dims(), &payload).expect("bitmap area matches dims")
}

pub fn deserialize_glyph(bits: &GlyphBits) -> GlyphBitmap {
    bits.to_bitmap()
}

/// Black-and-white raster of arbitrary size.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Image {
    width: usize,
    height: usize,
    pixels: Vec<bool>,
}

impl Image {
    pub fn new(width: usize, height: usize) -> Self {
        Self {
            width,
            height,
            pixels: vec![false; width * height],
        }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn get(&self, x: usize, y: usize) -> bool {
        self.pixels[y * self.width + x]
    }

    pub fn set(&mut self, x: usize, y: usize, black: bool) {
        self.pixels[y * self.width + x] = black;
    }

    /// Copies a `w`x`h` window starting at column `x0`, row `y0`.
    pub fn crop(&self, x0: usize, y0: usize, w: usize, h: usize) -> Image {
        let mut out = Image::new(w, h);
        for y in 0..h {
            for x in 0..w {
                out.set(x, y, self.get(x0 + x, y0 + y));
            }
        }
        out
    }
}

impl From<&GlyphBitmap> for Image {
    fn from(bm: &GlyphBitmap) -> Self {
        Self {
            width: bm.width(),
            height: bm.height(),
            pixels: bm.pixels().to_vec(),
        }
    }
}

/// Places glyphs left to right with `gap` white columns between neighbours.
pub fn compose_strip(glyphs: &[GlyphBitmap], gap: usize) -> Result<Image, RasterError> {
    let first = glyphs.first().ok_or(RasterError::NoGlyphs)?;
    let dims = first.dims();
    if let Some((index, g)) = glyphs.iter().enumerate().find(|(_, g)| g.dims() != dims) {
        return Err(RasterError::MixedDimensions {
            index,
            expected: dims,
            found: g.dims(),
        });
    }

    let n = glyphs.len();
    let mut img = Image::new(n * dims.width() + gap * (n - 1), dims.height());
    for (i, g) in glyphs.iter().enumerate() {
        let x0 = i * (dims.width() + gap);
        for y in 0..dims.height() {
            for x in 0..dims.width() {
                img.set(x0 + x, y, g.get(x, y));
            }
        }
    }
    Ok(img)
}

/// Plain PBM: `P1`, dimensions, then one line per row of space-separated bits.
pub fn export_pbm(img: &Image) -> Vec<u8> {
    let mut out = format!("P1\n{} {}\n", img.width, img.height);
    for y in 0..img.height {
        for x in 0..img.width {
            if x > 0 {
                out.push(' ');
            }
            out.push(if img.get(x, y) { '1' } else { '0' });
        }
        out.push('\n');
    }
    out.into_bytes()
}

/// Reads any plain PBM (comments and free whitespace allowed).
pub fn import_pbm(bytes: &[u8]) -> Result<Image, RasterError> {
    let text = std::str::from_utf8(bytes).map_err(|e| RasterError::Pbm(e.to_string()))?;
    let mut tokens = text
        .lines()
        .map(|l| l.split('#').next().unwrap_or(""))
        .flat_map(str::split_whitespace);

    if tokens.next() != Some("P1") {
        return Err(RasterError::Pbm("missing P1 magic".into()));
    }
    let mut dim = || -> Result<usize, RasterError> {
        tokens
            .next()
            .and_then(|t| t.parse().ok())
            .ok_or_else(|| RasterError::Pbm("bad dimensions".into()))
    };
    let (width, height) = (dim()?, dim()?);

    // Pixel digits may be packed without separators.
    let digits: Vec<bool> = tokens
        .flat_map(str::chars)
        .map(|c| match c {
            '0' => Ok(false),
            '1' => Ok(true),
            other => Err(RasterError::Pbm(format!("unexpected {other:?}"))),
        })
        .collect::<Result<_, _>>()?;
    if digits.len() != width * height {
        return Err(RasterError::Pbm(format!(
            "{} pixels for a {width}x{height} image",
            digits.len()
        )));
    }
    Ok(Image {
        width,
        height,
        pixels: digits,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::glyphs::{bitmap_of, glyph_sequence, GlyphRegistry};
    use crate::notation::SymbolSpec;
    use proptest::prelude::*;

    #[test]
    fn blank_and_black_glyphs() {
        let blank = serialize_glyph(&GlyphBitmap::blank(Dims::DEFAULT));
        assert_eq!(blank.rows().len(), 7);
        assert!(blank.rows().iter().all(|r| r.bits() == [0, 0, 0, 0, 0]));
        assert_eq!(blank.flatten().len(), 35);

        let black = GlyphBitmap::new(Dims::DEFAULT, vec![true; 35]).unwrap();
        assert_eq!(serialize_glyph(&black).flatten(), vec![1u8; 35]);
    }

    #[test]
    fn lparen_rows() {
        let bits = serialize_glyph(&bitmap_of(Glyph::LParen, Dims::DEFAULT).unwrap());
        let rows: Vec<&[u8]> = bits.rows().iter().map(BitRow::bits).collect();
        assert_eq!(
            rows,
            [
                [0, 0, 1, 0, 0],
                [0, 1, 0, 0, 0],
                [1, 0, 0, 0, 0],
                [1, 0, 0, 0, 0],
                [1, 0, 0, 0, 0],
                [0, 1, 0, 0, 0],
                [0, 0, 1, 0, 0],
            ]
        );
    }

    #[test]
    fn every_canonical_glyph_is_35_bits() {
        for (_, bm) in GlyphRegistry::canonical().iter() {
            let bits = serialize_glyph(bm);
            assert_eq!(bits.rows().len(), 7);
            assert!(bits.rows().iter().all(|r| r.bits().len() == 5));
            assert_eq!(bits.flatten().len(), 35);
        }
    }

    #[test]
    fn strip_shapes() {
        let reg = GlyphRegistry::canonical();
        let lp = reg.bitmap(Glyph::LParen).clone();
        for gap in [0, 1, 4] {
            assert_eq!(compose_strip(std::slice::from_ref(&lp), gap).unwrap(), Image::from(&lp));
        }

        let blank = reg.bitmap(Glyph::Blank).clone();
        let img = compose_strip(&[blank.clone(), blank], 1).unwrap();
        assert_eq!((img.width(), img.height()), (11, 7));
        assert!(img.pixels.iter().all(|&p| !p));

        let riemann = glyph_sequence(&SymbolSpec::tensor(1, 3, false).unwrap());
        let bms: Vec<_> = riemann.iter().map(|&g| reg.bitmap(g).clone()).collect();
        let img = compose_strip(&bms, 1).unwrap();
        assert_eq!((img.width(), img.height()), (7 * 5 + 6, 7));
        for (i, bm) in bms.iter().enumerate() {
            assert_eq!(img.crop(i * 6, 0, 5, 7), Image::from(bm));
            if i + 1 < bms.len() {
                assert!((0..7).all(|y| !img.get(i * 6 + 5, y)), "gap column {i}");
            }
        }
    }

    #[test]
    fn strip_rejects_mixed_sizes() {
        let small = GlyphBitmap::blank(Dims::new(3, 3).unwrap());
        let big = GlyphBitmap::blank(Dims::DEFAULT);
        assert!(matches!(
            compose_strip(&[big, small], 1),
            Err(RasterError::MixedDimensions { index: 1, .. })
        ));
        assert_eq!(compose_strip(&[], 1), Err(RasterError::NoGlyphs));
    }

    #[test]
    fn minimal_pbm() {
        let mut img = Image::new(1, 1);
        assert_eq!(export_pbm(&img), b"P1\n1 1\n0\n");
        img.set(0, 0, true);
        assert_eq!(export_pbm(&img), b"P1\n1 1\n1\n");
    }

    #[test]
    fn blank_glyph_pbm() {
        let img = Image::from(&GlyphBitmap::blank(Dims::DEFAULT));
        let expected = format!("P1\n5 7\n{}", "0 0 0 0 0\n".repeat(7));
        assert_eq!(String::from_utf8(export_pbm(&img)).unwrap(), expected);
    }

    #[test]
    fn pbm_reader_accepts_comments_and_packed_digits() {
        let img = import_pbm(b"P1\n# comment\n3 3\n010\n1 1 1\n0 1 0\n").unwrap();
        assert_eq!((img.width(), img.height()), (3, 3));
        assert!(img.get(1, 0) && img.get(0, 1) && !img.get(0, 0));
        assert!(import_pbm(b"P4\n1 1\n0\n").is_err());
        assert!(import_pbm(b"P1\n2 2\n0 1 0\n").is_err());
    }

    fn any_bitmap() -> impl Strategy<Value = GlyphBitmap> {
        prop_oneof![Just((3usize, 3usize)), Just((5, 7)), Just((7, 11)), Just((11, 5))].prop_flat_map(
            |(w, h)| {
                proptest::collection::vec(any::<bool>(), w * h)
                    .prop_map(move |px| GlyphBitmap::new(Dims::new(w, h).unwrap(), px).unwrap())
            },
        )
    }

    proptest! {
        #[test]
        fn serialize_is_invertible(bm in any_bitmap()) {
            let bits = serialize_glyph(&bm);
            prop_assert_eq!(bits.flatten().len(), bm.width() * bm.height());
            prop_assert_eq!(deserialize_glyph(&bits), bm);
        }

        #[test]
        fn pbm_round_trip(bm in any_bitmap()) {
            let img = Image::from(&bm);
            prop_assert_eq!(import_pbm(&export_pbm(&img)).unwrap(), img);
        }
    }
}
