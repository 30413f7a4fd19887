//! Atomic glyphs, their pixel art, and the linearization of symbols into glyphs.

use std::fmt;
use std::sync::OnceLock;

use thiserror::Error;

use crate::notation::{Message, SymbolKind, SymbolSpec};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Glyph {
    LParen,
    RParen,
    ArrowUp,
    ArrowDown,
    PointDot,
    TildeUpper,
    TildeLower,
    Blank,
}

impl Glyph {
    pub const ALL: [Glyph; 8] = [
        Glyph::LParen,
        Glyph::RParen,
        Glyph::ArrowUp,
        Glyph::ArrowDown,
        Glyph::PointDot,
        Glyph::TildeUpper,
        Glyph::TildeLower,
        Glyph::Blank,
    ];

    pub fn index(self) -> usize {
        self as usize
    }

    /// Lower-case identifier, used for file names and reports.
    pub fn name(self) -> &'static str {
        match self {
            Glyph::LParen => "lparen",
            Glyph::RParen => "rparen",
            Glyph::ArrowUp => "arrow_up",
            Glyph::ArrowDown => "arrow_down",
            Glyph::PointDot => "point_dot",
            Glyph::TildeUpper => "tilde_upper",
            Glyph::TildeLower => "tilde_lower",
            Glyph::Blank => "blank",
        }
    }
}

impl fmt::Display for Glyph {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GlyphError {
    #[error("grid {width}x{height} is not prime x prime with both sides >= 3")]
    InvalidDimensions { width: usize, height: usize },
    #[error("no glyph registry installed for {0}")]
    UnsupportedDimensions(Dims),
    #[error("bitmap has {actual} pixels, expected {expected}")]
    PixelCount { expected: usize, actual: usize },
    #[error("row {row} has width {actual}, expected {expected}")]
    RowWidth {
        row: usize,
        expected: usize,
        actual: usize,
    },
}

pub fn is_prime(n: usize) -> bool {
    n >= 2 && (2..).take_while(|d| d * d <= n).all(|d| n % d != 0)
}

/// Glyph cell size in pixels. Both sides are prime and at least 3.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Dims {
    width: usize,
    height: usize,
}

impl Dims {
    pub const DEFAULT: Dims = Dims {
        width: 5,
        height: 7,
    };

    pub fn new(width: usize, height: usize) -> Result<Self, GlyphError> {
        if width >= 3 && height >= 3 && is_prime(width) && is_prime(height) {
            Ok(Self { width, height })
        } else {
            Err(GlyphError::InvalidDimensions { width, height })
        }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn area(&self) -> usize {
        self.width * self.height
    }
}

impl Default for Dims {
    fn default() -> Self {
        Self::DEFAULT
    }
}

impl fmt::Display for Dims {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}x{}", self.width, self.height)
    }
}

/// Row-major pixel grid, `true` is black.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct GlyphBitmap {
    dims: Dims,
    pixels: Vec<bool>,
}

impl GlyphBitmap {
    pub fn new(dims: Dims, pixels: Vec<bool>) -> Result<Self, GlyphError> {
        if pixels.len() != dims.area() {
            return Err(GlyphError::PixelCount {
                expected: dims.area(),
                actual: pixels.len(),
            });
        }
        Ok(Self { dims, pixels })
    }

    pub fn blank(dims: Dims) -> Self {
        Self {
            dims,
            pixels: vec![false; dims.area()],
        }
    }

    /// Builds a bitmap from `#`/`.` art, one string per row, top row first.
    pub fn from_art(rows: &[&str]) -> Result<Self, GlyphError> {
        let width = rows.first().map_or(0, |r| r.len());
        let dims = Dims::new(width, rows.len())?;
        let mut pixels = Vec::with_capacity(dims.area());
        for (row, line) in rows.iter().enumerate() {
            if line.len() != width {
                return Err(GlyphError::RowWidth {
                    row,
                    expected: width,
                    actual: line.len(),
                });
            }
            pixels.extend(line.bytes().map(|b| b == b'#'));
        }
        Self::new(dims, pixels)
    }

    pub fn dims(&self) -> Dims {
        self.dims
    }

    pub fn width(&self) -> usize {
        self.dims.width
    }

    pub fn height(&self) -> usize {
        self.dims.height
    }

    pub fn pixels(&self) -> &[bool] {
        &self.pixels
    }

    pub fn get(&self, x: usize, y: usize) -> bool {
        self.pixels[y * self.dims.width + x]
    }

    pub fn row(&self, y: usize) -> &[bool] {
        let w = self.dims.width;
        &self.pixels[y * w..(y + 1) * w]
    }

    /// Top-to-bottom mirror image.
    pub fn flip_vertical(&self) -> Self {
        let pixels = (0..self.height())
            .rev()
            .flat_map(|y| self.row(y).iter().copied())
            .collect();
        Self {
            dims: self.dims,
            pixels,
        }
    }

    pub fn popcount(&self) -> usize {
        self.pixels.iter().filter(|&&p| p).count()
    }

    /// Number of differing pixels. Bitmaps must share dimensions.
    pub fn hamming(&self, other: &GlyphBitmap) -> usize {
        assert_eq!(self.dims, other.dims, "hamming distance across grid sizes");
        self.pixels
            .iter()
            .zip(&other.pixels)
            .filter(|(a, b)| a != b)
            .count()
    }
}

/// One bitmap per glyph, all of the same size.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GlyphRegistry {
    dims: Dims,
    bitmaps: [GlyphBitmap; 8],
}

const LPAREN_ART: [&str; 7] = ["..#..", ".#...", "#....", "#....", "#....", ".#...", "..#.."];
const RPAREN_ART: [&str; 7] = ["..#..", "...#.", "....#", "....#", "....#", "...#.", "..#.."];
const ARROW_UP_ART: [&str; 7] = ["..#..", ".###.", "#.#.#", "..#..", "..#..", "..#..", "..#.."];
const POINT_DOT_ART: [&str; 7] = [".....", ".###.", "#...#", "#.#.#", "#...#", ".###.", "....."];
const TILDE_UPPER_ART: [&str; 7] = [".#..#", "#.#.#", "#..#.", ".....", ".....", ".....", "....."];

impl GlyphRegistry {
    /// Installs a registry for arbitrary prime dimensions. Bitmaps are given in
    /// [`Glyph::ALL`] order and must all have size `dims`.
    pub fn new(dims: Dims, bitmaps: [GlyphBitmap; 8]) -> Result<Self, GlyphError> {
        if let Some(bad) = bitmaps.iter().find(|b| b.dims() != dims) {
            return Err(GlyphError::PixelCount {
                expected: dims.area(),
                actual: bad.dims().area(),
            });
        }
        Ok(Self { dims, bitmaps })
    }

    /// The built-in 5x7 table.
    pub fn canonical() -> &'static GlyphRegistry {
        static CANONICAL: OnceLock<GlyphRegistry> = OnceLock::new();
        CANONICAL.get_or_init(|| {
            let art = |rows: &[&str]| GlyphBitmap::from_art(rows).expect("canonical art is 5x7");
            let arrow_up = art(&ARROW_UP_ART);
            let tilde_upper = art(&TILDE_UPPER_ART);
            let bitmaps = [
                art(&LPAREN_ART),
                art(&RPAREN_ART),
                arrow_up.clone(),
                arrow_up.flip_vertical(),
                art(&POINT_DOT_ART),
                tilde_upper.clone(),
                tilde_upper.flip_vertical(),
                GlyphBitmap::blank(Dims::DEFAULT),
            ];
            GlyphRegistry::new(Dims::DEFAULT, bitmaps).expect("canonical bitmaps share dimensions")
        })
    }

    pub fn dims(&self) -> Dims {
        self.dims
    }

    pub fn bitmap(&self, glyph: Glyph) -> &GlyphBitmap {
        &self.bitmaps[glyph.index()]
    }

    pub fn iter(&self) -> impl Iterator<Item = (Glyph, &GlyphBitmap)> {
        Glyph::ALL.into_iter().zip(self.bitmaps.iter())
    }

    /// Smallest Hamming distance over all unordered glyph pairs.
    pub fn min_pairwise_hamming(&self) -> usize {
        let mut best = usize::MAX;
        for i in 0..self.bitmaps.len() {
            for j in i + 1..self.bitmaps.len() {
                best = best.min(self.bitmaps[i].hamming(&self.bitmaps[j]));
            }
        }
        best
    }
}

/// Looks up a registry among the built-in ones.
pub fn registry_for(dims: Dims) -> Result<&'static GlyphRegistry, GlyphError> {
    let canonical = GlyphRegistry::canonical();
    if dims == canonical.dims() {
        Ok(canonical)
    } else {
        Err(GlyphError::UnsupportedDimensions(dims))
    }
}

pub fn bitmap_of(glyph: Glyph, dims: Dims) -> Result<GlyphBitmap, GlyphError> {
    Ok(registry_for(dims)?.bitmap(glyph).clone())
}

pub fn min_pairwise_hamming(dims: Dims) -> Result<usize, GlyphError> {
    Ok(registry_for(dims)?.min_pairwise_hamming())
}

/// Glyphs inserted between consecutive symbols of a message.
///
/// Two blanks, so that a run of separated symbols can never be mistaken for the
/// single-blank spacing inside the electromagnetic triplet.
pub const SYMBOL_SEPARATOR: [Glyph; 2] = [Glyph::Blank, Glyph::Blank];

pub fn glyph_sequence(spec: &SymbolSpec) -> Vec<Glyph> {
    use Glyph::*;
    match spec.kind() {
        SymbolKind::TensorObject => {
            let (up, down) = if spec.is_affinity() {
                (TildeUpper, TildeLower)
            } else {
                (ArrowUp, ArrowDown)
            };
            let mut out = vec![LParen, Blank, RParen];
            out.extend(std::iter::repeat_n(up, spec.contra_rank().into()));
            out.extend(std::iter::repeat_n(down, spec.co_rank().into()));
            if spec.at_point() {
                out.push(PointDot);
            }
            out
        }
        SymbolKind::SpacetimeManifold => vec![
            LParen, LParen, Blank, RParen, LParen, Blank, RParen, ArrowDown, ArrowDown, RParen,
        ],
        SymbolKind::MaxwellTriplet => {
            let two_form = SymbolSpec::tensor(0, 2, false).expect("in range");
            let one_form = SymbolSpec::tensor(0, 1, false).expect("in range");
            let mut out = glyph_sequence(&two_form);
            out.push(Blank);
            out.extend(glyph_sequence(&one_form));
            out.push(Blank);
            out.extend(glyph_sequence(&two_form));
            out
        }
    }
}

/// Linearizes a whole message, joining symbols with [`SYMBOL_SEPARATOR`].
pub fn message_glyphs(msg: &Message) -> Vec<Glyph> {
    let mut out = Vec::new();
    for (i, spec) in msg.symbols().iter().enumerate() {
        if i > 0 {
            out.extend(SYMBOL_SEPARATOR);
        }
        out.extend(glyph_sequence(spec));
    }
    out
}
