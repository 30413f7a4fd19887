//! Self-delimiting bit frames.
//!
//! A frame is a sequence of bit runs, one per glyph row, separated by typed
//! pauses: `Row` between the rows of a glyph, `Glyph` between glyphs, and
//! `Message` between repeated copies of the whole payload. The receiver needs no
//! length header; the grid is recovered from the pause structure and then
//! checked against the prime factorization of the per-glyph bit count.

use std::fmt;

use thiserror::Error;

use crate::glyphs::{is_prime, Dims};
use crate::raster::GlyphBits;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum PauseKind {
    Row,
    Glyph,
    Message,
}

impl PauseKind {
    pub const ALL: [PauseKind; 3] = [PauseKind::Row, PauseKind::Glyph, PauseKind::Message];

    /// Marker in the text dump: `/`, `//`, `///`.
    pub fn marker(self) -> &'static str {
        match self {
            PauseKind::Row => "/",
            PauseKind::Glyph => "//",
            PauseKind::Message => "///",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum FrameElement {
    Run(Vec<u8>),
    Pause(PauseKind),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BitFrame {
    elements: Vec<FrameElement>,
    repetition: usize,
    dims: Dims,
}

impl BitFrame {
    pub fn elements(&self) -> &[FrameElement] {
        &self.elements
    }

    pub fn into_elements(self) -> Vec<FrameElement> {
        self.elements
    }

    pub fn repetition(&self) -> usize {
        self.repetition
    }

    pub fn dims(&self) -> Dims {
        self.dims
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GridInfo {
    pub dims: Dims,
    pub n_glyphs: usize,
    pub repetition: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MajorityVote {
    pub payload: Vec<u8>,
    /// Positions where the copies disagreed and a strict majority decided.
    pub corrected: Vec<usize>,
    /// Positions where the vote split evenly; the first copy's bit was kept.
    pub ties: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FramingError {
    #[error("repetition must be at least 1")]
    ZeroRepetition,
    #[error("no glyphs to frame")]
    NoGlyphs,
    #[error("glyph {index} is {found}, frame is {expected}")]
    DimensionMismatch {
        index: usize,
        expected: Dims,
        found: Dims,
    },
    #[error("inconsistent frame at element {element}: {reason}")]
    InconsistentFrame { element: usize, reason: String },
    #[error("observed grid {width}x{height} is not prime x prime")]
    NonPrimeDimensions { width: usize, height: usize },
    #[error("repeated copies differ at {} positions", vote.corrected.len() + vote.ties.len())]
    RepetitionMismatch { grid: GridInfo, vote: MajorityVote },
    #[error("copies have different lengths ({expected} vs {found})")]
    LengthMismatch { expected: usize, found: usize },
    #[error("majority vote needs at least one copy")]
    NoCopies,
    #[error("bad frame dump at byte {offset}: {reason}")]
    BadDump { offset: usize, reason: String },
}

pub fn frame_message(
    glyph_bits: &[GlyphBits],
    repetition: usize,
    dims: Dims,
) -> Result<BitFrame, FramingError> {
    if repetition == 0 {
        return Err(FramingError::ZeroRepetition);
    }
    if glyph_bits.is_empty() {
        return Err(FramingError::NoGlyphs);
    }
    if let Some((index, g)) = glyph_bits.iter().enumerate().find(|(_, g)| g.dims() != dims) {
        return Err(FramingError::DimensionMismatch {
            index,
            expected: dims,
            found: g.dims(),
        });
    }

    let mut copy = Vec::with_capacity(glyph_bits.len() * dims.height() * 2);
    for (gi, glyph) in glyph_bits.iter().enumerate() {
        if gi > 0 {
            copy.push(FrameElement::Pause(PauseKind::Glyph));
        }
        for (ri, row) in glyph.rows().iter().enumerate() {
            if ri > 0 {
                copy.push(FrameElement::Pause(PauseKind::Row));
            }
            copy.push(FrameElement::Run(row.bits().to_vec()));
        }
    }

    let mut elements = Vec::with_capacity((copy.len() + 1) * repetition);
    for k in 0..repetition {
        if k > 0 {
            elements.push(FrameElement::Pause(PauseKind::Message));
        }
        elements.extend(copy.iter().cloned());
    }
    Ok(BitFrame {
        elements,
        repetition,
        dims,
    })
}

/// Grid structure plus the payload of every copy.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Deframed {
    pub grid: GridInfo,
    pub copies: Vec<Vec<u8>>,
}

/// Validates the pause grammar and recovers the grid without comparing copies.
pub fn deframe(elements: &[FrameElement]) -> Result<Deframed, FramingError> {
    let inconsistent = |element: usize, reason: String| FramingError::InconsistentFrame { element, reason };

    // Alternation: Run (Pause Run)*
    if elements.is_empty() {
        return Err(inconsistent(0, "empty frame".into()));
    }
    for (i, e) in elements.iter().enumerate() {
        let want_run = i % 2 == 0;
        match (e, want_run) {
            (FrameElement::Run(bits), true) if bits.is_empty() => {
                return Err(inconsistent(i, "empty run".into()));
            }
            (FrameElement::Run(_), true) | (FrameElement::Pause(_), false) => {}
            (FrameElement::Run(_), false) => return Err(inconsistent(i, "adjacent runs".into())),
            (FrameElement::Pause(_), true) => {
                return Err(inconsistent(i, "pause where a run was expected".into()))
            }
        }
    }
    if elements.len() % 2 == 0 {
        return Err(inconsistent(elements.len() - 1, "frame ends with a pause".into()));
    }

    let width = match &elements[0] {
        FrameElement::Run(bits) => bits.len(),
        FrameElement::Pause(_) => unreachable!("checked above"),
    };

    // copies -> glyph blocks -> rows
    let mut copies: Vec<Vec<Vec<&[u8]>>> = vec![vec![vec![]]];
    for (i, e) in elements.iter().enumerate() {
        match e {
            FrameElement::Run(bits) => {
                if bits.len() != width {
                    return Err(inconsistent(
                        i,
                        format!("run of {} bits, expected {width}", bits.len()),
                    ));
                }
                if let Some(bad) = bits.iter().position(|&b| b > 1) {
                    return Err(inconsistent(i, format!("non-binary value at bit {bad}")));
                }
                let copy = copies.last_mut().expect("non-empty");
                copy.last_mut().expect("non-empty").push(bits);
            }
            FrameElement::Pause(PauseKind::Row) => {}
            FrameElement::Pause(PauseKind::Glyph) => {
                copies.last_mut().expect("non-empty").push(vec![]);
            }
            FrameElement::Pause(PauseKind::Message) => copies.push(vec![vec![]]),
        }
    }

    let height = copies[0][0].len();
    let n_glyphs = copies[0].len();
    let mut element = 0;
    for copy in &copies {
        if copy.len() != n_glyphs {
            return Err(inconsistent(
                element,
                format!("copy has {} glyphs, expected {n_glyphs}", copy.len()),
            ));
        }
        for block in copy {
            if block.len() != height {
                return Err(inconsistent(
                    element,
                    format!("glyph block of {} rows, expected {height}", block.len()),
                ));
            }
            element += 2 * block.len();
        }
    }

    let dims = Dims::new(width, height)
        .map_err(|_| FramingError::NonPrimeDimensions { width, height })?;
    if prime_pair_factorization(dims.area()) != Some(sorted_pair(width, height)) {
        return Err(inconsistent(0, format!("{} does not factor as {width}x{height}", dims.area())));
    }

    let repetition = copies.len();
    let copies = copies
        .into_iter()
        .map(|copy| copy.into_iter().flatten().flatten().copied().collect())
        .collect();
    Ok(Deframed {
        grid: GridInfo {
            dims,
            n_glyphs,
            repetition,
        },
        copies,
    })
}

/// Recovers `(dims, n_glyphs, repetition)` from the pause structure alone.
///
/// Fails with [`FramingError::RepetitionMismatch`] if the copies are not
/// identical; the error carries the majority-voted payload.
pub fn infer_grid(elements: &[FrameElement]) -> Result<GridInfo, FramingError> {
    let Deframed { grid, copies } = deframe(elements)?;
    if copies.iter().any(|c| *c != copies[0]) {
        let vote = majority_vote(&copies)?;
        return Err(FramingError::RepetitionMismatch { grid, vote });
    }
    Ok(grid)
}

fn sorted_pair(a: usize, b: usize) -> (usize, usize) {
    (a.min(b), a.max(b))
}

/// `Some((p, q))` with `p <= q` iff `n` is a product of exactly two primes.
pub fn prime_pair_factorization(n: usize) -> Option<(usize, usize)> {
    let p = (2..).take_while(|d| d * d <= n).find(|d| n % d == 0)?;
    let q = n / p;
    is_prime(q).then_some((p, q))
}

/// Per-bit majority over equal-length copies. Even splits keep the first copy's bit.
pub fn majority_vote(copies: &[Vec<u8>]) -> Result<MajorityVote, FramingError> {
    let first = copies.first().ok_or(FramingError::NoCopies)?;
    if let Some(c) = copies.iter().find(|c| c.len() != first.len()) {
        return Err(FramingError::LengthMismatch {
            expected: first.len(),
            found: c.len(),
        });
    }

    let k = copies.len();
    let mut vote = MajorityVote {
        payload: Vec::with_capacity(first.len()),
        corrected: Vec::new(),
        ties: Vec::new(),
    };
    for i in 0..first.len() {
        let ones = copies.iter().filter(|c| c[i] != 0).count();
        let bit = match (2 * ones).cmp(&k) {
            std::cmp::Ordering::Greater => 1,
            std::cmp::Ordering::Less => 0,
            std::cmp::Ordering::Equal => {
                vote.ties.push(i);
                first[i]
            }
        };
        if ones != 0 && ones != k && 2 * ones != k {
            vote.corrected.push(i);
        }
        vote.payload.push(bit);
    }
    Ok(vote)
}

/// Text dump: bits as `0`/`1`, pauses as `/`, `//`, `///`.
pub fn dump_frame(elements: &[FrameElement]) -> String {
    let mut out = String::new();
    for e in elements {
        match e {
            FrameElement::Run(bits) => out.extend(bits.iter().map(|&b| if b == 0 { '0' } else { '1' })),
            FrameElement::Pause(kind) => out.push_str(kind.marker()),
        }
    }
    out
}

pub fn parse_frame_dump(text: &str) -> Result<Vec<FrameElement>, FramingError> {
    let text = text.trim_end();
    let bytes = text.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let start = i;
        match bytes[i] {
            b'0' | b'1' => {
                while i < bytes.len() && matches!(bytes[i], b'0' | b'1') {
                    i += 1;
                }
                out.push(FrameElement::Run(bytes[start..i].iter().map(|b| b - b'0').collect()));
            }
            b'/' => {
                while i < bytes.len() && bytes[i] == b'/' {
                    i += 1;
                }
                let kind = match i - start {
                    1 => PauseKind::Row,
                    2 => PauseKind::Glyph,
                    3 => PauseKind::Message,
                    n => {
                        return Err(FramingError::BadDump {
                            offset: start,
                            reason: format!("{n} consecutive slashes"),
                        })
                    }
                };
                out.push(FrameElement::Pause(kind));
            }
            other => {
                return Err(FramingError::BadDump {
                    offset: start,
                    reason: format!("unexpected byte {:?}", other as char),
                })
            }
        }
    }
    Ok(out)
}

impl fmt::Display for BitFrame {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&dump_frame(&self.elements))
    }
}
