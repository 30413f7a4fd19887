//! Symbol model and the textual front end.
//!
//! A [`Message`] is an ordered list of [`SymbolSpec`]s. Each symbol is either a
//! generic tensorial object (a bracket with `r` up-arrows, `s` down-arrows and an
//! optional point dot), an affinity (tildes instead of arrows), or one of the two
//! fixed composites: the spacetime manifold and the electromagnetic triplet.
//!
//! The DSL is one token per symbol, whitespace separated:
//!
//! ```text
//! vector  vector@p  form  form@p  tensor(r,s)  tensor(r,s)@p
//! affinity(r,s)  spacetime  em  riemann
//! ```

use std::collections::BTreeMap;
use std::fmt;

use thiserror::Error;

/// Largest rank allowed in either variance slot.
pub const MAX_RANK: u8 = 9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum SymbolKind {
    TensorObject,
    SpacetimeManifold,
    MaxwellTriplet,
}

/// Structural description of one drawable object.
///
/// Fields are private so that every value in circulation satisfies the
/// invariants checked by the constructors.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SymbolSpec {
    kind: SymbolKind,
    contra_rank: u8,
    co_rank: u8,
    at_point: bool,
    affinity: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SymbolError {
    #[error("rank ({contra},{co}) exceeds the maximum of {max} per slot")]
    RankTooLarge { contra: u8, co: u8, max: u8 },
    #[error("an affinity needs at least one index")]
    EmptyAffinity,
}

impl SymbolSpec {
    pub fn tensor(contra_rank: u8, co_rank: u8, at_point: bool) -> Result<Self, SymbolError> {
        check_ranks(contra_rank, co_rank)?;
        Ok(Self {
            kind: SymbolKind::TensorObject,
            contra_rank,
            co_rank,
            at_point,
            affinity: false,
        })
    }

    /// Affinities never carry a point dot and need `r + s >= 1`.
    pub fn affinity(contra_rank: u8, co_rank: u8) -> Result<Self, SymbolError> {
        check_ranks(contra_rank, co_rank)?;
        if contra_rank == 0 && co_rank == 0 {
            return Err(SymbolError::EmptyAffinity);
        }
        Ok(Self {
            kind: SymbolKind::TensorObject,
            contra_rank,
            co_rank,
            at_point: false,
            affinity: true,
        })
    }

    pub const fn spacetime() -> Self {
        Self::composite(SymbolKind::SpacetimeManifold)
    }

    pub const fn maxwell() -> Self {
        Self::composite(SymbolKind::MaxwellTriplet)
    }

    const fn composite(kind: SymbolKind) -> Self {
        Self {
            kind,
            contra_rank: 0,
            co_rank: 0,
            at_point: false,
            affinity: false,
        }
    }

    pub fn kind(&self) -> SymbolKind {
        self.kind
    }

    pub fn contra_rank(&self) -> u8 {
        self.contra_rank
    }

    pub fn co_rank(&self) -> u8 {
        self.co_rank
    }

    pub fn at_point(&self) -> bool {
        self.at_point
    }

    pub fn is_affinity(&self) -> bool {
        self.affinity
    }
}

fn check_ranks(contra: u8, co: u8) -> Result<(), SymbolError> {
    if contra > MAX_RANK || co > MAX_RANK {
        return Err(SymbolError::RankTooLarge {
            contra,
            co,
            max: MAX_RANK,
        });
    }
    Ok(())
}

impl fmt::Display for SymbolSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.kind {
            SymbolKind::SpacetimeManifold => f.write_str("spacetime"),
            SymbolKind::MaxwellTriplet => f.write_str("em"),
            SymbolKind::TensorObject if self.affinity => {
                write!(f, "affinity({},{})", self.contra_rank, self.co_rank)
            }
            SymbolKind::TensorObject => {
                match (self.contra_rank, self.co_rank) {
                    (1, 0) => f.write_str("vector")?,
                    (0, 1) => f.write_str("form")?,
                    (r, s) => write!(f, "tensor({r},{s})")?,
                }
                if self.at_point {
                    f.write_str("@p")?;
                }
                Ok(())
            }
        }
    }
}

/// A non-empty ordered sequence of symbols.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Message {
    symbols: Vec<SymbolSpec>,
}

impl Message {
    /// Returns `None` for an empty symbol list.
    pub fn new(symbols: Vec<SymbolSpec>) -> Option<Self> {
        if symbols.is_empty() {
            None
        } else {
            Some(Self { symbols })
        }
    }

    pub fn symbols(&self) -> &[SymbolSpec] {
        &self.symbols
    }

    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }
}

impl fmt::Display for Message {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, s) in self.symbols.iter().enumerate() {
            if i > 0 {
                f.write_str(" ")?;
            }
            write!(f, "{s}")?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SyntaxError {
    #[error("empty input")]
    Empty,
    #[error("token {index} ({token:?}): unknown token")]
    UnknownToken { index: usize, token: String },
    #[error("token {index} ({token:?}): malformed rank pair")]
    MalformedRank { index: usize, token: String },
    #[error("token {index} ({token:?}): {source}")]
    InvalidSymbol {
        index: usize,
        token: String,
        source: SymbolError,
    },
}

impl SyntaxError {
    /// Zero-based token index of the failure, if any.
    pub fn position(&self) -> Option<usize> {
        match self {
            SyntaxError::Empty => None,
            SyntaxError::UnknownToken { index, .. }
            | SyntaxError::MalformedRank { index, .. }
            | SyntaxError::InvalidSymbol { index, .. } => Some(*index),
        }
    }
}

pub fn parse_dsl(text: &str) -> Result<Message, SyntaxError> {
    let symbols = text
        .split_whitespace()
        .enumerate()
        .map(|(index, token)| parse_token(index, token))
        .collect::<Result<Vec<_>, _>>()?;
    Message::new(symbols).ok_or(SyntaxError::Empty)
}

/// Canonical text; `parse_dsl(&print_dsl(m)) == m`.
pub fn print_dsl(msg: &Message) -> String {
    msg.to_string()
}

fn parse_token(index: usize, token: &str) -> Result<SymbolSpec, SyntaxError> {
    let invalid = |source| SyntaxError::InvalidSymbol {
        index,
        token: token.to_owned(),
        source,
    };
    let (body, at_point) = match token.strip_suffix("@p") {
        Some(body) => (body, true),
        None => (token, false),
    };

    match body {
        "vector" => return SymbolSpec::tensor(1, 0, at_point).map_err(invalid),
        "form" => return SymbolSpec::tensor(0, 1, at_point).map_err(invalid),
        _ => {}
    }
    if !at_point {
        match body {
            "spacetime" => return Ok(SymbolSpec::spacetime()),
            "em" => return Ok(SymbolSpec::maxwell()),
            "riemann" => return SymbolSpec::tensor(1, 3, false).map_err(invalid),
            _ => {}
        }
    }

    if let Some(args) = body.strip_prefix("tensor") {
        let (r, s) = parse_rank_pair(args).ok_or_else(|| SyntaxError::MalformedRank {
            index,
            token: token.to_owned(),
        })?;
        return SymbolSpec::tensor(r, s, at_point).map_err(invalid);
    }
    if let Some(args) = body.strip_prefix("affinity") {
        if !at_point {
            let (r, s) = parse_rank_pair(args).ok_or_else(|| SyntaxError::MalformedRank {
                index,
                token: token.to_owned(),
            })?;
            return SymbolSpec::affinity(r, s).map_err(invalid);
        }
    }

    Err(SyntaxError::UnknownToken {
        index,
        token: token.to_owned(),
    })
}

/// Parses `(r,s)` where both are plain decimal numbers.
fn parse_rank_pair(args: &str) -> Option<(u8, u8)> {
    let inner = args.strip_prefix('(')?.strip_suffix(')')?;
    let (r, s) = inner.split_once(',')?;
    Some((parse_rank(r)?, parse_rank(s)?))
}

fn parse_rank(digits: &str) -> Option<u8> {
    if digits.is_empty() || digits.len() > 3 || !digits.bytes().all(|b| b.is_ascii_digit()) {
        return None;
    }
    digits.parse().ok()
}

/// The golden messages: `riemann`, `spacetime`, `em` and the eight-symbol `primer`.
pub fn canonical_messages() -> BTreeMap<&'static str, Message> {
    let t = |r, s, p| SymbolSpec::tensor(r, s, p).expect("canonical ranks are in range");
    let one = |s: SymbolSpec| Message::new(vec![s]).expect("non-empty");

    let primer = vec![
        t(1, 0, true),
        t(1, 0, false),
        t(0, 1, true),
        t(0, 1, false),
        t(2, 3, false),
        SymbolSpec::spacetime(),
        SymbolSpec::maxwell(),
        t(1, 3, false),
    ];

    BTreeMap::from([
        ("riemann", one(t(1, 3, false))),
        ("spacetime", one(SymbolSpec::spacetime())),
        ("em", one(SymbolSpec::maxwell())),
        ("primer", Message::new(primer).expect("non-empty")),
    ])
}
