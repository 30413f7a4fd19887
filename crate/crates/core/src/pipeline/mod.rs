//! Transmitter and receiver built from the lower layers.

mod channel;
mod recognize;

use std::fmt;

use thiserror::Error;

pub use channel::{active_power, apply_channel, ChannelConfig};
pub use recognize::{parse_glyphs_to_message, recognize_glyph, GlyphMatch};

use crate::framing::{deframe, frame_message, majority_vote, BitFrame, FramingError};
use crate::glyphs::{message_glyphs, registry_for, Dims, GlyphError, GlyphRegistry};
use crate::modem::{demodulate, modulate, ModemConfig, ModemError, Waveform};
use crate::notation::{parse_dsl, print_dsl, Message, SyntaxError};
use crate::raster::{serialize_glyph, RasterError};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PipelineError {
    #[error(transparent)]
    Syntax(#[from] SyntaxError),
    #[error(transparent)]
    Glyph(#[from] GlyphError),
    #[error(transparent)]
    Raster(#[from] RasterError),
    #[error(transparent)]
    Framing(#[from] FramingError),
    #[error(transparent)]
    Modem(#[from] ModemError),
    #[error("invalid channel: {0}")]
    InvalidChannel(String),
    #[error("payload of {found} bits, expected {expected}")]
    LengthMismatch { expected: usize, found: usize },
    #[error("{} and {} are both at distance {distance}", candidates.0, candidates.1)]
    AmbiguousGlyph {
        candidates: (crate::glyphs::Glyph, crate::glyphs::Glyph),
        distance: usize,
    },
    #[error("ungrammatical glyph sequence at offset {offset}: {reason}")]
    UngrammaticalGlyphs { offset: usize, reason: String },
    #[error("{} glyph(s) could not be recognized: {}", failures.len(), describe_failures(failures))]
    UnrecoverableMessage { failures: Vec<(usize, PipelineError)> },
}

fn describe_failures(failures: &[(usize, PipelineError)]) -> String {
    failures
        .iter()
        .map(|(i, e)| format!("#{i}: {e}"))
        .collect::<Vec<_>>()
        .join("; ")
}

impl PipelineError {
    /// True when the receiver saw a well-formed signal but refused to guess.
    pub fn is_ambiguous(&self) -> bool {
        match self {
            PipelineError::AmbiguousGlyph { .. } => true,
            PipelineError::UnrecoverableMessage { failures } => {
                failures.iter().all(|(_, e)| e.is_ambiguous())
            }
            _ => false,
        }
    }
}

/// Frames a message with the canonical 5x7 glyphs.
pub fn frame_for(msg: &Message, repetition: usize) -> Result<BitFrame, PipelineError> {
    frame_with(msg, repetition, GlyphRegistry::canonical())
}

pub fn frame_with(msg: &Message, repetition: usize, registry: &GlyphRegistry) -> Result<BitFrame, PipelineError> {
    let bits: Vec<_> = message_glyphs(msg)
        .into_iter()
        .map(|g| serialize_glyph(registry.bitmap(g)).with_glyph(g))
        .collect();
    Ok(frame_message(&bits, repetition, registry.dims())?)
}

pub fn transmit_message(msg: &Message, cfg: &ModemConfig, repetition: usize) -> Result<Waveform, PipelineError> {
    Ok(modulate(&frame_for(msg, repetition)?, cfg)?)
}

/// DSL text to waveform.
pub fn transmit(dsl: &str, cfg: &ModemConfig, repetition: usize) -> Result<Waveform, PipelineError> {
    transmit_message(&parse_dsl(dsl)?, cfg, repetition)
}

#[derive(Debug, Clone, PartialEq)]
pub struct DecodeReport {
    pub message: Message,
    pub dsl_text: String,
    pub dims: Dims,
    pub n_glyphs: usize,
    pub repetition: usize,
    pub per_glyph: Vec<GlyphMatch>,
    /// Bit positions where the copies disagreed and a strict majority decided.
    pub corrected_bits: usize,
    /// Bit positions where the vote split evenly.
    pub tie_flags: usize,
}

impl DecodeReport {
    /// Every glyph matched exactly and the copies agreed everywhere.
    pub fn is_clean(&self) -> bool {
        self.corrected_bits == 0 && self.tie_flags == 0 && self.per_glyph.iter().all(|m| m.distance == 0)
    }

    /// Anything a human should look at: ties in the vote or inexact glyphs.
    pub fn is_flagged(&self) -> bool {
        self.tie_flags > 0 || self.per_glyph.iter().any(|m| m.distance > 0)
    }
}

impl fmt::Display for DecodeReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "dsl: {}", self.dsl_text)?;
        writeln!(f, "grid: {}", self.dims)?;
        writeln!(f, "glyphs: {}", self.n_glyphs)?;
        writeln!(f, "repetition: {}", self.repetition)?;
        writeln!(f, "corrected_bits: {}", self.corrected_bits)?;
        writeln!(f, "tie_flags: {}", self.tie_flags)?;
        for (i, m) in self.per_glyph.iter().enumerate() {
            writeln!(f, "glyph {i}: {} distance {} runner_up {}", m.glyph, m.distance, m.runner_up)?;
        }
        Ok(())
    }
}

/// Waveform to message, with diagnostics.
pub fn receive(wave: &Waveform, cfg: &ModemConfig) -> Result<DecodeReport, PipelineError> {
    let elements = demodulate(wave, cfg)?;
    let deframed = deframe(&elements)?;
    let grid = deframed.grid;
    let registry = registry_for(grid.dims)?;
    let vote = majority_vote(&deframed.copies)?;

    let area = grid.dims.area();
    let mut per_glyph = Vec::with_capacity(grid.n_glyphs);
    let mut failures = Vec::new();
    for (i, payload) in vote.payload.chunks(area).enumerate() {
        match recognize_glyph(payload, registry) {
            Ok(m) => per_glyph.push(m),
            Err(e) => failures.push((i, e)),
        }
    }
    if !failures.is_empty() {
        return Err(PipelineError::UnrecoverableMessage { failures });
    }

    let glyphs: Vec<_> = per_glyph.iter().map(|m| m.glyph).collect();
    let message = parse_glyphs_to_message(&glyphs)?;
    Ok(DecodeReport {
        dsl_text: print_dsl(&message),
        message,
        dims: grid.dims,
        n_glyphs: grid.n_glyphs,
        repetition: grid.repetition,
        per_glyph,
        corrected_bits: vote.corrected.len(),
        tie_flags: vote.ties.len(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::framing::{infer_grid, FrameElement};
    use crate::modem::Scheme;

    #[test]
    fn riemann_has_49_runs() {
        let cfg = ModemConfig::new(Scheme::Fsk);
        let w = transmit("riemann", &cfg, 1).unwrap();
        let elements = demodulate(&w, &cfg).unwrap();
        let runs = elements.iter().filter(|e| matches!(e, FrameElement::Run(_))).count();
        assert_eq!(runs, 7 * 7);
    }

    #[test]
    fn empty_dsl_fails() {
        let cfg = ModemConfig::default();
        assert_eq!(transmit("", &cfg, 1), Err(PipelineError::Syntax(SyntaxError::Empty)));
    }

    #[test]
    fn em_repeated_three_times() {
        let cfg = ModemConfig::new(Scheme::Psk);
        let w = transmit("em", &cfg, 3).unwrap();
        let d = deframe(&demodulate(&w, &cfg).unwrap()).unwrap();
        assert_eq!(d.copies.len(), 3);
        assert!(d.copies.iter().all(|c| *c == d.copies[0]));
        assert_eq!(d.copies[0].len(), 16 * 35);
    }

    #[test]
    fn spacetime_psk_round_trip() {
        let cfg = ModemConfig::new(Scheme::Psk);
        let r = receive(&transmit("spacetime", &cfg, 1).unwrap(), &cfg).unwrap();
        assert_eq!(r.dsl_text, "spacetime");
        assert!(r.per_glyph.iter().all(|m| m.distance == 0));
        assert_eq!(r.n_glyphs, 10);
        assert!(r.is_clean());
    }

    #[test]
    fn mixed_message_every_scheme() {
        for s in Scheme::ALL {
            let cfg = ModemConfig::new(s);
            let r = receive(&transmit("vector@p form tensor(2,3)", &cfg, 1).unwrap(), &cfg).unwrap();
            assert_eq!(r.dsl_text, "vector@p form tensor(2,3)", "{s}");
            assert_eq!(r.corrected_bits, 0);
        }
    }

    #[test]
    fn noisy_em_with_repetition() {
        let cfg = ModemConfig::new(Scheme::Fsk);
        let w = transmit("em", &cfg, 3).unwrap();
        let noisy = apply_channel(&w, &ChannelConfig::awgn(20.0, 2024).unwrap());
        let r = receive(&noisy, &cfg).unwrap();
        let clean = receive(&w, &cfg).unwrap();
        assert_eq!(r.dsl_text, clean.dsl_text);
        assert_eq!(r.dsl_text, "em");
        assert_eq!(r.repetition, 3);
    }

    #[test]
    fn aliases_print_canonically() {
        let cfg = ModemConfig::new(Scheme::Ask);
        let r = receive(&transmit("riemann tensor(1,0)@p", &cfg, 1).unwrap(), &cfg).unwrap();
        assert_eq!(r.dsl_text, "tensor(1,3) vector@p");
    }

    #[test]
    fn report_records_majority_corrections() {
        let cfg = ModemConfig::new(Scheme::Fsk);
        let frame = frame_for(&parse_dsl("vector").unwrap(), 3).unwrap();
        let mut elements = frame.into_elements();
        if let FrameElement::Run(bits) = &mut elements[0] {
            bits[0] ^= 1;
        }
        assert!(infer_grid(&elements).is_err());
        let w = crate::modem::modulate_elements(&elements, &cfg).unwrap();
        let r = receive(&w, &cfg).unwrap();
        assert_eq!(r.dsl_text, "vector");
        assert_eq!(r.corrected_bits, 1);
        assert!(!r.is_clean() && !r.is_flagged());
    }

    #[test]
    fn ambiguous_glyphs_are_reported_with_positions() {
        let cfg = ModemConfig::new(Scheme::Fsk);
        let frame = frame_for(&parse_dsl("vector").unwrap(), 1).unwrap();
        let reg = GlyphRegistry::canonical();
        let up = serialize_glyph(reg.bitmap(crate::glyphs::Glyph::ArrowUp)).flatten();
        let down = serialize_glyph(reg.bitmap(crate::glyphs::Glyph::ArrowDown)).flatten();
        // Equidistant from both arrows.
        let diffs: Vec<usize> = (0..35).filter(|&i| up[i] != down[i]).collect();
        let mut mid = up.clone();
        for &i in &diffs[..diffs.len() / 2] {
            mid[i] = down[i];
        }

        // Glyph 3 (the arrow) starts at element 3 * (2 * 7).
        let mut elements = frame.into_elements();
        for (row, chunk) in mid.chunks(5).enumerate() {
            elements[3 * 14 + 2 * row] = FrameElement::Run(chunk.to_vec());
        }
        let w = crate::modem::modulate_elements(&elements, &cfg).unwrap();
        match receive(&w, &cfg) {
            Err(e @ PipelineError::UnrecoverableMessage { .. }) => {
                assert!(e.is_ambiguous());
                let PipelineError::UnrecoverableMessage { failures } = e else { unreachable!() };
                assert_eq!(failures.len(), 1);
                assert_eq!(failures[0].0, 3);
            }
            other => panic!("{other:?}"),
        }
    }
}
