//! Payload bits back to glyphs, glyphs back to symbols.

use super::PipelineError;
use crate::glyphs::{glyph_sequence, Glyph, GlyphRegistry, SYMBOL_SEPARATOR};
use crate::notation::{Message, SymbolSpec, MAX_RANK};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GlyphMatch {
    pub glyph: Glyph,
    pub distance: usize,
    pub runner_up: usize,
}

/// Nearest glyph by Hamming distance. Refuses to pick between equally near glyphs.
pub fn recognize_glyph(payload: &[u8], registry: &GlyphRegistry) -> Result<GlyphMatch, PipelineError> {
    let area = registry.dims().area();
    if payload.len() != area {
        return Err(PipelineError::LengthMismatch {
            expected: area,
            found: payload.len(),
        });
    }

    let mut scored: Vec<(usize, Glyph)> = registry
        .iter()
        .map(|(g, bm)| {
            let d = bm
                .pixels()
                .iter()
                .zip(payload)
                .filter(|(&px, &bit)| px != (bit != 0))
                .count();
            (d, g)
        })
        .collect();
    scored.sort();

    let (distance, glyph) = scored[0];
    let (runner_up, second) = scored[1];
    if runner_up == distance {
        return Err(PipelineError::AmbiguousGlyph {
            candidates: (glyph, second),
            distance,
        });
    }
    Ok(GlyphMatch {
        glyph,
        distance,
        runner_up,
    })
}

fn ungrammatical(offset: usize, reason: impl Into<String>) -> PipelineError {
    PipelineError::UngrammaticalGlyphs {
        offset,
        reason: reason.into(),
    }
}

fn count_run(glyphs: &[Glyph], from: usize, which: Glyph) -> usize {
    glyphs[from..].iter().take_while(|&&g| g == which).count()
}

/// Reads one generic bracket group starting at `pos`.
fn parse_tensor_group(glyphs: &[Glyph], pos: usize) -> Result<(SymbolSpec, usize), PipelineError> {
    use Glyph::*;
    for (k, want) in [LParen, Blank, RParen].into_iter().enumerate() {
        match glyphs.get(pos + k) {
            Some(&g) if g == want => {}
            Some(&g) => return Err(ungrammatical(pos + k, format!("expected {want}, found {g}"))),
            None => return Err(ungrammatical(pos + k, format!("expected {want}, found end"))),
        }
    }
    let mut at = pos + 3;

    let rank_ok = |r: usize, s: usize, at: usize| {
        if r > MAX_RANK as usize || s > MAX_RANK as usize {
            Err(ungrammatical(at, format!("rank ({r},{s}) above {MAX_RANK}")))
        } else {
            Ok(())
        }
    };

    if matches!(glyphs.get(at), Some(TildeUpper | TildeLower)) {
        let r = count_run(glyphs, at, TildeUpper);
        at += r;
        let s = count_run(glyphs, at, TildeLower);
        at += s;
        rank_ok(r, s, pos)?;
        let spec = SymbolSpec::affinity(r as u8, s as u8).expect("at least one tilde, ranks checked");
        return Ok((spec, at));
    }

    let r = count_run(glyphs, at, ArrowUp);
    at += r;
    let s = count_run(glyphs, at, ArrowDown);
    at += s;
    let at_point = glyphs.get(at) == Some(&PointDot);
    if at_point {
        at += 1;
    }
    rank_ok(r, s, pos)?;
    let spec = SymbolSpec::tensor(r as u8, s as u8, at_point).expect("ranks checked");
    Ok((spec, at))
}

/// Inverts [`crate::glyphs::message_glyphs`].
///
/// The fixed composites are tried before generic bracket groups, since the
/// spacetime glyphs contain nested brackets.
pub fn parse_glyphs_to_message(glyphs: &[Glyph]) -> Result<Message, PipelineError> {
    let fixed = [SymbolSpec::spacetime(), SymbolSpec::maxwell()].map(|s| (s, glyph_sequence(&s)));

    let mut symbols = Vec::new();
    let mut pos = 0;
    if glyphs.is_empty() {
        return Err(ungrammatical(0, "no glyphs"));
    }
    while pos < glyphs.len() {
        if !symbols.is_empty() {
            if !glyphs[pos..].starts_with(&SYMBOL_SEPARATOR) {
                return Err(ungrammatical(pos, format!("expected symbol separator, found {}", glyphs[pos])));
            }
            pos += SYMBOL_SEPARATOR.len();
        }
        if let Some((spec, seq)) = fixed.iter().find(|(_, seq)| glyphs[pos..].starts_with(seq)) {
            symbols.push(*spec);
            pos += seq.len();
            continue;
        }
        let (spec, next) = parse_tensor_group(glyphs, pos)?;
        symbols.push(spec);
        pos = next;
    }
    Ok(Message::new(symbols).expect("loop ran at least once"))
}
