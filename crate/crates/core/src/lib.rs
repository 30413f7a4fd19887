//! Tensor notation as bitmaps over a simulated radio link.
//!
//! The pipeline runs: DSL text ([`notation`]) → glyph sequence and 5x7 pixel
//! art ([`glyphs`]) → row-major bits ([`raster`]) → paused, repeated frames
//! ([`framing`]) → ASK/FSK/PSK waveform ([`modem`]) → noisy channel and decoder
//! ([`pipeline`]).

pub mod framing;
pub mod glyphs;
pub mod notation;
pub mod raster;
pub mod modem;
pub mod pipeline;
