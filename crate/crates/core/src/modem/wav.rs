//! 16-bit mono PCM WAV files.

use std::io::{Read, Seek, Write};
use std::path::Path;

use super::{ModemError, Waveform};

const FULL_SCALE: f64 = i16::MAX as f64;

fn wav_err(e: hound::Error) -> ModemError {
    ModemError::Wav(e.to_string())
}

/// Clips to [-1, 1] and scales to full range.
pub fn quantize(x: f64) -> i16 {
    (x.clamp(-1.0, 1.0) * FULL_SCALE).round() as i16
}

pub fn dequantize(s: i16) -> f64 {
    (f64::from(s) / FULL_SCALE).max(-1.0)
}

fn spec(sample_rate: u32) -> hound::WavSpec {
    hound::WavSpec {
        channels: 1,
        sample_rate,
        bits_per_sample: 16,
        sample_format: hound::SampleFormat::Int,
    }
}

pub fn write_wav<W: Write + Seek>(out: W, wave: &Waveform) -> Result<(), ModemError> {
    let mut w = hound::WavWriter::new(out, spec(wave.sample_rate())).map_err(wav_err)?;
    let mut samples = w.get_i16_writer(wave.len() as u32);
    for &x in wave.samples() {
        samples.write_sample(quantize(x));
    }
    samples.flush().map_err(wav_err)?;
    w.finalize().map_err(wav_err)
}

pub fn read_wav<R: Read>(input: R) -> Result<Waveform, ModemError> {
    let mut r = hound::WavReader::new(input).map_err(wav_err)?;
    let s = r.spec();
    if s.channels != 1 || s.bits_per_sample != 16 || s.sample_format != hound::SampleFormat::Int {
        return Err(ModemError::Wav(format!(
            "expected 16-bit integer mono, got {} channel(s) of {}-bit {:?}",
            s.channels, s.bits_per_sample, s.sample_format
        )));
    }
    let samples = r
        .samples::<i16>()
        .map(|v| v.map(dequantize))
        .collect::<Result<Vec<_>, _>>()
        .map_err(wav_err)?;
    Ok(Waveform::new(samples, s.sample_rate))
}

pub fn save_wav(path: &Path, wave: &Waveform) -> Result<(), ModemError> {
    let file = std::fs::File::create(path).map_err(|e| ModemError::Wav(format!("{}: {e}", path.display())))?;
    write_wav(std::io::BufWriter::new(file), wave)
}

pub fn load_wav(path: &Path) -> Result<Waveform, ModemError> {
    let file = std::fs::File::open(path).map_err(|e| ModemError::Wav(format!("{}: {e}", path.display())))?;
    read_wav(std::io::BufReader::new(file))
}
