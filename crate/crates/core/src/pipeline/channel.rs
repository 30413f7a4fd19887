//! Additive white Gaussian noise with a scalar gain.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use super::PipelineError;
use crate::modem::Waveform;

/// Runs of at least this many exact zeros count as silence when measuring
/// signal power. A sampled carrier below Nyquist never has that many.
const SILENCE_RUN: usize = 16;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChannelConfig {
    snr_db: Option<f64>,
    gain: f64,
    seed: u64,
}

impl ChannelConfig {
    pub fn new(snr_db: Option<f64>, gain: f64, seed: u64) -> Result<Self, PipelineError> {
        if !(gain.is_finite() && gain > 0.0) {
            return Err(PipelineError::InvalidChannel(format!("gain {gain} must be positive")));
        }
        if let Some(snr) = snr_db {
            if !snr.is_finite() {
                return Err(PipelineError::InvalidChannel(format!("snr {snr} dB")));
            }
        }
        Ok(Self { snr_db, gain, seed })
    }

    pub fn noiseless() -> Self {
        Self {
            snr_db: None,
            gain: 1.0,
            seed: 0,
        }
    }

    pub fn awgn(snr_db: f64, seed: u64) -> Result<Self, PipelineError> {
        Self::new(Some(snr_db), 1.0, seed)
    }

    pub fn snr_db(&self) -> Option<f64> {
        self.snr_db
    }

    pub fn gain(&self) -> f64 {
        self.gain
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }
}

/// Mean square over the samples outside long runs of exact zeros.
pub fn active_power(samples: &[f64]) -> f64 {
    let mut sum = 0.0;
    let mut count = 0usize;
    let mut i = 0;
    while i < samples.len() {
        if samples[i] == 0.0 {
            let start = i;
            while i < samples.len() && samples[i] == 0.0 {
                i += 1;
            }
            if i - start < SILENCE_RUN {
                count += i - start;
            }
        } else {
            sum += samples[i] * samples[i];
            count += 1;
            i += 1;
        }
    }
    if count == 0 {
        0.0
    } else {
        sum / count as f64
    }
}

/// `gain * input + noise`, with noise power set from the active signal power
/// after gain. Same seed, same noise.
pub fn apply_channel(wave: &Waveform, ch: &ChannelConfig) -> Waveform {
    let mut out: Vec<f64> = wave.samples().iter().map(|x| ch.gain * x).collect();
    if let Some(snr_db) = ch.snr_db {
        let sigma = (active_power(&out) / 10f64.powf(snr_db / 10.0)).sqrt();
        if sigma > 0.0 {
            let mut rng = ChaCha8Rng::seed_from_u64(ch.seed);
            let normal = Normal::new(0.0, sigma).expect("sigma is finite and positive");
            for v in &mut out {
                *v += normal.sample(&mut rng);
            }
        }
    }
    Waveform::new(out, wave.sample_rate())
}
