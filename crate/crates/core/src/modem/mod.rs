//! Carrier modulation of frames and the matching receiver.
//!
//! Every bit is `bit_duration` samples of carrier starting at phase zero; every
//! pause is silence of its configured length. The receiver finds signal bursts
//! with a sliding-window energy detector, sizes each burst to a whole number of
//! bits, measures the silences between bursts to type the pauses, and decides
//! each bit with a correlator.

mod config;
pub mod wav;

use std::f64::consts::PI;

use thiserror::Error;

pub use config::{ModemConfig, Scheme, MIN_DEMOD_AMPLITUDE_RATIO};

use crate::framing::{BitFrame, FrameElement, PauseKind};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ModemError {
    #[error("invalid modem configuration: {0}")]
    ConfigInvalid(String),
    #[error("config line {line}: {reason}")]
    ConfigParse { line: usize, reason: String },
    #[error("no signal in waveform")]
    NoSignal,
    #[error("silence of {samples} samples at sample {at} matches no pause kind")]
    AmbiguousPause { at: usize, samples: i64 },
    #[error("burst at sample {at}: {reason}")]
    DesyncError { at: usize, reason: String },
    #[error("sample rate {found} Hz does not match configured {expected} Hz")]
    SampleRateMismatch { expected: u32, found: u32 },
    #[error("frame element {0} is an empty run")]
    EmptyRun(usize),
    #[error("WAV: {0}")]
    Wav(String),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Waveform {
    samples: Vec<f64>,
    sample_rate: u32,
}

impl Waveform {
    pub fn new(samples: Vec<f64>, sample_rate: u32) -> Self {
        Self { samples, sample_rate }
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn into_samples(self) -> Vec<f64> {
        self.samples
    }

    pub fn sample_rate(&self) -> u32 {
        self.sample_rate
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }
}

/// One bit's worth of samples for each bit value.
struct Templates {
    zero: Vec<f64>,
    one: Vec<f64>,
}

fn tone(cfg: &ModemConfig, freq_hz: f64, amplitude: f64, phase: f64) -> Vec<f64> {
    let w = 2.0 * PI * freq_hz / f64::from(cfg.sample_rate);
    (0..cfg.bit_duration)
        .map(|n| amplitude * (w * n as f64 + phase).sin())
        .collect()
}

impl Templates {
    fn new(cfg: &ModemConfig) -> Self {
        match cfg.scheme {
            Scheme::Ask => Self {
                zero: tone(cfg, cfg.carrier_hz, cfg.amp0, 0.0),
                one: tone(cfg, cfg.carrier_hz, cfg.amp1, 0.0),
            },
            Scheme::Fsk => Self {
                zero: tone(cfg, cfg.freq0_hz, 1.0, 0.0),
                one: tone(cfg, cfg.freq1_hz, 1.0, 0.0),
            },
            Scheme::Psk => {
                // sin(x + pi) == -sin(x); negate exactly.
                let zero = tone(cfg, cfg.carrier_hz, 1.0, 0.0);
                let one = zero.iter().map(|v| -v).collect();
                Self { zero, one }
            }
        }
    }

    fn for_bit(&self, bit: u8) -> &[f64] {
        if bit == 0 {
            &self.zero
        } else {
            &self.one
        }
    }
}

/// Closed-form sample count of the modulated frame.
pub fn modulated_len(elements: &[FrameElement], cfg: &ModemConfig) -> usize {
    elements
        .iter()
        .map(|e| match e {
            FrameElement::Run(bits) => bits.len() * cfg.bit_duration,
            FrameElement::Pause(kind) => cfg.pause_samples(*kind),
        })
        .sum()
}

pub fn modulate(frame: &BitFrame, cfg: &ModemConfig) -> Result<Waveform, ModemError> {
    modulate_elements(frame.elements(), cfg)
}

/// Modulates a bare element list. Unlike [`BitFrame`], the list need not be a
/// well-formed frame.
pub fn modulate_elements(elements: &[FrameElement], cfg: &ModemConfig) -> Result<Waveform, ModemError> {
    cfg.validate()?;
    let templates = Templates::new(cfg);
    let mut samples = Vec::with_capacity(modulated_len(elements, cfg));
    for (i, e) in elements.iter().enumerate() {
        match e {
            FrameElement::Run(bits) if bits.is_empty() => return Err(ModemError::EmptyRun(i)),
            FrameElement::Run(bits) => {
                for &b in bits {
                    samples.extend_from_slice(templates.for_bit(b));
                }
            }
            FrameElement::Pause(kind) => {
                samples.resize(samples.len() + cfg.pause_samples(*kind), 0.0);
            }
        }
    }
    Ok(Waveform::new(samples, cfg.sample_rate))
}

/// Correlator used for bit decisions.
struct Detector {
    scheme: Scheme,
    /// Unit carrier for ASK and PSK.
    carrier: Vec<f64>,
    carrier_energy: f64,
    /// (sin, cos) references for the FSK tones.
    fsk_refs: [(Vec<f64>, Vec<f64>); 2],
    amp0: f64,
    amp1: f64,
}

impl Detector {
    fn new(cfg: &ModemConfig) -> Self {
        let quad = |f| (tone(cfg, f, 1.0, 0.0), tone(cfg, f, 1.0, PI / 2.0));
        let carrier = tone(cfg, cfg.carrier_hz, 1.0, 0.0);
        Self {
            scheme: cfg.scheme,
            carrier_energy: carrier.iter().map(|x| x * x).sum(),
            carrier,
            fsk_refs: [quad(cfg.freq0_hz), quad(cfg.freq1_hz)],
            amp0: cfg.amp0,
            amp1: cfg.amp1,
        }
    }

    /// Coherent carrier amplitude of one bit.
    fn amplitude(&self, seg: &[f64]) -> f64 {
        seg.iter().zip(&self.carrier).map(|(a, b)| a * b).sum::<f64>() / self.carrier_energy
    }

    /// ASK channel gain, from the bits at the stronger level. Falls back to
    /// unit gain when only one level is present.
    fn ask_gain(&self, amplitudes: &[f64]) -> f64 {
        let (lo, hi) = (self.amp0.min(self.amp1), self.amp0.max(self.amp1));
        let top = amplitudes.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let bottom = amplitudes.iter().copied().fold(f64::INFINITY, f64::min);
        if !(top > 0.0) || bottom > top * (lo / hi).sqrt() {
            return 1.0;
        }
        let split = top * (lo + hi) / (2.0 * hi);
        let strong: Vec<f64> = amplitudes.iter().copied().filter(|&a| a > split).collect();
        quantile(&strong, 0.5) / hi
    }

    fn decide_ask(&self, amplitude: f64, gain: f64) -> u8 {
        let a = amplitude / gain;
        u8::from((a - self.amp1).abs() < (a - self.amp0).abs())
    }

    fn decide(&self, seg: &[f64]) -> u8 {
        let dot = |r: &[f64]| seg.iter().zip(r).map(|(a, b)| a * b).sum::<f64>();
        match self.scheme {
            Scheme::Ask => self.decide_ask(self.amplitude(seg), 1.0),
            Scheme::Fsk => {
                let power = |(s, c): &(Vec<f64>, Vec<f64>)| dot(s).powi(2) + dot(c).powi(2);
                u8::from(power(&self.fsk_refs[1]) > power(&self.fsk_refs[0]))
            }
            Scheme::Psk => u8::from(dot(&self.carrier) < 0.0),
        }
    }
}

/// A burst of carrier located by the energy detector.
#[derive(Debug, Clone, Copy)]
struct Burst {
    start: usize,
    bits: usize,
}

/// Prefix sums of squared samples.
struct Energy {
    prefix: Vec<f64>,
}

impl Energy {
    fn new(x: &[f64]) -> Self {
        let mut prefix = Vec::with_capacity(x.len() + 1);
        let mut acc = 0.0;
        prefix.push(acc);
        for v in x {
            acc += v * v;
            prefix.push(acc);
        }
        Self { prefix }
    }

    fn sum(&self, from: usize, to: usize) -> f64 {
        self.prefix[to] - self.prefix[from]
    }
}

fn quantile(values: &[f64], q: f64) -> f64 {
    let mut v = values.to_vec();
    let k = ((v.len() - 1) as f64 * q).round() as usize;
    let (_, kth, _) = v.select_nth_unstable_by(k, f64::total_cmp);
    *kth
}

/// Splits the waveform into carrier bursts, each a whole number of bits long.
fn find_bursts(x: &[f64], cfg: &ModemConfig, energy: &Energy) -> Result<Vec<Burst>, ModemError> {
    let bd = cfg.bit_duration;
    let win = (bd / 2).max(1);
    if x.len() < win {
        return if x.iter().all(|&v| v == 0.0) {
            Err(ModemError::NoSignal)
        } else {
            Err(ModemError::DesyncError {
                at: 0,
                reason: "waveform shorter than half a bit".into(),
            })
        };
    }

    // Mean square of the window starting at each sample.
    let means: Vec<f64> = (0..=x.len() - win)
        .map(|i| energy.sum(i, i + win) / win as f64)
        .collect();
    let peak = quantile(&means, 0.99);
    if !(peak > 0.0) {
        return Err(ModemError::NoSignal);
    }
    let floor = quantile(&means, 0.02);

    // Threshold sits between the noise floor and the weakest bit level, never
    // below -26 dB (RMS ratio 1/20) of the strongest.
    let weakest = match cfg.scheme {
        Scheme::Ask => (cfg.amp0.min(cfg.amp1) / cfg.max_amplitude()).powi(2),
        Scheme::Fsk | Scheme::Psk => 1.0,
    };
    let lo = peak / 400.0;
    let hi = (0.6 * peak * weakest).max(lo);
    let threshold = (floor * peak).sqrt().clamp(lo, hi);
    // Hysteresis: noise on a rising edge must not split a burst.
    let release = (floor.min(threshold) + threshold) / 2.0;

    let mut bursts = Vec::new();
    let mut i = 0;
    while i < means.len() {
        if means[i] < threshold {
            i += 1;
            continue;
        }
        let first = i;
        while i < means.len() && means[i] >= release {
            i += 1;
        }
        let last = i - 1;

        // Edges: the step detector (energy after minus energy before) peaks
        // at the true edge whatever the noise floor and bit level, as long
        // as its windows fit inside one bit.
        let step = |c: usize| energy.sum(c, (c + win).min(x.len())) - energy.sum(c.saturating_sub(win), c);
        let argmax = |lo: usize, hi: usize, f: &dyn Fn(usize) -> f64| {
            (lo..=hi).max_by(|&a, &b| f(a).total_cmp(&f(b))).unwrap_or(lo)
        };
        let start_est = argmax(first.saturating_sub(win / 2), (first + win).min(x.len()), &step) as f64;
        let end_est = argmax(last, (last + win + win / 2).min(x.len()), &|c| -step(c)) as f64;

        let len_est = end_est - start_est;
        let bits = (len_est / bd as f64).round() as usize;
        let at = start_est.max(0.0) as usize;
        if bits == 0 {
            return Err(ModemError::DesyncError {
                at,
                reason: format!("burst of ~{len_est:.0} samples is shorter than a bit"),
            });
        }
        if (len_est - (bits * bd) as f64).abs() > 0.1 * bd as f64 {
            return Err(ModemError::DesyncError {
                at,
                reason: format!("~{len_est:.0} samples is not a whole number of {bd}-sample bits"),
            });
        }

        // Fine timing: the exact start maximises the energy captured by a
        // window of the burst's length.
        let span = bits * bd;
        let radius = (bd / 4).min(cfg.pause_row / 2).max(1);
        let centre = start_est.round().max(0.0) as usize;
        let lo_c = centre.saturating_sub(radius);
        let hi_c = (centre + radius).min(x.len().saturating_sub(span));
        if lo_c > hi_c {
            return Err(ModemError::DesyncError {
                at,
                reason: "burst runs past the end of the waveform".into(),
            });
        }
        let mut best = (lo_c, f64::NEG_INFINITY);
        for c in lo_c..=hi_c {
            let e = energy.sum(c, c + span);
            if e > best.1 {
                best = (c, e);
            }
        }
        bursts.push(Burst { start: best.0, bits });
    }

    if bursts.is_empty() {
        return Err(ModemError::NoSignal);
    }
    Ok(bursts)
}

/// Nearest configured pause within +-40% of its nominal length.
fn classify_pause(samples: i64, cfg: &ModemConfig) -> Option<PauseKind> {
    PauseKind::ALL
        .into_iter()
        .map(|k| {
            let nominal = cfg.pause_samples(k) as f64;
            (k, (samples as f64 - nominal).abs() / nominal)
        })
        .filter(|&(_, rel)| rel <= 0.4)
        .min_by(|a, b| a.1.total_cmp(&b.1))
        .map(|(k, _)| k)
}

/// Recovers the frame elements. Leading and trailing silence is ignored.
pub fn demodulate(wave: &Waveform, cfg: &ModemConfig) -> Result<Vec<FrameElement>, ModemError> {
    cfg.validate_for_receive()?;
    if wave.sample_rate() != cfg.sample_rate {
        return Err(ModemError::SampleRateMismatch {
            expected: cfg.sample_rate,
            found: wave.sample_rate(),
        });
    }
    let x = wave.samples();
    if x.is_empty() {
        return Err(ModemError::NoSignal);
    }

    let energy = Energy::new(x);
    let bursts = find_bursts(x, cfg, &energy)?;
    let detector = Detector::new(cfg);
    let bd = cfg.bit_duration;

    // ASK needs every amplitude before any decision, to estimate the gain.
    let ask = (cfg.scheme == Scheme::Ask).then(|| {
        let amps: Vec<Vec<f64>> = bursts
            .iter()
            .map(|b| (0..b.bits).map(|j| detector.amplitude(&x[b.start + j * bd..][..bd])).collect())
            .collect();
        let gain = detector.ask_gain(&amps.concat());
        (amps, gain)
    });

    let mut elements = Vec::with_capacity(bursts.len() * 2);
    for (k, burst) in bursts.iter().enumerate() {
        if k > 0 {
            let prev = bursts[k - 1];
            let prev_end = prev.start + prev.bits * bd;
            let gap = burst.start as i64 - prev_end as i64;
            let kind = classify_pause(gap, cfg).ok_or(ModemError::AmbiguousPause {
                at: prev_end,
                samples: gap,
            })?;
            elements.push(FrameElement::Pause(kind));
        }
        let bits = (0..burst.bits)
            .map(|j| {
                let s = burst.start + j * bd;
                match &ask {
                    Some((amps, gain)) => detector.decide_ask(amps[k][j], *gain),
                    None => detector.decide(&x[s..s + bd]),
                }
            })
            .collect();
        elements.push(FrameElement::Run(bits));
    }
    Ok(elements)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::glyphs::{message_glyphs, Dims, GlyphRegistry};
    use crate::notation::canonical_messages;
    use crate::raster::serialize_glyph;
    use crate::framing::frame_message;
    use proptest::prelude::*;

    fn frame_of(dsl_name: &str, rep: usize) -> BitFrame {
        let reg = GlyphRegistry::canonical();
        let msg = &canonical_messages()[dsl_name];
        let bits: Vec<_> = message_glyphs(msg).into_iter().map(|g| serialize_glyph(reg.bitmap(g))).collect();
        frame_message(&bits, rep, Dims::DEFAULT).unwrap()
    }

    fn rms(v: &[f64]) -> f64 {
        (v.iter().map(|x| x * x).sum::<f64>() / v.len() as f64).sqrt()
    }

    #[test]
    fn lone_pause_is_silence() {
        let cfg = ModemConfig::new(Scheme::Psk);
        let w = modulate_elements(&[FrameElement::Pause(PauseKind::Row)], &cfg).unwrap();
        assert_eq!(w.samples(), vec![0.0; cfg.pause_row].as_slice());
    }

    #[test]
    fn on_off_keying_zero_bit_is_exact_silence() {
        let mut cfg = ModemConfig::new(Scheme::Ask);
        cfg.amp0 = 0.0;
        let w = modulate_elements(&[FrameElement::Run(vec![0, 1])], &cfg).unwrap();
        assert!(w.samples()[..480].iter().all(|&v| v == 0.0));
        assert_eq!(rms(&w.samples()[..480]), 0.0);
        let r = rms(&w.samples()[480..]);
        assert!((r - cfg.amp1 / 2f64.sqrt()).abs() <= 1e-9 * r);
    }

    #[test]
    fn blank_glyph_sample_count() {
        let reg = GlyphRegistry::canonical();
        let blank = serialize_glyph(reg.bitmap(crate::glyphs::Glyph::Blank));
        let frame = frame_message(&[blank], 1, Dims::DEFAULT).unwrap();
        for s in Scheme::ALL {
            let w = modulate(&frame, &ModemConfig::new(s)).unwrap();
            assert_eq!(w.len(), 35 * 480 + 6 * 480);
            assert_eq!(w.len(), 19_680);
        }
    }

    #[test]
    fn fsk_tones_are_orthogonal() {
        let cfg = ModemConfig::new(Scheme::Fsk);
        let t = Templates::new(&cfg);
        let cross: f64 = t.zero.iter().zip(&t.one).map(|(a, b)| a * b).sum();
        let auto: f64 = t.zero.iter().map(|a| a * a).sum();
        assert!((auto - 240.0).abs() < 1e-9);
        assert!(cross.abs() <= 1e-9 * auto, "{cross}");
    }

    #[test]
    fn noiseless_round_trip_canonical() {
        for name in ["riemann", "spacetime", "em", "primer"] {
            let frame = frame_of(name, 1);
            for s in Scheme::ALL {
                let cfg = ModemConfig::new(s);
                let w = modulate(&frame, &cfg).unwrap();
                assert_eq!(w.len(), modulated_len(frame.elements(), &cfg));
                let back = demodulate(&w, &cfg).unwrap();
                assert_eq!(back, frame.elements(), "{name} {s}");
            }
        }
    }

    #[test]
    fn repeated_frames_round_trip() {
        let frame = frame_of("em", 3);
        for s in Scheme::ALL {
            let cfg = ModemConfig::new(s);
            let back = demodulate(&modulate(&frame, &cfg).unwrap(), &cfg).unwrap();
            assert_eq!(back, frame.elements());
        }
    }

    #[test]
    fn leading_and_trailing_silence_is_ignored() {
        let frame = frame_of("riemann", 1);
        let cfg = ModemConfig::new(Scheme::Psk);
        let mut samples = vec![0.0; 1234];
        samples.extend(modulate(&frame, &cfg).unwrap().into_samples());
        samples.extend(vec![0.0; 5000]);
        let back = demodulate(&Waveform::new(samples, cfg.sample_rate), &cfg).unwrap();
        assert_eq!(back, frame.elements());
    }

    #[test]
    fn silence_is_no_signal() {
        let cfg = ModemConfig::default();
        assert_eq!(demodulate(&Waveform::new(vec![0.0; 10_000], 48_000), &cfg), Err(ModemError::NoSignal));
        assert_eq!(demodulate(&Waveform::new(vec![], 48_000), &cfg), Err(ModemError::NoSignal));
    }

    #[test]
    fn negated_psk_inverts_every_bit() {
        let frame = frame_of("spacetime", 1);
        let cfg = ModemConfig::new(Scheme::Psk);
        let w = modulate(&frame, &cfg).unwrap();
        let neg = Waveform::new(w.samples().iter().map(|v| -v).collect(), w.sample_rate());
        let back = demodulate(&neg, &cfg).unwrap();
        let inverted: Vec<FrameElement> = frame
            .elements()
            .iter()
            .map(|e| match e {
                FrameElement::Run(b) => FrameElement::Run(b.iter().map(|x| 1 - x).collect()),
                p => p.clone(),
            })
            .collect();
        assert_eq!(back, inverted);
    }

    #[test]
    fn odd_silence_is_ambiguous() {
        let cfg = ModemConfig::new(Scheme::Fsk);
        let mut samples = modulate_elements(&[FrameElement::Run(vec![1, 0])], &cfg).unwrap().into_samples();
        // 2x bit_duration: 100% off a row pause, 33% short of a glyph pause -> glyph.
        samples.extend(vec![0.0; 2 * 480]);
        samples.extend(modulate_elements(&[FrameElement::Run(vec![1])], &cfg).unwrap().into_samples());
        let back = demodulate(&Waveform::new(samples.clone(), 48_000), &cfg).unwrap();
        assert_eq!(back[1], FrameElement::Pause(PauseKind::Glyph));

        let mut bad = modulate_elements(&[FrameElement::Run(vec![1, 0])], &cfg).unwrap().into_samples();
        // 1.5x bit_duration: 50% over a row pause, 50% under a glyph pause.
        bad.extend(vec![0.0; 720]);
        bad.extend(modulate_elements(&[FrameElement::Run(vec![1])], &cfg).unwrap().into_samples());
        assert!(matches!(
            demodulate(&Waveform::new(bad, 48_000), &cfg),
            Err(ModemError::AmbiguousPause { samples: 720, .. })
        ));
    }

    #[test]
    fn fractional_burst_is_desync() {
        let cfg = ModemConfig::new(Scheme::Fsk);
        let mut samples = modulate_elements(&[FrameElement::Run(vec![1, 0, 1])], &cfg).unwrap().into_samples();
        samples.truncate(480 * 2 + 240);
        samples.extend(vec![0.0; 2000]);
        assert!(matches!(
            demodulate(&Waveform::new(samples, 48_000), &cfg),
            Err(ModemError::DesyncError { .. })
        ));
    }

    #[test]
    fn receiver_rejects_mismatched_rate_and_ook() {
        let cfg = ModemConfig::new(Scheme::Fsk);
        let w = modulate(&frame_of("em", 1), &cfg).unwrap();
        let w = Waveform::new(w.into_samples(), 44_100);
        assert!(matches!(demodulate(&w, &cfg), Err(ModemError::SampleRateMismatch { .. })));

        let mut ook = ModemConfig::new(Scheme::Ask);
        ook.amp0 = 0.0;
        let w = modulate(&frame_of("em", 1), &ook).unwrap();
        assert!(matches!(demodulate(&w, &ook), Err(ModemError::ConfigInvalid(_))));
    }

    #[test]
    fn empty_run_is_rejected() {
        let cfg = ModemConfig::default();
        assert_eq!(
            modulate_elements(&[FrameElement::Run(vec![])], &cfg),
            Err(ModemError::EmptyRun(0))
        );
    }

    #[test]
    fn ask_decisions_follow_channel_gain() {
        let cfg = ModemConfig::new(Scheme::Ask);
        let frame = frame_of("riemann", 1);
        let w = modulate(&frame, &cfg).unwrap();
        for gain in [0.2, 0.5, 3.0] {
            let scaled = Waveform::new(w.samples().iter().map(|v| gain * v).collect(), w.sample_rate());
            assert_eq!(demodulate(&scaled, &cfg).unwrap(), frame.elements(), "gain {gain}");
        }
        // A single amplitude level cannot reveal the gain; nominal levels apply.
        let quiet = modulate_elements(&[FrameElement::Run(vec![0; 6])], &cfg).unwrap();
        assert_eq!(demodulate(&quiet, &cfg).unwrap(), [FrameElement::Run(vec![0; 6])]);
    }

    fn arb_elements() -> impl Strategy<Value = Vec<FrameElement>> {
        let run = proptest::collection::vec(0u8..=1, 1..12).prop_map(FrameElement::Run);
        let pause = prop_oneof![Just(PauseKind::Row), Just(PauseKind::Glyph), Just(PauseKind::Message)]
            .prop_map(FrameElement::Pause);
        (run.clone(), proptest::collection::vec((pause, run), 0..12)).prop_map(|(first, rest)| {
            let mut v = vec![first];
            for (p, r) in rest {
                v.push(p);
                v.push(r);
            }
            v
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn exact_round_trip_any_frame(elements in arb_elements(), scheme in 0usize..3) {
            let cfg = ModemConfig::new(Scheme::ALL[scheme]);
            let w = modulate_elements(&elements, &cfg).unwrap();
            prop_assert_eq!(w.len(), modulated_len(&elements, &cfg));
            prop_assert_eq!(demodulate(&w, &cfg).unwrap(), elements);
        }
    }
}
