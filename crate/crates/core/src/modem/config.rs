use std::fmt;
use std::str::FromStr;

use super::ModemError;
use crate::framing::PauseKind;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Scheme {
    Ask,
    Fsk,
    Psk,
}

impl Scheme {
    pub const ALL: [Scheme; 3] = [Scheme::Ask, Scheme::Fsk, Scheme::Psk];
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Scheme::Ask => "ask",
            Scheme::Fsk => "fsk",
            Scheme::Psk => "psk",
        })
    }
}

impl FromStr for Scheme {
    type Err = ModemError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "ask" => Ok(Scheme::Ask),
            "fsk" => Ok(Scheme::Fsk),
            "psk" => Ok(Scheme::Psk),
            _ => Err(ModemError::ConfigInvalid(format!("unknown scheme {s:?}"))),
        }
    }
}

/// Carrier and timing parameters shared by transmitter and receiver.
///
/// Durations are in samples. Each bit restarts the carrier at phase zero, so
/// schemes that rely on phase (PSK) or orthogonality (FSK) need a whole number
/// of carrier cycles per bit.
#[derive(Debug, Clone, PartialEq)]
pub struct ModemConfig {
    pub scheme: Scheme,
    pub sample_rate: u32,
    pub bit_duration: usize,
    pub carrier_hz: f64,
    pub freq0_hz: f64,
    pub freq1_hz: f64,
    pub amp0: f64,
    pub amp1: f64,
    pub pause_row: usize,
    pub pause_glyph: usize,
    pub pause_message: usize,
}

/// Weakest ASK level the receiver can still tell apart from a pause,
/// relative to the strongest.
pub const MIN_DEMOD_AMPLITUDE_RATIO: f64 = 0.1;

impl ModemConfig {
    pub fn new(scheme: Scheme) -> Self {
        let bit_duration = 480;
        Self {
            scheme,
            sample_rate: 48_000,
            bit_duration,
            carrier_hz: 3000.0,
            freq0_hz: 2400.0,
            freq1_hz: 3600.0,
            amp0: 0.25,
            amp1: 1.0,
            pause_row: bit_duration,
            pause_glyph: 3 * bit_duration,
            pause_message: 7 * bit_duration,
        }
    }

    pub fn pause_samples(&self, kind: PauseKind) -> usize {
        match kind {
            PauseKind::Row => self.pause_row,
            PauseKind::Glyph => self.pause_glyph,
            PauseKind::Message => self.pause_message,
        }
    }

    /// Peak carrier amplitude of any bit.
    pub fn max_amplitude(&self) -> f64 {
        match self.scheme {
            Scheme::Ask => self.amp0.abs().max(self.amp1.abs()),
            Scheme::Fsk | Scheme::Psk => 1.0,
        }
    }

    pub fn cycles_per_bit(&self, freq_hz: f64) -> f64 {
        freq_hz * self.bit_duration as f64 / f64::from(self.sample_rate)
    }

    /// Checks everything needed to modulate.
    pub fn validate(&self) -> Result<(), ModemError> {
        let invalid = |msg: String| Err(ModemError::ConfigInvalid(msg));
        if self.sample_rate == 0 {
            return invalid("sample_rate must be positive".into());
        }
        if self.bit_duration < 8 {
            return invalid(format!("bit_duration {} < 8 samples", self.bit_duration));
        }
        let nyquist = f64::from(self.sample_rate) / 2.0;
        let check_freq = |name: &str, f: f64| {
            if !(f.is_finite() && f > 0.0 && f < nyquist) {
                return invalid(format!("{name} = {f} Hz is outside (0, {nyquist})"));
            }
            Ok(())
        };
        let whole_cycles = |name: &str, f: f64| {
            let c = self.cycles_per_bit(f);
            if (c - c.round()).abs() > 1e-9 {
                return invalid(format!("{name} gives {c} cycles per bit, need a whole number"));
            }
            Ok(())
        };

        match self.scheme {
            Scheme::Ask => {
                check_freq("carrier_hz", self.carrier_hz)?;
                if !(self.amp0.is_finite() && self.amp1.is_finite()) || self.amp0 < 0.0 || self.amp1 < 0.0 {
                    return invalid("ASK amplitudes must be finite and non-negative".into());
                }
                if self.amp0 == self.amp1 {
                    return invalid("ASK amplitudes must differ".into());
                }
            }
            Scheme::Fsk => {
                check_freq("freq0_hz", self.freq0_hz)?;
                check_freq("freq1_hz", self.freq1_hz)?;
                if self.freq0_hz == self.freq1_hz {
                    return invalid("FSK frequencies must differ".into());
                }
                whole_cycles("freq0_hz", self.freq0_hz)?;
                whole_cycles("freq1_hz", self.freq1_hz)?;
            }
            Scheme::Psk => {
                check_freq("carrier_hz", self.carrier_hz)?;
                whole_cycles("carrier_hz", self.carrier_hz)?;
            }
        }

        let (r, g, m) = (self.pause_row, self.pause_glyph, self.pause_message);
        if r == 0 || g < 2 * r || m < 2 * g {
            return invalid(format!(
                "pauses {r} < {g} < {m} must each be at least twice the previous"
            ));
        }
        Ok(())
    }

    /// Like [`validate`](Self::validate), plus the receiver's own limits.
    pub fn validate_for_receive(&self) -> Result<(), ModemError> {
        self.validate()?;
        if self.scheme == Scheme::Ask {
            let lo = self.amp0.min(self.amp1);
            if lo < MIN_DEMOD_AMPLITUDE_RATIO * self.max_amplitude() {
                return Err(ModemError::ConfigInvalid(format!(
                    "ASK level {lo} is indistinguishable from a pause; \
                     the weaker amplitude must be at least {MIN_DEMOD_AMPLITUDE_RATIO} of the stronger"
                )));
            }
        }
        Ok(())
    }

    /// `key = value` lines, one per field.
    pub fn to_config_text(&self) -> String {
        format!(
            "scheme = {}\nsample_rate = {}\nbit_duration = {}\ncarrier_hz = {}\nfreq0_hz = {}\n\
             freq1_hz = {}\namp0 = {}\namp1 = {}\npause_row = {}\npause_glyph = {}\npause_message = {}\n",
            self.scheme,
            self.sample_rate,
            self.bit_duration,
            self.carrier_hz,
            self.freq0_hz,
            self.freq1_hz,
            self.amp0,
            self.amp1,
            self.pause_row,
            self.pause_glyph,
            self.pause_message,
        )
    }

    /// Reads `key = value` lines over `base`. Blank lines and `#` comments are
    /// skipped; unknown keys are errors. Setting `bit_duration` alone does not
    /// rescale the pauses.
    pub fn apply_config_text(mut self, text: &str) -> Result<Self, ModemError> {
        for (n, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let bad = |reason: String| ModemError::ConfigParse { line: n + 1, reason };
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| bad(format!("expected key = value, got {line:?}")))?;
            let (key, value) = (key.trim(), value.trim());

            fn num<T: FromStr>(value: &str) -> Result<T, String> {
                value.parse().map_err(|_| format!("bad number {value:?}"))
            }
            match key {
                "scheme" => self.scheme = value.parse().map_err(|e: ModemError| bad(e.to_string()))?,
                "sample_rate" => self.sample_rate = num(value).map_err(bad)?,
                "bit_duration" => self.bit_duration = num(value).map_err(bad)?,
                "carrier_hz" => self.carrier_hz = num(value).map_err(bad)?,
                "freq0_hz" => self.freq0_hz = num(value).map_err(bad)?,
                "freq1_hz" => self.freq1_hz = num(value).map_err(bad)?,
                "amp0" => self.amp0 = num(value).map_err(bad)?,
                "amp1" => self.amp1 = num(value).map_err(bad)?,
                "pause_row" => self.pause_row = num(value).map_err(bad)?,
                "pause_glyph" => self.pause_glyph = num(value).map_err(bad)?,
                "pause_message" => self.pause_message = num(value).map_err(bad)?,
                other => return Err(bad(format!("unknown key {other:?}"))),
            }
        }
        Ok(self)
    }
}

impl Default for ModemConfig {
    fn default() -> Self {
        Self::new(Scheme::Fsk)
    }
}
