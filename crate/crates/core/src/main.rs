use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand};

use lingocast::framing::dump_frame;
use lingocast::glyphs::{message_glyphs, GlyphRegistry};
use lingocast::modem::wav::{load_wav, save_wav};
use lingocast::modem::{ModemConfig, Scheme};
use lingocast::notation::{canonical_messages, parse_dsl, print_dsl};
use lingocast::pipeline::{apply_channel, frame_for, receive, transmit_message, ChannelConfig};
use lingocast::raster::{compose_strip, export_pbm, Image};

#[derive(Parser)]
#[command(name = "lingocast", version, about = "Tensor notation as 5x7 bitmaps over a simulated radio link")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args)]
struct ModemArgs {
    /// Modulation scheme: ask, fsk or psk
    #[arg(long, default_value = "fsk", value_parser = parse_scheme)]
    scheme: Scheme,
    /// key = value file overriding modem parameters
    #[arg(long)]
    config: Option<PathBuf>,
}

impl ModemArgs {
    fn load(&self) -> Result<ModemConfig> {
        let base = ModemConfig::new(self.scheme);
        let cfg = match &self.config {
            Some(path) => {
                let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
                base.apply_config_text(&text)?
            }
            None => base,
        };
        cfg.validate()?;
        Ok(cfg)
    }
}

fn parse_scheme(s: &str) -> Result<Scheme, String> {
    s.parse().map_err(|e: lingocast::modem::ModemError| e.to_string())
}

#[derive(Subcommand)]
enum Command {
    /// Render a message as a PBM strip of glyphs.
    Encode {
        dsl: String,
        #[arg(long)]
        out: PathBuf,
        /// White columns between glyphs
        #[arg(long, default_value_t = 1)]
        gap: usize,
    },
    /// Modulate a message to a 16-bit mono WAV file.
    Transmit {
        dsl: String,
        #[command(flatten)]
        modem: ModemArgs,
        #[arg(long, default_value_t = 3)]
        rep: usize,
        #[arg(long)]
        out: PathBuf,
    },
    /// Add gain and white Gaussian noise to a WAV file.
    Channel {
        input: PathBuf,
        /// Signal-to-noise ratio in dB; omit for a noiseless channel
        #[arg(long)]
        snr: Option<f64>,
        #[arg(long, default_value_t = 1.0)]
        gain: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Decode a WAV file and print the message.
    ///
    /// Exit status: 0 clean, 2 flagged or ambiguous, 1 failure.
    Receive {
        input: PathBuf,
        #[command(flatten)]
        modem: ModemArgs,
        /// Write the full decode report here
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Print the frame text dump of a message.
    Frame {
        dsl: String,
        #[arg(long, default_value_t = 1)]
        rep: usize,
    },
    /// Write one PBM per glyph of the built-in table.
    Glyphs {
        #[arg(long)]
        out_dir: PathBuf,
    },
    /// Round-trip every canonical message through every scheme.
    Selftest,
}

fn write(path: &Path, bytes: &[u8]) -> Result<()> {
    std::fs::write(path, bytes).with_context(|| format!("writing {}", path.display()))
}

fn run(cli: Cli) -> Result<ExitCode> {
    match cli.command {
        Command::Encode { dsl, out, gap } => {
            let msg = parse_dsl(&dsl)?;
            let reg = GlyphRegistry::canonical();
            let bitmaps: Vec<_> = message_glyphs(&msg).into_iter().map(|g| reg.bitmap(g).clone()).collect();
            let img = compose_strip(&bitmaps, gap)?;
            write(&out, &export_pbm(&img))?;
        }
        Command::Transmit { dsl, modem, rep, out } => {
            let cfg = modem.load()?;
            let wave = transmit_message(&parse_dsl(&dsl)?, &cfg, rep)?;
            save_wav(&out, &wave)?;
            eprintln!("{} samples at {} Hz", wave.len(), wave.sample_rate());
        }
        Command::Channel {
            input,
            snr,
            gain,
            seed,
            out,
        } => {
            let ch = ChannelConfig::new(snr, gain, seed)?;
            save_wav(&out, &apply_channel(&load_wav(&input)?, &ch))?;
        }
        Command::Receive { input, modem, report } => {
            let cfg = modem.load()?;
            let wave = load_wav(&input)?;
            match receive(&wave, &cfg) {
                Ok(r) => {
                    println!("{}", r.dsl_text);
                    if let Some(path) = report {
                        write(&path, r.to_string().as_bytes())?;
                    }
                    if r.is_flagged() {
                        return Ok(ExitCode::from(2));
                    }
                }
                Err(e) => {
                    eprintln!("error: {e}");
                    if let Some(path) = report {
                        write(&path, format!("error: {e}\n").as_bytes())?;
                    }
                    return Ok(ExitCode::from(if e.is_ambiguous() { 2 } else { 1 }));
                }
            }
        }
        Command::Frame { dsl, rep } => {
            let frame = frame_for(&parse_dsl(&dsl)?, rep)?;
            println!("{}", dump_frame(frame.elements()));
        }
        Command::Glyphs { out_dir } => {
            std::fs::create_dir_all(&out_dir)?;
            for (g, bm) in GlyphRegistry::canonical().iter() {
                write(&out_dir.join(format!("{}.pbm", g.name())), &export_pbm(&Image::from(bm)))?;
            }
        }
        Command::Selftest => {
            let mut failed = 0;
            for (name, msg) in canonical_messages() {
                for scheme in Scheme::ALL {
                    let cfg = ModemConfig::new(scheme);
                    let outcome = transmit_message(&msg, &cfg, 1).and_then(|w| receive(&w, &cfg));
                    let ok = matches!(&outcome, Ok(r) if r.dsl_text == print_dsl(&msg) && r.is_clean());
                    failed += usize::from(!ok);
                    match outcome {
                        Ok(r) => println!("{} {name:<10} {scheme}: {}", if ok { "PASS" } else { "FAIL" }, r.dsl_text),
                        Err(e) => println!("FAIL {name:<10} {scheme}: {e}"),
                    }
                }
            }
            if failed > 0 {
                return Ok(ExitCode::FAILURE);
            }
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
