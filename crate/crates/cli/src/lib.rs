//! The `mubkit` command-line tool.
//!
//! Exit codes: 0 on success, 1 when a validation or runtime check fails,
//! 2 on usage errors.

pub mod report;

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::json;

use mubkit_core::bits::{bits_to_bytes, bits_to_words, bytes_to_bits, parse_hex_words, words_to_bits};
use mubkit_core::cipher::container::{decrypt_blocks, encrypt_blocks, QctContainer};
use mubkit_core::cipher::{hn_spec, one_time_pad_spec, wn_spec, CipherSpec};
use mubkit_core::circuit::verify_circuit;
use mubkit_core::gf2n::FieldContext;
use mubkit_core::mub::{mub_family, SAMPLED_PAIRS};
use mubkit_core::stream::{stream_decrypt, stream_encrypt, KeystreamGenerator, StreamContainer};
use mubkit_core::{Error, Result};

use report::{analyze, report_table, to_canonical_json, AnalysisOptions, AnalysisReport, AnalyzedCipher};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "mubkit", version, about = "Quantum ciphers from mutually unbiased bases")]
pub struct Cli {
    /// Seed for every randomized step.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Print JSON instead of a text summary.
    #[arg(long, global = true)]
    pub json: bool,
    /// Also write reports into this directory.
    #[arg(long, global = true)]
    pub out_dir: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum CipherArg {
    Hn,
    Wn,
    Otp,
}

impl CipherArg {
    fn spec(self, n: u32) -> Result<CipherSpec> {
        match self {
            Self::Hn => hn_spec(n),
            Self::Wn => Ok(wn_spec(&mub_family(FieldContext::new(n, None)?)?)),
            Self::Otp => one_time_pad_spec(n),
        }
    }
}

#[derive(Debug, Args)]
pub struct BlockArgs {
    #[arg(long, value_enum)]
    pub cipher: CipherArg,
    #[arg(long)]
    pub n: u32,
    /// One key per block, each `ceil(m / 4)` hex digits.
    #[arg(long)]
    pub key_hex: String,
    #[arg(long = "in")]
    pub input: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct StreamArgs {
    #[arg(long, value_enum)]
    pub cipher: CipherArg,
    #[arg(long)]
    pub n: u32,
    #[arg(long)]
    pub seed_hex: String,
    #[arg(long = "in")]
    pub input: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Build and certify the mutually unbiased bases for `n` qubits.
    Mub {
        #[arg(long)]
        n: u32,
        /// Field modulus in hex, e.g. `13` for x^4 + x + 1.
        #[arg(long)]
        modulus: Option<String>,
        /// Check every basis pair instead of sampling.
        #[arg(long)]
        full_check: bool,
    },
    /// Encrypt a file block by block.
    Encrypt(BlockArgs),
    /// Decrypt a `QCT1` container.
    Decrypt(BlockArgs),
    /// Key-uncertainty analysis.
    Analyze {
        #[arg(long, value_enum)]
        cipher: AnalyzedCipher,
        #[arg(long)]
        n: u32,
        #[arg(long)]
        compose: Option<u32>,
        #[arg(long, default_value_t = 64)]
        restarts: usize,
        /// Record wall-clock time (makes output run-dependent).
        #[arg(long)]
        timing: bool,
    },
    /// Build the encryption circuit and optionally check it exhaustively.
    Circuit {
        #[arg(long)]
        n: u32,
        #[arg(long)]
        verify: bool,
    },
    /// Encrypt with keys drawn from a seeded keystream.
    StreamEncrypt {
        #[command(flatten)]
        args: StreamArgs,
        /// Local randomness of the keystream core.
        #[arg(long, default_value_t = 8)]
        e: u32,
        /// Mixer nonce; defaults to `--seed`.
        #[arg(long)]
        nonce: Option<u64>,
    },
    /// Decrypt a `QSC1` container.
    StreamDecrypt {
        #[command(flatten)]
        args: StreamArgs,
    },
    /// Summary table over analysis reports (CSV).
    Report {
        /// Report files written by `analyze`; if none, analyzes H_1..H_4 and W_1..W_3.
        files: Vec<PathBuf>,
        #[arg(long, default_value_t = 64)]
        restarts: usize,
    },
}

/// Parses `args` (including the program name) and runs the command.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = if e.use_stderr() {
                write!(stderr, "{e}")
            } else {
                write!(stdout, "{e}")
            };
            return code;
        }
    };
    match execute(&cli, stdout) {
        Ok(true) => EXIT_OK,
        Ok(false) => EXIT_FAILURE,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            EXIT_FAILURE
        }
    }
}

fn write_artifact(cli: &Cli, name: &str, contents: &str) -> Result<()> {
    if let Some(dir) = &cli.out_dir {
        fs::create_dir_all(dir)?;
        fs::write(dir.join(name), contents)?;
    }
    Ok(())
}

fn emit<T: Serialize>(cli: &Cli, out: &mut dyn Write, artifact: &str, value: &T, text: String) -> Result<()> {
    let json = to_canonical_json(value);
    write_artifact(cli, artifact, &json)?;
    if cli.json {
        out.write_all(json.as_bytes())?;
    } else {
        writeln!(out, "{text}")?;
    }
    Ok(())
}

fn read(path: &Path) -> Result<Vec<u8>> {
    fs::read(path).map_err(|e| Error::Parameter(format!("cannot read {}: {e}", path.display())))
}

fn parse_seed_hex(hex_seed: &str) -> Result<Vec<u8>> {
    hex::decode(hex_seed.trim()).map_err(|e| Error::Parameter(format!("bad seed hex: {e}")))
}

fn message_words(bytes: &[u8], n: u32) -> Result<Vec<u32>> {
    if (bytes.len() * 8) % n as usize != 0 {
        return Err(Error::Parameter(format!(
            "{} bytes do not split into {n}-bit blocks; use stream mode for padding",
            bytes.len()
        )));
    }
    bits_to_words(&bytes_to_bits(bytes), n)
}

fn block_keys(spec: &CipherSpec, hex_keys: &str, count: usize) -> Result<Vec<mubkit_core::cipher::CipherKey>> {
    parse_hex_words(hex_keys, spec.m(), count)?
        .into_iter()
        .map(|k| {
            let key = spec.key_from_index(k as usize);
            spec.validate_key(key).map(|_| key)
        })
        .collect()
}

fn execute(cli: &Cli, out: &mut dyn Write) -> Result<bool> {
    match &cli.command {
        Command::Mub { n, modulus, full_check } => {
            let modulus = modulus
                .as_deref()
                .map(|m| {
                    u32::from_str_radix(m.trim_start_matches("0x"), 16)
                        .map_err(|e| Error::Parameter(format!("bad modulus {m:?}: {e}")))
                })
                .transpose()?;
            let family = mub_family(FieldContext::new(*n, modulus)?)?;
            let cert = if *full_check {
                family.certify_full()
            } else {
                family.certify_sampled(SAMPLED_PAIRS, cli.seed)
            };
            let (ok, value) = match cert {
                Ok(c) => (true, json!({"field": family.field().descriptor(), "bases": family.bases().len(), "certificate": c})),
                Err(e) => (false, json!({"field": family.field().descriptor(), "bases": family.bases().len(), "error": e.to_string()})),
            };
            let text = format!(
                "n={n} bases={} {}",
                family.bases().len(),
                value.get("certificate").map_or_else(
                    || format!("certification FAILED: {}", value["error"]),
                    |c| format!("max_deviation={} pairs={}", c["max_deviation"], c["pairs_checked"])
                )
            );
            emit(cli, out, &format!("mub_n{n}.json"), &value, text)?;
            Ok(ok)
        }
        Command::Encrypt(a) => {
            let spec = a.cipher.spec(a.n)?;
            let words = message_words(&read(&a.input)?, a.n)?;
            let keys = block_keys(&spec, &a.key_hex, words.len())?;
            let container = encrypt_blocks(&spec, &keys, &words)?;
            fs::write(&a.out, container.to_bytes()?)?;
            let value = json!({"blocks": words.len(), "out": a.out.display().to_string()});
            emit(cli, out, "encrypt.json", &value, format!("encrypted {} blocks", words.len()))?;
            Ok(true)
        }
        Command::Decrypt(a) => {
            let spec = a.cipher.spec(a.n)?;
            let container = QctContainer::read_from(&mut read(&a.input)?.as_slice())?;
            let keys = block_keys(&spec, &a.key_hex, container.blocks.len())?;
            let words = decrypt_blocks(&spec, &keys, &container)?;
            fs::write(&a.out, bits_to_bytes(&words_to_bits(&words, a.n))?)?;
            let value = json!({"blocks": words.len(), "out": a.out.display().to_string()});
            emit(cli, out, "decrypt.json", &value, format!("decrypted {} blocks", words.len()))?;
            Ok(true)
        }
        Command::Analyze { cipher, n, compose, restarts, timing } => {
            let start = Instant::now();
            let opts = AnalysisOptions { compose: *compose, restarts: *restarts, seed: cli.seed };
            let mut report = analyze(*cipher, *n, &opts)?;
            if *timing {
                report.wall_clock_seconds = Some(start.elapsed().as_secs_f64());
            }
            let json = to_canonical_json(&report);
            let name = format!("analyze_{}{n}.json", if *cipher == AnalyzedCipher::Hn { "hn" } else { "wn" });
            write_artifact(cli, &name, &json)?;
            out.write_all(json.as_bytes())?;
            Ok(true)
        }
        Command::Circuit { n, verify } => {
            let ctx = FieldContext::new(*n, None)?;
            if *verify {
                let v = verify_circuit(&ctx)?;
                let ok = v.max_infidelity <= 1e-10 && v.ancilla_residual <= 1e-10 && v.roundtrip_ok;
                let text = format!(
                    "n={n} quantum_gates={} classical_ops={} max_infidelity={:e} ancilla_residual={:e} roundtrip={}",
                    v.gate_counts.quantum, v.gate_counts.classical, v.max_infidelity, v.ancilla_residual, v.roundtrip_ok
                );
                emit(cli, out, &format!("circuit_n{n}.json"), &v, text)?;
                Ok(ok)
            } else {
                let circ = mubkit_core::circuit::build_encrypt_circuit(&ctx)?;
                let counts = circ.gate_counts();
                let value = json!({"n": n, "gate_counts": counts, "gates": circ.gates()});
                let text = format!("n={n} quantum_gates={} classical_ops={}", counts.quantum, counts.classical);
                emit(cli, out, &format!("circuit_n{n}.json"), &value, text)?;
                Ok(true)
            }
        }
        Command::StreamEncrypt { args, e, nonce } => {
            let spec = args.cipher.spec(args.n)?;
            let seed = parse_seed_hex(&args.seed_hex)?;
            let bits = bytes_to_bits(&read(&args.input)?);
            let blocks = bits.len().div_ceil(args.n as usize) as u64;
            let len = (blocks * spec.m() as u64).max(1);
            let nonce = nonce.unwrap_or(cli.seed);
            let generator = KeystreamGenerator::new(&seed, *e, len, nonce)?;
            let container = stream_encrypt(&generator, &spec, nonce, &bits)?;
            fs::write(&args.out, container.to_bytes()?)?;
            let value = json!({"blocks": blocks, "keystream_bits": len, "e": e, "nonce": nonce});
            emit(cli, out, "stream_encrypt.json", &value, format!("encrypted {blocks} blocks with {len} keystream bits"))?;
            Ok(true)
        }
        Command::StreamDecrypt { args } => {
            let spec = args.cipher.spec(args.n)?;
            let seed = parse_seed_hex(&args.seed_hex)?;
            let container = StreamContainer::read_from(&mut read(&args.input)?.as_slice())?;
            let h = container.header;
            let generator = KeystreamGenerator::new(&seed, h.e as u32, h.stream_len as u64, h.nonce)?;
            let bits = stream_decrypt(&generator, &spec, &container)?;
            if bits.len() % 8 != 0 {
                return Err(Error::Container(format!("{} message bits are not whole bytes", bits.len())));
            }
            fs::write(&args.out, bits_to_bytes(&bits)?)?;
            let value = json!({"blocks": container.blocks.len(), "bytes": bits.len() / 8});
            emit(cli, out, "stream_decrypt.json", &value, format!("decrypted {} bytes", bits.len() / 8))?;
            Ok(true)
        }
        Command::Report { files, restarts } => {
            let reports: Vec<AnalysisReport> = if files.is_empty() {
                let opts = AnalysisOptions { compose: None, restarts: *restarts, seed: cli.seed };
                let mut all = Vec::new();
                for n in 1..=4 {
                    all.push(analyze(AnalyzedCipher::Hn, n, &opts)?);
                }
                for n in 1..=3 {
                    all.push(analyze(AnalyzedCipher::Wn, n, &opts)?);
                }
                all
            } else {
                files
                    .iter()
                    .map(|f| {
                        serde_json::from_slice(&read(f)?)
                            .map_err(|e| Error::Parameter(format!("{}: {e}", f.display())))
                    })
                    .collect::<Result<_>>()?
            };
            let table = report_table(&reports);
            write_artifact(cli, "report_table.csv", &table)?;
            if cli.json {
                out.write_all(to_canonical_json(&reports).as_bytes())?;
            } else {
                out.write_all(table.as_bytes())?;
            }
            Ok(true)
        }
    }
}
