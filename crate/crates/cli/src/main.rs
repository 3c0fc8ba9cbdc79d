//! `uwbsim`: BER sweeps, architecture comparisons, reconfiguration sessions
//! and TH-code generation from the command line.

use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::{Rng, SeedableRng};
use uwb_core::channel::{load_profile, SvProfile};
use uwb_core::framing::{format_code_file, generate_code_with_id, load_code_file, CodeBank, ThParams};
use uwb_core::harness::{
    compare_architectures, format_csv, parse_grid, preset, run_sweep, SweepChannel, SweepConfig, SweepDatapath,
};
use uwb_core::reconfig::{load_script, run_session, PhyState, SessionChannel, SessionConfig};
use uwb_core::signal::PulseShape;
use uwb_core::transmitter::{ModulationConfig, Scheme};
use uwb_core::{Error, SimRng};

const EXIT_CONFIG: u8 = 2;
const EXIT_IO: u8 = 3;

#[derive(Parser)]
#[command(name = "uwbsim", version, about = "Time-hopping IR-UWB link simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// BER-vs-Eb/N0 sweep of one receiver, written as CSV.
    Sweep(SweepArgs),
    /// Side-by-side sweeps of several receivers with per-point ranking.
    Compare(CompareArgs),
    /// Run a bit stream through a scripted reconfiguration session.
    Session(SessionArgs),
    /// Generate a TH-code file.
    Codegen(CodegenArgs),
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ChannelKind {
    Awgn,
    Multipath,
}

#[derive(Args)]
struct LinkArgs {
    /// Eb/N0 grid in dB: `a,b,c` or `start:stop:step`; `inf` means noiseless.
    #[arg(long, default_value = "0:16:2")]
    ebn0: String,
    /// Bits per grid point (at least 1000).
    #[arg(long, default_value_t = 100_000)]
    bits: usize,
    #[arg(long, value_enum, default_value_t = ChannelKind::Awgn)]
    channel: ChannelKind,
    /// Multipath profile (`key = value` lines); requires `--channel multipath`.
    #[arg(long)]
    profile_file: Option<PathBuf>,
    /// Quantized receiver datapath with this word width.
    #[arg(long)]
    quant_bits: Option<u32>,
    #[arg(long, default_value_t = 1)]
    seed: u64,
}

#[derive(Args)]
struct SweepArgs {
    /// ook, bpam or ppm.
    #[arg(long)]
    scheme: Option<String>,
    /// Receiver preset, e.g. `th-ppm-v3`; sets scheme and datapath width.
    #[arg(long)]
    preset: Option<String>,
    #[command(flatten)]
    link: LinkArgs,
    /// Output CSV; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct CompareArgs {
    /// Scheme to include; repeat for each receiver.
    #[arg(long = "scheme")]
    schemes: Vec<String>,
    /// Preset to include; repeat for each receiver.
    #[arg(long = "preset")]
    presets: Vec<String>,
    #[command(flatten)]
    link: LinkArgs,
    /// Long-format CSV of every point; the table always goes to stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum SessionChannelKind {
    Noiseless,
    Awgn,
    Multipath,
}

#[derive(Args)]
struct SessionArgs {
    /// Reconfiguration script, one `@<frame> set ... signal=<0|1>` per line.
    #[arg(long)]
    script: Option<PathBuf>,
    /// Apply the script at the transmitter only.
    #[arg(long)]
    fault_inject: bool,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long, default_value = "bpam")]
    scheme: String,
    /// Number of bits (one per frame).
    #[arg(long, default_value_t = 10_000)]
    bits: usize,
    /// Initial chip duration, ns.
    #[arg(long, default_value_t = 10.0)]
    tc: f64,
    /// Initial chips per frame.
    #[arg(long, default_value_t = 8)]
    nc: usize,
    /// PPM shift, ns; defaults to the pulse duration.
    #[arg(long)]
    ppm_delta: Option<f64>,
    /// TH-code file; the first code is active. Without it, codes `c0`..`c3`
    /// are generated from the seed.
    #[arg(long)]
    codes: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = SessionChannelKind::Noiseless)]
    channel: SessionChannelKind,
    #[arg(long, default_value_t = 10.0)]
    ebn0: f64,
    #[arg(long)]
    profile_file: Option<PathBuf>,
    /// Per-segment CSV; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct CodegenArgs {
    /// Number of codes.
    #[arg(long, default_value_t = 4)]
    count: usize,
    /// Offsets per code.
    #[arg(long, default_value_t = 64)]
    length: usize,
    /// Chips per frame; offsets fall in `0..nc`.
    #[arg(long, default_value_t = 8)]
    nc: usize,
    #[arg(long, default_value = "c")]
    prefix: String,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long)]
    out: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Sweep(a) => sweep(a),
        Command::Compare(a) => compare(a),
        Command::Session(a) => session(a),
        Command::Codegen(a) => codegen(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_io() { EXIT_IO } else { EXIT_CONFIG })
        }
    }
}

type CliResult = Result<(), Error>;

fn config_error(msg: impl Into<String>) -> Error {
    Error::InvalidParams(msg.into())
}

fn write_output(out: Option<&Path>, text: &str) -> CliResult {
    match out {
        Some(path) => fs::write(path, text).map_err(|e| Error::io(path, e)),
        None => io::stdout()
            .write_all(text.as_bytes())
            .map_err(|e| Error::io("<stdout>", e)),
    }
}

fn profile(path: Option<&Path>) -> Result<SvProfile, Error> {
    match path {
        Some(p) => load_profile(p).map_err(|e| match e {
            Error::Parse { .. } => config_error(format!("{}: {e}", p.display())),
            other => other,
        }),
        None => Ok(SvProfile::cm1_like()),
    }
}

impl LinkArgs {
    fn apply(&self, cfg: &mut SweepConfig) -> CliResult {
        cfg.ebn0_grid = parse_grid(&self.ebn0)?;
        cfg.n_bits_per_point = self.bits;
        cfg.base_seed = self.seed;
        cfg.channel = match (self.channel, &self.profile_file) {
            (ChannelKind::Awgn, Some(_)) => {
                return Err(config_error("--profile-file requires --channel multipath"));
            }
            (ChannelKind::Awgn, None) => SweepChannel::Awgn,
            (ChannelKind::Multipath, p) => SweepChannel::Multipath(profile(p.as_deref())?),
        };
        if let Some(bits) = self.quant_bits {
            cfg.datapath = SweepDatapath::Quantized { bits };
        }
        Ok(())
    }
}

fn sweep_config(scheme: Option<&str>, preset_id: Option<&str>, link: &LinkArgs) -> Result<SweepConfig, Error> {
    let mut cfg = match (preset_id, scheme) {
        (Some(id), scheme) => {
            let p = preset(id).ok_or_else(|| config_error(format!("unknown preset `{id}`")))?;
            if let Some(s) = scheme {
                if s.parse::<Scheme>()? != p.scheme {
                    return Err(config_error(format!("--scheme {s} conflicts with preset {}", p.id)));
                }
            }
            if link.quant_bits.is_some_and(|b| b != p.sample_size_bits) {
                return Err(config_error(format!(
                    "--quant-bits conflicts with preset {} ({} bits)",
                    p.id, p.sample_size_bits
                )));
            }
            p.sweep_config()
        }
        (None, Some(s)) => SweepConfig::new(s.parse()?),
        (None, None) => return Err(config_error("one of --scheme or --preset is required")),
    };
    link.apply(&mut cfg)?;
    cfg.validate()?;
    Ok(cfg)
}

fn metadata(cfg: &SweepConfig) -> Vec<String> {
    let channel = match &cfg.channel {
        SweepChannel::Awgn => "awgn".to_string(),
        SweepChannel::Multipath(p) => format!(
            "multipath {} (fresh realization per 1000-bit block, genie timing on first tap)",
            p.name
        ),
    };
    let datapath = match cfg.datapath {
        SweepDatapath::Float => "float".to_string(),
        SweepDatapath::Quantized { bits } => format!("quantized {bits} bits"),
    };
    vec![
        format!("receiver: {}", cfg.label()),
        "axis: Eb/N0 in dB; OOK Eb is half the pulse energy (equiprobable bits)".into(),
        format!("channel: {channel}"),
        format!("datapath: {datapath}"),
        format!("bits per point: {}; seed: {}", cfg.n_bits_per_point, cfg.base_seed),
    ]
}

fn sweep(a: SweepArgs) -> CliResult {
    let cfg = sweep_config(a.scheme.as_deref(), a.preset.as_deref(), &a.link)?;
    let points = run_sweep(&cfg)?;
    let mut text: String = metadata(&cfg).iter().map(|c| format!("# {c}\n")).collect();
    text.push_str(&format_csv(&points));
    write_output(a.out.as_deref(), &text)
}

fn compare(a: CompareArgs) -> CliResult {
    if a.schemes.is_empty() && a.presets.is_empty() {
        return Err(config_error("compare needs at least one --scheme or --preset"));
    }
    let mut cfgs = Vec::new();
    for s in &a.schemes {
        cfgs.push(sweep_config(Some(s), None, &a.link)?);
    }
    for p in &a.presets {
        cfgs.push(sweep_config(None, Some(p), &a.link)?);
    }
    let cmp = compare_architectures(&cfgs)?;
    print!("{}", cmp.render_table());
    if let Some(path) = &a.out {
        write_output(Some(path), &cmp.to_csv())?;
    }
    Ok(())
}

fn session(a: SessionArgs) -> CliResult {
    let scheme: Scheme = a.scheme.parse()?;
    let params = ThParams::new(a.tc * 1e-9, a.nc)?;
    let bank = match &a.codes {
        Some(path) => CodeBank::from_codes(load_code_file(path, &params).map_err(|e| match e {
            Error::Parse { .. } => config_error(format!("{}: {e}", path.display())),
            other => other,
        })?)?,
        None => CodeBank::from_codes(
            (0..4).map(|k| generate_code_with_id(format!("c{k}"), a.seed.wrapping_add(k), 64, &params)),
        )?,
    };
    let pulse = PulseShape::default();
    let modulation = match (scheme, a.ppm_delta) {
        (Scheme::Ppm, Some(d)) => ModulationConfig::ppm(d * 1e-9)?,
        (_, Some(_)) => return Err(config_error("--ppm-delta applies to ppm only")),
        (s, None) => ModulationConfig::for_scheme(s, &pulse),
    };
    let state = PhyState::new(params, bank, modulation, pulse, uwb_core::signal::DEFAULT_SAMPLE_RATE)?;
    let channel = match a.channel {
        SessionChannelKind::Noiseless => SessionChannel::Noiseless,
        SessionChannelKind::Awgn => SessionChannel::Awgn { ebn0_db: a.ebn0 },
        SessionChannelKind::Multipath => SessionChannel::Multipath {
            profile: profile(a.profile_file.as_deref())?,
            ebn0_db: a.ebn0,
        },
    };
    if a.profile_file.is_some() && a.channel != SessionChannelKind::Multipath {
        return Err(config_error("--profile-file requires --channel multipath"));
    }
    let schedule = match &a.script {
        Some(path) => load_script(path).map_err(|e| match e {
            Error::Parse { .. } => config_error(format!("{}: {e}", path.display())),
            other => other,
        })?,
        None => Vec::new(),
    };
    let mut cfg = SessionConfig::symmetric(state, channel);
    cfg.fault_injection = a.fault_inject;

    let mut rng = SimRng::seed_from_u64(a.seed);
    let bits: Vec<u8> = (0..a.bits).map(|_| u8::from(rng.random::<bool>())).collect();
    let report = run_session(&bits, &schedule, &cfg, a.seed)?;
    write_output(a.out.as_deref(), &report.to_csv())
}

fn codegen(a: CodegenArgs) -> CliResult {
    if a.count == 0 || a.length == 0 {
        return Err(config_error("--count and --length must be positive"));
    }
    if a.prefix.is_empty() || a.prefix.contains(char::is_whitespace) || a.prefix.contains(':') {
        return Err(config_error(format!("invalid code id prefix `{}`", a.prefix)));
    }
    let params = ThParams::new(ThParams::default().t_c(), a.nc)?;
    let codes: Vec<_> = (0..a.count as u64)
        .map(|k| generate_code_with_id(format!("{}{k}", a.prefix), a.seed.wrapping_add(k), a.length, &params))
        .collect();
    write_output(a.out.as_deref(), &format_code_file(&codes))
}
