//! `voronoi`: command-line front end for constellation experiments.

use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::{json, Value};
use std::path::PathBuf;
use std::process::ExitCode;
use voronoi_core::airlab::{
    average_energy, choose_d, llr_approx, llr_exact, write_llr_binary, write_llr_csv, AwgnChannel,
    BallOffsets, ConstellationTable, DChoiceOptions, LlrParams, LlrRecord, ShellTables,
    DEFAULT_SHELL_BUDGET, DEFAULT_TABLE_LIMIT,
};
use voronoi_core::lattices::{
    build_named, nsm_estimate, parse_lattice_name, reference_shaping_gain_db,
};
use voronoi_core::simkit::{
    hash_json, run_error_rate_sweep, run_mi_sweep, tabulate_merits, with_threads, write_merits_csv,
    DPolicy, MeritOptions, MiBackendKind, OffsetKind, SweepConfig, SweepResult,
};
use voronoi_core::vc::{GrayPenaltyMode, Mapping, OffsetPolicy, VoronoiConstellation};
use voronoi_core::{Error, Result};

#[derive(Parser, Debug)]
#[command(name = "voronoi", version, about = "Voronoi constellation experiments")]
struct Cli {
    /// Worker threads (recorded in output metadata).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Spectral efficiency, energy and gain of one or more constellations.
    Merits(MeritsArgs),
    /// Maps an integer message to a constellation point.
    Encode(EncodeArgs),
    /// Maps a received vector to the message of the closest point.
    Decode(DecodeArgs),
    /// Uncoded BER/SER sweep.
    Ber(SweepArgs),
    /// Mutual information sweep.
    Mi(SweepArgs),
    /// Simulates symbols and writes bit LLRs.
    LlrExport(LlrArgs),
    /// Normalized second moment of a lattice.
    Nsm(NsmArgs),
    /// Shell count D for the importance estimator.
    ChooseD(ChooseDArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
enum OffsetArg {
    Auto,
    Random,
    Optimized,
}

#[derive(Args, Debug, Serialize)]
struct VcArgs {
    /// Constellation spec, e.g. `Z4/16D4` or `Z32/2^4L32`.
    #[arg(long)]
    vc: String,
    /// kurkoski, feng, ferdinand or cs83.
    #[arg(long)]
    mapping: Option<String>,
    #[arg(long, value_enum, default_value = "auto")]
    offset: OffsetArg,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

impl VcArgs {
    fn build(&self) -> Result<VoronoiConstellation> {
        let mapping = self.mapping.as_deref().map(Mapping::parse).transpose()?;
        let policy = match self.offset {
            OffsetArg::Auto => OffsetPolicy::Auto { seed: self.seed },
            OffsetArg::Random => OffsetPolicy::Random { seed: self.seed },
            OffsetArg::Optimized => OffsetPolicy::Optimized {
                seed: self.seed,
                starts: 4,
            },
        };
        VoronoiConstellation::from_spec(&self.vc, mapping, policy)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
enum GrayArg {
    None,
    Exhaustive,
    Sampled,
}

#[derive(Args, Debug, Serialize)]
struct MeritsArgs {
    /// Constellation specs, comma separated or repeated.
    #[arg(long, value_delimiter = ',', required = true)]
    vc: Vec<String>,
    /// Monte Carlo energy samples for large constellations.
    #[arg(long, default_value = "1e6", value_parser = parse_count)]
    samples: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, value_enum, default_value = "none")]
    gray: GrayArg,
    #[arg(long)]
    csv: Option<PathBuf>,
}

#[derive(Args, Debug, Serialize)]
struct EncodeArgs {
    #[command(flatten)]
    vc: VcArgs,
    /// Message, comma separated.
    #[arg(
        long,
        value_delimiter = ',',
        allow_hyphen_values = true,
        required = true
    )]
    u: Vec<i64>,
}

#[derive(Args, Debug, Serialize)]
struct DecodeArgs {
    #[command(flatten)]
    vc: VcArgs,
    /// Received vector, comma separated.
    #[arg(
        long,
        value_delimiter = ',',
        allow_hyphen_values = true,
        required = true
    )]
    y: Vec<f64>,
}

#[derive(Args, Debug, Serialize)]
struct SweepArgs {
    /// TOML configuration; flags override its entries.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    vc: Option<String>,
    #[arg(long)]
    mapping: Option<String>,
    /// SNR grid in dB, comma separated.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    snr: Option<Vec<f64>>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, value_parser = parse_count)]
    max_symbols: Option<usize>,
    #[arg(long, value_parser = parse_count)]
    min_bit_errors: Option<usize>,
    /// MI symbols per SNR.
    #[arg(long, value_parser = parse_count)]
    samples: Option<usize>,
    /// importance or exact.
    #[arg(long)]
    backend: Option<String>,
    /// once, per-snr or fixed.
    #[arg(long)]
    d_policy: Option<String>,
    #[arg(long)]
    d: Option<usize>,
    #[arg(long)]
    d_cap: Option<usize>,
    #[arg(long)]
    csv: Option<PathBuf>,
    #[arg(long)]
    json: Option<PathBuf>,
    #[arg(long)]
    checkpoint_dir: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
enum LlrFormat {
    Csv,
    Bin,
}

#[derive(Args, Debug, Serialize)]
struct LlrArgs {
    #[command(flatten)]
    vc: VcArgs,
    #[arg(long, allow_hyphen_values = true)]
    snr: f64,
    #[arg(long, default_value = "1000", value_parser = parse_count)]
    symbols: usize,
    /// Important-set radius R².
    #[arg(long, default_value_t = 20)]
    r2: u64,
    /// Squared distance for empty bit classes; 2.5·R² when absent.
    #[arg(long)]
    q: Option<f64>,
    /// Exact LLRs over the whole constellation instead of the important set.
    #[arg(long)]
    exact: bool,
    #[arg(long, value_enum, default_value = "csv")]
    format: LlrFormat,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args, Debug, Serialize)]
struct NsmArgs {
    /// Lattice name: Zn, Dn, E8, BW16, Leech24 or L32.
    #[arg(long)]
    lattice: String,
    #[arg(long, default_value = "1e6", value_parser = parse_count)]
    samples: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Args, Debug, Serialize)]
struct ChooseDArgs {
    #[command(flatten)]
    vc: VcArgs,
    #[arg(long, allow_hyphen_values = true)]
    snr: f64,
    #[arg(long, default_value_t = 10)]
    probes: usize,
    #[arg(long, default_value_t = 5)]
    realizations: usize,
    #[arg(long, default_value_t = 40)]
    cap: usize,
    /// Per-shell budget K.
    #[arg(long, default_value_t = DEFAULT_SHELL_BUDGET)]
    budget: usize,
}

/// Accepts integers and scientific forms such as `1e6`.
fn parse_count(s: &str) -> std::result::Result<usize, String> {
    if let Ok(v) = s.parse::<usize>() {
        return Ok(v);
    }
    let f: f64 = s.parse().map_err(|_| format!("`{s}` is not a count"))?;
    if f >= 0.0 && f.fract() == 0.0 && f <= u64::MAX as f64 {
        Ok(f as usize)
    } else {
        Err(format!("`{s}` is not a whole non-negative count"))
    }
}

/// Rounds every float to 12 significant digits.
fn round12(v: Value) -> Value {
    match v {
        Value::Number(n) if n.is_f64() => {
            let f = n.as_f64().unwrap();
            let r: f64 = format!("{f:.11e}").parse().unwrap();
            json!(r)
        }
        Value::Array(a) => Value::Array(a.into_iter().map(round12).collect()),
        Value::Object(o) => Value::Object(o.into_iter().map(|(k, v)| (k, round12(v))).collect()),
        other => other,
    }
}

/// Output envelope: command, resolved configuration, its hash, seed, version, threads and result.
fn envelope<C: Serialize, R: Serialize>(
    command: &str,
    config: &C,
    seed: u64,
    threads: Option<usize>,
    result: &R,
) -> Value {
    json!({
        "command": command,
        "version": env!("CARGO_PKG_VERSION"),
        "seed": seed,
        "threads": threads,
        "config_hash": hash_json(config),
        "config": config,
        "result": round12(serde_json::to_value(result).expect("result serializes")),
    })
}

fn print(v: &Value) -> Result<()> {
    println!("{}", serde_json::to_string_pretty(v)?);
    Ok(())
}

fn resolve_sweep(a: &SweepArgs, threads: Option<usize>) -> Result<SweepConfig> {
    let mut cfg = match (&a.config, &a.vc, &a.snr) {
        (Some(p), _, _) => {
            let text = std::fs::read_to_string(p)?;
            toml::from_str::<SweepConfig>(&text).map_err(|e| Error::Config(e.to_string()))?
        }
        (None, Some(vc), Some(snr)) => SweepConfig::new(vc, snr.clone()),
        _ => return Err(Error::Config("give --config or both --vc and --snr".into())),
    };
    if let Some(v) = &a.vc {
        cfg.vc = v.clone();
    }
    if let Some(v) = &a.snr {
        cfg.snr_db = v.clone();
    }
    if a.mapping.is_some() {
        cfg.mapping = a.mapping.clone();
    }
    if let Some(v) = a.seed {
        cfg.seed = v;
    }
    if let Some(v) = a.max_symbols {
        cfg.max_symbols = v as u64;
    }
    if let Some(v) = a.min_bit_errors {
        cfg.min_bit_errors = v as u64;
    }
    if let Some(v) = a.samples {
        cfg.mi_samples = v;
    }
    if let Some(v) = &a.backend {
        cfg.mi_backend = match v.as_str() {
            "importance" => MiBackendKind::Importance,
            "exact" => MiBackendKind::Exact,
            _ => return Err(Error::Config(format!("unknown backend `{v}`"))),
        };
    }
    if let Some(v) = &a.d_policy {
        cfg.d_policy = match v.as_str() {
            "once" => DPolicy::Once,
            "per-snr" => DPolicy::PerSnr,
            "fixed" => DPolicy::Fixed,
            _ => return Err(Error::Config(format!("unknown d policy `{v}`"))),
        };
    }
    if a.d.is_some() {
        cfg.d = a.d;
        if a.d_policy.is_none() {
            cfg.d_policy = DPolicy::Fixed;
        }
    }
    if let Some(v) = a.d_cap {
        cfg.d_cap = v;
    }
    if a.csv.is_some() {
        cfg.output_csv = a.csv.clone();
    }
    if a.json.is_some() {
        cfg.output_json = a.json.clone();
    }
    if a.checkpoint_dir.is_some() {
        cfg.checkpoint_dir = a.checkpoint_dir.clone();
    }
    if threads.is_some() {
        cfg.threads = threads;
    }
    if cfg.offset == OffsetKind::Exact && cfg.offset_values.is_none() {
        return Err(Error::Config(
            "offset = \"exact\" needs offset_values".into(),
        ));
    }
    cfg.validate()?;
    Ok(cfg)
}

fn sweep_output(r: &SweepResult) -> Result<()> {
    r.write_outputs()?;
    let records: Vec<Value> = r
        .records
        .iter()
        .map(|rec| round12(serde_json::to_value(rec).expect("record serializes")))
        .collect();
    print(&json!({ "metadata": r.metadata, "records": records }))
}

fn run(cli: Cli) -> Result<()> {
    let threads = cli.threads;
    if threads == Some(0) {
        return Err(Error::Config("--threads must be positive".into()));
    }
    match cli.command {
        Command::Merits(a) => with_threads(threads, || {
            let gray = match a.gray {
                GrayArg::None => None,
                GrayArg::Exhaustive => Some(GrayPenaltyMode::Exhaustive { limit: 1 << 22 }),
                GrayArg::Sampled => Some(GrayPenaltyMode::Sampled {
                    samples: a.samples,
                    seed: a.seed,
                }),
            };
            let opts = MeritOptions {
                mc_samples: a.samples,
                seed: a.seed,
                gray,
            };
            let rows = tabulate_merits(&a.vc, &opts)?;
            if let Some(p) = &a.csv {
                write_merits_csv(std::fs::File::create(p)?, &rows)?;
            }
            print(&envelope("merits", &a, a.seed, threads, &rows))
        }),
        Command::Encode(a) => {
            let vc = a.vc.build()?;
            let x = vc.encode(&a.u)?;
            let out = json!({ "vc": vc.label(), "offset": vc.offset(), "u": a.u, "x": x });
            print(&envelope("encode", &a, a.vc.seed, threads, &out))
        }
        Command::Decode(a) => {
            let vc = a.vc.build()?;
            let u = vc.decode(&a.y)?;
            let mut s = vc.scratch();
            let in_region = vc.in_region(&a.y, &mut s);
            let out = json!({ "vc": vc.label(), "u": u, "y_in_region": in_region });
            print(&envelope("decode", &a, a.vc.seed, threads, &out))
        }
        Command::Ber(a) => {
            let cfg = resolve_sweep(&a, threads)?;
            sweep_output(&run_error_rate_sweep(&cfg)?)
        }
        Command::Mi(a) => {
            let cfg = resolve_sweep(&a, threads)?;
            sweep_output(&run_mi_sweep(&cfg)?)
        }
        Command::LlrExport(a) => with_threads(threads, || llr_export(&a, threads)),
        Command::Nsm(a) => with_threads(threads, || {
            let name = parse_lattice_name(&a.lattice, None)?;
            let lat = build_named(name)?;
            let est = nsm_estimate(&lat, a.samples, a.seed)?;
            let reference = reference_shaping_gain_db(name);
            let out = json!({
                "lattice": lat.label(),
                "G": est.g,
                "G_stderr": est.stderr,
                "gain_db": est.gain_db,
                "reference_gain_db": reference.is_finite().then_some(reference),
                "samples": est.samples,
            });
            print(&envelope("nsm", &a, a.seed, threads, &out))
        }),
        Command::ChooseD(a) => with_threads(threads, || {
            let vc = a.vc.build()?;
            let es = average_energy(&vc, a.vc.seed)?;
            let ch = AwgnChannel::from_snr(vc.dim(), es, a.snr)?;
            let tables = ShellTables::new(vc.dim(), a.cap + 1, a.budget)?;
            let opts = DChoiceOptions {
                probes: a.probes,
                realizations: a.realizations,
                cap: a.cap,
                seed: a.vc.seed,
                ..Default::default()
            };
            let c = choose_d(&vc, &ch, &tables, &opts)?;
            let out = json!({
                "vc": vc.label(),
                "snr_db": a.snr,
                "d": c.d,
                "ball_size": c.ball_size,
                "worst_increments": c.worst_increments,
            });
            print(&envelope("choose-d", &a, a.vc.seed, threads, &out))
        }),
    }
}

fn llr_export(a: &LlrArgs, threads: Option<usize>) -> Result<()> {
    let vc = a.vc.build()?;
    let n = vc.dim();
    let bits = vc.bits_per_symbol()?;
    let es = average_energy(&vc, a.vc.seed)?;
    let ch = AwgnChannel::from_snr(n, es, a.snr)?;
    let params = match a.q {
        Some(q) => LlrParams::new(a.r2, q)?,
        None => LlrParams::with_default_q(a.r2),
    };
    let table = if a.exact {
        Some(ConstellationTable::build(&vc, DEFAULT_TABLE_LIMIT)?)
    } else {
        None
    };
    let ball = if a.exact {
        None
    } else {
        Some(BallOffsets::new(n, a.r2)?)
    };
    let mut rng = ChaCha8Rng::seed_from_u64(a.vc.seed);
    let mut s = vc.scratch();
    let (mut u, mut x, mut y) = (vec![0i64; n], vec![0.0; n], vec![0.0; n]);
    let mut llr = vec![0.0; bits];
    let mut records = Vec::with_capacity(a.symbols * bits);
    for k in 0..a.symbols {
        vc.random_message(&mut rng, &mut u);
        vc.encode_into(&u, &mut s, &mut x);
        ch.sample_into(&x, &mut rng, &mut y);
        match (&table, &ball) {
            (Some(t), _) => llr_exact(t, &ch, &y, &mut llr)?,
            (None, Some(b)) => llr_approx(&vc, &ch, b, &params, &y, &mut s, &mut llr)?,
            (None, None) => unreachable!("one LLR method is always prepared"),
        }
        for (b, &l) in llr.iter().enumerate() {
            records.push(LlrRecord {
                symbol: k as u64,
                bit: b as u32,
                llr: l,
            });
        }
    }
    let file = std::io::BufWriter::new(std::fs::File::create(&a.out)?);
    match a.format {
        LlrFormat::Csv => write_llr_csv(file, &records)?,
        LlrFormat::Bin => write_llr_binary(file, bits as u32, &records)?,
    }
    let out = json!({
        "vc": vc.label(),
        "snr_db": a.snr,
        "symbols": a.symbols,
        "bits_per_symbol": bits,
        "records": records.len(),
        "method": if a.exact { "exact" } else { "important-set" },
        "r2": params.r2,
        "q": params.q,
        "out": a.out,
    });
    print(&envelope("llr-export", a, a.vc.seed, threads, &out))
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Config(_) | Error::Contract(_) => 2,
        Error::InvalidSpec { .. } | Error::UnsupportedLattice(_) => 3,
        Error::NonConvergence { .. } => 4,
        _ => 1,
    }
}

fn error_kind(e: &Error) -> &'static str {
    match exit_code(e) {
        2 => "config",
        3 => "unknown-vc-spec",
        4 => "non-convergence",
        _ => "error",
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let code = exit_code(&e);
            eprintln!(
                "{}",
                json!({ "error": error_kind(&e), "exit_code": code, "message": e.to_string() })
            );
            ExitCode::from(code)
        }
    }
}
