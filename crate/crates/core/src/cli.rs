//! Command-line front end. Results go to stdout as JSON (CSV for
//! `simulate --csv`). Exit status: 0 success, 1 domain error, 2 usage error.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

use crate::automorphism::{automorphism_group, is_automorphism};
use crate::error::Error;
use crate::gf2::{blta_affine_order, blta_order, block_structure, gro, sample_exact_structure, AffineMap, BlockStructure};
use crate::invariance::{commute_oracle, count_classes, count_classes_with, dec_aut, dec_group, OracleVerdict};
use crate::monomial::{CodeSpec, PolarCode, ResolvedCode};
use crate::sc::{DecoderFlavor, LlrVector, ScDecoder};
use crate::sim::{build_ensemble, run_bler, AeDecoder, EnsembleMode, SimConfig};

const SCHEMA_PREFIX: &str = "polar-automorph";

#[derive(Debug, Parser)]
#[command(name = "polar-automorph", version, about = "SC-invariant automorphisms of decreasing polar codes")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Resolve a code description into its information set.
    Construct(CodeArgs),
    /// Affine automorphism group structure.
    Autgroup(CodeArgs),
    /// SC-invariant group structure and order.
    Invgroup(CodeArgs),
    /// Decide SC-invariance of one matrix and cross-check with the oracle.
    Check(CheckArgs),
    /// Equivalence classes of affine automorphisms.
    CountClasses(CodeArgs),
    /// Sample an automorphism ensemble.
    Sample(SampleArgs),
    /// One-shot SC or AE decode of an LLR vector.
    Decode(DecodeArgs),
    /// Monte-Carlo BLER simulation.
    Simulate(SimulateArgs),
    /// Randomized invariance falsification per block structure.
    Oracle(OracleArgs),
}

#[derive(Debug, Args)]
struct CodeArgs {
    /// Code dimension (n = 2^m).
    #[arg(long)]
    m: Option<usize>,
    /// Generators of the decreasing information set, comma separated.
    #[arg(long = "i-min", value_delimiter = ',')]
    i_min: Option<Vec<u64>>,
    /// Explicit information set, comma separated.
    #[arg(long, value_delimiter = ',')]
    info: Option<Vec<u64>>,
    /// Information set from BEC ranking with this erasure probability (needs --k).
    #[arg(long)]
    erasure: Option<f64>,
    /// Dimension for --erasure.
    #[arg(long)]
    k: Option<usize>,
    /// JSON code description: {"m":8,"i_min_z":[31,57]}.
    #[arg(long = "code-file")]
    code_file: Option<PathBuf>,
    /// Read --i-min / --info as a-space labels instead of positions z.
    #[arg(long = "a-space")]
    a_space: bool,
}

#[derive(Debug, Args)]
struct CheckArgs {
    #[command(flatten)]
    code: CodeArgs,
    /// Matrix (optionally followed by a shift line) in the text format.
    #[arg(long = "matrix-file")]
    matrix_file: PathBuf,
    #[arg(long, default_value_t = 1000)]
    trials: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Debug, Args)]
struct SampleArgs {
    #[command(flatten)]
    code: CodeArgs,
    #[arg(long)]
    t: usize,
    #[arg(long, default_value = "distinct_classes")]
    mode: EnsembleMode,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Write the maps here, separated by blank lines.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct DecodeArgs {
    #[command(flatten)]
    code: CodeArgs,
    /// Whitespace-separated LLRs; `inf` and `-inf` allowed.
    #[arg(long = "llr-file")]
    llr_file: PathBuf,
    /// Ensemble written by `sample`; plain SC when absent and --t is 1.
    #[arg(long = "ensemble-file")]
    ensemble_file: Option<PathBuf>,
    #[arg(long, default_value_t = 1)]
    t: usize,
    #[arg(long, default_value = "distinct_classes")]
    mode: EnsembleMode,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value = "minsum")]
    flavor: FlavorArg,
}

#[derive(Debug, Args)]
struct SimulateArgs {
    /// SimConfig JSON; other flags override its fields.
    #[arg(long)]
    config: Option<PathBuf>,
    #[command(flatten)]
    code: CodeArgs,
    #[arg(long)]
    t: Option<usize>,
    #[arg(long)]
    mode: Option<EnsembleMode>,
    /// Eb/N0 grid in dB, comma separated.
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    ebn0: Option<Vec<f64>>,
    #[arg(long)]
    frames: Option<usize>,
    #[arg(long = "max-errors")]
    max_errors: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    flavor: Option<FlavorArg>,
    #[arg(long)]
    threads: Option<usize>,
    /// Print CSV instead of JSON.
    #[arg(long)]
    csv: bool,
    /// Also write the JSON report to this path.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct OracleArgs {
    #[command(flatten)]
    code: CodeArgs,
    /// Only this structure; default is every structure inside the automorphism group.
    #[arg(long)]
    structure: Option<BlockStructure>,
    /// Random matrices per structure.
    #[arg(long, default_value_t = 10)]
    samples: usize,
    #[arg(long, default_value_t = 1000)]
    trials: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Debug, Clone, Copy, clap::ValueEnum)]
enum FlavorArg {
    Exact,
    Minsum,
}

impl From<FlavorArg> for DecoderFlavor {
    fn from(f: FlavorArg) -> Self {
        match f {
            FlavorArg::Exact => DecoderFlavor::Exact,
            FlavorArg::Minsum => DecoderFlavor::Minsum,
        }
    }
}

#[derive(Debug)]
enum CliError {
    Usage(String),
    Domain(Error),
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Domain(e)
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Domain(e.into())
    }
}

type CliResult<T> = std::result::Result<T, CliError>;

fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

fn read_file(path: &Path) -> CliResult<String> {
    std::fs::read_to_string(path).map_err(|e| CliError::Domain(Error::Io(format!("{}: {e}", path.display()))))
}

impl CodeArgs {
    fn given(&self) -> bool {
        self.m.is_some() || self.i_min.is_some() || self.info.is_some() || self.erasure.is_some() || self.code_file.is_some()
    }

    fn to_z(&self, m: usize, labels: &[u64]) -> CliResult<Vec<u64>> {
        if !self.a_space {
            return Ok(labels.to_vec());
        }
        let top = (1u64 << m) - 1;
        labels
            .iter()
            .map(|&a| {
                if a > top {
                    Err(CliError::Domain(Error::IndexOutOfRange { index: a, m }))
                } else {
                    Ok(top - a)
                }
            })
            .collect()
    }

    fn spec(&self) -> CliResult<CodeSpec> {
        if let Some(path) = &self.code_file {
            if self.i_min.is_some() || self.info.is_some() || self.erasure.is_some() {
                return Err(usage("--code-file cannot be combined with --i-min, --info or --erasure"));
            }
            return Ok(CodeSpec::from_json(&read_file(path)?)?);
        }
        let m = self.m.ok_or_else(|| usage("missing --m (or give --code-file)"))?;
        let sources = [self.i_min.is_some(), self.info.is_some(), self.erasure.is_some()];
        match sources.iter().filter(|&&b| b).count() {
            0 => return Err(usage("missing code: give one of --i-min, --info, --erasure, --code-file")),
            1 => {}
            _ => return Err(usage("--i-min, --info and --erasure are mutually exclusive")),
        }
        if crate::monomial::MAX_CODE_DIM < m {
            return Err(CliError::Domain(Error::UnsupportedDimension(m)));
        }
        let mut spec = CodeSpec {
            m,
            i_min_z: None,
            info_z: None,
            bec: None,
        };
        if let Some(v) = &self.i_min {
            spec.i_min_z = Some(self.to_z(m, v)?);
        } else if let Some(v) = &self.info {
            spec.info_z = Some(self.to_z(m, v)?);
        } else {
            let erasure = self.erasure.expect("counted above");
            let k = self.k.ok_or_else(|| usage("--erasure needs --k"))?;
            spec.bec = Some(crate::monomial::BecSpec { erasure, k });
        }
        Ok(spec)
    }

    fn code(&self) -> CliResult<PolarCode> {
        Ok(self.spec()?.resolve()?)
    }
}

fn schema(cmd: &str) -> String {
    format!("{SCHEMA_PREFIX}/{cmd}/v1")
}

fn code_summary(code: &PolarCode) -> Value {
    json!({ "m": code.m(), "n": code.n(), "K": code.k() })
}

fn baseline_structure(m: usize) -> CliResult<BlockStructure> {
    let sizes = if m >= 2 {
        std::iter::once(2).chain(std::iter::repeat_n(1, m - 2)).collect()
    } else {
        vec![1; m]
    };
    Ok(BlockStructure::new(sizes)?)
}

fn cmd_construct(args: &CodeArgs) -> CliResult<Value> {
    let spec = args.spec()?;
    let code = spec.resolve()?;
    let resolved = ResolvedCode::from(&code);
    let mut out = json!({ "schema": schema("construct") });
    let body = serde_json::to_value(&resolved).map_err(Error::from)?;
    merge(&mut out, body);
    if let Some(i_min) = &spec.i_min_z {
        let top = (1u64 << code.m()) - 1;
        out["i_min_z"] = json!(i_min);
        out["i_min_a"] = json!(i_min.iter().map(|z| top - z).collect::<Vec<_>>());
    }
    Ok(out)
}

fn merge(target: &mut Value, extra: Value) {
    if let (Value::Object(t), Value::Object(e)) = (target, extra) {
        t.extend(e);
    }
}

fn cmd_autgroup(args: &CodeArgs) -> CliResult<Value> {
    let code = args.code()?;
    let s = automorphism_group(code.info())?;
    Ok(json!({
        "schema": schema("autgroup"),
        "code": code_summary(&code),
        "structure": s,
        "order": blta_order(&s),
        "affine_order": blta_affine_order(&s),
    }))
}

fn cmd_invgroup(args: &CodeArgs) -> CliResult<Value> {
    let code = args.code()?;
    let s = dec_group(code.info())?;
    let aut = automorphism_group(code.info())?;
    let baseline = gro(&aut, &baseline_structure(code.m())?)?;
    let summary = count_classes(code.info())?;
    Ok(json!({
        "schema": schema("invgroup"),
        "code": code_summary(&code),
        "structure": s,
        "order": blta_order(&s),
        "affine_order": blta_affine_order(&s),
        "aut_structure": aut,
        "baseline_order": blta_order(&baseline),
        "class_count": summary.class_count,
    }))
}

fn cmd_count_classes(args: &CodeArgs) -> CliResult<Value> {
    let code = args.code()?;
    let summary = count_classes(code.info())?;
    let base = count_classes_with(code.info(), &baseline_structure(code.m())?)?;
    let as_json = |g: &crate::gf2::GroupOrder| match g.to_u128() {
        Some(v) if v <= u64::MAX as u128 => json!(v as u64),
        _ => json!(g.value().to_string()),
    };
    Ok(json!({
        "schema": schema("count-classes"),
        "code": code_summary(&code),
        "aut_structure": summary.aut_structure,
        "inv_structure": summary.inv_structure,
        "classes": as_json(&summary.class_count),
        "classes_factored": summary.class_count,
        "baseline_2_1": as_json(&base.class_count),
    }))
}

fn read_map(path: &Path) -> CliResult<AffineMap> {
    Ok(read_file(path)?.parse::<AffineMap>()?)
}

fn cmd_check(args: &CheckArgs) -> CliResult<Value> {
    let code = args.code.code()?;
    let map = read_map(&args.matrix_file)?;
    if map.dim() != code.m() {
        return Err(Error::DimensionMismatch {
            expected: code.m(),
            actual: map.dim(),
        }
        .into());
    }
    if !is_automorphism(map.matrix(), code.info()) {
        return Err(Error::NotAutomorphism.into());
    }
    let s = block_structure(map.matrix())?;
    let verdict = dec_aut(&s, code.info())?;
    let mut rng = ChaCha8Rng::seed_from_u64(args.seed);
    let oracle = commute_oracle(&map, code.info(), args.trials, &mut rng)?;
    let mut out = json!({
        "schema": schema("check"),
        "code": code_summary(&code),
        "structure": s,
        "dec_aut": verdict.value,
        "trace": verdict.trace,
    });
    match oracle {
        OracleVerdict::Commutes { probes, skipped } => {
            out["oracle"] = json!("commutes");
            out["probes"] = json!(probes);
            out["skipped"] = json!(skipped);
        }
        OracleVerdict::CounterExample { probe, y } => {
            out["oracle"] = json!("counterexample");
            out["probe_index"] = json!(probe);
            out["probe_counterexample"] = json!(y.iter().map(|v| llr_token(*v)).collect::<Vec<_>>());
        }
    }
    out["agree"] = json!(verdict.value == out["oracle"].eq("commutes"));
    Ok(out)
}

/// JSON has no infinities; they are written as strings.
fn llr_token(v: f64) -> Value {
    if v.is_finite() {
        json!(v)
    } else if v > 0.0 {
        json!("inf")
    } else {
        json!("-inf")
    }
}

fn render_maps(maps: &[AffineMap]) -> String {
    maps.iter().map(|t| t.to_string()).collect::<Vec<_>>().join("\n")
}

fn parse_maps(text: &str) -> CliResult<Vec<AffineMap>> {
    let mut maps = Vec::new();
    let mut block = String::new();
    for line in text.lines().chain(std::iter::once("")) {
        if line.trim().is_empty() {
            if !block.trim().is_empty() {
                maps.push(block.parse::<AffineMap>()?);
            }
            block.clear();
        } else {
            block.push_str(line);
            block.push('\n');
        }
    }
    Ok(maps)
}

fn cmd_sample(args: &SampleArgs) -> CliResult<Value> {
    let code = args.code.code()?;
    let mut rng = ChaCha8Rng::seed_from_u64(args.seed);
    let maps = build_ensemble(&code, args.t, args.mode, &mut rng)?;
    if let Some(path) = &args.out {
        std::fs::write(path, render_maps(&maps))?;
    }
    Ok(json!({
        "schema": schema("sample"),
        "code": code_summary(&code),
        "t": args.t,
        "mode": args.mode.to_string(),
        "seed": args.seed,
        "maps": maps.iter().map(|t| t.to_string()).collect::<Vec<_>>(),
    }))
}

fn cmd_decode(args: &DecodeArgs) -> CliResult<Value> {
    let code = args.code.code()?;
    let y: LlrVector = read_file(&args.llr_file)?.parse()?;
    if y.len() != code.n() {
        return Err(Error::LengthMismatch {
            expected: code.n(),
            actual: y.len(),
        }
        .into());
    }
    let flavor = DecoderFlavor::from(args.flavor);
    let maps = match &args.ensemble_file {
        Some(path) => parse_maps(&read_file(path)?)?,
        None if args.t <= 1 => Vec::new(),
        None => build_ensemble(&code, args.t, args.mode, &mut ChaCha8Rng::seed_from_u64(args.seed))?,
    };
    if maps.is_empty() {
        let out = ScDecoder::new(flavor).decode(&code, y.as_slice())?;
        return Ok(json!({
            "schema": schema("decode"),
            "code": code_summary(&code),
            "decoder": "sc",
            "codeword": out.codeword,
            "message": out.message,
            "info_bits": out.info_bits(&code),
        }));
    }
    let autos = maps
        .iter()
        .map(|t| crate::automorphism::AffineAutomorphism::new(*t, &code))
        .collect::<crate::Result<Vec<_>>>()?;
    let out = AeDecoder::new(flavor).decode(&code, &autos, y.as_slice())?;
    Ok(json!({
        "schema": schema("decode"),
        "code": code_summary(&code),
        "decoder": "ae",
        "t": maps.len(),
        "codeword": out.codeword(),
        "selected": out.selected,
        "metrics": out.metrics,
        "branches_agree": out.branches_agree(),
    }))
}

fn simulate_config(args: &SimulateArgs) -> CliResult<SimConfig> {
    let mut cfg = match &args.config {
        Some(path) => SimConfig::from_json(&read_file(path)?)?,
        None => {
            let code = args.code.spec()?;
            SimConfig {
                code,
                t: args.t.ok_or_else(|| usage("missing --t (or give --config)"))?,
                mode: EnsembleMode::default(),
                ebn0_db: args.ebn0.clone().ok_or_else(|| usage("missing --ebn0 (or give --config)"))?,
                max_frames: args.frames.ok_or_else(|| usage("missing --frames (or give --config)"))?,
                max_errors: 100,
                seed: 0,
                flavor: DecoderFlavor::default(),
                threads: None,
            }
        }
    };
    if args.config.is_some() && args.code.given() {
        cfg.code = args.code.spec()?;
    }
    if let Some(t) = args.t {
        cfg.t = t;
    }
    if let Some(mode) = args.mode {
        cfg.mode = mode;
    }
    if let Some(e) = &args.ebn0 {
        cfg.ebn0_db = e.clone();
    }
    if let Some(f) = args.frames {
        cfg.max_frames = f;
    }
    if let Some(e) = args.max_errors {
        cfg.max_errors = e;
    }
    if let Some(s) = args.seed {
        cfg.seed = s;
    }
    if let Some(f) = args.flavor {
        cfg.flavor = f.into();
    }
    if let Some(t) = args.threads {
        cfg.threads = Some(t);
    }
    Ok(cfg)
}

enum Output {
    Json(Value),
    Text(String),
}

fn cmd_simulate(args: &SimulateArgs) -> CliResult<Output> {
    let cfg = simulate_config(args)?;
    let report = run_bler(&cfg)?;
    if let Some(path) = &args.out {
        std::fs::write(path, serde_json::to_string_pretty(&report).map_err(Error::from)?)?;
    }
    if args.csv {
        Ok(Output::Text(report.to_csv()?))
    } else {
        Ok(Output::Json(serde_json::to_value(&report).map_err(Error::from)?))
    }
}

fn cmd_oracle(args: &OracleArgs) -> CliResult<Value> {
    let code = args.code.code()?;
    let aut = automorphism_group(code.info())?;
    let structures = match &args.structure {
        Some(s) if s.m() != code.m() => {
            return Err(usage(format!("--structure {s} does not sum to m = {}", code.m())));
        }
        Some(s) if !aut.is_refined_by(s) => {
            return Err(Error::NotAutomorphism.into());
        }
        Some(s) => vec![s.clone()],
        None => BlockStructure::all(code.m())
            .into_iter()
            .filter(|s| aut.is_refined_by(s))
            .collect(),
    };
    let mut rng = ChaCha8Rng::seed_from_u64(args.seed);
    let mut rows = Vec::new();
    let mut disagreements = 0;
    for s in structures {
        let verdict = dec_aut(&s, code.info())?.value;
        let mut counterexamples = 0;
        for _ in 0..args.samples {
            let m = sample_exact_structure(&s, &mut rng)?;
            let shift = rand::Rng::gen::<u32>(&mut rng) & ((1u32 << code.m()) - 1);
            let map = AffineMap::new(m, shift)?;
            if !commute_oracle(&map, code.info(), args.trials, &mut rng)?.commutes() {
                counterexamples += 1;
            }
        }
        let agree = if verdict {
            counterexamples == 0
        } else {
            counterexamples == args.samples
        };
        disagreements += usize::from(!agree);
        rows.push(json!({
            "structure": s,
            "dec_aut": verdict,
            "samples": args.samples,
            "counterexamples": counterexamples,
            "agree": agree,
        }));
    }
    Ok(json!({
        "schema": schema("oracle"),
        "code": code_summary(&code),
        "aut_structure": aut,
        "trials": args.trials,
        "structures": rows,
        "disagreements": disagreements,
    }))
}

fn dispatch(cli: &Cli) -> CliResult<Output> {
    let json = match &cli.command {
        Command::Construct(a) => cmd_construct(a)?,
        Command::Autgroup(a) => cmd_autgroup(a)?,
        Command::Invgroup(a) => cmd_invgroup(a)?,
        Command::Check(a) => cmd_check(a)?,
        Command::CountClasses(a) => cmd_count_classes(a)?,
        Command::Sample(a) => cmd_sample(a)?,
        Command::Decode(a) => cmd_decode(a)?,
        Command::Simulate(a) => return cmd_simulate(a),
        Command::Oracle(a) => cmd_oracle(a)?,
    };
    Ok(Output::Json(json))
}

/// Runs one invocation; `args` includes the program name.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = if code == 0 {
                write!(out, "{e}")
            } else {
                write!(err, "{e}")
            };
            return code;
        }
    };
    let result = dispatch(&cli).and_then(|o| {
        match o {
            Output::Json(v) => writeln!(out, "{}", serde_json::to_string_pretty(&v).map_err(Error::from)?)?,
            Output::Text(t) => write!(out, "{t}")?,
        }
        Ok(())
    });
    match result {
        Ok(()) => 0,
        Err(CliError::Usage(msg)) => {
            let _ = writeln!(err, "error: {msg}");
            2
        }
        Err(CliError::Domain(e)) => {
            let _ = writeln!(err, "error: {e}");
            1
        }
    }
}
