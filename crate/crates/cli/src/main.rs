//! `cleancomm`: build, run, verify and analyse clean two-party protocols.

use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Map, Value};

use cleancomm::engine::{
    run, script_from_json, script_to_json, verify_clean, AnswerMode, Assignment, FinalState, ProtocolScript,
    VerifyOptions, ALICE_INPUT, ANSWER_REGISTER, BOB_INPUT,
};
use cleancomm::fnlab::{
    comm_matrix, compile_clean, extract_rectangles, gf2_decompose, log_rank_bound, rank, CompileMode, Field,
};
use cleancomm::infocost::{classical_info_bounds, leak_comparison, qic, FamilyKind, InputFamily};
use cleancomm::protocols::ProtocolFamily;
use cleancomm::statecore::PureState;
use cleancomm::TruthTable;

#[derive(Parser)]
#[command(name = "cleancomm", version, about = "Exact simulator and verifier for clean two-party protocols")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a protocol on basis inputs and report the outcome
    Run {
        #[command(flatten)]
        source: ScriptSource,
        /// Alice's input as a bit string
        #[arg(long)]
        x: String,
        /// Bob's input as a bit string
        #[arg(long)]
        y: String,
        /// Initial answer bit
        #[arg(long, default_value_t = 0)]
        z: u8,
        #[command(flatten)]
        out: Output,
    },
    /// Check correctness and cleanliness against a function
    Verify {
        #[command(flatten)]
        source: ScriptSource,
        #[command(flatten)]
        function: FunctionSource,
        #[command(flatten)]
        verify: VerifyArgs,
        #[command(flatten)]
        out: Output,
    },
    /// Static communication cost
    Cost {
        #[command(flatten)]
        source: ScriptSource,
        #[command(flatten)]
        out: Output,
    },
    /// Quantum information cost on a purified input family
    Qic {
        #[command(flatten)]
        source: ScriptSource,
        #[arg(long, value_enum, default_value_t = InputKind::Cc)]
        input: InputKind,
        #[command(flatten)]
        out: Output,
    },
    /// Residual of the information-flow identity
    Flow {
        #[command(flatten)]
        source: ScriptSource,
        #[arg(long, value_enum, default_value_t = InputKind::Cc)]
        input: InputKind,
        #[command(flatten)]
        out: Output,
    },
    /// Alice's leak on classical versus superposed inputs (uniform)
    Leakcmp {
        #[command(flatten)]
        source: ScriptSource,
        #[command(flatten)]
        out: Output,
    },
    /// Transcript information bounds for a classical protocol (uniform)
    Cinfo {
        #[command(flatten)]
        source: ScriptSource,
        #[command(flatten)]
        out: Output,
    },
    /// Compile a function into a clean protocol through its GF(2) rank
    Compile {
        #[command(flatten)]
        function: FunctionSource,
        #[arg(long)]
        n: Option<usize>,
        #[arg(long, value_enum, default_value_t = ModeArg::Quantum)]
        mode: ModeArg,
        /// Also write the compiled script here
        #[arg(long)]
        script_out: Option<PathBuf>,
        #[command(flatten)]
        verify: VerifyArgs,
        #[command(flatten)]
        out: Output,
    },
    /// Rank of a communication matrix and the log-rank bound
    Rank {
        #[command(flatten)]
        function: FunctionSource,
        #[arg(long)]
        n: Option<usize>,
        #[arg(long, value_enum, default_value_t = FieldArg::Real)]
        field: FieldArg,
        #[command(flatten)]
        out: Output,
    },
    /// Transcript rectangles of a classical protocol
    Rects {
        #[command(flatten)]
        source: ScriptSource,
        #[command(flatten)]
        function: FunctionSource,
        #[command(flatten)]
        out: Output,
    },
    /// Cost table over a range of input sizes
    Sweep {
        #[arg(long)]
        protocol: String,
        #[arg(long)]
        n_min: usize,
        #[arg(long)]
        n_max: usize,
        #[arg(long)]
        k: Option<usize>,
        #[command(flatten)]
        out: Output,
    },
    /// Write a built protocol as a script document
    Export {
        #[command(flatten)]
        source: ScriptSource,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Load and validate a script document
    Import {
        #[arg(long)]
        script: PathBuf,
        #[command(flatten)]
        out: Output,
    },
}

#[derive(Args)]
struct ScriptSource {
    /// Protocol family id
    #[arg(long, conflicts_with = "script")]
    protocol: Option<String>,
    #[arg(long)]
    n: Option<usize>,
    /// Block size for classical-ip
    #[arg(long)]
    k: Option<usize>,
    /// Script document instead of a built protocol
    #[arg(long)]
    script: Option<PathBuf>,
}

#[derive(Args)]
struct FunctionSource {
    /// Named function: ip, eq, disj, zero, one
    #[arg(long, conflicts_with = "table")]
    function: Option<String>,
    /// Truth-table document
    #[arg(long)]
    table: Option<PathBuf>,
}

#[derive(Args)]
struct VerifyArgs {
    /// Check every basis input (otherwise a seeded sample)
    #[arg(long)]
    exhaustive: bool,
    /// Number of sampled basis inputs without --exhaustive
    #[arg(long, default_value_t = 64)]
    basis_samples: usize,
    /// Random two-term superpositions to check
    #[arg(long, default_value_t = 32)]
    samples: usize,
    #[arg(long, default_value_t = 1e-10)]
    tolerance: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Treat ancillas that end with the other party as a failure
    #[arg(long)]
    strict_ownership: bool,
}

#[derive(Args)]
struct Output {
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
    /// Write the report here instead of stdout
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Json,
    Csv,
    Text,
}

#[derive(Clone, Copy, ValueEnum)]
enum InputKind {
    Cc,
    Cs,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Quantum,
    Classical,
}

#[derive(Clone, Copy, ValueEnum)]
enum FieldArg {
    Real,
    Gf2,
}

/// Errors that map to exit code 2.
struct UsageError(String);

impl<E: std::fmt::Display> From<E> for UsageError {
    fn from(e: E) -> Self {
        UsageError(e.to_string())
    }
}

type Outcome = Result<bool, UsageError>;

fn load_script(src: &ScriptSource) -> Result<ProtocolScript, UsageError> {
    match (&src.protocol, &src.script) {
        (Some(id), None) => {
            let family: ProtocolFamily = id.parse()?;
            let n = src.n.ok_or_else(|| UsageError("--n is required with --protocol".into()))?;
            Ok(family.build(n, src.k)?)
        }
        (None, Some(path)) => {
            let text = fs::read_to_string(path).map_err(|e| UsageError(format!("{}: {e}", path.display())))?;
            Ok(script_from_json(&text)?)
        }
        _ => Err(UsageError("give either --protocol or --script".into())),
    }
}

fn load_function(src: &FunctionSource, n: usize) -> Result<TruthTable, UsageError> {
    if let Some(path) = &src.table {
        let text = fs::read_to_string(path).map_err(|e| UsageError(format!("{}: {e}", path.display())))?;
        let table = TruthTable::from_json(&text)?;
        if table.n() != n {
            return Err(UsageError(format!("truth table has n = {}, expected {n}", table.n())));
        }
        return Ok(table);
    }
    let name = src.function.as_deref().unwrap_or("ip");
    if n > cleancomm::boolfn::MAX_TABLE_N {
        return Err(UsageError(format!("n = {n} is too large for a truth table")));
    }
    TruthTable::by_name(name, n).ok_or_else(|| UsageError(format!("unknown function `{name}`")))
}

/// Function for the compile/rank commands, where `n` comes from the table
/// or from `--n`.
fn standalone_function(src: &FunctionSource, n: Option<usize>) -> Result<TruthTable, UsageError> {
    if let Some(path) = &src.table {
        let text = fs::read_to_string(path).map_err(|e| UsageError(format!("{}: {e}", path.display())))?;
        return Ok(TruthTable::from_json(&text)?);
    }
    let n = n.ok_or_else(|| UsageError("--n is required with --function".into()))?;
    load_function(src, n)
}

fn parse_bits(s: &str, n: usize, flag: &str) -> Result<u64, UsageError> {
    if s.len() != n || !s.chars().all(|c| c == '0' || c == '1') {
        return Err(UsageError(format!("--{flag} must be a bit string of length {n}")));
    }
    Ok(u64::from_str_radix(s, 2).expect("checked digits"))
}

fn options(v: &VerifyArgs) -> Result<VerifyOptions, UsageError> {
    if !(v.tolerance > 0.0) {
        return Err(UsageError("--tolerance must be positive".into()));
    }
    Ok(VerifyOptions {
        basis_samples: (!v.exhaustive).then_some(v.basis_samples),
        superposition_samples: v.samples,
        tolerance: v.tolerance,
        seed: v.seed,
        strict_ownership: v.strict_ownership,
    })
}

fn scalar_text(v: &Value) -> String {
    match v {
        Value::String(s) => s.clone(),
        other => other.to_string(),
    }
}

fn csv_field(s: String) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s
    }
}

fn render(value: &Value, format: Format) -> String {
    match format {
        Format::Json => serde_json::to_string_pretty(value).expect("json values serialize") + "\n",
        Format::Text => match value {
            Value::Object(map) => map.iter().map(|(k, v)| format!("{k}: {}\n", scalar_text(v))).collect(),
            Value::Array(rows) => rows.iter().map(|r| render(r, Format::Text) + "\n").collect(),
            other => scalar_text(other) + "\n",
        },
        Format::Csv => {
            let rows: Vec<&Map<String, Value>> = match value {
                Value::Array(rows) => rows.iter().filter_map(Value::as_object).collect(),
                Value::Object(map) => vec![map],
                _ => vec![],
            };
            let Some(first) = rows.first() else { return String::new() };
            let header: Vec<&String> = first.keys().collect();
            let mut out = header.iter().map(|h| csv_field(h.to_string())).collect::<Vec<_>>().join(",") + "\n";
            for row in rows {
                let line: Vec<String> =
                    header.iter().map(|h| csv_field(row.get(*h).map(scalar_text).unwrap_or_default())).collect();
                out += &(line.join(",") + "\n");
            }
            out
        }
    }
}

fn emit(value: Value, out: &Output) -> Result<(), UsageError> {
    let text = render(&value, out.format);
    match &out.out {
        Some(path) => fs::write(path, text).map_err(|e| UsageError(format!("{}: {e}", path.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn family_of(kind: InputKind, n: usize) -> InputFamily {
    match kind {
        InputKind::Cc => InputFamily::uniform(FamilyKind::ClassicalClassical, n),
        InputKind::Cs => InputFamily::uniform(FamilyKind::ClassicalSuperposed, n),
    }
}

fn cmd_run(source: &ScriptSource, x: &str, y: &str, z: u8, out: &Output) -> Outcome {
    let script = load_script(source)?;
    let n = script.n;
    let (xv, yv) = (parse_bits(x, n, "x")?, parse_bits(y, n, "y")?);
    if z > 1 {
        return Err(UsageError("--z must be 0 or 1".into()));
    }
    let mut values = vec![(ALICE_INPUT.to_string(), xv), (BOB_INPUT.to_string(), yv)];
    let has_ans = script.layout.get(ANSWER_REGISTER).is_some();
    if has_ans {
        values.push((ANSWER_REGISTER.to_string(), u64::from(z)));
    }
    let output = run(&script, Assignment::Basis(values))?;
    let mut report = json!({
        "protocol": script.name,
        "n": n,
        "x": x,
        "y": y,
        "cost": output.cost,
        "transcript": output.transcript,
    });
    let width = script.layout.total_width();
    match &output.final_state {
        FinalState::Classical(bits) => {
            let s: String = bits.iter().map(|&b| if b { '1' } else { '0' }).collect();
            report["final_bits"] = json!(s);
            if has_ans {
                report["ans"] = json!(script.layout.bits_value(bits, ANSWER_REGISTER)?);
            }
        }
        FinalState::Quantum(state) => {
            let (idx, amp) = dominant(state);
            report["final_basis"] = json!(format!("{idx:0width$b}"));
            report["amplitude"] = json!({ "re": amp.0, "im": amp.1 });
            if has_ans {
                report["ans"] = json!(script.layout.register_value(idx, ANSWER_REGISTER)?);
            }
            if script.answer_mode == AnswerMode::Phase {
                report["phase"] = json!(if amp.0 < 0.0 { -1 } else { 1 });
            }
        }
    }
    emit(report, out)?;
    Ok(true)
}

/// Largest-magnitude basis index with its amplitude as `(re, im)`.
fn dominant(state: &PureState) -> (usize, (f64, f64)) {
    state
        .amplitudes()
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.norm_sqr().total_cmp(&b.1.norm_sqr()))
        .map(|(i, a)| (i, (a.re, a.im)))
        .expect("states are nonempty")
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = dispatch(&cli.command);
    match outcome {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(UsageError(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}

fn dispatch(command: &Command) -> Outcome {
    match command {
        Command::Run { source, x, y, z, out } => cmd_run(source, x, y, *z, out),
        Command::Verify { source, function, verify, out } => {
            let script = load_script(source)?;
            let f = load_function(function, script.n)?;
            let report = verify_clean(&script, &f, &options(verify)?)?;
            let passed = report.passed;
            emit(serde_json::to_value(&report)?, out)?;
            Ok(passed)
        }
        Command::Cost { source, out } => {
            let script = load_script(source)?;
            let mut report = json!({ "protocol": script.name, "n": script.n });
            let cost = script.cost();
            let Value::Object(map) = serde_json::to_value(cost)? else { unreachable!() };
            for (k, v) in map {
                report[k] = v;
            }
            report["total"] = json!(cost.total());
            if let Some(id) = &source.protocol {
                let declared = id.parse::<ProtocolFamily>()?.declared_cost(script.n, source.k);
                report["declared_total"] = json!(declared.total());
            }
            emit(report, out)?;
            Ok(true)
        }
        Command::Qic { source, input, out } => {
            let script = load_script(source)?;
            let report = qic(&script, &family_of(*input, script.n))?;
            emit(serde_json::to_value(&report)?, out)?;
            Ok(true)
        }
        Command::Flow { source, input, out } => {
            let script = load_script(source)?;
            let report = qic(&script, &family_of(*input, script.n))?;
            emit(
                json!({
                    "protocol": report.protocol,
                    "n": report.n,
                    "family": report.family,
                    "I(B_IN:R)": report.i_bin_r,
                    "I(B_OUT:R)": report.i_bout_r,
                    "QLA": report.qla,
                    "QLB": report.qlb,
                    "flow_residual": report.flow_residual,
                }),
                out,
            )?;
            Ok(true)
        }
        Command::Leakcmp { source, out } => {
            let script = load_script(source)?;
            let side = 1usize << script.n;
            let mu = vec![1.0 / side as f64; side];
            let report = leak_comparison(&script, mu.clone(), mu)?;
            emit(serde_json::to_value(&report)?, out)?;
            Ok(true)
        }
        Command::Cinfo { source, out } => {
            let script = load_script(source)?;
            let report = classical_info_bounds(&script, None)?;
            emit(serde_json::to_value(&report)?, out)?;
            Ok(true)
        }
        Command::Compile { function, n, mode, script_out, verify, out } => {
            let f = standalone_function(function, *n)?;
            let mode = match mode {
                ModeArg::Quantum => CompileMode::Quantum,
                ModeArg::Classical => CompileMode::Classical,
            };
            let compiled = compile_clean(&gf2_decompose(&comm_matrix(&f)), mode)?;
            let check = verify_clean(&compiled.script, &f, &options(verify)?)?;
            if let Some(path) = script_out {
                fs::write(path, script_to_json(&compiled.script))
                    .map_err(|e| UsageError(format!("{}: {e}", path.display())))?;
            }
            let mut report = serde_json::to_value(&compiled.report)?;
            report["verified"] = json!(check.passed);
            report["worst_deviation"] = json!(check.worst_deviation);
            emit(report, out)?;
            Ok(check.passed)
        }
        Command::Rank { function, n, field, out } => {
            let f = standalone_function(function, *n)?;
            let m = comm_matrix(&f);
            let field = match field {
                FieldArg::Real => Field::Real,
                FieldArg::Gf2 => Field::Gf2,
            };
            emit(
                json!({
                    "n": f.n(),
                    "field": field,
                    "rank": rank(&m, field),
                    "log_rank_bound": log_rank_bound(&m),
                }),
                out,
            )?;
            Ok(true)
        }
        Command::Rects { source, function, out } => {
            let script = load_script(source)?;
            let f = load_function(function, script.n)?;
            let partition = extract_rectangles(&script, &f)?;
            let valid = partition.is_valid();
            emit(serde_json::to_value(&partition)?, out)?;
            Ok(valid)
        }
        Command::Sweep { protocol, n_min, n_max, k, out } => {
            let family: ProtocolFamily = protocol.parse()?;
            if n_min > n_max || *n_min == 0 {
                return Err(UsageError("need 1 <= --n-min <= --n-max".into()));
            }
            let mut rows = Vec::new();
            for n in *n_min..=*n_max {
                let script = family.build(n, *k)?;
                let cost = script.cost();
                rows.push(json!({
                    "protocol": family.id(),
                    "n": n,
                    "qubits": cost.qubits(),
                    "bits": cost.bits(),
                    "total": cost.total(),
                    "declared": family.declared_cost(n, *k).total(),
                    "rounds": cost.rounds,
                }));
            }
            emit(Value::Array(rows), out)?;
            Ok(true)
        }
        Command::Export { source, out } => {
            let text = script_to_json(&load_script(source)?) + "\n";
            match out {
                Some(path) => fs::write(path, text).map_err(|e| UsageError(format!("{}: {e}", path.display())))?,
                None => print!("{text}"),
            }
            Ok(true)
        }
        Command::Import { script, out } => {
            let source = ScriptSource { protocol: None, n: None, k: None, script: Some(script.clone()) };
            let loaded = load_script(&source)?;
            emit(
                json!({
                    "name": loaded.name,
                    "n": loaded.n,
                    "answer_mode": loaded.answer_mode,
                    "steps": loaded.steps.len(),
                    "sends": loaded.send_count(),
                    "cost": loaded.cost(),
                }),
                out,
            )?;
            Ok(true)
        }
    }
}
