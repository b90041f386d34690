//! `bgate` — command-line front end for bgate-core.
//!
//! Exit codes: 0 success, 2 usage or input-format error, 3 numerical
//! failure. Failures print `{"error": ..., "message": ...}` on stderr.

use std::fs;
use std::io::{self, Read, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use bgate::circuit::{self, TwoQubitCircuit};
use bgate::gates::NamedGate;
use bgate::invariants::{local_invariants, LocalInvariants};
use bgate::josephson::{self, JosephsonParams, ReachSolution};
use bgate::json::{self, MatrixJson};
use bgate::matrix::{haar_random_su4, EXTERNAL_UNITARY_TOL};
use bgate::synth::{self, BSynthesisResult};
use bgate::weyl::{kak, single_switch_reach, weyl_coordinates};
use bgate::{Error, Hermitian4, Pauli, Unitary4, WeylPoint};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

#[derive(Parser)]
#[command(name = "bgate", version, about = "Two-qubit gate analysis and synthesis with the B gate")]
struct Cli {
    /// Output format. `text` rounds numbers to 6 decimals.
    #[arg(long, value_enum, global = true, default_value_t = Format::Json)]
    format: Format,

    /// Write output here instead of stdout.
    #[arg(long, short, global = true)]
    out: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Text,
    Csv,
}

#[derive(Subcommand)]
enum Command {
    /// Local invariants {"g1","g2","g3"} of a 4×4 unitary.
    Invariants(MatrixInput),
    /// Weyl-chamber coordinates {"c":[c1,c2,c3]} of a 4×4 unitary.
    Weyl(MatrixInput),
    /// KAK decomposition {"phase","k1_top","k1_bottom","c","k2_top","k2_bottom"}.
    Kak(MatrixInput),
    /// Circuit of two B gates and at most six single-qubit gates.
    ///
    /// Output is circuit JSON; with --report it is wrapped as
    /// {"circuit","residual","b_gates","single_qubit_gates","used_fallback","params"}.
    /// --format text prints the pseudo-QASM listing.
    Synth {
        #[command(flatten)]
        input: MatrixInput,
        #[arg(long)]
        report: bool,
    },
    /// The two-gate circuit equivalent to B, with its invariants and
    /// coordinates: {"circuit","invariants","c","basis_action_check"}.
    Bequiv,
    /// Invariants and coordinates along e^{iH_J t} as CSV (t,g1,g2,g3,c1,c2,c3).
    Trajectory {
        #[arg(long)]
        alpha: f64,
        #[arg(long)]
        tmax: f64,
        #[arg(long, default_value_t = 500)]
        steps: usize,
    },
    /// Shortest Josephson pulse reaching a class: {"alpha","t","n","residual",...}.
    Solve {
        #[arg(long, value_enum)]
        target: Target,
        /// g1,g2,g3 for `--target custom`.
        #[arg(allow_hyphen_values = true)]
        invariants: Option<String>,
        /// Highest branch index searched for `--target b`.
        #[arg(long, default_value_t = 10)]
        nmax: u32,
        #[arg(long, default_value_t = josephson::DEFAULT_ALPHA_RANGE.0)]
        alpha_min: f64,
        #[arg(long, default_value_t = josephson::DEFAULT_ALPHA_RANGE.1)]
        alpha_max: f64,
        #[arg(long, default_value_t = josephson::DEFAULT_T_RANGE.0)]
        tmin: f64,
        #[arg(long, default_value_t = josephson::DEFAULT_T_RANGE.1)]
        tmax: f64,
    },
    /// First time at which e^{iHt}, H = xx·σxσx + yy·σyσy + zz·σzσz, reaches a
    /// class: {"reached","t"}.
    Reach {
        #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
        xx: f64,
        #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
        yy: f64,
        #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
        zz: f64,
        /// Named target gate.
        #[arg(long, conflicts_with = "point")]
        gate: Option<NamedGate>,
        /// Target coordinates c1,c2,c3.
        #[arg(long, allow_hyphen_values = true)]
        point: Option<String>,
        #[arg(long, default_value_t = 10.0)]
        tmax: f64,
    },
    /// Named gates with their coordinates and matrices:
    /// {"name","c","matrix"} for one gate, a list without --gate.
    Named {
        #[arg(long)]
        gate: Option<NamedGate>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Target {
    B,
    Cnot,
    Custom,
}

/// Matrix JSON `{"dim":4,"rows":[[[re,im],..],..]}`, or any object with a
/// `"matrix"` member holding one (as printed by `named`).
#[derive(Args)]
struct MatrixInput {
    /// Input file; `-` reads stdin.
    #[arg(default_value = "-")]
    input: String,
    /// Use the Haar-random SU(4) element with this seed instead of reading input.
    #[arg(long)]
    seed: Option<u64>,
    /// Allowed ‖UU† − I‖ for the input matrix.
    #[arg(long, default_value_t = EXTERNAL_UNITARY_TOL)]
    unitary_tol: f64,
}

enum Failure {
    Usage(String),
    Numerical(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::MatrixFormat(_) | Error::CircuitFormat(_) | Error::Json(_) | Error::InvalidParameter(_) => {
                Failure::Usage(e.to_string())
            }
            e => Failure::Numerical(e),
        }
    }
}

fn usage(msg: impl Into<String>) -> Failure {
    Failure::Usage(msg.into())
}

type CliResult<T> = Result<T, Failure>;

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(msg)) => {
            eprintln!("{}", json!({"error": "usage", "message": msg}));
            ExitCode::from(2)
        }
        Err(Failure::Numerical(e)) => {
            let mut body = json!({"error": error_kind(&e), "message": e.to_string()});
            if let Error::Convergence { best_residual } | Error::NotFound { best_residual } = e {
                body["best_residual"] = json!(best_residual);
            }
            eprintln!("{}", json::to_string(&body).unwrap_or_else(|_| body.to_string()));
            ExitCode::from(3)
        }
    }
}

fn error_kind(e: &Error) -> &'static str {
    match e {
        Error::NotUnitary { .. } => "not_unitary",
        Error::NotHermitian { .. } => "not_hermitian",
        Error::NonFinite => "non_finite",
        Error::ConventionViolation(_) => "convention_violation",
        Error::Decomposition(_) => "decomposition",
        Error::Domain(_) => "domain",
        Error::Convergence { .. } => "convergence",
        Error::NotFound { .. } => "not_found",
        _ => "numerical",
    }
}

fn run(cli: &Cli) -> CliResult<()> {
    let text = match &cli.command {
        Command::Invariants(input) => {
            let inv = local_invariants(&read_matrix(input)?)?;
            render(cli.format, &json!({"g1": inv.g1, "g2": inv.g2, "g3": inv.g3}))?
        }
        Command::Weyl(input) => {
            let c = weyl_coordinates(&read_matrix(input)?)?;
            render(cli.format, &json!({"c": c.coords()}))?
        }
        Command::Kak(input) => {
            let k = kak(&read_matrix(input)?)?;
            let m = |u: &bgate::Unitary2| matrix_value(&MatrixJson::from(u));
            render(
                cli.format,
                &json!({
                    "phase": k.phase,
                    "k1_top": m(&k.k1_top),
                    "k1_bottom": m(&k.k1_bottom),
                    "c": k.c.coords(),
                    "k2_top": m(&k.k2_top),
                    "k2_bottom": m(&k.k2_bottom),
                }),
            )?
        }
        Command::Synth { input, report } => {
            let r = synth::synthesize(&read_matrix(input)?)?;
            synth_output(cli.format, &r, *report)?
        }
        Command::Bequiv => {
            let c = synth::b_equivalent_circuit();
            let u = circuit::evaluate(&c);
            let inv = local_invariants(&u)?;
            match cli.format {
                Format::Text => format!(
                    "{}g1 = {:.6}\ng2 = {:.6}\ng3 = {:.6}\n",
                    circuit::to_pseudoqasm(&c),
                    inv.g1,
                    inv.g2,
                    inv.g3
                ),
                _ => render(
                    Format::Json,
                    &json!({
                        "circuit": circuit_value(&c),
                        "invariants": {"g1": inv.g1, "g2": inv.g2, "g3": inv.g3},
                        "c": weyl_coordinates(&u)?.coords(),
                        "basis_action_check": synth::basis_action_check(),
                    }),
                )?,
            }
        }
        Command::Trajectory { alpha, tmax, steps } => {
            let p = JosephsonParams::new(*alpha)?;
            let samples = josephson::trajectory(&p, *tmax, *steps)?;
            match cli.format {
                Format::Text => {
                    let mut s = String::from("t g1 g2 g3 c1 c2 c3\n");
                    for x in &samples {
                        let row = [x.t, x.inv.g1, x.inv.g2, x.inv.g3, x.c.c1, x.c.c2, x.c.c3];
                        s.push_str(&row.map(|v| format!("{v:.6}")).join(" "));
                        s.push('\n');
                    }
                    s
                }
                _ => josephson::trajectory_csv(&samples),
            }
        }
        Command::Solve { target, invariants, nmax, alpha_min, alpha_max, tmin, tmax } => {
            let alpha_range = (*alpha_min, *alpha_max);
            let t_range = (*tmin, *tmax);
            let sol = match target {
                Target::B => {
                    if invariants.is_some() {
                        return Err(usage("invariants are only accepted with --target custom"));
                    }
                    josephson::solve_b_branches(*nmax)
                        .into_iter()
                        .find(|s| in_box(s, alpha_range, t_range))
                        .ok_or(Error::NotFound { best_residual: f64::INFINITY })?
                }
                Target::Cnot => {
                    if invariants.is_some() {
                        return Err(usage("invariants are only accepted with --target custom"));
                    }
                    josephson::solve_target_class(&LocalInvariants::CNOT, alpha_range, t_range)?
                }
                Target::Custom => {
                    let spec = invariants.as_deref().ok_or_else(|| usage("--target custom needs g1,g2,g3"))?;
                    let [g1, g2, g3] = parse_triple(spec)?;
                    josephson::solve_target_class(&LocalInvariants::new(g1, g2, g3), alpha_range, t_range)?
                }
            };
            render(cli.format, &solution_value(&sol))?
        }
        Command::Reach { xx, yy, zz, gate, point, tmax } => {
            let target = match (gate, point) {
                (Some(g), None) => g.point(),
                (None, Some(p)) => WeylPoint::from(parse_triple(p)?),
                _ => return Err(usage("give exactly one of --gate or --point")),
            };
            let h = Hermitian4::pauli_pairs(&[(*xx, Pauli::X), (*yy, Pauli::Y), (*zz, Pauli::Z)]);
            let t = single_switch_reach(&h, &target, *tmax);
            render(cli.format, &json!({"reached": t.is_some(), "t": t}))?
        }
        Command::Named { gate } => {
            let entry = |g: NamedGate| {
                json!({"name": g.name(), "c": g.point().coords(), "matrix": matrix_value(&MatrixJson::from(&g.matrix()))})
            };
            let v = match gate {
                Some(g) => entry(*g),
                None => Value::Array(NamedGate::ALL.into_iter().map(entry).collect()),
            };
            render(cli.format, &v)?
        }
    };
    emit(cli, &text)
}

fn in_box(s: &ReachSolution, (a_lo, a_hi): (f64, f64), (t_lo, t_hi): (f64, f64)) -> bool {
    (a_lo..=a_hi).contains(&s.alpha) && (t_lo..=t_hi).contains(&s.t)
}

fn solution_value(s: &ReachSolution) -> Value {
    json!({
        "alpha": s.alpha,
        "t": s.t,
        "n": s.n,
        "residual": s.residual,
        "target": s.target_tag,
        "alpha_warning": s.alpha_warning,
    })
}

fn synth_output(format: Format, r: &BSynthesisResult, report: bool) -> CliResult<String> {
    if format == Format::Text {
        let mut s = circuit::to_pseudoqasm(&r.circuit);
        if report {
            s.push_str(&format!(
                "# residual {:.6e}, b gates {}, single-qubit gates {}, fallback {}\n",
                r.residual,
                r.circuit.two_qubit_count(),
                r.circuit.single_qubit_count(),
                r.used_fallback
            ));
        }
        return Ok(s);
    }
    if !report {
        return Ok(circuit::serialize(&r.circuit) + "\n");
    }
    render(
        Format::Json,
        &json!({
            "circuit": circuit_value(&r.circuit),
            "residual": r.residual,
            "b_gates": r.circuit.two_qubit_count(),
            "single_qubit_gates": r.circuit.single_qubit_count(),
            "used_fallback": r.used_fallback,
            "params": r.params,
        }),
    )
}

fn circuit_value(c: &TwoQubitCircuit) -> Value {
    serde_json::from_str(&circuit::serialize(c)).expect("serialized circuit is valid JSON")
}

fn matrix_value(m: &MatrixJson) -> Value {
    serde_json::to_value(m).expect("matrix converts to JSON")
}

fn render(format: Format, v: &Value) -> CliResult<String> {
    match format {
        Format::Text => {
            let mut out = String::new();
            render_text(v, "", &mut out);
            Ok(out)
        }
        _ => Ok(json::to_string(v)? + "\n"),
    }
}

fn render_text(v: &Value, prefix: &str, out: &mut String) {
    match v {
        Value::Object(map) => {
            for (k, x) in map {
                let key = if prefix.is_empty() { k.clone() } else { format!("{prefix}.{k}") };
                render_text(x, &key, out);
            }
        }
        Value::Array(items) if items.iter().all(|x| x.is_number()) => {
            let nums: Vec<String> = items.iter().map(text_scalar).collect();
            out.push_str(&format!("{prefix} = [{}]\n", nums.join(", ")));
        }
        Value::Array(items) => {
            for (i, x) in items.iter().enumerate() {
                render_text(x, &format!("{prefix}[{i}]"), out);
            }
        }
        x => out.push_str(&format!("{prefix} = {}\n", text_scalar(x))),
    }
}

fn text_scalar(v: &Value) -> String {
    match v {
        Value::Number(n) if n.is_f64() => format!("{:.6}", n.as_f64().unwrap_or(f64::NAN)),
        Value::String(s) => s.clone(),
        x => x.to_string(),
    }
}

fn parse_triple(s: &str) -> CliResult<[f64; 3]> {
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    if parts.len() != 3 {
        return Err(usage(format!("expected three comma-separated numbers, got '{s}'")));
    }
    let mut out = [0.0f64; 3];
    for (slot, p) in out.iter_mut().zip(parts) {
        *slot = p.parse().map_err(|_| usage(format!("'{p}' is not a number")))?;
        if !slot.is_finite() {
            return Err(usage(format!("'{p}' is not finite")));
        }
    }
    Ok(out)
}

fn read_matrix(input: &MatrixInput) -> CliResult<Unitary4> {
    if input.unitary_tol.is_nan() || input.unitary_tol <= 0.0 {
        return Err(usage("--unitary-tol must be positive"));
    }
    if let Some(seed) = input.seed {
        return Ok(haar_random_su4(seed));
    }
    let text = if input.input == "-" {
        let mut s = String::new();
        io::stdin().read_to_string(&mut s).map_err(|e| usage(format!("reading stdin: {e}")))?;
        s
    } else {
        fs::read_to_string(&input.input).map_err(|e| usage(format!("reading {}: {e}", input.input)))?
    };
    let value: Value = serde_json::from_str(&text).map_err(|e| usage(format!("invalid JSON: {e}")))?;
    let matrix = match value.get("matrix") {
        Some(m) => m.clone(),
        None => value,
    };
    let mj: MatrixJson = serde_json::from_value(matrix).map_err(|e| usage(format!("invalid matrix JSON: {e}")))?;
    Ok(mj.to_unitary4_with_tolerance(input.unitary_tol)?)
}

fn emit(cli: &Cli, text: &str) -> CliResult<()> {
    match &cli.out {
        Some(path) => fs::write(path, text).map_err(|e| usage(format!("writing {}: {e}", path.display()))),
        None => {
            let mut stdout = io::stdout().lock();
            stdout.write_all(text.as_bytes()).and_then(|_| stdout.flush()).or(Ok(()))
        }
    }
}
