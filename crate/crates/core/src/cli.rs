//! The `glw` command line: one subcommand per operation, JSON on stdout,
//! error objects on stderr.
//!
//! Exit codes: 0 on success, 1 on domain errors (including unknown
//! subcommands, malformed files and guard violations), 2 on other usage
//! errors.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::de::DeserializeOwned;
use serde_json::{json, Value};

use crate::decide::{
    brute_force_decide, check_proof, decide_with_guard, BruteOutcome, DecideSummary, Proof, ProofLineDoc, Verdict,
    DEFAULT_CLOSURE_GUARD,
};
use crate::formula::{parse, Formula};
use crate::kripke::{build_bounded_morphism, kn_truncate, KnNode, KripkeModel, ModelDoc, DEFAULT_KN_GUARD};
use crate::measures::{
    build_gamma_structure, dagger_violations, derivative_ranks, extract_descending_chain, filter_model_check,
    icard_sets, reduce_pipeline, seeded_mutants, sigma_satisfiable_at, FilterValuation, GammaLabeling,
    MeasureStructure, SigmaEngine, StructureDoc, DEFAULT_GAMMA_GUARD, DEFAULT_SIGMA_GUARD,
};
use crate::ordinals::{
    end_segment_model_check, gamma_end_candidate, gamma_end_validate, interval_model_check, GammaEnd, Ordinal,
    OrdinalValuation, SetFile, SymbolicSet,
};

/// What a run produced: the exit code and the two output streams.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CommandOutput {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

#[derive(Debug, Parser)]
#[command(name = "glw", version, about = "Provability logic GL: decision, countermodels, filters and ordinals")]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct Common {
    /// Seed for randomized subcommands.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Override the size guard of the subcommand.
    #[arg(long, global = true)]
    guard: Option<usize>,
    /// Write the payload to this file instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum EngineArg {
    Auto,
    Brute,
    Chain,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Parse a formula and print its canonical form.
    Parse { formula: String },
    /// Decide GL-validity; prints a verified countermodel otherwise.
    Decide { formula: String },
    /// Search all small trees for a countermodel.
    BruteDecide {
        formula: String,
        #[arg(long, default_value_t = 5)]
        max_nodes: usize,
    },
    /// Check a Hilbert-style proof file.
    CheckProof { file: PathBuf },
    /// Print the nodes of a truncation of K_n.
    Kn {
        #[arg(long)]
        n: u32,
        #[arg(long)]
        branch: u32,
    },
    /// Build a bounded morphism from K_n onto a tree model.
    Morphism {
        #[arg(long)]
        model: PathBuf,
        /// Defaults to the height of the model.
        #[arg(long)]
        n: Option<u32>,
    },
    /// Build a Γ-labeled measure structure.
    Gamma {
        #[arg(long)]
        n: u32,
        #[arg(long)]
        branch: u32,
        #[arg(long)]
        block: u32,
        /// Check the four labeling conditions instead of printing the structure.
        #[arg(long)]
        validate: bool,
        /// Also validate this many seeded single-edit mutants of small labelings.
        #[arg(long, default_value_t = 0)]
        mutants: usize,
    },
    /// Evaluate a formula on a measure structure file.
    EvalFilter {
        #[arg(long)]
        structure: PathBuf,
        #[arg(long)]
        valuation: Option<PathBuf>,
        #[arg(long)]
        formula: String,
    },
    /// Countermodel → bounded morphism → Γ-structure → filter countermodel.
    Reduce {
        formula: String,
        #[arg(long, default_value_t = 1)]
        block: u32,
    },
    /// Mitchell and derivative ranks of the points of a structure file.
    Rank {
        #[arg(long)]
        structure: PathBuf,
        #[arg(long)]
        point: Option<usize>,
    },
    /// Points whose derivative rank lies in (zeta, xi].
    Icard {
        #[arg(long)]
        structure: PathBuf,
        #[arg(long, allow_hyphen_values = true)]
        zeta: i64,
        #[arg(long)]
        xi: u64,
    },
    /// Satisfiability of the k-th Σ fragment at a point.
    Sigma {
        #[arg(long)]
        n: u32,
        #[arg(long, default_value_t = 2)]
        branch: u32,
        #[arg(long, default_value_t = 1)]
        block: u32,
        #[arg(long)]
        k: usize,
        /// Defaults to η.
        #[arg(long)]
        point: Option<usize>,
        #[arg(long, value_enum, default_value_t = EngineArg::Auto)]
        engine: EngineArg,
    },
    /// Evaluate a formula on [0, top] with the interval topology.
    OrdEval(OrdEvalArgs),
    /// Evaluate a formula on [0, top] with end-segment filters.
    OrdEndEval(OrdEvalArgs),
    /// Check a Γ-labeling of K_n by ordinal blocks.
    GammaEndValidate {
        #[arg(long)]
        n: u32,
        /// Candidate file: map node → set file.
        #[arg(long, conflicts_with = "construct")]
        candidate: Option<PathBuf>,
        /// Validate the built-in construction with this branching.
        #[arg(long)]
        construct: Option<u32>,
    },
}

#[derive(Debug, Args)]
struct OrdEvalArgs {
    #[arg(long)]
    top: String,
    #[arg(long)]
    formula: String,
    /// Map var-index → set file contents.
    #[arg(long)]
    valuation: Option<PathBuf>,
    /// Report membership of these ordinals.
    #[arg(long, value_delimiter = ',')]
    points: Vec<String>,
    #[arg(long, default_value_t = 8)]
    first: usize,
}

#[derive(Debug)]
struct CliError {
    kind: &'static str,
    message: String,
    detail: Value,
}

impl CliError {
    fn new(kind: &'static str, message: impl ToString) -> Self {
        CliError { kind, message: message.to_string(), detail: Value::Null }
    }

    fn domain(e: impl std::error::Error) -> Self {
        let message = e.to_string();
        let kind = if format!("{e:?}").contains("GuardExceeded") || format!("{e:?}").contains("TruncationTooLarge") {
            "guard"
        } else {
            "domain"
        };
        CliError { kind, message, detail: Value::Null }
    }

    fn to_json(&self) -> Value {
        let mut v = json!({ "status": "error", "kind": self.kind, "message": self.message });
        if !self.detail.is_null() {
            v["detail"] = self.detail.clone();
        }
        v
    }
}

type CliResult = Result<Value, CliError>;

fn formula(text: &str) -> Result<Formula, CliError> {
    parse(text).map_err(|e| CliError {
        kind: "parse",
        message: e.to_string(),
        detail: json!({ "position": e.position, "expected": e.expected }),
    })
}

fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::new("io", format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| CliError::new("malformed", format!("{}: {e}", path.display())))
}

fn var_index(key: &str) -> Result<u32, CliError> {
    key.trim_start_matches('p')
        .parse()
        .map_err(|_| CliError::new("malformed", format!("bad variable key {key:?}")))
}

fn ordinal(text: &str) -> Result<Ordinal, CliError> {
    text.parse().map_err(|e| CliError::new("parse", e))
}

fn ok(mut payload: Value) -> CliResult {
    payload["status"] = json!("ok");
    Ok(payload)
}

fn load_structure(path: &Path) -> Result<MeasureStructure, CliError> {
    let doc: StructureDoc = read_json(path)?;
    MeasureStructure::from_doc(&doc).map_err(CliError::domain)
}

fn dispatch(cmd: Command, common: &Common) -> CliResult {
    match cmd {
        Command::Parse { formula: text } => {
            let f = formula(&text)?;
            ok(json!({
                "formula": f.print(),
                "desugared": f.desugar().print(),
                "modal_depth": f.modal_depth(),
                "size": f.size(),
                "subformulas": f.subformulas().len(),
            }))
        }
        Command::Decide { formula: text } => {
            let f = formula(&text)?;
            let verdict = decide_with_guard(&f, common.guard.unwrap_or(DEFAULT_CLOSURE_GUARD)).map_err(CliError::domain)?;
            let summary = DecideSummary::from((&f, &verdict));
            let mut out = serde_json::to_value(&summary).expect("serializable");
            if let Verdict::Countermodel { model, world } = &verdict {
                out["model"] = serde_json::to_value(model.to_doc()).expect("serializable");
                out["world"] = json!(world);
            } else {
                let map = out.as_object_mut().expect("object");
                map.remove("worlds");
                map.remove("height");
            }
            ok(out)
        }
        Command::BruteDecide { formula: text, max_nodes } => {
            let f = formula(&text)?;
            match brute_force_decide(&f, max_nodes).map_err(CliError::domain)? {
                BruteOutcome::Refuted { model, world } => ok(json!({
                    "formula": f.print(),
                    "outcome": "refuted",
                    "model": model.to_doc(),
                    "world": world,
                })),
                BruteOutcome::NoCountermodel { max_nodes, conclusive } => ok(json!({
                    "formula": f.print(),
                    "outcome": "no_countermodel",
                    "max_nodes": max_nodes,
                    "conclusive": conclusive,
                })),
            }
        }
        Command::CheckProof { file } => {
            let docs: Vec<ProofLineDoc> = read_json(&file)?;
            let result = Proof::from_docs(&docs).and_then(|p| check_proof(&p).map(|()| p));
            match result {
                Ok(p) => ok(json!({ "valid": true, "lines": p.lines.len() })),
                Err(e) => ok(json!({ "valid": false, "line": e.line(), "reason": e.to_string() })),
            }
        }
        Command::Kn { n, branch } => {
            let tr = kn_truncate(n, branch, common.guard.unwrap_or(DEFAULT_KN_GUARD)).map_err(CliError::domain)?;
            let nodes: Vec<Value> = tr.nodes().iter().map(|s| json!(s.0)).collect();
            ok(json!({ "n": n, "b": branch, "size": tr.len(), "nodes": nodes }))
        }
        Command::Morphism { model, n } => {
            let doc: ModelDoc = read_json(&model)?;
            let km = KripkeModel::from_doc(&doc).map_err(CliError::domain)?;
            let n = n.unwrap_or_else(|| km.frame.height().unwrap_or(0) as u32);
            let bm = build_bounded_morphism(n, &km.frame, common.guard.unwrap_or(DEFAULT_KN_GUARD))
                .map_err(CliError::domain)?;
            let tr = bm.truncation.as_ref().expect("built from a truncation");
            let map: BTreeMap<String, usize> =
                tr.nodes().iter().zip(&bm.map).map(|(s, &w)| (s.to_string(), w)).collect();
            let check = match bm.check() {
                Ok(()) => json!("pass"),
                Err(v) => serde_json::to_value(v).expect("serializable"),
            };
            ok(json!({ "n": n, "b": tr.b, "map": map, "check": check }))
        }
        Command::Gamma { n, branch, block, validate, mutants } => {
            let guard = common.guard.unwrap_or(DEFAULT_GAMMA_GUARD);
            let gl = build_gamma_structure(n, branch, block, guard).map_err(CliError::domain)?;
            let points = gl.structure.len();
            if !validate && mutants == 0 {
                let mut out = serde_json::to_value(gl.to_doc()).expect("serializable");
                out["eta"] = json!(gl.eta());
                return ok(out);
            }
            let mut out = json!({ "points": points });
            if validate {
                out["dagger"] = dagger_report(&gl);
            }
            if mutants > 0 {
                let list = seeded_mutants(mutants, common.seed).map_err(CliError::domain)?;
                let reports: Vec<Value> = list
                    .iter()
                    .map(|(m, g)| {
                        json!({
                            "n": g.truncation.n,
                            "b": g.truncation.b,
                            "points": g.structure.len(),
                            "mutation": m,
                            "dagger": dagger_report(g),
                        })
                    })
                    .collect();
                out["mutants"] = json!(reports);
            }
            ok(out)
        }
        Command::EvalFilter { structure, valuation, formula: text } => {
            let ms = load_structure(&structure)?;
            let f = formula(&text)?;
            let mut v = FilterValuation::new();
            if let Some(path) = valuation {
                let raw: BTreeMap<String, Vec<usize>> = read_json(&path)?;
                for (k, points) in raw {
                    v.insert(var_index(&k)?, points.into_iter().collect());
                }
            }
            let holds = filter_model_check(&ms, &v, &f);
            ok(json!({ "formula": f.print(), "points": holds }))
        }
        Command::Reduce { formula: text, block } => {
            let f = formula(&text)?;
            let guard = common.guard.unwrap_or(DEFAULT_GAMMA_GUARD);
            match reduce_pipeline(&f, block, guard).map_err(CliError::domain)? {
                None => ok(json!({ "formula": f.print(), "verdict": "valid" })),
                Some(r) => {
                    let eta = r.gamma.eta();
                    let valuation: BTreeMap<String, &std::collections::BTreeSet<usize>> =
                        r.valuation.iter().map(|(k, s)| (k.to_string(), s)).collect();
                    ok(json!({
                        "formula": f.print(),
                        "verdict": "countermodel",
                        "n": r.gamma.truncation.n,
                        "b": r.gamma.truncation.b,
                        "points": r.gamma.structure.len(),
                        "eta": eta,
                        "refuted_at_eta": eta.is_some_and(|e| r.refuting_points.contains(&e)),
                        "valuation": valuation,
                        "model": r.model.to_doc(),
                    }))
                }
            }
        }
        Command::Rank { structure, point } => {
            let ms = load_structure(&structure)?;
            let derivative = derivative_ranks(&ms);
            let mitchell: Vec<usize> =
                (0..ms.len()).map(|p| ms.mitchell_rank(p)).collect::<Result<_, _>>().map_err(CliError::domain)?;
            match point {
                Some(p) if p >= ms.len() => Err(CliError::new("domain", format!("point {p} does not exist"))),
                Some(p) => ok(json!({ "point": p, "mitchell": mitchell[p], "derivative": derivative[p] })),
                None => ok(json!({ "mitchell": mitchell, "derivative": derivative })),
            }
        }
        Command::Icard { structure, zeta, xi } => {
            let ms = load_structure(&structure)?;
            let points = icard_sets(&ms, zeta, xi).map_err(CliError::domain)?;
            ok(json!({ "zeta": zeta, "xi": xi, "points": points }))
        }
        Command::Sigma { n, branch, block, k, point, engine } => {
            let gl = build_gamma_structure(n, branch, block, DEFAULT_GAMMA_GUARD).map_err(CliError::domain)?;
            let p = match point.or(gl.eta()) {
                Some(p) => p,
                None => return Err(CliError::new("domain", "structure has no points")),
            };
            let engine = match engine {
                EngineArg::Auto => SigmaEngine::Auto,
                EngineArg::Brute => SigmaEngine::Brute,
                EngineArg::Chain => SigmaEngine::Chain,
            };
            let guard = common.guard.unwrap_or(DEFAULT_SIGMA_GUARD);
            let outcome = sigma_satisfiable_at(&gl.structure, p, k, engine, guard).map_err(CliError::domain)?;
            let mut out = json!({
                "point": p,
                "k": k,
                "satisfiable": outcome.satisfiable,
                "engine": outcome.engine,
            });
            if let Some(w) = &outcome.witness {
                let chain = extract_descending_chain(&gl.structure, p, w, k).map_err(CliError::domain)?;
                let ranks: Vec<usize> = chain.iter().map(|&u| gl.structure.measure_rank(u)).collect();
                out["chain"] = json!(chain);
                out["ranks"] = json!(ranks);
            }
            ok(out)
        }
        Command::OrdEval(args) => ord_eval(args, false),
        Command::OrdEndEval(args) => ord_eval(args, true),
        Command::GammaEndValidate { n, candidate, construct } => {
            let cand: GammaEnd = match (candidate, construct) {
                (Some(path), _) => {
                    let raw: BTreeMap<String, SetFile> = read_json(&path)?;
                    let top = Ordinal::omega_pow(n);
                    let mut out = GammaEnd::new();
                    for (key, file) in raw {
                        let node: KnNode = key.parse().map_err(CliError::domain)?;
                        out.insert(node, file.into_set(Some(&top)).map_err(CliError::domain)?);
                    }
                    out
                }
                (None, Some(b)) => gamma_end_candidate(n, b),
                (None, None) => return Err(CliError::new("usage", "give --candidate or --construct")),
            };
            match gamma_end_validate(n, &cand) {
                Ok(()) => ok(json!({ "n": n, "valid": true, "nodes": cand.len() })),
                Err(v) => ok(json!({
                    "n": n,
                    "valid": false,
                    "violation": v,
                    "message": v.to_string(),
                })),
            }
        }
    }
}

fn dagger_report(gl: &GammaLabeling) -> Value {
    let violations = dagger_violations(gl);
    match violations.first() {
        None => json!("pass"),
        Some(first) => json!({
            "result": "fail",
            "condition": first.condition(),
            "witness": first,
            "violations": violations.len(),
        }),
    }
}

fn ord_eval(args: OrdEvalArgs, end_segment: bool) -> CliResult {
    let top = ordinal(&args.top)?;
    let f = formula(&args.formula)?;
    let mut v = OrdinalValuation::new();
    if let Some(path) = &args.valuation {
        let raw: BTreeMap<String, SetFile> = read_json(path)?;
        for (k, file) in raw {
            v.insert(var_index(&k)?, file.into_set(Some(&top)).map_err(CliError::domain)?);
        }
    }
    let result: SymbolicSet = if end_segment {
        end_segment_model_check(&top, &v, &f)
    } else {
        interval_model_check(&top, &v, &f)
    }
    .map_err(CliError::domain)?;
    let mut members = BTreeMap::new();
    for p in &args.points {
        let alpha = ordinal(p)?;
        members.insert(alpha.to_string(), result.contains(&alpha));
    }
    let first: Vec<String> = result.first_elements(args.first).iter().map(|a| a.to_string()).collect();
    ok(json!({
        "formula": f.print(),
        "semantics": if end_segment { "end_segment" } else { "interval" },
        "space_top": top,
        "empty": result.is_empty(),
        "first_elements": first,
        "members": members,
        "set": result.to_doc(),
    }))
}

/// Runs the command line `argv` (including the program name).
pub fn run<I, T>(argv: I) -> CommandOutput
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    return CommandOutput { code: 0, stdout: e.to_string(), stderr: String::new() };
                }
                ErrorKind::InvalidSubcommand => 1,
                _ => 2,
            };
            let err = CliError::new(if code == 1 { "unknown_subcommand" } else { "usage" }, e.to_string());
            return CommandOutput { code, stdout: String::new(), stderr: render(&err.to_json()) };
        }
    };
    match dispatch(cli.command, &cli.common) {
        Ok(payload) => {
            let text = render(&payload);
            match &cli.common.out {
                None => CommandOutput { code: 0, stdout: text, stderr: String::new() },
                Some(path) => match std::fs::write(path, &text) {
                    Ok(()) => CommandOutput { code: 0, stdout: String::new(), stderr: String::new() },
                    Err(e) => {
                        let err = CliError::new("io", format!("{}: {e}", path.display()));
                        CommandOutput { code: 1, stdout: String::new(), stderr: render(&err.to_json()) }
                    }
                },
            }
        }
        Err(err) => CommandOutput { code: 1, stdout: String::new(), stderr: render(&err.to_json()) },
    }
}

fn render(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("serializable");
    s.push('\n');
    s
}
