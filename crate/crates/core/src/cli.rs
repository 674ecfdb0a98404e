//! The `aligned-graphs` command line.
//!
//! Exit codes: 0 success, 1 usage, input or guard errors, 2 the input graph
//! fails validation, 3 (`align` only) the graph is not aligned.

use std::ffi::OsString;
use std::io::{Read, Write};
use std::path::PathBuf;
use std::time::Instant;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::{json, Map, Value};
use sha2::{Digest, Sha256};

use crate::alignment::{self, AlignmentVerdict, NeronReport};
use crate::graph::LabelledGraph;
use crate::json::uint_value;
use crate::lattice::InvariantFactors;
use crate::nmodel::{self, DegreeScope, TraitWeights, WeightedGraph};
use crate::torsion::{self, BoundQuery};
use crate::Limits;

pub const SCHEMA: &str = "aligned-graphs/1";

pub const EXIT_OK: i32 = 0;
pub const EXIT_ERROR: i32 = 1;
pub const EXIT_INVALID: i32 = 2;
pub const EXIT_NOT_ALIGNED: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "aligned-graphs", version, about = "Néron-model combinatorics of labelled dual graphs")]
struct Cli {
    /// Human-readable output instead of JSON.
    #[arg(long, global = true)]
    pretty: bool,
    /// Lift the size guards on exponential computations.
    #[arg(long, global = true)]
    unsafe_limits: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Check a labelled graph file for structural problems.
    Validate { input: PathBuf },
    /// Tree, Treelike, AlignedNotTreelike or NotAligned.
    Classify { input: PathBuf },
    /// Alignment verdict with a witness circuit; exits 3 when not aligned.
    Align {
        input: PathBuf,
        /// Also check every stratum of the base.
        #[arg(long)]
        strata: bool,
    },
    /// The dual graph where only the listed parameters stay non-invertible.
    Specialize {
        input: PathBuf,
        /// Comma-separated parameter names; an empty string keeps none.
        #[arg(long, value_delimiter = ',', required = true, num_args = 1)]
        keep: Vec<String>,
    },
    /// Node thicknesses along a trait.
    Pullback {
        input: PathBuf,
        #[arg(long)]
        weights: Option<String>,
    },
    /// Critical and/or quotient component group.
    ComponentGroup {
        input: PathBuf,
        #[arg(long)]
        weights: Option<String>,
        #[arg(long, value_enum, default_value_t = Kind::Both)]
        kind: Kind,
    },
    /// Least sup-norm bound on multidegrees meeting every component.
    DegreeBound {
        input: PathBuf,
        #[arg(long)]
        weights: Option<String>,
        #[arg(long, value_enum, default_value_t = Scope::Original)]
        scope: Scope,
    },
    /// Uniform bound on orders of torsion values of a section.
    TorsionBound {
        /// Graph file; its jacobian dimension is used when --g is absent.
        input: Option<PathBuf>,
        #[arg(long)]
        g: Option<u64>,
        #[arg(long = "N", default_value_t = 1)]
        level: u64,
        #[arg(long, default_value_t = 1)]
        d: u32,
    },
    /// Run the whole pipeline on one graph.
    Report {
        input: PathBuf,
        #[arg(long)]
        weights: Option<String>,
        #[arg(long, value_enum, default_value_t = Scope::Original)]
        scope: Scope,
        /// Include a torsion bound for the jacobian dimension of the graph.
        #[arg(long)]
        torsion: bool,
        #[arg(long = "N", default_value_t = 1)]
        level: u64,
        #[arg(long, default_value_t = 1)]
        d: u32,
        /// Include wall-clock timings (makes the output non-deterministic).
        #[arg(long)]
        timings: bool,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Kind {
    Critical,
    Quotient,
    Both,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Scope {
    Original,
    Subdivided,
}

impl From<Scope> for DegreeScope {
    fn from(s: Scope) -> Self {
        match s {
            Scope::Original => DegreeScope::Original,
            Scope::Subdivided => DegreeScope::Subdivided,
        }
    }
}

#[derive(Debug)]
struct Failure {
    code: i32,
    message: String,
    /// Output to print before failing (validation reports).
    output: Option<Value>,
}

impl Failure {
    fn error(message: impl ToString) -> Self {
        Failure {
            code: EXIT_ERROR,
            message: message.to_string(),
            output: None,
        }
    }
}

/// What a subcommand produced: JSON and its human-readable rendering.
struct Output {
    json: Value,
    text: String,
    code: i32,
}

/// Runs the CLI on `args` (including the program name).
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_ERROR } else { EXIT_OK };
            let rendered = e.render().to_string();
            let _ = if e.use_stderr() {
                stderr.write_all(rendered.as_bytes())
            } else {
                stdout.write_all(rendered.as_bytes())
            };
            return code;
        }
    };
    let limits = if cli.unsafe_limits {
        Limits::unlimited()
    } else {
        Limits::default()
    };
    let emit = |out: &mut dyn Write, json: &Value, text: &str| {
        let body = if cli.pretty {
            text.to_string()
        } else {
            serde_json::to_string_pretty(json).expect("values serialize")
        };
        let _ = writeln!(out, "{}", body.trim_end());
    };
    match execute(&cli.command, &limits) {
        Ok(out) => {
            emit(stdout, &out.json, &out.text);
            out.code
        }
        Err(f) => {
            match &f.output {
                Some(json) => emit(stdout, json, &f.message),
                None => {
                    let _ = writeln!(stderr, "error: {}", f.message);
                }
            }
            f.code
        }
    }
}

fn execute(command: &Command, limits: &Limits) -> Result<Output, Failure> {
    match command {
        Command::Validate { input } => {
            let (_, g) = read_labelled(input)?;
            let violations = g.validate();
            let json = envelope(
                "validate",
                json!({
                    "valid": violations.is_empty(),
                    "violations": violations
                        .iter()
                        .map(|v| json!({"kind": v.kind(), "message": v.to_string()}))
                        .collect::<Vec<_>>(),
                }),
            );
            if violations.is_empty() {
                Ok(Output {
                    json,
                    text: "valid".into(),
                    code: EXIT_OK,
                })
            } else {
                let text: Vec<String> = violations.iter().map(|v| format!("invalid: {v}")).collect();
                Err(Failure {
                    code: EXIT_INVALID,
                    message: text.join("\n"),
                    output: Some(json),
                })
            }
        }
        Command::Classify { input } => {
            let g = read_valid_labelled(input)?;
            let class = g.classify();
            Ok(Output {
                json: envelope("classify", json!({"classification": class.to_string()})),
                text: class.to_string(),
                code: EXIT_OK,
            })
        }
        Command::Align { input, strata } => {
            let g = read_valid_labelled(input)?;
            let verdict = alignment::is_aligned(&g);
            let mut body = Map::new();
            body.insert("alignment".into(), to_value(&verdict));
            let mut text = verdict_text(&verdict);
            if *strata {
                let report = alignment::neron_model_exists(&g, limits.strata_params)
                    .map_err(Failure::error)?;
                text.push_str(&format!("\n{}", strata_text(&report)));
                body.insert("neron_model".into(), to_value(&report));
            }
            Ok(Output {
                json: envelope("align", Value::Object(body)),
                text,
                code: if verdict.aligned { EXIT_OK } else { EXIT_NOT_ALIGNED },
            })
        }
        Command::Specialize { input, keep } => {
            let g = read_valid_labelled(input)?;
            let keep: Vec<&str> = keep.iter().map(String::as_str).filter(|s| !s.is_empty()).collect();
            let keep = g.params().restrict(&keep).map_err(Failure::error)?;
            let s = g.specialize(&keep).map_err(Failure::error)?;
            let text = format!(
                "{} vertices, {} edges, {}",
                s.num_vertices(),
                s.num_edges(),
                s.classify()
            );
            Ok(Output {
                json: to_value(&s.to_doc()),
                text,
                code: EXIT_OK,
            })
        }
        Command::Pullback { input, weights } => {
            let (wg, weights) = read_weighted(input, weights.as_deref())?;
            let text = format!(
                "{} vertices, {} edges, max thickness {}",
                wg.num_vertices(),
                wg.num_edges(),
                wg.max_thickness()
            );
            let _ = weights;
            Ok(Output {
                json: to_value(&wg.to_doc()),
                text,
                code: EXIT_OK,
            })
        }
        Command::ComponentGroup {
            input,
            weights,
            kind,
        } => {
            let (wg, _) = read_weighted(input, weights.as_deref())?;
            let mut body = Map::new();
            let mut lines = Vec::new();
            if matches!(kind, Kind::Critical | Kind::Both) {
                let g = nmodel::critical_group(&wg, limits).map_err(Failure::error)?;
                lines.push(("critical", g.to_string()));
                body.insert("critical".into(), group_value(&g));
            }
            if matches!(kind, Kind::Quotient | Kind::Both) {
                let g = nmodel::quotient_component_group(&wg).map_err(Failure::error)?;
                lines.push(("quotient", g.to_string()));
                body.insert("quotient".into(), group_value(&g));
            }
            let text = if lines.len() == 1 {
                lines[0].1.clone()
            } else {
                lines
                    .iter()
                    .map(|(k, g)| format!("{k}: {g}"))
                    .collect::<Vec<_>>()
                    .join("\n")
            };
            Ok(Output {
                json: envelope("component-group", Value::Object(body)),
                text,
                code: EXIT_OK,
            })
        }
        Command::DegreeBound {
            input,
            weights,
            scope,
        } => {
            let (wg, _) = read_weighted(input, weights.as_deref())?;
            let b = nmodel::degree_bound(&wg, (*scope).into(), limits).map_err(Failure::error)?;
            Ok(Output {
                json: envelope("degree-bound", degree_value(&b)),
                text: b.bound.to_string(),
                code: EXIT_OK,
            })
        }
        Command::TorsionBound { input, g, level, d } => {
            let g = match (g, input) {
                (Some(g), _) => *g,
                (None, Some(path)) => read_valid_labelled(path)?.jacobian_dimension(),
                (None, None) => return Err(Failure::error("give --g or a graph file")),
            };
            let query = BoundQuery::new(g, *level, *d).map_err(Failure::error)?;
            let t = torsion::torsion_order_bound(&query).map_err(Failure::error)?;
            Ok(Output {
                json: envelope("torsion-bound", torsion_value(&query, &t)),
                text: t.bound.to_string(),
                code: EXIT_OK,
            })
        }
        Command::Report {
            input,
            weights,
            scope,
            torsion,
            level,
            d,
            timings,
        } => report(
            input,
            &ReportFlags {
                weights: weights.clone(),
                scope: (*scope).into(),
                torsion: torsion.then_some((*level, *d)),
                timings: *timings,
            },
            limits,
        ),
    }
}

/// Options of the `report` subcommand.
#[derive(Debug, Clone, Default)]
pub struct ReportFlags {
    pub weights: Option<String>,
    pub scope: DegreeScope,
    /// `(N, d)` when a torsion bound is requested.
    pub torsion: Option<(u64, u32)>,
    pub timings: bool,
}

fn report(input: &PathBuf, flags: &ReportFlags, limits: &Limits) -> Result<Output, Failure> {
    let (digest, g) = read_labelled(input)?;
    let (json, text, code) = build_report(&digest, &g, flags, limits);
    Ok(Output { json, text, code })
}

/// One pipeline stage: adds fields to the report body and summary lines.
type StageFn<'a> = dyn FnMut(&mut Map<String, Value>, &mut Vec<String>) -> Result<(), String> + 'a;

/// The consolidated pipeline: validate, classify, align, all strata, pull
/// back, both component groups, degree bound and optionally torsion. A stage
/// error is recorded with its stage name and stops the later stages; an
/// alignment failure is not an error.
pub fn build_report(
    digest: &str,
    g: &LabelledGraph,
    flags: &ReportFlags,
    limits: &Limits,
) -> (Value, String, i32) {
    let mut body = Map::new();
    let mut lines = Vec::new();
    let mut times = Map::new();
    body.insert("input".into(), json!({"sha256": digest}));

    let mut stage = |name: &str, f: &mut StageFn| {
        let start = Instant::now();
        let result = f(&mut body, &mut lines);
        times.insert(name.to_string(), json!(start.elapsed().as_micros() as u64));
        result.map_err(|m| (name.to_string(), m))
    };

    let mut wg: Option<WeightedGraph> = None;
    let outcome = (|| -> Result<(), (String, String)> {
        stage("validate", &mut |body, lines| {
            let violations = g.validate();
            body.insert("valid".into(), json!(violations.is_empty()));
            if violations.is_empty() {
                lines.push("valid".into());
                Ok(())
            } else {
                let msgs: Vec<String> = violations.iter().map(ToString::to_string).collect();
                body.insert("violations".into(), json!(msgs));
                Err(msgs.join("; "))
            }
        })?;
        stage("classify", &mut |body, lines| {
            let c = g.classify();
            body.insert("classification".into(), json!(c.to_string()));
            body.insert(
                "graph".into(),
                json!({
                    "vertices": g.num_vertices(),
                    "edges": g.num_edges(),
                    "parameters": g.params().names(),
                    "betti1": g.betti1(),
                    "jacobian_dimension": g.jacobian_dimension(),
                }),
            );
            lines.push(format!("classification: {c}"));
            Ok(())
        })?;
        stage("align", &mut |body, lines| {
            let v = alignment::is_aligned(g);
            lines.push(verdict_text(&v));
            body.insert("alignment".into(), to_value(&v));
            Ok(())
        })?;
        stage("strata", &mut |body, lines| {
            let r = alignment::neron_model_exists(g, limits.strata_params).map_err(|e| e.to_string())?;
            lines.push(strata_text(&r));
            body.insert("neron_model".into(), to_value(&r));
            Ok(())
        })?;
        stage("pullback", &mut |body, lines| {
            let w = parse_weights(flags.weights.as_deref(), g).map_err(|f| f.message)?;
            let pulled = nmodel::pull_back(g, &w).map_err(|e| e.to_string())?;
            let thick: Vec<Value> = pulled.edges().iter().map(|e| uint_value(&e.thickness)).collect();
            lines.push(format!("max thickness: {}", pulled.max_thickness()));
            body.insert(
                "weighted".into(),
                json!({
                    "weights": w.as_map().iter().map(|(k, v)| (k.clone(), uint_value(v))).collect::<Map<_, _>>(),
                    "max_thickness": uint_value(&pulled.max_thickness()),
                    "thickness": pulled.edges().iter().map(|e| e.id.clone()).zip(thick).collect::<Map<_, _>>(),
                }),
            );
            wg = Some(pulled);
            Ok(())
        })?;
        let wg = wg.as_ref().expect("pullback stage succeeded");
        let mut groups = Map::new();
        stage("critical_group", &mut |_, lines| {
            let c = nmodel::critical_group(wg, limits).map_err(|e| e.to_string())?;
            lines.push(format!("critical group: {c}"));
            groups.insert("critical".into(), group_value(&c));
            Ok(())
        })?;
        stage("quotient_group", &mut |_, lines| {
            let q = nmodel::quotient_component_group(wg).map_err(|e| e.to_string())?;
            lines.push(format!("quotient group: {q}"));
            groups.insert("quotient".into(), group_value(&q));
            Ok(())
        })?;
        stage("degree_bound", &mut |body, lines| {
            body.insert("component_groups".into(), Value::Object(groups.clone()));
            let b = nmodel::degree_bound(wg, flags.scope, limits).map_err(|e| e.to_string())?;
            lines.push(format!("degree bound: {}", b.bound));
            body.insert("degree_bound".into(), degree_value(&b));
            Ok(())
        })?;
        if let Some((level, d)) = flags.torsion {
            stage("torsion", &mut |body, lines| {
                let q = BoundQuery::new(g.jacobian_dimension(), level, d).map_err(|e| e.to_string())?;
                let t = torsion::torsion_order_bound(&q).map_err(|e| e.to_string())?;
                lines.push(format!("torsion bound: {}", t.bound));
                body.insert("torsion".into(), torsion_value(&q, &t));
                Ok(())
            })?;
        }
        Ok(())
    })();

    let code = match &outcome {
        Ok(()) => EXIT_OK,
        Err((stage, _)) if stage == "validate" => EXIT_INVALID,
        Err(_) => EXIT_ERROR,
    };
    if let Err((stage, message)) = outcome {
        lines.push(format!("error in stage {stage}: {message}"));
        body.insert("error".into(), json!({"stage": stage, "message": message}));
    }
    if flags.timings {
        body.insert("timings_us".into(), Value::Object(times));
    }
    (envelope("report", Value::Object(body)), lines.join("\n"), code)
}

/// The report for an in-memory graph as pretty JSON text; the input digest
/// is taken over the canonical serialization of `g`.
pub fn report_json(g: &LabelledGraph, flags: &ReportFlags, limits: &Limits) -> String {
    let (json, _, _) = build_report(&digest(&g.to_json_string()), g, flags, limits);
    serde_json::to_string_pretty(&json).expect("values serialize")
}

fn envelope(command: &str, body: Value) -> Value {
    let mut map = match body {
        Value::Object(m) => m,
        other => {
            let mut m = Map::new();
            m.insert("result".into(), other);
            m
        }
    };
    map.insert("schema".into(), json!(SCHEMA));
    map.insert("command".into(), json!(command));
    Value::Object(map)
}

fn to_value<T: serde::Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("report values serialize")
}

fn group_value(g: &InvariantFactors) -> Value {
    json!({
        "group": g.to_string(),
        "factors": g.factors.iter().map(uint_value).collect::<Vec<_>>(),
        "free_rank": g.free_rank,
        "order": g.order().as_ref().map(uint_value),
    })
}

fn degree_value(b: &nmodel::DegreeBound) -> Value {
    json!({
        "degree_bound": b.bound,
        "group": b.group.to_string(),
        "scope": to_value(&b.scope),
    })
}

fn torsion_value(q: &BoundQuery, t: &torsion::TorsionBound) -> Value {
    json!({
        "g": q.g,
        "N": q.level,
        "d": q.degree,
        "p": t.p,
        "l": t.l,
        "bound_p": uint_value(&t.bound_p),
        "bound_l": uint_value(&t.bound_l),
        "bound": uint_value(&t.bound),
    })
}

fn verdict_text(v: &AlignmentVerdict) -> String {
    match &v.witness {
        None => "aligned".into(),
        Some(w) => format!(
            "not aligned: edges {} and {} on circuit [{}]",
            w.pair.0,
            w.pair.1,
            w.circuit.join(", ")
        ),
    }
}

fn strata_text(r: &NeronReport) -> String {
    let failing: Vec<String> = r
        .failing()
        .map(|s| format!("{{{}}}", s.keep.join(",")))
        .collect();
    if failing.is_empty() {
        format!("neron model exists: aligned on all {} strata", r.strata.len())
    } else {
        format!(
            "neron model does not exist: {} of {} strata fail: {}",
            failing.len(),
            r.strata.len(),
            failing.join(" ")
        )
    }
}

fn read_input(path: &PathBuf) -> Result<String, Failure> {
    let mut text = String::new();
    if path.as_os_str() == "-" {
        std::io::stdin()
            .read_to_string(&mut text)
            .map_err(|e| Failure::error(format!("reading standard input: {e}")))?;
    } else {
        text = std::fs::read_to_string(path)
            .map_err(|e| Failure::error(format!("reading {}: {e}", path.display())))?;
    }
    Ok(text)
}

fn digest(text: &str) -> String {
    hex::encode(Sha256::digest(text.as_bytes()))
}

fn read_labelled(path: &PathBuf) -> Result<(String, LabelledGraph), Failure> {
    let text = read_input(path)?;
    let g = LabelledGraph::from_json_str(&text).map_err(Failure::error)?;
    Ok((digest(&text), g))
}

fn read_valid_labelled(path: &PathBuf) -> Result<LabelledGraph, Failure> {
    let (_, g) = read_labelled(path)?;
    check_valid(&g)?;
    Ok(g)
}

fn check_valid(g: &LabelledGraph) -> Result<(), Failure> {
    let violations = g.validate();
    if violations.is_empty() {
        return Ok(());
    }
    Err(Failure {
        code: EXIT_INVALID,
        message: violations
            .iter()
            .map(|v| format!("invalid: {v}"))
            .collect::<Vec<_>>()
            .join("\n"),
        output: None,
    })
}

fn parse_weights(text: Option<&str>, g: &LabelledGraph) -> Result<TraitWeights, Failure> {
    let given = match text {
        Some(s) => TraitWeights::parse(s).map_err(Failure::error)?,
        None => TraitWeights::from_pairs(Vec::<(String, _)>::new()).map_err(Failure::error)?,
    };
    given.complete(g.params()).map_err(Failure::error)
}

/// A weighted graph file is used as is; a labelled graph is validated and
/// pulled back along the given weights (missing parameters get weight 1).
fn read_weighted(
    path: &PathBuf,
    weights: Option<&str>,
) -> Result<(WeightedGraph, Option<TraitWeights>), Failure> {
    let text = read_input(path)?;
    let value: Value = serde_json::from_str(&text).map_err(|e| Failure::error(format!("malformed JSON: {e}")))?;
    let weighted = value
        .get("edges")
        .and_then(Value::as_array)
        .is_some_and(|es| es.iter().any(|e| e.get("thickness").is_some()));
    if weighted {
        if weights.is_some() {
            return Err(Failure::error("--weights applies to labelled graphs only"));
        }
        let wg = WeightedGraph::from_json_str(&text).map_err(Failure::error)?;
        if !wg.is_connected() {
            return Err(Failure {
                code: EXIT_INVALID,
                message: "invalid: weighted graph is disconnected".into(),
                output: None,
            });
        }
        return Ok((wg, None));
    }
    let g = LabelledGraph::from_json_str(&text).map_err(Failure::error)?;
    check_valid(&g)?;
    let w = parse_weights(weights, &g)?;
    let wg = nmodel::pull_back(&g, &w).map_err(Failure::error)?;
    Ok((wg, Some(w)))
}
