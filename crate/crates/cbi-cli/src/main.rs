//! The `cbi` command-line tool: parse and render formulas, build and
//! validate finite models, evaluate formulas, search for countermodels,
//! check and search for proofs, and translate to the modal presentation.
//!
//! Every subcommand is a thin adapter over the `cbi-core` library; `--json`
//! switches from human-readable output to machine output that mirrors the
//! library result. Exit status: 0 = success / property holds; 1 = property
//! fails, countermodel found, proof rejected, or search exhausted; 2 =
//! input or usage error.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use cbi_core::display::{
    audit_belnap_conditions, check_proof, identity_proof, parse_consecution, Proof,
};
use cbi_core::formula::{
    macro_i, macro_j, macro_k, macro_l, parse_formula, render, Formula, PropVar, RenderStyle,
};
use cbi_core::modal::{
    check_axioms, embed_formula, embed_model, frame_from_json, is_very_simple_sahlqvist,
    parse_modal_formula, render_modal,
};
use cbi_core::search::{prove, SearchConfig, SearchOutcome};
use cbi_core::semantics::{
    action_comm, bbi_extension, bitvec, countermodel_search, deny_guarantee, disjoint_union,
    from_abelian_group, generalized_heap, model_from_json, powerset_model, product_model, z_mod,
    CountermodelOutcome, Environment, LoadedModel, ResourceModel, SearchBudget, TruthOutcome,
};

#[derive(Parser)]
#[command(name = "cbi", version, about = "Classical BI verification workbench")]
struct Cli {
    /// Emit machine-readable JSON instead of human-readable text.
    #[arg(long, global = true)]
    json: bool,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Render {
    Ascii,
    Unicode,
    Latex,
}

impl Render {
    fn style(self) -> RenderStyle {
        match self {
            Render::Ascii => RenderStyle::Ascii,
            Render::Unicode => RenderStyle::Unicode,
            Render::Latex => RenderStyle::Latex,
        }
    }
}

#[derive(Subcommand)]
enum Cmd {
    /// Parse a formula and print it back.
    Parse {
        formula: String,
        #[arg(long, value_enum, default_value = "unicode")]
        render: Render,
    },
    /// Build, validate, and list finite models.
    Model {
        #[command(subcommand)]
        cmd: ModelCmd,
    },
    /// Evaluate a formula on a model.
    Eval(EvalArgs),
    /// Search finite models for a countermodel of a formula.
    Countermodel {
        formula: String,
        /// Exhaustive enumeration up to this carrier size (capped at 3).
        #[arg(long, default_value_t = 3)]
        max_size: usize,
        /// Restrict the structured families searched
        /// (enum, zmod, bitvec, powerset, combo); default: all.
        #[arg(long, value_delimiter = ',')]
        families: Vec<String>,
    },
    /// Check, search for, and audit proofs.
    Proof {
        #[command(subcommand)]
        cmd: ProofCmd,
    },
    /// The modal presentation: translations, frames, axioms.
    Modal {
        #[command(subcommand)]
        cmd: ModalCmd,
    },
}

#[derive(Subcommand)]
enum ModelCmd {
    /// Validate a model file against its defining axioms.
    Validate { file: PathBuf },
    /// Build a named model; prints JSON or writes it with -o.
    Build {
        /// One of: abelian, zmod, bitvec, powerset, action, heap,
        /// denyguar, union, product, bbiext (see `model list`).
        name: String,
        params: Vec<String>,
        #[arg(short, long)]
        out: Option<PathBuf>,
    },
    /// List the model builders and their parameters.
    List,
}

#[derive(Args)]
struct EvalArgs {
    model: PathBuf,
    formula: String,
    /// Environment file: JSON object mapping variables to element lists.
    #[arg(long)]
    env: Option<PathBuf>,
    /// Evaluate satisfaction at this element (with --env).
    #[arg(long, conflicts_with = "truth")]
    at: Option<String>,
    /// Evaluate truth: every point, every environment (the default).
    #[arg(long)]
    truth: bool,
}

#[derive(Subcommand)]
enum ProofCmd {
    /// Check a serialized proof tree.
    Check { file: PathBuf },
    /// Bounded backward proof search for a consecution.
    Prove {
        consecution: String,
        #[arg(long, default_value_t = 20)]
        depth: usize,
    },
    /// Build and check the structural identity proof of `F |- F`.
    Identity { formula: String },
    /// Audit the rule table against the Belnap conditions C1/C3/C4/C5.
    Audit,
}

#[derive(Subcommand)]
enum ModalCmd {
    /// Translate a CBI-formula to a modal formula.
    Embed {
        formula: String,
        #[arg(long, value_enum, default_value = "ascii")]
        render: Render,
    },
    /// Embed a CBI-model as a modal frame; prints JSON or writes it with -o.
    EmbedModel {
        file: PathBuf,
        #[arg(short, long)]
        out: Option<PathBuf>,
    },
    /// Check the eleven AX_CBI axioms on a frame file.
    CheckAxioms { file: PathBuf },
    /// Test whether a modal formula is very simple Sahlqvist.
    Sahlqvist { formula: String },
}

/// An input or usage problem (exit status 2).
struct InputError(String);

impl<E: std::fmt::Display> From<E> for InputError {
    fn from(e: E) -> Self {
        InputError(e.to_string())
    }
}

type Verdict = Result<ExitCode, InputError>;

const HOLDS: ExitCode = ExitCode::SUCCESS;
const FAILS: ExitCode = ExitCode::FAILURE;

fn main() -> ExitCode {
    let cli = Cli::parse();
    let json = cli.json;
    let outcome = match cli.cmd {
        Cmd::Parse { formula, render } => cmd_parse(&formula, render, json),
        Cmd::Model { cmd } => match cmd {
            ModelCmd::Validate { file } => cmd_model_validate(&file, json),
            ModelCmd::Build { name, params, out } => cmd_model_build(&name, &params, out, json),
            ModelCmd::List => cmd_model_list(json),
        },
        Cmd::Eval(args) => cmd_eval(&args, json),
        Cmd::Countermodel {
            formula,
            max_size,
            families,
        } => cmd_countermodel(&formula, max_size, &families, json),
        Cmd::Proof { cmd } => match cmd {
            ProofCmd::Check { file } => cmd_proof_check(&file, json),
            ProofCmd::Prove { consecution, depth } => cmd_proof_prove(&consecution, depth, json),
            ProofCmd::Identity { formula } => cmd_proof_identity(&formula, json),
            ProofCmd::Audit => cmd_proof_audit(json),
        },
        Cmd::Modal { cmd } => match cmd {
            ModalCmd::Embed { formula, render } => cmd_modal_embed(&formula, render, json),
            ModalCmd::EmbedModel { file, out } => cmd_modal_embed_model(&file, out, json),
            ModalCmd::CheckAxioms { file } => cmd_modal_check_axioms(&file, json),
            ModalCmd::Sahlqvist { formula } => cmd_modal_sahlqvist(&formula, json),
        },
    };
    match outcome {
        Ok(code) => code,
        Err(InputError(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}

fn emit(json: bool, value: serde_json::Value, human: &str) {
    if json {
        println!("{}", serde_json::to_string_pretty(&value).expect("serializes"));
    } else {
        println!("{human}");
    }
}

// ---------------------------------------------------------------------------
// parse
// ---------------------------------------------------------------------------

fn cmd_parse(text: &str, style: Render, json: bool) -> Verdict {
    let f = parse_formula(text)?;
    let rendered = render(&f, style.style());
    emit(
        json,
        json!({
            "render": rendered,
            "ascii": render(&f, RenderStyle::Ascii),
            "size": f.size(),
            "vars": f.vars().iter().map(|v| v.name().to_string()).collect::<Vec<_>>(),
        }),
        &rendered,
    );
    Ok(HOLDS)
}

// ---------------------------------------------------------------------------
// model
// ---------------------------------------------------------------------------

fn read_file(path: &PathBuf) -> Result<String, InputError> {
    std::fs::read_to_string(path)
        .map_err(|e| InputError(format!("cannot read {}: {e}", path.display())))
}

fn load_model(path: &PathBuf) -> Result<LoadedModel, InputError> {
    Ok(model_from_json(&read_file(path)?)?)
}

fn load_cbi_model(path: &PathBuf) -> Result<ResourceModel, InputError> {
    match load_model(path)? {
        LoadedModel::Cbi(m) => Ok(m),
        LoadedModel::Bbi(_) => Err(InputError(format!(
            "{} is a BBI-model (no infinity/inv); a CBI-model is required",
            path.display()
        ))),
    }
}

fn cmd_model_validate(file: &PathBuf, json: bool) -> Verdict {
    let report = match load_model(file)? {
        LoadedModel::Cbi(m) => m.validate_cbi(),
        LoadedModel::Bbi(m) => m.validate_bbi(),
    };
    let human = if report.ok {
        "ok".to_string()
    } else {
        report
            .failures
            .iter()
            .map(|f| format!("axiom {} fails at ({})", f.axiom, f.witness.join(",")))
            .collect::<Vec<_>>()
            .join("\n")
    };
    emit(json, serde_json::to_value(&report)?, &human);
    Ok(if report.ok { HOLDS } else { FAILS })
}

fn comma_list(s: &str) -> Vec<String> {
    s.split(',')
        .filter(|p| !p.is_empty())
        .map(String::from)
        .collect()
}

fn param<'a>(params: &'a [String], i: usize, what: &str) -> Result<&'a str, InputError> {
    params
        .get(i)
        .map(String::as_str)
        .ok_or_else(|| InputError(format!("missing parameter: {what}")))
}

fn num(params: &[String], i: usize, what: &str) -> Result<usize, InputError> {
    param(params, i, what)?
        .parse()
        .map_err(|e| InputError(format!("bad {what}: {e}")))
}

/// Input format for `model build abelian`: explicit group tables.
#[derive(serde::Deserialize)]
struct GroupJson {
    elements: Vec<String>,
    /// Cayley table of element indices.
    op: Vec<Vec<usize>>,
    unit: usize,
    inverse: Vec<usize>,
}

fn cmd_model_build(
    name: &str,
    params: &[String],
    out: Option<PathBuf>,
    json: bool,
) -> Verdict {
    // Distinguish bad invocations (status 2) from well-formed requests the
    // builder rejects, e.g. a violated side condition (status 1).
    let built: Result<ResourceModel, cbi_core::semantics::ModelError> = match name {
        "abelian" => {
            let g: GroupJson = serde_json::from_str(&read_file(&PathBuf::from(param(
                params, 0, "group.json",
            )?))?)
            .map_err(|e| InputError(format!("bad group file: {e}")))?;
            from_abelian_group(g.elements, &g.op, g.unit, &g.inverse)
        }
        "zmod" => z_mod(num(params, 0, "n")?, num(params, 1, "m")?),
        "bitvec" => bitvec(num(params, 0, "n")?),
        "powerset" => powerset_model(&comma_list(param(params, 0, "universe")?)),
        "action" => action_comm(&comma_list(param(params, 0, "actions")?)),
        "heap" => generalized_heap(
            &comma_list(param(params, 0, "locations")?),
            &comma_list(param(params, 1, "values")?),
        ),
        "denyguar" => deny_guarantee(
            &comma_list(param(params, 0, "actions")?),
            num(params, 1, "k")?,
        ),
        "union" => {
            let a = load_cbi_model(&PathBuf::from(param(params, 0, "left model")?))?;
            let b = load_cbi_model(&PathBuf::from(param(params, 1, "right model")?))?;
            disjoint_union(&a, &b)
        }
        "product" => {
            if params.len() < 2 {
                return Err(InputError("product needs at least two model files".into()));
            }
            let factors: Vec<ResourceModel> = params
                .iter()
                .map(|p| load_cbi_model(&PathBuf::from(p)))
                .collect::<Result<_, _>>()?;
            product_model(&factors)
        }
        "bbiext" => match load_model(&PathBuf::from(param(params, 0, "bbi model")?))? {
            LoadedModel::Bbi(m) => bbi_extension(&m),
            LoadedModel::Cbi(_) => {
                return Err(InputError("bbiext expects a BBI-model file".into()))
            }
        },
        other => {
            return Err(InputError(format!(
                "unknown builder `{other}` (see `cbi model list`)"
            )))
        }
    };
    let model = match built {
        Ok(m) => m,
        Err(e) => {
            emit(json, json!({ "error": e.to_string() }), &format!("build failed: {e}"));
            return Ok(FAILS);
        }
    };
    let value = model.to_json();
    match out {
        Some(path) => {
            std::fs::write(&path, serde_json::to_string_pretty(&value)?)
                .map_err(|e| InputError(format!("cannot write {}: {e}", path.display())))?;
            emit(
                json,
                json!({ "written": path.display().to_string(), "label": model.label() }),
                &format!("wrote {} ({model})", path.display()),
            );
        }
        None => println!("{}", serde_json::to_string_pretty(&value)?),
    }
    Ok(HOLDS)
}

fn cmd_model_list(json: bool) -> Verdict {
    let builders = [
        ("abelian", "<group.json>", "finite Abelian group (∞ = e)"),
        ("zmod", "<n> <m>", "integers mod n with ∞ = m"),
        ("bitvec", "<n>", "n-bit vectors under XOR"),
        ("powerset", "<a,b,…>", "powerset with disjoint union"),
        ("action", "<a,b,…>", "action/co-action communication"),
        ("heap", "<locs> <vals>", "generalised heaps (multi-valued cells)"),
        ("denyguar", "<actions> <k>", "discretized deny-guarantee permissions"),
        ("union", "<a.json> <b.json>", "disjoint union identifying units and infinities"),
        ("product", "<a.json> <b.json> …", "componentwise product"),
        ("bbiext", "<bbi.json>", "CBI-extension of a BBI-model"),
    ];
    emit(
        json,
        json!(builders
            .iter()
            .map(|(n, p, d)| json!({ "name": n, "params": p, "about": d }))
            .collect::<Vec<_>>()),
        &builders
            .iter()
            .map(|(n, p, d)| format!("{n:<9} {p:<22} {d}"))
            .collect::<Vec<_>>()
            .join("\n"),
    );
    Ok(HOLDS)
}

// ---------------------------------------------------------------------------
// eval / countermodel
// ---------------------------------------------------------------------------

/// Expands the built-in named macros `I`, `J`, `K`, `L` (the
/// nonconservativity and partial-functional separation witnesses).
fn expand_macros(f: &Formula) -> Formula {
    let mut out = f.clone();
    for (name, def) in [
        ("I", macro_i()),
        ("J", macro_j()),
        ("K", macro_k()),
        ("L", macro_l()),
    ] {
        out = out.substitute(&PropVar::new(name), &def);
    }
    out
}

fn load_env(path: &Option<PathBuf>) -> Result<Environment, InputError> {
    match path {
        None => Ok(Environment::new()),
        Some(p) => {
            serde_json::from_str(&read_file(p)?).map_err(|e| InputError(format!("bad env: {e}")))
        }
    }
}

fn env_json(env: &Environment) -> serde_json::Value {
    serde_json::to_value(env).expect("environment serializes")
}

fn truth_verdict(outcome: &TruthOutcome, json: bool) -> ExitCode {
    match outcome {
        TruthOutcome::True => {
            emit(json, json!({ "truth": true }), "true");
            HOLDS
        }
        TruthOutcome::False { env, point } => {
            emit(
                json,
                json!({ "truth": false, "env": env_json(env), "point": point }),
                &format!(
                    "false at {point} under {}",
                    serde_json::to_string(&env_json(env)).expect("serializes")
                ),
            );
            FAILS
        }
        TruthOutcome::Exhausted { enumerated } => {
            emit(
                json,
                json!({ "exhausted": true, "enumerated": enumerated }),
                &format!("exhausted after {enumerated} environments"),
            );
            FAILS
        }
    }
}

fn cmd_eval(args: &EvalArgs, json: bool) -> Verdict {
    let f = expand_macros(&parse_formula(&args.formula)?);
    let model = load_model(&args.model)?;
    if let Some(r) = &args.at {
        let env = load_env(&args.env)?;
        let holds = match &model {
            LoadedModel::Cbi(m) => m.sat(&env, r, &f)?,
            LoadedModel::Bbi(m) => m.sat_bbi(&env, r, &f)?,
        };
        emit(
            json,
            json!({ "sat": holds, "at": r }),
            &format!("{holds}"),
        );
        return Ok(if holds { HOLDS } else { FAILS });
    }
    let outcome = match &model {
        LoadedModel::Cbi(m) => m.truth(&f),
        LoadedModel::Bbi(m) => m.truth_bbi(&f)?,
    };
    Ok(truth_verdict(&outcome, json))
}

fn cmd_countermodel(text: &str, max_size: usize, families: &[String], json: bool) -> Verdict {
    let f = expand_macros(&parse_formula(text)?);
    let mut budget = SearchBudget {
        enum_size: max_size.min(3),
        ..SearchBudget::default()
    };
    if !families.is_empty() {
        let defaults = SearchBudget::default();
        budget.enum_size = 0;
        budget.zmod_max = 0;
        budget.bitvec_max = 0;
        budget.powerset_max = 0;
        budget.combinations = false;
        for fam in families {
            match fam.as_str() {
                "enum" => budget.enum_size = max_size.min(3),
                "zmod" => budget.zmod_max = defaults.zmod_max,
                "bitvec" => budget.bitvec_max = defaults.bitvec_max,
                "powerset" => budget.powerset_max = defaults.powerset_max,
                "combo" => budget.combinations = true,
                other => return Err(InputError(format!("unknown family `{other}`"))),
            }
        }
    }
    match countermodel_search(&f, &budget) {
        CountermodelOutcome::Found { model, env, point } => {
            emit(
                json,
                json!({
                    "found": true,
                    "model": model.to_json(),
                    "env": env_json(&env),
                    "point": point,
                }),
                &format!(
                    "countermodel: {model}, false at {point} under {}",
                    serde_json::to_string(&env_json(&env)).expect("serializes")
                ),
            );
        }
        CountermodelOutcome::Exhausted { models_tried } => {
            emit(
                json,
                json!({ "found": false, "exhausted": true, "models_tried": models_tried }),
                &format!("exhausted: no countermodel among {models_tried} models"),
            );
        }
    }
    // Both outcomes are status 1: either the formula fails, or the search
    // could not settle validity.
    Ok(FAILS)
}

// ---------------------------------------------------------------------------
// proof
// ---------------------------------------------------------------------------

fn report_verdict(report: &cbi_core::display::ProofReport, proof: &Proof, json: bool) -> ExitCode {
    let human = if report.ok {
        format!(
            "ok ({} nodes{}{})",
            proof.nodes().len(),
            if report.cut_free { ", cut-free" } else { ", uses Cut" },
            if report.subformula_ok {
                ", subformula property holds"
            } else {
                ""
            },
        )
    } else {
        report
            .diagnostics
            .iter()
            .map(|d| format!("node {:?}: {}", d.path, d.message))
            .collect::<Vec<_>>()
            .join("\n")
    };
    emit(json, serde_json::to_value(report).expect("serializes"), &human);
    if report.ok {
        HOLDS
    } else {
        FAILS
    }
}

fn cmd_proof_check(file: &PathBuf, json: bool) -> Verdict {
    let proof: Proof = serde_json::from_str(&read_file(file)?)
        .map_err(|e| InputError(format!("bad proof file: {e}")))?;
    let report = check_proof(&proof);
    Ok(report_verdict(&report, &proof, json))
}

fn render_proof_tree(p: &Proof, depth: usize, out: &mut String) {
    let label = match p.direction {
        Some(d) => format!("{:?} ({d:?})", p.rule),
        None => format!("{:?}", p.rule),
    };
    out.push_str(&format!("{}{label}: {}\n", "  ".repeat(depth), p.conclusion));
    for q in &p.premises {
        render_proof_tree(q, depth + 1, out);
    }
}

fn cmd_proof_prove(text: &str, depth: usize, json: bool) -> Verdict {
    let goal = parse_consecution(text)?;
    match prove(&goal, &SearchConfig::with_depth(depth)) {
        SearchOutcome::Proved(proof) => {
            let report = check_proof(&proof);
            let mut tree = String::new();
            render_proof_tree(&proof, 0, &mut tree);
            emit(
                json,
                json!({ "proved": true, "proof": serde_json::to_value(&proof)?, "report": serde_json::to_value(&report)? }),
                &format!("proved ({} nodes)\n{}", proof.nodes().len(), tree.trim_end()),
            );
            Ok(HOLDS)
        }
        SearchOutcome::Exhausted(stats) => {
            emit(
                json,
                json!({ "proved": false, "exhausted": true, "stats": serde_json::to_value(&stats)? }),
                &format!(
                    "exhausted at depth {depth}: {} nodes expanded, max depth {}",
                    stats.nodes, stats.max_depth
                ),
            );
            Ok(FAILS)
        }
    }
}

fn cmd_proof_identity(text: &str, json: bool) -> Verdict {
    let f = parse_formula(text)?;
    let proof = identity_proof(&f);
    let report = check_proof(&proof);
    Ok(report_verdict(&report, &proof, json))
}

fn cmd_proof_audit(json: bool) -> Verdict {
    let report = audit_belnap_conditions();
    let human = if report.ok {
        "C1/C3/C4/C5: pass".to_string()
    } else {
        report
            .violations
            .iter()
            .map(|v| format!("{:?} violates {}: {}", v.rule, v.condition, v.detail))
            .collect::<Vec<_>>()
            .join("\n")
    };
    emit(json, serde_json::to_value(&report)?, &human);
    Ok(if report.ok { HOLDS } else { FAILS })
}

// ---------------------------------------------------------------------------
// modal
// ---------------------------------------------------------------------------

fn cmd_modal_embed(text: &str, style: Render, json: bool) -> Verdict {
    let f = parse_formula(text)?;
    let a = embed_formula(&f);
    let rendered = render_modal(&a, style.style());
    emit(
        json,
        json!({ "render": rendered, "ascii": render_modal(&a, RenderStyle::Ascii) }),
        &rendered,
    );
    Ok(HOLDS)
}

fn cmd_modal_embed_model(file: &PathBuf, out: Option<PathBuf>, json: bool) -> Verdict {
    let m = load_cbi_model(file)?;
    let validation = m.validate_cbi();
    if !validation.ok {
        emit(
            json,
            serde_json::to_value(&validation)?,
            "model fails validate_cbi; embed requires a valid CBI-model",
        );
        return Ok(FAILS);
    }
    let frame = embed_model(&m);
    let value = frame.to_json();
    match out {
        Some(path) => {
            std::fs::write(&path, serde_json::to_string_pretty(&value)?)
                .map_err(|e| InputError(format!("cannot write {}: {e}", path.display())))?;
            emit(
                json,
                json!({ "written": path.display().to_string() }),
                &format!("wrote {} ({frame})", path.display()),
            );
        }
        None => println!("{}", serde_json::to_string_pretty(&value)?),
    }
    Ok(HOLDS)
}

fn cmd_modal_check_axioms(file: &PathBuf, json: bool) -> Verdict {
    let frame = frame_from_json(&read_file(file)?)?;
    let report = check_axioms(&frame);
    let mut lines: Vec<String> = report
        .checks
        .iter()
        .map(|c| {
            if c.holds {
                format!("axiom {}: holds", c.axiom)
            } else {
                let w = c.witness.as_ref().expect("failing axiom carries a witness");
                format!("axiom {}: fails at {}", c.axiom, w.point)
            }
        })
        .collect();
    let held = report.checks.iter().filter(|c| c.holds).count();
    lines.push(format!(
        "{held}/11 hold; unitary: {}{}",
        report.unitary,
        if report.sampled { "; sampled" } else { "" }
    ));
    emit(json, serde_json::to_value(&report)?, &lines.join("\n"));
    Ok(if report.all_hold() { HOLDS } else { FAILS })
}

fn cmd_modal_sahlqvist(text: &str, json: bool) -> Verdict {
    let a = parse_modal_formula(text)?;
    let verdict = is_very_simple_sahlqvist(&a);
    emit(json, json!({ "sahlqvist": verdict }), &format!("{verdict}"));
    Ok(if verdict { HOLDS } else { FAILS })
}
