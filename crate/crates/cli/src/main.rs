//! `vok`: command-line front-end of the validation-obligation engine.
//!
//! Machines are named, not given by path: every command resolves names
//! through the project manifest (`--project`, default `$VOK_PROJECT` or the
//! current directory). Exit codes: 0 on success / all PASS, 1 on a failed
//! check or a FAIL / UNKNOWN / SKIPPED verdict, 2 on usage or internal
//! errors.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use vok_core::error::Severity;
use vok_core::explorer::{export_json, import_json, StateSpace};
use vok_core::parser::parse_expr;
use vok_core::printer::{print_machine, Notation};
use vok_core::project::{parse_event_map, parse_glue, EventMap};
use vok_core::projection::{emit_dot, project};
use vok_core::refinement::{
    check_abstraction, check_forward_simulation, check_instantiation, flatten, gluing_invariants,
    Side,
};
use vok_core::traces::{refine_trace, replay, Trace, DEFAULT_SKIP_BUDGET};
use vok_core::vo::engine::{overall, vo_report, vo_report_text};
use vok_core::vo::{derive_vo, evaluate_all, record_derivation, McOption};
use vok_core::{Error, Project, Session, Verdict};

#[derive(Parser)]
#[command(
    name = "vok",
    version,
    about = "Validation obligations for Event-B style models"
)]
struct Cli {
    /// Project manifest, or a directory containing `project.json`.
    #[arg(long, global = true, env = "VOK_PROJECT", default_value = ".")]
    project: PathBuf,
    /// Maximum number of states explored per machine.
    #[arg(long, global = true, default_value_t = vok_core::explorer::DEFAULT_BOUND)]
    bound: usize,
    /// Output format of reports.
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    format: Format,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Json,
}

#[derive(Subcommand)]
enum Command {
    /// Parse, scope-check and axiom-check the whole project.
    Check,
    /// Explore a machine's state space.
    Explore {
        machine: String,
        /// Write the state space as JSON.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Model-check a machine (default: invariants only).
    Mc {
        machine: String,
        /// Fail unless the exploration completes within the bound.
        #[arg(long)]
        fin: bool,
        /// Fail on invariant violations.
        #[arg(long)]
        inv: bool,
        /// Fail on deadlocks.
        #[arg(long)]
        dlf: bool,
    },
    /// Replay a trace file on a machine.
    Replay { machine: String, trace: PathBuf },
    /// Refine an abstract trace onto a concrete machine.
    TraceRefine {
        #[arg(value_name = "ABS")]
        abstract_machine: String,
        #[arg(value_name = "CONC")]
        concrete_machine: String,
        trace: PathBuf,
        /// Maximum consecutive skip (new-event) steps.
        #[arg(long, default_value_t = DEFAULT_SKIP_BUDGET)]
        skip_budget: usize,
        /// Write the refined trace here instead of standard output.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Flatten a refinement chain, most abstract machine first.
    Flatten {
        #[arg(required = true)]
        machines: Vec<String>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Check forward simulation of ABS by CONC through a gluing map.
    RefineCheck {
        #[arg(value_name = "ABS")]
        abstract_machine: String,
        #[arg(value_name = "CONC")]
        concrete_machine: String,
        #[arg(long)]
        glue: PathBuf,
        /// Event map file; defaults to the glue's event map.
        #[arg(long)]
        events: Option<PathBuf>,
    },
    /// Run the three gates of an abstraction link.
    AbstractionCheck { link: String },
    /// Check an instantiation link.
    InstantiationCheck { link: String },
    /// Project a state space onto an expression.
    Project(ProjectArgs),
    /// Validation obligations.
    Vo {
        #[command(subcommand)]
        command: VoCommand,
    },
}

#[derive(Args)]
struct ProjectArgs {
    machine: String,
    #[arg(long)]
    expr: String,
    /// Use a state space exported by `explore --out` instead of exploring.
    #[arg(long)]
    from: Option<PathBuf>,
    /// DOT output file; standard output when absent.
    #[arg(long)]
    dot: Option<PathBuf>,
}

#[derive(Subcommand)]
enum VoCommand {
    /// Evaluate the named VOs (all when none is named).
    Run { names: Vec<String> },
    /// Derive a VO across a link and record it in its `.vo` file.
    Derive { vo: String, link: String },
    /// Evaluate every VO and print the status report.
    Report,
}

/// Outcome of a command: what to print and how to exit.
struct Outcome {
    text: String,
    code: u8,
}

impl Outcome {
    fn new(text: String, ok: bool) -> Outcome {
        Outcome {
            text,
            code: if ok { 0 } else { 1 },
        }
    }

    fn verdict(text: String, v: Verdict) -> Outcome {
        Outcome {
            text,
            code: v.exit_code() as u8,
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(o) => {
            print!("{}", o.text);
            if !o.text.is_empty() && !o.text.ends_with('\n') {
                println!();
            }
            ExitCode::from(o.code)
        }
        Err(e) => {
            eprintln!("vok: {e}");
            ExitCode::from(2)
        }
    }
}

fn read(path: &Path) -> Result<String, Error> {
    fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn write(path: &Path, text: &str) -> Result<(), Error> {
    fs::write(path, text).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn pretty(v: serde_json::Value) -> String {
    let mut s = serde_json::to_string_pretty(&v).expect("json");
    s.push('\n');
    s
}

fn summary(ss: &StateSpace) -> String {
    format!(
        "{} states, {} transitions, {}",
        ss.len(),
        ss.transition_count(),
        if ss.complete() {
            "complete"
        } else {
            "incomplete"
        }
    )
}

fn run(cli: &Cli) -> Result<Outcome, Error> {
    let session = Session::with_bound(Project::load(&cli.project)?, cli.bound);
    let json = cli.format == Format::Json;
    match &cli.command {
        Command::Check => {
            let diags = session.check();
            let errors = diags
                .iter()
                .filter(|d| d.severity == Severity::Error)
                .count();
            let text = if json {
                pretty(json!({
                    "errors": errors,
                    "diagnostics": diags.iter().map(|d| json!({
                        "code": d.code,
                        "severity": if d.severity == Severity::Error { "error" } else { "warning" },
                        "message": d.to_string(),
                    })).collect::<Vec<_>>(),
                }))
            } else {
                let mut s: String = diags.iter().map(|d| format!("{d}\n")).collect();
                s.push_str(&format!(
                    "{} error(s), {} warning(s)\n",
                    errors,
                    diags.len() - errors
                ));
                s
            };
            Ok(Outcome::new(text, errors == 0))
        }
        Command::Explore { machine, out } => {
            let ss = session.explore(machine)?;
            if let Some(out) = out {
                write(out, &export_json(&ss))?;
            }
            let text = if json {
                pretty(json!({
                    "machine": machine,
                    "states": ss.len(),
                    "transitions": ss.transition_count(),
                    "complete": ss.complete(),
                    "violations": ss.violations().len(),
                    "deadlocks": ss.deadlocks().len(),
                }))
            } else {
                format!(
                    "{machine}: {}; {} violation(s), {} deadlock(s)\n",
                    summary(&ss),
                    ss.violations().len(),
                    ss.deadlocks().len()
                )
            };
            Ok(Outcome::new(text, true))
        }
        Command::Mc {
            machine,
            fin,
            inv,
            dlf,
        } => {
            let mut options = Vec::new();
            for (on, o) in [
                (*fin, McOption::Fin),
                (*inv, McOption::Inv),
                (*dlf, McOption::Dlf),
            ] {
                if on {
                    options.push(o);
                }
            }
            let task = vok_core::vo::TaskDecl {
                id: "mc".into(),
                machine: machine.clone(),
                ty: vok_core::vo::TaskType::MC,
                param: None,
                expect: None,
            };
            // surface resolution problems as errors rather than verdicts
            session.flat(machine)?;
            session.instance(machine)?;
            let r = vok_core::vo::run_task(&session, &task, &options, &[]);
            if r.verdict == Verdict::Error {
                return Err(Error::check("E_MC", r.detail));
            }
            let text = if json {
                pretty(json!({ "machine": machine, "verdict": r.verdict, "detail": r.detail }))
            } else {
                format!("{machine}: {} ({})\n", r.verdict, r.detail)
            };
            Ok(Outcome::verdict(text, r.verdict))
        }
        Command::Replay { machine, trace } => {
            let t = Trace::load(trace)?;
            let m = session.flat(machine)?;
            let inst = session.instance(machine)?;
            let r = replay(&t, &m, &inst.env)?;
            let text = if json {
                pretty(json!({
                    "machine": machine,
                    "verdict": r.verdict,
                    "failedStep": r.failure.as_ref().and_then(|f| f.step),
                    "reason": r.failure.as_ref().map(|f| f.reason.as_str()),
                    "detail": r.describe(),
                }))
            } else {
                format!("{machine}: {} ({})\n", r.verdict, r.describe())
            };
            Ok(Outcome::verdict(text, r.verdict))
        }
        Command::TraceRefine {
            abstract_machine,
            concrete_machine,
            trace,
            skip_budget,
            out,
        } => {
            let t = Trace::load(trace)?;
            let p = &session.project;
            let conc = session.flat(concrete_machine)?;
            let linked = p.links.iter().find(|l| {
                l.abstract_machine() == abstract_machine && l.concrete_machine() == concrete_machine
            });
            let identity;
            let events = match linked.and_then(|l| l.event_map()) {
                Some(e) => e,
                None => {
                    identity = EventMap::identity(&conc);
                    &identity
                }
            };
            let inst = session.instance(concrete_machine)?;
            let refined = refine_trace(&t, &conc, &inst.env, events, *skip_budget)?;
            let text = refined.to_json();
            match out {
                Some(path) => {
                    write(path, &text)?;
                    Ok(Outcome::new(
                        format!(
                            "{} steps, {} skip(s)\n",
                            refined.steps.len(),
                            refined.skip_count()
                        ),
                        true,
                    ))
                }
                None => Ok(Outcome::new(text, true)),
            }
        }
        Command::Flatten { machines, out } => {
            let p = &session.project;
            let chain = machines
                .iter()
                .map(|n| p.require_machine(n))
                .collect::<Result<Vec<_>, _>>()?;
            let f = flatten(&chain)?;
            for w in &f.warnings {
                eprintln!("{w}");
            }
            let text = print_machine(&f.machine, Notation::Ascii);
            match out {
                Some(path) => {
                    write(path, &text)?;
                    Ok(Outcome::new(String::new(), true))
                }
                None => Ok(Outcome::new(text, true)),
            }
        }
        Command::RefineCheck {
            abstract_machine,
            concrete_machine,
            glue,
            events,
        } => {
            let g = parse_glue(&read(glue)?)?;
            let explicit = match events {
                Some(path) => Some(parse_event_map(&read(path)?)?),
                None => None,
            };
            let events = explicit.as_ref().or(g.events.as_ref()).ok_or_else(|| {
                Error::check(
                    "E_EVENT_MAP",
                    "no event map: pass --events or add one to the glue",
                )
            })?;
            let am = session.flat(abstract_machine)?;
            let cm = session.flat(concrete_machine)?;
            let raw = session.project.require_machine(concrete_machine)?;
            let gluing: Vec<_> = gluing_invariants(raw, &am).into_iter().cloned().collect();
            let (ai, ci) = (
                session.instance(abstract_machine)?,
                session.instance(concrete_machine)?,
            );
            let ss = session.explore_machine(&cm, &ci)?;
            let r = check_forward_simulation(
                Side {
                    machine: &am,
                    env: &ai.env,
                },
                Side {
                    machine: &cm,
                    env: &ci.env,
                },
                &ss,
                &g,
                events,
                &gluing,
            )?;
            let text = if json {
                pretty(json!({
                    "verdict": r.verdict,
                    "code": r.code,
                    "detail": r.describe(),
                    "obligation": r.counterexample.as_ref().map(|c| c.obligation.as_str()),
                    "depth": r.counterexample.as_ref().map(|c| c.depth()),
                }))
            } else {
                format!(
                    "{abstract_machine} <- {concrete_machine}: {} ({})\n",
                    r.verdict,
                    r.describe()
                )
            };
            Ok(Outcome::verdict(text, r.verdict))
        }
        Command::AbstractionCheck { link } => {
            let r = check_abstraction(&session, link)?;
            let text = if json {
                pretty(json!({
                    "link": r.link,
                    "verdict": r.verdict(),
                    "gates": r.gates.iter().map(|g| json!({
                        "gate": g.number,
                        "name": g.name,
                        "verdict": g.verdict,
                        "code": g.code,
                        "detail": g.detail,
                    })).collect::<Vec<_>>(),
                }))
            } else {
                let mut s = format!("{}: {}\n", r.link, r.verdict());
                for g in &r.gates {
                    let code = g.code.map(|c| format!(" [{c}]")).unwrap_or_default();
                    s.push_str(&format!(
                        "  gate {} {:<20} {}{code}: {}\n",
                        g.number, g.name, g.verdict, g.detail
                    ));
                }
                s
            };
            Ok(Outcome::verdict(text, r.verdict()))
        }
        Command::InstantiationCheck { link } => {
            let r = check_instantiation(&session, link)?;
            let text = if json {
                pretty(json!({
                    "link": r.link,
                    "verdict": r.verdict,
                    "failures": r.failures.iter().map(|d| json!({
                        "code": d.code,
                        "label": d.label,
                        "message": d.message,
                    })).collect::<Vec<_>>(),
                }))
            } else {
                let mut s = format!("{}: {}\n", r.link, r.verdict);
                for d in &r.failures {
                    s.push_str(&format!("  {d}\n"));
                }
                s
            };
            Ok(Outcome::verdict(text, r.verdict))
        }
        Command::Project(a) => {
            let e = parse_expr(&a.expr)?;
            let inst = session.instance(&a.machine)?;
            let ss = match &a.from {
                Some(path) => std::sync::Arc::new(import_json(&read(path)?)?),
                None => session.explore(&a.machine)?,
            };
            let p = project(&ss, &e, &inst.env)?;
            let dot = emit_dot(&p);
            match &a.dot {
                Some(path) => {
                    write(path, &dot)?;
                    Ok(Outcome::new(
                        format!("{} nodes, {} edges\n", p.nodes.len(), p.edges.len()),
                        true,
                    ))
                }
                None => Ok(Outcome::new(dot, true)),
            }
        }
        Command::Vo { command } => run_vo(session, command, json),
    }
}

fn run_vo(mut session: Session, command: &VoCommand, json: bool) -> Result<Outcome, Error> {
    let names = match command {
        VoCommand::Run { names } => names.clone(),
        VoCommand::Report => Vec::new(),
        VoCommand::Derive { vo, link } => {
            let d = derive_vo(&session, vo, link)?;
            let file = record_derivation(&mut session.project, &d)?;
            let text = if json {
                pretty(json!({
                    "vo": d.vo.name,
                    "tasks": d.tasks.iter().map(|t| &t.id).collect::<Vec<_>>(),
                    "file": file,
                }))
            } else {
                let mut s = format!(
                    "{} derived from {vo} via {link}, written to {}\n",
                    d.vo.name,
                    file.display()
                );
                for t in &d.tasks {
                    s.push_str(&format!("  {}\n", vok_core::vo::model::render_task(t)));
                }
                s.push_str(&format!("  {}\n", vok_core::vo::model::render_vo(&d.vo)));
                s
            };
            return Ok(Outcome::new(text, true));
        }
    };
    let results = evaluate_all(&session, &names)?;
    let text = if json {
        vo_report(&session, &results)
    } else {
        vo_report_text(&results)
    };
    Ok(Outcome::verdict(text, overall(&results)))
}
