use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use dcl_core::canon::canonicalize;
use dcl_core::delta::pullback_delta;
use dcl_core::enumerate::Bounds;
use dcl_core::harness::{run_satax, SataxOptions};
use dcl_core::injectivity::{bounded_entailment, formula_key, infer, Entailment, SearchCaps};
use dcl_core::io::{
    declaration_json, delta_json, derivation_json, graph_json, instance_json, morphism_json, report_json, sketch_json,
    slice_morphism_json, soundness_json, to_pretty, verdict_json, Object, Workspace,
};
use dcl_core::satisfaction::{migrate_instance, validate_instance, Fault, Status, ValidateOptions};
use dcl_core::signature::Signature;
use dcl_core::slice::canonicalize_instance;
use dcl_core::DclError;
use serde_json::{json, Value};

#[derive(Parser)]
#[command(name = "dcl", version, about = "Diagram constraint logic over finite multigraphs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Validate an instance against a sketch.
    Check {
        sketch: PathBuf,
        instance: PathBuf,
        /// Close the sketch under its signature's dependencies first.
        #[arg(long)]
        close: bool,
        /// Accept a sketch that is not closed.
        #[arg(long)]
        allow_unclosed: bool,
        #[arg(long, default_value_t = 1)]
        jobs: usize,
    },
    /// Move an instance or delta back along a schema map (pull), or a
    /// sketch forward (push).
    Migrate {
        map: PathBuf,
        payload: PathBuf,
        #[arg(long, value_enum)]
        direction: Direction,
    },
    /// Translate the declarations of a sketch along a schema map.
    Translate { map: PathBuf, sketch: PathBuf },
    /// Run the satisfaction-condition harness on seeded random triples.
    Satax {
        #[arg(long, default_value_t = 1000)]
        trials: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 5)]
        max_nodes: usize,
        #[arg(long, default_value_t = 6)]
        max_arrows: usize,
        /// Inject a translation fault (harness self-test).
        #[arg(long, hide = true)]
        fault: bool,
    },
    /// Search for a proof of a goal, or list what a theory derives.
    Infer {
        theory: PathBuf,
        goal: Option<PathBuf>,
        #[arg(long, default_value_t = 4)]
        depth: usize,
        /// Largest object (nodes plus arrows) considered.
        #[arg(long, default_value_t = 8)]
        size: usize,
        #[arg(long, default_value_t = 48)]
        max_formulas: usize,
    },
    /// Canonical form of a graph, instance or slice morphism.
    Canon { file: PathBuf },
    /// Close a sketch under its signature's dependencies.
    Close { sketch: PathBuf },
    /// Check dependency soundness by exhaustive enumeration. Without a file
    /// the builtin signature is checked.
    DepsCheck {
        file: Option<PathBuf>,
        #[arg(long, default_value_t = 2)]
        per_sort: usize,
        #[arg(long, default_value_t = 1)]
        parallel: usize,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Direction {
    Pull,
    Push,
}

/// Output and exit code of a command.
struct Outcome {
    value: Value,
    code: u8,
}

impl Outcome {
    fn ok(value: Value) -> Self {
        Outcome { value, code: 0 }
    }
}

fn load(ws: &mut Workspace, path: &Path) -> dcl_core::Result<Object> {
    ws.load_file(path)
}

fn run(command: Command) -> dcl_core::Result<Outcome> {
    let mut ws = Workspace::new();
    match command {
        Command::Check { sketch, instance, close, allow_unclosed, jobs } => {
            let mut s = load(&mut ws, &sketch)?.into_sketch()?;
            if close {
                s = s.close();
            }
            let t = load(&mut ws, &instance)?.into_instance()?;
            let report = validate_instance(&s, &t, ValidateOptions { allow_unclosed, jobs: jobs.max(1) })?;
            let mut value = report_json(&report);
            let m = value.as_object_mut().expect("report object");
            m.insert("sketch".into(), json!(sketch.display().to_string()));
            m.insert("instance".into(), json!(instance.display().to_string()));
            Ok(Outcome { value, code: report.overall.exit_code() as u8 })
        }
        Command::Migrate { map, payload, direction } => {
            let f = load(&mut ws, &map)?.into_morphism()?;
            let value = match (direction, load(&mut ws, &payload)?) {
                (Direction::Pull, Object::Instance(t)) => instance_json(&migrate_instance(&f, &t)?),
                (Direction::Pull, Object::Delta(d)) => delta_json(&pullback_delta(&f, &d)?),
                (Direction::Push, Object::Sketch(s)) => sketch_json(&s.translate(&f)?),
                (Direction::Pull, o) => return Err(unexpected(&payload, "an instance or delta", &o)),
                (Direction::Push, o) => return Err(unexpected(&payload, "a sketch", &o)),
            };
            Ok(Outcome::ok(value))
        }
        Command::Translate { map, sketch } => {
            let f = load(&mut ws, &map)?.into_morphism()?;
            let s = load(&mut ws, &sketch)?.into_sketch()?.translate(&f)?;
            let decls: Vec<Value> = s.declarations().map(declaration_json).collect();
            Ok(Outcome::ok(json!({"kind": "translation", "morphism": morphism_json(&f), "declarations": decls})))
        }
        Command::Satax { trials, seed, max_nodes, max_arrows, fault } => {
            let options = SataxOptions {
                trials,
                seed,
                max_nodes,
                max_arrows,
                fault: fault.then_some(Fault::LeastBinding),
            };
            let summary = run_satax(&Signature::builtin(), &options)?;
            let failures: Vec<Value> = summary
                .failures
                .iter()
                .map(|f| {
                    json!({
                        "index": f.index,
                        "morphism": morphism_json(&f.triple.morphism),
                        "declaration": declaration_json(&f.triple.declaration),
                        "instance": instance_json(&f.triple.instance),
                        "reduct": verdict_json(&f.check.reduct),
                        "translated": verdict_json(&f.check.translated),
                    })
                })
                .collect();
            let value = json!({
                "kind": "satax",
                "seed": seed,
                "trials": summary.trials,
                "passed": summary.passed,
                "failed": summary.trials - summary.passed,
                "failures": failures,
            });
            Ok(Outcome { value, code: if summary.all_passed() { 0 } else { 1 } })
        }
        Command::Infer { theory, goal, depth, size, max_formulas } => {
            let th = load(&mut ws, &theory)?.into_theory()?;
            let caps = SearchCaps { depth, max_object_size: size, max_formulas, ..SearchCaps::default() };
            match goal {
                Some(goal) => {
                    let g = load(&mut ws, &goal)?.into_slice_morphism()?;
                    match bounded_entailment(&th, &g, caps)? {
                        Entailment::Derivable(d) => {
                            d.verify(&th)?;
                            Ok(Outcome::ok(json!({
                                "status": "derivable",
                                "script": d.script(),
                                "proof": derivation_json(&d),
                            })))
                        }
                        Entailment::Unknown(why) => {
                            Ok(Outcome { value: json!({"status": "unknown", "reason": why}), code: 2 })
                        }
                    }
                }
                None => {
                    let inference = infer(&th, caps)?;
                    let mut derived = Vec::new();
                    for d in &inference.derived {
                        d.derivation.verify(&th)?;
                        derived.push(json!({
                            "depth": d.depth,
                            "script": d.derivation.script(),
                            "conclusion": slice_morphism_json(&d.derivation.conclusion),
                        }));
                    }
                    Ok(Outcome::ok(json!({"derived": derived, "truncated": inference.truncated})))
                }
            }
        }
        Command::Canon { file } => {
            let value = match load(&mut ws, &file)? {
                Object::Graph(g) => graph_json(&canonicalize(&g)?.graph),
                Object::Instance(t) => instance_json(&canonicalize_instance(&t)?.instance),
                Object::SliceMorphism(f) => json!({"kind": "formula_key", "key": formula_key(&f)?}),
                o => return Err(unexpected(&file, "a graph, instance or slice morphism", &o)),
            };
            Ok(Outcome::ok(value))
        }
        Command::Close { sketch } => {
            let s = load(&mut ws, &sketch)?.into_sketch()?;
            Ok(Outcome::ok(sketch_json(&s.close())))
        }
        Command::DepsCheck { file, per_sort, parallel } => {
            let sig = match file {
                None => Signature::builtin(),
                Some(path) => match load(&mut ws, &path)? {
                    Object::Signature(s) => (*s).clone(),
                    Object::Sketch(s) => (**s.signature()).clone(),
                    o => return Err(unexpected(&path, "a signature or sketch", &o)),
                },
            };
            let reports = sig.verify_dependency_soundness(Bounds { per_sort, parallel })?;
            let sound = reports.iter().all(|r| r.is_sound());
            let value = json!({"sound": sound, "dependencies": reports.iter().map(soundness_json).collect::<Vec<_>>()});
            Ok(Outcome { value, code: if sound { 0 } else { 1 } })
        }
    }
}

fn unexpected(path: &Path, expected: &str, found: &Object) -> DclError {
    DclError::Parse(format!("{}: expected {expected}, found a {}", path.display(), found.kind()))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(out) => {
            print!("{}", to_pretty(&out.value));
            ExitCode::from(out.code)
        }
        Err(e) => {
            eprintln!("error: {e}");
            let code = match e {
                DclError::SizeGuard(_) | DclError::SearchExhausted(_) => Status::Unknown.exit_code(),
                _ => 3,
            };
            ExitCode::from(code as u8)
        }
    }
}
