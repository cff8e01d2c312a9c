//! The `reformine` command line.

use std::fmt::Display;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde_json::json;

use crate::features::{featurize, pairwise_csv, to_csv};
use crate::graph_ir::{to_graph, Format};
use crate::instances::{sample_instances, GeneratorConfig};
use crate::mcts::{explore, ExploreConfig};
use crate::rewrite::{apply, canonical_hash, enumerate_all, normalize, select_rules};
use crate::solve::{flatten, solve, Mode};
use crate::spec_lang::{ground, parse, parse_unchecked, pretty, GroundError, Instance, SpecAst, SpecError, Statement};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CommandOutcome {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

impl CommandOutcome {
    fn ok(stdout: String) -> CommandOutcome {
        CommandOutcome { code: 0, stdout, stderr: String::new() }
    }
}

#[derive(Parser)]
#[command(name = "reformine", version, about = "Explore reformulations of Emini specifications")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Print a specification in canonical layout.
    Fmt {
        spec: PathBuf,
        /// Dump the annotated tree instead.
        #[arg(long)]
        annotate: bool,
    },
    /// Encode the specification tree as a graph.
    Graph {
        spec: PathBuf,
        #[arg(long, default_value = "gp2")]
        format: Format,
    },
    /// List or apply rewrite rule matches.
    Rewrite(RewriteArgs),
    /// Solve a specification on one instance.
    Solve {
        spec: PathBuf,
        #[arg(long)]
        instance: Option<PathBuf>,
        #[arg(long, conflicts_with = "optimize")]
        all: bool,
        #[arg(long)]
        optimize: bool,
        #[arg(long, default_value_t = 1_000_000)]
        budget: u64,
        /// Include wall-clock milliseconds in the result.
        #[arg(long)]
        timing: bool,
    },
    /// Sample instances of the given parameters.
    Gen {
        spec: PathBuf,
        #[arg(long)]
        count: usize,
        #[arg(long)]
        seed: u64,
        #[arg(long, default_value_t = 0.5)]
        density: f64,
        #[arg(long, default_value_t = 50)]
        cap: i64,
        /// Write one `.param` file per instance here instead of printing.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        json: bool,
    },
    /// Search for reformulations that reduce solver effort.
    Explore(ExploreArgs),
    /// Structural feature vectors as CSV.
    Features {
        #[arg(required = true)]
        specs: Vec<PathBuf>,
        /// Emit the distance matrix instead.
        #[arg(long)]
        pairwise: bool,
    },
}

#[derive(Args)]
struct RewriteArgs {
    spec: PathBuf,
    /// Comma-separated rule names; all rules when omitted.
    #[arg(long, alias = "rules", default_value = "")]
    rule: String,
    #[arg(long, group = "action")]
    list: bool,
    #[arg(long, group = "action")]
    index: Option<usize>,
    #[arg(long, group = "action")]
    normalize: bool,
    /// With --index, print the trace record instead of the result.
    #[arg(long)]
    trace: bool,
}

#[derive(Args)]
struct ExploreArgs {
    spec: PathBuf,
    #[arg(long)]
    instances: Option<PathBuf>,
    #[arg(long)]
    iters: usize,
    #[arg(long)]
    seed: u64,
    #[arg(long, default_value_t = 100_000)]
    budget: u64,
    #[arg(long, default_value_t = std::f64::consts::SQRT_2)]
    c: f64,
    #[arg(long, default_value_t = 8)]
    depth: usize,
    #[arg(long, default_value_t = 1)]
    jobs: usize,
    #[arg(long, default_value = "")]
    rules: String,
    /// Write the explored tree in DOT form to this file.
    #[arg(long)]
    dot: Option<PathBuf>,
    #[arg(long)]
    timing: bool,
}

struct Failure(String);

fn fail(file: &Path, line: Option<usize>, col: Option<usize>, cause: impl Display) -> Failure {
    let mut at = file.display().to_string();
    if let Some(l) = line {
        at.push_str(&format!(":{l}"));
        if let Some(c) = col {
            at.push_str(&format!(":{c}"));
        }
    }
    Failure(format!("{at}: {cause}"))
}

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| fail(path, None, None, e))
}

fn spec_failure(path: &Path, e: &SpecError) -> Failure {
    match e {
        SpecError::Syntax { line, col, msg } => fail(path, Some(*line), Some(*col), msg),
        other => fail(path, other.line(), None, other),
    }
}

fn load_spec(path: &Path) -> Result<SpecAst, Failure> {
    let text = read(path)?;
    parse(&text).map_err(|e| spec_failure(path, &e))
}

fn load_instance(path: &Path) -> Result<Instance, Failure> {
    let text = read(path)?;
    Instance::from_text(&text).map_err(|e| spec_failure(path, &e))
}

/// Line of the statement a grounding error is about, when it can be found.
fn ground_line(spec_path: &Path, err: &GroundError) -> Option<usize> {
    let text = fs::read_to_string(spec_path).ok()?;
    let (ast, lines) = parse_unchecked(&text).ok()?;
    let i = ast.statements.iter().position(|s| match (s, err) {
        (Statement::Where(e), GroundError::WhereViolated { clause }) => e.to_string() == *clause,
        (Statement::Given { names, .. }, GroundError::OutOfDomain { name, .. } | GroundError::Unbound(name)) => {
            names.contains(name)
        }
        (Statement::Find { name: n, .. }, GroundError::InvalidDomain { name, .. }) => n == name,
        _ => false,
    })?;
    lines.get(i).copied()
}

fn instance_files(dir: &Path) -> Result<Vec<PathBuf>, Failure> {
    let mut files: Vec<PathBuf> = fs::read_dir(dir)
        .map_err(|e| fail(dir, None, None, e))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "param" || x == "json"))
        .collect();
    files.sort();
    Ok(files)
}

fn dispatch(cmd: Cmd) -> Result<String, Failure> {
    match cmd {
        Cmd::Fmt { spec, annotate } => Ok(pretty(&load_spec(&spec)?, annotate)),
        Cmd::Graph { spec, format } => {
            let g = to_graph(&load_spec(&spec)?);
            Ok(g.export(format))
        }
        Cmd::Rewrite(a) => rewrite(a),
        Cmd::Solve { spec, instance, all, optimize, budget, timing } => {
            let ast = load_spec(&spec)?;
            let inst = match &instance {
                Some(p) => load_instance(p)?,
                None => Instance::new(),
            };
            let g = ground(&ast, &inst).map_err(|e| fail(&spec, ground_line(&spec, &e), None, e))?;
            let csp = flatten(&g).map_err(|e| fail(&spec, None, None, e))?;
            let mode = if all {
                Mode::All
            } else if optimize {
                Mode::Optimize
            } else {
                Mode::First
            };
            if budget == 0 {
                return Err(fail(&spec, None, None, "budget must be at least 1"));
            }
            let r = solve(&csp, budget, mode);
            Ok(format!("{}\n", r.to_json(timing)))
        }
        Cmd::Gen { spec, count, seed, density, cap, out, json } => {
            let ast = load_spec(&spec)?;
            let cfg = GeneratorConfig { count, seed, density, cap, ..Default::default() };
            let insts = sample_instances(&ast, &cfg).map_err(|e| fail(&spec, None, None, e))?;
            let ext = if json { "json" } else { "param" };
            let text = |i: &Instance| if json { format!("{}\n", i.to_json()) } else { i.to_param() };
            match out {
                Some(dir) => {
                    fs::create_dir_all(&dir).map_err(|e| fail(&dir, None, None, e))?;
                    let mut listing = String::new();
                    for (k, inst) in insts.iter().enumerate() {
                        let p = dir.join(format!("inst-{k:03}.{ext}"));
                        fs::write(&p, text(inst)).map_err(|e| fail(&p, None, None, e))?;
                        listing.push_str(&format!("{}\n", p.display()));
                    }
                    Ok(listing)
                }
                None if json => Ok(insts.iter().map(text).collect()),
                None => Ok(insts.iter().enumerate().map(|(k, i)| format!("$ instance {k}\n{}", text(i))).collect()),
            }
        }
        Cmd::Explore(a) => explore_cmd(a),
        Cmd::Features { specs, pairwise } => {
            let mut labels = Vec::new();
            let mut vectors = Vec::new();
            for p in &specs {
                vectors.push(featurize(&load_spec(p)?));
                labels.push(p.display().to_string());
            }
            Ok(if pairwise { pairwise_csv(&labels, &vectors) } else { to_csv(&labels, &vectors) })
        }
    }
}

fn rewrite(a: RewriteArgs) -> Result<String, Failure> {
    let ast = load_spec(&a.spec)?;
    let rules = select_rules(&a.rule).map_err(|e| fail(&a.spec, None, None, e))?;
    if a.normalize {
        return Ok(pretty(&normalize(&ast), false));
    }
    let matches = enumerate_all(&rules, &ast);
    match a.index {
        None => {
            let list: Vec<_> = matches.iter().map(|(_, m)| m.to_json()).collect();
            Ok(format!("{}\n", serde_json::to_string_pretty(&list).expect("matches serialize")))
        }
        Some(i) => {
            let (ri, m) = matches.get(i).ok_or_else(|| {
                fail(&a.spec, None, None, format!("match index {i} out of range (found {})", matches.len()))
            })?;
            let out = apply(rules[*ri], &ast, m).map_err(|e| fail(&a.spec, None, None, e))?;
            if a.trace {
                let rec = json!({
                    "rule": m.rule,
                    "path": m.path,
                    "before_hash": format!("{:016x}", canonical_hash(&ast)),
                    "after_hash": format!("{:016x}", canonical_hash(&out)),
                });
                Ok(format!("{rec}\n"))
            } else {
                Ok(pretty(&out, false))
            }
        }
    }
}

fn explore_cmd(a: ExploreArgs) -> Result<String, Failure> {
    let ast = load_spec(&a.spec)?;
    let mut instances = Vec::new();
    if let Some(dir) = &a.instances {
        for p in instance_files(dir)? {
            instances.push(load_instance(&p)?);
        }
    }
    let rules = select_rules(&a.rules).map_err(|e| fail(&a.spec, None, None, e))?;
    let cfg = ExploreConfig {
        iterations: a.iters,
        c: a.c,
        budget: a.budget,
        max_depth: a.depth,
        seed: a.seed,
        instances,
        rules,
        jobs: a.jobs.max(1),
    };
    let ex = explore(&ast, cfg).map_err(|e| fail(&a.spec, None, None, e))?;
    if let Some(p) = &a.dot {
        fs::write(p, ex.to_dot()).map_err(|e| fail(p, None, None, e))?;
    }
    Ok(format!("{}\n", serde_json::to_string_pretty(&ex.report(a.timing)).expect("report serializes")))
}

/// Whether diagnostics should be coloured, from `REFORMINE_COLOR`
/// (`auto`, `always` or `never`). `auto` defers to `terminal`.
pub fn color_enabled(terminal: bool) -> bool {
    match std::env::var("REFORMINE_COLOR").as_deref() {
        Ok("always") => true,
        Ok("never") => false,
        _ => terminal,
    }
}

pub fn run(argv: &[String]) -> CommandOutcome {
    run_with_color(argv, color_enabled(false))
}

pub fn run_with_color(argv: &[String], color: bool) -> CommandOutcome {
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let text = e.render().to_string();
            return if e.use_stderr() {
                CommandOutcome { code: 2, stdout: String::new(), stderr: text }
            } else {
                CommandOutcome::ok(text)
            };
        }
    };
    match dispatch(cli.cmd) {
        Ok(out) => CommandOutcome::ok(out),
        Err(Failure(msg)) => {
            let tag = if color { "\x1b[1;31merror\x1b[0m" } else { "error" };
            CommandOutcome { code: 1, stdout: String::new(), stderr: format!("{tag}: {msg}\n") }
        }
    }
}
