//! Command-line front end.

use crate::abstraction::{Abstraction, Region, RegionId};
use crate::engine::{explore, explore_incremental, EngineOptions, Exploration, SymbolicLibrary};
use crate::igraph::{gen_tests, graph_from_json, graph_to_dot, graph_to_json, simulate_client, InterfaceGraph};
use crate::model::{parse_library, FunctionId, LibraryModule};
use crate::oracle::{check_interface, execute, DEFAULT_STATE_CAP};
use crate::symstate::ValuationSet;
use crate::Error;
use clap::{Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

#[derive(Debug, Parser)]
#[command(name = "ifsynth", version, about = "Synthesise call-sequence interfaces for guarded-update libraries")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Dot,
    Json,
}

#[derive(Debug, clap::Args)]
pub struct ModelArgs {
    /// Library source file.
    pub model: PathBuf,
    /// Comma-separated functions to include, in order (default: all).
    #[arg(long)]
    pub functions: Option<String>,
    /// Refine with one block per rule instead of grouping rules.
    #[arg(long)]
    pub no_rule_partition: bool,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Build the interface graph.
    Build {
        #[command(flatten)]
        model: ModelArgs,
        /// Write the graph here instead of standard output.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum, default_value = "dot")]
        format: Format,
        /// Reuse and update the abstraction stored in this file.
        #[arg(long)]
        incremental: Option<PathBuf>,
    },
    /// Check a call sequence (one function name per line) against the graph.
    CheckClient {
        #[command(flatten)]
        model: ModelArgs,
        sequence: PathBuf,
    },
    /// Generate legal and illegal call sequences.
    GenTests {
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long, default_value_t = 3)]
        depth: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Compare the graph with explicit execution of every call sequence.
    Verify {
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long, default_value_t = 6)]
        depth: usize,
        #[arg(long, default_value_t = DEFAULT_STATE_CAP)]
        state_cap: usize,
        /// Check this JSON graph instead of building one.
        #[arg(long)]
        graph: Option<PathBuf>,
    },
    /// Run one function concretely and print its return states.
    Simulate {
        model: PathBuf,
        function: String,
        /// Initial values as `name=value`; unset variables start at their lowest value.
        #[arg(long = "set")]
        assignments: Vec<String>,
        #[arg(long, default_value_t = DEFAULT_STATE_CAP)]
        state_cap: usize,
    },
}

fn read(path: &Path) -> Result<String, Error> {
    std::fs::read_to_string(path).map_err(|source| Error::Io { path: path.display().to_string(), source })
}

fn write(path: &Path, text: &str) -> Result<(), Error> {
    std::fs::write(path, text).map_err(|source| Error::Io { path: path.display().to_string(), source })
}

pub fn load_library(path: &Path) -> Result<LibraryModule, Error> {
    Ok(parse_library(&read(path)?)?)
}

/// Functions named in `list` (comma separated, empty means none), or all
/// of them in declaration order.
pub fn select_functions(lib: &LibraryModule, list: Option<&str>) -> Result<Vec<FunctionId>, Error> {
    match list {
        None => Ok(lib.function_ids().collect()),
        Some(s) => s
            .split(',')
            .map(str::trim)
            .filter(|n| !n.is_empty())
            .map(|n| lib.function_id(n).ok_or_else(|| Error::Usage(format!("unknown function `{n}`"))))
            .collect(),
    }
}

fn options(m: &ModelArgs) -> EngineOptions {
    EngineOptions { rule_partition: !m.no_rule_partition }
}

fn names(sym: &SymbolicLibrary, fs: &[FunctionId]) -> Vec<String> {
    fs.iter().map(|f| sym.function(*f).name.clone()).collect()
}

/// Stored abstraction for incremental runs.
#[derive(Debug, Serialize, Deserialize)]
struct SavedState {
    model: String,
    globals: Vec<String>,
    functions: Vec<String>,
    next_id: u32,
    regions: Vec<SavedRegion>,
}

#[derive(Debug, Serialize, Deserialize)]
struct SavedRegion {
    id: u32,
    parent: Option<u32>,
    cubes: Vec<Vec<(String, Vec<i64>)>>,
}

fn save_state(sym: &SymbolicLibrary, run: &Exploration) -> String {
    let state = SavedState {
        model: sym.lib.name.clone(),
        globals: sym.lib.globals.iter().map(|v| sym.lib.var(*v).name.clone()).collect(),
        functions: names(sym, &run.functions),
        next_id: run.abstraction.next_id(),
        regions: run
            .abstraction
            .regions()
            .iter()
            .map(|r| SavedRegion { id: r.id.0, parent: r.parent.map(|p| p.0), cubes: r.extent.to_cubes() })
            .collect(),
    };
    let mut s = serde_json::to_string_pretty(&state).expect("state serialises");
    s.push('\n');
    s
}

fn load_state(sym: &SymbolicLibrary, text: &str) -> Result<(Abstraction, Vec<FunctionId>), Error> {
    let bad = |m: String| Error::Usage(format!("incremental state: {m}"));
    let state: SavedState = serde_json::from_str(text).map_err(|e| bad(e.to_string()))?;
    let globals: Vec<String> = sym.lib.globals.iter().map(|v| sym.lib.var(*v).name.clone()).collect();
    if state.model != sym.lib.name || state.globals != globals {
        return Err(bad(format!("saved for module `{}`, not `{}`", state.model, sym.lib.name)));
    }
    let mut regions = Vec::new();
    let mut cover = sym.globals.empty();
    for r in state.regions {
        let extent = ValuationSet::from_cubes(&sym.globals, &r.cubes).ok_or_else(|| bad("unknown variable".into()))?;
        if extent.is_empty() || cover.intersects(&extent) {
            return Err(bad(format!("region r{} is empty or overlaps another", r.id)));
        }
        cover = cover.union(&extent);
        regions.push(Region { id: RegionId(r.id), parent: r.parent.map(RegionId), extent });
    }
    if !cover.is_full() {
        return Err(bad("regions do not cover the global space".into()));
    }
    let functions = sym.resolve(&state.functions).map_err(bad)?;
    Ok((Abstraction::from_regions(&sym.globals, regions, state.next_id), functions))
}

fn build_graph(sym: &SymbolicLibrary, m: &ModelArgs, incremental: Option<&Path>) -> Result<Exploration, Error> {
    let functions = select_functions(&sym.lib, m.functions.as_deref())?;
    let opts = options(m);
    let run = match incremental {
        Some(path) if path.exists() => {
            let (abstraction, done) = load_state(sym, &read(path)?)?;
            let new: Vec<FunctionId> = functions.iter().copied().filter(|f| !done.contains(f)).collect();
            let graph = crate::igraph::build_interface(sym, &abstraction, &done)?;
            let prev = Exploration { abstraction, graph, functions: done, trace: Vec::new() };
            explore_incremental(sym, &prev, &new, opts)?
        }
        _ => explore(sym, &functions, None, opts)?,
    };
    if let Some(path) = incremental {
        write(path, &save_state(sym, &run))?;
    }
    Ok(run)
}

fn emit(out: Option<&Path>, text: &str) -> Result<(), Error> {
    match out {
        Some(p) => write(p, text),
        None => {
            std::io::stdout().write_all(text.as_bytes()).map_err(|source| Error::Io { path: "<stdout>".into(), source })
        }
    }
}

/// One-line description of a run.
pub fn summary(sym: &SymbolicLibrary, run: &Exploration, millis: u128) -> String {
    let error_regions = run.abstraction.abs_under(&sym.error).len();
    format!(
        "regions={} non_error_regions={} nodes={} non_error_nodes={} time_ms={millis}",
        run.abstraction.len(),
        run.abstraction.len() - error_regions,
        run.graph.nodes.len(),
        run.graph.non_error_nodes(),
    )
}

fn parse_assignment(lib: &LibraryModule, f: FunctionId, s: &str) -> Result<(usize, i64), Error> {
    let (name, value) = s.split_once('=').ok_or_else(|| Error::Usage(format!("expected name=value, got `{s}`")))?;
    let value: i64 = value.trim().parse().map_err(|_| Error::Usage(format!("`{value}` is not an integer")))?;
    let scoped = lib.scoped_vars(f);
    let pos = scoped
        .iter()
        .position(|v| lib.var(*v).name == name.trim() || lib.var(*v).qualified_name() == name.trim())
        .ok_or_else(|| Error::Usage(format!("`{name}` is not visible in `{}`", lib.function(f).name)))?;
    if !lib.var(scoped[pos]).in_domain(value) {
        return Err(Error::Usage(format!("{value} is outside the domain of `{name}`")));
    }
    Ok((pos, value))
}

pub fn run(cli: Cli) -> Result<(), Error> {
    match cli.command {
        Command::Build { model, out, format, incremental } => {
            let sym = SymbolicLibrary::new(load_library(&model.model)?);
            let start = Instant::now();
            let run = build_graph(&sym, &model, incremental.as_deref())?;
            let millis = start.elapsed().as_millis();
            let text = match format {
                Format::Dot => graph_to_dot(&run.graph),
                Format::Json => graph_to_json(&run.graph),
            };
            emit(out.as_deref(), &text)?;
            eprintln!("{}", summary(&sym, &run, millis));
            Ok(())
        }
        Command::CheckClient { model, sequence } => {
            let sym = SymbolicLibrary::new(load_library(&model.model)?);
            let run = build_graph(&sym, &model, None)?;
            let seq: Vec<String> =
                read(&sequence)?.lines().map(str::trim).filter(|l| !l.is_empty()).map(String::from).collect();
            let verdict = simulate_client(&run.graph, &seq, &names(&sym, &run.functions))
                .map_err(|e| Error::Usage(e.to_string()))?;
            println!("{verdict}");
            Ok(())
        }
        Command::GenTests { model, depth, out } => {
            if depth == 0 {
                return Err(Error::Usage("depth must be at least 1".into()));
            }
            let sym = SymbolicLibrary::new(load_library(&model.model)?);
            let run = build_graph(&sym, &model, None)?;
            let mut text = String::new();
            for t in gen_tests(&run.graph, &names(&sym, &run.functions), depth) {
                text.push_str(&t.to_string());
                text.push('\n');
            }
            emit(out.as_deref(), &text)
        }
        Command::Verify { model, depth, state_cap, graph } => {
            let sym = SymbolicLibrary::new(load_library(&model.model)?);
            let (g, functions): (InterfaceGraph, Vec<FunctionId>) = match graph {
                Some(path) => {
                    let g =
                        graph_from_json(&read(&path)?).map_err(|e| Error::Usage(format!("{}: {e}", path.display())))?;
                    (g, select_functions(&sym.lib, model.functions.as_deref())?)
                }
                None => {
                    let run = build_graph(&sym, &model, None)?;
                    (run.graph, run.functions)
                }
            };
            let report = check_interface(&sym.lib, &g, &functions, depth, state_cap)?;
            println!("{}", serde_json::to_string_pretty(&report).expect("report serialises"));
            if report.is_clean() {
                Ok(())
            } else {
                Err(Error::CheckFailed(format!(
                    "{} safety and {} permissiveness violations",
                    report.safe_violations.len(),
                    report.permissive_violations.len()
                )))
            }
        }
        Command::Simulate { model, function, assignments, state_cap } => {
            let lib = load_library(&model)?;
            let f = lib.function_id(&function).ok_or_else(|| Error::Usage(format!("unknown function `{function}`")))?;
            let scoped = lib.scoped_vars(f);
            let mut entry: Vec<i64> = scoped.iter().map(|v| lib.var(*v).lo).collect();
            for a in &assignments {
                let (pos, value) = parse_assignment(&lib, f, a)?;
                entry[pos] = value;
            }
            for state in execute(&lib, f, entry, state_cap)? {
                let parts: Vec<String> =
                    scoped.iter().zip(&state).map(|(v, x)| format!("{}={x}", lib.var(*v).qualified_name())).collect();
                println!("{}", parts.join(" "));
            }
            Ok(())
        }
    }
}
