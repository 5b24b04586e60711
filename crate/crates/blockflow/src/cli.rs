//! The `blockflow` command line. Each subcommand is a thin wrapper over the
//! library.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use blockflow_runtime::standalone::{self, RunArgs};
use blockflow_runtime::{ErrorCategory, ParameterOverride, PluginRegistry};
use clap::{Parser, Subcommand};

use crate::codegen::{generate, CodegenOptions};
use crate::compile::{compile_file, exit_code, Compiled, Diagnostic};

#[derive(Debug, Parser)]
#[command(name = "blockflow", version, about = "Validate, simulate and generate code for block-diagram controllers")]
pub struct Cli {
    /// Directory searched for plugin libraries before BLOCKFLOW_PLUGIN_PATH (repeatable)
    #[arg(long = "plugin-path", value_name = "DIR", global = true)]
    pub plugin_path: Vec<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Check a model and report every problem found
    Validate {
        /// Model file
        graph: PathBuf,
        /// Print diagnostics as JSON on standard output
        #[arg(long)]
        json: bool,
    },
    /// Print the execution order and buffer plan as JSON
    Schedule {
        /// Model file
        graph: PathBuf,
    },
    /// Simulate a model and print the run report as JSON
    Run {
        /// Model file
        graph: PathBuf,
        #[command(flatten)]
        run: RunArgs,
        /// Override a block parameter, e.g. pid.Kp=12.5 (repeatable)
        #[arg(long = "set", value_name = "BLOCK.PARAM=VALUE")]
        set: Vec<ParameterOverride>,
    },
    /// Generate a standalone program for a model
    Codegen {
        /// Model file
        graph: PathBuf,
        /// Output directory of the generated cargo project
        #[arg(long, value_name = "DIR")]
        out: PathBuf,
        /// Package name [default: the graph file name]
        #[arg(long)]
        name: Option<String>,
    },
    /// List the blocks a plugin library provides
    Blocks {
        /// Library basename, e.g. stdblocks
        #[arg(long)]
        library: String,
    },
}

fn report(diagnostics: &[Diagnostic]) -> ExitCode {
    for d in diagnostics {
        eprintln!("{d}");
    }
    ExitCode::from(exit_code(diagnostics))
}

fn fail(category: ErrorCategory, message: impl std::fmt::Display) -> ExitCode {
    eprintln!("error: {message}");
    ExitCode::from(category.exit_code())
}

fn compiled(graph: &Path, registry: &PluginRegistry) -> Result<Compiled, ExitCode> {
    compile_file(graph, registry).map_err(|d| report(&d))
}

pub fn execute(cli: Cli) -> ExitCode {
    let registry = PluginRegistry::from_env(&cli.plugin_path);
    match cli.command {
        Command::Validate { graph, json } => {
            let diagnostics = crate::compile::validate_file(&graph, &registry);
            if json {
                let doc = serde_json::json!({
                    "ok": diagnostics.is_empty(),
                    "exit_code": exit_code(&diagnostics),
                    "diagnostics": diagnostics,
                });
                println!("{}", serde_json::to_string_pretty(&doc).expect("diagnostics serialize"));
                ExitCode::from(exit_code(&diagnostics))
            } else if diagnostics.is_empty() {
                println!("ok: {}", graph.display());
                ExitCode::SUCCESS
            } else {
                report(&diagnostics)
            }
        }
        Command::Schedule { graph } => match compiled(&graph, &registry) {
            Ok(c) => {
                print!("{}", c.schedule.to_json());
                ExitCode::SUCCESS
            }
            Err(code) => code,
        },
        Command::Run { graph, run, set } => {
            let c = match compiled(&graph, &registry) {
                Ok(c) => c,
                Err(code) => return code,
            };
            let config = run.to_config(set.clone());
            let result = c.build_engine(&registry, &set).and_then(|mut engine| engine.run(&config));
            standalone::finish(result)
        }
        Command::Codegen { graph, out, name } => {
            let c = match compiled(&graph, &registry) {
                Ok(c) => c,
                Err(code) => return code,
            };
            let package = name.unwrap_or_else(|| {
                graph
                    .file_stem()
                    .map(|s| s.to_string_lossy().into_owned())
                    .unwrap_or_else(|| "controller".into())
            });
            match generate(&c, &registry, &out, &CodegenOptions::for_package(&package)) {
                Ok(bundle) => {
                    println!("{}", bundle.manifest.display());
                    ExitCode::SUCCESS
                }
                Err(e) => fail(e.category(), e),
            }
        }
        Command::Blocks { library } => match registry.load(&library) {
            Ok(plugin) => {
                println!("{} (ABI {})", plugin.name, plugin.manifest.abi_version);
                println!("path: {}", plugin.path.display());
                println!("sha256: {}", plugin.sha256);
                for label in &plugin.manifest.labels {
                    println!("  {label}");
                }
                ExitCode::SUCCESS
            }
            Err(e) => fail(ErrorCategory::Plugin, e),
        },
    }
}
