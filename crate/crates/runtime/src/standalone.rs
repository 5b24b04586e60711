//! Support for generated controller programs and the shared run flags.
//!
//! A generated bundle is a table of blocks in execution order plus the links
//! between them. Everything else (parameters, step size, plugin locations)
//! is read at startup, so the bundle never needs the graph loader.

use std::collections::BTreeMap;
use std::fmt::{self, Write as _};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::Arc;

use blockflow_core::ffi::ABI_VERSION;
use clap::{Args, Parser};
use serde::de::{self, Deserializer, MapAccess, Visitor};
use serde::ser::{SerializeMap, Serializer};
use serde::{Deserialize, Serialize};

use crate::engine::{
    Engine, EngineError, EnginePlan, ErrorCategory, LogTarget, Pacing, ParameterOverride, PlannedBlock, RunConfig,
};
use crate::json::ParamObject;
use crate::plugin::{BlockFactory, PluginError, PluginRegistry};
use crate::wiring::{Link, PortAddr};

/// Run flags shared by `blockflow run` and generated programs.
#[derive(Debug, Clone, Default, Args)]
pub struct RunArgs {
    /// Number of steps to execute; omit to run until interrupted
    #[arg(long)]
    pub steps: Option<u64>,
    /// Loop pacing
    #[arg(long, value_enum, default_value_t = Pacing::Free)]
    pub pace: Pacing,
    /// Log an output port to CSV, e.g. plant.0=theta.csv (repeatable)
    #[arg(long = "log", value_name = "BLOCK.PORT=PATH")]
    pub log: Vec<LogTarget>,
}

impl RunArgs {
    /// Builds the run configuration. Unbounded runs stop on Ctrl-C.
    pub fn to_config(&self, parameter_overrides: Vec<ParameterOverride>) -> RunConfig {
        let stop = self.steps.is_none().then(interrupt_flag);
        RunConfig {
            steps: self.steps,
            pacing: self.pace,
            log_targets: self.log.clone(),
            parameter_overrides,
            stop,
        }
    }
}

fn interrupt_flag() -> Arc<AtomicBool> {
    let flag = Arc::new(AtomicBool::new(false));
    let handler_flag = flag.clone();
    if let Err(e) = ctrlc::set_handler(move || handler_flag.store(true, Ordering::Relaxed)) {
        eprintln!("warning: cannot install interrupt handler: {e}");
    }
    flag
}

/// Command line of a generated program.
#[derive(Debug, Parser)]
#[command(about = "Runs a generated blockflow controller")]
pub struct StandaloneCli {
    #[command(flatten)]
    pub run: RunArgs,
    /// Runtime configuration file [default: config.json in the bundle]
    #[arg(long, value_name = "FILE")]
    pub config: Option<PathBuf>,
    /// Directory searched for plugin libraries before BLOCKFLOW_PLUGIN_PATH (repeatable)
    #[arg(long = "plugin-path", value_name = "DIR")]
    pub plugin_path: Vec<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BlockEntry {
    pub name: &'static str,
    pub library: &'static str,
    pub label: &'static str,
}

/// `(block, port)` of a producer output and a consumer input.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LinkEntry {
    pub from: (usize, usize),
    pub to: (usize, usize),
}

/// The baked-in part of a generated program.
#[derive(Debug, Clone, Copy)]
pub struct Program {
    pub blocks: &'static [BlockEntry],
    pub links: &'static [LinkEntry],
}

impl Program {
    /// Labels each library must provide, in first-use order.
    pub fn required_labels(&self) -> Vec<(String, Vec<String>)> {
        let mut out: Vec<(String, Vec<String>)> = Vec::new();
        for b in self.blocks {
            let idx = match out.iter().position(|(l, _)| l == b.library) {
                Some(i) => i,
                None => {
                    out.push((b.library.to_owned(), Vec::new()));
                    out.len() - 1
                }
            };
            if !out[idx].1.iter().any(|l| l == b.label) {
                out[idx].1.push(b.label.to_owned());
            }
        }
        out
    }
}

/// Contents of a bundle's `config.json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RuntimeConfig {
    pub step_size: f64,
    #[serde(default)]
    pub configuration: ParamObject,
    pub blocks: BlockParams,
}

/// Per-block parameters keyed by instance name, in schedule order.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct BlockParams(pub Vec<(String, ParamObject)>);

impl<'de> Deserialize<'de> for BlockParams {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        struct V;

        impl<'de> Visitor<'de> for V {
            type Value = BlockParams;

            fn expecting(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str("an object mapping block names to parameter objects")
            }

            fn visit_map<A: MapAccess<'de>>(self, mut map: A) -> Result<BlockParams, A::Error> {
                let mut out: Vec<(String, ParamObject)> = Vec::new();
                while let Some(name) = map.next_key::<String>()? {
                    if out.iter().any(|(n, _)| *n == name) {
                        return Err(de::Error::custom(format!("duplicate block '{name}'")));
                    }
                    out.push((name, map.next_value()?));
                }
                Ok(BlockParams(out))
            }
        }

        deserializer.deserialize_map(V)
    }
}

impl Serialize for BlockParams {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let mut map = serializer.serialize_map(Some(self.0.len()))?;
        for (k, v) in &self.0 {
            map.serialize_entry(k, v)?;
        }
        map.end()
    }
}

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("cannot read '{}': {source}", .path.display())]
    Io { path: PathBuf, source: std::io::Error },
    #[error("'{}': {message}", .path.display())]
    Invalid { path: PathBuf, message: String },
}

impl ConfigError {
    pub fn category(&self) -> ErrorCategory {
        match self {
            ConfigError::Io { .. } => ErrorCategory::Io,
            ConfigError::Invalid { .. } => ErrorCategory::Model,
        }
    }
}

impl RuntimeConfig {
    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.to_owned(),
            source,
        })?;
        serde_json::from_str(&text).map_err(|e| ConfigError::Invalid {
            path: path.to_owned(),
            message: e.to_string(),
        })
    }

    pub fn to_json(&self) -> Result<String, String> {
        serde_json::to_string_pretty(self)
            .map(|mut s| {
                s.push('\n');
                s
            })
            .map_err(|e| e.to_string())
    }

    /// Combines the baked-in tables with these parameters. Every block must
    /// have an entry and no entry may name an unknown block.
    pub fn plan(&self, program: &Program) -> Result<EnginePlan, String> {
        let mut params: BTreeMap<&str, &ParamObject> = self.blocks.0.iter().map(|(n, p)| (n.as_str(), p)).collect();
        let mut blocks = Vec::with_capacity(program.blocks.len());
        for b in program.blocks {
            let p = params
                .remove(b.name)
                .ok_or_else(|| format!("no parameters for block '{}'", b.name))?;
            blocks.push(PlannedBlock {
                name: b.name.to_owned(),
                library: b.library.to_owned(),
                label: b.label.to_owned(),
                parameters: p.to_parameters(),
            });
        }
        if let Some(name) = params.keys().next() {
            return Err(format!("parameters given for unknown block '{name}'"));
        }
        Ok(EnginePlan {
            step_size: self.step_size,
            configuration: self.configuration.to_parameters(),
            blocks,
            links: program
                .links
                .iter()
                .map(|l| Link {
                    from: PortAddr::new(l.from.0, l.from.1),
                    to: PortAddr::new(l.to.0, l.to.1),
                })
                .collect(),
        })
    }
}

/// A bundle's `MANIFEST`: host ABI, plugin checksums seen at generation,
/// required labels and checksums of the emitted sources.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct BundleManifest {
    pub abi_version: u32,
    /// `(library, sha256)`
    pub plugins: Vec<(String, String)>,
    /// `(library, label)`
    pub labels: Vec<(String, String)>,
    /// `(relative path, sha256)`
    pub sources: Vec<(String, String)>,
}

const MANIFEST_MAGIC: &str = "blockflow-bundle 1";

impl BundleManifest {
    pub fn render(&self) -> String {
        let mut s = format!("{MANIFEST_MAGIC}\nabi {}\n", self.abi_version);
        for (lib, sha) in &self.plugins {
            let _ = writeln!(s, "plugin {lib} {sha}");
        }
        for (lib, label) in &self.labels {
            let _ = writeln!(s, "label {lib} {label}");
        }
        for (path, sha) in &self.sources {
            let _ = writeln!(s, "source {path} {sha}");
        }
        s
    }

    pub fn parse(text: &str) -> Result<Self, String> {
        let mut lines = text.lines().enumerate();
        match lines.next() {
            Some((_, MANIFEST_MAGIC)) => {}
            _ => return Err(format!("first line must be '{MANIFEST_MAGIC}'")),
        }
        let mut m = BundleManifest::default();
        let mut abi = None;
        for (i, line) in lines {
            let fields: Vec<&str> = line.split_whitespace().collect();
            let bad = || format!("line {}: cannot parse '{line}'", i + 1);
            match fields.as_slice() {
                [] => {}
                ["abi", v] => abi = Some(v.parse().map_err(|_| bad())?),
                ["plugin", lib, sha] => m.plugins.push((lib.to_string(), sha.to_string())),
                ["label", lib, label] => m.labels.push((lib.to_string(), label.to_string())),
                ["source", path, sha] => m.sources.push((path.to_string(), sha.to_string())),
                _ => return Err(bad()),
            }
        }
        m.abi_version = abi.ok_or("missing abi line")?;
        Ok(m)
    }
}

/// Fails on the first library that cannot be loaded or lacks a label.
pub fn check_required_labels(factory: &dyn BlockFactory, program: &Program) -> Result<(), PluginError> {
    for (library, labels) in program.required_labels() {
        let available = factory.labels(&library)?;
        for label in labels {
            if !available.contains(&label) {
                // Reuse the factory's own unknown-label diagnostic.
                factory.create(&library, &label)?;
            }
        }
    }
    Ok(())
}

fn fail(category: ErrorCategory, message: impl fmt::Display) -> ExitCode {
    eprintln!("error: {message}");
    ExitCode::from(category.exit_code())
}

/// Entry point of a generated program. `bundle_dir` holds `config.json`
/// and `MANIFEST`.
pub fn main(program: &Program, bundle_dir: &str) -> ExitCode {
    run_cli(program, Path::new(bundle_dir), StandaloneCli::parse())
}

pub fn run_cli(program: &Program, bundle_dir: &Path, cli: StandaloneCli) -> ExitCode {
    let config_path = cli.config.clone().unwrap_or_else(|| bundle_dir.join("config.json"));
    let config = match RuntimeConfig::load(&config_path) {
        Ok(c) => c,
        Err(e) => return fail(e.category(), e),
    };
    let registry = PluginRegistry::from_env(&cli.plugin_path);
    if let Err(e) = check_required_labels(&registry, program) {
        return fail(ErrorCategory::Plugin, e);
    }
    if let Ok(text) = std::fs::read_to_string(bundle_dir.join("MANIFEST")) {
        match BundleManifest::parse(&text) {
            Ok(manifest) => warn_on_drift(&manifest, &registry),
            Err(e) => eprintln!("warning: unreadable MANIFEST: {e}"),
        }
    }
    let plan = match config.plan(program) {
        Ok(p) => p,
        Err(e) => return fail(ErrorCategory::Model, format!("{}: {e}", config_path.display())),
    };
    let report = Engine::build(plan, &registry).and_then(|mut engine| engine.run(&cli.run.to_config(Vec::new())));
    finish(report)
}

fn warn_on_drift(manifest: &BundleManifest, registry: &PluginRegistry) {
    if manifest.abi_version != ABI_VERSION {
        eprintln!(
            "warning: bundle was generated for ABI {}, this program uses ABI {ABI_VERSION}",
            manifest.abi_version
        );
    }
    for (library, recorded) in &manifest.plugins {
        if let Ok(plugin) = registry.load(library) {
            if plugin.sha256 != *recorded {
                eprintln!(
                    "warning: plugin '{library}' at {} differs from the one present at generation",
                    plugin.path.display()
                );
            }
        }
    }
}

/// Prints the report as JSON, or the error, and maps to an exit code.
pub fn finish(result: Result<crate::engine::RunReport, EngineError>) -> ExitCode {
    match result {
        Ok(report) => {
            match serde_json::to_string_pretty(&report) {
                Ok(json) => println!("{json}"),
                Err(e) => return fail(ErrorCategory::Io, e),
            }
            ExitCode::SUCCESS
        }
        Err(e) => fail(e.category(), e),
    }
}
