//! Emits a standalone cargo project that runs a compiled model.
//!
//! The bundle holds the schedule as data tables and links only against
//! `blockflow-runtime`; block logic stays in the plugin libraries, which the
//! program loads at startup exactly as the interpreter does.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use blockflow_core::ffi::ABI_VERSION;
use blockflow_runtime::json::ParamObject;
use blockflow_runtime::plugin::{sha256_hex, PluginError, PluginRegistry};
use blockflow_runtime::standalone::{BlockParams, BundleManifest, RuntimeConfig};
use blockflow_runtime::ErrorCategory;
use thiserror::Error;

use crate::compile::Compiled;
use crate::schedule::Schedule;

#[derive(Debug, Error)]
pub enum CodegenError {
    #[error("cannot write '{}': {source}", .path.display())]
    Io { path: PathBuf, source: std::io::Error },
    #[error(transparent)]
    Plugin(#[from] PluginError),
    #[error("{0}")]
    Config(String),
}

impl CodegenError {
    pub fn category(&self) -> ErrorCategory {
        match self {
            CodegenError::Io { .. } => ErrorCategory::Io,
            CodegenError::Plugin(_) => ErrorCategory::Plugin,
            CodegenError::Config(_) => ErrorCategory::Model,
        }
    }
}

#[derive(Debug, Clone)]
pub struct CodegenOptions {
    /// Cargo package and binary name.
    pub package: String,
    /// Directory of the `blockflow-runtime` crate the bundle builds against.
    pub runtime_path: PathBuf,
    /// Copied into the bundle so it resolves the same dependency versions.
    pub lockfile: Option<PathBuf>,
}

impl CodegenOptions {
    /// Options pointing at this source tree.
    pub fn for_package(package: &str) -> Self {
        let root = Path::new(env!("CARGO_MANIFEST_DIR"));
        let lockfile = root.join("../../Cargo.lock");
        CodegenOptions {
            package: sanitize_package(package),
            runtime_path: root.join("../runtime"),
            lockfile: lockfile.is_file().then_some(lockfile),
        }
    }
}

/// Cargo package name derived from an arbitrary string.
pub fn sanitize_package(name: &str) -> String {
    let mut s: String = name
        .chars()
        .map(|c| if c.is_ascii_alphanumeric() || c == '-' || c == '_' { c.to_ascii_lowercase() } else { '-' })
        .collect();
    if !s.starts_with(|c: char| c.is_ascii_alphabetic()) {
        s.insert_str(0, "bf-");
    }
    s
}

#[derive(Debug, Clone)]
pub struct GeneratedBundle {
    pub dir: PathBuf,
    pub sources: Vec<PathBuf>,
    pub config: PathBuf,
    pub manifest: PathBuf,
    pub binary_name: String,
}

/// Table source listing blocks in execution order and the links between
/// them. Its size grows with the number of blocks and links only.
pub fn emit_schedule_preamble(schedule: &Schedule) -> String {
    let mut s = String::new();
    s.push_str("//! Execution order and wiring, fixed at generation time.\n\n");
    s.push_str("use blockflow_runtime::standalone::{BlockEntry, LinkEntry, Program};\n\n");
    let _ = writeln!(s, "pub static BLOCKS: [BlockEntry; {}] = [", schedule.order.len());
    for b in &schedule.order {
        let _ = writeln!(
            s,
            "    BlockEntry {{ name: {:?}, library: {:?}, label: {:?} }},",
            b.name, b.library, b.label
        );
    }
    s.push_str("];\n\n");
    let _ = writeln!(s, "pub static LINKS: [LinkEntry; {}] = [", schedule.links.len());
    for l in &schedule.links {
        let _ = writeln!(
            s,
            "    LinkEntry {{ from: ({}, {}), to: ({}, {}) }},",
            l.from.0, l.from.1, l.to.0, l.to.1
        );
    }
    s.push_str("];\n\n");
    s.push_str("pub static PROGRAM: Program = Program { blocks: &BLOCKS, links: &LINKS };\n");
    s
}

const MAIN_RS: &str = "\
//! Generated controller. Block logic is loaded from the plugins named in MANIFEST.

mod schedule;

fn main() -> std::process::ExitCode {
    blockflow_runtime::standalone::main(&schedule::PROGRAM, env!(\"CARGO_MANIFEST_DIR\"))
}
";

fn cargo_toml(options: &CodegenOptions) -> String {
    let runtime = options.runtime_path.canonicalize().unwrap_or_else(|_| options.runtime_path.clone());
    format!(
        "[package]\n\
         name = \"{name}\"\n\
         version = \"0.1.0\"\n\
         edition = \"2021\"\n\
         publish = false\n\
         \n\
         [dependencies]\n\
         blockflow-runtime = {{ path = {path:?} }}\n\
         \n\
         # Standalone: never part of an enclosing workspace.\n\
         [workspace]\n\
         \n\
         [profile.dev.package.sha2]\n\
         opt-level = 3\n\
         \n\
         # Registry dependencies keep the settings of the build tree they share.\n\
         [profile.dev.package.blockflow-core]\n\
         debug = false\n\
         \n\
         [profile.dev.package.blockflow-runtime]\n\
         debug = false\n\
         \n\
         [profile.dev.package.{name}]\n\
         debug = false\n",
        name = options.package,
        path = runtime.display().to_string(),
    )
}

/// The runtime configuration for a compiled model: step size, model
/// configuration and every block's parameters in schedule order.
pub fn runtime_config(compiled: &Compiled) -> RuntimeConfig {
    RuntimeConfig {
        step_size: compiled.model.step_size,
        configuration: ParamObject::from_parameters(&compiled.model.configuration),
        blocks: BlockParams(
            compiled
                .schedule
                .order
                .iter()
                .map(|s| {
                    let b = compiled.model.block(&s.name).expect("scheduled block exists");
                    (b.name.clone(), ParamObject::from_parameters(&b.parameters))
                })
                .collect(),
        ),
    }
}

pub fn generate(
    compiled: &Compiled,
    registry: &PluginRegistry,
    out_dir: &Path,
    options: &CodegenOptions,
) -> Result<GeneratedBundle, CodegenError> {
    let schedule = &compiled.schedule;

    // Every plugin must be present now so its checksum can be recorded.
    let mut manifest = BundleManifest {
        abi_version: ABI_VERSION,
        ..BundleManifest::default()
    };
    for b in &schedule.order {
        if !manifest.plugins.iter().any(|(lib, _)| *lib == b.library) {
            let plugin = registry.load(&b.library)?;
            manifest.plugins.push((b.library.clone(), plugin.sha256.clone()));
        }
        let entry = (b.library.clone(), b.label.clone());
        if !manifest.labels.contains(&entry) {
            manifest.labels.push(entry);
        }
    }

    let config = runtime_config(compiled).to_json().map_err(CodegenError::Config)?;
    let files: Vec<(&str, String)> = vec![
        ("Cargo.toml", cargo_toml(options)),
        ("src/main.rs", MAIN_RS.to_owned()),
        ("src/schedule.rs", emit_schedule_preamble(schedule)),
    ];
    for (path, text) in &files {
        manifest.sources.push((path.to_string(), sha256_hex(text.as_bytes())));
    }

    let write = |rel: &str, bytes: &[u8]| -> Result<PathBuf, CodegenError> {
        let path = out_dir.join(rel);
        let io = |source| CodegenError::Io {
            path: path.clone(),
            source,
        };
        if let Some(parent) = path.parent() {
            std::fs::create_dir_all(parent).map_err(io)?;
        }
        std::fs::write(&path, bytes).map_err(io)?;
        Ok(path)
    };

    let mut sources = Vec::new();
    for (rel, text) in &files {
        sources.push(write(rel, text.as_bytes())?);
    }
    if let Some(lock) = &options.lockfile {
        if let Ok(bytes) = std::fs::read(lock) {
            write("Cargo.lock", &bytes)?;
        }
    }
    let config_path = write("config.json", config.as_bytes())?;
    let manifest_path = write("MANIFEST", manifest.render().as_bytes())?;

    Ok(GeneratedBundle {
        dir: out_dir.to_owned(),
        sources,
        config: config_path,
        manifest: manifest_path,
        binary_name: options.package.clone(),
    })
}
