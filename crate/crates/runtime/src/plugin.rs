//! Runtime discovery and loading of block libraries.

use std::collections::HashMap;
use std::ffi::{CString, OsString};
use std::fmt;
use std::path::{Path, PathBuf};
use std::sync::{Arc, Mutex};

use blockflow_core::export::Constructor;
use blockflow_core::ffi::{self, CreateFn, ForeignBlock, ManifestFn, ABI_VERSION};
use blockflow_core::{Block, Lifecycle};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

/// Environment variable holding extra plugin directories.
pub const PLUGIN_PATH_ENV: &str = "BLOCKFLOW_PLUGIN_PATH";

#[derive(Debug, Error)]
pub enum PluginError {
    #[error("plugin library '{library}' not found; probed: {}", display_paths(.probed))]
    NotFound { library: String, probed: Vec<PathBuf> },
    #[error("cannot load '{}': {reason}", .path.display())]
    Load { path: PathBuf, reason: String },
    #[error("'{}' does not export symbol '{symbol}'", .path.display())]
    MissingSymbol { path: PathBuf, symbol: &'static str },
    #[error("'{}': plugin ABI {plugin}, host ABI {host}", .path.display())]
    AbiMismatch { path: PathBuf, plugin: u32, host: u32 },
    #[error("'{}': invalid manifest: {reason}", .path.display())]
    InvalidManifest { path: PathBuf, reason: String },
    #[error("library '{library}' has no block '{label}'{}; available: {}", suggestion_text(.suggestion), .available.join(", "))]
    UnknownLabel {
        library: String,
        label: String,
        suggestion: Option<String>,
        available: Vec<String>,
    },
    #[error("factory of '{library}' returned no instance for '{label}'")]
    FactoryFailed { library: String, label: String },
}

fn display_paths(paths: &[PathBuf]) -> String {
    if paths.is_empty() {
        return format!("nothing (no search paths; use --plugin-path or {PLUGIN_PATH_ENV})");
    }
    paths.iter().map(|p| p.display().to_string()).collect::<Vec<_>>().join(", ")
}

fn suggestion_text(s: &Option<String>) -> String {
    s.as_ref().map(|s| format!(" (did you mean '{s}'?)")).unwrap_or_default()
}

/// Labels a library provides and the ABI it was built against.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PluginManifest {
    pub abi_version: u32,
    pub labels: Vec<String>,
}

/// Identity of a loaded plugin file.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PluginInfo {
    pub library: String,
    pub path: PathBuf,
    pub sha256: String,
}

/// Anything that can turn `(library, label)` into a block instance.
pub trait BlockFactory {
    fn labels(&self, library: &str) -> Result<Vec<String>, PluginError>;

    fn create(&self, library: &str, label: &str) -> Result<Box<dyn Block>, PluginError>;

    fn plugin_info(&self, _library: &str) -> Option<PluginInfo> {
        None
    }
}

/// Platform file name for a library basename, e.g. `libstdblocks.so`.
pub fn library_file_name(basename: &str) -> String {
    format!("{}{basename}{}", std::env::consts::DLL_PREFIX, std::env::consts::DLL_SUFFIX)
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

pub fn sha256_file(path: &Path) -> std::io::Result<String> {
    Ok(sha256_hex(&std::fs::read(path)?))
}

/// A shared library whose manifest passed the ABI check.
pub struct LoadedPlugin {
    pub name: String,
    pub path: PathBuf,
    pub manifest: PluginManifest,
    pub sha256: String,
    create: CreateFn,
    _library: libloading::Library,
}

impl fmt::Debug for LoadedPlugin {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("LoadedPlugin")
            .field("name", &self.name)
            .field("path", &self.path)
            .field("manifest", &self.manifest)
            .finish()
    }
}

impl LoadedPlugin {
    pub fn open(name: &str, path: &Path) -> Result<Self, PluginError> {
        let bytes = std::fs::read(path).map_err(|e| PluginError::Load {
            path: path.to_owned(),
            reason: e.to_string(),
        })?;
        let sha256 = sha256_hex(&bytes);
        // Loading runs the library's initializers; plugins are trusted code.
        let library = unsafe { libloading::Library::new(path) }.map_err(|e| PluginError::Load {
            path: path.to_owned(),
            reason: e.to_string(),
        })?;
        let manifest_fn: ManifestFn = unsafe {
            *library
                .get::<ManifestFn>(ffi::MANIFEST_SYMBOL.as_bytes())
                .map_err(|_| PluginError::MissingSymbol {
                    path: path.to_owned(),
                    symbol: ffi::MANIFEST_SYMBOL,
                })?
        };
        let (abi_version, labels) = unsafe { ffi::manifest_labels(manifest_fn()) }.ok_or_else(|| {
            PluginError::InvalidManifest {
                path: path.to_owned(),
                reason: "manifest is null or malformed".into(),
            }
        })?;
        if abi_version != ABI_VERSION {
            return Err(PluginError::AbiMismatch {
                path: path.to_owned(),
                plugin: abi_version,
                host: ABI_VERSION,
            });
        }
        if labels.is_empty() {
            return Err(PluginError::InvalidManifest {
                path: path.to_owned(),
                reason: "no labels".into(),
            });
        }
        let mut seen = std::collections::HashSet::new();
        if let Some(dup) = labels.iter().find(|l| !seen.insert(l.as_str())) {
            return Err(PluginError::InvalidManifest {
                path: path.to_owned(),
                reason: format!("label '{dup}' listed twice"),
            });
        }
        let create: CreateFn = unsafe {
            *library
                .get::<CreateFn>(ffi::CREATE_SYMBOL.as_bytes())
                .map_err(|_| PluginError::MissingSymbol {
                    path: path.to_owned(),
                    symbol: ffi::CREATE_SYMBOL,
                })?
        };
        Ok(LoadedPlugin {
            name: name.to_owned(),
            path: path.to_owned(),
            manifest: PluginManifest { abi_version, labels },
            sha256,
            create,
            _library: library,
        })
    }

    pub fn info(&self) -> PluginInfo {
        PluginInfo {
            library: self.name.clone(),
            path: self.path.clone(),
            sha256: self.sha256.clone(),
        }
    }

    fn instantiate(self: &Arc<Self>, label: &str) -> Result<Box<dyn Block>, PluginError> {
        if !self.manifest.labels.iter().any(|l| l == label) {
            return Err(unknown_label(&self.name, label, &self.manifest.labels));
        }
        let failed = || PluginError::FactoryFailed {
            library: self.name.clone(),
            label: label.to_owned(),
        };
        let c_label = CString::new(label).map_err(|_| failed())?;
        let raw = unsafe { (self.create)(c_label.as_ptr()) };
        let keepalive: Arc<dyn std::any::Any + Send + Sync> = self.clone();
        let block = unsafe { ForeignBlock::from_raw(raw, Some(keepalive)) }.ok_or_else(failed)?;
        Ok(Box::new(block))
    }
}

/// Reads the manifest of the library at `path` without caching it.
pub fn load_manifest(path: &Path) -> Result<PluginManifest, PluginError> {
    let name = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    LoadedPlugin::open(&name, path).map(|p| p.manifest)
}

fn unknown_label(library: &str, label: &str, available: &[String]) -> PluginError {
    let suggestion = available
        .iter()
        .map(|l| (strsim::osa_distance(&l.to_lowercase(), &label.to_lowercase()), l))
        .filter(|(d, l)| *d <= 2.max(l.len() / 3))
        .min()
        .map(|(_, l)| l.clone());
    PluginError::UnknownLabel {
        library: library.to_owned(),
        label: label.to_owned(),
        suggestion,
        available: available.to_vec(),
    }
}

/// Search-path based plugin loader. Each library is loaded at most once;
/// later requests reuse the cached handle.
pub struct PluginRegistry {
    search_paths: Vec<PathBuf>,
    loaded: Mutex<HashMap<String, Arc<LoadedPlugin>>>,
}

impl PluginRegistry {
    pub fn new(search_paths: Vec<PathBuf>) -> Self {
        PluginRegistry {
            search_paths,
            loaded: Mutex::new(HashMap::new()),
        }
    }

    /// Flag entries first, then the entries of `BLOCKFLOW_PLUGIN_PATH`.
    pub fn from_env(flag_paths: &[PathBuf]) -> Self {
        let env = std::env::var_os(PLUGIN_PATH_ENV);
        Self::with_env_value(flag_paths, env)
    }

    pub fn with_env_value(flag_paths: &[PathBuf], env: Option<OsString>) -> Self {
        let mut paths = flag_paths.to_vec();
        if let Some(value) = env {
            paths.extend(std::env::split_paths(&value).filter(|p| !p.as_os_str().is_empty()));
        }
        Self::new(paths)
    }

    pub fn search_paths(&self) -> &[PathBuf] {
        &self.search_paths
    }

    pub fn discover(&self, library: &str) -> Result<PathBuf, PluginError> {
        let file = library_file_name(library);
        let probed: Vec<PathBuf> = self.search_paths.iter().map(|dir| dir.join(&file)).collect();
        probed
            .iter()
            .find(|p| p.is_file())
            .cloned()
            .ok_or_else(|| PluginError::NotFound {
                library: library.to_owned(),
                probed,
            })
    }

    pub fn load(&self, library: &str) -> Result<Arc<LoadedPlugin>, PluginError> {
        let mut loaded = self.loaded.lock().unwrap_or_else(|e| e.into_inner());
        if let Some(plugin) = loaded.get(library) {
            return Ok(plugin.clone());
        }
        let path = self.discover(library)?;
        let plugin = Arc::new(LoadedPlugin::open(library, &path)?);
        loaded.insert(library.to_owned(), plugin.clone());
        Ok(plugin)
    }

    pub fn instantiate(&self, library: &str, label: &str) -> Result<Box<dyn Block>, PluginError> {
        self.load(library)?.instantiate(label)
    }

    pub fn loaded(&self) -> Vec<PluginInfo> {
        let loaded = self.loaded.lock().unwrap_or_else(|e| e.into_inner());
        let mut infos: Vec<PluginInfo> = loaded.values().map(|p| p.info()).collect();
        infos.sort_by(|a, b| a.library.cmp(&b.library));
        infos
    }
}

impl BlockFactory for PluginRegistry {
    fn labels(&self, library: &str) -> Result<Vec<String>, PluginError> {
        Ok(self.load(library)?.manifest.labels.clone())
    }

    fn create(&self, library: &str, label: &str) -> Result<Box<dyn Block>, PluginError> {
        self.instantiate(library, label)
    }

    fn plugin_info(&self, library: &str) -> Option<PluginInfo> {
        self.load(library).ok().map(|p| p.info())
    }
}

/// In-process factory over compiled-in constructor tables.
#[derive(Default)]
pub struct StaticFactory {
    libraries: HashMap<String, Vec<(String, Constructor)>>,
}

impl StaticFactory {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with_library(mut self, name: &str, blocks: &[(&str, Constructor)]) -> Self {
        self.libraries.insert(
            name.to_owned(),
            blocks.iter().map(|(l, c)| ((*l).to_owned(), *c)).collect(),
        );
        self
    }
}

impl BlockFactory for StaticFactory {
    fn labels(&self, library: &str) -> Result<Vec<String>, PluginError> {
        self.libraries
            .get(library)
            .map(|blocks| blocks.iter().map(|(l, _)| l.clone()).collect())
            .ok_or_else(|| PluginError::NotFound {
                library: library.to_owned(),
                probed: Vec::new(),
            })
    }

    fn create(&self, library: &str, label: &str) -> Result<Box<dyn Block>, PluginError> {
        let labels = self.labels(library)?;
        let (_, ctor) = self.libraries[library]
            .iter()
            .find(|(l, _)| l == label)
            .ok_or_else(|| unknown_label(library, label, &labels))?;
        Ok(Box::new(Lifecycle::new(ctor())))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn nearest_label_suggestion() {
        let labels: Vec<String> = ["Gain", "Sum", "UnitDelay"].iter().map(|s| s.to_string()).collect();
        match unknown_label("stdblocks", "Gian", &labels) {
            PluginError::UnknownLabel { suggestion, .. } => assert_eq!(suggestion.as_deref(), Some("Gain")),
            other => panic!("{other}"),
        }
        match unknown_label("stdblocks", "Integrator", &labels) {
            PluginError::UnknownLabel { suggestion, .. } => assert_eq!(suggestion, None),
            other => panic!("{other}"),
        }
    }

    #[test]
    fn flag_paths_precede_environment() {
        let env = std::env::join_paths(["/env/a", "/env/b"]).unwrap();
        let reg = PluginRegistry::with_env_value(&[PathBuf::from("/flag")], Some(env));
        assert_eq!(
            reg.search_paths(),
            &[PathBuf::from("/flag"), PathBuf::from("/env/a"), PathBuf::from("/env/b")]
        );
    }

    #[test]
    fn abi_mismatch_message() {
        let err = PluginError::AbiMismatch {
            path: "/x/liblegacy.so".into(),
            plugin: 1,
            host: 2,
        };
        assert!(err.to_string().ends_with("plugin ABI 1, host ABI 2"));
    }
}
