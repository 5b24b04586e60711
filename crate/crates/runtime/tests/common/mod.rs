#![allow(dead_code)]

use std::path::PathBuf;

use blockflow_core::{ParamValue, Parameters};
use blockflow_runtime::{EnginePlan, Link, PlannedBlock, PluginRegistry, PortAddr};

/// Cargo places the cdylibs of dev-dependencies next to the test binary.
pub fn plugin_dir() -> PathBuf {
    let exe = std::env::current_exe().unwrap();
    let dir = exe.parent().unwrap().to_path_buf();
    let probe = dir.join(blockflow_runtime::plugin::library_file_name("stdblocks"));
    assert!(probe.is_file(), "{} missing; build the workspace first", probe.display());
    dir
}

pub fn registry() -> PluginRegistry {
    PluginRegistry::new(vec![plugin_dir()])
}

pub fn block(name: &str, library: &str, label: &str, params: &[(&str, ParamValue)]) -> PlannedBlock {
    PlannedBlock {
        name: name.into(),
        library: library.into(),
        label: label.into(),
        parameters: params.iter().cloned().map(|(k, v)| (k.to_owned(), v)).collect::<Parameters>(),
    }
}

pub fn std(name: &str, label: &str, params: &[(&str, ParamValue)]) -> PlannedBlock {
    block(name, "stdblocks", label, params)
}

pub fn probe(name: &str, params: &[(&str, ParamValue)]) -> PlannedBlock {
    block(name, "probeblocks", "Probe", params)
}

pub fn link(a: usize, ap: usize, b: usize, bp: usize) -> Link {
    Link {
        from: PortAddr::new(a, ap),
        to: PortAddr::new(b, bp),
    }
}

pub fn plan(step_size: f64, blocks: Vec<PlannedBlock>, links: Vec<Link>) -> EnginePlan {
    EnginePlan {
        step_size,
        configuration: Parameters::new(),
        blocks,
        links,
    }
}
