#![allow(dead_code)]

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use blockflow::{BlockDescriptor, Connection, Endpoint, GraphModel};
use blockflow_core::Parameters;
use blockflow_runtime::PluginRegistry;
use rand::rngs::StdRng;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};

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

pub fn workspace_root() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../..").canonicalize().unwrap()
}

pub fn demo_model() -> PathBuf {
    workspace_root().join("models/pendulum_pid.json")
}

/// Runs the `blockflow` binary with the test plugin directory on its path.
pub fn blockflow(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_blockflow"))
        .arg("--plugin-path")
        .arg(plugin_dir())
        .args(args)
        .env_remove("BLOCKFLOW_PLUGIN_PATH")
        .output()
        .unwrap()
}

pub fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

pub fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

pub fn write_model(dir: &Path, name: &str, json: &str) -> PathBuf {
    let path = dir.join(name);
    std::fs::write(&path, json).unwrap();
    path
}

pub fn descriptor(name: &str, label: &str, parameters: Parameters) -> BlockDescriptor {
    BlockDescriptor {
        name: name.into(),
        library: "stdblocks".into(),
        label: label.into(),
        parameters,
    }
}

pub fn connection(from: &str, to: &str) -> Connection {
    Connection {
        from: from.parse::<Endpoint>().unwrap(),
        to: to.parse::<Endpoint>().unwrap(),
    }
}

/// Random scalar model of up to `max_blocks` stdblocks.
///
/// Constants have no inputs, Gains one, Sums two or three and UnitDelays one
/// without feedthrough. With `acyclic` every feedthrough input is fed by a
/// block earlier in a hidden random order; delays may be fed from anywhere.
/// Otherwise every input picks any block, itself included. Models where a
/// block is not linked, even indirectly, to a Constant are drawn again
/// because their widths cannot be resolved.
pub fn random_model(rng: &mut StdRng, max_blocks: usize, acyclic: bool) -> GraphModel {
    loop {
        let model = draw_model(rng, max_blocks, acyclic);
        if widths_resolvable(&model) {
            return model;
        }
    }
}

fn widths_resolvable(model: &GraphModel) -> bool {
    let n = model.blocks.len();
    let mut parent: Vec<usize> = (0..n).collect();
    fn root(parent: &mut [usize], mut v: usize) -> usize {
        while parent[v] != v {
            parent[v] = parent[parent[v]];
            v = parent[v];
        }
        v
    }
    for c in &model.connections {
        let (a, b) = (model.index_of(&c.from.block).unwrap(), model.index_of(&c.to.block).unwrap());
        let (ra, rb) = (root(&mut parent, a), root(&mut parent, b));
        parent[ra] = rb;
    }
    let anchored: Vec<usize> = (0..n)
        .filter(|&i| model.blocks[i].label == "Constant")
        .map(|i| root(&mut parent, i))
        .collect();
    (0..n).all(|i| anchored.contains(&root(&mut parent, i)))
}

fn draw_model(rng: &mut StdRng, max_blocks: usize, acyclic: bool) -> GraphModel {
    let n = rng.gen_range(1..=max_blocks);
    let mut names: Vec<String> = (0..n).map(|i| format!("{}{i}", ["a", "k", "m", "x", "z"][rng.gen_range(0..5)])).collect();
    names.shuffle(rng);

    let mut blocks = Vec::with_capacity(n);
    let mut connections = Vec::new();
    for i in 0..n {
        // Block 0 in the hidden order must be a source when acyclic.
        let kind = if acyclic && i == 0 { 0 } else { rng.gen_range(0..4) };
        let (label, params, inputs) = match kind {
            0 => ("Constant", Parameters::new().with("value", rng.gen_range(-2.0..2.0)), 0),
            1 => ("Gain", Parameters::new().with("k", rng.gen_range(-1.0..1.0)), 1),
            2 => {
                let m = rng.gen_range(2..=3);
                let signs: String = (0..m).map(|_| if rng.gen_bool(0.5) { '+' } else { '-' }).collect();
                ("Sum", Parameters::new().with("signs", signs.as_str()), m)
            }
            _ => ("UnitDelay", Parameters::new().with("initial", rng.gen_range(-1.0..1.0)), 1),
        };
        for port in 0..inputs {
            let src = if label == "UnitDelay" || !acyclic { rng.gen_range(0..n) } else { rng.gen_range(0..i) };
            connections.push(connection(&format!("{}.0", names[src]), &format!("{}.{port}", names[i])));
        }
        blocks.push(descriptor(&names[i], label, params));
    }
    blocks.shuffle(rng);
    connections.shuffle(rng);
    GraphModel {
        step_size: 0.01,
        configuration: Parameters::new(),
        blocks,
        connections,
    }
}

/// The same model with blocks and connections declared in another order.
pub fn shuffled(model: &GraphModel, rng: &mut StdRng) -> GraphModel {
    let mut m = model.clone();
    m.blocks.shuffle(rng);
    m.connections.shuffle(rng);
    m
}

/// `(from, to)` block indices of connections into feedthrough inputs.
/// Only UnitDelay lacks feedthrough among the blocks `random_model` uses.
pub fn feedthrough_edges(model: &GraphModel) -> Vec<(usize, usize)> {
    model
        .connections
        .iter()
        .filter_map(|c| {
            let to = model.index_of(&c.to.block).unwrap();
            (model.blocks[to].label != "UnitDelay").then(|| (model.index_of(&c.from.block).unwrap(), to))
        })
        .collect()
}

/// Brute force: a cycle exists if some node reaches itself.
pub fn has_cycle_brute_force(n: usize, edges: &[(usize, usize)]) -> bool {
    fn reaches(from: usize, target: usize, edges: &[(usize, usize)], seen: &mut Vec<bool>) -> bool {
        for &(a, b) in edges {
            if a == from {
                if b == target {
                    return true;
                }
                if !seen[b] {
                    seen[b] = true;
                    if reaches(b, target, edges, seen) {
                        return true;
                    }
                }
            }
        }
        false
    }
    (0..n).any(|v| reaches(v, v, edges, &mut vec![false; n]))
}

pub fn rng(seed: u64) -> StdRng {
    StdRng::seed_from_u64(seed)
}
