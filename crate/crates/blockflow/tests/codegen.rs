mod common;

use blockflow::codegen::{emit_schedule_preamble, generate, CodegenOptions};
use blockflow::{compile, compile_file, load_graph};
use blockflow_core::{ParamValue, Parameters};
use blockflow_runtime::standalone::{BundleManifest, RuntimeConfig};
use blockflow_runtime::ErrorCategory;
use common::{connection, demo_model, descriptor, registry};

#[test]
fn preamble_lists_blocks_in_schedule_order() {
    let compiled = compile_file(&demo_model(), &registry()).unwrap();
    let text = emit_schedule_preamble(&compiled.schedule);
    assert!(text.contains("pub static BLOCKS: [BlockEntry; 6] = ["));
    assert!(text.contains("pub static LINKS: [LinkEntry; 6] = ["));
    let names: Vec<&str> = text
        .lines()
        .filter_map(|l| l.trim().strip_prefix("BlockEntry { name: \""))
        .map(|l| l.split('"').next().unwrap())
        .collect();
    assert_eq!(names, ["plant", "angle", "reference", "error", "pid", "limit"]);
    // limit (5) feeds plant (0); plant feeds angle (1).
    assert!(text.contains("LinkEntry { from: (5, 0), to: (0, 0) },"), "{text}");
    assert!(text.contains("LinkEntry { from: (0, 0), to: (1, 0) },"), "{text}");
    assert!(!text.contains("Kp"), "parameters belong in config.json");
}

#[test]
fn bundle_layout_and_manifest() {
    let reg = registry();
    let compiled = compile_file(&demo_model(), &reg).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let bundle = generate(&compiled, &reg, dir.path(), &CodegenOptions::for_package("pendulum_pid")).unwrap();

    for rel in ["Cargo.toml", "Cargo.lock", "src/main.rs", "src/schedule.rs", "config.json", "MANIFEST"] {
        assert!(dir.path().join(rel).is_file(), "{rel} missing");
    }
    let cargo = std::fs::read_to_string(dir.path().join("Cargo.toml")).unwrap();
    assert!(cargo.contains("name = \"pendulum_pid\""));
    assert!(cargo.contains("\n[workspace]\n"));
    let runtime = common::workspace_root().join("crates/runtime");
    assert!(cargo.contains(&format!("blockflow-runtime = {{ path = {:?} }}", runtime.display().to_string())), "{cargo}");

    let manifest = BundleManifest::parse(&std::fs::read_to_string(&bundle.manifest).unwrap()).unwrap();
    assert_eq!(manifest.abi_version, blockflow_core::ffi::ABI_VERSION);
    assert_eq!(manifest.plugins, vec![("stdblocks".to_owned(), reg.load("stdblocks").unwrap().sha256.clone())]);
    assert_eq!(manifest.labels.len(), 6);
    assert_eq!(manifest.sources.len(), 3);
    for (rel, sha) in &manifest.sources {
        let bytes = std::fs::read(dir.path().join(rel)).unwrap();
        assert_eq!(&blockflow_runtime::plugin::sha256_hex(&bytes), sha, "{rel}");
    }

    let config = RuntimeConfig::load(&bundle.config).unwrap();
    assert_eq!(config.step_size, 0.001);
    let names: Vec<&str> = config.blocks.0.iter().map(|(n, _)| n.as_str()).collect();
    assert_eq!(names, ["plant", "angle", "reference", "error", "pid", "limit"]);
}

#[test]
fn parameter_edits_only_touch_config() {
    let reg = registry();
    let mut model = load_graph(&demo_model()).unwrap();
    let options = CodegenOptions::for_package("tuned");
    let first = tempfile::tempdir().unwrap();
    let second = tempfile::tempdir().unwrap();
    generate(&compile(model.clone(), &reg).unwrap(), &reg, first.path(), &options).unwrap();

    let pid = model.blocks.iter_mut().find(|b| b.name == "pid").unwrap();
    pid.parameters.insert("Kp", ParamValue::Float(12.5));
    generate(&compile(model, &reg).unwrap(), &reg, second.path(), &options).unwrap();

    for rel in ["Cargo.toml", "src/main.rs", "src/schedule.rs"] {
        assert_eq!(
            std::fs::read(first.path().join(rel)).unwrap(),
            std::fs::read(second.path().join(rel)).unwrap(),
            "{rel}"
        );
    }
    assert_ne!(
        std::fs::read(first.path().join("config.json")).unwrap(),
        std::fs::read(second.path().join("config.json")).unwrap()
    );
}

#[test]
fn model_without_connections() {
    let reg = registry();
    let model = blockflow::GraphModel {
        step_size: 0.1,
        configuration: Parameters::new(),
        blocks: vec![descriptor("only", "Constant", Parameters::new().with("value", 4.0))],
        connections: vec![],
    };
    let compiled = compile(model, &reg).unwrap();
    let text = emit_schedule_preamble(&compiled.schedule);
    assert!(text.contains("pub static LINKS: [LinkEntry; 0] = [\n];"), "{text}");
    let dir = tempfile::tempdir().unwrap();
    generate(&compiled, &reg, dir.path(), &CodegenOptions::for_package("lonely")).unwrap();
}

#[test]
fn preamble_grows_with_blocks_and_links_only() {
    let reg = registry();
    let chain = |n: usize, k: f64| {
        let mut blocks = vec![descriptor("b0", "Constant", Parameters::new().with("value", vec![1.0; 8]))];
        let mut connections = vec![];
        for i in 1..n {
            blocks.push(descriptor(&format!("b{i}"), "Gain", Parameters::new().with("k", k)));
            connections.push(connection(&format!("b{}.0", i - 1), &format!("b{i}.0")));
        }
        let model = blockflow::GraphModel {
            step_size: 0.1,
            configuration: Parameters::new(),
            blocks,
            connections,
        };
        emit_schedule_preamble(&compile(model, &reg).unwrap().schedule)
    };
    assert_eq!(chain(5, 1.0), chain(5, -3.0));
    let (small, large) = (chain(5, 1.0).len(), chain(9, 1.0).len());
    // Four more blocks and four more links, each a single line.
    assert_eq!(chain(9, 1.0).lines().count(), chain(5, 1.0).lines().count() + 8);
    assert!(large > small);
}

#[test]
fn missing_plugin_is_a_plugin_error() {
    let reg = registry();
    let compiled = compile_file(&demo_model(), &reg).unwrap();
    let empty = blockflow_runtime::PluginRegistry::new(vec![]);
    let dir = tempfile::tempdir().unwrap();
    let err = generate(&compiled, &empty, dir.path(), &CodegenOptions::for_package("x")).unwrap_err();
    assert_eq!(err.category(), ErrorCategory::Plugin);
    assert!(!dir.path().join("MANIFEST").exists());
}
