//! From a graph model to a schedule, collecting every diagnostic on the way.

use std::collections::{BTreeSet, HashMap};
use std::path::Path;

use blockflow_runtime::engine::declare_ports;
use blockflow_runtime::wiring::{self, BlockPorts, Link, PortAddr, WiringError};
use blockflow_runtime::{
    BlockFactory, Engine, EngineError, EnginePlan, ErrorCategory, ParameterOverride, PlannedBlock,
};
use serde::Serialize;

use crate::graph::{load_graph, GraphError, GraphModel};
use crate::schedule::{compute_schedule, topological_order, Schedule, ScheduleError};

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Diagnostic {
    pub category: ErrorCategory,
    pub message: String,
}

impl Diagnostic {
    fn model(message: impl Into<String>) -> Self {
        Diagnostic {
            category: ErrorCategory::Model,
            message: message.into(),
        }
    }
}

impl std::fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let tag = match self.category {
            ErrorCategory::Model => "model",
            ErrorCategory::Plugin => "plugin",
            ErrorCategory::Io => "io",
            ErrorCategory::Runtime => "runtime",
        };
        write!(f, "error[{tag}]: {}", self.message)
    }
}

/// Exit status for a set of diagnostics: I/O errors win over plugin errors,
/// which win over model errors.
pub fn exit_code(diagnostics: &[Diagnostic]) -> u8 {
    [ErrorCategory::Io, ErrorCategory::Plugin, ErrorCategory::Model, ErrorCategory::Runtime]
        .into_iter()
        .find(|c| diagnostics.iter().any(|d| d.category == *c))
        .map_or(0, |c| c.exit_code())
}

pub fn graph_diagnostics(err: GraphError) -> Vec<Diagnostic> {
    match err {
        GraphError::Io { .. } => vec![Diagnostic {
            category: ErrorCategory::Io,
            message: err.to_string(),
        }],
        GraphError::Parse { .. } => vec![Diagnostic::model(err.to_string())],
        GraphError::Invalid { problems } => problems.into_iter().map(Diagnostic::model).collect(),
    }
}

/// A model whose blocks all declared their ports, whose wiring resolved and
/// which has a schedule.
#[derive(Debug, Clone)]
pub struct Compiled {
    pub model: GraphModel,
    /// Resolved ports, indexed like `model.blocks`.
    pub ports: Vec<BlockPorts>,
    pub schedule: Schedule,
}

pub fn compile_file(path: &Path, factory: &dyn BlockFactory) -> Result<Compiled, Vec<Diagnostic>> {
    let model = load_graph(path).map_err(graph_diagnostics)?;
    compile(model, factory)
}

/// Every diagnostic for the file; empty means the model is runnable.
pub fn validate_file(path: &Path, factory: &dyn BlockFactory) -> Vec<Diagnostic> {
    compile_file(path, factory).err().unwrap_or_default()
}

pub fn compile(model: GraphModel, factory: &dyn BlockFactory) -> Result<Compiled, Vec<Diagnostic>> {
    let mut diagnostics = Vec::new();

    let mut declared: Vec<Option<BlockPorts>> = Vec::with_capacity(model.blocks.len());
    for b in &model.blocks {
        let ports = match factory.create(&b.library, &b.label) {
            Err(e) => {
                diagnostics.push(Diagnostic {
                    category: ErrorCategory::Plugin,
                    message: format!("block '{}': {e}", b.name),
                });
                None
            }
            Ok(mut block) => declare_ports(block.as_mut(), &b.name, &b.parameters, &model.configuration, model.step_size)
                .map_err(|e| e.message().to_owned())
                .and_then(|p| BlockPorts::from_declared(&p))
                .map_err(|e| diagnostics.push(Diagnostic::model(format!("block '{}' rejected its configuration: {e}", b.name))))
                .ok(),
        };
        declared.push(ports);
    }

    // Check the healthy part of the graph. Problems that only follow from a
    // broken neighbour are left out.
    let healthy: Vec<usize> = (0..declared.len()).filter(|&i| declared[i].is_some()).collect();
    let sub_index: HashMap<usize, usize> = healthy.iter().enumerate().map(|(s, &i)| (i, s)).collect();
    let names: Vec<&str> = healthy.iter().map(|&i| model.blocks[i].name.as_str()).collect();
    let sub_ports: Vec<BlockPorts> = healthy.iter().map(|&i| declared[i].clone().unwrap()).collect();
    let mut next_to_broken = BTreeSet::new();
    let mut links = Vec::new();
    for c in &model.connections {
        let (a, b) = (model.index_of(&c.from.block).unwrap(), model.index_of(&c.to.block).unwrap());
        match (sub_index.get(&a), sub_index.get(&b)) {
            (Some(&sa), Some(&sb)) => links.push(Link {
                from: PortAddr::new(sa, c.from.port),
                to: PortAddr::new(sb, c.to.port),
            }),
            _ => {
                next_to_broken.insert(c.from.block.as_str());
                next_to_broken.insert(c.to.block.as_str());
            }
        }
    }
    links.sort_by_key(|l| (l.to, l.from));

    let resolved = match wiring::resolve(&names, &sub_ports, &links) {
        Ok(r) => Some(r),
        Err(errors) => {
            diagnostics.extend(
                errors
                    .into_iter()
                    .filter(|e| !consequence_of_broken_neighbour(e, &next_to_broken))
                    .map(|e| Diagnostic::model(e.to_string())),
            );
            None
        }
    };

    let edges: Vec<(usize, usize)> = links
        .iter()
        .filter(|l| {
            sub_ports[l.from.block].outputs.len() > l.from.port
                && sub_ports[l.to.block].inputs.get(l.to.port).is_some_and(|p| p.feedthrough)
        })
        .map(|l| (l.from.block, l.to.block))
        .collect();
    if let Err(cycle) = topological_order(&names, &edges) {
        let cycle = cycle.into_iter().map(|i| names[i].to_owned()).collect();
        diagnostics.push(Diagnostic::model(ScheduleError::AlgebraicLoop(cycle).to_string()));
    }

    if !diagnostics.is_empty() {
        return Err(diagnostics);
    }
    let ports = resolved.expect("no diagnostics means wiring resolved");
    let schedule = compute_schedule(&model, &ports).map_err(|e| vec![Diagnostic::model(e.to_string())])?;
    Ok(Compiled { model, ports, schedule })
}

fn consequence_of_broken_neighbour(e: &WiringError, broken_neighbours: &BTreeSet<&str>) -> bool {
    let at = match e {
        WiringError::Unconnected { at } | WiringError::Unresolved { at } => at,
        _ => return false,
    };
    let block = at.0.rsplit_once('.').map_or(at.0.as_str(), |(b, _)| b);
    broken_neighbours.contains(block)
}

impl Compiled {
    /// Blocks in schedule order with their parameters and the links by
    /// schedule position.
    pub fn engine_plan(&self) -> EnginePlan {
        EnginePlan {
            step_size: self.model.step_size,
            configuration: self.model.configuration.clone(),
            blocks: self
                .schedule
                .order
                .iter()
                .map(|s| {
                    let b = self.model.block(&s.name).expect("scheduled block exists");
                    PlannedBlock {
                        name: b.name.clone(),
                        library: b.library.clone(),
                        label: b.label.clone(),
                        parameters: b.parameters.clone(),
                    }
                })
                .collect(),
            links: self
                .schedule
                .links
                .iter()
                .map(|l| Link {
                    from: PortAddr::new(l.from.0, l.from.1),
                    to: PortAddr::new(l.to.0, l.to.1),
                })
                .collect(),
        }
    }

    pub fn build_engine(
        &self,
        factory: &dyn BlockFactory,
        overrides: &[ParameterOverride],
    ) -> Result<Engine, EngineError> {
        let mut plan = self.engine_plan();
        for o in overrides {
            plan.apply_override(o).map_err(EngineError::InvalidPlan)?;
        }
        Engine::build(plan, factory)
    }
}
