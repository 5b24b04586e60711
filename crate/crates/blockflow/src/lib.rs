//! Graph models, scheduling, validation and code generation.
//!
//! Typical use: [`compile::compile_file`] a model against a
//! [`PluginRegistry`](blockflow_runtime::PluginRegistry), then either build
//! an engine from the result or hand it to [`codegen::generate`].

pub mod cli;
pub mod codegen;
pub mod compile;
pub mod graph;
pub mod schedule;

pub use compile::{compile, compile_file, validate_file, Compiled, Diagnostic};
pub use graph::{load_graph, parse_graph, BlockDescriptor, Connection, Endpoint, GraphError, GraphModel};
pub use schedule::{compute_schedule, topological_order, Schedule, ScheduleError};
