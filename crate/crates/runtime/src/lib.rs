//! Plugin loading, width resolution and the fixed-step engine.
//!
//! Generated programs depend on this crate alone; the graph loader and
//! scheduler live in the `blockflow` crate.

pub mod engine;
pub mod json;
pub mod plugin;
mod priority;
pub mod standalone;
pub mod wiring;

pub use engine::{
    Engine, EngineError, EnginePlan, ErrorCategory, LogTarget, Pacing, ParameterOverride, PlannedBlock, RunConfig,
    RunReport,
};
pub use plugin::{BlockFactory, PluginError, PluginInfo, PluginManifest, PluginRegistry, StaticFactory};
pub use wiring::{BlockPorts, Link, PortAddr, WiringError};
