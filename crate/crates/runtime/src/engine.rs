//! Fixed-step execution of a scheduled block graph.

use std::collections::{BTreeMap, HashSet};
use std::fmt;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::PathBuf;
use std::str::FromStr;
use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::Arc;
use std::time::{Duration, Instant};

use blockflow_core::{logfmt, Block, BlockContext, BlockError, ParamValue, Parameters, PortSpec, Signal, SignalRef};
use serde::Serialize;
use thiserror::Error;

use crate::plugin::{BlockFactory, PluginError, PluginInfo};
use crate::wiring::{self, BlockPorts, Link, WiringError};

/// Smallest step size accepted under real-time pacing, in seconds.
pub const MIN_REALTIME_STEP: f64 = 1e-3;

/// Broad failure classes. Each maps to a process exit code.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ErrorCategory {
    Model,
    Plugin,
    Io,
    Runtime,
}

impl ErrorCategory {
    pub fn exit_code(self) -> u8 {
        match self {
            ErrorCategory::Model => 1,
            ErrorCategory::Plugin => 2,
            ErrorCategory::Io => 3,
            ErrorCategory::Runtime => 4,
        }
    }
}

#[derive(Debug, Error)]
pub enum EngineError {
    #[error("invalid plan: {0}")]
    InvalidPlan(String),
    #[error("block '{block}': {source}")]
    Plugin { block: String, source: PluginError },
    #[error("block '{block}' rejected its configuration: {message}")]
    Declare { block: String, message: String },
    #[error("{}", join(.0))]
    Wiring(Vec<WiringError>),
    #[error("schedule runs '{consumer}' before its feedthrough producer '{producer}'")]
    OrderViolation { producer: String, consumer: String },
    #[error("block '{block}' failed to initialize: {message}")]
    Initialize { block: String, message: String },
    #[error("step {step}: block '{block}' failed: {message}")]
    Step { step: u64, block: String, message: String },
    #[error("step {step}: block '{block}' wrote a non-finite value to output {port}")]
    NonFinite { step: u64, block: String, port: usize },
    #[error("unknown log target '{0}'")]
    UnknownLogTarget(String),
    #[error("log '{}': {message}", .path.display())]
    Log { path: PathBuf, message: String },
    #[error("{0}")]
    Pacing(String),
    #[error("block '{block}' failed to terminate: {message}")]
    Terminate { block: String, message: String },
    #[error("engine has already terminated")]
    Terminated,
}

fn join(errors: &[WiringError]) -> String {
    errors.iter().map(|e| e.to_string()).collect::<Vec<_>>().join("; ")
}

impl EngineError {
    pub fn category(&self) -> ErrorCategory {
        match self {
            EngineError::Plugin { .. } => ErrorCategory::Plugin,
            EngineError::Log { .. } | EngineError::Terminate { .. } => ErrorCategory::Io,
            EngineError::Step { .. } | EngineError::NonFinite { .. } => ErrorCategory::Runtime,
            _ => ErrorCategory::Model,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PlannedBlock {
    pub name: String,
    pub library: String,
    pub label: String,
    pub parameters: Parameters,
}

/// Blocks in execution order plus connections between them by index.
#[derive(Debug, Clone, PartialEq)]
pub struct EnginePlan {
    pub step_size: f64,
    pub configuration: Parameters,
    pub blocks: Vec<PlannedBlock>,
    pub links: Vec<Link>,
}

impl EnginePlan {
    pub fn apply_override(&mut self, o: &ParameterOverride) -> Result<(), String> {
        let block = self
            .blocks
            .iter_mut()
            .find(|b| b.name == o.block)
            .ok_or_else(|| format!("--set {o}: no block named '{}'", o.block))?;
        block.parameters.insert(o.parameter.clone(), o.value.clone());
        Ok(())
    }
}

/// `block.parameter=value`; the value is JSON, or a plain string otherwise.
#[derive(Debug, Clone, PartialEq)]
pub struct ParameterOverride {
    pub block: String,
    pub parameter: String,
    pub value: ParamValue,
}

impl FromStr for ParameterOverride {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let err = || format!("expected block.parameter=value, got '{s}'");
        let (target, value) = s.split_once('=').ok_or_else(err)?;
        let (block, parameter) = target.split_once('.').ok_or_else(err)?;
        if block.is_empty() || parameter.is_empty() {
            return Err(err());
        }
        Ok(ParameterOverride {
            block: block.to_owned(),
            parameter: parameter.to_owned(),
            value: crate::json::param_from_text(value)?,
        })
    }
}

impl fmt::Display for ParameterOverride {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let value = crate::json::param_to_json(&self.value)
            .map(|v| v.to_string())
            .unwrap_or_else(|_| self.value.to_string());
        write!(f, "{}.{}={value}", self.block, self.parameter)
    }
}

/// `block.port=path`: log that output port to a CSV file.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LogTarget {
    pub block: String,
    pub port: usize,
    pub path: PathBuf,
}

impl FromStr for LogTarget {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let err = || format!("expected block.port=path, got '{s}'");
        let (target, path) = s.split_once('=').ok_or_else(err)?;
        let (block, port) = target.rsplit_once('.').ok_or_else(err)?;
        let port = port.parse().map_err(|_| err())?;
        if block.is_empty() || path.is_empty() {
            return Err(err());
        }
        Ok(LogTarget {
            block: block.to_owned(),
            port,
            path: PathBuf::from(path),
        })
    }
}

impl fmt::Display for LogTarget {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}.{}={}", self.block, self.port, self.path.display())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Pacing {
    /// As fast as possible.
    #[default]
    Free,
    /// One step per step size of wall-clock time.
    #[value(name = "realtime")]
    RealTime,
}

#[derive(Debug, Clone, Default)]
pub struct RunConfig {
    /// `None` runs until `stop` is raised.
    pub steps: Option<u64>,
    pub pacing: Pacing,
    pub log_targets: Vec<LogTarget>,
    /// Echoed into the report. Apply them to the plan before building.
    pub parameter_overrides: Vec<ParameterOverride>,
    pub stop: Option<Arc<AtomicBool>>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BlockTime {
    pub block: String,
    pub seconds: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunReport {
    pub executed_steps: u64,
    pub step_size: f64,
    pub final_time: f64,
    pub pacing: Pacing,
    pub stopped: bool,
    pub wall_time: f64,
    /// Time spent inside each block's `output`, in schedule order.
    pub block_time: Vec<BlockTime>,
    /// Real-time steps that finished after their period ended.
    pub overruns: u64,
    /// Mean delay between a step's due time and its actual start.
    pub mean_start_lag: Option<f64>,
    /// The real-time loop ran under the operating system's real-time
    /// scheduling policy. Needs privilege; without it pacing still works
    /// but other processes can delay steps.
    pub realtime_priority: bool,
    pub overrides: Vec<String>,
    pub plugins: Vec<PluginInfo>,
}

#[derive(Debug, Clone, Copy)]
struct InputBinding {
    spec: PortSpec,
    buffer: usize,
    latched: bool,
}

#[derive(Debug, Clone, Copy)]
struct OutputBinding {
    spec: PortSpec,
    buffer: usize,
}

#[derive(Debug, Default)]
struct Bindings {
    inputs: Vec<InputBinding>,
    outputs: Vec<OutputBinding>,
}

struct Slot {
    name: String,
    params: Parameters,
    block: Box<dyn Block>,
    bindings: Bindings,
    written: Vec<bool>,
    initialized: bool,
    terminated: bool,
    busy: Duration,
}

struct Shared {
    configuration: Parameters,
    step_size: f64,
    step_index: u64,
    buffers: Vec<Signal>,
    latched: Vec<Option<Signal>>,
}

struct Ctx<'a> {
    name: &'a str,
    params: &'a Parameters,
    configuration: &'a Parameters,
    step_size: f64,
    step_index: u64,
    bindings: &'a Bindings,
    buffers: &'a mut [Signal],
    latched: &'a [Option<Signal>],
    written: &'a mut [bool],
}

impl BlockContext for Ctx<'_> {
    fn instance_name(&self) -> &str {
        self.name
    }

    fn parameter(&self, name: &str) -> Option<ParamValue> {
        self.params.get(name).cloned()
    }

    fn configuration(&self, key: &str) -> Option<ParamValue> {
        self.configuration.get(key).cloned()
    }

    fn step_size(&self) -> f64 {
        self.step_size
    }

    fn time(&self) -> f64 {
        self.step_index as f64 * self.step_size
    }

    fn step_index(&self) -> u64 {
        self.step_index
    }

    fn input_count(&self) -> usize {
        self.bindings.inputs.len()
    }

    fn output_count(&self) -> usize {
        self.bindings.outputs.len()
    }

    fn input_spec(&self, index: usize) -> Option<PortSpec> {
        self.bindings.inputs.get(index).map(|b| b.spec)
    }

    fn output_spec(&self, index: usize) -> Option<PortSpec> {
        self.bindings.outputs.get(index).map(|b| b.spec)
    }

    fn input(&self, index: usize) -> Option<SignalRef<'_>> {
        let b = self.bindings.inputs.get(index)?;
        if b.latched {
            self.latched[b.buffer].as_ref().map(Signal::as_ref)
        } else {
            Some(self.buffers[b.buffer].as_ref())
        }
    }

    fn set_output(&mut self, index: usize, values: SignalRef<'_>) -> Result<(), BlockError> {
        let b = self
            .bindings
            .outputs
            .get(index)
            .ok_or_else(|| BlockError::new(format!("no output port {index}")))?;
        self.buffers[b.buffer]
            .copy_from(values)
            .map_err(|e| BlockError::new(format!("output {index}: {e}")))?;
        self.written[index] = true;
        Ok(())
    }
}

fn call<R>(slot: &mut Slot, shared: &mut Shared, f: impl FnOnce(&mut dyn Block, &mut dyn BlockContext) -> R) -> R {
    let Slot {
        name,
        params,
        block,
        bindings,
        written,
        ..
    } = slot;
    let mut ctx = Ctx {
        name,
        params,
        configuration: &shared.configuration,
        step_size: shared.step_size,
        step_index: shared.step_index,
        bindings,
        buffers: &mut shared.buffers,
        latched: &shared.latched,
        written,
    };
    f(block.as_mut(), &mut ctx)
}

/// Runs `declare_ports` outside an engine with the context a build would
/// provide: parameters, configuration and step size, but no ports yet.
pub fn declare_ports(
    block: &mut dyn Block,
    name: &str,
    params: &Parameters,
    configuration: &Parameters,
    step_size: f64,
) -> Result<Vec<PortSpec>, BlockError> {
    let bindings = Bindings::default();
    let mut ctx = Ctx {
        name,
        params,
        configuration,
        step_size,
        step_index: 0,
        bindings: &bindings,
        buffers: &mut [],
        latched: &[],
        written: &mut [],
    };
    block.declare_ports(&mut ctx)
}

struct LogWriter {
    path: PathBuf,
    buffer: usize,
    out: BufWriter<File>,
    line: String,
}

impl LogWriter {
    fn io_error(&self, e: std::io::Error) -> EngineError {
        EngineError::Log {
            path: self.path.clone(),
            message: e.to_string(),
        }
    }
}

/// A built graph: blocks instantiated, widths resolved, buffers allocated and
/// every block initialized. Dropping an engine terminates its blocks.
pub struct Engine {
    slots: Vec<Slot>,
    shared: Shared,
    latch_list: Vec<usize>,
    plugins: Vec<PluginInfo>,
    finished: bool,
}

impl fmt::Debug for Engine {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Engine")
            .field("blocks", &self.block_names())
            .field("step_index", &self.shared.step_index)
            .finish()
    }
}

impl Engine {
    pub fn build(plan: EnginePlan, factory: &dyn BlockFactory) -> Result<Engine, EngineError> {
        if !(plan.step_size.is_finite() && plan.step_size > 0.0) {
            return Err(EngineError::InvalidPlan(format!(
                "step size must be positive, got {}",
                plan.step_size
            )));
        }
        let mut seen = HashSet::new();
        if let Some(dup) = plan.blocks.iter().find(|b| !seen.insert(b.name.as_str())) {
            return Err(EngineError::InvalidPlan(format!("duplicate block name '{}'", dup.name)));
        }
        let n = plan.blocks.len();
        if let Some(l) = plan.links.iter().find(|l| l.from.block >= n || l.to.block >= n) {
            return Err(EngineError::InvalidPlan(format!("link {l:?} references a missing block")));
        }

        let mut slots = Vec::with_capacity(n);
        let mut plugins = BTreeMap::new();
        for b in plan.blocks {
            let block = factory.create(&b.library, &b.label).map_err(|source| EngineError::Plugin {
                block: b.name.clone(),
                source,
            })?;
            if let Some(info) = factory.plugin_info(&b.library) {
                plugins.insert(b.library.clone(), info);
            }
            slots.push(Slot {
                name: b.name,
                params: b.parameters,
                block,
                bindings: Bindings::default(),
                written: Vec::new(),
                initialized: false,
                terminated: false,
                busy: Duration::ZERO,
            });
        }
        let mut engine = Engine {
            slots,
            shared: Shared {
                configuration: plan.configuration,
                step_size: plan.step_size,
                step_index: 0,
                buffers: Vec::new(),
                latched: Vec::new(),
            },
            latch_list: Vec::new(),
            plugins: plugins.into_values().collect(),
            finished: false,
        };

        let mut declared = Vec::with_capacity(n);
        for slot in &mut engine.slots {
            let ports = call(slot, &mut engine.shared, |b, c| b.declare_ports(c))
                .map_err(|e| e.message().to_owned())
                .and_then(|p| BlockPorts::from_declared(&p))
                .map_err(|message| EngineError::Declare {
                    block: slot.name.clone(),
                    message,
                })?;
            declared.push(ports);
        }

        let names: Vec<&str> = engine.slots.iter().map(|s| s.name.as_str()).collect();
        let resolved = wiring::resolve(&names, &declared, &plan.links).map_err(EngineError::Wiring)?;

        for link in &plan.links {
            let spec = &resolved[link.to.block].inputs[link.to.port];
            if spec.feedthrough && link.from.block >= link.to.block {
                return Err(EngineError::OrderViolation {
                    producer: names[link.from.block].to_owned(),
                    consumer: names[link.to.block].to_owned(),
                });
            }
        }

        let mut first_buffer = Vec::with_capacity(n);
        for (slot, ports) in engine.slots.iter_mut().zip(&resolved) {
            first_buffer.push(engine.shared.buffers.len());
            for spec in &ports.outputs {
                let width = spec.width.fixed().expect("resolved");
                slot.bindings.outputs.push(OutputBinding {
                    spec: *spec,
                    buffer: engine.shared.buffers.len(),
                });
                engine.shared.buffers.push(Signal::zeros(spec.dtype, width));
            }
            slot.written = vec![false; ports.outputs.len()];
        }
        engine.shared.latched = vec![None; engine.shared.buffers.len()];
        let mut driver: BTreeMap<(usize, usize), usize> = BTreeMap::new();
        for link in &plan.links {
            driver.insert((link.to.block, link.to.port), first_buffer[link.from.block] + link.from.port);
        }
        for (i, (slot, ports)) in engine.slots.iter_mut().zip(&resolved).enumerate() {
            for spec in &ports.inputs {
                let buffer = driver[&(i, spec.index)];
                let latched = !spec.feedthrough;
                if latched && engine.shared.latched[buffer].is_none() {
                    engine.shared.latched[buffer] = Some(engine.shared.buffers[buffer].clone());
                    engine.latch_list.push(buffer);
                }
                slot.bindings.inputs.push(InputBinding {
                    spec: *spec,
                    buffer,
                    latched,
                });
            }
        }

        for i in 0..engine.slots.len() {
            let slot = &mut engine.slots[i];
            if let Err(e) = call(slot, &mut engine.shared, |b, c| b.initialize(c)) {
                let block = slot.name.clone();
                let _ = engine.terminate();
                return Err(EngineError::Initialize {
                    block,
                    message: e.message().to_owned(),
                });
            }
            slot.initialized = true;
        }
        Ok(engine)
    }

    pub fn block_names(&self) -> Vec<&str> {
        self.slots.iter().map(|s| s.name.as_str()).collect()
    }

    pub fn step_size(&self) -> f64 {
        self.shared.step_size
    }

    /// Number of completed steps.
    pub fn step_index(&self) -> u64 {
        self.shared.step_index
    }

    pub fn plugins(&self) -> &[PluginInfo] {
        &self.plugins
    }

    /// Resolved `(inputs, outputs)` of a block.
    pub fn ports(&self, block: &str) -> Option<(Vec<PortSpec>, Vec<PortSpec>)> {
        let slot = self.slots.iter().find(|s| s.name == block)?;
        Some((
            slot.bindings.inputs.iter().map(|b| b.spec).collect(),
            slot.bindings.outputs.iter().map(|b| b.spec).collect(),
        ))
    }

    /// Latest value of an output port.
    pub fn output(&self, block: &str, port: usize) -> Option<SignalRef<'_>> {
        self.output_buffer(block, port).map(|b| self.shared.buffers[b].as_ref())
    }

    fn output_buffer(&self, block: &str, port: usize) -> Option<usize> {
        let slot = self.slots.iter().find(|s| s.name == block)?;
        slot.bindings.outputs.get(port).map(|b| b.buffer)
    }

    /// Executes one step: every block's `output` in schedule order.
    pub fn step(&mut self) -> Result<(), EngineError> {
        if self.finished {
            return Err(EngineError::Terminated);
        }
        let step = self.shared.step_index;
        for slot in &mut self.slots {
            slot.written.fill(false);
            let started = Instant::now();
            let result = call(slot, &mut self.shared, |b, c| b.output(c));
            slot.busy += started.elapsed();
            let fail = |message: String| EngineError::Step {
                step,
                block: slot.name.clone(),
                message,
            };
            if let Err(e) = result {
                return Err(fail(e.message().to_owned()));
            }
            if let Some(port) = slot.written.iter().position(|w| !w) {
                return Err(fail(format!("output {port} not written")));
            }
            for b in &slot.bindings.outputs {
                if b.spec.finite_only && !self.shared.buffers[b.buffer].is_finite() {
                    return Err(EngineError::NonFinite {
                        step,
                        block: slot.name.clone(),
                        port: b.spec.index,
                    });
                }
            }
        }
        for &b in &self.latch_list {
            let (buffers, latched) = (&self.shared.buffers, &mut self.shared.latched);
            if let Some(l) = latched[b].as_mut() {
                l.clone_from(&buffers[b]);
            }
        }
        self.shared.step_index += 1;
        Ok(())
    }

    /// Runs the configured number of steps, then terminates every block
    /// whether or not the run succeeded.
    pub fn run(&mut self, config: &RunConfig) -> Result<RunReport, EngineError> {
        let result = self.run_steps(config);
        let terminated = self.terminate();
        let report = result?;
        terminated?;
        Ok(report)
    }

    fn run_steps(&mut self, config: &RunConfig) -> Result<RunReport, EngineError> {
        if self.finished {
            return Err(EngineError::Terminated);
        }
        let h = self.shared.step_size;
        let realtime = config.pacing == Pacing::RealTime;
        if realtime && h < MIN_REALTIME_STEP {
            return Err(EngineError::Pacing(format!(
                "real-time pacing needs a step size of at least {MIN_REALTIME_STEP} s, got {h} s"
            )));
        }
        if config.steps.is_none() && config.stop.is_none() {
            return Err(EngineError::InvalidPlan("an unbounded run needs a stop signal".into()));
        }
        let mut logs = self.open_logs(&config.log_targets)?;

        let stop_requested = || config.stop.as_ref().is_some_and(|s| s.load(Ordering::Relaxed));
        let due = |k: u64| Duration::from_secs_f64(h * k as f64);
        let spin = Duration::from_micros(200);
        let priority = if realtime { crate::priority::RealtimePriority::acquire() } else { None };
        let origin = Instant::now();
        let mut executed = 0u64;
        let mut overruns = 0u64;
        let mut lag = Duration::ZERO;
        let mut stopped = false;
        loop {
            if config.steps.is_some_and(|n| executed >= n) {
                break;
            }
            if stop_requested() {
                stopped = true;
                break;
            }
            if realtime {
                let target = origin + due(executed);
                sleep_until(target, spin);
                lag += Instant::now().saturating_duration_since(target);
            }
            self.step()?;
            self.write_logs(&mut logs)?;
            executed += 1;
            if realtime && Instant::now() > origin + due(executed) {
                overruns += 1;
            }
        }
        if realtime {
            sleep_until(origin + due(executed), spin);
        }
        for log in &mut logs {
            log.out.flush().map_err(|e| log.io_error(e))?;
        }
        let wall_time = origin.elapsed().as_secs_f64();

        Ok(RunReport {
            executed_steps: executed,
            step_size: h,
            final_time: executed as f64 * h,
            pacing: config.pacing,
            stopped,
            wall_time,
            block_time: self
                .slots
                .iter()
                .map(|s| BlockTime {
                    block: s.name.clone(),
                    seconds: s.busy.as_secs_f64(),
                })
                .collect(),
            overruns,
            mean_start_lag: (realtime && executed > 0).then(|| lag.as_secs_f64() / executed as f64),
            realtime_priority: priority.is_some(),
            overrides: config.parameter_overrides.iter().map(|o| o.to_string()).collect(),
            plugins: self.plugins.clone(),
        })
    }

    fn open_logs(&self, targets: &[LogTarget]) -> Result<Vec<LogWriter>, EngineError> {
        let mut logs = Vec::with_capacity(targets.len());
        for t in targets {
            let buffer = self
                .output_buffer(&t.block, t.port)
                .ok_or_else(|| EngineError::UnknownLogTarget(format!("{}.{}", t.block, t.port)))?;
            let io = |e: std::io::Error| EngineError::Log {
                path: t.path.clone(),
                message: e.to_string(),
            };
            let mut out = BufWriter::new(File::create(&t.path).map_err(io)?);
            writeln!(out, "{}", logfmt::header(self.shared.buffers[buffer].width())).map_err(io)?;
            logs.push(LogWriter {
                path: t.path.clone(),
                buffer,
                out,
                line: String::new(),
            });
        }
        Ok(logs)
    }

    fn write_logs(&self, logs: &mut [LogWriter]) -> Result<(), EngineError> {
        let time = (self.shared.step_index - 1) as f64 * self.shared.step_size;
        for log in logs {
            log.line.clear();
            logfmt::row(&mut log.line, time, self.shared.buffers[log.buffer].as_ref());
            log.line.push('\n');
            if let Err(e) = log.out.write_all(log.line.as_bytes()) {
                return Err(log.io_error(e));
            }
        }
        Ok(())
    }

    /// Terminates every initialized block once, in schedule order. All
    /// blocks are visited even if one fails; the first failure is returned.
    pub fn terminate(&mut self) -> Result<(), EngineError> {
        self.finished = true;
        let mut first = None;
        for slot in &mut self.slots {
            if !slot.initialized || slot.terminated {
                continue;
            }
            slot.terminated = true;
            if let Err(e) = call(slot, &mut self.shared, |b, c| b.terminate(c)) {
                first.get_or_insert(EngineError::Terminate {
                    block: slot.name.clone(),
                    message: e.message().to_owned(),
                });
            }
        }
        first.map_or(Ok(()), Err)
    }
}

impl Drop for Engine {
    fn drop(&mut self) {
        let _ = self.terminate();
    }
}

/// Sleeps until `spin` before `target`, then busy-waits; OS sleeps often
/// overshoot by hundreds of microseconds. The wait yields so another
/// real-time thread at the same level is not shut out.
fn sleep_until(target: Instant, spin: Duration) {
    loop {
        let now = Instant::now();
        if now >= target {
            return;
        }
        let left = target - now;
        if left > spin {
            std::thread::sleep(left - spin);
        } else {
            std::thread::yield_now();
        }
    }
}
