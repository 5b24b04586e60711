//! Mock engine context and block conformance checks.
//!
//! [`Harness`] drives one block through its lifecycle with no engine present,
//! applying the same port semantics as the real engine: an input without
//! direct feedthrough observes the value supplied on the previous step (zero
//! on the first step).

use crate::block::{Block, BlockError, Lifecycle, Stage};
use crate::context::BlockContext;
use crate::param::{ParamValue, Parameters};
use crate::signal::{Signal, SignalRef};
use crate::types::{split_ports, DataType, PortSpec, Width};
use crate::export::Constructor;

/// Stand-alone implementation of [`BlockContext`].
#[derive(Debug, Clone)]
pub struct MockContext {
    pub name: String,
    pub params: Parameters,
    pub config: Parameters,
    pub step_size: f64,
    pub step_index: u64,
    pub inputs: Vec<PortSpec>,
    pub outputs: Vec<PortSpec>,
    pub input_values: Vec<Signal>,
    pub output_values: Vec<Signal>,
    pub written: Vec<bool>,
}

impl MockContext {
    pub fn new(name: &str, params: Parameters) -> Self {
        MockContext {
            name: name.to_owned(),
            params,
            config: Parameters::new(),
            step_size: 0.01,
            step_index: 0,
            inputs: Vec::new(),
            outputs: Vec::new(),
            input_values: Vec::new(),
            output_values: Vec::new(),
            written: Vec::new(),
        }
    }
}

impl BlockContext for MockContext {
    fn instance_name(&self) -> &str {
        &self.name
    }

    fn parameter(&self, name: &str) -> Option<ParamValue> {
        self.params.get(name).cloned()
    }

    fn configuration(&self, key: &str) -> Option<ParamValue> {
        self.config.get(key).cloned()
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
        self.inputs.len()
    }

    fn output_count(&self) -> usize {
        self.outputs.len()
    }

    fn input_spec(&self, index: usize) -> Option<PortSpec> {
        self.inputs.get(index).copied()
    }

    fn output_spec(&self, index: usize) -> Option<PortSpec> {
        self.outputs.get(index).copied()
    }

    fn input(&self, index: usize) -> Option<SignalRef<'_>> {
        self.input_values.get(index).map(Signal::as_ref)
    }

    fn set_output(&mut self, index: usize, values: SignalRef<'_>) -> Result<(), BlockError> {
        let slot = self
            .output_values
            .get_mut(index)
            .ok_or_else(|| BlockError::new(format!("no output port {index}")))?;
        slot.copy_from(values).map_err(BlockError::new)?;
        self.written[index] = true;
        Ok(())
    }
}

/// Runs a single block against a [`MockContext`].
pub struct Harness {
    block: Lifecycle<Box<dyn Block>>,
    pub ctx: MockContext,
    declared: Option<Vec<PortSpec>>,
    previous: Vec<Option<Signal>>,
}

impl Harness {
    pub fn new(block: Box<dyn Block>, params: Parameters) -> Self {
        Harness {
            block: Lifecycle::new(block),
            ctx: MockContext::new("block", params),
            declared: None,
            previous: Vec::new(),
        }
    }

    pub fn with_step_size(mut self, step_size: f64) -> Self {
        self.ctx.step_size = step_size;
        self
    }

    pub fn with_config(mut self, key: &str, value: ParamValue) -> Self {
        self.ctx.config.insert(key, value);
        self
    }

    pub fn stage(&self) -> Stage {
        self.block.stage()
    }

    pub fn declare(&mut self) -> Result<Vec<PortSpec>, BlockError> {
        if let Some(ports) = &self.declared {
            return Ok(ports.clone());
        }
        let ports = self.block.declare_ports(&mut self.ctx)?;
        split_ports(&ports).map_err(BlockError::new)?;
        self.declared = Some(ports.clone());
        Ok(ports)
    }

    /// Declares ports (if needed), resolves every dynamic width to
    /// `dynamic_width`, allocates buffers and initializes the block.
    pub fn start(&mut self, dynamic_width: usize) -> Result<(), BlockError> {
        let ports = self.declare()?;
        let (inputs, outputs) = split_ports(&ports).map_err(BlockError::new)?;
        let resolve = |p: PortSpec| match p.width {
            Width::Dynamic => p.with_width(Width::Fixed(dynamic_width)),
            Width::Fixed(_) => p,
        };
        self.ctx.inputs = inputs.into_iter().map(resolve).collect();
        self.ctx.outputs = outputs.into_iter().map(resolve).collect();
        self.ctx.input_values = self.ctx.inputs.iter().map(zeros).collect();
        self.ctx.output_values = self.ctx.outputs.iter().map(zeros).collect();
        self.ctx.written = vec![false; self.ctx.outputs.len()];
        self.previous = vec![None; self.ctx.inputs.len()];
        self.block.initialize(&mut self.ctx)
    }

    /// Feeds one step of inputs and returns every output.
    pub fn step(&mut self, inputs: &[SignalRef<'_>]) -> Result<Vec<Signal>, BlockError> {
        if inputs.len() != self.ctx.inputs.len() {
            return Err(BlockError::new(format!(
                "harness: {} inputs supplied, block has {}",
                inputs.len(),
                self.ctx.inputs.len()
            )));
        }
        for (i, value) in inputs.iter().enumerate() {
            let spec = self.ctx.inputs[i];
            let fresh = value.to_owned();
            let visible = if spec.feedthrough {
                fresh.clone()
            } else {
                self.previous[i].clone().unwrap_or_else(|| zeros(&spec))
            };
            self.ctx.input_values[i]
                .copy_from(visible.as_ref())
                .map_err(|e| BlockError::new(format!("harness input {i}: {e}")))?;
            self.previous[i] = Some(fresh);
        }
        self.ctx.written.iter_mut().for_each(|w| *w = false);
        self.block.output(&mut self.ctx)?;
        if let Some(missing) = self.ctx.written.iter().position(|w| !w) {
            return Err(BlockError::new(format!("output {missing} not written")));
        }
        for (spec, value) in self.ctx.outputs.iter().zip(&self.ctx.output_values) {
            if spec.finite_only && !value.is_finite() {
                return Err(BlockError::new(format!(
                    "non-finite value on output {} at step {}",
                    spec.index, self.ctx.step_index
                )));
            }
        }
        self.ctx.step_index += 1;
        Ok(self.ctx.output_values.clone())
    }

    /// Float-only convenience over [`Harness::step`].
    pub fn step_f64(&mut self, inputs: &[&[f64]]) -> Result<Vec<Vec<f64>>, BlockError> {
        let refs: Vec<SignalRef<'_>> = inputs.iter().map(|v| SignalRef::Float64(v)).collect();
        self.step(&refs)?
            .into_iter()
            .map(|s| match s {
                Signal::Float64(v) => Ok(v),
                other => Err(BlockError::new(format!("output is {}", other.dtype()))),
            })
            .collect()
    }

    pub fn terminate(&mut self) -> Result<(), BlockError> {
        self.block.terminate(&mut self.ctx)
    }
}

fn zeros(spec: &PortSpec) -> Signal {
    Signal::zeros(spec.dtype, spec.width.fixed().unwrap_or(0))
}

/// What a conformance run observed.
#[derive(Debug, Clone)]
pub struct ConformanceReport {
    pub label: String,
    pub ports: Vec<PortSpec>,
    pub outputs: Vec<Vec<Signal>>,
}

/// Checks the block contract for one label and parameter set.
///
/// * the declared port list is well formed;
/// * `terminate` before `initialize` is a no-op and `output` before
///   `initialize` is rejected;
/// * two fresh instances fed the same input sequence produce identical
///   output sequences;
/// * dynamic ports adopt the resolved width (checked at widths 1 and 3);
/// * every output is written each step with its resolved width;
/// * a second `terminate` succeeds without effect.
pub fn check_conformance(
    label: &str,
    ctor: Constructor,
    params: &Parameters,
    step_size: f64,
    steps: usize,
) -> Result<ConformanceReport, String> {
    let fail = |what: &str, e: &dyn std::fmt::Display| format!("{label}: {what}: {e}");

    // Terminate before initialize is a no-op; output is rejected.
    let mut idle = Harness::new(ctor(), params.clone()).with_step_size(step_size);
    idle.terminate().map_err(|e| fail("terminate before initialize", &e))?;
    if idle.declare().is_ok() && idle.block.output(&mut idle.ctx).is_ok() {
        return Err(format!("{label}: output accepted before initialize"));
    }

    let ports = Harness::new(ctor(), params.clone())
        .with_step_size(step_size)
        .declare()
        .map_err(|e| fail("declare_ports", &e))?;
    let has_dynamic = ports.iter().any(|p| p.width == Width::Dynamic);
    let widths: &[usize] = if has_dynamic { &[1, 3] } else { &[1] };

    let mut recorded = Vec::new();
    for &width in widths {
        let first = drive(ctor, params, step_size, steps, width).map_err(|e| fail("run", &e))?;
        let second = drive(ctor, params, step_size, steps, width).map_err(|e| fail("rerun", &e))?;
        if first != second {
            return Err(format!("{label}: outputs differ between identical runs"));
        }
        for step in &first {
            for (port, value) in ports.iter().filter(|p| !p.is_input()).zip(step) {
                let expected = port.width.fixed().unwrap_or(width);
                if value.width() != expected || value.dtype() != port.dtype {
                    return Err(format!(
                        "{label}: output {} has {} x {}, expected {} x {}",
                        port.index,
                        value.dtype(),
                        value.width(),
                        port.dtype,
                        expected
                    ));
                }
            }
        }
        if recorded.is_empty() {
            recorded = first;
        }
    }
    Ok(ConformanceReport {
        label: label.to_owned(),
        ports,
        outputs: recorded,
    })
}

fn drive(
    ctor: Constructor,
    params: &Parameters,
    step_size: f64,
    steps: usize,
    width: usize,
) -> Result<Vec<Vec<Signal>>, BlockError> {
    let mut h = Harness::new(ctor(), params.clone()).with_step_size(step_size);
    h.start(width)?;
    let specs = h.ctx.inputs.clone();
    let mut out = Vec::with_capacity(steps);
    for k in 0..steps {
        let stimulus: Vec<Signal> = specs.iter().map(|s| stimulus(s, k)).collect();
        let refs: Vec<SignalRef<'_>> = stimulus.iter().map(Signal::as_ref).collect();
        out.push(h.step(&refs)?);
    }
    h.terminate()?;
    h.terminate()?;
    if h.stage() != Stage::Terminated {
        return Err(BlockError::new("block did not reach the terminated stage"));
    }
    Ok(out)
}

/// Deterministic, bounded test stimulus for input `spec` at step `k`.
fn stimulus(spec: &PortSpec, k: usize) -> Signal {
    let width = spec.width.fixed().unwrap_or(1);
    match spec.dtype {
        DataType::Float64 => Signal::Float64(
            (0..width)
                .map(|i| (0.37 * k as f64 + 1.3 * (i + spec.index) as f64).sin())
                .collect(),
        ),
        DataType::Int32 => Signal::Int32((0..width).map(|i| ((k * 7 + i) % 11) as i32 - 5).collect()),
        DataType::Bool => Signal::Bool((0..width).map(|i| (k + i).is_multiple_of(3)).collect()),
    }
}
