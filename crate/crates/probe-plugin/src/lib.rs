//! Instrumented blocks for engine and loader tests.
//!
//! `Probe` appends one line per lifecycle call (`<instance> <call>`) to the
//! file named by its `trace` parameter and emits the step index. With
//! `fail_initialize = true` its initialize call fails. `EmitNaN` writes NaN
//! on a finite-only port at step `at_step`. `Unbuildable` is listed but its
//! constructor panics.

use std::fs::OpenOptions;
use std::io::Write;

use blockflow_core::{Block, BlockContext, BlockError, DataType, PortSpec, Width};

#[derive(Debug, Default)]
pub struct Probe {
    trace: Option<String>,
    inputs: usize,
    fail_initialize: bool,
}

impl Probe {
    fn record(&self, ctx: &dyn BlockContext, call: &str) -> Result<(), BlockError> {
        let Some(path) = &self.trace else { return Ok(()) };
        let mut file = OpenOptions::new()
            .create(true)
            .append(true)
            .open(path)
            .map_err(|e| BlockError::new(format!("trace '{path}': {e}")))?;
        writeln!(file, "{} {call}", ctx.instance_name()).map_err(|e| BlockError::new(e.to_string()))
    }
}

impl Block for Probe {
    fn declare_ports(&mut self, ctx: &mut dyn BlockContext) -> Result<Vec<PortSpec>, BlockError> {
        self.trace = ctx.parameter("trace").and_then(|v| v.as_str().map(str::to_owned));
        self.inputs = ctx.parameter("inputs").and_then(|v| v.as_i64()).unwrap_or(0) as usize;
        self.fail_initialize = ctx.parameter("fail_initialize").and_then(|v| v.as_bool()).unwrap_or(false);
        self.record(ctx, "declare_ports")?;
        let mut ports: Vec<PortSpec> = (0..self.inputs)
            .map(|i| PortSpec::input(i, DataType::Float64, Width::Dynamic))
            .collect();
        ports.push(PortSpec::output(0, DataType::Float64, Width::Fixed(1)));
        Ok(ports)
    }

    fn initialize(&mut self, ctx: &mut dyn BlockContext) -> Result<(), BlockError> {
        self.record(ctx, "initialize")?;
        if self.fail_initialize {
            return Err(BlockError::new("probe initialize failure"));
        }
        Ok(())
    }

    fn output(&mut self, ctx: &mut dyn BlockContext) -> Result<(), BlockError> {
        self.record(ctx, "output")?;
        let k = ctx.step_index() as f64;
        ctx.set_output_f64(0, &[k])
    }

    fn terminate(&mut self, ctx: &mut dyn BlockContext) -> Result<(), BlockError> {
        self.record(ctx, "terminate")
    }
}

#[derive(Debug, Default)]
pub struct EmitNaN {
    at_step: u64,
}

impl Block for EmitNaN {
    fn declare_ports(&mut self, ctx: &mut dyn BlockContext) -> Result<Vec<PortSpec>, BlockError> {
        self.at_step = ctx.parameter("at_step").and_then(|v| v.as_i64()).unwrap_or(0) as u64;
        Ok(vec![PortSpec::output(0, DataType::Float64, Width::Fixed(1)).finite_only()])
    }

    fn initialize(&mut self, _ctx: &mut dyn BlockContext) -> Result<(), BlockError> {
        Ok(())
    }

    fn output(&mut self, ctx: &mut dyn BlockContext) -> Result<(), BlockError> {
        let y = if ctx.step_index() == self.at_step { f64::NAN } else { 1.0 };
        ctx.set_output_f64(0, &[y])
    }
}

/// Listed in the manifest, but construction always fails.
#[derive(Debug)]
pub struct Unbuildable;

impl Default for Unbuildable {
    fn default() -> Self {
        std::panic::set_hook(Box::new(|_| {}));
        panic!("Unbuildable cannot be constructed")
    }
}

impl Block for Unbuildable {
    fn declare_ports(&mut self, _ctx: &mut dyn BlockContext) -> Result<Vec<PortSpec>, BlockError> {
        Ok(Vec::new())
    }

    fn initialize(&mut self, _ctx: &mut dyn BlockContext) -> Result<(), BlockError> {
        Ok(())
    }

    fn output(&mut self, _ctx: &mut dyn BlockContext) -> Result<(), BlockError> {
        Ok(())
    }
}

blockflow_core::export_plugin! {
    "Probe" => Probe,
    "EmitNaN" => EmitNaN,
    "Unbuildable" => Unbuildable,
}
