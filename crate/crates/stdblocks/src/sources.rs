use std::f64::consts::PI;

use blockflow_core::{Block, BlockContext, BlockError, DataType, PortSpec, Width};

/// Emits `value` every step.
#[derive(Debug, Default)]
pub struct Constant {
    value: Vec<f64>,
}

impl Block for Constant {
    fn declare_ports(&mut self, ctx: &mut dyn BlockContext) -> Result<Vec<PortSpec>, BlockError> {
        self.value = ctx.param_vec("value")?;
        if self.value.is_empty() {
            return Err(BlockError::new("parameter 'value' must not be empty"));
        }
        Ok(vec![PortSpec::output(0, DataType::Float64, Width::Fixed(self.value.len())).finite_only()])
    }

    fn initialize(&mut self, _ctx: &mut dyn BlockContext) -> Result<(), BlockError> {
        Ok(())
    }

    fn output(&mut self, ctx: &mut dyn BlockContext) -> Result<(), BlockError> {
        ctx.set_output_f64(0, &self.value)
    }
}

/// `offset + amplitude * sin(2π * frequency * t + phase)`.
#[derive(Debug, Default)]
pub struct SineSource {
    amplitude: f64,
    frequency: f64,
    phase: f64,
    offset: f64,
}

impl Block for SineSource {
    fn declare_ports(&mut self, ctx: &mut dyn BlockContext) -> Result<Vec<PortSpec>, BlockError> {
        self.amplitude = ctx.param_f64_or("amplitude", 1.0)?;
        self.frequency = ctx.param_f64("frequency")?;
        self.phase = ctx.param_f64_or("phase", 0.0)?;
        self.offset = ctx.param_f64_or("offset", 0.0)?;
        Ok(vec![PortSpec::output(0, DataType::Float64, Width::Fixed(1)).finite_only()])
    }

    fn initialize(&mut self, _ctx: &mut dyn BlockContext) -> Result<(), BlockError> {
        if !(self.frequency >= 0.0) {
            return Err(BlockError::new(format!(
                "frequency must be non-negative, got {}",
                self.frequency
            )));
        }
        Ok(())
    }

    fn output(&mut self, ctx: &mut dyn BlockContext) -> Result<(), BlockError> {
        let t = ctx.time();
        let y = self.offset + self.amplitude * (2.0 * PI * self.frequency * t + self.phase).sin();
        ctx.set_output_f64(0, &[y])
    }
}

/// Emits `initial` (default 0) before `step_time` and `value` from then on.
#[derive(Debug, Default)]
pub struct StepSource {
    before: Vec<f64>,
    after: Vec<f64>,
    step_time: f64,
}

impl Block for StepSource {
    fn declare_ports(&mut self, ctx: &mut dyn BlockContext) -> Result<Vec<PortSpec>, BlockError> {
        self.after = ctx.param_vec("value")?;
        self.step_time = ctx.param_f64("step_time")?;
        self.before = match ctx.parameter("initial") {
            Some(_) => ctx.param_vec("initial")?,
            None => vec![0.0],
        };
        let width = self.after.len().max(self.before.len());
        for (name, v) in [("value", &self.after), ("initial", &self.before)] {
            if v.len() != 1 && v.len() != width {
                return Err(BlockError::new(format!(
                    "parameter '{name}' has {} elements, expected 1 or {width}",
                    v.len()
                )));
            }
        }
        self.after = crate::broadcast(&self.after, width);
        self.before = crate::broadcast(&self.before, width);
        Ok(vec![PortSpec::output(0, DataType::Float64, Width::Fixed(width)).finite_only()])
    }

    fn initialize(&mut self, _ctx: &mut dyn BlockContext) -> Result<(), BlockError> {
        Ok(())
    }

    fn output(&mut self, ctx: &mut dyn BlockContext) -> Result<(), BlockError> {
        // k * step_size may round to just below step_time.
        let switched = ctx.time() >= self.step_time - 1e-9 * ctx.step_size();
        let y = if switched { &self.after } else { &self.before };
        ctx.set_output_f64(0, y)
    }
}
