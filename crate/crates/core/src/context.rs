use crate::block::BlockError;
use crate::param::ParamValue;
use crate::signal::SignalRef;
use crate::types::PortSpec;

/// Everything a block may learn from, or hand back to, its engine.
///
/// Blocks have no other channel to the engine. Port queries return `None`
/// until ports have been declared and resolved; step size and time are
/// constant for the duration of one lifecycle call.
pub trait BlockContext {
    fn instance_name(&self) -> &str;

    fn parameter(&self, name: &str) -> Option<ParamValue>;

    /// Model-level configuration entry shared by every block.
    fn configuration(&self, key: &str) -> Option<ParamValue>;

    /// Fixed step size in seconds.
    fn step_size(&self) -> f64;

    /// Simulation time of the current step, `step_index * step_size`.
    fn time(&self) -> f64;

    fn step_index(&self) -> u64;

    fn input_count(&self) -> usize;

    fn output_count(&self) -> usize;

    /// Resolved input port (no dynamic widths remain after declaration).
    fn input_spec(&self, index: usize) -> Option<PortSpec>;

    fn output_spec(&self, index: usize) -> Option<PortSpec>;

    fn input(&self, index: usize) -> Option<SignalRef<'_>>;

    /// Writes a whole output port. Width and dtype must match the resolved spec.
    fn set_output(&mut self, index: usize, values: SignalRef<'_>) -> Result<(), BlockError>;

    fn require(&self, name: &str) -> Result<ParamValue, BlockError> {
        self.parameter(name)
            .ok_or_else(|| BlockError::new(format!("missing parameter '{name}'")))
    }

    fn param_f64(&self, name: &str) -> Result<f64, BlockError> {
        let value = self.require(name)?;
        value.as_f64().ok_or_else(|| wrong_kind(name, "number", &value))
    }

    fn param_f64_or(&self, name: &str, default: f64) -> Result<f64, BlockError> {
        match self.parameter(name) {
            None => Ok(default),
            Some(value) => value.as_f64().ok_or_else(|| wrong_kind(name, "number", &value)),
        }
    }

    fn param_vec(&self, name: &str) -> Result<Vec<f64>, BlockError> {
        let value = self.require(name)?;
        value
            .to_f64_vec()
            .ok_or_else(|| wrong_kind(name, "number or number vector", &value))
    }

    fn param_str(&self, name: &str) -> Result<String, BlockError> {
        let value = self.require(name)?;
        value
            .as_str()
            .map(str::to_owned)
            .ok_or_else(|| wrong_kind(name, "string", &value))
    }

    fn input_f64(&self, index: usize) -> Result<&[f64], BlockError> {
        match self.input(index) {
            Some(signal) => signal
                .as_f64()
                .ok_or_else(|| BlockError::new(format!("input {index} is not float64"))),
            None => Err(BlockError::new(format!("input {index} is not available"))),
        }
    }

    fn set_output_f64(&mut self, index: usize, values: &[f64]) -> Result<(), BlockError> {
        self.set_output(index, SignalRef::Float64(values))
    }

    fn input_width(&self, index: usize) -> Result<usize, BlockError> {
        self.input_spec(index)
            .and_then(|p| p.width.fixed())
            .ok_or_else(|| BlockError::new(format!("input {index} has no resolved width")))
    }

    fn output_width(&self, index: usize) -> Result<usize, BlockError> {
        self.output_spec(index)
            .and_then(|p| p.width.fixed())
            .ok_or_else(|| BlockError::new(format!("output {index} has no resolved width")))
    }
}

fn wrong_kind(name: &str, expected: &str, found: &ParamValue) -> BlockError {
    BlockError::new(format!(
        "parameter '{name}' must be a {expected}, found {}",
        found.kind().name()
    ))
}
