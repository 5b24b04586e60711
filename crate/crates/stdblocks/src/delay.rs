use blockflow_core::{Block, BlockContext, BlockError, DataType, PortSpec};

/// One-step delay: emits `initial` on the first step, then the previous
/// step's input.
///
/// The input is declared without direct feedthrough, so the engine hands it
/// the value produced in the previous step and feedback loops through this
/// block are schedulable.
#[derive(Debug, Default)]
pub struct UnitDelay {
    initial: Vec<f64>,
    started: bool,
}

impl Block for UnitDelay {
    fn declare_ports(&mut self, ctx: &mut dyn BlockContext) -> Result<Vec<PortSpec>, BlockError> {
        self.initial = match ctx.parameter("initial") {
            Some(_) => ctx.param_vec("initial")?,
            None => vec![0.0],
        };
        if self.initial.is_empty() {
            return Err(BlockError::new("parameter 'initial' must not be empty"));
        }
        let width = crate::width_of(&self.initial);
        Ok(vec![
            PortSpec::input(0, DataType::Float64, width).no_feedthrough(),
            PortSpec::output(0, DataType::Float64, width).finite_only(),
        ])
    }

    fn initialize(&mut self, ctx: &mut dyn BlockContext) -> Result<(), BlockError> {
        self.initial = crate::broadcast(&self.initial, ctx.output_width(0)?);
        self.started = false;
        Ok(())
    }

    fn output(&mut self, ctx: &mut dyn BlockContext) -> Result<(), BlockError> {
        if !self.started {
            self.started = true;
            return ctx.set_output_f64(0, &self.initial);
        }
        let previous = ctx.input_f64(0)?.to_vec();
        ctx.set_output_f64(0, &previous)
    }
}
