use std::fmt;

use crate::context::BlockContext;
use crate::types::PortSpec;

/// Failure reported by a block lifecycle call.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BlockError {
    message: String,
}

impl BlockError {
    pub fn new(message: impl Into<String>) -> Self {
        BlockError {
            message: message.into(),
        }
    }

    pub fn message(&self) -> &str {
        &self.message
    }
}

impl fmt::Display for BlockError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

impl std::error::Error for BlockError {}

/// The contract an engine drives.
///
/// Calls arrive in the order `declare_ports`, `initialize`, `output` once per
/// step, `terminate`. Blocks may keep private state across `output` calls;
/// the engine never inspects it.
pub trait Block: Send {
    /// Lists every input and output port. Widths may be [`Width::Dynamic`].
    ///
    /// [`Width::Dynamic`]: crate::Width::Dynamic
    fn declare_ports(&mut self, ctx: &mut dyn BlockContext) -> Result<Vec<PortSpec>, BlockError>;

    /// Called once after widths are resolved and buffers allocated.
    fn initialize(&mut self, ctx: &mut dyn BlockContext) -> Result<(), BlockError>;

    /// Computes this step's outputs and advances internal state by one step.
    fn output(&mut self, ctx: &mut dyn BlockContext) -> Result<(), BlockError>;

    fn terminate(&mut self, _ctx: &mut dyn BlockContext) -> Result<(), BlockError> {
        Ok(())
    }
}

impl<B: Block + ?Sized> Block for Box<B> {
    fn declare_ports(&mut self, ctx: &mut dyn BlockContext) -> Result<Vec<PortSpec>, BlockError> {
        (**self).declare_ports(ctx)
    }

    fn initialize(&mut self, ctx: &mut dyn BlockContext) -> Result<(), BlockError> {
        (**self).initialize(ctx)
    }

    fn output(&mut self, ctx: &mut dyn BlockContext) -> Result<(), BlockError> {
        (**self).output(ctx)
    }

    fn terminate(&mut self, ctx: &mut dyn BlockContext) -> Result<(), BlockError> {
        (**self).terminate(ctx)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stage {
    Created,
    Declared,
    Initialized,
    Terminated,
}

/// Enforces the lifecycle call order around a block.
///
/// Out-of-order calls fail instead of reaching the block. `terminate` on a
/// block that never initialized, or a second `terminate`, succeeds without
/// calling into the block.
pub struct Lifecycle<B> {
    inner: B,
    stage: Stage,
}

impl<B: Block> Lifecycle<B> {
    pub fn new(inner: B) -> Self {
        Lifecycle {
            inner,
            stage: Stage::Created,
        }
    }

    pub fn stage(&self) -> Stage {
        self.stage
    }

    pub fn inner(&self) -> &B {
        &self.inner
    }

    fn violation(&self, call: &str) -> BlockError {
        BlockError::new(format!(
            "lifecycle violation: {call} called in stage {:?}",
            self.stage
        ))
    }
}

impl<B: Block> Block for Lifecycle<B> {
    fn declare_ports(&mut self, ctx: &mut dyn BlockContext) -> Result<Vec<PortSpec>, BlockError> {
        if self.stage != Stage::Created {
            return Err(self.violation("declare_ports"));
        }
        let ports = self.inner.declare_ports(ctx)?;
        self.stage = Stage::Declared;
        Ok(ports)
    }

    fn initialize(&mut self, ctx: &mut dyn BlockContext) -> Result<(), BlockError> {
        if self.stage != Stage::Declared {
            return Err(self.violation("initialize"));
        }
        self.inner.initialize(ctx)?;
        self.stage = Stage::Initialized;
        Ok(())
    }

    fn output(&mut self, ctx: &mut dyn BlockContext) -> Result<(), BlockError> {
        if self.stage != Stage::Initialized {
            return Err(self.violation("output"));
        }
        self.inner.output(ctx)
    }

    fn terminate(&mut self, ctx: &mut dyn BlockContext) -> Result<(), BlockError> {
        if self.stage != Stage::Initialized {
            return Ok(());
        }
        self.stage = Stage::Terminated;
        self.inner.terminate(ctx)
    }
}
