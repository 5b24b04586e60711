use std::fs::File;
use std::io::{BufWriter, Write};

use blockflow_core::logfmt;
use blockflow_core::{Block, BlockContext, BlockError, DataType, PortSpec, Width};

/// Appends its input to a CSV file at `path`, one row per step.
#[derive(Debug, Default)]
pub struct CsvSink {
    path: String,
    writer: Option<BufWriter<File>>,
    line: String,
    rows: u64,
}

impl CsvSink {
    pub fn rows(&self) -> u64 {
        self.rows
    }
}

impl Block for CsvSink {
    fn declare_ports(&mut self, ctx: &mut dyn BlockContext) -> Result<Vec<PortSpec>, BlockError> {
        self.path = ctx.param_str("path")?;
        Ok(vec![PortSpec::input(0, DataType::Float64, Width::Dynamic)])
    }

    fn initialize(&mut self, ctx: &mut dyn BlockContext) -> Result<(), BlockError> {
        let file = File::create(&self.path)
            .map_err(|e| BlockError::new(format!("cannot create '{}': {e}", self.path)))?;
        let mut writer = BufWriter::new(file);
        writeln!(writer, "{}", logfmt::header(ctx.input_width(0)?))
            .map_err(|e| BlockError::new(format!("cannot write '{}': {e}", self.path)))?;
        self.writer = Some(writer);
        self.rows = 0;
        Ok(())
    }

    fn output(&mut self, ctx: &mut dyn BlockContext) -> Result<(), BlockError> {
        let Some(writer) = self.writer.as_mut() else {
            return Err(BlockError::new("sink is closed"));
        };
        self.line.clear();
        let values = ctx.input(0).ok_or_else(|| BlockError::new("input 0 is not available"))?;
        logfmt::row(&mut self.line, ctx.time(), values);
        self.line.push('\n');
        writer
            .write_all(self.line.as_bytes())
            .map_err(|e| BlockError::new(format!("cannot write '{}': {e}", self.path)))?;
        self.rows += 1;
        Ok(())
    }

    fn terminate(&mut self, _ctx: &mut dyn BlockContext) -> Result<(), BlockError> {
        if let Some(mut writer) = self.writer.take() {
            writer
                .flush()
                .map_err(|e| BlockError::new(format!("cannot flush '{}': {e}", self.path)))?;
        }
        Ok(())
    }
}
