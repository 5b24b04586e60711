use blockflow_core::{Block, BlockContext, BlockError, DataType, PortSpec, Width};

/// Elementwise `k * u`; `k` is a scalar or a vector matching the width.
#[derive(Debug, Default)]
pub struct Gain {
    k: Vec<f64>,
    y: Vec<f64>,
}

impl Block for Gain {
    fn declare_ports(&mut self, ctx: &mut dyn BlockContext) -> Result<Vec<PortSpec>, BlockError> {
        self.k = ctx.param_vec("k")?;
        if self.k.is_empty() {
            return Err(BlockError::new("parameter 'k' must not be empty"));
        }
        let width = crate::width_of(&self.k);
        Ok(vec![
            PortSpec::input(0, DataType::Float64, width),
            PortSpec::output(0, DataType::Float64, width).finite_only(),
        ])
    }

    fn initialize(&mut self, ctx: &mut dyn BlockContext) -> Result<(), BlockError> {
        let width = ctx.output_width(0)?;
        self.k = crate::broadcast(&self.k, width);
        self.y = vec![0.0; width];
        Ok(())
    }

    fn output(&mut self, ctx: &mut dyn BlockContext) -> Result<(), BlockError> {
        for ((y, k), u) in self.y.iter_mut().zip(&self.k).zip(ctx.input_f64(0)?) {
            *y = k * u;
        }
        ctx.set_output_f64(0, &self.y)
    }
}

/// Signed elementwise sum. `signs` holds one `+` or `-` per input
/// (default `"++"`).
#[derive(Debug, Default)]
pub struct Sum {
    signs: Vec<f64>,
    y: Vec<f64>,
}

impl Block for Sum {
    fn declare_ports(&mut self, ctx: &mut dyn BlockContext) -> Result<Vec<PortSpec>, BlockError> {
        let signs = match ctx.parameter("signs") {
            Some(_) => ctx.param_str("signs")?,
            None => "++".to_owned(),
        };
        self.signs = signs
            .chars()
            .map(|c| match c {
                '+' => Ok(1.0),
                '-' => Ok(-1.0),
                other => Err(BlockError::new(format!("invalid sign '{other}' in 'signs'"))),
            })
            .collect::<Result<_, _>>()?;
        if self.signs.is_empty() {
            return Err(BlockError::new("parameter 'signs' must name at least one input"));
        }
        let mut ports: Vec<PortSpec> = (0..self.signs.len())
            .map(|i| PortSpec::input(i, DataType::Float64, Width::Dynamic))
            .collect();
        ports.push(PortSpec::output(0, DataType::Float64, Width::Dynamic).finite_only());
        Ok(ports)
    }

    fn initialize(&mut self, ctx: &mut dyn BlockContext) -> Result<(), BlockError> {
        self.y = vec![0.0; ctx.output_width(0)?];
        Ok(())
    }

    fn output(&mut self, ctx: &mut dyn BlockContext) -> Result<(), BlockError> {
        self.y.iter_mut().for_each(|y| *y = 0.0);
        for (i, sign) in self.signs.iter().enumerate() {
            for (y, u) in self.y.iter_mut().zip(ctx.input_f64(i)?) {
                *y += sign * u;
            }
        }
        ctx.set_output_f64(0, &self.y)
    }
}

/// Clamps every element to `[lower, upper]`.
#[derive(Debug, Default)]
pub struct Saturation {
    lower: f64,
    upper: f64,
    y: Vec<f64>,
}

impl Block for Saturation {
    fn declare_ports(&mut self, ctx: &mut dyn BlockContext) -> Result<Vec<PortSpec>, BlockError> {
        self.lower = ctx.param_f64("lower")?;
        self.upper = ctx.param_f64("upper")?;
        Ok(vec![
            PortSpec::input(0, DataType::Float64, Width::Dynamic),
            PortSpec::output(0, DataType::Float64, Width::Dynamic).finite_only(),
        ])
    }

    fn initialize(&mut self, ctx: &mut dyn BlockContext) -> Result<(), BlockError> {
        if !(self.lower <= self.upper) {
            return Err(BlockError::new(format!(
                "lower bound {} exceeds upper bound {}",
                self.lower, self.upper
            )));
        }
        self.y = vec![0.0; ctx.output_width(0)?];
        Ok(())
    }

    fn output(&mut self, ctx: &mut dyn BlockContext) -> Result<(), BlockError> {
        for (y, u) in self.y.iter_mut().zip(ctx.input_f64(0)?) {
            *y = u.clamp(self.lower, self.upper);
        }
        ctx.set_output_f64(0, &self.y)
    }
}

/// Picks elements of the input by zero-based `indices`.
#[derive(Debug, Default)]
pub struct Selector {
    indices: Vec<usize>,
    y: Vec<f64>,
}

impl Block for Selector {
    fn declare_ports(&mut self, ctx: &mut dyn BlockContext) -> Result<Vec<PortSpec>, BlockError> {
        self.indices = ctx
            .param_vec("indices")?
            .into_iter()
            .map(|i| {
                if i >= 0.0 && i.fract() == 0.0 {
                    Ok(i as usize)
                } else {
                    Err(BlockError::new(format!("invalid index {i} in 'indices'")))
                }
            })
            .collect::<Result<_, _>>()?;
        if self.indices.is_empty() {
            return Err(BlockError::new("parameter 'indices' must not be empty"));
        }
        Ok(vec![
            PortSpec::input(0, DataType::Float64, Width::Dynamic),
            PortSpec::output(0, DataType::Float64, Width::Fixed(self.indices.len())).finite_only(),
        ])
    }

    fn initialize(&mut self, ctx: &mut dyn BlockContext) -> Result<(), BlockError> {
        let width = ctx.input_width(0)?;
        if let Some(bad) = self.indices.iter().find(|&&i| i >= width) {
            return Err(BlockError::new(format!("index {bad} out of range for input width {width}")));
        }
        self.y = vec![0.0; self.indices.len()];
        Ok(())
    }

    fn output(&mut self, ctx: &mut dyn BlockContext) -> Result<(), BlockError> {
        let u = ctx.input_f64(0)?;
        for (y, &i) in self.y.iter_mut().zip(&self.indices) {
            *y = u[i];
        }
        ctx.set_output_f64(0, &self.y)
    }
}
