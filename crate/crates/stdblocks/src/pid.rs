use blockflow_core::{Block, BlockContext, BlockError, DataType, PortSpec, Width};

/// Discrete PID acting on an error signal, elementwise:
///
/// `u[k] = Kp·e[k] + Ki·I[k] + Kd·(e[k] − e[k−1]) / h`, with
/// `I[k] = clamp(I[k−1] + h·e[k], integral_min, integral_max)`.
///
/// The step size `h` comes from the engine. The first step uses
/// `e[−1] = e[0]`, so there is no derivative kick at start-up.
#[derive(Debug, Default)]
pub struct Pid {
    kp: f64,
    ki: f64,
    kd: f64,
    bounds: Option<(f64, f64)>,
    h: f64,
    integral: Vec<f64>,
    previous: Vec<f64>,
    started: bool,
    u: Vec<f64>,
}

impl Block for Pid {
    fn declare_ports(&mut self, ctx: &mut dyn BlockContext) -> Result<Vec<PortSpec>, BlockError> {
        self.kp = ctx.param_f64_or("Kp", 0.0)?;
        self.ki = ctx.param_f64_or("Ki", 0.0)?;
        self.kd = ctx.param_f64_or("Kd", 0.0)?;
        self.bounds = match (ctx.parameter("integral_min"), ctx.parameter("integral_max")) {
            (None, None) => None,
            (Some(_), Some(_)) => Some((ctx.param_f64("integral_min")?, ctx.param_f64("integral_max")?)),
            _ => {
                return Err(BlockError::new(
                    "integral_min and integral_max must be given together",
                ))
            }
        };
        Ok(vec![
            PortSpec::input(0, DataType::Float64, Width::Dynamic),
            PortSpec::output(0, DataType::Float64, Width::Dynamic).finite_only(),
        ])
    }

    fn initialize(&mut self, ctx: &mut dyn BlockContext) -> Result<(), BlockError> {
        self.h = ctx.step_size();
        if !(self.h > 0.0) {
            return Err(BlockError::new(format!("sample time must be positive, got {}", self.h)));
        }
        if let Some((lo, hi)) = self.bounds {
            if !(lo <= hi) {
                return Err(BlockError::new(format!("integral_min {lo} exceeds integral_max {hi}")));
            }
        }
        let width = ctx.output_width(0)?;
        self.integral = vec![0.0; width];
        self.previous = vec![0.0; width];
        self.u = vec![0.0; width];
        self.started = false;
        Ok(())
    }

    fn output(&mut self, ctx: &mut dyn BlockContext) -> Result<(), BlockError> {
        let e = ctx.input_f64(0)?;
        if !self.started {
            self.previous.copy_from_slice(e);
            self.started = true;
        }
        for i in 0..self.u.len() {
            let mut integral = self.integral[i] + self.h * e[i];
            if let Some((lo, hi)) = self.bounds {
                integral = integral.clamp(lo, hi);
            }
            self.integral[i] = integral;
            let derivative = (e[i] - self.previous[i]) / self.h;
            self.u[i] = self.kp * e[i] + self.ki * integral + self.kd * derivative;
            self.previous[i] = e[i];
        }
        ctx.set_output_f64(0, &self.u)
    }
}
