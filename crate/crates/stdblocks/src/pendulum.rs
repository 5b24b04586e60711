use blockflow_core::{Block, BlockContext, BlockError, DataType, PortSpec, Width};

/// Torque-driven pendulum plant.
///
/// `theta = 0` is the stable hanging equilibrium. Each step after the first
/// advances the state by semi-implicit Euler with the torque applied during
/// the previous step:
///
/// ```text
/// omega += h * (tau - m*g*l*sin(theta) - c*omega) / (m*l^2)
/// theta += h * omega
/// ```
///
/// The output is `[theta, omega]`. The torque input has no direct
/// feedthrough, which lets the plant close a feedback loop with a controller.
#[derive(Debug, Default)]
pub struct Pendulum {
    mass: f64,
    length: f64,
    damping: f64,
    gravity: f64,
    theta: f64,
    omega: f64,
    started: bool,
}

/// Plant state `(theta, omega)` in radians and radians per second.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PendulumState {
    pub theta: f64,
    pub omega: f64,
}

impl Pendulum {
    pub fn state(&self) -> PendulumState {
        PendulumState {
            theta: self.theta,
            omega: self.omega,
        }
    }

    fn advance(&mut self, tau: f64, h: f64) {
        let inertia = self.mass * self.length * self.length;
        let gravity_torque = self.mass * self.gravity * self.length * self.theta.sin();
        self.omega += h * (tau - gravity_torque - self.damping * self.omega) / inertia;
        self.theta += h * self.omega;
    }
}

impl Block for Pendulum {
    fn declare_ports(&mut self, ctx: &mut dyn BlockContext) -> Result<Vec<PortSpec>, BlockError> {
        self.mass = ctx.param_f64("mass")?;
        self.length = ctx.param_f64("length")?;
        self.damping = ctx.param_f64_or("damping", 0.0)?;
        self.gravity = ctx.param_f64_or("gravity", 9.81)?;
        self.theta = ctx.param_f64_or("theta0", 0.0)?;
        self.omega = ctx.param_f64_or("omega0", 0.0)?;
        Ok(vec![
            PortSpec::input(0, DataType::Float64, Width::Fixed(1)).no_feedthrough(),
            PortSpec::output(0, DataType::Float64, Width::Fixed(2)).finite_only(),
        ])
    }

    fn initialize(&mut self, _ctx: &mut dyn BlockContext) -> Result<(), BlockError> {
        if !(self.mass > 0.0) {
            return Err(BlockError::new(format!("mass must be positive, got {}", self.mass)));
        }
        if !(self.length > 0.0) {
            return Err(BlockError::new(format!("length must be positive, got {}", self.length)));
        }
        if !self.theta.is_finite() || !self.omega.is_finite() {
            return Err(BlockError::new("initial state must be finite"));
        }
        self.started = false;
        Ok(())
    }

    fn output(&mut self, ctx: &mut dyn BlockContext) -> Result<(), BlockError> {
        if self.started {
            let tau = ctx.input_f64(0)?[0];
            self.advance(tau, ctx.step_size());
        }
        self.started = true;
        ctx.set_output_f64(0, &[self.theta, self.omega])
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use blockflow_core::testing::Harness;
    use blockflow_core::Parameters;

    fn plant(extra: &[(&str, f64)], h: f64) -> Harness {
        let mut params = Parameters::new().with("mass", 1.0).with("length", 1.0);
        for (k, v) in extra {
            params = params.with(k, *v);
        }
        let mut harness = Harness::new(Box::new(Pendulum::default()), params).with_step_size(h);
        harness.start(1).unwrap();
        harness
    }

    #[test]
    fn rest_stays_at_rest() {
        let mut h = plant(&[], 0.001);
        for _ in 0..1000 {
            assert_eq!(h.step_f64(&[&[0.0]]).unwrap()[0], [0.0, 0.0]);
        }
    }

    #[test]
    fn first_output_is_initial_state() {
        let mut h = plant(&[("theta0", 0.2), ("omega0", -1.0)], 0.01);
        assert_eq!(h.step_f64(&[&[5.0]]).unwrap()[0], [0.2, -1.0]);
    }

    #[test]
    fn forced_equilibrium_holds() {
        let (m, g, l) = (1.0, 9.81, 1.0);
        let tau = m * g * l * 0.1f64.sin();
        let mut h = plant(&[("theta0", 0.1)], 0.001);
        for _ in 0..5000 {
            let y = &h.step_f64(&[&[tau]]).unwrap()[0];
            assert!((y[0] - 0.1).abs() < 1e-9 && y[1].abs() < 1e-9, "{y:?}");
        }
    }

    #[test]
    fn rejects_non_positive_geometry() {
        for (name, value) in [("mass", 0.0), ("length", -1.0)] {
            let params = Parameters::new().with("mass", 1.0).with("length", 1.0).with(name, value);
            let mut h = Harness::new(Box::new(Pendulum::default()), params);
            assert!(h.start(1).unwrap_err().message().contains(name));
        }
    }

    #[test]
    fn torque_input_has_no_feedthrough() {
        let params = Parameters::new().with("mass", 1.0).with("length", 1.0);
        let ports = Harness::new(Box::new(Pendulum::default()), params).declare().unwrap();
        assert!(!ports[0].feedthrough);
        assert_eq!(ports[1].width, Width::Fixed(2));
    }
}
