use blockflow_core::{Block, BlockContext, BlockError, DataType, PortSpec, Width};

/// Linear difference equation in direct form II transposed,
///
/// `y[k] = Σ b[i]·u[k−i] − Σ_{j≥1} a[j]·y[k−j]`
///
/// with coefficients normalized so that `a[0] = 1`. Each element of a vector
/// input is filtered independently; delay states start at zero.
#[derive(Debug, Default)]
pub struct DiscreteFilter {
    b: Vec<f64>,
    a: Vec<f64>,
    /// `order` delay states per channel, channel-major.
    state: Vec<f64>,
    order: usize,
    y: Vec<f64>,
}

impl DiscreteFilter {
    pub fn coefficients(&self) -> (&[f64], &[f64]) {
        (&self.b, &self.a)
    }
}

impl Block for DiscreteFilter {
    fn declare_ports(&mut self, ctx: &mut dyn BlockContext) -> Result<Vec<PortSpec>, BlockError> {
        self.b = ctx.param_vec("numerator")?;
        self.a = ctx.param_vec("denominator")?;
        if self.b.is_empty() || self.a.is_empty() {
            return Err(BlockError::new("numerator and denominator must not be empty"));
        }
        Ok(vec![
            PortSpec::input(0, DataType::Float64, Width::Dynamic),
            PortSpec::output(0, DataType::Float64, Width::Dynamic).finite_only(),
        ])
    }

    fn initialize(&mut self, ctx: &mut dyn BlockContext) -> Result<(), BlockError> {
        let a0 = self.a[0];
        if a0 == 0.0 || !a0.is_finite() {
            return Err(BlockError::new("non-normalizable denominator: leading coefficient is 0"));
        }
        self.order = self.b.len().max(self.a.len()) - 1;
        self.b.resize(self.order + 1, 0.0);
        self.a.resize(self.order + 1, 0.0);
        self.b.iter_mut().for_each(|c| *c /= a0);
        self.a.iter_mut().for_each(|c| *c /= a0);
        let width = ctx.output_width(0)?;
        self.state = vec![0.0; width * self.order];
        self.y = vec![0.0; width];
        Ok(())
    }

    fn output(&mut self, ctx: &mut dyn BlockContext) -> Result<(), BlockError> {
        let n = self.order;
        let (b, a) = (&self.b, &self.a);
        for (ch, (y, &u)) in self.y.iter_mut().zip(ctx.input_f64(0)?).enumerate() {
            let z = &mut self.state[ch * n..(ch + 1) * n];
            let out = if n == 0 { b[0] * u } else { b[0] * u + z[0] };
            for i in 0..n {
                let next = if i + 1 < n { z[i + 1] } else { 0.0 };
                z[i] = b[i + 1] * u + next - a[i + 1] * out;
            }
            *y = out;
        }
        ctx.set_output_f64(0, &self.y)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use blockflow_core::testing::Harness;
    use blockflow_core::Parameters;
    use proptest::prelude::*;

    fn filter(b: Vec<f64>, a: Vec<f64>, width: usize) -> Harness {
        let params = Parameters::new().with("numerator", b).with("denominator", a);
        let mut h = Harness::new(Box::new(DiscreteFilter::default()), params);
        h.start(width).unwrap();
        h
    }

    /// Direct evaluation of the difference equation from the full input and
    /// output histories.
    fn recurrence(b: &[f64], a: &[f64], u: &[f64]) -> Vec<f64> {
        let mut y: Vec<f64> = Vec::with_capacity(u.len());
        for k in 0..u.len() {
            let mut acc = 0.0;
            for (i, bi) in b.iter().enumerate() {
                if k >= i {
                    acc += bi * u[k - i];
                }
            }
            for (j, aj) in a.iter().enumerate().skip(1) {
                if k >= j {
                    acc -= aj * y[k - j];
                }
            }
            y.push(acc / a[0]);
        }
        y
    }

    #[test]
    fn identity() {
        let mut h = filter(vec![1.0], vec![1.0], 2);
        for u in [[1.5, -2.0], [0.0, 3.0]] {
            assert_eq!(h.step_f64(&[&u]).unwrap()[0], u);
        }
    }

    #[test]
    fn moving_average_warm_up() {
        let mut h = filter(vec![0.5, 0.5], vec![1.0], 1);
        let out: Vec<f64> = (0..3).map(|_| h.step_f64(&[&[1.0]]).unwrap()[0][0]).collect();
        assert_eq!(out, [0.5, 1.0, 1.0]);
    }

    #[test]
    fn geometric_series_matches_recurrence() {
        let (b, a) = (vec![1.0], vec![1.0, -0.5]);
        let u = vec![1.0; 50];
        let expected = recurrence(&b, &a, &u);
        let mut h = filter(b, a, 1);
        let got: Vec<f64> = u.iter().map(|x| h.step_f64(&[&[*x]]).unwrap()[0][0]).collect();
        for (k, (g, e)) in got.iter().zip(&expected).enumerate() {
            assert!((g - e).abs() < 1e-12, "step {k}: {g} vs {e}");
        }
        assert_eq!(&got[..3], &[1.0, 1.5, 1.75]);
        assert!((got[49] - 2.0).abs() < 1e-12);
    }

    #[test]
    fn zero_leading_denominator_fails() {
        let params = Parameters::new().with("numerator", vec![1.0]).with("denominator", vec![0.0, 1.0]);
        let mut h = Harness::new(Box::new(DiscreteFilter::default()), params);
        assert!(h.start(1).unwrap_err().message().contains("non-normalizable denominator"));
    }

    proptest! {
        #[test]
        fn equal_coefficients_are_identity(
            a0 in prop_oneof![0.1f64..5.0, -5.0f64..-0.1],
            rest in proptest::collection::vec(-0.9f64..0.9, 0..4),
            u in proptest::collection::vec(-10.0f64..10.0, 1..30),
        ) {
            let mut coeffs = vec![a0];
            coeffs.extend(rest);
            let mut h = filter(coeffs.clone(), coeffs, 1);
            for x in u {
                let y = h.step_f64(&[&[x]]).unwrap()[0][0];
                prop_assert!((y - x).abs() <= 1e-9 * (1.0 + x.abs()), "{} vs {}", y, x);
            }
        }

        #[test]
        fn second_order_matches_recurrence(
            b in proptest::collection::vec(-2.0f64..2.0, 1..4),
            a_tail in proptest::collection::vec(-0.4f64..0.4, 0..3),
            u in proptest::collection::vec(-1.0f64..1.0, 1..40),
        ) {
            let mut a = vec![2.0];
            a.extend(a_tail);
            let expected = recurrence(&b, &a, &u);
            let mut h = filter(b, a, 1);
            for (x, e) in u.iter().zip(expected) {
                let y = h.step_f64(&[&[*x]]).unwrap()[0][0];
                prop_assert!((y - e).abs() < 1e-9);
            }
        }
    }
}
