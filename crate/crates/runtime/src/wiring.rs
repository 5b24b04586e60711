//! Connection checks and width resolution.
//!
//! Every dynamic port of a block shares one width. Widths flow along
//! connections in both directions, so a block's dynamic width may be fixed
//! by what it consumes or by what consumes it.

use std::fmt;

use blockflow_core::{DataType, PortSpec, Width};
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct PortAddr {
    pub block: usize,
    pub port: usize,
}

impl PortAddr {
    pub fn new(block: usize, port: usize) -> Self {
        PortAddr { block, port }
    }
}

/// Output `from` feeds input `to`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Link {
    pub from: PortAddr,
    pub to: PortAddr,
}

/// Ports of one block split by direction, ordered by index.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BlockPorts {
    pub inputs: Vec<PortSpec>,
    pub outputs: Vec<PortSpec>,
}

impl BlockPorts {
    pub fn from_declared(ports: &[PortSpec]) -> Result<Self, String> {
        let (inputs, outputs) = blockflow_core::types::split_ports(ports)?;
        Ok(BlockPorts { inputs, outputs })
    }

    fn has_dynamic(&self) -> bool {
        self.inputs.iter().chain(&self.outputs).any(|p| p.width == Width::Dynamic)
    }
}

/// A port address rendered as `block.port`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Endpoint(pub String);

impl fmt::Display for Endpoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum WiringError {
    #[error("{at}: block has no {direction} port {port} ({available} declared)")]
    NoSuchPort {
        at: Endpoint,
        direction: &'static str,
        port: usize,
        available: usize,
    },
    #[error("input {to} is driven by both {first} and {second}")]
    MultiplyDriven { to: Endpoint, first: Endpoint, second: Endpoint },
    #[error("input {at} is not connected")]
    Unconnected { at: Endpoint },
    #[error("type mismatch on {from} -> {to}: {produced} vs {expected}")]
    DtypeMismatch {
        from: Endpoint,
        to: Endpoint,
        produced: DataType,
        expected: DataType,
    },
    #[error("width mismatch on {from} -> {to}: {produced} vs {expected}")]
    WidthMismatch {
        from: Endpoint,
        to: Endpoint,
        produced: usize,
        expected: usize,
    },
    #[error("width of {at} cannot be resolved from its connections")]
    Unresolved { at: Endpoint },
}

#[derive(Debug, Clone, Copy)]
enum Term {
    Const(usize),
    Var(usize),
}

struct Classes {
    parent: Vec<usize>,
    value: Vec<Option<usize>>,
}

impl Classes {
    fn new(n: usize) -> Self {
        Classes {
            parent: (0..n).collect(),
            value: vec![None; n],
        }
    }

    fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    fn resolve(&mut self, t: Term) -> Option<usize> {
        match t {
            Term::Const(n) => Some(n),
            Term::Var(v) => {
                let root = self.find(v);
                self.value[root]
            }
        }
    }

    /// Merges two terms. On conflict returns the two widths in argument order.
    fn unify(&mut self, a: Term, b: Term) -> Result<(), (usize, usize)> {
        match (a, b) {
            (Term::Const(x), Term::Const(y)) => (x == y).then_some(()).ok_or((x, y)),
            (Term::Var(v), Term::Const(c)) => self.bind(v, c).map_err(|w| (w, c)),
            (Term::Const(c), Term::Var(v)) => self.bind(v, c).map_err(|w| (c, w)),
            (Term::Var(x), Term::Var(y)) => {
                let (rx, ry) = (self.find(x), self.find(y));
                if rx == ry {
                    return Ok(());
                }
                match (self.value[rx], self.value[ry]) {
                    (Some(wx), Some(wy)) if wx != wy => Err((wx, wy)),
                    (wx, wy) => {
                        self.parent[ry] = rx;
                        self.value[rx] = wx.or(wy);
                        Ok(())
                    }
                }
            }
        }
    }

    fn bind(&mut self, v: usize, c: usize) -> Result<(), usize> {
        let root = self.find(v);
        match self.value[root] {
            Some(w) if w != c => Err(w),
            _ => {
                self.value[root] = Some(c);
                Ok(())
            }
        }
    }
}

/// Checks every connection against the declared ports and replaces all
/// dynamic widths with concrete ones. All problems are reported together.
///
/// `names` supplies the block names used in messages. Links are processed in
/// the order given.
pub fn resolve(names: &[&str], ports: &[BlockPorts], links: &[Link]) -> Result<Vec<BlockPorts>, Vec<WiringError>> {
    let at = |a: PortAddr| Endpoint(format!("{}.{}", names[a.block], a.port));
    let mut errors = Vec::new();

    let mut valid = Vec::with_capacity(links.len());
    let mut driver: Vec<Vec<Option<PortAddr>>> = ports.iter().map(|p| vec![None; p.inputs.len()]).collect();
    for link in links {
        let mut ok = true;
        for (addr, list, direction) in [
            (link.from, &ports[link.from.block].outputs, "output"),
            (link.to, &ports[link.to.block].inputs, "input"),
        ] {
            if addr.port >= list.len() {
                errors.push(WiringError::NoSuchPort {
                    at: at(addr),
                    direction,
                    port: addr.port,
                    available: list.len(),
                });
                ok = false;
            }
        }
        if !ok {
            continue;
        }
        let slot = &mut driver[link.to.block][link.to.port];
        if let Some(first) = *slot {
            errors.push(WiringError::MultiplyDriven {
                to: at(link.to),
                first: at(first),
                second: at(link.from),
            });
            continue;
        }
        *slot = Some(link.from);
        valid.push(*link);
    }

    for (block, inputs) in driver.iter().enumerate() {
        for (port, d) in inputs.iter().enumerate() {
            if d.is_none() {
                errors.push(WiringError::Unconnected {
                    at: at(PortAddr::new(block, port)),
                });
            }
        }
    }

    let term = |spec: &PortSpec, block: usize| match spec.width {
        Width::Fixed(n) => Term::Const(n),
        Width::Dynamic => Term::Var(block),
    };
    let mut classes = Classes::new(ports.len());
    for link in &valid {
        let out = &ports[link.from.block].outputs[link.from.port];
        let inp = &ports[link.to.block].inputs[link.to.port];
        if out.dtype != inp.dtype {
            errors.push(WiringError::DtypeMismatch {
                from: at(link.from),
                to: at(link.to),
                produced: out.dtype,
                expected: inp.dtype,
            });
            continue;
        }
        let (a, b) = (term(out, link.from.block), term(inp, link.to.block));
        if let Err((produced, expected)) = classes.unify(a, b) {
            errors.push(WiringError::WidthMismatch {
                from: at(link.from),
                to: at(link.to),
                produced,
                expected,
            });
        }
    }

    let mut resolved = Vec::with_capacity(ports.len());
    for (block, bp) in ports.iter().enumerate() {
        let width = if bp.has_dynamic() { classes.resolve(Term::Var(block)) } else { None };
        let mut fill = |list: &[PortSpec], is_input: bool| -> Vec<PortSpec> {
            list.iter()
                .map(|p| match (p.width, width) {
                    (Width::Dynamic, Some(w)) => p.with_width(Width::Fixed(w)),
                    (Width::Dynamic, None) => {
                        let kind = if is_input { "in" } else { "out" };
                        errors.push(WiringError::Unresolved {
                            at: Endpoint(format!("{}.{kind}{}", names[block], p.index)),
                        });
                        *p
                    }
                    _ => *p,
                })
                .collect()
        };
        let inputs = fill(&bp.inputs, true);
        let outputs = fill(&bp.outputs, false);
        resolved.push(BlockPorts { inputs, outputs });
    }

    if errors.is_empty() {
        Ok(resolved)
    } else {
        Err(errors)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn f64_ports(inputs: &[Width], outputs: &[Width]) -> BlockPorts {
        BlockPorts {
            inputs: inputs
                .iter()
                .enumerate()
                .map(|(i, w)| PortSpec::input(i, DataType::Float64, *w))
                .collect(),
            outputs: outputs
                .iter()
                .enumerate()
                .map(|(i, w)| PortSpec::output(i, DataType::Float64, *w))
                .collect(),
        }
    }

    fn link(a: usize, ap: usize, b: usize, bp: usize) -> Link {
        Link {
            from: PortAddr::new(a, ap),
            to: PortAddr::new(b, bp),
        }
    }

    #[test]
    fn width_flows_forward_through_dynamic_blocks() {
        let ports = [
            f64_ports(&[], &[Width::Fixed(3)]),
            f64_ports(&[Width::Dynamic], &[Width::Dynamic]),
            f64_ports(&[Width::Dynamic], &[]),
        ];
        let r = resolve(&["c", "g", "s"], &ports, &[link(0, 0, 1, 0), link(1, 0, 2, 0)]).unwrap();
        assert_eq!(r[2].inputs[0].width, Width::Fixed(3));
        assert_eq!(r[1].outputs[0].width, Width::Fixed(3));
    }

    #[test]
    fn width_flows_backward_from_fixed_consumer() {
        let ports = [
            f64_ports(&[], &[Width::Dynamic]),
            f64_ports(&[Width::Fixed(1)], &[]),
        ];
        let r = resolve(&["c", "p"], &ports, &[link(0, 0, 1, 0)]).unwrap();
        assert_eq!(r[0].outputs[0].width, Width::Fixed(1));
    }

    #[test]
    fn fixed_conflict_reports_both_widths() {
        let ports = [
            f64_ports(&[], &[Width::Fixed(3)]),
            f64_ports(&[Width::Fixed(2)], &[]),
        ];
        let errs = resolve(&["c", "s"], &ports, &[link(0, 0, 1, 0)]).unwrap_err();
        assert_eq!(errs.len(), 1);
        assert_eq!(errs[0].to_string(), "width mismatch on c.0 -> s.0: 3 vs 2");
    }

    #[test]
    fn sum_of_mismatched_operands() {
        let ports = [
            f64_ports(&[], &[Width::Fixed(3)]),
            f64_ports(&[], &[Width::Fixed(2)]),
            f64_ports(&[Width::Dynamic, Width::Dynamic], &[Width::Dynamic]),
            f64_ports(&[Width::Dynamic], &[]),
        ];
        let links = [link(0, 0, 2, 0), link(1, 0, 2, 1), link(2, 0, 3, 0)];
        let errs = resolve(&["a", "b", "sum", "out"], &ports, &links).unwrap_err();
        assert_eq!(errs, vec![WiringError::WidthMismatch {
            from: Endpoint("b.0".into()),
            to: Endpoint("sum.1".into()),
            produced: 2,
            expected: 3,
        }]);
    }

    #[test]
    fn structural_problems_are_collected() {
        let ports = [
            f64_ports(&[], &[Width::Fixed(1)]),
            f64_ports(&[Width::Fixed(1), Width::Fixed(1)], &[]),
        ];
        let links = [link(0, 0, 1, 0), link(0, 0, 1, 0), link(0, 1, 1, 1), link(0, 0, 1, 5)];
        let errs = resolve(&["a", "b"], &ports, &links).unwrap_err();
        let text: Vec<String> = errs.iter().map(|e| e.to_string()).collect();
        assert!(text.iter().any(|t| t.contains("driven by both")), "{text:?}");
        assert!(text.iter().any(|t| t == "a.1: block has no output port 1 (1 declared)"), "{text:?}");
        assert!(text.iter().any(|t| t.contains("no input port 5")), "{text:?}");
        assert!(text.iter().any(|t| t == "input b.1 is not connected"), "{text:?}");
    }

    #[test]
    fn dtype_mismatch() {
        let mut ports = [f64_ports(&[], &[Width::Fixed(1)]), f64_ports(&[Width::Fixed(1)], &[])];
        ports[1].inputs[0].dtype = DataType::Int32;
        let errs = resolve(&["a", "b"], &ports, &[link(0, 0, 1, 0)]).unwrap_err();
        assert_eq!(errs[0].to_string(), "type mismatch on a.0 -> b.0: float64 vs int32");
    }

    #[test]
    fn isolated_dynamic_ports_are_unresolved() {
        let ports = [
            f64_ports(&[], &[Width::Dynamic]),
            f64_ports(&[Width::Dynamic], &[]),
        ];
        let errs = resolve(&["a", "b"], &ports, &[link(0, 0, 1, 0)]).unwrap_err();
        assert_eq!(errs.len(), 2);
        assert!(matches!(errs[0], WiringError::Unresolved { .. }));
    }
}
