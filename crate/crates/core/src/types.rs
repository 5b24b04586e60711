use std::fmt;

/// Element type carried by a port or signal.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum DataType {
    Float64,
    Int32,
    Bool,
}

impl DataType {
    pub fn name(self) -> &'static str {
        match self {
            DataType::Float64 => "float64",
            DataType::Int32 => "int32",
            DataType::Bool => "bool",
        }
    }

    pub(crate) fn code(self) -> u32 {
        match self {
            DataType::Float64 => 0,
            DataType::Int32 => 1,
            DataType::Bool => 2,
        }
    }

    pub(crate) fn from_code(code: u32) -> Option<Self> {
        match code {
            0 => Some(DataType::Float64),
            1 => Some(DataType::Int32),
            2 => Some(DataType::Bool),
            _ => None,
        }
    }
}

impl fmt::Display for DataType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Declared element count of a port.
///
/// `Dynamic` ports take their width from the signal connected to them. All
/// dynamic ports of one block share a single width, so a block with a dynamic
/// input and a dynamic output propagates the width through itself.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Width {
    Fixed(usize),
    Dynamic,
}

impl Width {
    pub fn fixed(self) -> Option<usize> {
        match self {
            Width::Fixed(n) => Some(n),
            Width::Dynamic => None,
        }
    }
}

impl fmt::Display for Width {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Width::Fixed(n) => write!(f, "{n}"),
            Width::Dynamic => f.write_str("dynamic"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Direction {
    Input,
    Output,
}

/// Shape and type of one block port.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct PortSpec {
    pub index: usize,
    pub direction: Direction,
    pub dtype: DataType,
    pub width: Width,
    /// Inputs only: the current-step value of this input influences the
    /// current-step output. Inputs without feedthrough observe the value
    /// their producer wrote in the previous step.
    pub feedthrough: bool,
    /// Outputs only: the engine rejects non-finite values on this port.
    pub finite_only: bool,
}

impl PortSpec {
    pub fn input(index: usize, dtype: DataType, width: Width) -> Self {
        PortSpec {
            index,
            direction: Direction::Input,
            dtype,
            width,
            feedthrough: true,
            finite_only: false,
        }
    }

    pub fn output(index: usize, dtype: DataType, width: Width) -> Self {
        PortSpec {
            index,
            direction: Direction::Output,
            dtype,
            width,
            feedthrough: false,
            finite_only: false,
        }
    }

    pub fn no_feedthrough(mut self) -> Self {
        self.feedthrough = false;
        self
    }

    pub fn finite_only(mut self) -> Self {
        self.finite_only = true;
        self
    }

    pub fn with_width(mut self, width: Width) -> Self {
        self.width = width;
        self
    }

    pub fn is_input(&self) -> bool {
        self.direction == Direction::Input
    }
}

/// Checks that a declared port list is well formed: indices contiguous from
/// zero within each direction and fixed widths positive. Returns the list
/// split into (inputs, outputs), each ordered by index.
pub fn split_ports(ports: &[PortSpec]) -> Result<(Vec<PortSpec>, Vec<PortSpec>), String> {
    let mut inputs: Vec<PortSpec> = ports.iter().filter(|p| p.is_input()).copied().collect();
    let mut outputs: Vec<PortSpec> = ports.iter().filter(|p| !p.is_input()).copied().collect();
    for (list, kind) in [(&mut inputs, "input"), (&mut outputs, "output")] {
        list.sort_by_key(|p| p.index);
        for (expected, port) in list.iter().enumerate() {
            if port.index != expected {
                return Err(format!(
                    "{kind} port indices must be contiguous from 0, found {} at position {expected}",
                    port.index
                ));
            }
            if port.width == Width::Fixed(0) {
                return Err(format!("{kind} port {} declares zero width", port.index));
            }
        }
    }
    Ok((inputs, outputs))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn split_orders_and_checks_contiguity() {
        let ports = [
            PortSpec::output(0, DataType::Float64, Width::Fixed(2)),
            PortSpec::input(1, DataType::Float64, Width::Dynamic),
            PortSpec::input(0, DataType::Int32, Width::Fixed(1)),
        ];
        let (inputs, outputs) = split_ports(&ports).unwrap();
        assert_eq!(inputs[0].dtype, DataType::Int32);
        assert_eq!(inputs[1].width, Width::Dynamic);
        assert_eq!(outputs.len(), 1);

        let gap = [PortSpec::input(1, DataType::Float64, Width::Dynamic)];
        assert!(split_ports(&gap).unwrap_err().contains("contiguous"));

        let zero = [PortSpec::output(0, DataType::Float64, Width::Fixed(0))];
        assert!(split_ports(&zero).unwrap_err().contains("zero width"));
    }

    #[test]
    fn dtype_codes_round_trip() {
        for dtype in [DataType::Float64, DataType::Int32, DataType::Bool] {
            assert_eq!(DataType::from_code(dtype.code()), Some(dtype));
        }
        assert_eq!(DataType::from_code(9), None);
    }
}
