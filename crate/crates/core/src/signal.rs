use crate::types::DataType;

/// Typed, fixed-width buffer carrying the data of one output port for one step.
#[derive(Debug, Clone, PartialEq)]
pub enum Signal {
    Float64(Vec<f64>),
    Int32(Vec<i32>),
    Bool(Vec<bool>),
}

/// Borrowed view of signal values.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SignalRef<'a> {
    Float64(&'a [f64]),
    Int32(&'a [i32]),
    Bool(&'a [bool]),
}

impl Signal {
    pub fn zeros(dtype: DataType, width: usize) -> Self {
        match dtype {
            DataType::Float64 => Signal::Float64(vec![0.0; width]),
            DataType::Int32 => Signal::Int32(vec![0; width]),
            DataType::Bool => Signal::Bool(vec![false; width]),
        }
    }

    pub fn dtype(&self) -> DataType {
        self.as_ref().dtype()
    }

    pub fn width(&self) -> usize {
        self.as_ref().len()
    }

    pub fn as_ref(&self) -> SignalRef<'_> {
        match self {
            Signal::Float64(v) => SignalRef::Float64(v),
            Signal::Int32(v) => SignalRef::Int32(v),
            Signal::Bool(v) => SignalRef::Bool(v),
        }
    }

    /// Overwrites the values in place. The dtype and width never change.
    pub fn copy_from(&mut self, values: SignalRef<'_>) -> Result<(), String> {
        if values.dtype() != self.dtype() {
            return Err(format!("expected {} values, got {}", self.dtype(), values.dtype()));
        }
        if values.len() != self.width() {
            return Err(format!("expected {} values, got {}", self.width(), values.len()));
        }
        match (self, values) {
            (Signal::Float64(dst), SignalRef::Float64(src)) => dst.copy_from_slice(src),
            (Signal::Int32(dst), SignalRef::Int32(src)) => dst.copy_from_slice(src),
            (Signal::Bool(dst), SignalRef::Bool(src)) => dst.copy_from_slice(src),
            _ => unreachable!("dtype checked above"),
        }
        Ok(())
    }

    pub fn is_finite(&self) -> bool {
        match self {
            Signal::Float64(v) => v.iter().all(|x| x.is_finite()),
            _ => true,
        }
    }
}

impl<'a> SignalRef<'a> {
    pub fn dtype(&self) -> DataType {
        match self {
            SignalRef::Float64(_) => DataType::Float64,
            SignalRef::Int32(_) => DataType::Int32,
            SignalRef::Bool(_) => DataType::Bool,
        }
    }

    pub fn len(&self) -> usize {
        match self {
            SignalRef::Float64(v) => v.len(),
            SignalRef::Int32(v) => v.len(),
            SignalRef::Bool(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn as_f64(&self) -> Option<&'a [f64]> {
        match *self {
            SignalRef::Float64(v) => Some(v),
            _ => None,
        }
    }

    pub fn as_i32(&self) -> Option<&'a [i32]> {
        match *self {
            SignalRef::Int32(v) => Some(v),
            _ => None,
        }
    }

    pub fn as_bool(&self) -> Option<&'a [bool]> {
        match *self {
            SignalRef::Bool(v) => Some(v),
            _ => None,
        }
    }

    pub fn to_owned(&self) -> Signal {
        match *self {
            SignalRef::Float64(v) => Signal::Float64(v.to_vec()),
            SignalRef::Int32(v) => Signal::Int32(v.to_vec()),
            SignalRef::Bool(v) => Signal::Bool(v.to_vec()),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn copy_keeps_shape() {
        let mut s = Signal::zeros(DataType::Float64, 2);
        s.copy_from(SignalRef::Float64(&[1.0, 2.0])).unwrap();
        assert_eq!(s, Signal::Float64(vec![1.0, 2.0]));
        assert!(s.copy_from(SignalRef::Float64(&[1.0])).is_err());
        assert!(s.copy_from(SignalRef::Int32(&[1, 2])).is_err());
        assert_eq!(s.width(), 2);
    }

    #[test]
    fn finiteness_only_applies_to_floats() {
        assert!(!Signal::Float64(vec![0.0, f64::NAN]).is_finite());
        assert!(Signal::Int32(vec![i32::MAX]).is_finite());
    }
}
