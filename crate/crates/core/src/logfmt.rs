//! CSV text shared by every signal logger.
//!
//! Header `time,v0,v1,...`, one row per step. Floats use 17 significant
//! digits so parsing a row back yields the exact bits that were logged.

use std::fmt::Write;

use crate::signal::SignalRef;

pub fn header(width: usize) -> String {
    let mut line = String::from("time");
    for i in 0..width {
        let _ = write!(line, ",v{i}");
    }
    line
}

pub fn float(out: &mut String, value: f64) {
    let _ = write!(out, "{value:.16e}");
}

/// Appends one row (without line terminator) to `out`.
pub fn row(out: &mut String, time: f64, values: SignalRef<'_>) {
    float(out, time);
    match values {
        SignalRef::Float64(v) => v.iter().for_each(|x| {
            out.push(',');
            float(out, *x);
        }),
        SignalRef::Int32(v) => v.iter().for_each(|x| {
            let _ = write!(out, ",{x}");
        }),
        SignalRef::Bool(v) => v.iter().for_each(|x| {
            out.push_str(if *x { ",1" } else { ",0" });
        }),
    }
}
