//! Standard block library.
//!
//! Built as a plugin (`libstdblocks.so` on Linux) for engines to load at
//! runtime, and as an rlib so the blocks can be unit tested in-process.
//!
//! | label          | inputs                     | outputs         |
//! |----------------|----------------------------|-----------------|
//! | Constant       | -                          | value           |
//! | SineSource     | -                          | 1               |
//! | StepSource     | -                          | value           |
//! | Gain           | dynamic (or len k)         | same            |
//! | Sum            | one per sign, dynamic      | dynamic         |
//! | Saturation     | dynamic                    | dynamic         |
//! | Selector       | dynamic                    | len indices     |
//! | UnitDelay      | dynamic, no feedthrough    | dynamic         |
//! | DiscreteFilter | dynamic                    | dynamic         |
//! | PID            | error, dynamic             | dynamic         |
//! | Pendulum       | torque (1), no feedthrough | [theta, omega]  |
//! | CsvSink        | dynamic                    | -               |

mod arith;
mod delay;
mod filter;
mod pendulum;
mod pid;
mod sink;
mod sources;

pub use arith::{Gain, Saturation, Selector, Sum};
pub use delay::UnitDelay;
pub use filter::DiscreteFilter;
pub use pendulum::Pendulum;
pub use pid::Pid;
pub use sink::CsvSink;
pub use sources::{Constant, SineSource, StepSource};

blockflow_core::export_plugin! {
    "Constant" => Constant,
    "SineSource" => SineSource,
    "StepSource" => StepSource,
    "Gain" => Gain,
    "Sum" => Sum,
    "Saturation" => Saturation,
    "Selector" => Selector,
    "UnitDelay" => UnitDelay,
    "DiscreteFilter" => DiscreteFilter,
    "PID" => Pid,
    "Pendulum" => Pendulum,
    "CsvSink" => CsvSink,
}

/// Width implied by a scalar-or-vector parameter: vectors longer than one
/// element fix the port width, scalars broadcast over a dynamic width.
fn width_of(values: &[f64]) -> blockflow_core::Width {
    if values.len() > 1 {
        blockflow_core::Width::Fixed(values.len())
    } else {
        blockflow_core::Width::Dynamic
    }
}

/// Expands a scalar-or-vector parameter to `width` elements.
fn broadcast(values: &[f64], width: usize) -> Vec<f64> {
    if values.len() == 1 {
        vec![values[0]; width]
    } else {
        values.to_vec()
    }
}
