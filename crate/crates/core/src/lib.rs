//! Engine-agnostic block contracts.
//!
//! A block talks to whatever engine hosts it through two traits only:
//! the engine drives a [`Block`] through its lifecycle, and the block reads
//! parameters, port data, step size and time through a [`BlockContext`].
//! The [`ffi`] module carries both traits across a flat C ABI so block
//! libraries can be compiled once and loaded by any engine at runtime.

pub mod block;
pub mod context;
pub mod export;
pub mod ffi;
pub mod logfmt;
pub mod param;
pub mod signal;
pub mod testing;
pub mod types;

pub use block::{Block, BlockError, Lifecycle, Stage};
pub use context::BlockContext;
pub use param::{ParamKind, ParamValue, Parameters};
pub use signal::{Signal, SignalRef};
pub use types::{DataType, Direction, PortSpec, Width};
