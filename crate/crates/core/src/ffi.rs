//! Flat C calling convention between engines and block plugins.
//!
//! A plugin exports two symbols:
//!
//! * `blockflow_plugin_manifest() -> *const BfManifest`, a static manifest
//!   holding the ABI version and the block labels the library provides;
//! * `blockflow_create(label: *const c_char) -> BfBlock`, the factory. It
//!   returns an opaque instance plus a [`BfBlockVTable`] for the lifecycle
//!   calls, or a null instance when the label is unknown.
//!
//! Every lifecycle call receives a [`BfContext`]: an opaque engine pointer
//! plus a [`BfContextVTable`] through which the block queries parameters,
//! ports, signals, step size and time. No Rust object layout crosses the
//! boundary, so engines and plugins only have to agree on [`ABI_VERSION`].
//!
//! Pointers handed out by the engine (strings, parameter payloads, input
//! buffers) stay valid until the lifecycle call returns or the next callback
//! of the same kind, whichever comes first. Plugins copy what they keep.

use std::any::Any;
use std::ffi::c_void;
use std::os::raw::c_char;
use std::sync::Arc;

use crate::block::{Block, BlockError};
use crate::context::BlockContext;
use crate::param::{ParamKind, ParamValue};
use crate::signal::SignalRef;
use crate::types::{DataType, Direction, PortSpec, Width};

/// Version of this calling convention. Engines refuse plugins that report
/// any other value.
pub const ABI_VERSION: u32 = 2;

pub const MANIFEST_SYMBOL: &str = "blockflow_plugin_manifest";
pub const CREATE_SYMBOL: &str = "blockflow_create";

pub type BfStatus = i32;
pub const BF_OK: BfStatus = 0;
pub const BF_ERROR: BfStatus = 1;

#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct BfStr {
    pub ptr: *const u8,
    pub len: usize,
}

impl BfStr {
    pub const EMPTY: BfStr = BfStr {
        ptr: std::ptr::null(),
        len: 0,
    };

    pub fn new(s: &str) -> Self {
        BfStr {
            ptr: s.as_ptr(),
            len: s.len(),
        }
    }

    /// # Safety
    /// `ptr` must reference `len` readable bytes for the chosen lifetime.
    pub unsafe fn to_str<'a>(self) -> Option<&'a str> {
        if self.len == 0 {
            return Some("");
        }
        if self.ptr.is_null() {
            return None;
        }
        std::str::from_utf8(std::slice::from_raw_parts(self.ptr, self.len)).ok()
    }
}

#[repr(C)]
pub struct BfManifest {
    pub abi_version: u32,
    pub label_count: usize,
    pub labels: *const BfStr,
}

#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct BfPortSpec {
    pub index: usize,
    /// 0 = input, 1 = output.
    pub direction: u32,
    pub dtype: u32,
    /// 0 = dynamic.
    pub width: usize,
    pub feedthrough: bool,
    pub finite_only: bool,
}

impl From<PortSpec> for BfPortSpec {
    fn from(p: PortSpec) -> Self {
        BfPortSpec {
            index: p.index,
            direction: match p.direction {
                Direction::Input => 0,
                Direction::Output => 1,
            },
            dtype: p.dtype.code(),
            width: p.width.fixed().unwrap_or(0),
            feedthrough: p.feedthrough,
            finite_only: p.finite_only,
        }
    }
}

impl BfPortSpec {
    pub fn to_spec(self) -> Option<PortSpec> {
        let direction = match self.direction {
            0 => Direction::Input,
            1 => Direction::Output,
            _ => return None,
        };
        Some(PortSpec {
            index: self.index,
            direction,
            dtype: DataType::from_code(self.dtype)?,
            width: if self.width == 0 {
                Width::Dynamic
            } else {
                Width::Fixed(self.width)
            },
            feedthrough: self.feedthrough,
            finite_only: self.finite_only,
        })
    }
}

#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct BfSignal {
    pub dtype: u32,
    pub len: usize,
    pub data: *const c_void,
}

impl BfSignal {
    pub const EMPTY: BfSignal = BfSignal {
        dtype: 0,
        len: 0,
        data: std::ptr::null(),
    };

    pub fn new(signal: SignalRef<'_>) -> Self {
        let data = match signal {
            SignalRef::Float64(v) => v.as_ptr() as *const c_void,
            SignalRef::Int32(v) => v.as_ptr() as *const c_void,
            SignalRef::Bool(v) => v.as_ptr() as *const c_void,
        };
        BfSignal {
            dtype: signal.dtype().code(),
            len: signal.len(),
            data,
        }
    }

    /// # Safety
    /// `data` must point to `len` initialized elements of `dtype`.
    pub unsafe fn to_ref<'a>(self) -> Option<SignalRef<'a>> {
        use std::slice::from_raw_parts;
        let dtype = DataType::from_code(self.dtype)?;
        if self.len == 0 || self.data.is_null() {
            return None;
        }
        Some(match dtype {
            DataType::Float64 => SignalRef::Float64(from_raw_parts(self.data as *const f64, self.len)),
            DataType::Int32 => SignalRef::Int32(from_raw_parts(self.data as *const i32, self.len)),
            DataType::Bool => SignalRef::Bool(from_raw_parts(self.data as *const bool, self.len)),
        })
    }
}

#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct BfParam {
    pub kind: u32,
    pub number: f64,
    pub integer: i64,
    pub flag: bool,
    /// String bytes or `f64` elements, depending on `kind`.
    pub data: *const c_void,
    pub len: usize,
}

impl BfParam {
    pub const EMPTY: BfParam = BfParam {
        kind: 0,
        number: 0.0,
        integer: 0,
        flag: false,
        data: std::ptr::null(),
        len: 0,
    };

    pub fn new(value: &ParamValue) -> Self {
        let mut out = BfParam {
            kind: value.kind().code(),
            ..BfParam::EMPTY
        };
        match value {
            ParamValue::Float(v) => out.number = *v,
            ParamValue::Int(v) => out.integer = *v,
            ParamValue::Bool(v) => out.flag = *v,
            ParamValue::Str(s) => {
                out.data = s.as_ptr() as *const c_void;
                out.len = s.len();
            }
            ParamValue::FloatVec(v) => {
                out.data = v.as_ptr() as *const c_void;
                out.len = v.len();
            }
        }
        out
    }

    /// Copies the payload into an owned value.
    ///
    /// # Safety
    /// Payload pointers must be valid as described in the module docs.
    pub unsafe fn to_value(self) -> Option<ParamValue> {
        Some(match ParamKind::from_code(self.kind)? {
            ParamKind::Float => ParamValue::Float(self.number),
            ParamKind::Int => ParamValue::Int(self.integer),
            ParamKind::Bool => ParamValue::Bool(self.flag),
            ParamKind::Str => ParamValue::Str(
                BfStr {
                    ptr: self.data as *const u8,
                    len: self.len,
                }
                .to_str()?
                .to_owned(),
            ),
            ParamKind::FloatVec => {
                if self.len == 0 {
                    ParamValue::FloatVec(Vec::new())
                } else {
                    ParamValue::FloatVec(
                        std::slice::from_raw_parts(self.data as *const f64, self.len).to_vec(),
                    )
                }
            }
        })
    }
}

/// Engine services offered to a block during one lifecycle call.
#[repr(C)]
pub struct BfContextVTable {
    pub instance_name: unsafe extern "C" fn(*mut c_void) -> BfStr,
    pub parameter: unsafe extern "C" fn(*mut c_void, BfStr, *mut BfParam) -> bool,
    pub configuration: unsafe extern "C" fn(*mut c_void, BfStr, *mut BfParam) -> bool,
    pub step_size: unsafe extern "C" fn(*mut c_void) -> f64,
    pub time: unsafe extern "C" fn(*mut c_void) -> f64,
    pub step_index: unsafe extern "C" fn(*mut c_void) -> u64,
    pub input_count: unsafe extern "C" fn(*mut c_void) -> usize,
    pub output_count: unsafe extern "C" fn(*mut c_void) -> usize,
    pub input_spec: unsafe extern "C" fn(*mut c_void, usize, *mut BfPortSpec) -> bool,
    pub output_spec: unsafe extern "C" fn(*mut c_void, usize, *mut BfPortSpec) -> bool,
    pub input: unsafe extern "C" fn(*mut c_void, usize, *mut BfSignal) -> bool,
    /// Returns an empty string on success, otherwise the rejection reason.
    pub set_output: unsafe extern "C" fn(*mut c_void, usize, *const BfSignal) -> BfStr,
    /// Only meaningful inside `declare_ports`.
    pub declare_port: unsafe extern "C" fn(*mut c_void, *const BfPortSpec),
    /// Message attached to a non-OK status.
    pub report_error: unsafe extern "C" fn(*mut c_void, BfStr),
}

#[repr(C)]
pub struct BfContext {
    pub data: *mut c_void,
    pub vtable: *const BfContextVTable,
}

#[repr(C)]
pub struct BfBlockVTable {
    pub declare_ports: unsafe extern "C" fn(*mut c_void, *const BfContext) -> BfStatus,
    pub initialize: unsafe extern "C" fn(*mut c_void, *const BfContext) -> BfStatus,
    pub output: unsafe extern "C" fn(*mut c_void, *const BfContext) -> BfStatus,
    pub terminate: unsafe extern "C" fn(*mut c_void, *const BfContext) -> BfStatus,
    pub destroy: unsafe extern "C" fn(*mut c_void),
}

#[repr(C)]
pub struct BfBlock {
    pub instance: *mut c_void,
    pub vtable: *const BfBlockVTable,
}

impl BfBlock {
    pub const NULL: BfBlock = BfBlock {
        instance: std::ptr::null_mut(),
        vtable: std::ptr::null(),
    };

    pub fn is_null(&self) -> bool {
        self.instance.is_null() || self.vtable.is_null()
    }
}

pub type ManifestFn = unsafe extern "C" fn() -> *const BfManifest;
pub type CreateFn = unsafe extern "C" fn(*const c_char) -> BfBlock;

/// Reads the labels out of a manifest.
///
/// # Safety
/// `manifest` must be null or point to a manifest whose label array is valid.
pub unsafe fn manifest_labels(manifest: *const BfManifest) -> Option<(u32, Vec<String>)> {
    let manifest = manifest.as_ref()?;
    let mut labels = Vec::with_capacity(manifest.label_count);
    if manifest.label_count > 0 {
        if manifest.labels.is_null() {
            return None;
        }
        for raw in std::slice::from_raw_parts(manifest.labels, manifest.label_count) {
            labels.push(raw.to_str()?.to_owned());
        }
    }
    Some((manifest.abi_version, labels))
}

// ---------------------------------------------------------------------------
// Host side: a plugin instance seen as a `Block`.

/// A block living behind the C ABI.
///
/// `keepalive` holds whatever owns the code the vtable points into (the
/// loaded library); it is released only after the instance is destroyed.
pub struct ForeignBlock {
    raw: BfBlock,
    keepalive: Option<Arc<dyn Any + Send + Sync>>,
}

// Instances are only ever driven from one thread at a time.
unsafe impl Send for ForeignBlock {}

impl ForeignBlock {
    /// # Safety
    /// `raw` must come from a `blockflow_create` implementation whose code
    /// stays loaded at least as long as `keepalive` is held.
    pub unsafe fn from_raw(raw: BfBlock, keepalive: Option<Arc<dyn Any + Send + Sync>>) -> Option<Self> {
        if raw.is_null() {
            return None;
        }
        Some(ForeignBlock { raw, keepalive })
    }

    fn call(
        &mut self,
        select: fn(&BfBlockVTable) -> unsafe extern "C" fn(*mut c_void, *const BfContext) -> BfStatus,
        ctx: &mut dyn BlockContext,
    ) -> Result<Vec<PortSpec>, BlockError> {
        let mut host = HostCtx {
            ctx,
            declared: Vec::new(),
            invalid_port: false,
            error: None,
            param: None,
            rejection: String::new(),
        };
        let bf = BfContext {
            data: &mut host as *mut HostCtx<'_> as *mut c_void,
            vtable: &HOST_VTABLE,
        };
        let status = unsafe {
            let f = select(&*self.raw.vtable);
            f(self.raw.instance, &bf)
        };
        if status != BF_OK {
            return Err(BlockError::new(
                host.error.unwrap_or_else(|| "plugin call failed without a message".into()),
            ));
        }
        if host.invalid_port {
            return Err(BlockError::new("plugin declared a malformed port"));
        }
        Ok(host.declared)
    }
}

impl Drop for ForeignBlock {
    fn drop(&mut self) {
        unsafe { ((*self.raw.vtable).destroy)(self.raw.instance) };
        // The library may only go away after the instance is destroyed.
        self.keepalive.take();
    }
}

impl Block for ForeignBlock {
    fn declare_ports(&mut self, ctx: &mut dyn BlockContext) -> Result<Vec<PortSpec>, BlockError> {
        self.call(|vt| vt.declare_ports, ctx)
    }

    fn initialize(&mut self, ctx: &mut dyn BlockContext) -> Result<(), BlockError> {
        self.call(|vt| vt.initialize, ctx).map(drop)
    }

    fn output(&mut self, ctx: &mut dyn BlockContext) -> Result<(), BlockError> {
        self.call(|vt| vt.output, ctx).map(drop)
    }

    fn terminate(&mut self, ctx: &mut dyn BlockContext) -> Result<(), BlockError> {
        self.call(|vt| vt.terminate, ctx).map(drop)
    }
}

struct HostCtx<'a> {
    ctx: &'a mut dyn BlockContext,
    declared: Vec<PortSpec>,
    invalid_port: bool,
    error: Option<String>,
    param: Option<ParamValue>,
    rejection: String,
}

unsafe fn host<'a>(data: *mut c_void) -> &'a mut HostCtx<'a> {
    &mut *(data as *mut HostCtx<'a>)
}

unsafe extern "C" fn host_instance_name(data: *mut c_void) -> BfStr {
    BfStr::new(host(data).ctx.instance_name())
}

unsafe extern "C" fn host_parameter(data: *mut c_void, name: BfStr, out: *mut BfParam) -> bool {
    let h = host(data);
    let Some(name) = name.to_str() else { return false };
    h.param = h.ctx.parameter(name);
    match &h.param {
        Some(v) => {
            *out = BfParam::new(v);
            true
        }
        None => false,
    }
}

unsafe extern "C" fn host_configuration(data: *mut c_void, key: BfStr, out: *mut BfParam) -> bool {
    let h = host(data);
    let Some(key) = key.to_str() else { return false };
    h.param = h.ctx.configuration(key);
    match &h.param {
        Some(v) => {
            *out = BfParam::new(v);
            true
        }
        None => false,
    }
}

unsafe extern "C" fn host_step_size(data: *mut c_void) -> f64 {
    host(data).ctx.step_size()
}

unsafe extern "C" fn host_time(data: *mut c_void) -> f64 {
    host(data).ctx.time()
}

unsafe extern "C" fn host_step_index(data: *mut c_void) -> u64 {
    host(data).ctx.step_index()
}

unsafe extern "C" fn host_input_count(data: *mut c_void) -> usize {
    host(data).ctx.input_count()
}

unsafe extern "C" fn host_output_count(data: *mut c_void) -> usize {
    host(data).ctx.output_count()
}

unsafe extern "C" fn host_input_spec(data: *mut c_void, index: usize, out: *mut BfPortSpec) -> bool {
    match host(data).ctx.input_spec(index) {
        Some(spec) => {
            *out = spec.into();
            true
        }
        None => false,
    }
}

unsafe extern "C" fn host_output_spec(data: *mut c_void, index: usize, out: *mut BfPortSpec) -> bool {
    match host(data).ctx.output_spec(index) {
        Some(spec) => {
            *out = spec.into();
            true
        }
        None => false,
    }
}

unsafe extern "C" fn host_input(data: *mut c_void, index: usize, out: *mut BfSignal) -> bool {
    match host(data).ctx.input(index) {
        Some(signal) => {
            *out = BfSignal::new(signal);
            true
        }
        None => false,
    }
}

unsafe extern "C" fn host_set_output(data: *mut c_void, index: usize, values: *const BfSignal) -> BfStr {
    let h = host(data);
    let result = match values.as_ref().and_then(|v| v.to_ref()) {
        Some(values) => h.ctx.set_output(index, values),
        None => Err(BlockError::new("malformed signal passed to set_output")),
    };
    match result {
        Ok(()) => BfStr::EMPTY,
        Err(e) => {
            h.rejection = e.to_string();
            BfStr::new(&h.rejection)
        }
    }
}

unsafe extern "C" fn host_declare_port(data: *mut c_void, spec: *const BfPortSpec) {
    let h = host(data);
    match spec.as_ref().and_then(|s| s.to_spec()) {
        Some(spec) => h.declared.push(spec),
        None => h.invalid_port = true,
    }
}

unsafe extern "C" fn host_report_error(data: *mut c_void, message: BfStr) {
    let h = host(data);
    h.error = Some(message.to_str().unwrap_or("<non-utf8 error message>").to_owned());
}

static HOST_VTABLE: BfContextVTable = BfContextVTable {
    instance_name: host_instance_name,
    parameter: host_parameter,
    configuration: host_configuration,
    step_size: host_step_size,
    time: host_time,
    step_index: host_step_index,
    input_count: host_input_count,
    output_count: host_output_count,
    input_spec: host_input_spec,
    output_spec: host_output_spec,
    input: host_input,
    set_output: host_set_output,
    declare_port: host_declare_port,
    report_error: host_report_error,
};
