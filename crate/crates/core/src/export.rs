//! Plugin side of the C ABI.
//!
//! Block libraries normally use [`export_plugin!`](crate::export_plugin),
//! which generates the two entry symbols from a label table. The pieces
//! below are public so unusual plugins (tests, shims) can assemble the
//! symbols by hand.

use std::ffi::{c_void, CStr};
use std::os::raw::c_char;
use std::panic::{catch_unwind, AssertUnwindSafe};

use crate::block::{Block, BlockError, Lifecycle};
use crate::context::BlockContext;
use crate::ffi::{
    BfBlock, BfBlockVTable, BfContext, BfContextVTable, BfManifest, BfParam, BfPortSpec, BfSignal,
    BfStatus, BfStr, BF_ERROR, BF_OK,
};
use crate::param::ParamValue;
use crate::signal::SignalRef;
use crate::types::PortSpec;

pub type Constructor = fn() -> Box<dyn Block>;

pub fn construct<B: Block + Default + 'static>() -> Box<dyn Block> {
    Box::new(B::default())
}

/// Owns the memory a [`BfManifest`] points into.
pub struct ManifestStorage {
    _labels: Vec<BfStr>,
    manifest: BfManifest,
}

// The manifest only references 'static label strings and is never mutated.
unsafe impl Send for ManifestStorage {}
unsafe impl Sync for ManifestStorage {}

impl ManifestStorage {
    pub fn new(abi_version: u32, labels: &[&'static str]) -> Self {
        let labels: Vec<BfStr> = labels.iter().map(|l| BfStr::new(l)).collect();
        let manifest = BfManifest {
            abi_version,
            label_count: labels.len(),
            labels: labels.as_ptr(),
        };
        ManifestStorage {
            _labels: labels,
            manifest,
        }
    }

    pub fn as_ptr(&self) -> *const BfManifest {
        &self.manifest
    }
}

/// Factory behind `blockflow_create`: looks `label` up in `table` and boxes a
/// fresh, lifecycle-guarded instance. Unknown labels yield a null block.
///
/// # Safety
/// `label` must be null or a NUL-terminated string.
pub unsafe fn create(table: &[(&str, Constructor)], label: *const c_char) -> BfBlock {
    if label.is_null() {
        return BfBlock::NULL;
    }
    let Ok(label) = CStr::from_ptr(label).to_str() else {
        return BfBlock::NULL;
    };
    let Some((_, ctor)) = table.iter().find(|(l, _)| *l == label) else {
        return BfBlock::NULL;
    };
    let Ok(block) = catch_unwind(ctor) else {
        return BfBlock::NULL;
    };
    let instance: Box<Lifecycle<Box<dyn Block>>> = Box::new(Lifecycle::new(block));
    BfBlock {
        instance: Box::into_raw(instance) as *mut c_void,
        vtable: &EXPORT_VTABLE,
    }
}

static EXPORT_VTABLE: BfBlockVTable = BfBlockVTable {
    declare_ports: export_declare_ports,
    initialize: export_initialize,
    output: export_output,
    terminate: export_terminate,
    destroy: export_destroy,
};

type Exported = Lifecycle<Box<dyn Block>>;

unsafe fn dispatch(
    instance: *mut c_void,
    ctx: *const BfContext,
    call: impl FnOnce(&mut Exported, &mut FfiContext<'_>) -> Result<(), BlockError>,
) -> BfStatus {
    let (Some(block), Some(ctx)) = ((instance as *mut Exported).as_mut(), ctx.as_ref()) else {
        return BF_ERROR;
    };
    let mut fctx = FfiContext::new(ctx);
    let outcome = catch_unwind(AssertUnwindSafe(|| call(block, &mut fctx)));
    let error = match outcome {
        Ok(Ok(())) => return BF_OK,
        Ok(Err(e)) => e.to_string(),
        Err(panic) => {
            let detail = panic
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| panic.downcast_ref::<String>().cloned())
                .unwrap_or_default();
            format!("block panicked: {detail}")
        }
    };
    fctx.report_error(&error);
    BF_ERROR
}

unsafe extern "C" fn export_declare_ports(instance: *mut c_void, ctx: *const BfContext) -> BfStatus {
    dispatch(instance, ctx, |block, fctx| {
        let ports = block.declare_ports(fctx)?;
        for port in ports {
            fctx.declare_port(port);
        }
        Ok(())
    })
}

unsafe extern "C" fn export_initialize(instance: *mut c_void, ctx: *const BfContext) -> BfStatus {
    dispatch(instance, ctx, |block, fctx| block.initialize(fctx))
}

unsafe extern "C" fn export_output(instance: *mut c_void, ctx: *const BfContext) -> BfStatus {
    dispatch(instance, ctx, |block, fctx| block.output(fctx))
}

unsafe extern "C" fn export_terminate(instance: *mut c_void, ctx: *const BfContext) -> BfStatus {
    dispatch(instance, ctx, |block, fctx| block.terminate(fctx))
}

unsafe extern "C" fn export_destroy(instance: *mut c_void) {
    if !instance.is_null() {
        drop(Box::from_raw(instance as *mut Exported));
    }
}

/// A [`BfContext`] seen from inside a plugin.
pub struct FfiContext<'a> {
    data: *mut c_void,
    vtable: &'a BfContextVTable,
}

impl<'a> FfiContext<'a> {
    /// # Safety
    /// `ctx.vtable` must be valid for the duration of the lifecycle call.
    pub unsafe fn new(ctx: &'a BfContext) -> Self {
        FfiContext {
            data: ctx.data,
            vtable: &*ctx.vtable,
        }
    }

    fn declare_port(&mut self, port: PortSpec) {
        let raw = BfPortSpec::from(port);
        unsafe { (self.vtable.declare_port)(self.data, &raw) }
    }

    fn report_error(&mut self, message: &str) {
        unsafe { (self.vtable.report_error)(self.data, BfStr::new(message)) }
    }

    fn lookup(
        &self,
        f: unsafe extern "C" fn(*mut c_void, BfStr, *mut BfParam) -> bool,
        name: &str,
    ) -> Option<ParamValue> {
        let mut raw = BfParam::EMPTY;
        unsafe {
            if f(self.data, BfStr::new(name), &mut raw) {
                raw.to_value()
            } else {
                None
            }
        }
    }
}

impl BlockContext for FfiContext<'_> {
    fn instance_name(&self) -> &str {
        unsafe { (self.vtable.instance_name)(self.data).to_str().unwrap_or("") }
    }

    fn parameter(&self, name: &str) -> Option<ParamValue> {
        self.lookup(self.vtable.parameter, name)
    }

    fn configuration(&self, key: &str) -> Option<ParamValue> {
        self.lookup(self.vtable.configuration, key)
    }

    fn step_size(&self) -> f64 {
        unsafe { (self.vtable.step_size)(self.data) }
    }

    fn time(&self) -> f64 {
        unsafe { (self.vtable.time)(self.data) }
    }

    fn step_index(&self) -> u64 {
        unsafe { (self.vtable.step_index)(self.data) }
    }

    fn input_count(&self) -> usize {
        unsafe { (self.vtable.input_count)(self.data) }
    }

    fn output_count(&self) -> usize {
        unsafe { (self.vtable.output_count)(self.data) }
    }

    fn input_spec(&self, index: usize) -> Option<PortSpec> {
        let mut raw = BfPortSpec::from(PortSpec::input(0, crate::DataType::Float64, crate::Width::Dynamic));
        unsafe { (self.vtable.input_spec)(self.data, index, &mut raw) }
            .then(|| raw.to_spec())
            .flatten()
    }

    fn output_spec(&self, index: usize) -> Option<PortSpec> {
        let mut raw = BfPortSpec::from(PortSpec::output(0, crate::DataType::Float64, crate::Width::Dynamic));
        unsafe { (self.vtable.output_spec)(self.data, index, &mut raw) }
            .then(|| raw.to_spec())
            .flatten()
    }

    fn input(&self, index: usize) -> Option<SignalRef<'_>> {
        let mut raw = BfSignal::EMPTY;
        unsafe {
            if (self.vtable.input)(self.data, index, &mut raw) {
                raw.to_ref()
            } else {
                None
            }
        }
    }

    fn set_output(&mut self, index: usize, values: SignalRef<'_>) -> Result<(), BlockError> {
        let raw = BfSignal::new(values);
        let rejection = unsafe { (self.vtable.set_output)(self.data, index, &raw) };
        match unsafe { rejection.to_str() } {
            Some("") => Ok(()),
            Some(reason) => Err(BlockError::new(format!("output {index}: {reason}"))),
            None => Err(BlockError::new(format!("output {index}: rejected"))),
        }
    }
}

/// Exports a block library through the C ABI.
///
/// ```ignore
/// blockflow_core::export_plugin! {
///     "Gain" => Gain,
///     "UnitDelay" => UnitDelay,
/// }
/// ```
///
/// Each type must implement `Block + Default`. Besides the two entry
/// symbols, the macro defines `EXPORTED_BLOCKS` for in-process use.
#[macro_export]
macro_rules! export_plugin {
    ($($label:literal => $ty:ty),+ $(,)?) => {
        /// Label table exported by this plugin.
        pub const EXPORTED_BLOCKS: &[(&str, $crate::export::Constructor)] =
            &[$(($label, $crate::export::construct::<$ty>)),+];

        #[no_mangle]
        pub extern "C" fn blockflow_plugin_manifest() -> *const $crate::ffi::BfManifest {
            static MANIFEST: ::std::sync::OnceLock<$crate::export::ManifestStorage> =
                ::std::sync::OnceLock::new();
            MANIFEST
                .get_or_init(|| {
                    $crate::export::ManifestStorage::new($crate::ffi::ABI_VERSION, &[$($label),+])
                })
                .as_ptr()
        }

        /// # Safety
        /// `label` must be null or a NUL-terminated string.
        #[no_mangle]
        pub unsafe extern "C" fn blockflow_create(
            label: *const ::std::os::raw::c_char,
        ) -> $crate::ffi::BfBlock {
            $crate::export::create(EXPORTED_BLOCKS, label)
        }
    };
}
