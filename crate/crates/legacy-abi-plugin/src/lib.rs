//! A plugin built against ABI version 1. Hosts must refuse it.

use std::os::raw::c_char;
use std::sync::OnceLock;

use blockflow_core::export::ManifestStorage;
use blockflow_core::ffi::{BfBlock, BfManifest};

pub const LEGACY_ABI_VERSION: u32 = 1;

#[no_mangle]
pub extern "C" fn blockflow_plugin_manifest() -> *const BfManifest {
    static MANIFEST: OnceLock<ManifestStorage> = OnceLock::new();
    MANIFEST
        .get_or_init(|| ManifestStorage::new(LEGACY_ABI_VERSION, &["Constant"]))
        .as_ptr()
}

/// # Safety
/// Never returns an instance; the label is not read.
#[no_mangle]
pub unsafe extern "C" fn blockflow_create(_label: *const c_char) -> BfBlock {
    BfBlock::NULL
}
