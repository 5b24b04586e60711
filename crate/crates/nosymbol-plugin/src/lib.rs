//! An ordinary shared library with no plugin entry points.

#[no_mangle]
pub extern "C" fn nosymbol_answer() -> i32 {
    42
}
