//! Fixtures shared by the benchmarks.

use unfold_core::crystal::{optic_axis, AxisSigns, DielectricModel, OpticAxis};
use unfold_core::surface::GridSpec;

/// The bundled example crystal and its `-+` axis.
pub fn left_axis() -> (DielectricModel, OpticAxis) {
    let m = DielectricModel::example();
    let a = optic_axis(&m, AxisSigns::new(false, true)).expect("example crystal is biaxial");
    (m, a)
}

/// Square window of `n` points per side around `axis`.
pub fn window(axis: &OpticAxis, half_width: f64, n: usize) -> GridSpec {
    GridSpec::new(axis.p0(), half_width, n).expect("valid window")
}
