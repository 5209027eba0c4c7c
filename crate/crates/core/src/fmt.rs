//! Number formatting shared by the file writers.

/// Formats `x` with 17 significant digits in scientific notation.
///
/// The output is a valid JSON number and round-trips any finite `f64`.
pub fn sig17(x: f64) -> String {
    format!("{x:.16e}")
}
