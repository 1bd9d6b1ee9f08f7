//! Text formatting shared by the CSV writers.

/// 17-significant-digit scientific notation; parses back to the same `f64`.
pub fn real(x: f64) -> String {
    format!("{x:.16e}")
}
