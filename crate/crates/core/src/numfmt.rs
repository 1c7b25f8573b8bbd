//! Round-trip float formatting for CSV and report output.

/// 17 significant digits in scientific notation; parses back to the same bits.
pub fn sci17(x: f64) -> String {
    format!("{x:.16e}")
}
