//! Number formatting for exported files.

/// Formats with 17 significant digits, which round-trips every `f64`.
pub fn fmt17(x: f64) -> String {
    if x.is_finite() {
        format!("{:.16e}", x)
    } else if x.is_nan() {
        "nan".to_string()
    } else if x > 0.0 {
        "inf".to_string()
    } else {
        "-inf".to_string()
    }
}
