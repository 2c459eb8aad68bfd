//! Decimal text for CSV cells.
//!
//! Both branches print the shortest digits that parse back to the same
//! `f64`, so every cell round-trips exactly.

pub fn num(x: f64) -> String {
    let a = x.abs();
    if x == 0.0 || !x.is_finite() || (1e-4..1e15).contains(&a) {
        format!("{x}")
    } else {
        format!("{x:e}")
    }
}

pub fn opt(x: Option<f64>) -> String {
    x.map(num).unwrap_or_default()
}
