//! Float helpers routed through `libm` so the crate builds without `std` and
//! produces bit-identical results in both modes.

pub fn abs(x: f64) -> f64 {
    libm::fabs(x)
}

pub fn powf(x: f64, e: f64) -> f64 {
    libm::pow(x, e)
}

pub fn sqrt(x: f64) -> f64 {
    libm::sqrt(x)
}

pub fn ln(x: f64) -> f64 {
    libm::log(x)
}

pub fn log2(x: f64) -> f64 {
    libm::log2(x)
}

pub fn floor(x: f64) -> f64 {
    libm::floor(x)
}

pub fn ceil(x: f64) -> f64 {
    libm::ceil(x)
}

pub fn exp2(x: f64) -> f64 {
    libm::exp2(x)
}

/// 2^n for an integer scale, exact for the range of scales used here.
pub fn pow2(n: i32) -> f64 {
    exp2(n as f64)
}

/// Maximum of a nonempty iterator of floats (NaN-free inputs assumed).
pub fn fmax_iter<I: IntoIterator<Item = f64>>(it: I) -> Option<f64> {
    it.into_iter().fold(None, |acc, v| match acc {
        None => Some(v),
        Some(a) => Some(if v > a { v } else { a }),
    })
}
