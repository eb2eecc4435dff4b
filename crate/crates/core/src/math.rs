//! `libm` shims so the numerics read like `std` float code.

#[inline]
pub(crate) fn ln(x: f64) -> f64 {
    libm::log(x)
}

#[inline]
pub(crate) fn exp(x: f64) -> f64 {
    libm::exp(x)
}

#[inline]
pub(crate) fn sqrt(x: f64) -> f64 {
    libm::sqrt(x)
}

#[inline]
pub(crate) fn hypot(x: f64, y: f64) -> f64 {
    libm::hypot(x, y)
}

#[inline]
pub(crate) fn powf(x: f64, y: f64) -> f64 {
    libm::pow(x, y)
}

#[inline]
pub(crate) fn sin(x: f64) -> f64 {
    libm::sin(x)
}

#[inline]
pub(crate) fn cos(x: f64) -> f64 {
    libm::cos(x)
}

/// `2^e` for `e` in the normal exponent range.
#[inline]
pub(crate) fn exp2i(e: i32) -> f64 {
    libm::ldexp(1.0, e)
}

/// Binary exponent `e` with `x = m * 2^e`, `0.5 <= |m| < 1`; zero for `x == 0`.
#[inline]
pub(crate) fn frexp_exponent(x: f64) -> i32 {
    if x == 0.0 || !x.is_finite() {
        0
    } else {
        libm::frexp(x).1
    }
}
