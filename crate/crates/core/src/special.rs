//! Special functions needed by the constants and exact solutions.

#[inline]
pub fn gamma(x: f64) -> f64 {
    libm::tgamma(x)
}

/// Euler beta function `B(a, b)` for positive arguments.
pub fn beta(a: f64, b: f64) -> f64 {
    libm::exp(libm::lgamma(a) + libm::lgamma(b) - libm::lgamma(a + b))
}

/// `x^p` for `x > 0` through `exp(p ln x)`.
#[inline]
pub fn powf(x: f64, p: f64) -> f64 {
    libm::exp(p * libm::log(x))
}
