//! Standard normal CDF helpers that stay accurate deep in the lower tail.

use std::f64::consts::{FRAC_1_SQRT_2, PI};

const TAIL: f64 = -30.0;

pub fn norm_pdf(z: f64) -> f64 {
    (-0.5 * z * z).exp() / (2.0 * PI).sqrt()
}

pub fn norm_cdf(z: f64) -> f64 {
    0.5 * libm::erfc(-z * FRAC_1_SQRT_2)
}

/// `Φ(z)/φ(z)` for very negative `z` via the asymptotic Mills series.
fn mills_lower(z: f64) -> f64 {
    let x2 = z * z;
    (1.0 - 1.0 / x2 + 3.0 / (x2 * x2) - 15.0 / (x2 * x2 * x2)) / -z
}

pub fn log_norm_cdf(z: f64) -> f64 {
    if z < TAIL {
        -0.5 * z * z - 0.5 * (2.0 * PI).ln() + mills_lower(z).ln()
    } else {
        norm_cdf(z).ln()
    }
}

/// `φ(z)/Φ(z)` without overflow or cancellation.
pub fn pdf_over_cdf(z: f64) -> f64 {
    if z < TAIL {
        1.0 / mills_lower(z)
    } else {
        (-0.5 * z * z - 0.5 * (2.0 * PI).ln() - log_norm_cdf(z)).exp()
    }
}
