//! Heat kernels of the hyperbolic plane and the Euclidean plane, for the
//! speed-2 Brownian motion (generator = Laplacian).

use std::f64::consts::{PI, SQRT_2};

use num_complex::Complex64;

use super::matrix::{hyp_distance, HPoint};
use super::quad::{integrate, QuadratureSpec};
use crate::error::{Error, Result};

/// `ln(1e18)`: the Gaussian factor is dropped once it falls below 1e-18 of
/// its value at the lower limit.
pub(crate) const GAUSS_TAIL_LOG: f64 = 41.446_531_673_892_82;

/// Hyperbolic heat kernel as a function of the distance `d` at time `t`.
///
/// McKean's integral with `r = d + u^2`, which removes the inverse square
/// root at `r = d`.
pub fn heat_kernel_h_at_distance(d: f64, t: f64, q: &QuadratureSpec) -> Result<f64> {
    if !(t > 0.0) || !(d >= 0.0) {
        return Err(Error::domain(format!(
            "heat kernel needs t > 0 and d >= 0 (t = {t}, d = {d})"
        )));
    }
    let gauss_d = (-d * d / (4.0 * t)).exp();
    if gauss_d == 0.0 {
        return Ok(0.0);
    }
    let r_max = (d * d + 4.0 * t * GAUSS_TAIL_LOG).sqrt();
    let u_max = (r_max - d).sqrt();
    let integrand = |u: f64| {
        let u2 = u * u;
        let r = d + u2;
        // cosh r - cosh d = 2 sinh((r + d)/2) sinh(u^2/2)
        let den = (2.0 * (d + 0.5 * u2).sinh() * (0.5 * u2).sinh()).sqrt();
        if den == 0.0 {
            return 0.0;
        }
        2.0 * u * r * (-u2 * (2.0 * d + u2) / (4.0 * t)).exp() / den
    };
    let est = integrate(integrand, 0.0, u_max, q)?;
    let pref = SQRT_2 / (4.0 * PI * t).powf(1.5) * (-t / 4.0).exp();
    Ok(pref * gauss_d * est.value)
}

pub fn heat_kernel_h(z: HPoint, w: HPoint, t: f64, q: &QuadratureSpec) -> Result<f64> {
    let d = hyp_distance(z, w)?;
    heat_kernel_h_at_distance(d, t, q)
}

/// `p_C(z, w; t) = exp(-|z - w|^2 / 4t) / (4 pi t)`.
pub fn heat_kernel_c(z: Complex64, w: Complex64, t: f64) -> Result<f64> {
    if !(t > 0.0) {
        return Err(Error::domain(format!("heat kernel needs t > 0 (t = {t})")));
    }
    Ok((-(z - w).norm_sqr() / (4.0 * t)).exp() / (4.0 * PI * t))
}
