//! Masses of loops separating or hitting a compact set `K`, from the
//! derivative moduli of uniformizing maps. Only closed-form presets (circle,
//! ellipse, radial slit) are provided; general conformal maps are inputs.

use std::f64::consts::PI;

use super::{require_winding, FormulaId, MassResult};
use crate::error::{Error, Result};

/// Negative thickness down to this value is treated as rounding.
pub const GRUNSKY_TOL: f64 = 1e-12;

/// Loops in the disc `D` winding `m` times around 0 and hitting `K`, where
/// `psi: D \ K -> unit disc` fixes 0.
pub fn mass_disc_winding_intersecting_k(log_psi_prime: f64, m: i64) -> Result<MassResult> {
    if !(log_psi_prime >= 0.0) {
        return Err(Error::Schwarz(log_psi_prime));
    }
    require_winding(m)?;
    let mf = m as f64;
    Ok(MassResult::exact(
        FormulaId::DiscWindingK,
        log_psi_prime / (2.0 * PI * PI * mf * mf),
        &[("log_psi_prime", log_psi_prime), ("m", mf)],
    ))
}

/// `theta(K) = log|h'(inf)| - log|f'(0)|` for the interior map `f` (disc onto
/// the bounded component, `f(0) = 0`) and exterior map `h` (`h(inf) = inf`).
pub fn electrical_thickness(log_f_prime: f64, log_h_prime: f64) -> Result<f64> {
    let theta = log_h_prime - log_f_prime;
    if !theta.is_finite() {
        return Err(Error::domain("electrical thickness is not finite"));
    }
    if theta < -GRUNSKY_TOL {
        return Err(Error::Grunsky { theta });
    }
    Ok(theta.max(0.0))
}

/// Loops on the sphere winding `m` times around `K` (separating 0 from
/// infinity) and hitting it.
pub fn mass_sphere_winding_intersecting_k(theta: f64, m: i64) -> Result<MassResult> {
    if theta < -GRUNSKY_TOL || !theta.is_finite() {
        return Err(Error::Grunsky { theta });
    }
    require_winding(m)?;
    let theta = theta.max(0.0);
    let mf = m as f64;
    Ok(MassResult::exact(
        FormulaId::ElectricThicknessWinding,
        theta / (2.0 * PI * PI * mf * mf) + 0.5 / mf.abs(),
        &[("theta", theta), ("m", mf)],
    ))
}

/// `(log f'(0), log h'(inf))` for the circle of radius `rho`.
pub fn circle_log_derivatives(rho: f64) -> Result<(f64, f64)> {
    if !(rho > 0.0) {
        return Err(Error::domain("circle radius must be positive"));
    }
    Ok((rho.ln(), rho.ln()))
}

/// `f'(0)` for the map of the unit disc onto the ellipse with semi-axes
/// `(cosh s, sinh s)` centred at 0: `1 / (theta_2(q) theta_3(q))` with
/// nome `q = e^{-4s}`.
pub fn ellipse_interior_derivative(s: f64) -> Result<f64> {
    if !(s > 0.0) {
        return Err(Error::domain("ellipse parameter s must be positive"));
    }
    let q = (-4.0 * s).exp();
    let mut theta2 = 0.0;
    let mut theta3 = 1.0;
    for n in 0..64 {
        let n = n as f64;
        let t2 = q.powf(n * (n + 1.0));
        let t3 = if n > 0.0 { 2.0 * q.powf(n * n) } else { 0.0 };
        theta2 += t2;
        theta3 += t3;
        if t2 < 1e-18 * theta2 && (n == 0.0 || t3 < 1e-18 * theta3) {
            break;
        }
    }
    theta2 *= 2.0 * q.powf(0.25);
    Ok(1.0 / (theta2 * theta3))
}

/// `(log f'(0), log h'(inf))` for the ellipse with semi-axes
/// `(cosh s, sinh s)`; the exterior map is `z -> (e^s z + e^-s / z) / 2`.
pub fn ellipse_log_derivatives(s: f64) -> Result<(f64, f64)> {
    let f = ellipse_interior_derivative(s)?;
    Ok((f.ln(), s - std::f64::consts::LN_2))
}

/// `log psi'(0)` for the slit disc `D \ [a, 1)`: `psi'(0) = (1 + a)^2 / (4a)`.
pub fn radial_slit_log_psi_prime(a: f64) -> Result<f64> {
    if !(a > 0.0 && a < 1.0) {
        return Err(Error::domain("slit endpoint a must lie in (0, 1)"));
    }
    Ok(2.0 * a.ln_1p() - (4.0 * a).ln())
}
