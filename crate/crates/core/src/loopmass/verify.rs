//! Quadrature checks of the two heat-kernel computations behind the
//! hyperbolic class mass: the strip integral of the kernel along one
//! conjugacy class, and the `dt/t` integral of the result.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hypgeom::quad::{integrate, integrate_pieces, QuadratureSpec};
use crate::hypgeom::{erf, heat_kernel_h_at_distance};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StripCheck {
    pub lhs: f64,
    pub rhs: f64,
    pub abs_err: f64,
    /// Estimated quadrature error of `lhs`.
    pub quad_error: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TimeIntegralCheck {
    pub numeric: f64,
    pub erf_route: f64,
    pub closed_form: f64,
    /// `|numeric - closed_form|`.
    pub abs_err: f64,
    /// `|erf_route - closed_form|`.
    pub erf_abs_err: f64,
}

fn validate(l: f64, m: u32) -> Result<()> {
    if !(l > 0.0 && l.is_finite()) || m < 1 {
        return Err(Error::domain(format!("need L > 0 and m >= 1 (L = {l}, m = {m})")));
    }
    Ok(())
}

/// Heat kernel integrated over the strip `{1 <= y < e^{L/m}}` against
/// `p_H(z, e^L z; t)`, as a two-dimensional quadrature in `(y, x)`, next to
/// its closed form
/// `e^{-t/4} e^{-L^2/4t} L / (4 sqrt(pi t) m sinh(L/2))`.
pub fn verify_strip_heat_integral(l: f64, m: u32, t: f64, q: &QuadratureSpec) -> Result<StripCheck> {
    validate(l, m)?;
    if !(t > 0.0) {
        return Err(Error::domain("t must be positive"));
    }
    q.validate()?;
    let sh2 = (0.5 * l).sinh().powi(2);
    // Beyond u_max the Gaussian factor of the kernel is below e^{-GAUSS_TAIL}.
    let d_max = (4.0 * t * 60.0).sqrt() + 1.0;
    let u_max = 0.5 * (d_max + (-(2.0 * sh2).ln()).max(0.0)) + 1.0;
    let kernel_q = q.with_tolerances(q.abs_tol * 1e-3, q.rel_tol * 1e-3);
    let inner_q = q.with_tolerances(q.abs_tol * 1e-2, q.rel_tol * 1e-2);

    // Inner integral over x in R at height y, with x = y sinh(u).
    let inner = |y: f64| -> Result<f64> {
        let f = |u: f64| {
            let c = u.cosh();
            // cosh d - 1 = 2 sinh^2(L/2) (1 + x^2/y^2)
            let d = acosh_1p(2.0 * sh2 * c * c);
            heat_kernel_h_at_distance(d, t, &kernel_q).unwrap_or(f64::NAN) * y * c
        };
        let e = integrate(f, 0.0, u_max, &inner_q)?;
        if e.value.is_nan() {
            return Err(Error::Numeric {
                what: "strip heat integral: kernel evaluation".into(),
                partial: f64::NAN,
                bound: f64::INFINITY,
            });
        }
        Ok(2.0 * e.value)
    };
    let failure = std::cell::Cell::new(None);
    let outer = |y: f64| match inner(y) {
        Ok(v) => v / (y * y),
        Err(e) => {
            failure.set(Some(e));
            0.0
        }
    };
    let est = integrate(outer, 1.0, (l / m as f64).exp(), q)?;
    if let Some(e) = failure.take() {
        return Err(e);
    }
    let rhs = strip_closed_form(l, m, t);
    Ok(StripCheck {
        lhs: est.value,
        rhs,
        abs_err: (est.value - rhs).abs(),
        quad_error: est.error,
    })
}

/// `acosh(1 + x)`, accurate for small `x`.
fn acosh_1p(x: f64) -> f64 {
    (x + (x * (x + 2.0)).sqrt()).ln_1p()
}

fn strip_closed_form(l: f64, m: u32, t: f64) -> f64 {
    (-t / 4.0 - l * l / (4.0 * t)).exp() / (4.0 * (PI * t).sqrt()) * l / (m as f64 * (0.5 * l).sinh())
}

/// `(1/t)` times the strip closed form: the `dt/t` integrand.
pub fn time_integrand(l: f64, m: u32, t: f64) -> f64 {
    strip_closed_form(l, m, t) / t
}

/// Antiderivative in `t` of [`time_integrand`]:
/// `(L / (m sinh(L/2))) e^{-L/2} / (4L) [-erf((L-t)/2 sqrt t) - e^L erf((L+t)/2 sqrt t)]`.
pub fn time_antiderivative(l: f64, m: u32, t: f64) -> f64 {
    let st = 2.0 * t.sqrt();
    let pref = (-0.5 * l).exp() / (4.0 * m as f64 * (0.5 * l).sinh());
    pref * (-erf((l - t) / st) - l.exp() * erf((l + t) / st))
}

/// `int_0^inf time_integrand dt` by quadrature in `s = ln t`, and by the erf
/// antiderivative, against `1/(m (e^L - 1))`.
pub fn verify_time_integral(l: f64, m: u32, q: &QuadratureSpec) -> Result<TimeIntegralCheck> {
    validate(l, m)?;
    q.validate()?;
    // Outside [s_lo, s_hi] one of the factors e^{-L^2/4t}, e^{-t/4} is below e^{-700}.
    let s_lo = (l * l / 2800.0).ln();
    let s_hi = 2800f64.ln();
    let peak = (l * l / 4.0).ln().clamp(s_lo, s_hi); // log of the stationary point scale
    let points = [s_lo, peak - 3.0, peak, peak + 3.0, s_hi];
    let mut pts: Vec<f64> = points.iter().copied().filter(|p| *p >= s_lo && *p <= s_hi).collect();
    pts.sort_by(f64::total_cmp);
    pts.dedup();
    let est = integrate_pieces(|s| time_integrand(l, m, s.exp()) * s.exp(), &pts, q)?;
    let erf_route = time_antiderivative(l, m, s_hi.exp()) - time_antiderivative(l, m, s_lo.exp());
    let closed_form = 1.0 / (m as f64 * l.exp_m1());
    Ok(TimeIntegralCheck {
        numeric: est.value,
        erf_route,
        closed_form,
        abs_err: (est.value - closed_form).abs(),
        erf_abs_err: (erf_route - closed_form).abs(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q() -> QuadratureSpec {
        QuadratureSpec::default().with_tolerances(1e-12, 1e-10)
    }

    #[test]
    fn strip_unit_case() {
        let c = verify_strip_heat_integral(1.0, 1, 1.0, &q()).unwrap();
        assert!((c.rhs - 0.164172597941550).abs() < 1e-14);
        assert!(c.abs_err <= 1e-6, "{c:?}");
    }

    #[test]
    fn strip_scales_with_m() {
        let a = verify_strip_heat_integral(2.0, 1, 0.5, &q()).unwrap().lhs;
        let b = verify_strip_heat_integral(2.0, 3, 0.5, &q()).unwrap().lhs;
        assert!((a / 3.0 - b).abs() < 1e-9);
    }

    #[test]
    fn strip_small_time_vanishes() {
        assert!(strip_closed_form(1.0, 1, 0.01) < 1e-10);
    }

    #[test]
    fn time_unit_case() {
        let c = verify_time_integral(1.0, 1, &q()).unwrap();
        assert!((c.closed_form - 1.0 / (std::f64::consts::E - 1.0)).abs() < 1e-16);
        assert!(c.abs_err <= 1e-8 && c.erf_abs_err <= 1e-12, "{c:?}");
    }

    #[test]
    fn antiderivative_limits() {
        for l in [0.5, 1.0, 4.0] {
            let lo = time_antiderivative(l, 1, 1e-8);
            let hi = time_antiderivative(l, 1, 1e8);
            assert!((hi - lo - 1.0 / l.exp_m1()).abs() < 1e-14);
        }
    }

    #[test]
    fn antiderivative_derivative() {
        let h = 1e-5;
        let fd = (time_antiderivative(1.0, 1, 1.0 + h) - time_antiderivative(1.0, 1, 1.0 - h)) / (2.0 * h);
        assert!((fd - time_integrand(1.0, 1, 1.0)).abs() < 1e-6);
    }

    #[test]
    fn rejects_bad_inputs() {
        assert!(verify_time_integral(0.0, 1, &q()).is_err());
        assert!(verify_strip_heat_integral(1.0, 0, 1.0, &q()).is_err());
    }
}
