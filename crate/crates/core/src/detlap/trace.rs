//! Geometric side of the heat trace: `S(t)` summed over a primitive
//! spectrum, with the li-tilde continuum beyond the horizon.

use std::cell::Cell;
use std::f64::consts::PI;

use super::PrimitiveSpectrum;
use crate::error::{Error, Result};
use crate::hypgeom::quad::{integrate_pieces, QuadratureSpec};
use crate::hypgeom::CompensatedSum;

/// Iterate sums stop once a term falls below this fraction of the total.
const ITERATE_REL_TOL: f64 = 1e-18;

/// `e^{-t/4} (4 pi t)^{-1/2} l / (2 sinh(m l / 2)) e^{-(m l)^2 / 4t}`.
pub fn heat_trace_term(l: f64, m: u32, t: f64) -> f64 {
    let ml = m as f64 * l;
    // l/(2 sinh(ml/2)) = l e^{-ml/2} / (1 - e^{-ml})
    let log = -t / 4.0 - ml / 2.0 - ml * ml / (4.0 * t);
    l * log.exp() / ((4.0 * PI * t).sqrt() * -(-ml).exp_m1())
}

/// `sum_{m >= first} heat_trace_term(l, m, t)`.
fn iterates(l: f64, t: f64, first: u32) -> f64 {
    let mut s = 0.0;
    let mut m = first;
    loop {
        let term = heat_trace_term(l, m, t);
        s += term;
        // Terms decrease in m.
        if term <= ITERATE_REL_TOL * s || term == 0.0 {
            return s;
        }
        m += 1;
    }
}

/// Continuum density `e^L / L` times the kernel, summed over iterates,
/// written without overflow.
fn continuum_integrand(l: f64, t: f64, first: u32) -> f64 {
    let norm = (4.0 * PI * t).sqrt();
    let mut s = 0.0;
    let mut m = first;
    loop {
        let mf = m as f64;
        let ml = mf * l;
        // (e^L / L) * heat_trace_term(L, m, t)
        let log = l - t / 4.0 - ml / 2.0 - ml * ml / (4.0 * t);
        let term = log.exp() / (norm * -(-ml).exp_m1());
        s += term;
        if term <= ITERATE_REL_TOL * s || term == 0.0 {
            return s;
        }
        m += 1;
    }
}

/// `int_H^inf (e^L/L) sum_{m>=first} k_m(L, t) dL` with its quadrature error.
pub fn continuum_trace(h: f64, t: f64, first: u32, q: &QuadratureSpec) -> Result<(f64, f64)> {
    let w = (4.0 * t * 50.0).sqrt();
    let centre = t.max(h);
    let mut pts = vec![h];
    for p in [t - 0.5 * w, t - 0.2 * w, t, t + 0.2 * w, t + 0.5 * w] {
        if p > h {
            pts.push(p);
        }
    }
    pts.push(centre + w + 5.0);
    let est = integrate_pieces(|l| continuum_integrand(l, t, first), &pts, q)?;
    Ok((est.value, est.error))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HeatTrace {
    pub value: f64,
    /// Bound on the contribution of lengths beyond the horizon.
    pub truncation_bound: f64,
}

fn validate_t(t: f64) -> Result<()> {
    if !(t > 0.0 && t.is_finite()) {
        return Err(Error::domain(format!("time must be positive, got {t}")));
    }
    Ok(())
}

fn sum_atoms(spectrum: &PrimitiveSpectrum, t: f64, primitive_only: bool) -> f64 {
    let mut s = CompensatedSum::new();
    for &l in &spectrum.lengths {
        s.add(if primitive_only {
            heat_trace_term(l, 1, t)
        } else {
            iterates(l, t, 1)
        });
    }
    s.value()
}

fn truncated(
    spectrum: &PrimitiveSpectrum,
    t: f64,
    tol: f64,
    primitive_only: bool,
    q: &QuadratureSpec,
) -> Result<HeatTrace> {
    validate_t(t)?;
    let value = sum_atoms(spectrum, t, primitive_only);
    // Lengths beyond the horizon grow at most like e^L / L.
    let (tail, err) = continuum_trace(spectrum.horizon, t, 1, q)?;
    let truncation_bound = tail + err;
    if truncation_bound > tol {
        return Err(Error::Horizon {
            requested: t,
            horizon: spectrum.horizon,
        });
    }
    Ok(HeatTrace {
        value,
        truncation_bound,
    })
}

/// `S_X(t)`: all primitive atoms with all iterates. Errors with the horizon
/// when lengths beyond it could contribute more than `tol`.
pub fn s_x(t: f64, spectrum: &PrimitiveSpectrum, tol: f64, q: &QuadratureSpec) -> Result<HeatTrace> {
    truncated(spectrum, t, tol, false, q)
}

/// `S_X` restricted to primitive classes (`m = 1`).
pub fn s_x_primitive(t: f64, spectrum: &PrimitiveSpectrum, tol: f64, q: &QuadratureSpec) -> Result<HeatTrace> {
    truncated(spectrum, t, tol, true, q)
}

/// `S_X` restricted to iterates `m >= 2` of the atoms.
pub fn s_x_nonprimitive(t: f64, spectrum: &PrimitiveSpectrum) -> f64 {
    let mut s = CompensatedSum::new();
    for &l in &spectrum.lengths {
        s.add(iterates(l, t, 2));
    }
    s.value()
}

/// Model heat trace: atoms plus the li-tilde continuum beyond the horizon.
/// Returns the value and the inner quadrature error.
pub(crate) fn model_trace(
    spectrum: &PrimitiveSpectrum,
    t: f64,
    q: &QuadratureSpec,
    max_err: &Cell<f64>,
) -> Result<f64> {
    let atoms = sum_atoms(spectrum, t, false);
    let (cont, err) = continuum_trace(spectrum.horizon, t, 1, q)?;
    max_err.set(max_err.get().max(err));
    Ok(atoms + cont)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::loopmass::verify_strip_heat_integral;

    fn spec() -> PrimitiveSpectrum {
        PrimitiveSpectrum::new(vec![1.5, 2.0, 2.5], 4.0).unwrap()
    }

    #[test]
    fn small_time_is_negligible() {
        let s = s_x(0.005, &spec(), 1e-40, &QuadratureSpec::default()).unwrap();
        assert!(s.value + s.truncation_bound < 1e-40);
    }

    #[test]
    fn term_matches_strip_closed_form() {
        // The strip integral for (L, m) equals the m-th iterate of a
        // primitive of length L/m.
        let (l, m, t) = (2.0, 2u32, 1.0);
        let strip = verify_strip_heat_integral(l, m, t, &QuadratureSpec::default()).unwrap();
        assert!((heat_trace_term(l / m as f64, m, t) - strip.rhs).abs() < 1e-16);
    }

    #[test]
    fn nonprimitive_part_is_the_difference() {
        let sp = spec();
        let q = QuadratureSpec::default();
        for t in [0.5, 2.0, 5.0] {
            let all = s_x(t, &sp, 1.0, &q).unwrap().value;
            let prim = s_x_primitive(t, &sp, 1.0, &q).unwrap().value;
            assert!((all - prim - s_x_nonprimitive(t, &sp)).abs() < 1e-15);
        }
    }

    #[test]
    fn large_time_needs_longer_horizon() {
        let r = s_x(50.0, &spec(), 1e-8, &QuadratureSpec::default());
        assert!(matches!(r, Err(Error::Horizon { .. })));
    }

    #[test]
    fn continuum_tends_to_one() {
        // The li-tilde continuum alone carries the heat trace to 1 at large t.
        let (v, _) = continuum_trace(2.0f64.ln(), 60.0, 1, &QuadratureSpec::default()).unwrap();
        assert!((v - 1.0).abs() < 1e-3);
    }
}
