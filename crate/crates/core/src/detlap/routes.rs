use std::cell::Cell;
use std::f64::consts::LN_2;

use serde::{Deserialize, Serialize};

use super::constants::{constant_c, constant_e};
use super::trace::model_trace;
use super::{DetInputs, PrimitiveSpectrum};
use crate::error::{Error, Result};
use crate::hypgeom::quad::{integrate, integrate_pieces, integrate_to_infinity, QuadratureSpec};
use crate::hypgeom::{CompensatedSum, EULER_GAMMA};
use crate::loopmass::iterate_series_from;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Route {
    Blm,
    TimeIntegrals,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErrorBudget {
    /// Estimated quadrature and rounding error.
    pub quadrature: f64,
    /// Bounded truncation of series and improper integrals.
    pub truncation: f64,
    /// Size estimate for the error of the tail convention itself; not a
    /// rigorous bound.
    pub tail_model_risk: f64,
    pub tail_model: String,
}

impl ErrorBudget {
    pub fn quantified(&self) -> f64 {
        self.quadrature + self.truncation
    }

    pub fn total(&self) -> f64 {
        self.quantified() + self.tail_model_risk
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogDet {
    pub route: Route,
    /// `-log det_zeta(Laplacian)`.
    pub value: f64,
    pub budget: ErrorBudget,
}

/// Flat export record.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogDetRecord {
    pub route: Route,
    pub value: f64,
    pub budget_quadrature: f64,
    pub budget_truncation: f64,
    pub tail_model: String,
}

impl From<&LogDet> for LogDetRecord {
    fn from(d: &LogDet) -> Self {
        Self {
            route: d.route,
            value: d.value,
            budget_quadrature: d.budget.quadrature,
            budget_truncation: d.budget.truncation,
            tail_model: format!("{} (risk {:.3e})", d.budget.tail_model, d.budget.tail_model_risk),
        }
    }
}

/// `sum_{gamma primitive} sum_{m>=2} (1/m) / (e^{m l} - 1)` over the atoms,
/// with a bound covering truncated series and lengths beyond the horizon.
pub fn nonprimitive_mass_sum(spectrum: &PrimitiveSpectrum) -> Result<(f64, f64)> {
    let mut s = CompensatedSum::new();
    let mut bound = 0.0;
    for &l in &spectrum.lengths {
        let (v, t) = iterate_series_from(l, 2)?;
        s.add(v);
        bound += t;
    }
    // Beyond H: sum_{m>=2} <= e^{-2L} / (2 (1 - e^{-L})^2), against e^L/L growth.
    let h = spectrum.horizon;
    let g = -(-h).exp_m1();
    bound += (-h).exp() / (2.0 * h * g * g);
    Ok((s.value(), bound))
}

/// Pieces of the loop-mass route, kept separate for inspection.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BlmTerms {
    pub area_term: f64,
    pub c: f64,
    /// `sum_{atoms} 1/(e^l - 1)`.
    pub atom_sum: f64,
    /// `int_{ln 2}^H (1/(e^L - 1)) (e^L / L) dL`, subtracted.
    pub li_integral: f64,
    pub nonprimitive_atoms: f64,
    /// Iterates of the continuum beyond `H`.
    pub nonprimitive_continuum: f64,
    pub quadrature_error: f64,
    pub truncation_error: f64,
}

impl BlmTerms {
    pub fn stieltjes(&self) -> f64 {
        self.atom_sum - self.li_integral
    }

    pub fn total(&self) -> f64 {
        self.area_term + self.c + self.atom_sum - self.li_integral
            + self.nonprimitive_atoms
            + self.nonprimitive_continuum
    }
}

pub fn blm_terms(inputs: &DetInputs, q: &QuadratureSpec) -> Result<BlmTerms> {
    q.validate()?;
    let sp = &inputs.spectrum;
    let h = sp.horizon;
    let e = constant_e();
    let c = constant_c(q)?;
    let mut atoms = CompensatedSum::new();
    for &l in &sp.lengths {
        atoms.add(1.0 / l.exp_m1());
    }
    let li = integrate(|l| 1.0 / (l * -(-l).exp_m1()), LN_2, h, q)?;
    let (np_atoms, np_tail) = {
        let mut s = CompensatedSum::new();
        let mut tail = 0.0;
        for &l in &sp.lengths {
            let (v, t) = iterate_series_from(l, 2)?;
            s.add(v);
            tail += t;
        }
        (s.value(), tail)
    };
    // (e^L / L) sum_{m>=2} (1/m) / (e^{mL} - 1), written without overflow.
    let np_cont = integrate_to_infinity(
        |l| {
            let mut s = 0.0;
            for m in 2.. {
                let mf = m as f64;
                let term = (-(mf - 1.0) * l).exp() / (mf * -(-mf * l).exp_m1());
                s += term;
                if term <= 1e-18 * s || term == 0.0 {
                    break;
                }
            }
            s / l
        },
        h,
        q,
    )?;
    Ok(BlmTerms {
        area_term: -inputs.area * e.value,
        c: c.value,
        atom_sum: atoms.value(),
        li_integral: li.value,
        nonprimitive_atoms: np_atoms,
        nonprimitive_continuum: np_cont.value,
        quadrature_error: inputs.area * e.error + c.error + li.error + np_cont.error,
        truncation_error: np_tail,
    })
}

fn rounding(parts: &[f64]) -> f64 {
    8.0 * f64::EPSILON * parts.iter().map(|x| x.abs()).sum::<f64>()
}

pub fn logdet_via_blm(inputs: &DetInputs, q: &QuadratureSpec) -> Result<LogDet> {
    let t = blm_terms(inputs, q)?;
    let value = t.total();
    let round = rounding(&[
        t.area_term,
        t.c,
        t.atom_sum,
        t.li_integral,
        t.nonprimitive_atoms,
        t.nonprimitive_continuum,
    ]) + inputs.spectrum.lengths.len() as f64 * f64::EPSILON * t.atom_sum;
    Ok(LogDet {
        route: Route::Blm,
        value,
        budget: ErrorBudget {
            quadrature: t.quadrature_error + round,
            truncation: t.truncation_error,
            tail_model_risk: inputs.tail_model.risk(inputs.spectrum.horizon),
            tail_model: inputs.tail_model.describe(),
        },
    })
}

/// Evaluates `f` inside a quadrature, remembering the first error.
struct Guarded<'a, F> {
    f: F,
    failure: &'a Cell<Option<Error>>,
}

impl<F: Fn(f64) -> Result<f64>> Guarded<'_, F> {
    fn call(&self, x: f64) -> f64 {
        match (self.f)(x) {
            Ok(v) => v,
            Err(e) => {
                let prev = self.failure.take();
                self.failure.set(Some(prev.unwrap_or(e)));
                0.0
            }
        }
    }
}

pub fn logdet_via_time_integrals(inputs: &DetInputs, q: &QuadratureSpec) -> Result<LogDet> {
    q.validate()?;
    let sp = &inputs.spectrum;
    let h = sp.horizon;
    let e = constant_e();
    let inner_q = q.with_tolerances(q.abs_tol * 1e-2, q.rel_tol * 1e-2);
    let max_inner = Cell::new(0.0f64);
    let failure = Cell::new(None);
    let trace = Guarded {
        f: |t: f64| model_trace(sp, t, &inner_q, &max_inner),
        failure: &failure,
    };

    // Below t_lo every term carries a factor below e^{-745}.
    let l_min = sp.lengths.first().copied().unwrap_or(h).min(h);
    let s_lo = (l_min * l_min / (4.0 * 745.0)).ln();
    // Beyond T the Gaussian factor e^{-(T - H)^2 / 4T} is below e^{-40}.
    let hh = h + 80.0;
    let t_hi = 1.1 * (hh + (hh * hh - h * h).sqrt());
    let s_hi = t_hi.ln();

    let grid = |a: f64, b: f64| -> Vec<f64> {
        let n = ((b - a) / 0.5).ceil().max(1.0) as usize;
        (0..=n).map(|k| a + (b - a) * k as f64 / n as f64).collect()
    };
    // int_0^1 S(t)/t dt = int_{-inf}^0 S(e^s) ds
    let small = integrate_pieces(|s| trace.call(s.exp()), &grid(s_lo, 0.0), q)?;
    // int_1^inf (S(t) - 1)/t dt = int_0^inf (S(e^s) - 1) ds
    let large = integrate_pieces(|s| trace.call(s.exp()) - 1.0, &grid(0.0, s_hi), q)?;
    if let Some(err) = failure.take() {
        return Err(err);
    }
    let at_lo = trace.call(s_lo.exp());
    let at_hi = (trace.call(t_hi) - 1.0).abs();
    if let Some(err) = failure.take() {
        return Err(err);
    }
    // Decay beyond T is at least e^{-(t - T)/4} up to a factor e^{H^2 / 4T}.
    let truncation = at_lo + 8.0 * at_hi / t_hi * (h * h / (4.0 * t_hi)).exp();

    let value = -inputs.area * e.value - EULER_GAMMA + small.value + large.value;
    let quadrature = small.error
        + large.error
        + max_inner.get() * (s_hi - s_lo)
        + inputs.area * e.error
        + rounding(&[inputs.area * e.value, EULER_GAMMA, small.value, large.value]);
    Ok(LogDet {
        route: Route::TimeIntegrals,
        value,
        budget: ErrorBudget {
            quadrature,
            truncation,
            tail_model_risk: inputs.tail_model.risk(h),
            tail_model: inputs.tail_model.describe(),
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::detlap::TailModel;
    use std::f64::consts::PI;

    fn q() -> QuadratureSpec {
        QuadratureSpec::default()
    }

    fn inputs(lengths: Vec<f64>, h: f64) -> DetInputs {
        DetInputs::new(
            4.0 * PI,
            PrimitiveSpectrum::new(lengths, h).unwrap(),
            TailModel::default(),
        )
        .unwrap()
    }

    #[test]
    fn two_geodesic_nonprimitive_sum() {
        let sp = PrimitiveSpectrum::new(vec![2.0, 2.0], 3.0).unwrap();
        let (v, _) = nonprimitive_mass_sum(&sp).unwrap();
        let direct: f64 = (2..80).map(|m| 2.0 / (m as f64 * ((2 * m) as f64).exp_m1())).sum();
        assert!((v - direct).abs() < 1e-16);
        let empty = PrimitiveSpectrum::new(vec![], 3.0).unwrap();
        assert_eq!(nonprimitive_mass_sum(&empty).unwrap().0, 0.0);
    }

    #[test]
    fn nonprimitive_below_essential_total() {
        let sp = PrimitiveSpectrum::new(vec![1.0, 1.5, 2.0], 3.0).unwrap();
        let (np, _) = nonprimitive_mass_sum(&sp).unwrap();
        let total: f64 = sp
            .lengths
            .iter()
            .map(|&l| crate::loopmass::iterate_series(l).unwrap().0)
            .sum();
        assert!(np < total);
    }

    #[test]
    fn pure_tail_reduces_to_constants_and_li_integral() {
        let d = inputs(vec![], 3.0);
        let t = blm_terms(&d, &q()).unwrap();
        assert_eq!(t.atom_sum, 0.0);
        let expected =
            -d.area * constant_e().value + constant_c(&q()).unwrap().value - t.li_integral + t.nonprimitive_continuum;
        assert!((t.total() - expected).abs() < 1e-14);
    }

    #[test]
    fn routes_agree_on_small_spectrum() {
        let d = inputs(vec![1.3, 1.3, 2.1, 2.1, 2.9], 3.5);
        let a = logdet_via_time_integrals(&d, &q()).unwrap();
        let b = logdet_via_blm(&d, &q()).unwrap();
        let diff = (a.value - b.value).abs();
        assert!(
            diff <= a.budget.quantified() + b.budget.quantified(),
            "{} vs {} diff {diff:e}, budgets {:?} {:?}",
            a.value,
            b.value,
            a.budget,
            b.budget
        );
    }

    #[test]
    fn stieltjes_linearity() {
        let d = inputs(vec![1.3, 2.1, 2.9], 3.5);
        let d2 = DetInputs::new(d.area, d.spectrum.with_multiplicity(2), TailModel::default()).unwrap();
        let t1 = blm_terms(&d, &q()).unwrap();
        let t2 = blm_terms(&d2, &q()).unwrap();
        assert!((t2.atom_sum - 2.0 * t1.atom_sum).abs() < 1e-15);
        assert_eq!(t2.li_integral, t1.li_integral);
    }

    #[test]
    fn budgets_shrink_with_horizon() {
        let full = crate::detlap::dense_spectrum(8.0).unwrap();
        let mut prev = f64::INFINITY;
        for h in [5.0, 6.5, 8.0] {
            let d = DetInputs::new(4.0 * PI, full.truncate(h).unwrap(), TailModel::default()).unwrap();
            let b = logdet_via_blm(&d, &q()).unwrap();
            assert!(b.budget.total() < prev);
            prev = b.budget.total();
        }
    }
}
