use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::{annulus_core_length, require_positive, FormulaId, MassResult};
use crate::error::Result;
use crate::hypgeom::quad::{integrate_pieces, QuadratureSpec};
use crate::loopmass::iterate_series;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum AnnulusRoute {
    Series,
    Integral,
}

/// Inner series is cut once its geometric tail bound drops below this
/// fraction of the partial sum.
const INNER_REL_TOL: f64 = 1e-20;

/// `(pi^2 / 2s^2) sum_k sinh(k pi^2 / s)^-2`, i.e. `1/12 - delta(s)`.
fn one_twelfth_minus_delta(s: f64) -> f64 {
    if s <= 0.0 {
        return 0.0;
    }
    let x = PI * PI / s;
    // Ratio of consecutive terms is below e^{-2x}.
    let ratio = (-2.0 * x).exp();
    let mut sum = 0.0;
    for k in 1.. {
        let sh = (k as f64 * x).sinh();
        let term = 1.0 / (sh * sh);
        sum += term;
        if term == 0.0 || term * ratio / (1.0 - ratio) <= INNER_REL_TOL * sum {
            break;
        }
    }
    0.5 * x * x / (PI * PI) * sum
}

/// Total mass of non-contractible loops in the annulus `A_r`.
///
/// The integral route evaluates `r/6 - 2 int_0^r delta(s) ds` as
/// `2 int_0^r (1/12 - delta(s)) ds`, which has a positive integrand and so
/// no cancellation for small totals.
pub fn mass_annulus_total(r: f64, route: AnnulusRoute, q: &QuadratureSpec) -> Result<MassResult> {
    require_positive("annulus modulus r", r)?;
    q.validate()?;
    let inputs = [("r", r)];
    match route {
        AnnulusRoute::Series => {
            let (sum, tail) = iterate_series(annulus_core_length(r))?;
            let value = 2.0 * sum;
            let bound = 2.0 * tail + 4.0 * f64::EPSILON * value;
            Ok(MassResult::bounded(
                FormulaId::AnnulusTotalSeries,
                value,
                bound,
                &inputs,
            ))
        }
        AnnulusRoute::Integral => {
            let f = |s: f64| 2.0 * one_twelfth_minus_delta(s);
            // The integrand switches on around s = pi^2 / 40.
            let mut points = vec![0.0];
            for p in [0.25, 0.5, 1.0, 2.0, 4.0, 8.0] {
                if p < r {
                    points.push(p);
                }
            }
            points.push(r);
            // The total is about 2 e^{-2 pi^2 / r}; scale the absolute
            // tolerance so tiny totals still get relative accuracy.
            let lead = 2.0 * (-annulus_core_length(r)).exp();
            let q = q.with_tolerances(q.abs_tol * lead.min(1.0), q.rel_tol);
            let est = integrate_pieces(f, &points, &q)?;
            let value = est.value;
            let bound = est.error + (INNER_REL_TOL + 4.0 * f64::EPSILON) * value.abs();
            Ok(MassResult::bounded(
                FormulaId::AnnulusTotalIntegral,
                value,
                bound,
                &inputs,
            ))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::loopmass::mass_annulus_winding;

    #[test]
    fn routes_agree() {
        let q = QuadratureSpec::default();
        for r in [1.0, 5.0, 10.0, 2.0 * PI * PI] {
            let s = mass_annulus_total(r, AnnulusRoute::Series, &q).unwrap();
            let i = mass_annulus_total(r, AnnulusRoute::Integral, &q).unwrap();
            let diff = (s.value - i.value).abs();
            assert!(
                diff <= s.error_bound + i.error_bound,
                "r={r}: {} vs {}",
                s.value,
                i.value
            );
            assert!(diff < 1e-8);
        }
    }

    #[test]
    fn small_modulus_vanishes() {
        let q = QuadratureSpec::default();
        for route in [AnnulusRoute::Series, AnnulusRoute::Integral] {
            let v = mass_annulus_total(0.1, route, &q).unwrap().value;
            // Leading term 2 e^{-2 pi^2 / r}.
            assert!((0.0..1e-40).contains(&v));
            assert!((v / (2.0 * (-2.0 * PI * PI / 0.1f64).exp()) - 1.0).abs() < 1e-6);
        }
    }

    #[test]
    fn series_is_sum_of_windings() {
        let r = 7.0;
        let total = mass_annulus_total(r, AnnulusRoute::Series, &QuadratureSpec::default())
            .unwrap()
            .value;
        let direct: f64 = (1..200).map(|m| 2.0 * mass_annulus_winding(r, m).unwrap().value).sum();
        assert!((total - direct).abs() < 1e-15);
    }
}
