//! Closed-form Brownian loop masses of free homotopy classes, with quadrature
//! verifiers for the heat-kernel identities behind them.
//!
//! Every mass is returned as a [`MassResult`] carrying the formula used, the
//! inputs, and an error bound (zero for exact closed forms).

mod annulus;
mod conformal;
mod essential;
mod verify;

use std::f64::consts::PI;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use annulus::{mass_annulus_total, AnnulusRoute};
pub use conformal::{
    circle_log_derivatives, electrical_thickness, ellipse_interior_derivative, ellipse_log_derivatives,
    mass_disc_winding_intersecting_k, mass_sphere_winding_intersecting_k, radial_slit_log_psi_prime, GRUNSKY_TOL,
};
pub use essential::{essential_total_mass, iterate_series, iterate_series_from};
pub use verify::{
    time_antiderivative, time_integrand, verify_strip_heat_integral, verify_time_integral, StripCheck,
    TimeIntegralCheck,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum FormulaId {
    HypClass,
    FlatClass,
    AnnulusWinding,
    AnnulusTotalSeries,
    AnnulusTotalIntegral,
    TorusHit,
    DiscWindingK,
    ElectricThicknessWinding,
    EssentialTotal,
}

impl FormulaId {
    pub const ALL: [FormulaId; 9] = [
        FormulaId::HypClass,
        FormulaId::FlatClass,
        FormulaId::AnnulusWinding,
        FormulaId::AnnulusTotalSeries,
        FormulaId::AnnulusTotalIntegral,
        FormulaId::TorusHit,
        FormulaId::DiscWindingK,
        FormulaId::ElectricThicknessWinding,
        FormulaId::EssentialTotal,
    ];

    pub fn name(self) -> &'static str {
        match self {
            FormulaId::HypClass => "HYP_CLASS",
            FormulaId::FlatClass => "FLAT_CLASS",
            FormulaId::AnnulusWinding => "ANNULUS_WINDING",
            FormulaId::AnnulusTotalSeries => "ANNULUS_TOTAL_SERIES",
            FormulaId::AnnulusTotalIntegral => "ANNULUS_TOTAL_INTEGRAL",
            FormulaId::TorusHit => "TORUS_HIT",
            FormulaId::DiscWindingK => "DISC_WINDING_K",
            FormulaId::ElectricThicknessWinding => "ELECTRIC_THICKNESS_WINDING",
            FormulaId::EssentialTotal => "ESSENTIAL_TOTAL",
        }
    }

    /// One-line statement of the formula, for help texts.
    pub fn description(self) -> &'static str {
        match self {
            FormulaId::HypClass => "hyperbolic class of length l, iteration m: 1/(m (e^l - 1))",
            FormulaId::FlatClass => "flat torus class of vector tau: Area/(pi |tau|^2)",
            FormulaId::AnnulusWinding => "annulus A_r, winding m: (1/|m|)/(e^(2 pi^2 |m|/r) - 1)",
            FormulaId::AnnulusTotalSeries => "all windings of A_r, series: 2 sum_k (1/k)/(e^(2k pi^2/r) - 1)",
            FormulaId::AnnulusTotalIntegral => "all windings of A_r, integral: r/6 - 2 int_0^r delta(s) ds",
            FormulaId::TorusHit => {
                "loops in class m tau hitting the geodesic: A/(pi l^2 m^2) - (1/|m|)/(e^(pi l^2 |m|/A) - 1)"
            }
            FormulaId::DiscWindingK => "disc loops winding m times and hitting K: log|psi'(0)|/(2 pi^2 m^2)",
            FormulaId::ElectricThicknessWinding => {
                "sphere loops winding m times and hitting K: theta(K)/(2 pi^2 m^2) + 1/(2|m|)"
            }
            FormulaId::EssentialTotal => "all essential classes: sum_gamma sum_m (1/m)/(e^(m l) - 1)",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|f| f.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::domain(format!("unknown formula id {s:?}")))
    }
}

impl fmt::Display for FormulaId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MassResult {
    pub value: f64,
    pub formula_id: FormulaId,
    pub inputs: Vec<(String, f64)>,
    pub error_bound: f64,
}

impl MassResult {
    fn exact(formula_id: FormulaId, value: f64, inputs: &[(&str, f64)]) -> Self {
        Self::bounded(formula_id, value, 0.0, inputs)
    }

    fn bounded(formula_id: FormulaId, value: f64, error_bound: f64, inputs: &[(&str, f64)]) -> Self {
        Self {
            value,
            formula_id,
            inputs: inputs.iter().map(|(k, v)| (k.to_string(), *v)).collect(),
            error_bound,
        }
    }
}

fn require_positive(name: &str, x: f64) -> Result<()> {
    if x > 0.0 && x.is_finite() {
        Ok(())
    } else {
        Err(Error::domain(format!("{name} must be positive and finite, got {x}")))
    }
}

fn require_winding(m: i64) -> Result<()> {
    if m == 0 {
        Err(Error::InfiniteMass(
            "winding 0 is the contractible class; the mass of small loops is infinite".into(),
        ))
    } else {
        Ok(())
    }
}

pub fn mass_hyperbolic_class(length: f64, iteration: u32) -> Result<MassResult> {
    require_positive("geodesic length", length)?;
    if iteration < 1 {
        return Err(Error::domain("iteration number must be at least 1"));
    }
    let m = iteration as f64;
    Ok(MassResult::exact(
        FormulaId::HypClass,
        1.0 / (m * length.exp_m1()),
        &[("length", length), ("iteration", m)],
    ))
}

pub fn mass_flat_class(area: f64, tau_norm: f64) -> Result<MassResult> {
    require_positive("area", area)?;
    require_positive("|tau|", tau_norm)?;
    Ok(MassResult::exact(
        FormulaId::FlatClass,
        area / (PI * tau_norm * tau_norm),
        &[("area", area), ("tau_norm", tau_norm)],
    ))
}

/// Core geodesic of `A_r` has hyperbolic length `2 pi^2 / r`.
pub fn annulus_core_length(r: f64) -> f64 {
    2.0 * PI * PI / r
}

pub fn mass_annulus_winding(r: f64, m: i64) -> Result<MassResult> {
    require_positive("annulus modulus r", r)?;
    require_winding(m)?;
    let k = m.unsigned_abs();
    let k32 = u32::try_from(k).map_err(|_| Error::domain("winding number too large"))?;
    let hyp = mass_hyperbolic_class(annulus_core_length(r) * k as f64, k32)?;
    Ok(MassResult::exact(
        FormulaId::AnnulusWinding,
        hyp.value,
        &[("r", r), ("m", m as f64)],
    ))
}

pub fn mass_torus_hit(area: f64, length: f64, m: i64) -> Result<MassResult> {
    require_positive("area", area)?;
    require_positive("geodesic length", length)?;
    require_winding(m)?;
    let k = m.unsigned_abs() as f64;
    // A/(pi l^2 m^2) = (1/|m|)/x with x = pi l^2 |m| / A.
    let x = PI * length * length * k / area;
    let value = (1.0 / x - 1.0 / x.exp_m1()) / k;
    if !(value > 0.0) {
        return Err(Error::Numeric {
            what: "torus hit mass lost positivity to rounding".into(),
            partial: value,
            bound: f64::EPSILON / x,
        });
    }
    Ok(MassResult::exact(
        FormulaId::TorusHit,
        value,
        &[("area", area), ("length", length), ("m", m as f64)],
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::E;

    #[test]
    fn hyperbolic_examples() {
        assert_eq!(mass_hyperbolic_class(1.0, 1).unwrap().value, 1.0 / (E - 1.0));
        let l0 = 0.7;
        let twice = mass_hyperbolic_class(2.0 * l0, 2).unwrap().value;
        assert!((twice - 0.5 / ((2.0 * l0).exp() - 1.0)).abs() < 1e-16);
        assert!(mass_hyperbolic_class(0.0, 1).is_err());
        assert!(mass_hyperbolic_class(1.0, 0).is_err());
    }

    #[test]
    fn flat_examples() {
        let hex = mass_flat_class(3f64.sqrt() / 2.0, 1.0).unwrap().value;
        assert!((hex - 3f64.sqrt() / (2.0 * PI)).abs() < 1e-16);
        let c = 2.7;
        let scaled = mass_flat_class(c * c * 3f64.sqrt() / 2.0, c).unwrap().value;
        assert!((scaled - hex).abs() < 1e-15);
        let sq = mass_flat_class(1.0, 2f64.sqrt()).unwrap().value;
        assert!((sq - 1.0 / (2.0 * PI)).abs() < 1e-16);
        assert!(mass_flat_class(-1.0, 1.0).is_err());
    }

    #[test]
    fn annulus_winding_examples() {
        let v = mass_annulus_winding(2.0 * PI * PI, 1).unwrap().value;
        assert!((v - 1.0 / (E - 1.0)).abs() < 1e-15);
        assert_eq!(
            mass_annulus_winding(3.0, 4).unwrap().value,
            mass_annulus_winding(3.0, -4).unwrap().value
        );
        assert!(matches!(mass_annulus_winding(3.0, 0), Err(Error::InfiniteMass(_))));
    }

    #[test]
    fn torus_hit_examples() {
        let a = 3f64.sqrt() / 2.0;
        let v = mass_torus_hit(a, 1.0, 1).unwrap().value;
        let oracle = 3f64.sqrt() / (2.0 * PI) - 1.0 / ((PI / a).exp() - 1.0);
        assert!((v - oracle).abs() < 1e-15);
        assert!((v - 0.248358730076221).abs() < 1e-14);
        // Decomposition into flat class minus annulus winding with r = 2 pi A / l^2.
        for (area, l, m) in [(1.0, 1.0, 1), (2.0, 0.5, -3), (0.3, 2.0, 2)] {
            let hit = mass_torus_hit(area, l, m).unwrap().value;
            let flat = mass_flat_class(area, (m as f64).abs() * l).unwrap().value;
            let ann = mass_annulus_winding(2.0 * PI * area / (l * l), m).unwrap().value;
            assert!((hit - (flat - ann)).abs() < 1e-14 * flat);
        }
        let big = mass_torus_hit(1.0, 1.0, 50).unwrap().value;
        let lead = 1.0 / (PI * 2500.0);
        assert!(((big - lead) / big).abs() < 1e-10);
    }

    #[test]
    fn masses_decrease_in_length_and_winding() {
        let ls: Vec<f64> = (1..40).map(|k| 0.1 * k as f64).collect();
        for w in ls.windows(2) {
            assert!(mass_hyperbolic_class(w[1], 1).unwrap().value < mass_hyperbolic_class(w[0], 1).unwrap().value);
            assert!(mass_flat_class(1.0, w[1]).unwrap().value < mass_flat_class(1.0, w[0]).unwrap().value);
            assert!(mass_torus_hit(1.0, w[1], 1).unwrap().value < mass_torus_hit(1.0, w[0], 1).unwrap().value);
        }
        for m in 1..20 {
            assert!(mass_annulus_winding(5.0, m + 1).unwrap().value < mass_annulus_winding(5.0, m).unwrap().value);
            assert!(mass_torus_hit(1.0, 1.0, m + 1).unwrap().value < mass_torus_hit(1.0, 1.0, m).unwrap().value);
        }
    }

    #[test]
    fn formula_ids_parse() {
        for f in FormulaId::ALL {
            assert_eq!(FormulaId::parse(f.name()).unwrap(), f);
        }
        assert!(FormulaId::parse("nope").is_err());
    }
}
