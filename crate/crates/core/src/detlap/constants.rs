//! Universal constants of the log-determinant formulas.

use std::f64::consts::{LN_2, PI};

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::hypgeom::quad::{integrate, integrate_to_infinity, Estimate, QuadratureSpec};
use crate::hypgeom::{erfc, CompensatedSum, EULER_GAMMA};

/// Terms of the Euler–Maclaurin expansion for `ln A` (Glaisher's constant):
/// coefficients of `n^{-2}, n^{-4}, n^{-6}, n^{-8}`.
const GLAISHER_TAIL: [f64; 4] = [-1.0 / 720.0, 1.0 / 5040.0, -1.0 / 10080.0, 1.0 / 9504.0];
/// Magnitude of the first omitted coefficient (of `n^{-10}`).
const GLAISHER_NEXT: f64 = 691.0 / 2730.0 / 1320.0;
const GLAISHER_N: u32 = 20;

/// `ln A = sum_{k<=n} k ln k - (n^2/2 + n/2 + 1/12) ln n + n^2/4 + O(n^-2)`.
pub fn log_glaisher() -> Estimate {
    let n = GLAISHER_N as f64;
    let mut s = CompensatedSum::new();
    let mut magnitude = 0.0;
    let mut add = |x: f64| {
        s.add(x);
        magnitude += x.abs();
    };
    for k in 2..=GLAISHER_N {
        let k = k as f64;
        add(k * k.ln());
    }
    add(-(n * n / 2.0 + n / 2.0 + 1.0 / 12.0) * n.ln());
    add(n * n / 4.0);
    let inv2 = 1.0 / (n * n);
    let mut p = inv2;
    for c in GLAISHER_TAIL {
        s.add(c * p);
        p *= inv2;
    }
    Estimate {
        value: s.value(),
        // Each term carries one rounding; the compensated sum adds none.
        error: GLAISHER_NEXT * p + 2.0 * f64::EPSILON * magnitude,
        subdivisions: 0,
    }
}

/// `zeta'(-1) = 1/12 - ln A`.
pub fn zeta_prime_minus_one() -> Estimate {
    let la = log_glaisher();
    Estimate {
        value: 1.0 / 12.0 - la.value,
        error: la.error,
        subdivisions: 0,
    }
}

/// `E = (4 zeta'(-1) - 1/2 + ln(2 pi)) / (4 pi)`, the area coefficient.
pub fn constant_e() -> Estimate {
    let z = zeta_prime_minus_one();
    Estimate {
        value: (4.0 * z.value - 0.5 + (2.0 * PI).ln()) / (4.0 * PI),
        error: z.error / PI + 4.0 * f64::EPSILON,
        subdivisions: 0,
    }
}

/// `erfc((L-1)/2) + e^L erfc((L+1)/2)`.
fn erfc_pair_plus(l: f64) -> f64 {
    erfc(0.5 * (l - 1.0)) + l.exp() * erfc(0.5 * (l + 1.0))
}

/// `erfc((1-L)/2) - e^L erfc((L+1)/2)`; vanishes at `L = 0`.
fn erfc_pair_minus(l: f64) -> f64 {
    erfc(0.5 * (1.0 - l)) - l.exp() * erfc(0.5 * (l + 1.0))
}

/// Integrand near `L = 0` where `g(L)/L` is `0/0`.
fn over_l(g: f64, l: f64) -> f64 {
    if l == 0.0 {
        0.0
    } else {
        g / l
    }
}

/// `int_0^{ln 2} (1 + e^-L) g(L) / (2L) dL`.
fn low_piece(q: &QuadratureSpec) -> Result<Estimate> {
    integrate(
        |l| (1.0 + (-l).exp()) * over_l(erfc_pair_minus(l), l) / 2.0,
        0.0,
        LN_2,
        q,
    )
}

pub fn constant_c1(q: &QuadratureSpec) -> Result<Estimate> {
    let high = integrate_to_infinity(|l| erfc_pair_minus(l) / (2.0 * l * l.exp() * l.exp_m1()), LN_2, q)?;
    Ok(high - low_piece(q)?)
}

/// The integral linking the two reductions: `C2 = C1 + correction`.
pub fn c1_correction(q: &QuadratureSpec) -> Result<Estimate> {
    integrate_to_infinity(|l| erfc_pair_plus(l) / (2.0 * l * -(-l).exp_m1()), LN_2, q)
}

pub fn constant_c2(q: &QuadratureSpec) -> Result<Estimate> {
    let first = integrate_to_infinity(|l| (1.0 + (-l).exp()) * erfc_pair_plus(l) / (2.0 * l), LN_2, q)?;
    let second = integrate_to_infinity(|l| 1.0 / (l * l.exp() * l.exp_m1()), LN_2, q)?;
    Ok(first + second - low_piece(q)?)
}

/// `C = C2 - gamma`.
pub fn constant_c(q: &QuadratureSpec) -> Result<Estimate> {
    let c2 = constant_c2(q)?;
    Ok(Estimate {
        value: c2.value - EULER_GAMMA,
        error: c2.error + f64::EPSILON,
        subdivisions: c2.subdivisions,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UniversalConstants {
    pub e: f64,
    pub e_bound: f64,
    pub c1: f64,
    pub c1_bound: f64,
    pub c2: f64,
    pub c2_bound: f64,
    pub c: f64,
    pub c_bound: f64,
    pub euler_gamma: f64,
}

impl UniversalConstants {
    pub fn compute(q: &QuadratureSpec) -> Result<Self> {
        let e = constant_e();
        let c1 = constant_c1(q)?;
        let c2 = constant_c2(q)?;
        let c = constant_c(q)?;
        Ok(Self {
            e: e.value,
            e_bound: e.error,
            c1: c1.value,
            c1_bound: c1.error,
            c2: c2.value,
            c2_bound: c2.error,
            c: c.value,
            c_bound: c.error,
            euler_gamma: EULER_GAMMA,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q() -> QuadratureSpec {
        QuadratureSpec::default()
    }

    /// `ln A = (gamma + ln 2 pi)/12 - zeta'(2)/(2 pi^2)` with
    /// `zeta'(2) = -sum ln k / k^2`, summed directly plus an Euler–Maclaurin tail.
    fn log_glaisher_oracle() -> f64 {
        let n = 200_000u32;
        let mut s = CompensatedSum::new();
        for k in 2..=n {
            let k = k as f64;
            s.add(k.ln() / (k * k));
        }
        let nf = n as f64;
        // int_n^inf ln x / x^2 dx - f(n)/2 - f'(n)/12
        let tail = (nf.ln() + 1.0) / nf - nf.ln() / (2.0 * nf * nf) - (1.0 - 2.0 * nf.ln()) / (12.0 * nf.powi(3));
        let zeta2p = -(s.value() + tail);
        (EULER_GAMMA + (2.0 * PI).ln()) / 12.0 - zeta2p / (2.0 * PI * PI)
    }

    #[test]
    fn glaisher_matches_oracle() {
        let la = log_glaisher();
        assert!((la.value - log_glaisher_oracle()).abs() < 1e-12);
        assert!(la.error < 1e-12);
        assert!((zeta_prime_minus_one().value + 0.165_421_143_700_450_93).abs() < 1e-13);
    }

    #[test]
    fn e_value_and_identity() {
        let e = constant_e().value;
        assert_eq!((e * 1e4).round() / 1e4, 0.0538);
        assert!((e - 0.0538096887604826).abs() < 1e-13);
        let z = zeta_prime_minus_one().value;
        assert!((4.0 * PI * e - (2.0 * PI).ln() + 0.5 - 4.0 * z).abs() < 1e-10);
    }

    #[test]
    fn c_constants() {
        let c2 = constant_c2(&q()).unwrap();
        let c = constant_c(&q()).unwrap();
        assert_eq!((c2.value * 1e4).round() / 1e4, 0.9380);
        assert_eq!((c.value * 1e4).round() / 1e4, 0.3608);
        assert!((c2.value - 0.938011664234129).abs() < 1e-11);
        assert!((c.value - 0.360795999332596).abs() < 1e-11);
        assert!((c.value - (c2.value - EULER_GAMMA)).abs() <= c.error + c2.error + 1e-16);
    }

    #[test]
    fn c1_plus_correction_is_c2() {
        let c1 = constant_c1(&q()).unwrap();
        assert!((c1.value + 0.220534242990207).abs() < 1e-11);
        let corr = c1_correction(&q()).unwrap();
        let c2 = constant_c2(&q()).unwrap();
        assert!((c1.value + corr.value - c2.value).abs() < 1e-8);
    }
}
