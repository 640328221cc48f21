//! Error function and logarithmic integrals.

/// Euler-Mascheroni constant.
pub const EULER_GAMMA: f64 = 0.577_215_664_901_532_860_606_512_090_082;

pub fn erf(x: f64) -> f64 {
    libm::erf(x)
}

pub fn erfc(x: f64) -> f64 {
    libm::erfc(x)
}

/// Exponential integral `Ei(x)` for `x > 0`.
///
/// Power series below 40, asymptotic series (cut at its smallest term) above.
pub fn ei(x: f64) -> f64 {
    debug_assert!(x > 0.0);
    if x < 40.0 {
        let mut term = 1.0;
        let mut sum = 0.0;
        let mut k = 1.0;
        loop {
            term *= x / k;
            let add = term / k;
            sum += add;
            if add < 1e-17 * sum {
                break;
            }
            k += 1.0;
        }
        EULER_GAMMA + x.ln() + sum
    } else {
        let mut term = 1.0;
        let mut sum = 1.0;
        let mut k = 1.0;
        loop {
            let next = term * k / x;
            if next >= term || next < 1e-17 {
                break;
            }
            term = next;
            sum += term;
            k += 1.0;
        }
        x.exp() / x * sum
    }
}

/// Logarithmic integral `li(x) = Ei(ln x)`, for `x >= 2`.
pub fn li(x: f64) -> f64 {
    debug_assert!(x >= 2.0);
    ei(x.ln())
}

/// `li` cut off at 2: `int_2^x dt / ln t` for `x >= 2`, zero below.
pub fn li_tilde(x: f64) -> f64 {
    if x <= 2.0 {
        0.0
    } else {
        li(x) - li(2.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hypgeom::quad::{integrate, QuadratureSpec};

    #[test]
    fn erf_limits_and_oddness() {
        assert_eq!(erf(0.0), 0.0);
        assert_eq!(erf(f64::INFINITY), 1.0);
        assert_eq!(erf(f64::NEG_INFINITY), -1.0);
        for x in [1e-300, 0.1, 0.5, 1.0, 3.3, 7.0, 30.0] {
            assert_eq!(erf(x) + erf(-x), 0.0);
            assert!(erf(x).abs() <= 1.0);
        }
    }

    #[test]
    fn li_tilde_cutoff() {
        assert_eq!(li_tilde(2.0), 0.0);
        assert_eq!(li_tilde(1.5), 0.0);
        assert_eq!(li_tilde(-3.0), 0.0);
    }

    #[test]
    fn li_tilde_matches_quadrature() {
        let q = QuadratureSpec::default();
        for x in [std::f64::consts::E, 10.0, 1e4, 1e12] {
            let oracle = integrate(|t: f64| 1.0 / t.ln(), 2.0, x, &q).unwrap().value;
            assert!((li_tilde(x) - oracle).abs() < 1e-10 * oracle.max(1.0), "{x}");
        }
        // Frozen from an independent 30-digit evaluation.
        assert!((li_tilde(std::f64::consts::E) - 0.849_954_036_238_443_97).abs() < 1e-14);
    }

    #[test]
    fn ei_branches_agree_at_switch() {
        let below = {
            let x: f64 = 40.0 - 1e-9;
            ei(x)
        };
        let above = ei(40.0);
        assert!((below - above).abs() / above < 1e-8);
    }
}
