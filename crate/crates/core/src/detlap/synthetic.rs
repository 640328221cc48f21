//! Synthetic primitive spectra for exercising the determinant routes.

use std::f64::consts::LN_2;

use super::PrimitiveSpectrum;
use crate::error::Result;
use crate::hypgeom::li_tilde;

/// A few oriented pairs of short geodesics.
pub fn sparse_spectrum() -> Result<PrimitiveSpectrum> {
    let lengths = [1.2, 2.3, 3.1, 3.7].iter().flat_map(|&l| [l, l]).collect();
    PrimitiveSpectrum::new(lengths, 4.0)
}

/// `L` with `li~(e^L) = y`, for `y > 0`.
fn li_tilde_inverse(y: f64) -> f64 {
    let (mut lo, mut hi) = (LN_2, LN_2 + 1.0);
    while li_tilde(hi.exp()) < y {
        lo = hi;
        hi *= 2.0;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if li_tilde(mid.exp()) < y {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 4.0 * f64::EPSILON * hi {
            break;
        }
    }
    0.5 * (lo + hi)
}

/// Atoms at the lengths where `density * li~(e^L)` crosses half-integers,
/// i.e. one atom in the middle of each unit bin of the scaled counting
/// function, up to `horizon`.
pub fn li_matched_spectrum(horizon: f64, density: f64) -> Result<PrimitiveSpectrum> {
    let top = density * li_tilde(horizon.exp());
    let lengths = (1..)
        .map(|k| k as f64 - 0.5)
        .take_while(|&y| y <= top)
        .map(|y| li_tilde_inverse(y / density))
        .collect();
    PrimitiveSpectrum::new(lengths, horizon)
}

/// Four atoms per unit of `li~`.
pub fn dense_spectrum(horizon: f64) -> Result<PrimitiveSpectrum> {
    li_matched_spectrum(horizon, 4.0)
}

/// Bound on `|sum_k f(l_k) - int_{ln 2}^H f d li~(e^L)|` for
/// `f(L) = 1/(e^L - 1)` and a unit-density [`li_matched_spectrum`].
///
/// As a function of `y = li~(e^L)`, `f` is convex (`|df/dy| = L/(e^L-1)^2`
/// decreases), so on each unit bin the bin average lies between the
/// midpoint value and the trapezoid value. The incomplete last bin is
/// bounded by `f` at its left end.
pub fn li_matched_bin_bound(horizon: f64) -> f64 {
    let f = |l: f64| 1.0 / l.exp_m1();
    let top = li_tilde(horizon.exp());
    let mut bound = 0.0;
    let mut k = 1.0;
    let mut a = LN_2;
    while k <= top {
        let mid = li_tilde_inverse(k - 0.5);
        let b = li_tilde_inverse(k);
        bound += 0.5 * (f(a) + f(b)) - f(mid);
        a = b;
        k += 1.0;
    }
    let partial = top - (k - 1.0);
    bound + if partial >= 0.5 { f(a) } else { f(a) * partial }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::detlap::{blm_terms, DetInputs, TailModel};
    use crate::hypgeom::QuadratureSpec;
    use std::f64::consts::PI;

    #[test]
    fn inverse_round_trips() {
        for y in [0.1, 1.0, 37.5] {
            assert!((li_tilde(li_tilde_inverse(y).exp()) - y).abs() < 1e-10 * y.max(1.0));
        }
    }

    #[test]
    fn li_matched_stieltjes_vanishes_within_bin_bound() {
        let h = 6.0;
        let sp = li_matched_spectrum(h, 1.0).unwrap();
        let d = DetInputs::new(4.0 * PI, sp, TailModel::default()).unwrap();
        let t = blm_terms(&d, &QuadratureSpec::default()).unwrap();
        let bound = li_matched_bin_bound(h);
        assert!(t.stieltjes().abs() <= bound, "{} > {bound}", t.stieltjes());
        assert!(bound < 0.05 * t.li_integral, "{bound}");
    }

    #[test]
    fn densities() {
        let sparse = sparse_spectrum().unwrap();
        assert_eq!(sparse.lengths.len(), 8);
        let m = li_matched_spectrum(6.0, 1.0).unwrap().lengths.len();
        let d = dense_spectrum(6.0).unwrap().lengths.len();
        assert!(d >= 4 * m - 4 && d <= 4 * m + 4);
    }
}
