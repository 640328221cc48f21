//! Projective 2x2 real matrices and upper half-plane points.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// `|tr| <= 2 + PARABOLIC_TOL` counts as non-hyperbolic.
pub const PARABOLIC_TOL: f64 = 1e-9;

const DET_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum MatrixType {
    Hyperbolic,
    Parabolic,
    Elliptic,
}

impl MatrixType {
    pub fn name(self) -> &'static str {
        match self {
            MatrixType::Hyperbolic => "hyperbolic",
            MatrixType::Parabolic => "parabolic",
            MatrixType::Elliptic => "elliptic",
        }
    }
}

pub fn classify_trace(trace: f64) -> MatrixType {
    let t = trace.abs();
    if t > 2.0 + PARABOLIC_TOL {
        MatrixType::Hyperbolic
    } else if t >= 2.0 - PARABOLIC_TOL {
        MatrixType::Parabolic
    } else {
        MatrixType::Elliptic
    }
}

/// Translation length `2 arccosh(|tr|/2)` of a hyperbolic element.
pub fn length_from_trace(trace: f64) -> Result<f64> {
    match classify_trace(trace) {
        MatrixType::Hyperbolic => Ok(2.0 * (trace.abs() / 2.0).acosh()),
        kind => Err(Error::Classification {
            kind: kind.name(),
            trace: trace.abs(),
        }),
    }
}

/// Element of PSL(2,R), stored with determinant one and non-negative trace.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MoebiusMatrix {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
}

impl MoebiusMatrix {
    pub const IDENTITY: MoebiusMatrix = MoebiusMatrix {
        a: 1.0,
        b: 0.0,
        c: 0.0,
        d: 1.0,
    };

    /// Builds the projective representative; any positive determinant is
    /// scaled to one.
    pub fn new(a: f64, b: f64, c: f64, d: f64) -> Result<Self> {
        let det = a * d - b * c;
        if !(det > 0.0) || ![a, b, c, d].iter().all(|x| x.is_finite()) {
            return Err(Error::domain(format!(
                "matrix [[{a}, {b}], [{c}, {d}]] does not define an element of PSL(2,R) (det = {det})"
            )));
        }
        let (a, b, c, d) = if (det - 1.0).abs() <= DET_TOL {
            (a, b, c, d)
        } else {
            let s = det.sqrt().recip();
            (a * s, b * s, c * s, d * s)
        };
        Ok(Self::sign_normalized(a, b, c, d))
    }

    fn sign_normalized(a: f64, b: f64, c: f64, d: f64) -> Self {
        let tr = a + d;
        let flip = if tr != 0.0 {
            tr < 0.0
        } else {
            // Trace zero: first nonzero entry positive.
            [a, b, c, d].into_iter().find(|x| *x != 0.0).is_some_and(|x| x < 0.0)
        };
        if flip {
            Self {
                a: -a,
                b: -b,
                c: -c,
                d: -d,
            }
        } else {
            Self { a, b, c, d }
        }
    }

    pub fn diagonal(lambda: f64) -> Result<Self> {
        Self::new(lambda, 0.0, 0.0, lambda.recip())
    }

    pub fn entries(&self) -> [f64; 4] {
        [self.a, self.b, self.c, self.d]
    }

    pub fn det(&self) -> f64 {
        self.a * self.d - self.b * self.c
    }

    pub fn trace(&self) -> f64 {
        self.a + self.d
    }

    pub fn inverse(&self) -> Self {
        Self::sign_normalized(self.d, -self.b, -self.c, self.a)
    }

    pub fn mul(&self, o: &Self) -> Self {
        Self::sign_normalized(
            self.a * o.a + self.b * o.c,
            self.a * o.b + self.b * o.d,
            self.c * o.a + self.d * o.c,
            self.c * o.b + self.d * o.d,
        )
    }

    pub fn conjugate_by(&self, g: &Self) -> Self {
        g.mul(self).mul(&g.inverse())
    }

    pub fn classify(&self) -> MatrixType {
        classify_trace(self.trace())
    }

    /// Action on the upper half-plane.
    pub fn act(&self, z: HPoint) -> HPoint {
        let (x, y) = (z.x, z.y);
        let cx_d = self.c * x + self.d;
        let den = cx_d * cx_d + (self.c * y) * (self.c * y);
        let re = ((self.a * x + self.b) * cx_d + self.a * self.c * y * y) / den;
        let im = y * self.det() / den;
        HPoint { x: re, y: im }
    }
}

/// Translation length of a hyperbolic matrix.
pub fn geodesic_length_of_matrix(m: &MoebiusMatrix) -> Result<f64> {
    length_from_trace(m.trace())
}

/// Point `x + iy` of the upper half-plane.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HPoint {
    pub x: f64,
    pub y: f64,
}

impl HPoint {
    pub fn new(x: f64, y: f64) -> Result<Self> {
        if !(y > 0.0) || !x.is_finite() || !y.is_finite() {
            return Err(Error::domain(format!(
                "point {x} + {y}i is not in the upper half-plane"
            )));
        }
        Ok(Self { x, y })
    }

    pub const I: HPoint = HPoint { x: 0.0, y: 1.0 };
}

/// `cosh d(z, w) - 1 = |z - w|^2 / (2 Im z Im w)`.
pub fn cosh_distance_minus_one(z: HPoint, w: HPoint) -> f64 {
    let dx = z.x - w.x;
    let dy = z.y - w.y;
    (dx * dx + dy * dy) / (2.0 * z.y * w.y)
}

pub fn hyp_distance(z: HPoint, w: HPoint) -> Result<f64> {
    HPoint::new(z.x, z.y)?;
    HPoint::new(w.x, w.y)?;
    let u = cosh_distance_minus_one(z, w);
    // acosh(1 + u) = ln(1 + u + sqrt(u (u + 2))), accurate for small u.
    Ok((u + (u * (u + 2.0)).sqrt()).ln_1p())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn distance_examples() {
        let i = HPoint::I;
        assert_eq!(hyp_distance(i, i).unwrap(), 0.0);
        let d = hyp_distance(i, HPoint::new(0.0, 2.0).unwrap()).unwrap();
        assert!((d - 2f64.ln()).abs() < 1e-15);
        let d = hyp_distance(i, HPoint::new(1.0, 1.0).unwrap()).unwrap();
        assert!((d - 1.5f64.acosh()).abs() < 1e-15);
    }

    #[test]
    fn distance_rejects_lower_half_plane() {
        assert!(HPoint::new(0.0, 0.0).is_err());
        let bad = HPoint { x: 0.0, y: -1.0 };
        assert!(hyp_distance(HPoint::I, bad).is_err());
    }

    #[test]
    fn length_examples() {
        let h0 = MoebiusMatrix::diagonal(0.5f64.exp()).unwrap();
        assert!((geodesic_length_of_matrix(&h0).unwrap() - 1.0).abs() < 1e-14);

        let parabolic = MoebiusMatrix::new(1.0, 1.0, 0.0, 1.0).unwrap();
        match geodesic_length_of_matrix(&parabolic) {
            Err(Error::Classification { kind, .. }) => assert_eq!(kind, "parabolic"),
            other => panic!("{other:?}"),
        }
        let elliptic = MoebiusMatrix::new(0.0, -1.0, 1.0, 0.0).unwrap();
        assert_eq!(elliptic.classify(), MatrixType::Elliptic);

        let m = MoebiusMatrix::new(1.0, 1.0, 1.0, 2.0).unwrap();
        let l = geodesic_length_of_matrix(&m).unwrap();
        assert!((l - 2.0 * 1.5f64.acosh()).abs() < 1e-15);
        assert!((l - 1.924_847_300_238_413).abs() < 1e-12);
    }

    #[test]
    fn construction_normalizes() {
        let m = MoebiusMatrix::new(-2.0, 0.0, 0.0, -2.0).unwrap();
        assert!((m.det() - 1.0).abs() < 1e-12);
        assert!(m.trace() >= 0.0);
        assert!(MoebiusMatrix::new(1.0, 2.0, 2.0, 1.0).is_err());
    }

    #[test]
    fn action_is_isometric() {
        let g = MoebiusMatrix::new(2.0, 1.0, 3.0, 2.0).unwrap();
        let z = HPoint::new(0.3, 0.7).unwrap();
        let w = HPoint::new(-1.2, 2.5).unwrap();
        let d0 = hyp_distance(z, w).unwrap();
        let d1 = hyp_distance(g.act(z), g.act(w)).unwrap();
        assert!((d0 - d1).abs() < 1e-12);
    }

    fn sl2() -> impl Strategy<Value = MoebiusMatrix> {
        (-2.0f64..2.0, -2.0f64..2.0, -2.0f64..2.0).prop_filter_map("det", |(a, b, c)| {
            if a.abs() < 0.5 {
                return None;
            }
            let d = (1.0 + b * c) / a;
            MoebiusMatrix::new(a, b, c, d).ok()
        })
    }

    proptest! {
        #[test]
        fn length_is_conjugation_invariant(g in sl2(), l in 0.1f64..6.0) {
            let m = MoebiusMatrix::new(2.0, 1.0, 1.0, 1.0).unwrap().mul(&MoebiusMatrix::diagonal((l / 2.0).exp()).unwrap());
            let base = geodesic_length_of_matrix(&m).unwrap();
            let conj = geodesic_length_of_matrix(&m.conjugate_by(&g)).unwrap();
            let inv = geodesic_length_of_matrix(&m.inverse()).unwrap();
            prop_assert!((base - conj).abs() < 1e-10 * base.max(1.0));
            prop_assert_eq!(base, inv);
        }

        #[test]
        fn distance_is_symmetric(x1 in -5.0f64..5.0, y1 in 0.01f64..5.0, x2 in -5.0f64..5.0, y2 in 0.01f64..5.0) {
            let z = HPoint::new(x1, y1).unwrap();
            let w = HPoint::new(x2, y2).unwrap();
            let d = hyp_distance(z, w).unwrap();
            prop_assert!(d >= 0.0);
            prop_assert_eq!(d, hyp_distance(w, z).unwrap());
        }
    }
}
