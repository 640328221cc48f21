//! Globally adaptive Gauss-Kronrod (10/21 point) quadrature.

use std::collections::BinaryHeap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const XGK: [f64; 11] = [
    0.995_657_163_025_808_080_735_527_280_689,
    0.973_906_528_517_171_720_077_964_012_084,
    0.930_157_491_355_708_226_001_207_180_060,
    0.865_063_366_688_984_510_732_096_688_423,
    0.780_817_726_586_416_897_063_717_578_345,
    0.679_409_568_299_024_406_234_327_365_115,
    0.562_757_134_668_604_683_339_000_099_273,
    0.433_395_394_129_247_190_799_265_943_166,
    0.294_392_862_701_460_198_131_126_603_104,
    0.148_874_338_981_631_210_884_826_001_130,
    0.0,
];

const WGK: [f64; 11] = [
    0.011_694_638_867_371_874_278_064_396_062,
    0.032_558_162_307_964_727_478_818_972_459,
    0.054_755_896_574_351_996_031_381_300_245,
    0.075_039_674_810_919_952_767_043_140_916,
    0.093_125_454_583_697_605_535_065_465_083,
    0.109_387_158_802_297_641_899_210_590_326,
    0.123_491_976_262_065_851_077_208_980_138,
    0.134_709_217_311_473_325_928_054_001_772,
    0.142_775_938_577_060_080_797_094_273_139,
    0.147_739_104_901_338_491_374_841_515_972,
    0.149_445_554_002_916_905_664_936_468_390,
];

// Gauss weights for the odd-indexed Kronrod nodes.
const WG: [f64; 5] = [
    0.066_671_344_308_688_137_593_568_809_893,
    0.149_451_349_150_580_593_145_776_339_658,
    0.219_086_362_515_982_043_995_534_934_228,
    0.269_266_719_309_996_355_091_226_921_569,
    0.295_524_224_714_752_870_173_892_994_651,
];

/// Smallest relative tolerance handed out by [`QuadratureSpec::with_tolerances`].
pub const MIN_REL_TOL: f64 = 1e-13;

/// Tolerances and limits for adaptive quadrature.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadratureSpec {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_subdivisions: usize,
    /// Truncation radius used by callers that cut improper integrals off.
    pub cutoff: f64,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        Self {
            abs_tol: 1e-13,
            rel_tol: 1e-11,
            max_subdivisions: 2000,
            cutoff: 60.0,
        }
    }
}

impl QuadratureSpec {
    pub fn new(abs_tol: f64, rel_tol: f64, max_subdivisions: usize, cutoff: f64) -> Result<Self> {
        let q = Self {
            abs_tol,
            rel_tol,
            max_subdivisions,
            cutoff,
        };
        q.validate()?;
        Ok(q)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.abs_tol > 0.0 && self.rel_tol > 0.0) {
            return Err(Error::domain("quadrature tolerances must be positive"));
        }
        if self.max_subdivisions < 1 {
            return Err(Error::domain("max_subdivisions must be at least 1"));
        }
        if !(self.cutoff > 0.0) {
            return Err(Error::domain("quadrature cutoff must be positive"));
        }
        Ok(())
    }

    /// Tightened copy for nested quadratures. The relative tolerance is kept
    /// at or above [`MIN_REL_TOL`], below which rounding in the Kronrod sums
    /// makes convergence unreachable.
    pub fn with_tolerances(mut self, abs_tol: f64, rel_tol: f64) -> Self {
        self.abs_tol = abs_tol;
        self.rel_tol = rel_tol.max(MIN_REL_TOL);
        self
    }
}

/// Value of an integral with its estimated absolute error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub value: f64,
    pub error: f64,
    pub subdivisions: usize,
}

impl Estimate {
    pub fn exact(value: f64) -> Self {
        Self {
            value,
            error: 0.0,
            subdivisions: 0,
        }
    }
}

impl std::ops::Add for Estimate {
    type Output = Estimate;
    fn add(self, o: Estimate) -> Estimate {
        Estimate {
            value: self.value + o.value,
            error: self.error + o.error,
            subdivisions: self.subdivisions + o.subdivisions,
        }
    }
}

impl std::ops::Sub for Estimate {
    type Output = Estimate;
    fn sub(self, o: Estimate) -> Estimate {
        Estimate {
            value: self.value - o.value,
            error: self.error + o.error,
            subdivisions: self.subdivisions + o.subdivisions,
        }
    }
}

impl std::ops::Mul<f64> for Estimate {
    type Output = Estimate;
    fn mul(self, c: f64) -> Estimate {
        Estimate {
            value: self.value * c,
            error: self.error * c.abs(),
            subdivisions: self.subdivisions,
        }
    }
}

#[derive(Debug, Clone, Copy)]
struct Segment {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

impl PartialEq for Segment {
    fn eq(&self, o: &Self) -> bool {
        self.error.total_cmp(&o.error).is_eq()
    }
}
impl Eq for Segment {}
impl PartialOrd for Segment {
    fn partial_cmp(&self, o: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(o))
    }
}
impl Ord for Segment {
    fn cmp(&self, o: &Self) -> std::cmp::Ordering {
        self.error.total_cmp(&o.error)
    }
}

fn gk21<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> Segment {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut kronrod = fc * WGK[10];
    let mut gauss = 0.0;
    let mut res_abs = kronrod.abs();
    let mut fv1 = [0.0; 10];
    let mut fv2 = [0.0; 10];
    for j in 0..10 {
        let x = half * XGK[j];
        let f1 = f(center - x);
        let f2 = f(center + x);
        fv1[j] = f1;
        fv2[j] = f2;
        kronrod += WGK[j] * (f1 + f2);
        res_abs += WGK[j] * (f1.abs() + f2.abs());
        if j % 2 == 1 {
            gauss += WG[j / 2] * (f1 + f2);
        }
    }
    let mean = 0.5 * kronrod;
    let mut res_asc = WGK[10] * (fc - mean).abs();
    for j in 0..10 {
        res_asc += WGK[j] * ((fv1[j] - mean).abs() + (fv2[j] - mean).abs());
    }
    let value = kronrod * half;
    let res_abs = res_abs * half.abs();
    let res_asc = res_asc * half.abs();
    let mut err = ((kronrod - gauss) * half).abs();
    if res_asc != 0.0 && err != 0.0 {
        err = res_asc * (200.0 * err / res_asc).powf(1.5).min(1.0);
    }
    if res_abs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        err = err.max(50.0 * f64::EPSILON * res_abs);
    }
    Segment {
        a,
        b,
        value,
        error: err,
    }
}

/// Integrates `f` over the finite interval `[a, b]`.
///
/// The integrand is never evaluated at the endpoints, so integrable endpoint
/// singularities are tolerated (slowly).
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, q: &QuadratureSpec) -> Result<Estimate> {
    if a == b {
        return Ok(Estimate::exact(0.0));
    }
    let mut heap = BinaryHeap::new();
    let first = gk21(&f, a, b);
    let mut total = first.value;
    let mut err = first.error;
    heap.push(first);
    let mut subdivisions = 1;
    while err > q.abs_tol.max(q.rel_tol * total.abs()) {
        if subdivisions >= q.max_subdivisions {
            return Err(Error::Numeric {
                what: format!("adaptive quadrature on [{a}, {b}]"),
                partial: total,
                bound: err,
            });
        }
        let worst = heap.pop().expect("heap is never empty");
        let mid = 0.5 * (worst.a + worst.b);
        if !(mid > worst.a.min(worst.b) && mid < worst.a.max(worst.b)) {
            // Interval below floating-point resolution.
            return Err(Error::Numeric {
                what: format!("adaptive quadrature on [{a}, {b}] (interval exhausted)"),
                partial: total,
                bound: err,
            });
        }
        let left = gk21(&f, worst.a, mid);
        let right = gk21(&f, mid, worst.b);
        total += left.value + right.value - worst.value;
        err += left.error + right.error - worst.error;
        heap.push(left);
        heap.push(right);
        subdivisions += 1;
        if subdivisions % 64 == 0 {
            // Re-sum to shed drift from the running updates.
            total = heap.iter().map(|s| s.value).sum();
            err = heap.iter().map(|s| s.error).sum();
        }
    }
    total = heap.iter().map(|s| s.value).sum();
    err = heap.iter().map(|s| s.error).sum();
    Ok(Estimate {
        value: total,
        error: err,
        subdivisions,
    })
}

/// Integrates over `[a, inf)` through the map `x = a + u/(1-u)`, `u in [0, 1)`.
pub fn integrate_to_infinity<F: Fn(f64) -> f64>(f: F, a: f64, q: &QuadratureSpec) -> Result<Estimate> {
    let g = |u: f64| {
        let w = 1.0 - u;
        let x = a + u / w;
        let v = f(x) / (w * w);
        if v.is_finite() {
            v
        } else {
            0.0
        }
    };
    integrate(g, 0.0, 1.0, q)
}

/// Integrates over `[a, b]` split at the given interior breakpoints.
pub fn integrate_pieces<F: Fn(f64) -> f64>(f: F, points: &[f64], q: &QuadratureSpec) -> Result<Estimate> {
    let mut acc = Estimate::exact(0.0);
    for w in points.windows(2) {
        acc = acc + integrate(&f, w[0], w[1], q)?;
    }
    Ok(acc)
}

/// Pairwise summation; the result depends only on the order of `xs`.
pub fn pairwise_sum(xs: &[f64]) -> f64 {
    if xs.len() <= 8 {
        return xs.iter().sum();
    }
    let mid = xs.len() / 2;
    pairwise_sum(&xs[..mid]) + pairwise_sum(&xs[mid..])
}

/// Neumaier-compensated running sum.
#[derive(Debug, Clone, Copy, Default)]
pub struct CompensatedSum {
    sum: f64,
    comp: f64,
}

impl CompensatedSum {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polynomial_is_exact() {
        let q = QuadratureSpec::default();
        let r = integrate(|x| x.powi(7) - 3.0 * x * x, -1.0, 2.0, &q).unwrap();
        let exact = (2f64.powi(8) - 1.0) / 8.0 - (8.0 + 1.0);
        assert!((r.value - exact).abs() < 1e-13);
    }

    #[test]
    fn endpoint_singularity() {
        let q = QuadratureSpec::default();
        let r = integrate(|x: f64| 1.0 / x.sqrt(), 0.0, 1.0, &q).unwrap();
        assert!((r.value - 2.0).abs() < 1e-9, "{r:?}");
    }

    #[test]
    fn semi_infinite_gaussian() {
        let q = QuadratureSpec::default();
        let r = integrate_to_infinity(|x| (-x * x).exp(), 0.0, &q).unwrap();
        assert!((r.value - std::f64::consts::PI.sqrt() / 2.0).abs() < 1e-12);
    }

    #[test]
    fn nonconvergence_is_reported() {
        let q = QuadratureSpec::new(1e-15, 1e-15, 3, 1.0).unwrap();
        let e = integrate(|x: f64| (1.0 / x).sin(), 1e-6, 1.0, &q).unwrap_err();
        assert!(matches!(e, Error::Numeric { .. }));
    }

    #[test]
    fn spec_validation() {
        assert!(QuadratureSpec::new(0.0, 1e-8, 10, 1.0).is_err());
        assert!(QuadratureSpec::new(1e-8, 1e-8, 0, 1.0).is_err());
    }

    #[test]
    fn compensated_sum_beats_naive() {
        let mut s = CompensatedSum::new();
        s.add(1.0);
        for _ in 0..10 {
            s.add(1e-16);
        }
        assert!((s.value() - (1.0 + 1e-15)).abs() < 1e-17);
    }
}
