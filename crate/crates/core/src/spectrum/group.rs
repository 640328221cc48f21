//! Fuchsian group presentations and word products.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::word::CyclicWord;
use crate::error::{Error, Result};
use crate::hypgeom::{length_from_trace, MoebiusMatrix};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupPresentation {
    pub name: String,
    pub generators: Vec<MoebiusMatrix>,
    /// Free group on the generators (no relations); conjugacy is then
    /// exactly cyclic-word equivalence.
    pub is_free: bool,
}

struct PresetData {
    name: &'static str,
    generators: &'static [[f64; 4]],
    is_free: bool,
    generator_trace: Option<f64>,
    commutator_trace: Option<f64>,
}

// The modular torus: commutator subgroup of PSL(2,Z), a free group of rank
// two whose commutator is parabolic (the cusp).
const PRESETS: &[PresetData] = &[PresetData {
    name: "modular-torus",
    generators: &[[1.0, 1.0, 1.0, 2.0], [1.0, -1.0, -1.0, 2.0]],
    is_free: true,
    generator_trace: Some(3.0),
    commutator_trace: Some(-2.0),
}];

pub fn preset_names() -> Vec<&'static str> {
    PRESETS.iter().map(|p| p.name).collect()
}

fn raw_mul(x: [f64; 4], y: [f64; 4]) -> [f64; 4] {
    [
        x[0] * y[0] + x[1] * y[2],
        x[0] * y[1] + x[1] * y[3],
        x[2] * y[0] + x[3] * y[2],
        x[2] * y[1] + x[3] * y[3],
    ]
}

fn raw_inv(x: [f64; 4]) -> [f64; 4] {
    [x[3], -x[1], -x[2], x[0]]
}

/// Trace of `A B A^-1 B^-1`; independent of the signs of the SL(2,R) lifts.
pub fn commutator_trace(a: &MoebiusMatrix, b: &MoebiusMatrix) -> f64 {
    let (x, y) = (a.entries(), b.entries());
    let m = raw_mul(raw_mul(raw_mul(x, y), raw_inv(x)), raw_inv(y));
    m[0] + m[3]
}

impl GroupPresentation {
    pub fn new(name: impl Into<String>, generators: Vec<MoebiusMatrix>, is_free: bool) -> Result<Self> {
        if generators.is_empty() {
            return Err(Error::domain("a presentation needs at least one generator"));
        }
        if generators.len() > 13 {
            return Err(Error::UnsupportedPresentation("at most 13 generators".into()));
        }
        Ok(Self {
            name: name.into(),
            generators,
            is_free,
        })
    }

    pub fn rank(&self) -> usize {
        self.generators.len()
    }

    /// Loads a shipped preset and checks its defining conditions.
    pub fn preset(name: &str) -> Result<Self> {
        let data = PRESETS
            .iter()
            .find(|p| p.name == name)
            .ok_or_else(|| Error::domain(format!("unknown preset {name:?}; known: {:?}", preset_names())))?;
        let generators = data
            .generators
            .iter()
            .map(|e| MoebiusMatrix::new(e[0], e[1], e[2], e[3]))
            .collect::<Result<Vec<_>>>()?;
        for (i, g) in generators.iter().enumerate() {
            let det = g.det();
            if (det - 1.0).abs() > 1e-12 {
                return Err(Error::domain(format!("preset {name}: generator {i} has det {det}")));
            }
            if let Some(tr) = data.generator_trace {
                if (g.trace() - tr).abs() > 1e-12 {
                    return Err(Error::domain(format!(
                        "preset {name}: generator {i} has trace {}, expected {tr}",
                        g.trace()
                    )));
                }
            }
        }
        if let Some(ct) = data.commutator_trace {
            let got = commutator_trace(&generators[0], &generators[1]);
            if (got - ct).abs() > 1e-12 {
                return Err(Error::domain(format!(
                    "preset {name}: commutator trace {got}, expected {ct} (cusp condition)"
                )));
            }
        }
        Self::new(data.name, generators, data.is_free)
    }

    /// Cyclic group generated by a hyperbolic element of translation length
    /// `length`; its quotient is an annulus.
    pub fn cyclic(length: f64) -> Result<Self> {
        if !(length > 0.0) {
            return Err(Error::domain(format!("length must be positive, got {length}")));
        }
        Self::new(
            format!("cyclic-{length}"),
            vec![MoebiusMatrix::diagonal((length / 2.0).exp())?],
            true,
        )
    }

    /// The annulus `{e^-r < |z| < 1}` as `<z -> e^(2 pi^2 / r) z>`.
    pub fn annulus(r: f64) -> Result<Self> {
        if !(r > 0.0) {
            return Err(Error::domain(format!("annulus parameter must be positive, got {r}")));
        }
        let mut g = Self::cyclic(2.0 * PI * PI / r)?;
        g.name = format!("annulus-{r}");
        Ok(g)
    }

    pub(crate) fn letter_matrix(&self, letter: u8) -> [f64; 4] {
        let m = self.generators[(letter / 2) as usize];
        if letter & 1 == 0 {
            m.entries()
        } else {
            m.inverse().entries()
        }
    }

    fn check_word(&self, w: &CyclicWord) -> Result<()> {
        if w.max_generator() > self.rank() {
            return Err(Error::domain(format!(
                "word {w} uses generators beyond rank {}",
                self.rank()
            )));
        }
        Ok(())
    }
}

/// Product of generator matrices in word order.
pub fn matrix_of_word(w: &CyclicWord, g: &GroupPresentation) -> Result<MoebiusMatrix> {
    g.check_word(w)?;
    let mut p = WordProduct::identity();
    for &l in w.letters() {
        p.mul_right(&g.letter_matrix(l));
    }
    if p.exponent != 0 {
        return Err(Error::domain(format!("word {w} overflows a plain matrix product")));
    }
    let m = p.m;
    MoebiusMatrix::new(m[0], m[1], m[2], m[3])
}

/// Translation length and |trace| of the word, using the scaled product.
pub fn length_of_word(w: &CyclicWord, g: &GroupPresentation) -> Result<(f64, f64)> {
    g.check_word(w)?;
    let mut p = WordProduct::identity();
    for &l in w.letters() {
        p.mul_right(&g.letter_matrix(l));
    }
    p.length_and_trace()
}

#[inline]
fn two_prod(a: f64, b: f64) -> (f64, f64) {
    let p = a * b;
    (p, a.mul_add(b, -p))
}

#[inline]
fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    (s, (a - (s - bb)) + (b - bb))
}

#[inline]
fn dot2(a: f64, b: f64, c: f64, d: f64) -> f64 {
    let (p, ep) = two_prod(a, b);
    let (q, eq) = two_prod(c, d);
    let (s, es) = two_sum(p, q);
    s + (ep + eq + es)
}

const RESCALE_ABOVE: f64 = 18_446_744_073_709_551_616.0; // 2^64
const RESCALE_BY: f64 = 1.0 / RESCALE_ABOVE;

/// Running 2x2 product `m * 2^exponent`.
///
/// Entries are multiplied with error-free transforms (exact for integer
/// matrices below 2^53); once an entry exceeds 2^64 the matrix is scaled by
/// an exact power of two and the exponent tracked separately.
#[derive(Debug, Clone, Copy)]
pub struct WordProduct {
    pub m: [f64; 4],
    pub exponent: i32,
}

impl WordProduct {
    pub fn identity() -> Self {
        Self {
            m: [1.0, 0.0, 0.0, 1.0],
            exponent: 0,
        }
    }

    #[inline]
    pub fn mul_right(&mut self, y: &[f64; 4]) {
        let x = self.m;
        self.m = [
            dot2(x[0], y[0], x[1], y[2]),
            dot2(x[0], y[1], x[1], y[3]),
            dot2(x[2], y[0], x[3], y[2]),
            dot2(x[2], y[1], x[3], y[3]),
        ];
        let big = self.m.iter().fold(0.0f64, |acc, v| acc.max(v.abs()));
        if big > RESCALE_ABOVE {
            for v in &mut self.m {
                *v *= RESCALE_BY;
            }
            self.exponent += 64;
        }
    }

    #[inline]
    pub fn times(mut self, y: &[f64; 4]) -> Self {
        self.mul_right(y);
        self
    }

    pub fn abs_trace_mantissa(&self) -> f64 {
        (self.m[0] + self.m[3]).abs()
    }

    /// `(length, |trace|)`; errors for non-hyperbolic products. `|trace|`
    /// saturates to infinity when it exceeds the f64 range.
    pub fn length_and_trace(&self) -> Result<(f64, f64)> {
        let mant = self.abs_trace_mantissa();
        if self.exponent == 0 {
            let l = length_from_trace(mant)?;
            return Ok((l, mant));
        }
        let tr = mant * 2f64.powi(self.exponent);
        if tr.is_finite() && tr < 1e150 {
            Ok((length_from_trace(tr)?, tr))
        } else {
            // acosh(x/2) = ln x - 1/x^2 + ..., and x > 1e150 here.
            Ok((2.0 * (mant.ln() + self.exponent as f64 * std::f64::consts::LN_2), tr))
        }
    }
}
