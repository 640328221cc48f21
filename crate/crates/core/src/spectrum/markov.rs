//! Markov triples: an independent oracle for simple closed geodesics on the
//! modular torus, whose traces are `3m` for Markov numbers `m`.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct MarkovTriple(pub u128, pub u128, pub u128);

impl MarkovTriple {
    pub const ROOT: MarkovTriple = MarkovTriple(1, 1, 1);

    pub fn satisfies_equation(&self) -> bool {
        let (a, b, c) = (self.0, self.1, self.2);
        let lhs = a.checked_mul(a).zip(b.checked_mul(b)).zip(c.checked_mul(c));
        let rhs = a
            .checked_mul(b)
            .and_then(|x| x.checked_mul(c))
            .and_then(|x| x.checked_mul(3));
        match (lhs, rhs) {
            (Some(((x, y), z)), Some(r)) => x.checked_add(y).and_then(|s| s.checked_add(z)) == Some(r),
            _ => false,
        }
    }

    fn sorted(self) -> Self {
        let mut v = [self.0, self.1, self.2];
        v.sort_unstable();
        MarkovTriple(v[0], v[1], v[2])
    }

    /// The three Vieta neighbours `(3bc - a, b, c)` and rotations.
    fn neighbours(&self) -> Result<[MarkovTriple; 3]> {
        let (a, b, c) = (self.0, self.1, self.2);
        let flip = |x: u128, y: u128, z: u128| -> Result<u128> {
            y.checked_mul(z)
                .and_then(|p| p.checked_mul(3))
                .map(|p| p - x)
                .ok_or_else(|| Error::domain("Markov tree depth exceeds 128-bit range"))
        };
        Ok([
            MarkovTriple(flip(a, b, c)?, b, c).sorted(),
            MarkovTriple(a, flip(b, a, c)?, c).sorted(),
            MarkovTriple(a, b, flip(c, a, b)?).sorted(),
        ])
    }
}

/// All distinct (sorted) triples within `depth` Vieta moves of `(1,1,1)`.
pub fn markov_triples(depth: u32) -> Result<Vec<MarkovTriple>> {
    let mut seen: BTreeSet<MarkovTriple> = BTreeSet::new();
    seen.insert(MarkovTriple::ROOT);
    let mut frontier = vec![MarkovTriple::ROOT];
    for _ in 0..depth {
        let mut next = Vec::new();
        for t in &frontier {
            for n in t.neighbours()? {
                if seen.insert(n) {
                    next.push(n);
                }
            }
        }
        frontier = next;
    }
    Ok(seen.into_iter().collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MarkovLength {
    pub markov_number: u128,
    /// `2 arccosh(3m/2)`.
    pub length: f64,
}

/// Markov numbers reached within `depth` moves, with their geodesic lengths.
pub fn markov_simple_lengths(depth: u32) -> Result<Vec<MarkovLength>> {
    let numbers: BTreeSet<u128> = markov_triples(depth)?
        .into_iter()
        .flat_map(|t| [t.0, t.1, t.2])
        .collect();
    Ok(numbers
        .into_iter()
        .map(|m| MarkovLength {
            markov_number: m,
            length: 2.0 * (1.5 * m as f64).acosh(),
        })
        .collect())
}
