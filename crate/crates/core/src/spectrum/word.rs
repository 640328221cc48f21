//! Cyclic words over `{g1, g1^-1, ..., gr, gr^-1}`.
//!
//! Letter code `2 g + s` encodes generator `g` (`s = 0`) or its inverse
//! (`s = 1`); the inverse of a letter is `code ^ 1`. Generators print as
//! `a, b, c, ...` and inverses as upper case.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[inline]
pub fn inverse_letter(l: u8) -> u8 {
    l ^ 1
}

/// Cyclically reduced word in its lexicographically least rotation.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct CyclicWord {
    letters: Vec<u8>,
}

impl CyclicWord {
    /// Freely and cyclically reduces `letters`, then rotates to canonical form.
    pub fn new(letters: impl IntoIterator<Item = u8>) -> Self {
        let mut stack: Vec<u8> = Vec::new();
        for l in letters {
            if stack.last().is_some_and(|&p| p == inverse_letter(l)) {
                stack.pop();
            } else {
                stack.push(l);
            }
        }
        let (mut lo, mut hi) = (0, stack.len());
        while hi - lo >= 2 && stack[lo] == inverse_letter(stack[hi - 1]) {
            lo += 1;
            hi -= 1;
        }
        let reduced = &stack[lo..hi];
        let start = least_rotation(reduced);
        let mut letters = Vec::with_capacity(reduced.len());
        letters.extend_from_slice(&reduced[start..]);
        letters.extend_from_slice(&reduced[..start]);
        Self { letters }
    }

    /// Wraps letters already known to be canonical.
    pub(crate) fn from_canonical(letters: Vec<u8>) -> Self {
        debug_assert!(is_cyclically_reduced(&letters) && is_least_rotation(&letters));
        Self { letters }
    }

    pub fn parse(s: &str) -> Result<Self> {
        let mut letters = Vec::with_capacity(s.len());
        for ch in s.chars() {
            if !ch.is_ascii_alphabetic() {
                return Err(Error::domain(format!("invalid letter {ch:?} in word {s:?}")));
            }
            let g = ch.to_ascii_lowercase() as u8 - b'a';
            letters.push(2 * g + u8::from(ch.is_ascii_uppercase()));
        }
        Ok(Self::new(letters))
    }

    pub fn letters(&self) -> &[u8] {
        &self.letters
    }

    pub fn len(&self) -> usize {
        self.letters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.letters.is_empty()
    }

    pub fn inverse(&self) -> Self {
        Self::new(self.letters.iter().rev().map(|&l| inverse_letter(l)))
    }

    pub fn power(&self, k: usize) -> Self {
        Self::new(std::iter::repeat_n(self.letters.iter().copied(), k).flatten())
    }

    /// Largest generator index used plus one.
    pub fn max_generator(&self) -> usize {
        self.letters.iter().map(|&l| (l / 2) as usize + 1).max().unwrap_or(0)
    }
}

impl fmt::Display for CyclicWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for &l in &self.letters {
            let ch = (b'a' + l / 2) as char;
            let ch = if l & 1 == 1 { ch.to_ascii_uppercase() } else { ch };
            write!(f, "{ch}")?;
        }
        Ok(())
    }
}

pub fn is_cyclically_reduced(w: &[u8]) -> bool {
    if w.is_empty() {
        return true;
    }
    w.windows(2).all(|p| p[1] != inverse_letter(p[0])) && (w.len() == 1 || w[0] != inverse_letter(w[w.len() - 1]))
}

/// Start index of the least rotation (two-pointer minimum expression).
pub fn least_rotation(s: &[u8]) -> usize {
    let n = s.len();
    let (mut i, mut j, mut k) = (0usize, 1usize, 0usize);
    while i < n && j < n && k < n {
        let a = s[(i + k) % n];
        let b = s[(j + k) % n];
        if a == b {
            k += 1;
            continue;
        }
        if a > b {
            i += k + 1;
        } else {
            j += k + 1;
        }
        if i == j {
            j += 1;
        }
        k = 0;
    }
    i.min(j)
}

/// Whether `w` is the least of its rotations; exits at the first witness.
pub fn is_least_rotation(w: &[u8]) -> bool {
    let n = w.len();
    'rot: for i in 1..n {
        for j in 0..n {
            let a = w[(i + j) % n];
            let b = w[j];
            if a < b {
                return false;
            }
            if a > b {
                continue 'rot;
            }
        }
    }
    true
}

/// `(is_primitive, iteration)`: the iteration is the largest `k` with
/// `w = u^k` as cyclic words.
pub fn primitivity(w: &CyclicWord) -> (bool, u32) {
    let n = w.len();
    if n == 0 {
        return (true, 1);
    }
    let s = w.letters();
    for period in 1..=n {
        if n.is_multiple_of(period) && (period..n).all(|i| s[i] == s[i - period]) {
            let k = (n / period) as u32;
            return (k == 1, k);
        }
    }
    unreachable!("period n always divides n")
}

/// Image in the abelianization: signed letter counts of `a` and `b`.
///
/// Rank-1 groups map into the first coordinate.
pub fn homology_class(w: &CyclicWord, rank: usize) -> Result<(i32, i32)> {
    if rank > 2 || w.max_generator() > 2 {
        return Err(Error::UnsupportedPresentation(format!(
            "homology pairs need rank <= 2 (rank {rank})"
        )));
    }
    let mut h = [0i32; 2];
    for &l in w.letters() {
        h[(l / 2) as usize] += if l & 1 == 0 { 1 } else { -1 };
    }
    Ok((h[0], h[1]))
}
