//! Enumeration of oriented closed geodesics of a free Fuchsian group.

use itertools::Itertools;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::group::{GroupPresentation, WordProduct};
use super::word::{homology_class, inverse_letter, is_least_rotation, primitivity, CyclicWord};
use crate::error::{Error, Result};
use crate::hypgeom::{MoebiusMatrix, PARABOLIC_TOL};

/// One oriented closed geodesic (conjugacy class of a hyperbolic element).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeodesicRecord {
    pub word: CyclicWord,
    /// |trace| of the word's matrix.
    pub trace: f64,
    pub length: f64,
    pub is_primitive: bool,
    pub iteration: u32,
    pub homology: (i32, i32),
    pub word_length: u32,
}

impl GeodesicRecord {
    /// Length of the underlying primitive geodesic.
    pub fn primitive_length(&self) -> f64 {
        self.length / self.iteration as f64
    }

    fn sort_key(a: &Self, b: &Self) -> std::cmp::Ordering {
        a.length.total_cmp(&b.length).then_with(|| a.word.cmp(&b.word))
    }
}

/// Sorted set of oriented closed geodesics up to a word-length bound.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectrumTable {
    pub group_name: String,
    pub generators: Vec<MoebiusMatrix>,
    pub max_word_length: u32,
    pub homology_filter: Option<(i32, i32)>,
    /// Lengths at or below this value are trusted to be complete.
    pub horizon: f64,
    /// Cyclically reduced classes skipped as parabolic or elliptic.
    pub skipped_non_hyperbolic: u64,
    pub records: Vec<GeodesicRecord>,
}

impl SpectrumTable {
    pub fn rank(&self) -> usize {
        self.generators.len()
    }

    pub fn n_oriented(&self) -> usize {
        self.records.len()
    }

    pub fn n_primitive(&self) -> usize {
        self.records.iter().filter(|r| r.is_primitive).count()
    }

    /// Records with length at or below the horizon.
    pub fn reliable_records(&self) -> impl Iterator<Item = &GeodesicRecord> {
        let h = self.horizon;
        self.records.iter().take_while(move |r| r.length <= h)
    }

    /// Primitive lengths at or below the horizon, ascending.
    pub fn primitive_lengths(&self) -> Vec<f64> {
        self.reliable_records()
            .filter(|r| r.is_primitive)
            .map(|r| r.length)
            .collect()
    }

    pub fn is_sorted(&self) -> bool {
        self.records
            .windows(2)
            .all(|w| GeodesicRecord::sort_key(&w[0], &w[1]).is_lt())
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct EnumerationOptions {
    /// Worker threads; `0` uses the global rayon pool.
    pub threads: usize,
}

struct ShardOutput {
    records: Vec<GeodesicRecord>,
    skipped: u64,
    /// Minimal geodesic length per word length (index = word length).
    min_by_len: Vec<f64>,
}

struct Walker {
    letters: Vec<[f64; 4]>,
    /// Abelianization step of each letter (zero for rank > 2).
    steps: Vec<(i32, i32)>,
    n_letters: u8,
    rank: usize,
    max_len: usize,
    filter: Option<(i32, i32)>,
    out: ShardOutput,
}

impl Walker {
    fn visit(&mut self, word: &mut Vec<u8>, prod: WordProduct, h: (i32, i32)) -> Result<()> {
        let n = word.len();
        if !self.within_reach(h, n) {
            return Ok(());
        }
        if n > 0 && word[0] != inverse_letter(word[n - 1]) && is_least_rotation(word) {
            self.leaf(word, &prod)?;
        }
        if n == self.max_len {
            return Ok(());
        }
        // Canonical words start with their least letter.
        let first = word.first().copied().unwrap_or(0);
        for l in first..self.n_letters {
            if n > 0 && l == inverse_letter(word[n - 1]) {
                continue;
            }
            word.push(l);
            let next = prod.times(&self.letters[l as usize]);
            let d = self.steps[l as usize];
            self.visit(word, next, (h.0 + d.0, h.1 + d.1))?;
            word.pop();
        }
        Ok(())
    }

    /// Whether some extension of a prefix of length `n` and homology `h` can
    /// land in the filtered class.
    fn within_reach(&self, h: (i32, i32), n: usize) -> bool {
        self.filter
            .is_none_or(|f| ((f.0 - h.0).abs() + (f.1 - h.1).abs()) as usize <= self.max_len - n)
    }

    fn leaf(&mut self, word: &[u8], prod: &WordProduct) -> Result<()> {
        let n = word.len();
        if prod.exponent == 0 && prod.abs_trace_mantissa() <= 2.0 + PARABOLIC_TOL {
            self.out.skipped += 1;
            return Ok(());
        }
        let cw = CyclicWord::from_canonical(word.to_vec());
        let homology = if self.rank <= 2 {
            homology_class(&cw, self.rank)?
        } else {
            (0, 0)
        };
        if self.filter.is_some_and(|f| f != homology) {
            return Ok(());
        }
        let (length, trace) = prod.length_and_trace()?;
        if length < self.out.min_by_len[n] {
            self.out.min_by_len[n] = length;
        }
        let (is_primitive, iteration) = primitivity(&cw);
        self.out.records.push(GeodesicRecord {
            word: cw,
            trace,
            length,
            is_primitive,
            iteration,
            homology,
            word_length: n as u32,
        });
        Ok(())
    }
}

/// Enumerates one record per conjugacy class of cyclically reduced words of
/// length `1..=max_word_length` (a class and its inverse are distinct).
pub fn enumerate_spectrum(
    group: &GroupPresentation,
    max_word_length: u32,
    homology_filter: Option<(i32, i32)>,
    options: EnumerationOptions,
) -> Result<SpectrumTable> {
    if !group.is_free {
        return Err(Error::UnsupportedPresentation(format!(
            "{} is not free; conjugacy for surface-relation groups is not implemented",
            group.name
        )));
    }
    if max_word_length < 1 {
        return Err(Error::domain("max_word_length must be at least 1"));
    }
    if homology_filter.is_some() && group.rank() > 2 {
        return Err(Error::UnsupportedPresentation("homology filters need rank <= 2".into()));
    }
    let n_letters = (2 * group.rank()) as u8;
    let letters: Vec<[f64; 4]> = (0..n_letters).map(|l| group.letter_matrix(l)).collect();
    let max_len = max_word_length as usize;
    let steps: Vec<(i32, i32)> = (0..n_letters)
        .map(|l| {
            let sign = if l % 2 == 0 { 1 } else { -1 };
            match (group.rank(), l / 2) {
                (1 | 2, 0) => (sign, 0),
                (2, 1) => (0, sign),
                _ => (0, 0),
            }
        })
        .collect();

    // Shards: every reduced two-letter prefix, or one-letter words.
    let mut prefixes: Vec<Vec<u8>> = Vec::new();
    for a in 0..n_letters {
        if max_len == 1 {
            prefixes.push(vec![a]);
            continue;
        }
        for b in a..n_letters {
            if b != inverse_letter(a) {
                prefixes.push(vec![a, b]);
            }
        }
    }

    let run_shard = |prefix: &Vec<u8>| -> Result<ShardOutput> {
        let mut walker = Walker {
            letters: letters.clone(),
            steps: steps.clone(),
            n_letters,
            rank: group.rank(),
            max_len,
            filter: homology_filter,
            out: ShardOutput {
                records: Vec::new(),
                skipped: 0,
                min_by_len: vec![f64::INFINITY; max_len + 1],
            },
        };
        let mut word = Vec::with_capacity(max_len);
        let mut prod = WordProduct::identity();
        let mut h = (0, 0);
        for &l in prefix {
            word.push(l);
            prod.mul_right(&letters[l as usize]);
            h = (h.0 + steps[l as usize].0, h.1 + steps[l as usize].1);
        }
        // Each one-letter word is visited by the shard [l, l].
        if prefix.len() == 2 && prefix[0] == prefix[1] {
            let single = [prefix[0]];
            walker.leaf(&single, &WordProduct::identity().times(&letters[prefix[0] as usize]))?;
        }
        walker.visit(&mut word, prod, h)?;
        walker.out.records.sort_by(GeodesicRecord::sort_key);
        Ok(walker.out)
    };

    let outputs: Vec<ShardOutput> = if options.threads == 1 {
        prefixes.iter().map(run_shard).collect::<Result<_>>()?
    } else if options.threads == 0 {
        prefixes.par_iter().map(run_shard).collect::<Result<_>>()?
    } else {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(options.threads)
            .build()
            .map_err(|e| Error::domain(format!("thread pool: {e}")))?;
        pool.install(|| prefixes.par_iter().map(run_shard).collect::<Result<_>>())?
    };

    let mut min_by_len = vec![f64::INFINITY; max_len + 1];
    let mut skipped = 0;
    for o in &outputs {
        skipped += o.skipped;
        for (m, v) in min_by_len.iter_mut().zip(&o.min_by_len) {
            *m = m.min(*v);
        }
    }
    let records: Vec<GeodesicRecord> = outputs
        .into_iter()
        .map(|o| o.records)
        .kmerge_by(|a, b| GeodesicRecord::sort_key(a, b).is_lt())
        .collect();

    Ok(SpectrumTable {
        group_name: group.name.clone(),
        generators: group.generators.clone(),
        max_word_length,
        homology_filter,
        horizon: reliable_horizon(&min_by_len),
        skipped_non_hyperbolic: skipped,
        records,
    })
}

/// Word lengths whose minimal geodesic bounds the horizon.
pub const HORIZON_WINDOW: usize = 4;

/// Shortest enumerated geodesic among the last [`HORIZON_WINDOW`] word
/// lengths.
///
/// Minimal length per word length is not monotone: near a cusp, words
/// `a c^k` with `c` parabolic have trace growing only linearly in `k`, so the
/// minimum at the top word length alone can overshoot what longer words
/// reach. Taking the window over one period of that family keeps the horizon
/// below the next unseen word lengths and nondecreasing in depth.
fn reliable_horizon(min_by_len: &[f64]) -> f64 {
    min_by_len
        .iter()
        .skip(1)
        .rev()
        .take(HORIZON_WINDOW)
        .fold(f64::INFINITY, |m, &v| m.min(v))
}

/// `N(L)`: primitive records of length at most `l`.
pub fn counting_function(table: &SpectrumTable, l: f64) -> Result<usize> {
    if l > table.horizon {
        return Err(Error::Horizon {
            requested: l,
            horizon: table.horizon,
        });
    }
    Ok(table
        .records
        .iter()
        .take_while(|r| r.length <= l)
        .filter(|r| r.is_primitive)
        .count())
}
