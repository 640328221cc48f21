//! Monte Carlo check of the flat-torus hit mass.
//!
//! Rooted loops in the class `m tau` of `C / Lambda` are sampled exactly in
//! distribution: root uniform on a fundamental domain, duration with density
//! `a t^{-2} e^{-a/t}` (`a = |m tau|^2 / 4`), and a Brownian bridge from the
//! root to `root + m tau`. The class mass `Area / (pi |m tau|^2)` is applied
//! analytically, so the only random quantity is whether the loop meets a lift
//! of the geodesic through `tau`.

use std::io::Write;
use std::path::Path;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Exp1, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hypgeom::pairwise_sum;
use crate::loopmass::{mass_flat_class, mass_torus_hit};
use crate::numfmt::fmt17;

/// Variance rate per coordinate of the speed-2 Brownian motion.
const VARIANCE_RATE: f64 = 2.0;
pub const MIN_STEPS: usize = 16;

#[derive(Debug, Clone, PartialEq)]
pub struct LoopSampleSpec {
    pub omega1: Complex64,
    pub omega2: Complex64,
    /// Class vector `p omega1 + q omega2`.
    pub p: i64,
    pub q: i64,
    pub m: i64,
    pub n_steps: usize,
    pub n_samples: usize,
    pub seed: u64,
    /// Worker threads; `1` runs inline, `0` uses the global pool.
    pub threads: usize,
}

impl LoopSampleSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.omega1.norm() > 0.0) || !((self.omega2 / self.omega1).im.abs() > 0.0) {
            return Err(Error::domain("lattice basis is degenerate"));
        }
        if !(self.omega1.re.is_finite()
            && self.omega1.im.is_finite()
            && self.omega2.re.is_finite()
            && self.omega2.im.is_finite())
        {
            return Err(Error::domain("lattice basis must be finite"));
        }
        if self.p == 0 && self.q == 0 {
            return Err(Error::domain("class vector must be nonzero"));
        }
        if self.m == 0 {
            return Err(Error::InfiniteMass("winding m = 0".into()));
        }
        if self.n_steps < MIN_STEPS {
            return Err(Error::domain(format!(
                "n_steps must be at least {MIN_STEPS}, got {}",
                self.n_steps
            )));
        }
        if self.n_samples < 2 {
            return Err(Error::domain("need at least two samples"));
        }
        Ok(())
    }

    pub fn area(&self) -> f64 {
        (self.omega1.conj() * self.omega2).im.abs()
    }

    /// The primitive vector `tau` of the geodesic and the total winding: a
    /// non-primitive class vector `g tau` contributes its factor `g` to `m`.
    pub fn primitive_class(&self) -> (Complex64, i64) {
        let g = gcd(self.p.unsigned_abs(), self.q.unsigned_abs()) as i64;
        let tau = self.omega1 * (self.p / g) as f64 + self.omega2 * (self.q / g) as f64;
        (tau, self.m * g)
    }

    /// `mass_torus_hit` for this spec.
    pub fn closed_form(&self) -> Result<f64> {
        let (tau, m) = self.primitive_class();
        Ok(mass_torus_hit(self.area(), tau.norm(), m)?.value)
    }
}

fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct McEstimate {
    pub mean: f64,
    pub stderr: f64,
    pub n: usize,
    pub seed: u64,
}

/// Duration with density `a t^{-2} e^{-a/t}`: `a / Exp(1)`.
pub fn sample_duration<R: Rng>(a: f64, rng: &mut R) -> f64 {
    let e: f64 = rng.sample(Exp1);
    a / e
}

/// Brownian bridge from `z0` to `z1` over `[0, t]` at `n_steps + 1` equally
/// spaced times, with exact finite-dimensional marginals.
pub fn sample_bridge<R: Rng>(z0: Complex64, z1: Complex64, t: f64, n_steps: usize, rng: &mut R) -> Vec<Complex64> {
    let dt = t / n_steps as f64;
    let mut path = Vec::with_capacity(n_steps + 1);
    let mut z = z0;
    path.push(z);
    for k in 0..n_steps - 1 {
        let left = t - k as f64 * dt;
        let frac = dt / left;
        let sd = (VARIANCE_RATE * dt * (1.0 - frac)).sqrt();
        let (gx, gy): (f64, f64) = (rng.sample(StandardNormal), rng.sample(StandardNormal));
        z += (z1 - z) * frac + Complex64::new(gx, gy) * sd;
        path.push(z);
    }
    path.push(z1);
    path
}

/// Parallel lines `{z : <z, normal> = k spacing}`, `k` in `Z`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LineFamily {
    normal: Complex64,
    spacing: f64,
}

impl LineFamily {
    pub fn new(direction: Complex64, spacing: f64) -> Result<Self> {
        if !(direction.norm() > 0.0) || !direction.norm().is_finite() {
            return Err(Error::domain("line direction must be nonzero"));
        }
        if !(spacing > 0.0 && spacing.is_finite()) {
            return Err(Error::domain(format!("line spacing must be positive, got {spacing}")));
        }
        Ok(Self {
            normal: Complex64::i() * direction / direction.norm(),
            spacing,
        })
    }

    /// Lifts of the closed geodesic with primitive vector `tau` on a torus of
    /// the given area: lines through the lattice, `Area / |tau|` apart.
    pub fn lifts(tau: Complex64, area: f64) -> Result<Self> {
        Self::new(tau, area / tau.norm())
    }

    pub fn spacing(&self) -> f64 {
        self.spacing
    }

    fn coordinate(&self, z: Complex64) -> f64 {
        z.re * self.normal.re + z.im * self.normal.im
    }
}

/// Probability that a bridge with endpoints at distances `d1, d2 >= 0` on the
/// same side of a line meets it within time `dt`.
pub fn crossing_probability(d1: f64, d2: f64, dt: f64) -> f64 {
    (-2.0 * d1 * d2 / (VARIANCE_RATE * dt)).exp()
}

/// Whether the continuous loop through the grid points `path` (equal steps
/// over duration `t`) meets a line of the family. Grid steps that straddle a
/// line hit; otherwise each step meets either neighbouring line with the
/// bridge crossing probability.
pub fn hits_geodesic<R: Rng>(path: &[Complex64], t: f64, lines: &LineFamily, rng: &mut R) -> Result<bool> {
    if path.len() < 2 || !(t > 0.0) {
        return Err(Error::domain("path needs at least two points and a positive duration"));
    }
    let dt = t / (path.len() - 1) as f64;
    let d = lines.spacing;
    let strip = |s: f64| (s / d).floor();
    let mut s0 = lines.coordinate(path[0]);
    for &z in &path[1..] {
        let s1 = lines.coordinate(z);
        let k = strip(s0);
        if strip(s1) != k || s0 == k * d || s1 == k * d {
            return Ok(true);
        }
        let lo = crossing_probability(s0 - k * d, s1 - k * d, dt);
        let hi = crossing_probability((k + 1.0) * d - s0, (k + 1.0) * d - s1, dt);
        let p = lo + hi - lo * hi;
        if p > 0.0 && rng.gen::<f64>() < p {
            return Ok(true);
        }
        s0 = s1;
    }
    Ok(false)
}

/// What each sampled loop contributes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Weighting {
    /// Whether the loop meets the geodesic.
    HitIndicator,
    /// Constant 1: recovers the class mass exactly.
    Unit,
}

fn sample_rng(seed: u64, index: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index as u64);
    rng
}

fn sample_weight(
    spec: &LoopSampleSpec,
    lines: &LineFamily,
    shift: Complex64,
    index: usize,
    weighting: Weighting,
) -> Result<f64> {
    if weighting == Weighting::Unit {
        return Ok(1.0);
    }
    let mut rng = sample_rng(spec.seed, index);
    let root = spec.omega1 * rng.gen::<f64>() + spec.omega2 * rng.gen::<f64>();
    let t = sample_duration(shift.norm_sqr() / 4.0, &mut rng);
    let path = sample_bridge(root, root + shift, t, spec.n_steps, &mut rng);
    Ok(if hits_geodesic(&path, t, lines, &mut rng)? {
        1.0
    } else {
        0.0
    })
}

/// Per-sample weights in index order; independent of the thread count.
fn weights(spec: &LoopSampleSpec, weighting: Weighting) -> Result<Vec<f64>> {
    spec.validate()?;
    let (tau, m) = spec.primitive_class();
    let lines = LineFamily::lifts(tau, spec.area())?;
    let shift = tau * m as f64;
    let one = |i: usize| sample_weight(spec, &lines, shift, i, weighting);
    match spec.threads {
        1 => (0..spec.n_samples).map(one).collect(),
        0 => (0..spec.n_samples).into_par_iter().map(one).collect(),
        n => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| Error::domain(format!("thread pool: {e}")))?
            .install(|| (0..spec.n_samples).into_par_iter().map(one).collect()),
    }
}

fn summarize(w: &[f64], scale: f64, seed: u64) -> McEstimate {
    let n = w.len();
    let mean = pairwise_sum(w) / n as f64;
    let dev: Vec<f64> = w.iter().map(|x| (x - mean) * (x - mean)).collect();
    let var = if n > 1 {
        pairwise_sum(&dev) / (n - 1) as f64
    } else {
        0.0
    };
    McEstimate {
        mean: scale * mean,
        stderr: scale * (var / n as f64).sqrt(),
        n,
        seed,
    }
}

fn class_mass(spec: &LoopSampleSpec) -> Result<f64> {
    let (tau, m) = spec.primitive_class();
    Ok(mass_flat_class(spec.area(), tau.norm() * m.unsigned_abs() as f64)?.value)
}

pub fn estimate_hit_mass(spec: &LoopSampleSpec) -> Result<McEstimate> {
    estimate_weighted(spec, Weighting::HitIndicator)
}

pub fn estimate_weighted(spec: &LoopSampleSpec, weighting: Weighting) -> Result<McEstimate> {
    let w = weights(spec, weighting)?;
    Ok(summarize(&w, class_mass(spec)?, spec.seed))
}

/// Overall estimate plus one estimate per contiguous batch of samples.
pub fn estimate_hit_mass_batched(spec: &LoopSampleSpec, n_batches: usize) -> Result<(McEstimate, Vec<McEstimate>)> {
    if n_batches == 0 || n_batches > spec.n_samples / 2 {
        return Err(Error::domain(format!(
            "batch count must be in 1..={}, got {n_batches}",
            spec.n_samples / 2
        )));
    }
    let w = weights(spec, Weighting::HitIndicator)?;
    let scale = class_mass(spec)?;
    let size = w.len().div_ceil(n_batches);
    let batches = w.chunks(size).map(|c| summarize(c, scale, spec.seed)).collect();
    Ok((summarize(&w, scale, spec.seed), batches))
}

/// CSV: one `batch` row per batch, then the `total` row and the
/// `closed_form` row (stderr 0).
pub fn write_batches_csv(path: &Path, total: &McEstimate, batches: &[McEstimate], closed_form: f64) -> Result<()> {
    let mut f = std::io::BufWriter::new(std::fs::File::create(path)?);
    writeln!(f, "row,n,mean,stderr")?;
    for b in batches {
        writeln!(f, "batch,{},{},{}", b.n, fmt17(b.mean), fmt17(b.stderr))?;
    }
    writeln!(f, "total,{},{},{}", total.n, fmt17(total.mean), fmt17(total.stderr))?;
    writeln!(f, "closed_form,{},{},{}", total.n, fmt17(closed_form), fmt17(0.0))?;
    f.flush()?;
    Ok(())
}
