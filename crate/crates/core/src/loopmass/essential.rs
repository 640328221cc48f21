use super::{FormulaId, MassResult};
use crate::error::{Error, Result};
use crate::hypgeom::CompensatedSum;
use crate::spectrum::SpectrumTable;

const MAX_ITERATES: u64 = 100_000_000;

/// `sum_{m>=1} (1/m) / (e^{m l} - 1)` and a bound on the truncated tail.
pub fn iterate_series(l: f64) -> Result<(f64, f64)> {
    iterate_series_from(l, 1)
}

/// `sum_{m>=first} (1/m) / (e^{m l} - 1)` and a bound on the truncated tail.
pub fn iterate_series_from(l: f64, first: u64) -> Result<(f64, f64)> {
    if !(l > 0.0 && l.is_finite()) {
        return Err(Error::domain(format!("primitive length must be positive, got {l}")));
    }
    let gap = -(-l).exp_m1(); // 1 - e^{-l}
    let mut sum = CompensatedSum::new();
    let mut m = first.max(1);
    loop {
        let mf = m as f64;
        sum.add(1.0 / (mf * (mf * l).exp_m1()));
        // sum_{k>m} (1/k)/(e^{kl} - 1) <= e^{-(m+1) l} / ((m+1) (1 - e^{-l})^2)
        let tail = (-(mf + 1.0) * l).exp() / ((mf + 1.0) * gap * gap);
        if tail <= 1e-17 * sum.value() || tail < f64::MIN_POSITIVE {
            return Ok((sum.value(), tail));
        }
        m += 1;
        if m > MAX_ITERATES {
            return Err(Error::Numeric {
                what: format!("iterate series at length {l}"),
                partial: sum.value(),
                bound: tail,
            });
        }
    }
}

/// Mass of all loops in essential classes: every primitive record below the
/// horizon contributes all its iterates. Beyond the horizon the tail is
/// bounded by `e^{-(1-delta) H} / ((1-delta) H)` for a limit set of
/// exponent `delta`.
pub fn essential_total_mass(table: &SpectrumTable, delta: f64) -> Result<MassResult> {
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::domain(format!(
            "tail exponent delta must lie in (0, 1); delta = {delta} makes the tail model divergent"
        )));
    }
    let mut sum = CompensatedSum::new();
    let mut series_tail = 0.0;
    for r in table.reliable_records().filter(|r| r.is_primitive) {
        let (v, t) = iterate_series(r.length)?;
        sum.add(v);
        series_tail += t;
    }
    let h = table.horizon;
    let spectral_tail = if h.is_finite() {
        let k = 1.0 - delta;
        (-k * h).exp() / (k * h)
    } else {
        0.0
    };
    let value = sum.value();
    Ok(MassResult::bounded(
        FormulaId::EssentialTotal,
        value,
        spectral_tail + series_tail + 4.0 * f64::EPSILON * value,
        &[("delta", delta), ("horizon", h)],
    ))
}
