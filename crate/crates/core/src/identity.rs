//! Puncture identities: the loop mass of a class on a surface equals the sum
//! of the masses of all classes on the punctured surface that it contains.
//!
//! The flagship instance compares the hexagonal flat torus with the modular
//! torus (the hexagonal torus punctured at one point, with its complete
//! hyperbolic metric). Partial sums of the right-hand side are lower bounds
//! for the left-hand side; their limit is estimated by a `S - c/L` fit.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hypgeom::CompensatedSum;
use crate::loopmass::{mass_flat_class, mass_hyperbolic_class};
use crate::numfmt::fmt17;
use crate::spectrum::SpectrumTable;

/// Slack allowed when checking partial sums against the left-hand side.
pub const LOWER_BOUND_TOL: f64 = 1e-12;

/// Homology classes of the modular torus whose marking to the hexagonal
/// lattice is forced by symmetry: the six shortest classes map to the six
/// unit lattice vectors.
pub const PINNED_CLASSES: [(i32, i32); 6] = [(1, 0), (-1, 0), (0, 1), (0, -1), (1, 1), (-1, -1)];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum ExtrapolationModel {
    COverL,
    None,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IdentityReport {
    pub class: (i32, i32),
    pub lhs: f64,
    /// `(L, S(L))` after each term, in increasing length.
    pub partial_sums: Vec<(f64, f64)>,
    pub n_terms: usize,
    pub extrapolated_limit: f64,
    pub extrapolation_model: ExtrapolationModel,
    pub fit_error: f64,
    /// `(extrapolated_limit - lhs) / lhs`.
    pub relative_gap: f64,
    /// False when the class is not symmetry-pinned (only produced on request).
    pub verified_marking: bool,
}

impl IdentityReport {
    pub fn final_partial_sum(&self) -> f64 {
        self.partial_sums.last().map_or(0.0, |p| p.1)
    }

    /// Every partial sum stays below the left-hand side.
    pub fn lower_bound_holds(&self) -> bool {
        self.partial_sums.iter().all(|p| p.1 <= self.lhs + LOWER_BOUND_TOL)
    }

    pub fn strictly_increasing(&self) -> bool {
        self.partial_sums.windows(2).all(|w| w[1].1 > w[0].1)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TailFit {
    pub limit: f64,
    pub c: f64,
    /// Residual 2-norm of the fit.
    pub residual: f64,
}

/// Least-squares fit of `S(L) = S_inf - c/L` to the top half of the points.
pub fn tail_extrapolate(partial_sums: &[(f64, f64)]) -> Result<TailFit> {
    if partial_sums.len() < 4 {
        return Err(Error::Fit(format!(
            "{} partial sums; at least 4 are needed",
            partial_sums.len()
        )));
    }
    let (lo, hi) = partial_sums
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), p| {
            (lo.min(p.0), hi.max(p.0))
        });
    if !(lo > 0.0) || hi < 1.5 * lo {
        return Err(Error::Fit(format!(
            "cutoffs span [{lo}, {hi}]; need a factor of at least 1.5"
        )));
    }
    let top = &partial_sums[partial_sums.len() / 2..];
    let n = top.len() as f64;
    let mx = top.iter().map(|p| 1.0 / p.0).sum::<f64>() / n;
    let my = top.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = top.iter().map(|p| (1.0 / p.0 - mx).powi(2)).sum();
    let sxy: f64 = top.iter().map(|p| (1.0 / p.0 - mx) * (p.1 - my)).sum();
    if !(sxx > 0.0) {
        return Err(Error::Fit("top half of the cutoffs has a single length".into()));
    }
    let slope = sxy / sxx;
    let limit = my - slope * mx;
    let residual = top
        .iter()
        .map(|p| (p.1 - (limit + slope / p.0)).powi(2))
        .sum::<f64>()
        .sqrt();
    Ok(TailFit {
        limit,
        c: -slope,
        residual,
    })
}

/// Partial sums of `sum (1/m) / (e^l - 1)` over the table's reliable records.
pub fn class_partial_sums(table: &SpectrumTable) -> Result<Vec<(f64, f64)>> {
    let mut acc = CompensatedSum::new();
    table
        .reliable_records()
        .map(|r| {
            acc.add(mass_hyperbolic_class(r.length, r.iteration)?.value);
            Ok((r.length, acc.value()))
        })
        .collect()
}

/// Flat torus of area `area` versus its once-punctured hyperbolic version,
/// for the class of lattice norm `tau_norm`. `table` must be filtered to the
/// matching homology class.
pub fn flat_puncture_report(
    area: f64,
    tau_norm: f64,
    table: &SpectrumTable,
    allow_unverified: bool,
) -> Result<IdentityReport> {
    let class = table
        .homology_filter
        .ok_or_else(|| Error::domain("identity reports need a table filtered to one homology class"))?;
    let verified = PINNED_CLASSES.contains(&class);
    if !verified && !allow_unverified {
        return Err(Error::UnverifiedMarking(class));
    }
    let lhs = mass_flat_class(area, tau_norm)?.value;
    let partial_sums = class_partial_sums(table)?;
    let (extrapolated_limit, extrapolation_model, fit_error) = match tail_extrapolate(&partial_sums) {
        Ok(fit) => (fit.limit, ExtrapolationModel::COverL, fit.residual),
        Err(_) => (
            partial_sums.last().map_or(0.0, |p| p.1),
            ExtrapolationModel::None,
            f64::NAN,
        ),
    };
    Ok(IdentityReport {
        class,
        lhs,
        n_terms: partial_sums.len(),
        partial_sums,
        extrapolated_limit,
        extrapolation_model,
        fit_error,
        relative_gap: (extrapolated_limit - lhs) / lhs,
        verified_marking: verified,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PunctureResidual {
    pub lhs: f64,
    pub partial_rhs: f64,
    pub residual: f64,
    pub warnings: Vec<String>,
}

/// Hyperbolic puncture identity for a class of length `length` and
/// iteration `iteration`, with the punctured surface's classes supplied as
/// `(length, iteration)` pairs.
pub fn hyperbolic_puncture_residual(length: f64, iteration: u32, rhs_terms: &[(f64, u32)]) -> Result<PunctureResidual> {
    let lhs = mass_hyperbolic_class(length, iteration)?.value;
    let mut warnings = Vec::new();
    let mut acc = CompensatedSum::new();
    for &(l, m) in rhs_terms {
        if m == 0 || !iteration.is_multiple_of(m) {
            warnings.push(format!(
                "term (length {l}, iteration {m}): iteration does not divide {iteration}"
            ));
        }
        acc.add(mass_hyperbolic_class(l, m.max(1))?.value);
    }
    let partial_rhs = acc.value();
    let residual = lhs - partial_rhs;
    if residual < -LOWER_BOUND_TOL {
        return Err(Error::domain(format!(
            "right-hand side {partial_rhs} exceeds left-hand side {lhs}; the supplied terms are inconsistent"
        )));
    }
    Ok(PunctureResidual {
        lhs,
        partial_rhs,
        residual,
        warnings,
    })
}

/// CSV with columns `L,partial_sum`.
pub fn write_partial_sums_csv<W: Write>(report: &IdentityReport, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let io = |e: csv::Error| Error::Io(e.to_string());
    w.write_record(["L", "partial_sum"]).map_err(io)?;
    for &(l, s) in &report.partial_sums {
        w.write_record([fmt17(l), fmt17(s)]).map_err(io)?;
    }
    w.flush()?;
    Ok(())
}

/// One-row CSV with columns `lhs,extrapolated,relative_gap`.
pub fn write_summary_csv<W: Write>(report: &IdentityReport, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let io = |e: csv::Error| Error::Io(e.to_string());
    w.write_record(["lhs", "extrapolated", "relative_gap"]).map_err(io)?;
    w.write_record([
        fmt17(report.lhs),
        fmt17(report.extrapolated_limit),
        fmt17(report.relative_gap),
    ])
    .map_err(io)?;
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectrum::{enumerate_spectrum, EnumerationOptions, GroupPresentation};
    use std::f64::consts::PI;

    const HEX_AREA: f64 = 0.866_025_403_784_438_6;

    fn table(class: (i32, i32), depth: u32) -> SpectrumTable {
        let g = GroupPresentation::preset("modular-torus").unwrap();
        enumerate_spectrum(&g, depth, Some(class), EnumerationOptions::default()).unwrap()
    }

    #[test]
    fn fit_exact_model() {
        let pts: Vec<(f64, f64)> = (1..=10).map(|k| (k as f64, 1.0 - 2.0 / k as f64)).collect();
        let f = tail_extrapolate(&pts).unwrap();
        assert!((f.limit - 1.0).abs() < 1e-12 && (f.c - 2.0).abs() < 1e-12 && f.residual < 1e-12);
    }

    #[test]
    fn fit_constant_data() {
        let pts: Vec<(f64, f64)> = (1..=6).map(|k| (k as f64, 0.3)).collect();
        let f = tail_extrapolate(&pts).unwrap();
        assert!((f.limit - 0.3).abs() < 1e-15 && f.c.abs() < 1e-15);
    }

    #[test]
    fn fit_rejects_insufficient_data() {
        assert!(matches!(
            tail_extrapolate(&[(1.0, 0.1), (2.0, 0.2), (3.0, 0.3)]),
            Err(Error::Fit(_))
        ));
        let narrow: Vec<(f64, f64)> = (0..6).map(|k| (1.0 + 0.05 * k as f64, 0.1)).collect();
        assert!(matches!(tail_extrapolate(&narrow), Err(Error::Fit(_))));
    }

    #[test]
    fn hexagonal_report_basics() {
        let t = table((1, 0), 12);
        let r = flat_puncture_report(HEX_AREA, 1.0, &t, false).unwrap();
        assert!((r.lhs - 3f64.sqrt() / (2.0 * PI)).abs() < 1e-16);
        let first = 1.0 / ((2.0 * 1.5f64.acosh()).exp() - 1.0);
        assert!((r.partial_sums[0].1 - first).abs() < 1e-15);
        assert!((r.partial_sums[0].1 - 0.1708203932).abs() < 1e-10);
        assert!(r.lower_bound_holds() && r.strictly_increasing());
    }

    #[test]
    fn inverse_class_gives_identical_report() {
        let a = flat_puncture_report(HEX_AREA, 1.0, &table((0, 1), 12), false).unwrap();
        let b = flat_puncture_report(HEX_AREA, 1.0, &table((0, -1), 12), false).unwrap();
        assert_eq!(a.partial_sums, b.partial_sums);
        assert_eq!(a.extrapolated_limit.to_bits(), b.extrapolated_limit.to_bits());
    }

    #[test]
    fn unpinned_class_needs_opt_in() {
        let t = table((2, 1), 9);
        assert_eq!(
            flat_puncture_report(HEX_AREA, 3f64.sqrt(), &t, false),
            Err(Error::UnverifiedMarking((2, 1)))
        );
        let r = flat_puncture_report(HEX_AREA, 3f64.sqrt(), &t, true).unwrap();
        assert!(!r.verified_marking);
    }

    #[test]
    fn hyperbolic_residual_cases() {
        let r = hyperbolic_puncture_residual(1.3, 1, &[]).unwrap();
        assert_eq!(r.residual, r.lhs);
        let r = hyperbolic_puncture_residual(1.3, 2, &[(1.3, 2)]).unwrap();
        assert_eq!(r.residual, 0.0);
        assert!(r.warnings.is_empty());
        // A primitive class only contains primitive classes.
        let r = hyperbolic_puncture_residual(1.0, 1, &[(5.0, 2)]).unwrap();
        assert_eq!(r.warnings.len(), 1);
        assert!(hyperbolic_puncture_residual(1.0, 1, &[(0.5, 1)]).is_err());
    }

    #[test]
    fn summation_order_does_not_matter() {
        let t = table((1, 0), 14);
        let terms: Vec<f64> = t
            .reliable_records()
            .map(|r| 1.0 / (r.iteration as f64 * r.length.exp_m1()))
            .collect();
        let fwd = terms
            .iter()
            .fold(CompensatedSum::new(), |mut s, &x| {
                s.add(x);
                s
            })
            .value();
        let rev = terms
            .iter()
            .rev()
            .fold(CompensatedSum::new(), |mut s, &x| {
                s.add(x);
                s
            })
            .value();
        assert_eq!(fwd, rev);
    }

    #[test]
    fn csv_exports() {
        let r = flat_puncture_report(HEX_AREA, 1.0, &table((1, 0), 12), false).unwrap();
        let mut buf = Vec::new();
        write_partial_sums_csv(&r, &mut buf).unwrap();
        let s = String::from_utf8(buf).unwrap();
        assert!(s.starts_with("L,partial_sum\n"));
        assert_eq!(s.lines().count(), r.n_terms + 1);
        let mut buf = Vec::new();
        write_summary_csv(&r, &mut buf).unwrap();
        assert!(String::from_utf8(buf)
            .unwrap()
            .starts_with("lhs,extrapolated,relative_gap\n"));
    }
}
