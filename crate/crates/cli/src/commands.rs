use std::collections::{BTreeMap, BTreeSet};
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use num_complex::Complex64;
use serde_json::json;

use hyploop::acceptance::run_suite;
use hyploop::detlap::{
    blm_terms, dense_spectrum, li_matched_spectrum, logdet_via_blm, logdet_via_time_integrals, sparse_spectrum,
    DetInputs, LogDetRecord, PrimitiveSpectrum, TailModel, UniversalConstants,
};
use hyploop::identity::{flat_puncture_report, write_partial_sums_csv, write_summary_csv};
use hyploop::loopmass::{self, AnnulusRoute, FormulaId, MassResult};
use hyploop::mcloop::{estimate_hit_mass_batched, write_batches_csv, LoopSampleSpec};
use hyploop::spectrum::{counting_function, save_spectrum, write_csv};

use crate::config::RunConfig;
use crate::CliError;

fn write_jsonl(path: &Path, lines: &[serde_json::Value]) -> Result<(), CliError> {
    let mut f = BufWriter::new(File::create(path)?);
    for l in lines {
        writeln!(f, "{l}")?;
    }
    f.flush()?;
    Ok(())
}

pub fn spectrum(cfg: &RunConfig, out: &Path) -> Result<(), CliError> {
    let src = cfg.section("spectrum", &cfg.spectrum)?;
    let table = src.table(None, cfg.threads())?;
    save_spectrum(&table, out.join("spectrum.gspc"))?;
    write_csv(&table, BufWriter::new(File::create(out.join("spectrum.csv"))?))?;
    let mut counts = Vec::new();
    for &l in src.counts_at.as_deref().unwrap_or(&[]) {
        counts.push(json!({ "length": l, "count": counting_function(&table, l)? }));
    }
    let summary = json!({
        "group": table.group_name,
        "max_word_length": table.max_word_length,
        "homology_filter": table.homology_filter,
        "horizon": table.horizon,
        "n_oriented": table.n_oriented(),
        "n_primitive": table.n_primitive(),
        "counts": counts,
    });
    write_jsonl(&out.join("spectrum_summary.jsonl"), &[summary])?;
    println!(
        "{}: {} oriented classes to word length {}, horizon {:.6}",
        table.group_name,
        table.n_oriented(),
        table.max_word_length,
        table.horizon
    );
    Ok(())
}

/// Named parameters of a formula; rejects missing and unknown keys.
struct Params<'a> {
    formula: FormulaId,
    map: &'a BTreeMap<String, f64>,
}

impl Params<'_> {
    fn expect(&self, names: &[&str]) -> Result<(), CliError> {
        let allowed: BTreeSet<&str> = names.iter().copied().collect();
        if let Some(k) = self.map.keys().find(|k| !allowed.contains(k.as_str())) {
            return Err(CliError::Config(format!(
                "[mass.params]: unknown key `{k}` for {}; expected {names:?}",
                self.formula
            )));
        }
        if let Some(k) = names.iter().find(|k| !self.map.contains_key(**k)) {
            return Err(CliError::Config(format!("[mass.params]: {} needs `{k}`", self.formula)));
        }
        Ok(())
    }

    fn real(&self, k: &str) -> f64 {
        self.map[k]
    }

    fn int(&self, k: &str) -> Result<i64, CliError> {
        let v = self.map[k];
        if v.fract() != 0.0 || v.abs() > 2f64.powi(53) {
            return Err(CliError::Config(format!(
                "[mass.params]: `{k}` must be an integer, got {v}"
            )));
        }
        Ok(v as i64)
    }
}

fn evaluate_mass(cfg: &RunConfig, formula: FormulaId, map: &BTreeMap<String, f64>) -> Result<MassResult, CliError> {
    let p = Params { formula, map };
    let q = cfg.quadrature()?;
    use FormulaId as F;
    let r = match formula {
        F::HypClass => {
            p.expect(&["length", "iteration"])?;
            let it = u32::try_from(p.int("iteration")?)
                .map_err(|_| CliError::Config("`iteration` must be a positive integer".into()))?;
            if it == 0 {
                return Err(CliError::Config("`iteration` must be a positive integer".into()));
            }
            loopmass::mass_hyperbolic_class(p.real("length"), it)?
        }
        F::FlatClass => {
            p.expect(&["area", "tau_norm"])?;
            loopmass::mass_flat_class(p.real("area"), p.real("tau_norm"))?
        }
        F::AnnulusWinding => {
            p.expect(&["r", "m"])?;
            loopmass::mass_annulus_winding(p.real("r"), p.int("m")?)?
        }
        F::AnnulusTotalSeries | F::AnnulusTotalIntegral => {
            p.expect(&["r"])?;
            let route = if formula == F::AnnulusTotalSeries {
                AnnulusRoute::Series
            } else {
                AnnulusRoute::Integral
            };
            loopmass::mass_annulus_total(p.real("r"), route, &q)?
        }
        F::TorusHit => {
            p.expect(&["area", "length", "m"])?;
            loopmass::mass_torus_hit(p.real("area"), p.real("length"), p.int("m")?)?
        }
        F::DiscWindingK => {
            p.expect(&["log_psi_prime", "m"])?;
            loopmass::mass_disc_winding_intersecting_k(p.real("log_psi_prime"), p.int("m")?)?
        }
        F::ElectricThicknessWinding => {
            p.expect(&["theta", "m"])?;
            loopmass::mass_sphere_winding_intersecting_k(p.real("theta"), p.int("m")?)?
        }
        F::EssentialTotal => {
            p.expect(&["delta"])?;
            let src = cfg.section("spectrum", &cfg.spectrum)?;
            loopmass::essential_total_mass(&src.table(None, cfg.threads())?, p.real("delta"))?
        }
    };
    Ok(r)
}

pub fn mass(cfg: &RunConfig, out: &Path) -> Result<(), CliError> {
    let m = cfg.section("mass", &cfg.mass)?;
    let formula = FormulaId::parse(&m.formula).map_err(|e| CliError::Config(format!("[mass] formula: {e}")))?;
    let r = evaluate_mass(cfg, formula, &m.params)?;
    let inputs: serde_json::Map<String, serde_json::Value> =
        r.inputs.iter().map(|(k, v)| (k.clone(), json!(v))).collect();
    let record = json!({
        "formula_id": r.formula_id.name(),
        "value": r.value,
        "error_bound": r.error_bound,
        "inputs": inputs,
    });
    write_jsonl(&out.join("mass.jsonl"), std::slice::from_ref(&record))?;
    println!("{record}");
    Ok(())
}

pub fn identity(cfg: &RunConfig, out: &Path) -> Result<(), CliError> {
    let id = cfg.section("identity", &cfg.identity)?;
    let src = cfg.section("spectrum", &cfg.spectrum)?;
    let class = (id.class[0], id.class[1]);
    let table = src.table(Some(class), cfg.threads())?;
    let report = flat_puncture_report(id.area, id.tau_norm, &table, id.allow_unverified)?;
    write_partial_sums_csv(
        &report,
        BufWriter::new(File::create(out.join("identity_partial_sums.csv"))?),
    )?;
    write_summary_csv(&report, BufWriter::new(File::create(out.join("identity_summary.csv"))?))?;
    let summary = json!({
        "class": report.class,
        "lhs": report.lhs,
        "final_partial_sum": report.final_partial_sum(),
        "n_terms": report.n_terms,
        "horizon": table.horizon,
        "extrapolated_limit": report.extrapolated_limit,
        "extrapolation_model": report.extrapolation_model,
        "fit_error": report.fit_error,
        "relative_gap": report.relative_gap,
        "lower_bound_holds": report.lower_bound_holds(),
        "strictly_increasing": report.strictly_increasing(),
        "verified_marking": report.verified_marking,
    });
    write_jsonl(&out.join("identity.jsonl"), std::slice::from_ref(&summary))?;
    println!(
        "class {:?}: {} terms, partial sum {:.12} of {:.12}, extrapolated {:.12} ({:+.3}%)",
        report.class,
        report.n_terms,
        report.final_partial_sum(),
        report.lhs,
        report.extrapolated_limit,
        100.0 * report.relative_gap
    );
    Ok(())
}

pub fn detlap(cfg: &RunConfig, out: &Path) -> Result<(), CliError> {
    let d = cfg.section("detlap", &cfg.detlap)?;
    let q = cfg.quadrature()?;
    let horizon = |default: f64| d.horizon.unwrap_or(default);
    let spectrum = match d.synthetic.as_deref() {
        Some("sparse") => sparse_spectrum()?,
        Some("li-matched") => li_matched_spectrum(horizon(6.0), 1.0)?,
        Some("dense") => dense_spectrum(horizon(8.0))?,
        Some(other) => {
            return Err(CliError::Config(format!(
                "[detlap] synthetic must be sparse, li-matched or dense, got {other:?}"
            )))
        }
        None => {
            let src = cfg.section("spectrum", &cfg.spectrum)?;
            let full = PrimitiveSpectrum::from_table(&src.table(None, cfg.threads())?)?;
            match d.horizon {
                Some(h) if h > full.horizon => {
                    return Err(hyploop::Error::Horizon {
                        requested: h,
                        horizon: full.horizon,
                    }
                    .into())
                }
                Some(h) => full.truncate(h)?,
                None => full,
            }
        }
    };
    let defaults = TailModel::default();
    let tail = TailModel {
        kappa: d.tail_kappa.unwrap_or(defaults.kappa),
        scale: d.tail_scale.unwrap_or(defaults.scale),
    };
    let inputs = DetInputs::new(d.area, spectrum, tail)?;
    for w in &inputs.warnings {
        eprintln!("warning: {w}");
    }
    let a = logdet_via_time_integrals(&inputs, &q)?;
    let b = logdet_via_blm(&inputs, &q)?;
    let terms = blm_terms(&inputs, &q)?;
    let constants = UniversalConstants::compute(&q)?;
    let diff = (a.value - b.value).abs();
    let budget = a.budget.quantified() + b.budget.quantified();
    let mut lines: Vec<serde_json::Value> = [&a, &b]
        .into_iter()
        .map(|r| serde_json::to_value(LogDetRecord::from(r)).expect("serializable record"))
        .collect();
    lines.push(json!({
        "abs_diff": diff,
        "quantified_budget": budget,
        "agree": diff <= budget,
        "horizon": inputs.spectrum.horizon,
        "n_lengths": inputs.spectrum.lengths.len(),
        "warnings": inputs.warnings,
    }));
    write_jsonl(&out.join("detlap.jsonl"), &lines)?;
    write_jsonl(
        &out.join("detlap_terms.jsonl"),
        &[
            serde_json::to_value(terms).expect("serializable terms"),
            serde_json::to_value(constants).expect("serializable constants"),
        ],
    )?;
    println!(
        "-log det: time integrals {:.15}, loop masses {:.15}, |diff| {diff:.2e} (budget {budget:.2e}, tail-model risk {:.2e})",
        a.value, b.value, a.budget.tail_model_risk
    );
    if diff > budget {
        return Err(hyploop::Error::Numeric {
            what: "determinant routes disagree beyond their budgets".into(),
            partial: diff,
            bound: budget,
        }
        .into());
    }
    Ok(())
}

pub fn mc(cfg: &RunConfig, out: &Path) -> Result<(), CliError> {
    let m = cfg.section("mc", &cfg.mc)?;
    let spec = LoopSampleSpec {
        omega1: Complex64::new(m.omega1[0], m.omega1[1]),
        omega2: Complex64::new(m.omega2[0], m.omega2[1]),
        p: m.p,
        q: m.q,
        m: m.m,
        n_steps: m.n_steps,
        n_samples: m.n_samples,
        seed: cfg.seed()?,
        threads: cfg.threads(),
    };
    let (total, batches) = estimate_hit_mass_batched(&spec, m.batches)?;
    let exact = spec.closed_form()?;
    write_batches_csv(&out.join("mc_batches.csv"), &total, &batches, exact)?;
    let z = (total.mean - exact) / total.stderr;
    let line = json!({
        "mean": total.mean,
        "stderr": total.stderr,
        "n": total.n,
        "seed": total.seed,
        "closed_form": exact,
        "z": z,
    });
    write_jsonl(&out.join("mc_summary.jsonl"), std::slice::from_ref(&line))?;
    println!(
        "hit mass {:.8} +- {:.8} (n = {}) vs closed form {exact:.8}: z = {z:+.2}",
        total.mean, total.stderr, total.n
    );
    Ok(())
}

pub fn selftest(cfg: &RunConfig, out: &Path) -> Result<(), CliError> {
    let (acc, ids) = cfg.acceptance()?;
    if let Some(bad) = ids.iter().find(|&&i| !(1..=9).contains(&i)) {
        return Err(CliError::Config(format!("[selftest] unknown criterion {bad}")));
    }
    let outcomes = run_suite(&ids, &acc, Some(out))?;
    for o in &outcomes {
        println!("{}", o.line());
    }
    let failed: Vec<u8> = outcomes.iter().filter(|o| !o.passed).map(|o| o.id).collect();
    if failed.is_empty() {
        println!("selftest: {} criteria passed", outcomes.len());
        Ok(())
    } else {
        Err(CliError::Acceptance(format!("criteria {failed:?} failed")))
    }
}
