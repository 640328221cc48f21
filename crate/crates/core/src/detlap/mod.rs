//! Zeta-regularized log-determinant of the Laplacian of a closed hyperbolic
//! surface from its primitive length spectrum, by two independent routes:
//!
//! * **time integrals**: `-A E - gamma + int_0^1 S(t)/t dt + int_1^inf (S(t) - 1)/t dt`
//!   with `S` the geometric side of the heat trace;
//! * **loop masses**: `-A E + C + sum over non-primitive masses +
//!   int 1/(e^L - 1) d(N(L) - li~(e^L))`.
//!
//! Both routes see the same model spectrum: the tabulated primitive lengths
//! up to a horizon `H`, and beyond `H` a continuum with counting function
//! increments equal to those of `li~(e^L)` (density `e^L / L`). The routes
//! agree exactly for that model, so their difference measures implementation
//! error; the model's departure from the true spectrum is reported as a
//! separate, unquantified tail-model risk.

mod constants;
mod routes;
mod synthetic;
mod trace;

use std::f64::consts::{LN_2, PI};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spectrum::SpectrumTable;

pub use constants::{
    c1_correction, constant_c, constant_c1, constant_c2, constant_e, log_glaisher, zeta_prime_minus_one,
    UniversalConstants,
};
pub use routes::{
    blm_terms, logdet_via_blm, logdet_via_time_integrals, nonprimitive_mass_sum, BlmTerms, ErrorBudget, LogDet,
    LogDetRecord, Route,
};
pub use synthetic::{dense_spectrum, li_matched_bin_bound, li_matched_spectrum, sparse_spectrum};
pub use trace::{continuum_trace, heat_trace_term, s_x, s_x_nonprimitive, s_x_primitive, HeatTrace};

/// Oriented primitive lengths, complete up to `horizon`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PrimitiveSpectrum {
    pub lengths: Vec<f64>,
    pub horizon: f64,
}

impl PrimitiveSpectrum {
    pub fn new(mut lengths: Vec<f64>, horizon: f64) -> Result<Self> {
        if !(horizon >= LN_2 && horizon.is_finite()) {
            return Err(Error::domain(format!(
                "horizon must be finite and at least ln 2, got {horizon}"
            )));
        }
        if let Some(bad) = lengths.iter().find(|l| !(**l > 0.0 && **l <= horizon)) {
            return Err(Error::domain(format!(
                "primitive length {bad} outside (0, horizon = {horizon}]"
            )));
        }
        lengths.sort_by(f64::total_cmp);
        Ok(Self { lengths, horizon })
    }

    /// Reliable primitive records of a table.
    pub fn from_table(table: &SpectrumTable) -> Result<Self> {
        if table.homology_filter.is_some() {
            return Err(Error::domain("determinant inputs need an unfiltered spectrum"));
        }
        Self::new(table.primitive_lengths(), table.horizon)
    }

    /// Every length repeated `k` times.
    pub fn with_multiplicity(&self, k: usize) -> Self {
        let lengths = self.lengths.iter().flat_map(|&l| std::iter::repeat_n(l, k)).collect();
        Self {
            lengths,
            horizon: self.horizon,
        }
    }

    /// The spectrum cut at a smaller horizon.
    pub fn truncate(&self, horizon: f64) -> Result<Self> {
        Self::new(
            self.lengths.iter().copied().filter(|&l| l <= horizon).collect(),
            horizon,
        )
    }
}

/// Parameters of the tail-model risk estimate `K e^{-(1-kappa) H} / ((1-kappa) H)`,
/// the mass of a counting-function error of order `e^{kappa L} / L` beyond `H`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TailModel {
    pub kappa: f64,
    pub scale: f64,
}

impl Default for TailModel {
    fn default() -> Self {
        Self {
            kappa: 0.75,
            scale: 1.0,
        }
    }
}

impl TailModel {
    pub fn risk(&self, horizon: f64) -> f64 {
        let k = 1.0 - self.kappa;
        self.scale * (-k * horizon).exp() / (k * horizon)
    }

    pub fn describe(&self) -> String {
        format!(
            "N(L) = li~(e^L) beyond horizon; risk {} e^(-{} H)/({} H), unquantified",
            self.scale,
            1.0 - self.kappa,
            1.0 - self.kappa
        )
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DetInputs {
    pub area: f64,
    pub spectrum: PrimitiveSpectrum,
    pub tail_model: TailModel,
    /// Gauss–Bonnet and other non-fatal diagnostics.
    pub warnings: Vec<String>,
}

impl DetInputs {
    pub fn new(area: f64, spectrum: PrimitiveSpectrum, tail_model: TailModel) -> Result<Self> {
        if !(area > 0.0 && area.is_finite()) {
            return Err(Error::domain(format!("area must be positive, got {area}")));
        }
        if !(tail_model.kappa < 1.0 && tail_model.scale >= 0.0) {
            return Err(Error::domain("tail model needs kappa < 1 and scale >= 0"));
        }
        let mut warnings = Vec::new();
        let genus = area / (4.0 * PI) + 1.0;
        if (area - 4.0 * PI * (genus.round() - 1.0)).abs() > 1e-9 || genus.round() < 2.0 {
            warnings.push(format!(
                "area {area} is not 4 pi (g - 1) for an integer genus g >= 2; treating the spectrum as synthetic"
            ));
        }
        Ok(Self {
            area,
            spectrum,
            tail_model,
            warnings,
        })
    }

    pub fn from_table(area: f64, table: &SpectrumTable, tail_model: TailModel) -> Result<Self> {
        Self::new(area, PrimitiveSpectrum::from_table(table)?, tail_model)
    }
}
