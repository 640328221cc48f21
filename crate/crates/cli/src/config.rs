//! Run configuration: one TOML file with a section per command.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::Deserialize;

use hyploop::acceptance::AcceptanceConfig;
use hyploop::hypgeom::{MoebiusMatrix, QuadratureSpec};
use hyploop::spectrum::{enumerate_spectrum, load_spectrum, EnumerationOptions, GroupPresentation, SpectrumTable};

use crate::CliError;

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub seed: Option<u64>,
    pub threads: Option<usize>,
    pub out_dir: Option<PathBuf>,
    pub quadrature: Option<QuadratureConfig>,
    pub spectrum: Option<SpectrumSource>,
    pub mass: Option<MassConfig>,
    pub identity: Option<IdentityConfig>,
    pub detlap: Option<DetlapConfig>,
    pub mc: Option<McConfig>,
    pub selftest: Option<SelftestConfig>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QuadratureConfig {
    pub abs_tol: Option<f64>,
    pub rel_tol: Option<f64>,
    pub max_subdivisions: Option<usize>,
    pub cutoff: Option<f64>,
}

/// A group and word length to enumerate, or a cache file to load.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpectrumSource {
    /// Preset name.
    pub group: Option<String>,
    /// Generator matrices `[a, b, c, d]` of a free group, instead of a preset.
    pub generators: Option<Vec<[f64; 4]>>,
    pub max_word_length: Option<u32>,
    pub homology_filter: Option<[i32; 2]>,
    pub cache: Option<PathBuf>,
    /// Lengths at which to report the counting function.
    pub counts_at: Option<Vec<f64>>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MassConfig {
    pub formula: String,
    #[serde(default)]
    pub params: BTreeMap<String, f64>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IdentityConfig {
    pub area: f64,
    pub tau_norm: f64,
    pub class: [i32; 2],
    #[serde(default)]
    pub allow_unverified: bool,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DetlapConfig {
    pub area: f64,
    /// `sparse`, `li-matched` or `dense`; otherwise the `[spectrum]` source.
    pub synthetic: Option<String>,
    pub horizon: Option<f64>,
    pub tail_kappa: Option<f64>,
    pub tail_scale: Option<f64>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct McConfig {
    pub omega1: [f64; 2],
    pub omega2: [f64; 2],
    pub p: i64,
    pub q: i64,
    pub m: i64,
    pub n_steps: usize,
    pub n_samples: usize,
    #[serde(default = "default_batches")]
    pub batches: usize,
}

fn default_batches() -> usize {
    10
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SelftestConfig {
    /// `full` (default) or `quick`.
    pub scale: Option<String>,
    pub criteria: Option<Vec<u8>>,
    pub flagship_depth: Option<u32>,
    pub toy_depth: Option<u32>,
    pub mc_samples: Option<usize>,
    pub mc_steps: Option<usize>,
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        toml::from_str(&text).map_err(|e| CliError::Config(format!("{}: {}", path.display(), e.message())))
    }

    pub fn threads(&self) -> usize {
        self.threads.unwrap_or(1)
    }

    pub fn out_dir(&self) -> PathBuf {
        self.out_dir.clone().unwrap_or_else(|| PathBuf::from("out"))
    }

    pub fn seed(&self) -> Result<u64, CliError> {
        self.seed
            .ok_or_else(|| CliError::Config("`seed` is required; runs are never seeded from the clock".into()))
    }

    pub fn quadrature(&self) -> Result<QuadratureSpec, CliError> {
        let d = QuadratureSpec::default();
        let Some(c) = &self.quadrature else { return Ok(d) };
        QuadratureSpec::new(
            c.abs_tol.unwrap_or(d.abs_tol),
            c.rel_tol.unwrap_or(d.rel_tol),
            c.max_subdivisions.unwrap_or(d.max_subdivisions),
            c.cutoff.unwrap_or(d.cutoff),
        )
        .map_err(|e| CliError::Config(format!("[quadrature]: {e}")))
    }

    pub fn section<'a, T>(&self, name: &str, s: &'a Option<T>) -> Result<&'a T, CliError> {
        s.as_ref()
            .ok_or_else(|| CliError::Config(format!("missing [{name}] section")))
    }

    pub fn acceptance(&self) -> Result<(AcceptanceConfig, Vec<u8>), CliError> {
        let s = self.selftest.clone().unwrap_or_default();
        let seed = self.seed()?;
        let mut cfg = match s.scale.as_deref().unwrap_or("full") {
            "full" => AcceptanceConfig::full(seed),
            "quick" => AcceptanceConfig::quick(seed),
            other => {
                return Err(CliError::Config(format!(
                    "[selftest] scale must be full or quick, got {other:?}"
                )))
            }
        };
        cfg.threads = self.threads();
        cfg.flagship_depth = s.flagship_depth.unwrap_or(cfg.flagship_depth);
        cfg.toy_depth = s.toy_depth.unwrap_or(cfg.toy_depth);
        cfg.mc_samples = s.mc_samples.unwrap_or(cfg.mc_samples);
        cfg.mc_steps = s.mc_steps.unwrap_or(cfg.mc_steps);
        let ids = s.criteria.unwrap_or_else(|| (1..=9).collect());
        Ok((cfg, ids))
    }
}

impl SpectrumSource {
    pub fn group(&self) -> Result<GroupPresentation, CliError> {
        match (&self.group, &self.generators) {
            (Some(name), None) => Ok(GroupPresentation::preset(name)?),
            (None, Some(gens)) => {
                let mats = gens
                    .iter()
                    .map(|g| MoebiusMatrix::new(g[0], g[1], g[2], g[3]))
                    .collect::<hyploop::Result<Vec<_>>>()?;
                Ok(GroupPresentation::new("custom", mats, true)?)
            }
            _ => Err(CliError::Config(
                "[spectrum] needs exactly one of `group` or `generators`".into(),
            )),
        }
    }

    /// Loads the cache if given, otherwise enumerates.
    pub fn table(&self, filter: Option<(i32, i32)>, threads: usize) -> Result<SpectrumTable, CliError> {
        if let Some(path) = &self.cache {
            let table = load_spectrum(path)?;
            if filter.is_some() && table.homology_filter != filter {
                return Err(CliError::Config(format!(
                    "cache {} has homology filter {:?}, need {:?}",
                    path.display(),
                    table.homology_filter,
                    filter
                )));
            }
            return Ok(table);
        }
        let depth = self
            .max_word_length
            .ok_or_else(|| CliError::Config("[spectrum] needs `max_word_length` or `cache`".into()))?;
        let filter = filter.or(self.homology_filter.map(|h| (h[0], h[1])));
        Ok(enumerate_spectrum(
            &self.group()?,
            depth,
            filter,
            EnumerationOptions { threads },
        )?)
    }
}
