//! Kolmogorov–Smirnov statistic and the parametric-bootstrap test.
//!
//! Each replicate `b` draws from its own ChaCha8 stream: key derived from the
//! master seed, stream id `b`. Replicates therefore never share state, and
//! the result does not depend on scheduling or thread count.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::dataset::EcdfDataset;
use crate::dist::{ExpModel, ModelKind};
use crate::error::{Error, Result};
use crate::fit::{self, FitConfig, FitResult};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GofConfig {
    pub replicates: usize,
    pub seed: u64,
    pub significance: f64,
}

impl Default for GofConfig {
    fn default() -> Self {
        GofConfig {
            replicates: 10_000,
            seed: 0,
            significance: 0.05,
        }
    }
}

impl GofConfig {
    pub fn validate(&self) -> Result<()> {
        if self.replicates == 0 {
            return Err(Error::domain("replicates must be at least 1"));
        }
        if !(0.0..=1.0).contains(&self.significance) {
            return Err(Error::domain(format!(
                "significance must lie in [0, 1], got {}",
                self.significance
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GofResult {
    pub ks_empirical: f64,
    /// `exceed_count / replicates`.
    pub p_value: f64,
    pub exceed_count: usize,
    pub replicates: usize,
    pub seed: u64,
    /// `p_value <= significance`.
    pub reject: bool,
    /// Replicates whose refit hit the iteration cap (scored anyway).
    pub nonconverged: usize,
}

/// One bootstrap replicate's refitted KS statistic.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReplicateOutcome {
    pub ks: f64,
    pub converged: bool,
}

/// `max |Fₙ(xᵢ) - F(xᵢ)|` over the data points, measured against the model
/// curve ([`ExpModel::curve`]).
pub fn ks_statistic(ds: &EcdfDataset, model: &ExpModel) -> f64 {
    ds.points()
        .iter()
        .map(|p| (p.f - model.curve(p.x)).abs())
        .fold(0.0, f64::max)
}

/// Random stream for replicate `index` under `seed`.
pub fn replicate_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// Fits `ds`, then runs the bootstrap against the fitted model.
pub fn bootstrap_test(
    ds: &EcdfDataset,
    kind: ModelKind,
    fit_cfg: &FitConfig,
    gof_cfg: &GofConfig,
) -> Result<GofResult> {
    let cfg = FitConfig {
        model_kind: kind,
        ..*fit_cfg
    };
    let fitted = fit::fit(ds, &cfg)?;
    bootstrap_fitted(ds, &fitted, &cfg, gof_cfg)
}

/// Bootstrap test for a model already fitted to `ds`.
pub fn bootstrap_fitted(
    ds: &EcdfDataset,
    fitted: &FitResult,
    fit_cfg: &FitConfig,
    gof_cfg: &GofConfig,
) -> Result<GofResult> {
    gof_cfg.validate()?;
    fit_cfg.validate()?;
    if fitted.model.kind() != fit_cfg.model_kind {
        return Err(Error::domain("fitted model kind differs from the fit config"));
    }
    let ks_empirical = ks_statistic(ds, &fitted.model);
    let outcomes = replicate_statistics(
        &fitted.model,
        ds.len(),
        fit_cfg,
        gof_cfg.seed,
        gof_cfg.replicates,
    )?;
    let exceed_count = outcomes.iter().filter(|o| o.ks > ks_empirical).count();
    let nonconverged = outcomes.iter().filter(|o| !o.converged).count();
    if nonconverged > 0 {
        log::warn!(
            "{nonconverged} of {} bootstrap refits hit the iteration cap",
            outcomes.len()
        );
    }
    let p_value = exceed_count as f64 / gof_cfg.replicates as f64;
    Ok(GofResult {
        ks_empirical,
        p_value,
        exceed_count,
        replicates: gof_cfg.replicates,
        seed: gof_cfg.seed,
        reject: p_value <= gof_cfg.significance,
        nonconverged,
    })
}

/// Draws `n` points from `model` on replicate `index`'s stream, refits the
/// same model kind and returns the KS statistic against the refit.
pub fn replicate(
    model: &ExpModel,
    n: usize,
    fit_cfg: &FitConfig,
    seed: u64,
    index: u64,
) -> Result<ReplicateOutcome> {
    let mut rng = replicate_rng(seed, index);
    let draws = model.sample(n, &mut rng)?;
    let synthetic = EcdfDataset::from_samples(&draws, "replicate")?;
    let refit = fit::fit(&synthetic, fit_cfg)?;
    Ok(ReplicateOutcome {
        ks: ks_statistic(&synthetic, &refit.model),
        converged: refit.converged,
    })
}

/// Replicates `0..count`, in index order. Uses rayon when the `parallel`
/// feature is enabled.
pub fn replicate_statistics(
    model: &ExpModel,
    n: usize,
    fit_cfg: &FitConfig,
    seed: u64,
    count: usize,
) -> Result<Vec<ReplicateOutcome>> {
    #[cfg(feature = "parallel")]
    {
        replicate_statistics_parallel(model, n, fit_cfg, seed, count)
    }
    #[cfg(not(feature = "parallel"))]
    {
        replicate_statistics_sequential(model, n, fit_cfg, seed, count)
    }
}

pub fn replicate_statistics_sequential(
    model: &ExpModel,
    n: usize,
    fit_cfg: &FitConfig,
    seed: u64,
    count: usize,
) -> Result<Vec<ReplicateOutcome>> {
    (0..count as u64)
        .map(|b| replicate(model, n, fit_cfg, seed, b))
        .collect()
}

#[cfg(feature = "parallel")]
pub fn replicate_statistics_parallel(
    model: &ExpModel,
    n: usize,
    fit_cfg: &FitConfig,
    seed: u64,
    count: usize,
) -> Result<Vec<ReplicateOutcome>> {
    use rayon::prelude::*;

    (0..count as u64)
        .into_par_iter()
        .map(|b| replicate(model, n, fit_cfg, seed, b))
        .collect()
}
