//! Baseline optimization of the resolution and curve sweeps.

use std::f64::consts::PI;

use rayon::prelude::*;

use crate::catalog::{closed_form, CatalogId, ClosedFormParams};
use crate::error::{Error, Result};
use crate::fisher::resolution;
use crate::protocol::{loss_probability, ExperimentConfig, TableSet};

/// Coarse scan step in α.
pub const SCAN_STEP: f64 = 0.01;

/// Width of the golden-section bracket at termination.
pub const ALPHA_TOL: f64 = 1e-4;

/// Largest baseline the optimizer accepts, in attenuation lengths.
pub const MAX_ALPHA: f64 = 60.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Engine {
    BruteForceFisher,
    ClosedFormFisher,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Minimum {
    pub alpha: f64,
    pub delta_theta_microarcsec: f64,
    pub fisher: f64,
    /// Set on the smallest of the returned minima.
    pub global: bool,
}

/// Fisher information as a function of baseline at fixed phase.
pub trait FisherModel: Sync {
    fn fisher(&self, alpha: f64) -> f64;
}

struct BruteForce {
    tables: TableSet,
    phi: f64,
}

impl FisherModel for BruteForce {
    fn fisher(&self, alpha: f64) -> f64 {
        self.tables.fisher(alpha, self.phi).total
    }
}

struct ClosedForm {
    id: CatalogId,
    config: ExperimentConfig,
}

impl FisherModel for ClosedForm {
    fn fisher(&self, alpha: f64) -> f64 {
        let params = ClosedFormParams {
            phi: self.config.phi,
            p: loss_probability(alpha),
            epsilon: self.config.epsilon,
            indist: self.config.indist.clone(),
        };
        closed_form(self.id, &params).unwrap_or(f64::NAN)
    }
}

/// Closed-form entry used for a configuration of the given size.
pub fn catalog_for(config: &ExperimentConfig) -> CatalogId {
    match config.n {
        2 => CatalogId::F2,
        3 => CatalogId::F3Distinct,
        _ => CatalogId::F4Identical,
    }
}

pub fn fisher_model(config: &ExperimentConfig, engine: Engine) -> Result<Box<dyn FisherModel>> {
    config.validate()?;
    match engine {
        Engine::BruteForceFisher => Ok(Box::new(BruteForce {
            tables: TableSet::build(config)?,
            phi: config.phi,
        })),
        Engine::ClosedFormFisher => {
            if config.n > 4 {
                return Err(Error::DomainError(format!("no closed form for N = {}", config.n)));
            }
            let id = catalog_for(config);
            // Surface domain errors up front rather than as NaN later.
            closed_form(
                id,
                &ClosedFormParams {
                    phi: config.phi,
                    p: 0.5,
                    epsilon: config.epsilon,
                    indist: config.indist.clone(),
                },
            )?;
            Ok(Box::new(ClosedForm {
                id,
                config: config.clone(),
            }))
        }
    }
}

fn delta_theta(config: &ExperimentConfig, model: &dyn FisherModel, alpha: f64) -> f64 {
    resolution(&config.with_alpha(alpha), model.fisher(alpha))
        .map(|r| r.delta_theta_microarcsec)
        .unwrap_or(f64::INFINITY)
}

fn golden_section<F: Fn(f64) -> f64>(f: F, mut lo: f64, mut hi: f64) -> f64 {
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut x1 = hi - inv_phi * (hi - lo);
    let mut x2 = lo + inv_phi * (hi - lo);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    while hi - lo > ALPHA_TOL {
        if f1 <= f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - inv_phi * (hi - lo);
            f1 = f(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + inv_phi * (hi - lo);
            f2 = f(x2);
        }
    }
    0.5 * (lo + hi)
}

fn scan_grid(lo: f64, hi: f64) -> Vec<f64> {
    let steps = ((hi - lo) / SCAN_STEP).round() as usize;
    (0..=steps).map(|i| (lo + i as f64 * SCAN_STEP).min(hi)).collect()
}

/// All local minima of `δθ(α)` on `[lo, hi]`, ascending in α.
pub fn optimize_with(config: &ExperimentConfig, model: &dyn FisherModel, range: (f64, f64)) -> Result<Vec<Minimum>> {
    let (lo, hi) = range;
    if !(lo > 0.0 && hi <= MAX_ALPHA && hi > lo) {
        return Err(Error::ConfigInvalid(format!(
            "alpha range must satisfy 0 < lo < hi <= {MAX_ALPHA}, got [{lo}, {hi}]"
        )));
    }
    let xs = scan_grid(lo, hi);
    let ys: Vec<f64> = xs.par_iter().map(|&a| delta_theta(config, model, a)).collect();
    let brackets: Vec<(f64, f64)> = (1..xs.len().saturating_sub(1))
        .filter(|&i| ys[i].is_finite() && ys[i] < ys[i - 1] && ys[i] <= ys[i + 1])
        .map(|i| (xs[i - 1], xs[i + 1]))
        .collect();
    if brackets.is_empty() {
        return Err(Error::NoMinimum { lo, hi });
    }
    let mut minima: Vec<Minimum> = brackets
        .par_iter()
        .map(|&(a, b)| {
            let alpha = golden_section(|x| delta_theta(config, model, x), a, b);
            Minimum {
                alpha,
                delta_theta_microarcsec: delta_theta(config, model, alpha),
                fisher: model.fisher(alpha),
                global: false,
            }
        })
        .collect();
    let best = minima
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.delta_theta_microarcsec.total_cmp(&b.1.delta_theta_microarcsec))
        .map(|(i, _)| i)
        .unwrap();
    minima[best].global = true;
    Ok(minima)
}

pub fn optimize_alpha(config: &ExperimentConfig, range: (f64, f64), engine: Engine) -> Result<Vec<Minimum>> {
    let model = fisher_model(config, engine)?;
    optimize_with(config, model.as_ref(), range)
}

/// The flagged global minimum of a non-empty result.
pub fn global_minimum(minima: &[Minimum]) -> Option<&Minimum> {
    minima.iter().find(|m| m.global)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sweep {
    /// Fisher information against φ at the configured baseline.
    FisherVsPhi,
    /// Resolution in μas against α at the configured phase.
    ResolutionVsAlpha,
}

impl Sweep {
    pub fn default_range(self) -> (f64, f64) {
        match self {
            Sweep::FisherVsPhi => (-PI, PI),
            Sweep::ResolutionVsAlpha => (0.5, 12.0),
        }
    }
}

/// Evenly spaced samples of a sweep over `range`, endpoints included.
/// Points where the resolution is undefined carry `+∞`.
pub fn curve_export(config: &ExperimentConfig, sweep: Sweep, range: (f64, f64), samples: usize) -> Result<Vec<(f64, f64)>> {
    if samples < 2 {
        return Err(Error::ConfigInvalid(format!("need at least 2 samples, got {samples}")));
    }
    let (lo, hi) = range;
    if !(lo.is_finite() && hi.is_finite() && hi > lo) {
        return Err(Error::ConfigInvalid(format!("invalid sweep range [{lo}, {hi}]")));
    }
    if sweep == Sweep::ResolutionVsAlpha && lo < 0.0 {
        return Err(Error::ConfigInvalid(format!("alpha range must be non-negative, got [{lo}, {hi}]")));
    }
    config.validate()?;
    let tables = TableSet::build(config)?;
    let xs: Vec<f64> = (0..samples)
        .map(|i| if i + 1 == samples { hi } else { lo + (hi - lo) * i as f64 / (samples - 1) as f64 })
        .collect();
    Ok(xs
        .par_iter()
        .map(|&x| {
            let y = match sweep {
                Sweep::FisherVsPhi => tables.fisher(config.alpha, x).total,
                Sweep::ResolutionVsAlpha => {
                    let f = tables.fisher(x, config.phi).total;
                    resolution(&config.with_alpha(x), f)
                        .map(|r| r.delta_theta_microarcsec)
                        .unwrap_or(f64::INFINITY)
                }
            };
            (x, y)
        })
        .collect())
}
