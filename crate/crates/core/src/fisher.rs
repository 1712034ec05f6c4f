//! Fisher information of the phase from exact outcome tables, and the
//! angular resolution it bounds.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::protocol::{
    branch_table, loss_factor, loss_probability, Branch, BranchTable, ExperimentConfig, TableSet, REFERENCE_LOSS,
};

/// Microarcseconds per radian.
pub const RAD_TO_MICROARCSEC: f64 = 180.0 * 3600.0 * 1e6 / PI;

#[derive(Debug, Clone, PartialEq)]
pub struct FisherBreakdown {
    pub total: f64,
    /// Contribution of outcomes with `D` detected photons, keyed by `D`.
    pub by_sector: BTreeMap<usize, f64>,
    pub phi: f64,
    pub epsilon: f64,
    pub p: f64,
}

/// `F(φ) = Σ_d ε² (∂P_B/∂φ)² / ((1−ε) P_A(d) + ε P_B(d))`.
///
/// Outcomes the star-absent branch cannot produce reduce to `ε (P_B')² / P_B`,
/// whose zeros are removable and handled by [`TrigProbability::fisher_density`].
///
/// [`TrigProbability::fisher_density`]: crate::protocol::TrigProbability::fisher_density
pub fn fisher_numeric(absent: &BranchTable, present: &BranchTable, phi: f64, epsilon: f64) -> FisherBreakdown {
    let background = absent.detector_marginal();
    let mut by_sector: BTreeMap<usize, f64> = BTreeMap::new();
    for (sig, t) in present.iter() {
        let sector = by_sector.entry(sig.detected_count()).or_insert(0.0);
        if epsilon == 0.0 || t.is_constant() {
            continue;
        }
        let idle = (1.0 - epsilon) * background.get(&sig.detector_part()).map_or(0.0, |b| b.a);
        let contribution = if idle > 0.0 {
            let d = t.derivative(phi);
            epsilon * epsilon * d * d / (idle + epsilon * t.value(phi).max(0.0))
        } else {
            epsilon * t.fisher_density(phi)
        };
        *sector += contribution;
    }
    let total = by_sector.values().sum();
    FisherBreakdown {
        total,
        by_sector,
        phi,
        epsilon,
        p: present.loss_probability,
    }
}

/// Fisher information of a configuration at its own `alpha` and `phi`.
pub fn fisher_at(config: &ExperimentConfig) -> Result<FisherBreakdown> {
    let absent = branch_table(config, Branch::StarAbsent)?;
    let present = branch_table(config, Branch::StarPresent)?;
    Ok(fisher_numeric(&absent, &present, config.phi, config.epsilon))
}

impl TableSet {
    /// Fisher information at baseline `alpha` and phase `phi`, using the
    /// configuration's occupancy. Same result as [`fisher_numeric`] on
    /// [`TableSet::at_alpha`], without materializing the rescaled tables.
    pub fn fisher(&self, alpha: f64, phi: f64) -> FisherBreakdown {
        self.fisher_with_occupancy(alpha, phi, self.config().epsilon)
    }

    /// As [`TableSet::fisher`] with an explicit occupancy; the tables
    /// themselves do not depend on it.
    pub fn fisher_with_occupancy(&self, alpha: f64, phi: f64, epsilon: f64) -> FisherBreakdown {
        let p = loss_probability(alpha);
        let ground = self.config().n - 1;
        let factors: Vec<Vec<f64>> = (0..=ground)
            .map(|kept| (0..=ground).map(|lost| loss_factor(p, REFERENCE_LOSS, kept, lost)).collect())
            .collect();
        let tables = self.compiled();
        let mut by_sector: BTreeMap<usize, f64> = BTreeMap::new();
        for e in &tables.present {
            let factor = factors[e.kept][e.lost];
            if factor <= 0.0 {
                continue;
            }
            let sector = by_sector.entry(e.detected).or_insert(0.0);
            if epsilon == 0.0 || e.trig.is_constant() {
                continue;
            }
            let t = e.trig.scaled(factor);
            let idle = e.background.map_or(0.0, |i| {
                let (kept, a) = tables.background[i];
                (1.0 - epsilon) * a * factors[kept][ground - kept]
            });
            *sector += if idle > 0.0 {
                let d = t.derivative(phi);
                epsilon * epsilon * d * d / (idle + epsilon * t.value(phi).max(0.0))
            } else {
                epsilon * t.fisher_density(phi)
            };
        }
        FisherBreakdown {
            total: by_sector.values().sum(),
            by_sector,
            phi,
            epsilon,
            p,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ResolutionResult {
    pub alpha: f64,
    /// Baseline `L = α L0` in meters.
    pub baseline_m: f64,
    pub fisher: f64,
    pub delta_theta_rad: f64,
    pub delta_theta_microarcsec: f64,
    /// `k = 2π/λ` in 1/m.
    pub wavenumber: f64,
}

/// `δθ = 1 / (k L √F)`.
pub fn resolution(config: &ExperimentConfig, fisher: f64) -> Result<ResolutionResult> {
    if fisher.is_nan() || fisher <= 0.0 {
        return Err(Error::ZeroInformation(fisher));
    }
    if config.alpha.is_nan() || config.alpha <= 0.0 {
        return Err(Error::DomainError(format!(
            "resolution needs a positive baseline, got alpha = {}",
            config.alpha
        )));
    }
    let wavenumber = 2.0 * PI / config.wavelength_m;
    let baseline_m = config.alpha * config.attenuation_length_m;
    let delta_theta_rad = 1.0 / (wavenumber * baseline_m * fisher.sqrt());
    Ok(ResolutionResult {
        alpha: config.alpha,
        baseline_m,
        fisher,
        delta_theta_rad,
        delta_theta_microarcsec: delta_theta_rad * RAD_TO_MICROARCSEC,
        wavenumber,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::protocol::{alpha_for_loss, LossAccounting};

    fn fisher(n: usize, eps: f64, indist: f64, p: f64, phi: f64) -> FisherBreakdown {
        let cfg = ExperimentConfig::uniform(n, eps, indist, alpha_for_loss(p)).with_phi(phi);
        fisher_at(&cfg).unwrap()
    }

    #[test]
    fn two_photon_examples() {
        assert!((fisher(2, 1.0, 1.0, 0.0, 0.3).total - 0.5).abs() < 1e-12);
        assert!((fisher(2, 1.0, 1.0, 0.0, 0.0).total - 0.5).abs() < 1e-12);
        let f = fisher(2, 0.3, 0.7, 0.4, 1.1);
        assert!((f.total - 0.5 * 0.3 * 0.6 * 0.7).abs() < 1e-12);
    }

    #[test]
    fn ideal_scaling_with_photon_number() {
        assert!((fisher(3, 1.0, 1.0, 0.0, 0.0).total - 2.0 / 3.0).abs() < 1e-12);
        assert!((fisher(4, 1.0, 1.0, 0.0, 0.0).total - 0.75).abs() < 1e-12);
    }

    #[test]
    fn zero_occupancy_gives_nothing() {
        assert_eq!(fisher(3, 0.0, 1.0, 0.3, 0.4).total, 0.0);
    }

    #[test]
    fn three_photon_half_loss() {
        let f = fisher(3, 1.0, 1.0, 0.5, 0.0);
        assert!((f.total - 5.0 / 12.0).abs() < 1e-12);
        assert!((f.by_sector[&3] - 2.0 / 3.0 * 0.25).abs() < 1e-12);
        assert!((f.by_sector[&2] - 0.25).abs() < 1e-12);
    }

    #[test]
    fn sectors_add_up() {
        let f = fisher(3, 0.4, 0.8, 0.3, 0.9);
        let s: f64 = f.by_sector.values().sum();
        assert!((s - f.total).abs() < 1e-12);
        assert!(f.by_sector.values().all(|&v| v >= 0.0));
    }

    #[test]
    fn traced_environment_merges_loss_configurations() {
        let mut cfg = ExperimentConfig::uniform(3, 1.0, 1.0, alpha_for_loss(0.5));
        cfg.observation.loss = LossAccounting::Traced;
        let f = fisher_at(&cfg).unwrap();
        // Lost-photon identities are unknown, so one-loss events interfere
        // incoherently and carry less information than per-configuration.
        assert!(f.total < 5.0 / 12.0 - 1e-3);
    }

    #[test]
    fn table_set_matches_rescaled_tables() {
        let cfg = ExperimentConfig {
            indist: vec![0.9, 0.5],
            ..ExperimentConfig::uniform(3, 0.3, 1.0, 0.0)
        };
        let set = TableSet::build(&cfg).unwrap();
        for &alpha in &[0.0, 0.7, 3.0, 9.0] {
            for &phi in &[0.0, 0.5, 2.9] {
                let (a, p) = set.at_alpha(alpha);
                let slow = fisher_numeric(&a, &p, phi, 0.3);
                let fast = set.fisher(alpha, phi);
                assert!((slow.total - fast.total).abs() < 1e-14 * (1.0 + slow.total));
                for (d, v) in &slow.by_sector {
                    assert!((fast.by_sector[d] - v).abs() < 1e-14);
                }
            }
        }
    }

    #[test]
    fn resolution_reference_point() {
        let cfg = ExperimentConfig::uniform(2, 1.0, 1.0, 4.0);
        let f = fisher_at(&cfg).unwrap().total;
        let r = resolution(&cfg, f).unwrap();
        assert!((r.delta_theta_microarcsec - 1.981).abs() < 1e-3);
        let r4 = resolution(&cfg, 4.0 * f).unwrap();
        assert!((r4.delta_theta_rad * 2.0 - r.delta_theta_rad).abs() < 1e-24);
        assert_eq!(r.baseline_m, 40e3);
    }

    #[test]
    fn resolution_errors() {
        let cfg = ExperimentConfig::default();
        assert!(matches!(resolution(&cfg, 0.0), Err(Error::ZeroInformation(_))));
        assert!(resolution(&cfg.with_alpha(0.0), 0.5).is_err());
    }
}
