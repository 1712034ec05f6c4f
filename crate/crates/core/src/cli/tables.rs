//! Published optimal-baseline tables and their recomputation.

use std::collections::BTreeMap;

use rayon::prelude::*;

use crate::error::Result;
use crate::optimize::{global_minimum, optimize_with, Minimum};
use crate::protocol::{ExperimentConfig, TableSet};

/// Baseline range searched for every table row.
pub const TABLE_ALPHA_RANGE: (f64, f64) = (0.5, 12.0);

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PublishedRow {
    pub table: &'static str,
    pub epsilon: f64,
    pub n: usize,
    /// Ground-photon indistinguishability used for the recomputation.
    pub indist: f64,
    pub delta_theta_microarcsec: f64,
    pub alpha_opt: f64,
}

const TABLE_ONE: [(f64, usize, f64, f64); 12] = [
    (1.0, 2, 1.9797, 4.0),
    (1.0, 3, 1.4311, 4.1797),
    (1.0, 4, 1.2347, 4.61273),
    (0.99, 2, 2.0303, 4.0),
    (0.99, 3, 1.4698, 4.19205),
    (0.99, 4, 1.6888, 4.28221),
    (0.5, 2, 2.8569, 4.0),
    (0.5, 3, 2.3043, 4.891),
    (0.5, 4, 2.4776, 4.65838),
    (0.01, 2, 20.2018, 4.0),
    (0.01, 3, 34.2724, 2.07328),
    (0.01, 4, 21.6339, 4.90848),
];

const TABLE_TWO: [(f64, usize, f64, f64, f64); 12] = [
    (0.99, 2, 1.0, 2.030, 4.0),
    (0.99, 3, 0.96, 1.468, 4.192),
    (0.99, 3, 0.50, 2.033, 4.098),
    (0.99, 3, 0.25, 2.830, 4.050),
    (0.5, 2, 1.0, 3.999, 4.0),
    (0.5, 3, 0.96, 2.3030, 4.8911),
    (0.5, 3, 0.50, 3.1456, 4.7868),
    (0.5, 3, 0.25, 4.2040, 4.4409),
    (0.01, 2, 1.0, 19.980, 4.0),
    (0.01, 3, 0.96, 34.272, 2.0732),
    (0.01, 3, 0.50, 43.449, 2.0621),
    (0.01, 3, 0.25, 57.230, 2.1542),
];

/// Every published row. The first table is listed under both readings of
/// its ground-photon indistinguishability, 96% and 100%.
pub fn published_rows() -> Vec<PublishedRow> {
    let mut rows = Vec::new();
    for indist in [0.96, 1.0] {
        for &(epsilon, n, dt, a) in &TABLE_ONE {
            rows.push(PublishedRow {
                table: "I",
                epsilon,
                n,
                indist,
                delta_theta_microarcsec: dt,
                alpha_opt: a,
            });
        }
    }
    for &(epsilon, n, indist, dt, a) in &TABLE_TWO {
        rows.push(PublishedRow {
            table: "II",
            epsilon,
            n,
            indist,
            delta_theta_microarcsec: dt,
            alpha_opt: a,
        });
    }
    rows
}

#[derive(Debug, Clone, PartialEq)]
pub struct ComputedRow {
    pub published: PublishedRow,
    pub minima: Vec<Minimum>,
    pub global: Minimum,
    /// The local minimum closest in α to the published optimum.
    pub nearest: Minimum,
}

impl ComputedRow {
    pub fn delta_theta_delta_pct(&self) -> f64 {
        pct(self.global.delta_theta_microarcsec, self.published.delta_theta_microarcsec)
    }

    pub fn alpha_delta_pct(&self) -> f64 {
        pct(self.global.alpha, self.published.alpha_opt)
    }
}

pub fn pct(computed: f64, reference: f64) -> f64 {
    100.0 * (computed - reference) / reference
}

/// Recomputes every published row by brute force at φ = 0 with the default
/// wavelength and attenuation length.
pub fn compute_rows(base: &ExperimentConfig) -> Result<Vec<ComputedRow>> {
    let rows = published_rows();
    // Tables depend only on N and the indistinguishabilities.
    let mut keys: Vec<(usize, u64)> = rows.iter().map(|r| (r.n, r.indist.to_bits())).collect();
    keys.sort_unstable();
    keys.dedup();
    let sets: BTreeMap<(usize, u64), TableSet> = keys
        .par_iter()
        .map(|&(n, bits)| {
            let cfg = ExperimentConfig {
                n,
                indist: vec![f64::from_bits(bits); n - 1],
                ..base.clone()
            };
            TableSet::build(&cfg).map(|t| ((n, bits), t))
        })
        .collect::<Result<_>>()?;
    rows.par_iter()
        .map(|row| {
            let tables = &sets[&(row.n, row.indist.to_bits())];
            let config = ExperimentConfig {
                epsilon: row.epsilon,
                ..tables.config().clone()
            };
            let model = EpsilonModel {
                tables,
                epsilon: row.epsilon,
                phi: config.phi,
            };
            let minima = optimize_with(&config, &model, TABLE_ALPHA_RANGE)?;
            let global = *global_minimum(&minima).expect("non-empty minima");
            let nearest = *minima
                .iter()
                .min_by(|a, b| {
                    (a.alpha - row.alpha_opt)
                        .abs()
                        .total_cmp(&(b.alpha - row.alpha_opt).abs())
                })
                .expect("non-empty minima");
            Ok(ComputedRow {
                published: *row,
                minima,
                global,
                nearest,
            })
        })
        .collect()
}

struct EpsilonModel<'a> {
    tables: &'a TableSet,
    epsilon: f64,
    phi: f64,
}

impl crate::optimize::FisherModel for EpsilonModel<'_> {
    fn fisher(&self, alpha: f64) -> f64 {
        self.tables.fisher_with_occupancy(alpha, self.phi, self.epsilon).total
    }
}
