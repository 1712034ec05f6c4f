//! Cross-validation of the brute-force Fisher information against the
//! closed-form catalog. Brute force is ground truth; deviations are data.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::fmt::Write as _;

use rayon::prelude::*;

use crate::catalog::{closed_form_terms, CatalogId, ClosedFormParams};
use crate::error::Result;
use crate::protocol::{alpha_for_loss, ExperimentConfig, NuPolicy, TableSet};

/// Value lists spanning the verification grid.
#[derive(Debug, Clone, PartialEq)]
pub struct VerifyGrid {
    pub p_values: Vec<f64>,
    pub indist_values: Vec<f64>,
    pub epsilon_values: Vec<f64>,
    pub phi_values: Vec<f64>,
    /// Tolerance for the asserted N = 2 class.
    pub tol_n2: f64,
    /// Tolerance for the asserted N = 3, ε = 1 class.
    pub tol_n3: f64,
}

impl Default for VerifyGrid {
    fn default() -> Self {
        let quarters = vec![0.0, 0.25, 0.5, 0.75, 1.0];
        VerifyGrid {
            p_values: quarters.clone(),
            indist_values: quarters.clone(),
            epsilon_values: quarters,
            phi_values: (0..8).map(|k| k as f64 * PI / 7.0).collect(),
            tol_n2: 1e-9,
            tol_n3: 1e-8,
        }
    }
}

/// One grid point of a verification class.
#[derive(Debug, Clone, PartialEq)]
pub struct GridPoint {
    pub phi: f64,
    pub p: f64,
    pub epsilon: f64,
    pub indist: Vec<f64>,
    pub brute_force: f64,
    pub closed_form: f64,
}

impl GridPoint {
    pub fn deviation(&self) -> f64 {
        (self.brute_force - self.closed_form).abs()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClassReport {
    pub name: String,
    pub n: usize,
    pub catalog: CatalogId,
    /// `Some(tol)` when the class must agree within `tol`.
    pub tolerance: Option<f64>,
    pub points: usize,
    pub max_deviation: f64,
    pub worst: Option<GridPoint>,
    /// Largest deviation between the brute-force contribution of outcomes
    /// with `D` detected photons and the catalog terms accounting for them.
    pub sector_max_deviation: BTreeMap<usize, f64>,
    /// Largest magnitude each catalog term reached over the class, in
    /// catalog order.
    pub term_max_value: Vec<(String, f64)>,
}

impl ClassReport {
    pub fn passed(&self) -> bool {
        self.tolerance.is_none_or(|tol| self.max_deviation <= tol)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct VerifyReport {
    pub classes: Vec<ClassReport>,
}

impl VerifyReport {
    /// Whether every asserted class agrees within its tolerance.
    pub fn passed(&self) -> bool {
        self.classes.iter().all(ClassReport::passed)
    }

    pub fn class(&self, name: &str) -> Option<&ClassReport> {
        self.classes.iter().find(|c| c.name == name)
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        for c in &self.classes {
            let status = match c.tolerance {
                Some(tol) if c.passed() => format!("asserted <= {tol:e}: PASS"),
                Some(tol) => format!("asserted <= {tol:e}: FAIL"),
                None => "report only".to_string(),
            };
            let _ = writeln!(out, "[{}] N={} vs {} ({} points, {status})", c.name, c.n, c.catalog, c.points);
            let _ = writeln!(out, "  max |brute - closed| = {:.3e}", c.max_deviation);
            if let Some(w) = &c.worst {
                let indist: Vec<String> = w.indist.iter().map(|i| format!("{i}")).collect();
                let _ = writeln!(
                    out,
                    "  worst at phi={:.6} p={} epsilon={} I=[{}]: brute={:.12e} closed={:.12e}",
                    w.phi,
                    w.p,
                    w.epsilon,
                    indist.join(","),
                    w.brute_force,
                    w.closed_form
                );
            }
            for (d, dev) in &c.sector_max_deviation {
                let _ = writeln!(out, "  sector D={d}: max deviation {dev:.3e}");
            }
            for (name, v) in &c.term_max_value {
                let _ = writeln!(out, "  term {name}: max value {v:.6e}");
            }
        }
        let _ = writeln!(out, "overall: {}", if self.passed() { "PASS" } else { "FAIL" });
        out
    }
}

struct ClassSpec {
    name: &'static str,
    n: usize,
    catalog: CatalogId,
    tolerance: Option<f64>,
    /// Ground-photon indistinguishability tuples.
    indist: Vec<Vec<f64>>,
    epsilons: Vec<f64>,
}

struct PointResult {
    point: GridPoint,
    sectors: BTreeMap<usize, f64>,
    terms: Vec<(String, f64)>,
}

fn run_class(spec: &ClassSpec, grid: &VerifyGrid) -> Result<ClassReport> {
    let mut results: Vec<PointResult> = Vec::new();
    for indist in &spec.indist {
        let config = ExperimentConfig {
            n: spec.n,
            indist: indist.clone(),
            nu_policy: NuPolicy::DistinctNu,
            ..ExperimentConfig::default()
        };
        let mut jobs = Vec::new();
        for &epsilon in &spec.epsilons {
            for &p in &grid.p_values {
                for &phi in &grid.phi_values {
                    jobs.push((epsilon, p, phi));
                }
            }
        }
        let tables = TableSet::build(&config)?;
        let chunk: Vec<Result<PointResult>> = jobs
            .par_iter()
            .map(|&(epsilon, p, phi)| {
                let brute = tables.fisher_with_occupancy(alpha_for_loss(p), phi, epsilon);
                let terms = closed_form_terms(
                    spec.catalog,
                    &ClosedFormParams {
                        phi,
                        p,
                        epsilon,
                        indist: indist.clone(),
                    },
                )?;
                let closed: f64 = terms.iter().map(|t| t.value).sum();
                let mut by_d: BTreeMap<usize, f64> = BTreeMap::new();
                for t in &terms {
                    *by_d.entry(t.detected).or_default() += t.value;
                }
                let mut sectors = BTreeMap::new();
                for d in 2..=spec.n {
                    let b = brute.by_sector.get(&d).copied().unwrap_or(0.0);
                    let c = by_d.get(&d).copied().unwrap_or(0.0);
                    sectors.insert(d, (b - c).abs());
                }
                Ok(PointResult {
                    point: GridPoint {
                        phi,
                        p,
                        epsilon,
                        indist: indist.clone(),
                        brute_force: brute.total,
                        closed_form: closed,
                    },
                    sectors,
                    terms: terms.into_iter().map(|t| (t.name, t.value)).collect(),
                })
            })
            .collect();
        for r in chunk {
            results.push(r?);
        }
    }

    let mut report = ClassReport {
        name: spec.name.to_string(),
        n: spec.n,
        catalog: spec.catalog,
        tolerance: spec.tolerance,
        points: results.len(),
        max_deviation: 0.0,
        worst: None,
        sector_max_deviation: BTreeMap::new(),
        term_max_value: Vec::new(),
    };
    for r in results {
        let dev = r.point.deviation();
        // NaN deviations count as worst.
        if report.worst.is_none() || dev.is_nan() || dev > report.max_deviation {
            report.max_deviation = if dev.is_nan() { f64::INFINITY } else { dev.max(report.max_deviation) };
            report.worst = Some(r.point.clone());
        }
        for (d, v) in r.sectors {
            let e = report.sector_max_deviation.entry(d).or_insert(0.0);
            *e = e.max(v);
        }
        for (name, v) in r.terms {
            match report.term_max_value.iter_mut().find(|(n, _)| *n == name) {
                Some((_, m)) => *m = m.max(v.abs()),
                None => report.term_max_value.push((name, v.abs())),
            }
        }
    }
    Ok(report)
}

/// Runs every verification class over the grid.
///
/// Asserted: N = 2 over the full grid, and N = 3 at ε = 1 with independent
/// `I₂`, `I₃` against the lossy three-photon law. Reported: N = 3 at ε < 1
/// against both single-loss lists, and N = 4 with identical photons.
pub fn verify(grid: &VerifyGrid) -> Result<VerifyReport> {
    let singles: Vec<Vec<f64>> = grid.indist_values.iter().map(|&i| vec![i]).collect();
    let pairs: Vec<Vec<f64>> = grid
        .indist_values
        .iter()
        .flat_map(|&a| grid.indist_values.iter().map(move |&b| vec![a, b]))
        .collect();
    let equal_pairs: Vec<Vec<f64>> = grid.indist_values.iter().map(|&i| vec![i, i]).collect();
    let partial_eps: Vec<f64> = grid.epsilon_values.iter().copied().filter(|&e| e < 1.0).collect();

    let specs = [
        ClassSpec {
            name: "n2",
            n: 2,
            catalog: CatalogId::F2,
            tolerance: Some(grid.tol_n2),
            indist: singles,
            epsilons: grid.epsilon_values.clone(),
        },
        ClassSpec {
            name: "n3_certain_star",
            n: 3,
            catalog: CatalogId::F3Loss,
            tolerance: Some(grid.tol_n3),
            indist: pairs.clone(),
            epsilons: vec![1.0],
        },
        ClassSpec {
            name: "n3_identical_list",
            n: 3,
            catalog: CatalogId::F3Identical,
            tolerance: None,
            indist: equal_pairs,
            epsilons: partial_eps.clone(),
        },
        ClassSpec {
            name: "n3_distinct_list",
            n: 3,
            catalog: CatalogId::F3Distinct,
            tolerance: None,
            indist: pairs,
            epsilons: partial_eps,
        },
        ClassSpec {
            name: "n4_identical",
            n: 4,
            catalog: CatalogId::F4Identical,
            tolerance: None,
            indist: vec![vec![1.0; 3]],
            epsilons: grid.epsilon_values.clone(),
        },
    ];
    let classes = specs
        .iter()
        .filter(|s| !s.indist.is_empty() && !s.epsilons.is_empty())
        .map(|s| run_class(s, grid))
        .collect::<Result<Vec<_>>>()?;
    Ok(VerifyReport { classes })
}
