//! Command implementations producing output tables.

use crate::catalog::CatalogId;
use crate::error::Result;
use crate::optimize::{curve_export, optimize_alpha, Engine, Sweep};
use crate::protocol::{branch_table, mixture_table, Branch, ExperimentConfig};
use crate::verify::{verify, VerifyGrid, VerifyReport};

use super::config::config_echo;
use super::output::{Cell, Table};
use super::tables::{compute_rows, pct};

/// Mixture distribution per detector outcome with its trigonometric
/// coefficients, evaluated at the configured phase.
pub fn cmd_probs(config: &ExperimentConfig) -> Result<Table> {
    let absent = branch_table(config, Branch::StarAbsent)?;
    let present = branch_table(config, Branch::StarPresent)?;
    let mut table = Table::new(
        "probs",
        config_echo(config),
        &["signature", "detected", "counts", "A", "B", "C", "probability"],
    );
    for (sig, t) in mixture_table(&absent, &present, config.epsilon) {
        let counts: Vec<String> = sig.counts(config.n).iter().map(u8::to_string).collect();
        table.push(vec![
            sig.to_string().into(),
            sig.detected_count().into(),
            counts.join(" ").into(),
            t.a.into(),
            t.b.into(),
            t.c.into(),
            t.value(config.phi).into(),
        ]);
    }
    Ok(table)
}

/// Both published tables next to their brute-force recomputation.
pub fn cmd_tables(base: &ExperimentConfig) -> Result<Table> {
    let header = config_echo(base)
        .into_iter()
        .filter(|(k, _)| matches!(k.as_str(), "nu_policy" | "lambda_nm" | "L0_km" | "phi" | "labels" | "loss_accounting"))
        .collect();
    let mut table = Table::new(
        "tables",
        header,
        &[
            "table",
            "epsilon",
            "N",
            "indist_percent",
            "published_delta_theta_uas",
            "published_alpha_opt",
            "delta_theta_uas",
            "alpha_opt",
            "delta_theta_delta_pct",
            "alpha_delta_pct",
            "minima",
            "nearest_delta_theta_uas",
            "nearest_alpha_opt",
            "nearest_delta_theta_delta_pct",
            "nearest_alpha_delta_pct",
        ],
    );
    for row in compute_rows(base)? {
        let p = row.published;
        table.push(vec![
            p.table.into(),
            p.epsilon.into(),
            p.n.into(),
            (p.indist * 100.0).into(),
            p.delta_theta_microarcsec.into(),
            p.alpha_opt.into(),
            row.global.delta_theta_microarcsec.into(),
            row.global.alpha.into(),
            row.delta_theta_delta_pct().into(),
            row.alpha_delta_pct().into(),
            row.minima.len().into(),
            row.nearest.delta_theta_microarcsec.into(),
            row.nearest.alpha.into(),
            pct(row.nearest.delta_theta_microarcsec, p.delta_theta_microarcsec).into(),
            pct(row.nearest.alpha, p.alpha_opt).into(),
        ]);
    }
    Ok(table)
}

pub fn cmd_curve(config: &ExperimentConfig, sweep: Sweep, range: (f64, f64), samples: usize) -> Result<Table> {
    let (x, y) = match sweep {
        Sweep::FisherVsPhi => ("phi", "fisher"),
        Sweep::ResolutionVsAlpha => ("alpha", "delta_theta_uas"),
    };
    let mut header = config_echo(config);
    header.push(("sweep".into(), x.into()));
    header.push(("samples".into(), samples.to_string()));
    let mut table = Table::new("curve", header, &[x, y]);
    for (a, b) in curve_export(config, sweep, range, samples)? {
        table.push(vec![a.into(), b.into()]);
    }
    Ok(table)
}

pub fn cmd_optimize(config: &ExperimentConfig, range: (f64, f64), engine: Engine) -> Result<Table> {
    let mut header = config_echo(config);
    header.push(("alpha_range".into(), format!("{},{}", range.0, range.1)));
    header.push((
        "engine".into(),
        match engine {
            Engine::BruteForceFisher => "brute-force",
            Engine::ClosedFormFisher => "closed-form",
        }
        .into(),
    ));
    let mut table = Table::new("optimize", header, &["alpha_opt", "delta_theta_uas", "fisher", "global"]);
    for m in optimize_alpha(config, range, engine)? {
        table.push(vec![
            m.alpha.into(),
            m.delta_theta_microarcsec.into(),
            m.fisher.into(),
            usize::from(m.global).into(),
        ]);
    }
    Ok(table)
}

fn list(values: &[f64]) -> String {
    values.iter().map(f64::to_string).collect::<Vec<_>>().join(",")
}

pub fn cmd_verify(grid: &VerifyGrid) -> Result<(VerifyReport, Table)> {
    let report = verify(grid)?;
    let header = vec![
        ("p_values".into(), list(&grid.p_values)),
        ("indist_values".into(), list(&grid.indist_values)),
        ("epsilon_values".into(), list(&grid.epsilon_values)),
        ("phi_values".into(), list(&grid.phi_values)),
    ];
    let mut table = Table::new(
        "verify",
        header,
        &["class", "N", "catalog", "tolerance", "points", "max_deviation", "status"],
    );
    for c in &report.classes {
        let status = match (c.tolerance, c.passed()) {
            (None, _) => "report",
            (Some(_), true) => "pass",
            (Some(_), false) => "fail",
        };
        table.push(vec![
            c.name.clone().into(),
            c.n.into(),
            CatalogId::name(c.catalog).into(),
            c.tolerance.map_or(Cell::Text("-".into()), Cell::Num),
            c.points.into(),
            c.max_deviation.into(),
            status.into(),
        ]);
    }
    Ok((report, table))
}
