//! Subcommand runners: compose core operations into deterministic CSV/JSON
//! artifacts. Grid points may be evaluated on several threads; the output
//! assembly is an ordered reduction, so bytes do not depend on the thread
//! count.

use std::path::{Path, PathBuf};

use serde_json::json;

use nssapprox_core::active_set::{enumerate_active_set, ActiveSet, EnumerationOptions};

use nssapprox_core::engine::{
    anova_rate_bounds, estimate_rate, tradeoff_point, validate_eps_grid, TradeoffPoint,
};
use nssapprox_core::non_anova::{
    certified_non_anova_approximation, comparison_gap, non_anova_rate_bounds, witness_lower_bound,
};
use nssapprox_core::Term;

use crate::config::ExperimentConfig;
use crate::output::{fmt_g17, write_csv, write_json, Provenance};

/// Failure modes with their process exit codes: schema/validation errors
/// exit 2, computation errors exit 3, I/O errors exit 1.
#[derive(Debug)]
pub enum CliError {
    Schema(String),
    Compute(nssapprox_core::Error),
    Io(std::io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Schema(_) => 2,
            CliError::Compute(_) => 3,
            CliError::Io(_) => 1,
        }
    }

    /// Machine-readable tag printed on the diagnostic stream.
    pub fn name(&self) -> &'static str {
        match self {
            CliError::Schema(_) => "schema-violation",
            CliError::Compute(e) => e.name(),
            CliError::Io(_) => "io-error",
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Schema(msg) => write!(f, "{msg}"),
            CliError::Compute(e) => write!(f, "{e}"),
            CliError::Io(e) => write!(f, "{e}"),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e)
    }
}

impl From<nssapprox_core::Error> for CliError {
    fn from(e: nssapprox_core::Error) -> Self {
        CliError::Compute(e)
    }
}

fn schema(msg: String) -> CliError {
    CliError::Schema(msg)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Subcommand {
    Enumerate,
    Curve,
    Rates,
    Bounds,
    NonAnova,
    Witness,
    Compare,
}

pub struct Invocation<'a> {
    pub config: &'a ExperimentConfig,
    pub provenance: Provenance,
    pub out_dir: PathBuf,
    pub threads: usize,
}

impl<'a> Invocation<'a> {
    fn out_path(&self, name: &str) -> PathBuf {
        let prefix = self.config.output_prefix.as_deref().unwrap_or("");
        self.out_dir.join(format!("{prefix}{name}"))
    }

    fn enum_opts(&self) -> EnumerationOptions {
        let mut opts = EnumerationOptions::default();
        if let Some(b) = self.config.term_budget {
            opts.term_budget = b;
        }
        opts
    }
}

pub fn run(sub: Subcommand, inv: &Invocation<'_>) -> Result<(), CliError> {
    match sub {
        Subcommand::Enumerate => run_enumerate(inv),
        Subcommand::Curve => {
            run_curve(inv)?;
            Ok(())
        }
        Subcommand::Rates => run_rates(inv),
        Subcommand::Bounds => run_bounds(inv),
        Subcommand::NonAnova => run_nonanova(inv),
        Subcommand::Witness => run_witness(inv),
        Subcommand::Compare => run_compare(inv),
    }
}

fn term_set_label(t: &Term) -> String {
    if t.is_empty() {
        "-".into()
    } else {
        t.coords()
            .iter()
            .map(|c| c.to_string())
            .collect::<Vec<_>>()
            .join("-")
    }
}

fn term_idx_label(t: &Term) -> String {
    if t.is_empty() {
        "-".into()
    } else {
        t.indices()
            .iter()
            .map(|c| c.to_string())
            .collect::<Vec<_>>()
            .join("-")
    }
}

fn active_set_rows(model: &nssapprox_core::ProblemModel, aset: &ActiveSet) -> Vec<Vec<String>> {
    aset.terms()
        .iter()
        .map(|t| {
            vec![
                t.max_coord().to_string(),
                term_set_label(t),
                term_idx_label(t),
                fmt_g17(model.term_score(t)),
            ]
        })
        .collect()
}

fn level_counts_json(aset: &ActiveSet) -> serde_json::Value {
    let pairs: Vec<serde_json::Value> = aset
        .level_counts()
        .iter()
        .map(|(&k, &n)| json!([k, n]))
        .collect();
    serde_json::Value::Array(pairs)
}

fn run_enumerate(inv: &Invocation<'_>) -> Result<(), CliError> {
    let model = inv.config.require_model().map_err(schema)?;
    let grid = inv.config.require_grid().map_err(schema)?;
    if grid.len() != 1 {
        return Err(schema(format!(
            "enumerate expects a single-point eps grid, got {} points",
            grid.len()
        )));
    }
    let eps = grid[0];
    let aset = enumerate_active_set(&model, eps, &inv.enum_opts())?;
    write_csv(
        &inv.out_path("active_set.csv"),
        &inv.provenance,
        &["level", "u", "j", "score"],
        &active_set_rows(&model, &aset),
    )?;
    write_json(
        &inv.out_path("enumerate_summary.json"),
        &inv.provenance,
        json!({
            "epsilon": eps,
            "m_eps": aset.m_eps,
            "level_counts": level_counts_json(&aset),
            "total_terms": aset.total_terms(),
            "largest_excluded_score": aset.largest_excluded_score,
        }),
    )?;
    Ok(())
}

/// Evaluate grid points with a deterministic ordered merge. Worker `t` takes
/// the indices congruent to `t` modulo the thread count; results are placed
/// by index, so the assembled vector is independent of scheduling.
fn evaluate_grid(
    inv: &Invocation<'_>,
    model: &nssapprox_core::ProblemModel,
    costfn: &nssapprox_core::cost::CostFunction,
    grid: &[f64],
) -> Result<Vec<TradeoffPoint>, CliError> {
    validate_eps_grid(grid)?;
    let opts = inv.enum_opts();
    let threads = inv.threads.clamp(1, grid.len().max(1));
    if threads == 1 {
        let mut pts = Vec::with_capacity(grid.len());
        for &eps in grid {
            pts.push(tradeoff_point(model, costfn, eps, &opts)?);
        }
        return Ok(pts);
    }
    let mut slots: Vec<Option<Result<TradeoffPoint, nssapprox_core::Error>>> = Vec::new();
    slots.resize_with(grid.len(), || None);
    let chunks: Vec<(usize, &mut Option<Result<TradeoffPoint, nssapprox_core::Error>>)> =
        slots.iter_mut().enumerate().collect();
    std::thread::scope(|scope| {
        let mut remaining = chunks;
        for t in 0..threads {
            let (mine, rest): (Vec<_>, Vec<_>) =
                remaining.into_iter().partition(|(i, _)| i % threads == t);
            remaining = rest;
            let opts = opts;
            scope.spawn(move || {
                for (i, slot) in mine {
                    *slot = Some(tradeoff_point(model, costfn, grid[i], &opts));
                }
            });
        }
    });
    let mut pts = Vec::with_capacity(grid.len());
    for slot in slots {
        pts.push(slot.expect("every grid slot evaluated")?);
    }
    Ok(pts)
}

fn curve_rows(points: &[TradeoffPoint]) -> Vec<Vec<String>> {
    points
        .iter()
        .map(|p| {
            vec![
                fmt_g17(p.epsilon),
                p.m_eps.to_string(),
                p.total_terms.to_string(),
                fmt_g17(p.cost_nss),
                fmt_g17(p.cost_unrestricted),
                fmt_g17(p.exact_error),
            ]
        })
        .collect()
}

const CURVE_HEADER: [&str; 6] = [
    "epsilon",
    "m_eps",
    "total_terms",
    "cost_nss",
    "cost_unrestricted",
    "exact_error",
];

fn run_curve(inv: &Invocation<'_>) -> Result<Vec<TradeoffPoint>, CliError> {
    let model = inv.config.require_model().map_err(schema)?;
    let costfn = inv.config.require_cost().map_err(schema)?;
    let grid = inv.config.require_grid().map_err(schema)?;
    let points = evaluate_grid(inv, &model, &costfn, &grid)?;
    write_csv(
        &inv.out_path("curve.csv"),
        &inv.provenance,
        &CURVE_HEADER,
        &curve_rows(&points),
    )?;
    Ok(points)
}

fn bounds_json(b: &crate::config::BoundsBlock) -> serde_json::Value {
    let anova = anova_rate_bounds(b.d_lambda_low, b.d_gamma_low, b.d_gamma_up, b.s).ok();
    let non_anova = non_anova_rate_bounds(b.d_lambda_low, b.d_gamma_low, b.d_gamma_up, b.s).ok();
    let rb = |x: Option<&nssapprox_core::engine::RateBounds>| match x {
        Some(r) => json!({
            "lower": r.lower,
            "upper": r.upper,
            "tract_exp_lower": r.tract_exp_lower,
            "tract_exp_upper": r.tract_exp_upper,
        }),
        None => serde_json::Value::Null,
    };
    json!({
        "d_lambda_low": b.d_lambda_low,
        "d_gamma_low": b.d_gamma_low,
        "d_gamma_up": b.d_gamma_up,
        "s": b.s,
        "anova_lower": anova.as_ref().map(|r| r.lower),
        "anova_upper": anova.as_ref().map(|r| r.upper),
        "anova": rb(anova.as_ref()),
        "non_anova": rb(non_anova.as_ref()),
    })
}

fn run_rates(inv: &Invocation<'_>) -> Result<(), CliError> {
    let points = run_curve(inv)?;
    let fit = estimate_rate(&points, inv.config.mode)?;
    let theory = inv.config.bound_params().ok().map(|b| bounds_json(&b));
    write_json(
        &inv.out_path("rates.json"),
        &inv.provenance,
        json!({
            "mode": inv.config.mode.to_string(),
            "fitted_rate": fit.rate,
            "max_log_residual": fit.max_log_residual,
            "points_used": fit.points_used,
            "theory": theory.unwrap_or(serde_json::Value::Null),
        }),
    )?;
    Ok(())
}

fn run_bounds(inv: &Invocation<'_>) -> Result<(), CliError> {
    let b = inv.config.bound_params().map_err(schema)?;
    // Surface parameter violations as computation errors with the core name.
    anova_rate_bounds(b.d_lambda_low, b.d_gamma_low, b.d_gamma_up, b.s)?;
    write_json(&inv.out_path("bounds.json"), &inv.provenance, bounds_json(&b))?;
    Ok(())
}

fn run_nonanova(inv: &Invocation<'_>) -> Result<(), CliError> {
    let model = inv.config.require_model().map_err(schema)?;
    let costfn = inv.config.require_cost().map_err(schema)?;
    let grid = inv.config.require_grid().map_err(schema)?;
    if grid.len() != 1 {
        return Err(schema(format!(
            "nonanova expects a single-point eps grid, got {} points",
            grid.len()
        )));
    }
    let block = inv.config.non_anova.clone().unwrap_or(crate::config::NonAnovaBlock {
        c: None,
        rel_tol: None,
    });
    let rel_tol = block.rel_tol.unwrap_or(1e-6);
    let res = certified_non_anova_approximation(
        &model,
        grid[0],
        &costfn,
        block.c,
        rel_tol,
        &inv.enum_opts(),
    )?;
    write_json(
        &inv.out_path("nonanova.json"),
        &inv.provenance,
        json!({
            "c": res.c,
            "C_gamma": [res.c_gamma.lo, res.c_gamma.hi],
            "nominal_eps": res.nominal_eps,
            "certified_bound": res.certified_error_bound,
            "cost_nss": res.cost_nss,
            "total_terms": res.active_set.total_terms(),
            "m_eps": res.active_set.m_eps,
        }),
    )?;
    Ok(())
}

fn run_witness(inv: &Invocation<'_>) -> Result<(), CliError> {
    let model = inv.config.require_model().map_err(schema)?;
    let costfn = inv.config.require_cost().map_err(schema)?;
    let block = inv
        .config
        .witness
        .clone()
        .ok_or_else(|| schema("witness requires a \"witness\" block".into()))?;
    let mut rows = Vec::with_capacity(block.budget_grid.len());
    for &budget in &block.budget_grid {
        let w = witness_lower_bound(&model, &costfn, budget, block.h_norm_sq, block.c1)?;
        rows.push(vec![
            fmt_g17(budget),
            w.level_cutoff.to_string(),
            fmt_g17(w.norm_sq.lo),
            fmt_g17(w.norm_sq.hi),
            fmt_g17(w.error_lower_bound),
            fmt_g17(w.integration_witness.lo),
            fmt_g17(w.integration_witness.hi),
        ]);
    }
    write_csv(
        &inv.out_path("witness.csv"),
        &inv.provenance,
        &[
            "budget",
            "level_cutoff",
            "norm_sq_lo",
            "norm_sq_hi",
            "error_lower_bound",
            "integration_witness_lo",
            "integration_witness_hi",
        ],
        &rows,
    )?;
    Ok(())
}

fn run_compare(inv: &Invocation<'_>) -> Result<(), CliError> {
    let block = inv
        .config
        .compare
        .clone()
        .ok_or_else(|| schema("compare requires a \"compare\" block".into()))?;
    let mut rows = Vec::with_capacity(block.rows.len());
    for r in &block.rows {
        let gap = comparison_gap(r.d_gamma, r.d_lambda, r.s)?;
        let anova = anova_rate_bounds(r.d_lambda, r.d_gamma, r.d_gamma, r.s)?;
        let na = non_anova_rate_bounds(r.d_lambda, r.d_gamma, r.d_gamma, r.s)?;
        rows.push(vec![
            fmt_g17(r.d_gamma),
            fmt_g17(r.d_lambda),
            fmt_g17(r.s),
            fmt_g17(anova.lower),
            fmt_g17(anova.upper),
            fmt_g17(na.lower),
            fmt_g17(na.upper),
            (gap.strict as u8).to_string(),
        ]);
    }
    write_csv(
        &inv.out_path("compare.csv"),
        &inv.provenance,
        &[
            "d_gamma",
            "d_lambda",
            "s",
            "anova_lower",
            "anova_upper",
            "nonanova_lower",
            "nonanova_upper",
            "strict_gap",
        ],
        &rows,
    )?;
    Ok(())
}

/// Parse a subcommand name (used by both the binary and tests).
pub fn parse_subcommand(name: &str) -> Option<Subcommand> {
    match name {
        "enumerate" => Some(Subcommand::Enumerate),
        "curve" => Some(Subcommand::Curve),
        "rates" => Some(Subcommand::Rates),
        "bounds" => Some(Subcommand::Bounds),
        "nonanova" => Some(Subcommand::NonAnova),
        "witness" => Some(Subcommand::Witness),
        "compare" => Some(Subcommand::Compare),
    _ => None,
    }
}

/// Load, hash, and validate a config file, then execute the subcommand.
pub fn execute_file(
    sub: Subcommand,
    config_path: &Path,
    out_dir: &Path,
    threads: usize,
) -> Result<(), CliError> {
    let bytes = std::fs::read(config_path)?;
    let config = ExperimentConfig::parse(&bytes).map_err(CliError::Schema)?;
    let provenance = Provenance::from_config_bytes(&bytes, &config.mode.to_string());
    let inv = Invocation {
        config: &config,
        provenance,
        out_dir: out_dir.to_path_buf(),
        threads: threads.max(1),
    };
    run(sub, &inv)
}
