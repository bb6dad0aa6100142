//! Datasets behind the six reference figures. Every dataset uses `m = 3`.

use crate::args::Series;
use crate::commands::{blue_rows, lmmse_rows, scm_table, LmmsePlan};
use crate::error::CliError;
use crate::input::model_label;
use crate::table::{Row, Table};
use gram_moments::apps::NoiseModel;
use gram_moments::asymptotic::asymptotic_inverse_moments;
use gram_moments::oracle::mc_empirical_moments;
use gram_moments::scm::default_grid;
use gram_moments::spectra::model_spectrum;
use gram_moments::{DividedDifferenceEngine, EngineKind, McConfig, ModelTag, MomentEngine};

const M: usize = 3;
const DIMENSIONS: std::ops::RangeInclusive<usize> = 5..=10;
const LMMSE_N: usize = 10;

/// Prior variances `10^(d/10)` for `d = -30, -25, ..., 30` dB.
pub fn snr_grid() -> Vec<f64> {
    (-6..=6).map(|k| 10f64.powf(k as f64 * 0.5)).collect()
}

/// Exact, asymptotic and simulated inverse moments of orders
/// `1..=min(3, p)` for `n = 5..10`.
fn inverse_moments(k: u8, tag: ModelTag, trials: u64, seed: u64) -> Result<Table, CliError> {
    let model = model_label(tag);
    let mut table = Table::new(&format!("fig{k}")).meta("figure", k);
    for n in DIMENSIONS {
        let s = model_spectrum(tag, n, M, seed)?;
        let top = s.p().min(3);
        let orders: Vec<i64> = (1..=top as i64).map(|r| -r).collect();
        let exact = DividedDifferenceEngine::build(&s)?;
        let asym = asymptotic_inverse_moments(&s, top)?;
        let mc = mc_empirical_moments(&s, &orders, &McConfig::new(trials, seed))?;
        for (i, &r) in orders.iter().enumerate() {
            let v = exact.moment(r)?;
            table
                .rows
                .push(Row::closed("exact", model, n, M, v).with_order(r));
            table
                .rows
                .push(Row::closed("asymptotic", model, n, M, asym[i]).with_order(r));
            table.rows.push(
                Row::simulated(
                    "monte-carlo",
                    model,
                    n,
                    M,
                    mc[i].mean,
                    mc[i].std_error,
                    trials,
                    seed,
                )
                .with_order(r),
            );
        }
    }
    Ok(table)
}

fn blue(trials: u64, seed: u64) -> Result<Table, CliError> {
    let mut table = Table::new("fig3").meta("figure", 3);
    for tag in [ModelTag::Bessel, ModelTag::ShiftedWishart] {
        for n in DIMENSIONS {
            let sz = model_spectrum(tag, n, M, seed)?;
            let nm = NoiseModel::new(sz.thetas(), M, EngineKind::DividedDifference)?;
            table
                .rows
                .extend(blue_rows(&nm, model_label(tag), trials, seed)?);
        }
    }
    Ok(table)
}

fn lmmse(k: u8, tag: ModelTag, trials: u64, seed: u64) -> Result<Table, CliError> {
    let sz = model_spectrum(tag, LMMSE_N, M, seed)?;
    let nm = NoiseModel::new(sz.thetas(), M, EngineKind::DividedDifference)?;
    let plan = LmmsePlan {
        series: Series::Both,
        high_order: None,
        low_order: 8,
        trials,
        seed,
    };
    let mut skipped = Vec::new();
    let mut rows = Vec::new();
    for s2 in snr_grid() {
        rows.extend(lmmse_rows(&nm, model_label(tag), s2, &plan, &mut skipped)?);
    }
    let mut table = Table::new(&format!("fig{k}"))
        .meta("figure", k)
        .meta("skipped", skipped);
    table.rows = rows;
    Ok(table)
}

pub fn figure(k: u8, trials: u64, seed: u64) -> Result<Table, CliError> {
    match k {
        1 => inverse_moments(1, ModelTag::Bessel, trials, seed),
        2 => inverse_moments(2, ModelTag::ShiftedWishart, trials, seed),
        3 => blue(trials, seed),
        4 => lmmse(4, ModelTag::Bessel, trials, seed),
        5 => lmmse(5, ModelTag::ShiftedWishart, trials, seed),
        6 => Ok(scm_table("fig6", M, 10, &default_grid(), trials, seed)?.meta("figure", 6)),
        _ => Err(CliError::Input(format!(
            "figures are numbered 1 to 6, got {k}"
        ))),
    }
}
