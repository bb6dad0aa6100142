use crate::args::{AppArgs, AsymptoticArgs, LmmseArgs, McArgs, MomentsArgs, ScmArgs, Series};
use crate::error::CliError;
use crate::input::{load, parse_orders, Loaded};
use crate::table::{Row, Table};
use gram_moments::apps::{blue_mse, lmmse_mse_high_snr, lmmse_mse_low_snr, NoiseModel};
use gram_moments::oracle::{mc_application_metric, AppMetric};
use gram_moments::scm::{default_grid, optimize_lambda, weight_spectrum, ScmConfig};
use gram_moments::{EngineKind, Error, McConfig, MethodContext, MethodRegistry};
use serde_json::json;

fn moment_table(
    command: &str,
    loaded: &Loaded,
    method: &str,
    orders: &[i64],
    ctx: &MethodContext,
) -> Result<Table, CliError> {
    let registry = MethodRegistry::with_defaults();
    let method = registry.get(method)?;
    let s = &loaded.spectrum;
    let mut table = Table::new(command)
        .meta("mu0", 1)
        .meta("p", s.p())
        .meta("method", method.name());
    for est in method.moments(s, orders, ctx)? {
        let row = match (est.std_error, est.trials) {
            (Some(se), Some(trials)) => Row::simulated(
                method.name(),
                loaded.model,
                s.n(),
                s.m(),
                est.value,
                se,
                trials,
                ctx.seed,
            ),
            _ => Row::closed(method.name(), loaded.model, s.n(), s.m(), est.value),
        };
        table.rows.push(row.with_order(est.order));
    }
    Ok(table)
}

pub fn moments(a: &MomentsArgs) -> Result<Table, CliError> {
    let loaded = load(&a.source, a.output.seed)?;
    let ctx = MethodContext {
        trials: a.trials,
        seed: a.output.seed,
        workers: None,
    };
    moment_table(
        "moments",
        &loaded,
        &a.method,
        &parse_orders(&a.orders)?,
        &ctx,
    )
}

pub fn asymptotic(a: &AsymptoticArgs) -> Result<Table, CliError> {
    let loaded = load(&a.source, a.output.seed)?;
    let ctx = MethodContext {
        seed: a.output.seed,
        ..MethodContext::default()
    };
    moment_table(
        "asymptotic",
        &loaded,
        "asymptotic",
        &parse_orders(&a.orders)?,
        &ctx,
    )
}

pub fn mc(a: &McArgs) -> Result<Table, CliError> {
    let loaded = load(&a.source, a.output.seed)?;
    let orders = match (&a.order, &a.orders) {
        (Some(r), None) => parse_orders(&r.to_string())?,
        (None, Some(text)) => parse_orders(text)?,
        _ => return Err(CliError::Input("give --order or --orders".into())),
    };
    let ctx = MethodContext {
        trials: a.trials,
        seed: a.output.seed,
        workers: None,
    };
    moment_table("mc", &loaded, "monte-carlo", &orders, &ctx)
}

fn noise_model(a: &AppArgs) -> Result<(NoiseModel, &'static str), CliError> {
    let loaded = load(&a.source, a.output.seed)?;
    let s = &loaded.spectrum;
    Ok((
        NoiseModel::new(s.thetas(), s.m(), EngineKind::DividedDifference)?,
        loaded.model,
    ))
}

/// BLUE rows for one noise model: the closed form and, when `trials > 0`,
/// the simulated error.
pub fn blue_rows(
    nm: &NoiseModel,
    model: &str,
    trials: u64,
    seed: u64,
) -> Result<Vec<Row>, CliError> {
    let (n, m) = (nm.lambda().n(), nm.lambda().m());
    let mut rows = vec![Row::closed("blue-exact", model, n, m, blue_mse(nm)?)];
    if trials > 0 {
        let est =
            mc_application_metric(nm.lambda(), &AppMetric::Blue, &McConfig::new(trials, seed))?;
        rows.push(Row::simulated(
            "blue-mc",
            model,
            n,
            m,
            est.mean,
            est.std_error,
            trials,
            seed,
        ));
    }
    Ok(rows)
}

pub fn blue(a: &AppArgs) -> Result<Table, CliError> {
    let (nm, model) = noise_model(a)?;
    let mut table = Table::new("blue");
    table.rows = blue_rows(&nm, model, a.trials, a.output.seed)?;
    Ok(table)
}

/// Series settings shared by every prior variance of one run.
pub struct LmmsePlan {
    pub series: Series,
    pub high_order: Option<usize>,
    pub low_order: usize,
    pub trials: u64,
    pub seed: u64,
}

/// LMMSE rows at one prior variance. Under [`Series::Both`] a low-SNR
/// series that has stopped shrinking is left out and reported through
/// `skipped`.
pub fn lmmse_rows(
    nm: &NoiseModel,
    model: &str,
    sigma_x2: f64,
    plan: &LmmsePlan,
    skipped: &mut Vec<serde_json::Value>,
) -> Result<Vec<Row>, CliError> {
    let (n, m) = (nm.lambda().n(), nm.lambda().m());
    let mut rows = Vec::new();
    if plan.series != Series::Low {
        let l = plan.high_order.unwrap_or(nm.lambda().p() - 1);
        let high = lmmse_mse_high_snr(nm, sigma_x2, l)?;
        rows.push(Row::closed("lmmse-high-snr", model, n, m, high.value).with_param(sigma_x2));
    }
    if plan.series != Series::High {
        match lmmse_mse_low_snr(nm, sigma_x2, plan.low_order) {
            Ok(low) => {
                rows.push(Row::closed("lmmse-low-snr", model, n, m, low.value).with_param(sigma_x2))
            }
            Err(Error::ConvergenceWarning {
                order,
                previous,
                last,
            }) if plan.series == Series::Both => skipped.push(json!({
                "sigma_x2": sigma_x2,
                "series": "lmmse-low-snr",
                "order": order,
                "previous_term": previous,
                "last_term": last,
            })),
            Err(e) => return Err(e.into()),
        }
    }
    if plan.trials > 0 {
        let cfg = McConfig::new(plan.trials, plan.seed);
        let est = mc_application_metric(nm.lambda(), &AppMetric::Lmmse { sigma_x2 }, &cfg)?;
        rows.push(
            Row::simulated(
                "lmmse-mc",
                model,
                n,
                m,
                est.mean,
                est.std_error,
                plan.trials,
                plan.seed,
            )
            .with_param(sigma_x2),
        );
    }
    Ok(rows)
}

pub fn lmmse(a: &LmmseArgs) -> Result<Table, CliError> {
    let (nm, model) = noise_model(&a.app)?;
    let plan = LmmsePlan {
        series: a.series,
        high_order: a.high_order,
        low_order: a.low_order,
        trials: a.app.trials,
        seed: a.app.output.seed,
    };
    let mut skipped = Vec::new();
    let mut rows = Vec::new();
    for &s2 in &a.sigma_x2 {
        rows.extend(lmmse_rows(&nm, model, s2, &plan, &mut skipped)?);
    }
    let mut table = Table::new("lmmse").meta("skipped", skipped);
    table.rows = rows;
    Ok(table)
}

/// Loss curve rows plus optional simulated losses, with the minimizer and
/// the rejected factors in the metadata.
pub fn scm_table(
    command: &str,
    m: usize,
    n: usize,
    grid: &[f64],
    trials: u64,
    seed: u64,
) -> Result<Table, CliError> {
    let curve = optimize_lambda(m, n, grid, EngineKind::DividedDifference)?;
    let rejected: Vec<_> = curve
        .rejected
        .iter()
        .map(|(l, e)| json!({"lambda": l, "kind": e.kind(), "message": e.to_string()}))
        .collect();
    let mut table = Table::new(command)
        .meta("lambda_star", curve.lambda_star)
        .meta("loss_star", curve.loss_star)
        .meta("rejected", rejected);
    for &(lambda, loss) in &curve.grid {
        table
            .rows
            .push(Row::closed("scm-exact", "weights", n, m, loss).with_param(lambda));
    }
    if trials > 0 {
        for &(lambda, _) in &curve.grid {
            let spectrum = weight_spectrum(&ScmConfig::new(m, n, lambda)?)?;
            let est = mc_application_metric(
                &spectrum,
                &AppMetric::Scm { r: None },
                &McConfig::new(trials, seed),
            )?;
            table.rows.push(
                Row::simulated(
                    "scm-mc",
                    "weights",
                    n,
                    m,
                    est.mean,
                    est.std_error,
                    trials,
                    seed,
                )
                .with_param(lambda),
            );
        }
    }
    Ok(table)
}

pub fn scm(a: &ScmArgs) -> Result<Table, CliError> {
    let grid = if a.lambda.is_empty() {
        default_grid()
    } else {
        a.lambda.clone()
    };
    scm_table("scm", a.m, a.n, &grid, a.trials, a.output.seed)
}
