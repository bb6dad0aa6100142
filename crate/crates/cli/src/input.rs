use crate::args::{ModelArg, SourceArgs};
use crate::error::CliError;
use gram_moments::spectra::{model_spectrum, spectrum_from_matrix, DEFAULT_GAP_TOL};
use gram_moments::{CorrelationMatrix, ModelTag, Spectrum};
use nalgebra::{Complex, DMatrix};
use serde::Deserialize;
use std::path::Path;

#[derive(Deserialize)]
struct SpectrumFile {
    thetas: Vec<f64>,
    m: Option<usize>,
}

#[derive(Deserialize)]
struct MatrixFile {
    re: Vec<Vec<f64>>,
    #[serde(default)]
    im: Option<Vec<Vec<f64>>>,
}

pub fn model_tag(model: ModelArg) -> ModelTag {
    match model {
        ModelArg::Bessel => ModelTag::Bessel,
        ModelArg::Randpd => ModelTag::ShiftedWishart,
    }
}

pub fn model_label(tag: ModelTag) -> &'static str {
    match tag {
        ModelTag::Bessel => "bessel",
        ModelTag::ShiftedWishart => "randpd",
        ModelTag::User => "user",
    }
}

/// A spectrum with the label of its source.
pub struct Loaded {
    pub spectrum: Spectrum,
    pub model: &'static str,
}

fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
}

fn require(v: Option<usize>, flag: &str, source: &str) -> Result<usize, CliError> {
    v.ok_or_else(|| CliError::Input(format!("--{flag} is required with --{source}")))
}

pub fn load(src: &SourceArgs, seed: u64) -> Result<Loaded, CliError> {
    let given = [
        src.model.is_some(),
        src.spectrum.is_some(),
        src.matrix.is_some(),
    ];
    if given.iter().filter(|g| **g).count() != 1 {
        return Err(CliError::Input(
            "give exactly one spectrum source: --model, --spectrum or --matrix".into(),
        ));
    }
    if let Some(model) = src.model {
        let tag = model_tag(model);
        let n = require(src.n, "n", "model")?;
        let m = require(src.m, "m", "model")?;
        return Ok(Loaded {
            spectrum: model_spectrum(tag, n, m, seed)?,
            model: model_label(tag),
        });
    }
    if src.n.is_some() {
        return Err(CliError::Input(
            "--n only applies to --model; file sources fix n".into(),
        ));
    }
    if let Some(path) = &src.spectrum {
        let file: SpectrumFile = read_json(path)?;
        let m = src.m.or(file.m).ok_or_else(|| {
            CliError::Input(format!(
                "{}: no \"m\" field and no --m given",
                path.display()
            ))
        })?;
        return Ok(Loaded {
            spectrum: Spectrum::from_unsorted(file.thetas, m)?,
            model: "user",
        });
    }
    let path = src.matrix.as_ref().expect("one source is present");
    let file: MatrixFile = read_json(path)?;
    let m = require(src.m, "m", "matrix")?;
    let n = file.re.len();
    let im = file.im.unwrap_or_else(|| vec![vec![0.0; n]; n]);
    if im.len() != n || file.re.iter().chain(&im).any(|row| row.len() != n) {
        return Err(CliError::Input(format!(
            "{}: \"re\" and \"im\" must both be {n}x{n}",
            path.display()
        )));
    }
    let entries = DMatrix::from_fn(n, n, |i, j| Complex::new(file.re[i][j], im[i][j]));
    let mat = CorrelationMatrix::new(entries, ModelTag::User)?;
    Ok(Loaded {
        spectrum: spectrum_from_matrix(&mat, m, DEFAULT_GAP_TOL)?,
        model: "user",
    })
}

/// `a..b` (inclusive) or a single integer; order 0 is dropped.
pub fn parse_orders(text: &str) -> Result<Vec<i64>, CliError> {
    let bad = || {
        CliError::Input(format!(
            "order range must look like a..b or a single integer, got '{text}'"
        ))
    };
    let (lo, hi) = match text.split_once("..") {
        Some((a, b)) => (
            a.trim().parse::<i64>().map_err(|_| bad())?,
            b.trim().parse::<i64>().map_err(|_| bad())?,
        ),
        None => {
            let v = text.trim().parse::<i64>().map_err(|_| bad())?;
            (v, v)
        }
    };
    if lo > hi {
        return Err(CliError::Input(format!("empty order range {lo}..{hi}")));
    }
    let orders: Vec<i64> = (lo..=hi).filter(|&r| r != 0).collect();
    if orders.is_empty() {
        return Err(CliError::Input("order range holds only 0".into()));
    }
    Ok(orders)
}
