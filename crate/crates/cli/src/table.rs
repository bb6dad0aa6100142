use crate::args::Format;
use serde::Serialize;
use serde_json::Value;
use std::collections::BTreeMap;
use std::fmt::Write;

pub const COLUMNS: [&str; 10] = [
    "method",
    "model",
    "n",
    "m",
    "order",
    "value",
    "std_error",
    "trials",
    "seed",
    "param",
];

/// One output line. Closed-form rows leave `std_error`, `trials` and `seed`
/// empty; `param` carries the swept quantity (prior variance, forgetting
/// factor) when there is one.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Row {
    pub method: String,
    pub model: String,
    pub n: usize,
    pub m: usize,
    pub order: Option<i64>,
    pub value: f64,
    pub std_error: Option<f64>,
    pub trials: Option<u64>,
    pub seed: Option<u64>,
    pub param: Option<f64>,
}

impl Row {
    pub fn closed(method: &str, model: &str, n: usize, m: usize, value: f64) -> Self {
        Self {
            method: method.to_string(),
            model: model.to_string(),
            n,
            m,
            order: None,
            value,
            std_error: None,
            trials: None,
            seed: None,
            param: None,
        }
    }

    pub fn simulated(
        method: &str,
        model: &str,
        n: usize,
        m: usize,
        value: f64,
        se: f64,
        trials: u64,
        seed: u64,
    ) -> Self {
        Self {
            std_error: Some(se),
            trials: Some(trials),
            seed: Some(seed),
            ..Self::closed(method, model, n, m, value)
        }
    }

    pub fn with_order(mut self, r: i64) -> Self {
        self.order = Some(r);
        self
    }

    pub fn with_param(mut self, p: f64) -> Self {
        self.param = Some(p);
        self
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Table {
    pub command: String,
    pub meta: BTreeMap<String, Value>,
    pub rows: Vec<Row>,
}

impl Table {
    pub fn new(command: &str) -> Self {
        Self {
            command: command.to_string(),
            meta: BTreeMap::new(),
            rows: Vec::new(),
        }
    }

    pub fn meta(mut self, key: &str, value: impl Into<Value>) -> Self {
        self.meta.insert(key.to_string(), value.into());
        self
    }

    pub fn render(&self, format: Format) -> String {
        match format {
            Format::Json => {
                let mut s = serde_json::to_string_pretty(self).expect("tables serialize");
                s.push('\n');
                s
            }
            Format::Csv => self.csv(),
        }
    }

    fn csv(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "# command = {}", self.command);
        for (k, v) in &self.meta {
            let _ = writeln!(out, "# {k} = {v}");
        }
        out.push_str(&COLUMNS.join(","));
        out.push('\n');
        for r in &self.rows {
            let opt_f = |v: Option<f64>| v.map(|x| format!("{x:.16e}")).unwrap_or_default();
            let opt = |v: Option<String>| v.unwrap_or_default();
            let _ = writeln!(
                out,
                "{},{},{},{},{},{:.16e},{},{},{},{}",
                r.method,
                r.model,
                r.n,
                r.m,
                opt(r.order.map(|v| v.to_string())),
                r.value,
                opt_f(r.std_error),
                opt(r.trials.map(|v| v.to_string())),
                opt(r.seed.map(|v| v.to_string())),
                opt_f(r.param),
            );
        }
        out
    }
}
