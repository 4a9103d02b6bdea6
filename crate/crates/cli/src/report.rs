//! JSON report files. Numbers are written with 17 significant digits so a
//! report reads back to the same `f64`s; runtimes are left out so reruns
//! are byte-identical.

use isotropykit::analysis::{Status, VerificationReport};
use serde::Serialize;
use serde_json::value::RawValue;

pub const REPORT_FILE_VERSION: u32 = 1;

/// What the run was asked to do, echoed into the report.
#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct ConfigurationEcho {
    pub suite: String,
    pub trials: Option<usize>,
    #[serde(serialize_with = "ser_opt_num")]
    pub tol: Option<f64>,
    pub input: Option<String>,
    pub n: Option<usize>,
    pub m: Option<usize>,
    pub p: Option<usize>,
    pub skew: bool,
    pub unit_vectors: bool,
    pub svd: bool,
}

#[derive(Serialize)]
struct ClaimOut<'a> {
    id: &'a str,
    description: &'a str,
    status: Status,
    value: Box<RawValue>,
    tolerance: Box<RawValue>,
    seed: u64,
}

#[derive(Serialize)]
struct ReportOut<'a> {
    version: u32,
    tool_version: &'a str,
    seed: u64,
    configuration: &'a ConfigurationEcho,
    suite: &'a str,
    all_pass: bool,
    claims: Vec<ClaimOut<'a>>,
}

/// `{:.16e}` for finite values, `null` otherwise.
pub fn number(x: f64) -> Box<RawValue> {
    let s = if x.is_finite() { format!("{x:.16e}") } else { "null".to_string() };
    RawValue::from_string(s).expect("formatted float is valid JSON")
}

fn ser_opt_num<S: serde::Serializer>(x: &Option<f64>, s: S) -> Result<S::Ok, S::Error> {
    match x {
        Some(v) => number(*v).serialize(s),
        None => s.serialize_none(),
    }
}

/// Pretty-printed report with claims sorted by id.
pub fn render(report: &VerificationReport, seed: u64, config: &ConfigurationEcho) -> String {
    let mut claims: Vec<_> = report.claims.iter().collect();
    claims.sort_by(|a, b| a.id.cmp(&b.id));
    let out = ReportOut {
        version: REPORT_FILE_VERSION,
        tool_version: env!("CARGO_PKG_VERSION"),
        seed,
        configuration: config,
        suite: &report.suite,
        all_pass: report.all_pass(),
        claims: claims
            .into_iter()
            .map(|c| ClaimOut {
                id: &c.id,
                description: &c.description,
                status: c.status,
                value: number(c.value),
                tolerance: number(c.tolerance),
                seed: c.seed,
            })
            .collect(),
    };
    let mut s = serde_json::to_string_pretty(&out).expect("report serializes");
    s.push('\n');
    s
}
