//! Fixed-schema CSV output.
//!
//! Doubles are written in scientific notation with 17 significant digits,
//! which is enough for every `f64` to parse back to the same bits. Missing
//! values are empty fields. Lines end in `\n`.

use serde::Serialize;

pub const HEADER: &str =
    "figure_id,M,beta,P,ebn0_db,N,a,b,power_sum,ber_analytic,ber_mc,ci_low,ci_high,bits,seed";

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CsvRow {
    pub figure_id: String,
    pub m: usize,
    pub beta: usize,
    pub p: usize,
    pub ebn0_db: f64,
    pub n: usize,
    pub a: f64,
    pub b: f64,
    pub power_sum: f64,
    pub ber_analytic: Option<f64>,
    pub ber_mc: Option<f64>,
    pub ci_low: Option<f64>,
    pub ci_high: Option<f64>,
    pub bits: Option<u64>,
    pub seed: Option<u64>,
}

pub fn format_f64(x: f64) -> String {
    format!("{x:.16e}")
}

fn opt_f64(x: Option<f64>) -> String {
    x.map(format_f64).unwrap_or_default()
}

fn opt_u64(x: Option<u64>) -> String {
    x.map(|v| v.to_string()).unwrap_or_default()
}

impl CsvRow {
    pub fn to_line(&self) -> String {
        [
            self.figure_id.clone(),
            self.m.to_string(),
            self.beta.to_string(),
            self.p.to_string(),
            format_f64(self.ebn0_db),
            self.n.to_string(),
            format_f64(self.a),
            format_f64(self.b),
            format_f64(self.power_sum),
            opt_f64(self.ber_analytic),
            opt_f64(self.ber_mc),
            opt_f64(self.ci_low),
            opt_f64(self.ci_high),
            opt_u64(self.bits),
            opt_u64(self.seed),
        ]
        .join(",")
    }
}

/// Header plus one line per row.
pub fn render(rows: &[CsvRow]) -> String {
    let mut s = String::with_capacity(64 * (rows.len() + 1));
    s.push_str(HEADER);
    s.push('\n');
    for row in rows {
        s.push_str(&row.to_line());
        s.push('\n');
    }
    s
}
