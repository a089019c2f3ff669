//! Machine-readable report rows and their CSV/JSON emission. Every row
//! carries the full input tuple; floats are rounded to 12 significant digits
//! so reruns are byte-identical.

use serde::Serialize;

use crate::numeric::fmt_sig;

#[derive(Debug, Clone, Serialize)]
pub struct RateRow {
    pub code: String,
    pub n: u32,
    pub m: usize,
    pub dist: String,
    pub eps: f64,
    pub nr_bits: u64,
    pub rate: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepRow {
    pub variant: String,
    pub n: u32,
    pub nr_bits: u64,
    pub y: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct FitSummary {
    pub variant: String,
    pub slope: f64,
    pub target_c: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct ConverseRow {
    pub gamma: f64,
    pub eps: f64,
    pub n: u32,
    pub k_bits: u64,
    pub tau_star: f64,
    pub bound: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct LaplaceRow {
    pub case: String,
    pub n: u32,
    pub numeric: f64,
    pub asymptotic: f64,
    pub rel_err: f64,
}

/// A report row that knows its CSV header and field rendering.
pub trait ReportRow {
    fn csv_header() -> &'static str;
    fn csv_fields(&self) -> Vec<String>;
    fn json_value(&self) -> serde_json::Value;
}

fn round_floats(v: serde_json::Value) -> serde_json::Value {
    match v {
        serde_json::Value::Number(nm) => {
            if let Some(f) = nm.as_f64() {
                if nm.is_f64() {
                    let rounded: f64 = fmt_sig(f).parse().unwrap_or(f);
                    return serde_json::json!(rounded);
                }
            }
            serde_json::Value::Number(nm)
        }
        serde_json::Value::Array(items) => {
            serde_json::Value::Array(items.into_iter().map(round_floats).collect())
        }
        serde_json::Value::Object(map) => {
            serde_json::Value::Object(map.into_iter().map(|(k, v)| (k, round_floats(v))).collect())
        }
        other => other,
    }
}

macro_rules! impl_report_row {
    ($ty:ty, $header:expr, [$($field:ident),+]) => {
        impl ReportRow for $ty {
            fn csv_header() -> &'static str {
                $header
            }
            fn csv_fields(&self) -> Vec<String> {
                vec![$(field_to_string(&self.$field)),+]
            }
            fn json_value(&self) -> serde_json::Value {
                round_floats(serde_json::to_value(self).expect("rows serialize"))
            }
        }
    };
}

fn field_to_string<T: FieldDisplay>(v: &T) -> String {
    v.render()
}

trait FieldDisplay {
    fn render(&self) -> String;
}

impl FieldDisplay for f64 {
    fn render(&self) -> String {
        fmt_sig(*self)
    }
}

impl FieldDisplay for u32 {
    fn render(&self) -> String {
        self.to_string()
    }
}

impl FieldDisplay for u64 {
    fn render(&self) -> String {
        self.to_string()
    }
}

impl FieldDisplay for usize {
    fn render(&self) -> String {
        self.to_string()
    }
}

impl FieldDisplay for bool {
    fn render(&self) -> String {
        self.to_string()
    }
}

impl FieldDisplay for String {
    fn render(&self) -> String {
        if self.contains(',') || self.contains('"') {
            format!("\"{}\"", self.replace('"', "\"\""))
        } else {
            self.clone()
        }
    }
}

impl_report_row!(
    RateRow,
    "code,n,m,dist,eps,nr_bits,rate",
    [code, n, m, dist, eps, nr_bits, rate]
);
impl_report_row!(SweepRow, "variant,n,nr_bits,y", [variant, n, nr_bits, y]);
impl_report_row!(
    FitSummary,
    "variant,slope,target_c,pass",
    [variant, slope, target_c, pass]
);
impl_report_row!(
    ConverseRow,
    "gamma,eps,n,k_bits,tau_star,bound",
    [gamma, eps, n, k_bits, tau_star, bound]
);
impl_report_row!(
    LaplaceRow,
    "case,n,numeric,asymptotic,rel_err",
    [case, n, numeric, asymptotic, rel_err]
);

/// Renders rows as CSV with a header line.
pub fn to_csv<R: ReportRow>(rows: &[R]) -> String {
    let mut out = String::from(R::csv_header());
    out.push('\n');
    for r in rows {
        out.push_str(&r.csv_fields().join(","));
        out.push('\n');
    }
    out
}

/// Renders rows as a JSON array of objects, floats at 12 significant digits.
pub fn to_json<R: ReportRow>(rows: &[R]) -> String {
    let items: Vec<serde_json::Value> = rows.iter().map(|r| r.json_value()).collect();
    let mut s = serde_json::to_string_pretty(&items).expect("json rows");
    s.push('\n');
    s
}

/// Distribution rendered for report rows: comma-joined probabilities.
pub fn dist_label(probs: &[f64]) -> String {
    probs
        .iter()
        .map(|&p| fmt_sig(p))
        .collect::<Vec<_>>()
        .join(",")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_is_deterministic() {
        let rows = vec![RateRow {
            code: "optimal".into(),
            n: 3,
            m: 2,
            dist: "0.8,0.2".into(),
            eps: 0.05,
            nr_bits: 2,
            rate: 2.0 / 3.0,
        }];
        let a = to_csv(&rows);
        let b = to_csv(&rows);
        assert_eq!(a, b);
        assert!(a.starts_with("code,n,m,dist,eps,nr_bits,rate\n"));
        assert!(a.contains("0.666666666667"));
        assert!(a.contains("\"0.8,0.2\""), "dist field must be quoted: {a}");
    }

    #[test]
    fn json_rounds_floats() {
        let rows = vec![SweepRow {
            variant: "type-size".into(),
            n: 512,
            nr_bits: 777,
            y: 1.0 / 3.0,
        }];
        let s = to_json(&rows);
        assert!(s.contains("0.333333333333"), "{s}");
    }
}
