//! Report assembly and byte-stable emission.
//!
//! A [`Report`] echoes the configuration that produced it, carries the
//! executed checks (name, measured value, tolerance, pass), and optionally
//! a pairing payload and a serialized group tuple. Emission is hand-rolled
//! so that identical reports serialize to identical bytes: fixed key order,
//! fixed indentation, and floats printed with 17 significant digits.

use std::collections::BTreeMap;

use crate::config::{C1Mode, Format, RunConfig};

/// Version tag stamped into every JSON report.
pub const SCHEMA_TAG: &str = "flagforms-report/1";

/// One executed check: a measured value compared against a tolerance.
#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub tol: f64,
    pub pass: bool,
}

impl Check {
    /// Records `value` against `tol`; passes iff the value is finite and at
    /// most the tolerance.
    pub fn measure(name: impl Into<String>, value: f64, tol: f64) -> Self {
        let name = name.into();
        debug_assert!(
            !name.contains([',', '"', '\n']),
            "check names must stay CSV-safe: {name:?}"
        );
        Self { name, value, tol, pass: value.is_finite() && value <= tol }
    }
}

/// The intersection-pairing payload of a `pair` or `orbit-anchor` run.
#[derive(Debug, Clone, PartialEq)]
pub struct PairingBlock {
    pub n: usize,
    pub alpha: Vec<u32>,
    /// Provenance label of the normalization constant.
    pub c1_mode: &'static str,
    pub c1_value: f64,
    /// The pairing: `c1_value` times the exact base value.
    pub result: f64,
    /// Numerator of the exact base value (the constant-free rational).
    pub exact_numerator: String,
    /// Denominator of the exact base value.
    pub exact_denominator: String,
}

/// A solved group tuple, serialized entry by entry in row-major
/// `[re, im]` pairs.
#[derive(Debug, Clone, PartialEq)]
pub struct TupleBlock {
    pub n: usize,
    pub g: usize,
    pub entries: Vec<Vec<(f64, f64)>>,
}

/// Everything a run reports.
#[derive(Debug, Clone)]
pub struct Report {
    pub config: RunConfig,
    pub pairing: Option<PairingBlock>,
    pub tuple: Option<TupleBlock>,
    pub checks: Vec<Check>,
}

impl Report {
    pub fn new(config: RunConfig) -> Self {
        Self { config, pairing: None, tuple: None, checks: Vec::new() }
    }

    pub fn all_pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    /// Serializes in the configured format.
    pub fn emit(&self) -> String {
        match self.config.format {
            Format::Json => self.emit_json(),
            Format::Csv => self.emit_csv(),
        }
    }

    /// Deterministic JSON document: schema tag, config echo, optional
    /// pairing and tuple payloads, one line per check, overall verdict.
    pub fn emit_json(&self) -> String {
        let mut s = String::new();
        s.push_str("{\n");
        push_kv(&mut s, 1, "schema", &json_string(SCHEMA_TAG), true);
        push_kv(&mut s, 1, "command", &json_string(self.config.command.label()), true);
        s.push_str("  \"config\": {\n");
        push_kv(&mut s, 2, "command", &json_string(self.config.command.label()), true);
        push_kv(&mut s, 2, "n", &self.config.n.to_string(), true);
        push_kv(&mut s, 2, "g", &self.config.g.to_string(), true);
        let alpha_text = match &self.config.alpha {
            Some(alpha) => json_u32_array(alpha),
            None => "null".to_string(),
        };
        push_kv(&mut s, 2, "alpha", &alpha_text, true);
        push_kv(&mut s, 2, "seed", &self.config.seed.to_string(), true);
        push_kv(&mut s, 2, "c1_mode", &json_string(&c1_mode_label(&self.config.c1)), true);
        push_kv(&mut s, 2, "step", &json_float(self.config.step), true);
        push_kv(&mut s, 2, "budget", &self.config.budget.to_string(), true);
        push_kv(&mut s, 2, "format", &json_string(self.config.format.label()), true);
        push_kv(&mut s, 2, "tol_overrides", &json_tol_map(&self.config.tol_overrides), false);
        s.push_str("  },\n");

        if let Some(p) = &self.pairing {
            push_kv(&mut s, 1, "n", &p.n.to_string(), true);
            push_kv(&mut s, 1, "alpha", &json_u32_array(&p.alpha), true);
            let c1 = format!(
                "{{\"mode\": {}, \"value\": {}}}",
                json_string(p.c1_mode),
                json_float(p.c1_value)
            );
            push_kv(&mut s, 1, "C1", &c1, true);
            push_kv(&mut s, 1, "result", &json_float(p.result), true);
            push_kv(&mut s, 1, "exact_numerator", &json_string(&p.exact_numerator), true);
            push_kv(&mut s, 1, "exact_denominator", &json_string(&p.exact_denominator), true);
        }

        if let Some(t) = &self.tuple {
            s.push_str("  \"tuple\": {\n");
            push_kv(&mut s, 2, "n", &t.n.to_string(), true);
            push_kv(&mut s, 2, "g", &t.g.to_string(), true);
            if t.entries.is_empty() {
                s.push_str("    \"entries\": []\n");
            } else {
                s.push_str("    \"entries\": [\n");
                for (row, entry) in t.entries.iter().enumerate() {
                    let cells: Vec<String> = entry
                        .iter()
                        .map(|(re, im)| format!("[{}, {}]", json_float(*re), json_float(*im)))
                        .collect();
                    let comma = if row + 1 < t.entries.len() { "," } else { "" };
                    s.push_str(&format!("      [{}]{comma}\n", cells.join(", ")));
                }
                s.push_str("    ]\n");
            }
            s.push_str("  },\n");
        }

        if self.checks.is_empty() {
            s.push_str("  \"checks\": [],\n");
        } else {
            s.push_str("  \"checks\": [\n");
            for (row, c) in self.checks.iter().enumerate() {
                let comma = if row + 1 < self.checks.len() { "," } else { "" };
                s.push_str(&format!(
                    "    {{\"name\": {}, \"value\": {}, \"tol\": {}, \"pass\": {}}}{comma}\n",
                    json_string(&c.name),
                    json_float(c.value),
                    json_float(c.tol),
                    c.pass
                ));
            }
            s.push_str("  ],\n");
        }
        push_kv(&mut s, 1, "pass", &self.all_pass().to_string(), false);
        s.push_str("}\n");
        s
    }

    /// Flat CSV: the header then one row per check, same float digits as
    /// the JSON emitter.
    pub fn emit_csv(&self) -> String {
        let mut s = String::from("name,value,tol,pass\n");
        for c in &self.checks {
            s.push_str(&format!(
                "{},{},{},{}\n",
                c.name,
                csv_float(c.value),
                csv_float(c.tol),
                c.pass
            ));
        }
        s
    }
}

fn push_kv(s: &mut String, depth: usize, key: &str, value: &str, comma: bool) {
    let indent = "  ".repeat(depth);
    let tail = if comma { "," } else { "" };
    s.push_str(&format!("{indent}\"{key}\": {value}{tail}\n"));
}

/// 17-significant-digit float literal; `-0.0` collapses to `0.0` and
/// non-finite values become JSON `null`.
pub fn fmt_float(x: f64) -> String {
    let x = if x == 0.0 { 0.0 } else { x };
    format!("{x:.16e}")
}

fn json_float(x: f64) -> String {
    if x.is_finite() {
        fmt_float(x)
    } else {
        "null".to_string()
    }
}

fn csv_float(x: f64) -> String {
    if x.is_finite() {
        fmt_float(x)
    } else if x.is_nan() {
        "nan".to_string()
    } else if x > 0.0 {
        "inf".to_string()
    } else {
        "-inf".to_string()
    }
}

/// Quotes and escapes a JSON string.
pub fn json_string(text: &str) -> String {
    let mut out = String::with_capacity(text.len() + 2);
    out.push('"');
    for ch in text.chars() {
        match ch {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            '\r' => out.push_str("\\r"),
            '\t' => out.push_str("\\t"),
            c if (c as u32) < 0x20 => out.push_str(&format!("\\u{:04x}", c as u32)),
            c => out.push(c),
        }
    }
    out.push('"');
    out
}

fn json_u32_array(values: &[u32]) -> String {
    let cells: Vec<String> = values.iter().map(u32::to_string).collect();
    format!("[{}]", cells.join(", "))
}

fn json_tol_map(map: &BTreeMap<String, f64>) -> String {
    if map.is_empty() {
        return "{}".to_string();
    }
    let cells: Vec<String> = map
        .iter()
        .map(|(k, v)| format!("{}: {}", json_string(k), json_float(*v)))
        .collect();
    format!("{{{}}}", cells.join(", "))
}

/// Stable echo label for the normalization-constant mode.
pub fn c1_mode_label(mode: &C1Mode) -> String {
    match mode {
        C1Mode::Unit => "unit".to_string(),
        C1Mode::Volume { volume, weights } => {
            let ws: Vec<String> = weights.iter().map(|w| fmt_float(*w)).collect();
            format!("volume:{}:{}", fmt_float(*volume), ws.join(","))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::{Command, PartialConfig};

    fn test_config() -> RunConfig {
        let mut partial = PartialConfig::default();
        partial.assign("command", "pair").unwrap();
        partial.assign("alpha", "1,0").unwrap();
        partial.finalize().unwrap()
    }

    #[test]
    fn floats_print_with_seventeen_significant_digits() {
        assert_eq!(fmt_float(std::f64::consts::TAU), "6.2831853071795862e0");
        assert_eq!(fmt_float(1.0), "1.0000000000000000e0");
        assert_eq!(fmt_float(0.25), "2.5000000000000000e-1");
        assert_eq!(fmt_float(-0.001953125), "-1.9531250000000000e-3");
        assert_eq!(fmt_float(-0.0), "0.0000000000000000e0");
    }

    #[test]
    fn json_strings_escape_specials() {
        assert_eq!(json_string("plain"), "\"plain\"");
        assert_eq!(json_string("a\"b\\c"), "\"a\\\"b\\\\c\"");
        assert_eq!(json_string("line\nbreak"), "\"line\\nbreak\"");
        assert_eq!(json_string("\u{1}"), "\"\\u0001\"");
    }

    #[test]
    fn measure_compares_value_against_tolerance() {
        assert!(Check::measure("ok", 1e-13, 1e-12).pass);
        assert!(Check::measure("edge", 1e-12, 1e-12).pass);
        assert!(!Check::measure("fail", 2e-12, 1e-12).pass);
        assert!(!Check::measure("nan", f64::NAN, 1e-12).pass);
    }

    #[test]
    fn json_report_is_byte_stable_and_parses() {
        let mut report = Report::new(test_config());
        report.pairing = Some(PairingBlock {
            n: 2,
            alpha: vec![1, 0],
            c1_mode: "user_supplied",
            c1_value: 1.0,
            result: 1.0,
            exact_numerator: "1".to_string(),
            exact_denominator: "1".to_string(),
        });
        report.checks.push(Check::measure("base_is_integer", 0.0, 0.0));
        let first = report.emit_json();
        let second = report.emit_json();
        assert_eq!(first, second);

        let doc: serde_json::Value = serde_json::from_str(&first).unwrap();
        assert_eq!(doc["schema"], SCHEMA_TAG);
        assert_eq!(doc["command"], "pair");
        assert_eq!(doc["config"]["seed"], 7);
        assert_eq!(doc["n"], 2);
        assert_eq!(doc["alpha"][0], 1);
        assert_eq!(doc["C1"]["mode"], "user_supplied");
        assert_eq!(doc["result"], 1.0);
        assert_eq!(doc["exact_numerator"], "1");
        assert_eq!(doc["checks"][0]["name"], "base_is_integer");
        assert_eq!(doc["checks"][0]["pass"], true);
        assert_eq!(doc["pass"], true);
    }

    #[test]
    fn tuple_payload_serializes_row_major_pairs() {
        let mut report = Report::new(test_config());
        report.tuple = Some(TupleBlock {
            n: 1,
            g: 1,
            entries: vec![vec![(1.0, 0.0)], vec![(0.0, -1.0)]],
        });
        let doc: serde_json::Value = serde_json::from_str(&report.emit_json()).unwrap();
        assert_eq!(doc["tuple"]["n"], 1);
        assert_eq!(doc["tuple"]["entries"][0][0][0], 1.0);
        assert_eq!(doc["tuple"]["entries"][1][0][1], -1.0);
    }

    #[test]
    fn csv_flattens_one_check_per_row() {
        let mut report = Report::new(test_config());
        report.checks.push(Check::measure("first", 0.5, 1.0));
        report.checks.push(Check::measure("second", 2.0, 1.0));
        let csv = report.emit_csv();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], "name,value,tol,pass");
        assert_eq!(lines[1], "first,5.0000000000000000e-1,1.0000000000000000e0,true");
        assert_eq!(lines[2], "second,2.0000000000000000e0,1.0000000000000000e0,false");
        assert_eq!(lines.len(), 3);
    }

    #[test]
    fn empty_check_list_is_a_valid_document() {
        let report = Report::new(test_config());
        assert_eq!(report.emit_csv(), "name,value,tol,pass\n");
        let doc: serde_json::Value = serde_json::from_str(&report.emit_json()).unwrap();
        assert_eq!(doc["checks"].as_array().unwrap().len(), 0);
        assert_eq!(doc["pass"], true);
    }

    #[test]
    fn verdict_is_the_conjunction_of_the_checks() {
        let mut report = Report::new(test_config());
        report.checks.push(Check::measure("good", 0.0, 1.0));
        assert!(report.all_pass());
        report.checks.push(Check::measure("bad", 2.0, 1.0));
        assert!(!report.all_pass());
        let doc: serde_json::Value = serde_json::from_str(&report.emit_json()).unwrap();
        assert_eq!(doc["pass"], false);
    }

    #[test]
    fn volume_mode_label_round_trips_weights() {
        let label = c1_mode_label(&C1Mode::Volume { volume: 4.0, weights: vec![1.0, -1.0] });
        assert_eq!(
            label,
            "volume:4.0000000000000000e0:1.0000000000000000e0,-1.0000000000000000e0"
        );
        assert_eq!(c1_mode_label(&C1Mode::Unit), "unit");
    }
}
