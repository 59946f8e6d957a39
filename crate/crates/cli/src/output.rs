//! Builds the JSON and the human-readable rendering of a result side by side
//! so the two never drift apart. Key order is insertion order in the text and
//! sorted in the JSON; both are deterministic.

use std::fmt::Write as _;

use serde_json::{json, Map, Value};
use usd_kit::{ComplexMatrix, C64};

use crate::formats::{matrix_json, vector_json};

#[derive(Debug, Default)]
pub struct Out {
    json: Map<String, Value>,
    lines: Vec<String>,
}

fn real(x: f64) -> String {
    format!("{x:.10}")
}

fn complex(z: C64) -> String {
    format!("{:.10}{:+.10}i", z.re, z.im)
}

impl Out {
    pub fn new() -> Self {
        Out::default()
    }

    pub fn str(mut self, key: &str, v: &str) -> Self {
        self.json.insert(key.into(), json!(v));
        self.lines.push(format!("{key}: {v}"));
        self
    }

    pub fn num(mut self, key: &str, v: f64) -> Self {
        self.json.insert(key.into(), json!(v));
        self.lines.push(format!("{key}: {}", real(v)));
        self
    }

    pub fn int(mut self, key: &str, v: u64) -> Self {
        self.json.insert(key.into(), json!(v));
        self.lines.push(format!("{key}: {v}"));
        self
    }

    pub fn flag(mut self, key: &str, v: bool) -> Self {
        self.json.insert(key.into(), json!(v));
        self.lines.push(format!("{key}: {v}"));
        self
    }

    pub fn reals(mut self, key: &str, v: &[f64]) -> Self {
        self.json.insert(key.into(), json!(v));
        let cells: Vec<String> = v.iter().map(|&x| real(x)).collect();
        self.lines.push(format!("{key}: {}", cells.join("  ")));
        self
    }

    pub fn real_rows(mut self, key: &str, rows: &[Vec<f64>]) -> Self {
        self.json.insert(key.into(), json!(rows));
        self.lines.push(format!("{key}:"));
        for r in rows {
            let cells: Vec<String> = r.iter().map(|&x| real(x)).collect();
            self.lines.push(format!("  {}", cells.join("  ")));
        }
        self
    }

    pub fn counts(mut self, key: &str, rows: &[Vec<u64>]) -> Self {
        self.json.insert(key.into(), json!(rows));
        self.lines.push(format!("{key}:"));
        for r in rows {
            let cells: Vec<String> = r.iter().map(|c| format!("{c:>10}")).collect();
            self.lines.push(format!("  {}", cells.join(" ")));
        }
        self
    }

    pub fn complex(mut self, key: &str, z: C64) -> Self {
        self.json.insert(key.into(), json!([z.re, z.im]));
        self.lines.push(format!("{key}: {}", complex(z)));
        self
    }

    /// A list of complex vectors, one per line.
    pub fn vectors(mut self, key: &str, vs: &[Vec<C64>]) -> Self {
        self.json
            .insert(key.into(), Value::Array(vs.iter().map(|v| vector_json(v)).collect()));
        self.lines.push(format!("{key}:"));
        for (i, v) in vs.iter().enumerate() {
            let cells: Vec<String> = v.iter().map(|&z| complex(z)).collect();
            self.lines.push(format!("  [{}] {}", i + 1, cells.join("  ")));
        }
        self
    }

    pub fn matrix(mut self, key: &str, m: &ComplexMatrix) -> Self {
        self.json.insert(key.into(), matrix_json(m));
        self.lines.push(format!("{key}: {}x{}", m.rows(), m.cols()));
        for r in 0..m.rows() {
            let cells: Vec<String> = m.row(r).into_iter().map(complex).collect();
            self.lines.push(format!("  {}", cells.join("  ")));
        }
        self
    }

    pub fn strings(mut self, key: &str, v: &[String]) -> Self {
        self.json.insert(key.into(), json!(v));
        self.lines.push(format!("{key}:"));
        for s in v {
            self.lines.push(format!("  - {s}"));
        }
        self
    }

    pub fn section(mut self, key: &str, inner: Out) -> Self {
        self.json.insert(key.into(), Value::Object(inner.json));
        self.lines.push(format!("[{key}]"));
        self.lines.extend(inner.lines.into_iter().map(|l| format!("  {l}")));
        self
    }

    /// A list of nested records, numbered from 1 in the text.
    pub fn records(mut self, key: &str, items: Vec<Out>) -> Self {
        let mut arr = Vec::with_capacity(items.len());
        self.lines.push(format!("[{key}]"));
        for (i, item) in items.into_iter().enumerate() {
            self.lines.push(format!("  #{}", i + 1));
            self.lines.extend(item.lines.iter().map(|l| format!("    {l}")));
            arr.push(Value::Object(item.json));
        }
        self.json.insert(key.into(), Value::Array(arr));
        self
    }

    pub fn json(&self) -> Value {
        Value::Object(self.json.clone())
    }

    pub fn text(&self) -> String {
        let mut s = String::new();
        for l in &self.lines {
            let _ = writeln!(s, "{l}");
        }
        s
    }

    pub fn render(&self, as_json: bool) -> String {
        if as_json {
            let mut s = serde_json::to_string_pretty(&self.json()).expect("plain data serializes");
            s.push('\n');
            s
        } else {
            self.text()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn json_and_text_carry_the_same_keys() {
        let out = Out::new()
            .num("p", 0.4)
            .int("n", 3)
            .section("inner", Out::new().flag("ok", true));
        let j = out.json();
        assert_eq!(j["p"], json!(0.4));
        assert_eq!(j["inner"]["ok"], json!(true));
        let t = out.text();
        assert!(t.contains("p: 0.4000000000"));
        assert!(t.contains("[inner]\n  ok: true"));
    }
}
