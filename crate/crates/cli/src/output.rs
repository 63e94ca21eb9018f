use std::io::Write;

use serde_json::{Map, Value};

/// Significant digits of every number the tool prints.
pub const DIGITS: usize = 12;

pub fn round_sig(x: f64) -> f64 {
    if !x.is_finite() || x == 0.0 {
        return x;
    }
    format!("{:.*e}", DIGITS - 1, x).parse().unwrap_or(x)
}

/// Rounds every float in `v`, leaving the subtrees under `keep` untouched so
/// echoed inputs round-trip exactly.
pub fn round_json(v: &mut Value, keep: &[&str]) {
    match v {
        Value::Number(n) => {
            if n.is_f64() {
                if let Some(r) = n.as_f64().and_then(|x| serde_json::Number::from_f64(round_sig(x))) {
                    *n = r;
                }
            }
        }
        Value::Array(items) => items.iter_mut().for_each(|x| round_json(x, keep)),
        Value::Object(map) => {
            for (k, x) in map.iter_mut() {
                if !keep.contains(&k.as_str()) {
                    round_json(x, keep);
                }
            }
        }
        _ => {}
    }
}

pub fn num(x: f64) -> String {
    if x.is_nan() {
        "nan".into()
    } else if x.is_infinite() {
        if x > 0.0 { "inf" } else { "-inf" }.into()
    } else {
        let r = round_sig(x);
        if r != 0.0 && !(1e-5..1e15).contains(&r.abs()) {
            format!("{r:e}")
        } else {
            format!("{r}")
        }
    }
}

pub fn opt(x: Option<f64>) -> String {
    x.map(num).unwrap_or_default()
}

/// A CSV table together with a one-line description per column.
pub struct Table {
    pub columns: Vec<(&'static str, &'static str)>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(columns: Vec<(&'static str, &'static str)>) -> Self {
        Table {
            columns,
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn write_csv(&self, out: impl Write) -> csv::Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(self.columns.iter().map(|c| c.0))?;
        for r in &self.rows {
            w.write_record(r)?;
        }
        w.flush()?;
        Ok(())
    }

    /// Column documentation as JSON: `[{"name": .., "description": ..}]`.
    pub fn schema(&self) -> Value {
        Value::Array(
            self.columns
                .iter()
                .map(|(name, description)| {
                    let mut m = Map::new();
                    m.insert("name".into(), Value::from(*name));
                    m.insert("description".into(), Value::from(*description));
                    Value::Object(m)
                })
                .collect(),
        )
    }
}

/// Flattens a JSON document into `(path, value)` rows, paths joined by `.`.
pub fn flatten(v: &Value) -> Table {
    let mut t = Table::new(vec![
        ("path", "dotted location of the value in the JSON report"),
        ("value", "the value, numbers with 12 significant digits"),
    ]);
    fn walk(v: &Value, path: String, t: &mut Table) {
        match v {
            Value::Object(m) => {
                for (k, x) in m {
                    let p = if path.is_empty() { k.clone() } else { format!("{path}.{k}") };
                    walk(x, p, t);
                }
            }
            Value::Array(items) => {
                for (i, x) in items.iter().enumerate() {
                    walk(x, format!("{path}.{i}"), t);
                }
            }
            Value::Number(n) => t.push(vec![path, n.as_f64().map(num).unwrap_or_else(|| n.to_string())]),
            Value::String(s) => t.push(vec![path, s.clone()]),
            Value::Bool(b) => t.push(vec![path, b.to_string()]),
            Value::Null => t.push(vec![path, String::new()]),
        }
    }
    walk(v, String::new(), &mut t);
    t
}
