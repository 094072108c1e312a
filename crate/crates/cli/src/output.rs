//! JSON reports and CSV profiles, echoed to stdout and optionally written to disk.

use std::path::PathBuf;

use anyhow::{Context, Result};
use serde_json::Value;

/// Finite numbers as JSON numbers, the rest as `"inf"`, `"-inf"` or `"nan"`.
pub fn num(x: f64) -> Value {
    if x.is_finite() {
        serde_json::Number::from_f64(x).map(Value::Number).unwrap_or(Value::Null)
    } else if x.is_nan() {
        Value::String("nan".into())
    } else if x > 0.0 {
        Value::String("inf".into())
    } else {
        Value::String("-inf".into())
    }
}

pub fn opt(x: Option<f64>) -> Value {
    x.map_or(Value::Null, num)
}

pub fn nums(xs: &[f64]) -> Value {
    Value::Array(xs.iter().map(|x| num(*x)).collect())
}

fn cell(x: f64) -> String {
    if let Some(n) = serde_json::Number::from_f64(x) {
        n.to_string()
    } else if x.is_nan() {
        "nan".into()
    } else if x > 0.0 {
        "inf".into()
    } else {
        "-inf".into()
    }
}

/// A CSV table of numbers; `None` cells stay empty.
pub struct Table {
    pub header: Vec<&'static str>,
    pub rows: Vec<Vec<Option<f64>>>,
}

impl Table {
    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(&self.header)?;
        for r in &self.rows {
            w.write_record(r.iter().map(|c| c.map(cell).unwrap_or_default()))?;
        }
        Ok(String::from_utf8(w.into_inner()?)?)
    }
}

pub struct Sink {
    pub dir: Option<PathBuf>,
}

impl Sink {
    pub fn write(&self, file: &str, text: &str) -> Result<()> {
        print!("{text}");
        if let Some(dir) = &self.dir {
            std::fs::create_dir_all(dir).with_context(|| format!("cannot create output directory {}", dir.display()))?;
            let path = dir.join(file);
            std::fs::write(&path, text).with_context(|| format!("cannot write {}", path.display()))?;
        }
        Ok(())
    }

    pub fn json(&self, name: &str, v: &Value) -> Result<()> {
        self.write(&format!("{name}.json"), &(serde_json::to_string_pretty(v)? + "\n"))
    }

    pub fn csv(&self, name: &str, t: &Table) -> Result<()> {
        self.write(&format!("{name}.csv"), &t.to_csv()?)
    }

    pub fn text(&self, name: &str, s: &str) -> Result<()> {
        self.write(&format!("{name}.txt"), s)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn non_finite_numbers_are_strings() {
        assert_eq!(num(f64::INFINITY), Value::String("inf".into()));
        assert_eq!(num(f64::NEG_INFINITY), Value::String("-inf".into()));
        assert_eq!(num(1.5), serde_json::json!(1.5));
    }

    #[test]
    fn table_cells() {
        let t = Table { header: vec!["x", "y"], rows: vec![vec![Some(1.0), None], vec![Some(f64::INFINITY), Some(0.5)]] };
        assert_eq!(t.to_csv().unwrap(), "x,y\n1.0,\ninf,0.5\n");
    }
}
