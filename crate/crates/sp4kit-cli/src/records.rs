//! Flat output records and their text, CSV and JSON encodings.
//!
//! Reals are written as decimal strings with 15 significant digits, integer
//! matrices as row-major integer arrays.

use std::fmt;
use std::str::FromStr;

use serde_json::{Map, Value as Json};

#[derive(Clone, Debug, PartialEq)]
pub enum Value {
    Int(i128),
    Real(f64),
    Text(String),
    Ints(Vec<i64>),
    Bool(bool),
}

impl Value {
    /// The canonical cell string shared by every encoding.
    pub fn cell(&self) -> String {
        match self {
            Value::Int(i) => i.to_string(),
            Value::Real(x) => real_str(*x),
            Value::Text(s) => s.clone(),
            Value::Ints(v) => format!("[{}]", v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",")),
            Value::Bool(b) => b.to_string(),
        }
    }

    fn json(&self) -> Json {
        match self {
            Value::Int(i) => match i64::try_from(*i) {
                Ok(v) => Json::from(v),
                Err(_) => Json::String(i.to_string()),
            },
            Value::Real(x) => Json::String(real_str(*x)),
            Value::Text(s) => Json::String(s.clone()),
            Value::Ints(v) => Json::Array(v.iter().map(|&x| Json::from(x)).collect()),
            Value::Bool(b) => Json::Bool(*b),
        }
    }
}

/// `x` rounded to 15 significant digits; positional notation for moderate
/// exponents, scientific otherwise.
pub fn real_str(x: f64) -> String {
    if x.is_nan() {
        return "NaN".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if x == 0.0 {
        return "0".into();
    }
    let sci = format!("{x:.14e}");
    let exp: i32 = sci[sci.find('e').unwrap() + 1..].parse().unwrap();
    if (-4..=14).contains(&exp) {
        format!("{:.*}", (14 - exp) as usize, x)
    } else {
        sci
    }
}

/// Parses a cell written by [`real_str`].
pub fn parse_real(s: &str) -> Option<f64> {
    match s {
        "NaN" => Some(f64::NAN),
        "inf" => Some(f64::INFINITY),
        "-inf" => Some(f64::NEG_INFINITY),
        _ => f64::from_str(s).ok(),
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct Record {
    pub fields: Vec<(String, Value)>,
}

impl Record {
    pub fn new() -> Self {
        Record::default()
    }

    fn push(mut self, key: &str, v: Value) -> Self {
        self.fields.push((key.to_string(), v));
        self
    }

    pub fn int(self, key: &str, v: impl Into<i128>) -> Self {
        self.push(key, Value::Int(v.into()))
    }

    pub fn real(self, key: &str, v: f64) -> Self {
        self.push(key, Value::Real(v))
    }

    pub fn text(self, key: &str, v: impl fmt::Display) -> Self {
        self.push(key, Value::Text(v.to_string()))
    }

    pub fn ints(self, key: &str, v: &[i64]) -> Self {
        self.push(key, Value::Ints(v.to_vec()))
    }

    pub fn flag(self, key: &str, v: bool) -> Self {
        self.push(key, Value::Bool(v))
    }

    pub fn get(&self, key: &str) -> Option<&Value> {
        self.fields.iter().find(|(k, _)| k == key).map(|(_, v)| v)
    }

    pub fn cells(&self) -> Vec<(String, String)> {
        self.fields.iter().map(|(k, v)| (k.clone(), v.cell())).collect()
    }

    pub fn without(&self, key: &str) -> Record {
        Record {
            fields: self.fields.iter().filter(|(k, _)| k != key).cloned().collect(),
        }
    }
}

pub fn to_text(records: &[Record]) -> String {
    let mut out = String::new();
    for r in records {
        let line: Vec<String> = r.fields.iter().map(|(k, v)| format!("{k}={}", v.cell())).collect();
        out.push_str(&line.join("  "));
        out.push('\n');
    }
    out
}

pub fn to_json(records: &[Record]) -> String {
    let arr: Vec<Json> = records
        .iter()
        .map(|r| Json::Object(r.fields.iter().map(|(k, v)| (k.clone(), v.json())).collect::<Map<_, _>>()))
        .collect();
    let mut s = serde_json::to_string_pretty(&Json::Array(arr)).expect("records serialize");
    s.push('\n');
    s
}

pub fn to_csv(records: &[Record]) -> String {
    let mut w = csv::WriterBuilder::new().flexible(true).from_writer(vec![]);
    let mut header: Option<Vec<&str>> = None;
    for r in records {
        let keys: Vec<&str> = r.fields.iter().map(|(k, _)| k.as_str()).collect();
        if header.as_ref() != Some(&keys) {
            w.write_record(&keys).expect("in-memory write");
            header = Some(keys);
        }
        w.write_record(r.fields.iter().map(|(_, v)| v.cell())).expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("flush")).expect("utf-8")
}

/// Cells of each record in a JSON emission, in canonical form.
pub fn parse_json(s: &str) -> Result<Vec<Vec<(String, String)>>, String> {
    let v: Json = serde_json::from_str(s).map_err(|e| e.to_string())?;
    let arr = v.as_array().ok_or("top level is not an array")?;
    arr.iter()
        .map(|obj| {
            let obj = obj.as_object().ok_or("record is not an object")?;
            Ok(obj
                .iter()
                .map(|(k, v)| {
                    let cell = match v {
                        Json::String(s) => s.clone(),
                        Json::Array(a) => format!("[{}]", a.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",")),
                        other => other.to_string(),
                    };
                    (k.clone(), cell)
                })
                .collect())
        })
        .collect()
}

/// Cells of each record in a CSV emission; a repeated header starts a new block.
pub fn parse_csv(s: &str) -> Result<Vec<Vec<(String, String)>>, String> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(false).flexible(true).from_reader(s.as_bytes());
    let mut header: Option<Vec<String>> = None;
    let mut out = Vec::new();
    let mut expect_header = true;
    for row in rdr.records() {
        let row: Vec<String> = row.map_err(|e| e.to_string())?.iter().map(|c| c.to_string()).collect();
        if expect_header {
            header = Some(row);
            expect_header = false;
            continue;
        }
        let h = header.as_ref().unwrap();
        if row.len() != h.len() || &row == h {
            header = Some(row);
            continue;
        }
        out.push(h.iter().cloned().zip(row).collect());
    }
    Ok(out)
}
