//! Deterministic tabular output.
//!
//! Every number is written in scientific notation with 17 significant digits
//! so that a value survives a text round trip bit-for-bit and identical inputs
//! give byte-identical files.

use std::fmt::Write as _;

/// 17 significant digits, scientific notation; `nan`, `inf`, `-inf` for
/// non-finite values.
pub fn format_number(x: f64) -> String {
    if x.is_nan() {
        "nan".to_string()
    } else if x.is_infinite() {
        if x > 0.0 { "inf" } else { "-inf" }.to_string()
    } else {
        format!("{x:.16e}")
    }
}

/// As [`format_number`], but non-finite values become `null`.
pub fn json_number(x: f64) -> String {
    if x.is_finite() {
        format_number(x)
    } else {
        "null".to_string()
    }
}

pub fn json_string(s: &str) -> String {
    let mut out = String::with_capacity(s.len() + 2);
    out.push('"');
    for c in s.chars() {
        match c {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            '\r' => out.push_str("\\r"),
            '\t' => out.push_str("\\t"),
            c if (c as u32) < 0x20 => {
                let _ = write!(out, "\\u{:04x}", c as u32);
            }
            c => out.push(c),
        }
    }
    out.push('"');
    out
}

pub fn json_array(values: &[f64]) -> String {
    let items: Vec<String> = values.iter().map(|&v| json_number(v)).collect();
    format!("[{}]", items.join(","))
}

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Int(i64),
    Num(f64),
    Text(String),
    Empty,
}

impl Cell {
    /// The cell as a CSV field, quoted when needed.
    pub fn csv(&self) -> String {
        match self {
            Cell::Int(i) => i.to_string(),
            Cell::Num(x) => format_number(*x),
            Cell::Text(s) => {
                if s.contains([',', '"', '\n']) {
                    format!("\"{}\"", s.replace('"', "\"\""))
                } else {
                    s.clone()
                }
            }
            Cell::Empty => String::new(),
        }
    }

    /// The cell as a JSON value, `null` for empty and non-finite cells.
    pub fn json(&self) -> String {
        match self {
            Cell::Int(i) => i.to_string(),
            Cell::Num(x) => json_number(*x),
            Cell::Text(s) => json_string(s),
            Cell::Empty => "null".to_string(),
        }
    }
}

impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        Cell::Num(x)
    }
}

impl From<usize> for Cell {
    fn from(i: usize) -> Self {
        Cell::Int(i as i64)
    }
}

impl From<&str> for Cell {
    fn from(s: &str) -> Self {
        Cell::Text(s.to_string())
    }
}

impl From<String> for Cell {
    fn from(s: String) -> Self {
        Cell::Text(s)
    }
}

/// A rectangular table with named columns and optional trailing records.
///
/// Rows shorter than the header are padded with empty cells.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
    /// Key/value pairs emitted as a `# key: value` footer in CSV and as a
    /// `footer` object in JSON.
    pub footer: Vec<(String, Cell)>,
}

impl Table {
    pub fn new<S: Into<String>>(columns: impl IntoIterator<Item = S>) -> Self {
        Table {
            columns: columns.into_iter().map(Into::into).collect(),
            rows: Vec::new(),
            footer: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert!(row.len() <= self.columns.len());
        self.rows.push(row);
    }

    pub fn push_footer(&mut self, key: impl Into<String>, value: impl Into<Cell>) {
        self.footer.push((key.into(), value.into()));
    }

    pub fn to_csv(&self) -> String {
        let mut out = self.columns.join(",");
        out.push('\n');
        for row in &self.rows {
            let cells: Vec<String> = (0..self.columns.len())
                .map(|i| row.get(i).map_or_else(String::new, Cell::csv))
                .collect();
            out.push_str(&cells.join(","));
            out.push('\n');
        }
        if !self.footer.is_empty() {
            let parts: Vec<String> = self.footer.iter().map(|(k, v)| format!("{k}={}", v.csv())).collect();
            let _ = writeln!(out, "# fit: {}", parts.join(" "));
        }
        out
    }

    /// `{"meta": …, "rows": [{col: value, …}, …], "footer": {…}}`.
    ///
    /// `meta` is a list of already-rendered key/value pairs.
    pub fn to_json(&self, meta: &[(String, Cell)]) -> String {
        let object = |pairs: &mut dyn Iterator<Item = (&str, String)>| {
            let body: Vec<String> = pairs.map(|(k, v)| format!("{}:{}", json_string(k), v)).collect();
            format!("{{{}}}", body.join(","))
        };
        let mut out = String::from("{\"meta\":");
        out.push_str(&object(&mut meta.iter().map(|(k, v)| (k.as_str(), v.json()))));
        out.push_str(",\"rows\":[");
        let rows: Vec<String> = self
            .rows
            .iter()
            .map(|row| {
                object(
                    &mut self
                        .columns
                        .iter()
                        .enumerate()
                        .map(|(i, c)| (c.as_str(), row.get(i).map_or_else(|| "null".to_string(), Cell::json))),
                )
            })
            .collect();
        out.push_str(&rows.join(",\n"));
        out.push(']');
        if !self.footer.is_empty() {
            out.push_str(",\"footer\":");
            out.push_str(&object(&mut self.footer.iter().map(|(k, v)| (k.as_str(), v.json()))));
        }
        out.push_str("}\n");
        out
    }
}
