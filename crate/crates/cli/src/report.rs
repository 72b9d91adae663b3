use std::io::Write;

use serde_json::{Map, Value};

use crate::config::Format;

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Int(u64),
    Num(f64),
    Text(String),
    Bool(bool),
}

impl Cell {
    pub fn as_text(&self) -> String {
        self.render()
    }

    fn render(&self) -> String {
        match self {
            Cell::Int(v) => v.to_string(),
            Cell::Num(v) => format_num(*v),
            Cell::Text(s) => s.clone(),
            Cell::Bool(b) => b.to_string(),
        }
    }

    fn json(&self) -> Value {
        match self {
            Cell::Int(v) => Value::from(*v),
            Cell::Num(v) => serde_json::Number::from_f64(*v).map_or(Value::Null, Value::Number),
            Cell::Text(s) => Value::from(s.clone()),
            Cell::Bool(b) => Value::from(*b),
        }
    }
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Num(v)
    }
}

impl From<usize> for Cell {
    fn from(v: usize) -> Self {
        Cell::Int(v as u64)
    }
}

impl From<u64> for Cell {
    fn from(v: u64) -> Self {
        Cell::Int(v)
    }
}

impl From<bool> for Cell {
    fn from(v: bool) -> Self {
        Cell::Bool(v)
    }
}

impl From<&str> for Cell {
    fn from(v: &str) -> Self {
        Cell::Text(v.to_string())
    }
}

impl From<String> for Cell {
    fn from(v: String) -> Self {
        Cell::Text(v)
    }
}

impl From<Option<f64>> for Cell {
    fn from(v: Option<f64>) -> Self {
        Cell::Num(v.unwrap_or(f64::NAN))
    }
}

/// Integral values print without a fractional part, everything else with
/// Rust's shortest round-trip form.
pub fn format_num(v: f64) -> String {
    if v.is_finite() && v.fract() == 0.0 && v.abs() < 1e15 {
        format!("{v}")
    } else {
        format!("{v:?}")
    }
}

/// Coordinates as a compact JSON array.
pub fn vector_cell(v: &[f64]) -> Cell {
    Cell::Text(format!("[{}]", v.iter().map(|x| format_num(*x)).collect::<Vec<_>>().join(",")))
}

/// Result of one command: a table, header metadata, a human summary and the
/// list of violated invariants.
#[derive(Debug, Clone, PartialEq)]
pub struct Report {
    pub command: String,
    pub header: Vec<(String, String)>,
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<Cell>>,
    pub summary: Vec<String>,
    pub failures: Vec<String>,
}

impl Report {
    pub fn new(command: &str, columns: Vec<&'static str>) -> Self {
        Report { command: command.to_string(), header: Vec::new(), columns, rows: Vec::new(), summary: Vec::new(), failures: Vec::new() }
    }

    pub fn meta(&mut self, key: &str, value: impl ToString) {
        self.header.push((key.to_string(), value.to_string()));
    }

    pub fn row(&mut self, cells: Vec<Cell>) {
        assert_eq!(cells.len(), self.columns.len(), "row width does not match columns of {}", self.command);
        self.rows.push(cells);
    }

    pub fn note(&mut self, line: impl Into<String>) {
        self.summary.push(line.into());
    }

    pub fn fail(&mut self, invariant: impl Into<String>) {
        self.failures.push(invariant.into());
    }

    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }

    /// Appends the rows, notes and failures of `other`, which must share the columns.
    pub fn absorb(&mut self, other: Report) {
        assert_eq!(self.columns, other.columns);
        self.rows.extend(other.rows);
        self.summary.extend(other.summary);
        self.failures.extend(other.failures);
    }

    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "# command: {}", self.command)?;
        for (k, v) in &self.header {
            writeln!(w, "# {k}: {v}")?;
        }
        let mut out = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(w);
        out.write_record(&self.columns)?;
        for r in &self.rows {
            out.write_record(r.iter().map(Cell::render))?;
        }
        out.flush()
    }

    pub fn to_json(&self) -> Value {
        let header: Map<String, Value> = self.header.iter().map(|(k, v)| (k.clone(), Value::from(v.clone()))).collect();
        let rows: Vec<Value> =
            self.rows.iter().map(|r| Value::Object(self.columns.iter().zip(r).map(|(c, v)| (c.to_string(), v.json())).collect())).collect();
        let mut m = Map::new();
        m.insert("command".into(), Value::from(self.command.clone()));
        m.insert("header".into(), Value::Object(header));
        m.insert("rows".into(), Value::Array(rows));
        m.insert("failures".into(), Value::from(self.failures.clone()));
        Value::Object(m)
    }

    pub fn write<W: Write>(&self, format: Format, mut w: W) -> std::io::Result<()> {
        match format {
            Format::Csv => self.write_csv(w),
            Format::Json => {
                serde_json::to_writer_pretty(&mut w, &self.to_json())?;
                writeln!(w)
            }
        }
    }

    pub fn render(&self, format: Format) -> Vec<u8> {
        let mut buf = Vec::new();
        self.write(format, &mut buf).expect("writing to memory cannot fail");
        buf
    }

    pub fn summary_text(&self) -> String {
        let mut s = String::new();
        for line in &self.summary {
            s.push_str(line);
            s.push('\n');
        }
        if self.failures.is_empty() {
            s.push_str(&format!("{}: all checks passed\n", self.command));
        } else {
            for f in &self.failures {
                s.push_str(&format!("{}: FAILED: {f}\n", self.command));
            }
        }
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn numbers_render_deterministically() {
        assert_eq!(format_num(5.0), "5");
        assert_eq!(format_num(0.1), "0.1");
        assert_eq!(format_num(1e-300), "1e-300");
        assert_eq!(format_num(f64::NAN), "NaN");
        assert_eq!(vector_cell(&[3.0, -0.5]), Cell::Text("[3,-0.5]".into()));
    }

    #[test]
    fn csv_layout() {
        let mut r = Report::new("demo", vec!["a", "b"]);
        r.meta("seed", 7);
        r.row(vec![1usize.into(), "x,y".into()]);
        let text = String::from_utf8(r.render(Format::Csv)).unwrap();
        assert_eq!(text, "# command: demo\n# seed: 7\na,b\n1,\"x,y\"\n");
        let json = r.to_json();
        assert_eq!(json["rows"][0]["a"], 1);
    }
}
