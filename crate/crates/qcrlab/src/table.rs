//! CSV tables with a commented title and unit line:
//!
//! ```text
//! # qcrlab sweep-bias
//! # bias_norm [1], bias [V], gamma_up [1/s]
//! bias_norm,bias,gamma_up
//! 0.0000000000000000e0,0.0000000000000000e0,1.2345678901234567e3
//! ```
//!
//! Values carry 17 significant digits so re-reading is exact.

#[derive(Debug, Clone, PartialEq)]
pub struct Column {
    pub name: String,
    pub unit: String,
}

impl Column {
    pub fn new(name: &str, unit: &str) -> Self {
        Self {
            name: name.into(),
            unit: unit.into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub title: String,
    pub columns: Vec<Column>,
    pub rows: Vec<Vec<f64>>,
}

pub fn format_value(v: f64) -> String {
    format!("{v:.16e}")
}

impl Table {
    pub fn new(title: &str, columns: &[(&str, &str)]) -> Self {
        Self {
            title: title.into(),
            columns: columns.iter().map(|(n, u)| Column::new(n, u)).collect(),
            rows: Vec::new(),
        }
    }

    pub fn column_index(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c.name == name)
    }

    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let i = self.column_index(name)?;
        Some(self.rows.iter().map(|r| r[i]).collect())
    }

    pub fn to_csv_string(&self) -> String {
        let mut out = format!("# {}\n# ", self.title);
        let units: Vec<String> = self.columns.iter().map(|c| format!("{} [{}]", c.name, c.unit)).collect();
        out.push_str(&units.join(", "));
        out.push('\n');
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(self.columns.iter().map(|c| c.name.as_str()))
            .expect("in-memory write");
        for row in &self.rows {
            w.write_record(row.iter().map(|v| format_value(*v))).expect("in-memory write");
        }
        out.push_str(&String::from_utf8(w.into_inner().expect("in-memory flush")).expect("ASCII output"));
        out
    }

    pub fn parse(text: &str) -> Result<Self, String> {
        let mut lines = text.lines();
        let title = lines
            .next()
            .and_then(|l| l.strip_prefix("# "))
            .ok_or("missing `# <title>` line")?
            .to_string();
        let unit_line = lines.next().and_then(|l| l.strip_prefix("# ")).ok_or("missing unit line")?;
        let mut columns = Vec::new();
        for entry in unit_line.split(", ") {
            let (name, rest) = entry.split_once(" [").ok_or_else(|| format!("bad unit entry `{entry}`"))?;
            let unit = rest.strip_suffix(']').ok_or_else(|| format!("bad unit entry `{entry}`"))?;
            columns.push(Column::new(name, unit));
        }
        let body: String = text.lines().skip(2).map(|l| format!("{l}\n")).collect();
        let mut reader = csv::ReaderBuilder::new().has_headers(true).from_reader(body.as_bytes());
        let header = reader.headers().map_err(|e| e.to_string())?.clone();
        if header.len() != columns.len() || header.iter().zip(&columns).any(|(h, c)| h != c.name) {
            return Err("header row does not match the unit line".into());
        }
        let mut rows = Vec::new();
        for (i, record) in reader.records().enumerate() {
            let record = record.map_err(|e| e.to_string())?;
            let row = record
                .iter()
                .map(|s| s.parse::<f64>().map_err(|_| format!("row {}: `{s}` is not a number", i + 1)))
                .collect::<Result<Vec<f64>, String>>()?;
            rows.push(row);
        }
        Ok(Self { title, columns, rows })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn roundtrip_keeps_bits() {
        let mut t = Table::new("demo", &[("x", "1"), ("y", "1/s")]);
        t.rows.push(vec![0.1, -1.0 / 3.0]);
        t.rows.push(vec![f64::NAN, 6.02214076e23]);
        let s = t.to_csv_string();
        let back = Table::parse(&s).unwrap();
        assert_eq!(back.to_csv_string(), s);
        assert_eq!(back.rows[0][1].to_bits(), (-1.0f64 / 3.0).to_bits());
        assert!(back.rows[1][0].is_nan());
    }

    #[test]
    fn rejects_mismatched_header() {
        let bad = "# demo\n# x [1]\ny\n1.0\n";
        assert!(Table::parse(bad).is_err());
    }
}
