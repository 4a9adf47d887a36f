//! Tab-separated tables with a header row; values use a fixed six-decimal
//! format so repeated runs are byte-identical.

pub struct Table {
    header: Vec<String>,
    rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(header: Vec<String>) -> Self {
        Table {
            header,
            rows: Vec::new(),
        }
    }

    pub fn push_row(&mut self, label: &str, values: &[f64]) {
        let mut row = Vec::with_capacity(values.len() + 1);
        row.push(label.to_string());
        row.extend(values.iter().map(|v| format!("{v:.6}")));
        self.rows.push(row);
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        out.push_str(&self.header.join("\t"));
        out.push('\n');
        for row in &self.rows {
            out.push_str(&row.join("\t"));
            out.push('\n');
        }
        out
    }
}
