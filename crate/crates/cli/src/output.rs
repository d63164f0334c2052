use clap::ValueEnum;
use serde_json::{json, Value};

use pcsamp_core::rational::{format_float, format_rational, Rational};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Table,
    Csv,
    Json,
}

/// Number rendering shared by every subcommand.
#[derive(Debug, Clone)]
pub struct Style {
    pub float: bool,
    /// Physical grid interval; positions in units of `T` are multiplied by it.
    pub t: Rational,
}

impl Style {
    pub fn num(&self, x: &Rational) -> String {
        if self.float {
            format_float(x)
        } else {
            format_rational(x)
        }
    }

    pub fn int(&self, x: i64) -> String {
        self.num(&Rational::from_integer(x.into()))
    }

    /// Exact values are JSON strings; with `--float` they become numbers.
    pub fn json(&self, x: &Rational) -> Value {
        if self.float {
            format_float(x)
                .parse::<f64>()
                .map(|v| json!(v))
                .unwrap_or(Value::Null)
        } else {
            json!(format_rational(x))
        }
    }

    pub fn phys(&self, x: &Rational) -> Rational {
        x * &self.t
    }
}

#[derive(Debug, Clone, Default)]
pub struct Table {
    pub headers: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new<S: Into<String>>(headers: impl IntoIterator<Item = S>) -> Self {
        Table {
            headers: headers.into_iter().map(Into::into).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.headers.len());
        self.rows.push(row);
    }

    fn text(&self) -> String {
        let mut widths: Vec<usize> = self.headers.iter().map(|h| h.chars().count()).collect();
        for row in &self.rows {
            for (w, cell) in widths.iter_mut().zip(row) {
                *w = (*w).max(cell.chars().count());
            }
        }
        // numbers align right, text aligns left
        let numeric: Vec<bool> = (0..widths.len())
            .map(|k| {
                self.rows.iter().all(|r| {
                    r[k].chars()
                        .all(|ch| ch.is_ascii_digit() || "-+/.e".contains(ch))
                })
            })
            .collect();
        let line = |cells: &[String]| {
            let padded: Vec<String> = cells
                .iter()
                .zip(widths.iter().zip(&numeric))
                .map(|(c, (w, num))| {
                    if *num {
                        format!("{c:>w$}")
                    } else {
                        format!("{c:<w$}")
                    }
                })
                .collect();
            padded.join("  ").trim_end().to_string()
        };
        let mut out = vec![line(&self.headers)];
        out.push(
            widths
                .iter()
                .map(|w| "-".repeat(*w))
                .collect::<Vec<_>>()
                .join("  "),
        );
        out.extend(self.rows.iter().map(|r| line(r)));
        out.join("\n")
    }

    fn csv(&self) -> String {
        let mut writer = csv::Writer::from_writer(Vec::new());
        writer.write_record(&self.headers).expect("in-memory write");
        for row in &self.rows {
            writer.write_record(row).expect("in-memory write");
        }
        String::from_utf8(writer.into_inner().expect("flush to memory")).expect("utf-8 input")
    }
}

/// What a subcommand prints: free-form lines around a table in table mode,
/// the bare table in CSV mode, and a JSON document.
#[derive(Debug, Clone)]
pub struct Output {
    pub before: Vec<String>,
    pub table: Table,
    pub after: Vec<String>,
    /// Leading table columns kept in CSV mode; `None` keeps all of them.
    pub csv_columns: Option<usize>,
    pub json: Value,
}

impl Output {
    pub fn render(&self, format: Format) -> String {
        match format {
            Format::Table => {
                let mut parts = self.before.clone();
                if !self.table.headers.is_empty() {
                    parts.push(self.table.text());
                }
                parts.extend(self.after.iter().cloned());
                parts.join("\n") + "\n"
            }
            Format::Csv => match self.csv_columns {
                Some(k) => Table {
                    headers: self.table.headers[..k].to_vec(),
                    rows: self.table.rows.iter().map(|r| r[..k].to_vec()).collect(),
                }
                .csv(),
                None => self.table.csv(),
            },
            Format::Json => serde_json::to_string_pretty(&self.json).expect("serializable") + "\n",
        }
    }
}
