//! Rendering of command results as aligned text, CSV or JSON.

use clap::ValueEnum;
use serde_json::{json, Value};

use psl2_core::GroupCtx;

#[derive(Clone, Copy, PartialEq, Eq, Debug, ValueEnum)]
pub enum Format {
    Table,
    Json,
    Csv,
}

pub struct Doc {
    pub command: &'static str,
    pub q: Option<u64>,
    /// `(p, e, defining polynomial)` so that enc integers can be decoded.
    pub field: Option<(u64, u32, Vec<u32>)>,
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
    pub notes: Vec<String>,
    pub result: Value,
}

impl Doc {
    pub fn new(command: &'static str, ctx: Option<&GroupCtx>, header: &[&str]) -> Doc {
        Doc {
            command,
            q: ctx.map(|c| c.q()),
            field: ctx.map(|c| {
                let f = c.field();
                (f.p(), f.e(), f.defining_poly().to_vec())
            }),
            header: header.iter().map(|s| s.to_string()).collect(),
            rows: Vec::new(),
            notes: Vec::new(),
            result: Value::Null,
        }
    }

    fn field_note(&self) -> Option<String> {
        let (p, e, poly) = self.field.as_ref()?;
        let coeffs: Vec<String> = poly.iter().map(|c| c.to_string()).collect();
        Some(format!(
            "field p={p} e={e} defining polynomial coefficients (low degree first) {}; enc = sum of c_i p^i",
            coeffs.join(",")
        ))
    }

    pub fn render(&self, format: Format) -> String {
        match format {
            Format::Table => {
                let mut out = String::new();
                for n in self.field_note().iter().chain(&self.notes) {
                    out.push_str(&format!("# {n}\n"));
                }
                for row in std::iter::once(&self.header).chain(&self.rows) {
                    out.push_str(&row.join(" | "));
                    out.push('\n');
                }
                out
            }
            Format::Csv => {
                let mut w = csv::Writer::from_writer(Vec::new());
                for row in std::iter::once(&self.header).chain(&self.rows) {
                    w.write_record(row).expect("in-memory write");
                }
                String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8")
            }
            Format::Json => {
                let field = self
                    .field
                    .as_ref()
                    .map(|(p, e, poly)| json!({ "p": p, "e": e, "defining_poly": poly }));
                let doc = json!({
                    "q": self.q,
                    "command": self.command,
                    "field": field,
                    "result": self.result,
                });
                let mut s = serde_json::to_string_pretty(&doc).expect("serializable");
                s.push('\n');
                s
            }
        }
    }
}
