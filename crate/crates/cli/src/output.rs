use serde_json::{json, Value};

use crate::commands::Report;
use crate::config::Format;

const GENERATOR: &str = concat!("phirg ", env!("CARGO_PKG_VERSION"));

pub fn to_json(r: &Report) -> Value {
    json!({
        "command": r.command.name(),
        "quantity": r.quantity,
        "inputs": Value::Object(r.inputs.clone()),
        "values": r.values,
        "provenance": {
            "generator": GENERATOR,
            "formulas": r.formulas,
        },
    })
}

pub fn to_csv(r: &Report) -> String {
    let mut out = r.header.join(",");
    out.push('\n');
    for row in &r.rows {
        out.push_str(&row.join(","));
        out.push('\n');
    }
    out
}

pub fn render(r: &Report, format: Format) -> String {
    match format {
        Format::Json => {
            let mut s = serde_json::to_string_pretty(&to_json(r)).expect("serializable report");
            s.push('\n');
            s
        }
        Format::Csv => to_csv(r),
    }
}
