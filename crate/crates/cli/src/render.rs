//! Text and JSON rendering of command results.

use std::fmt::Write as _;
use std::io::Write as _;
use std::path::Path;

use ltumatch::rational;
use serde_json::Value;

use crate::args::DisplayArgs;

/// Keys whose string values are identifiers, never numbers.
const ID_KEYS: &[&str] = &[
    "id",
    "x",
    "y",
    "x2",
    "y2",
    "workers",
    "jobs",
    "types",
    "rows",
    "cols",
    "slots",
    "kind",
    "condition",
    "command",
    "arrangement",
    "player",
    "strategy",
];

pub fn emit(display: &DisplayArgs, value: &Value) -> std::io::Result<()> {
    if let Some(path) = &display.output {
        write_exact(path, value)?;
    }
    let shown = match display.decimal {
        Some(digits) => decimalize(value, digits, false),
        None => value.clone(),
    };
    let mut text = String::new();
    if display.json {
        text = serde_json::to_string_pretty(&shown).expect("values serialize");
        text.push('\n');
    } else {
        render_text(&mut text, &shown, 0);
    }
    match std::io::stdout().lock().write_all(text.as_bytes()) {
        Err(err) if err.kind() == std::io::ErrorKind::BrokenPipe => Ok(()),
        other => other,
    }
}

fn write_exact(path: &Path, value: &Value) -> std::io::Result<()> {
    let mut text = serde_json::to_string_pretty(value).expect("values serialize");
    text.push('\n');
    std::fs::write(path, text)
}

fn decimalize(value: &Value, digits: usize, is_id: bool) -> Value {
    match value {
        Value::String(s) if !is_id => match rational::parse(s) {
            Ok(r) => Value::String(rational::to_decimal(&r, digits)),
            Err(_) => value.clone(),
        },
        Value::Array(items) => {
            Value::Array(items.iter().map(|v| decimalize(v, digits, is_id)).collect())
        }
        Value::Object(map) => Value::Object(
            map.iter()
                .map(|(k, v)| {
                    (
                        k.clone(),
                        decimalize(v, digits, ID_KEYS.contains(&k.as_str())),
                    )
                })
                .collect(),
        ),
        _ => value.clone(),
    }
}

fn is_flat(value: &Value) -> bool {
    match value {
        Value::Array(items) => items.iter().all(|v| !v.is_object() && is_flat(v)),
        Value::Object(_) => false,
        _ => true,
    }
}

fn inline(value: &Value) -> String {
    match value {
        Value::String(s) => s.clone(),
        Value::Array(items) => format!(
            "[{}]",
            items.iter().map(inline).collect::<Vec<_>>().join(", ")
        ),
        other => other.to_string(),
    }
}

fn render_text(out: &mut String, value: &Value, indent: usize) {
    let pad = "  ".repeat(indent);
    match value {
        Value::Object(map) => {
            for (key, v) in map {
                if is_flat(v) {
                    let _ = writeln!(out, "{pad}{key}: {}", inline(v));
                } else {
                    let _ = writeln!(out, "{pad}{key}:");
                    render_text(out, v, indent + 1);
                }
            }
        }
        Value::Array(items) => {
            for item in items {
                if is_flat(item) {
                    let _ = writeln!(out, "{pad}- {}", inline(item));
                } else {
                    let _ = writeln!(out, "{pad}-");
                    render_text(out, item, indent + 1);
                }
            }
        }
        other => {
            let _ = writeln!(out, "{pad}{}", inline(other));
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    #[test]
    fn decimals_skip_identifiers() {
        let v = json!({"id": "1/2", "value": "1/3", "nested": [{"x": "2", "u": "2/3"}]});
        let d = decimalize(&v, 3, false);
        assert_eq!(
            d,
            json!({"id": "1/2", "value": "0.333", "nested": [{"x": "2", "u": "0.667"}]})
        );
    }

    #[test]
    fn text_rendering_inlines_matrices() {
        let mut out = String::new();
        render_text(
            &mut out,
            &json!({"mu": [["1", "0"], ["0", "1"]], "report": {"stable": true}}),
            0,
        );
        assert_eq!(out, "mu: [[1, 0], [0, 1]]\nreport:\n  stable: true\n");
    }
}
