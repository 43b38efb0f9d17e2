//! JSON text with every float printed to 17 significant digits.
//!
//! `serde_json` prints the shortest representation that round-trips, which
//! varies in length from value to value; a fixed 17-digit mantissa keeps
//! reports diffable and round-trip exact.

use serde_json::Value;
use std::fmt::Write;

pub fn format_float(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else {
        "null".to_string()
    }
}

pub fn to_string_pretty(v: &Value) -> String {
    let mut out = String::new();
    write_value(&mut out, v, 0);
    out.push('\n');
    out
}

fn indent(out: &mut String, level: usize) {
    for _ in 0..level {
        out.push_str("  ");
    }
}

fn write_value(out: &mut String, v: &Value, level: usize) {
    match v {
        Value::Null => out.push_str("null"),
        Value::Bool(b) => out.push_str(if *b { "true" } else { "false" }),
        Value::Number(n) => {
            if let Some(u) = n.as_u64() {
                write!(out, "{u}").unwrap();
            } else if let Some(i) = n.as_i64() {
                write!(out, "{i}").unwrap();
            } else {
                out.push_str(&format_float(n.as_f64().unwrap_or(f64::NAN)));
            }
        }
        Value::String(s) => out.push_str(&serde_json::to_string(s).expect("strings serialize")),
        Value::Array(items) => {
            if items.is_empty() {
                out.push_str("[]");
                return;
            }
            let flat = items.iter().all(|x| !x.is_array() && !x.is_object());
            out.push('[');
            for (k, item) in items.iter().enumerate() {
                if k > 0 {
                    out.push(',');
                }
                if flat {
                    if k > 0 {
                        out.push(' ');
                    }
                } else {
                    out.push('\n');
                    indent(out, level + 1);
                }
                write_value(out, item, level + 1);
            }
            if !flat {
                out.push('\n');
                indent(out, level);
            }
            out.push(']');
        }
        Value::Object(map) => {
            if map.is_empty() {
                out.push_str("{}");
                return;
            }
            out.push('{');
            for (k, (key, item)) in map.iter().enumerate() {
                if k > 0 {
                    out.push(',');
                }
                out.push('\n');
                indent(out, level + 1);
                out.push_str(&serde_json::to_string(key).expect("strings serialize"));
                out.push_str(": ");
                write_value(out, item, level + 1);
            }
            out.push('\n');
            indent(out, level);
            out.push('}');
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    #[test]
    fn floats_round_trip_with_fixed_width() {
        for x in [0.1, 1.0 / 3.0, 21.478435327883737, -2.5e-300, 1e300] {
            let s = format_float(x);
            assert_eq!(s.parse::<f64>().unwrap(), x);
            let mantissa = s.split('e').next().unwrap().trim_start_matches('-');
            assert_eq!(mantissa.chars().filter(char::is_ascii_digit).count(), 17);
        }
        assert_eq!(format_float(f64::NAN), "null");
    }

    #[test]
    fn document_parses_back() {
        let v = json!({"count": 13, "values": [1.5, 2.0], "nested": [{"a": -1}], "s": "x\"y", "empty": []});
        let text = to_string_pretty(&v);
        let back: Value = serde_json::from_str(&text).unwrap();
        assert_eq!(back["count"], 13);
        assert_eq!(back["values"][1].as_f64(), Some(2.0));
        assert_eq!(back["s"], "x\"y");
        assert!(text.contains("1.5000000000000000e0"));
    }
}
