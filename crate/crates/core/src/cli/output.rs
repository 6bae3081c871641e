//! Deterministic report serialization and atomic file output.

use std::fmt::Write as _;
use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde_json::Value;

use super::CliError;

/// Renders a JSON value with sorted keys, two-space indentation, every
/// floating-point number printed with 17 significant digits, and non-finite
/// numbers as `null` (serde already maps them to `Value::Null`).
pub fn to_canonical_json(value: &Value) -> String {
    let mut out = String::new();
    write_value(&mut out, value, 0);
    out.push('\n');
    out
}

fn write_value(out: &mut String, value: &Value, depth: usize) {
    match value {
        Value::Null => out.push_str("null"),
        Value::Bool(b) => out.push_str(if *b { "true" } else { "false" }),
        Value::Number(n) => {
            if let Some(i) = n.as_i64() {
                write!(out, "{i}").unwrap();
            } else if let Some(u) = n.as_u64() {
                write!(out, "{u}").unwrap();
            } else {
                let f = n.as_f64().unwrap_or(f64::NAN);
                if f.is_finite() {
                    write!(out, "{f:.16e}").unwrap();
                } else {
                    out.push_str("null");
                }
            }
        }
        Value::String(s) => out.push_str(&serde_json::to_string(s).expect("string serialization")),
        Value::Array(items) => {
            if items.is_empty() {
                out.push_str("[]");
                return;
            }
            out.push_str("[\n");
            for (i, item) in items.iter().enumerate() {
                indent(out, depth + 1);
                write_value(out, item, depth + 1);
                out.push_str(if i + 1 < items.len() { ",\n" } else { "\n" });
            }
            indent(out, depth);
            out.push(']');
        }
        Value::Object(map) => {
            if map.is_empty() {
                out.push_str("{}");
                return;
            }
            let mut keys: Vec<&String> = map.keys().collect();
            keys.sort();
            out.push_str("{\n");
            for (i, key) in keys.iter().enumerate() {
                indent(out, depth + 1);
                out.push_str(&serde_json::to_string(key).expect("key serialization"));
                out.push_str(": ");
                write_value(out, &map[key.as_str()], depth + 1);
                out.push_str(if i + 1 < keys.len() { ",\n" } else { "\n" });
            }
            indent(out, depth);
            out.push('}');
        }
    }
}

fn indent(out: &mut String, depth: usize) {
    for _ in 0..depth {
        out.push_str("  ");
    }
}

/// Writes `contents` to `dir/name` via a temporary file and a rename, so a
/// reader never sees a partial file.
pub fn write_atomic(dir: &Path, name: &str, contents: &[u8]) -> Result<PathBuf, CliError> {
    fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    let target = dir.join(name);
    let tmp = dir.join(format!(".{name}.{}.tmp", std::process::id()));
    let result = (|| {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(contents)?;
        f.sync_all()?;
        fs::rename(&tmp, &target)
    })();
    if let Err(e) = result {
        let _ = fs::remove_file(&tmp);
        return Err(CliError::io(&target, e));
    }
    Ok(target)
}

/// Parses a JSON input file, reporting the offending line, column and field
/// on failure.
pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T, CliError> {
    let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    let de = &mut serde_json::Deserializer::from_str(&text);
    serde_path_to_error::deserialize(de).map_err(|e| {
        let field_path = e.path().to_string();
        let inner = e.into_inner();
        let msg = strip_position(&inner.to_string()).to_string();
        let (mut line, mut column) = (inner.line(), inner.column());
        let mut field = (field_path != "." && !field_path.contains('?')).then_some(field_path);
        // tagged enums are buffered before deserialization, so serde reports
        // no position; recover it from the text
        if line == 0 {
            if let Some((l, c, key)) = locate(&text, &msg) {
                (line, column) = (l, c);
                field = field.or(key);
            }
        }
        let field = field.map(|f| format!(" (field `{f}`)")).unwrap_or_default();
        CliError::Input(format!("{}:{line}:{column}: {msg}{field}", path.display()))
    })
}

fn strip_position(msg: &str) -> &str {
    msg.find(" at line ").map_or(msg, |i| &msg[..i])
}

/// Best-effort position of the token a serde message complains about:
/// an unknown/missing field name or the literal of a mistyped value.
fn locate(text: &str, msg: &str) -> Option<(usize, usize, Option<String>)> {
    let between = |open: char, close: char| -> Option<&str> {
        let i = msg.find(open)?;
        let j = msg[i + 1..].find(close)?;
        Some(&msg[i + 1..i + 1 + j])
    };
    let needle = if msg.starts_with("unknown field") || msg.starts_with("unknown variant") {
        format!("\"{}\"", between('`', '`')?)
    } else if msg.starts_with("invalid type") || msg.starts_with("invalid value") {
        match between('"', '"') {
            Some(lit) if msg.contains("string \"") => format!("\"{lit}\""),
            _ => between('`', '`')?.to_string(),
        }
    } else {
        return None;
    };
    let offset = text.find(&needle)?;
    let line = text[..offset].matches('\n').count() + 1;
    let line_start = text[..offset].rfind('\n').map_or(0, |i| i + 1);
    let column = text[line_start..offset].chars().count() + 1;
    let before = &text[line_start..offset];
    let key = before
        .rfind("\":")
        .or_else(|| before.rfind("\" :"))
        .and_then(|end| before[..end].rfind('"').map(|start| before[start + 1..end].to_string()))
        .or_else(|| msg.starts_with("unknown field").then(|| needle.trim_matches('"').to_string()));
    Some((line, column, key))
}

/// CSV text from a header and rows of numbers (17 significant digits).
pub fn csv(header: &[&str], rows: &[Vec<f64>]) -> String {
    let mut out = header.join(",");
    out.push('\n');
    for row in rows {
        let cells: Vec<String> = row.iter().map(|v| format!("{v:.16e}")).collect();
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    #[test]
    fn canonical_formatting() {
        let v = json!({"b": 1.5, "a": [1, -2, 0.1], "c": null, "d": {}, "e": f64::NAN});
        let s = to_canonical_json(&v);
        assert!(s.starts_with("{\n  \"a\": [\n    1,\n    -2,\n    1.0000000000000001e-1\n  ],"));
        assert!(s.contains("\"b\": 1.5000000000000000e0"));
        assert!(s.contains("\"e\": null"));
        let back: Value = serde_json::from_str(&s).unwrap();
        assert_eq!(back["a"][2].as_f64(), Some(0.1));
    }

    #[test]
    fn input_diagnostics() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("p.json");
        fs::write(&path, "{\n  \"kind\": \"ellipsoid\",\n  \"a\": 1.0,\n  \"bb\": 2.0\n}").unwrap();
        let err = read_json::<crate::toric::ProfileSpec>(&path).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("p.json:4:"), "{msg}");
        assert!(msg.contains("bb"), "{msg}");

        fs::write(&path, "{\"kind\": \"lp\",\n \"p\": \"x\", \"a\": 1, \"b\": 1}").unwrap();
        let msg = read_json::<crate::toric::ProfileSpec>(&path).unwrap_err().to_string();
        assert!(msg.contains("p.json:2:7:") && msg.contains("field `p`"), "{msg}");
    }
}
