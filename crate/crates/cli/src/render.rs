//! Rendering of command results as json, csv, markdown or text.

use clap::ValueEnum;
use serde_json::Value;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Output {
    Json,
    Csv,
    Md,
    Text,
}

fn cell(v: &Value) -> String {
    match v {
        Value::Null => String::new(),
        Value::String(s) => s.clone(),
        Value::Array(a) => a.iter().map(cell).collect::<Vec<_>>().join(" "),
        Value::Object(_) => v.to_string(),
        other => other.to_string(),
    }
}

fn csv_cell(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

fn rows(v: &Value) -> Vec<&serde_json::Map<String, Value>> {
    match v {
        Value::Object(m) => vec![m],
        Value::Array(a) => a.iter().filter_map(Value::as_object).collect(),
        _ => Vec::new(),
    }
}

fn headers(rows: &[&serde_json::Map<String, Value>]) -> Vec<String> {
    let mut keys: Vec<String> = Vec::new();
    for r in rows {
        for k in r.keys() {
            if !keys.contains(k) {
                keys.push(k.clone());
            }
        }
    }
    keys
}

pub fn render(v: &Value, out: Output) -> String {
    match out {
        Output::Json => format!("{v}\n"),
        Output::Text => match v {
            Value::Object(m) => m
                .iter()
                .map(|(k, x)| format!("{k}: {}\n", cell(x)))
                .collect(),
            Value::Array(a) => a
                .iter()
                .map(|x| match x {
                    Value::Object(m) => {
                        let parts: Vec<String> =
                            m.iter().map(|(k, x)| format!("{k}={}", cell(x))).collect();
                        parts.join(" ") + "\n"
                    }
                    other => cell(other) + "\n",
                })
                .collect(),
            other => cell(other) + "\n",
        },
        Output::Csv => {
            let rs = rows(v);
            let hs = headers(&rs);
            let mut s = hs.iter().map(|h| csv_cell(h)).collect::<Vec<_>>().join(",") + "\n";
            for r in rs {
                let line: Vec<String> = hs
                    .iter()
                    .map(|h| csv_cell(&r.get(h).map(cell).unwrap_or_default()))
                    .collect();
                s += &(line.join(",") + "\n");
            }
            s
        }
        Output::Md => {
            let rs = rows(v);
            let hs = headers(&rs);
            let mut s = format!("| {} |\n", hs.join(" | "));
            s += &format!("|{}\n", "---|".repeat(hs.len()));
            for r in rs {
                let line: Vec<String> = hs
                    .iter()
                    .map(|h| {
                        let c = r.get(h).map(cell).unwrap_or_default();
                        if c.is_empty() {
                            "-".to_string()
                        } else {
                            c.replace('|', "\\|")
                        }
                    })
                    .collect();
                s += &format!("| {} |\n", line.join(" | "));
            }
            s
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    #[test]
    fn formats() {
        let v = json!([{"n": 2, "f": [2, 4], "e": null}, {"n": 3, "f": [], "e": "x,y"}]);
        assert_eq!(render(&v, Output::Csv), "n,f,e\n2,2 4,\n3,,\"x,y\"\n");
        assert_eq!(
            render(&v, Output::Md),
            "| n | f | e |\n|---|---|---|\n| 2 | 2 4 | - |\n| 3 | - | x,y |\n"
        );
        assert_eq!(render(&v, Output::Text), "n=2 f=2 4 e=\nn=3 f= e=x,y\n");
        let o = json!({"d": -3, "lambda": "gt1"});
        assert_eq!(render(&o, Output::Text), "d: -3\nlambda: gt1\n");
        assert_eq!(render(&o, Output::Json), "{\"d\":-3,\"lambda\":\"gt1\"}\n");
    }
}
