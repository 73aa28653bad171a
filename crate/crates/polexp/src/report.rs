//! Deterministic report emission. The JSON writer keeps field order fixed
//! and formats every float with exactly 12 significant digits, so identical
//! inputs produce byte-identical reports.

use num_bigint::BigUint;

use crate::abelian::poly_to_string;
use crate::ct::{StratumClass, TermGrowthTable};
use crate::fit::FittedGrowth;
use crate::growth::GrowthType;
use crate::spectrum::{CombinationBound, SpectrumReport};

/// A JSON value with ordered object fields.
#[derive(Debug, Clone)]
pub enum Json {
    Null,
    Bool(bool),
    Int(i64),
    /// Arbitrary-precision non-negative integer, emitted as a bare number.
    Nat(BigUint),
    Float(f64),
    Str(String),
    Arr(Vec<Json>),
    Obj(Vec<(String, Json)>),
}

/// Fixed float formatting: 12 significant digits in scientific notation.
pub fn fmt_f64(x: f64) -> String {
    if x == x.trunc() && x.abs() < 1e15 {
        // integers render exactly; keeps (d, λ=1) entries tidy
        return format!("{:.1}", x);
    }
    format!("{:.11e}", x)
}

fn escape(s: &str, out: &mut String) {
    out.push('"');
    for c in s.chars() {
        match c {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            '\t' => out.push_str("\\t"),
            '\r' => out.push_str("\\r"),
            c if (c as u32) < 0x20 => out.push_str(&format!("\\u{:04x}", c as u32)),
            c => out.push(c),
        }
    }
    out.push('"');
}

impl Json {
    pub fn obj(fields: Vec<(&str, Json)>) -> Json {
        Json::Obj(fields.into_iter().map(|(k, v)| (k.to_string(), v)).collect())
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        self.write(&mut out, 0);
        out.push('\n');
        out
    }

    fn write(&self, out: &mut String, indent: usize) {
        match self {
            Json::Null => out.push_str("null"),
            Json::Bool(b) => out.push_str(if *b { "true" } else { "false" }),
            Json::Int(i) => out.push_str(&i.to_string()),
            Json::Nat(n) => out.push_str(&n.to_string()),
            Json::Float(x) => out.push_str(&fmt_f64(*x)),
            Json::Str(s) => escape(s, out),
            Json::Arr(items) => {
                if items.is_empty() {
                    out.push_str("[]");
                    return;
                }
                out.push('[');
                for (i, item) in items.iter().enumerate() {
                    if i > 0 {
                        out.push(',');
                    }
                    out.push('\n');
                    out.push_str(&"  ".repeat(indent + 1));
                    item.write(out, indent + 1);
                }
                out.push('\n');
                out.push_str(&"  ".repeat(indent));
                out.push(']');
            }
            Json::Obj(fields) => {
                if fields.is_empty() {
                    out.push_str("{}");
                    return;
                }
                out.push('{');
                for (i, (k, v)) in fields.iter().enumerate() {
                    if i > 0 {
                        out.push(',');
                    }
                    out.push('\n');
                    out.push_str(&"  ".repeat(indent + 1));
                    escape(k, out);
                    out.push_str(": ");
                    v.write(out, indent + 1);
                }
                out.push('\n');
                out.push_str(&"  ".repeat(indent));
                out.push('}');
            }
        }
    }
}

pub fn growth_json(g: &GrowthType) -> Json {
    let mut fields = vec![
        ("d", Json::Int(g.d as i64)),
        ("lambda", Json::Float(g.lambda)),
    ];
    if let Some(p) = &g.poly {
        fields.push(("lambda_poly", Json::Str(poly_to_string(p))));
    }
    Json::obj(fields)
}

pub fn fitted_json(f: &FittedGrowth) -> Json {
    Json::obj(vec![
        ("d", Json::Int(f.d_hat as i64)),
        ("lambda", Json::Float(f.lambda_hat)),
        ("residual", Json::Float(f.residual)),
        ("classification", Json::Str(f.classification.to_string())),
        (
            "window",
            Json::Arr(vec![
                Json::Int(f.window.0 as i64),
                Json::Int(f.window.1 as i64),
            ]),
        ),
        ("low_confidence", Json::Bool(f.low_confidence)),
        ("degenerate", Json::Bool(f.degenerate)),
    ])
}

pub fn sequence_json(seq: &[BigUint]) -> Json {
    Json::Arr(seq.iter().map(|x| Json::Nat(x.clone())).collect())
}

pub fn table_json(t: &TermGrowthTable) -> Json {
    let section = |rows: &[(String, GrowthType)]| {
        Json::Arr(
            rows.iter()
                .map(|(name, g)| {
                    Json::obj(vec![
                        ("name", Json::Str(name.clone())),
                        ("growth", growth_json(g)),
                    ])
                })
                .collect(),
        )
    };
    let strata = Json::Arr(
        t.strata
            .iter()
            .map(|s| {
                let class = match &s.class {
                    StratumClass::Eg { lambda, charpoly } => Json::obj(vec![
                        ("type", Json::Str("EG".into())),
                        ("lambda", Json::Float(*lambda)),
                        ("charpoly", Json::Str(poly_to_string(charpoly))),
                    ]),
                    StratumClass::Neg { linear, fixed } => Json::obj(vec![
                        ("type", Json::Str("NEG".into())),
                        ("linear", Json::Bool(*linear)),
                        ("fixed", Json::Bool(*fixed)),
                    ]),
                    StratumClass::Zero => Json::obj(vec![("type", Json::Str("zero".into()))]),
                };
                Json::obj(vec![
                    ("height", Json::Int(s.height as i64)),
                    ("class", class),
                    (
                        "edges",
                        Json::Arr(s.edges.iter().map(|e| Json::Str(e.clone())).collect()),
                    ),
                ])
            })
            .collect(),
    );
    Json::obj(vec![
        ("power", Json::Int(t.power as i64)),
        ("strata", strata),
        ("edges", section(&t.edges)),
        ("inps", section(&t.inps)),
        ("exceptional", section(&t.excs)),
        ("connecting", section(&t.conns)),
        ("fat_turns", section(&t.fat_turns)),
    ])
}

pub fn spectrum_json(r: &SpectrumReport) -> Json {
    Json::obj(vec![
        (
            "entries",
            Json::Arr(
                r.witnesses
                    .iter()
                    .map(|(g, ws)| {
                        Json::obj(vec![
                            ("d", Json::Int(g.d as i64)),
                            ("lambda", Json::Float(g.lambda)),
                            (
                                "witnesses",
                                Json::Arr(ws.iter().map(|w| Json::Str(w.clone())).collect()),
                            ),
                        ])
                    })
                    .collect(),
            ),
        ),
        ("classes_tested", Json::Int(r.n_classes as i64)),
        (
            "skipped",
            Json::Arr(
                r.skipped
                    .iter()
                    .map(|(w, why)| {
                        Json::obj(vec![
                            ("word", Json::Str(w.clone())),
                            ("reason", Json::Str(why.clone())),
                        ])
                    })
                    .collect(),
            ),
        ),
        ("lower_bound_only", Json::Bool(true)),
    ])
}

pub fn bound_json(b: &CombinationBound) -> Json {
    Json::obj(vec![
        (
            "entries",
            Json::Arr(b.entries.entries().iter().map(growth_json).collect()),
        ),
        ("degree_cap", Json::Int(b.degree_cap as i64)),
    ])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn deterministic_rendering() {
        let j = Json::obj(vec![
            ("name", Json::Str("x\"y".into())),
            ("lambda", Json::Float(1.618033988749895)),
            ("seq", Json::Arr(vec![Json::Int(1), Json::Int(2)])),
        ]);
        let a = j.render();
        let b = j.render();
        assert_eq!(a, b);
        assert!(a.contains("1.61803398875e0"));
        assert!(a.contains("\"x\\\"y\""));
    }

    #[test]
    fn floats_have_twelve_significant_digits() {
        assert_eq!(fmt_f64(2.618033988749895), "2.61803398875e0");
        assert_eq!(fmt_f64(1.0), "1.0");
    }
}
