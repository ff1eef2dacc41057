use std::collections::BTreeMap;
use std::fmt::Write;

use charpoly_cubature::cubature::{deltoid_boundary, CubatureRule};
use serde_json::{json, Value};

use crate::args::Params;

const CANVAS: f64 = 600.0;
const MARGIN: f64 = 40.0;

fn num(v: f64) -> Value {
    if v.is_finite() {
        json!(v)
    } else {
        Value::Null
    }
}

fn meta(rule: &CubatureRule) -> Vec<(&'static str, f64)> {
    let d = &rule.diagnostics;
    vec![
        ("exactness", d.exactness),
        ("commutator", d.commutator),
        ("joint_residual", d.joint_residual),
        ("min_weight", d.min_weight),
        ("weight_sum_error", d.weight_sum_error),
        ("vanishing", d.vanishing),
    ]
}

pub fn rule_csv(rule: &CubatureRule, params: &Params) -> String {
    let mut s = String::new();
    writeln!(s, "# m={}", rule.m).unwrap();
    writeln!(s, "# a={}", params.a).unwrap();
    writeln!(s, "# c={}", params.c).unwrap();
    writeln!(s, "# forced={}", rule.forced).unwrap();
    for (k, v) in meta(rule) {
        writeln!(s, "# {k}={v}").unwrap();
    }
    s.push_str("x,y,weight\n");
    for (&(x, y), w) in rule.nodes.iter().zip(&rule.weights) {
        writeln!(s, "{x},{y},{w}").unwrap();
    }
    s
}

pub fn rule_json(rule: &CubatureRule, params: &Params) -> Value {
    let d = &rule.diagnostics;
    let mut diag = serde_json::Map::new();
    for (k, v) in meta(rule) {
        diag.insert(k.into(), num(v));
    }
    diag.insert("weight_crosscheck".into(), num(d.weight_crosscheck));
    diag.insert("min_separation".into(), num(d.min_separation));
    diag.insert("deltoid_min".into(), d.deltoid_min.map_or(Value::Null, num));
    json!({
        "m": rule.m,
        "a": params.a.to_string(),
        "c": params.c.to_string(),
        "forced": rule.forced,
        "nodes": rule.nodes.iter().map(|&(x, y)| json!([num(x), num(y)])).collect::<Vec<_>>(),
        "weights": rule.weights.iter().map(|&w| num(w)).collect::<Vec<_>>(),
        "diagnostics": diag,
    })
}

#[derive(Debug, Default)]
pub struct RuleFile {
    pub meta: BTreeMap<String, f64>,
    pub nodes: Vec<(f64, f64)>,
    pub weights: Vec<f64>,
}

/// Reads the CSV written by [`rule_csv`].
pub fn read_rule_csv(text: &str) -> Result<RuleFile, String> {
    let mut file = RuleFile::default();
    for line in text.lines() {
        if let Some(kv) = line.strip_prefix('#') {
            if let Some((k, v)) = kv.trim().split_once('=') {
                if let Ok(v) = v.parse::<f64>() {
                    file.meta.insert(k.to_string(), v);
                }
            }
        }
    }
    let mut rdr = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .from_reader(text.as_bytes());
    let headers = rdr.headers().map_err(|e| e.to_string())?.clone();
    if headers.iter().collect::<Vec<_>>() != ["x", "y", "weight"] {
        return Err(format!("unexpected header {headers:?}"));
    }
    for rec in rdr.records() {
        let rec = rec.map_err(|e| e.to_string())?;
        let field = |i: usize| -> Result<f64, String> {
            rec[i].trim().parse::<f64>().map_err(|e| format!("bad number {:?}: {e}", &rec[i]))
        };
        file.nodes.push((field(0)?, field(1)?));
        file.weights.push(field(2)?);
    }
    Ok(file)
}

struct Frame {
    cx: f64,
    cy: f64,
    scale: f64,
}

impl Frame {
    // Centred on the node bounding box; `extra` points only widen the scale.
    fn fit(nodes: &[(f64, f64)], extra: &[(f64, f64)]) -> Self {
        let finite = |p: &&(f64, f64)| p.0.is_finite() && p.1.is_finite();
        let (mut x0, mut x1, mut y0, mut y1) = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
        for &(x, y) in nodes.iter().filter(finite) {
            x0 = x0.min(x);
            x1 = x1.max(x);
            y0 = y0.min(y);
            y1 = y1.max(y);
        }
        let (cx, cy) = if x0 <= x1 { ((x0 + x1) / 2.0, (y0 + y1) / 2.0) } else { (0.0, 0.0) };
        let half = nodes
            .iter()
            .chain(extra)
            .filter(finite)
            .map(|&(x, y)| (x - cx).abs().max((y - cy).abs()))
            .fold(0.0, f64::max);
        let scale = if half > 0.0 { (CANVAS / 2.0 - MARGIN) / half } else { 1.0 };
        Frame { cx, cy, scale }
    }

    fn map(&self, (x, y): (f64, f64)) -> (f64, f64) {
        (
            CANVAS / 2.0 + (x - self.cx) * self.scale,
            CANVAS / 2.0 - (y - self.cy) * self.scale,
        )
    }
}

// Deterministic output: fixed precision, no timestamps.
pub fn render_svg(rule: &CubatureRule) -> String {
    let boundary = if rule.a == rule.c {
        Some(deltoid_boundary(rule.c, 720))
    } else {
        None
    };
    let frame = Frame::fit(&rule.nodes, boundary.as_deref().unwrap_or(&[]));
    let wmax = rule.weights.iter().copied().filter(|w| w.is_finite()).fold(0.0, f64::max);

    let mut s = String::new();
    writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{CANVAS}" height="{CANVAS}" viewBox="0 0 {CANVAS} {CANVAS}">"#
    )
    .unwrap();
    writeln!(s, r#"<rect width="{CANVAS}" height="{CANVAS}" fill="white"/>"#).unwrap();
    if let Some(b) = &boundary {
        let pts: Vec<String> = b
            .iter()
            .map(|&p| {
                let (u, v) = frame.map(p);
                format!("{u:.3},{v:.3}")
            })
            .collect();
        writeln!(
            s,
            r#"<polyline class="boundary" fill="none" stroke="gray" stroke-width="1" points="{}"/>"#,
            pts.join(" ")
        )
        .unwrap();
    }
    for (&p, &w) in rule.nodes.iter().zip(&rule.weights) {
        let (u, v) = frame.map(p);
        let r = if wmax > 0.0 && w.is_finite() && w > 0.0 {
            2.0 + 4.0 * (w / wmax).sqrt()
        } else {
            3.0
        };
        writeln!(s, r#"<circle cx="{u:.3}" cy="{v:.3}" r="{r:.3}" fill="steelblue"/>"#).unwrap();
    }
    s.push_str("</svg>\n");
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use charpoly_cubature::cubature::Diagnostics;
    use charpoly_cubature::Complex64;

    fn rule(nodes: Vec<(f64, f64)>, weights: Vec<f64>) -> CubatureRule {
        CubatureRule {
            m: 2,
            a: Complex64::new(1.0, 0.0),
            c: Complex64::new(1.0, 0.0),
            nodes,
            weights,
            forced: false,
            diagnostics: Diagnostics::default(),
        }
    }

    #[test]
    fn csv_round_trip() {
        let params = Params {
            a: "1".parse().unwrap(),
            c: "1".parse().unwrap(),
        };
        let r = rule(vec![(-0.5, 0.25), (1.0 / 3.0, -2.0)], vec![0.1, 0.9]);
        let back = read_rule_csv(&rule_csv(&r, &params)).unwrap();
        assert_eq!(back.nodes, r.nodes);
        assert_eq!(back.weights, r.weights);
        assert_eq!(back.meta["m"], 2.0);
    }

    #[test]
    fn single_node_lands_at_centre() {
        let svg = render_svg(&rule(vec![(0.0, 0.0)], vec![1.0]));
        assert!(svg.contains("<polyline"));
        assert!(svg.contains(r#"cx="300.000" cy="300.000""#));
    }

    #[test]
    fn json_writes_nan_as_null() {
        let params = Params {
            a: "1".parse().unwrap(),
            c: "1".parse().unwrap(),
        };
        let r = rule(vec![(0.0, 0.0)], vec![f64::NAN]);
        assert_eq!(rule_json(&r, &params)["weights"][0], Value::Null);
    }
}
