use std::fs;
use std::io::Write;
use std::path::Path;

use charpoly_cubature::cubature::{
    build_rule, forced_nodes, verify_exactness, vanishing_residual, CubatureRule, Tolerances,
};
use charpoly_cubature::families::{
    gen_chebyshev_u, gen_p, gen_q, expand_via_p, q_coeffs, scale_to_chebyshev, PolyFamily,
};
use charpoly_cubature::moments::{
    gamma_consistency, gram_closed, gram_from_moments, gram_recursion_residuals, moment_table,
    param_classify, posdef_probe, REALITY_TOL,
};
use charpoly_cubature::{q_via_determinant, BivarPoly, Error, Scalar};
use serde_json::{json, Value};

use crate::args::{FamilyArgs, Format, Kind, Output, Params, RuleArgs, SuiteArgs, VerifyArgs};
use crate::output::{render_svg, rule_csv, rule_json, read_rule_csv};

#[derive(Debug)]
pub enum CliError {
    /// exit status 2
    Usage(String),
    /// exit status 1
    Failure(String),
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Failure(format!("I/O error: {e}"))
    }
}

pub type CliResult = Result<(), CliError>;

/// Default scalar mode from `CUBATURE_EXACT` (unset means exact).
pub fn exact_mode() -> Result<bool, CliError> {
    match std::env::var("CUBATURE_EXACT") {
        Err(_) => Ok(true),
        Ok(v) if v == "1" => Ok(true),
        Ok(v) if v == "0" => Ok(false),
        Ok(v) => Err(CliError::Usage(format!("CUBATURE_EXACT must be 0 or 1, got {v:?}"))),
    }
}

fn validate(p: &Params) -> CliResult {
    if p.a.is_zero() || p.c.is_zero() {
        return Err(CliError::Usage("degenerate parameters: a and c must be nonzero".into()));
    }
    Ok(())
}

fn validate_m(m: usize) -> CliResult {
    if m == 0 {
        return Err(CliError::Usage("--m must be at least 1".into()));
    }
    Ok(())
}

fn emit(output: &Output, content: &str) -> CliResult {
    match &output.out {
        Some(path) => fs::write(path, content)?,
        None => std::io::stdout().write_all(content.as_bytes())?,
    }
    Ok(())
}

fn pretty(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("JSON values serialize");
    s.push('\n');
    s
}

fn scalar_json<S: Scalar>(v: &S) -> Value {
    let c = v.to_c64();
    json!({ "value": v.to_string(), "re": c.re, "im": c.im })
}

struct Check {
    name: &'static str,
    status: &'static str,
    detail: String,
}

fn check(name: &'static str, pass: bool, detail: String) -> Check {
    Check {
        name,
        status: if pass { "pass" } else { "fail" },
        detail,
    }
}

fn same<S: Scalar>(p: &BivarPoly<S>, q: &BivarPoly<S>) -> bool {
    p.approx_eq(q, 1e-9 * p.max_coeff_magnitude().max(1.0))
}

fn zero_residual<S: Scalar>(r: f64, scale: f64) -> bool {
    if S::EXACT {
        r == 0.0
    } else {
        r <= 1e-9 * scale.max(1.0)
    }
}

fn identity_checks<S: Scalar>(m_max: usize, a: &S, c: &S) -> Vec<Check> {
    let mut checks = Vec::new();
    let (fam, _) = gen_q(m_max, a, c);

    let mut mismatches = Vec::new();
    for m in 0..=m_max {
        for k in 0..=m {
            match q_via_determinant(m, k, a, c) {
                Ok(p) if same(&p, fam.get(m, k)) => {}
                _ => mismatches.push(format!("Q_{k}^{m}")),
            }
        }
    }
    checks.push(check(
        "determinant_vs_recurrence",
        mismatches.is_empty(),
        format!("{} mismatches {:?}", mismatches.len(), mismatches),
    ));

    let pfam = gen_p(m_max, c);
    let mut bad = 0;
    for m in 0..=m_max {
        for k in 0..=m {
            match expand_via_p(m, k, a, c, &pfam) {
                Ok(p) if same(&p, fam.get(m, k)) => {}
                _ => bad += 1,
            }
        }
    }
    checks.push(check("p_family_expansion", bad == 0, format!("{bad} mismatches")));

    let sym = fam.symmetry_residual();
    checks.push(check(
        "conjugation_symmetry",
        zero_residual::<S>(sym, 1.0),
        format!("residual {sym:e}"),
    ));

    let monic = (0..=m_max).all(|m| {
        (0..=m).all(|k| {
            let p = fam.get(m, k);
            p.degree() == Some(m as u32)
                && (p.coeff((m - k) as u32, k as u32) - S::one()).magnitude() <= if S::EXACT { 0.0 } else { 1e-12 }
        })
    });
    checks.push(check("monic_leading_term", monic, "leading monomial z^(m-k) zb^k".into()));

    match scale_to_chebyshev(&pfam, a) {
        Ok(scaled) => {
            let u = gen_chebyshev_u::<S>(m_max);
            let ok = (0..=m_max).all(|m| (0..=m).all(|k| same(scaled.get(m, k), u.get(m, k))));
            checks.push(check("chebyshev_reduction", ok, format!("scaled P-family = U for m <= {m_max}")));
        }
        Err(_) => checks.push(Check {
            name: "chebyshev_reduction",
            status: "skipped",
            detail: "c is not conj(a)^3/|a|^2".into(),
        }),
    }

    let coeffs = q_coeffs(2 * m_max + 1, a, c);
    match moment_table(2 * m_max, &coeffs) {
        Ok(mu) => {
            let grams: Vec<_> = (0..=m_max).map(|n| gram_from_moments(n, &fam, &mu)).collect::<Result<_, _>>().unwrap_or_default();
            let closed_ok = grams.len() == m_max + 1
                && grams.iter().enumerate().all(|(n, h)| {
                    let diff = h.max_abs_diff(&gram_closed(n, a, c));
                    zero_residual::<S>(diff, h.max_abs())
                });
            checks.push(check("gram_closed_vs_moments", closed_ok, format!("n <= {m_max}")));
            let mut worst: f64 = 0.0;
            let mut scale: f64 = 1.0;
            for n in 1..=m_max.min(grams.len().saturating_sub(1)) {
                scale = scale.max(grams[n].max_abs());
                if let Ok(r) = gamma_consistency(n, &coeffs, &grams) {
                    worst = worst.max(r);
                }
                if let Ok((r1, r2)) = gram_recursion_residuals(n, &coeffs, &grams) {
                    worst = worst.max(r1).max(r2);
                }
            }
            checks.push(check(
                "gram_identities",
                zero_residual::<S>(worst, scale),
                format!("max residual {worst:e}"),
            ));
        }
        Err(e) => checks.push(check("gram_closed_vs_moments", false, e.to_string())),
    }
    checks
}

fn identities_generic<S: Scalar>(args: &SuiteArgs, a: S, c: S) -> CliResult {
    let checks = identity_checks(args.m_max, &a, &c);
    let all_ok = checks.iter().all(|c| c.status != "fail");
    let regime = param_classify(&a, &c, REALITY_TOL);
    let report = json!({
        "command": "identities",
        "m_max": args.m_max,
        "a": args.params.a.to_string(),
        "c": args.params.c.to_string(),
        "exact": S::EXACT,
        "regime": regime.to_string(),
        "first_non_posdef": posdef_probe(args.m_max.max(12), &a, &c),
        "chebyshev_reduction_checked": checks.iter().any(|c| c.name == "chebyshev_reduction" && c.status != "skipped"),
        "checks": checks.iter().map(|c| json!({"name": c.name, "status": c.status, "detail": c.detail})).collect::<Vec<_>>(),
        "status": if all_ok { "pass" } else { "fail" },
    });
    emit(&args.output, &pretty(&report))?;
    if all_ok {
        Ok(())
    } else {
        Err(CliError::Failure("identity checks failed".into()))
    }
}

pub fn identities(args: &SuiteArgs) -> CliResult {
    validate(&args.params)?;
    let (a, c) = (&args.params.a, &args.params.c);
    if exact_mode()? {
        identities_generic(args, a.clone(), c.clone())
    } else {
        identities_generic(args, a.to_c64(), c.to_c64())
    }
}

fn family_output<S: Scalar>(fam: &PolyFamily<S>, kind: Kind, params: &Params, format: Format) -> Result<String, CliError> {
    match format {
        Format::Json => {
            let polys: Vec<Value> = (0..=fam.max_degree())
                .flat_map(|m| (0..=m).map(move |k| (m, k)))
                .map(|(m, k)| {
                    let p = fam.get(m, k);
                    let terms: Vec<Value> = p
                        .terms()
                        .map(|(&(j, l), v)| {
                            let mut t = scalar_json(v);
                            t["z"] = json!(j);
                            t["zb"] = json!(l);
                            t
                        })
                        .collect();
                    json!({"m": m, "k": k, "text": p.to_string(), "terms": terms})
                })
                .collect();
            Ok(pretty(&json!({
                "kind": format!("{kind:?}").to_lowercase(),
                "a": params.a.to_string(),
                "c": params.c.to_string(),
                "m_max": fam.max_degree(),
                "polys": polys,
            })))
        }
        Format::Csv => {
            let mut w = csv::Writer::from_writer(Vec::new());
            let io = |e: csv::Error| CliError::Failure(e.to_string());
            w.write_record(["m", "k", "z_exp", "zb_exp", "re", "im", "value"]).map_err(io)?;
            for m in 0..=fam.max_degree() {
                for k in 0..=m {
                    for (&(j, l), v) in fam.get(m, k).terms() {
                        let cv = v.to_c64();
                        w.write_record([
                            m.to_string(),
                            k.to_string(),
                            j.to_string(),
                            l.to_string(),
                            cv.re.to_string(),
                            cv.im.to_string(),
                            v.to_string(),
                        ])
                        .map_err(io)?;
                    }
                }
            }
            let bytes = w.into_inner().map_err(|e| CliError::Failure(e.to_string()))?;
            Ok(String::from_utf8(bytes).expect("CSV output is UTF-8"))
        }
        Format::Svg => Err(CliError::Usage("family supports json or csv".into())),
    }
}

fn family_generic<S: Scalar>(args: &FamilyArgs, a: S, c: S) -> CliResult {
    let fam = match args.kind {
        Kind::Q => gen_q(args.m_max, &a, &c).0,
        Kind::P => gen_p(args.m_max, &c),
        Kind::U => gen_chebyshev_u(args.m_max),
    };
    let out = family_output(&fam, args.kind, &args.params, args.output.format.unwrap_or(Format::Json))?;
    emit(&args.output, &out)
}

pub fn family(args: &FamilyArgs) -> CliResult {
    validate(&args.params)?;
    let (a, c) = (&args.params.a, &args.params.c);
    if exact_mode()? {
        family_generic(args, a.clone(), c.clone())
    } else {
        family_generic(args, a.to_c64(), c.to_c64())
    }
}

fn moments_generic<S: Scalar>(args: &SuiteArgs, a: S, c: S) -> CliResult {
    let d = args.m_max;
    let mu = moment_table(d, &q_coeffs(d, &a, &c)).map_err(|e| CliError::Failure(e.to_string()))?;
    let out = match args.output.format.unwrap_or(Format::Json) {
        Format::Json => {
            let mut rows = Vec::new();
            for j in 0..=d {
                for k in 0..=d - j {
                    let mut v = scalar_json(mu.get(j, k).expect("within table"));
                    v["j"] = json!(j);
                    v["k"] = json!(k);
                    rows.push(v);
                }
            }
            pretty(&json!({
                "a": args.params.a.to_string(),
                "c": args.params.c.to_string(),
                "max_degree": d,
                "exact": S::EXACT,
                "moments": rows,
            }))
        }
        Format::Csv => {
            let mut w = csv::Writer::from_writer(Vec::new());
            let io = |e: csv::Error| CliError::Failure(e.to_string());
            w.write_record(["j", "k", "re", "im", "value"]).map_err(io)?;
            for j in 0..=d {
                for k in 0..=d - j {
                    let v = mu.get(j, k).expect("within table");
                    let cv = v.to_c64();
                    w.write_record([j.to_string(), k.to_string(), cv.re.to_string(), cv.im.to_string(), v.to_string()])
                        .map_err(io)?;
                }
            }
            let bytes = w.into_inner().map_err(|e| CliError::Failure(e.to_string()))?;
            String::from_utf8(bytes).expect("CSV output is UTF-8")
        }
        Format::Svg => return Err(CliError::Usage("moments supports json or csv".into())),
    };
    emit(&args.output, &out)
}

pub fn moments(args: &SuiteArgs) -> CliResult {
    validate(&args.params)?;
    let (a, c) = (&args.params.a, &args.params.c);
    if exact_mode()? {
        moments_generic(args, a.clone(), c.clone())
    } else {
        moments_generic(args, a.to_c64(), c.to_c64())
    }
}

fn refusal(e: &Error) -> String {
    match e {
        Error::RegimeRefused { regime, first_failure } => {
            let mut s = format!("parameters are {regime}; Gaussian cubature refused");
            if let Some(n) = first_failure {
                s.push_str(&format!(" (Gram matrix H_{n} is not positive definite)"));
            }
            s
        }
        other => other.to_string(),
    }
}

fn rule_generic<S: Scalar>(m: usize, a: &S, c: &S, tol: &Tolerances, force: bool) -> Result<CubatureRule, CliError> {
    match build_rule(m, a, c, tol) {
        Ok(rule) => Ok(rule),
        Err(e) if force => {
            eprintln!("warning: {}; emitting forced nodes", refusal(&e));
            forced_nodes(m, a, c).map_err(|e| CliError::Failure(e.to_string()))
        }
        Err(e) => Err(CliError::Failure(refusal(&e))),
    }
}

fn make_rule(m: usize, params: &Params, tol: &Tolerances, force: bool) -> Result<CubatureRule, CliError> {
    validate(params)?;
    validate_m(m)?;
    if exact_mode()? {
        rule_generic(m, &params.a, &params.c, tol, force)
    } else {
        rule_generic(m, &params.a.to_c64(), &params.c.to_c64(), tol, force)
    }
}

pub fn nodes(args: &RuleArgs) -> CliResult {
    let tol = args.tol.resolve();
    let rule = make_rule(args.m, &args.params, &tol, args.force)?;
    let out = match args.output.format.unwrap_or(Format::Csv) {
        Format::Csv => rule_csv(&rule, &args.params),
        Format::Json => pretty(&rule_json(&rule, &args.params)),
        Format::Svg => render_svg(&rule),
    };
    emit(&args.output, &out)?;
    let failures = if rule.forced { Vec::new() } else { rule.failures(&tol) };
    if failures.is_empty() {
        Ok(())
    } else {
        Err(CliError::Failure(failures.join("; ")))
    }
}

pub fn plot(args: &RuleArgs) -> CliResult {
    if matches!(args.output.format, Some(f) if f != Format::Svg) {
        return Err(CliError::Usage("plot only writes SVG".into()));
    }
    let tol = args.tol.resolve();
    let rule = make_rule(args.m, &args.params, &tol, args.force)?;
    emit(&args.output, &render_svg(&rule))
}

fn recheck<S: Scalar>(m: usize, a: &S, c: &S, nodes: &[(f64, f64)], weights: &[f64]) -> Result<(f64, f64), CliError> {
    let fail = |e: Error| CliError::Failure(e.to_string());
    let mu = moment_table(2 * m - 1, &q_coeffs(2 * m, a, c)).map_err(fail)?.to_complex();
    let exactness = verify_exactness(nodes, weights, m, &mu).map_err(fail)?;
    let qfam = gen_q(m, a, c).0.to_complex();
    Ok((exactness, vanishing_residual(nodes, m, &qfam)))
}

fn verify_file(args: &VerifyArgs, path: &Path, tol: &Tolerances) -> CliResult {
    validate(&args.params)?;
    validate_m(args.m)?;
    let text = fs::read_to_string(path).map_err(|e| CliError::Usage(format!("cannot read {}: {e}", path.display())))?;
    let file = read_rule_csv(&text).map_err(CliError::Usage)?;
    let (exactness, vanishing) = if exact_mode()? {
        recheck(args.m, &args.params.a, &args.params.c, &file.nodes, &file.weights)?
    } else {
        recheck(args.m, &args.params.a.to_c64(), &args.params.c.to_c64(), &file.nodes, &file.weights)?
    };
    let sum: f64 = file.weights.iter().sum();
    let min_weight = file.weights.iter().copied().fold(f64::INFINITY, f64::min);
    let mut problems = Vec::new();
    let count = args.m * (args.m + 1) / 2;
    if file.nodes.len() != count {
        problems.push(format!("expected {count} nodes, found {}", file.nodes.len()));
    }
    if !(exactness <= tol.exactness) {
        problems.push(format!("exactness {exactness:e} exceeds {:e}", tol.exactness));
    }
    if !(min_weight > 0.0) {
        problems.push(format!("non-positive weight {min_weight:e}"));
    }
    if !(vanishing <= tol.vanishing) {
        problems.push(format!("vanishing residual {vanishing:e} exceeds {:e}", tol.vanishing));
    }
    let mut reproduced = serde_json::Map::new();
    for (key, now) in [("exactness", exactness), ("vanishing", vanishing), ("weight_sum_error", (sum - 1.0).abs())] {
        if let Some(&before) = file.meta.get(key) {
            let ok = (now - before).abs() <= 1e-12;
            if !ok {
                problems.push(format!("{key} {now:e} does not reproduce recorded {before:e}"));
            }
            reproduced.insert(key.into(), json!(ok));
        }
    }
    let report = json!({
        "command": "cubature-verify",
        "rule_file": path.display().to_string(),
        "m": args.m,
        "a": args.params.a.to_string(),
        "c": args.params.c.to_string(),
        "max_exactness_error": exactness,
        "vanishing": vanishing,
        "min_weight": min_weight,
        "weight_sum_error": (sum - 1.0).abs(),
        "reproduced": reproduced,
        "failures": problems,
        "status": if problems.is_empty() { "pass" } else { "fail" },
    });
    emit(&args.output, &pretty(&report))?;
    if problems.is_empty() {
        Ok(())
    } else {
        Err(CliError::Failure(problems.join("; ")))
    }
}

pub fn verify(args: &VerifyArgs) -> CliResult {
    let tol = args.tol.resolve();
    if let Some(path) = &args.rule {
        return verify_file(args, path, &tol);
    }
    validate(&args.params)?;
    validate_m(args.m)?;
    let built = make_rule(args.m, &args.params, &tol, false);
    let report = match &built {
        Ok(rule) => {
            let d = &rule.diagnostics;
            let failures = rule.failures(&tol);
            json!({
                "command": "cubature-verify",
                "m": rule.m,
                "a": args.params.a.to_string(),
                "c": args.params.c.to_string(),
                "nodes": rule.nodes.len(),
                "max_exactness_error": d.exactness,
                "commutator": d.commutator,
                "joint_residual": d.joint_residual,
                "min_weight": d.min_weight,
                "weight_sum_error": d.weight_sum_error,
                "weight_crosscheck": d.weight_crosscheck,
                "vanishing": d.vanishing,
                "failures": failures,
                "status": if failures.is_empty() { "pass" } else { "fail" },
            })
        }
        Err(CliError::Failure(msg)) => json!({
            "command": "cubature-verify",
            "m": args.m,
            "a": args.params.a.to_string(),
            "c": args.params.c.to_string(),
            "failures": [msg],
            "status": "fail",
        }),
        Err(CliError::Usage(msg)) => return Err(CliError::Usage(msg.clone())),
    };
    emit(&args.output, &pretty(&report))?;
    match built {
        Ok(rule) => {
            let failures = rule.failures(&tol);
            if failures.is_empty() {
                Ok(())
            } else {
                Err(CliError::Failure(failures.join("; ")))
            }
        }
        Err(e) => Err(e),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use charpoly_cubature::{Complex64, GaussRat};

    #[test]
    fn identity_suite_passes_exactly() {
        let a: GaussRat = "2".parse().unwrap();
        let c: GaussRat = "1".parse().unwrap();
        let checks = identity_checks(4, &a, &c);
        assert!(checks.iter().all(|c| c.status != "fail"));
        assert!(checks.iter().any(|c| c.name == "chebyshev_reduction" && c.status == "skipped"));
    }

    #[test]
    fn identity_suite_in_float_mode() {
        let a = Complex64::new(1.0, 0.0);
        let checks = identity_checks(5, &a, &a);
        for c in &checks {
            assert_ne!(c.status, "fail", "{}: {}", c.name, c.detail);
        }
    }
}
