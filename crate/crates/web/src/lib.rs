//! wasm-bindgen entry points for the browser demo in `www/`.
//!
//! Every function takes plain strings and returns a JSON string; failures
//! come back as `{"error": "..."}` so the page never has to catch.

use qtl_core::cuspidal::{self, build_module, dump_symbols};
use qtl_core::expr::{self, ParsedElement};
use qtl_core::{gtilde, liealg, matrep, repn, suites};
use qtl_core::{CycloNum, Error, ExactMatrix, ExpVec, Result, TorusSpec};
use serde_json::{json, Value};
use wasm_bindgen::prelude::*;

fn respond(r: Result<Value>) -> String {
    match r {
        Ok(v) => v.to_string(),
        Err(e) => json!({ "error": e.to_string() }).to_string(),
    }
}

/// A preset name (`e1`, `e2`, `e3`, `comm2`) or a torus spec in JSON.
fn torus(spec: &str) -> Result<TorusSpec> {
    let spec = spec.trim();
    if spec.starts_with('{') {
        TorusSpec::from_json(spec)
    } else {
        suites::preset(spec)
    }
}

fn ints(text: &str, d: usize) -> Result<ExpVec> {
    let v: Vec<i64> = text
        .split(',')
        .map(|x| x.trim().parse().map_err(|_| Error::Parse(format!("invalid integer in `{text}`"))))
        .collect::<Result<_>>()?;
    if v.len() != d {
        return Err(Error::DimensionMismatch(format!("expected {d} integers, got {}", v.len())));
    }
    Ok(ExpVec(v))
}

fn pretty(m: &ExactMatrix) -> Vec<Vec<String>> {
    (0..m.rows()).map(|i| m.row(i).iter().map(CycloNum::scalar_text).collect()).collect()
}

fn torus_summary(spec: &TorusSpec) -> Value {
    json!({
        "d": spec.d(),
        "N": spec.n(),
        "L": spec.order(),
        "R_generators": spec.r_generators().iter().map(ToString::to_string).collect::<Vec<_>>(),
        "classes": spec.gamma0().len(),
    })
}

#[wasm_bindgen]
pub fn torus_info(spec: &str) -> String {
    respond(torus(spec).map(|t| torus_summary(&t)))
}

/// `X^n` for a comma-separated exponent, plus whether `n ∈ R`.
#[wasm_bindgen]
pub fn x_matrix(spec: &str, exponent: &str) -> String {
    respond((|| {
        let t = torus(spec)?;
        let n = ints(exponent, t.d())?;
        let m = matrep::x_power(&t, &n);
        Ok(json!({
            "exponent": n.to_string(),
            "in_R": t.in_r(&n),
            "class": t.canonical_rep(&n).to_string(),
            "matrix": pretty(&m),
        }))
    })())
}

/// Bracket of two elements written in the expression syntax (`D(i;m)`,
/// `W(i;m)` or `XD(p;j)` / `XT(l;w)`).
#[wasm_bindgen]
pub fn bracket(spec: &str, a: &str, b: &str, trunc: usize) -> String {
    respond((|| {
        let t = torus(spec)?;
        let out = match (expr::parse_any(&t, a)?, expr::parse_any(&t, b)?) {
            (ParsedElement::D(x), ParsedElement::D(y)) => expr::format_element(&liealg::bracket_d(&t, &x, &y)?),
            (ParsedElement::Witt(x), ParsedElement::Witt(y)) => expr::format_element(&liealg::bracket_wd(&x, &y)),
            (ParsedElement::G(x), ParsedElement::G(y)) => expr::format_element(&gtilde::bracket_g(&t, &x, &y, trunc)?),
            _ => return Err(Error::InvalidInput("both elements must lie in the same algebra".into())),
        };
        Ok(json!({ "result": out }))
    })())
}

/// Generator symbols offered by [`weight_action`].
#[wasm_bindgen]
pub fn symbols(spec: &str) -> String {
    respond(torus(spec).map(|t| json!(dump_symbols(&t).iter().map(ToString::to_string).collect::<Vec<_>>())))
}

/// Action of one generator on the weight space at `label` of the cuspidal
/// module built from `natural` or `trivial` V with the graded regular W.
#[wasm_bindgen]
pub fn weight_action(spec: &str, vw: &str, alpha: &str, label: &str, symbol: &str) -> String {
    respond((|| {
        let t = torus(spec)?;
        let pair = match vw {
            "natural" => suites::natural_regular(&t),
            "trivial" => suites::trivial_regular(&t),
            _ => return Err(Error::InvalidInput(format!("unknown (V, W) `{vw}`"))),
        };
        let alpha: Vec<CycloNum> = if alpha.trim().is_empty() {
            vec![CycloNum::zero(t.field()); t.d()]
        } else {
            alpha.split(';').map(|a| expr::parse_scalar_text(t.field(), a.trim())).collect::<Result<_>>()?
        };
        if alpha.len() != t.d() {
            return Err(Error::DimensionMismatch(format!("α needs {} entries separated by `;`", t.d())));
        }
        let s = ints(label, t.d())?;
        let sym = dump_symbols(&t)
            .into_iter()
            .find(|x| x.to_string() == symbol.trim())
            .ok_or_else(|| Error::InvalidInput(format!("unknown symbol `{symbol}`")))?;
        let radius = s.iter().map(|x| x.abs()).max().unwrap_or(0) + 1;
        let module = build_module(&t, alpha, repn::pullback(&t, &pair)?, radius)?;
        let (target, m) = module.op_matrix(&sym, &s)?;
        let (shift, class) = t.decompose(&s);
        Ok(json!({
            "label": s.to_string(),
            "class": class.to_string(),
            "shift": shift.to_string(),
            "target": target.to_string(),
            "dim": module.weight_dim(&s),
            "multiplicity": cuspidal::weight_multiplicities(&module, radius).uniform(),
            "matrix": pretty(&m),
        }))
    })())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(s: String) -> Value {
        serde_json::from_str(&s).unwrap()
    }

    #[test]
    fn x_matrix_on_r_is_identity() {
        let v = parse(x_matrix("e1", "2,0"));
        assert_eq!(v["in_R"], true);
        assert_eq!(v["matrix"], json!([["1", "0"], ["0", "1"]]));
        assert!(parse(x_matrix("e1", "1")).get("error").is_some());
        let v = parse(x_matrix(r#"{"d": 2, "z": 1, "k": [3]}"#, "1,1"));
        assert_eq!(v["matrix"].as_array().unwrap().len(), 3);
    }

    #[test]
    fn bracket_calculator() {
        let v = parse(bracket("e1", "XT(0,0;1,2)", "XT(0,0;2,1)", 1));
        assert_eq!(v["result"], "2*XT(0,0;1,1)");
        assert!(parse(bracket("e1", "XT(0,0;1,2)", "W(1;1,0)", 1)).get("error").is_some());
    }

    #[test]
    fn weight_action_explorer() {
        let syms = parse(symbols("e1"));
        assert_eq!(syms.as_array().unwrap().len(), 14);
        let sym = syms[0].as_str().unwrap();
        let v = parse(weight_action("e1", "natural", "1/3; 1/5", "1,-1", sym));
        assert_eq!(v["dim"], 2);
        assert_eq!(v["multiplicity"], 2);
        assert_eq!(v["matrix"].as_array().unwrap().len(), 2);
        assert!(parse(weight_action("e1", "natural", "", "0,0", "D(9;0,0)")).get("error").is_some());
    }
}
