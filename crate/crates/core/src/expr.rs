//! Text syntax for Lie algebra elements.
//!
//! ```text
//! element := ["-"] term (("+" | "-") term)*
//! term    := [scalar ["*"]] key
//! scalar  := rational | "z^" int | "[" rational ("," rational)* "]" | L ":[" ... "]"
//! key     := "D(" i ";" m ")" | "T(" s ")" | "W(" i ";" m ")"
//!          | "XD(" p ";" j ")" | "XT(" l ";" w ")"
//! ```
//!
//! Indices `i`, `j` are 1-based; `z` is the primitive root `ζ_L`.

use crate::cyclo::{CycloNum, FieldRef};
use crate::error::{Error, Result};
use crate::gtilde::{self, GElement, GKey};
use crate::liealg::{self, DElement, DKey, WdElement, WittKey};
use crate::lincomb::LinComb;
use crate::torus::{ExpVec, TorusSpec};
use std::fmt::Display;

#[derive(Clone, Debug, PartialEq, Eq)]
struct RawKey {
    name: String,
    groups: Vec<Vec<i64>>,
}

struct Cursor<'a> {
    s: &'a str,
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn skip_ws(&mut self) {
        while self.s[self.pos..].starts_with(char::is_whitespace) {
            self.pos += self.s[self.pos..].chars().next().map_or(0, char::len_utf8);
        }
    }

    fn peek(&mut self) -> Option<char> {
        self.skip_ws();
        self.s[self.pos..].chars().next()
    }

    fn eat(&mut self, c: char) -> bool {
        if self.peek() == Some(c) {
            self.pos += c.len_utf8();
            true
        } else {
            false
        }
    }

    fn expect(&mut self, c: char) -> Result<()> {
        if self.eat(c) {
            Ok(())
        } else {
            Err(self.error(&format!("expected `{c}`")))
        }
    }

    fn error(&self, what: &str) -> Error {
        Error::Parse(format!("{what} at offset {} in `{}`", self.pos, self.s))
    }

    fn take_while(&mut self, f: impl Fn(char) -> bool) -> &'a str {
        self.skip_ws();
        let start = self.pos;
        while let Some(c) = self.s[self.pos..].chars().next() {
            if !f(c) {
                break;
            }
            self.pos += c.len_utf8();
        }
        &self.s[start..self.pos]
    }

    fn int(&mut self) -> Result<i64> {
        self.skip_ws();
        let start = self.pos;
        if self.s[self.pos..].starts_with('-') {
            self.pos += 1;
        }
        let digits = self.take_while(|c| c.is_ascii_digit());
        if digits.is_empty() {
            return Err(self.error("expected an integer"));
        }
        self.s[start..self.pos].replace(' ', "").parse().map_err(|_| self.error("integer out of range"))
    }

    fn int_list(&mut self) -> Result<Vec<i64>> {
        let mut out = vec![self.int()?];
        while self.eat(',') {
            out.push(self.int()?);
        }
        Ok(out)
    }
}

fn parse_scalar(cur: &mut Cursor<'_>, field: &FieldRef) -> Result<Option<CycloNum>> {
    match cur.peek() {
        Some('z') => {
            cur.pos += 1;
            cur.expect('^')?;
            let j = cur.int()?;
            Ok(Some(CycloNum::root_of_unity(field, j)))
        }
        Some('[') => {
            let body = cur.take_while(|c| c != ']');
            cur.expect(']')?;
            let text = format!("{}:{body}]", field.order());
            CycloNum::parse_in(field, &text).map(Some)
        }
        Some(c) if c.is_ascii_digit() => {
            let num = cur.take_while(|c| c.is_ascii_digit() || c == '/');
            if cur.peek() == Some(':') {
                cur.pos += 1;
                let body = cur.take_while(|c| c != ']');
                cur.expect(']')?;
                return CycloNum::parse_in(field, &format!("{num}:{body}]")).map(Some);
            }
            let q = crate::cyclo::parse_rational(num)?;
            Ok(Some(CycloNum::from_rational(field, q)))
        }
        _ => Ok(None),
    }
}

/// A lone scalar in the element syntax, e.g. `-1/2`, `z^3`, `[0,1]`.
pub fn parse_scalar_text(field: &FieldRef, text: &str) -> Result<CycloNum> {
    let mut cur = Cursor { s: text, pos: 0 };
    let neg = cur.eat('-');
    let c = parse_scalar(&mut cur, field)?.ok_or_else(|| cur.error("expected a scalar"))?;
    if cur.peek().is_some() {
        return Err(cur.error("trailing input after scalar"));
    }
    Ok(if neg { -c } else { c })
}

fn parse_key(cur: &mut Cursor<'_>) -> Result<RawKey> {
    let name = cur.take_while(|c| c.is_ascii_alphabetic()).to_string();
    if name.is_empty() {
        return Err(cur.error("expected a basis symbol"));
    }
    cur.expect('(')?;
    let mut groups = vec![cur.int_list()?];
    while cur.eat(';') {
        groups.push(cur.int_list()?);
    }
    cur.expect(')')?;
    Ok(RawKey { name, groups })
}

fn parse_terms(text: &str, field: &FieldRef) -> Result<Vec<(CycloNum, RawKey)>> {
    if text.trim() == "0" {
        return Ok(Vec::new());
    }
    let mut cur = Cursor { s: text, pos: 0 };
    let mut out = Vec::new();
    let mut sign = if cur.eat('-') { -1 } else { 1 };
    loop {
        let scalar = parse_scalar(&mut cur, field)?;
        if scalar.is_some() {
            cur.eat('*');
        }
        let key = parse_key(&mut cur)?;
        let c = scalar.unwrap_or_else(|| CycloNum::one(field)).scale_int(sign);
        out.push((c, key));
        if cur.eat('+') {
            sign = 1;
        } else if cur.eat('-') {
            sign = -1;
        } else if cur.peek().is_none() {
            return Ok(out);
        } else {
            return Err(cur.error("expected `+`, `-` or end of input"));
        }
    }
}

fn arity_error(key: &RawKey) -> Error {
    Error::MalformedBasisKey(format!("{}(...) has the wrong number of arguments", key.name))
}

fn index(i: i64, d: usize, key: &RawKey) -> Result<usize> {
    if i < 1 || i as usize > d {
        return Err(Error::MalformedBasisKey(format!("index {i} in {} out of range 1..={d}", key.name)));
    }
    Ok(i as usize - 1)
}

fn exp(v: &[i64], d: usize, key: &RawKey) -> Result<ExpVec> {
    if v.len() != d {
        return Err(Error::MalformedBasisKey(format!("{} needs {d} exponent entries, got {}", key.name, v.len())));
    }
    Ok(ExpVec(v.to_vec()))
}

/// Which algebra a parsed element lives in.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ParsedElement {
    D(DElement),
    Witt(WdElement),
    G(GElement),
}

pub fn parse_d(spec: &TorusSpec, text: &str) -> Result<DElement> {
    let d = spec.d();
    let mut out = DElement::zero();
    for (c, key) in parse_terms(text, spec.field())? {
        let k = match (key.name.as_str(), key.groups.as_slice()) {
            ("D", [i, m]) if i.len() == 1 => DKey::Deriv { i: index(i[0], d, &key)?, m: exp(m, d, &key)? },
            ("T", [s]) => DKey::Inner { s: exp(s, d, &key)? },
            ("D" | "T", _) => return Err(arity_error(&key)),
            _ => return Err(Error::MalformedBasisKey(format!("{} is not a symbol of the derivation algebra", key.name))),
        };
        liealg::validate_d_key(spec, &k)?;
        out.add_term(k, &c);
    }
    Ok(out)
}

pub fn parse_witt(field: &FieldRef, d: usize, text: &str) -> Result<WdElement> {
    let mut out = WdElement::zero();
    for (c, key) in parse_terms(text, field)? {
        let k = match (key.name.as_str(), key.groups.as_slice()) {
            ("W", [i, m]) if i.len() == 1 => WittKey { i: index(i[0], d, &key)?, m: exp(m, d, &key)? },
            ("W", _) => return Err(arity_error(&key)),
            _ => return Err(Error::MalformedBasisKey(format!("{} is not a Witt symbol", key.name))),
        };
        out.add_term(k, &c);
    }
    Ok(out)
}

/// `XT(l; w)` accepts any `w`; it is replaced by its class representative.
pub fn parse_g(spec: &TorusSpec, text: &str) -> Result<GElement> {
    let d = spec.d();
    let mut out = GElement::zero();
    for (c, key) in parse_terms(text, spec.field())? {
        let k = match (key.name.as_str(), key.groups.as_slice()) {
            ("XD", [p, j]) if j.len() == 1 => GKey::XD { p: exp(p, d, &key)?, j: index(j[0], d, &key)? },
            ("XT", [l, w]) => GKey::XT { l: exp(l, d, &key)?, w: spec.canonical_rep(&exp(w, d, &key)?) },
            ("XD" | "XT", _) => return Err(arity_error(&key)),
            _ => return Err(Error::MalformedBasisKey(format!("{} is not a symbol of G̃", key.name))),
        };
        gtilde::validate_key(spec, &k)?;
        out.add_term(k, &c);
    }
    Ok(out)
}

/// Dispatches on the first symbol name.
pub fn parse_any(spec: &TorusSpec, text: &str) -> Result<ParsedElement> {
    let first = text.trim_start_matches(|c: char| !c.is_ascii_uppercase());
    if first.starts_with("XD") || first.starts_with("XT") {
        parse_g(spec, text).map(ParsedElement::G)
    } else if first.starts_with('W') {
        parse_witt(spec.field(), spec.d(), text).map(ParsedElement::Witt)
    } else {
        parse_d(spec, text).map(ParsedElement::D)
    }
}

/// Inverse of the parsers: `c*Key + ...`, with unit coefficients omitted
/// and `0` for the zero element.
pub fn format_element<K: Ord + Clone + Display>(a: &LinComb<K>) -> String {
    if a.is_zero() {
        return "0".into();
    }
    let mut out = String::new();
    for (n, (k, c)) in a.iter().enumerate() {
        let neg = c.as_rational().is_some_and(|q| *q < num_rational::BigRational::from_integer(0.into()));
        let mag = if neg { -c } else { c.clone() };
        if n > 0 {
            out.push_str(if neg { " - " } else { " + " });
        } else if neg {
            out.push('-');
        }
        if !mag.is_one() {
            out.push_str(&mag.scalar_text());
            out.push('*');
        }
        out.push_str(&k.to_string());
    }
    out
}

impl ParsedElement {
    pub fn format(&self) -> String {
        match self {
            ParsedElement::D(a) => format_element(a),
            ParsedElement::Witt(a) => format_element(a),
            ParsedElement::G(a) => format_element(a),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn e1() -> TorusSpec {
        TorusSpec::new(2, 1, vec![2], Some(4)).unwrap()
    }

    #[test]
    fn parses_and_formats() {
        let t = e1();
        let a = parse_d(&t, "2*D(1;2,0) - 1/2 T(1,0) + z^1*T(0,1)").unwrap();
        assert_eq!(a.len(), 3);
        assert_eq!(a.coeff(&DKey::Inner { s: [1, 0].into() }), Some(&CycloNum::from_ratio(t.field(), -1, 2)));
        assert_eq!(parse_d(&t, &format_element(&a)).unwrap(), a);

        let g = parse_g(&t, "XT(0,0;1,2) + [0,1]*XD(1,0;2) - XT(1,1;3,3)").unwrap();
        assert!(g.coeff(&GKey::XT { l: [1, 1].into(), w: [1, 1].into() }).is_some());
        assert_eq!(parse_g(&t, &format_element(&g)).unwrap(), g);

        let w = parse_witt(t.field(), 2, "-W(2;1,-1)").unwrap();
        assert_eq!(format_element(&w), "-W(2;1,-1)");
        assert!(matches!(parse_any(&t, "W(1;0,0)").unwrap(), ParsedElement::Witt(_)));
        assert_eq!(format_element(&DElement::zero()), "0");
        assert_eq!(parse_scalar_text(t.field(), "-z^1").unwrap(), -CycloNum::root_of_unity(t.field(), 1));
        assert_eq!(parse_scalar_text(t.field(), " 3/4 ").unwrap(), CycloNum::from_ratio(t.field(), 3, 4));
        assert!(parse_scalar_text(t.field(), "3 4").is_err());
    }

    #[test]
    fn rejects_bad_input() {
        let t = e1();
        assert!(matches!(parse_d(&t, "D(1;1,0)"), Err(Error::ExponentNotInR(_)) | Err(Error::MalformedBasisKey(_))));
        assert!(matches!(parse_d(&t, "D(3;2,0)"), Err(Error::MalformedBasisKey(_))));
        assert!(matches!(parse_d(&t, "D(1;2,0"), Err(Error::Parse(_))));
        assert!(matches!(parse_d(&t, "D(1;2,0) T(1,0)"), Err(Error::Parse(_))));
        assert!(matches!(parse_g(&t, "XD(1,0,0;1)"), Err(Error::MalformedBasisKey(_))));
        assert!(matches!(parse_d(&t, "XD(1,0;1)"), Err(Error::MalformedBasisKey(_))));
        assert!(matches!(parse_d(&t, "1:[1]*D(1;0,0)"), Err(Error::FieldMismatch(..))));
    }
}
