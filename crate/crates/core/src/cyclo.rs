//! Exact arithmetic in cyclotomic fields `Q(ζ_L)`.
//!
//! Elements are stored in the power basis `1, ζ, …, ζ^{φ(L)-1}` reduced
//! modulo the `L`-th cyclotomic polynomial, so two elements are equal exactly
//! when their coefficient vectors are equal.

use std::fmt;
use std::ops::{Add, AddAssign, Mul, Neg, Sub, SubAssign};
use std::str::FromStr;
use std::sync::Arc;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};

pub type Rational = BigRational;
pub type FieldRef = Arc<CycloField>;

/// The field `Q(ζ_L)` together with its reduction tables.
#[derive(Debug)]
pub struct CycloField {
    order: u32,
    phi: usize,
    /// Coefficients of `Φ_L`, lowest degree first.
    cyclotomic: Vec<i64>,
    /// `reduction[k]` holds `x^k mod Φ_L` for `k < max(L, 2φ - 1)`.
    reduction: Vec<Vec<i64>>,
}

impl PartialEq for CycloField {
    fn eq(&self, other: &Self) -> bool {
        self.order == other.order
    }
}

impl Eq for CycloField {}

fn poly_div_exact(num: &[i64], den: &[i64]) -> Vec<i64> {
    // `den` is monic.
    let mut rem = num.to_vec();
    let dn = den.len() - 1;
    let mut quot = vec![0i64; num.len() - dn];
    for i in (0..quot.len()).rev() {
        let c = rem[i + dn];
        quot[i] = c;
        if c != 0 {
            for (j, &dj) in den.iter().enumerate() {
                rem[i + j] -= c * dj;
            }
        }
    }
    debug_assert!(rem.iter().all(|&c| c == 0));
    quot
}

fn cyclotomic_poly(n: u32) -> Vec<i64> {
    let mut p = vec![0i64; n as usize + 1];
    p[0] = -1;
    p[n as usize] = 1;
    for d in 1..n {
        if n.is_multiple_of(d) {
            p = poly_div_exact(&p, &cyclotomic_poly(d));
        }
    }
    p
}

impl CycloField {
    /// Builds `Q(ζ_L)`. `L = 0` is rejected.
    pub fn new(order: u32) -> Result<FieldRef> {
        if order == 0 {
            return Err(Error::InvalidInput("cyclotomic field order must be positive".into()));
        }
        let cyclotomic = cyclotomic_poly(order);
        let phi = cyclotomic.len() - 1;
        let table_len = (order as usize).max(2 * phi - 1);
        let mut reduction = Vec::with_capacity(table_len);
        let mut cur = vec![0i64; phi];
        cur[0] = 1;
        for _ in 0..table_len {
            reduction.push(cur.clone());
            // multiply by x and reduce the overflow coefficient
            let top = cur[phi - 1];
            for i in (1..phi).rev() {
                cur[i] = cur[i - 1];
            }
            cur[0] = 0;
            if top != 0 {
                for (i, c) in cur.iter_mut().enumerate() {
                    *c -= top * cyclotomic[i];
                }
            }
        }
        Ok(Arc::new(CycloField { order, phi, cyclotomic, reduction }))
    }

    pub fn order(&self) -> u32 {
        self.order
    }

    /// Degree of the field over `Q`, i.e. Euler's totient of `L`.
    pub fn phi(&self) -> usize {
        self.phi
    }

    pub fn cyclotomic_coeffs(&self) -> &[i64] {
        &self.cyclotomic
    }
}

/// An element of `Q(ζ_L)` in canonical reduced form.
#[derive(Clone)]
pub struct CycloNum {
    field: FieldRef,
    coeffs: Vec<Rational>,
}

impl CycloNum {
    pub fn zero(field: &FieldRef) -> Self {
        CycloNum { field: field.clone(), coeffs: vec![Rational::zero(); field.phi] }
    }

    pub fn one(field: &FieldRef) -> Self {
        Self::from_rational(field, Rational::one())
    }

    pub fn from_int(field: &FieldRef, n: i64) -> Self {
        Self::from_rational(field, Rational::from_integer(BigInt::from(n)))
    }

    pub fn from_rational(field: &FieldRef, q: Rational) -> Self {
        let mut x = Self::zero(field);
        x.coeffs[0] = q;
        x
    }

    pub fn from_ratio(field: &FieldRef, num: i64, den: i64) -> Self {
        Self::from_rational(field, Rational::new(BigInt::from(num), BigInt::from(den)))
    }

    /// Builds an element from power-basis coefficients of any length,
    /// reducing modulo the cyclotomic polynomial.
    pub fn from_poly(field: &FieldRef, poly: &[Rational]) -> Self {
        let mut coeffs = vec![Rational::zero(); field.phi];
        for (k, c) in poly.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            if k < field.phi {
                coeffs[k] += c;
            } else {
                // reduce x^k through x^(k mod L) when k exceeds the table
                let row = if k < field.reduction.len() {
                    &field.reduction[k]
                } else {
                    &field.reduction[k % field.order as usize]
                };
                for (i, &r) in row.iter().enumerate() {
                    if r != 0 {
                        coeffs[i] += c * Rational::from_integer(BigInt::from(r));
                    }
                }
            }
        }
        CycloNum { field: field.clone(), coeffs }
    }

    /// `ζ_L^j`, with `j` taken modulo `L`.
    pub fn root_of_unity(field: &FieldRef, j: i64) -> Self {
        let l = field.order as i64;
        let e = j.rem_euclid(l) as usize;
        let coeffs = field.reduction[e]
            .iter()
            .map(|&c| Rational::from_integer(BigInt::from(c)))
            .collect();
        CycloNum { field: field.clone(), coeffs }
    }

    pub fn field(&self) -> &FieldRef {
        &self.field
    }

    pub fn coeffs(&self) -> &[Rational] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(Zero::is_zero)
    }

    pub fn is_one(&self) -> bool {
        self.coeffs[0].is_one() && self.coeffs[1..].iter().all(Zero::is_zero)
    }

    /// The rational value when the element lies in `Q`.
    pub fn as_rational(&self) -> Option<&Rational> {
        if self.coeffs[1..].iter().all(Zero::is_zero) {
            Some(&self.coeffs[0])
        } else {
            None
        }
    }

    fn same_field(&self, other: &CycloNum) -> bool {
        Arc::ptr_eq(&self.field, &other.field) || self.field.order == other.field.order
    }

    fn assert_same_field(&self, other: &CycloNum) {
        assert!(
            self.same_field(other),
            "cyclotomic field mismatch: L={} vs L={}",
            self.field.order,
            other.field.order
        );
    }

    pub fn scale(&self, q: &Rational) -> Self {
        CycloNum { field: self.field.clone(), coeffs: self.coeffs.iter().map(|c| c * q).collect() }
    }

    pub fn scale_int(&self, n: i64) -> Self {
        if n == 1 {
            return self.clone();
        }
        let q = Rational::from_integer(BigInt::from(n));
        self.scale(&q)
    }

    fn mul_ref(&self, other: &CycloNum) -> CycloNum {
        self.assert_same_field(other);
        let phi = self.field.phi;
        if phi == 1 {
            return CycloNum { field: self.field.clone(), coeffs: vec![&self.coeffs[0] * &other.coeffs[0]] };
        }
        if self.is_zero() || other.is_zero() {
            return CycloNum::zero(&self.field);
        }
        let mut prod = vec![Rational::zero(); 2 * phi - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in other.coeffs.iter().enumerate() {
                if !b.is_zero() {
                    prod[i + j] += a * b;
                }
            }
        }
        CycloNum::from_poly(&self.field, &prod)
    }

    /// Multiplicative inverse, via solving `b · x = 1` in the power basis.
    pub fn inverse(&self) -> Result<CycloNum> {
        if self.is_zero() {
            return Err(Error::DivisionByZero);
        }
        let phi = self.field.phi;
        if let Some(q) = self.as_rational() {
            return Ok(CycloNum::from_rational(&self.field, q.recip()));
        }
        // column j of the system is self * x^j
        let mut cols: Vec<Vec<Rational>> = Vec::with_capacity(phi);
        let mut shifted = self.coeffs.clone();
        for _ in 0..phi {
            cols.push(shifted.clone());
            let mut poly = vec![Rational::zero(); phi + 1];
            for (i, c) in shifted.iter().enumerate() {
                poly[i + 1] = c.clone();
            }
            shifted = CycloNum::from_poly(&self.field, &poly).coeffs;
        }
        // augmented rows: a[i][j] = cols[j][i]
        let mut a: Vec<Vec<Rational>> = (0..phi)
            .map(|i| {
                let mut row: Vec<Rational> = (0..phi).map(|j| cols[j][i].clone()).collect();
                row.push(if i == 0 { Rational::one() } else { Rational::zero() });
                row
            })
            .collect();
        for col in 0..phi {
            let piv = (col..phi).find(|&r| !a[r][col].is_zero()).ok_or(Error::DivisionByZero)?;
            a.swap(col, piv);
            let inv = a[col][col].recip();
            for v in a[col].iter_mut() {
                *v *= &inv;
            }
            for r in 0..phi {
                if r != col && !a[r][col].is_zero() {
                    let f = a[r][col].clone();
                    for c in col..=phi {
                        let t = &f * &a[col][c];
                        a[r][c] -= t;
                    }
                }
            }
        }
        let coeffs = a.into_iter().map(|row| row[phi].clone()).collect();
        Ok(CycloNum { field: self.field.clone(), coeffs })
    }

    pub fn checked_div(&self, other: &CycloNum) -> Result<CycloNum> {
        if !self.same_field(other) {
            return Err(Error::FieldMismatch(self.field.order, other.field.order));
        }
        Ok(self.mul_ref(&other.inverse()?))
    }

    pub fn pow(&self, mut e: u64) -> CycloNum {
        let mut base = self.clone();
        let mut acc = CycloNum::one(&self.field);
        while e > 0 {
            if e & 1 == 1 {
                acc = &acc * &base;
            }
            base = &base * &base;
            e >>= 1;
        }
        acc
    }

    /// Floating approximation for diagnostics and display only.
    pub fn to_complex(&self) -> (f64, f64) {
        let l = self.field.order as f64;
        let mut re = 0.0;
        let mut im = 0.0;
        for (k, c) in self.coeffs.iter().enumerate() {
            let v = rational_to_f64(c);
            let ang = 2.0 * std::f64::consts::PI * k as f64 / l;
            re += v * ang.cos();
            im += v * ang.sin();
        }
        (re, im)
    }

    /// Text accepted by the element grammar: a plain rational when the
    /// value is rational, otherwise the bracketed coefficient vector.
    pub fn scalar_text(&self) -> String {
        match self.as_rational() {
            Some(q) => q.to_string(),
            None => {
                let parts: Vec<String> = self.coeffs.iter().map(ToString::to_string).collect();
                format!("[{}]", parts.join(","))
            }
        }
    }

    pub fn parse_in(field: &FieldRef, text: &str) -> Result<CycloNum> {
        let parsed: CycloNum = text.parse()?;
        if parsed.field.order != field.order {
            return Err(Error::FieldMismatch(field.order, parsed.field.order));
        }
        Ok(CycloNum { field: field.clone(), coeffs: parsed.coeffs })
    }
}

pub(crate) fn rational_to_f64(q: &Rational) -> f64 {
    use num_traits::ToPrimitive;
    q.to_f64().unwrap_or_else(|| {
        let n = q.numer().to_f64().unwrap_or(f64::NAN);
        let d = q.denom().to_f64().unwrap_or(f64::NAN);
        n / d
    })
}

pub fn parse_rational(s: &str) -> Result<Rational> {
    let s = s.trim();
    let q = Rational::from_str(s).map_err(|_| Error::Parse(format!("invalid rational `{s}`")))?;
    Ok(q)
}

/// Arithmetic entry point mirroring the four field operations.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ArithOp {
    Add,
    Sub,
    Mul,
    Div,
}

pub fn arith(a: &CycloNum, b: &CycloNum, op: ArithOp) -> Result<CycloNum> {
    if !a.same_field(b) {
        return Err(Error::FieldMismatch(a.field.order, b.field.order));
    }
    Ok(match op {
        ArithOp::Add => a + b,
        ArithOp::Sub => a - b,
        ArithOp::Mul => a * b,
        ArithOp::Div => a.checked_div(b)?,
    })
}

impl PartialEq for CycloNum {
    fn eq(&self, other: &Self) -> bool {
        self.field.order == other.field.order && self.coeffs == other.coeffs
    }
}

impl Eq for CycloNum {}

impl fmt::Debug for CycloNum {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

/// `L:[c0,c1,...]`
impl fmt::Display for CycloNum {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:[", self.field.order)?;
        for (i, c) in self.coeffs.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{c}")?;
        }
        write!(f, "]")
    }
}

impl FromStr for CycloNum {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let (l, rest) = s
            .split_once(':')
            .ok_or_else(|| Error::Parse(format!("expected `L:[...]`, got `{s}`")))?;
        let order: u32 = l.trim().parse().map_err(|_| Error::Parse(format!("invalid field order `{l}`")))?;
        let body = rest
            .trim()
            .strip_prefix('[')
            .and_then(|r| r.strip_suffix(']'))
            .ok_or_else(|| Error::Parse(format!("expected bracketed coefficients in `{s}`")))?;
        let field = CycloField::new(order)?;
        let coeffs: Vec<Rational> = if body.trim().is_empty() {
            Vec::new()
        } else {
            body.split(',').map(parse_rational).collect::<Result<_>>()?
        };
        if coeffs.len() != field.phi {
            return Err(Error::Parse(format!(
                "field of order {order} needs {} coefficients, got {}",
                field.phi,
                coeffs.len()
            )));
        }
        Ok(CycloNum { field, coeffs })
    }
}

impl serde::Serialize for CycloNum {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> serde::Deserialize<'de> for CycloNum {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

impl<'a> Add<&'a CycloNum> for &'a CycloNum {
    type Output = CycloNum;
    fn add(self, rhs: &CycloNum) -> CycloNum {
        self.assert_same_field(rhs);
        let coeffs = self.coeffs.iter().zip(&rhs.coeffs).map(|(a, b)| a + b).collect();
        CycloNum { field: self.field.clone(), coeffs }
    }
}

impl<'a> Sub<&'a CycloNum> for &'a CycloNum {
    type Output = CycloNum;
    fn sub(self, rhs: &CycloNum) -> CycloNum {
        self.assert_same_field(rhs);
        let coeffs = self.coeffs.iter().zip(&rhs.coeffs).map(|(a, b)| a - b).collect();
        CycloNum { field: self.field.clone(), coeffs }
    }
}

impl<'a> Mul<&'a CycloNum> for &'a CycloNum {
    type Output = CycloNum;
    fn mul(self, rhs: &CycloNum) -> CycloNum {
        self.mul_ref(rhs)
    }
}

impl Add for CycloNum {
    type Output = CycloNum;
    fn add(self, rhs: CycloNum) -> CycloNum {
        &self + &rhs
    }
}

impl Sub for CycloNum {
    type Output = CycloNum;
    fn sub(self, rhs: CycloNum) -> CycloNum {
        &self - &rhs
    }
}

impl Mul for CycloNum {
    type Output = CycloNum;
    fn mul(self, rhs: CycloNum) -> CycloNum {
        self.mul_ref(&rhs)
    }
}

impl Neg for CycloNum {
    type Output = CycloNum;
    fn neg(self) -> CycloNum {
        CycloNum { field: self.field, coeffs: self.coeffs.into_iter().map(|c| -c).collect() }
    }
}

impl Neg for &CycloNum {
    type Output = CycloNum;
    fn neg(self) -> CycloNum {
        self.clone().neg()
    }
}

impl AddAssign<&CycloNum> for CycloNum {
    fn add_assign(&mut self, rhs: &CycloNum) {
        self.assert_same_field(rhs);
        for (a, b) in self.coeffs.iter_mut().zip(&rhs.coeffs) {
            if !b.is_zero() {
                *a += b;
            }
        }
    }
}

impl SubAssign<&CycloNum> for CycloNum {
    fn sub_assign(&mut self, rhs: &CycloNum) {
        self.assert_same_field(rhs);
        for (a, b) in self.coeffs.iter_mut().zip(&rhs.coeffs) {
            if !b.is_zero() {
                *a -= b;
            }
        }
    }
}

/// Largest absolute numerator or denominator, used to keep random samples small.
pub fn height(x: &CycloNum) -> BigInt {
    x.coeffs
        .iter()
        .flat_map(|c| [c.numer().abs(), c.denom().clone()])
        .max()
        .unwrap_or_else(BigInt::zero)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn f(l: u32) -> FieldRef {
        CycloField::new(l).unwrap()
    }

    #[test]
    fn field_degrees() {
        assert_eq!(f(1).phi(), 1);
        assert_eq!(f(2).phi(), 1);
        assert_eq!(f(12).phi(), 4);
        assert_eq!(f(5).phi(), 4);
        assert!(CycloField::new(0).is_err());
    }

    #[test]
    fn small_roots() {
        let k2 = f(2);
        assert_eq!(CycloNum::root_of_unity(&k2, 1), CycloNum::from_int(&k2, -1));
        let k3 = f(3);
        let s = &CycloNum::root_of_unity(&k3, 1) + &CycloNum::root_of_unity(&k3, 2);
        assert_eq!(s, CycloNum::from_int(&k3, -1));
        let k4 = f(4);
        assert_eq!(CycloNum::root_of_unity(&k4, 2), CycloNum::from_int(&k4, -1));
    }

    #[test]
    fn products_and_quotients() {
        let k3 = f(3);
        let z = CycloNum::root_of_unity(&k3, 1);
        let z2 = CycloNum::root_of_unity(&k3, 2);
        assert!((&z * &z2).is_one());

        let k4 = f(4);
        let i = CycloNum::root_of_unity(&k4, 1);
        let one = CycloNum::one(&k4);
        let a = &one + &i;
        let b = &one - &i;
        assert_eq!(&a * &b, CycloNum::from_int(&k4, 2));
        let q = arith(&one, &a, ArithOp::Div).unwrap();
        assert_eq!(q, b.scale(&Rational::new(1.into(), 2.into())));
        assert!(matches!(arith(&one, &CycloNum::zero(&k4), ArithOp::Div), Err(Error::DivisionByZero)));
    }

    #[test]
    fn mismatched_fields_are_reported() {
        let a = CycloNum::one(&f(3));
        let b = CycloNum::one(&f(4));
        assert!(matches!(arith(&a, &b, ArithOp::Add), Err(Error::FieldMismatch(3, 4))));
    }

    #[test]
    fn reciprocal_roots_exhaustive() {
        for l in 1..=24u32 {
            let k = f(l);
            for j in 0..l as i64 {
                let p = &CycloNum::root_of_unity(&k, j) * &CycloNum::root_of_unity(&k, l as i64 - j);
                assert!(p.is_one(), "L={l} j={j}");
            }
            assert!(CycloNum::root_of_unity(&k, 1).pow(l as u64).is_one());
        }
    }

    #[test]
    fn text_round_trip() {
        let k = f(12);
        let x = &CycloNum::root_of_unity(&k, 5).scale(&Rational::new(3.into(), 7.into()))
            - &CycloNum::from_int(&k, 2);
        let s = x.to_string();
        let back: CycloNum = s.parse().unwrap();
        assert_eq!(back, x);
        assert_eq!(back.to_string(), s);
        assert!("3:[1]".parse::<CycloNum>().is_err());
        assert!("x:[1]".parse::<CycloNum>().is_err());
    }

    #[test]
    fn complex_approximation() {
        let k = f(4);
        let (re, im) = CycloNum::root_of_unity(&k, 1).to_complex();
        assert!(re.abs() < 1e-12 && (im - 1.0).abs() < 1e-12);
    }
}
