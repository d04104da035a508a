//! The Γ-graded Lie algebra `G̃` spanned by `x^p d_{e_j}` (`|p| ≥ 1`) and
//! `x^l t̄^w` (`w ∈ Γ₀`), given by structure constants.
//!
//! ```text
//! [x^m d_a, x^n d_b]   = n_a x^{m+n-e_a} d_b − m_b x^{m+n-e_b} d_a
//! [x^m d_a, x^l t̄^s]  = l_a x^{m+l-e_a} t̄^s + s_a x^{m+l} t̄^s
//! [x^p t̄^r, x^l t̄^s]  = c(r,s) Σ_j n^j/j! x^{p+l+j} t̄^{w}
//! ```
//!
//! where `c(r,s) = σ̂(r,s) − σ̂(s,r)`, `w` is the `Γ₀` representative of
//! `r+s` and `n = r + s − w ∈ R`. The last sum is infinite; brackets are
//! computed in `G̃ / G̃_{≥K}` for an explicit truncation `K`, i.e. every term
//! of filtration degree `≥ K` is dropped. `G̃_{≥K}` is an ideal, so the
//! truncated bracket is again a Lie bracket.

use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use rand::Rng;

use crate::cyclo::{CycloField, CycloNum};
use crate::error::{Error, Result};
use crate::lincomb::LinComb;
use crate::matrep::XGenerators;
use crate::matrix::{ExactMatrix, RowReducer};
use crate::torus::{ExpVec, TorusSpec};

#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum GKey {
    /// `x^p d_{e_j}`, 0-based `j`
    XD { p: ExpVec, j: usize },
    /// `x^l t̄^w`
    XT { l: ExpVec, w: ExpVec },
}

impl GKey {
    pub fn filtration_degree(&self) -> usize {
        match self {
            GKey::XD { p, .. } => p.total() as usize - 1,
            GKey::XT { l, .. } => l.total() as usize,
        }
    }
}

impl fmt::Debug for GKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl fmt::Display for GKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GKey::XD { p, j } => write!(f, "XD({};{})", p.csv(), j + 1),
            GKey::XT { l, w } => write!(f, "XT({};{})", l.csv(), w.csv()),
        }
    }
}

pub type GElement = LinComb<GKey>;

pub fn xd(spec: &TorusSpec, p: impl Into<ExpVec>, j: usize) -> GElement {
    GElement::single(GKey::XD { p: p.into(), j }, CycloNum::one(spec.field()))
}

pub fn xt(spec: &TorusSpec, l: impl Into<ExpVec>, w: impl Into<ExpVec>) -> GElement {
    GElement::single(GKey::XT { l: l.into(), w: w.into() }, CycloNum::one(spec.field()))
}

pub fn validate_key(spec: &TorusSpec, key: &GKey) -> Result<()> {
    let d = spec.d();
    let bad = |why: &str| Err(Error::MalformedBasisKey(format!("{key}: {why}")));
    match key {
        GKey::XD { p, j } => {
            if p.len() != d || *j >= d {
                return bad("index or length out of range");
            }
            if !p.is_nonneg() || p.total() < 1 {
                return bad("exponent must be in N^d with |p| >= 1");
            }
        }
        GKey::XT { l, w } => {
            if l.len() != d || w.len() != d {
                return bad("wrong length");
            }
            if !l.is_nonneg() {
                return bad("polynomial exponent must be in N^d");
            }
            if !spec.in_gamma0(w) {
                return bad("class label is not a Γ₀ representative");
            }
        }
    }
    Ok(())
}

pub fn validate(spec: &TorusSpec, a: &GElement) -> Result<()> {
    a.keys().try_for_each(|k| validate_key(spec, k))
}

/// All `j ∈ N^d` with `|j| = total`, lexicographically descending in the
/// first coordinate.
pub fn multi_indices(d: usize, total: usize) -> Vec<ExpVec> {
    if d == 0 {
        return if total == 0 { vec![ExpVec(vec![])] } else { vec![] };
    }
    let mut out = Vec::new();
    for first in (0..=total).rev() {
        for rest in multi_indices(d - 1, total - first) {
            let mut v = vec![first as i64];
            v.extend(rest.0);
            out.push(ExpVec(v));
        }
    }
    out
}

/// `n^j / j!` for integer `n` and multi-index `j`.
pub fn taylor_coeff(n: &ExpVec, j: &ExpVec) -> BigRational {
    let mut num = BigInt::from(1);
    let mut den = BigInt::from(1);
    for (ni, ji) in n.iter().zip(j.iter()) {
        for t in 1..=*ji {
            num *= *ni;
            den *= t;
        }
    }
    BigRational::new(num, den)
}

fn push(out: &mut GElement, key: GKey, c: &CycloNum, trunc: usize) {
    if key.filtration_degree() < trunc {
        out.add_term(key, c);
    }
}

fn bracket_basis(spec: &TorusSpec, a: &GKey, b: &GKey, trunc: usize) -> GElement {
    let f = spec.field();
    let mut out = GElement::zero();
    match (a, b) {
        (GKey::XD { p: m, j: ia }, GKey::XD { p: n, j: ib }) => {
            let mn = m + n;
            if n[*ia] != 0 {
                push(&mut out, GKey::XD { p: mn.minus_unit(*ia), j: *ib }, &CycloNum::from_int(f, n[*ia]), trunc);
            }
            if m[*ib] != 0 {
                push(&mut out, GKey::XD { p: mn.minus_unit(*ib), j: *ia }, &CycloNum::from_int(f, -m[*ib]), trunc);
            }
        }
        (GKey::XD { p: m, j: ia }, GKey::XT { l, w }) => {
            let ml = m + l;
            if l[*ia] != 0 {
                push(&mut out, GKey::XT { l: ml.minus_unit(*ia), w: w.clone() }, &CycloNum::from_int(f, l[*ia]), trunc);
            }
            push(&mut out, GKey::XT { l: ml, w: w.clone() }, &CycloNum::from_int(f, w[*ia]), trunc);
        }
        (GKey::XT { .. }, GKey::XD { .. }) => return bracket_basis(spec, b, a, trunc).neg(),
        (GKey::XT { l: p, w: r }, GKey::XT { l, w: s }) => {
            let c = spec.commutator_coeff(r, s);
            if c.is_zero() {
                return out;
            }
            let (n, w) = spec.decompose(&(r + s));
            let base = p + l;
            let base_deg = base.total() as usize;
            for extra in 0..trunc.saturating_sub(base_deg) {
                for j in multi_indices(spec.d(), extra) {
                    let tc = taylor_coeff(&n, &j);
                    if tc == BigRational::from_integer(0.into()) {
                        continue;
                    }
                    push(&mut out, GKey::XT { l: &base + &j, w: w.clone() }, &c.scale(&tc), trunc);
                }
            }
        }
    }
    out
}

/// The bracket in `G̃ / G̃_{≥trunc}`.
pub fn bracket_g(spec: &TorusSpec, a: &GElement, b: &GElement, trunc: usize) -> Result<GElement> {
    validate(spec, a)?;
    validate(spec, b)?;
    Ok(a.bilinear(b, |x, y| bracket_basis(spec, x, y, trunc)))
}

/// Drops every term of filtration degree `≥ trunc`.
pub fn truncate(a: &GElement, trunc: usize) -> GElement {
    let mut out = a.clone();
    out.retain(|k| k.filtration_degree() < trunc);
    out
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum GammaDegree {
    Class(ExpVec),
    Mixed,
}

pub fn key_class(spec: &TorusSpec, key: &GKey) -> ExpVec {
    match key {
        GKey::XD { .. } => spec.zero_class(),
        GKey::XT { w, .. } => w.clone(),
    }
}

/// `None` for the zero element, which is homogeneous of every degree.
pub fn gamma_degree(spec: &TorusSpec, a: &GElement) -> Option<GammaDegree> {
    let mut classes = a.keys().map(|k| key_class(spec, k));
    let first = classes.next()?;
    if classes.all(|c| c == first) {
        Some(GammaDegree::Class(first))
    } else {
        Some(GammaDegree::Mixed)
    }
}

/// Minimum filtration degree over the terms; `None` for zero.
pub fn filtration_degree(a: &GElement) -> Option<usize> {
    a.keys().map(GKey::filtration_degree).min()
}

pub fn in_positive_part(a: &GElement) -> bool {
    filtration_degree(a).is_none_or(|d| d >= 1)
}

/// The projection `G̃ → G̃/G̃₊ ≅ gl_d ⊕ gl_N`.
pub fn project_quotient(spec: &TorusSpec, a: &GElement) -> (ExactMatrix, ExactMatrix) {
    let f = spec.field();
    let d = spec.d();
    let gens = XGenerators::new(spec);
    let mut gld = ExactMatrix::zeros(f, d, d);
    let mut gln = ExactMatrix::zeros(f, spec.n(), spec.n());
    for (k, c) in a.iter() {
        match k {
            GKey::XD { p, j } if p.total() == 1 => {
                let i = p.iter().position(|&x| x == 1).expect("unit exponent");
                gld.add_at(i, *j, c);
            }
            GKey::XT { l, w } if l.is_zero() => gln.add_scaled(c, &gens.power(w)),
            _ => {}
        }
    }
    (gld, gln)
}

/// Every basis key with `|p| ≤ max_deg` (XD) and `|l| ≤ max_deg` (XT).
pub fn basis_up_to(spec: &TorusSpec, max_deg: usize) -> Vec<GKey> {
    let d = spec.d();
    let mut out = Vec::new();
    for t in 1..=max_deg {
        for p in multi_indices(d, t) {
            for j in 0..d {
                out.push(GKey::XD { p: p.clone(), j });
            }
        }
    }
    for t in 0..=max_deg {
        for l in multi_indices(d, t) {
            for w in spec.gamma0() {
                out.push(GKey::XT { l: l.clone(), w: w.clone() });
            }
        }
    }
    out
}

pub fn random_key<R: Rng>(spec: &TorusSpec, rng: &mut R, max_deg: usize) -> GKey {
    let d = spec.d();
    let poly = |rng: &mut R, min: i64| loop {
        let v = ExpVec((0..d).map(|_| rng.gen_range(0..=max_deg as i64)).collect());
        if v.total() >= min && v.total() <= max_deg as i64 {
            return v;
        }
    };
    if rng.gen_bool(0.5) {
        let p = poly(rng, 1);
        GKey::XD { p, j: rng.gen_range(0..d) }
    } else {
        let l = poly(rng, 0);
        let w = spec.gamma0()[rng.gen_range(0..spec.gamma0().len())].clone();
        GKey::XT { l, w }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, serde::Serialize)]
pub struct SpanDegree {
    pub degree: usize,
    /// Dimension of the degree piece of `G̃^x`.
    pub piece_dim: usize,
    /// Dimension of the span of brackets landing in that piece.
    pub commutator_dim: usize,
}

/// Dimension of `[G̃^x, G̃^x]` in each filtration degree up to `max_degree`.
pub fn commutator_span_report(d: usize, max_degree: usize) -> Result<Vec<SpanDegree>> {
    // The x d-part does not depend on the torus; any spec of rank d will do.
    let spec = TorusSpec::new(d, 0, vec![], None)?;
    let q = CycloField::new(1)?;
    let pieces: Vec<Vec<GKey>> = (0..=max_degree)
        .map(|deg| {
            multi_indices(d, deg + 1)
                .into_iter()
                .flat_map(|p| (0..d).map(move |j| GKey::XD { p: p.clone(), j }))
                .collect()
        })
        .collect();
    let mut out = Vec::new();
    for deg in 0..=max_degree {
        let target = &pieces[deg];
        let index = |k: &GKey| target.iter().position(|t| t == k).expect("homogeneous bracket");
        let mut red = RowReducer::new(&q, target.len());
        for i1 in 0..=deg {
            let i2 = deg - i1;
            if i1 > i2 {
                break;
            }
            for a in &pieces[i1] {
                for b in &pieces[i2] {
                    let br = bracket_basis(&spec, a, b, usize::MAX);
                    let mut row = vec![CycloNum::zero(&q); target.len()];
                    for (k, c) in br.iter() {
                        row[index(k)] = CycloNum::from_rational(&q, c.as_rational().expect("rational").clone());
                    }
                    red.insert(row);
                }
            }
        }
        out.push(SpanDegree { degree: deg, piece_dim: target.len(), commutator_dim: red.rank() });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::liealg::jacobi_defect;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use rayon::prelude::*;

    fn e1() -> TorusSpec {
        TorusSpec::new(2, 1, vec![2], None).unwrap()
    }

    fn e2() -> TorusSpec {
        TorusSpec::new(2, 1, vec![3], None).unwrap()
    }

    fn int(spec: &TorusSpec, n: i64) -> CycloNum {
        CycloNum::from_int(spec.field(), n)
    }

    #[test]
    fn bracket_examples() {
        let t = e1();
        let r = bracket_g(&t, &xd(&t, [1, 0], 1), &xd(&t, [0, 1], 0), 6).unwrap();
        assert_eq!(r, xd(&t, [1, 0], 0).sub(&xd(&t, [0, 1], 1)));
        let r = bracket_g(&t, &xd(&t, [1, 0], 0), &xt(&t, [0, 0], [1, 2]), 6).unwrap();
        assert_eq!(r, xt(&t, [1, 0], [1, 2]));
        // modulo G̃₊ the t̄-bracket is the gl_N bracket
        let a = xt(&t, [0, 0], [1, 2]);
        let b = xt(&t, [0, 0], [2, 1]);
        assert_eq!(bracket_g(&t, &a, &b, 1).unwrap(), xt(&t, [0, 0], [1, 1]).scale(&int(&t, 2)));
        // r + s = (3,3) = (1,1) + (2,2): Taylor shift by n = (2,2)
        let full = bracket_g(&t, &a, &b, 3).unwrap();
        let mut want = xt(&t, [0, 0], [1, 1]).scale(&int(&t, 2));
        for (l, c) in [([1, 0], 4), ([0, 1], 4), ([2, 0], 4), ([1, 1], 8), ([0, 2], 4)] {
            want = want.add(&xt(&t, l, [1, 1]).scale(&int(&t, c)));
        }
        assert_eq!(full, want);
    }

    #[test]
    fn malformed() {
        let t = e1();
        let bad = GElement::single(GKey::XD { p: [0, 0].into(), j: 0 }, int(&t, 1));
        assert!(matches!(bracket_g(&t, &bad, &bad, 2), Err(Error::MalformedBasisKey(_))));
        let bad = xt(&t, [0, 0], [0, 1]);
        assert!(matches!(bracket_g(&t, &bad, &bad, 2), Err(Error::MalformedBasisKey(_))));
    }

    #[test]
    fn degrees() {
        let t = e1();
        assert_eq!(gamma_degree(&t, &xd(&t, [1, 0], 0)), Some(GammaDegree::Class(t.zero_class())));
        assert_eq!(gamma_degree(&t, &xt(&t, [2, 0], [1, 2])), Some(GammaDegree::Class([1, 2].into())));
        assert_eq!(gamma_degree(&t, &xd(&t, [1, 0], 0).add(&xt(&t, [0, 0], [1, 2]))), Some(GammaDegree::Mixed));
        assert_eq!(filtration_degree(&xd(&t, [1, 0], 1)), Some(0));
        assert_eq!(filtration_degree(&xt(&t, [0, 0], [1, 1])), Some(0));
        assert_eq!(filtration_degree(&xd(&t, [1, 1], 0)), Some(1));
        assert!(in_positive_part(&xd(&t, [1, 1], 0)));
    }

    #[test]
    fn quotient_examples() {
        let t = e1();
        let f = t.field();
        let (a, b) = project_quotient(&t, &xd(&t, [1, 0], 1));
        assert_eq!(a, ExactMatrix::from_ints(f, &[&[0, 1], &[0, 0]]));
        assert!(b.is_zero());
        let (a, b) = project_quotient(&t, &xt(&t, [0, 0], [1, 1]));
        assert!(a.is_zero());
        assert_eq!(b, ExactMatrix::from_ints(f, &[&[0, 1], &[-1, 0]]));
        let (a, b) = project_quotient(&t, &xd(&t, [1, 1], 0));
        assert!(a.is_zero() && b.is_zero());
        assert!(project_quotient(&t, &xt(&t, [0, 0], t.zero_class())).1.is_identity());
    }

    #[test]
    fn quotient_is_a_homomorphism_onto_gld_plus_gln() {
        for t in [e1(), e2()] {
            let deg0: Vec<GKey> = basis_up_to(&t, 1).into_iter().filter(|k| k.filtration_degree() == 0).collect();
            assert_eq!(deg0.len(), t.d() * t.d() + t.n() * t.n());
            let one = CycloNum::one(t.field());
            for a in &deg0 {
                for b in &deg0 {
                    let (ea, eb) = (GElement::single(a.clone(), one.clone()), GElement::single(b.clone(), one.clone()));
                    let (pa, qa) = project_quotient(&t, &ea);
                    let (pb, qb) = project_quotient(&t, &eb);
                    let (pc, qc) = project_quotient(&t, &bracket_g(&t, &ea, &eb, 2).unwrap());
                    assert_eq!(pc, pa.commutator(&pb));
                    assert_eq!(qc, qa.commutator(&qb));
                }
            }
        }
    }

    #[test]
    fn b3_vanishes_on_radical_sums() {
        for t in [e1(), e2()] {
            for r in t.gamma0() {
                for s in t.gamma0() {
                    if t.in_r(&(r + s)) {
                        assert!(t.commutator_coeff(r, s).is_zero());
                        let br = bracket_g(&t, &xt(&t, [0, 0], r.clone()), &xt(&t, [1, 0], s.clone()), 5).unwrap();
                        assert!(br.is_zero());
                    }
                }
            }
        }
    }

    #[test]
    fn grading_and_ideal() {
        let t = e1();
        let keys = basis_up_to(&t, 2);
        let one = CycloNum::one(t.field());
        for a in &keys {
            for b in &keys {
                let ea = GElement::single(a.clone(), one.clone());
                let eb = GElement::single(b.clone(), one.clone());
                let br = bracket_g(&t, &ea, &eb, 6).unwrap();
                if let Some(deg) = gamma_degree(&t, &br) {
                    let want = t.class_add(&key_class(&t, a), &key_class(&t, b));
                    assert_eq!(deg, GammaDegree::Class(want));
                }
                if b.filtration_degree() >= 1 {
                    assert!(in_positive_part(&br), "[{a}, {b}] leaves G̃₊");
                }
            }
        }
    }

    #[test]
    fn jacobi_exhaustive_e1() {
        let t = e1();
        let keys = basis_up_to(&t, 3);
        let one = CycloNum::one(t.field());
        let els: Vec<GElement> = keys.iter().map(|k| GElement::single(k.clone(), one.clone())).collect();
        let trunc = 10;
        let n = els.len();
        let failures: usize = (0..n)
            .into_par_iter()
            .map(|i| {
                let mut bad = 0;
                for j in i + 1..n {
                    let ab = bracket_g(&t, &els[i], &els[j], trunc).unwrap();
                    let ba = bracket_g(&t, &els[j], &els[i], trunc).unwrap();
                    if !ab.add(&ba).is_zero() {
                        bad += 1;
                    }
                    for k in j + 1..n {
                        let defect = jacobi_defect(&els[i], &els[j], &els[k], |x, y| bracket_g(&t, x, y, trunc).unwrap());
                        if !defect.is_zero() {
                            bad += 1;
                        }
                    }
                }
                bad
            })
            .sum();
        assert_eq!(failures, 0);
    }

    #[test]
    fn jacobi_random_e2() {
        let t = e2();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let one = CycloNum::one(t.field());
        let triples: Vec<[GElement; 3]> = (0..500)
            .map(|_| [0; 3].map(|_| GElement::single(random_key(&t, &mut rng, 3), one.clone())))
            .collect();
        assert!(triples
            .par_iter()
            .all(|[a, b, c]| jacobi_defect(a, b, c, |x, y| bracket_g(&t, x, y, 9).unwrap()).is_zero()));
    }

    #[test]
    fn commutator_spans() {
        let r = commutator_span_report(2, 3).unwrap();
        assert_eq!(r[0].commutator_dim, 3);
        assert_eq!(r[1].piece_dim, 6);
        for row in &r[1..] {
            assert_eq!(row.commutator_dim, row.piece_dim);
        }
        assert_eq!(commutator_span_report(3, 1).unwrap()[0].commutator_dim, 8);
    }

    #[test]
    fn taylor_coefficients() {
        let n: ExpVec = [2, -3].into();
        assert_eq!(taylor_coeff(&n, &[2, 1].into()), BigRational::from_integer((-6).into()));
        assert_eq!(multi_indices(3, 2).len(), 6);
    }
}
