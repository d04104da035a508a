//! The matrix realization `X^n` of `C_Q / I ≅ M_N(C)` and the Γ-graded Lie
//! algebra `gl_N`.

use crate::cyclo::CycloNum;
pub use crate::matrix::ExactMatrix;
use crate::matrix::RowReducer;
use crate::torus::{ExpVec, SigmaConvention, TorusSpec};

/// The generators `X_{2i-1}` (diagonal of powers of `q_i`) and `X_{2i}`
/// (cyclic shift) for every pair, each of size `k_i`.
#[derive(Clone, Debug)]
pub struct XGenerators {
    spec: TorusSpec,
    diag: Vec<ExactMatrix>,
    shift: Vec<ExactMatrix>,
}

impl XGenerators {
    pub fn new(spec: &TorusSpec) -> Self {
        let f = spec.field();
        let mut diag = Vec::new();
        let mut shift = Vec::new();
        for i in 0..spec.z() {
            let k = spec.k()[i] as usize;
            let q = spec.q(i);
            diag.push(ExactMatrix::from_fn(f, k, k, |a, b| if a == b { q.pow(a as u64) } else { CycloNum::zero(f) }));
            shift.push(ExactMatrix::from_fn(f, k, k, |a, b| {
                if b == (a + 1) % k {
                    CycloNum::one(f)
                } else {
                    CycloNum::zero(f)
                }
            }));
        }
        XGenerators { spec: spec.clone(), diag, shift }
    }

    /// `(X_{2i-1}, X_{2i})` for pair `i` (0-based).
    pub fn pair(&self, i: usize) -> (&ExactMatrix, &ExactMatrix) {
        (&self.diag[i], &self.shift[i])
    }

    /// `X_{2i-1}^a X_{2i}^b`: entry `(j, j+b mod k)` equals `q_i^{a j}`.
    fn factor(&self, i: usize, a: i64, b: i64) -> ExactMatrix {
        let spec = &self.spec;
        let f = spec.field();
        let k = spec.k()[i] as i64;
        let l = spec.order() as i64;
        let step = l / k;
        ExactMatrix::from_fn(f, k as usize, k as usize, |r, c| {
            if c as i64 == (r as i64 + b).rem_euclid(k) {
                CycloNum::root_of_unity(f, step * (a * r as i64).rem_euclid(k))
            } else {
                CycloNum::zero(f)
            }
        })
    }

    /// `X^n = ⊗_i X_{2i-1}^{n_{2i-1}} X_{2i}^{n_{2i}}`.
    pub fn power(&self, n: &ExpVec) -> ExactMatrix {
        let f = self.spec.field();
        let mut acc = ExactMatrix::identity(f, 1);
        for i in 0..self.spec.z() {
            acc = acc.kron(&self.factor(i, n[2 * i], n[2 * i + 1]));
        }
        acc
    }
}

pub fn x_power(spec: &TorusSpec, n: &ExpVec) -> ExactMatrix {
    XGenerators::new(spec).power(n)
}

/// Outcome of the exhaustive check `X^m X^n = σ̂(m,n) X^{m+n}`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ProductRelationReport {
    pub checked: usize,
    pub counterexample: Option<(ExpVec, ExpVec)>,
}

impl ProductRelationReport {
    pub fn passed(&self) -> bool {
        self.counterexample.is_none()
    }
}

fn box_points(d: usize, lo: i64, hi: i64) -> Vec<ExpVec> {
    let mut out = vec![ExpVec::zero(d)];
    for i in 0..d {
        out = out
            .into_iter()
            .flat_map(|v| {
                (lo..=hi).map(move |c| {
                    let mut w = v.clone();
                    w.0[i] = c;
                    w
                })
            })
            .collect();
    }
    out
}

/// All integer vectors with coordinates in `[lo, hi]`, lexicographic.
pub fn lattice_box(d: usize, lo: i64, hi: i64) -> Vec<ExpVec> {
    box_points(d, lo, hi)
}

/// Checks the product relation for every `m, n ∈ [0, box]^d`, stopping at
/// the first failure in lexicographic order.
pub fn verify_product_relation(spec: &TorusSpec, bound: i64, conv: SigmaConvention) -> ProductRelationReport {
    let gens = XGenerators::new(spec);
    let pts = box_points(spec.d(), 0, bound);
    let mats: Vec<ExactMatrix> = pts.iter().map(|p| gens.power(p)).collect();
    let mut checked = 0;
    for (i, m) in pts.iter().enumerate() {
        for (j, n) in pts.iter().enumerate() {
            checked += 1;
            let lhs = mats[i].mul(&mats[j]);
            let rhs = gens.power(&(m + n)).scale(&spec.sigma_with(conv, m, n));
            if lhs != rhs {
                return ProductRelationReport { checked, counterexample: Some((m.clone(), n.clone())) };
            }
        }
    }
    ProductRelationReport { checked, counterexample: None }
}

/// `[X^r, X^s] = (σ̂(r,s) − σ̂(s,r)) X^{r+s}`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct XTerm {
    pub coeff: CycloNum,
    /// Raw exponent `r + s`.
    pub exp: ExpVec,
    /// Its class in `Γ₀`.
    pub class: ExpVec,
}

pub fn gln_bracket(spec: &TorusSpec, r: &ExpVec, s: &ExpVec) -> XTerm {
    let exp = r + s;
    XTerm { coeff: spec.commutator_coeff(r, s), class: spec.canonical_rep(&exp), exp }
}

impl XTerm {
    pub fn to_matrix(&self, gens: &XGenerators) -> ExactMatrix {
        gens.power(&self.exp).scale(&self.coeff)
    }
}

/// Dimension of `span{X^w : w ∈ Γ₀}`; equals `N²` for a normal-form torus.
pub fn gamma0_span_dim(spec: &TorusSpec) -> usize {
    let gens = XGenerators::new(spec);
    let n2 = spec.n() * spec.n();
    let mut red = RowReducer::new(spec.field(), n2);
    for w in spec.gamma0() {
        red.insert(gens.power(w).flatten());
    }
    red.rank()
}

/// First `n ∈ R` in `[-bound, bound]^d` with `X^n ≠ I`, if any.
pub fn radical_identity_violation(spec: &TorusSpec, bound: i64) -> Option<ExpVec> {
    let gens = XGenerators::new(spec);
    box_points(spec.d(), -bound, bound)
        .into_iter()
        .filter(|n| spec.in_r(n))
        .find(|n| !gens.power(n).is_identity())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn e1() -> TorusSpec {
        TorusSpec::new(2, 1, vec![2], None).unwrap()
    }

    fn e2() -> TorusSpec {
        TorusSpec::new(2, 1, vec![3], None).unwrap()
    }

    #[test]
    fn small_powers() {
        let t = e1();
        let f = t.field();
        let x11 = x_power(&t, &ExpVec::from([1, 1]));
        assert_eq!(x11, ExactMatrix::from_ints(f, &[&[0, 1], &[-1, 0]]));
        assert!(x_power(&t, &ExpVec::from([2, 2])).is_identity());
        assert!(x_power(&e2(), &ExpVec::from([3, 0])).is_identity());
    }

    #[test]
    fn generators_match_displayed_form() {
        let t = e2();
        let g = XGenerators::new(&t);
        let (x1, x2) = g.pair(0);
        assert_eq!(&g.power(&ExpVec::from([1, 0])), x1);
        assert_eq!(&g.power(&ExpVec::from([0, 1])), x2);
        assert_eq!(g.power(&ExpVec::from([2, 1])), x1.mul(x1).mul(x2));
    }

    #[test]
    fn product_relation_and_flip() {
        assert!(verify_product_relation(&e1(), 4, SigmaConvention::Standard).passed());
        assert!(verify_product_relation(&e2(), 6, SigmaConvention::Standard).passed());
        let flipped = verify_product_relation(&e1(), 4, SigmaConvention::Flipped);
        assert_eq!(flipped.counterexample, Some((ExpVec::from([0, 1]), ExpVec::from([1, 0]))));
    }

    #[test]
    fn gln_brackets() {
        let t = e1();
        let g = XGenerators::new(&t);
        let b = gln_bracket(&t, &ExpVec::from([1, 0]), &ExpVec::from([0, 1]));
        assert_eq!(b.coeff, CycloNum::from_int(t.field(), 2));
        assert_eq!(b.to_matrix(&g), ExactMatrix::from_ints(t.field(), &[&[0, 2], &[-2, 0]]));
        assert!(gln_bracket(&t, &ExpVec::from([1, 0]), &ExpVec::from([1, 2])).coeff.is_zero());
        let r = ExpVec::from([1, 1]);
        assert!(gln_bracket(&t, &r, &r).coeff.is_zero());
    }

    #[test]
    fn bracket_matches_commutator_on_gamma0() {
        for t in [e1(), e2()] {
            let g = XGenerators::new(&t);
            for r in t.gamma0() {
                for s in t.gamma0() {
                    let lit = g.power(r).commutator(&g.power(s));
                    assert_eq!(gln_bracket(&t, r, s).to_matrix(&g), lit);
                }
            }
        }
    }

    #[test]
    fn grading_and_span() {
        for t in [e1(), e2()] {
            assert_eq!(gamma0_span_dim(&t), t.n() * t.n());
            assert_eq!(radical_identity_violation(&t, 2 * t.k()[0] as i64), None);
            let g = XGenerators::new(&t);
            for n in lattice_box(2, -3, 3) {
                assert_eq!(g.power(&n), g.power(&t.canonical_rep(&n)));
            }
        }
    }
}
