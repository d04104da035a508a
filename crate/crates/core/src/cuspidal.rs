//! Cuspidal `Z-D` modules `M = ⊕ U_s̄ ⊗ t^s` with support in `α + Z^d`.
//!
//! A weight vector is labelled by `s = w + n′` with `w ∈ Γ₀` and `n′ ∈ R`;
//! its coordinates live in `U_w`, and `t^n` (`n ∈ R`) only shifts the label.
//! Operators are computed on demand from either a graded `G̃`-module
//! (the functor direction) or a pair `(V, W)` (tensor fields).

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::cyclo::{CycloNum, FieldRef};
use crate::error::{Error, Result};
use crate::gtilde::{self, GKey};
use crate::lincomb::LinComb;
use crate::matrep::lattice_box;
use crate::matrix::{ExactMatrix, RowReducer};
use crate::repn::{self, GLdGLNModule, GRepresentation, GradedVectorSpace};
use crate::torus::{ExpVec, TorusSpec};

/// Basis symbols of `D ⋉ Z`: `t^m ∂_i` (`m ∈ R`) and `t^e`, where `t^e`
/// is central for `e ∈ R` and an inner derivation otherwise.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Symbol {
    Deriv { i: usize, m: ExpVec },
    T { e: ExpVec },
}

impl Symbol {
    pub fn exponent(&self) -> &ExpVec {
        match self {
            Symbol::Deriv { m, .. } => m,
            Symbol::T { e } => e,
        }
    }
}

impl fmt::Debug for Symbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl fmt::Display for Symbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Symbol::Deriv { i, m } => write!(f, "D({};{})", i + 1, m.csv()),
            Symbol::T { e } => write!(f, "T({})", e.csv()),
        }
    }
}

pub type SymElement = LinComb<Symbol>;

/// Bracket in `D ⋉ Z`; `[t^r, t^s] = (σ̂(r,s) − σ̂(s,r)) t^{r+s}` covers
/// inner and central parts alike.
pub fn bracket_symbols(spec: &TorusSpec, a: &Symbol, b: &Symbol) -> SymElement {
    let f = spec.field();
    let mut out = SymElement::zero();
    match (a, b) {
        (Symbol::Deriv { i, m }, Symbol::Deriv { i: j, m: n }) => {
            out.add_term(Symbol::Deriv { i: *j, m: m + n }, &CycloNum::from_int(f, n[*i]));
            out.add_term(Symbol::Deriv { i: *i, m: m + n }, &CycloNum::from_int(f, -m[*j]));
        }
        (Symbol::Deriv { i, m }, Symbol::T { e }) => {
            out.add_term(Symbol::T { e: m + e }, &CycloNum::from_int(f, e[*i]));
        }
        (Symbol::T { .. }, Symbol::Deriv { .. }) => return bracket_symbols(spec, b, a).neg(),
        (Symbol::T { e: r }, Symbol::T { e: s }) => {
            out.add_term(Symbol::T { e: r + s }, &spec.commutator_coeff(r, s));
        }
    }
    out
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WeightVector {
    pub class_label: ExpVec,
    pub central_shift: ExpVec,
    pub coords: Vec<CycloNum>,
}

impl WeightVector {
    pub fn at(spec: &TorusSpec, label: &ExpVec, coords: Vec<CycloNum>) -> Self {
        let (n, w) = spec.decompose(label);
        WeightVector { class_label: w, central_shift: n, coords }
    }

    pub fn label(&self) -> ExpVec {
        &self.class_label + &self.central_shift
    }
}

#[derive(Clone, Debug)]
pub enum ModuleAction {
    Functor(GRepresentation),
    TensorField(GLdGLNModule),
}

#[derive(Clone, Debug)]
pub struct CuspidalModule {
    pub spec: TorusSpec,
    pub alpha: Vec<CycloNum>,
    pub space: GradedVectorSpace,
    pub action: ModuleAction,
    /// Labels `s ∈ [-box, box]^d` form the materialized part.
    pub box_radius: i64,
    /// When false, acting outside the box is an error.
    pub lazy: bool,
}

fn check_alpha(spec: &TorusSpec, alpha: &[CycloNum]) -> Result<()> {
    if alpha.len() != spec.d() {
        return Err(Error::DimensionMismatch(format!("α has {} entries, expected {}", alpha.len(), spec.d())));
    }
    if let Some(a) = alpha.iter().find(|a| a.field().order() != spec.order()) {
        return Err(Error::FieldMismatch(a.field().order(), spec.order()));
    }
    Ok(())
}

/// `m^p / p!`
fn mono_coeff(field: &FieldRef, m: &ExpVec, p: &ExpVec) -> CycloNum {
    CycloNum::from_rational(field, gtilde::taylor_coeff(m, p))
}

/// The functor `G̃`-mod → cuspidal `Z-D`-mod.
pub fn build_module(spec: &TorusSpec, alpha: Vec<CycloNum>, rho: GRepresentation, box_radius: i64) -> Result<CuspidalModule> {
    check_alpha(spec, &alpha)?;
    let report = repn::verify_representation(spec, &rho, rho.cutoff.max(1))?;
    if let Some(msg) = report.failure {
        return Err(Error::InvalidRepresentation(msg));
    }
    Ok(CuspidalModule {
        spec: spec.clone(),
        alpha,
        space: rho.space.clone(),
        action: ModuleAction::Functor(rho),
        box_radius,
        lazy: true,
    })
}

/// `F^α(V, W)`: `∂(u,m)` acts by `(u|α+s) + Σ m_i u_j E_ij` on `V` and
/// `t^e` by `X^e` on `W`.
pub fn tensor_field_module(spec: &TorusSpec, alpha: Vec<CycloNum>, vw: GLdGLNModule, box_radius: i64) -> Result<CuspidalModule> {
    check_alpha(spec, &alpha)?;
    vw.validate(spec)?;
    Ok(CuspidalModule {
        spec: spec.clone(),
        alpha,
        space: vw.tensor_space(spec)?,
        action: ModuleAction::TensorField(vw),
        box_radius,
        lazy: true,
    })
}

impl CuspidalModule {
    pub fn field(&self) -> &FieldRef {
        self.spec.field()
    }

    pub fn in_box(&self, label: &ExpVec) -> bool {
        label.iter().all(|x| x.abs() <= self.box_radius)
    }

    pub fn labels(&self) -> Vec<ExpVec> {
        lattice_box(self.spec.d(), -self.box_radius, self.box_radius)
    }

    pub fn weight_dim(&self, label: &ExpVec) -> usize {
        self.space.class_dim(&self.spec.canonical_rep(label))
    }

    fn block(&self, m: &ExactMatrix, to: &ExpVec, from: &ExpVec) -> ExactMatrix {
        let (ti, fi) = (self.space.index_of(to).expect("class"), self.space.index_of(from).expect("class"));
        m.submatrix(self.space.offset(ti), self.space.offset(fi), self.space.dims()[ti], self.space.dims()[fi])
    }

    /// Matrix of `sym` from `M_{α+s}` to `M_{α+s+e}` and the target label.
    pub fn op_matrix(&self, sym: &Symbol, s: &ExpVec) -> Result<(ExpVec, ExactMatrix)> {
        let spec = &self.spec;
        let f = spec.field();
        let target = s + sym.exponent();
        if !self.lazy && !(self.in_box(s) && self.in_box(&target)) {
            return Err(Error::OutOfBox(format!("{sym} from label {s}")));
        }
        let w = spec.canonical_rep(s);
        let nw = self.space.class_dim(&w);
        let m = match (sym, &self.action) {
            (Symbol::Deriv { i, m }, _) if !spec.in_r(m) => return Err(Error::ExponentNotInR(m.clone())),
            (Symbol::Deriv { i, m }, ModuleAction::Functor(rho)) => {
                let constant = &self.alpha[*i] + &CycloNum::from_int(f, s[*i]);
                let mut out = ExactMatrix::scalar(f, nw, &constant);
                for (key, mat) in rho.nonzero() {
                    if let GKey::XD { p, j } = key {
                        if j == i {
                            let c = mono_coeff(f, m, p);
                            if !c.is_zero() {
                                out.add_scaled(&c, &self.block(mat, &w, &w));
                            }
                        }
                    }
                }
                out
            }
            (Symbol::Deriv { i, m }, ModuleAction::TensorField(vw)) => {
                let constant = &self.alpha[*i] + &CycloNum::from_int(f, s[*i]);
                let nv = vw.v.dim();
                let mut gv = ExactMatrix::zeros(f, nv, nv);
                for (k, mk) in m.iter().enumerate() {
                    if *mk != 0 {
                        gv.add_scaled(&CycloNum::from_int(f, *mk), vw.v.e(k, *i));
                    }
                }
                let nwc = nw / nv.max(1);
                let mut out = ExactMatrix::scalar(f, nw, &constant);
                out.add_assign(&gv.kron(&ExactMatrix::identity(f, nwc)));
                out
            }
            (Symbol::T { e }, _) if spec.in_r(e) => ExactMatrix::identity(f, nw),
            (Symbol::T { e }, ModuleAction::Functor(rho)) => {
                let (mshift, r) = spec.decompose(e);
                let to = spec.class_add(&w, &r);
                let mut out = ExactMatrix::zeros(f, self.space.class_dim(&to), nw);
                for (key, mat) in rho.nonzero() {
                    if let GKey::XT { l, w: kw } = key {
                        if *kw == r {
                            let c = mono_coeff(f, &mshift, l);
                            if !c.is_zero() {
                                out.add_scaled(&c, &self.block(mat, &to, &w));
                            }
                        }
                    }
                }
                out
            }
            (Symbol::T { e }, ModuleAction::TensorField(vw)) => {
                let r = spec.canonical_rep(e);
                let to = spec.class_add(&w, &r);
                let x = &vw.w.action[&r];
                let rows: Vec<usize> = (0..vw.w.dim()).filter(|&b| vw.w.grading[b] == to).collect();
                let cols: Vec<usize> = (0..vw.w.dim()).filter(|&b| vw.w.grading[b] == w).collect();
                let wb = ExactMatrix::from_fn(f, rows.len(), cols.len(), |a, b| x.get(rows[a], cols[b]).clone());
                ExactMatrix::identity(f, vw.v.dim()).kron(&wb)
            }
        };
        Ok((target, m))
    }

    pub fn act(&self, sym: &Symbol, v: &WeightVector) -> Result<WeightVector> {
        let label = v.label();
        if v.coords.len() != self.weight_dim(&label) {
            return Err(Error::DimensionMismatch(format!("weight vector at {label} has the wrong length")));
        }
        let (target, m) = self.op_matrix(sym, &label)?;
        Ok(WeightVector::at(&self.spec, &target, m.mul_vec(&v.coords)))
    }

    /// Matrix of a combination of symbols that share one exponent.
    pub fn element_matrix(&self, a: &SymElement, s: &ExpVec, target: &ExpVec) -> Result<ExactMatrix> {
        let f = self.field();
        let mut out = ExactMatrix::zeros(f, self.weight_dim(target), self.weight_dim(s));
        for (sym, c) in a.iter() {
            let (t, m) = self.op_matrix(sym, s)?;
            if &t != target {
                return Err(Error::InvalidInput(format!("{sym} does not land at {target}")));
            }
            out.add_scaled(c, &m);
        }
        Ok(out)
    }

    /// The generator set used for dumps and box-scale irreducibility: all
    /// symbols with exponents in `[-b, b]^d`, `b` the largest period.
    pub fn generator_symbols(&self) -> Vec<Symbol> {
        let spec = &self.spec;
        let b = (0..spec.d()).map(|i| spec.period(i)).max().unwrap_or(1);
        let mut out = Vec::new();
        for e in lattice_box(spec.d(), -b, b) {
            if spec.in_r(&e) {
                out.extend((0..spec.d()).map(|i| Symbol::Deriv { i, m: e.clone() }));
            }
            out.push(Symbol::T { e });
        }
        out
    }
}

pub fn random_symbol<R: Rng>(spec: &TorusSpec, rng: &mut R, bound: i64) -> Symbol {
    let d = spec.d();
    loop {
        let e = ExpVec((0..d).map(|_| rng.gen_range(-bound..=bound)).collect());
        if spec.in_r(&e) && rng.gen_bool(0.5) {
            return Symbol::Deriv { i: rng.gen_range(0..d), m: e };
        }
        if rng.gen_bool(0.5) {
            return Symbol::T { e };
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, serde::Serialize)]
pub struct AxiomReport {
    pub pairs_checked: usize,
    pub labels_checked: usize,
    pub failure: Option<String>,
}

impl AxiomReport {
    pub fn passed(&self) -> bool {
        self.failure.is_none()
    }
}

/// Checks `[a,b]·v = a(b v) − b(a v)` for `sample_count` random symbol
/// pairs with exponents in `[-symbol_box, symbol_box]^d` on every label of
/// the module box, and `t^m(t^n v) = t^{m+n} v` for central `m, n`.
pub fn verify_module_axioms(module: &CuspidalModule, symbol_box: i64, sample_count: usize, seed: u64) -> Result<AxiomReport> {
    let spec = &module.spec;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let labels = module.labels();
    let pairs: Vec<(Symbol, Symbol)> = (0..sample_count)
        .map(|_| (random_symbol(spec, &mut rng, symbol_box), random_symbol(spec, &mut rng, symbol_box)))
        .collect();
    for (k, (a, b)) in pairs.iter().enumerate() {
        let br = bracket_symbols(spec, a, b);
        for s in &labels {
            let target = &(s + a.exponent()) + b.exponent();
            let (sb, mb) = module.op_matrix(b, s)?;
            let (_, mab) = module.op_matrix(a, &sb)?;
            let (sa, ma) = module.op_matrix(a, s)?;
            let (_, mba) = module.op_matrix(b, &sa)?;
            let lhs = module.element_matrix(&br, s, &target)?;
            if lhs != mab.mul(&mb).sub(&mba.mul(&ma)) {
                return Ok(AxiomReport {
                    pairs_checked: k + 1,
                    labels_checked: labels.len(),
                    failure: Some(format!("[{a}, {b}] acts incorrectly at label {s}")),
                });
            }
        }
    }
    // associativity of the central action
    let gens = spec.r_generators();
    for _ in 0..sample_count.min(20) {
        let pick = |rng: &mut ChaCha8Rng| {
            gens.iter().fold(ExpVec::zero(spec.d()), |acc, g| &acc + &g.scaled(rng.gen_range(-2..=2)))
        };
        let (m, n) = (pick(&mut rng), pick(&mut rng));
        for s in &labels {
            let (sn, a) = module.op_matrix(&Symbol::T { e: n.clone() }, s)?;
            let (_, b) = module.op_matrix(&Symbol::T { e: m.clone() }, &sn)?;
            let (_, c) = module.op_matrix(&Symbol::T { e: &m + &n }, s)?;
            if b.mul(&a) != c {
                return Ok(AxiomReport {
                    pairs_checked: pairs.len(),
                    labels_checked: labels.len(),
                    failure: Some(format!("central action not associative for {m}, {n} at {s}")),
                });
            }
        }
    }
    Ok(AxiomReport { pairs_checked: pairs.len(), labels_checked: labels.len(), failure: None })
}

/// Whether all symbols with exponents in the box act identically on all
/// labels in the box.
pub fn modules_equal_on_box(a: &CuspidalModule, b: &CuspidalModule, radius: i64) -> Result<bool> {
    if a.spec.d() != b.spec.d() || a.spec.k() != b.spec.k() || a.spec.order() != b.spec.order() {
        return Err(Error::DimensionMismatch("modules over different tori".into()));
    }
    if a.space.dims() != b.space.dims() {
        return Err(Error::DimensionMismatch(format!(
            "component dimensions {:?} vs {:?}",
            a.space.dims(),
            b.space.dims()
        )));
    }
    let spec = &a.spec;
    let points = lattice_box(spec.d(), -radius, radius);
    for s in &points {
        for e in &points {
            let mut syms = vec![Symbol::T { e: e.clone() }];
            if spec.in_r(e) {
                syms.extend((0..spec.d()).map(|i| Symbol::Deriv { i, m: e.clone() }));
            }
            for sym in syms {
                if a.op_matrix(&sym, s)?.1 != b.op_matrix(&sym, s)?.1 {
                    return Ok(false);
                }
            }
        }
    }
    Ok(true)
}

#[derive(Clone, Debug, PartialEq, Eq, serde::Serialize)]
pub struct Multiplicities {
    /// Weight label `s` (weight `α + s`) and the dimension of `M_{α+s}`.
    pub dims: BTreeMap<ExpVec, usize>,
    pub bound: usize,
}

impl Multiplicities {
    pub fn uniform(&self) -> Option<usize> {
        let mut it = self.dims.values();
        let first = *it.next()?;
        it.all(|&x| x == first).then_some(first)
    }
}

pub fn weight_multiplicities(module: &CuspidalModule, radius: i64) -> Multiplicities {
    let dims: BTreeMap<ExpVec, usize> =
        lattice_box(module.spec.d(), -radius, radius).into_iter().map(|s| {
            let n = module.weight_dim(&s);
            (s, n)
        }).collect();
    let bound = dims.values().copied().max().unwrap_or(0);
    Multiplicities { dims, bound }
}

type DOp<'a> = Box<dyn Fn(usize, &ExpVec) -> Result<ExactMatrix> + Sync + 'a>;
type LOp<'a> = Box<dyn Fn(&ExpVec, &ExpVec) -> Result<ExactMatrix> + Sync + 'a>;

/// `D(u, m)` and `L(m, r)` as operators on `U = ⊕_{w ∈ Γ₀} U_w`.
pub struct OperatorFamily<'a> {
    pub space: GradedVectorSpace,
    pub degree_bound: usize,
    d_op: DOp<'a>,
    l_op: LOp<'a>,
}

impl<'a> OperatorFamily<'a> {
    pub fn new(
        space: GradedVectorSpace,
        degree_bound: usize,
        d_op: impl Fn(usize, &ExpVec) -> Result<ExactMatrix> + Sync + 'a,
        l_op: impl Fn(&ExpVec, &ExpVec) -> Result<ExactMatrix> + Sync + 'a,
    ) -> Self {
        OperatorFamily { space, degree_bound, d_op: Box::new(d_op), l_op: Box::new(l_op) }
    }

    /// Reads `D(u,m) = t^{-m} ∂(u,m)` and `L(m,r) = t^{-m} t^{m+r}` off a
    /// module, identifying `M_{α+s}` with `U_{s̄}` through the central shift.
    pub fn from_module(module: &'a CuspidalModule, degree_bound: usize) -> Self {
        let space = module.space.clone();
        let d_op = move |u: usize, m: &ExpVec| -> Result<ExactMatrix> {
            let n = module.space.total();
            let mut out = ExactMatrix::zeros(module.field(), n, n);
            for (ci, w) in module.space.classes().iter().enumerate() {
                if module.space.dims()[ci] == 0 {
                    continue;
                }
                let (_, b) = module.op_matrix(&Symbol::Deriv { i: u, m: m.clone() }, w)?;
                let off = module.space.offset(ci);
                out.set_block(off, off, &b);
            }
            Ok(out)
        };
        let l_op = move |m: &ExpVec, r: &ExpVec| -> Result<ExactMatrix> {
            let n = module.space.total();
            let mut out = ExactMatrix::zeros(module.field(), n, n);
            for (ci, w) in module.space.classes().iter().enumerate() {
                if module.space.dims()[ci] == 0 {
                    continue;
                }
                let (t, b) = module.op_matrix(&Symbol::T { e: m + r }, w)?;
                let ti = module.space.index_of(&module.spec.canonical_rep(&t)).expect("class");
                out.set_block(module.space.offset(ti), module.space.offset(ci), &b);
            }
            Ok(out)
        };
        OperatorFamily::new(space, degree_bound, d_op, l_op)
    }

    pub fn d(&self, u: usize, m: &ExpVec) -> Result<ExactMatrix> {
        (self.d_op)(u, m)
    }

    pub fn l(&self, m: &ExpVec, r: &ExpVec) -> Result<ExactMatrix> {
        (self.l_op)(m, r)
    }
}

/// `f(u,p)` and `g(w,p)` with `D(u,m) = Σ m^p/p! f(u,p)` and
/// `L(m,w) = Σ m^p/p! g(w,p)`. Only nonzero coefficients are stored.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PolynomialCoefficients {
    pub space: GradedVectorSpace,
    pub f: BTreeMap<(usize, ExpVec), ExactMatrix>,
    pub g: BTreeMap<(ExpVec, ExpVec), ExactMatrix>,
}

/// Signed Stirling numbers of the first kind `s(n, k)` for `n ≤ max`.
fn stirling_first(max: usize) -> Vec<Vec<BigInt>> {
    let mut s = vec![vec![BigInt::from(0); max + 1]; max + 1];
    s[0][0] = BigInt::from(1);
    for n in 0..max {
        for k in 0..=n + 1 {
            let prev = if k > 0 { s[n][k - 1].clone() } else { BigInt::from(0) };
            s[n + 1][k] = prev - BigInt::from(n as i64) * &s[n][k];
        }
    }
    s
}

fn grid_index(c: &[usize], side: usize) -> usize {
    c.iter().fold(0, |acc, &x| acc * side + x)
}

fn grid_points(d: usize, side: usize) -> Vec<Vec<usize>> {
    let mut out = vec![vec![]];
    for _ in 0..d {
        out = out.into_iter().flat_map(|v| (0..side).map(move |x| {
            let mut w = v.clone();
            w.push(x);
            w
        })).collect();
    }
    out
}

/// Interpolates `F(c)` on `c ∈ [0, D]^d` and returns the monomial
/// coefficients `A[q]` of `F(c) = Σ A[q] c^q`, keyed by `q`.
fn interpolate(field: &FieldRef, d: usize, deg: usize, values: Vec<ExactMatrix>) -> BTreeMap<ExpVec, ExactMatrix> {
    let side = deg + 1;
    let pts = grid_points(d, side);
    let mut v = values;
    // forward differences along each axis
    for axis in 0..d {
        let stride = side.pow((d - 1 - axis) as u32);
        for p in &pts {
            if p[axis] != 0 {
                continue;
            }
            let base = grid_index(p, side);
            for k in 1..side {
                for idx in (k..side).rev() {
                    let hi = base + idx * stride;
                    let lo = base + (idx - 1) * stride;
                    let diff = v[hi].sub(&v[lo]);
                    v[hi] = diff;
                }
            }
        }
    }
    // Newton basis Π C(c_i, j_i) to monomials: C(c, j) = Σ_q s(j,q) c^q / j!
    let st = stirling_first(deg);
    let fact = |n: usize| (1..=n as i64).fold(BigInt::from(1), |a, b| a * b);
    let mut out: BTreeMap<ExpVec, ExactMatrix> = BTreeMap::new();
    for j in &pts {
        let nj = &v[grid_index(j, side)];
        if nj.is_zero() {
            continue;
        }
        for q in grid_points(d, side) {
            if q.iter().zip(j).any(|(a, b)| a > b) {
                continue;
            }
            let mut c = BigRational::from_integer(BigInt::from(1));
            for (qi, ji) in q.iter().zip(j) {
                c *= BigRational::new(st[*ji][*qi].clone(), fact(*ji));
            }
            if c == BigRational::from_integer(BigInt::from(0)) {
                continue;
            }
            let key = ExpVec(q.iter().map(|&x| x as i64).collect());
            let entry = out.entry(key).or_insert_with(|| ExactMatrix::zeros(field, nj.rows(), nj.cols()));
            entry.add_scaled(&CycloNum::from_rational(field, c), nj);
        }
    }
    out.retain(|_, m| !m.is_zero());
    out
}

fn eval_poly(field: &FieldRef, coeffs: &BTreeMap<ExpVec, ExactMatrix>, c: &[i64], n: usize) -> ExactMatrix {
    let mut out = ExactMatrix::zeros(field, n, n);
    for (q, m) in coeffs {
        let mut x = BigInt::from(1);
        for (ci, qi) in c.iter().zip(q.iter()) {
            x *= BigInt::from(*ci).pow(*qi as u32);
        }
        out.add_scaled(&CycloNum::from_rational(field, BigRational::from_integer(x)), m);
    }
    out
}

/// Recovers the polynomial coefficients of an operator family by exact
/// finite differences on `m = B c`, `c ∈ [0, D]^d`.
pub fn extract_coefficients(family: &OperatorFamily<'_>, spec: &TorusSpec, alpha: &[CycloNum]) -> Result<PolynomialCoefficients> {
    check_alpha(spec, alpha)?;
    let f = spec.field();
    let d = spec.d();
    let deg = family.degree_bound;
    let b = spec.b_diag();
    let n = family.space.total();
    let grid = grid_points(d, deg + 1);
    let to_m = |c: &[i64]| ExpVec(c.iter().zip(&b).map(|(x, bi)| x * bi).collect());
    let probes: [Vec<i64>; 2] = [vec![deg as i64 + 1; d], (1..=d as i64).map(|x| -x).collect()];

    let fit = |eval: &dyn Fn(&ExpVec) -> Result<ExactMatrix>, what: &str| -> Result<BTreeMap<ExpVec, ExactMatrix>> {
        let values = grid
            .iter()
            .map(|c| eval(&to_m(&c.iter().map(|&x| x as i64).collect::<Vec<_>>())))
            .collect::<Result<Vec<_>>>()?;
        let a = interpolate(f, d, deg, values);
        if let Some(q) = a.keys().find(|q| q.total() as usize > deg) {
            return Err(Error::DegreeBoundViolated(format!("{what}: monomial c^{q} exceeds degree {deg}")));
        }
        for c in &probes {
            if eval_poly(f, &a, c, n) != eval(&to_m(c))? {
                return Err(Error::DegreeBoundViolated(format!("{what}: interpolant misses the operator at c={c:?}")));
            }
        }
        // c^q = m^q / b^q and D = Σ m^p/p! f(p)
        Ok(a.into_iter()
            .map(|(q, m)| {
                let mut scale = BigRational::from_integer(BigInt::from(1));
                for (qi, bi) in q.iter().zip(&b) {
                    for t in 1..=*qi {
                        scale *= BigRational::new(BigInt::from(t), BigInt::from(*bi));
                    }
                }
                let m = m.scale(&CycloNum::from_rational(f, scale));
                (q, m)
            })
            .collect())
    };

    let mut fmap = BTreeMap::new();
    for u in 0..d {
        let coeffs = fit(&|m: &ExpVec| family.d(u, m), &format!("D(e_{},·)", u + 1))?;
        let constant = coeffs.get(&ExpVec::zero(d)).cloned().unwrap_or_else(|| ExactMatrix::zeros(f, n, n));
        let mut want = ExactMatrix::zeros(f, n, n);
        for (ci, w) in family.space.classes().iter().enumerate() {
            let dim = family.space.dims()[ci];
            let c = &alpha[u] + &CycloNum::from_int(f, w[u]);
            let off = family.space.offset(ci);
            want.set_block(off, off, &ExactMatrix::scalar(f, dim, &c));
        }
        if constant != want {
            return Err(Error::ConstantTermMismatch(format!("f(e_{}, 0) is not (e_{}|α+s)·Id blockwise", u + 1, u + 1)));
        }
        for (p, m) in coeffs {
            fmap.insert((u, p), m);
        }
    }
    let mut gmap = BTreeMap::new();
    for r in spec.gamma0() {
        let coeffs = fit(&|m: &ExpVec| family.l(m, r), &format!("L(·,{r})"))?;
        for (p, m) in coeffs {
            gmap.insert((r.clone(), p), m);
        }
    }
    Ok(PolynomialCoefficients { space: family.space.clone(), f: fmap, g: gmap })
}

/// `ρ(x^p d_u) = f(u,p)` for `|p| ≥ 1` and `ρ(x^l t̄^w) = g(w,l)`; the
/// constant terms `f(u,0)` are dropped.
pub fn coefficients_to_representation(coeffs: &PolynomialCoefficients, spec: &TorusSpec) -> Result<GRepresentation> {
    let mut entries: Vec<(GKey, ExactMatrix)> = Vec::new();
    for ((u, p), m) in &coeffs.f {
        if p.total() >= 1 {
            entries.push((GKey::XD { p: p.clone(), j: *u }, m.clone()));
        }
    }
    for ((w, l), m) in &coeffs.g {
        entries.push((GKey::XT { l: l.clone(), w: w.clone() }, m.clone()));
    }
    let cutoff = entries.iter().filter(|(_, m)| !m.is_zero()).map(|(k, _)| k.filtration_degree() + 1).max().unwrap_or(0);
    let mut rep = GRepresentation::new(spec, coeffs.space.clone(), cutoff);
    for (k, m) in entries {
        gtilde::validate_key(spec, &k)?;
        rep.set(k, m)?;
    }
    let report = repn::verify_representation(spec, &rep, cutoff.max(1))?;
    if let Some(msg) = report.failure {
        return Err(Error::RelationViolated(msg));
    }
    Ok(rep)
}

/// Checks the commutation relations of `D(u,m)` and `L(m,r)` on `M` for
/// sampled `u, v ∈ {e_i}`, `m, n ∈ R`, `r, s ∈ Γ₀`, at every label of the
/// module box, using the module action directly.
pub fn check_operator_relations(module: &CuspidalModule, samples: usize, seed: u64) -> Result<AxiomReport> {
    let spec = &module.spec;
    let f = spec.field();
    let d = spec.d();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let gens = spec.r_generators();
    let pick_r = |rng: &mut ChaCha8Rng| gens.iter().fold(ExpVec::zero(d), |acc, g| &acc + &g.scaled(rng.gen_range(-2..=2)));
    let g0 = spec.gamma0();
    // D(u,m) and L(m,r) starting at label s; both return (target, matrix)
    let dop = |u: usize, m: &ExpVec, s: &ExpVec| -> Result<(ExpVec, ExactMatrix)> {
        let (t, x) = module.op_matrix(&Symbol::Deriv { i: u, m: m.clone() }, s)?;
        Ok((&t - m, x))
    };
    let lop = |m: &ExpVec, r: &ExpVec, s: &ExpVec| -> Result<(ExpVec, ExactMatrix)> {
        let (t, x) = module.op_matrix(&Symbol::T { e: m + r }, s)?;
        Ok((&t - m, x))
    };
    let int = |x: i64| CycloNum::from_int(f, x);
    let labels = module.labels();
    for k in 0..samples {
        let (u, v) = (rng.gen_range(0..d), rng.gen_range(0..d));
        let (m, n) = (pick_r(&mut rng), pick_r(&mut rng));
        let r = g0[rng.gen_range(0..g0.len())].clone();
        let s = g0[rng.gen_range(0..g0.len())].clone();
        for lab in &labels {
            // [D(u,m), D(v,n)]
            let (_, a) = dop(v, &n, lab)?;
            let (_, b) = dop(u, &m, lab)?;
            let (_, ab) = dop(u, &m, lab)?;
            let lhs = ab.mul(&a).sub(&dop(v, &n, lab)?.1.mul(&b));
            let mn = &m + &n;
            let rhs = dop(v, &mn, lab)?.1.sub(&a).scale(&int(n[u])).sub(&dop(u, &mn, lab)?.1.sub(&b).scale(&int(m[v])));
            if lhs != rhs {
                return Ok(AxiomReport { pairs_checked: k + 1, labels_checked: labels.len(), failure: Some(format!("[D(e{},{m}), D(e{},{n})] at {lab}", u + 1, v + 1)) });
            }
            // [D(u,m), L(n,s)]
            let (ls, lmat) = lop(&n, &s, lab)?;
            let lhs = dop(u, &m, &ls)?.1.mul(&lmat).sub(&lmat.mul(&dop(u, &m, lab)?.1));
            let ns = &n + &s;
            let rhs = lop(&mn, &s, lab)?.1.scale(&int(ns[u])).sub(&lmat.scale(&int(n[u])));
            if lhs != rhs {
                return Ok(AxiomReport { pairs_checked: k + 1, labels_checked: labels.len(), failure: Some(format!("[D(e{},{m}), L({n},{s})] at {lab}", u + 1)) });
            }
            // [L(m,r), L(n,s)]
            let (lr, lrm) = lop(&m, &r, lab)?;
            let lhs = lop(&m, &r, &ls)?.1.mul(&lmat).sub(&lop(&n, &s, &lr)?.1.mul(&lrm));
            let rhs = lop(&mn, &(&r + &s), lab)?.1.scale(&spec.commutator_coeff(&r, &s));
            if lhs != rhs {
                return Ok(AxiomReport { pairs_checked: k + 1, labels_checked: labels.len(), failure: Some(format!("[L({m},{r}), L({n},{s})] at {lab}")) });
            }
        }
    }
    Ok(AxiomReport { pairs_checked: samples, labels_checked: labels.len(), failure: None })
}

#[derive(Clone, Debug, PartialEq, Eq, serde::Serialize)]
pub struct BoxIrreducibility {
    pub dim: usize,
    pub commutant_dim: usize,
    pub cyclic: bool,
}

impl BoxIrreducibility {
    pub fn holds(&self) -> bool {
        self.commutant_dim == 1 && self.cyclic
    }
}

/// Box-scale evidence of irreducibility: the weight-preserving maps on
/// `⊕_{s in box} M_{α+s}` commuting with every generator (where both ends
/// lie in the box) are scalars, and every basis vector generates the
/// whole box under the box-restricted action.
pub fn box_irreducibility(module: &CuspidalModule, radius: i64) -> Result<BoxIrreducibility> {
    let spec = &module.spec;
    let f = spec.field();
    let labels = lattice_box(spec.d(), -radius, radius);
    let index: BTreeMap<&ExpVec, usize> = labels.iter().enumerate().map(|(i, s)| (s, i)).collect();
    let dims: Vec<usize> = labels.iter().map(|s| module.weight_dim(s)).collect();
    let offs: Vec<usize> = dims.iter().scan(0, |acc, &x| {
        let o = *acc;
        *acc += x;
        Some(o)
    }).collect();
    let total: usize = dims.iter().sum();
    let in_box = |s: &ExpVec| s.iter().all(|x| x.abs() <= radius);
    let mut ops: Vec<(usize, usize, ExactMatrix)> = Vec::new();
    for sym in module.generator_symbols() {
        for (i, s) in labels.iter().enumerate() {
            let t = s + sym.exponent();
            if !in_box(&t) {
                continue;
            }
            let (_, m) = module.op_matrix(&sym, s)?;
            if !m.is_zero() {
                ops.push((i, index[&t], m));
            }
        }
    }
    // commutant: unknown blocks C_s; equation A C_s − C_t A = 0
    let var_off: Vec<usize> = dims.iter().scan(0, |acc, &x| {
        let o = *acc;
        *acc += x * x;
        Some(o)
    }).collect();
    let nvars: usize = dims.iter().map(|x| x * x).sum();
    let mut red = RowReducer::new(f, nvars);
    for (si, ti, a) in &ops {
        let (ds, dt) = (dims[*si], dims[*ti]);
        for r in 0..dt {
            for c in 0..ds {
                let mut eq = vec![CycloNum::zero(f); nvars];
                for k in 0..ds {
                    let x = a.get(r, k);
                    if !x.is_zero() {
                        eq[var_off[*si] + k * ds + c] += x;
                    }
                }
                for k in 0..dt {
                    let x = a.get(k, c);
                    if !x.is_zero() {
                        eq[var_off[*ti] + r * dt + k] -= x;
                    }
                }
                if eq.iter().any(|x| !x.is_zero()) {
                    red.insert(eq);
                }
            }
        }
    }
    let commutant_dim = nvars - red.rank();
    // cyclicity
    let embed = |li: usize, v: &[CycloNum]| {
        let mut out = vec![CycloNum::zero(f); total];
        out[offs[li]..offs[li] + dims[li]].clone_from_slice(v);
        out
    };
    let mut cyclic = true;
    'start: for (li, &dl) in dims.iter().enumerate() {
        for k in 0..dl {
            let mut e = vec![CycloNum::zero(f); dl];
            e[k] = CycloNum::one(f);
            let mut red = RowReducer::new(f, total);
            let mut queue = vec![embed(li, &e)];
            while let Some(v) = queue.pop() {
                if !red.insert(v.clone()) {
                    continue;
                }
                for (si, ti, a) in &ops {
                    let part = &v[offs[*si]..offs[*si] + dims[*si]];
                    if part.iter().all(CycloNum::is_zero) {
                        continue;
                    }
                    let img = a.mul_vec(part);
                    if img.iter().any(|x| !x.is_zero()) {
                        queue.push(embed(*ti, &img));
                    }
                }
                if red.rank() == total {
                    break;
                }
            }
            if red.rank() != total {
                cyclic = false;
                break 'start;
            }
        }
    }
    Ok(BoxIrreducibility { dim: total, commutant_dim, cyclic })
}

/// Weight labels of the box in dump order: class label, then central shift.
pub fn dump_order(module: &CuspidalModule) -> Vec<ExpVec> {
    let mut labels: Vec<(ExpVec, ExpVec, ExpVec)> = module
        .labels()
        .into_iter()
        .map(|s| {
            let (n, w) = module.spec.decompose(&s);
            (w, n, s)
        })
        .collect();
    labels.sort();
    labels.into_iter().map(|(_, _, s)| s).collect()
}

/// The symbols listed in a dump: `∂(e_i, 0)`, `∂(e_i, ±b_j e_j)` and
/// `t^{±e_j}`.
pub fn dump_symbols(spec: &TorusSpec) -> Vec<Symbol> {
    let d = spec.d();
    let mut out: BTreeSet<Symbol> = BTreeSet::new();
    for i in 0..d {
        out.insert(Symbol::Deriv { i, m: ExpVec::zero(d) });
        for g in spec.r_generators() {
            out.insert(Symbol::Deriv { i, m: g.clone() });
            out.insert(Symbol::Deriv { i, m: g.scaled(-1) });
        }
        out.insert(Symbol::T { e: ExpVec::unit(d, i) });
        out.insert(Symbol::T { e: ExpVec::unit(d, i).scaled(-1) });
    }
    out.into_iter().collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::repn::{graded_regular_gln, jet_module, natural_gld, pullback};

    fn e1() -> TorusSpec {
        TorusSpec::new(2, 1, vec![2], None).unwrap()
    }

    fn zero_alpha(t: &TorusSpec) -> Vec<CycloNum> {
        vec![CycloNum::zero(t.field()); t.d()]
    }

    fn nat_reg(t: &TorusSpec) -> GLdGLNModule {
        GLdGLNModule { v: natural_gld(t.field(), t.d()), w: graded_regular_gln(t) }
    }

    fn functor_module(t: &TorusSpec, radius: i64) -> CuspidalModule {
        build_module(t, zero_alpha(t), pullback(t, &nat_reg(t)).unwrap(), radius).unwrap()
    }

    fn unit(t: &TorusSpec, n: usize, k: usize) -> Vec<CycloNum> {
        (0..n).map(|i| if i == k { CycloNum::one(t.field()) } else { CycloNum::zero(t.field()) }).collect()
    }

    #[test]
    fn action_examples() {
        let t = e1();
        let m = functor_module(&t, 3);
        // U_{(1,1)} has basis v1⊗X^{(1,1)}, v2⊗X^{(1,1)}
        let v = WeightVector { class_label: [1, 1].into(), central_shift: [0, 0].into(), coords: unit(&t, 2, 1) };
        let out = m.act(&Symbol::Deriv { i: 0, m: [2, 0].into() }, &v).unwrap();
        assert_eq!(out.label(), ExpVec::from([3, 1]));
        assert_eq!(out.class_label, ExpVec::from([1, 1]));
        assert_eq!(out.coords, unit(&t, 2, 1));

        let v = WeightVector { class_label: [1, 1].into(), central_shift: [0, 0].into(), coords: unit(&t, 2, 0) };
        let out = m.act(&Symbol::T { e: [1, 0].into() }, &v).unwrap();
        assert_eq!(out.class_label, ExpVec::from([2, 1]));
        assert_eq!(out.label(), ExpVec::from([2, 1]));
        assert_eq!(out.coords, unit(&t, 2, 0));

        let out = m.act(&Symbol::T { e: [2, 0].into() }, &v).unwrap();
        assert_eq!(out.class_label, v.class_label);
        assert_eq!(out.central_shift, ExpVec::from([2, 0]));
        assert_eq!(out.coords, v.coords);
    }

    #[test]
    fn tensor_field_examples() {
        let t = e1();
        let m = tensor_field_module(&t, zero_alpha(&t), nat_reg(&t), 3).unwrap();
        let v = WeightVector { class_label: [1, 1].into(), central_shift: [0, 0].into(), coords: unit(&t, 2, 0) };
        let out = m.act(&Symbol::Deriv { i: 0, m: [2, 0].into() }, &v).unwrap();
        assert_eq!(out.label(), ExpVec::from([3, 1]));
        let three: Vec<CycloNum> = unit(&t, 2, 0).iter().map(|x| x.scale_int(3)).collect();
        assert_eq!(out.coords, three);
        // v ⊗ X^{(1,1)} ⊗ t^0 lives at label 0 = (2,2) + (-2,-2)
        let v = WeightVector { class_label: [2, 2].into(), central_shift: [-2, -2].into(), coords: unit(&t, 2, 0) };
        let out = m.act(&Symbol::T { e: [1, 0].into() }, &v).unwrap();
        assert_eq!(out.label(), ExpVec::from([1, 0]));
        assert_eq!(out.class_label, ExpVec::from([1, 2]));
    }

    #[test]
    fn functor_satisfies_module_axioms() {
        let t = e1();
        let m = functor_module(&t, 2);
        assert!(verify_module_axioms(&m, 3, 25, 1).unwrap().passed());
        let jet = build_module(&t, zero_alpha(&t), jet_module(&t, 2).unwrap(), 1).unwrap();
        assert!(verify_module_axioms(&jet, 3, 25, 2).unwrap().passed());
        assert!(check_operator_relations(&jet, 10, 3).unwrap().passed());
        assert!(check_operator_relations(&m, 10, 3).unwrap().passed());
    }

    #[test]
    fn corrupted_rho_is_rejected_or_caught() {
        let t = e1();
        let mut rho = pullback(&t, &nat_reg(&t)).unwrap();
        let key = GKey::XD { p: [1, 0].into(), j: 0 };
        let mut bad = rho.rho_key(&key);
        bad.add_at(0, 0, &CycloNum::one(t.field()));
        rho.set(key, bad).unwrap();
        assert!(matches!(build_module(&t, zero_alpha(&t), rho.clone(), 2), Err(Error::InvalidRepresentation(_))));
        let m = CuspidalModule {
            spec: t.clone(),
            alpha: zero_alpha(&t),
            space: rho.space.clone(),
            action: ModuleAction::Functor(rho),
            box_radius: 2,
            lazy: true,
        };
        assert!(!verify_module_axioms(&m, 3, 40, 1).unwrap().passed());
    }

    #[test]
    fn functor_image_is_a_tensor_field_module() {
        let t = e1();
        let a = functor_module(&t, 2);
        let b = tensor_field_module(&t, zero_alpha(&t), nat_reg(&t), 2).unwrap();
        assert!(modules_equal_on_box(&a, &b, 2).unwrap());
        let half = vec![CycloNum::from_ratio(t.field(), 1, 2), CycloNum::zero(t.field())];
        let c = tensor_field_module(&t, half, nat_reg(&t), 2).unwrap();
        assert!(!modules_equal_on_box(&a, &c, 2).unwrap());
        let mut shifted = nat_reg(&t);
        shifted.w.grading = shifted.w.grading.iter().map(|g| t.class_add(g, &[1, 2].into())).collect();
        let d = tensor_field_module(&t, zero_alpha(&t), shifted, 2).unwrap();
        assert!(!modules_equal_on_box(&a, &d, 2).unwrap());
    }

    #[test]
    fn round_trips() {
        let t = e1();
        for rho in [pullback(&t, &nat_reg(&t)).unwrap(), jet_module(&t, 2).unwrap()] {
            let alpha = vec![CycloNum::from_ratio(t.field(), 1, 3), CycloNum::root_of_unity(t.field(), 1)];
            let m = build_module(&t, alpha.clone(), rho.clone(), 2).unwrap();
            let fam = OperatorFamily::from_module(&m, 3);
            let coeffs = extract_coefficients(&fam, &t, &alpha).unwrap();
            let back = coefficients_to_representation(&coeffs, &t).unwrap();
            assert_eq!(back.space, rho.space);
            assert_eq!(back.cutoff, repn::min_annihilation_degree(&rho));
            let keys: BTreeSet<&GKey> = back.nonzero().chain(rho.nonzero()).map(|(k, _)| k).collect();
            for k in keys {
                assert_eq!(back.get(k), rho.get(k), "{k}");
            }
        }
    }

    #[test]
    fn extraction_failures() {
        let t = e1();
        let alpha = zero_alpha(&t);
        let m = functor_module(&t, 2);
        let base = OperatorFamily::from_module(&m, 3);
        // a cubic-in-m perturbation at degree bound 1
        let low = OperatorFamily::from_module(&m, 1);
        let jet = build_module(&t, alpha.clone(), jet_module(&t, 3).unwrap(), 2).unwrap();
        let jet_low = OperatorFamily::from_module(&jet, 1);
        assert!(matches!(extract_coefficients(&jet_low, &t, &alpha), Err(Error::DegreeBoundViolated(_))));
        assert!(extract_coefficients(&low, &t, &alpha).is_ok());
        let shifted = vec![CycloNum::one(t.field()), CycloNum::zero(t.field())];
        assert!(matches!(extract_coefficients(&base, &t, &shifted), Err(Error::ConstantTermMismatch(_))));
        let mut coeffs = extract_coefficients(&base, &t, &alpha).unwrap();
        let key = (0usize, ExpVec::from([1, 0]));
        let mut bad = coeffs.f[&key].clone();
        bad.add_at(1, 0, &CycloNum::one(t.field()));
        coeffs.f.insert(key, bad);
        assert!(matches!(coefficients_to_representation(&coeffs, &t), Err(Error::RelationViolated(_))));
    }

    #[test]
    fn multiplicities_and_irreducibility() {
        let t = e1();
        let m = functor_module(&t, 4);
        let mult = weight_multiplicities(&m, 4);
        assert_eq!(mult.uniform(), Some(2));
        let half = vec![CycloNum::from_ratio(t.field(), 1, 2), CycloNum::from_ratio(t.field(), 1, 3)];
        let tf = tensor_field_module(&t, half, nat_reg(&t), 1).unwrap();
        let irr = box_irreducibility(&tf, 1).unwrap();
        assert_eq!(irr.commutant_dim, 1);
        assert!(irr.cyclic);
    }

    #[test]
    fn out_of_box_when_not_lazy() {
        let t = e1();
        let mut m = functor_module(&t, 1);
        m.lazy = false;
        let v = WeightVector::at(&t, &[1, 1].into(), unit(&t, 2, 0));
        assert!(matches!(m.act(&Symbol::T { e: [1, 0].into() }, &v), Err(Error::OutOfBox(_))));
    }
}
