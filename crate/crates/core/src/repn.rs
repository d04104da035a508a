//! Finite-dimensional Γ-graded `G̃`-modules and `gl_d ⊕ gl_N`-modules.
//!
//! A graded space keeps its basis class-major: the basis of `U_w` for the
//! first class of `Γ₀` comes first, and so on.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::cyclo::{CycloNum, FieldRef};
use crate::error::{Error, Result};
use crate::gtilde::{self, bracket_g, GElement, GKey};
use crate::matrix::{ExactMatrix, RowReducer};
use crate::torus::{ExpVec, TorusSpec};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GradedVectorSpace {
    classes: Vec<ExpVec>,
    dims: Vec<usize>,
}

impl GradedVectorSpace {
    /// `dims[i]` is the dimension of the component of `spec.gamma0()[i]`.
    pub fn new(spec: &TorusSpec, dims: Vec<usize>) -> Result<Self> {
        if dims.len() != spec.gamma0().len() {
            return Err(Error::InvalidModuleData(format!(
                "expected {} class dimensions, got {}",
                spec.gamma0().len(),
                dims.len()
            )));
        }
        Ok(GradedVectorSpace { classes: spec.gamma0().to_vec(), dims })
    }

    pub fn classes(&self) -> &[ExpVec] {
        &self.classes
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn total(&self) -> usize {
        self.dims.iter().sum()
    }

    pub fn offset(&self, class_idx: usize) -> usize {
        self.dims[..class_idx].iter().sum()
    }

    pub fn class_dim(&self, w: &ExpVec) -> usize {
        self.index_of(w).map_or(0, |i| self.dims[i])
    }

    pub fn index_of(&self, w: &ExpVec) -> Option<usize> {
        self.classes.binary_search(w).ok()
    }

    /// Class index of each basis vector.
    pub fn basis_classes(&self) -> Vec<usize> {
        self.dims.iter().enumerate().flat_map(|(i, &n)| std::iter::repeat_n(i, n)).collect()
    }
}

/// `ρ` on the generators of filtration degree `< cutoff`; all others act
/// as zero. Absent keys act as zero too.
#[derive(Clone, Debug)]
pub struct GRepresentation {
    pub space: GradedVectorSpace,
    pub cutoff: usize,
    field: FieldRef,
    action: BTreeMap<GKey, ExactMatrix>,
}

impl GRepresentation {
    pub fn new(spec: &TorusSpec, space: GradedVectorSpace, cutoff: usize) -> Self {
        GRepresentation { space, cutoff, field: spec.field().clone(), action: BTreeMap::new() }
    }

    pub fn field(&self) -> &FieldRef {
        &self.field
    }

    pub fn dim(&self) -> usize {
        self.space.total()
    }

    pub fn set(&mut self, key: GKey, m: ExactMatrix) -> Result<()> {
        let n = self.dim();
        if m.rows() != n || m.cols() != n {
            return Err(Error::DimensionMismatch(format!("{key}: {}x{} on a space of dim {n}", m.rows(), m.cols())));
        }
        if m.is_zero() {
            self.action.remove(&key);
            return Ok(());
        }
        if key.filtration_degree() >= self.cutoff {
            return Err(Error::InvalidRepresentation(format!("{key} has degree ≥ cutoff {} but acts nonzero", self.cutoff)));
        }
        self.action.insert(key, m);
        Ok(())
    }

    pub fn get(&self, key: &GKey) -> Option<&ExactMatrix> {
        self.action.get(key)
    }

    pub fn rho_key(&self, key: &GKey) -> ExactMatrix {
        self.action.get(key).cloned().unwrap_or_else(|| ExactMatrix::zeros(&self.field, self.dim(), self.dim()))
    }

    pub fn rho(&self, a: &GElement) -> ExactMatrix {
        let mut out = ExactMatrix::zeros(&self.field, self.dim(), self.dim());
        for (k, c) in a.iter() {
            if let Some(m) = self.action.get(k) {
                out.add_scaled(c, m);
            }
        }
        out
    }

    /// Generators acting nonzero.
    pub fn nonzero(&self) -> impl Iterator<Item = (&GKey, &ExactMatrix)> {
        self.action.iter()
    }
}

/// `V` as a `gl_d`-module: `E_ij` acts by `action[i*d + j]`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GlDModule {
    pub d: usize,
    pub action: Vec<ExactMatrix>,
}

impl GlDModule {
    pub fn dim(&self) -> usize {
        self.action.first().map_or(0, ExactMatrix::rows)
    }

    pub fn e(&self, i: usize, j: usize) -> &ExactMatrix {
        &self.action[i * self.d + j]
    }
}

/// `W` as a Γ-graded `gl_N`-module: `X^w` acts by `action[w]`, the `b`-th
/// basis vector lies in class `grading[b]`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GlNModule {
    pub action: BTreeMap<ExpVec, ExactMatrix>,
    pub grading: Vec<ExpVec>,
}

impl GlNModule {
    pub fn dim(&self) -> usize {
        self.grading.len()
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GLdGLNModule {
    pub v: GlDModule,
    pub w: GlNModule,
}

pub fn natural_gld(field: &FieldRef, d: usize) -> GlDModule {
    let action = (0..d * d)
        .map(|ij| {
            let (i, j) = (ij / d, ij % d);
            ExactMatrix::from_fn(field, d, d, |r, c| {
                if r == i && c == j {
                    CycloNum::one(field)
                } else {
                    CycloNum::zero(field)
                }
            })
        })
        .collect();
    GlDModule { d, action }
}

pub fn trivial_gld(field: &FieldRef, d: usize) -> GlDModule {
    GlDModule { d, action: vec![ExactMatrix::zeros(field, 1, 1); d * d] }
}

/// `M_N` with `X^w` acting by left multiplication; the basis vector for
/// class `v` is `X^v`, so `X^w · X^v = σ̂(w,v) X^{rep(w+v)}`.
pub fn graded_regular_gln(spec: &TorusSpec) -> GlNModule {
    let f = spec.field();
    let classes = spec.gamma0();
    let n = classes.len();
    let mut action = BTreeMap::new();
    for w in classes {
        let mut m = ExactMatrix::zeros(f, n, n);
        for (col, v) in classes.iter().enumerate() {
            let target = spec.class_index(&spec.class_add(w, v));
            m.set(target, col, spec.sigma_hat(w, v));
        }
        action.insert(w.clone(), m);
    }
    GlNModule { action, grading: classes.to_vec() }
}

impl GLdGLNModule {
    pub fn validate(&self, spec: &TorusSpec) -> Result<()> {
        let bad = |s: String| Err(Error::InvalidModuleData(s));
        let d = spec.d();
        if self.v.d != d || self.v.action.len() != d * d {
            return bad(format!("V needs {} matrices E_ij", d * d));
        }
        let nv = self.v.dim();
        if nv == 0 || self.v.action.iter().any(|m| m.rows() != nv || m.cols() != nv) {
            return bad("V matrices must be square of a common positive size".into());
        }
        for i in 0..d {
            for j in 0..d {
                for k in 0..d {
                    for l in 0..d {
                        let lhs = self.v.e(i, j).commutator(self.v.e(k, l));
                        let mut rhs = ExactMatrix::zeros(spec.field(), nv, nv);
                        if j == k {
                            rhs = rhs.add(self.v.e(i, l));
                        }
                        if l == i {
                            rhs = rhs.sub(self.v.e(k, j));
                        }
                        if lhs != rhs {
                            return bad(format!("[E_{}{}, E_{}{}] relation fails on V", i + 1, j + 1, k + 1, l + 1));
                        }
                    }
                }
            }
        }
        let nw = self.w.dim();
        if nw == 0 {
            return bad("W has dimension 0".into());
        }
        if self.w.grading.iter().any(|g| !spec.in_gamma0(g)) {
            return bad("W grading uses a label outside Γ₀".into());
        }
        for w in spec.gamma0() {
            let Some(m) = self.w.action.get(w) else {
                return bad(format!("missing action of X^{w} on W"));
            };
            if m.rows() != nw || m.cols() != nw {
                return bad(format!("X^{w} has the wrong size"));
            }
            for (c, src) in self.w.grading.iter().enumerate() {
                let want = spec.class_add(w, src);
                for (r, dst) in self.w.grading.iter().enumerate() {
                    if *dst != want && !m.get(r, c).is_zero() {
                        return bad(format!("X^{w} does not respect the W grading"));
                    }
                }
            }
        }
        if !self.w.action[&spec.zero_class()].is_identity() {
            return bad("the identity class X^0 must act as the identity on W".into());
        }
        for r in spec.gamma0() {
            for s in spec.gamma0() {
                let lhs = self.w.action[r].commutator(&self.w.action[s]);
                let rhs = self.w.action[&spec.class_add(r, s)].scale(&spec.commutator_coeff(r, s));
                if lhs != rhs {
                    return bad(format!("[X^{r}, X^{s}] relation fails on W"));
                }
            }
        }
        Ok(())
    }

    /// Basis of `V ⊗ W` in graded order: class, then `V` index, then `W`
    /// index. Returns `(a, b)` pairs.
    pub fn tensor_basis(&self, spec: &TorusSpec) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for w in spec.gamma0() {
            for a in 0..self.v.dim() {
                for (b, g) in self.w.grading.iter().enumerate() {
                    if g == w {
                        out.push((a, b));
                    }
                }
            }
        }
        out
    }

    pub fn tensor_space(&self, spec: &TorusSpec) -> Result<GradedVectorSpace> {
        let dims = spec
            .gamma0()
            .iter()
            .map(|w| self.v.dim() * self.w.grading.iter().filter(|g| *g == w).count())
            .collect();
        GradedVectorSpace::new(spec, dims)
    }
}

/// `A ⊗ B` on the graded basis `basis`.
fn tensor_op(field: &FieldRef, basis: &[(usize, usize)], a: Option<&ExactMatrix>, b: Option<&ExactMatrix>) -> ExactMatrix {
    let n = basis.len();
    ExactMatrix::from_fn(field, n, n, |r, c| {
        let (ra, rb) = basis[r];
        let (ca, cb) = basis[c];
        let x = match a {
            Some(m) => m.get(ra, ca).clone(),
            None if ra == ca => CycloNum::one(field),
            None => return CycloNum::zero(field),
        };
        if x.is_zero() {
            return x;
        }
        match b {
            Some(m) => &x * m.get(rb, cb),
            None if rb == cb => x,
            None => CycloNum::zero(field),
        }
    })
}

/// The `G̃`-module `V ⊗ W` through `G̃ → G̃/G̃₊ ≅ gl_d ⊕ gl_N`.
pub fn pullback(spec: &TorusSpec, vw: &GLdGLNModule) -> Result<GRepresentation> {
    vw.validate(spec)?;
    let f = spec.field();
    let d = spec.d();
    let basis = vw.tensor_basis(spec);
    let mut rep = GRepresentation::new(spec, vw.tensor_space(spec)?, 1);
    for i in 0..d {
        for j in 0..d {
            let m = tensor_op(f, &basis, Some(vw.v.e(i, j)), None);
            rep.set(GKey::XD { p: ExpVec::unit(d, i), j }, m)?;
        }
    }
    for w in spec.gamma0() {
        let m = tensor_op(f, &basis, None, Some(&vw.w.action[w]));
        rep.set(GKey::XT { l: ExpVec::zero(d), w: w.clone() }, m)?;
    }
    Ok(rep)
}

/// Polynomials of degree `< k` in `d` variables, graded by degree.
fn monomial_basis(d: usize, k: usize) -> Vec<ExpVec> {
    (0..k).flat_map(|t| gtilde::multi_indices(d, t)).collect()
}

/// `P_K ⊗ W_reg` with `x^p d_a ↦ x^p ∂_a` and `x^l t̄^s ↦ x^l e^{s·x} ⊗ X^s`
/// on `C[x]/(x)^K`; the generators `x^l t̄^{0̄}` act by `δ_{l0}`.
/// Its annihilation degree is exactly `K`.
pub fn jet_module(spec: &TorusSpec, k: usize) -> Result<GRepresentation> {
    if k == 0 {
        return Err(Error::InvalidInput("jet order must be positive".into()));
    }
    let f = spec.field();
    let d = spec.d();
    let mons = monomial_basis(d, k);
    let pos = |e: &ExpVec| mons.iter().position(|m| m == e);
    let reg = graded_regular_gln(spec);
    // basis: class-major, then monomial
    let basis: Vec<(usize, usize)> =
        (0..spec.gamma0().len()).flat_map(|c| (0..mons.len()).map(move |a| (a, c))).collect();
    let space = GradedVectorSpace::new(spec, vec![mons.len(); spec.gamma0().len()])?;
    let mut rep = GRepresentation::new(spec, space, k);

    for t in 1..=k {
        for p in gtilde::multi_indices(d, t) {
            for a in 0..d {
                let mut poly = ExactMatrix::zeros(f, mons.len(), mons.len());
                for (c, m) in mons.iter().enumerate() {
                    if m[a] == 0 {
                        continue;
                    }
                    if let Some(r) = pos(&(&m.minus_unit(a) + &p)) {
                        poly.set(r, c, CycloNum::from_int(f, m[a]));
                    }
                }
                if !poly.is_zero() {
                    rep.set(GKey::XD { p: p.clone(), j: a }, tensor_op(f, &basis, Some(&poly), None))?;
                }
            }
        }
    }
    let zero_class = spec.zero_class();
    for t in 0..k {
        for l in gtilde::multi_indices(d, t) {
            for s in spec.gamma0() {
                if *s == zero_class {
                    if l.is_zero() {
                        rep.set(GKey::XT { l: l.clone(), w: s.clone() }, ExactMatrix::identity(f, basis.len()))?;
                    }
                    continue;
                }
                // multiplication by x^l e^{s·x}: coefficient of x^j in e^{s·x} is s^j/j!
                let mut poly = ExactMatrix::zeros(f, mons.len(), mons.len());
                for (c, m) in mons.iter().enumerate() {
                    for j in &mons {
                        let target = &(m + &l) + j;
                        if let Some(r) = pos(&target) {
                            let coeff = gtilde::taylor_coeff(s, j);
                            poly.add_at(r, c, &CycloNum::from_rational(f, coeff));
                        }
                    }
                }
                rep.set(GKey::XT { l: l.clone(), w: s.clone() }, tensor_op(f, &basis, Some(&poly), Some(&reg.action[s])))?;
            }
        }
    }
    Ok(rep)
}

#[derive(Clone, Debug, PartialEq, Eq, serde::Serialize)]
pub struct RepReport {
    pub pairs_checked: usize,
    pub failure: Option<String>,
}

impl RepReport {
    pub fn passed(&self) -> bool {
        self.failure.is_none()
    }
}

/// Whether every acting matrix shifts the grading by the generator's class.
pub fn grading_violation(spec: &TorusSpec, rep: &GRepresentation) -> Option<String> {
    let cls = rep.space.basis_classes();
    let classes = rep.space.classes();
    for (key, m) in rep.nonzero() {
        let shift = gtilde::key_class(spec, key);
        for c in 0..m.cols() {
            let want = spec.class_add(&classes[cls[c]], &shift);
            for r in 0..m.rows() {
                if !m.get(r, c).is_zero() && classes[cls[r]] != want {
                    return Some(format!("{key} maps class {} into {}", classes[cls[c]], classes[cls[r]]));
                }
            }
        }
    }
    None
}

/// Checks `ρ([a,b]) = [ρ(a), ρ(b)]` for all generator pairs of filtration
/// degree `≤ degree_bound`. Brackets are taken modulo `G̃_{≥cutoff}`, which
/// acts as zero.
pub fn verify_representation(spec: &TorusSpec, rep: &GRepresentation, degree_bound: usize) -> Result<RepReport> {
    if let Some(msg) = grading_violation(spec, rep) {
        return Ok(RepReport { pairs_checked: 0, failure: Some(msg) });
    }
    let keys: Vec<GKey> = gtilde::basis_up_to(spec, degree_bound + 1)
        .into_iter()
        .filter(|k| k.filtration_degree() <= degree_bound)
        .collect();
    let one = CycloNum::one(rep.field());
    let mut checked = 0;
    for (i, a) in keys.iter().enumerate() {
        for b in &keys[i + 1..] {
            checked += 1;
            let ra = rep.get(a);
            let rb = rep.get(b);
            let lhs = match (ra, rb) {
                (Some(x), Some(y)) => Some(x.commutator(y)),
                _ => None,
            };
            let br = bracket_g(spec, &GElement::single(a.clone(), one.clone()), &GElement::single(b.clone(), one.clone()), rep.cutoff)?;
            let rhs = rep.rho(&br);
            let ok = match lhs {
                Some(l) => l == rhs,
                None => rhs.is_zero(),
            };
            if !ok {
                return Ok(RepReport { pairs_checked: checked, failure: Some(format!("ρ([{a}, {b}]) ≠ [ρ({a}), ρ({b})]")) });
            }
        }
    }
    Ok(RepReport { pairs_checked: checked, failure: None })
}

/// Basis of `{F : L_g F = F R_g for all g}` among `rows × cols` matrices
/// whose support is allowed by `mask`.
pub fn intertwiners(
    field: &FieldRef,
    pairs: &[(&ExactMatrix, &ExactMatrix)],
    rows: usize,
    cols: usize,
    mask: &dyn Fn(usize, usize) -> bool,
) -> Vec<ExactMatrix> {
    let mut var = vec![vec![None; cols]; rows];
    let mut nvars = 0;
    for (r, row) in var.iter_mut().enumerate() {
        for (c, slot) in row.iter_mut().enumerate() {
            if mask(r, c) {
                *slot = Some(nvars);
                nvars += 1;
            }
        }
    }
    let mut red = RowReducer::new(field, nvars);
    'outer: for (l, rm) in pairs {
        for i in 0..rows {
            for j in 0..cols {
                if red.rank() == nvars {
                    break 'outer;
                }
                // (L F)_{ij} − (F R)_{ij}
                let mut eq = vec![CycloNum::zero(field); nvars];
                let mut any = false;
                for k in 0..rows {
                    let x = l.get(i, k);
                    if !x.is_zero() {
                        if let Some(v) = var[k][j] {
                            eq[v] += x;
                            any = true;
                        }
                    }
                }
                for k in 0..cols {
                    let x = rm.get(k, j);
                    if !x.is_zero() {
                        if let Some(v) = var[i][k] {
                            eq[v] -= x;
                            any = true;
                        }
                    }
                }
                if any {
                    red.insert(eq);
                }
            }
        }
    }
    red.kernel()
        .into_iter()
        .map(|sol| {
            let mut m = ExactMatrix::zeros(field, rows, cols);
            for (r, row) in var.iter().enumerate() {
                for (c, slot) in row.iter().enumerate() {
                    if let Some(v) = slot {
                        m.set(r, c, sol[*v].clone());
                    }
                }
            }
            m
        })
        .collect()
}

/// Degree-preserving endomorphisms commuting with every generator.
pub fn commutant(rep: &GRepresentation) -> Vec<ExactMatrix> {
    let cls = rep.space.basis_classes();
    let n = rep.dim();
    let pairs: Vec<(&ExactMatrix, &ExactMatrix)> = rep.nonzero().map(|(_, m)| (m, m)).collect();
    intertwiners(rep.field(), &pairs, n, n, &|r, c| cls[r] == cls[c])
}

pub fn is_absolutely_irreducible(rep: &GRepresentation) -> bool {
    commutant(rep).len() == 1
}

/// Least `p` such that every generator of filtration degree `≥ p` acts as 0.
pub fn min_annihilation_degree(rep: &GRepresentation) -> usize {
    rep.nonzero().map(|(k, _)| k.filtration_degree() + 1).max().unwrap_or(0)
}

pub fn direct_sum(spec: &TorusSpec, a: &GRepresentation, b: &GRepresentation) -> Result<GRepresentation> {
    let f = spec.field();
    let dims: Vec<usize> = a.space.dims().iter().zip(b.space.dims()).map(|(x, y)| x + y).collect();
    let space = GradedVectorSpace::new(spec, dims)?;
    // position of a's and b's basis vectors in the sum
    let mut pa = Vec::new();
    let mut pb = Vec::new();
    let mut at = 0;
    for (x, y) in a.space.dims().iter().zip(b.space.dims()) {
        pa.extend(at..at + x);
        pb.extend(at + x..at + x + y);
        at += x + y;
    }
    let mut out = GRepresentation::new(spec, space, a.cutoff.max(b.cutoff));
    let keys: std::collections::BTreeSet<&GKey> = a.nonzero().chain(b.nonzero()).map(|(k, _)| k).collect();
    for key in keys {
        let mut m = ExactMatrix::zeros(f, at, at);
        for (src, pos) in [(a, &pa), (b, &pb)] {
            if let Some(x) = src.get(key) {
                for r in 0..x.rows() {
                    for c in 0..x.cols() {
                        m.set(pos[r], pos[c], x.get(r, c).clone());
                    }
                }
            }
        }
        out.set(key.clone(), m)?;
    }
    Ok(out)
}

/// Conjugates by a random invertible block-diagonal (grading-preserving)
/// matrix with small integer entries. Returns the new module and the
/// change of basis `P` with `ρ' = P⁻¹ ρ P`.
pub fn scramble(rep: &GRepresentation, seed: u64) -> Result<(GRepresentation, ExactMatrix)> {
    let f = rep.field().clone();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = rep.dim();
    let cls = rep.space.basis_classes();
    let p = loop {
        let m = ExactMatrix::from_fn(&f, n, n, |r, c| {
            if cls[r] == cls[c] {
                CycloNum::from_int(&f, rng.gen_range(-2..=2))
            } else {
                CycloNum::zero(&f)
            }
        });
        if m.rank() == n {
            break m;
        }
    };
    let pinv = p.inverse()?;
    let mut out = rep.clone();
    for (k, m) in rep.nonzero() {
        out.set(k.clone(), pinv.mul(m).mul(&p))?;
    }
    Ok((out, p))
}

/// Smallest monic `c_0 + … + x^k` with `p(M) = 0`, lowest degree first.
pub fn minimal_polynomial(m: &ExactMatrix) -> Vec<CycloNum> {
    let f = m.field().clone();
    let n = m.rows();
    let mut powers = vec![ExactMatrix::identity(&f, n)];
    loop {
        let next = powers.last().expect("nonempty").mul(m);
        let cols: Vec<Vec<CycloNum>> = powers.iter().map(ExactMatrix::flatten).collect();
        let a = ExactMatrix::from_columns(&f, n * n, &cols);
        let rhs = ExactMatrix::from_columns(&f, n * n, &[next.flatten()]);
        if let Some(x) = a.solve(&rhs).expect("shapes agree") {
            let mut out: Vec<CycloNum> = (0..powers.len()).map(|i| -x.get(i, 0)).collect();
            out.push(CycloNum::one(&f));
            return out;
        }
        powers.push(next);
    }
}

fn eval_poly(p: &[CycloNum], x: &CycloNum) -> CycloNum {
    let mut acc = CycloNum::zero(x.field());
    for c in p.iter().rev() {
        acc = &(&acc * x) + c;
    }
    acc
}

fn divisors(n: u64) -> Vec<u64> {
    (1..).take_while(|d| d * d <= n).filter(|d| n.is_multiple_of(*d)).flat_map(|d| [d, n / d]).collect()
}

/// A root of `p` in `Q(ζ_L)` among roots of unity and rational numbers.
pub fn find_root(p: &[CycloNum]) -> Option<CycloNum> {
    use num_traits::{Signed, ToPrimitive, Zero};
    let f = p.last()?.field().clone();
    let l = f.order() as i64;
    let mut cands: Vec<CycloNum> = vec![CycloNum::zero(&f)];
    cands.extend((0..2 * l).map(|j| CycloNum::root_of_unity(&f, j / 2).scale_int(if j % 2 == 0 { 1 } else { -1 })));
    if let Some(rat) = p.iter().map(|c| c.as_rational().cloned()).collect::<Option<Vec<_>>>() {
        let den = rat.iter().fold(num_bigint::BigInt::from(1), |acc, q| num_integer::Integer::lcm(&acc, q.denom()));
        let ints: Vec<num_bigint::BigInt> = rat.iter().map(|q| (q * &den).to_integer()).collect();
        let lead = ints.iter().rev().find(|x| !x.is_zero());
        let low = ints.iter().find(|x| !x.is_zero());
        if let (Some(a), Some(b)) = (lead.and_then(|x| x.abs().to_u64()), low.and_then(|x| x.abs().to_u64())) {
            if a <= 1_000_000 && b <= 1_000_000 {
                for num in divisors(b) {
                    for den in divisors(a) {
                        for sign in [1, -1] {
                            cands.push(CycloNum::from_ratio(&f, sign * num as i64, den as i64));
                        }
                    }
                }
            }
        }
    }
    cands.into_iter().find(|x| eval_poly(p, x).is_zero())
}

/// Degree-0 generator keys `x_i d_j` and `t̄^w`.
pub fn degree_zero_keys(spec: &TorusSpec) -> Vec<GKey> {
    let d = spec.d();
    let mut keys: Vec<GKey> = (0..d).flat_map(|i| (0..d).map(move |j| GKey::XD { p: ExpVec::unit(d, i), j })).collect();
    keys.extend(spec.gamma0().iter().map(|w| GKey::XT { l: ExpVec::zero(d), w: w.clone() }));
    keys
}

#[derive(Clone, Debug)]
pub struct TensorDecomposition {
    pub module: GLdGLNModule,
    /// Columns `f_b(e_a)` in the graded order of `V ⊗ W`; `ρ Φ = Φ ρ_{V⊗W}`.
    pub isomorphism: ExactMatrix,
    /// Number of irreducible `gl_d`-submodules built from distinct probes.
    pub probe_submodules: usize,
    pub probes_isomorphic: bool,
}

fn block(m: &ExactMatrix, space: &GradedVectorSpace, to: usize, from: usize) -> ExactMatrix {
    m.submatrix(space.offset(to), space.offset(from), space.dims()[to], space.dims()[from])
}

/// Columns spanning the smallest subspace containing `vecs` and stable
/// under `gens`.
fn spin_up(field: &FieldRef, gens: &[ExactMatrix], vecs: &[Vec<CycloNum>]) -> Vec<Vec<CycloNum>> {
    let n = vecs.first().map_or(0, Vec::len);
    let mut red = RowReducer::new(field, n);
    let mut basis = Vec::new();
    let mut queue: Vec<Vec<CycloNum>> = vecs.to_vec();
    while let Some(v) = queue.pop() {
        if red.insert(v.clone()) {
            for g in gens {
                queue.push(g.mul_vec(&v));
            }
            basis.push(v);
        }
    }
    basis
}

/// Restriction of `gens` to the invariant subspace with basis columns `b`.
fn restrict(gens: &[ExactMatrix], b: &ExactMatrix) -> Result<Vec<ExactMatrix>> {
    gens.iter()
        .map(|g| b.solve(&g.mul(b))?.ok_or_else(|| Error::InvalidRepresentation("subspace is not invariant".into())))
        .collect()
}

/// An absolutely irreducible submodule of the span of `b` (columns, an
/// invariant subspace), found by splitting with commutant eigenspaces.
fn irreducible_part(field: &FieldRef, gens: &[ExactMatrix], mut b: ExactMatrix) -> Result<ExactMatrix> {
    loop {
        let local = restrict(gens, &b)?;
        let k = b.cols();
        let pairs: Vec<(&ExactMatrix, &ExactMatrix)> = local.iter().map(|m| (m, m)).collect();
        let comm = intertwiners(field, &pairs, k, k, &|_, _| true);
        if comm.len() <= 1 {
            return Ok(b);
        }
        let c = comm.iter().find(|m| !is_scalar(m)).expect("a non-scalar commutant element exists");
        let mp = minimal_polynomial(c);
        let lambda = find_root(&mp).ok_or(Error::SplittingNeedsFieldExtension(field.order()))?;
        let shifted = c.sub(&ExactMatrix::scalar(field, k, &lambda));
        let ker = shifted.kernel();
        let sub = ExactMatrix::from_columns(field, k, &ker);
        b = b.mul(&sub);
    }
}

fn is_scalar(m: &ExactMatrix) -> bool {
    let c = m.get(0, 0).clone();
    m == &ExactMatrix::scalar(m.field(), m.rows(), &c)
}

/// Recovers `V` and `W` with `rep ≅ V ⊗ W` for an absolutely irreducible
/// graded `gl_d ⊕ gl_N`-module, given as a `G̃`-module on which `G̃₊`
/// acts trivially. `probes` are vectors of the first nonzero component;
/// by default the joint kernel of the raising operators is used.
pub fn decompose_tensor(spec: &TorusSpec, rep: &GRepresentation, probes: Option<&[Vec<CycloNum>]>) -> Result<TensorDecomposition> {
    let f = spec.field().clone();
    let d = spec.d();
    if let Some((k, _)) = rep.nonzero().find(|(k, _)| k.filtration_degree() >= 1) {
        return Err(Error::InvalidRepresentation(format!("{k} acts nonzero; not a gl_d ⊕ gl_N-module")));
    }
    let comm = commutant(rep);
    if comm.len() != 1 {
        return Err(Error::NotIrreducible(comm.len()));
    }
    let space = &rep.space;
    let classes = space.classes();
    let s = space.dims().iter().position(|&n| n > 0).expect("positive dimension");
    let ns = space.dims()[s];
    let e = |i: usize, j: usize| rep.rho_key(&GKey::XD { p: ExpVec::unit(d, i), j });
    let gens_s: Vec<ExactMatrix> =
        (0..d).flat_map(|i| (0..d).map(move |j| (i, j))).map(|(i, j)| block(&e(i, j), space, s, s)).collect();

    let probe_vecs: Vec<Vec<CycloNum>> = match probes {
        Some(p) => {
            if p.iter().any(|v| v.len() != ns) {
                return Err(Error::DimensionMismatch(format!("probes must have length {ns}")));
            }
            p.to_vec()
        }
        None => {
            let raising: Vec<ExactMatrix> = (0..d)
                .flat_map(|i| (i + 1..d).map(move |j| (i, j)))
                .map(|(i, j)| gens_s[i * d + j].clone())
                .collect();
            let mut stacked_rows = Vec::new();
            for m in &raising {
                for r in 0..ns {
                    stacked_rows.push(m.row(r).to_vec());
                }
            }
            if stacked_rows.is_empty() {
                ExactMatrix::identity(&f, ns).entries().chunks(ns).map(<[CycloNum]>::to_vec).collect()
            } else {
                ExactMatrix::from_rows(&f, stacked_rows)?.kernel()
            }
        }
    };
    let mut submodules = Vec::new();
    for p in probe_vecs.iter().filter(|v| v.iter().any(|x| !x.is_zero())) {
        let cols = spin_up(&f, &gens_s, std::slice::from_ref(p));
        let b = ExactMatrix::from_columns(&f, ns, &cols);
        submodules.push(irreducible_part(&f, &gens_s, b)?);
    }
    let Some(vb) = submodules.first().cloned() else {
        return Err(Error::InvalidInput("no nonzero probe vector".into()));
    };
    let va = restrict(&gens_s, &vb)?;
    let nv = vb.cols();
    let mut probes_isomorphic = true;
    for other in &submodules[1..] {
        let oa = restrict(&gens_s, other)?;
        if oa.len() != va.len() || other.cols() != nv {
            probes_isomorphic = false;
            continue;
        }
        let pairs: Vec<(&ExactMatrix, &ExactMatrix)> = oa.iter().zip(&va).collect();
        let homs = intertwiners(&f, &pairs, nv, nv, &|_, _| true);
        if !homs.iter().any(|h| h.rank() == nv) {
            probes_isomorphic = false;
        }
    }

    // W_t = Hom_{gl_d}(V, U_t)
    let mut w_basis: Vec<(usize, ExactMatrix)> = Vec::new();
    for t in 0..classes.len() {
        let nt = space.dims()[t];
        if nt == 0 {
            continue;
        }
        let local: Vec<ExactMatrix> =
            (0..d).flat_map(|i| (0..d).map(move |j| (i, j))).map(|(i, j)| block(&e(i, j), space, t, t)).collect();
        let pairs: Vec<(&ExactMatrix, &ExactMatrix)> = local.iter().zip(&va).collect();
        for h in intertwiners(&f, &pairs, nt, nv, &|_, _| true) {
            w_basis.push((t, h));
        }
    }
    let grading: Vec<ExpVec> = w_basis.iter().map(|(t, _)| classes[*t].clone()).collect();
    let nw = w_basis.len();
    if nv * nw != rep.dim() {
        return Err(Error::NotIrreducible(comm.len()));
    }
    let mut w_action = BTreeMap::new();
    for w in spec.gamma0() {
        let x = rep.rho_key(&GKey::XT { l: ExpVec::zero(d), w: w.clone() });
        let mut m = ExactMatrix::zeros(&f, nw, nw);
        for (col, (t, h)) in w_basis.iter().enumerate() {
            let target = space.index_of(&spec.class_add(w, &classes[*t])).expect("class");
            let img = block(&x, space, target, *t).mul(h);
            // express img in the basis of W_target
            let idx: Vec<usize> = (0..nw).filter(|&b| w_basis[b].0 == target).collect();
            let cols: Vec<Vec<CycloNum>> = idx.iter().map(|&b| w_basis[b].1.flatten()).collect();
            if img.is_zero() {
                continue;
            }
            if cols.is_empty() {
                return Err(Error::InvalidRepresentation("X^w leaves the spanned W".into()));
            }
            let a = ExactMatrix::from_columns(&f, img.rows() * img.cols(), &cols);
            let coeffs = a
                .solve(&ExactMatrix::from_columns(&f, img.rows() * img.cols(), &[img.flatten()]))?
                .ok_or_else(|| Error::InvalidRepresentation("X^w image is not an intertwiner".into()))?;
            for (k, &b) in idx.iter().enumerate() {
                m.set(b, col, coeffs.get(k, 0).clone());
            }
        }
        w_action.insert(w.clone(), m);
    }
    let module = GLdGLNModule { v: GlDModule { d, action: va }, w: GlNModule { action: w_action, grading } };
    module.validate(spec)?;

    let n = rep.dim();
    let basis = module.tensor_basis(spec);
    let mut phi = ExactMatrix::zeros(&f, n, n);
    for (col, &(a, b)) in basis.iter().enumerate() {
        let (t, h) = &w_basis[b];
        let off = space.offset(*t);
        for r in 0..h.rows() {
            phi.set(off + r, col, h.get(r, a).clone());
        }
    }
    if phi.rank() != n {
        return Err(Error::NotIrreducible(comm.len()));
    }
    let model = pullback(spec, &module)?;
    for key in degree_zero_keys(spec) {
        if rep.rho_key(&key).mul(&phi) != phi.mul(&model.rho_key(&key)) {
            return Err(Error::InvalidRepresentation(format!("recovered isomorphism fails to intertwine {key}")));
        }
    }
    Ok(TensorDecomposition { module, isomorphism: phi, probe_submodules: submodules.len(), probes_isomorphic })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn e1() -> TorusSpec {
        TorusSpec::new(2, 1, vec![2], None).unwrap()
    }

    fn nat_reg(t: &TorusSpec) -> GLdGLNModule {
        GLdGLNModule { v: natural_gld(t.field(), t.d()), w: graded_regular_gln(t) }
    }

    #[test]
    fn standard_modules() {
        let t = e1();
        let v = natural_gld(t.field(), 2);
        assert_eq!(v.e(0, 1), &ExactMatrix::from_ints(t.field(), &[&[0, 1], &[0, 0]]));
        let w = graded_regular_gln(&t);
        assert_eq!(w.dim(), 4);
        // X^{(1,2)} · X^{(1,1)} = X^{(2,1)}
        let col = t.class_index(&[1, 1].into());
        let row = t.class_index(&[2, 1].into());
        assert!(w.action[&ExpVec::from([1, 2])].get(row, col).is_one());
        nat_reg(&t).validate(&t).unwrap();
    }

    #[test]
    fn pullback_modules() {
        let t = e1();
        let rep = pullback(&t, &nat_reg(&t)).unwrap();
        assert_eq!(rep.dim(), 8);
        assert_eq!(rep.space.dims(), &[2, 2, 2, 2]);
        assert!(verify_representation(&t, &rep, 3).unwrap().passed());
        assert_eq!(min_annihilation_degree(&rep), 1);
        assert!(is_absolutely_irreducible(&rep));
        let triv = GLdGLNModule { v: trivial_gld(t.field(), 2), w: graded_regular_gln(&t) };
        let rep = pullback(&t, &triv).unwrap();
        assert!(rep.nonzero().all(|(k, _)| matches!(k, GKey::XT { .. })));
        assert!(verify_representation(&t, &rep, 2).unwrap().passed());
    }

    #[test]
    fn corrupted_matrix_is_caught() {
        let t = e1();
        let mut rep = pullback(&t, &nat_reg(&t)).unwrap();
        let key = GKey::XD { p: [1, 0].into(), j: 1 };
        let mut m = rep.rho_key(&key);
        m.add_at(0, 1, &CycloNum::one(t.field()));
        rep.set(key, m).unwrap();
        let report = verify_representation(&t, &rep, 1).unwrap();
        assert!(report.failure.unwrap().contains("XD(1,0;2)"));
    }

    #[test]
    fn commutants() {
        let t = e1();
        let rep = pullback(&t, &nat_reg(&t)).unwrap();
        assert_eq!(commutant(&rep).len(), 1);
        let twice = direct_sum(&t, &rep, &rep).unwrap();
        assert_eq!(commutant(&twice).len(), 4);
        assert!(!is_absolutely_irreducible(&twice));
        assert!(matches!(decompose_tensor(&t, &twice, None), Err(Error::NotIrreducible(4))));
    }

    #[test]
    fn jet_modules() {
        let t = e1();
        let rep = jet_module(&t, 2).unwrap();
        assert_eq!(rep.dim(), 12);
        assert_eq!(min_annihilation_degree(&rep), 2);
        assert!(verify_representation(&t, &rep, 3).unwrap().passed());
        let rep3 = jet_module(&t, 3).unwrap();
        assert_eq!(min_annihilation_degree(&rep3), 3);
        assert!(verify_representation(&t, &rep3, 2).unwrap().passed());
    }

    #[test]
    fn decomposition_recovers_factors() {
        let t = e1();
        let rep = pullback(&t, &nat_reg(&t)).unwrap();
        let (scr, _) = scramble(&rep, 3).unwrap();
        assert!(verify_representation(&t, &scr, 1).unwrap().passed());
        let dec = decompose_tensor(&t, &scr, None).unwrap();
        assert_eq!(dec.module.v.dim(), 2);
        assert_eq!(dec.module.w.dim(), 4);
        assert!(dec.probes_isomorphic);
        let triv = GLdGLNModule { v: trivial_gld(t.field(), 2), w: graded_regular_gln(&t) };
        let dec = decompose_tensor(&t, &pullback(&t, &triv).unwrap(), None).unwrap();
        assert_eq!(dec.module.v.dim(), 1);
    }

    #[test]
    fn decomposition_with_generic_probes_splits() {
        let t = e1();
        // sym^2 of the natural module, all vectors of U_s as probes
        let f = t.field();
        let sym2 = GlDModule {
            d: 2,
            action: vec![
                ExactMatrix::from_ints(f, &[&[2, 0, 0], &[0, 1, 0], &[0, 0, 0]]),
                ExactMatrix::from_ints(f, &[&[0, 1, 0], &[0, 0, 2], &[0, 0, 0]]),
                ExactMatrix::from_ints(f, &[&[0, 0, 0], &[2, 0, 0], &[0, 1, 0]]),
                ExactMatrix::from_ints(f, &[&[0, 0, 0], &[0, 1, 0], &[0, 0, 2]]),
            ],
        };
        let vw = GLdGLNModule { v: sym2, w: graded_regular_gln(&t) };
        let rep = pullback(&t, &vw).unwrap();
        let probes: Vec<Vec<CycloNum>> = (0..3)
            .map(|i| (0..3).map(|j| CycloNum::from_int(f, i64::from(i == j) + 1)).collect())
            .collect();
        let dec = decompose_tensor(&t, &rep, Some(&probes)).unwrap();
        assert_eq!(dec.module.v.dim(), 3);
        assert_eq!(dec.probe_submodules, 3);
        assert!(dec.probes_isomorphic);
    }

    #[test]
    fn splitting_a_reducible_gld_module() {
        let t = e1();
        let f = t.field();
        let nat = natural_gld(f, 2);
        let doubled: Vec<ExactMatrix> = nat.action.iter().map(|m| ExactMatrix::identity(f, 2).kron(m)).collect();
        let b = irreducible_part(f, &doubled, ExactMatrix::identity(f, 4)).unwrap();
        assert_eq!(b.cols(), 2);
        let local = restrict(&doubled, &b).unwrap();
        let pairs: Vec<(&ExactMatrix, &ExactMatrix)> = local.iter().zip(&nat.action).collect();
        assert!(intertwiners(f, &pairs, 2, 2, &|_, _| true).iter().any(|h| h.rank() == 2));
    }

    #[test]
    fn minimal_polynomials_and_roots() {
        let f = crate::cyclo::CycloField::new(4).unwrap();
        let m = ExactMatrix::from_ints(&f, &[&[0, -1], &[1, 0]]);
        let p = minimal_polynomial(&m);
        assert_eq!(p.len(), 3);
        assert!(find_root(&p).is_some());
        let f1 = crate::cyclo::CycloField::new(1).unwrap();
        let m = ExactMatrix::from_ints(&f1, &[&[0, 2], &[1, 0]]);
        assert!(find_root(&minimal_polynomial(&m)).is_none());
        let m = ExactMatrix::from_ints(&f1, &[&[3, 0], &[0, -2]]);
        assert!(find_root(&minimal_polynomial(&m)).is_some());
    }
}
