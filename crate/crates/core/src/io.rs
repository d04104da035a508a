//! JSON file formats: torus specs live in `torus`; this module covers
//! graded `G̃`-module descriptions, `(V, W)` pairs, cuspidal-module dumps
//! and bare matrices. Every number is a serialized `CycloNum` string.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::cuspidal::{dump_order, dump_symbols, CuspidalModule};
use crate::cyclo::{CycloNum, FieldRef};
use crate::error::{Error, Result};
use crate::expr;
use crate::gtilde::GKey;
use crate::matrix::ExactMatrix;
use crate::repn::{GLdGLNModule, GRepresentation, GlDModule, GlNModule, GradedVectorSpace};
use crate::torus::{ExpVec, TorusSpec, TorusSpecFile};

pub type Grid = Vec<Vec<String>>;

pub fn matrix_to_grid(m: &ExactMatrix) -> Grid {
    m.to_string_grid()
}

pub fn grid_to_matrix(field: &FieldRef, grid: &Grid, rows: usize, cols: usize) -> Result<ExactMatrix> {
    if grid.len() != rows || grid.iter().any(|r| r.len() != cols) {
        return Err(Error::DimensionMismatch(format!("expected a {rows}x{cols} grid")));
    }
    if rows == 0 || cols == 0 {
        return Ok(ExactMatrix::zeros(field, rows, cols));
    }
    ExactMatrix::from_string_grid(field, grid)
}

fn check_order(spec: &TorusSpec, l: u32) -> Result<()> {
    if l != spec.order() {
        return Err(Error::FieldMismatch(l, spec.order()));
    }
    Ok(())
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GeneratorEntry {
    /// `XD(p;j)` or `XT(l;w)`
    pub key: String,
    pub matrix: Grid,
}

/// A finite-dimensional graded `G̃`-module. `dims` follows the order of
/// `Γ₀`, listed in `classes` for readability.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ModuleDescription {
    #[serde(rename = "L")]
    pub l: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub torus: Option<TorusSpecFile>,
    #[serde(default)]
    pub classes: Vec<ExpVec>,
    pub dims: Vec<usize>,
    pub cutoff: usize,
    pub generators: Vec<GeneratorEntry>,
}

impl ModuleDescription {
    pub fn from_representation(spec: &TorusSpec, rep: &GRepresentation) -> Self {
        ModuleDescription {
            l: spec.order(),
            torus: Some(spec.to_file()),
            classes: rep.space.classes().to_vec(),
            dims: rep.space.dims().to_vec(),
            cutoff: rep.cutoff,
            generators: rep
                .nonzero()
                .map(|(k, m)| GeneratorEntry { key: k.to_string(), matrix: matrix_to_grid(m) })
                .collect(),
        }
    }

    /// The torus embedded in the file, if any.
    pub fn spec(&self) -> Result<Option<TorusSpec>> {
        self.torus.as_ref().map(TorusSpec::from_file).transpose()
    }

    pub fn to_representation(&self, spec: &TorusSpec) -> Result<GRepresentation> {
        check_order(spec, self.l)?;
        if !self.classes.is_empty() && self.classes != spec.gamma0() {
            return Err(Error::InvalidModuleData("listed classes differ from the torus' Γ₀".into()));
        }
        let space = GradedVectorSpace::new(spec, self.dims.clone())?;
        let n = space.total();
        let mut rep = GRepresentation::new(spec, space, self.cutoff);
        for g in &self.generators {
            let elem = expr::parse_g(spec, &g.key)?;
            let key: GKey = match elem.iter().next() {
                Some((k, c)) if elem.len() == 1 && c.is_one() => k.clone(),
                _ => return Err(Error::MalformedBasisKey(format!("`{}` is not a single basis symbol", g.key))),
            };
            if rep.get(&key).is_some() {
                return Err(Error::InvalidModuleData(format!("{key} listed twice")));
            }
            rep.set(key, grid_to_matrix(spec.field(), &g.matrix, n, n)?)?;
        }
        Ok(rep)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClassMatrix {
    pub class: ExpVec,
    pub matrix: Grid,
}

/// A `gl_d`-module `V` (matrices `E_ij`, row-major in `(i, j)`) and a
/// graded `gl_N`-module `W` (grading and `X^w` for each `w ∈ Γ₀`).
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct VwDescription {
    #[serde(rename = "L")]
    pub l: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub torus: Option<TorusSpecFile>,
    pub v: Vec<Grid>,
    pub w_grading: Vec<ExpVec>,
    pub w: Vec<ClassMatrix>,
}

impl VwDescription {
    pub fn from_module(spec: &TorusSpec, vw: &GLdGLNModule) -> Self {
        VwDescription {
            l: spec.order(),
            torus: Some(spec.to_file()),
            v: vw.v.action.iter().map(matrix_to_grid).collect(),
            w_grading: vw.w.grading.clone(),
            w: vw.w.action.iter().map(|(c, m)| ClassMatrix { class: c.clone(), matrix: matrix_to_grid(m) }).collect(),
        }
    }

    pub fn spec(&self) -> Result<Option<TorusSpec>> {
        self.torus.as_ref().map(TorusSpec::from_file).transpose()
    }

    pub fn to_module(&self, spec: &TorusSpec) -> Result<GLdGLNModule> {
        check_order(spec, self.l)?;
        let f = spec.field();
        let d = spec.d();
        if self.v.len() != d * d {
            return Err(Error::InvalidModuleData(format!("V needs {} matrices, got {}", d * d, self.v.len())));
        }
        let nv = self.v[0].len();
        let v = self.v.iter().map(|g| grid_to_matrix(f, g, nv, nv)).collect::<Result<Vec<_>>>()?;
        let nw = self.w_grading.len();
        let mut action = std::collections::BTreeMap::new();
        for cm in &self.w {
            let class = spec.canonical_rep(&cm.class);
            if action.insert(class.clone(), grid_to_matrix(f, &cm.matrix, nw, nw)?).is_some() {
                return Err(Error::InvalidModuleData(format!("X^{class} listed twice")));
            }
        }
        let grading = self.w_grading.iter().map(|g| spec.canonical_rep(g)).collect();
        let out = GLdGLNModule { v: GlDModule { d, action: v }, w: GlNModule { action, grading } };
        out.validate(spec)?;
        Ok(out)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DumpGenerator {
    pub symbol: String,
    pub target: ExpVec,
    pub matrix: Grid,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DumpWeight {
    pub label: ExpVec,
    pub class: ExpVec,
    pub shift: ExpVec,
    pub dim: usize,
    pub generators: Vec<DumpGenerator>,
}

/// Materialized box of a cuspidal module: the weight `α + label` for each
/// label, ordered by class and then central shift.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CuspidalDump {
    pub torus: TorusSpecFile,
    pub alpha: Vec<CycloNum>,
    pub box_radius: i64,
    pub weights: Vec<DumpWeight>,
}

pub fn dump_module(module: &CuspidalModule) -> Result<CuspidalDump> {
    let spec = &module.spec;
    let syms = dump_symbols(spec);
    let mut weights = Vec::new();
    for s in dump_order(module) {
        let (shift, class) = spec.decompose(&s);
        let mut generators = Vec::new();
        for sym in &syms {
            let (target, m) = module.op_matrix(sym, &s)?;
            generators.push(DumpGenerator { symbol: sym.to_string(), target, matrix: matrix_to_grid(&m) });
        }
        weights.push(DumpWeight { dim: module.weight_dim(&s), label: s, class, shift, generators });
    }
    Ok(CuspidalDump {
        torus: spec.to_file(),
        alpha: module.alpha.clone(),
        box_radius: module.box_radius,
        weights,
    })
}

pub fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T> {
    let text = std::fs::read_to_string(path)?;
    Ok(serde_json::from_str(&text)?)
}

/// Pretty JSON with a trailing newline.
pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    std::fs::write(path, text)?;
    Ok(())
}
