//! Dense matrices over a cyclotomic field and the exact elimination routines
//! the rest of the crate is built on.

use std::fmt;

use crate::cyclo::{CycloNum, FieldRef};
use crate::error::{Error, Result};

#[derive(Clone, PartialEq, Eq)]
pub struct ExactMatrix {
    rows: usize,
    cols: usize,
    field: FieldRef,
    data: Vec<CycloNum>,
}

impl ExactMatrix {
    pub fn zeros(field: &FieldRef, rows: usize, cols: usize) -> Self {
        ExactMatrix { rows, cols, field: field.clone(), data: vec![CycloNum::zero(field); rows * cols] }
    }

    pub fn identity(field: &FieldRef, n: usize) -> Self {
        let mut m = Self::zeros(field, n, n);
        for i in 0..n {
            m.set(i, i, CycloNum::one(field));
        }
        m
    }

    pub fn scalar(field: &FieldRef, n: usize, c: &CycloNum) -> Self {
        let mut m = Self::zeros(field, n, n);
        for i in 0..n {
            m.set(i, i, c.clone());
        }
        m
    }

    pub fn from_fn(field: &FieldRef, rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> CycloNum) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        ExactMatrix { rows, cols, field: field.clone(), data }
    }

    pub fn from_rows(field: &FieldRef, rows: Vec<Vec<CycloNum>>) -> Result<Self> {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|row| row.len() != c) {
            return Err(Error::DimensionMismatch("ragged matrix rows".into()));
        }
        Ok(ExactMatrix { rows: r, cols: c, field: field.clone(), data: rows.into_iter().flatten().collect() })
    }

    pub fn from_ints(field: &FieldRef, rows: &[&[i64]]) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, |row| row.len());
        Self::from_fn(field, r, c, |i, j| CycloNum::from_int(field, rows[i][j]))
    }

    /// Matrix whose columns are the given vectors.
    pub fn from_columns(field: &FieldRef, nrows: usize, cols: &[Vec<CycloNum>]) -> Self {
        Self::from_fn(field, nrows, cols.len(), |i, j| cols[j][i].clone())
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn field(&self) -> &FieldRef {
        &self.field
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> &CycloNum {
        &self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: CycloNum) {
        self.data[i * self.cols + j] = v;
    }

    pub fn add_at(&mut self, i: usize, j: usize, v: &CycloNum) {
        self.data[i * self.cols + j] += v;
    }

    pub fn row(&self, i: usize) -> &[CycloNum] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn column(&self, j: usize) -> Vec<CycloNum> {
        (0..self.rows).map(|i| self.get(i, j).clone()).collect()
    }

    pub fn entries(&self) -> &[CycloNum] {
        &self.data
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(CycloNum::is_zero)
    }

    pub fn is_identity(&self) -> bool {
        self.is_square()
            && (0..self.rows).all(|i| {
                (0..self.cols).all(|j| if i == j { self.get(i, j).is_one() } else { self.get(i, j).is_zero() })
            })
    }

    fn check_same_shape(&self, other: &Self) {
        assert!(
            self.rows == other.rows && self.cols == other.cols,
            "shape mismatch {}x{} vs {}x{}",
            self.rows,
            self.cols,
            other.rows,
            other.cols
        );
    }

    pub fn add(&self, other: &Self) -> Self {
        self.check_same_shape(other);
        let data = self.data.iter().zip(&other.data).map(|(a, b)| a + b).collect();
        ExactMatrix { data, ..self.clone_shape() }
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.check_same_shape(other);
        let data = self.data.iter().zip(&other.data).map(|(a, b)| a - b).collect();
        ExactMatrix { data, ..self.clone_shape() }
    }

    pub fn add_assign(&mut self, other: &Self) {
        self.check_same_shape(other);
        for (a, b) in self.data.iter_mut().zip(&other.data) {
            if !b.is_zero() {
                *a += b;
            }
        }
    }

    /// `self += c · other`
    pub fn add_scaled(&mut self, c: &CycloNum, other: &Self) {
        self.check_same_shape(other);
        if c.is_zero() {
            return;
        }
        for (a, b) in self.data.iter_mut().zip(&other.data) {
            if !b.is_zero() {
                *a += &(c * b);
            }
        }
    }

    pub fn scale(&self, c: &CycloNum) -> Self {
        let data = self.data.iter().map(|a| if a.is_zero() { a.clone() } else { a * c }).collect();
        ExactMatrix { data, ..self.clone_shape() }
    }

    pub fn neg(&self) -> Self {
        let data = self.data.iter().map(|a| -a).collect();
        ExactMatrix { data, ..self.clone_shape() }
    }

    fn clone_shape(&self) -> Self {
        ExactMatrix { rows: self.rows, cols: self.cols, field: self.field.clone(), data: Vec::new() }
    }

    /// Product skipping zero entries; module matrices are mostly sparse.
    pub fn mul(&self, other: &Self) -> Self {
        assert_eq!(self.cols, other.rows, "inner dimension mismatch");
        let mut out = Self::zeros(&self.field, self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if a.is_zero() {
                    continue;
                }
                for j in 0..other.cols {
                    let b = other.get(k, j);
                    if !b.is_zero() {
                        let p = a * b;
                        out.data[i * other.cols + j] += &p;
                    }
                }
            }
        }
        out
    }

    pub fn mul_vec(&self, v: &[CycloNum]) -> Vec<CycloNum> {
        assert_eq!(self.cols, v.len());
        (0..self.rows)
            .map(|i| {
                let mut acc = CycloNum::zero(&self.field);
                for (a, b) in self.row(i).iter().zip(v) {
                    if !a.is_zero() && !b.is_zero() {
                        acc += &(a * b);
                    }
                }
                acc
            })
            .collect()
    }

    /// `[self, other] = self·other − other·self`
    pub fn commutator(&self, other: &Self) -> Self {
        self.mul(other).sub(&other.mul(self))
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(&self.field, self.cols, self.rows, |i, j| self.get(j, i).clone())
    }

    /// Kronecker product; the left factor indexes the coarse blocks.
    pub fn kron(&self, other: &Self) -> Self {
        let rows = self.rows * other.rows;
        let cols = self.cols * other.cols;
        let mut out = Self::zeros(&self.field, rows, cols);
        for i in 0..self.rows {
            for j in 0..self.cols {
                let a = self.get(i, j);
                if a.is_zero() {
                    continue;
                }
                for k in 0..other.rows {
                    for l in 0..other.cols {
                        let b = other.get(k, l);
                        if !b.is_zero() {
                            out.set(i * other.rows + k, j * other.cols + l, a * b);
                        }
                    }
                }
            }
        }
        out
    }

    pub fn submatrix(&self, r0: usize, c0: usize, rows: usize, cols: usize) -> Self {
        Self::from_fn(&self.field, rows, cols, |i, j| self.get(r0 + i, c0 + j).clone())
    }

    pub fn set_block(&mut self, r0: usize, c0: usize, block: &Self) {
        for i in 0..block.rows {
            for j in 0..block.cols {
                self.set(r0 + i, c0 + j, block.get(i, j).clone());
            }
        }
    }

    pub fn pow(&self, mut e: u64) -> Self {
        assert!(self.is_square());
        let mut base = self.clone();
        let mut acc = Self::identity(&self.field, self.rows);
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(&base);
            }
            base = base.mul(&base);
            e >>= 1;
        }
        acc
    }

    /// Row-major entries as a flat vector.
    pub fn flatten(&self) -> Vec<CycloNum> {
        self.data.clone()
    }

    pub fn rank(&self) -> usize {
        let mut red = RowReducer::new(&self.field, self.cols);
        for i in 0..self.rows {
            red.insert(self.row(i).to_vec());
        }
        red.rank()
    }

    /// Basis of the right kernel `{x : self·x = 0}`.
    pub fn kernel(&self) -> Vec<Vec<CycloNum>> {
        let mut red = RowReducer::new(&self.field, self.cols);
        for i in 0..self.rows {
            red.insert(self.row(i).to_vec());
        }
        red.kernel()
    }

    /// Basis of the column space, as a list of original column indices.
    pub fn pivot_columns(&self) -> Vec<usize> {
        let t = self.transpose();
        let mut red = RowReducer::new(&self.field, t.cols);
        let mut kept = Vec::new();
        for j in 0..t.rows {
            if red.insert(t.row(j).to_vec()) {
                kept.push(j);
            }
        }
        kept
    }

    pub fn inverse(&self) -> Result<Self> {
        if !self.is_square() {
            return Err(Error::DimensionMismatch("inverse of a non-square matrix".into()));
        }
        let n = self.rows;
        let rhs = Self::identity(&self.field, n);
        self.solve(&rhs)?.ok_or(Error::DivisionByZero)
    }

    /// Solves `self · X = rhs`; `None` when inconsistent. When the solution
    /// is not unique the free variables are set to zero.
    pub fn solve(&self, rhs: &Self) -> Result<Option<Self>> {
        if rhs.rows != self.rows {
            return Err(Error::DimensionMismatch(format!(
                "solve: {} rows vs right-hand side with {}",
                self.rows, rhs.rows
            )));
        }
        let n = self.cols;
        let m = rhs.cols;
        let mut aug: Vec<Vec<CycloNum>> = (0..self.rows)
            .map(|i| {
                let mut row = self.row(i).to_vec();
                row.extend_from_slice(rhs.row(i));
                row
            })
            .collect();
        let pivots = rref_in_place(&mut aug, n);
        // any zero row on the left with a nonzero right side is inconsistent
        for row in aug.iter().skip(pivots.len()) {
            if row[n..].iter().any(|x| !x.is_zero()) {
                return Ok(None);
            }
        }
        let mut x = Self::zeros(&self.field, n, m);
        for (r, &pc) in pivots.iter().enumerate() {
            for j in 0..m {
                x.set(pc, j, aug[r][n + j].clone());
            }
        }
        Ok(Some(x))
    }

    pub fn to_string_grid(&self) -> Vec<Vec<String>> {
        (0..self.rows).map(|i| self.row(i).iter().map(ToString::to_string).collect()).collect()
    }

    pub fn from_string_grid(field: &FieldRef, grid: &[Vec<String>]) -> Result<Self> {
        let rows = grid
            .iter()
            .map(|row| row.iter().map(|s| CycloNum::parse_in(field, s)).collect::<Result<Vec<_>>>())
            .collect::<Result<Vec<_>>>()?;
        Self::from_rows(field, rows)
    }
}

impl fmt::Debug for ExactMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "ExactMatrix {}x{} [", self.rows, self.cols)?;
        for i in 0..self.rows {
            let row: Vec<String> = self.row(i).iter().map(CycloNum::scalar_text).collect();
            writeln!(f, "  [{}]", row.join(", "))?;
        }
        write!(f, "]")
    }
}

/// Reduces `rows` to reduced row echelon form over the first `ncols`
/// columns and returns the pivot columns. Rows are reordered.
pub fn rref_in_place(rows: &mut [Vec<CycloNum>], ncols: usize) -> Vec<usize> {
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..ncols {
        if r == rows.len() {
            break;
        }
        let Some(p) = (r..rows.len()).find(|&i| !rows[i][c].is_zero()) else {
            continue;
        };
        rows.swap(r, p);
        let inv = rows[r][c].inverse().expect("pivot is nonzero");
        for x in rows[r].iter_mut() {
            if !x.is_zero() {
                *x = &*x * &inv;
            }
        }
        let pivot_row = rows[r].clone();
        for (i, row) in rows.iter_mut().enumerate() {
            if i != r && !row[c].is_zero() {
                let f = row[c].clone();
                for (x, y) in row.iter_mut().zip(&pivot_row) {
                    if !y.is_zero() {
                        *x -= &(&f * y);
                    }
                }
            }
        }
        pivots.push(c);
        r += 1;
    }
    pivots
}

/// Incrementally maintained reduced row echelon basis of a row space.
#[derive(Clone, Debug)]
pub struct RowReducer {
    field: FieldRef,
    ncols: usize,
    rows: Vec<Vec<CycloNum>>,
    pivots: Vec<usize>,
}

impl RowReducer {
    pub fn new(field: &FieldRef, ncols: usize) -> Self {
        RowReducer { field: field.clone(), ncols, rows: Vec::new(), pivots: Vec::new() }
    }

    pub fn rank(&self) -> usize {
        self.rows.len()
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    fn reduce(&self, mut row: Vec<CycloNum>) -> Vec<CycloNum> {
        for (basis, &pc) in self.rows.iter().zip(&self.pivots) {
            if !row[pc].is_zero() {
                let f = row[pc].clone();
                for (x, y) in row.iter_mut().zip(basis) {
                    if !y.is_zero() {
                        *x -= &(&f * y);
                    }
                }
            }
        }
        row
    }

    /// Whether `row` lies in the current span.
    pub fn contains(&self, row: &[CycloNum]) -> bool {
        self.reduce(row.to_vec()).iter().all(CycloNum::is_zero)
    }

    /// Adds a row; returns `true` when it increased the rank.
    pub fn insert(&mut self, row: Vec<CycloNum>) -> bool {
        assert_eq!(row.len(), self.ncols);
        if self.rows.len() == self.ncols {
            return false;
        }
        let mut row = self.reduce(row);
        let Some(pc) = row.iter().position(|x| !x.is_zero()) else {
            return false;
        };
        let inv = row[pc].inverse().expect("pivot is nonzero");
        for x in row.iter_mut() {
            if !x.is_zero() {
                *x = &*x * &inv;
            }
        }
        for basis in self.rows.iter_mut() {
            if !basis[pc].is_zero() {
                let f = basis[pc].clone();
                for (x, y) in basis.iter_mut().zip(&row) {
                    if !y.is_zero() {
                        *x -= &(&f * y);
                    }
                }
            }
        }
        let pos = self.pivots.partition_point(|&p| p < pc);
        self.pivots.insert(pos, pc);
        self.rows.insert(pos, row);
        true
    }

    pub fn rows(&self) -> &[Vec<CycloNum>] {
        &self.rows
    }

    /// Basis of the solutions of `row · x = 0` for every stored row.
    pub fn kernel(&self) -> Vec<Vec<CycloNum>> {
        let mut out = Vec::new();
        let mut is_pivot = vec![false; self.ncols];
        for &p in &self.pivots {
            is_pivot[p] = true;
        }
        for free in (0..self.ncols).filter(|&c| !is_pivot[c]) {
            let mut v = vec![CycloNum::zero(&self.field); self.ncols];
            v[free] = CycloNum::one(&self.field);
            for (row, &pc) in self.rows.iter().zip(&self.pivots) {
                if !row[free].is_zero() {
                    v[pc] = -&row[free];
                }
            }
            out.push(v);
        }
        out
    }
}

pub fn vec_is_zero(v: &[CycloNum]) -> bool {
    v.iter().all(CycloNum::is_zero)
}

pub fn vec_add_scaled(acc: &mut [CycloNum], c: &CycloNum, v: &[CycloNum]) {
    if c.is_zero() {
        return;
    }
    for (a, b) in acc.iter_mut().zip(v) {
        if !b.is_zero() {
            *a += &(c * b);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cyclo::CycloField;

    #[test]
    fn kernel_and_rank() {
        let f = CycloField::new(1).unwrap();
        let a = ExactMatrix::from_ints(&f, &[&[1, 2, 3], &[2, 4, 6], &[1, 0, 1]]);
        assert_eq!(a.rank(), 2);
        let ker = a.kernel();
        assert_eq!(ker.len(), 1);
        let x = a.mul_vec(&ker[0]);
        assert!(vec_is_zero(&x));
    }

    #[test]
    fn inverse_over_cyclotomic_field() {
        let f = CycloField::new(3).unwrap();
        let z = CycloNum::root_of_unity(&f, 1);
        let one = CycloNum::one(&f);
        let m = ExactMatrix::from_rows(&f, vec![vec![one.clone(), z.clone()], vec![z.clone(), one.clone()]]).unwrap();
        let inv = m.inverse().unwrap();
        assert!(m.mul(&inv).is_identity());
        let singular = ExactMatrix::from_rows(&f, vec![vec![one.clone(), z.clone()], vec![one, z]]).unwrap();
        assert!(singular.inverse().is_err());
    }

    #[test]
    fn kron_matches_block_layout() {
        let f = CycloField::new(1).unwrap();
        let a = ExactMatrix::from_ints(&f, &[&[1, 2], &[0, 1]]);
        let b = ExactMatrix::from_ints(&f, &[&[0, 1], &[1, 0]]);
        let k = a.kron(&b);
        assert_eq!(k.get(0, 3), &CycloNum::from_int(&f, 2));
        assert_eq!(k.get(3, 2), &CycloNum::from_int(&f, 1));
        assert_eq!(k.get(2, 0), &CycloNum::zero(&f));
    }

    #[test]
    fn inconsistent_system() {
        let f = CycloField::new(1).unwrap();
        let a = ExactMatrix::from_ints(&f, &[&[1, 1], &[1, 1]]);
        let b = ExactMatrix::from_ints(&f, &[&[1], &[2]]);
        assert!(a.solve(&b).unwrap().is_none());
    }

    #[test]
    fn grid_round_trip() {
        let f = CycloField::new(4).unwrap();
        let m = ExactMatrix::from_fn(&f, 2, 2, |i, j| CycloNum::root_of_unity(&f, (i + 2 * j) as i64));
        let back = ExactMatrix::from_string_grid(&f, &m.to_string_grid()).unwrap();
        assert_eq!(back, m);
    }
}
