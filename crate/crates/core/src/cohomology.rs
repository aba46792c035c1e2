//! Tate cohomology of a finite cyclic group acting on a lattice `Z^d`,
//! computed exactly with Smith normal forms.
//!
//! For a generator acting by `T` with `T^r = I` and `N = Σ_{i<r} T^i`:
//! `Ĥ¹ = ker N / im(T - I)` and `Ĥ² = ker(T - I) / im N`.

use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A dense integer matrix, row-major.
#[derive(Clone, PartialEq, Eq)]
pub struct IntMatrix {
    rows: usize,
    cols: usize,
    data: Vec<BigInt>,
}

impl IntMatrix {
    pub fn zero(rows: usize, cols: usize) -> Self {
        IntMatrix { rows, cols, data: vec![BigInt::zero(); rows * cols] }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zero(dim, dim);
        for i in 0..dim {
            m[(i, i)] = BigInt::one();
        }
        m
    }

    /// Errors on ragged input.
    pub fn from_rows(rows: &[Vec<i64>]) -> Result<Self> {
        let cols = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != cols) {
            return Err(Error::param("matrix rows have different lengths"));
        }
        Ok(IntMatrix {
            rows: rows.len(),
            cols,
            data: rows.iter().flatten().map(|&v| BigInt::from(v)).collect(),
        })
    }

    pub fn diagonal(entries: &[i64]) -> Self {
        let mut m = Self::zero(entries.len(), entries.len());
        for (i, &e) in entries.iter().enumerate() {
            m[(i, i)] = BigInt::from(e);
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn mul(&self, other: &IntMatrix) -> IntMatrix {
        assert_eq!(self.cols, other.rows, "dimension mismatch");
        let mut out = IntMatrix::zero(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = &self[(i, k)];
                if a.is_zero() {
                    continue;
                }
                for j in 0..other.cols {
                    out.data[i * other.cols + j] += a * &other[(k, j)];
                }
            }
        }
        out
    }

    pub fn add(&self, other: &IntMatrix) -> IntMatrix {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols), "dimension mismatch");
        let data = self.data.iter().zip(&other.data).map(|(a, b)| a + b).collect();
        IntMatrix { rows: self.rows, cols: self.cols, data }
    }

    pub fn sub(&self, other: &IntMatrix) -> IntMatrix {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols), "dimension mismatch");
        let data = self.data.iter().zip(&other.data).map(|(a, b)| a - b).collect();
        IntMatrix { rows: self.rows, cols: self.cols, data }
    }

    pub fn pow(&self, e: u32) -> IntMatrix {
        assert!(self.is_square());
        (0..e).fold(IntMatrix::identity(self.rows), |acc, _| acc.mul(self))
    }

    /// Block diagonal `[[self, 0], [0, other]]`.
    pub fn block_diag(&self, other: &IntMatrix) -> IntMatrix {
        let mut out = IntMatrix::zero(self.rows + other.rows, self.cols + other.cols);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out[(i, j)] = self[(i, j)].clone();
            }
        }
        for i in 0..other.rows {
            for j in 0..other.cols {
                out[(self.rows + i, self.cols + j)] = other[(i, j)].clone();
            }
        }
        out
    }

    /// The rows `start..` as a new matrix.
    fn row_range(&self, start: usize) -> IntMatrix {
        IntMatrix {
            rows: self.rows - start,
            cols: self.cols,
            data: self.data[start * self.cols..].to_vec(),
        }
    }

    pub fn to_i64_rows(&self) -> Option<Vec<Vec<i64>>> {
        (0..self.rows)
            .map(|i| (0..self.cols).map(|j| self[(i, j)].to_i64()).collect())
            .collect()
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a != b {
            for j in 0..self.cols {
                self.data.swap(a * self.cols + j, b * self.cols + j);
            }
        }
    }

    fn swap_cols(&mut self, a: usize, b: usize) {
        if a != b {
            for i in 0..self.rows {
                self.data.swap(i * self.cols + a, i * self.cols + b);
            }
        }
    }

    /// `row[dst] += q * row[src]`
    fn add_row(&mut self, dst: usize, src: usize, q: &BigInt) {
        for j in 0..self.cols {
            let v = &self.data[src * self.cols + j] * q;
            self.data[dst * self.cols + j] += v;
        }
    }

    /// `col[dst] += q * col[src]`
    fn add_col(&mut self, dst: usize, src: usize, q: &BigInt) {
        for i in 0..self.rows {
            let v = &self.data[i * self.cols + src] * q;
            self.data[i * self.cols + dst] += v;
        }
    }

    fn negate_row(&mut self, r: usize) {
        for j in 0..self.cols {
            let v = &mut self.data[r * self.cols + j];
            *v = -std::mem::take(v);
        }
    }
}

impl std::ops::Index<(usize, usize)> for IntMatrix {
    type Output = BigInt;
    fn index(&self, (i, j): (usize, usize)) -> &BigInt {
        &self.data[i * self.cols + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for IntMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut BigInt {
        &mut self.data[i * self.cols + j]
    }
}

impl fmt::Debug for IntMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let rows: Vec<Vec<String>> = (0..self.rows)
            .map(|i| (0..self.cols).map(|j| self[(i, j)].to_string()).collect())
            .collect();
        write!(f, "{rows:?}")
    }
}

/// `D = U · M · V` with `U`, `V` unimodular and `D` diagonal, each nonzero
/// diagonal entry positive and dividing the next.
#[derive(Debug, Clone)]
pub struct SmithForm {
    pub d: IntMatrix,
    pub u: IntMatrix,
    pub v: IntMatrix,
    pub v_inv: IntMatrix,
}

impl SmithForm {
    /// The nonzero diagonal entries.
    pub fn invariant_factors(&self) -> Vec<BigInt> {
        (0..self.d.rows.min(self.d.cols))
            .map(|i| self.d[(i, i)].clone())
            .take_while(|v| !v.is_zero())
            .collect()
    }

    pub fn rank(&self) -> usize {
        self.invariant_factors().len()
    }
}

pub fn smith_normal_form(m: &IntMatrix) -> SmithForm {
    let (rows, cols) = (m.rows, m.cols);
    let mut d = m.clone();
    let mut u = IntMatrix::identity(rows);
    let mut v = IntMatrix::identity(cols);
    // Column operations on `v` are mirrored as inverse row operations here.
    let mut v_inv = IntMatrix::identity(cols);

    let swap_c = |d: &mut IntMatrix, v: &mut IntMatrix, v_inv: &mut IntMatrix, a, b| {
        d.swap_cols(a, b);
        v.swap_cols(a, b);
        v_inv.swap_rows(a, b);
    };
    let add_c = |d: &mut IntMatrix, v: &mut IntMatrix, v_inv: &mut IntMatrix, dst, src, q: &BigInt| {
        d.add_col(dst, src, q);
        v.add_col(dst, src, q);
        v_inv.add_row(src, dst, &-q);
    };

    for t in 0..rows.min(cols) {
        let Some((pi, pj)) = min_abs_entry(&d, t) else { break };
        d.swap_rows(t, pi);
        u.swap_rows(t, pi);
        swap_c(&mut d, &mut v, &mut v_inv, t, pj);

        loop {
            let mut dirty = false;
            for i in t + 1..rows {
                if d[(i, t)].is_zero() {
                    continue;
                }
                let q = -d[(i, t)].div_floor(&d[(t, t)]);
                d.add_row(i, t, &q);
                u.add_row(i, t, &q);
                dirty |= !d[(i, t)].is_zero();
            }
            for j in t + 1..cols {
                if d[(t, j)].is_zero() {
                    continue;
                }
                let q = -d[(t, j)].div_floor(&d[(t, t)]);
                add_c(&mut d, &mut v, &mut v_inv, j, t, &q);
                dirty |= !d[(t, j)].is_zero();
            }
            if dirty {
                // A smaller remainder is now in row or column t.
                let (pi, pj) = min_abs_entry(&d, t).expect("pivot row is nonzero");
                d.swap_rows(t, pi);
                u.swap_rows(t, pi);
                swap_c(&mut d, &mut v, &mut v_inv, t, pj);
                continue;
            }
            let offender = (t + 1..rows)
                .find(|&i| (t + 1..cols).any(|j| !d[(i, j)].is_multiple_of(&d[(t, t)])));
            match offender {
                Some(i) => {
                    d.add_row(t, i, &BigInt::one());
                    u.add_row(t, i, &BigInt::one());
                }
                None => break,
            }
        }
        if d[(t, t)].is_negative() {
            d.negate_row(t);
            u.negate_row(t);
        }
    }
    SmithForm { d, u, v, v_inv }
}

fn min_abs_entry(m: &IntMatrix, t: usize) -> Option<(usize, usize)> {
    let mut best: Option<(usize, usize)> = None;
    for i in t..m.rows {
        for j in t..m.cols {
            let e = &m[(i, j)];
            if !e.is_zero() && best.map_or(true, |(bi, bj)| e.magnitude() < m[(bi, bj)].magnitude()) {
                best = Some((i, j));
            }
        }
    }
    best
}

/// The generator of `Z/r` acting on `Z^d` by `T`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LatticeAction {
    t: IntMatrix,
    r: u32,
}

impl LatticeAction {
    pub fn new(t: IntMatrix, r: u32) -> Result<Self> {
        if !t.is_square() || t.rows == 0 {
            return Err(Error::param("action matrix must be square and nonempty"));
        }
        if r == 0 {
            return Err(Error::param("group order must be positive"));
        }
        let snf = smith_normal_form(&t);
        if snf.rank() != t.rows || snf.invariant_factors().iter().any(|f| !f.is_one()) {
            return Err(Error::param("action matrix is not unimodular"));
        }
        if t.pow(r) != IntMatrix::identity(t.rows) {
            return Err(Error::param(format!("action matrix does not satisfy T^{r} = I")));
        }
        Ok(LatticeAction { t, r })
    }

    /// Cyclic shift on `Z^r`, `e_i ↦ e_{i+1}`.
    pub fn regular(r: u32) -> Result<Self> {
        let r_us = r as usize;
        let mut t = IntMatrix::zero(r_us, r_us);
        for i in 0..r_us {
            t[((i + 1) % r_us, i)] = BigInt::one();
        }
        Self::new(t, r)
    }

    /// `Z/r` acting trivially on `Z`.
    pub fn trivial(r: u32) -> Result<Self> {
        Self::new(IntMatrix::identity(1), r)
    }

    pub fn matrix(&self) -> &IntMatrix {
        &self.t
    }

    pub fn order(&self) -> u32 {
        self.r
    }

    pub fn dim(&self) -> usize {
        self.t.rows
    }

    pub fn direct_sum(&self, other: &LatticeAction) -> Result<Self> {
        if self.r != other.r {
            return Err(Error::param("direct sum of actions of different groups"));
        }
        Ok(LatticeAction { t: self.t.block_diag(&other.t), r: self.r })
    }

    /// The subgroup generated by `T^d`, of order `r / d`.
    pub fn restrict(&self, d: u32) -> Result<Self> {
        if d == 0 || self.r % d != 0 {
            return Err(Error::param(format!("{d} does not divide the group order {}", self.r)));
        }
        Ok(LatticeAction { t: self.t.pow(d), r: self.r / d })
    }

    /// `P T P^{-1}` for unimodular `P`.
    pub fn conjugate(&self, p: &IntMatrix) -> Result<Self> {
        let p_inv = unimodular_inverse(p)
            .ok_or_else(|| Error::param("change of basis is not unimodular"))?;
        if p.rows != self.t.rows {
            return Err(Error::param("change of basis has the wrong dimension"));
        }
        Ok(LatticeAction { t: p.mul(&self.t).mul(&p_inv), r: self.r })
    }

    pub fn norm_matrix(&self) -> IntMatrix {
        let mut sum = IntMatrix::zero(self.dim(), self.dim());
        let mut power = IntMatrix::identity(self.dim());
        for _ in 0..self.r {
            sum = sum.add(&power);
            power = power.mul(&self.t);
        }
        sum
    }

    fn t_minus_one(&self) -> IntMatrix {
        self.t.sub(&IntMatrix::identity(self.dim()))
    }
}

/// `P^{-1}` when `P` is square with determinant `±1`.
pub fn unimodular_inverse(p: &IntMatrix) -> Option<IntMatrix> {
    if !p.is_square() {
        return None;
    }
    let snf = smith_normal_form(p);
    if snf.rank() != p.rows || snf.invariant_factors().iter().any(|f| !f.is_one()) {
        return None;
    }
    // I = U P V, so P^{-1} = V U.
    Some(snf.v.mul(&snf.u))
}

/// Invariant factors (> 1) of `ker(a) / im(b)`, with `0` for each free
/// summand. Requires `a · b = 0`.
fn subquotient(a: &IntMatrix, b: &IntMatrix) -> Vec<BigInt> {
    debug_assert!(a.mul(b).data.iter().all(Zero::is_zero));
    let snf = smith_normal_form(a);
    let rank = snf.rank();
    let kernel_dim = a.cols - rank;
    // The last columns of V span ker(a); V^{-1} gives coordinates in that basis.
    let coords = snf.v_inv.row_range(rank).mul(b);
    let inner = smith_normal_form(&coords);
    let factors = inner.invariant_factors();
    let free = kernel_dim - factors.len();
    factors
        .into_iter()
        .filter(|f| !f.is_one())
        .chain(std::iter::repeat(BigInt::zero()).take(free))
        .collect()
}

/// `ker N / im(T - I)`; empty when it vanishes.
pub fn tate_h1(action: &LatticeAction) -> Vec<BigInt> {
    subquotient(&action.norm_matrix(), &action.t_minus_one())
}

/// `ker(T - I) / im N`; empty when it vanishes.
pub fn tate_h2(action: &LatticeAction) -> Vec<BigInt> {
    subquotient(&action.t_minus_one(), &action.norm_matrix())
}

/// `{"actions": [{"name": ..., "order": r, "matrix": [[...], ...]}, ...]}`
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ActionsDocument {
    pub actions: Vec<ActionEntry>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ActionEntry {
    pub name: String,
    pub order: u32,
    pub matrix: Vec<Vec<i64>>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CohomologyReport {
    pub name: String,
    pub order: u32,
    pub dim: usize,
    pub h1: Vec<String>,
    pub h2: Vec<String>,
}

impl CohomologyReport {
    pub fn compute(name: impl Into<String>, action: &LatticeAction) -> Self {
        let fmt = |v: Vec<BigInt>| v.iter().map(BigInt::to_string).collect();
        CohomologyReport {
            name: name.into(),
            order: action.order(),
            dim: action.dim(),
            h1: fmt(tate_h1(action)),
            h2: fmt(tate_h2(action)),
        }
    }
}

/// Parses an actions document and computes both groups for every entry.
pub fn reports_from_json(s: &str) -> Result<Vec<CohomologyReport>> {
    let doc: ActionsDocument = serde_json::from_str(s).map_err(|e| Error::Parse {
        location: format!("line {} column {}", e.line(), e.column()),
        message: e.to_string(),
    })?;
    doc.actions
        .iter()
        .enumerate()
        .map(|(i, entry)| {
            let located = |e: Error| Error::Parse {
                location: format!("actions[{i}]"),
                message: e.to_string(),
            };
            let t = IntMatrix::from_rows(&entry.matrix).map_err(located)?;
            let action = LatticeAction::new(t, entry.order).map_err(located)?;
            Ok(CohomologyReport::compute(entry.name.clone(), &action))
        })
        .collect()
}
