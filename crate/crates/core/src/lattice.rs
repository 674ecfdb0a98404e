//! Exact integer linear algebra: Smith and Hermite normal forms, integer
//! kernels, and finite quotients of lattices.
//!
//! Everything is done over `BigInt` with elementary row and column
//! operations; no modular arithmetic.

use std::fmt;

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LatticeError {
    #[error("matrix has {found} entries, expected {rows}x{cols}")]
    Shape {
        rows: usize,
        cols: usize,
        found: usize,
    },
    #[error("dimension mismatch: {0}")]
    Dimension(&'static str),
    #[error("generator {row} of the sublattice is not in the ambient lattice")]
    NotContained { row: usize },
    #[error("quotient is infinite (free rank {free_rank})")]
    Infinite { free_rank: usize },
    #[error("quotient has order {order}, above the limit {limit}")]
    TooLarge { order: BigUint, limit: u64 },
}

/// Dense integer matrix in row-major order.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct IntMatrix {
    rows: usize,
    cols: usize,
    data: Vec<BigInt>,
}

impl IntMatrix {
    pub fn new(rows: usize, cols: usize, data: Vec<BigInt>) -> Result<Self, LatticeError> {
        if data.len() != rows * cols {
            return Err(LatticeError::Shape {
                rows,
                cols,
                found: data.len(),
            });
        }
        Ok(IntMatrix { rows, cols, data })
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        IntMatrix {
            rows,
            cols,
            data: vec![BigInt::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = IntMatrix::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = BigInt::one();
        }
        m
    }

    /// Rows of equal length; `cols` is needed for the zero-row case.
    pub fn from_rows<T: Into<BigInt> + Clone>(cols: usize, rows: &[Vec<T>]) -> Result<Self, LatticeError> {
        let mut data = Vec::with_capacity(rows.len() * cols);
        for r in rows {
            if r.len() != cols {
                return Err(LatticeError::Dimension("ragged rows"));
            }
            data.extend(r.iter().cloned().map(Into::into));
        }
        Ok(IntMatrix {
            rows: rows.len(),
            cols,
            data,
        })
    }

    pub fn from_i64(rows: usize, cols: usize, entries: &[i64]) -> Result<Self, LatticeError> {
        IntMatrix::new(rows, cols, entries.iter().map(|&x| BigInt::from(x)).collect())
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, i: usize) -> &[BigInt] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn row_vecs(&self) -> Vec<Vec<BigInt>> {
        (0..self.rows).map(|i| self.row(i).to_vec()).collect()
    }

    pub fn entries(&self) -> &[BigInt] {
        &self.data
    }

    pub fn transpose(&self) -> IntMatrix {
        let mut t = IntMatrix::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t[(j, i)] = self[(i, j)].clone();
            }
        }
        t
    }

    pub fn mul(&self, other: &IntMatrix) -> Result<IntMatrix, LatticeError> {
        if self.cols != other.rows {
            return Err(LatticeError::Dimension("inner dimensions differ"));
        }
        let mut out = IntMatrix::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = &self[(i, k)];
                if a.is_zero() {
                    continue;
                }
                for j in 0..other.cols {
                    let p = a * &other[(k, j)];
                    out[(i, j)] += p;
                }
            }
        }
        Ok(out)
    }

    /// Row vector times matrix.
    pub fn left_mul_vec(&self, v: &[BigInt]) -> Vec<BigInt> {
        assert_eq!(v.len(), self.rows, "vector length must match row count");
        let mut out = vec![BigInt::zero(); self.cols];
        for (i, c) in v.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            for (o, x) in out.iter_mut().zip(self.row(i)) {
                *o += c * x;
            }
        }
        out
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(Zero::is_zero)
    }

    /// Determinant by fraction-free (Bareiss) elimination.
    pub fn determinant(&self) -> Result<BigInt, LatticeError> {
        if self.rows != self.cols {
            return Err(LatticeError::Dimension("determinant of a non-square matrix"));
        }
        let n = self.rows;
        if n == 0 {
            return Ok(BigInt::one());
        }
        let mut a = self.clone();
        let mut sign = BigInt::one();
        let mut prev = BigInt::one();
        for k in 0..n - 1 {
            if a[(k, k)].is_zero() {
                match (k + 1..n).find(|&i| !a[(i, k)].is_zero()) {
                    Some(i) => {
                        a.swap_rows(k, i);
                        sign = -sign;
                    }
                    None => return Ok(BigInt::zero()),
                }
            }
            for i in k + 1..n {
                for j in k + 1..n {
                    let v = (&a[(i, j)] * &a[(k, k)] - &a[(i, k)] * &a[(k, j)]) / &prev;
                    a[(i, j)] = v;
                }
            }
            prev = a[(k, k)].clone();
        }
        Ok(sign * &a[(n - 1, n - 1)])
    }

    pub fn rank(&self) -> usize {
        let (h, _) = hermite_normal_form(self);
        (0..h.rows).filter(|&i| h.row(i).iter().any(|x| !x.is_zero())).count()
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for j in 0..self.cols {
            self.data.swap(a * self.cols + j, b * self.cols + j);
        }
    }

    fn swap_cols(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for i in 0..self.rows {
            self.data.swap(i * self.cols + a, i * self.cols + b);
        }
    }

    /// row[dst] += q * row[src]
    fn add_row_multiple(&mut self, dst: usize, src: usize, q: &BigInt) {
        if q.is_zero() {
            return;
        }
        for j in 0..self.cols {
            let x = &self.data[src * self.cols + j];
            if x.is_zero() {
                continue;
            }
            let v = q * x;
            self.data[dst * self.cols + j] += v;
        }
    }

    /// col[dst] += q * col[src]
    fn add_col_multiple(&mut self, dst: usize, src: usize, q: &BigInt) {
        if q.is_zero() {
            return;
        }
        for i in 0..self.rows {
            let x = &self.data[i * self.cols + src];
            if x.is_zero() {
                continue;
            }
            let v = q * x;
            self.data[i * self.cols + dst] += v;
        }
    }

    fn negate_row(&mut self, r: usize) {
        for j in 0..self.cols {
            let v = -std::mem::take(&mut self.data[r * self.cols + j]);
            self.data[r * self.cols + j] = v;
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

/// Stable bracketed form, e.g. `[[1, 0], [0, 6]]`.
impl fmt::Display for IntMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("[")?;
        for i in 0..self.rows {
            if i > 0 {
                f.write_str(", ")?;
            }
            f.write_str("[")?;
            for (j, x) in self.row(i).iter().enumerate() {
                if j > 0 {
                    f.write_str(", ")?;
                }
                write!(f, "{x}")?;
            }
            f.write_str("]")?;
        }
        f.write_str("]")
    }
}

impl fmt::Debug for IntMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "IntMatrix{}x{}{}", self.rows, self.cols, self)
    }
}

/// A finitely generated abelian group `Z^free_rank + Z/d_1 + ... + Z/d_k`
/// with `2 <= d_1 | d_2 | ... | d_k`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct InvariantFactors {
    pub factors: Vec<BigUint>,
    pub free_rank: usize,
}

impl InvariantFactors {
    pub fn trivial() -> Self {
        InvariantFactors::default()
    }

    /// From arbitrary diagonal entries of a Smith form; units are dropped and
    /// zeros become free rank.
    pub fn from_diagonal<'a, I: IntoIterator<Item = &'a BigInt>>(diag: I, extra_free: usize) -> Self {
        let mut factors = Vec::new();
        let mut free_rank = extra_free;
        for d in diag {
            if d.is_zero() {
                free_rank += 1;
            } else if !d.abs().is_one() {
                factors.push(d.magnitude().clone());
            }
        }
        factors.sort();
        InvariantFactors { factors, free_rank }
    }

    pub fn is_trivial(&self) -> bool {
        self.factors.is_empty() && self.free_rank == 0
    }

    pub fn is_finite(&self) -> bool {
        self.free_rank == 0
    }

    /// Group order, `None` when infinite.
    pub fn order(&self) -> Option<BigUint> {
        self.is_finite().then(|| self.factors.iter().product())
    }

    pub fn divisibility_chain_holds(&self) -> bool {
        self.factors.iter().all(|d| *d >= BigUint::from(2u8))
            && self.factors.windows(2).all(|w| (&w[1] % &w[0]).is_zero())
    }
}

/// `trivial`, `Z/5`, `Z/2 x Z/6`, `Z^2 x Z/3`.
impl fmt::Display for InvariantFactors {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_trivial() {
            return f.write_str("trivial");
        }
        let mut parts = Vec::new();
        match self.free_rank {
            0 => {}
            1 => parts.push("Z".to_string()),
            r => parts.push(format!("Z^{r}")),
        }
        parts.extend(self.factors.iter().map(|d| format!("Z/{d}")));
        f.write_str(&parts.join(" x "))
    }
}

/// `U * M * V = D` with `U`, `V` unimodular and `D` in Smith form.
/// `v_inv` is the inverse of `V`.
#[derive(Debug, Clone)]
pub struct Smith {
    pub u: IntMatrix,
    pub d: IntMatrix,
    pub v: IntMatrix,
    pub v_inv: IntMatrix,
}

impl Smith {
    pub fn diagonal(&self) -> Vec<BigInt> {
        (0..self.d.rows.min(self.d.cols))
            .map(|i| self.d[(i, i)].clone())
            .collect()
    }

    /// Invariant factors of the cokernel `Z^cols / (row span of M)`.
    pub fn row_cokernel(&self) -> InvariantFactors {
        let diag = self.diagonal();
        InvariantFactors::from_diagonal(&diag, self.d.cols - diag.len())
    }
}

pub fn smith_normal_form(m: &IntMatrix) -> Smith {
    let (rows, cols) = (m.rows, m.cols);
    let mut d = m.clone();
    let mut u = IntMatrix::identity(rows);
    let mut v = IntMatrix::identity(cols);
    let mut v_inv = IntMatrix::identity(cols);

    for t in 0..rows.min(cols) {
        loop {
            // smallest nonzero entry of the trailing block becomes the pivot
            let mut best: Option<(usize, usize)> = None;
            for i in t..rows {
                for j in t..cols {
                    let x = &d[(i, j)];
                    if !x.is_zero() && best.is_none_or(|(bi, bj)| x.magnitude() < d[(bi, bj)].magnitude()) {
                        best = Some((i, j));
                    }
                }
            }
            let Some((pi, pj)) = best else {
                return finish_smith(u, d, v, v_inv);
            };
            d.swap_rows(t, pi);
            u.swap_rows(t, pi);
            d.swap_cols(t, pj);
            v.swap_cols(t, pj);
            v_inv.swap_rows(t, pj);

            let mut clean = true;
            for i in t + 1..rows {
                if d[(i, t)].is_zero() {
                    continue;
                }
                let q = -(&d[(i, t)] / &d[(t, t)]);
                d.add_row_multiple(i, t, &q);
                u.add_row_multiple(i, t, &q);
                clean &= d[(i, t)].is_zero();
            }
            for j in t + 1..cols {
                if d[(t, j)].is_zero() {
                    continue;
                }
                let q = -(&d[(t, j)] / &d[(t, t)]);
                d.add_col_multiple(j, t, &q);
                v.add_col_multiple(j, t, &q);
                v_inv.add_row_multiple(t, j, &-q);
                clean &= d[(t, j)].is_zero();
            }
            if !clean {
                continue;
            }
            // pivot must divide the whole trailing block
            let bad = (t + 1..rows)
                .flat_map(|i| (t + 1..cols).map(move |j| (i, j)))
                .find(|&(i, j)| !d[(i, j)].is_multiple_of(&d[(t, t)]));
            match bad {
                Some((i, _)) => {
                    d.add_row_multiple(t, i, &BigInt::one());
                    u.add_row_multiple(t, i, &BigInt::one());
                }
                None => break,
            }
        }
        if d[(t, t)].is_negative() {
            d.negate_row(t);
            u.negate_row(t);
        }
    }
    finish_smith(u, d, v, v_inv)
}

fn finish_smith(u: IntMatrix, d: IntMatrix, v: IntMatrix, v_inv: IntMatrix) -> Smith {
    Smith { u, d, v, v_inv }
}

/// Smith diagonal of `m` without tracking the transforms.
pub fn smith_diagonal(m: &IntMatrix) -> Vec<BigInt> {
    let (rows, cols) = (m.rows, m.cols);
    let mut d = m.clone();
    let mut out = Vec::with_capacity(rows.min(cols));
    for t in 0..rows.min(cols) {
        loop {
            let mut best: Option<(usize, usize)> = None;
            for i in t..rows {
                for j in t..cols {
                    let x = &d[(i, j)];
                    if !x.is_zero() && best.is_none_or(|(bi, bj)| x.magnitude() < d[(bi, bj)].magnitude()) {
                        best = Some((i, j));
                    }
                }
            }
            let Some((pi, pj)) = best else {
                out.resize(rows.min(cols), BigInt::zero());
                return out;
            };
            d.swap_rows(t, pi);
            d.swap_cols(t, pj);
            let mut clean = true;
            for i in t + 1..rows {
                if !d[(i, t)].is_zero() {
                    let q = -(&d[(i, t)] / &d[(t, t)]);
                    d.add_row_multiple(i, t, &q);
                    clean &= d[(i, t)].is_zero();
                }
            }
            for j in t + 1..cols {
                if !d[(t, j)].is_zero() {
                    let q = -(&d[(t, j)] / &d[(t, t)]);
                    d.add_col_multiple(j, t, &q);
                    clean &= d[(t, j)].is_zero();
                }
            }
            if !clean {
                continue;
            }
            let bad = (t + 1..rows)
                .flat_map(|i| (t + 1..cols).map(move |j| (i, j)))
                .find(|&(i, j)| !d[(i, j)].is_multiple_of(&d[(t, t)]));
            match bad {
                Some((i, _)) => d.add_row_multiple(t, i, &BigInt::one()),
                None => break,
            }
        }
        out.push(d[(t, t)].abs());
    }
    out
}

/// Row-style Hermite normal form `H = U * M`: echelon form with positive
/// pivots, entries above each pivot reduced into `[0, pivot)`, zero rows last.
pub fn hermite_normal_form(m: &IntMatrix) -> (IntMatrix, IntMatrix) {
    let (rows, cols) = (m.rows, m.cols);
    let mut h = m.clone();
    let mut u = IntMatrix::identity(rows);
    let mut r = 0;
    for c in 0..cols {
        if r == rows {
            break;
        }
        loop {
            let best = (r..rows)
                .filter(|&i| !h[(i, c)].is_zero())
                .min_by(|&a, &b| h[(a, c)].magnitude().cmp(h[(b, c)].magnitude()));
            let Some(p) = best else { break };
            h.swap_rows(r, p);
            u.swap_rows(r, p);
            let mut clean = true;
            for i in r + 1..rows {
                if h[(i, c)].is_zero() {
                    continue;
                }
                let q = -(&h[(i, c)] / &h[(r, c)]);
                h.add_row_multiple(i, r, &q);
                u.add_row_multiple(i, r, &q);
                clean &= h[(i, c)].is_zero();
            }
            if clean {
                break;
            }
        }
        if h[(r, c)].is_zero() {
            continue;
        }
        if h[(r, c)].is_negative() {
            h.negate_row(r);
            u.negate_row(r);
        }
        for i in 0..r {
            let q = -h[(i, c)].div_floor(&h[(r, c)]);
            h.add_row_multiple(i, r, &q);
            u.add_row_multiple(i, r, &q);
        }
        r += 1;
    }
    (h, u)
}

/// Saturated basis (in Hermite form) of `{x in Z^cols : M x = 0}`, one
/// basis vector per row.
pub fn kernel_basis(m: &IntMatrix) -> IntMatrix {
    let (h, u) = hermite_normal_form(&m.transpose());
    let rank = (0..h.rows).filter(|&i| h.row(i).iter().any(|x| !x.is_zero())).count();
    let kernel: Vec<Vec<BigInt>> = (rank..u.rows).map(|i| u.row(i).to_vec()).collect();
    let k = IntMatrix::from_rows(m.cols, &kernel).expect("rows of U have cols entries");
    hermite_normal_form(&k).0
}

/// Non-zero rows of the Hermite form of the row span: a basis of the lattice.
fn lattice_basis(gens: &IntMatrix) -> (IntMatrix, Vec<usize>) {
    let (h, _) = hermite_normal_form(gens);
    let mut rows = Vec::new();
    let mut pivots = Vec::new();
    for i in 0..h.rows {
        if let Some(p) = h.row(i).iter().position(|x| !x.is_zero()) {
            rows.push(h.row(i).to_vec());
            pivots.push(p);
        }
    }
    (
        IntMatrix::from_rows(gens.cols, &rows).expect("uniform row length"),
        pivots,
    )
}

/// Coordinates of `x` in an echelon basis, if `x` lies in its span over Z.
fn echelon_coordinates(basis: &IntMatrix, pivots: &[usize], x: &[BigInt]) -> Option<Vec<BigInt>> {
    let mut rest = x.to_vec();
    let mut coords = Vec::with_capacity(pivots.len());
    for (i, &p) in pivots.iter().enumerate() {
        let (c, r) = rest[p].div_rem(&basis[(i, p)]);
        if !r.is_zero() {
            return None;
        }
        for (y, b) in rest.iter_mut().zip(basis.row(i)) {
            *y -= &c * b;
        }
        coords.push(c);
    }
    rest.iter().all(Zero::is_zero).then_some(coords)
}

/// Whether `x` lies in the row span of `gens` over the integers.
pub fn contains(gens: &IntMatrix, x: &[BigInt]) -> bool {
    let (basis, pivots) = lattice_basis(gens);
    x.len() == gens.cols && echelon_coordinates(&basis, &pivots, x).is_some()
}

/// The quotient of the row span of `ambient` by the row span of `sub`,
/// with enough bookkeeping to name cosets.
#[derive(Debug, Clone)]
pub struct Quotient {
    basis: IntMatrix,
    pivots: Vec<usize>,
    /// Smith diagonal padded with zeros to the ambient rank.
    diag: Vec<BigInt>,
    v: IntMatrix,
    v_inv: IntMatrix,
}

impl Quotient {
    pub fn new(ambient: &IntMatrix, sub: &IntMatrix) -> Result<Self, LatticeError> {
        if ambient.cols != sub.cols {
            return Err(LatticeError::Dimension("ambient and sublattice live in different spaces"));
        }
        let (basis, pivots) = lattice_basis(ambient);
        let r = basis.rows;
        let mut coords = Vec::with_capacity(sub.rows);
        for i in 0..sub.rows {
            match echelon_coordinates(&basis, &pivots, sub.row(i)) {
                Some(c) => coords.push(c),
                None => return Err(LatticeError::NotContained { row: i }),
            }
        }
        let c = IntMatrix::from_rows(r, &coords).expect("coordinates have ambient rank entries");
        let smith = smith_normal_form(&c);
        let mut diag = smith.diagonal();
        diag.resize(r, BigInt::zero());
        Ok(Quotient {
            basis,
            pivots,
            diag,
            v: smith.v,
            v_inv: smith.v_inv,
        })
    }

    pub fn invariants(&self) -> InvariantFactors {
        InvariantFactors::from_diagonal(&self.diag, 0)
    }

    pub fn ambient_basis(&self) -> &IntMatrix {
        &self.basis
    }

    /// A key that is equal for two ambient vectors iff they are congruent
    /// modulo the sublattice. `None` if `x` is not in the ambient lattice.
    pub fn class_of(&self, x: &[BigInt]) -> Option<Vec<BigInt>> {
        if x.len() != self.basis.cols {
            return None;
        }
        let y = echelon_coordinates(&self.basis, &self.pivots, x)?;
        let z = self.v.left_mul_vec(&y);
        Some(
            z.into_iter()
                .zip(&self.diag)
                .map(|(zi, d)| if d.is_zero() { zi } else { zi.mod_floor(d) })
                .collect(),
        )
    }

    /// One ambient vector per coset, in lexicographic order of the Smith
    /// coordinates. Requires a finite quotient of order at most `limit`.
    pub fn representatives(&self, limit: u64) -> Result<Vec<Vec<BigInt>>, LatticeError> {
        let inv = self.invariants();
        let order = inv.order().ok_or(LatticeError::Infinite {
            free_rank: inv.free_rank,
        })?;
        if order > BigUint::from(limit) {
            return Err(LatticeError::TooLarge { order, limit });
        }
        let r = self.diag.len();
        let mut out = Vec::new();
        let mut z = vec![BigInt::zero(); r];
        loop {
            let y = self.v_inv.left_mul_vec(&z);
            out.push(self.basis.left_mul_vec(&y));
            // odometer over prod [0, d_i)
            let mut i = r;
            loop {
                if i == 0 {
                    return Ok(out);
                }
                i -= 1;
                z[i] += 1;
                if z[i] < self.diag[i] {
                    break;
                }
                z[i] = BigInt::zero();
            }
        }
    }
}

pub fn quotient(ambient: &IntMatrix, sub: &IntMatrix) -> Result<InvariantFactors, LatticeError> {
    Ok(Quotient::new(ambient, sub)?.invariants())
}

pub fn coset_representatives(
    ambient: &IntMatrix,
    sub: &IntMatrix,
    limit: u64,
) -> Result<Vec<Vec<BigInt>>, LatticeError> {
    Quotient::new(ambient, sub)?.representatives(limit)
}

/// Basis `e_i - e_{n-1}` of the degree-zero vectors in `Z^n`.
pub fn degree_zero_basis(n: usize) -> IntMatrix {
    let mut m = IntMatrix::zeros(n.saturating_sub(1), n);
    for i in 0..n.saturating_sub(1) {
        m[(i, i)] = BigInt::one();
        m[(i, n - 1)] = BigInt::from(-1);
    }
    m
}

pub fn is_unimodular(m: &IntMatrix) -> bool {
    m.determinant().map(|d| d.magnitude().is_one()).unwrap_or(false)
}
