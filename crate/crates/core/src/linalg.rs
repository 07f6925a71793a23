//! Exact sparse linear algebra: Smith normal form over the integers with
//! arbitrary-precision arithmetic, and Gaussian elimination over the
//! rationals for rank, kernel and solving.
//!
//! No floating point anywhere; overflow would be silent data corruption in
//! homology computations, so everything runs on `BigInt`/`BigRational`.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};

/// Sparse integer matrix. At most one entry per coordinate, no explicit zeros.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SparseInt {
    rows: usize,
    cols: usize,
    entries: BTreeMap<(usize, usize), BigInt>,
}

impl SparseInt {
    pub fn new(rows: usize, cols: usize) -> Self {
        SparseInt {
            rows,
            cols,
            entries: BTreeMap::new(),
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = SparseInt::new(n, n);
        for i in 0..n {
            m.set(i, i, BigInt::one());
        }
        m
    }

    pub fn from_triplets<I>(rows: usize, cols: usize, triplets: I) -> Result<Self>
    where
        I: IntoIterator<Item = (usize, usize, BigInt)>,
    {
        let mut m = SparseInt::new(rows, cols);
        for (r, c, v) in triplets {
            if r >= rows || c >= cols {
                return Err(Error::invalid(
                    "linalg",
                    format!("entry ({r},{c}) out of range for {rows}x{cols} matrix"),
                ));
            }
            if m.entries.contains_key(&(r, c)) {
                return Err(Error::invalid(
                    "linalg",
                    format!("duplicate entry at ({r},{c})"),
                ));
            }
            if !v.is_zero() {
                m.entries.insert((r, c), v);
            }
        }
        Ok(m)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn nnz(&self) -> usize {
        self.entries.len()
    }

    pub fn set(&mut self, r: usize, c: usize, v: BigInt) {
        assert!(r < self.rows && c < self.cols);
        if v.is_zero() {
            self.entries.remove(&(r, c));
        } else {
            self.entries.insert((r, c), v);
        }
    }

    pub fn get(&self, r: usize, c: usize) -> BigInt {
        self.entries.get(&(r, c)).cloned().unwrap_or_else(BigInt::zero)
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, usize, &BigInt)> {
        self.entries.iter().map(|(&(r, c), v)| (r, c, v))
    }

    pub fn is_zero(&self) -> bool {
        self.entries.is_empty()
    }

    /// Matrix product, sparse in both arguments.
    pub fn mul(&self, other: &SparseInt) -> SparseInt {
        assert_eq!(self.cols, other.rows);
        let mut other_rows: Vec<Vec<(usize, &BigInt)>> = vec![Vec::new(); other.rows];
        for (r, c, v) in other.iter() {
            other_rows[r].push((c, v));
        }
        let mut out = SparseInt::new(self.rows, other.cols);
        let mut acc: BTreeMap<usize, BigInt> = BTreeMap::new();
        let mut current_row = usize::MAX;
        let flush = |row: usize, acc: &mut BTreeMap<usize, BigInt>, out: &mut SparseInt| {
            for (c, v) in std::mem::take(acc) {
                if !v.is_zero() {
                    out.entries.insert((row, c), v);
                }
            }
        };
        for (r, c, v) in self.iter() {
            if r != current_row {
                if current_row != usize::MAX {
                    flush(current_row, &mut acc, &mut out);
                }
                current_row = r;
            }
            for &(oc, ov) in &other_rows[c] {
                let e = acc.entry(oc).or_insert_with(BigInt::zero);
                *e += v * ov;
            }
        }
        if current_row != usize::MAX {
            flush(current_row, &mut acc, &mut out);
        }
        out
    }

    pub fn mul_vec(&self, x: &[BigInt]) -> Vec<BigInt> {
        assert_eq!(self.cols, x.len());
        let mut y = vec![BigInt::zero(); self.rows];
        for (r, c, v) in self.iter() {
            y[r] += v * &x[c];
        }
        y
    }

    pub fn to_rat(&self) -> RatMat {
        let mut m = RatMat::new(self.rows, self.cols);
        for (r, c, v) in self.iter() {
            m.set(r, c, BigRational::from_integer(v.clone()));
        }
        m
    }
}

/// Smith normal form `U * A * V = diag(d_1, ..., d_k)` with `d_i | d_{i+1}`.
#[derive(Debug, Clone)]
pub struct Smith {
    /// Positive invariant factors, divisibility chain.
    pub diag: Vec<BigInt>,
    pub rank: usize,
    pub u: SparseInt,
    pub v: SparseInt,
}

impl Smith {
    /// Invariant factors strictly greater than one (the torsion part).
    pub fn torsion(&self) -> Vec<BigInt> {
        self.diag.iter().filter(|d| !d.is_one()).cloned().collect()
    }

    pub fn diag_matrix(&self, rows: usize, cols: usize) -> SparseInt {
        let mut d = SparseInt::new(rows, cols);
        for (i, f) in self.diag.iter().enumerate() {
            d.set(i, i, f.clone());
        }
        d
    }
}

// Rounded quotient: q with |a - q*b| <= |b|/2.
fn div_round(a: &BigInt, b: &BigInt) -> BigInt {
    let (mut q, r) = a.div_rem(b);
    if &r.abs() * 2 > b.abs() {
        if (r.is_positive()) == (b.is_positive()) {
            q += 1;
        } else {
            q -= 1;
        }
    }
    q
}

struct SnfWork {
    rows: usize,
    cols: usize,
    // Row-major matrix being reduced.
    a: Vec<BTreeMap<usize, BigInt>>,
    // For each column, the set of rows with a nonzero entry there.
    col_rows: Vec<std::collections::BTreeSet<usize>>,
    // U row-major, V column-major (so both row and column ops are cheap).
    u: Vec<BTreeMap<usize, BigInt>>,
    v: Vec<BTreeMap<usize, BigInt>>,
}

impl SnfWork {
    fn new(m: &SparseInt) -> Self {
        let mut a = vec![BTreeMap::new(); m.rows];
        let mut col_rows = vec![std::collections::BTreeSet::new(); m.cols];
        for (r, c, val) in m.iter() {
            a[r].insert(c, val.clone());
            col_rows[c].insert(r);
        }
        let u = (0..m.rows)
            .map(|i| BTreeMap::from([(i, BigInt::one())]))
            .collect();
        let v = (0..m.cols)
            .map(|i| BTreeMap::from([(i, BigInt::one())]))
            .collect();
        SnfWork {
            rows: m.rows,
            cols: m.cols,
            a,
            col_rows,
            u,
            v,
        }
    }

    fn set_entry(&mut self, r: usize, c: usize, v: BigInt) {
        if v.is_zero() {
            if self.a[r].remove(&c).is_some() {
                self.col_rows[c].remove(&r);
            }
        } else {
            if self.a[r].insert(c, v).is_none() {
                self.col_rows[c].insert(r);
            }
        }
    }

    fn swap_rows(&mut self, i: usize, j: usize) {
        if i == j {
            return;
        }
        self.a.swap(i, j);
        self.u.swap(i, j);
        for col in 0..self.cols {
            let has_i = self.col_rows[col].contains(&i);
            let has_j = self.col_rows[col].contains(&j);
            if has_i != has_j {
                if has_i {
                    self.col_rows[col].remove(&i);
                    self.col_rows[col].insert(j);
                } else {
                    self.col_rows[col].remove(&j);
                    self.col_rows[col].insert(i);
                }
            }
        }
    }

    fn swap_cols(&mut self, i: usize, j: usize) {
        if i == j {
            return;
        }
        self.v.swap(i, j);
        let affected: std::collections::BTreeSet<usize> = self.col_rows[i]
            .iter()
            .chain(self.col_rows[j].iter())
            .cloned()
            .collect();
        for &r in &affected {
            let vi = self.a[r].remove(&i);
            let vj = self.a[r].remove(&j);
            if let Some(v) = vi {
                self.a[r].insert(j, v);
            }
            if let Some(v) = vj {
                self.a[r].insert(i, v);
            }
        }
        self.col_rows.swap(i, j);
    }

    // row[dst] += c * row[src]
    fn row_addmul(&mut self, dst: usize, src: usize, c: &BigInt) {
        if c.is_zero() {
            return;
        }
        let src_row: Vec<(usize, BigInt)> =
            self.a[src].iter().map(|(&k, v)| (k, v.clone())).collect();
        for (col, v) in src_row {
            let cur = self.a[dst].get(&col).cloned().unwrap_or_else(BigInt::zero);
            self.set_entry(dst, col, cur + c * v);
        }
        let src_u: Vec<(usize, BigInt)> =
            self.u[src].iter().map(|(&k, v)| (k, v.clone())).collect();
        for (col, v) in src_u {
            let e = self.u[dst].entry(col).or_insert_with(BigInt::zero);
            *e += c * v;
            if e.is_zero() {
                self.u[dst].remove(&col);
            }
        }
    }

    // col[dst] += c * col[src]
    fn col_addmul(&mut self, dst: usize, src: usize, c: &BigInt) {
        if c.is_zero() {
            return;
        }
        let rows: Vec<usize> = self.col_rows[src].iter().cloned().collect();
        for r in rows {
            let v = self.a[r].get(&src).cloned().unwrap();
            let cur = self.a[r].get(&dst).cloned().unwrap_or_else(BigInt::zero);
            self.set_entry(r, dst, cur + c * &v);
        }
        let src_v: Vec<(usize, BigInt)> =
            self.v[src].iter().map(|(&k, v)| (k, v.clone())).collect();
        for (row, v) in src_v {
            let e = self.v[dst].entry(row).or_insert_with(BigInt::zero);
            *e += c * v;
            if e.is_zero() {
                self.v[dst].remove(&row);
            }
        }
    }

    fn negate_row(&mut self, r: usize) {
        for v in self.a[r].values_mut() {
            *v = -std::mem::take(v);
        }
        for v in self.u[r].values_mut() {
            *v = -std::mem::take(v);
        }
    }

    // Smallest nonzero entry in the submatrix at (>= t, >= t), fill-in tie-break.
    fn choose_pivot(&self, t: usize) -> Option<(usize, usize)> {
        let mut best: Option<(BigInt, usize, usize, usize)> = None;
        for r in t..self.rows {
            for (&c, v) in self.a[r].range(t..) {
                let fill = (self.a[r].range(t..).count() - 1)
                    * (self.col_rows[c].range(t..).count() - 1);
                let abs = v.abs();
                let better = match &best {
                    None => true,
                    Some((babs, bfill, _, _)) => {
                        abs < *babs || (abs == *babs && fill < *bfill)
                    }
                };
                if better {
                    best = Some((abs, fill, r, c));
                }
            }
        }
        best.map(|(_, _, r, c)| (r, c))
    }

    // Clear row t and column t against the pivot at (t, t), leaving a pivot
    // that divides every entry of the remaining submatrix.
    fn clear_pivot(&mut self, t: usize) {
        loop {
            // Column t: eliminate every other row.
            loop {
                let pivot = self.a[t].get(&t).cloned().unwrap();
                let others: Vec<usize> = self.col_rows[t]
                    .range(t + 1..)
                    .cloned()
                    .collect();
                if others.is_empty() {
                    break;
                }
                for r in others {
                    let v = self.a[r].get(&t).cloned().unwrap();
                    let q = div_round(&v, &pivot);
                    self.row_addmul(r, t, &(-q));
                }
                // Remainders smaller than the pivot may be left over; promote
                // the smallest one and repeat.
                if let Some(&r) = self.col_rows[t].range(t + 1..).next() {
                    let mut best = r;
                    let mut best_abs = self.a[r].get(&t).unwrap().abs();
                    for &r2 in self.col_rows[t].range(t + 1..) {
                        let abs = self.a[r2].get(&t).unwrap().abs();
                        if abs < best_abs {
                            best = r2;
                            best_abs = abs;
                        }
                    }
                    self.swap_rows(t, best);
                } else {
                    break;
                }
            }
            // Row t: eliminate every other column.
            loop {
                let pivot = self.a[t].get(&t).cloned().unwrap();
                let others: Vec<usize> = self.a[t]
                    .range(t + 1..)
                    .map(|(&c, _)| c)
                    .collect();
                if others.is_empty() {
                    break;
                }
                for c in others {
                    let v = self.a[t].get(&c).cloned().unwrap();
                    let q = div_round(&v, &pivot);
                    self.col_addmul(c, t, &(-q));
                }
                if let Some((&c, _)) = self.a[t].range(t + 1..).next() {
                    let mut best = c;
                    let mut best_abs = self.a[t].get(&c).unwrap().abs();
                    for (&c2, v) in self.a[t].range(t + 1..) {
                        let abs = v.abs();
                        if abs < best_abs {
                            best = c2;
                            best_abs = abs;
                        }
                    }
                    self.swap_cols(t, best);
                } else {
                    break;
                }
            }
            // Clearing the row may have refilled the column.
            if self.col_rows[t].range(t + 1..).next().is_some() {
                continue;
            }
            // Divisibility: the pivot must divide everything that remains.
            let pivot = self.a[t].get(&t).cloned().unwrap();
            let mut offender = None;
            'search: for r in t + 1..self.rows {
                for (&_c, v) in self.a[r].range(t + 1..) {
                    if !v.mod_floor(&pivot).is_zero() {
                        offender = Some(r);
                        break 'search;
                    }
                }
            }
            match offender {
                Some(r) => {
                    self.row_addmul(t, r, &BigInt::one());
                }
                None => break,
            }
        }
    }
}

/// Smith normal form with unimodular transforms, `u * a * v = diag`.
///
/// Deterministic: identical inputs give identical decompositions. Pivots are
/// chosen by minimal absolute value, then minimal estimated fill-in.
pub fn smith(a: &SparseInt) -> Smith {
    let mut w = SnfWork::new(a);
    let n = a.rows.min(a.cols);
    let mut t = 0;
    while t < n {
        match w.choose_pivot(t) {
            None => break,
            Some((pr, pc)) => {
                w.swap_rows(t, pr);
                w.swap_cols(t, pc);
                w.clear_pivot(t);
                if w.a[t].get(&t).unwrap().is_negative() {
                    w.negate_row(t);
                }
                t += 1;
            }
        }
    }
    let diag: Vec<BigInt> = (0..t).map(|i| w.a[i].get(&i).unwrap().clone()).collect();
    let mut u = SparseInt::new(a.rows, a.rows);
    for (r, row) in w.u.iter().enumerate() {
        for (&c, v) in row {
            u.set(r, c, v.clone());
        }
    }
    let mut v = SparseInt::new(a.cols, a.cols);
    for (c, col) in w.v.iter().enumerate() {
        for (&r, val) in col {
            v.set(r, c, val.clone());
        }
    }
    Smith {
        diag,
        rank: t,
        u,
        v,
    }
}

/// Rank of an integer matrix (over the rationals).
pub fn rank_z(a: &SparseInt) -> usize {
    rank_q(&a.to_rat())
}

/// Basis of the integer kernel lattice of `a` (a direct summand of Z^cols).
pub fn kernel_basis_z(a: &SparseInt) -> Vec<Vec<BigInt>> {
    let s = smith(a);
    kernel_from_smith(a, &s)
}

/// Kernel basis extracted from a precomputed decomposition: the columns of V
/// past the rank.
pub fn kernel_from_smith(a: &SparseInt, s: &Smith) -> Vec<Vec<BigInt>> {
    let mut basis = Vec::new();
    for c in s.rank..a.cols {
        let mut col = vec![BigInt::zero(); a.cols];
        for r in 0..a.cols {
            let v = s.v.get(r, c);
            if !v.is_zero() {
                col[r] = v;
            }
        }
        basis.push(col);
    }
    basis
}

/// Solve `a x = b` over the integers using a precomputed Smith decomposition.
pub fn solve_z_with(s: &Smith, b: &[BigInt]) -> Option<Vec<BigInt>> {
    // a = U^-1 D V^-1, so with y = U b we need D z = y, then x = V z.
    let y = s.u.mul_vec(b);
    let mut z = vec![BigInt::zero(); s.v.rows()];
    for (i, yi) in y.iter().enumerate() {
        if i < s.diag.len() {
            let (q, r) = yi.div_rem(&s.diag[i]);
            if !r.is_zero() {
                return None;
            }
            z[i] = q;
        } else if !yi.is_zero() {
            return None;
        }
    }
    Some(s.v.mul_vec(&z))
}

pub fn solve_z(a: &SparseInt, b: &[BigInt]) -> Result<Option<Vec<BigInt>>> {
    if b.len() != a.rows {
        return Err(Error::invalid(
            "linalg",
            format!("rhs length {} does not match {} rows", b.len(), a.rows),
        ));
    }
    Ok(solve_z_with(&smith(a), b))
}

/// Sparse matrix over the rationals.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RatMat {
    rows: usize,
    cols: usize,
    entries: BTreeMap<(usize, usize), BigRational>,
}

impl RatMat {
    pub fn new(rows: usize, cols: usize) -> Self {
        RatMat {
            rows,
            cols,
            entries: BTreeMap::new(),
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = RatMat::new(n, n);
        for i in 0..n {
            m.set(i, i, BigRational::one());
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn set(&mut self, r: usize, c: usize, v: BigRational) {
        assert!(r < self.rows && c < self.cols);
        if v.is_zero() {
            self.entries.remove(&(r, c));
        } else {
            self.entries.insert((r, c), v);
        }
    }

    pub fn get(&self, r: usize, c: usize) -> BigRational {
        self.entries
            .get(&(r, c))
            .cloned()
            .unwrap_or_else(BigRational::zero)
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, usize, &BigRational)> {
        self.entries.iter().map(|(&(r, c), v)| (r, c, v))
    }

    pub fn nnz(&self) -> usize {
        self.entries.len()
    }

    pub fn mul(&self, other: &RatMat) -> RatMat {
        assert_eq!(self.cols, other.rows);
        let mut out = RatMat::new(self.rows, other.cols);
        let mut other_rows: Vec<Vec<(usize, &BigRational)>> = vec![Vec::new(); other.rows];
        for (r, c, v) in other.iter() {
            other_rows[r].push((c, v));
        }
        let mut acc: BTreeMap<(usize, usize), BigRational> = BTreeMap::new();
        for (r, c, v) in self.iter() {
            for &(oc, ov) in &other_rows[c] {
                let e = acc
                    .entry((r, oc))
                    .or_insert_with(BigRational::zero);
                *e += v * ov;
            }
        }
        for ((r, c), v) in acc {
            out.set(r, c, v);
        }
        out
    }

    pub fn mul_vec(&self, x: &[BigRational]) -> Vec<BigRational> {
        assert_eq!(self.cols, x.len());
        let mut y = vec![BigRational::zero(); self.rows];
        for (r, c, v) in self.iter() {
            y[r] += v * &x[c];
        }
        y
    }

    fn to_rows(&self) -> Vec<BTreeMap<usize, BigRational>> {
        let mut rows = vec![BTreeMap::new(); self.rows];
        for (r, c, v) in self.iter() {
            rows[r].insert(c, v.clone());
        }
        rows
    }
}

// Row echelon data: pivot row contents keyed by pivot column.
struct Echelon {
    // (pivot column, row contents) in elimination order.
    pivots: Vec<(usize, BTreeMap<usize, BigRational>)>,
}

fn eliminate(m: &RatMat) -> Echelon {
    let rows = m.to_rows();
    let mut ech = Echelon { pivots: Vec::new() };
    for row in rows {
        add_reduced(&mut ech, row);
    }
    ech
}

// Reduce a row against the echelon; install it as a new pivot if nonzero.
// Returns the reduced row.
fn reduce_row(
    ech: &Echelon,
    mut row: BTreeMap<usize, BigRational>,
) -> BTreeMap<usize, BigRational> {
    for (pc, prow) in &ech.pivots {
        if let Some(c) = row.get(pc).cloned() {
            // prow is normalised to leading 1.
            for (&k, v) in prow {
                let cur = row.remove(&k).unwrap_or_else(BigRational::zero);
                let nv = cur - &c * v;
                if !nv.is_zero() {
                    row.insert(k, nv);
                }
            }
        }
    }
    row
}

fn add_reduced(ech: &mut Echelon, row: BTreeMap<usize, BigRational>) -> bool {
    let mut row = reduce_row(ech, row);
    if let Some((&lead, _)) = row.iter().next() {
        let lv = row.get(&lead).cloned().unwrap();
        for v in row.values_mut() {
            *v /= &lv;
        }
        ech.pivots.push((lead, row));
        ech.pivots.sort_by_key(|(c, _)| *c);
        true
    } else {
        false
    }
}

/// Rank over the rationals.
pub fn rank_q(m: &RatMat) -> usize {
    eliminate(m).pivots.len()
}

/// Basis of the rational kernel of `m`.
pub fn kernel_basis_q(m: &RatMat) -> Vec<Vec<BigRational>> {
    let ech = eliminate(m);
    let pivot_cols: std::collections::BTreeSet<usize> =
        ech.pivots.iter().map(|(c, _)| *c).collect();
    // Back-substitution needs fully reduced pivot rows.
    let reduced = fully_reduce(&ech);
    let mut basis = Vec::new();
    for free in 0..m.cols {
        if pivot_cols.contains(&free) {
            continue;
        }
        let mut vec = vec![BigRational::zero(); m.cols];
        vec[free] = BigRational::one();
        for (pc, prow) in &reduced {
            if let Some(v) = prow.get(&free) {
                vec[*pc] = -v.clone();
            }
        }
        basis.push(vec);
    }
    basis
}

// Reduced row echelon form: clear pivot columns upwards.
fn fully_reduce(ech: &Echelon) -> Vec<(usize, BTreeMap<usize, BigRational>)> {
    let mut rows: Vec<(usize, BTreeMap<usize, BigRational>)> = ech.pivots.clone();
    for i in (0..rows.len()).rev() {
        let (pc, prow) = rows[i].clone();
        for (_, row) in rows.iter_mut().take(i) {
            if let Some(c) = row.get(&pc).cloned() {
                for (&k, v) in &prow {
                    let cur = row.remove(&k).unwrap_or_else(BigRational::zero);
                    let nv = cur - &c * v;
                    if !nv.is_zero() {
                        row.insert(k, nv);
                    }
                }
            }
        }
    }
    rows
}

/// Outcome of a rational linear solve; inconsistency is a value, not an error.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SolveQ {
    Solution(Vec<BigRational>),
    Inconsistent,
}

/// Solve `m x = b` over the rationals. Any solution is returned when the
/// system is consistent.
pub fn solve_q(m: &RatMat, b: &[BigRational]) -> Result<SolveQ> {
    if b.len() != m.rows {
        return Err(Error::invalid(
            "linalg",
            format!("rhs length {} does not match {} rows", b.len(), m.rows),
        ));
    }
    // Eliminate the augmented matrix [m | b]; inconsistent iff a pivot lands
    // in the rhs column.
    let mut aug = RatMat::new(m.rows, m.cols + 1);
    for (r, c, v) in m.iter() {
        aug.set(r, c, v.clone());
    }
    for (r, v) in b.iter().enumerate() {
        aug.set(r, m.cols, v.clone());
    }
    let ech = eliminate(&aug);
    if ech.pivots.iter().any(|(c, _)| *c == m.cols) {
        return Ok(SolveQ::Inconsistent);
    }
    let reduced = fully_reduce(&ech);
    let mut x = vec![BigRational::zero(); m.cols];
    for (pc, prow) in &reduced {
        if let Some(v) = prow.get(&m.cols) {
            x[*pc] = v.clone();
        }
    }
    Ok(SolveQ::Solution(x))
}

/// Membership of `b` in the column space of `m`, plus incremental span logic
/// used by homology quotients: reduce `b` against an echelon built from the
/// columns of `m`.
pub struct ColumnSpace {
    ech: Echelon,
    dim: usize,
}

impl ColumnSpace {
    pub fn new(ncoords: usize) -> Self {
        let _ = ncoords;
        ColumnSpace {
            ech: Echelon { pivots: Vec::new() },
            dim: 0,
        }
    }

    pub fn from_columns(m: &RatMat) -> Self {
        let mut cs = ColumnSpace::new(m.rows());
        let mut cols: Vec<BTreeMap<usize, BigRational>> = vec![BTreeMap::new(); m.cols()];
        for (r, c, v) in m.iter() {
            cols[c].insert(r, v.clone());
        }
        for col in cols {
            cs.insert(col);
        }
        cs
    }

    /// Add a vector to the span; returns true if it enlarged the span.
    pub fn insert(&mut self, v: BTreeMap<usize, BigRational>) -> bool {
        let added = add_reduced(&mut self.ech, v);
        if added {
            self.dim += 1;
        }
        added
    }

    pub fn contains(&self, v: &BTreeMap<usize, BigRational>) -> bool {
        reduce_row(&self.ech, v.clone()).is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Reduce `v` modulo the span (the residual is a canonical representative
    /// with respect to the insertion order of the span).
    pub fn reduce(&self, v: BTreeMap<usize, BigRational>) -> BTreeMap<usize, BigRational> {
        reduce_row(&self.ech, v)
    }
}

pub fn vec_to_map(v: &[BigRational]) -> BTreeMap<usize, BigRational> {
    v.iter()
        .enumerate()
        .filter(|(_, x)| !x.is_zero())
        .map(|(i, x)| (i, x.clone()))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn int(x: i64) -> BigInt {
        BigInt::from(x)
    }

    fn rat(x: i64) -> BigRational {
        BigRational::from_integer(BigInt::from(x))
    }

    fn mat(rows: usize, cols: usize, data: &[i64]) -> SparseInt {
        assert_eq!(data.len(), rows * cols);
        let mut m = SparseInt::new(rows, cols);
        for r in 0..rows {
            for c in 0..cols {
                m.set(r, c, int(data[r * cols + c]));
            }
        }
        m
    }

    fn check_smith(a: &SparseInt, s: &Smith) {
        // u a v = diag
        let prod = s.u.mul(a).mul(&s.v);
        assert_eq!(prod, s.diag_matrix(a.rows(), a.cols()));
        for w in s.diag.windows(2) {
            assert!(w[1].mod_floor(&w[0]).is_zero(), "divisibility chain broken");
        }
        for d in &s.diag {
            assert!(d.is_positive());
        }
    }

    #[test]
    fn smith_identity() {
        let a = SparseInt::identity(3);
        let s = smith(&a);
        assert_eq!(s.diag, vec![int(1), int(1), int(1)]);
        check_smith(&a, &s);
    }

    #[test]
    fn smith_zero() {
        let a = SparseInt::new(3, 4);
        let s = smith(&a);
        assert!(s.diag.is_empty());
        assert_eq!(s.rank, 0);
        check_smith(&a, &s);
    }

    #[test]
    fn smith_2x2() {
        // d1 = gcd of entries = 2, d1*d2 = |det| = 8
        let a = mat(2, 2, &[2, 4, 6, 8]);
        let s = smith(&a);
        assert_eq!(s.diag, vec![int(2), int(4)]);
        check_smith(&a, &s);
    }

    #[test]
    fn rank_q_identity() {
        assert_eq!(rank_q(&RatMat::identity(4)), 4);
    }

    #[test]
    fn kernel_of_row() {
        let mut m = RatMat::new(1, 2);
        m.set(0, 0, rat(1));
        m.set(0, 1, rat(1));
        let k = kernel_basis_q(&m);
        assert_eq!(k.len(), 1);
        // span{(1,-1)} up to scalar
        assert_eq!(&k[0][0] + &k[0][1], rat(0));
        assert!(!k[0][0].is_zero());
    }

    #[test]
    fn solve_diag() {
        let mut m = RatMat::new(2, 2);
        m.set(0, 0, rat(2));
        m.set(1, 1, rat(3));
        let sol = solve_q(&m, &[rat(4), rat(6)]).unwrap();
        assert_eq!(sol, SolveQ::Solution(vec![rat(2), rat(2)]));
    }

    #[test]
    fn solve_inconsistent() {
        let mut m = RatMat::new(2, 1);
        m.set(0, 0, rat(1));
        m.set(1, 0, rat(1));
        let sol = solve_q(&m, &[rat(1), rat(2)]).unwrap();
        assert_eq!(sol, SolveQ::Inconsistent);
    }

    #[test]
    fn solve_z_divisibility() {
        let mut a = SparseInt::new(1, 1);
        a.set(0, 0, int(2));
        assert_eq!(solve_z(&a, &[int(4)]).unwrap(), Some(vec![int(2)]));
        assert_eq!(solve_z(&a, &[int(3)]).unwrap(), None);
    }

    #[test]
    fn dimension_mismatch_is_error() {
        let m = RatMat::new(2, 2);
        assert!(solve_q(&m, &[rat(0)]).is_err());
    }
}
