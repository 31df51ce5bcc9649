use super::scalar::{Field, Scalar};
use super::AlgError;

pub type Vector = Vec<Scalar>;

/// Sorted `(column, value)` pairs with no explicit zeros.
pub type SparseRow = Vec<(usize, Scalar)>;

/// Matrices with both dimensions below this use dense elimination.
pub const DENSE_CUTOFF: usize = 64;

#[derive(Clone, Debug, PartialEq, Eq)]
enum Store {
    Dense(Vec<Scalar>),
    Sparse(Vec<SparseRow>),
}

/// Immutable matrix over an exact field.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Matrix {
    field: Field,
    rows: usize,
    cols: usize,
    store: Store,
}

fn use_dense(rows: usize, cols: usize) -> bool {
    rows < DENSE_CUTOFF && cols < DENSE_CUTOFF
}

impl Matrix {
    pub fn zeros(field: Field, rows: usize, cols: usize) -> Matrix {
        Matrix::from_sparse_rows(field, cols, vec![Vec::new(); rows])
    }

    pub fn identity(field: Field, n: usize) -> Matrix {
        Matrix::from_triplets(field, n, n, (0..n).map(|i| (i, i, field.one())))
    }

    /// Entries are summed when a position repeats.
    pub fn from_triplets<I>(field: Field, rows: usize, cols: usize, triplets: I) -> Matrix
    where
        I: IntoIterator<Item = (usize, usize, Scalar)>,
    {
        let mut acc: Vec<std::collections::BTreeMap<usize, Scalar>> = vec![Default::default(); rows];
        for (r, c, v) in triplets {
            assert!(r < rows && c < cols, "entry ({r},{c}) outside {rows}x{cols}");
            let slot = acc[r].entry(c).or_insert_with(|| field.zero());
            *slot = &*slot + &v;
        }
        let sparse = acc
            .into_iter()
            .map(|m| m.into_iter().filter(|(_, v)| !v.is_zero()).collect())
            .collect();
        Matrix::from_sparse_rows(field, cols, sparse)
    }

    pub fn from_sparse_rows(field: Field, cols: usize, rows: Vec<SparseRow>) -> Matrix {
        let n = rows.len();
        let store = if use_dense(n, cols) {
            let mut data = vec![field.zero(); n * cols];
            for (r, row) in rows.into_iter().enumerate() {
                for (c, v) in row {
                    data[r * cols + c] = v;
                }
            }
            Store::Dense(data)
        } else {
            Store::Sparse(rows)
        };
        Matrix {
            field,
            rows: n,
            cols,
            store,
        }
    }

    pub fn from_rows(field: Field, cols: usize, rows: &[Vector]) -> Matrix {
        let sparse = rows
            .iter()
            .map(|r| {
                assert_eq!(r.len(), cols);
                to_sparse(r)
            })
            .collect();
        Matrix::from_sparse_rows(field, cols, sparse)
    }

    /// Matrix whose columns are the given vectors.
    pub fn from_columns(field: Field, rows: usize, columns: &[Vector]) -> Matrix {
        Matrix::from_triplets(
            field,
            rows,
            columns.len(),
            columns.iter().enumerate().flat_map(|(c, col)| {
                assert_eq!(col.len(), rows);
                col.iter()
                    .enumerate()
                    .filter(|(_, v)| !v.is_zero())
                    .map(move |(r, v)| (r, c, v.clone()))
            }),
        )
    }

    pub fn from_i64(field: Field, entries: &[&[i64]]) -> Matrix {
        let cols = entries.first().map_or(0, |r| r.len());
        let rows: Vec<Vector> = entries
            .iter()
            .map(|r| r.iter().map(|&v| field.int(v)).collect())
            .collect();
        Matrix::from_rows(field, cols, &rows)
    }

    pub fn field(&self) -> Field {
        self.field
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_dense(&self) -> bool {
        matches!(self.store, Store::Dense(_))
    }

    pub fn get(&self, r: usize, c: usize) -> Scalar {
        match &self.store {
            Store::Dense(d) => d[r * self.cols + c].clone(),
            Store::Sparse(rows) => rows[r]
                .binary_search_by_key(&c, |(k, _)| *k)
                .map(|i| rows[r][i].1.clone())
                .unwrap_or_else(|_| self.field.zero()),
        }
    }

    pub fn sparse_row(&self, r: usize) -> SparseRow {
        match &self.store {
            Store::Dense(d) => to_sparse(&d[r * self.cols..(r + 1) * self.cols]),
            Store::Sparse(rows) => rows[r].clone(),
        }
    }

    pub fn sparse_rows(&self) -> Vec<SparseRow> {
        (0..self.rows).map(|r| self.sparse_row(r)).collect()
    }

    pub fn row(&self, r: usize) -> Vector {
        to_dense(self.field, self.cols, &self.sparse_row(r))
    }

    pub fn column(&self, c: usize) -> Vector {
        (0..self.rows).map(|r| self.get(r, c)).collect()
    }

    pub fn nnz(&self) -> usize {
        (0..self.rows).map(|r| self.sparse_row(r).len()).sum()
    }

    pub fn is_zero(&self) -> bool {
        self.nnz() == 0
    }

    pub fn transpose(&self) -> Matrix {
        Matrix::from_triplets(
            self.field,
            self.cols,
            self.rows,
            (0..self.rows).flat_map(|r| self.sparse_row(r).into_iter().map(move |(c, v)| (c, r, v))),
        )
    }

    pub fn apply(&self, v: &[Scalar]) -> Vector {
        assert_eq!(v.len(), self.cols);
        (0..self.rows)
            .map(|r| {
                self.sparse_row(r)
                    .iter()
                    .fold(self.field.zero(), |acc, (c, a)| &acc + &(a * &v[*c]))
            })
            .collect()
    }

    pub fn mul(&self, other: &Matrix) -> Result<Matrix, AlgError> {
        if self.cols != other.rows {
            return Err(AlgError::Shape {
                left: (self.rows, self.cols),
                right: (other.rows, other.cols),
            });
        }
        let other_rows = other.sparse_rows();
        let mut triplets = Vec::new();
        for r in 0..self.rows {
            for (k, a) in self.sparse_row(r) {
                for (c, b) in &other_rows[k] {
                    triplets.push((r, *c, &a * b));
                }
            }
        }
        Ok(Matrix::from_triplets(self.field, self.rows, other.cols, triplets))
    }

    pub fn echelon(&self) -> Echelon {
        if self.is_dense() {
            dense_gauss_jordan(self)
        } else {
            markowitz_gauss_jordan(self.field, self.cols, self.sparse_rows(), self.cols)
        }
    }

    pub fn rank(&self) -> usize {
        self.echelon().rank()
    }

    pub fn kernel_basis(&self) -> Vec<Vector> {
        self.echelon().kernel_basis()
    }

    /// A basis of the column space, drawn from the columns themselves.
    pub fn image_basis(&self) -> Vec<Vector> {
        let ech = self.echelon();
        let mut cols: Vec<usize> = ech.pivots.iter().map(|(c, _)| *c).collect();
        cols.sort_unstable();
        cols.into_iter().map(|c| self.column(c)).collect()
    }

    /// Some x with self·x = b, if one exists.
    pub fn solve(&self, b: &[Scalar]) -> Option<Vector> {
        assert_eq!(b.len(), self.rows);
        let mut rows = self.sparse_rows();
        for (r, row) in rows.iter_mut().enumerate() {
            if !b[r].is_zero() {
                row.push((self.cols, b[r].clone()));
            }
        }
        let ech = markowitz_or_dense(self.field, self.cols + 1, rows);
        let mut x = vec![self.field.zero(); self.cols];
        for (pc, row) in &ech.pivots {
            if *pc == self.cols {
                return None;
            }
            if let Some((_, v)) = row.iter().find(|(c, _)| *c == self.cols) {
                x[*pc] = v.clone();
            }
        }
        Some(x)
    }
}

fn markowitz_or_dense(field: Field, cols: usize, rows: Vec<SparseRow>) -> Echelon {
    if use_dense(rows.len(), cols) {
        dense_gauss_jordan(&Matrix::from_sparse_rows(field, cols, rows))
    } else {
        markowitz_gauss_jordan(field, cols, rows, cols - 1)
    }
}

pub fn to_sparse(v: &[Scalar]) -> SparseRow {
    v.iter()
        .enumerate()
        .filter(|(_, x)| !x.is_zero())
        .map(|(i, x)| (i, x.clone()))
        .collect()
}

pub fn to_dense(field: Field, len: usize, row: &[(usize, Scalar)]) -> Vector {
    let mut out = vec![field.zero(); len];
    for (c, v) in row {
        out[*c] = v.clone();
    }
    out
}

/// target += coef * src, both sorted.
fn axpy(target: &SparseRow, coef: &Scalar, src: &SparseRow) -> SparseRow {
    let mut out = Vec::with_capacity(target.len() + src.len());
    let (mut i, mut j) = (0, 0);
    while i < target.len() || j < src.len() {
        let ti = target.get(i).map(|e| e.0);
        let sj = src.get(j).map(|e| e.0);
        match (ti, sj) {
            (Some(a), Some(b)) if a == b => {
                let v = &target[i].1 + &(coef * &src[j].1);
                if !v.is_zero() {
                    out.push((a, v));
                }
                i += 1;
                j += 1;
            }
            (Some(a), Some(b)) if a < b => {
                out.push(target[i].clone());
                i += 1;
            }
            (Some(_), None) => {
                out.push(target[i].clone());
                i += 1;
            }
            (_, Some(b)) => {
                out.push((b, coef * &src[j].1));
                j += 1;
            }
            (None, None) => unreachable!(),
        }
    }
    out
}

fn entry(row: &SparseRow, c: usize) -> Option<&Scalar> {
    row.binary_search_by_key(&c, |(k, _)| *k).ok().map(|i| &row[i].1)
}

fn scale(row: &SparseRow, s: &Scalar) -> SparseRow {
    row.iter().map(|(c, v)| (*c, v * s)).collect()
}

/// Fully reduced row echelon form: every pivot row has a 1 in its pivot
/// column and every other pivot row has a 0 there.
#[derive(Clone, Debug)]
pub struct Echelon {
    pub field: Field,
    pub cols: usize,
    pub pivots: Vec<(usize, SparseRow)>,
}

impl Echelon {
    pub fn rank(&self) -> usize {
        self.pivots.len()
    }

    pub fn pivot_columns(&self) -> Vec<usize> {
        let mut p: Vec<usize> = self.pivots.iter().map(|(c, _)| *c).collect();
        p.sort_unstable();
        p
    }

    pub fn kernel_basis(&self) -> Vec<Vector> {
        let mut is_pivot = vec![false; self.cols];
        for (c, _) in &self.pivots {
            is_pivot[*c] = true;
        }
        (0..self.cols)
            .filter(|c| !is_pivot[*c])
            .map(|free| {
                let mut v = vec![self.field.zero(); self.cols];
                v[free] = self.field.one();
                for (pc, row) in &self.pivots {
                    if let Some(a) = entry(row, free) {
                        v[*pc] = -a;
                    }
                }
                v
            })
            .collect()
    }

    /// Reduces `v` modulo the row space; the result vanishes on pivot columns.
    pub fn reduce(&self, v: &[Scalar]) -> Vector {
        let mut row = to_sparse(v);
        for (pc, prow) in &self.pivots {
            if let Some(a) = entry(&row, *pc).cloned() {
                row = axpy(&row, &(-&a), prow);
            }
        }
        to_dense(self.field, self.cols, &row)
    }
}

fn dense_gauss_jordan(m: &Matrix) -> Echelon {
    let field = m.field;
    let (rows, cols) = (m.rows, m.cols);
    let mut a: Vec<Vector> = (0..rows).map(|r| m.row(r)).collect();
    let mut pivots = Vec::new();
    let mut next = 0;
    for c in 0..cols {
        let Some(p) = (next..rows).find(|&r| !a[r][c].is_zero()) else {
            continue;
        };
        a.swap(next, p);
        let inv = a[next][c].inv().expect("nonzero pivot");
        for x in a[next].iter_mut() {
            *x = &*x * &inv;
        }
        let prow = a[next].clone();
        for (r, row) in a.iter_mut().enumerate() {
            if r == next || row[c].is_zero() {
                continue;
            }
            let f = row[c].clone();
            for (x, y) in row.iter_mut().zip(prow.iter()).skip(c) {
                if !y.is_zero() {
                    *x = &*x - &(&f * y);
                }
            }
        }
        pivots.push(c);
        next += 1;
        if next == rows {
            break;
        }
    }
    Echelon {
        field,
        cols,
        pivots: pivots
            .into_iter()
            .enumerate()
            .map(|(i, c)| (c, to_sparse(&a[i])))
            .collect(),
    }
}

/// Gauss-Jordan on sparse rows choosing the pivot that minimises the
/// Markowitz count (r-1)(c-1); ties go to the smallest (row, column).
/// Columns at or past `limit` only pivot in rows with nothing before them.
fn markowitz_gauss_jordan(field: Field, cols: usize, rows: Vec<SparseRow>, limit: usize) -> Echelon {
    let mut active: Vec<SparseRow> = rows.into_iter().filter(|r| !r.is_empty()).collect();
    let mut done: Vec<(usize, SparseRow)> = Vec::new();
    let mut col_count = vec![0usize; cols];
    while !active.is_empty() {
        col_count.iter_mut().for_each(|x| *x = 0);
        for row in &active {
            for (c, _) in row {
                col_count[*c] += 1;
            }
        }
        let mut best: Option<(usize, usize, usize)> = None;
        for (ri, row) in active.iter().enumerate() {
            let rcost = row.len() - 1;
            if matches!(best, Some((0, _, _))) {
                break;
            }
            let lead = row[0].0;
            for (c, _) in row {
                if *c >= limit && lead < limit {
                    break;
                }
                let cost = rcost * (col_count[*c] - 1);
                if best.is_none_or(|(b, _, _)| cost < b) {
                    best = Some((cost, ri, *c));
                }
            }
        }
        let (_, ri, pc) = best.expect("active rows are nonempty");
        let prow = active.swap_remove(ri);
        let inv = entry(&prow, pc).expect("pivot entry").inv().expect("nonzero");
        let prow = scale(&prow, &inv);
        for row in active.iter_mut() {
            if let Some(a) = entry(row, pc).cloned() {
                *row = axpy(row, &(-&a), &prow);
            }
        }
        active.retain(|r| !r.is_empty());
        for (_, row) in done.iter_mut() {
            if let Some(a) = entry(row, pc).cloned() {
                *row = axpy(row, &(-&a), &prow);
            }
        }
        done.push((pc, prow));
    }
    Echelon {
        field,
        cols,
        pivots: done,
    }
}
