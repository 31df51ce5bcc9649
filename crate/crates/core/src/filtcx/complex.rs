use crate::exactalg::{Field, Matrix, Subspace, Vector};

use super::FiltError;

/// Bounded cochain complex of finite-dimensional spaces with d∘d = 0.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CochainComplex {
    field: Field,
    start: i32,
    dims: Vec<usize>,
    // diffs[i]: degree start+i -> start+i+1
    diffs: Vec<Matrix>,
}

impl CochainComplex {
    /// `diffs` has one matrix per consecutive pair of degrees.
    pub fn new(field: Field, start: i32, dims: Vec<usize>, diffs: Vec<Matrix>) -> Result<CochainComplex, FiltError> {
        if diffs.len() != dims.len().saturating_sub(1) {
            return Err(FiltError::DifferentialCount {
                degrees: dims.len(),
                maps: diffs.len(),
            });
        }
        for (i, d) in diffs.iter().enumerate() {
            if d.rows() != dims[i + 1] || d.cols() != dims[i] || d.field() != field {
                return Err(FiltError::DifferentialShape {
                    degree: start + i as i32,
                    shape: (d.rows(), d.cols()),
                });
            }
        }
        for (i, w) in diffs.windows(2).enumerate() {
            let dd = w[1].mul(&w[0]).expect("shapes checked");
            if !dd.is_zero() {
                return Err(FiltError::NotAComplex(start + i as i32));
            }
        }
        Ok(CochainComplex {
            field,
            start,
            dims,
            diffs,
        })
    }

    /// Single space in degree `start` with no differential.
    pub fn concentrated(field: Field, start: i32, dim: usize) -> CochainComplex {
        CochainComplex::new(field, start, vec![dim], vec![]).unwrap()
    }

    pub fn field(&self) -> Field {
        self.field
    }

    pub fn start(&self) -> i32 {
        self.start
    }

    pub fn end(&self) -> i32 {
        self.start + self.dims.len() as i32 - 1
    }

    pub fn degrees(&self) -> std::ops::RangeInclusive<i32> {
        self.start..=self.end()
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn dim(&self, k: i32) -> usize {
        self.index(k).map_or(0, |i| self.dims[i])
    }

    fn index(&self, k: i32) -> Option<usize> {
        let i = k - self.start;
        (i >= 0 && (i as usize) < self.dims.len()).then_some(i as usize)
    }

    /// The differential leaving degree k, if both ends are in range.
    pub fn d(&self, k: i32) -> Option<&Matrix> {
        self.index(k).and_then(|i| self.diffs.get(i))
    }

    /// Differential leaving degree k as a matrix, zero at the ends.
    pub fn d_or_zero(&self, k: i32) -> Matrix {
        self.d(k)
            .cloned()
            .unwrap_or_else(|| Matrix::zeros(self.field, self.dim(k + 1), self.dim(k)))
    }

    pub fn differentials(&self) -> &[Matrix] {
        &self.diffs
    }

    pub fn total_dim(&self) -> usize {
        self.dims.iter().sum()
    }

    pub fn cycles(&self, k: i32) -> Subspace {
        let n = self.dim(k);
        match self.d(k) {
            Some(d) => Subspace::span(self.field, n, &d.kernel_basis()),
            None => Subspace::full(self.field, n),
        }
    }

    pub fn boundaries(&self, k: i32) -> Subspace {
        let n = self.dim(k);
        match self.d(k - 1) {
            Some(d) => Subspace::span(self.field, n, &d.image_basis()),
            None => Subspace::zero(self.field, n),
        }
    }

    pub fn cohomology_dim(&self, k: i32) -> usize {
        let z = self.d(k).map_or(self.dim(k), |d| self.dim(k) - d.rank());
        let b = self.d(k - 1).map_or(0, Matrix::rank);
        z - b
    }

    pub fn cohomology_dims(&self) -> Vec<usize> {
        self.degrees().map(|k| self.cohomology_dim(k)).collect()
    }

    pub fn total_cohomology(&self) -> usize {
        self.cohomology_dims().iter().sum()
    }

    pub fn euler_characteristic(&self) -> i64 {
        self.degrees()
            .map(|k| if k.rem_euclid(2) == 0 { 1 } else { -1 } * self.dim(k) as i64)
            .sum()
    }

    pub fn is_acyclic(&self) -> bool {
        self.degrees().all(|k| self.cohomology_dim(k) == 0)
    }

    /// Re-index so the complex spans `[a, b]`, padding with zero spaces.
    pub fn padded(&self, a: i32, b: i32) -> CochainComplex {
        assert!(a <= self.start && b >= self.end());
        let dims: Vec<usize> = (a..=b).map(|k| self.dim(k)).collect();
        let diffs = (a..b).map(|k| self.d_or_zero(k)).collect();
        CochainComplex::new(self.field, a, dims, diffs).unwrap()
    }

    pub fn direct_sum(&self, other: &CochainComplex) -> CochainComplex {
        let a = self.start.min(other.start);
        let b = self.end().max(other.end());
        let (x, y) = (self.padded(a, b), other.padded(a, b));
        let dims = (a..=b).map(|k| x.dim(k) + y.dim(k)).collect();
        let diffs = (a..b).map(|k| block_diag(&x.d_or_zero(k), &y.d_or_zero(k))).collect();
        CochainComplex::new(self.field, a, dims, diffs).unwrap()
    }

    /// Image of a vector of degree k under d (zero at the top).
    pub fn apply_d(&self, k: i32, v: &[crate::exactalg::Scalar]) -> Vector {
        match self.d(k) {
            Some(d) => d.apply(v),
            None => vec![self.field.zero(); self.dim(k + 1)],
        }
    }
}

pub(crate) fn block_diag(a: &Matrix, b: &Matrix) -> Matrix {
    let field = a.field();
    let mut t = Vec::new();
    for r in 0..a.rows() {
        for (c, v) in a.sparse_row(r) {
            t.push((r, c, v));
        }
    }
    for r in 0..b.rows() {
        for (c, v) in b.sparse_row(r) {
            t.push((a.rows() + r, a.cols() + c, v));
        }
    }
    Matrix::from_triplets(field, a.rows() + b.rows(), a.cols() + b.cols(), t)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q() -> Field {
        Field::Rational
    }

    #[test]
    fn identity_map_is_acyclic() {
        let c = CochainComplex::new(q(), 0, vec![1, 1], vec![Matrix::identity(q(), 1)]).unwrap();
        assert_eq!(c.cohomology_dims(), vec![0, 0]);
    }

    #[test]
    fn single_space() {
        let c = CochainComplex::concentrated(q(), 0, 1);
        assert_eq!(c.cohomology_dim(0), 1);
    }

    #[test]
    fn multiplication_by_two() {
        let c = CochainComplex::new(q(), 0, vec![1, 1], vec![Matrix::from_i64(q(), &[&[2]])]).unwrap();
        assert!(c.is_acyclic());
    }

    #[test]
    fn rejects_non_complex() {
        let d = Matrix::identity(q(), 1);
        let err = CochainComplex::new(q(), 0, vec![1, 1, 1], vec![d.clone(), d]).unwrap_err();
        assert_eq!(err, FiltError::NotAComplex(0));
        let bad = CochainComplex::new(q(), 0, vec![2, 1], vec![Matrix::identity(q(), 1)]);
        assert!(matches!(bad, Err(FiltError::DifferentialShape { .. })));
    }

    #[test]
    fn direct_sum_adds_cohomology() {
        let a = CochainComplex::concentrated(q(), 0, 2);
        let b = CochainComplex::new(q(), 1, vec![1, 1], vec![Matrix::zeros(q(), 1, 1)]).unwrap();
        let s = a.direct_sum(&b);
        assert_eq!(s.degrees(), 0..=2);
        assert_eq!(s.cohomology_dims(), vec![2, 1, 1]);
    }
}
