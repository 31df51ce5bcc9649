use super::matrix::{to_dense, Echelon, Matrix, Vector};
use super::scalar::{Field, Scalar};
use super::AlgError;

/// A subspace of k^ambient kept as a fully reduced echelon basis.
#[derive(Clone, Debug)]
pub struct Subspace {
    ech: Echelon,
    ambient: usize,
}

impl PartialEq for Subspace {
    fn eq(&self, other: &Self) -> bool {
        self.ambient == other.ambient && self.dim() == other.dim() && self.contains_space(other).unwrap_or(false)
    }
}

impl Subspace {
    pub fn zero(field: Field, ambient: usize) -> Subspace {
        Subspace::span(field, ambient, &[])
    }

    pub fn full(field: Field, ambient: usize) -> Subspace {
        let basis: Vec<Vector> = (0..ambient).map(|i| unit(field, ambient, i)).collect();
        Subspace::span(field, ambient, &basis)
    }

    pub fn span(field: Field, ambient: usize, vectors: &[Vector]) -> Subspace {
        let ech = Matrix::from_rows(field, ambient, vectors).echelon();
        Subspace { ech, ambient }
    }

    pub fn field(&self) -> Field {
        self.ech.field
    }

    pub fn ambient(&self) -> usize {
        self.ambient
    }

    pub fn dim(&self) -> usize {
        self.ech.rank()
    }

    pub fn basis(&self) -> Vec<Vector> {
        self.ech
            .pivots
            .iter()
            .map(|(_, r)| to_dense(self.field(), self.ambient, r))
            .collect()
    }

    fn check(&self, other: &Subspace) -> Result<(), AlgError> {
        if self.ambient != other.ambient {
            return Err(AlgError::Ambient(self.ambient, other.ambient));
        }
        Ok(())
    }

    pub fn contains(&self, v: &[Scalar]) -> bool {
        assert_eq!(v.len(), self.ambient);
        self.ech.reduce(v).iter().all(Scalar::is_zero)
    }

    /// Whether `other ⊆ self`.
    pub fn contains_space(&self, other: &Subspace) -> Result<bool, AlgError> {
        self.check(other)?;
        Ok(other.basis().iter().all(|v| self.contains(v)))
    }

    pub fn sum(&self, other: &Subspace) -> Result<Subspace, AlgError> {
        self.check(other)?;
        let mut vs = self.basis();
        vs.extend(other.basis());
        Ok(Subspace::span(self.field(), self.ambient, &vs))
    }

    pub fn intersection(&self, other: &Subspace) -> Result<Subspace, AlgError> {
        self.check(other)?;
        let a = self.basis();
        let b = other.basis();
        if a.is_empty() || b.is_empty() {
            return Ok(Subspace::zero(self.field(), self.ambient));
        }
        // columns a_i and -b_j; kernel vectors give common elements
        let mut cols = a.clone();
        cols.extend(b.iter().map(|v| v.iter().map(|x| -x).collect::<Vector>()));
        let m = Matrix::from_columns(self.field(), self.ambient, &cols);
        let common: Vec<Vector> = m
            .kernel_basis()
            .into_iter()
            .map(|k| combine(self.field(), self.ambient, &a, &k[..a.len()]))
            .collect();
        Ok(Subspace::span(self.field(), self.ambient, &common))
    }

    /// Image under a linear map given as a matrix acting on columns.
    pub fn image_under(&self, m: &Matrix) -> Subspace {
        assert_eq!(m.cols(), self.ambient);
        let imgs: Vec<Vector> = self.basis().iter().map(|v| m.apply(v)).collect();
        Subspace::span(self.field(), m.rows(), &imgs)
    }

    /// Preimage of `target` under `m`, intersected with self.
    pub fn preimage_within(&self, m: &Matrix, target: &Subspace) -> Subspace {
        let basis = self.basis();
        if basis.is_empty() {
            return self.clone();
        }
        // x = Σ c_i b_i with m x ∈ target: kernel of (quotient ∘ m ∘ B)
        let q = QuotientMap::new(target);
        let cols: Vec<Vector> = basis.iter().map(|b| q.apply(&m.apply(b))).collect();
        let comp = Matrix::from_columns(self.field(), q.dim(), &cols);
        let ker: Vec<Vector> = comp
            .kernel_basis()
            .into_iter()
            .map(|c| combine(self.field(), self.ambient, &basis, &c))
            .collect();
        Subspace::span(self.field(), self.ambient, &ker)
    }

    /// Vectors of self that extend a basis of `sub` to a basis of self.
    pub fn complement_of(&self, sub: &Subspace) -> Result<Vec<Vector>, AlgError> {
        self.check(sub)?;
        let q = QuotientMap::new(sub);
        let mut picked: Vec<Vector> = Vec::new();
        let mut images: Vec<Vector> = Vec::new();
        let mut rank = 0;
        for v in self.basis() {
            let img = q.apply(&v);
            images.push(img);
            let r = Matrix::from_rows(self.field(), q.dim(), &images).rank();
            if r > rank {
                rank = r;
                picked.push(v);
            } else {
                images.pop();
            }
        }
        Ok(picked)
    }

    /// Coordinates of v ∈ span(reps) + sub with respect to `reps`, modulo `sub`.
    pub fn coordinates_mod(reps: &[Vector], sub: &Subspace, v: &[Scalar]) -> Option<Vector> {
        let field = sub.field();
        let q = QuotientMap::new(sub);
        let cols: Vec<Vector> = reps.iter().map(|r| q.apply(r)).collect();
        let m = Matrix::from_columns(field, q.dim(), &cols);
        m.solve(&q.apply(v))
    }
}

/// Canonical projection k^n → k^n / S using the non-pivot coordinates of S.
#[derive(Clone, Debug)]
pub struct QuotientMap {
    sub: Subspace,
    free: Vec<usize>,
}

impl QuotientMap {
    pub fn new(sub: &Subspace) -> QuotientMap {
        let pivots = sub.ech.pivot_columns();
        let free = (0..sub.ambient).filter(|c| pivots.binary_search(c).is_err()).collect();
        QuotientMap { sub: sub.clone(), free }
    }

    pub fn dim(&self) -> usize {
        self.free.len()
    }

    pub fn apply(&self, v: &[Scalar]) -> Vector {
        let r = self.sub.ech.reduce(v);
        self.free.iter().map(|&c| r[c].clone()).collect()
    }

    /// Matrix of the induced map V/S → W/T for a map m: V → W with m(S) ⊆ T.
    pub fn induced(m: &Matrix, src: &QuotientMap, dst: &QuotientMap) -> Result<Matrix, AlgError> {
        let field = m.field();
        if src.sub.image_under(m).dim() > 0 && !dst.sub.contains_space(&src.sub.image_under(m))? {
            return Err(AlgError::NotInduced);
        }
        let cols: Vec<Vector> = src
            .free
            .iter()
            .map(|&c| dst.apply(&m.apply(&unit(field, src.sub.ambient, c))))
            .collect();
        Ok(Matrix::from_columns(field, dst.dim(), &cols))
    }
}

pub fn unit(field: Field, n: usize, i: usize) -> Vector {
    let mut v = vec![field.zero(); n];
    v[i] = field.one();
    v
}

pub fn combine(field: Field, n: usize, vectors: &[Vector], coeffs: &[Scalar]) -> Vector {
    let mut out = vec![field.zero(); n];
    for (v, c) in vectors.iter().zip(coeffs) {
        if c.is_zero() {
            continue;
        }
        for (o, x) in out.iter_mut().zip(v) {
            if !x.is_zero() {
                *o = &*o + &(c * x);
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q() -> Field {
        Field::Rational
    }

    fn v(xs: &[i64]) -> Vector {
        xs.iter().map(|&x| q().int(x)).collect()
    }

    #[test]
    fn coordinate_lines() {
        let a = Subspace::span(q(), 2, &[v(&[1, 0])]);
        let b = Subspace::span(q(), 2, &[v(&[0, 1])]);
        assert_eq!(a.sum(&b).unwrap().dim(), 2);
        assert_eq!(a.intersection(&b).unwrap().dim(), 0);
        assert_eq!(a.intersection(&a).unwrap(), a);
        assert!(!a.contains(&v(&[1, 1])));
    }

    #[test]
    fn ambient_mismatch() {
        let a = Subspace::full(q(), 2);
        let b = Subspace::full(q(), 3);
        assert!(matches!(a.sum(&b), Err(AlgError::Ambient(2, 3))));
        assert!(a.intersection(&b).is_err());
    }

    #[test]
    fn quotient_and_complement() {
        let s = Subspace::span(q(), 3, &[v(&[1, 1, 0])]);
        let qm = QuotientMap::new(&s);
        assert_eq!(qm.dim(), 2);
        assert!(qm.apply(&v(&[2, 2, 0])).iter().all(Scalar::is_zero));
        let full = Subspace::full(q(), 3);
        let comp = full.complement_of(&s).unwrap();
        assert_eq!(comp.len(), 2);
        let coords = Subspace::coordinates_mod(&comp, &s, &comp[1]).unwrap();
        assert_eq!(coords, vec![q().zero(), q().one()]);
    }

    #[test]
    fn induced_map_on_quotient() {
        // m = projection onto first coordinate in k^2, S = T = span(e2)
        let m = Matrix::from_i64(q(), &[&[1, 0], &[0, 0]]);
        let s = Subspace::span(q(), 2, &[v(&[0, 1])]);
        let qs = QuotientMap::new(&s);
        let ind = QuotientMap::induced(&m, &qs, &qs).unwrap();
        assert_eq!(ind.rank(), 1);
        let bad = Subspace::span(q(), 2, &[v(&[1, 0])]);
        let m2 = Matrix::identity(q(), 2);
        assert!(QuotientMap::induced(&m2, &QuotientMap::new(&bad), &qs).is_err());
    }

    #[test]
    fn preimage() {
        let m = Matrix::from_i64(q(), &[&[1, 0, 0], &[0, 1, 0]]);
        let t = Subspace::span(q(), 2, &[v(&[1, 0])]);
        let pre = Subspace::full(q(), 3).preimage_within(&m, &t);
        assert_eq!(pre.dim(), 2);
        assert!(pre.contains(&v(&[5, 0, 7])));
    }
}
