use num_rational::BigRational;

use crate::exactalg::{Matrix, Subspace, Vector};

use super::filtered::FilteredCochainComplex;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PageEntry {
    /// Filtration position (index into the step list).
    pub p: i32,
    pub q: i32,
    pub lambda: BigRational,
    pub dim: usize,
}

/// d_1 : E_1^{p,q} → E_1^{p+1,q} in the bases returned by `e1_representatives`.
#[derive(Clone, Debug)]
pub struct D1Block {
    pub p: i32,
    pub degree: i32,
    pub matrix: Matrix,
}

#[derive(Clone, Debug)]
pub struct SpectralPage {
    pub r: usize,
    pub entries: Vec<PageEntry>,
    pub d1: Option<Vec<D1Block>>,
}

impl SpectralPage {
    pub fn total(&self) -> usize {
        self.entries.iter().map(|e| e.dim).sum()
    }

    pub fn dim(&self, p: i32, q: i32) -> usize {
        self.entries.iter().find(|e| e.p == p && e.q == q).map_or(0, |e| e.dim)
    }

    /// Σ_{p+q=k} dim E^{p,q}.
    pub fn diagonal(&self, k: i32) -> usize {
        self.entries.iter().filter(|e| e.p + e.q == k).map(|e| e.dim).sum()
    }
}

impl FilteredCochainComplex {
    /// F^{λ_i} with i clamped: negative means the base.
    fn step_signed(&self, i: i64, k: i32) -> Subspace {
        self.step(i.max(0) as usize, k)
    }

    /// Z_r^{p,k} = {x ∈ F^p C^k : dx ∈ F^{p+r} C^{k+1}}.
    fn z(&self, r: i64, p: i64, k: i32) -> Subspace {
        let d = self.base().d_or_zero(k);
        self.step_signed(p, k)
            .preimage_within(&d, &self.step_signed(p + r, k + 1))
    }

    /// Z_{r-1}^{p+1,k} + d Z_{r-1}^{p-r+1,k-1}.
    fn z_denominator(&self, r: i64, p: i64, k: i32) -> Subspace {
        let upper = self.z(r - 1, p + 1, k);
        let d = self.base().d_or_zero(k - 1);
        let bound = self.z(r - 1, p - r + 1, k - 1).image_under(&d);
        upper.sum(&bound).unwrap()
    }

    fn page_dim(&self, r: i64, p: i64, k: i32) -> usize {
        let z = self.z(r, p, k);
        let n = self.z_denominator(r, p, k);
        debug_assert!(z.contains_space(&n).unwrap());
        z.dim() - n.dim()
    }

    /// E_r by the subquotient formula Z_r / (Z_{r-1}^{p+1} + d Z_{r-1}^{p-r+1}).
    pub fn spectral_page(&self, r: usize) -> SpectralPage {
        let mut entries = Vec::new();
        for p in 0..self.levels() as i64 {
            for k in self.base().degrees() {
                let dim = self.page_dim(r as i64, p, k);
                entries.push(PageEntry {
                    p: p as i32,
                    q: k - p as i32,
                    lambda: self.lambdas()[p as usize].clone(),
                    dim,
                });
            }
        }
        let d1 = (r == 1).then(|| self.d1_blocks());
        SpectralPage { r, entries, d1 }
    }

    /// A page index past which the sequence is stationary.
    pub fn stable_page(&self) -> usize {
        self.levels() + 1
    }

    pub fn e_infinity(&self) -> SpectralPage {
        self.spectral_page(self.stable_page())
    }

    /// Representatives in F^p C^k of a basis of E_1^{p,k-p}, with the
    /// subspace they are taken modulo.
    pub fn e1_representatives(&self, p: usize, k: i32) -> (Vec<Vector>, Subspace) {
        let z = self.z(1, p as i64, k);
        let n = self.z_denominator(1, p as i64, k);
        (z.complement_of(&n).unwrap(), n)
    }

    fn d1_blocks(&self) -> Vec<D1Block> {
        let field = self.field();
        let mut out = Vec::new();
        for p in 0..self.levels() {
            for k in self.base().degrees() {
                let (src, _) = self.e1_representatives(p, k);
                let (dst, dst_mod) = self.e1_representatives(p + 1, k + 1);
                let cols: Vec<Vector> = src
                    .iter()
                    .map(|x| {
                        let dx = self.base().apply_d(k, x);
                        Subspace::coordinates_mod(&dst, &dst_mod, &dx).expect("d_1 lands in E_1")
                    })
                    .collect();
                out.push(D1Block {
                    p: p as i32,
                    degree: k,
                    matrix: Matrix::from_columns(field, dst.len(), &cols),
                });
            }
        }
        out
    }
}
