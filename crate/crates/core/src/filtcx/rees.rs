use crate::exactalg::{smith_normal_form, Matrix, Poly, PolyMatrix, Subspace, Vector};

use super::filtered::FilteredCochainComplex;

/// Free k[ħ]-complex ⊕_i F^{λ_i} ħ^{-i}, written in a basis adapted to the
/// filtration: a basis vector of level L stands for the generator b·ħ^{-L}.
#[derive(Clone, Debug)]
pub struct ReesComplex {
    pub start: i32,
    /// Level of every adapted basis vector, per degree.
    pub levels: Vec<Vec<usize>>,
    /// Adapted bases (columns in base coordinates), per degree.
    pub bases: Vec<Vec<Vector>>,
    pub diffs: Vec<PolyMatrix>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TorsionFactor {
    /// Degree of the cohomology module carrying the torsion.
    pub degree: i32,
    pub factor: String,
    /// k when the factor is ħ^k.
    pub exponent: Option<usize>,
}

#[derive(Clone, Debug)]
pub struct Strictness {
    pub torsion_free: bool,
    pub torsion: Vec<TorsionFactor>,
    /// Every Smith certificate multiplied out correctly.
    pub certified: bool,
}

impl Strictness {
    pub fn exponents(&self) -> Vec<usize> {
        self.torsion.iter().filter_map(|t| t.exponent).collect()
    }
}

impl FilteredCochainComplex {
    fn adapted_basis(&self, k: i32) -> (Vec<Vector>, Vec<usize>) {
        let mut basis = Vec::new();
        let mut levels = Vec::new();
        for i in (0..self.levels()).rev() {
            for v in self.step(i, k).complement_of(&self.step(i + 1, k)).unwrap() {
                basis.push(v);
                levels.push(i);
            }
        }
        (basis, levels)
    }

    pub fn rees_complex(&self) -> ReesComplex {
        let field = self.field();
        let degrees: Vec<i32> = self.base().degrees().collect();
        let adapted: Vec<(Vec<Vector>, Vec<usize>)> = degrees.iter().map(|&k| self.adapted_basis(k)).collect();
        let mut diffs = Vec::new();
        for (j, &k) in degrees.iter().enumerate().take(degrees.len().saturating_sub(1)) {
            let (src, src_lv) = &adapted[j];
            let (dst, dst_lv) = &adapted[j + 1];
            let change = Matrix::from_columns(field, self.base().dim(k + 1), dst);
            let mut entries = vec![vec![Poly::zero(field); src.len()]; dst.len()];
            for (c, b) in src.iter().enumerate() {
                let coords = change.solve(&self.base().apply_d(k, b)).expect("adapted basis spans");
                for (r, x) in coords.iter().enumerate() {
                    if x.is_zero() {
                        continue;
                    }
                    let shift = dst_lv[r]
                        .checked_sub(src_lv[c])
                        .expect("differential preserves the filtration");
                    entries[r][c] = Poly::monomial(x.clone(), shift);
                }
            }
            diffs.push(PolyMatrix::from_entries(field, src.len(), entries));
        }
        let (bases, levels) = adapted.into_iter().unzip();
        ReesComplex {
            start: self.base().start(),
            levels,
            bases,
            diffs,
        }
    }

    /// Torsion of the Rees cohomology, read from Smith forms of the differentials.
    pub fn rees_strictness(&self) -> Strictness {
        let rees = self.rees_complex();
        let mut torsion = Vec::new();
        let mut certified = true;
        for (j, d) in rees.diffs.iter().enumerate() {
            let snf = smith_normal_form(d);
            certified &= snf.verify(d);
            for f in snf.torsion() {
                torsion.push(TorsionFactor {
                    degree: rees.start + j as i32 + 1,
                    factor: f.to_string(),
                    exponent: f.monomial_exponent(),
                });
            }
        }
        Strictness {
            torsion_free: torsion.is_empty(),
            torsion,
            certified,
        }
    }
}

impl ReesComplex {
    /// Specialisation at ħ = x as ordinary matrices.
    pub fn specialize(&self, x: &crate::exactalg::Scalar) -> Vec<Matrix> {
        self.diffs.iter().map(|d| d.eval(x)).collect()
    }

    /// Span of the adapted basis in each degree (a sanity view of the base).
    pub fn spans(&self, field: crate::exactalg::Field, dims: &[usize]) -> Vec<Subspace> {
        self.bases
            .iter()
            .zip(dims)
            .map(|(b, &n)| Subspace::span(field, n, b))
            .collect()
    }
}
