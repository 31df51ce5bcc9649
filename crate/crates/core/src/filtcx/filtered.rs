use num_rational::BigRational;

use crate::exactalg::{Field, Matrix, Subspace, Vector};

use super::complex::CochainComplex;
use super::FiltError;

/// A complex with a finite decreasing filtration by subcomplexes.
///
/// Step i is F^{λ_i}; the filtration is constant on (λ_{i-1}, λ_i], equals
/// the base at and below λ_0 and vanishes above the last λ.
#[derive(Clone, Debug)]
pub struct FilteredCochainComplex {
    base: CochainComplex,
    lambdas: Vec<BigRational>,
    // steps[i][k - start]
    steps: Vec<Vec<Subspace>>,
}

/// A class in H^k(F^λ) that dies in H^k of the base.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Witness {
    pub lambda: BigRational,
    pub degree: i32,
    pub class: Vector,
}

#[derive(Clone, Debug)]
pub struct Degeneration {
    pub degenerates: bool,
    pub witnesses: Vec<Witness>,
}

impl FilteredCochainComplex {
    /// `steps[i]` lists, per degree of `base`, spanning vectors of F^{λ_i}.
    pub fn new(
        base: CochainComplex,
        steps: Vec<(BigRational, Vec<Vec<Vector>>)>,
    ) -> Result<FilteredCochainComplex, FiltError> {
        let field = base.field();
        let mut lambdas = Vec::new();
        let mut spaces = Vec::new();
        for (lambda, gens) in steps {
            if gens.len() != base.dims().len() {
                return Err(FiltError::StepDegrees {
                    expected: base.dims().len(),
                    got: gens.len(),
                });
            }
            let row: Vec<Subspace> = base
                .degrees()
                .zip(gens.iter())
                .map(|(k, g)| Subspace::span(field, base.dim(k), g))
                .collect();
            lambdas.push(lambda);
            spaces.push(row);
        }
        FilteredCochainComplex::from_subspaces(base, lambdas, spaces)
    }

    pub fn from_subspaces(
        base: CochainComplex,
        lambdas: Vec<BigRational>,
        steps: Vec<Vec<Subspace>>,
    ) -> Result<FilteredCochainComplex, FiltError> {
        if lambdas.is_empty() {
            return Err(FiltError::EmptyFiltration);
        }
        if lambdas.windows(2).any(|w| w[0] >= w[1]) {
            return Err(FiltError::UnorderedIndices);
        }
        let f = FilteredCochainComplex { base, lambdas, steps };
        f.validate()?;
        Ok(f)
    }

    fn validate(&self) -> Result<(), FiltError> {
        for (i, row) in self.steps.iter().enumerate() {
            for (j, k) in self.base.degrees().enumerate() {
                let s = &row[j];
                if s.ambient() != self.base.dim(k) {
                    return Err(FiltError::StepDegrees {
                        expected: self.base.dim(k),
                        got: s.ambient(),
                    });
                }
                if i == 0 && s.dim() != self.base.dim(k) {
                    return Err(FiltError::NotExhaustive(k));
                }
                if i > 0 && !self.steps[i - 1][j].contains_space(s).unwrap() {
                    return Err(FiltError::NotDecreasing {
                        lambda: self.lambdas[i].to_string(),
                        degree: k,
                    });
                }
                if let Some(d) = self.base.d(k) {
                    let img = s.image_under(d);
                    if !row[j + 1].contains_space(&img).unwrap() {
                        return Err(FiltError::NotSubcomplex {
                            lambda: self.lambdas[i].to_string(),
                            degree: k,
                        });
                    }
                }
            }
        }
        Ok(())
    }

    /// The trivial filtration F^λ = base with a single step.
    pub fn trivial(base: CochainComplex, lambda: BigRational) -> FilteredCochainComplex {
        let row = base
            .degrees()
            .map(|k| Subspace::full(base.field(), base.dim(k)))
            .collect();
        FilteredCochainComplex::from_subspaces(base, vec![lambda], vec![row]).unwrap()
    }

    pub fn base(&self) -> &CochainComplex {
        &self.base
    }

    pub fn field(&self) -> Field {
        self.base.field()
    }

    pub fn lambdas(&self) -> &[BigRational] {
        &self.lambdas
    }

    pub fn levels(&self) -> usize {
        self.lambdas.len()
    }

    /// F^{λ_i} in degree k; `i >= levels()` gives zero.
    pub fn step(&self, i: usize, k: i32) -> Subspace {
        let n = self.base.dim(k);
        if !self.base.degrees().contains(&k) || i >= self.steps.len() {
            return Subspace::zero(self.field(), n);
        }
        self.steps[i][(k - self.base.start()) as usize].clone()
    }

    /// Index of the step in force at λ.
    pub fn step_index(&self, lambda: &BigRational) -> usize {
        self.lambdas
            .iter()
            .position(|l| l >= lambda)
            .unwrap_or(self.lambdas.len())
    }

    pub fn step_at(&self, lambda: &BigRational, k: i32) -> Subspace {
        self.step(self.step_index(lambda), k)
    }

    /// Increasing view F_μ = F^{-μ}.
    pub fn increasing_step(&self, mu: &BigRational, k: i32) -> Subspace {
        self.step_at(&-mu, k)
    }

    fn d_or_zero(&self, k: i32) -> Matrix {
        self.base.d_or_zero(k)
    }

    /// Cycles of F^{λ_i} in degree k.
    pub fn step_cycles(&self, i: usize, k: i32) -> Subspace {
        self.step(i, k).intersection(&self.base.cycles(k)).unwrap()
    }

    /// Boundaries of F^{λ_i} in degree k.
    pub fn step_boundaries(&self, i: usize, k: i32) -> Subspace {
        self.step(i, k - 1).image_under(&self.d_or_zero(k - 1))
    }

    pub fn step_cohomology_dim(&self, i: usize, k: i32) -> usize {
        self.step_cycles(i, k).dim() - self.step_boundaries(i, k).dim()
    }

    /// dim of the image of H^k(F^{λ_i}) in H^k(base).
    pub fn image_dim(&self, i: usize, k: i32) -> usize {
        let b = self.base.boundaries(k);
        self.step_cycles(i, k).sum(&b).unwrap().dim() - b.dim()
    }

    /// Kernel of H^k(F^{λ_i}) → H^k(base), as representatives.
    pub fn killed_classes(&self, i: usize, k: i32) -> Vec<Vector> {
        let dying = self.step_cycles(i, k).intersection(&self.base.boundaries(k)).unwrap();
        let bf = self.step_boundaries(i, k);
        dying.complement_of(&bf).unwrap()
    }

    pub fn e1_degenerates(&self) -> Degeneration {
        let mut witnesses = Vec::new();
        for i in 0..self.levels() {
            for k in self.base.degrees() {
                if let Some(class) = self.killed_classes(i, k).into_iter().next() {
                    witnesses.push(Witness {
                        lambda: self.lambdas[i].clone(),
                        degree: k,
                        class,
                    });
                }
            }
        }
        Degeneration {
            degenerates: witnesses.is_empty(),
            witnesses,
        }
    }

    /// gr^{λ_i} = F^{λ_i} / F^{λ_{i+1}} with the induced differential.
    pub fn graded_piece(&self, i: usize) -> CochainComplex {
        let field = self.field();
        let reps: Vec<Vec<Vector>> = self
            .base
            .degrees()
            .map(|k| self.step(i, k).complement_of(&self.step(i + 1, k)).unwrap())
            .collect();
        let dims: Vec<usize> = reps.iter().map(Vec::len).collect();
        let mut diffs = Vec::new();
        for (j, k) in self.base.degrees().enumerate().take(dims.len().saturating_sub(1)) {
            let below = self.step(i + 1, k + 1);
            let cols: Vec<Vector> = reps[j]
                .iter()
                .map(|v| {
                    Subspace::coordinates_mod(&reps[j + 1], &below, &self.base.apply_d(k, v))
                        .expect("filtration is a subcomplex")
                })
                .collect();
            diffs.push(Matrix::from_columns(field, dims[j + 1], &cols));
        }
        CochainComplex::new(field, self.base.start(), dims, diffs).expect("quotient of complexes")
    }

    /// Σ_{p,q} dim E_1^{p,q}.
    pub fn e1_total(&self) -> usize {
        (0..self.levels())
            .map(|i| self.graded_piece(i).total_cohomology())
            .sum()
    }

    pub fn cohomology_total(&self) -> usize {
        self.base.total_cohomology()
    }

    /// (λ, dim F^λ H^k) for every step.
    pub fn induced_filtration_on_h(&self, k: i32) -> Vec<(BigRational, usize)> {
        (0..self.levels())
            .map(|i| (self.lambdas[i].clone(), self.image_dim(i, k)))
            .collect()
    }

    pub fn direct_sum(&self, other: &FilteredCochainComplex) -> FilteredCochainComplex {
        let base = self.base.direct_sum(&other.base);
        let mut lambdas: Vec<BigRational> = self.lambdas.iter().chain(other.lambdas.iter()).cloned().collect();
        lambdas.sort();
        lambdas.dedup();
        let steps = lambdas
            .iter()
            .map(|l| {
                base.degrees()
                    .map(|k| {
                        let a = self.step_at(l, k).basis();
                        let b = other.step_at(l, k).basis();
                        let (na, nb) = (self.base.dim(k), other.base.dim(k));
                        let mut vs: Vec<Vector> = a
                            .into_iter()
                            .map(|mut v| {
                                v.extend(std::iter::repeat_n(self.field().zero(), nb));
                                v
                            })
                            .collect();
                        vs.extend(b.into_iter().map(|v| {
                            let mut w = vec![self.field().zero(); na];
                            w.extend(v);
                            w
                        }));
                        Subspace::span(self.field(), na + nb, &vs)
                    })
                    .collect()
            })
            .collect();
        FilteredCochainComplex::from_subspaces(base, lambdas, steps).expect("sum of filtered complexes")
    }

    /// Same spaces with every index moved by `delta`.
    pub fn shift_index(&self, delta: &BigRational) -> FilteredCochainComplex {
        FilteredCochainComplex {
            base: self.base.clone(),
            lambdas: self.lambdas.iter().map(|l| l + delta).collect(),
            steps: self.steps.clone(),
        }
    }

    /// Spanning sets of each step, per degree.
    pub fn step_bases(&self) -> Vec<Vec<Vec<Vector>>> {
        self.steps
            .iter()
            .map(|row| row.iter().map(Subspace::basis).collect())
            .collect()
    }
}
