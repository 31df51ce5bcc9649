use num_bigint::BigInt;
use num_rational::BigRational;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::exactalg::{combine, Field, Matrix, QuotientMap, Subspace, Vector};

use super::complex::CochainComplex;
use super::filtered::FilteredCochainComplex;

/// Shape limits for generated complexes.
#[derive(Clone, Copy, Debug)]
pub struct RandomShape {
    pub max_total_dim: usize,
    pub max_levels: usize,
    pub max_degrees: usize,
}

impl Default for RandomShape {
    fn default() -> Self {
        RandomShape {
            max_total_dim: 12,
            max_levels: 4,
            max_degrees: 4,
        }
    }
}

/// Deterministic generator for instance `index` of a run seeded by `seed`.
pub fn instance_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

fn small(rng: &mut impl Rng, field: Field) -> crate::exactalg::Scalar {
    // zero-heavy so that coordinate-aligned flags show up
    let x: i64 = if rng.gen_bool(0.4) { 0 } else { rng.gen_range(-2..=2) };
    field.int(x)
}

fn random_vector_in(rng: &mut impl Rng, field: Field, space: &Subspace) -> Vector {
    let basis = space.basis();
    if basis.is_empty() {
        return vec![field.zero(); space.ambient()];
    }
    if rng.gen_bool(0.5) {
        // a single basis vector keeps flags sparse
        return basis[rng.gen_range(0..basis.len())].clone();
    }
    let coeffs: Vec<_> = (0..basis.len()).map(|_| small(rng, field)).collect();
    combine(field, space.ambient(), &basis, &coeffs)
}

/// Random complex with d∘d = 0: each differential factors through the
/// quotient by the previous image.
pub fn random_complex(rng: &mut impl Rng, field: Field, shape: &RandomShape) -> CochainComplex {
    let ndeg = rng.gen_range(1..=shape.max_degrees);
    let mut budget = rng.gen_range(0..=shape.max_total_dim);
    let mut dims = Vec::with_capacity(ndeg);
    for i in 0..ndeg {
        let take = if i + 1 == ndeg {
            budget.min(4)
        } else {
            rng.gen_range(0..=budget.min(4))
        };
        dims.push(take);
        budget -= take;
    }
    let start = rng.gen_range(-1..=1);
    let mut diffs: Vec<Matrix> = Vec::new();
    for i in 0..ndeg.saturating_sub(1) {
        let prev_image = match diffs.last() {
            Some(d) => Subspace::span(field, dims[i], &d.image_basis()),
            None => Subspace::zero(field, dims[i]),
        };
        let q = QuotientMap::new(&prev_image);
        let r: Vec<Vector> = (0..dims[i + 1])
            .map(|_| (0..q.dim()).map(|_| small(rng, field)).collect())
            .collect();
        let rm = Matrix::from_rows(field, q.dim(), &r);
        let cols: Vec<Vector> = (0..dims[i])
            .map(|c| rm.apply(&q.apply(&crate::exactalg::unit(field, dims[i], c))))
            .collect();
        diffs.push(Matrix::from_columns(field, dims[i + 1], &cols));
    }
    CochainComplex::new(field, start, dims, diffs).expect("d∘d = 0 by construction")
}

/// Random flag of subcomplexes: random generators inside the previous step,
/// closed under d degree by degree.
pub fn random_filtered(rng: &mut impl Rng, field: Field, shape: &RandomShape) -> FilteredCochainComplex {
    let base = random_complex(rng, field, shape);
    let levels = rng.gen_range(1..=shape.max_levels);
    let mut lambdas: Vec<BigRational> = Vec::new();
    let mut next = BigRational::new(BigInt::from(rng.gen_range(-4..=2)), BigInt::from(rng.gen_range(1..=3)));
    for _ in 0..levels {
        lambdas.push(next.clone());
        next += BigRational::new(BigInt::from(rng.gen_range(1..=3)), BigInt::from(rng.gen_range(1..=2)));
    }
    let degrees: Vec<i32> = base.degrees().collect();
    let mut steps: Vec<Vec<Subspace>> = vec![degrees.iter().map(|&k| Subspace::full(field, base.dim(k))).collect()];
    for _ in 1..levels {
        let prev = steps.last().unwrap().clone();
        let mut row: Vec<Subspace> = Vec::new();
        for (j, &k) in degrees.iter().enumerate() {
            let ngen = rng.gen_range(0..=prev[j].dim());
            let mut gens: Vec<Vector> = (0..ngen).map(|_| random_vector_in(rng, field, &prev[j])).collect();
            if j > 0 {
                gens.extend(row[j - 1].image_under(&base.d_or_zero(k - 1)).basis());
            }
            row.push(Subspace::span(field, base.dim(k), &gens));
        }
        steps.push(row);
    }
    FilteredCochainComplex::from_subspaces(base, lambdas, steps).expect("valid by construction")
}
