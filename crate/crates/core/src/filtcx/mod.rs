//! Filtered cochain complexes: cohomology, spectral pages, E_1-degeneration
//! with witnesses, and ħ-torsion of the Rees complex.

mod complex;
mod filtered;
pub mod json;
mod pages;
pub mod random;
mod rees;

pub use complex::CochainComplex;
pub use filtered::{Degeneration, FilteredCochainComplex, Witness};
pub use pages::{D1Block, PageEntry, SpectralPage};
pub use rees::{ReesComplex, Strictness, TorsionFactor};

use crate::exactalg::Field;
use crate::par::{self, Exec};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum FiltError {
    #[error("{degrees} degrees need {} differentials, got {maps}", degrees.saturating_sub(1))]
    DifferentialCount { degrees: usize, maps: usize },
    #[error("differential leaving degree {degree} has shape {shape:?}")]
    DifferentialShape { degree: i32, shape: (usize, usize) },
    #[error("d∘d is nonzero starting in degree {0}")]
    NotAComplex(i32),
    #[error("filtration has no steps")]
    EmptyFiltration,
    #[error("filtration indices must be strictly increasing")]
    UnorderedIndices,
    #[error("step spans {got} degrees, complex has {expected}")]
    StepDegrees { expected: usize, got: usize },
    #[error("first step is not the whole complex in degree {0}")]
    NotExhaustive(i32),
    #[error("step {lambda} is not contained in the previous one in degree {degree}")]
    NotDecreasing { lambda: String, degree: i32 },
    #[error("step {lambda} is not closed under d in degree {degree}")]
    NotSubcomplex { lambda: String, degree: i32 },
    #[error("malformed document: {0}")]
    Document(String),
}

/// The three equivalent formulations of E_1-degeneration, evaluated independently.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TripleCheck {
    pub injective: bool,
    pub e1_total: usize,
    pub h_total: usize,
    pub torsion_free: bool,
}

impl TripleCheck {
    pub fn e1_matches_h(&self) -> bool {
        self.e1_total == self.h_total
    }

    pub fn consistent(&self) -> bool {
        self.injective == self.e1_matches_h() && self.e1_matches_h() == self.torsion_free
    }
}

pub fn triple_check(f: &FilteredCochainComplex) -> TripleCheck {
    TripleCheck {
        injective: f.e1_degenerates().degenerates,
        e1_total: f.e1_total(),
        h_total: f.cohomology_total(),
        torsion_free: f.rees_strictness().torsion_free,
    }
}

#[derive(Clone, Debug)]
pub struct Counterexample {
    pub index: u64,
    pub check: TripleCheck,
    pub complex: json::FilteredDoc,
}

#[derive(Clone, Debug)]
pub struct FuzzStats {
    pub seed: u64,
    pub count: u64,
    pub consistent: u64,
    pub degenerate: u64,
    pub counterexamples: Vec<Counterexample>,
}

/// Runs `checker` on `count` seeded random filtered complexes over ℚ.
pub fn fuzz_filtered_with<C>(seed: u64, count: u64, exec: Exec, checker: C) -> FuzzStats
where
    C: Fn(&FilteredCochainComplex) -> TripleCheck + Sync + Send,
{
    let shape = random::RandomShape::default();
    let indices: Vec<u64> = (0..count).collect();
    let results = par::map(exec, &indices, |&i| {
        let mut rng = random::instance_rng(seed, i);
        let f = random::random_filtered(&mut rng, Field::Rational, &shape);
        let check = checker(&f);
        (i, check, f)
    });
    let mut stats = FuzzStats {
        seed,
        count,
        consistent: 0,
        degenerate: 0,
        counterexamples: Vec::new(),
    };
    for (i, check, f) in results {
        if check.injective {
            stats.degenerate += 1;
        }
        if check.consistent() {
            stats.consistent += 1;
        } else {
            stats.counterexamples.push(Counterexample {
                index: i,
                check,
                complex: json::FilteredDoc::from(&f),
            });
        }
    }
    stats
}

pub fn fuzz_filtered(seed: u64, count: u64) -> FuzzStats {
    fuzz_filtered_with(seed, count, Exec::default(), triple_check)
}
