//! Monomial charts with f = x^{-e}: logarithmic forms with pole twists, the
//! Kontsevich sheaves Ω_f, the Yu filtration, the relative logarithmic
//! complex, and slice-by-slice verification of the local comparison results.
//!
//! All computations are graded by multidegree. A form m·δ_J, with δ_i the
//! logarithmic basis element of coordinate i, has multidegree equal to the
//! exponent vector of m; in the basis dx/x, dy/y, dz this is the exponent of
//! the coefficient plus one for each dz_k present.

mod checks;
pub(crate) mod forms;
pub(crate) mod slices;

pub use checks::{
    fyu_step, gr_complex, quotient_cohomology_lemma, relative_log_complex, verify_c1_sequence, verify_kont_log,
    verify_kont_log_with, C1Report, C1SliceFailure, GrReport, KontLogReport, QuotientLemmaReport, RelativeComplex,
    RowDifferential, RowReport, SliceChain,
};
pub use forms::{nabla, MonomialLogForm};
pub use slices::{kontsevich_by_kernel, GradedSheafSpace, Slice, SpaceKind};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::ToPrimitive;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum LocalError {
    #[error("invalid chart: {0}")]
    InvalidChart(String),
    #[error("multidegree {0:?} lies outside the window")]
    OutsideWindow(Vec<i64>),
    #[error("window has {got} coordinates, chart has {expected}")]
    WindowShape { expected: usize, got: usize },
    #[error("the chart has no pole coordinates")]
    NoPoles,
    #[error("pole multiplicities must all be 1, got {0:?}")]
    NotReduced(Vec<u32>),
}

/// Coordinates x_1..x_ℓ (poles of f), y_1..y_m (horizontal divisor), z_1..z_pz.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ChartData {
    pub ell: usize,
    pub m: usize,
    pub pz: usize,
    pub e: Vec<u32>,
}

pub const MAX_CHART_DIM: usize = 16;

impl ChartData {
    pub fn new(ell: usize, m: usize, pz: usize, e: Vec<u32>) -> Result<ChartData, LocalError> {
        let chart = ChartData { ell, m, pz, e };
        chart.validate()?;
        Ok(chart)
    }

    pub fn validate(&self) -> Result<(), LocalError> {
        if self.e.len() != self.ell {
            return Err(LocalError::InvalidChart(format!(
                "{} multiplicities for {} pole coordinates",
                self.e.len(),
                self.ell
            )));
        }
        if self.e.contains(&0) {
            return Err(LocalError::InvalidChart("pole multiplicities must be positive".into()));
        }
        if self.n() > MAX_CHART_DIM {
            return Err(LocalError::InvalidChart(format!(
                "dimension {} exceeds {MAX_CHART_DIM}",
                self.n()
            )));
        }
        Ok(())
    }

    pub fn n(&self) -> usize {
        self.ell + self.m + self.pz
    }

    pub fn is_reduced(&self) -> bool {
        self.e.iter().all(|&x| x == 1)
    }

    pub fn is_x(&self, i: usize) -> bool {
        i < self.ell
    }

    pub fn is_z(&self, i: usize) -> bool {
        i >= self.ell + self.m && i < self.n()
    }

    /// The pole multidegree e, padded with zeros.
    pub fn shift(&self) -> Vec<i64> {
        let mut s = vec![0i64; self.n()];
        for (i, &x) in self.e.iter().enumerate() {
            s[i] = x as i64;
        }
        s
    }

    /// Every chart with ℓ+m+pz ≤ `max_dim` and pole multiplicities ≤ `max_e`.
    pub fn family(max_dim: usize, max_e: u32) -> Vec<ChartData> {
        let mut out = Vec::new();
        for n in 0..=max_dim {
            for ell in 0..=n {
                for m in 0..=(n - ell) {
                    let pz = n - ell - m;
                    let mut e = vec![1u32; ell];
                    loop {
                        out.push(ChartData {
                            ell,
                            m,
                            pz,
                            e: e.clone(),
                        });
                        let mut i = 0;
                        while i < ell && e[i] == max_e {
                            e[i] = 1;
                            i += 1;
                        }
                        if i == ell {
                            break;
                        }
                        e[i] += 1;
                    }
                }
            }
        }
        out
    }
}

/// Box of multidegrees lo ≤ a ≤ hi.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Window {
    pub lo: Vec<i64>,
    pub hi: Vec<i64>,
}

impl Window {
    /// All multidegrees with |a_i| ≤ r.
    pub fn cube(n: usize, r: i64) -> Window {
        Window {
            lo: vec![-r; n],
            hi: vec![r; n],
        }
    }

    pub fn single(a: Vec<i64>) -> Window {
        Window { lo: a.clone(), hi: a }
    }

    pub fn dim(&self) -> usize {
        self.lo.len()
    }

    pub fn contains(&self, a: &[i64]) -> bool {
        a.len() == self.lo.len() && a.iter().zip(&self.lo).zip(&self.hi).all(|((x, l), h)| l <= x && x <= h)
    }

    pub fn len(&self) -> usize {
        self.lo
            .iter()
            .zip(&self.hi)
            .map(|(l, h)| (h - l + 1).max(0) as usize)
            .product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Points in lexicographic order.
    pub fn points(&self) -> Vec<Vec<i64>> {
        if self.lo.iter().zip(&self.hi).any(|(l, h)| l > h) {
            return Vec::new();
        }
        let mut out = Vec::with_capacity(self.len());
        let mut cur = self.lo.clone();
        loop {
            out.push(cur.clone());
            let mut i = cur.len();
            loop {
                if i == 0 {
                    return out;
                }
                i -= 1;
                if cur[i] < self.hi[i] {
                    cur[i] += 1;
                    break;
                }
                cur[i] = self.lo[i];
            }
        }
    }

    fn check(&self, chart: &ChartData) -> Result<(), LocalError> {
        if self.dim() != chart.n() {
            return Err(LocalError::WindowShape {
                expected: chart.n(),
                got: self.dim(),
            });
        }
        Ok(())
    }
}

pub(crate) fn floor_i64(q: &BigRational) -> i64 {
    q.floor().to_integer().to_i64().expect("twist fits in i64")
}

/// floor of q·e_i for every pole coordinate.
pub(crate) fn twist_floor(chart: &ChartData, q: &BigRational) -> Vec<i64> {
    chart
        .e
        .iter()
        .map(|&e| floor_i64(&(q * BigRational::from_integer(BigInt::from(e)))))
        .collect()
}

/// floor of (q − ε)·e_i for small ε > 0, i.e. ⌈q·e_i⌉ − 1.
pub(crate) fn twist_floor_below(chart: &ChartData, q: &BigRational) -> Vec<i64> {
    chart
        .e
        .iter()
        .map(|&e| {
            let x = q * BigRational::from_integer(BigInt::from(e));
            x.ceil().to_integer().to_i64().expect("twist fits in i64") - 1
        })
        .collect()
}

/// n/d as a rational.
pub fn rat(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}
