//! Characteristic p: the Cartier map on the Kontsevich complex over F_p,
//! Frobenius liftings over W₂ = ℤ/p², the Čech splitting data (φ, ψ) built
//! from them, and the degeneration check on P¹ by dimension count.
//!
//! Charts are monomial: coordinates x_1..x_n with f̃ = (x̃_1⋯x̃_ℓ)^{-1} and
//! D̃ = (x̃_1⋯x̃_m). Forms use the basis dx_i/x_i for i < m and dx_i otherwise,
//! matching [`crate::localmodel::ChartData`] with ℓ pole coordinates, m − ℓ
//! horizontal ones and n − m free ones.

mod cartier;
mod lift;
mod split;
mod w2;

pub use cartier::{
    cartier_inverse, verify_cartier_iso_omega_f, verify_closed_intersection, wedge, CartierIsoReport, CartierSlice,
    IntersectionReport, IntersectionSlice,
};
pub use lift::{build_frob_lift, frob_lifts_unchecked, verify_u_sum, FrobLift, Perturbation, USumReport};
pub use split::{assemble_splitting, Cochain, SplitCheck, SplittingData, SplittingReport};
pub use w2::W2Poly;

use num_bigint::BigInt;
use num_rational::BigRational;
use serde::{Deserialize, Serialize};

use crate::exactalg::{AlgError, Field};
use crate::localmodel::{ChartData, LocalError};
use crate::p1global::{hypercoh_dims_with, P1Error, P1Options, P1Problem, Point};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum CharpError {
    #[error("invalid atlas: {0}")]
    InvalidAtlas(String),
    #[error(transparent)]
    Field(#[from] AlgError),
    #[error("splitting degree {i} needs i < p = {p}")]
    DegreeTooLarge { i: usize, p: u64 },
    #[error("lift on chart {chart} is not a Frobenius lift: {reason}")]
    NotFrobenius { chart: usize, reason: String },
    #[error("lift on chart {chart} violates the pole or divisor condition: {reason}")]
    LiftCondition { chart: usize, reason: String },
    #[error("chart {0} does not meet the pole divisor")]
    NoPoles(usize),
    #[error(transparent)]
    Local(#[from] LocalError),
    #[error(transparent)]
    P1(#[from] P1Error),
}

/// Monomial chart data (n, ℓ, m) with ℓ ≤ m ≤ n.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct W2Chart {
    pub n: usize,
    pub ell: usize,
    pub m: usize,
}

impl W2Chart {
    pub fn local(&self) -> ChartData {
        ChartData {
            ell: self.ell,
            m: self.m - self.ell,
            pz: self.n - self.m,
            e: vec![1; self.ell],
        }
    }

    pub fn meets_poles(&self) -> bool {
        self.ell > 0
    }

    pub fn meets_divisor(&self) -> bool {
        self.m > 0
    }

    /// Whether coordinate i uses the logarithmic basis element.
    pub fn is_log(&self, i: usize) -> bool {
        i < self.m
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum AtlasKind {
    /// One monomial chart of Aⁿ.
    Affine,
    /// Charts z̃ and w̃ = 1/z̃ on P¹ for f = z, with D = ∞ or D = 0 + ∞.
    P1 { horizontal_zero: bool },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct W2ChartAtlas {
    pub p: u64,
    pub kind: AtlasKind,
    pub charts: Vec<W2Chart>,
}

pub const MAX_ATLAS_DIM: usize = 6;

impl W2ChartAtlas {
    pub fn affine(p: u64, n: usize, ell: usize, m: usize) -> Result<W2ChartAtlas, CharpError> {
        let atlas = W2ChartAtlas {
            p,
            kind: AtlasKind::Affine,
            charts: vec![W2Chart { n, ell, m }],
        };
        atlas.validate()?;
        Ok(atlas)
    }

    pub fn p1(p: u64, horizontal_zero: bool) -> Result<W2ChartAtlas, CharpError> {
        let atlas = W2ChartAtlas {
            p,
            kind: AtlasKind::P1 { horizontal_zero },
            charts: vec![
                W2Chart {
                    n: 1,
                    ell: 0,
                    m: usize::from(horizontal_zero),
                },
                W2Chart { n: 1, ell: 1, m: 1 },
            ],
        };
        atlas.validate()?;
        Ok(atlas)
    }

    pub fn field(&self) -> Field {
        Field::Prime(self.p)
    }

    pub fn validate(&self) -> Result<(), CharpError> {
        Field::prime(self.p)?;
        let bad = |s: &str| Err(CharpError::InvalidAtlas(s.into()));
        if self.charts.is_empty() {
            return bad("no charts");
        }
        for c in &self.charts {
            if !(c.ell <= c.m && c.m <= c.n) || c.n == 0 || c.n > MAX_ATLAS_DIM {
                return bad("need 0 < n ≤ 6 and ℓ ≤ m ≤ n");
            }
        }
        match self.kind {
            AtlasKind::Affine => {
                if self.charts.len() != 1 {
                    return bad("an affine atlas has one chart");
                }
            }
            AtlasKind::P1 { horizontal_zero } => {
                let expected = [
                    W2Chart {
                        n: 1,
                        ell: 0,
                        m: usize::from(horizontal_zero),
                    },
                    W2Chart { n: 1, ell: 1, m: 1 },
                ];
                if self.charts != expected {
                    return bad("the P¹ atlas has the charts z and w = 1/z");
                }
                // f̃ = z̃ on the first chart must become (w̃)^{-1} on the second
                let q = self.p * self.p;
                let f0 = W2Poly::var_power(q, 1, 0, 1);
                let f1 = W2Poly::var_power(q, 1, 0, -1);
                if f0.invert_variables() != f1 || f1.inverse_near_monomial(self.p).is_none() {
                    return bad("transition does not carry f̃");
                }
            }
        }
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.charts[0].n
    }

    /// Coordinate change from chart `alpha` into the coordinates of chart 0.
    pub(crate) fn transfers(&self, alpha: usize) -> bool {
        matches!(self.kind, AtlasKind::P1 { .. }) && alpha == 1
    }
}

/// Charp task parameters as read from a run plan.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CharpConfig {
    pub p: u64,
    /// "A1", "An" or "P1".
    pub atlas: String,
    #[serde(default = "one")]
    pub n: usize,
    #[serde(default)]
    pub ell: usize,
    #[serde(default)]
    pub m: usize,
    #[serde(default)]
    pub horizontal_zero: bool,
    #[serde(default)]
    pub perturbations: Vec<Perturbation>,
    #[serde(default = "one")]
    pub i_max: usize,
}

fn one() -> usize {
    1
}

impl CharpConfig {
    pub fn build_atlas(&self) -> Result<W2ChartAtlas, CharpError> {
        match self.atlas.as_str() {
            "A1" => W2ChartAtlas::affine(self.p, 1, self.ell, self.m),
            "An" => W2ChartAtlas::affine(self.p, self.n, self.ell, self.m),
            "P1" => W2ChartAtlas::p1(self.p, self.horizontal_zero),
            other => Err(CharpError::InvalidAtlas(format!("unknown atlas {other}"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct DegenerationReport {
    pub p: u64,
    pub horizontal_zero: bool,
    /// Hypercohomology dims of (Ω_f^•, d).
    pub dims_d: Vec<usize>,
    /// Hypercohomology dims with the zero differential, Σ_q h^q(Ω_f^{k−q}).
    pub dims_zero: Vec<usize>,
    pub equal: bool,
    /// False when p ≤ dim X + 1; the comparison is then reported only.
    pub asserted: bool,
    pub passed: bool,
}

/// Compares (Ω_f^•, d) with (Ω_f^•, 0) over F_p on the P¹ atlas.
pub fn charp_degeneration_dims(
    atlas: &W2ChartAtlas,
    truncation: Option<i64>,
) -> Result<DegenerationReport, CharpError> {
    atlas.validate()?;
    let AtlasKind::P1 { horizontal_zero } = atlas.kind else {
        return Err(CharpError::InvalidAtlas("degeneration runs on the P¹ atlas".into()));
    };
    let h = if horizontal_zero { vec![Point::int(0)] } else { vec![] };
    let problem = P1Problem::from_ints(&[0, 1], &[1], h)?;
    let opts = P1Options {
        field: Field::prime(atlas.p)?,
        truncation,
        ..P1Options::default()
    };
    let q = |x: i64| BigRational::from_integer(BigInt::from(x));
    let zero = q(0);
    let dims_d = hypercoh_dims_with(&problem, &zero, &(q(1), q(0)), &opts)?.dims;
    let dims_zero = hypercoh_dims_with(&problem, &zero, &(q(0), q(0)), &opts)?.dims;
    let equal = dims_d == dims_zero;
    let asserted = atlas.p as usize > atlas.dim() + 1;
    Ok(DegenerationReport {
        p: atlas.p,
        horizontal_zero,
        dims_d,
        dims_zero,
        equal,
        asserted,
        passed: equal || !asserted,
    })
}
