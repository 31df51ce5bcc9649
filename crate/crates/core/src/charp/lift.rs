use serde::{Deserialize, Serialize};

use super::w2::W2Poly;
use super::{CharpError, W2ChartAtlas};

/// F̃*(x̃_coord′) = x̃_coord^p + p·v on one chart; v has coefficients read mod p.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Perturbation {
    pub chart: usize,
    pub coord: usize,
    /// Terms (exponent, coefficient) of v.
    pub v: Vec<(Vec<i64>, i64)>,
}

/// A lift F̃_α of the relative Frobenius on one chart.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FrobLift {
    pub chart: usize,
    pub p: u64,
    /// F̃_α*(x̃_j′) over ℤ/p².
    pub images: Vec<W2Poly>,
    /// u_{α,j} over F_p: x̃_j^p(1 + p·u) for j < m and x̃_j^p + p·u otherwise.
    pub u: Vec<W2Poly>,
}

impl FrobLift {
    pub fn canonical(atlas: &W2ChartAtlas, chart: usize) -> Result<FrobLift, CharpError> {
        let c = chart_of(atlas, chart)?;
        let q = atlas.p * atlas.p;
        let images = (0..c.n).map(|j| W2Poly::var_power(q, c.n, j, atlas.p as i64)).collect();
        FrobLift::new(atlas, chart, images)
    }

    /// Checks the reduction and the divisor shape, then extracts u. The pole
    /// condition is left to [`verify_u_sum`].
    pub fn new(atlas: &W2ChartAtlas, chart: usize, images: Vec<W2Poly>) -> Result<FrobLift, CharpError> {
        let c = chart_of(atlas, chart)?;
        let p = atlas.p;
        let q = p * p;
        let not_frob = |reason: String| CharpError::NotFrobenius { chart, reason };
        if images.len() != c.n {
            return Err(not_frob(format!("{} images for {} coordinates", images.len(), c.n)));
        }
        let mut u = Vec::with_capacity(c.n);
        for (j, img) in images.iter().enumerate() {
            if img.modulus() != q || img.n() != c.n {
                return Err(not_frob(format!("image {j} is not over ℤ/{q} in {} variables", c.n)));
            }
            if !img.is_polynomial() {
                return Err(not_frob(format!("image {j} is not a polynomial")));
            }
            let xp = W2Poly::var_power(q, c.n, j, p as i64);
            let v = img
                .sub(&xp)
                .div_p(p)
                .ok_or_else(|| not_frob(format!("image {j} does not reduce to x{}^{p}", j + 1)))?;
            if c.is_log(j) {
                if !v.divisible_by_power(j, p as i64) {
                    return Err(CharpError::LiftCondition {
                        chart,
                        reason: format!("x{}^{p} does not divide the correction {v}", j + 1),
                    });
                }
                let mut s = vec![0; c.n];
                s[j] = -(p as i64);
                u.push(v.shift(&s));
            } else {
                u.push(v);
            }
        }
        Ok(FrobLift { chart, p, images, u })
    }

    pub fn is_canonical(&self) -> bool {
        self.u.iter().all(W2Poly::is_zero)
    }

    /// F̃_α*(x̃_j′)·x̃_j^{-p} = 1 + p·u_{α,j} for a logarithmic coordinate.
    pub(crate) fn log_ratio(&self, j: usize) -> W2Poly {
        let n = self.images[j].n();
        self.images[j].mul(&W2Poly::var_power(self.p * self.p, n, j, -(self.p as i64)))
    }
}

fn chart_of(atlas: &W2ChartAtlas, chart: usize) -> Result<super::W2Chart, CharpError> {
    atlas.validate()?;
    atlas
        .charts
        .get(chart)
        .copied()
        .ok_or_else(|| CharpError::InvalidAtlas(format!("no chart {chart}")))
}

/// Canonical lifts plus perturbations, checked for reduction and divisor shape
/// only. Use [`verify_u_sum`] on the pole charts to see the residual.
pub fn frob_lifts_unchecked(atlas: &W2ChartAtlas, perturbations: &[Perturbation]) -> Result<Vec<FrobLift>, CharpError> {
    atlas.validate()?;
    if perturbations.iter().any(|x| x.chart >= atlas.charts.len()) {
        return Err(CharpError::InvalidAtlas("perturbation on a missing chart".into()));
    }
    let p = atlas.p;
    let q = p * p;
    let mut out = Vec::new();
    for (alpha, c) in atlas.charts.iter().enumerate() {
        let mut images: Vec<W2Poly> = (0..c.n).map(|j| W2Poly::var_power(q, c.n, j, p as i64)).collect();
        for pert in perturbations.iter().filter(|x| x.chart == alpha) {
            if pert.coord >= c.n || pert.v.iter().any(|(e, _)| e.len() != c.n) {
                return Err(CharpError::InvalidAtlas(format!(
                    "perturbation of coordinate {} on chart {alpha} has the wrong shape",
                    pert.coord
                )));
            }
            let v = W2Poly::from_terms(p, c.n, &pert.v);
            images[pert.coord] = images[pert.coord].add(&v.times_p());
        }
        out.push(FrobLift::new(atlas, alpha, images)?);
    }
    Ok(out)
}

/// Canonical lifts x̃_j ↦ x̃_j^p on every chart plus the given perturbations.
/// Fails when a lift breaks F̃*(f̃′) = f̃^p on a chart meeting P or the divisor
/// shape on a chart meeting D.
pub fn build_frob_lift(atlas: &W2ChartAtlas, perturbations: &[Perturbation]) -> Result<Vec<FrobLift>, CharpError> {
    let lifts = frob_lifts_unchecked(atlas, perturbations)?;
    for lift in &lifts {
        if atlas.charts[lift.chart].meets_poles() {
            let r = verify_u_sum(atlas, lift)?;
            if !r.holds {
                return Err(CharpError::LiftCondition {
                    chart: lift.chart,
                    reason: format!("F̃*(f̃′)·f̃^(-p) − 1 = {}", r.residual),
                });
            }
        }
    }
    Ok(lifts)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct USumReport {
    pub chart: usize,
    /// Upper index of the sum: the number ℓ of pole coordinates.
    pub ell: usize,
    /// Σ_{j ≤ ℓ} u_{α,j} over F_p.
    pub u_sum: String,
    /// F̃*(f̃′)·f̃^{-p} − 1 over ℤ/p², equal to p·Σ u_{α,j}.
    pub residual: String,
    pub holds: bool,
    /// Bounds r ≠ ℓ for which Σ_{j ≤ r} u_{α,j} = 0.
    pub other_bounds: Vec<usize>,
    /// The sum fails at ℓ but vanishes for another bound.
    pub bound_mismatch: bool,
}

/// Σ_{j ≤ ℓ} u_{α,j} = 0, with the residual of F̃*(f̃′) = f̃^p computed over ℤ/p².
pub fn verify_u_sum(atlas: &W2ChartAtlas, lift: &FrobLift) -> Result<USumReport, CharpError> {
    let c = chart_of(atlas, lift.chart)?;
    if !c.meets_poles() {
        return Err(CharpError::NoPoles(lift.chart));
    }
    let q = atlas.p * atlas.p;
    let mut prod = W2Poly::one(q, c.n);
    for j in 0..c.ell {
        prod = prod.mul(&lift.log_ratio(j));
    }
    let residual = prod.sub(&W2Poly::one(q, c.n));
    let u_sum = residual.div_p(atlas.p).ok_or_else(|| CharpError::LiftCondition {
        chart: lift.chart,
        reason: "pole coordinates do not lift as x^p(1 + p·u)".into(),
    })?;
    let holds = residual.is_zero();
    let mut other_bounds = Vec::new();
    let mut acc = W2Poly::zero(atlas.p, c.n);
    for (r, u) in lift.u.iter().enumerate() {
        acc = acc.add(u);
        if r + 1 != c.ell && acc.is_zero() {
            other_bounds.push(r + 1);
        }
    }
    Ok(USumReport {
        chart: lift.chart,
        ell: c.ell,
        u_sum: u_sum.to_string(),
        residual: if holds { "0".into() } else { format!("p·({u_sum})") },
        holds,
        bound_mismatch: !holds && !other_bounds.is_empty(),
        other_bounds,
    })
}
