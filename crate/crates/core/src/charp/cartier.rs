use std::collections::BTreeMap;

use serde::Serialize;

use crate::exactalg::{Field, Matrix, Subspace, Vector};
use crate::localmodel::forms::{insert_sign, z_part};
use crate::localmodel::slices::{d_coeffs, wedge_map};
use crate::localmodel::{rat, ChartData, LocalError, MonomialLogForm, Slice, SpaceKind, Window};
use crate::par::{self, Exec};

use super::CharpError;

/// Exterior product; basis elements are the dx_i/x_i and dz_k of the chart.
pub fn wedge(a: &MonomialLogForm, b: &MonomialLogForm) -> MonomialLogForm {
    let field = a.field();
    let mut out = MonomialLogForm::zero(field, a.n());
    for (ea, ma, ca) in a.terms() {
        for (eb, mb, cb) in b.terms() {
            if ma & mb != 0 {
                continue;
            }
            // move each element of mb past the elements of ma above it
            let mut neg = false;
            for i in (0..32).filter(|i| mb & (1 << i) != 0) {
                neg ^= (ma >> i).count_ones() % 2 == 1;
            }
            let e: Vec<i64> = ea.iter().zip(eb).map(|(x, y)| x + y).collect();
            let c = ca * cb;
            out.add_term(e, ma | mb, if neg { -c } else { c });
        }
    }
    out
}

/// The chain-level inverse Cartier map: x′ ↦ x^p, dx′/x′ ↦ dx/x, dz′ ↦ z^{p−1}dz.
/// The field of `form` must be F_p.
pub fn cartier_inverse(chart: &ChartData, form: &MonomialLogForm) -> MonomialLogForm {
    let field = form.field();
    let p = field.characteristic() as i64;
    assert!(p > 0, "the Cartier map needs a prime field");
    let mut out = MonomialLogForm::zero(field, form.n());
    for (a, mask, c) in form.terms() {
        let z = z_part(chart, mask);
        let e: Vec<i64> = a.iter().zip(&z).map(|(x, zi)| p * x + (p - 1) * zi).collect();
        // c^p = c over F_p
        out.add_term(e, mask, c.clone());
    }
    out
}

pub(crate) fn slice(field: Field, chart: &ChartData, kind: SpaceKind, deg: usize, w: &[i64]) -> Slice {
    Slice::build(field, chart, kind, deg, &rat(0, 1), w)
}

/// Matrix of d at multidegree w between two slices' ambient bases.
pub(crate) fn d_between(field: Field, src: &Slice, dst: &Slice) -> Matrix {
    wedge_map(field, &src.masks, &dst.masks, &d_coeffs(field, &src.weight))
}

/// Splits a form by (multidegree, form degree).
pub(crate) fn by_slice(chart: &ChartData, form: &MonomialLogForm) -> BTreeMap<(Vec<i64>, usize), MonomialLogForm> {
    let mut out: BTreeMap<(Vec<i64>, usize), MonomialLogForm> = BTreeMap::new();
    for (a, mask, c) in form.terms() {
        let w: Vec<i64> = a.iter().zip(z_part(chart, mask)).map(|(x, z)| x + z).collect();
        let deg = mask.count_ones() as usize;
        let mut piece = MonomialLogForm::zero(form.field(), form.n());
        piece.add_term(a.clone(), mask, c.clone());
        let entry = out
            .entry((w, deg))
            .or_insert_with(|| MonomialLogForm::zero(form.field(), form.n()));
        *entry = entry.add(&piece);
    }
    out
}

/// Whether every slice of `form` lies in Ω^•(log D) or Ω_f^• of the chart.
pub(crate) fn contained(chart: &ChartData, kind: SpaceKind, form: &MonomialLogForm) -> bool {
    let field = form.field();
    by_slice(chart, form).iter().all(|((w, deg), piece)| {
        let s = slice(field, chart, kind, *deg, w);
        match s.coordinates(chart, piece) {
            Some(v) => s.space.contains(&v),
            None => false,
        }
    })
}

/// Whether `form` lies in d(Ω_f^{•−1}), slice by slice.
pub(crate) fn exact_in_kontsevich(chart: &ChartData, form: &MonomialLogForm) -> bool {
    let field = form.field();
    by_slice(chart, form).iter().all(|((w, deg), piece)| {
        if *deg == 0 {
            return false;
        }
        let src = slice(field, chart, SpaceKind::Kontsevich, deg - 1, w);
        let dst = slice(field, chart, SpaceKind::Kontsevich, *deg, w);
        let Some(v) = dst.coordinates(chart, piece) else {
            return false;
        };
        src.space.image_under(&d_between(field, &src, &dst)).contains(&v)
    })
}

fn window_for(chart: &ChartData, window: &Window) -> Result<(), CharpError> {
    if window.dim() != chart.n() {
        return Err(LocalError::WindowShape {
            expected: chart.n(),
            got: window.dim(),
        }
        .into());
    }
    chart.validate()?;
    Ok(())
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct IntersectionSlice {
    pub weight: Vec<i64>,
    /// dim of dΩ^a(log D) ∩ Ω_f^{a+1}
    pub lhs: usize,
    /// dim of dΩ_f^a
    pub rhs: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct IntersectionReport {
    pub p: u64,
    pub chart: ChartData,
    pub a: usize,
    pub reduced: bool,
    pub slices: usize,
    pub failures: Vec<IntersectionSlice>,
    pub passed: bool,
}

/// dΩ^a(log D) ∩ Ω_f^{a+1} = dΩ_f^a over F_p, slice by slice over the window.
pub fn verify_closed_intersection(
    field: Field,
    chart: &ChartData,
    a: usize,
    window: &Window,
    exec: Exec,
) -> Result<IntersectionReport, CharpError> {
    window_for(chart, window)?;
    let p = prime_of(field)?;
    let points = window.points();
    let rows = par::map(exec, &points, |w| {
        let la = slice(field, chart, SpaceKind::Log, a, w);
        let lb = slice(field, chart, SpaceKind::Log, a + 1, w);
        let ka = slice(field, chart, SpaceKind::Kontsevich, a, w);
        let kb = slice(field, chart, SpaceKind::Kontsevich, a + 1, w);
        let d = d_between(field, &la, &lb);
        let exact_log = la.space.image_under(&d);
        let lhs = exact_log.intersection(&kb.space).expect("same ambient");
        let rhs = ka.space.image_under(&d);
        let equal = lhs.dim() == rhs.dim() && lhs.contains_space(&rhs).expect("same ambient");
        (
            equal,
            IntersectionSlice {
                weight: w.clone(),
                lhs: lhs.dim(),
                rhs: rhs.dim(),
            },
        )
    });
    let failures: Vec<IntersectionSlice> = rows.into_iter().filter(|(ok, _)| !ok).map(|(_, s)| s).collect();
    Ok(IntersectionReport {
        p,
        chart: chart.clone(),
        a,
        reduced: chart.is_reduced(),
        slices: points.len(),
        passed: failures.is_empty(),
        failures,
    })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CartierSlice {
    /// Multidegree on X.
    pub weight: Vec<i64>,
    /// dim H^a(Ω_f^•, d) at this multidegree.
    pub h: usize,
    /// dim Ω^a_{X′,f′} at weight/p (0 when weight ∉ pℤⁿ).
    pub source: usize,
    /// Rank of C^{-1} into H^a.
    pub rank: usize,
    /// C̃^{-1} of the source lands in closed forms of Ω_f^a.
    pub closed: bool,
}

impl CartierSlice {
    pub fn bijective(&self) -> bool {
        self.closed && self.rank == self.source && self.rank == self.h
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CartierIsoReport {
    pub p: u64,
    pub chart: ChartData,
    pub a: usize,
    pub reduced: bool,
    pub slices: usize,
    /// Slices with weight in pℤⁿ, where the source is nonzero in general.
    pub frobenius_slices: usize,
    /// (weight, dim H^a) where H^a ≠ 0.
    pub nonzero: Vec<(Vec<i64>, usize)>,
    pub failures: Vec<CartierSlice>,
    pub passed: bool,
}

fn prime_of(field: Field) -> Result<u64, CharpError> {
    match field {
        Field::Prime(p) => Ok(p),
        Field::Rational => Err(CharpError::InvalidAtlas("characteristic-p checks need F_p".into())),
    }
}

/// Per slice of the window on X: C^{-1}: Ω^a_{X′,f′} → H^a(F_*(Ω_f^•, d)) is bijective.
pub fn verify_cartier_iso_omega_f(
    chart: &ChartData,
    a: usize,
    p: u64,
    window: &Window,
    exec: Exec,
) -> Result<CartierIsoReport, CharpError> {
    window_for(chart, window)?;
    let field = Field::prime(p)?;
    let points = window.points();
    let rows = par::map(exec, &points, |w| cartier_slice(field, chart, a, w));
    let frobenius_slices = points
        .iter()
        .filter(|w| w.iter().all(|x| x.rem_euclid(p as i64) == 0))
        .count();
    let nonzero = rows
        .iter()
        .filter(|s| s.h > 0)
        .map(|s| (s.weight.clone(), s.h))
        .collect();
    let failures: Vec<CartierSlice> = rows.into_iter().filter(|s| !s.bijective()).collect();
    Ok(CartierIsoReport {
        nonzero,
        p,
        chart: chart.clone(),
        a,
        reduced: chart.is_reduced(),
        slices: points.len(),
        frobenius_slices,
        passed: failures.is_empty(),
        failures,
    })
}

fn cartier_slice(field: Field, chart: &ChartData, a: usize, w: &[i64]) -> CartierSlice {
    let p = field.characteristic() as i64;
    let ka = slice(field, chart, SpaceKind::Kontsevich, a, w);
    let kb = slice(field, chart, SpaceKind::Kontsevich, a + 1, w);
    let n_a = ka.masks.len();
    let cycles = ka
        .space
        .preimage_within(&d_between(field, &ka, &kb), &Subspace::zero(field, kb.masks.len()));
    let boundaries = if a == 0 {
        Subspace::zero(field, n_a)
    } else {
        let km = slice(field, chart, SpaceKind::Kontsevich, a - 1, w);
        km.space.image_under(&d_between(field, &km, &ka))
    };
    let h = cycles.dim() - boundaries.dim();
    if !w.iter().all(|x| x.rem_euclid(p) == 0) {
        return CartierSlice {
            weight: w.to_vec(),
            h,
            source: 0,
            rank: 0,
            closed: true,
        };
    }
    let w_prime: Vec<i64> = w.iter().map(|x| x / p).collect();
    let src = slice(field, chart, SpaceKind::Kontsevich, a, &w_prime);
    let mut closed = true;
    let mut images: Vec<Vector> = Vec::new();
    for v in src.space.basis() {
        let form = cartier_inverse(chart, &src.form(chart, field, &v));
        match ka.coordinates(chart, &form) {
            Some(c) if cycles.contains(&c) => images.push(c),
            _ => closed = false,
        }
    }
    let mut gens = boundaries.basis();
    gens.extend(images);
    let rank = Subspace::span(field, n_a, &gens).dim() - boundaries.dim();
    CartierSlice {
        weight: w.to_vec(),
        h,
        source: src.space.dim(),
        rank,
        closed,
    }
}

/// Sign of the permutation sorting `idx`, or None on a repeat.
pub(crate) fn sort_sign(idx: &[usize]) -> Option<bool> {
    let mut mask = 0u32;
    let mut neg = false;
    for &i in idx.iter().rev() {
        neg ^= insert_sign(i, mask)?;
        mask |= 1 << i;
    }
    Some(neg)
}
