use num_rational::BigRational;
use serde::{Deserialize, Serialize};

use crate::exactalg::{unit, Field, Matrix, QuotientMap, Scalar, Subspace, Vector};

use super::forms::{insert_sign, subsets, z_part, MonomialLogForm};
use super::{twist_floor, ChartData, LocalError, Window};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum SpaceKind {
    /// Ω^p(log D)([μP])
    Log,
    /// Ω_f^p([μP])
    Kontsevich,
    /// Ω^p(log D)([μP]) / Ω_f^p([μP])
    LogModKontsevich,
    /// Ω^p_{X/S}(log D)([μP])
    Relative,
    /// Ω^p_{X/S}(log D)([μP]) / g·Ω^p_{X/S}(log D)([μP])
    RelativeBar,
    /// The truncated zero space.
    Zero,
}

/// One family of graded pieces over a window of multidegrees.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GradedSheafSpace {
    pub field: Field,
    pub chart: ChartData,
    pub kind: SpaceKind,
    pub p: usize,
    pub mu: BigRational,
    pub window: Window,
}

/// A slice `space / modulo` inside ⋀^p of the allowed logarithmic basis at one
/// multidegree. `masks` lists the basis δ_J of the ambient space; it is empty
/// when the slice is outside the pole and holomorphy bounds.
#[derive(Clone, Debug)]
pub struct Slice {
    pub weight: Vec<i64>,
    pub p: usize,
    pub masks: Vec<u32>,
    pub space: Subspace,
    pub modulo: Subspace,
    pub reps: Vec<Vector>,
}

/// Logarithmic basis elements available at multidegree `w`: every x and y
/// element, and dz_k only when w_k ≥ 1. None when a y or z degree is negative.
pub(crate) fn allowed(chart: &ChartData, w: &[i64]) -> Option<u32> {
    let mut mask = 0u32;
    for (i, &wi) in w.iter().enumerate() {
        if chart.is_x(i) {
            mask |= 1 << i;
        } else if wi < 0 {
            return None;
        } else if !chart.is_z(i) || wi >= 1 {
            mask |= 1 << i;
        }
    }
    Some(mask)
}

/// x-condition w_i + floor_i ≥ 0 for every pole coordinate.
pub(crate) fn pole_ok(w: &[i64], floor: &[i64]) -> bool {
    floor.iter().enumerate().all(|(i, f)| w[i] + f >= 0)
}

pub(crate) fn ambient(chart: &ChartData, w: &[i64], p: usize) -> Vec<u32> {
    match allowed(chart, w) {
        Some(mask) => subsets(mask, p),
        None => Vec::new(),
    }
}

pub(crate) fn shifted(w: &[i64], shift: &[i64], times: i64) -> Vec<i64> {
    w.iter().zip(shift).map(|(a, s)| a - times * s).collect()
}

/// δ_J ↦ Σ_i c_i·δ_i ∧ δ_J from span(src) to span(dst); an empty `dst` is the zero space.
pub(crate) fn wedge_map(field: Field, src: &[u32], dst: &[u32], coeffs: &[Scalar]) -> Matrix {
    let mut trip = Vec::new();
    if dst.is_empty() {
        return Matrix::zeros(field, 0, src.len());
    }
    for (col, &mask) in src.iter().enumerate() {
        for (i, c) in coeffs.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let Some(neg) = insert_sign(i, mask) else { continue };
            let target = mask | (1 << i);
            let row = dst.binary_search(&target).expect("target basis element is allowed");
            trip.push((row, col, if neg { -c.clone() } else { c.clone() }));
        }
    }
    Matrix::from_triplets(field, dst.len(), src.len(), trip)
}

/// Coefficients of (Σ w_i δ_i)∧, the action of d at multidegree w.
pub(crate) fn d_coeffs(field: Field, w: &[i64]) -> Vec<Scalar> {
    w.iter().map(|&x| field.int(x)).collect()
}

/// Coefficients of η = Σ e_i δ_i = dg/g.
pub(crate) fn eta_coeffs(field: Field, chart: &ChartData) -> Vec<Scalar> {
    chart.shift().iter().map(|&x| field.int(x)).collect()
}

/// Coefficients of df∧ = −x^{-e}·η∧ (the monomial shift is implicit).
pub(crate) fn df_coeffs(field: Field, chart: &ChartData) -> Vec<Scalar> {
    chart.shift().iter().map(|&x| field.int(-x)).collect()
}

/// η ∧ ⋀^{p-1} at multidegree w, as a subspace of the degree-p ambient.
pub(crate) fn eta_image(field: Field, chart: &ChartData, w: &[i64], p: usize, amb: &[u32]) -> Subspace {
    if p == 0 {
        return Subspace::zero(field, amb.len());
    }
    let lower = ambient(chart, w, p - 1);
    let m = wedge_map(field, &lower, amb, &eta_coeffs(field, chart));
    Subspace::span(field, amb.len(), &m.image_basis())
}

/// Ω_f^p([μP]) at w from the two generator families η∧⋀^{p-1} and g·⋀^p.
pub(crate) fn kontsevich_generators(field: Field, chart: &ChartData, w: &[i64], p: usize, floor: &[i64]) -> Subspace {
    let amb = ambient(chart, w, p);
    if !pole_ok(w, floor) {
        return Subspace::zero(field, 0);
    }
    let mut gens: Vec<Vector> = eta_image(field, chart, w, p, &amb).basis();
    if pole_ok(&shifted(w, &chart.shift(), 1), floor) {
        gens.extend((0..amb.len()).map(|i| unit(field, amb.len(), i)));
    }
    Subspace::span(field, amb.len(), &gens)
}

/// Ω_f^p([μP]) at w as the kernel of df∧ into Ω^{p+1}([(μ+1)P])/Ω^{p+1}([μP]).
pub fn kontsevich_by_kernel(field: Field, chart: &ChartData, w: &[i64], p: usize, mu: &BigRational) -> Subspace {
    let floor = twist_floor(chart, mu);
    let amb = ambient(chart, w, p);
    if !pole_ok(w, &floor) {
        return Subspace::zero(field, 0);
    }
    let target_w = shifted(w, &chart.shift(), 1);
    let target = ambient(chart, &target_w, p + 1);
    let df = wedge_map(field, &amb, &target, &df_coeffs(field, chart));
    let sub = if pole_ok(&target_w, &floor) {
        Subspace::full(field, target.len())
    } else {
        Subspace::zero(field, target.len())
    };
    let q = QuotientMap::new(&sub);
    let cols: Vec<Vector> = (0..amb.len())
        .map(|c| q.apply(&df.apply(&unit(field, amb.len(), c))))
        .collect();
    let composite = Matrix::from_columns(field, q.dim(), &cols);
    Subspace::span(field, amb.len(), &composite.kernel_basis())
}

impl Slice {
    pub(crate) fn build(
        field: Field,
        chart: &ChartData,
        kind: SpaceKind,
        p: usize,
        mu: &BigRational,
        w: &[i64],
    ) -> Slice {
        let floor = twist_floor(chart, mu);
        let valid = kind != SpaceKind::Zero && pole_ok(w, &floor);
        let masks = if valid { ambient(chart, w, p) } else { Vec::new() };
        let n = masks.len();
        let full = Subspace::full(field, n);
        let zero = Subspace::zero(field, n);
        let deep = pole_ok(&shifted(w, &chart.shift(), 1), &floor);
        let relative_reps = || -> Vec<Vector> {
            // eliminate δ_1 through Σ e_i δ_i = 0
            (0..n)
                .filter(|&i| masks[i] & 1 == 0)
                .map(|i| unit(field, n, i))
                .collect()
        };
        let (space, modulo, reps) = match kind {
            SpaceKind::Zero => (zero.clone(), zero, Vec::new()),
            SpaceKind::Log => (full.clone(), zero, full.basis()),
            SpaceKind::Kontsevich => {
                let s = if valid {
                    kontsevich_generators(field, chart, w, p, &floor)
                } else {
                    zero.clone()
                };
                let b = s.basis();
                (s, zero, b)
            }
            SpaceKind::LogModKontsevich => {
                let s = if valid {
                    kontsevich_generators(field, chart, w, p, &floor)
                } else {
                    zero.clone()
                };
                let reps = full.complement_of(&s).expect("same ambient");
                (full, s, reps)
            }
            SpaceKind::Relative => {
                let m = eta_image(field, chart, w, p, &masks);
                (full, m, relative_reps())
            }
            SpaceKind::RelativeBar => {
                if deep {
                    (full.clone(), full, Vec::new())
                } else {
                    let m = eta_image(field, chart, w, p, &masks);
                    (full, m, relative_reps())
                }
            }
        };
        Slice {
            weight: w.to_vec(),
            p,
            masks,
            space,
            modulo,
            reps,
        }
    }

    pub fn dim(&self) -> usize {
        self.space.dim() - self.modulo.dim()
    }

    pub fn ambient_dim(&self) -> usize {
        self.masks.len()
    }

    /// The form with coordinates `v` in the ambient basis.
    pub fn form(&self, chart: &ChartData, field: Field, v: &[Scalar]) -> MonomialLogForm {
        let mut f = MonomialLogForm::zero(field, chart.n());
        for (mask, c) in self.masks.iter().zip(v) {
            let exp: Vec<i64> = self
                .weight
                .iter()
                .zip(z_part(chart, *mask))
                .map(|(a, z)| a - z)
                .collect();
            f.add_term(exp, *mask, c.clone());
        }
        f
    }

    /// Ambient coordinates of a form, or None if it has terms outside this slice.
    pub fn coordinates(&self, chart: &ChartData, form: &MonomialLogForm) -> Option<Vector> {
        let field = form.field();
        let mut v = vec![field.zero(); self.masks.len()];
        for (a, mask, c) in form.terms() {
            let w: Vec<i64> = a.iter().zip(z_part(chart, mask)).map(|(x, z)| x + z).collect();
            if w != self.weight || mask.count_ones() as usize != self.p {
                return None;
            }
            let i = self.masks.binary_search(&mask).ok()?;
            v[i] = c.clone();
        }
        Some(v)
    }
}

impl GradedSheafSpace {
    pub fn new(
        field: Field,
        chart: ChartData,
        kind: SpaceKind,
        p: usize,
        mu: BigRational,
        window: Window,
    ) -> Result<GradedSheafSpace, LocalError> {
        chart.validate()?;
        window.check(&chart)?;
        if matches!(kind, SpaceKind::Relative | SpaceKind::RelativeBar) && chart.ell == 0 {
            return Err(LocalError::NoPoles);
        }
        Ok(GradedSheafSpace {
            field,
            chart,
            kind,
            p,
            mu,
            window,
        })
    }

    pub fn slice(&self, a: &[i64]) -> Result<Slice, LocalError> {
        if !self.window.contains(a) {
            return Err(LocalError::OutsideWindow(a.to_vec()));
        }
        Ok(Slice::build(self.field, &self.chart, self.kind, self.p, &self.mu, a))
    }

    /// Basis of the slice at multidegree `a` (representatives for quotients).
    pub fn basis_of(&self, a: &[i64]) -> Result<Vec<MonomialLogForm>, LocalError> {
        let s = self.slice(a)?;
        Ok(s.reps.iter().map(|v| s.form(&self.chart, self.field, v)).collect())
    }

    pub fn dim_at(&self, a: &[i64]) -> Result<usize, LocalError> {
        Ok(self.slice(a)?.dim())
    }

    /// (multidegree, dim) over the window, nonzero slices only.
    pub fn dimension_table(&self) -> Vec<(Vec<i64>, usize)> {
        self.window
            .points()
            .into_iter()
            .filter_map(|a| {
                let d = Slice::build(self.field, &self.chart, self.kind, self.p, &self.mu, &a).dim();
                (d > 0).then_some((a, d))
            })
            .collect()
    }
}
