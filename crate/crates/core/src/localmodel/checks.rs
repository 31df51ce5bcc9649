use num_rational::BigRational;
use num_traits::{Signed, Zero};
use serde::Serialize;

use crate::exactalg::{Field, Matrix, QuotientMap, Scalar, Subspace, Vector};
use crate::filtcx::CochainComplex;
use crate::par::{self, Exec};

use super::slices::{ambient, d_coeffs, df_coeffs, eta_coeffs, pole_ok, shifted, wedge_map, Slice};
use super::{twist_floor, twist_floor_below, ChartData, GradedSheafSpace, LocalError, SpaceKind, Window};

/// F^{Yu,λ} in degree k: Ω^k(log D)([(k−λ)P]) when k−λ ≥ 0, the zero space otherwise.
pub fn fyu_step(
    field: Field,
    chart: &ChartData,
    lambda: &BigRational,
    k: usize,
    window: Window,
) -> Result<GradedSheafSpace, LocalError> {
    let mu = BigRational::from_integer((k as i64).into()) - lambda;
    let kind = if mu.is_negative() {
        SpaceKind::Zero
    } else {
        SpaceKind::Log
    };
    GradedSheafSpace::new(field, chart.clone(), kind, k, mu, window)
}

/// A finite complex supported on the multidegrees base − (k − start)·e, k ≥ start.
#[derive(Clone, Debug)]
pub struct SliceChain {
    pub base: Vec<i64>,
    pub start: usize,
    pub complex: CochainComplex,
    /// Components of the differential that leave the chain and survive in the target.
    pub leaks: usize,
}

impl SliceChain {
    pub fn cohomology(&self) -> Vec<usize> {
        self.complex.cohomology_dims()
    }

    pub fn weight(&self, chart: &ChartData, k: usize) -> Vec<i64> {
        shifted(&self.base, &chart.shift(), (k - self.start) as i64)
    }
}

/// Which term is nonzero: every term is either the whole ambient slice or zero.
type Presence<'a> = dyn Fn(usize, &[i64]) -> bool + Sync + 'a;

/// Chain whose differential is induced by u·d + v·df∧ on terms that are all-or-nothing
/// quotients; with `kill_e` the df∧ part is computed with e replaced by 0.
fn build_chain(
    field: Field,
    chart: &ChartData,
    base: &[i64],
    start: usize,
    present: &Presence<'_>,
    (u, v): (&Scalar, &Scalar),
    kill_e: bool,
) -> SliceChain {
    let n = chart.n();
    let shift = chart.shift();
    let weights: Vec<Vec<i64>> = (start..=n).map(|k| shifted(base, &shift, (k - start) as i64)).collect();
    let masks: Vec<Vec<u32>> = (start..=n)
        .zip(&weights)
        .map(|(k, w)| {
            if present(k, w) {
                ambient(chart, w, k)
            } else {
                Vec::new()
            }
        })
        .collect();
    let df = if kill_e {
        vec![field.zero(); n]
    } else {
        df_coeffs(field, chart)
    };
    let mut diffs = Vec::new();
    let mut leaks = 0;
    for j in 0..masks.len().saturating_sub(1) {
        let k = start + j;
        let m = wedge_map(field, &masks[j], &masks[j + 1], &df);
        diffs.push(if v.is_zero() {
            Matrix::zeros(field, masks[j + 1].len(), masks[j].len())
        } else {
            scale(&m, v)
        });
        if !u.is_zero() && !masks[j].is_empty() && present(k + 1, &weights[j]) {
            let target = ambient(chart, &weights[j], k + 1);
            let d = wedge_map(field, &masks[j], &target, &d_coeffs(field, &weights[j]));
            leaks += d.nnz();
        }
    }
    let dims = masks.iter().map(Vec::len).collect();
    let complex = CochainComplex::new(field, start as i32, dims, diffs).expect("η∧η = 0");
    SliceChain {
        base: base.to_vec(),
        start,
        complex,
        leaks,
    }
}

fn scale(m: &Matrix, s: &Scalar) -> Matrix {
    let rows = m
        .sparse_rows()
        .into_iter()
        .map(|r| r.into_iter().map(|(c, x)| (c, &x * s)).collect())
        .collect();
    Matrix::from_sparse_rows(m.field(), m.cols(), rows)
}

fn binomial(n: usize, k: usize) -> usize {
    if k > n {
        return 0;
    }
    (0..k).fold(1usize, |acc, i| acc * (n - i) / (i + 1))
}

fn gr_presence(chart: &ChartData, lambda: &BigRational) -> impl Fn(usize, &[i64]) -> bool + Sync {
    let n = chart.n();
    let tops: Vec<Option<Vec<i64>>> = (0..=n)
        .map(|k| {
            let c = BigRational::from_integer((k as i64).into()) - lambda;
            (!c.is_negative()).then(|| twist_floor(chart, &c))
        })
        .collect();
    let bottoms: Vec<Option<Vec<i64>>> = (0..=n)
        .map(|k| {
            let c = BigRational::from_integer((k as i64).into()) - lambda;
            c.is_positive().then(|| twist_floor_below(chart, &c))
        })
        .collect();
    move |k: usize, w: &[i64]| {
        let top = tops[k].as_ref().is_some_and(|f| pole_ok(w, f));
        let bottom = bottoms[k].as_ref().is_some_and(|f| pole_ok(w, f));
        top && !bottom
    }
}

#[derive(Clone, Debug)]
pub struct GrReport {
    pub lambda: BigRational,
    /// One chain per multidegree of the degree-0 term.
    pub chains: Vec<SliceChain>,
    /// Window points times degrees.
    pub requested_slices: usize,
    /// Distinct (degree, multidegree) pairs after shifting the window by −k·e.
    pub assembled_slices: usize,
    /// Total cohomology per degree.
    pub cohomology: Vec<usize>,
    /// Chains with nonzero cohomology: (base multidegree, dims).
    pub nonzero: Vec<(Vec<i64>, Vec<usize>)>,
    /// Every nonzero cohomology class is killed by a power of g = x^e.
    pub supported_on_poles: bool,
    pub leaks: usize,
}

impl GrReport {
    pub fn is_acyclic(&self) -> bool {
        self.nonzero.is_empty()
    }

    /// The direct sum of all chains.
    pub fn total(&self) -> CochainComplex {
        let mut it = self.chains.iter();
        let first = it.next().expect("nonempty window").complex.clone();
        it.fold(first, |acc, c| acc.direct_sum(&c.complex))
    }
}

fn chain_cycles_die(field: Field, src: &SliceChain, dst: &SliceChain) -> bool {
    let c = &src.complex;
    c.degrees().all(|k| {
        let cyc = c.cycles(k);
        if cyc.dim() == 0 || dst.complex.dim(k) == 0 {
            return true;
        }
        // g^J is the identity on coordinates when both terms are present
        let bd = dst.complex.boundaries(k);
        let image = Subspace::span(field, dst.complex.dim(k), &cyc.basis());
        bd.contains_space(&image).expect("same ambient")
    })
}

/// gr^λ of the Yu filtration with its graded differential, chain by chain.
pub fn gr_complex(
    field: Field,
    chart: &ChartData,
    lambda: &BigRational,
    window: &Window,
    exec: Exec,
) -> Result<GrReport, LocalError> {
    chart.validate()?;
    window.check(chart)?;
    let n = chart.n();
    let present = gr_presence(chart, lambda);
    let one = field.one();
    let bases = window.points();
    let built: Vec<(SliceChain, Option<usize>)> = par::map(exec, &bases, |b| {
        let ch = build_chain(field, chart, b, 0, &present, (&one, &one), false);
        let dims = ch.cohomology();
        let torsion = if dims.iter().all(|&d| d == 0) {
            Some(0)
        } else if chart.ell == 0 {
            None
        } else {
            (1..=3i64)
                .find(|&j| {
                    let up = shifted(b, &chart.shift(), -j);
                    let target = build_chain(field, chart, &up, 0, &present, (&one, &one), false);
                    chain_cycles_die(field, &ch, &target)
                })
                .map(|j| j as usize)
        };
        (ch, torsion)
    });
    let mut cohomology = vec![0usize; n + 1];
    let mut nonzero = Vec::new();
    let mut supported = true;
    let mut leaks = 0;
    for (ch, t) in &built {
        let dims = ch.cohomology();
        for (k, d) in dims.iter().enumerate() {
            cohomology[k] += d;
        }
        if dims.iter().any(|&d| d > 0) {
            nonzero.push((ch.base.clone(), dims));
        }
        supported &= t.is_some();
        leaks += ch.leaks;
    }
    let mut assembled = std::collections::BTreeSet::new();
    for b in &bases {
        for k in 0..=n {
            assembled.insert((k, shifted(b, &chart.shift(), k as i64)));
        }
    }
    Ok(GrReport {
        lambda: lambda.clone(),
        chains: built.into_iter().map(|(c, _)| c).collect(),
        requested_slices: bases.len() * (n + 1),
        assembled_slices: assembled.len(),
        cohomology,
        nonzero,
        supported_on_poles: supported,
        leaks,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum RowDifferential {
    Nabla,
    Df,
    /// df∧ computed with e replaced by 0: a control that must fail.
    SabotagedDf,
}

#[derive(Clone, Debug, Serialize)]
pub struct RowReport {
    pub differential: RowDifferential,
    pub chains: usize,
    pub requested_slices: usize,
    pub assembled_slices: usize,
    /// (base multidegree, degree, dimension) of cohomology in degrees > p.
    pub higher_cohomology: Vec<(Vec<i64>, usize, usize)>,
    /// Bases where H^p of the row differs from the Ω_f^p slice.
    pub hp_mismatches: Vec<Vec<i64>>,
    pub leaks: usize,
    pub passed: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct KontLogReport {
    pub chart: ChartData,
    pub mu: String,
    pub p: usize,
    pub nabla: RowReport,
    pub df: RowReport,
    pub passed: bool,
}

/// The row Ω^p([μP]) → Ω^{p+1}([(μ+1)P])/Ω^{p+1}([μP]) → … must have no
/// cohomology above degree p, and H^p must be Ω_f^p([μP]).
pub fn verify_kont_log_with(
    field: Field,
    chart: &ChartData,
    mu: &BigRational,
    p: usize,
    window: &Window,
    differential: RowDifferential,
    exec: Exec,
) -> Result<RowReport, LocalError> {
    chart.validate()?;
    window.check(chart)?;
    let n = chart.n();
    let floors: Vec<Vec<i64>> = (0..=n)
        .map(|j| twist_floor(chart, &(mu + BigRational::from_integer((j as i64).into()))))
        .collect();
    let present = |k: usize, w: &[i64]| -> bool {
        if k < p {
            return false;
        }
        let j = k - p;
        pole_ok(w, &floors[j]) && (j == 0 || !pole_ok(w, &floors[j - 1]))
    };
    let (u, v) = match differential {
        RowDifferential::Nabla => (field.one(), field.one()),
        RowDifferential::Df | RowDifferential::SabotagedDf => (field.zero(), field.one()),
    };
    let kill = differential == RowDifferential::SabotagedDf;
    let bases = window.points();
    let results: Vec<(Vec<i64>, Vec<usize>, usize, usize)> = par::map(exec, &bases, |b| {
        if p > n {
            return (b.clone(), Vec::new(), 0, 0);
        }
        let ch = build_chain(field, chart, b, p, &present, (&u, &v), kill);
        let kont = Slice::build(field, chart, SpaceKind::Kontsevich, p, mu, b).dim();
        (b.clone(), ch.cohomology(), kont, ch.leaks)
    });
    let mut higher = Vec::new();
    let mut mismatches = Vec::new();
    let mut leaks = 0;
    for (b, dims, kont, l) in &results {
        leaks += l;
        for (j, &d) in dims.iter().enumerate() {
            if j > 0 && d > 0 {
                higher.push((b.clone(), p + j, d));
            }
        }
        if dims.first().copied().unwrap_or(0) != *kont {
            mismatches.push(b.clone());
        }
    }
    let mut assembled = std::collections::BTreeSet::new();
    for b in &bases {
        for k in p..=n {
            assembled.insert((k, shifted(b, &chart.shift(), (k - p) as i64)));
        }
    }
    let passed = higher.is_empty() && mismatches.is_empty() && leaks == 0;
    Ok(RowReport {
        differential,
        chains: bases.len(),
        requested_slices: bases.len() * (n + 1).saturating_sub(p),
        assembled_slices: assembled.len(),
        higher_cohomology: higher,
        hp_mismatches: mismatches,
        leaks,
        passed,
    })
}

pub fn verify_kont_log(
    field: Field,
    chart: &ChartData,
    mu: &BigRational,
    p: usize,
    window: &Window,
    exec: Exec,
) -> Result<KontLogReport, LocalError> {
    let nabla = verify_kont_log_with(field, chart, mu, p, window, RowDifferential::Nabla, exec)?;
    let df = verify_kont_log_with(field, chart, mu, p, window, RowDifferential::Df, exec)?;
    let passed = nabla.passed && df.passed;
    Ok(KontLogReport {
        chart: chart.clone(),
        mu: mu.to_string(),
        p,
        nabla,
        df,
        passed,
    })
}

/// Ω^p_{X/S}(log D) with its quotient map from Ω^p(log D).
#[derive(Clone, Debug)]
pub struct RelativeComplex {
    pub space: GradedSheafSpace,
}

pub fn relative_log_complex(
    field: Field,
    chart: &ChartData,
    p: usize,
    window: Window,
) -> Result<RelativeComplex, LocalError> {
    let space = GradedSheafSpace::new(
        field,
        chart.clone(),
        SpaceKind::Relative,
        p,
        BigRational::zero(),
        window,
    )?;
    Ok(RelativeComplex { space })
}

impl RelativeComplex {
    /// Matrix of the projection Ω^p(log D) → Ω^p_{X/S}(log D) at `a`, in the
    /// representative basis of the target.
    pub fn quotient_map(&self, a: &[i64]) -> Result<(Slice, Matrix), LocalError> {
        let s = self.space.slice(a)?;
        let field = self.space.field;
        let n = s.ambient_dim();
        let cols: Vec<Vector> = (0..n)
            .map(|i| {
                Subspace::coordinates_mod(&s.reps, &s.modulo, &crate::exactalg::unit(field, n, i))
                    .expect("representatives span the quotient")
            })
            .collect();
        let m = Matrix::from_columns(field, s.reps.len(), &cols);
        Ok((s, m))
    }

    /// (dg/g)∧ from degree p−1 followed by the projection, at `a`.
    pub fn composite(&self, a: &[i64]) -> Result<Matrix, LocalError> {
        let (s, q) = self.quotient_map(a)?;
        let field = self.space.field;
        let chart = &self.space.chart;
        if self.space.p == 0 || s.masks.is_empty() {
            return Ok(Matrix::zeros(field, q.rows(), 0));
        }
        let lower = ambient(chart, a, self.space.p - 1);
        let eta = wedge_map(field, &lower, &s.masks, &eta_coeffs(field, chart));
        Ok(q.mul(&eta).expect("shapes agree"))
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct C1SliceFailure {
    pub weight: Vec<i64>,
    pub degree: usize,
    pub check: String,
}

#[derive(Clone, Debug, Serialize)]
pub struct C1Report {
    pub chart: ChartData,
    pub slices: usize,
    pub exact: bool,
    pub chain_maps: bool,
    pub acyclic: bool,
    /// Exactness of every σ^{≥p} truncation; degreewise exactness of the
    /// stupid truncations is the same data as degreewise exactness.
    pub filtered: bool,
    pub failures: Vec<C1SliceFailure>,
    pub passed: bool,
}

fn c1_slice(field: Field, chart: &ChartData, w: &[i64]) -> Vec<C1SliceFailure> {
    let n = chart.n();
    let zero = BigRational::zero();
    let mut fails = Vec::new();
    let mut fail = |k: usize, s: &str| {
        fails.push(C1SliceFailure {
            weight: w.to_vec(),
            degree: k,
            check: s.to_string(),
        })
    };
    let subs: Vec<Slice> = (0..=n)
        .map(|k| Slice::build(field, chart, SpaceKind::Kontsevich, k, &zero, w))
        .collect();
    let bars: Vec<Slice> = (0..=n)
        .map(|k| Slice::build(field, chart, SpaceKind::RelativeBar, k, &zero, w))
        .collect();
    let floor0 = twist_floor(chart, &zero);
    let valid = pole_ok(w, &floor0);
    let deep = pole_ok(&shifted(w, &chart.shift(), 1), &floor0);
    for k in 0..=n {
        let amb = subs[k].masks.len();
        if bars[k].masks.len() != amb {
            fail(k, "ambient");
            continue;
        }
        let incl = Matrix::from_columns(field, amb, &subs[k].space.basis());
        if incl.rank() != subs[k].dim() {
            fail(k, "inclusion not injective");
        }
        let q = QuotientMap::new(&bars[k].modulo);
        let cols: Vec<Vector> = (0..amb)
            .map(|i| q.apply(&crate::exactalg::unit(field, amb, i)))
            .collect();
        let rho = Matrix::from_columns(field, q.dim(), &cols);
        if rho.rank() != bars[k].dim() {
            fail(k, "projection not surjective");
        }
        let ker = Subspace::span(field, amb, &rho.kernel_basis());
        let im = Subspace::span(field, amb, &incl.image_basis());
        if ker != im {
            fail(k, "image differs from kernel");
        }
        if k < n {
            let d = wedge_map(field, &subs[k].masks, &subs[k + 1].masks, &d_coeffs(field, w));
            if !subs[k + 1]
                .space
                .contains_space(&subs[k].space.image_under(&d))
                .unwrap_or(false)
            {
                fail(k, "d does not preserve the subcomplex");
            }
            if !bars[k + 1]
                .modulo
                .contains_space(&bars[k].modulo.image_under(&d))
                .unwrap_or(false)
            {
                fail(k, "d does not descend to the quotient");
            }
        }
    }
    // (Ω(log D)/g·Ω(log D), dg/g∧) at this multidegree
    let masks: Vec<Vec<u32>> = (0..=n)
        .map(|k| {
            if valid && !deep {
                ambient(chart, w, k)
            } else {
                Vec::new()
            }
        })
        .collect();
    let eta = eta_coeffs(field, chart);
    let diffs: Vec<Matrix> = (0..n)
        .map(|k| wedge_map(field, &masks[k], &masks[k + 1], &eta))
        .collect();
    let kos = CochainComplex::new(field, 0, masks.iter().map(Vec::len).collect(), diffs).expect("η∧η = 0");
    for k in kos.degrees() {
        if kos.cohomology_dim(k) != 0 {
            fail(k as usize, "quotient by g is not acyclic under dg/g");
        }
    }
    fails
}

/// 0 → Ω_f → Ω(log D) → Ω̄_{X/S}(log D) → 0 slice by slice, with the
/// acyclicity of (Ω(log D)/g·Ω(log D), dg/g∧).
pub fn verify_c1_sequence(
    field: Field,
    chart: &ChartData,
    window: &Window,
    exec: Exec,
) -> Result<C1Report, LocalError> {
    chart.validate()?;
    window.check(chart)?;
    let pts = window.points();
    let failures: Vec<C1SliceFailure> = par::map(exec, &pts, |w| c1_slice(field, chart, w))
        .into_iter()
        .flatten()
        .collect();
    let has = |pred: &dyn Fn(&str) -> bool| failures.iter().any(|f| pred(&f.check));
    let acyclic = !has(&|s| s.starts_with("quotient by g"));
    let chain_maps = !has(&|s| s.starts_with("d does"));
    let exact = !has(&|s| !s.starts_with("quotient by g") && !s.starts_with("d does"));
    Ok(C1Report {
        chart: chart.clone(),
        slices: pts.len(),
        exact,
        chain_maps,
        acyclic,
        filtered: exact && chain_maps,
        passed: failures.is_empty(),
        failures,
    })
}

#[derive(Clone, Debug)]
pub struct QuotientLemmaReport {
    pub p: usize,
    pub computed: usize,
    pub formula: usize,
    /// Multidegrees carrying cohomology.
    pub support: Vec<Vec<i64>>,
    /// Representatives at multidegree 0.
    pub basis: Vec<super::MonomialLogForm>,
    pub passed: bool,
}

/// H^p(Ω(log D)/Ω_f, d) over the window against the constant-slice formula
/// dim ⋀^p⟨δ_x, δ_y⟩/(Σδ_x)∧⋀^{p−1} = C(ℓ+m−1, p).
pub fn quotient_cohomology_lemma(
    field: Field,
    chart: &ChartData,
    p: usize,
    window: &Window,
    exec: Exec,
) -> Result<QuotientLemmaReport, LocalError> {
    chart.validate()?;
    window.check(chart)?;
    if chart.ell == 0 {
        return Err(LocalError::NoPoles);
    }
    if !chart.is_reduced() {
        return Err(LocalError::NotReduced(chart.e.clone()));
    }
    let n = chart.n();
    let zero = BigRational::zero();
    let pts = window.points();
    let per: Vec<(Vec<i64>, usize, Vec<super::MonomialLogForm>)> = par::map(exec, &pts, |w| {
        let slices: Vec<Slice> = (0..=n)
            .map(|k| Slice::build(field, chart, SpaceKind::LogModKontsevich, k, &zero, w))
            .collect();
        let qs: Vec<QuotientMap> = slices.iter().map(|s| QuotientMap::new(&s.modulo)).collect();
        let diffs: Vec<Matrix> = (0..n)
            .map(|k| {
                let d = wedge_map(field, &slices[k].masks, &slices[k + 1].masks, &d_coeffs(field, w));
                QuotientMap::induced(&d, &qs[k], &qs[k + 1]).expect("Ω_f is a subcomplex")
            })
            .collect();
        let cx = CochainComplex::new(field, 0, qs.iter().map(QuotientMap::dim).collect(), diffs).expect("d∘d = 0");
        let h = if p <= n { cx.cohomology_dim(p as i32) } else { 0 };
        let basis = if p <= n && w.iter().all(|&x| x == 0) {
            let s = &slices[p];
            s.reps.iter().map(|v| s.form(chart, field, v)).collect()
        } else {
            Vec::new()
        };
        (w.clone(), h, basis)
    });
    let computed = per.iter().map(|(_, h, _)| h).sum();
    let support: Vec<Vec<i64>> = per
        .iter()
        .filter(|(_, h, _)| *h > 0)
        .map(|(w, _, _)| w.clone())
        .collect();
    let basis = per.into_iter().flat_map(|(_, _, b)| b).collect();
    let formula = binomial(chart.ell + chart.m - 1, p);
    let at_origin = support.iter().all(|w| w.iter().all(|&x| x == 0));
    Ok(QuotientLemmaReport {
        p,
        computed,
        formula,
        passed: computed == formula && at_origin,
        support,
        basis,
    })
}
