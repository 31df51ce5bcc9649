use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use serde::Serialize;

use crate::exactalg::{Field, Scalar};
use crate::filtcx::FilteredCochainComplex;
use crate::par::{self, Exec};

use super::cech::{line_bundle_complex, CechModel, Geometry, LineSheaf};
use super::oracle::direct_de_rham_oracle_with;
use super::{P1Error, P1Problem};

/// The (u, v) sample set used by default.
pub const STANDARD_UV: [(i64, i64); 5] = [(1, 1), (1, 0), (0, 1), (0, 0), (2, 3)];

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct P1Options {
    pub field: Field,
    /// Overrides the default N = 4·(Σe_i + |H| + 4).
    pub truncation: Option<i64>,
    pub delta: i64,
    /// Overrides the automatic choice of the point c removed from U1.
    pub center: Option<i64>,
    pub exec: Exec,
}

impl Default for P1Options {
    fn default() -> Self {
        P1Options {
            field: Field::Rational,
            truncation: None,
            delta: 5,
            center: None,
            exec: Exec::default(),
        }
    }
}

impl P1Options {
    pub fn windows(&self, problem: &P1Problem) -> (i64, i64) {
        let n = self.truncation.unwrap_or_else(|| problem.default_truncation());
        (n, n + self.delta)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct StabilizationCertificate {
    pub n: i64,
    pub n_plus: i64,
    pub dims_n: Vec<usize>,
    pub dims_n_plus: Vec<usize>,
}

/// Runs `compute` at both windows; the dims it returns must agree.
fn stabilized<T>(
    opts: &P1Options,
    problem: &P1Problem,
    compute: impl Fn(i64) -> Result<(Vec<usize>, T), P1Error>,
) -> Result<(T, StabilizationCertificate), P1Error> {
    let (n, n_plus) = opts.windows(problem);
    let (dims_n, _) = compute(n)?;
    let (dims_n_plus, value) = compute(n_plus)?;
    if dims_n != dims_n_plus {
        return Err(P1Error::NotStabilized {
            n,
            n_plus,
            dims_n,
            dims_n_plus,
        });
    }
    Ok((
        value,
        StabilizationCertificate {
            n,
            n_plus,
            dims_n,
            dims_n_plus,
        },
    ))
}

fn scalar(field: Field, q: &BigRational) -> Result<Scalar, P1Error> {
    field
        .from_rational(q)
        .ok_or_else(|| P1Error::FieldReduction(format!("{q} has no image in {field:?}")))
}

fn q(n: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(n))
}

fn check_alpha(alpha: &BigRational) -> Result<(), P1Error> {
    if *alpha < BigRational::zero() || *alpha >= BigRational::one() {
        return Err(P1Error::AlphaOutOfRange(alpha.to_string()));
    }
    Ok(())
}

/// {j + r/e_i : 0 ≤ r < e_i} ∩ [lo, hi], sorted.
pub fn jump_grid(problem: &P1Problem, lo: &BigRational, hi: &BigRational) -> Vec<BigRational> {
    let mut out = Vec::new();
    let start = lo.floor().to_integer();
    let end = hi.ceil().to_integer();
    let mut es = problem.multiplicities();
    if es.is_empty() {
        es.push(1);
    }
    let mut j = start;
    while j <= end {
        for &e in &es {
            for r in 0..e {
                let x = BigRational::from_integer(j.clone()) + BigRational::new(r.into(), e.into());
                if &x >= lo && &x <= hi && !out.contains(&x) {
                    out.push(x);
                }
            }
        }
        j += 1;
    }
    out.sort();
    out
}

/// {0} ∪ {r/e_i} ⊂ [0, 1).
pub(crate) fn alpha_grid(problem: &P1Problem) -> Vec<BigRational> {
    let mut g = jump_grid(problem, &q(0), &q(1));
    g.retain(|x| *x < BigRational::one());
    g
}

/// (h⁰, h¹) of O(d) on P¹.
pub fn line_bundle_h(d: i64) -> (usize, usize) {
    ((d + 1).max(0) as usize, (-d - 1).max(0) as usize)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct HypercohResult {
    pub alpha: String,
    pub u: String,
    pub v: String,
    pub dims: Vec<usize>,
    pub euler: i64,
    pub certificate: StabilizationCertificate,
}

/// dims of H^k(P¹, (Ω_f^•([αP]), u·d + v·df)) for k = 0, 1, 2.
pub fn hypercoh_dims_with(
    problem: &P1Problem,
    alpha: &BigRational,
    uv: &(BigRational, BigRational),
    opts: &P1Options,
) -> Result<HypercohResult, P1Error> {
    let geom = Geometry::new(problem, opts.field, opts.center)?;
    let u = scalar(opts.field, &uv.0)?;
    let v = scalar(opts.field, &uv.1)?;
    let (dims, cert) = stabilized(opts, problem, |n| {
        let model = CechModel::new(geom.clone(), geom.kontsevich0(alpha), geom.kontsevich1(alpha), n)?;
        let d = model.total_complex(&u, &v)?.cohomology_dims();
        Ok((d.clone(), d))
    })?;
    let euler = dims[0] as i64 - dims[1] as i64 + dims[2] as i64;
    Ok(HypercohResult {
        alpha: alpha.to_string(),
        u: uv.0.to_string(),
        v: uv.1.to_string(),
        dims,
        euler,
        certificate: cert,
    })
}

pub fn hypercoh_dims(
    problem: &P1Problem,
    alpha: &BigRational,
    uv: &(BigRational, BigRational),
) -> Result<HypercohResult, P1Error> {
    hypercoh_dims_with(problem, alpha, uv, &P1Options::default())
}

/// The Kontsevich complex Ω_f^0([αP]) → Ω_f^1([αP]) in the Čech model with
/// its stupid filtration.
#[derive(Clone, Debug)]
pub struct KontsevichComplex {
    pub alpha: BigRational,
    pub model: CechModel,
    pub filtered: FilteredCochainComplex,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct LineBundleTerm {
    pub p: usize,
    pub q: usize,
    /// Ω_f^p([αP]) ≅ O(degree).
    pub degree: i64,
    pub cech: usize,
    pub formula: usize,
}

impl KontsevichComplex {
    /// Line-bundle degrees of Ω_f^0([αP]) and Ω_f^1([αP]).
    pub fn degrees(&self) -> (i64, i64) {
        (self.model.l0.degree(), self.model.l1.degree())
    }

    /// E₁^{p,q} of the stupid filtration next to h^q(O(d_p)).
    pub fn e1_terms(&self) -> Vec<LineBundleTerm> {
        let page = self.filtered.spectral_page(1);
        let (d0, d1) = self.degrees();
        let mut out = Vec::new();
        for (p, d) in [(0usize, d0), (1, d1)] {
            let (h0, h1) = line_bundle_h(d);
            for (qq, f) in [(0usize, h0), (1, h1)] {
                out.push(LineBundleTerm {
                    p,
                    q: qq,
                    degree: d,
                    cech: page.dim(p as i32, qq as i32),
                    formula: f,
                });
            }
        }
        out
    }
}

pub fn build_kontsevich_with(
    problem: &P1Problem,
    alpha: &BigRational,
    opts: &P1Options,
) -> Result<KontsevichComplex, P1Error> {
    check_alpha(alpha)?;
    let geom = Geometry::new(problem, opts.field, opts.center)?;
    let u = scalar(opts.field, &problem.twist.0)?;
    let v = scalar(opts.field, &problem.twist.1)?;
    let n = opts.windows(problem).0;
    let model = CechModel::new(geom.clone(), geom.kontsevich0(alpha), geom.kontsevich1(alpha), n)?;
    let filtered = model.sigma_filtered(&u, &v)?;
    Ok(KontsevichComplex {
        alpha: alpha.clone(),
        model,
        filtered,
    })
}

pub fn build_kontsevich(problem: &P1Problem, alpha: &BigRational) -> Result<KontsevichComplex, P1Error> {
    build_kontsevich_with(problem, alpha, &P1Options::default())
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct UvRow {
    pub u: String,
    pub v: String,
    pub dims: Vec<usize>,
    pub certificate: StabilizationCertificate,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct UvReport {
    pub alpha: String,
    pub rows: Vec<UvRow>,
    /// Σ_{p+q=k} h^q(Ω_f^p([αP])) for k = 0, 1, 2.
    pub sigma_dims: Vec<usize>,
    pub zero_matches_sigma: bool,
    pub all_equal: bool,
    /// The direct de Rham oracle, padded to three degrees.
    pub oracle: Vec<usize>,
    pub matches_oracle: bool,
    pub passed: bool,
}

pub fn verify_uv_independence_with(
    problem: &P1Problem,
    alpha: &BigRational,
    samples: &[(BigRational, BigRational)],
    opts: &P1Options,
) -> Result<UvReport, P1Error> {
    for (u, v) in &STANDARD_UV[..4] {
        if !samples.iter().any(|s| s.0 == q(*u) && s.1 == q(*v)) {
            return Err(P1Error::InvalidProblem(format!("sample set must contain ({u},{v})")));
        }
    }
    let inner = P1Options {
        exec: Exec::Sequential,
        ..*opts
    };
    let results = par::map(opts.exec, samples, |uv| hypercoh_dims_with(problem, alpha, uv, &inner));
    let mut rows = Vec::new();
    for r in results {
        let r = r?;
        rows.push(UvRow {
            u: r.u,
            v: r.v,
            dims: r.dims,
            certificate: r.certificate,
        });
    }
    let geom = Geometry::new(problem, opts.field, opts.center)?;
    let (a0, a1) = line_bundle_h(geom.kontsevich0(alpha).degree());
    let (b0, b1) = line_bundle_h(geom.kontsevich1(alpha).degree());
    let sigma_dims = vec![a0, a1 + b0, b1];
    let zero = rows.iter().find(|r| r.u == "0" && r.v == "0").expect("checked above");
    let zero_matches_sigma = zero.dims == sigma_dims;
    let all_equal = rows.iter().all(|r| r.dims == rows[0].dims);
    let mut oracle = direct_de_rham_oracle_with(problem, opts)?.dims;
    oracle.resize(3, 0);
    let one = rows.iter().find(|r| r.u == "1" && r.v == "1").expect("checked above");
    let matches_oracle = one.dims == oracle;
    Ok(UvReport {
        alpha: alpha.to_string(),
        rows,
        sigma_dims,
        zero_matches_sigma,
        all_equal,
        oracle,
        matches_oracle,
        passed: zero_matches_sigma && all_equal && matches_oracle,
    })
}

pub fn verify_uv_independence(
    problem: &P1Problem,
    alpha: &BigRational,
    samples: &[(BigRational, BigRational)],
) -> Result<UvReport, P1Error> {
    verify_uv_independence_with(problem, alpha, samples, &P1Options::default())
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct LevelDim {
    pub lambda: String,
    /// dim of the image of H^k(F^λ) in H^k_dR.
    pub image: usize,
    /// dim H^k(F^λ).
    pub step: usize,
    /// dim H^k(gr^λ), the E₁ term.
    pub e1: usize,
    /// dim F^λ H^k − dim F^{λ'} H^k for the next grid point λ'.
    pub gr: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct HodgeReport {
    pub k: i32,
    pub levels: Vec<LevelDim>,
    /// Each λ repeated dim gr^λ times.
    pub jumps: Vec<String>,
    pub dim_h: usize,
    pub oracle_dim: usize,
    pub injective: bool,
    pub e1_sum: usize,
    pub e1_sum_matches: bool,
    pub full_at_nonpositive: bool,
    pub monotone: bool,
    pub vanishes_above: bool,
    pub integral_jumps_when_reduced: bool,
    pub certificate: StabilizationCertificate,
    pub passed: bool,
}

/// F^λ of (Ω^•(log D)(*P_red), d + df) realized inside the model of F^{-1}.
fn hodge_filtration(geom: &Geometry, problem: &P1Problem, n: i64) -> Result<FilteredCochainComplex, P1Error> {
    let field = geom.field;
    let base = q(-1);
    let model = CechModel::new(
        geom.clone(),
        geom.twisted_o(&q(1)).expect("μ ≥ 0"),
        geom.twisted_log1(&q(2)).expect("μ ≥ 0"),
        n,
    )?;
    let complex = model.total_complex(&field.one(), &field.one())?;
    let top = q(1 + problem.max_e() as i64);
    let mut lambdas = vec![base];
    lambdas.extend(jump_grid(problem, &q(0), &top));
    let mut steps = Vec::new();
    for lam in lambdas {
        let s0 = geom.twisted_o(&-lam.clone());
        let s1 = geom.twisted_log1(&(q(1) - &lam));
        steps.push((lam, model.subcomplex(s0.as_ref(), s1.as_ref())?));
    }
    FilteredCochainComplex::new(complex, steps).map_err(|e| P1Error::Internal(e.to_string()))
}

struct HodgeData {
    lambdas: Vec<BigRational>,
    // [k][i]
    image: Vec<Vec<usize>>,
    step: Vec<Vec<usize>>,
    e1: Vec<Vec<usize>>,
    killed: Vec<Vec<usize>>,
    dim_h: Vec<usize>,
}

fn hodge_data(f: &FilteredCochainComplex, exec: Exec) -> HodgeData {
    let base = f.base();
    let cycles: Vec<_> = (0..3).map(|k| base.cycles(k)).collect();
    let bounds: Vec<_> = (0..3).map(|k| base.boundaries(k)).collect();
    let levels: Vec<usize> = (0..f.levels()).collect();
    let per_level = par::map(exec, &levels, |&i| {
        (0..3)
            .map(|k| {
                let ku = k as usize;
                let s = f.step(i, k);
                let z = s.intersection(&cycles[ku]).unwrap();
                let b = f.step(i, k - 1).image_under(&base.d_or_zero(k - 1));
                let image = z.sum(&bounds[ku]).unwrap().dim() - bounds[ku].dim();
                let dying = z.intersection(&bounds[ku]).unwrap().dim() - b.dim();
                let below = f.step(i + 1, k);
                let zg = s.preimage_within(&base.d_or_zero(k), &f.step(i + 1, k + 1));
                let e1 = zg.dim() - below.sum(&b).unwrap().dim();
                [image, z.dim() - b.dim(), e1, dying]
            })
            .collect::<Vec<_>>()
    });
    let pick = |j: usize| -> Vec<Vec<usize>> {
        (0..3)
            .map(|k| per_level.iter().map(|row| row[k][j]).collect())
            .collect()
    };
    HodgeData {
        lambdas: f.lambdas().to_vec(),
        image: pick(0),
        step: pick(1),
        e1: pick(2),
        killed: pick(3),
        dim_h: base.cohomology_dims(),
    }
}

/// Irregular Hodge data of H^k_dR(U, d + df) for k = 0, 1, 2.
pub fn irregular_hodge_all(problem: &P1Problem, opts: &P1Options) -> Result<Vec<HodgeReport>, P1Error> {
    let geom = Geometry::new(problem, opts.field, opts.center)?;
    let (data, cert) = stabilized(opts, problem, |n| {
        let f = hodge_filtration(&geom, problem, n)?;
        let d = hodge_data(&f, opts.exec);
        let mut sig = d.dim_h.clone();
        for k in 0..3 {
            sig.extend(&d.image[k]);
            sig.extend(&d.e1[k]);
        }
        Ok((sig, d))
    })?;
    let oracle = direct_de_rham_oracle_with(problem, opts)?.dims;
    let reduced = problem.is_reduced();
    let cap = q(1 + problem.max_e() as i64);
    let mut out = Vec::new();
    for k in 0..3usize {
        let dim_h = data.dim_h[k];
        let image = &data.image[k];
        let nl = data.lambdas.len();
        let mut levels = Vec::new();
        let mut jumps = Vec::new();
        for i in 0..nl {
            let next = if i + 1 < nl { image[i + 1] } else { 0 };
            let gr = image[i].saturating_sub(next);
            for _ in 0..gr {
                jumps.push(data.lambdas[i].to_string());
            }
            levels.push(LevelDim {
                lambda: data.lambdas[i].to_string(),
                image: image[i],
                step: data.step[k][i],
                e1: data.e1[k][i],
                gr,
            });
        }
        let injective = data.killed[k].iter().all(|&x| x == 0);
        let e1_sum: usize = data.e1[k].iter().sum();
        let full_at_nonpositive = data
            .lambdas
            .iter()
            .zip(image)
            .all(|(l, &d)| *l > BigRational::zero() || d == dim_h);
        let monotone = image.windows(2).all(|w| w[0] >= w[1]);
        let kq = q(k as i64) * &cap;
        let vanishes_above = data.lambdas.iter().zip(image).all(|(l, &d)| *l <= kq || d == 0);
        let integral_jumps_when_reduced = !reduced
            || data
                .lambdas
                .iter()
                .zip(&levels)
                .all(|(l, lv)| lv.gr == 0 || l.is_integer());
        let oracle_dim = oracle.get(k).copied().unwrap_or(0);
        let passed = injective
            && e1_sum == dim_h
            && full_at_nonpositive
            && monotone
            && vanishes_above
            && integral_jumps_when_reduced
            && oracle_dim == dim_h;
        out.push(HodgeReport {
            k: k as i32,
            levels,
            jumps,
            dim_h,
            oracle_dim,
            injective,
            e1_sum,
            e1_sum_matches: e1_sum == dim_h,
            full_at_nonpositive,
            monotone,
            vanishes_above,
            integral_jumps_when_reduced,
            certificate: cert.clone(),
            passed,
        });
    }
    Ok(out)
}

pub fn irregular_hodge(problem: &P1Problem, k: i32) -> Result<HodgeReport, P1Error> {
    let all = irregular_hodge_all(problem, &P1Options::default())?;
    all.into_iter()
        .find(|r| r.k == k)
        .ok_or_else(|| P1Error::InvalidProblem(format!("degree {k} outside 0..=2")))
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct DecompositionReport {
    pub alpha: String,
    pub k: usize,
    pub dim_dr: usize,
    pub terms: Vec<LineBundleTerm>,
    pub sum: usize,
    pub formulas_agree: bool,
    pub passed: bool,
}

/// dim H^k_dR against Σ_{p+q=k} h^q(Ω_f^p([αP])).
pub fn decomposition_check_with(
    problem: &P1Problem,
    alpha: &BigRational,
    k: usize,
    opts: &P1Options,
) -> Result<DecompositionReport, P1Error> {
    check_alpha(alpha)?;
    let geom = Geometry::new(problem, opts.field, opts.center)?;
    let sheaves: [LineSheaf; 2] = [geom.kontsevich0(alpha), geom.kontsevich1(alpha)];
    let n = opts.windows(problem).0;
    let mut terms = Vec::new();
    for (p, s) in sheaves.iter().enumerate() {
        if k < p || k - p > 1 {
            continue;
        }
        let qq = k - p;
        let d = s.degree();
        let c = line_bundle_complex(opts.field, d, n.max(d.abs() + 1));
        let (h0, h1) = line_bundle_h(d);
        terms.push(LineBundleTerm {
            p,
            q: qq,
            degree: d,
            cech: c.cohomology_dim(qq as i32),
            formula: if qq == 0 { h0 } else { h1 },
        });
    }
    let oracle = direct_de_rham_oracle_with(problem, opts)?.dims;
    let dim_dr = oracle.get(k).copied().unwrap_or(0);
    let sum = terms.iter().map(|t| t.cech).sum();
    let formulas_agree = terms.iter().all(|t| t.cech == t.formula);
    Ok(DecompositionReport {
        alpha: alpha.to_string(),
        k,
        dim_dr,
        terms,
        sum,
        formulas_agree,
        passed: formulas_agree && sum == dim_dr,
    })
}

pub fn decomposition_check(problem: &P1Problem, alpha: &BigRational, k: usize) -> Result<DecompositionReport, P1Error> {
    decomposition_check_with(problem, alpha, k, &P1Options::default())
}
