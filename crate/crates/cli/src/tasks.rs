use anyhow::{Context, Result};
use num_rational::BigRational;
use serde::Deserialize;
use serde_json::{json, Value as Json};

use logtwist::charp::{
    assemble_splitting, charp_degeneration_dims, frob_lifts_unchecked, verify_cartier_iso_omega_f,
    verify_closed_intersection, verify_u_sum, AtlasKind, CharpConfig,
};
use logtwist::exactalg::Field;
use logtwist::filtcx::json::{FilteredDoc, WitnessDoc};
use logtwist::filtcx::{fuzz_filtered_with, triple_check, FilteredCochainComplex, TripleCheck};
use logtwist::localmodel::{
    gr_complex, quotient_cohomology_lemma, rat, verify_c1_sequence, verify_kont_log, ChartData, Window,
};
use logtwist::p1global::{
    decomposition_check_with, irregular_hodge_all, verify_uv_independence_with, FSpec, P1Options, Point, ProblemFile,
    Value,
};
use logtwist::par::Exec;

use crate::plan::TaskKind;
use crate::report::TaskOutcome;

/// Settings shared by every task of a run.
#[derive(Clone, Copy, Debug, Default)]
pub struct RunOptions {
    /// Overrides the plan seed.
    pub seed: Option<u64>,
    /// Overrides the truncation N of P¹ tasks.
    pub truncation: Option<i64>,
    pub exec: Exec,
    /// Records wall-clock milliseconds per task; the report is then no
    /// longer byte-reproducible.
    pub timing: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LocalCheck {
    KontLog,
    Gr,
    C1,
    QuotientLemma,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LocalParams {
    /// Explicit charts; otherwise every chart of `ChartData::family(max_dim, max_e)`.
    #[serde(default)]
    pub charts: Option<Vec<ChartData>>,
    #[serde(default = "two")]
    pub max_dim: usize,
    #[serde(default = "two_u32")]
    pub max_e: u32,
    #[serde(default = "two_i64")]
    pub radius: i64,
    /// F_p instead of ℚ.
    #[serde(default)]
    pub prime: Option<u64>,
    #[serde(default = "default_mu")]
    pub mu: Vec<Value>,
    #[serde(default = "default_lambdas")]
    pub lambdas: Vec<Value>,
    #[serde(default = "all_local")]
    pub checks: Vec<LocalCheck>,
}

fn two() -> usize {
    2
}
fn two_u32() -> u32 {
    2
}
fn two_i64() -> i64 {
    2
}
fn default_mu() -> Vec<Value> {
    vec![Value::Int(0), Value::Text("1/2".into())]
}
fn default_lambdas() -> Vec<Value> {
    ["-1", "-1/2", "0", "1/2"]
        .iter()
        .map(|s| Value::Text(s.to_string()))
        .collect()
}
fn all_local() -> Vec<LocalCheck> {
    vec![
        LocalCheck::KontLog,
        LocalCheck::Gr,
        LocalCheck::C1,
        LocalCheck::QuotientLemma,
    ]
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct P1Params {
    pub f: FSpec,
    #[serde(default)]
    pub horizontal: Vec<Point>,
    #[serde(default)]
    pub alpha_grid: Option<Vec<Value>>,
    #[serde(default)]
    pub uv_samples: Option<Vec<(Value, Value)>>,
    #[serde(default)]
    pub truncation: Option<i64>,
    #[serde(default)]
    pub prime: Option<u64>,
}

impl P1Params {
    fn file(&self) -> ProblemFile {
        ProblemFile {
            f: self.f.clone(),
            horizontal: self.horizontal.clone(),
            alpha_grid: self.alpha_grid.clone(),
            uv_samples: self.uv_samples.clone(),
            truncation: self.truncation,
        }
    }

    fn options(&self, run: &RunOptions) -> Result<P1Options> {
        let field = match self.prime {
            Some(p) => Field::prime(p)?,
            None => Field::Rational,
        };
        Ok(P1Options {
            field,
            truncation: run.truncation.or(self.truncation),
            exec: run.exec,
            ..P1Options::default()
        })
    }
}

#[derive(Clone, Debug, Deserialize)]
pub struct CharpParams {
    #[serde(flatten)]
    pub config: CharpConfig,
    #[serde(default = "two_i64")]
    pub radius: i64,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Checker {
    #[default]
    Standard,
    /// Negative control: E_0 in place of E_1.
    E0Page,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FuzzParams {
    #[serde(default)]
    pub seed: Option<u64>,
    /// Random instances; 200 when no explicit complexes are given, else 0.
    #[serde(default)]
    pub count: Option<u64>,
    #[serde(default)]
    pub checker: Checker,
    #[serde(default)]
    pub complexes: Vec<FilteredDoc>,
    /// Whether E_1-degeneration of the explicit complexes is asserted.
    #[serde(default = "yes")]
    pub assert_degenerate: bool,
}

fn yes() -> bool {
    true
}

pub enum Params {
    Local(LocalParams),
    P1(P1Params),
    Charp(CharpParams),
    Fuzz(FuzzParams),
}

pub fn parse_params(kind: TaskKind, params: &Json) -> Result<Params> {
    let p = params.clone();
    Ok(match kind {
        TaskKind::LocalVerify => Params::Local(serde_json::from_value(p)?),
        TaskKind::P1Hodge | TaskKind::P1Degeneration | TaskKind::P1Uv => Params::P1(serde_json::from_value(p)?),
        TaskKind::CharpCartier | TaskKind::CharpSplitting => Params::Charp(serde_json::from_value(p)?),
        TaskKind::FiltcxFuzz => Params::Fuzz(serde_json::from_value(p)?),
    })
}

pub fn run_task(kind: TaskKind, params: &Json, plan_seed: Option<u64>, run: &RunOptions) -> Result<TaskOutcome> {
    let parsed = parse_params(kind, params).context("params do not match the schema")?;
    let mut out = TaskOutcome::default();
    match (kind, parsed) {
        (TaskKind::LocalVerify, Params::Local(p)) => local_verify(&p, run, &mut out)?,
        (TaskKind::P1Hodge, Params::P1(p)) => p1_hodge(&p, run, &mut out)?,
        (TaskKind::P1Degeneration, Params::P1(p)) => p1_degeneration(&p, run, &mut out)?,
        (TaskKind::P1Uv, Params::P1(p)) => p1_uv(&p, run, &mut out)?,
        (TaskKind::CharpCartier, Params::Charp(p)) => charp_cartier(&p, run, &mut out)?,
        (TaskKind::CharpSplitting, Params::Charp(p)) => charp_splitting(&p, run, &mut out)?,
        (TaskKind::FiltcxFuzz, Params::Fuzz(p)) => {
            let seed = p.seed.or(run.seed).or(plan_seed).unwrap_or(1);
            filtcx_fuzz(&p, seed, run, &mut out);
        }
        _ => unreachable!("parse_params matches on kind"),
    }
    Ok(out)
}

fn rational(v: &Value) -> Result<BigRational> {
    v.rational().map_err(anyhow::Error::msg)
}

fn chart_label(c: &ChartData) -> String {
    format!("(ℓ={},m={},pz={},e={:?})", c.ell, c.m, c.pz, c.e)
}

fn local_verify(p: &LocalParams, run: &RunOptions, out: &mut TaskOutcome) -> Result<()> {
    let field = match p.prime {
        Some(q) => Field::prime(q)?,
        None => Field::Rational,
    };
    let charts = match &p.charts {
        Some(cs) => cs.clone(),
        None => ChartData::family(p.max_dim, p.max_e),
    };
    let mus = p.mu.iter().map(rational).collect::<Result<Vec<_>>>()?;
    let lambdas = p.lambdas.iter().map(rational).collect::<Result<Vec<_>>>()?;
    let zero = rat(0, 1);
    let mut rows = Vec::new();
    for chart in &charts {
        let label = chart_label(chart);
        let n = chart.n();
        let window = Window::cube(n, p.radius);
        if p.checks.contains(&LocalCheck::KontLog) {
            for mu in &mus {
                for deg in 0..=n {
                    let name = format!("kont-log {label} μ={mu} p={deg}");
                    match verify_kont_log(field, chart, mu, deg, &window, run.exec) {
                        Ok(r) => {
                            out.check(
                                name,
                                r.passed,
                                format!(
                                    "∇ higher={} mismatches={}; df higher={} mismatches={}",
                                    r.nabla.higher_cohomology.len(),
                                    r.nabla.hp_mismatches.len(),
                                    r.df.higher_cohomology.len(),
                                    r.df.hp_mismatches.len()
                                ),
                            );
                            if !r.passed {
                                out.witnesses.push(serde_json::to_value(&r)?);
                            }
                        }
                        Err(e) => out.check(name, false, e.to_string()),
                    }
                }
            }
        }
        if p.checks.contains(&LocalCheck::Gr) {
            for lambda in &lambdas {
                match gr_complex(field, chart, lambda, &window, run.exec) {
                    Ok(r) => {
                        let summary = json!({
                            "chart": chart,
                            "lambda": lambda.to_string(),
                            "cohomology": r.cohomology,
                            "nonzero": r.nonzero,
                            "supported_on_poles": r.supported_on_poles,
                            "leaks": r.leaks,
                        });
                        let mut failed = false;
                        if *lambda <= zero {
                            let ok = r.is_acyclic();
                            failed |= !ok;
                            out.check(
                                format!("gr-acyclic {label} λ={lambda}"),
                                ok,
                                format!("cohomology {:?}", r.cohomology),
                            );
                        }
                        if !lambda.is_integer() {
                            let ok = r.supported_on_poles;
                            failed |= !ok;
                            out.check(
                                format!("gr-on-poles {label} λ={lambda}"),
                                ok,
                                format!("{} chains with cohomology", r.nonzero.len()),
                            );
                        }
                        if failed {
                            out.witnesses.push(summary.clone());
                        }
                        rows.push(summary);
                    }
                    Err(e) => out.check(format!("gr {label} λ={lambda}"), false, e.to_string()),
                }
            }
        }
        if p.checks.contains(&LocalCheck::C1) {
            let name = format!("c1-sequence {label}");
            match verify_c1_sequence(field, chart, &window, run.exec) {
                Ok(r) => {
                    out.check(
                        name,
                        r.passed,
                        format!("exact={} chain_maps={} acyclic={}", r.exact, r.chain_maps, r.acyclic),
                    );
                    if !r.passed {
                        out.witnesses.push(serde_json::to_value(&r)?);
                    }
                }
                Err(e) => out.check(name, false, e.to_string()),
            }
        }
        if p.checks.contains(&LocalCheck::QuotientLemma) && chart.ell > 0 && chart.is_reduced() {
            for deg in 0..=n {
                let name = format!("quotient-lemma {label} p={deg}");
                match quotient_cohomology_lemma(field, chart, deg, &window, run.exec) {
                    Ok(r) => {
                        out.check(name, r.passed, format!("computed {} formula {}", r.computed, r.formula));
                        if !r.passed {
                            out.witnesses.push(json!({
                                "chart": chart,
                                "p": deg,
                                "computed": r.computed,
                                "formula": r.formula,
                                "support": r.support,
                            }));
                        }
                    }
                    Err(e) => out.check(name, false, e.to_string()),
                }
            }
        }
    }
    out.data = json!({ "charts": charts.len(), "gr": rows });
    Ok(())
}

fn p1_setup(p: &P1Params, run: &RunOptions) -> Result<(ProblemFile, logtwist::p1global::P1Problem, P1Options)> {
    let file = p.file();
    let problem = file.problem()?;
    Ok((file, problem, p.options(run)?))
}

fn p1_hodge(p: &P1Params, run: &RunOptions, out: &mut TaskOutcome) -> Result<()> {
    let (_, problem, opts) = p1_setup(p, run)?;
    match irregular_hodge_all(&problem, &opts) {
        Ok(reports) => {
            for r in &reports {
                let gr: usize = r.levels.iter().map(|l| l.gr).sum();
                out.check(
                    format!("hodge k={}", r.k),
                    r.passed,
                    format!(
                        "dim H={} Σgr={} injective={} jumps={:?}",
                        r.dim_h, gr, r.injective, r.jumps
                    ),
                );
                out.certificates.push(json!({ "k": r.k, "certificate": r.certificate }));
                if !r.passed {
                    out.witnesses.push(serde_json::to_value(r)?);
                }
            }
            out.data = serde_json::to_value(&reports)?;
        }
        Err(e) => {
            out.check("hodge", false, e.to_string());
            out.witnesses.push(json!({ "error": e.to_string() }));
        }
    }
    Ok(())
}

fn p1_degeneration(p: &P1Params, run: &RunOptions, out: &mut TaskOutcome) -> Result<()> {
    let (file, problem, opts) = p1_setup(p, run)?;
    let mut rows = Vec::new();
    for alpha in file.alphas(&problem)? {
        for k in 0..=2 {
            let name = format!("decomposition α={alpha} k={k}");
            match decomposition_check_with(&problem, &alpha, k, &opts) {
                Ok(r) => {
                    let terms: Vec<String> = r.terms.iter().map(|t| t.cech.to_string()).collect();
                    out.check(name, r.passed, format!("{} = {}", r.dim_dr, terms.join(" + ")));
                    if !r.passed {
                        out.witnesses.push(serde_json::to_value(&r)?);
                    }
                    rows.push(serde_json::to_value(&r)?);
                }
                Err(e) => {
                    out.check(name, false, e.to_string());
                    out.witnesses
                        .push(json!({ "alpha": alpha.to_string(), "k": k, "error": e.to_string() }));
                }
            }
        }
    }
    out.data = Json::Array(rows);
    Ok(())
}

fn p1_uv(p: &P1Params, run: &RunOptions, out: &mut TaskOutcome) -> Result<()> {
    let (file, problem, opts) = p1_setup(p, run)?;
    let samples = file.uv()?;
    let mut rows = Vec::new();
    for alpha in file.alphas(&problem)? {
        let name = format!("uv-independence α={alpha}");
        match verify_uv_independence_with(&problem, &alpha, &samples, &opts) {
            Ok(r) => {
                let table: Vec<String> = r
                    .rows
                    .iter()
                    .map(|row| format!("({},{})→{:?}", row.u, row.v, row.dims))
                    .collect();
                out.check(name, r.passed, format!("{} oracle {:?}", table.join(" "), r.oracle));
                for row in &r.rows {
                    out.certificates.push(json!({
                        "alpha": r.alpha, "u": row.u, "v": row.v, "certificate": row.certificate,
                    }));
                }
                if !r.passed {
                    out.witnesses.push(serde_json::to_value(&r)?);
                }
                rows.push(serde_json::to_value(&r)?);
            }
            Err(e) => {
                out.check(name, false, e.to_string());
                out.witnesses
                    .push(json!({ "alpha": alpha.to_string(), "error": e.to_string() }));
            }
        }
    }
    out.data = Json::Array(rows);
    Ok(())
}

fn charp_cartier(p: &CharpParams, run: &RunOptions, out: &mut TaskOutcome) -> Result<()> {
    let atlas = match p.config.build_atlas() {
        Ok(a) => a,
        Err(e) => {
            out.check("atlas", false, e.to_string());
            return Ok(());
        }
    };
    let field = atlas.field();
    let mut rows = Vec::new();
    for (alpha, c) in atlas.charts.iter().enumerate() {
        let local = c.local();
        let window = Window::cube(c.n, p.radius);
        for a in 0..=c.n {
            let name = format!("closed-intersection chart {alpha} a={a}");
            match verify_closed_intersection(field, &local, a, &window, run.exec) {
                Ok(r) => {
                    out.check(
                        name,
                        r.passed,
                        format!("{} slices, {} failures", r.slices, r.failures.len()),
                    );
                    if !r.passed {
                        out.witnesses.push(serde_json::to_value(&r)?);
                    }
                    rows.push(serde_json::to_value(&r)?);
                }
                Err(e) => out.check(name, false, e.to_string()),
            }
            let name = format!("cartier-iso chart {alpha} a={a}");
            match verify_cartier_iso_omega_f(&local, a, atlas.p, &window, run.exec) {
                Ok(r) => {
                    out.check(
                        name,
                        r.passed,
                        format!(
                            "{} slices, {} with H≠0, {} failures",
                            r.slices,
                            r.nonzero.len(),
                            r.failures.len()
                        ),
                    );
                    if !r.passed {
                        out.witnesses.push(serde_json::to_value(&r)?);
                    }
                    rows.push(serde_json::to_value(&r)?);
                }
                Err(e) => out.check(name, false, e.to_string()),
            }
        }
    }
    out.data = json!({ "atlas": atlas, "reports": rows });
    Ok(())
}

fn charp_splitting(p: &CharpParams, run: &RunOptions, out: &mut TaskOutcome) -> Result<()> {
    let cfg = &p.config;
    let atlas = match cfg.build_atlas() {
        Ok(a) => a,
        Err(e) => {
            out.check("atlas", false, e.to_string());
            return Ok(());
        }
    };
    let lifts = match frob_lifts_unchecked(&atlas, &cfg.perturbations) {
        Ok(l) => l,
        Err(e) => {
            out.check("frobenius-lift", false, e.to_string());
            out.witnesses.push(json!({ "lift_error": e.to_string() }));
            return Ok(());
        }
    };
    let mut usums = Vec::new();
    for lift in &lifts {
        if !atlas.charts[lift.chart].meets_poles() {
            continue;
        }
        let r = verify_u_sum(&atlas, lift)?;
        out.check(
            format!("u-sum chart {}", lift.chart),
            r.holds,
            format!("Σu = {}, residual {}", r.u_sum, r.residual),
        );
        if r.bound_mismatch {
            out.note(
                format!("u-sum bound chart {}", lift.chart),
                false,
                format!("vanishes for r in {:?} but not r = ℓ = {}", r.other_bounds, r.ell),
            );
        }
        if !r.holds {
            out.witnesses
                .push(json!({ "chart": r.chart, "residual_mod_p2": r.residual, "u_sum": r.u_sum }));
        }
        usums.push(serde_json::to_value(&r)?);
    }
    let mut splittings = Vec::new();
    for i in 1..=cfg.i_max {
        if i as u64 >= atlas.p {
            out.note(
                format!("splitting i={i}"),
                false,
                format!("skipped: needs i < p = {}", atlas.p),
            );
            continue;
        }
        match assemble_splitting(&atlas, &lifts, i, p.radius, run.exec) {
            Ok((_, r)) => {
                for c in &r.checks {
                    out.check(
                        format!("splitting i={i} {}", c.name),
                        c.passed,
                        format!("{} cases, {} failures", c.cases, c.failures.len()),
                    );
                }
                if !r.passed {
                    out.witnesses.push(serde_json::to_value(&r)?);
                }
                splittings.push(serde_json::to_value(&r)?);
            }
            Err(e) => out.check(format!("splitting i={i}"), false, e.to_string()),
        }
    }
    let mut degeneration = Json::Null;
    if matches!(atlas.kind, AtlasKind::P1 { .. }) {
        match charp_degeneration_dims(&atlas, run.truncation) {
            Ok(r) => {
                let detail = format!("d → {:?}, 0 → {:?}", r.dims_d, r.dims_zero);
                if r.asserted {
                    out.check("degeneration", r.equal, detail);
                } else {
                    out.note("degeneration (p ≤ dim + 1)", r.equal, detail);
                }
                degeneration = serde_json::to_value(&r)?;
            }
            Err(e) => out.check("degeneration", false, e.to_string()),
        }
    }
    out.data = json!({
        "atlas": atlas,
        "u_sums": usums,
        "splittings": splittings,
        "degeneration": degeneration,
    });
    Ok(())
}

fn check_json(c: &TripleCheck) -> Json {
    json!({
        "injective": c.injective,
        "e1_total": c.e1_total,
        "h_total": c.h_total,
        "torsion_free": c.torsion_free,
    })
}

fn filtcx_fuzz(p: &FuzzParams, seed: u64, run: &RunOptions, out: &mut TaskOutcome) {
    let count = p.count.unwrap_or(if p.complexes.is_empty() { 200 } else { 0 });
    let mut data = serde_json::Map::new();
    if count > 0 {
        let stats = match p.checker {
            Checker::Standard => fuzz_filtered_with(seed, count, run.exec, triple_check),
            Checker::E0Page => fuzz_filtered_with(seed, count, run.exec, |f: &FilteredCochainComplex| TripleCheck {
                e1_total: f.spectral_page(0).total(),
                ..triple_check(f)
            }),
        };
        out.check(
            "triple-equivalence",
            stats.counterexamples.is_empty(),
            format!(
                "{}/{} consistent, {} degenerate, seed {}",
                stats.consistent, stats.count, stats.degenerate, seed
            ),
        );
        for cx in &stats.counterexamples {
            out.witnesses.push(json!({
                "index": cx.index,
                "check": check_json(&cx.check),
                "complex": cx.complex,
            }));
        }
        data.insert(
            "fuzz".into(),
            json!({
                "seed": seed,
                "count": stats.count,
                "consistent": stats.consistent,
                "degenerate": stats.degenerate,
                "counterexamples": stats.counterexamples.len(),
            }),
        );
    }
    let mut explicit = Vec::new();
    for (i, doc) in p.complexes.iter().enumerate() {
        let f = match doc.build() {
            Ok(f) => f,
            Err(e) => {
                out.check(format!("complex {i}"), false, e.to_string());
                continue;
            }
        };
        let check = triple_check(&f);
        out.check(
            format!("complex {i} triple-equivalence"),
            check.consistent(),
            format!(
                "ΣE1={} ΣH={} torsion_free={}",
                check.e1_total, check.h_total, check.torsion_free
            ),
        );
        let deg = f.e1_degenerates();
        let witnesses: Vec<WitnessDoc> = deg.witnesses.iter().map(WitnessDoc::from).collect();
        let detail = format!("{} witness classes", witnesses.len());
        if p.assert_degenerate {
            out.check(format!("complex {i} e1-degenerates"), deg.degenerates, detail);
        } else {
            out.note(format!("complex {i} e1-degenerates"), deg.degenerates, detail);
        }
        if !deg.degenerates {
            let torsion = f.rees_strictness().exponents();
            out.witnesses
                .push(json!({ "complex": i, "classes": witnesses, "rees_torsion_exponents": torsion }));
        }
        explicit.push(json!({ "complex": i, "check": check_json(&check), "degenerates": deg.degenerates }));
    }
    if !p.complexes.is_empty() {
        data.insert("complexes".into(), Json::Array(explicit));
    }
    out.data = Json::Object(data);
}
