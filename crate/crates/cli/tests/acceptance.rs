//! Acceptance suite: one PASS/FAIL line per criterion.
//!
//! Runs without the libtest harness so the verdict lines always reach the
//! output. The process fails when the set of red criteria differs from
//! `KNOWN_RED`, so a regression and an unexpected fix both show up.

use std::path::Path;
use std::time::Instant;

use num_rational::BigRational;

use logtwist::charp::{
    assemble_splitting, build_frob_lift, charp_degeneration_dims, verify_cartier_iso_omega_f,
    verify_closed_intersection, verify_u_sum, Perturbation, W2Chart, W2ChartAtlas,
};
use logtwist::filtcx::fuzz_filtered;
use logtwist::localmodel::{
    gr_complex, quotient_cohomology_lemma, rat, verify_c1_sequence, verify_kont_log, ChartData, Window,
};
use logtwist::p1global::{
    decomposition_check_with, direct_de_rham_oracle_with, irregular_hodge_all, verify_uv_independence_with, P1Options,
    P1Problem, Point, ProblemFile, STANDARD_UV,
};
use logtwist::par::Exec;
use logtwist_cli::{run, RunOptions, RunPlan, Status};

/// Criterion 5 includes λ = 0 in its acyclicity claim; gr^0 is not acyclic
/// under the `_+` truncation.
const KNOWN_RED: &[usize] = &[5];

struct Verdict {
    passed: bool,
    detail: String,
}

fn verdict(passed: bool, detail: impl Into<String>) -> Verdict {
    Verdict {
        passed,
        detail: detail.into(),
    }
}

fn q(n: i64) -> BigRational {
    rat(n, 1)
}

struct Instance {
    name: &'static str,
    problem: P1Problem,
}

fn instances() -> Vec<Instance> {
    let mk = |name, num: &[i64], den: &[i64], h: Vec<Point>| Instance {
        name,
        problem: P1Problem::from_ints(num, den, h).unwrap(),
    };
    vec![
        mk("z on A¹", &[0, 1], &[1], vec![]),
        mk("z on G_m", &[0, 1], &[1], vec![Point::int(0)]),
        mk("z+1/z", &[1, 0, 1], &[0, 1], vec![]),
        mk("z² on A¹", &[0, 0, 1], &[1], vec![]),
        mk("z²/(z−1)", &[0, 0, 1], &[-1, 1], vec![]),
        mk("z³/(z−1)", &[0, 0, 0, 1], &[-1, 1], vec![]),
    ]
}

fn alphas(p: &P1Problem) -> Vec<BigRational> {
    let file = ProblemFile {
        f: logtwist::p1global::FSpec {
            num: vec![],
            den: vec![],
        },
        horizontal: vec![],
        alpha_grid: None,
        uv_samples: None,
        truncation: None,
    };
    file.alphas(p).unwrap()
}

fn criterion_1() -> Verdict {
    let stats = fuzz_filtered(1, 200);
    let ok = stats.consistent == 200 && stats.counterexamples.is_empty();
    verdict(
        ok,
        format!(
            "{}/200 equivalences hold ({} degenerate)",
            stats.consistent, stats.degenerate
        ),
    )
}

fn criterion_2() -> Verdict {
    let opts = P1Options::default();
    let mut bad = Vec::new();
    let mut checked = 0;
    for inst in instances() {
        match irregular_hodge_all(&inst.problem, &opts) {
            Ok(reports) => {
                for r in reports {
                    checked += 1;
                    let gr: usize = r.levels.iter().map(|l| l.gr).sum();
                    let cert = &r.certificate;
                    let stable = cert.dims_n == cert.dims_n_plus && cert.n < cert.n_plus;
                    if !(r.injective && gr == r.dim_h && r.dim_h == r.oracle_dim && stable && r.passed) {
                        bad.push(format!("{} k={}", inst.name, r.k));
                    }
                }
            }
            Err(e) => bad.push(format!("{}: {e}", inst.name)),
        }
    }
    verdict(
        bad.is_empty(),
        format!("{checked} (instance, k) pairs; failing: {bad:?}"),
    )
}

fn criterion_3() -> Verdict {
    let opts = P1Options::default();
    let samples: Vec<(BigRational, BigRational)> = STANDARD_UV.iter().map(|&(u, v)| (q(u), q(v))).collect();
    let mut bad = Vec::new();
    let mut checked = 0;
    for inst in instances() {
        let oracle = direct_de_rham_oracle_with(&inst.problem, &opts).map(|o| o.dims);
        for alpha in alphas(&inst.problem) {
            checked += 1;
            match verify_uv_independence_with(&inst.problem, &alpha, &samples, &opts) {
                Ok(r) => {
                    let first = &r.rows[0].dims;
                    let same = r.rows.len() == 5 && r.rows.iter().all(|row| &row.dims == first);
                    // the oracle ignores α and reports (H⁰, H¹) of the affine curve
                    let direct = alpha != q(0) || oracle.as_ref().is_ok_and(|o| o[..] == first[..2] && first[2] == 0);
                    if !(same && r.matches_oracle && direct && r.passed) {
                        bad.push(format!("{} α={alpha}", inst.name));
                    }
                }
                Err(e) => bad.push(format!("{} α={alpha}: {e}", inst.name)),
            }
        }
    }
    verdict(
        bad.is_empty(),
        format!("{checked} (instance, α) pairs × 5 (u,v); failing: {bad:?}"),
    )
}

fn criterion_4() -> Verdict {
    let opts = P1Options::default();
    let mut bad = Vec::new();
    let mut checked = 0;
    for inst in instances() {
        for alpha in alphas(&inst.problem) {
            for k in 0..=2 {
                checked += 1;
                match decomposition_check_with(&inst.problem, &alpha, k, &opts) {
                    Ok(r) if r.passed && r.sum == r.dim_dr && r.formulas_agree => {}
                    Ok(_) => bad.push(format!("{} α={alpha} k={k}", inst.name)),
                    Err(e) => bad.push(format!("{} α={alpha} k={k}: {e}", inst.name)),
                }
            }
        }
    }
    // f = z + 1/z, k = 1: 2 = h¹(O(−2)) + h⁰(O(0)) = 1 + 1
    let zz = &instances()[2].problem;
    let r = decomposition_check_with(zz, &q(0), 1, &opts).unwrap();
    let term = |p, qq| {
        r.terms
            .iter()
            .find(|t| t.p == p && t.q == qq)
            .map(|t| (t.degree, t.cech))
    };
    let frozen = r.dim_dr == 2 && term(0, 1) == Some((-2, 1)) && term(1, 0) == Some((0, 1));
    if !frozen {
        bad.push("z+1/z k=1 values".into());
    }
    verdict(
        bad.is_empty(),
        format!("{checked} (instance, α, k) triples, z+1/z: 2 = 1 + 1; failing: {bad:?}"),
    )
}

fn criterion_5() -> Verdict {
    let charts = ChartData::family(3, 3);
    let exec = Exec::default();
    let field = logtwist::exactalg::Field::Rational;
    let mus = [rat(0, 1), rat(1, 3), rat(1, 2)];
    let lambdas = [
        rat(-1, 1),
        rat(-1, 2),
        rat(-1, 3),
        rat(0, 1),
        rat(1, 3),
        rat(1, 2),
        rat(2, 3),
    ];
    let mut kont = (0, 0);
    let mut acyclic_neg = (0, 0);
    let mut acyclic_zero = (0, 0);
    let mut support = (0, 0);
    let mut c1 = (0, 0);
    let mut lemma = (0, 0);
    let tally = |t: &mut (usize, usize), ok: bool| {
        t.0 += usize::from(ok);
        t.1 += 1;
    };
    for chart in &charts {
        let n = chart.n();
        let w = Window::cube(n, 6);
        for mu in &mus {
            for p in 0..=n {
                let ok = verify_kont_log(field, chart, mu, p, &w, exec).is_ok_and(|r| r.passed);
                tally(&mut kont, ok);
            }
        }
        for lambda in &lambdas {
            let r = gr_complex(field, chart, lambda, &w, exec).unwrap();
            if *lambda < q(0) {
                tally(&mut acyclic_neg, r.is_acyclic());
            } else if *lambda == q(0) {
                tally(&mut acyclic_zero, r.is_acyclic());
            }
            if !lambda.is_integer() {
                tally(&mut support, r.supported_on_poles);
            }
        }
        tally(
            &mut c1,
            verify_c1_sequence(field, chart, &w, exec).is_ok_and(|r| r.passed),
        );
        if chart.ell > 0 && chart.is_reduced() {
            for p in 0..=n {
                let ok = quotient_cohomology_lemma(field, chart, p, &w, exec).is_ok_and(|r| r.passed);
                tally(&mut lemma, ok);
            }
        }
    }
    let all = |t: (usize, usize)| t.0 == t.1;
    let passed = [kont, acyclic_neg, acyclic_zero, support, c1, lemma]
        .into_iter()
        .all(all);
    let f = |t: (usize, usize)| format!("{}/{}", t.0, t.1);
    verdict(
        passed,
        format!(
            "{} charts; kont-log {}, gr acyclic λ<0 {}, gr acyclic λ=0 {}, gr on P_red {}, C1 {}, quotient lemma {}",
            charts.len(),
            f(kont),
            f(acyclic_neg),
            f(acyclic_zero),
            f(support),
            f(c1),
            f(lemma)
        ),
    )
}

/// A nonzero perturbation meeting the pole and divisor conditions, if the
/// chart admits one.
fn perturbation_for(c: &W2Chart, chart: usize, p: u64) -> Option<Vec<Perturbation>> {
    let p = p as i64;
    let unit = |j: usize, k: i64| {
        let mut e = vec![0; c.n];
        e[j] = k;
        e
    };
    if c.m < c.n {
        return Some(vec![Perturbation {
            chart,
            coord: c.m,
            v: vec![(unit(c.m, 1), 1)],
        }]);
    }
    if c.ell < c.m {
        let j = c.ell;
        let mut e = unit(j, p);
        e[0] += 1;
        return Some(vec![Perturbation {
            chart,
            coord: j,
            v: vec![(e, 1)],
        }]);
    }
    if c.ell >= 2 {
        return Some(vec![
            Perturbation {
                chart,
                coord: 0,
                v: vec![(unit(0, p), 1)],
            },
            Perturbation {
                chart,
                coord: 1,
                v: vec![(unit(1, p), -1)],
            },
        ]);
    }
    None
}

fn criterion_6() -> Verdict {
    let exec = Exec::default();
    let mut counts = [0usize; 5];
    let mut bad = Vec::new();
    for p in [3u64, 5] {
        let mut atlases = vec![W2ChartAtlas::p1(p, false).unwrap(), W2ChartAtlas::p1(p, true).unwrap()];
        for n in 1..=2 {
            for m in 0..=n {
                for ell in 0..=m {
                    atlases.push(W2ChartAtlas::affine(p, n, ell, m).unwrap());
                }
            }
        }
        for atlas in &atlases {
            let tag = format!("p={p} {:?} {:?}", atlas.kind, atlas.charts);
            let field = atlas.field();
            for c in &atlas.charts {
                let local = c.local();
                let w = Window::cube(c.n, p as i64 + 1);
                for a in 0..=c.n {
                    counts[0] += 1;
                    if !verify_closed_intersection(field, &local, a, &w, exec).is_ok_and(|r| r.passed) {
                        bad.push(format!("intersection {tag} a={a}"));
                    }
                    if !verify_cartier_iso_omega_f(&local, a, p, &w, exec).is_ok_and(|r| r.passed) {
                        bad.push(format!("cartier {tag} a={a}"));
                    }
                }
            }
            let mut lift_sets = vec![Vec::new()];
            // one perturbed lift per atlas, on the first chart admitting one
            if let Some(ps) = atlas
                .charts
                .iter()
                .enumerate()
                .find_map(|(i, c)| perturbation_for(c, i, p))
            {
                lift_sets.push(ps);
            }
            for perts in &lift_sets {
                let lifts = match build_frob_lift(atlas, perts) {
                    Ok(l) => l,
                    Err(e) => {
                        bad.push(format!("lift {tag}: {e}"));
                        continue;
                    }
                };
                counts[1] += 1;
                for lift in lifts.iter().filter(|l| atlas.charts[l.chart].meets_poles()) {
                    if !verify_u_sum(atlas, lift).is_ok_and(|r| r.holds) {
                        bad.push(format!("Σu {tag} chart {}", lift.chart));
                    }
                }
                for i in 1..=atlas.dim().min(2) {
                    counts[2] += 1;
                    match assemble_splitting(atlas, &lifts, i, 2, exec) {
                        Ok((_, r)) if r.passed => {}
                        Ok((_, r)) => bad.push(format!("splitting {tag} i={i} perturbed={}: {r:?}", !perts.is_empty())),
                        Err(e) => bad.push(format!("splitting {tag} i={i}: {e}")),
                    }
                }
                counts[4] += usize::from(!perts.is_empty());
            }
            if matches!(atlas.kind, logtwist::charp::AtlasKind::P1 { .. }) {
                counts[3] += 1;
                match charp_degeneration_dims(atlas, None) {
                    Ok(r) if r.asserted && r.equal => {}
                    Ok(r) => bad.push(format!("degeneration {tag}: {:?} vs {:?}", r.dims_d, r.dims_zero)),
                    Err(e) => bad.push(format!("degeneration {tag}: {e}")),
                }
            }
        }
    }
    verdict(
        bad.is_empty(),
        format!(
            "{} (chart, a) pairs, {} lifts ({} perturbed), {} splittings, {} P¹ degenerations; failing: {bad:?}",
            counts[0], counts[1], counts[4], counts[2], counts[3]
        ),
    )
}

fn criterion_7() -> Verdict {
    let plans = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../plans");
    let opts = RunOptions::default();
    let planted = run(&RunPlan::load(&plans.join("sabotaged_filtcx.json")).unwrap(), &opts);
    let t = &planted.tasks[0];
    let witness = t
        .witnesses
        .iter()
        .find_map(|w| w["classes"].as_array())
        .is_some_and(|c| !c.is_empty());
    let planted_fails = t.status == Status::Fail && planted.exit_code() != 0 && witness;
    let lift = run(&RunPlan::load(&plans.join("invalid_lift.json")).unwrap(), &opts);
    let t = &lift.tasks[0];
    let residual = t
        .witnesses
        .iter()
        .find_map(|w| w["residual_mod_p2"].as_str())
        .map(str::to_string);
    let lift_fails = t.status == Status::Fail && lift.exit_code() != 0 && residual.as_deref() == Some("p·(1)");
    verdict(
        planted_fails && lift_fails,
        format!(
            "planted complex FAIL with witness: {planted_fails}; invalid lift FAIL with residual {}: {lift_fails}",
            residual.unwrap_or_default()
        ),
    )
}

fn main() {
    let criteria: [(usize, &str, fn() -> Verdict); 7] = [
        (1, "filtered-complex equivalence", criterion_1),
        (2, "irregular Hodge filtration on P¹", criterion_2),
        (3, "(u,v)-independence", criterion_3),
        (4, "Hodge decomposition of H_dR", criterion_4),
        (5, "local model", criterion_5),
        (6, "characteristic p", criterion_6),
        (7, "negative controls", criterion_7),
    ];
    let mut red = Vec::new();
    for (i, name, f) in criteria {
        let start = Instant::now();
        let v = f();
        let secs = start.elapsed().as_secs_f64();
        println!(
            "criterion {i} ({name}): {} [{secs:.1}s] {}",
            if v.passed { "PASS" } else { "FAIL" },
            v.detail
        );
        if !v.passed {
            red.push(i);
        }
    }
    println!(
        "{} of 7 criteria PASS; red: {red:?}; documented red: {KNOWN_RED:?}",
        7 - red.len()
    );
    if red != KNOWN_RED {
        eprintln!("red criteria differ from the documented set");
        std::process::exit(1);
    }
}
