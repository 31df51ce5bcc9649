use logtwist::exactalg::{Field, Scalar};
use logtwist::localmodel::{
    fyu_step, gr_complex, kontsevich_by_kernel, nabla, quotient_cohomology_lemma, rat, relative_log_complex,
    verify_c1_sequence, verify_kont_log, verify_kont_log_with, ChartData, GradedSheafSpace, LocalError,
    MonomialLogForm, RowDifferential, SpaceKind, Window,
};
use logtwist::par::Exec;
use num_rational::BigRational;
use num_traits::Zero;
use proptest::prelude::*;

const Q: Field = Field::Rational;

fn chart(ell: usize, m: usize, pz: usize, e: &[u32]) -> ChartData {
    ChartData::new(ell, m, pz, e.to_vec()).unwrap()
}

fn space(c: &ChartData, kind: SpaceKind, p: usize, mu: BigRational, r: i64) -> GradedSheafSpace {
    GradedSheafSpace::new(Q, c.clone(), kind, p, mu, Window::cube(c.n(), r)).unwrap()
}

fn mono(c: i64, a: &[i64], wedge: &[usize]) -> MonomialLogForm {
    MonomialLogForm::monomial(Q.int(c), a.to_vec(), wedge)
}

#[test]
fn kontsevich_degree_zero_is_vanishing_on_poles() {
    let c = chart(1, 0, 0, &[1]);
    let s = space(&c, SpaceKind::Kontsevich, 0, BigRational::zero(), 6);
    assert_eq!(s.basis_of(&[1]).unwrap(), vec![mono(1, &[1], &[])]);
    assert!(s.basis_of(&[0]).unwrap().is_empty());
    assert_eq!(s.basis_of(&[7]), Err(LocalError::OutsideWindow(vec![7])));
}

#[test]
fn kontsevich_top_degree_is_all_log_forms() {
    let c = chart(1, 0, 0, &[1]);
    let s = space(&c, SpaceKind::Kontsevich, 1, BigRational::zero(), 6);
    assert_eq!(s.basis_of(&[0]).unwrap(), vec![mono(1, &[0], &[0])]);
    for a in -6..=6 {
        let log = space(&c, SpaceKind::Log, 1, BigRational::zero(), 6);
        assert_eq!(s.dim_at(&[a]).unwrap(), log.dim_at(&[a]).unwrap());
    }
}

#[test]
fn two_poles_degree_one_at_origin() {
    let c = chart(2, 0, 0, &[1, 1]);
    let s = space(&c, SpaceKind::Kontsevich, 1, BigRational::zero(), 2);
    let b = s.basis_of(&[0, 0]).unwrap();
    assert_eq!(b.len(), 1);
    let target = mono(1, &[0, 0], &[0]).add(&mono(1, &[0, 0], &[1]));
    let c0 = b[0].coefficient(&[0, 0], 0b01);
    assert_eq!(b[0].scale(&c0.inv().unwrap()), target);
}

#[test]
fn generator_families_match_kernel_definition() {
    for c in ChartData::family(2, 3) {
        for mu in [rat(0, 1), rat(1, 2), rat(-1, 3), rat(5, 3)] {
            for p in 0..=c.n() {
                let s = space(&c, SpaceKind::Kontsevich, p, mu.clone(), 3);
                for a in Window::cube(c.n(), 3).points() {
                    let sl = s.slice(&a).unwrap();
                    let oracle = kontsevich_by_kernel(Q, &c, &a, p, &mu);
                    assert_eq!(sl.space, oracle, "{c:?} mu={mu} p={p} a={a:?}");
                }
            }
        }
    }
}

#[test]
fn df_of_one() {
    let c = chart(2, 0, 0, &[1, 2]);
    let got = nabla(&c, &mono(1, &[0, 0], &[]), &Q.zero(), &Q.one());
    let want = mono(-1, &[-1, -2], &[0]).add(&mono(-2, &[-1, -2], &[1]));
    assert_eq!(got, want);
}

#[test]
fn nabla_of_the_pole_function() {
    let c = chart(1, 0, 0, &[1]);
    let x = mono(1, &[1], &[]);
    let got = nabla(&c, &x, &Q.one(), &Q.one());
    assert_eq!(got, mono(1, &[1], &[0]).add(&mono(-1, &[0], &[0])));
    let kont = space(&c, SpaceKind::Kontsevich, 1, BigRational::zero(), 3);
    for a in [[1i64], [0]] {
        let sl = kont.slice(&a).unwrap();
        let part: MonomialLogForm = {
            let mut f = MonomialLogForm::zero(Q, 1);
            for (exp, mask, coeff) in got.terms() {
                if exp.as_slice() == a {
                    f = f.add(&MonomialLogForm::monomial(coeff.clone(), exp.clone(), &mask_list(mask)));
                }
            }
            f
        };
        let v = sl.coordinates(&c, &part).unwrap();
        assert!(sl.space.contains(&v));
    }
}

fn mask_list(mask: u32) -> Vec<usize> {
    (0..32).filter(|i| mask & (1 << i) != 0).collect()
}

#[test]
fn euler_action_on_a_mixed_chart() {
    // d(x^2 y^-0 z^3 · δ_y) with one coordinate of each type
    let c = chart(1, 1, 1, &[2]);
    let f = mono(1, &[2, 0, 3], &[1]);
    let got = nabla(&c, &f, &Q.one(), &Q.zero());
    // 2·δ_x∧δ_y·x²z³ + 3·dz∧δ_y·x²z² = 2 δx∧δy − 3 δy∧dz
    let want = mono(2, &[2, 0, 3], &[0, 1]).add(&mono(-3, &[2, 0, 2], &[1, 2]));
    assert_eq!(got, want);
}

#[test]
fn yu_steps() {
    let c = chart(1, 0, 0, &[1]);
    let w = Window::cube(1, 4);
    let f = fyu_step(Q, &c, &rat(0, 1), 0, w.clone()).unwrap();
    assert_eq!(f.kind, SpaceKind::Log);
    assert_eq!(f.dim_at(&[0]).unwrap(), 1);
    let g = fyu_step(Q, &c, &rat(-2, 1), 0, w.clone()).unwrap();
    assert_eq!(g.dim_at(&[-2]).unwrap(), 1);
    for k in 0..=1 {
        let z = fyu_step(Q, &c, &rat(k as i64 + 1, 1), k, w.clone()).unwrap();
        assert_eq!(z.kind, SpaceKind::Zero);
        assert!(z.dimension_table().is_empty());
    }
    // k − λ = −1/2 < 0 truncates to zero; the untruncated twist [−P] starts at x¹
    let c2 = chart(1, 0, 0, &[2]);
    let h = fyu_step(Q, &c2, &rat(1, 2), 0, w.clone()).unwrap();
    assert_eq!(h.kind, SpaceKind::Zero);
    let untruncated = GradedSheafSpace::new(Q, c2.clone(), SpaceKind::Log, 0, rat(-1, 2), w.clone()).unwrap();
    let support: Vec<i64> = untruncated.dimension_table().iter().map(|(a, _)| a[0]).collect();
    assert_eq!(support, vec![1, 2, 3, 4]);
    let h1 = fyu_step(Q, &c2, &rat(1, 2), 1, w).unwrap();
    let support: Vec<i64> = h1.dimension_table().iter().map(|(a, _)| a[0]).collect();
    assert_eq!(support, vec![-1, 0, 1, 2, 3, 4]);
}

#[test]
fn yu_filtration_jumps_only_on_the_grid() {
    let c = chart(2, 1, 0, &[2, 3]);
    let w = Window::cube(3, 3);
    // between consecutive grid points k + j/e_i the steps do not move
    let grid = [rat(0, 1), rat(1, 3), rat(1, 2), rat(2, 3), rat(1, 1)];
    for pair in grid.windows(2) {
        let mid = (&pair[0] + &pair[1]) / rat(2, 1);
        for k in 0..=2 {
            let hi = fyu_step(Q, &c, &pair[1], k, w.clone()).unwrap().dimension_table();
            let m = fyu_step(Q, &c, &mid, k, w.clone()).unwrap().dimension_table();
            assert_eq!(hi, m, "λ in ({}, {}]", pair[0], pair[1]);
        }
    }
}

#[test]
fn gr_below_zero_is_acyclic() {
    let c = chart(1, 0, 0, &[1]);
    let r = gr_complex(Q, &c, &rat(-1, 1), &Window::cube(1, 6), Exec::Sequential).unwrap();
    assert!(r.is_acyclic());
    assert_eq!(r.leaks, 0);
    assert!(r.assembled_slices >= r.requested_slices);
}

#[test]
fn gr_at_zero_keeps_functions_vanishing_on_poles() {
    // the truncation kills F^{ε} in degree 0, so gr^0 starts with all of O
    let c = chart(1, 0, 0, &[1]);
    let r = gr_complex(Q, &c, &rat(0, 1), &Window::cube(1, 6), Exec::Sequential).unwrap();
    assert!(!r.is_acyclic());
    let h0: Vec<i64> = r.nonzero.iter().map(|(b, _)| b[0]).collect();
    assert_eq!(h0, vec![1, 2, 3, 4, 5, 6]);
    assert!(r.nonzero.iter().all(|(_, d)| d == &vec![1, 0]));
    assert!(!r.supported_on_poles);
}

#[test]
fn gr_at_half_is_supported_on_poles() {
    let c = chart(1, 0, 0, &[2]);
    let r = gr_complex(Q, &c, &rat(1, 2), &Window::cube(1, 6), Exec::Sequential).unwrap();
    assert!(r.supported_on_poles);
    let c = chart(1, 1, 1, &[2]);
    let r = gr_complex(Q, &c, &rat(3, 2), &Window::cube(3, 3), Exec::Parallel).unwrap();
    assert!(r.supported_on_poles);
    assert_eq!(r.leaks, 0);
}

#[test]
fn gr_chains_agree_with_direct_sum() {
    let c = chart(1, 1, 0, &[2]);
    let r = gr_complex(Q, &c, &rat(1, 2), &Window::cube(2, 2), Exec::Sequential).unwrap();
    assert_eq!(r.total().cohomology_dims(), r.cohomology);
}

#[test]
fn kont_log_examples() {
    let c = chart(1, 0, 0, &[1]);
    let r = verify_kont_log(Q, &c, &rat(0, 1), 0, &Window::cube(1, 6), Exec::Sequential).unwrap();
    assert!(r.passed, "{r:?}");
    let c = chart(2, 0, 0, &[1, 2]);
    let r = verify_kont_log(Q, &c, &rat(1, 2), 1, &Window::cube(2, 5), Exec::Parallel).unwrap();
    assert!(r.passed, "{r:?}");
    assert!(r.nabla.assembled_slices > r.nabla.chains);
}

#[test]
fn kont_log_sabotage_fails() {
    let c = chart(1, 0, 0, &[1]);
    let r = verify_kont_log_with(
        Q,
        &c,
        &rat(0, 1),
        0,
        &Window::cube(1, 6),
        RowDifferential::SabotagedDf,
        Exec::Sequential,
    )
    .unwrap();
    assert!(!r.passed);
    assert!(!r.higher_cohomology.is_empty());
}

#[test]
fn relative_complex_examples() {
    let c = chart(1, 0, 0, &[1]);
    let rel = relative_log_complex(Q, &c, 1, Window::cube(1, 2)).unwrap();
    assert_eq!(rel.space.dim_at(&[0]).unwrap(), 0);
    let c2 = chart(2, 0, 0, &[1, 1]);
    let rel = relative_log_complex(Q, &c2, 1, Window::cube(2, 2)).unwrap();
    assert_eq!(rel.space.dim_at(&[0, 0]).unwrap(), 1);
    for a in Window::cube(2, 2).points() {
        assert!(rel.composite(&a).unwrap().is_zero());
    }
    let none = chart(0, 1, 0, &[]);
    assert_eq!(
        relative_log_complex(Q, &none, 0, Window::cube(1, 1)).unwrap_err(),
        LocalError::NoPoles
    );
}

#[test]
fn relative_dimensions_follow_the_relation() {
    // one δ is eliminated: C(N−1, p) at every valid multidegree
    let c = chart(2, 1, 1, &[1, 3]);
    for p in 0..=4 {
        let rel = relative_log_complex(Q, &c, p, Window::cube(4, 1)).unwrap();
        let log = space(&c, SpaceKind::Log, p, BigRational::zero(), 1);
        for a in Window::cube(4, 1).points() {
            let n_log = log.slice(&a).unwrap().masks.len();
            if n_log == 0 {
                continue;
            }
            let big_n = if a[3] >= 1 { 4 } else { 3 };
            let want = binom(big_n - 1, p);
            assert_eq!(rel.space.dim_at(&a).unwrap(), want, "p={p} a={a:?}");
        }
    }
}

fn binom(n: usize, k: usize) -> usize {
    if k > n {
        0
    } else {
        (0..k).fold(1, |acc, i| acc * (n - i) / (i + 1))
    }
}

#[test]
fn c1_examples() {
    let c = chart(1, 0, 0, &[1]);
    let r = verify_c1_sequence(Q, &c, &Window::cube(1, 6), Exec::Sequential).unwrap();
    assert!(r.passed, "{r:?}");
    let c = chart(1, 0, 0, &[2]);
    let r = verify_c1_sequence(Q, &c, &Window::cube(1, 6), Exec::Sequential).unwrap();
    assert!(r.passed);
    let bar = GradedSheafSpace::new(
        Q,
        c.clone(),
        SpaceKind::RelativeBar,
        0,
        BigRational::zero(),
        Window::cube(1, 6),
    )
    .unwrap();
    let support: Vec<i64> = bar.dimension_table().iter().map(|(a, _)| a[0]).collect();
    assert_eq!(support, vec![0, 1]);
    let c = chart(2, 0, 0, &[1, 1]);
    let r = verify_c1_sequence(Q, &c, &Window::cube(2, 6), Exec::Parallel).unwrap();
    assert!(r.acyclic && r.exact && r.chain_maps && r.filtered);
}

#[test]
fn c1_small_family() {
    for c in ChartData::family(2, 3) {
        let r = verify_c1_sequence(Q, &c, &Window::cube(c.n(), 3), Exec::Parallel).unwrap();
        assert!(r.passed, "{c:?}: {:?}", r.failures.first());
    }
}

#[test]
fn quotient_lemma_examples() {
    let w2 = Window::cube(2, 4);
    let r = quotient_cohomology_lemma(Q, &chart(2, 0, 0, &[1, 1]), 1, &w2, Exec::Sequential).unwrap();
    assert_eq!((r.computed, r.formula), (1, 1));
    assert!(r.passed);
    assert_eq!(r.basis.len(), 1);
    let r = quotient_cohomology_lemma(Q, &chart(1, 1, 0, &[1]), 1, &w2, Exec::Sequential).unwrap();
    assert_eq!((r.computed, r.formula), (1, 1));
    for c in [chart(1, 0, 0, &[1]), chart(2, 1, 0, &[1, 1])] {
        let r = quotient_cohomology_lemma(Q, &c, 0, &Window::cube(c.n(), 3), Exec::Sequential).unwrap();
        assert_eq!((r.computed, r.formula), (1, 1));
        assert_eq!(r.support, vec![vec![0; c.n()]]);
    }
    assert_eq!(
        quotient_cohomology_lemma(Q, &chart(1, 0, 0, &[2]), 0, &Window::cube(1, 2), Exec::Sequential).unwrap_err(),
        LocalError::NotReduced(vec![2])
    );
}

#[test]
fn quotient_lemma_family() {
    for c in ChartData::family(3, 1).into_iter().filter(|c| c.ell > 0) {
        for p in 0..=c.n() {
            let r = quotient_cohomology_lemma(Q, &c, p, &Window::cube(c.n(), 2), Exec::Parallel).unwrap();
            assert!(r.passed, "{c:?} p={p}: {} vs {}", r.computed, r.formula);
        }
    }
}

#[test]
fn slices_over_a_prime_field() {
    let f5 = Field::prime(5).unwrap();
    let c = chart(2, 0, 0, &[1, 1]);
    let s = GradedSheafSpace::new(f5, c, SpaceKind::Kontsevich, 1, BigRational::zero(), Window::cube(2, 1)).unwrap();
    assert_eq!(s.dim_at(&[0, 0]).unwrap(), 1);
    assert_eq!(s.dim_at(&[1, 1]).unwrap(), 2);
}

fn arb_chart() -> impl Strategy<Value = ChartData> {
    (0usize..=2, 0usize..=1, 0usize..=1)
        .prop_flat_map(|(ell, m, pz)| (Just((ell, m, pz)), proptest::collection::vec(1u32..=3, ell)))
        .prop_map(|((ell, m, pz), e)| ChartData::new(ell, m, pz, e).unwrap())
}

fn arb_form(c: &ChartData) -> impl Strategy<Value = MonomialLogForm> {
    let n = c.n();
    proptest::collection::vec(
        (-3i64..=3, proptest::collection::vec(-3i64..=3, n), 0u32..(1u32 << n)),
        0..4,
    )
    .prop_map(move |terms| {
        let mut f = MonomialLogForm::zero(Q, n);
        for (c, a, mask) in terms {
            f = f.add(&MonomialLogForm::monomial(Q.int(c), a, &mask_list(mask)));
        }
        f
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn nabla_squares_to_zero(
        (c, f) in arb_chart().prop_flat_map(|c| (Just(c.clone()), arb_form(&c))),
        u in -3i64..=3,
        v in -3i64..=3,
    ) {
        let (u, v): (Scalar, Scalar) = (Q.int(u), Q.int(v));
        let once = nabla(&c, &f, &u, &v);
        prop_assert!(nabla(&c, &once, &u, &v).is_zero());
    }

    #[test]
    fn nabla_splits_by_multidegree(
        (c, f) in arb_chart().prop_flat_map(|c| (Just(c.clone()), arb_form(&c))),
    ) {
        // d keeps the multidegree, df∧ lowers it by exactly e
        let d = nabla(&c, &f, &Q.one(), &Q.zero());
        let df = nabla(&c, &f, &Q.zero(), &Q.one());
        let src = f.multidegrees(&c);
        for a in d.multidegrees(&c) {
            prop_assert!(src.contains(&a));
        }
        let e = c.shift();
        for a in df.multidegrees(&c) {
            let up: Vec<i64> = a.iter().zip(&e).map(|(x, s)| x + s).collect();
            prop_assert!(src.contains(&up));
        }
        prop_assert_eq!(nabla(&c, &f, &Q.one(), &Q.one()), d.add(&df));
    }

    #[test]
    fn kontsevich_slices_are_closed_and_free(
        c in arb_chart(),
        num in -4i64..=4,
        den in 1i64..=3,
        p in 0usize..=4,
    ) {
        let mu = rat(num, den);
        let s = space(&c, SpaceKind::Kontsevich, p.min(c.n()), mu.clone(), 2);
        let next = space(&c, SpaceKind::Kontsevich, (p + 1).min(c.n() + 1), mu.clone(), 2);
        for a in Window::cube(c.n(), 2).points() {
            let sl = s.slice(&a).unwrap();
            let basis = s.basis_of(&a).unwrap();
            prop_assert_eq!(basis.len(), sl.space.dim());
            if p + 1 > c.n() { continue; }
            let nx = next.slice(&a).unwrap();
            for b in &basis {
                let db = nabla(&c, b, &Q.one(), &Q.zero());
                if db.is_zero() { continue; }
                let v = nx.coordinates(&c, &db).unwrap();
                prop_assert!(nx.space.contains(&v));
            }
        }
    }

    #[test]
    fn yu_steps_decrease(
        c in arb_chart(),
        a in (-4i64..=4, 1i64..=6),
        b in (0i64..=6, 1i64..=6),
        k in 0usize..=3,
    ) {
        let lo = rat(a.0, a.1);
        let hi = &lo + rat(b.0, b.1);
        let k = k.min(c.n());
        let w = Window::cube(c.n(), 3);
        let big = fyu_step(Q, &c, &lo, k, w.clone()).unwrap();
        let small = fyu_step(Q, &c, &hi, k, w.clone()).unwrap();
        for pt in w.points() {
            prop_assert!(small.dim_at(&pt).unwrap() <= big.dim_at(&pt).unwrap());
        }
    }
}
