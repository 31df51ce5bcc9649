use logtwist::charp::*;
use logtwist::exactalg::Field;
use logtwist::localmodel::{nabla, ChartData, MonomialLogForm, Window};
use logtwist::par::Exec;
use proptest::prelude::*;

fn f5() -> Field {
    Field::Prime(5)
}

fn mono(field: Field, c: i64, e: Vec<i64>, wedge: &[usize]) -> MonomialLogForm {
    MonomialLogForm::monomial(field.int(c), e, wedge)
}

/// Evaluates a W₂ polynomial at an integer point mod p².
fn eval(g: &W2Poly, x: &[i64]) -> i64 {
    let q = g.modulus() as i64;
    let mut s = 0i64;
    for (e, c) in g.terms() {
        let mut t = c as i64;
        for (xi, ei) in x.iter().zip(e) {
            for _ in 0..*ei {
                t = t * xi % q;
            }
        }
        s = (s + t) % q;
    }
    s
}

#[test]
fn cartier_inverse_examples() {
    let p = 5;
    let f = f5();
    // x, y: one pole coordinate and one free coordinate
    let chart = ChartData::new(1, 0, 1, vec![1]).unwrap();
    let x = mono(f, 1, vec![1, 0], &[]);
    assert_eq!(cartier_inverse(&chart, &x), mono(f, 1, vec![p, 0], &[]));
    let dlog = mono(f, 1, vec![0, 0], &[0]);
    assert_eq!(cartier_inverse(&chart, &dlog), dlog);
    let prod = mono(f, 1, vec![0, 0], &[0, 1]);
    let expected = wedge(&dlog, &mono(f, 1, vec![0, p - 1], &[1]));
    assert_eq!(cartier_inverse(&chart, &prod), expected);
}

#[test]
fn closed_intersection_examples() {
    let f3 = Field::Prime(3);
    let c = ChartData::new(1, 0, 0, vec![1]).unwrap();
    let r = verify_closed_intersection(f3, &c, 0, &Window::cube(1, 6), Exec::Parallel).unwrap();
    assert!(r.passed && r.slices == 13, "{r:?}");
    let c = ChartData::new(1, 1, 0, vec![1]).unwrap();
    let r = verify_closed_intersection(f5(), &c, 1, &Window::cube(2, 6), Exec::Parallel).unwrap();
    assert!(r.passed, "{r:?}");
    // non-reduced pole: reported only
    let c = ChartData::new(1, 0, 0, vec![2]).unwrap();
    let r = verify_closed_intersection(f3, &c, 0, &Window::cube(1, 6), Exec::Sequential).unwrap();
    assert!(!r.reduced);
    println!(
        "e = 2, a = 0, p = 3: passed = {}, failures = {:?}",
        r.passed, r.failures
    );
}

#[test]
fn cartier_iso_one_pole() {
    // f = 1/x: H^0 lives at w ∈ pℤ, w ≥ 1 and H^1 at w ∈ pℤ, w ≥ 0
    let c = ChartData::new(1, 0, 0, vec![1]).unwrap();
    let r0 = verify_cartier_iso_omega_f(&c, 0, 3, &Window::cube(1, 6), Exec::Parallel).unwrap();
    assert!(r0.passed, "{r0:?}");
    assert_eq!(r0.nonzero, vec![(vec![3], 1), (vec![6], 1)]);
    let r1 = verify_cartier_iso_omega_f(&c, 1, 3, &Window::cube(1, 6), Exec::Parallel).unwrap();
    assert!(r1.passed);
    assert_eq!(r1.nonzero, vec![(vec![0], 1), (vec![3], 1), (vec![6], 1)]);
    assert_eq!(r1.frobenius_slices, 5);
}

#[test]
fn cartier_iso_two_poles() {
    let c = ChartData::new(2, 0, 0, vec![1, 1]).unwrap();
    for a in 0..=2 {
        let r = verify_cartier_iso_omega_f(&c, a, 5, &Window::cube(2, 6), Exec::Parallel).unwrap();
        assert!(r.passed, "a = {a}: {:?}", r.failures);
        assert!(r.nonzero.iter().all(|(w, _)| w.iter().all(|x| x % 5 == 0)));
    }
}

#[test]
fn cartier_iso_needs_reduced_poles() {
    // f = x^{-2}: x^p is a closed section of Ω_f^0 = x²k[x], but x′ ∉ x′²k[x′]
    let c = ChartData::new(1, 0, 0, vec![2]).unwrap();
    let r = verify_cartier_iso_omega_f(&c, 0, 3, &Window::cube(1, 6), Exec::Sequential).unwrap();
    assert!(!r.passed);
    assert!(r
        .failures
        .iter()
        .any(|s| s.weight == vec![3] && s.h == 1 && s.source == 0));
}

#[test]
fn canonical_lifts_have_zero_u() {
    let atlas = W2ChartAtlas::affine(3, 2, 2, 2).unwrap();
    let lifts = build_frob_lift(&atlas, &[]).unwrap();
    assert!(lifts.iter().all(FrobLift::is_canonical));
    let r = verify_u_sum(&atlas, &lifts[0]).unwrap();
    assert!(r.holds && r.u_sum == "0");
}

#[test]
fn p1_perturbed_lift() {
    let atlas = W2ChartAtlas::p1(5, false).unwrap();
    let pert = Perturbation {
        chart: 0,
        coord: 0,
        v: vec![(vec![1], 1)],
    };
    let lifts = build_frob_lift(&atlas, &[pert]).unwrap();
    assert_eq!(lifts[0].u[0], W2Poly::var_power(5, 1, 0, 1));
    assert!(lifts[1].is_canonical());
    assert_eq!(lifts[1].images[0], W2Poly::var_power(25, 1, 0, 5));
    // the chart at ∞ meets P: any correction breaks F̃*(f̃′) = f̃^p
    let bad = Perturbation {
        chart: 1,
        coord: 0,
        v: vec![(vec![6], 1)],
    };
    assert!(matches!(
        build_frob_lift(&atlas, &[bad]),
        Err(CharpError::LiftCondition { chart: 1, .. })
    ));
    let not_divisible = Perturbation {
        chart: 1,
        coord: 0,
        v: vec![(vec![1], 1)],
    };
    assert!(build_frob_lift(&atlas, &[not_divisible]).is_err());
}

#[test]
fn u_sum_on_two_poles() {
    // u1 = x2, u2 = −x2 on f = (x1x2)^{-1}, p = 3
    let atlas = W2ChartAtlas::affine(3, 2, 2, 2).unwrap();
    let perts = vec![
        Perturbation {
            chart: 0,
            coord: 0,
            v: vec![(vec![3, 1], 1)],
        },
        Perturbation {
            chart: 0,
            coord: 1,
            v: vec![(vec![0, 4], -1)],
        },
    ];
    let lifts = build_frob_lift(&atlas, &perts).unwrap();
    let r = verify_u_sum(&atlas, &lifts[0]).unwrap();
    assert!(r.holds);
    // numeric oracle: F̃*(x̃1′x̃2′) ≡ (x1x2)^3 mod 9 at every unit point
    let units = [1, 2, 4, 5, 7, 8];
    for &a in &units {
        for &b in &units {
            let lhs = eval(&lifts[0].images[0], &[a, b]) * eval(&lifts[0].images[1], &[a, b]) % 9;
            assert_eq!(lhs, (a * b).pow(3) % 9, "at ({a}, {b})");
        }
    }
}

#[test]
fn invalid_lift_reports_residual() {
    let atlas = W2ChartAtlas::affine(3, 2, 2, 2).unwrap();
    // u1 = 1, u2 = 0
    let images = vec![
        W2Poly::from_terms(9, 2, &[(vec![3, 0], 1), (vec![3, 0], 3)]),
        W2Poly::var_power(9, 2, 1, 3),
    ];
    let lift = FrobLift::new(&atlas, 0, images).unwrap();
    let r = verify_u_sum(&atlas, &lift).unwrap();
    assert!(!r.holds);
    assert_eq!(r.u_sum, "1");
    assert_eq!(r.residual, "p·(1)");
    assert!(!r.bound_mismatch);
    let pert = Perturbation {
        chart: 0,
        coord: 0,
        v: vec![(vec![3, 0], 1)],
    };
    assert!(matches!(
        build_frob_lift(&atlas, &[pert]),
        Err(CharpError::LiftCondition { .. })
    ));
    // numeric oracle: the product misses (x1x2)^3 by 3·(x1x2)^3
    let lhs = eval(&lift.images[0], &[2, 1]) * eval(&lift.images[1], &[2, 1]) % 9;
    assert_eq!(lhs, 4 * 8 % 9);
}

#[test]
fn bound_mismatch_is_flagged() {
    // ℓ = 1, m = 2: u1 = 1 fails at r = 1 while u1 + u2 = 0 at r = 2
    let atlas = W2ChartAtlas::affine(3, 2, 1, 2).unwrap();
    let images = vec![
        W2Poly::from_terms(9, 2, &[(vec![3, 0], 4)]),
        W2Poly::from_terms(9, 2, &[(vec![0, 3], 7)]),
    ];
    let lift = FrobLift::new(&atlas, 0, images).unwrap();
    let r = verify_u_sum(&atlas, &lift).unwrap();
    assert!(!r.holds && r.bound_mismatch);
    assert_eq!(r.other_bounds, vec![2]);
}

#[test]
fn splitting_canonical_p1() {
    let atlas = W2ChartAtlas::p1(5, false).unwrap();
    let lifts = build_frob_lift(&atlas, &[]).unwrap();
    let (data, r) = assemble_splitting(&atlas, &lifts, 1, 3, Exec::Parallel).unwrap();
    assert!(r.passed, "{r:?}");
    assert!(r.phi_zero && r.reproduces_cartier);
    assert_eq!(data.psi.len(), 2);
    assert!(matches!(
        assemble_splitting(&atlas, &lifts, 5, 3, Exec::Parallel),
        Err(CharpError::DegreeTooLarge { i: 5, p: 5 })
    ));
}

#[test]
fn splitting_perturbed_p1() {
    let atlas = W2ChartAtlas::p1(5, false).unwrap();
    let pert = Perturbation {
        chart: 0,
        coord: 0,
        v: vec![(vec![1], 1)],
    };
    let lifts = build_frob_lift(&atlas, &[pert]).unwrap();
    let (data, r) = assemble_splitting(&atlas, &lifts, 1, 3, Exec::Parallel).unwrap();
    assert!(r.passed, "{r:?}");
    assert!(!r.phi_zero && !r.reproduces_cartier);
    // φ_01(dz′) = ((z^p + pz) − z^p)/p = z
    let phi01 = &data.phi.iter().find(|(k, _)| *k == (0, 1)).unwrap().1;
    assert_eq!(phi01[0], mono(f5(), 1, vec![1], &[]));
    // ψ_0(dz′) = z^4 dz + dz
    assert_eq!(
        data.psi[0][0],
        mono(f5(), 1, vec![4], &[0]).add(&mono(f5(), 1, vec![0], &[0]))
    );
}

#[test]
fn splitting_with_horizontal_point() {
    let atlas = W2ChartAtlas::p1(5, true).unwrap();
    // chart 0 meets D = (z): the correction must be divisible by z^5
    let pert = Perturbation {
        chart: 0,
        coord: 0,
        v: vec![(vec![6], 2)],
    };
    let lifts = build_frob_lift(&atlas, &[pert]).unwrap();
    assert_eq!(lifts[0].u[0], W2Poly::from_terms(5, 1, &[(vec![1], 2)]));
    let (_, r) = assemble_splitting(&atlas, &lifts, 1, 3, Exec::Sequential).unwrap();
    assert!(r.passed, "{r:?}");
}

#[test]
fn splitting_degree_two_on_a_surface() {
    let atlas = W2ChartAtlas::affine(5, 2, 1, 2).unwrap();
    let canonical = build_frob_lift(&atlas, &[]).unwrap();
    let (_, r) = assemble_splitting(&atlas, &canonical, 2, 2, Exec::Parallel).unwrap();
    assert!(r.passed && r.reproduces_cartier, "{r:?}");
    // u2 = x1 on the horizontal coordinate
    let pert = Perturbation {
        chart: 0,
        coord: 1,
        v: vec![(vec![1, 5], 1)],
    };
    let lifts = build_frob_lift(&atlas, &[pert]).unwrap();
    let (_, r) = assemble_splitting(&atlas, &lifts, 2, 2, Exec::Parallel).unwrap();
    assert!(r.passed, "{r:?}");
    assert!(!r.reproduces_cartier);
}

#[test]
fn degeneration_on_p1() {
    let r = charp_degeneration_dims(&W2ChartAtlas::p1(5, false).unwrap(), None).unwrap();
    assert!(r.asserted && r.passed);
    assert_eq!(r.dims_zero, vec![0, 0, 0]);
    let r = charp_degeneration_dims(&W2ChartAtlas::p1(5, true).unwrap(), None).unwrap();
    assert!(r.asserted && r.passed);
    // Ω¹(log 0 + ∞) = O contributes one section in degree 1
    assert_eq!(r.dims_zero, vec![0, 1, 0]);
    assert_eq!(r.dims_d, r.dims_zero);
    let r = charp_degeneration_dims(&W2ChartAtlas::p1(2, false).unwrap(), None).unwrap();
    assert!(!r.asserted);
    println!("p = 2: d-complex {:?}, zero complex {:?}", r.dims_d, r.dims_zero);
    assert!(charp_degeneration_dims(&W2ChartAtlas::affine(5, 1, 1, 1).unwrap(), None).is_err());
}

#[test]
fn config_builds_atlases() {
    let c: CharpConfig = serde_json::from_str(r#"{"p": 5, "atlas": "P1", "i_max": 1}"#).unwrap();
    assert_eq!(c.build_atlas().unwrap(), W2ChartAtlas::p1(5, false).unwrap());
    let c: CharpConfig = serde_json::from_str(r#"{"p": 4, "atlas": "An", "n": 2, "ell": 1, "m": 1}"#).unwrap();
    assert!(c.build_atlas().is_err());
}

fn small_poly(n: usize) -> impl Strategy<Value = Vec<(Vec<i64>, i64)>> {
    prop::collection::vec((prop::collection::vec(0i64..3, n), -4i64..5), 0..3)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn cartier_inverse_is_closed_and_multiplicative(
        a in prop::collection::vec((prop::collection::vec(-2i64..4, 2), 0u32..4, 1i64..5), 1..4),
        b in prop::collection::vec((prop::collection::vec(-2i64..4, 2), 0u32..4, 1i64..5), 1..4),
    ) {
        let f = f5();
        let chart = ChartData::new(1, 0, 1, vec![1]).unwrap();
        let build = |terms: &[(Vec<i64>, u32, i64)]| {
            terms.iter().fold(MonomialLogForm::zero(f, 2), |acc, (e, m, c)| {
                let idx: Vec<usize> = (0..2).filter(|i| m & (1 << i) != 0).collect();
                acc.add(&mono(f, *c, e.clone(), &idx))
            })
        };
        let (x, y) = (build(&a), build(&b));
        let cx = cartier_inverse(&chart, &x);
        prop_assert!(nabla(&chart, &cx, &f.one(), &f.zero()).is_zero());
        prop_assert_eq!(cartier_inverse(&chart, &wedge(&x, &y)), wedge(&cx, &cartier_inverse(&chart, &y)));
    }

    #[test]
    fn accepted_lifts_satisfy_u_sum(u in small_poly(2), w in small_poly(2)) {
        // u1 = u, u2 = −u on the poles; w on the free coordinate
        let atlas = W2ChartAtlas::affine(3, 3, 2, 2).unwrap();
        let shift = |t: &[(Vec<i64>, i64)], j: usize, sign: i64| -> Vec<(Vec<i64>, i64)> {
            t.iter().map(|(e, c)| {
                let mut e3 = vec![e[0], e[1], 0];
                e3[j] += 3;
                (e3, sign * c)
            }).collect()
        };
        let free: Vec<(Vec<i64>, i64)> = w.iter().map(|(e, c)| (vec![e[0], e[1], 1], *c)).collect();
        let perts = vec![
            Perturbation { chart: 0, coord: 0, v: shift(&u, 0, 1) },
            Perturbation { chart: 0, coord: 1, v: shift(&u, 1, -1) },
            Perturbation { chart: 0, coord: 2, v: free },
        ];
        let lifts = build_frob_lift(&atlas, &perts).unwrap();
        prop_assert!(verify_u_sum(&atlas, &lifts[0]).unwrap().holds);
    }

    #[test]
    fn perturbed_splittings_pass(u in small_poly(2)) {
        let atlas = W2ChartAtlas::affine(5, 2, 1, 2).unwrap();
        let v: Vec<(Vec<i64>, i64)> = u.iter().map(|(e, c)| (vec![e[0], e[1] + 5], *c)).collect();
        let lifts = build_frob_lift(&atlas, &[Perturbation { chart: 0, coord: 1, v }]).unwrap();
        let (_, r) = assemble_splitting(&atlas, &lifts, 2, 1, Exec::Parallel).unwrap();
        prop_assert!(r.passed, "{:?}", r);
    }
}

#[test]
fn invalid_lift_breaks_the_splitting() {
    // u1 = x2, u2 = 0 on f = (x1x2)^{-1}: ψ(η′) = η + x2·dx2/x2 leaves Ω_f^1
    let atlas = W2ChartAtlas::affine(5, 2, 2, 2).unwrap();
    let images = vec![
        W2Poly::from_terms(25, 2, &[(vec![5, 0], 1), (vec![5, 1], 5)]),
        W2Poly::var_power(25, 2, 1, 5),
    ];
    let lift = FrobLift::new(&atlas, 0, images).unwrap();
    assert!(!verify_u_sum(&atlas, &lift).unwrap().holds);
    let (_, r) = assemble_splitting(&atlas, &[lift], 1, 1, Exec::Sequential).unwrap();
    assert!(!r.passed);
    let check = r
        .checks
        .iter()
        .find(|c| c.name == "psi_of_kontsevich_in_kontsevich")
        .unwrap();
    assert!(!check.passed);
}
