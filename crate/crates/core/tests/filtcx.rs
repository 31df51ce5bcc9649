use logtwist::exactalg::{Field, Matrix, Scalar, Vector};
use logtwist::filtcx::json::{FilteredDoc, PageDoc};
use logtwist::filtcx::random::{instance_rng, random_filtered, RandomShape};
use logtwist::filtcx::{
    fuzz_filtered, fuzz_filtered_with, triple_check, CochainComplex, FilteredCochainComplex, TripleCheck,
};
use logtwist::par::Exec;
use num_bigint::BigInt;
use num_rational::BigRational;
use proptest::prelude::*;

fn q() -> Field {
    Field::Rational
}

fn rat(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

fn vecq(xs: &[i64]) -> Vector {
    xs.iter().map(|&x| q().int(x)).collect()
}

/// 0 → k<a> → k<b> → 0, d(a) = b, F^0 = all, F^1 = <b>, F^2 = 0.
fn killed_b() -> FilteredCochainComplex {
    let base = CochainComplex::new(q(), 0, vec![1, 1], vec![Matrix::from_i64(q(), &[&[1]])]).unwrap();
    FilteredCochainComplex::new(
        base,
        vec![
            (rat(0, 1), vec![vec![vecq(&[1])], vec![vecq(&[1])]]),
            (rat(1, 1), vec![vec![], vec![vecq(&[1])]]),
        ],
    )
    .unwrap()
}

#[test]
fn non_degenerate_example_has_witness() {
    let f = killed_b();
    let deg = f.e1_degenerates();
    assert!(!deg.degenerates);
    let w = &deg.witnesses[0];
    assert_eq!(w.lambda, rat(1, 1));
    assert_eq!(w.degree, 1);
    assert!(!w.class[0].is_zero());
    assert_eq!(deg.witnesses.len(), 1);
}

#[test]
fn non_degenerate_pages() {
    let f = killed_b();
    assert_eq!(f.spectral_page(1).total(), 2);
    assert_eq!(f.spectral_page(2).total(), 0);
    assert_eq!(f.e_infinity().total(), 0);
    // E_0 is the graded complex itself
    assert_eq!(f.spectral_page(0).total(), 2);
}

#[test]
fn non_degenerate_rees_torsion() {
    let s = killed_b().rees_strictness();
    assert!(!s.torsion_free);
    assert!(s.certified);
    assert_eq!(s.exponents(), vec![1]);
    assert_eq!(s.torsion[0].degree, 1);
}

#[test]
fn non_degenerate_induced_filtration() {
    let f = killed_b();
    assert_eq!(f.induced_filtration_on_h(1), vec![(rat(0, 1), 0), (rat(1, 1), 0)]);
}

#[test]
fn witness_survives_direct_sum() {
    let good = FilteredCochainComplex::trivial(CochainComplex::concentrated(q(), 0, 2), rat(0, 1));
    let sum = killed_b().direct_sum(&good);
    let deg = sum.e1_degenerates();
    assert!(!deg.degenerates);
    assert!(deg.witnesses.iter().any(|w| w.lambda == rat(1, 1) && w.degree == 1));
}

#[test]
fn trivial_filtration() {
    let base = CochainComplex::new(
        q(),
        0,
        vec![2, 2, 1],
        vec![
            Matrix::from_i64(q(), &[&[1, 0], &[0, 0]]),
            Matrix::from_i64(q(), &[&[0, 1]]),
        ],
    )
    .unwrap();
    let h = base.cohomology_dims();
    let f = FilteredCochainComplex::trivial(base, rat(0, 1));
    assert!(f.e1_degenerates().degenerates);
    let e1 = f.spectral_page(1);
    for (k, hk) in h.iter().enumerate() {
        assert_eq!(e1.dim(0, k as i32), *hk);
    }
    assert!(f.rees_strictness().torsion_free);
    for k in 0..3 {
        assert_eq!(f.induced_filtration_on_h(k), vec![(rat(0, 1), h[k as usize])]);
    }
}

#[test]
fn stupid_filtration_columns() {
    // σ^{≥p} on k^2 → k^3 with rank-1 differential
    let d = Matrix::from_i64(q(), &[&[1, 2], &[0, 0], &[2, 4]]);
    let base = CochainComplex::new(q(), 0, vec![2, 3], vec![d]).unwrap();
    let f = FilteredCochainComplex::new(
        base,
        vec![
            (
                rat(0, 1),
                vec![
                    vec![vecq(&[1, 0]), vecq(&[0, 1])],
                    vec![vecq(&[1, 0, 0]), vecq(&[0, 1, 0]), vecq(&[0, 0, 1])],
                ],
            ),
            (
                rat(1, 1),
                vec![vec![], vec![vecq(&[1, 0, 0]), vecq(&[0, 1, 0]), vecq(&[0, 0, 1])]],
            ),
        ],
    )
    .unwrap();
    let e1 = f.spectral_page(1);
    assert_eq!(e1.dim(0, 0), 2);
    assert_eq!(e1.dim(1, 0), 3);
    assert_eq!(e1.total(), 5);
    // d_1 is the original differential
    let d1 = e1.d1.as_ref().unwrap();
    let block = d1.iter().find(|b| b.p == 0 && b.degree == 0).unwrap();
    assert_eq!(block.matrix.rank(), 1);
    assert_eq!(f.spectral_page(2).total(), f.cohomology_total());
}

#[test]
fn zero_differential_is_strict() {
    let base = CochainComplex::new(q(), 0, vec![2, 2], vec![Matrix::zeros(q(), 2, 2)]).unwrap();
    let f = FilteredCochainComplex::new(
        base,
        vec![
            (
                rat(0, 1),
                vec![vec![vecq(&[1, 0]), vecq(&[0, 1])], vec![vecq(&[1, 0]), vecq(&[0, 1])]],
            ),
            (rat(1, 2), vec![vec![vecq(&[1, 1])], vec![]]),
        ],
    )
    .unwrap();
    assert!(f.rees_strictness().torsion_free);
    assert!(f.e1_degenerates().degenerates);
}

#[test]
fn planted_split_of_h1() {
    // A: k in degree 1 with F^1 = 0; B: k in degree 1 with F^1 = B;
    // C: acyclic k → k inside F^1. The sum has dim H^1 = 2 split 1 + 1.
    let step = |lo: bool| -> FilteredCochainComplex {
        let base = CochainComplex::concentrated(q(), 1, 1);
        let mut steps = vec![(rat(0, 1), vec![vec![vecq(&[1])]])];
        steps.push((rat(1, 1), if lo { vec![vec![]] } else { vec![vec![vecq(&[1])]] }));
        FilteredCochainComplex::new(base, steps).unwrap()
    };
    let acyclic = CochainComplex::new(q(), 0, vec![1, 1], vec![Matrix::identity(q(), 1)]).unwrap();
    let c = FilteredCochainComplex::new(
        acyclic,
        vec![
            (rat(0, 1), vec![vec![vecq(&[1])], vec![vecq(&[1])]]),
            (rat(1, 1), vec![vec![vecq(&[1])], vec![vecq(&[1])]]),
        ],
    )
    .unwrap();
    let f = step(true).direct_sum(&step(false)).direct_sum(&c);
    assert_eq!(f.base().cohomology_dim(1), 2);
    assert!(f.e1_degenerates().degenerates);
    let dims: Vec<usize> = f.induced_filtration_on_h(1).into_iter().map(|(_, d)| d).collect();
    assert_eq!(dims, vec![2, 1]);
}

#[test]
fn increasing_view_reads_the_same_store() {
    let f = killed_b();
    assert_eq!(f.increasing_step(&rat(-1, 1), 1).dim(), 1);
    assert_eq!(f.increasing_step(&rat(-1, 1), 0).dim(), 0);
    assert_eq!(f.increasing_step(&rat(-2, 1), 1).dim(), 0);
    assert_eq!(f.increasing_step(&rat(0, 1), 0).dim(), 1);
    // constant on (0, 1]
    assert_eq!(f.step_at(&rat(1, 2), 0).dim(), 0);
    assert_eq!(f.step_at(&rat(-5, 1), 0).dim(), 1);
}

#[test]
fn invalid_filtrations_rejected() {
    let base = CochainComplex::new(q(), 0, vec![1, 1], vec![Matrix::from_i64(q(), &[&[1]])]).unwrap();
    // F^1 = <a> is not closed under d
    let bad = FilteredCochainComplex::new(
        base.clone(),
        vec![
            (rat(0, 1), vec![vec![vecq(&[1])], vec![vecq(&[1])]]),
            (rat(1, 1), vec![vec![vecq(&[1])], vec![]]),
        ],
    );
    assert!(bad.is_err());
    let not_exhaustive = FilteredCochainComplex::new(base.clone(), vec![(rat(0, 1), vec![vec![], vec![vecq(&[1])]])]);
    assert!(not_exhaustive.is_err());
    let unordered = FilteredCochainComplex::new(
        base,
        vec![
            (rat(1, 1), vec![vec![vecq(&[1])], vec![vecq(&[1])]]),
            (rat(0, 1), vec![vec![], vec![]]),
        ],
    );
    assert!(unordered.is_err());
}

#[test]
fn json_round_trip_and_page_doc() {
    let f = killed_b();
    let doc = FilteredDoc::from(&f);
    let text = serde_json::to_string(&doc).unwrap();
    let back: FilteredDoc = serde_json::from_str(&text).unwrap();
    let g = back.build().unwrap();
    assert_eq!(triple_check(&g), triple_check(&f));
    let page = PageDoc::from(&f.spectral_page(1));
    let v = serde_json::to_value(&page).unwrap();
    assert_eq!(v["r"], 1);
    assert!(v["d1"].is_array());
    assert_eq!(v["entries"][0]["lambda"], serde_json::json!([0, 1]));
}

#[test]
fn fuzz_seed_one() {
    let stats = fuzz_filtered(1, 200);
    assert_eq!(
        stats.consistent,
        200,
        "{:?}",
        stats.counterexamples.first().map(|c| &c.check)
    );
    // both outcomes occur
    assert!(stats.degenerate > 0 && stats.degenerate < 200);
}

#[test]
fn corrupted_checker_is_caught() {
    // E_0 in place of E_1 disagrees whenever d is nonzero on some graded piece
    let broken = |f: &FilteredCochainComplex| TripleCheck {
        e1_total: f.spectral_page(0).total(),
        ..triple_check(f)
    };
    let stats = fuzz_filtered_with(1, 50, Exec::Sequential, broken);
    assert!(!stats.counterexamples.is_empty());
    let cx = &stats.counterexamples[0];
    let rebuilt = cx.complex.build().unwrap();
    assert!(triple_check(&rebuilt).consistent());
}

fn arb_filtered() -> impl Strategy<Value = FilteredCochainComplex> {
    any::<u64>().prop_map(|s| random_filtered(&mut instance_rng(s, 0), q(), &RandomShape::default()))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn three_formulations_agree(f in arb_filtered()) {
        let c = triple_check(&f);
        prop_assert!(c.consistent(), "{:?}", c);
        prop_assert!(c.e1_total >= c.h_total);
    }

    #[test]
    fn e_infinity_sums_to_cohomology(f in arb_filtered()) {
        let e = f.e_infinity();
        for k in f.base().degrees() {
            prop_assert_eq!(e.diagonal(k), f.base().cohomology_dim(k));
        }
    }

    #[test]
    fn e2_is_homology_of_e1(f in arb_filtered()) {
        let e1 = f.spectral_page(1);
        let e2 = f.spectral_page(2);
        for blk in e1.d1.as_ref().unwrap() {
            let p = blk.p;
            let k = blk.degree;
            let incoming = e1.d1.as_ref().unwrap().iter()
                .find(|b| b.p == p - 1 && b.degree == k - 1)
                .map_or(0, |b| b.matrix.rank());
            let expected = e1.dim(p, k - p) - blk.matrix.rank() - incoming;
            prop_assert_eq!(e2.dim(p, k - p), expected);
        }
    }

    #[test]
    fn stable_under_sums_and_shifts(f in arb_filtered(), g in arb_filtered(), num in -5i64..5, den in 1i64..4) {
        let df = f.e1_degenerates().degenerates;
        let dg = g.e1_degenerates().degenerates;
        prop_assert_eq!(f.direct_sum(&g).e1_degenerates().degenerates, df && dg);
        prop_assert_eq!(f.shift_index(&rat(num, den)).e1_degenerates().degenerates, df);
    }

    #[test]
    fn graded_dims_match_graded_cohomology(f in arb_filtered()) {
        prop_assume!(f.e1_degenerates().degenerates);
        for k in f.base().degrees() {
            let dims: Vec<usize> = f.induced_filtration_on_h(k).into_iter().map(|(_, d)| d).collect();
            prop_assert_eq!(dims[0], f.base().cohomology_dim(k));
            for i in 0..dims.len() {
                let next = dims.get(i + 1).copied().unwrap_or(0);
                prop_assert!(dims[i] >= next);
                prop_assert_eq!(dims[i] - next, f.graded_piece(i).cohomology_dim(k));
            }
        }
    }

    #[test]
    fn rees_specialisations(f in arb_filtered()) {
        let rees = f.rees_complex();
        let one = rees.specialize(&q().one());
        let zero = rees.specialize(&Scalar::Rational(BigRational::from_integer(BigInt::from(0))));
        let base_ranks: Vec<usize> = f.base().differentials().iter().map(Matrix::rank).collect();
        let one_ranks: Vec<usize> = one.iter().map(Matrix::rank).collect();
        prop_assert_eq!(one_ranks, base_ranks);
        for (j, m) in zero.iter().enumerate() {
            let k = f.base().start() + j as i32;
            let gr_rank: usize = (0..f.levels())
                .map(|i| f.graded_piece(i).d(k).map_or(0, Matrix::rank))
                .sum();
            prop_assert_eq!(m.rank(), gr_rank);
        }
    }

    #[test]
    fn json_documents_rebuild(f in arb_filtered()) {
        let text = serde_json::to_string(&FilteredDoc::from(&f)).unwrap();
        let g = serde_json::from_str::<FilteredDoc>(&text).unwrap().build().unwrap();
        prop_assert_eq!(g.base(), f.base());
        prop_assert_eq!(g.lambdas(), f.lambdas());
    }
}
