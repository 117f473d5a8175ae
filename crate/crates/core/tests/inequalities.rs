use num_complex::Complex64;
use proptest::prelude::*;
use turanlab::families::{generate, loglog_fit, FamilyKind, FamilySpec};
use turanlab::inequalities::{check_all, derive_seed, param_cells, sweep, InequalityId, SweepConfig};
use turanlab::{check, make_root_poly, Params, PolyClass};

const INF: f64 = f64::INFINITY;

#[test]
fn equality_family_is_sharp() {
    for n in 1..=30 {
        let p = generate(&FamilySpec::new(FamilyKind::OnePlusXPowN, n)).unwrap();
        let r = check(InequalityId::Ineq5, &p, Params::default()).unwrap();
        assert!((r.ratio - 1.0).abs() <= 1e-7, "INEQ-5 n={n}: {}", r.ratio);
        for e in [1.0, 1.5, 2.0, 3.0, 5.0, 10.0] {
            let r = check(InequalityId::Ineq6, &p, Params::p(e)).unwrap();
            assert!((r.ratio - 1.0).abs() <= 1e-7, "INEQ-6 n={n} p={e}: {}", r.ratio);
        }
    }
}

#[test]
fn infinite_q_delegates() {
    for seed in 0..20 {
        let p = generate(&FamilySpec::seeded(FamilyKind::RandomHalfDisk, 1 + seed as usize % 9, seed)).unwrap();
        let a = check(InequalityId::Ineq7, &p, Params::q(INF)).unwrap();
        let b = check(InequalityId::Ineq1, &p, Params::default()).unwrap();
        assert_eq!((a.lhs, a.rhs, a.ratio, a.pass), (b.lhs, b.rhs, b.ratio, b.pass));

        let s = generate(&FamilySpec::seeded(FamilyKind::RandomSegment, 1 + seed as usize % 9, seed)).unwrap();
        let a = check(InequalityId::Ineq8, &s, Params::q(INF)).unwrap();
        let b = check(InequalityId::Ineq5, &s, Params::default()).unwrap();
        assert_eq!((a.lhs, a.rhs, a.ratio, a.pass), (b.lhs, b.rhs, b.ratio, b.pass));
    }
}

#[test]
fn order_optimality_band_on_qn() {
    let ns: Vec<usize> = (5..=100).step_by(5).collect();
    for (p, q) in [(1.0, 1.0), (2.0, 2.0), (2.0, 4.0)] {
        let pts: Vec<(f64, f64)> = ns
            .iter()
            .map(|&n| {
                let poly = generate(&FamilySpec::new(FamilyKind::Qn, n)).unwrap();
                let r = check(InequalityId::Ineq4, &poly, Params::pq(p, q)).unwrap();
                assert!(r.pass.is_none());
                assert!(r.ratio > 0.0 && r.ratio.is_finite());
                (n as f64, r.ratio)
            })
            .collect();
        let (slope, _) = loglog_fit(&pts).unwrap();
        assert!(slope.abs() <= 0.05, "(p,q)=({p},{q}): slope {slope}");
    }
}

#[test]
fn class_restrictions() {
    let disk = make_root_poly(&[Complex64::new(0.2, 0.5)], PolyClass::HalfDisk).unwrap();
    for id in InequalityId::ALL {
        let res = check(id, &disk, Params { p: Some(2.0), q: Some(2.0), variant: None });
        match id {
            InequalityId::Ineq1 | InequalityId::Ineq7 | InequalityId::IneqR1 | InequalityId::Lem9 => {
                assert!(res.is_ok(), "{id}")
            }
            _ => assert!(matches!(res, Err(turanlab::Error::ClassMismatch { .. })), "{id}"),
        }
    }
}

#[test]
fn qn_passes_every_proven_check() {
    let ids: Vec<InequalityId> = InequalityId::ALL.into_iter().filter(|id| !id.is_statistic()).collect();
    for n in 1..=10 {
        let poly = generate(&FamilySpec::new(FamilyKind::Qn, n)).unwrap();
        let (reports, errors) = check_all(&poly, &ids, &[1.0, 2.0, 5.0, INF], &[1.5, 2.0, 5.0, INF], None);
        assert!(errors.iter().all(|e| !e.numerical), "{errors:?}");
        assert!(reports.iter().all(|r| r.pass == Some(true)), "n={n}");
    }
}

#[test]
fn sweep_is_reproducible_and_records_param_errors() {
    let cfg = SweepConfig {
        ids: vec![InequalityId::Ineq1, InequalityId::Ineq4],
        family: FamilyKind::RandomHalfDisk,
        n_range: (2, 6),
        p_grid: vec![0.25, 1.0],
        q_grid: vec![0.5, 2.0],
        trials: 5,
        seed: 17,
    };
    let mut seg = cfg.clone();
    seg.family = FamilyKind::RandomSegment;
    let a = sweep(&seg).unwrap();
    let b = sweep(&seg).unwrap();
    assert_eq!(a, b);
    assert!(a.errors.iter().any(|e| e.inequality_id == InequalityId::Ineq4 && !e.numerical));
    assert!(a.summaries.iter().all(|s| s.count == 5));
    // INEQ-4 rejects the half disk class in every cell
    let d = sweep(&cfg).unwrap();
    assert!(d.reports.iter().all(|r| r.inequality_id == InequalityId::Ineq1));
    assert_eq!(derive_seed(17, 3, 1), derive_seed(17, 3, 1));
    assert_ne!(derive_seed(17, 3, 1), derive_seed(17, 1, 3));
}

#[test]
fn lemma_cells_on_segment_cover_both_variants() {
    assert_eq!(param_cells(InequalityId::Lem9, PolyClass::Segment, &[1.0], &[2.0, 3.0]).len(), 4);
    assert_eq!(param_cells(InequalityId::Lem9, PolyClass::HalfDisk, &[1.0], &[2.0, 3.0]).len(), 2);
    assert_eq!(param_cells(InequalityId::IneqQt, PolyClass::Segment, &[1.0, 2.0], &[2.0, 3.0]).len(), 4);
}

fn disk_roots() -> impl Strategy<Value = Vec<Complex64>> {
    prop::collection::vec((0.0f64..=1.0, 0.0f64..=std::f64::consts::PI), 1..=10)
        .prop_map(|v| v.into_iter().map(|(r, t)| Complex64::from_polar(r, t)).collect())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn reports_ignore_root_order(zs in disk_roots(), k in 0usize..10) {
        let mut shuffled = zs.clone();
        shuffled.rotate_left(k % zs.len());
        shuffled.reverse();
        let a = make_root_poly(&zs, PolyClass::HalfDisk).unwrap();
        let b = make_root_poly(&shuffled, PolyClass::HalfDisk).unwrap();
        let ids = [InequalityId::Ineq1, InequalityId::Ineq7, InequalityId::IneqR1, InequalityId::Lem9];
        let ra = check_all(&a, &ids, &[2.0], &[2.0, INF], None);
        let rb = check_all(&b, &ids, &[2.0], &[2.0, INF], None);
        prop_assert_eq!(ra, rb);
    }

    #[test]
    fn proven_ids_hold_on_random_segments(rs in prop::collection::vec(-1.0f64..=1.0, 1..=14)) {
        let poly = turanlab::RootPoly::from_real(&rs, PolyClass::Segment).unwrap();
        let ids: Vec<InequalityId> = InequalityId::ALL.into_iter().filter(|id| !id.is_statistic()).collect();
        let (reports, errors) = check_all(&poly, &ids, &[1.0, 2.0, 5.0, INF], &[1.5, 2.0, 5.0, INF], None);
        prop_assert!(errors.iter().all(|e| !e.numerical));
        for r in reports {
            prop_assert!(r.pass == Some(true), "{} ratio {}", r.inequality_id, r.ratio);
        }
    }
}
