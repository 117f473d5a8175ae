use num_complex::Complex64;
use proptest::prelude::*;
use turanlab::families::{generate, qn_closed_norms, FamilyKind, FamilySpec};
use turanlab::norms::{lp_integral, lp_norm, sup_norm};
use turanlab::{make_root_poly, norm, NormSpec, PolyClass, RootPoly, Weight};

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

/// `∫_{-1}^{1} (1-x^2)^m dx = 2^(2m+1) (m!)^2 / (2m+1)!`, by a running product.
fn one_minus_x2_power_integral(m: usize) -> f64 {
    let mut v = 2.0;
    for k in 1..=m {
        v *= (2 * k) as f64 / (2 * k + 1) as f64;
    }
    v
}

#[test]
fn qn_integer_powers_against_elementary_products() {
    for n in 1..=20usize {
        let q = generate(&FamilySpec::new(FamilyKind::Qn, n)).unwrap();
        for p in [1usize, 2, 3] {
            let got = lp_integral(&q, &NormSpec::plain(p as f64, 0)).unwrap();
            let want = one_minus_x2_power_integral(n * p);
            assert!(rel(got, want) < 1e-10, "n={n} p={p}: {got} vs {want}");
        }
    }
}

#[test]
fn qn_quadrature_matches_closed_forms() {
    for n in 1..=20usize {
        let q = generate(&FamilySpec::new(FamilyKind::Qn, n)).unwrap();
        for p in [0.5, 1.0, 2.0, 3.0, 7.0] {
            for deriv in [0u8, 1] {
                let got = lp_integral(&q, &NormSpec::plain(p, deriv)).unwrap();
                let want = qn_closed_norms(n, p, deriv).unwrap().value();
                assert!(rel(got, want) < 1e-8, "n={n} p={p} k={deriv}: {got} vs {want}");
            }
        }
    }
}

#[test]
fn sup_norm_of_chebyshev_like_products() {
    // P = T_3 / 4 = x^3 - 3x/4: sup 1/4, P' = 3x^2 - 3/4 peaks at the ends
    let p = RootPoly::from_real(&[-(3f64.sqrt()) / 2.0, 0.0, 3f64.sqrt() / 2.0], PolyClass::Segment).unwrap();
    let s = sup_norm(&p, &NormSpec::sup(0, Weight::None)).unwrap();
    assert!((s.value - 0.25).abs() < 1e-14);
    let d = sup_norm(&p, &NormSpec::sup(1, Weight::None)).unwrap();
    assert!((d.value - 2.25).abs() < 1e-12);
    // |T_3'(x)| sqrt(1-x^2) = 3 |sin 3θ| <= 3, scaled by 1/4
    let w = sup_norm(&p, &NormSpec::sup(1, Weight::SqrtOneMinusX2)).unwrap();
    assert!((w.value - 0.75).abs() < 1e-12);
}

fn seg_poly() -> impl Strategy<Value = RootPoly> {
    prop::collection::vec(-1.0f64..=1.0, 1..=12).prop_map(|rs| RootPoly::from_real(&rs, PolyClass::Segment).unwrap())
}

fn disk_poly() -> impl Strategy<Value = RootPoly> {
    prop::collection::vec((0.0f64..=1.0, 0.0f64..=std::f64::consts::PI), 1..=12).prop_map(|v| {
        let zs: Vec<Complex64> = v.into_iter().map(|(r, t)| Complex64::from_polar(r.sqrt(), t)).collect();
        make_root_poly(&zs, PolyClass::HalfDisk).unwrap()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn holder_ordering(p in prop_oneof![seg_poly(), disk_poly()], deriv in 0u8..=2) {
        let exps = [0.5, 1.0, 1.5, 2.0, 3.0, 5.0, 10.0, f64::INFINITY];
        let mut prev = 0.0;
        for &e in &exps {
            let v = norm(&p, &NormSpec::plain(e, deriv)).unwrap().value;
            let normalized = if e.is_finite() { v * 2f64.powf(-1.0 / e) } else { v };
            prop_assert!(normalized >= prev * (1.0 - 1e-9), "p={e}: {normalized} < {prev}");
            prev = normalized;
        }
    }

    #[test]
    fn lp_approaches_sup(p in prop_oneof![seg_poly(), disk_poly()]) {
        let sup = sup_norm(&p, &NormSpec::sup(0, Weight::None)).unwrap().value;
        let mut prev_gap = f64::INFINITY;
        for k in 4..=10 {
            let e = 2f64.powi(k);
            let v = lp_norm(&p, &NormSpec::plain(e, 0)).unwrap().value;
            let gap = (sup - v) / sup;
            prop_assert!(gap >= -1e-9, "lp exceeds sup at p={e}");
            prop_assert!(gap <= prev_gap + 1e-9);
            prev_gap = gap;
        }
        prop_assert!(prev_gap < 0.02, "gap at p=1024 is {prev_gap}");
    }

    #[test]
    fn sup_dominates_samples(p in prop_oneof![seg_poly(), disk_poly()], deriv in 0u8..=2) {
        for w in [Weight::None, Weight::SqrtOneMinusX2, Weight::OneMinusX2] {
            let spec = NormSpec::sup(deriv, w);
            let s = sup_norm(&p, &spec).unwrap().value;
            for k in 0..=997 {
                let x = -1.0 + 2.0 * k as f64 / 997.0;
                prop_assert!(spec.pointwise(&p, x) <= s * (1.0 + 1e-12));
            }
        }
    }

    #[test]
    fn norms_ignore_root_order(rs in prop::collection::vec(-1.0f64..=1.0, 2..=10), e in 0.5f64..8.0) {
        let mut rev = rs.clone();
        rev.reverse();
        let a = RootPoly::from_real(&rs, PolyClass::Segment).unwrap();
        let b = RootPoly::from_real(&rev, PolyClass::Segment).unwrap();
        for deriv in 0..=2u8 {
            let spec = NormSpec::plain(e, deriv);
            prop_assert_eq!(norm(&a, &spec).unwrap().value, norm(&b, &spec).unwrap().value);
        }
    }
}
