use num_complex::Complex64;
use proptest::prelude::*;
use turanlab::{make_root_poly, PolyClass, RootPoly};

/// Coefficients of prod (x - z_k), constant term first.
fn expand(roots: &[Complex64]) -> Vec<Complex64> {
    let mut c = vec![Complex64::new(1.0, 0.0)];
    for &z in roots {
        let mut next = vec![Complex64::new(0.0, 0.0); c.len() + 1];
        for (k, &ck) in c.iter().enumerate() {
            next[k + 1] += ck;
            next[k] -= ck * z;
        }
        c = next;
    }
    c
}

/// Horner evaluation of the `order`-th derivative and the sum of the
/// moduli of its terms (the conditioning scale).
fn horner(c: &[Complex64], x: f64, order: usize) -> (Complex64, f64) {
    let mut acc = Complex64::new(0.0, 0.0);
    let mut scale = 0.0;
    for k in (order..c.len()).rev() {
        let falling: f64 = (0..order).map(|j| (k - j) as f64).product();
        let term = c[k] * falling;
        acc = acc * x + term;
        scale += term.norm() * x.abs().powi((k - order) as i32);
    }
    (acc, scale)
}

fn seg_roots(max_n: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-1.0f64..=1.0, 1..=max_n)
}

fn disk_roots(max_n: usize) -> impl Strategy<Value = Vec<Complex64>> {
    prop::collection::vec((0.0f64..=1.0, 0.0f64..=std::f64::consts::PI), 1..=max_n)
        .prop_map(|v| v.into_iter().map(|(r, t)| Complex64::from_polar(r, t)).collect())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn derivatives_match_coefficient_oracle(zs in disk_roots(12), x in -1.0f64..=1.0) {
        let p = make_root_poly(&zs, PolyClass::HalfDisk).unwrap();
        let c = expand(p.roots());
        let got = p.derivs(x);
        for order in 0..3 {
            let (want, scale) = horner(&c, x, order);
            prop_assert!((got[order] - want).norm() <= 1e-12 * scale.max(1e-300) + 1e-300,
                "order {order}: {} vs {}", got[order], want);
        }
    }

    #[test]
    fn derivatives_match_finite_differences(rs in seg_roots(6), x in -0.999f64..=0.999) {
        // Richardson-extrapolated central differences; the relative test is
        // applied once |d| clears a floor set by the O(h^4) truncation error.
        let p = RootPoly::from_real(&rs, PolyClass::Segment).unwrap();
        let f = |t: f64| p.derivs(t)[0].re;
        let g = |t: f64| p.derivs(t)[1].re;
        let h = 1e-3;
        let cd = |fun: &dyn Fn(f64) -> f64, h: f64| (fun(x + h) - fun(x - h)) / (2.0 * h);
        let rich = |fun: &dyn Fn(f64) -> f64| (4.0 * cd(fun, h / 2.0) - cd(fun, h)) / 3.0;
        let [_, d1, d2] = p.derivs(x);
        for (exact, approx) in [(d1.re, rich(&f)), (d2.re, rich(&g))] {
            if exact.abs() > 1e-4 {
                prop_assert!(((approx - exact) / exact).abs() <= 1e-6, "{approx} vs {exact}");
            } else {
                prop_assert!((approx - exact).abs() <= 1e-10);
            }
        }
    }

    #[test]
    fn symmetric_multisets_evaluate_symmetrically(half in seg_roots(8), zero in any::<bool>(), x in -1.0f64..=1.0) {
        let mut rs: Vec<f64> = half.iter().flat_map(|&r| [r, -r]).collect();
        if zero {
            rs.push(0.0);
        }
        let p = RootPoly::from_real(&rs, PolyClass::Segment).unwrap();
        let sign = if rs.len() % 2 == 0 { 1.0 } else { -1.0 };
        let a = p.derivs(x);
        let b = p.derivs(-x);
        prop_assert_eq!(b[0].re, sign * a[0].re);
        prop_assert_eq!(b[1].re, -sign * a[1].re);
        prop_assert_eq!(b[2].re, sign * a[2].re);
    }

    #[test]
    fn log_magnitude_agrees_with_value(zs in disk_roots(50), x in -1.0f64..=1.0) {
        let p = make_root_poly(&zs, PolyClass::HalfDisk).unwrap();
        let e = p.eval(x);
        let direct = e.value.norm();
        if direct > 1e-250 {
            prop_assert!((e.log_magnitude - direct.ln()).abs() <= 1e-12 * (1.0 + direct.ln().abs()));
        }
    }

    #[test]
    fn root_order_is_irrelevant(zs in disk_roots(10), seed in any::<u64>()) {
        let mut shuffled = zs.clone();
        let k = (seed as usize) % shuffled.len();
        shuffled.rotate_left(k);
        shuffled.reverse();
        let a = make_root_poly(&zs, PolyClass::HalfDisk).unwrap();
        let b = make_root_poly(&shuffled, PolyClass::HalfDisk).unwrap();
        prop_assert_eq!(a.digest(), b.digest());
        prop_assert_eq!(a.derivs(0.3), b.derivs(0.3));
    }
}

#[test]
fn log_magnitude_finite_at_degree_ten_thousand() {
    let rs: Vec<f64> = (0..10_000).map(|k| -1.0 + 2.0 * k as f64 / 9_999.0).collect();
    let p = RootPoly::from_real(&rs, PolyClass::Segment).unwrap();
    for x in [-0.99995, 0.123_456, 0.7, 1.0 - 1e-9] {
        let e = p.eval(x);
        assert!(e.log_magnitude.is_finite() && e.log_magnitude < 0.0);
    }
    let q = RootPoly::from_real(&vec![-1.0; 10_000], PolyClass::Segment).unwrap();
    let e = q.eval(1.0);
    assert!((e.log_magnitude / (10_000.0 * 2f64.ln()) - 1.0).abs() < 1e-12);
    assert!(e.value.re.is_infinite());
}

#[test]
fn qn_second_derivative_closed_form() {
    for n in [2usize, 3, 6, 11] {
        let mut rs = vec![-1.0; n];
        rs.extend(vec![1.0; n]);
        let p = RootPoly::from_real(&rs, PolyClass::Segment).unwrap();
        let nf = n as f64;
        let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
        for k in 0..=200 {
            let x = -1.0 + k as f64 / 100.0;
            let s = 1.0 - x * x;
            let want = sign * 2.0 * nf * s.powi(n as i32 - 2) * (x * x * (2.0 * nf - 1.0) - 1.0);
            let got = p.derivs(x)[2].re;
            assert!((got - want).abs() <= 1e-11 * (1.0 + want.abs()), "n={n} x={x}: {got} vs {want}");
        }
    }
}

#[test]
fn snapping_and_rejection() {
    let p = make_root_poly(&[Complex64::new(1.0 + 5e-13, 0.0)], PolyClass::Segment).unwrap();
    assert_eq!(p.roots()[0], Complex64::new(1.0, 0.0));
    assert!(make_root_poly(&[Complex64::new(1.0 + 1e-9, 0.0)], PolyClass::Segment).is_err());
    assert!(make_root_poly(&[Complex64::new(0.0, -1e-6)], PolyClass::HalfDisk).is_err());
    assert!(make_root_poly(&[], PolyClass::Segment).is_err());
}
