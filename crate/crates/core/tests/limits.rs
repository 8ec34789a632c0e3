mod common;

use std::f64::consts::PI;

use common::*;
use num_complex::Complex64;
use pkpz::distribution::PeriodCase;
use pkpz::limits::*;
use proptest::prelude::*;

fn args(a: &[f64], b: &[f64]) -> SArgs {
    SArgs::new(a.to_vec(), b.to_vec()).unwrap()
}

#[test]
fn s_inf_one_point_closed_form() {
    let v = s_inf_quadrature(&args(&[1.0], &[0.0]), None).unwrap();
    assert!((v.value - 1.0 / (2.0 * PI).sqrt()).abs() < 1e-10);
    for (a, b) in [(0.7, 0.4), (2.0, -1.3)] {
        let q = s_inf_quadrature(&args(&[a], &[b]), None).unwrap().value;
        assert!((q - phi(b / 2f64.sqrt(), a)).abs() < 1e-10);
        let flipped = s_inf_quadrature(&args(&[a], &[-b]), None).unwrap().value;
        assert!((q - flipped).abs() < 1e-12);
        assert!((s_inf_probabilistic(&args(&[a], &[b])).unwrap() - phi(b / 2f64.sqrt(), a)).abs() < 1e-15);
    }
}

#[test]
fn s_inf_two_point_matches_orthant() {
    let s = 2f64.sqrt();
    for (a, b) in [([0.5, 1.0], [0.0, 0.0]), ([0.3, 1.2], [0.4, -0.5]), ([0.05, 1.0], [0.1, 0.2])] {
        let want = two_time_orthant(a, [b[0] / s, b[1] / s]);
        let q = s_inf_quadrature(&args(&a, &b), None).unwrap();
        let p = s_inf_probabilistic(&args(&a, &b)).unwrap();
        assert!((q.value - want).abs() < 1e-7, "{a:?} {b:?}: {} vs {want}", q.value);
        assert!((p - want).abs() < 1e-9, "{a:?} {b:?}: {p} vs {want}");
        assert!(q.imag.abs() < 1e-10);
    }
}

#[test]
fn s_inf_median_case() {
    // b1/√2 at the conditional mean of B(a1)
    let (a1, a2, b2) = (0.4, 1.0, 0.6);
    let v = s_inf_probabilistic(&args(&[a1, a2], &[b2 * a1 / a2, b2])).unwrap();
    assert!((v - phi(b2 / 2f64.sqrt(), a2) / 2.0).abs() < 1e-10);
}

#[test]
fn s_inf_three_point_cross_check() {
    let s = args(&[0.2, 0.55, 1.0], &[0.3, -0.2, 0.1]);
    let q = s_inf_quadrature(&s, None).unwrap().value;
    let p = s_inf_probabilistic(&s).unwrap();
    assert!((q - p).abs() < 1e-6, "{q} vs {p}");
}

#[test]
fn s_inf_abscissa_invariance() {
    let s = args(&[0.3, 0.8, 1.0], &[0.1, 0.5, -0.3]);
    let base = s_inf_quadrature(&s, None).unwrap().value;
    let moved = s_inf_quadrature(&s, Some(&[1.4, 0.6, 0.3])).unwrap().value;
    assert!((base - moved).abs() < 1e-9, "{base} vs {moved}");
}

#[test]
fn s_inf_errors() {
    let s = args(&[0.5, 1.0], &[0.0, 0.0]);
    assert!(matches!(s_inf_quadrature(&s, Some(&[0.5, 1.0])), Err(pkpz::Error::ContourOrder(_))));
    let five = args(&[0.1, 0.2, 0.3, 0.4, 0.5], &[0.0; 5]);
    assert!(matches!(s_inf_probabilistic(&five), Err(pkpz::Error::Unsupported(_))));
    assert!(SArgs::new(vec![1.0, 0.5], vec![0.0, 0.0]).is_err());
    assert!(SArgs::new(vec![1.0], vec![0.0, 0.0]).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn s_inf_quadrature_equals_bridge_probability(
        da in prop::collection::vec(0.1f64..1.0, 1..=3),
        b in prop::collection::vec(-1.0f64..1.0, 3),
    ) {
        let a: Vec<f64> = da.iter().scan(0.0, |acc, d| { *acc += d; Some(*acc) }).collect();
        let s = args(&a, &b[..a.len()]);
        let q = s_inf_quadrature(&s, None).unwrap().value;
        let p = s_inf_probabilistic(&s).unwrap();
        prop_assert!((q - p).abs() < 1e-6, "{q} vs {p}");
    }
}

#[test]
fn s_r_one_point_direct_sum() {
    let w = [Complex64::new((-1.0f64).exp(), 0.0)];
    let (v, _) = s_r_sum(&args(&[1.0], &[0.0]), 1.0, &w, Some(50)).unwrap();
    let mut direct = Complex64::new(0.0, 0.0);
    for k in -50..=50 {
        let xi = Complex64::new(1.0, 2.0 * PI * k as f64);
        direct += (xi * xi).exp();
    }
    direct *= 2f64.sqrt();
    assert!((v - direct).norm() < 1e-12 * direct.norm());
}

#[test]
fn s_r_two_point_direct_sum() {
    let (a, b, r) = ([0.4, 1.0], [0.2, -0.1], 1.5);
    let w = [Complex64::from_polar(0.3, 0.7), Complex64::from_polar(0.6, -2.0)];
    let (v, edge) = s_r_sum(&args(&a, &b), r, &w, Some(20)).unwrap();
    let root = |wi: Complex64, k: i64| (-wi.ln() + Complex64::new(0.0, 2.0 * PI * k as f64)) / r;
    let mut direct = Complex64::new(0.0, 0.0);
    for k1 in -20..=20 {
        let x1 = root(w[0], k1);
        for k2 in -20..=20 {
            let x2 = root(w[1], k2);
            direct += (a[0] * x1 * x1 - b[0] * x1).exp() * ((a[1] - a[0]) * x2 * x2 - (b[1] - b[0]) * x2).exp()
                / (x2 - x1);
        }
    }
    direct *= -(2f64.sqrt()) / (r * r);
    assert!((v - direct).norm() < 1e-12 * direct.norm().max(1.0), "{v} vs {direct}");
    assert!(edge < 1e-12);
}

#[test]
fn s_r_symmetries() {
    let s = args(&[0.3, 0.9], &[0.1, 0.4]);
    let w = [Complex64::from_polar(0.2, 1.1), Complex64::from_polar(0.5, 0.4)];
    let (v, _) = s_r_sum(&s, 2.0, &w, None).unwrap();
    let conj = [w[0].conj(), w[1].conj()];
    let (vc, _) = s_r_sum(&s, 2.0, &conj, None).unwrap();
    assert!((v.conj() - vc).norm() < 1e-14);
    let turn = Complex64::from_polar(1.0, 2.0 * PI);
    let shifted = [w[0] * turn, w[1] * turn];
    let (vs, _) = s_r_sum(&s, 2.0, &shifted, None).unwrap();
    assert!((v - vs).norm() < 1e-12);
}

#[test]
fn s_r_large_period_recovers_s_inf() {
    let r = 40.0;
    let s = args(&[1.0], &[0.3]);
    let w: Vec<Complex64> = default_w_radii(1, r).iter().map(|x| Complex64::new(*x, 0.0)).collect();
    let (v, _) = s_r_sum(&s, r, &w, None).unwrap();
    let inf = s_inf_quadrature(&s, None).unwrap().value;
    assert!((v.re - inf).abs() < 1e-3 && v.im.abs() < 1e-12);
    let s2 = args(&[0.5, 1.0], &[0.2, -0.1]);
    let w2: Vec<Complex64> = default_w_radii(2, r).iter().map(|x| Complex64::new(*x, 0.0)).collect();
    let (v2, _) = s_r_sum(&s2, r, &w2, None).unwrap();
    assert!((v2.re - s_inf_quadrature(&s2, None).unwrap().value).abs() < 1e-6);
}

#[test]
fn s_r_reports_coincident_roots() {
    let w = [Complex64::new(0.4, 0.0), Complex64::new(0.4, 0.0)];
    assert!(matches!(
        s_r_sum(&args(&[0.5, 1.0], &[0.0, 0.0]), 1.0, &w, Some(3)),
        Err(pkpz::Error::SingularDenominator { .. })
    ));
}

fn critical(a: &[f64], b: &[f64], c: &[f64], r: f64) -> pkpz::distribution::Estimate {
    critical_limit_integral(a, b, c, r, &default_w_radii(a.len(), r), default_w_nodes(a, r), None).unwrap()
}

#[test]
fn critical_integral_one_point() {
    let e = critical(&[1.0], &[0.3], &[0.2], 1.0);
    let want = phi(0.2, 1.0) * wrapped(0.3, 1.0, 1.0);
    assert!((e.value - want).abs() < 1e-8, "{e} vs {want}");
    assert!(e.imag.abs() <= e.proxy().max(1e-14));
    assert!((critical_one_point(1.0, 0.3, 0.2, 1.0).unwrap() - want).abs() < 1e-14);
    for r in [0.5, 3.0] {
        let e = critical(&[0.7], &[0.0], &[0.0], r);
        let want = phi(0.0, 0.7) * wrapped(0.0, 0.7, r);
        assert!((e.value - want).abs() < 1e-8, "r = {r}: {e} vs {want}");
    }
    let e = critical(&[1.0], &[0.3], &[0.2], 30.0);
    assert!((e.value - phi(0.2, 1.0) * phi(0.3, 1.0)).abs() < 1e-8);
}

#[test]
fn critical_integral_two_point_matches_oracle() {
    for (a, b, c, r) in [
        ([0.5, 1.0], [0.0, 0.0], [0.0, 0.0], 1.0),
        ([0.4, 1.0], [0.3, 0.0], [0.2, 0.1], 1.0),
        ([0.3, 0.8], [-0.6, 0.4], [0.5, -0.2], 2.0),
    ] {
        let e = critical(&a, &b, &c, r);
        let want = critical_two_point_oracle(a, b, c, r);
        assert!((e.value - want).abs() < 1e-6, "{a:?} {b:?} {c:?} {r}: {e} vs {want}");
    }
}

#[test]
fn critical_integral_errors() {
    assert!(matches!(
        critical_limit_integral(&[0.5, 1.0], &[0.0; 2], &[0.0; 2], 1.0, &[0.5, 0.4], 64, None),
        Err(pkpz::Error::ContourOrder(_))
    ));
    assert!(critical_limit_integral(&[1.0], &[0.0], &[0.0], 1.0, &[0.5], 15, None).is_err());
}

#[test]
fn box_identity_one_point() {
    let (l, r) = finite_r_bridge_identity(&args(&[0.8], &[0.4]), 1.0, None).unwrap();
    let want = phi(0.4 / 2f64.sqrt(), 0.8);
    assert!((l.value - want).abs() < 1e-10 && (r - want).abs() < 1e-14);
}

#[test]
fn box_identity_two_point() {
    let s = 2f64.sqrt();
    for (a, b, r) in [([0.5, 1.0], [0.1, 0.2], 1.0), ([0.2, 0.9], [-0.3, 0.5], 0.4)] {
        let (l, rhs) = finite_r_bridge_identity(&args(&a, &b), r, None).unwrap();
        let want = two_time_orthant(a, [b[0] / s, b[1] / s]) - two_time_orthant(a, [(b[0] + r) / s, b[1] / s]);
        assert!((l.value - want).abs() < 1e-6, "{} vs {want}", l.value);
        assert!((rhs - want).abs() < 1e-9, "{rhs} vs {want}");
    }
}

#[test]
fn box_identity_three_point_and_large_box() {
    let s = args(&[0.3, 0.6, 1.0], &[0.1, -0.2, 0.3]);
    let (l, r) = finite_r_bridge_identity(&s, 0.8, None).unwrap();
    assert!((l.value - r).abs() < 1e-6, "{} vs {r}", l.value);
    let (l, _) = finite_r_bridge_identity(&s, 30.0, None).unwrap();
    let inf = s_inf_quadrature(&s, None).unwrap().value;
    assert!((l.value - inf).abs() < 1e-8);
    assert!(finite_r_bridge_identity(&args(&[0.1, 0.2, 0.3, 0.4], &[0.0; 4]), 1.0, None).is_err());
}

#[test]
fn limit_laws_at_two_points() {
    let c3 = limit_conditional_cdf(PeriodCase::Small, &[0.0], &[0.5], &[0.0], None).unwrap();
    assert!((c3 - 0.5).abs() < 1e-12);
    let c1 = limit_conditional_cdf(PeriodCase::Large, &[0.0], &[0.5], &[0.0], None).unwrap();
    assert!((c1 - 0.25).abs() < 1e-12);
    // B2 − |B1| ≥ h with independent N(0, 1/4) coordinates
    let (x, h) = (0.3, 0.2);
    let c1 = limit_conditional_cdf(PeriodCase::Large, &[x], &[0.5], &[h], None).unwrap();
    let sd = 0.5 * 2f64.sqrt();
    let want = upper_tail((h - x) / sd) * upper_tail((h + x) / sd);
    assert!((c1 - want).abs() < 1e-10);
}

#[test]
fn limit_laws_at_three_points() {
    let (t1, t2) = (0.3, 0.6);
    let q = bridge_quadrant(t1, t2);
    let c3 = limit_conditional_cdf(PeriodCase::Small, &[0.0, 0.0], &[t1, t2], &[0.0, 0.0], None).unwrap();
    assert!((c3 - q).abs() < 1e-8, "{c3} vs {q}");
    let c1 = limit_conditional_cdf(PeriodCase::Large, &[0.0, 0.0], &[t1, t2], &[0.0, 0.0], None).unwrap();
    assert!((c1 - q * q).abs() < 1e-8);
}

#[test]
fn critical_law_at_large_period_is_the_large_period_law() {
    for (x, h) in [(0.0, 0.0), (0.2, -0.1)] {
        let c2 = limit_conditional_cdf(PeriodCase::Critical, &[x], &[0.5], &[h], Some(25.0)).unwrap();
        let c1 = limit_conditional_cdf(PeriodCase::Large, &[x], &[0.5], &[h], None).unwrap();
        assert!((c2 - c1).abs() < 2e-3, "{c2} vs {c1}");
    }
}

#[test]
fn critical_law_at_small_period_approaches_the_small_period_law() {
    // dist to a near-uniform point on a circle of length r averages r/4
    let (t, h) = (0.5, 0.0);
    let c3 = limit_conditional_cdf(PeriodCase::Small, &[0.0], &[t], &[h], None).unwrap();
    let mut gaps = vec![];
    for r in [0.2, 0.05] {
        let c2 = limit_conditional_cdf(PeriodCase::Critical, &[0.0], &[t], &[h], Some(r)).unwrap();
        let corrected = c3 - r / 4.0 * phi(h, t * (1.0 - t));
        assert!((c2 - corrected).abs() < 2e-3, "r = {r}: {c2} vs {corrected}");
        gaps.push((c2 - c3).abs());
    }
    assert!(gaps[1] < gaps[0] / 3.0);
}

#[test]
fn limit_law_requires_a_period_for_the_critical_case() {
    assert!(limit_conditional_cdf(PeriodCase::Critical, &[0.0], &[0.5], &[0.0], None).is_err());
    assert!(limit_conditional_cdf(PeriodCase::Small, &[0.0], &[1.5], &[0.0], None).is_err());
    assert_eq!(limit_conditional_cdf(PeriodCase::Small, &[], &[], &[], None).unwrap(), 1.0);
}
