use std::f64::consts::PI;

use num_complex::Complex64;
use pkpz::specfun::*;
use proptest::prelude::*;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn disk(z: Complex64) -> ComplexDisk {
    ComplexDisk::new(z).unwrap()
}

fn li_half_plain(z: Complex64) -> Complex64 {
    let mut s = c(0.0, 0.0);
    let mut p = z;
    for n in 1..10_000 {
        s += p / (n as f64).sqrt();
        p *= z;
        if p.norm() < 1e-19 {
            break;
        }
    }
    s
}

fn simpson<F: Fn(f64) -> Complex64>(f: &F, a: f64, b: f64, fa: Complex64, fm: Complex64, fb: Complex64, whole: Complex64, tol: f64, depth: u32) -> Complex64 {
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = f(lm);
    let frm = f(rm);
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let delta = left + right - whole;
    if depth == 0 || delta.norm() <= 15.0 * tol {
        return left + right + delta / 15.0;
    }
    simpson(f, a, m, fa, flm, fm, left, tol / 2.0, depth - 1) + simpson(f, m, b, fm, frm, fb, right, tol / 2.0, depth - 1)
}

fn adaptive<F: Fn(f64) -> Complex64>(f: F, a: f64, b: f64, tol: f64) -> Complex64 {
    let (fa, fb) = (f(a), f(b));
    let fm = f(0.5 * (a + b));
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    simpson(&f, a, b, fa, fm, fb, whole, tol, 50)
}

/// `h(w, z)` in the original variable on `[Re w − 40, Re w]`.
fn h_oracle(w: Complex64, z: Complex64) -> Complex64 {
    let f = |x: f64| {
        let y = c(x, w.im);
        li_half_plain(z * ((w * w - y * y) / 2.0).exp())
    };
    -adaptive(f, w.re - 40.0, w.re, 1e-14) / (2.0 * PI).sqrt()
}

#[test]
fn polylog_zero_is_zero() {
    assert_eq!(polylog(PolylogOrder::ThreeHalves, disk(c(0.0, 0.0)), 1e-12).unwrap(), c(0.0, 0.0));
}

#[test]
fn polylog_three_halves_at_half_matches_long_sum() {
    let got = polylog(PolylogOrder::ThreeHalves, disk(c(0.5, 0.0)), 1e-16).unwrap();
    let mut s = 0.0f64;
    let mut pw = 1.0f64;
    for n in 1..=1_000_000u32 {
        pw *= 0.5;
        if pw == 0.0 {
            break;
        }
        s += pw / (n as f64).powf(1.5);
    }
    assert!((got.re - s).abs() < 1e-13 && got.im.abs() < 1e-16);
}

#[test]
fn polylog_rejects_unit_circle() {
    assert!(ComplexDisk::new(c(1.0, 0.0)).is_err());
}

#[test]
fn polylog_non_convergence_is_reported() {
    let z = disk(c(0.999_999_9, 0.0));
    assert!(matches!(
        polylog(PolylogOrder::Half, z, 1e-300),
        Err(pkpz::Error::NonConvergence(_))
    ));
}

#[test]
fn b_fun_matches_double_series() {
    let got = b_fun(disk(c(0.3, 0.0)), disk(c(0.2, 0.0))).unwrap();
    let mut s = 0.0f64;
    let mut zk = 1.0f64;
    for k in 1..=10_000u32 {
        zk *= 0.3;
        if zk < 1e-300 {
            break;
        }
        let mut zkp = 1.0f64;
        for kp in 1..=10_000u32 {
            zkp *= 0.2;
            let t = zk * zkp / ((k + kp) as f64 * ((k as f64) * (kp as f64)).sqrt());
            if t < 1e-300 {
                break;
            }
            s += t;
        }
    }
    s /= 4.0 * PI;
    assert!((got.re - s).abs() < 1e-12, "{got} vs {s}");
}

#[test]
fn kernel_exponents_vanish_at_origin() {
    let o = disk(c(0.0, 0.0));
    assert_eq!(a1(o).unwrap(), c(0.0, 0.0));
    assert_eq!(a2(o).unwrap(), c(0.0, 0.0));
    assert_eq!(b_fun(o, disk(c(0.3, 0.1))).unwrap(), c(0.0, 0.0));
}

proptest! {
    #[test]
    fn polylog_half_bound(r in 0.0f64..0.5, t in -PI..PI) {
        let z = Complex64::from_polar(r, t);
        let v = polylog(PolylogOrder::Half, disk(z), 1e-15).unwrap();
        prop_assert!(v.norm() <= 2.0 * r);
    }

    #[test]
    fn kernel_exponent_bounds(r in 0.0f64..0.5, t in -PI..PI, r2 in 0.0f64..0.5, t2 in -PI..PI) {
        let z = disk(Complex64::from_polar(r, t));
        let zp = disk(Complex64::from_polar(r2, t2));
        prop_assert!(a1(z).unwrap().norm() <= r);
        prop_assert!(a2(z).unwrap().norm() <= r);
        prop_assert!(b_fun(z, zp).unwrap().norm() <= r * r2);
    }

    #[test]
    fn h_bound(a in -4.0f64..-0.01, b in -6.0f64..6.0, r in 0.0f64..0.5, t in -PI..PI) {
        let z = Complex64::from_polar(r, t);
        let h = h_left(c(a, b), disk(z), 1e-12).unwrap();
        prop_assert!(h.norm() <= r);
    }

    #[test]
    fn h_right_is_reflection(a in 0.01f64..4.0, b in -6.0f64..6.0, r in 0.0f64..0.9, t in -PI..PI) {
        let z = disk(Complex64::from_polar(r, t));
        let w = c(a, b);
        prop_assert_eq!(h_right(w, z, 1e-12).unwrap(), h_left(-w, z, 1e-12).unwrap());
    }

    #[test]
    fn dist_circle_is_a_metric(x in -10.0f64..10.0, y in -10.0f64..10.0, w in -10.0f64..10.0, rho in 0.1f64..5.0) {
        let (px, py, pw) = (CirclePoint::new(x, rho).unwrap(), CirclePoint::new(y, rho).unwrap(), CirclePoint::new(w, rho).unwrap());
        let dxy = dist_circle(px, py).unwrap();
        prop_assert!((0.0..=rho / 2.0 + 1e-12).contains(&dxy));
        prop_assert!((dxy - dist_circle(py, px).unwrap()).abs() < 1e-12);
        prop_assert!(dxy <= dist_circle(px, pw).unwrap() + dist_circle(pw, py).unwrap() + 1e-12);
    }
}

#[test]
fn h_left_zero_z() {
    assert_eq!(h_left(c(-1.0, 0.0), disk(c(0.0, 0.0)), 1e-12).unwrap(), c(0.0, 0.0));
    assert_eq!(h_right(c(2.0, 1.0), disk(c(0.0, 0.0)), 1e-12).unwrap(), c(0.0, 0.0));
}

#[test]
fn h_left_matches_adaptive_quadrature() {
    let w = c(-1.0, -0.5);
    let got = h_left(w, disk(c(0.25, 0.0)), 1e-14).unwrap();
    let want = h_oracle(w, c(0.25, 0.0));
    assert!((got - want).norm() < 1e-10, "{got} vs {want}");
    for (w, z) in [(c(-0.3, 4.0), c(0.1, 0.3)), (c(-2.5, -9.0), c(-0.2, 0.05)), (c(-0.05, 0.0), c(0.4, 0.0))] {
        let got = h_left(w, disk(z), 1e-14).unwrap();
        let want = h_oracle(w, z);
        assert!((got - want).norm() < 1e-10, "w = {w}: {got} vs {want}");
    }
}

#[test]
fn h_domain_errors() {
    assert!(h_left(c(0.5, 0.0), disk(c(0.1, 0.0)), 1e-12).is_err());
    assert!(h_right(c(-0.5, 0.0), disk(c(0.1, 0.0)), 1e-12).is_err());
}

#[test]
fn h_right_specific_pairs() {
    let z = disk(c(0.3, 0.0));
    assert_eq!(h_right(c(1.0, 0.0), z, 1e-12).unwrap(), h_left(c(-1.0, 0.0), z, 1e-12).unwrap());
    let z = disk(c(0.4, 0.0));
    assert_eq!(
        h_right(c(0.5, -0.3), z, 1e-12).unwrap().to_string(),
        h_left(c(-0.5, 0.3), z, 1e-12).unwrap().to_string()
    );
}

#[test]
fn wrapped_gaussian_normalizes() {
    let rho = 2.0;
    let rule = pkpz::quad::GaussLegendre::new(40);
    let total = rule.integrate_panels(0.0, rho, 4, |x| wrapped_gaussian(CirclePoint::new(x, rho).unwrap(), 1.0, 1e-15).unwrap());
    assert!((total - 1.0).abs() < 1e-10);
    for (t, rho) in [(0.3, 0.5), (2.0, 1.0), (0.05, 3.0)] {
        let total = rule.integrate_panels(0.0, rho, 16, |x| wrapped_gaussian(CirclePoint::new(x, rho).unwrap(), t, 1e-15).unwrap());
        assert!((total - 1.0).abs() < 1e-8, "t = {t}, rho = {rho}: {total}");
    }
}

#[test]
fn wrapped_gaussian_large_period() {
    let v = wrapped_gaussian(CirclePoint::new(0.0, 100.0).unwrap(), 1.0, 1e-15).unwrap();
    assert!((v - 1.0 / (2.0 * PI).sqrt()).abs() < 1e-12);
}

#[test]
fn wrapped_gaussian_direct_sum() {
    let v = wrapped_gaussian(CirclePoint::new(0.3, 1.5).unwrap(), 0.7, 1e-15).unwrap();
    let direct: f64 = (-200..=200).map(|k| gaussian_density(0.3 + 1.5 * k as f64, 0.7)).sum();
    assert!((v - direct).abs() < 1e-14);
    assert!(wrapped_gaussian(CirclePoint::new(0.3, 1.5).unwrap(), 0.0, 1e-12).is_err());
}

#[test]
fn dist_circle_examples() {
    let p = |x| CirclePoint::new(x, 1.0).unwrap();
    assert_eq!(dist_circle(p(0.0), p(0.0)).unwrap(), 0.0);
    assert!((dist_circle(p(0.9), p(0.1)).unwrap() - 0.2).abs() < 1e-15);
}

#[test]
fn circle_points_compare_modulo_period() {
    assert_eq!(CirclePoint::new(0.3, 1.5).unwrap(), CirclePoint::new(0.3 + 3.0, 1.5).unwrap());
    assert_eq!(CirclePoint::new(-1.2, 1.5).unwrap(), CirclePoint::new(0.3, 1.5).unwrap());
}

#[test]
fn c_of_rho_forms() {
    assert!((c_of_rho(50.0, 1e-16).unwrap() - 1.0).abs() <= 1e-15);
    let direct: f64 = (-100..=100).map(|k| (-(k as f64).powi(2) / 2.0).exp()).sum();
    assert!((c_of_rho(1.0, 1e-16).unwrap() - direct).abs() < 1e-14);
    for rho in [0.3, 0.5, 1.0, 2.0, 5.0, 20.0, 50.0] {
        let a = c_of_rho(rho, 1e-15).unwrap();
        let b = c_of_rho_dual(rho, 1e-15).unwrap();
        assert!((a - b).abs() < 1e-12, "rho = {rho}: {a} vs {b}");
    }
    assert!(c_of_rho(0.0, 1e-12).is_err());
}
