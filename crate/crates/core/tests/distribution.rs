use std::f64::consts::PI;

use pkpz::distribution::*;
use pkpz::fredholm::TruncationSpec;
use pkpz::limits::limit_conditional_cdf;

fn trunc() -> TruncationSpec {
    TruncationSpec::default()
}

fn one(beta: f64) -> EvaluationPoint {
    EvaluationPoint::one(0.0, 1.0, beta, 1.0).unwrap()
}

fn circle(r: f64, nodes: usize) -> ContourSpec {
    ContourSpec::raw(vec![r], nodes).unwrap()
}

fn two_point(beta: [f64; 2], p: f64) -> EvaluationPoint {
    EvaluationPoint::new(vec![0.0, 0.3], vec![0.5, 1.0], beta.to_vec(), p).unwrap()
}

#[test]
fn cdf_reaches_one() {
    let e = joint_cdf(&one(50.0), &circle(0.5, 64), &trunc()).unwrap();
    assert!((e.value - 1.0).abs() < 1e-6);
}

#[test]
fn cdf_is_contour_independent() {
    let pt = one(-1.0);
    let base = joint_cdf(&pt, &circle(0.5, 64), &trunc()).unwrap();
    for r in [0.2, 0.7] {
        let e = joint_cdf(&pt, &circle(r, 64), &trunc()).unwrap();
        assert!((e.value - base.value).abs() < 1e-9, "r = {r}: {e} vs {base}");
    }
    let fam = joint_cdf(&pt, &ContourSpec::family(1.0, 1.0, 1, 64).unwrap(), &trunc()).unwrap();
    assert!((fam.value - base.value).abs() < 1e-9);
}

#[test]
fn one_point_tail() {
    let beta: f64 = 3.0;
    let e = joint_cdf(&one(beta), &circle(0.5, 64), &trunc()).unwrap();
    let tail = (-(4.0 / 3.0) * beta.powf(1.5)).exp() / (16.0 * PI * beta.powf(1.5));
    let rel = ((1.0 - e.value) - tail).abs() / tail;
    assert!(rel < 0.25, "{} vs {tail}", 1.0 - e.value);
}

#[test]
fn one_point_density_matches_finite_difference() {
    let c = circle(0.5, 64);
    let f = cdf_derivative(&one(1.0), &c, &trunc()).unwrap();
    let step = 1e-3;
    let up = joint_cdf(&one(1.0 + step), &c, &trunc()).unwrap().value;
    let down = joint_cdf(&one(1.0 - step), &c, &trunc()).unwrap().value;
    let fd = (up - down) / (2.0 * step);
    assert!((f.value - fd).abs() < 1e-4 * f.value, "{f} vs {fd}");
    assert!(f.imag.abs() <= f.proxy().max(1e-15));
}

#[test]
fn one_point_density_is_positive_with_the_right_tail() {
    let c = circle(0.5, 64);
    for beta in [-4.0, -2.0, -1.0, 0.0, 1.0, 2.0] {
        let f = cdf_derivative(&one(beta), &c, &trunc()).unwrap();
        assert!(f.value > -f.proxy(), "beta = {beta}: {f}");
    }
    let ell: f64 = 3.0;
    let f = cdf_derivative(&one(ell), &c, &trunc()).unwrap();
    let want = (-(4.0 / 3.0) * ell.powf(1.5)).exp() / (8.0 * PI * ell);
    assert!((f.value - want).abs() < 0.3 * want);
}

#[test]
fn scaling_identity() {
    let (g, t, b) = (0.2, 1.0, -1.0);
    let c = circle(0.5, 64);
    let base = joint_cdf(&EvaluationPoint::one(g, t, b, 1.0).unwrap(), &c, &trunc()).unwrap().value;
    for p in [0.5f64, 2.0] {
        let pt = EvaluationPoint::one(p * g, p.powf(1.5) * t, p.sqrt() * b, p).unwrap();
        let v = joint_cdf(&pt, &c, &trunc()).unwrap().value;
        assert!((v - base).abs() < 1e-6, "p = {p}: {v} vs {base}");
    }
}

#[test]
fn two_point_structure() {
    let c = ContourSpec::raw(vec![0.3, 0.6], 32).unwrap();
    let f = |b1: f64, b2: f64| joint_cdf(&two_point([b1, b2], 1.0), &c, &trunc()).unwrap();
    // marginal consistency
    let marginal = joint_cdf(&EvaluationPoint::one(0.0, 0.5, -1.0, 1.0).unwrap(), &circle(0.5, 64), &trunc()).unwrap();
    let joint = f(-1.0, 50.0);
    assert!((joint.value - marginal.value).abs() < 1e-5, "{joint} vs {marginal}");
    // monotone in each coordinate
    let grid = [-2.0, -1.0, 0.0];
    let vals: Vec<Vec<Estimate>> = grid.iter().map(|&b1| grid.iter().map(|&b2| f(b1, b2)).collect()).collect();
    for i in 0..grid.len() {
        for j in 0..grid.len() {
            let v = &vals[i][j];
            assert!(v.imag.abs() <= v.proxy().max(1e-14));
            if i + 1 < grid.len() {
                assert!(vals[i + 1][j].value >= v.value - v.proxy() - vals[i + 1][j].proxy());
            }
            if j + 1 < grid.len() {
                assert!(vals[i][j + 1].value >= v.value - v.proxy() - vals[i][j + 1].proxy());
            }
        }
    }
    // {H1 ≥ β1, H2 ≤ β2} is the complement of {H1 < β1} inside {H2 ≤ β2}
    let (b1, b2) = (-1.0, 0.0);
    let mixed = mixed_probability(&two_point([b1, b2], 1.0), &ContourSpec::raw(vec![0.3, 0.6], 32).unwrap(), &trunc()).unwrap();
    let m2 = joint_cdf(&EvaluationPoint::one(0.3, 1.0, b2, 1.0).unwrap(), &circle(0.5, 64), &trunc()).unwrap();
    assert!((mixed.value - (m2.value - vals[1][2].value)).abs() < 1e-6, "{mixed} vs {} − {}", m2.value, vals[1][2].value);
}

#[test]
fn node_doubling_stays_within_proxy() {
    let pt = two_point([-0.5, 0.2], 1.0);
    let coarse = joint_cdf(&pt, &ContourSpec::raw(vec![0.3, 0.6], 16).unwrap(), &trunc()).unwrap();
    let fine = joint_cdf(&pt, &ContourSpec::raw(vec![0.3, 0.6], 32).unwrap(), &trunc()).unwrap();
    assert!((fine.value - coarse.value).abs() <= coarse.proxy().max(1e-13), "{fine} vs {coarse}");
}

#[test]
fn lemma_vanishing_integrals() {
    let pt = two_point([-0.5, 0.5], 1.0);
    let c = ContourSpec::raw(vec![0.3, 0.6], 64).unwrap();
    for n in [[0usize, 1], [1, 0]] {
        let r = vanishing_check(&pt, &c, &trunc(), &n).unwrap();
        assert!(r.max() <= 1e-8, "{n:?}: {r:?}");
    }
    let r = vanishing_check(&one(0.5), &circle(0.5, 64), &trunc(), &[0]).unwrap();
    assert_eq!(r.second, 0.0);
    assert!(r.first <= 1e-8);
    assert!(vanishing_check(&pt, &c, &trunc(), &[1, 1]).is_err());
}

#[test]
fn conditional_probability_trivial_cases() {
    let q = ConditionalQuery::new(vec![], vec![], vec![], 3.0, 1.0).unwrap();
    let c = ContourSpec::family(3.0, 1.0, 1, 64).unwrap();
    let r = conditional_probability(&q, &c, &trunc()).unwrap();
    assert_eq!(r.value, 1.0);
    let q = ConditionalQuery::new(vec![0.0], vec![0.5], vec![-3.0], 4.0, 2.0).unwrap();
    let c = ContourSpec::family(4.0, 2.0, 2, 32).unwrap();
    let r = conditional_probability(&q, &c, &trunc()).unwrap();
    assert!((r.value - 1.0).abs() < 1e-4, "{r:?}");
}

#[test]
fn deep_conditioning_is_reported_as_ill_conditioned() {
    let c = ContourSpec::family(4.0, 2.0, 2, 32).unwrap();
    for h in [-10.0, -20.0] {
        let q = ConditionalQuery::new(vec![0.0], vec![0.5], vec![h], 4.0, 2.0).unwrap();
        assert!(matches!(conditional_probability(&q, &c, &trunc()), Err(pkpz::Error::IllConditioned(_))));
    }
}

#[test]
#[ignore = "terms reach e^170 on the family circles; not resolvable in double precision"]
fn deep_conditioning_is_almost_sure() {
    let q = ConditionalQuery::new(vec![0.0], vec![0.5], vec![-20.0], 3.0, 1.0).unwrap();
    let c = ContourSpec::family(3.0, 1.0, 2, 32).unwrap();
    let r = conditional_probability(&q, &c, &trunc()).unwrap();
    assert!((r.value - 1.0).abs() < 1e-4, "{r:?}");
}

#[test]
fn scaled_leading_term_in_the_large_period_case() {
    let q = ConditionalQuery::new(vec![], vec![], vec![], 4.0, 2.0).unwrap();
    let c = ContourSpec::family(4.0, 2.0, 1, 64).unwrap();
    let e = scaled_p_hat_m1(&q, &c, &trunc(), PeriodCase::Large).unwrap();
    let target = 1.0 / (2.0 * PI);
    assert!((e.value - target).abs() < 0.1 * target, "{e}");
}

#[test]
fn conditional_law_near_the_large_period_limit() {
    let q = ConditionalQuery::new(vec![0.0], vec![0.5], vec![0.0], 4.0, 2.0).unwrap();
    let c = ContourSpec::family(4.0, 2.0, 2, 32).unwrap();
    let r = conditional_probability(&q, &c, &trunc()).unwrap();
    let limit = limit_conditional_cdf(PeriodCase::Large, &[0.0], &[0.5], &[0.0], None).unwrap();
    assert!((r.value - limit).abs() < 0.05, "{r:?} vs {limit}");
}

#[test]
fn input_validation() {
    assert!(EvaluationPoint::new(vec![0.0, 0.0], vec![1.0, 0.5], vec![0.0, 0.0], 1.0).is_err());
    assert!(EvaluationPoint::new(vec![0.0], vec![1.0], vec![0.0, 0.0], 1.0).is_err());
    assert!(EvaluationPoint::one(0.0, 1.0, 0.0, 0.0).is_err());
    assert!(EvaluationPoint::one(f64::NAN, 1.0, 0.0, 1.0).is_err());
    assert!(matches!(ContourSpec::raw(vec![0.5, 0.3], 32), Err(pkpz::Error::ContourOrder(_))));
    assert!(ContourSpec::raw(vec![0.5, 1.2], 32).is_err());
    assert!(ContourSpec::raw(vec![0.5], 15).is_err());
    assert!(joint_cdf(&one(0.0), &ContourSpec::raw(vec![0.2, 0.4], 16).unwrap(), &trunc()).is_err());
    assert!(ConditionalQuery::new(vec![0.0], vec![1.0], vec![0.0], 3.0, 1.0).is_err());
    assert!(ConditionalQuery::new(vec![0.0, 0.0], vec![0.6, 0.4], vec![0.0, 0.0], 3.0, 1.0).is_err());
    let e = joint_cdf(&one(0.0), &circle(0.5, 16), &trunc()).unwrap();
    assert!(matches!(e.check(0.0), Err(pkpz::Error::Truncation { .. })));
}

#[test]
fn geometric_radii() {
    let c = ContourSpec::geometric(3, 32).unwrap();
    let r = c.moduli();
    assert_eq!(r, vec![0.05, 0.1, 0.2]);
    assert!(ContourSpec::geometric(6, 32).unwrap().moduli().iter().all(|&x| x < 0.9));
}
