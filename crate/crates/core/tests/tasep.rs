use pkpz::distribution::{joint_cdf, ContourSpec, EvaluationPoint};
use pkpz::fredholm::TruncationSpec;
use pkpz::montecarlo::RandomStream;
use pkpz::tasep::*;

fn ring(occupation: Vec<bool>) -> RingState {
    let n = occupation.len();
    RingState { a: n / 2, occupation, jump_counts: vec![0; n], time: 0.0 }
}

#[test]
fn step_data_on_a_small_ring() {
    let s = init_step(2).unwrap();
    assert_eq!(s.occupation, vec![true, true, false, false]);
    assert_eq!([-1, 0, 1, 2].map(|n| s.height(n)), [1, 0, 1, 2]);
    assert_eq!(s.particles(), 2);
    for n in -5..=5 {
        assert_eq!(s.height(n + 4), s.height(n));
        assert_eq!(s.height(n - 4), s.height(n));
    }
    assert!(init_step(0).is_err());
}

#[test]
fn heights_at_time_zero() {
    let s = init_step(16).unwrap();
    for n in -15..=16 {
        assert_eq!(s.height(n), n.abs());
    }
    assert_eq!(s.particles(), 16);
}

#[test]
fn lone_particle_jumps_at_rate_one() {
    let t = 3.0;
    let runs = 10_000;
    let stream = RandomStream::new(17, 0);
    let counts: Vec<f64> = (0..runs)
        .map(|j| {
            let mut occ = vec![false; 8];
            occ[2] = true;
            let mut s = ring(occ);
            s.evolve(t, &mut stream.block(j)).unwrap();
            s.jump_counts.iter().sum::<u64>() as f64
        })
        .collect();
    let mean = counts.iter().sum::<f64>() / runs as f64;
    let se = (t / runs as f64).sqrt();
    assert!((mean - t).abs() < 3.0 * se, "{mean}");
}

#[test]
fn packed_ring_is_frozen() {
    let mut s = ring(vec![true; 10]);
    s.evolve(50.0, &mut RandomStream::new(0, 0).rng()).unwrap();
    assert!(s.jump_counts.iter().all(|&c| c == 0));
    assert_eq!(s.time, 50.0);
    assert!(s.evolve(10.0, &mut RandomStream::new(0, 0).rng()).is_err());
}

#[test]
fn dynamics_preserve_particles_and_slopes() {
    let a = 12;
    let mut s = init_step(a).unwrap();
    let mut rng = RandomStream::new(3, 3).rng();
    for step in 1..=40 {
        s.evolve(step as f64 * 2.5, &mut rng).unwrap();
        assert_eq!(s.particles(), a);
        for n in -(a as i64) - 3..=(a as i64) + 3 {
            let d = s.height(n) - s.height(n - 1);
            assert!(d == 1 || d == -1);
            let occupied = s.occupation[s.index(n)];
            assert_eq!(d == -1, occupied);
            assert_eq!(s.height(n + 2 * a as i64), s.height(n));
        }
    }
}

#[test]
fn height_grows_at_half_the_time() {
    let a = 16;
    let t_big = relaxation_time(a);
    let runs = scaled_samples(&[(0.0, 1.0)], a, 1000, &RandomStream::new(5, 0)).unwrap();
    let mean: f64 = runs.iter().map(|r| (t_big - r[0] * t_big.cbrt()) / t_big).sum::<f64>() / runs.len() as f64;
    assert!((mean - 1.0).abs() < 0.1, "{mean}");
}

#[test]
fn observable_geometry() {
    let o = ScaledObservable::new(0.25, 0.5, 16).unwrap();
    assert_eq!(o.t_big, 32f64.powf(1.5));
    assert_eq!(o.site(), 8);
    assert!((o.time() - o.t_big).abs() < 1e-12);
    let s = init_step(16).unwrap();
    assert!((o.value(&s) - (8.0 - 0.5 * o.t_big) / -o.t_big.cbrt()).abs() < 1e-12);
    assert!(ScaledObservable::new(0.0, 0.0, 16).is_err());
}

#[test]
fn empirical_cdf_limits_and_monotonicity() {
    let stream = RandomStream::new(9, 0);
    let (one, se) = empirical_scaled_cdf(&[(0.0, 1.0, 10.0)], 8, 1000, &stream).unwrap();
    assert_eq!((one, se), (1.0, 0.0));
    let mut last = 0.0;
    for beta in [-4.0, -3.0, -2.0, -1.0, 0.0, 1.0] {
        let (f, _) = empirical_scaled_cdf(&[(0.0, 1.0, beta)], 8, 1000, &stream).unwrap();
        assert!(f >= last);
        last = f;
    }
    let (joint, _) = empirical_scaled_cdf(&[(0.0, 0.5, -1.0), (0.3, 1.0, -1.5)], 8, 1000, &stream).unwrap();
    let (single, _) = empirical_scaled_cdf(&[(0.3, 1.0, -1.5)], 8, 1000, &stream).unwrap();
    assert!(joint <= single);
    assert!(empirical_scaled_cdf(&[(0.0, 1.0, 0.0)], 7, 1000, &stream).is_err());
    assert!(empirical_scaled_cdf(&[(0.0, 1.0, 0.0)], 8, 999, &stream).is_err());
}

#[test]
fn one_point_law_against_exact_cdf() {
    let (f, se) = empirical_scaled_cdf(&[(0.0, 1.0, 0.5)], 16, 10_000, &RandomStream::new(1, 0)).unwrap();
    let pt = EvaluationPoint::one(0.0, 1.0, 0.5, 1.0).unwrap();
    let exact = joint_cdf(&pt, &ContourSpec::raw(vec![0.5], 64).unwrap(), &TruncationSpec::default()).unwrap();
    assert!((f - exact.value).abs() < 0.05 + 3.0 * se, "{f} ± {se} vs {}", exact.value);
}

#[test]
fn independent_seeds_agree_in_law() {
    let sample = |seed| -> Vec<f64> {
        scaled_samples(&[(0.0, 0.5)], 8, 10_000, &RandomStream::new(seed, 0)).unwrap().into_iter().map(|r| r[0]).collect()
    };
    let (d, p) = ks_two_sample(&sample(100), &sample(200));
    assert!(p > 1e-3, "D = {d}, p = {p}");
}

#[test]
fn simulation_is_reproducible() {
    let s = RandomStream::new(77, 4);
    let a = scaled_samples(&[(0.0, 0.4), (0.5, 0.9)], 8, 50, &s).unwrap();
    let b = scaled_samples(&[(0.0, 0.4), (0.5, 0.9)], 8, 50, &s).unwrap();
    assert_eq!(a, b);
}

#[test]
fn ks_helpers() {
    let xs: Vec<f64> = (0..1000).map(|i| (i as f64 + 0.5) / 1000.0).collect();
    assert!(ks_distance(&xs, |x| x.clamp(0.0, 1.0)) <= 0.0005 + 1e-12);
    assert!((ks_distance(&[0.0, 0.0], |x| if x < 0.0 { 0.0 } else { 0.5 }) - 0.5).abs() < 1e-15);
    let (d, p) = ks_two_sample(&xs, &xs);
    assert_eq!(d, 0.0);
    assert_eq!(p, 1.0);
    let grid: Vec<f64> = (0..1024).map(|i| i as f64 / 1024.0).collect();
    let shifted: Vec<f64> = grid.iter().map(|x| x + 0.5).collect();
    let (d, p) = ks_two_sample(&grid, &shifted);
    assert!((d - 0.5).abs() < 1e-12 && p < 1e-10);
}
