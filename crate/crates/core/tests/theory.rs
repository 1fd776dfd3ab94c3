use gossim::seed::{rng_for, Stream};
use gossim::theory::*;
use gossim::topology::DegreeDistribution;
use gossim::Error;
use proptest::prelude::*;
use rand::Rng;
use rand_distr::{Distribution, Poisson};

/// Poisson pmf evaluated term by term, independent of the library's table.
fn poisson_pmf(mean: f64, upto: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(upto + 1);
    let mut p = (-mean).exp();
    for i in 0..=upto {
        if i > 0 {
            p *= mean / i as f64;
        }
        out.push(p);
    }
    out
}

fn ddf1(alpha: f64, j: u64) -> f64 {
    if j <= 2 {
        1.0
    } else {
        (j as f64).powf(-alpha)
    }
}

#[test]
fn regular_thresholds_are_exact() {
    for k in 3..=16usize {
        let t = fp_threshold(&DegreeDistribution::regular(k)).unwrap();
        assert!((t - 1.0 / (k - 1) as f64).abs() <= 1e-12, "k={k}: {t}");
    }
}

#[test]
fn poisson_thresholds_invert_the_mean() {
    for mean in [1.5, 2.0, 4.0, 5.0, 8.0, 12.5] {
        let t = fp_threshold(&DegreeDistribution::poisson(mean).unwrap()).unwrap();
        assert!((t - 1.0 / mean).abs() < 1e-9, "mean {mean}: {t}");
    }
}

#[test]
fn theta_agrees_with_monte_carlo() {
    // The excess degree of a Poisson graph is again Poisson with the same
    // mean, so sampling it directly bypasses the q_i construction.
    let d = DegreeDistribution::poisson(4.0).unwrap();
    let theta = ddg_theta(&d, &GossipFunction::Ddf1(0.5)).unwrap();
    let pois = Poisson::new(4.0).unwrap();
    let mut rng = rng_for(2024, Stream::Attempt, 0);
    let samples = 1_000_000;
    let sum: f64 = (0..samples).map(|_| ddf1(0.5, pois.sample(&mut rng) as u64)).sum();
    let mc = sum / samples as f64;
    // the standard error is below 5e-4
    assert!((theta - mc).abs() < 3e-3, "analytic {theta} vs sampled {mc}");
}

#[test]
fn alpha_agrees_with_grid_scan() {
    let mean = 4.0;
    let pmf = poisson_pmf(mean, 80);
    // margin(α) = <q> Σ_j q_j γ(j) with q = pmf for Poisson
    let margin = |alpha: f64| mean * pmf.iter().enumerate().map(|(j, q)| q * ddf1(alpha, j as u64)).sum::<f64>();
    let grid: Vec<f64> = (0..=6000).map(|i| 10f64.powf(-3.0 + 6.0 * i as f64 / 6000.0)).collect();
    let cell = grid
        .windows(2)
        .find(|w| margin(w[0]) > 1.0 && margin(w[1]) <= 1.0)
        .expect("the margin crosses 1 somewhere on the grid");
    let alpha = solve_alpha(&DegreeDistribution::poisson(mean).unwrap(), DdfFamily::Ddf1).unwrap();
    assert!(cell[0] <= alpha && alpha <= cell[1], "{alpha} outside {cell:?}");
    let d = DegreeDistribution::poisson(mean).unwrap();
    let m = percolation_margin(&d, &Scheme::DegreeDependent(GossipFunction::Ddf1(alpha))).unwrap();
    assert!((m - 1.0).abs() < 1e-5);
}

#[test]
fn ring_has_no_alpha_crossing() {
    let err = solve_alpha(&DegreeDistribution::regular(2), DdfFamily::Ddf1).unwrap_err();
    assert!(matches!(err, Error::NoCrossing { .. }));
}

#[test]
fn receivers_blow_up_near_threshold() {
    let d = DegreeDistribution::regular(4);
    let t = fp_threshold(&d).unwrap();
    let r = |g: f64| match expected_receivers(&d, &Scheme::Fixed(g)).unwrap() {
        Receivers::Finite(v) => v,
        Receivers::Divergent => f64::INFINITY,
    };
    assert!(r(0.99 * t) >= 10.0 * r(0.5 * t));
    assert_eq!(r(t), f64::INFINITY);
}

fn distribution() -> impl Strategy<Value = DegreeDistribution> {
    prop::collection::vec(0.0f64..1.0, 2..30)
        .prop_filter("needs mass above degree 0", |w| w[1..].iter().sum::<f64>() > 1e-3)
        .prop_map(|w| {
            let total: f64 = w.iter().sum();
            DegreeDistribution::new(w.iter().map(|x| x / total).collect()).unwrap()
        })
}

proptest! {
    #[test]
    fn excess_mean_routes_agree(d in distribution()) {
        let v = excess_view(&d).unwrap();
        prop_assert!((v.mean_excess() - v.mean_excess_by_sum()).abs() < 1e-9);
        prop_assert!((v.probabilities().iter().sum::<f64>() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn constant_function_degenerates_to_fixed(d in distribution(), g in 0.0f64..=1.0) {
        let fixed = branching(&d, &Scheme::Fixed(g)).unwrap();
        let ddg = branching(&d, &Scheme::DegreeDependent(GossipFunction::Fixed(g))).unwrap();
        prop_assert_eq!(fixed, ddg);
    }

    #[test]
    fn margins_are_linear(d in distribution(), g in 0.0f64..=0.5) {
        for s in [Scheme::Fixed(g), Scheme::Broadcast(g)] {
            let doubled = match s {
                Scheme::Fixed(_) => Scheme::Fixed(2.0 * g),
                _ => Scheme::Broadcast(2.0 * g),
            };
            let (a, b) = (percolation_margin(&d, &s).unwrap(), percolation_margin(&d, &doubled).unwrap());
            prop_assert!((b - 2.0 * a).abs() <= 1e-12 * b.max(1.0));
        }
    }

    #[test]
    fn theta_is_a_probability(d in distribution(), alpha in 1e-3f64..1e3) {
        for f in [GossipFunction::Ddf1(alpha), GossipFunction::Ddf2(alpha)] {
            let t = ddg_theta(&d, &f).unwrap();
            prop_assert!((0.0..=1.0).contains(&t));
            let b = branching(&d, &Scheme::DegreeDependent(f)).unwrap();
            prop_assert!(b.f_prime_at_1 >= 0.0 && b.f_arrow_prime_at_1 >= 0.0);
        }
    }

    #[test]
    fn receivers_grow_with_gamma(k in 3usize..12, a in 0.0f64..1.0, b in 0.0f64..1.0) {
        let d = DegreeDistribution::regular(k);
        let t = fp_threshold(&d).unwrap();
        let (lo, hi) = (a.min(b) * t * 0.999, a.max(b) * t * 0.999);
        let r = |g| match expected_receivers(&d, &Scheme::Fixed(g)).unwrap() {
            Receivers::Finite(v) => v,
            Receivers::Divergent => f64::INFINITY,
        };
        prop_assert!(r(lo) <= r(hi));
    }
}

#[test]
fn sampled_distributions_keep_theta_bounded() {
    let mut rng = rng_for(7, Stream::Attempt, 1);
    for _ in 0..200 {
        let mean = rng.random_range(1.1..20.0);
        let d = DegreeDistribution::poisson(mean).unwrap();
        let alpha = 10f64.powf(rng.random_range(-3.0..3.0));
        assert!((0.0..=1.0).contains(&ddg_theta(&d, &GossipFunction::Ddf2(alpha)).unwrap()));
    }
}
