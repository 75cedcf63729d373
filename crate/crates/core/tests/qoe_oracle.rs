use playout_core::qoe::{
    file_level_cost, optimize_file_level, optimize_finite, optimize_infinite_subcritical,
    optimize_infinite_supercritical, subcritical_cost, supercritical_cost, ExponentialCost, FiniteSearch, QoeWeights,
};
use playout_core::QueueParams;

/// Derivative-free minimiser of a convex function on `[0, inf)`.
fn golden_section(f: impl Fn(f64) -> f64) -> f64 {
    let mut hi = 1.0;
    while f(2.0 * hi) < f(hi) {
        hi *= 2.0;
    }
    let (mut a, mut b) = (0.0, 2.0 * hi);
    let r = (5f64.sqrt() - 1.0) / 2.0;
    while b - a > 1e-7 {
        let c = b - r * (b - a);
        let d = a + r * (b - a);
        if f(c) < f(d) {
            b = d;
        } else {
            a = c;
        }
    }
    (a + b) / 2.0
}

fn check_closed_form(c: &ExponentialCost) -> f64 {
    let x = c.argmin().unwrap();
    assert!(c.stationarity_residual(x) < 1e-8);
    let numeric = golden_section(|v| c.cost(v));
    assert!((numeric - x).abs() < 1e-3, "{c:?}: {x} vs {numeric}");
    x
}

#[test]
fn supercritical_grid() {
    for gamma in [1e-4, 1e-3, 1e-2] {
        let w = QoeWeights::with_gamma(gamma).unwrap();
        for k in 1..=20 {
            let p = QueueParams::new(1.0 + 0.05 * k as f64, 1.0).unwrap();
            check_closed_form(&supercritical_cost(&p, &w).unwrap());
        }
    }
    // optimum falls as the start-up delay weighs more
    let p = QueueParams::new(1.2, 1.0).unwrap();
    let xs: Vec<f64> = [1e-4, 1e-3, 1e-2]
        .iter()
        .map(|&g| {
            optimize_infinite_supercritical(&p, &QoeWeights::with_gamma(g).unwrap(), Default::default())
                .unwrap()
                .x1_real
                .unwrap()
        })
        .collect();
    assert!(xs[0] > xs[1] && xs[1] > xs[2]);
}

#[test]
fn subcritical_grid() {
    for gamma in [1e-4, 1e-3] {
        let w = QoeWeights::with_gamma(gamma).unwrap();
        for k in 0..=49 {
            let p = QueueParams::new(0.5 + 0.01 * k as f64, 1.0).unwrap();
            check_closed_form(&subcritical_cost(&p, &w).unwrap());
        }
    }
    let p = QueueParams::new(0.9, 1.0).unwrap();
    let lo = optimize_infinite_subcritical(&p, &QoeWeights::with_gamma(1e-4).unwrap(), Default::default()).unwrap();
    let hi = optimize_infinite_subcritical(&p, &QoeWeights::with_gamma(1e-3).unwrap(), Default::default()).unwrap();
    assert!(lo.x1_real > hi.x1_real);
}

#[test]
fn file_level_grid() {
    for theta in [1.0 / 1000.0, 1.0 / 2000.0] {
        let mut per_gamma = Vec::new();
        for gamma in [0.01, 0.005] {
            let w = QoeWeights::with_gamma(gamma).unwrap();
            let mut prev_starvation = f64::INFINITY;
            let mut xs = Vec::new();
            for k in 0..20 {
                let lambda = 20.0 + 0.25 * k as f64;
                let c = file_level_cost(lambda, 25.0, theta, &w).unwrap();
                let x = check_closed_form(&c);
                let starvation = (-c.a * x).exp();
                assert!(
                    starvation < prev_starvation,
                    "theta {theta} gamma {gamma} lambda {lambda}"
                );
                prev_starvation = starvation;
                xs.push(
                    optimize_file_level(lambda, 25.0, theta, &w, Default::default())
                        .unwrap()
                        .x1_real
                        .unwrap(),
                );
            }
            per_gamma.push(xs);
        }
        // smaller gamma, larger threshold
        for (a, b) in per_gamma[1].iter().zip(&per_gamma[0]) {
            assert!(a > b);
        }
    }
}

#[test]
fn finite_media_regimes() {
    let n = 1000;
    let x1 = |lambda: f64, gamma: f64| {
        let p = QueueParams::new(lambda, 25.0).unwrap();
        optimize_finite(&p, n, &QoeWeights::with_gamma(gamma).unwrap(), FiniteSearch::default())
            .unwrap()
            .x1_star
    };
    for lambda in [16.0, 17.0, 18.0, 19.0, 19.5] {
        assert_eq!(x1(lambda, 5e-3), 1, "lambda {lambda}");
    }
    for lambda in [16.0, 18.0, 20.0, 22.0, 24.0] {
        assert!(x1(lambda, 1e-4) > x1(lambda, 1e-3), "lambda {lambda}");
    }
    // the optimum falls as the arrival rate rises
    let strict: Vec<u64> = [16.0, 18.0, 20.0, 22.0, 24.0].iter().map(|&l| x1(l, 1e-3)).collect();
    assert!(strict.windows(2).all(|w| w[1] < w[0]), "{strict:?}");
}

#[test]
fn finite_media_reproducible() {
    let p = QueueParams::new(20.0, 25.0).unwrap();
    let w = QoeWeights::with_gamma(1e-3).unwrap();
    let a = optimize_finite(&p, 1000, &w, FiniteSearch::default()).unwrap();
    let b = optimize_finite(&p, 1000, &w, FiniteSearch::default()).unwrap();
    assert_eq!(a, b);
    // frozen from an independent scan
    assert_eq!(a.x1_star, 278);
}
