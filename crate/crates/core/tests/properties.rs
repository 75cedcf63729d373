use playout_core::ballot::{full_starvation_pmf, starvation_probability, Mode};
use playout_core::fluid::{fluid_starvation_probability, FileSizeDistribution, FluidScenario};
use playout_core::numeric::{log_binomial_pmf, poisson_pmf};
use playout_core::qoe::{file_level_cost, lambert_w0, QoeWeights};
use playout_core::recursive::{ipp_kernel, mm1_kernel};
use playout_core::{IppParams, QueueParams, ScenarioSpec};
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn binomial_pmf_normalized(n in 0u64..400, p in 0.0f64..=1.0) {
        let s: f64 = (0..=n).map(|k| log_binomial_pmf(n, k, p).unwrap().prob()).sum();
        prop_assert!((s - 1.0).abs() < 1e-12);
    }

    #[test]
    fn poisson_partial_sums_increase(m in 0.0f64..50.0) {
        let mut acc = 0.0;
        for k in 0..200 {
            let next = acc + poisson_pmf(k, m).unwrap();
            prop_assert!(next >= acc);
            acc = next;
        }
        prop_assert!((acc - 1.0).abs() < 1e-12);
    }

    #[test]
    fn pmf_is_a_distribution(rho in 0.2f64..3.0, n in 1u64..80, x1 in 1u64..12) {
        let x1 = x1.min(n);
        let p = QueueParams::from_rho(rho).unwrap();
        let d = full_starvation_pmf(&p, &ScenarioSpec::poisson(n, x1).unwrap(), Mode::Exact).unwrap();
        prop_assert!(d.pmf().iter().all(|&v| (0.0..=1.0).contains(&v)));
        prop_assert!((d.total() - 1.0).abs() < 1e-9);
        prop_assert!(d.pgf(0.5) <= 1.0 + 1e-12 && d.pgf(0.5) >= d.get(0));
    }

    #[test]
    fn starvation_probability_monotone_in_threshold(rho in 0.2f64..3.0, n in 2u64..300, x1 in 1u64..299) {
        let x1 = x1.min(n - 1);
        let p = QueueParams::from_rho(rho).unwrap();
        let a = starvation_probability(&p, &ScenarioSpec::poisson(n, x1).unwrap()).unwrap();
        let b = starvation_probability(&p, &ScenarioSpec::poisson(n, x1 + 1).unwrap()).unwrap();
        // Both sums carry up to ~n ulps of rounding near 1.
        prop_assert!(b <= a + 4.0 * n as f64 * f64::EPSILON);
    }

    #[test]
    fn kernels_normalized(l in 0.05f64..30.0, m in 0.05f64..30.0, a in 0.01f64..5.0, b in 0.01f64..5.0, i in 1u64..200) {
        let p = QueueParams::new(l, m).unwrap();
        for k in [mm1_kernel(&p, i).unwrap(), ipp_kernel(&p, &IppParams::new(a, b).unwrap(), i).unwrap()] {
            let row = k.row(i);
            prop_assert!((row.iter().sum::<f64>() - 1.0).abs() < 1e-10);
            prop_assert!(row.iter().all(|&v| v >= -1e-12));
        }
    }

    #[test]
    fn fluid_tails_fall_with_threshold(rho in 0.05f64..0.999, x1 in 1.0f64..500.0) {
        let dists = [
            FileSizeDistribution::exponential(1.0 / 2000.0).unwrap(),
            FileSizeDistribution::pareto(300.0, 1.1765).unwrap(),
            FileSizeDistribution::log_normal(5.0, 2.2807).unwrap(),
        ];
        let lo = FluidScenario::new(rho, 1.0, x1).unwrap();
        let hi = FluidScenario::new(rho, 1.0, x1 * 1.5).unwrap();
        for d in dists {
            let a = fluid_starvation_probability(&lo, &d).unwrap();
            let b = fluid_starvation_probability(&hi, &d).unwrap();
            prop_assert!((0.0..=1.0).contains(&a) && b <= a);
        }
    }

    #[test]
    fn lambert_residual(x in -0.36787944f64..1e12) {
        let w = lambert_w0(x).unwrap();
        prop_assert!((w * w.exp() - x).abs() < 1e-12 * x.abs().max(1.0));
    }

    #[test]
    fn file_level_optimum_falls_with_gamma(lambda in 15.0f64..24.9, g in 1e-4f64..1e-1) {
        let lo = file_level_cost(lambda, 25.0, 1e-3, &QoeWeights::with_gamma(g).unwrap()).unwrap();
        let hi = file_level_cost(lambda, 25.0, 1e-3, &QoeWeights::with_gamma(2.0 * g).unwrap()).unwrap();
        prop_assert!(hi.argmin().unwrap() <= lo.argmin().unwrap());
    }
}
