//! Analytic results against the simulator, at three standard errors.

use playout_core::ballot::{mean_starvation_interval, starvation_pmf, starvation_probability, Mode};
use playout_core::fluid::{
    fluid_starvation_probability, match_means, no_starvation_horizon, EmpiricalTail, FileSizeDistribution,
    FluidScenario, MeanMatch,
};
use playout_core::recursive::{ipp_kernel, mm1_kernel, starvation_pmf_recursive, starvation_pmf_recursive_with_resume};
use playout_core::sim::{
    bin_verdict, compare_pmf, sample_file_sizes, simulate, simulate_kernel_check, simulate_starvation_interval,
    KernelSource, SimConfig,
};
use playout_core::takacs::{takacs_first_starvation, takacs_starvation_probability, SlottedScenario};
use playout_core::{ArrivalModel, IppParams, QueueParams, ScenarioSpec};

const SEED: u64 = 7;

fn assert_all_pass(verdicts: &[playout_core::sim::BinVerdict], what: &str) {
    for (j, v) in verdicts.iter().enumerate() {
        assert!(v.pass, "{what} bin {j}: {v:?}");
    }
}

#[test]
fn ballot_probability_against_simulation() {
    let p = QueueParams::new(0.95, 1.0).unwrap();
    let spec = ScenarioSpec::poisson(200, 20).unwrap();
    let r = simulate(&SimConfig::new(p, spec).seed(SEED)).unwrap();
    let v = bin_verdict(
        starvation_probability(&p, &spec).unwrap(),
        r.starvation_frequency(),
        r.replications,
        3.0,
    );
    assert!(v.pass, "{v:?}");
}

#[test]
fn ballot_pmf_against_simulation() {
    for &(rho, n, x1) in &[(0.95, 400u64, 20u64), (1.1, 500, 40), (0.8, 100, 5)] {
        let p = QueueParams::from_rho(rho).unwrap();
        let spec = ScenarioSpec::poisson(n, x1).unwrap();
        let r = simulate(&SimConfig::new(p, spec).seed(SEED)).unwrap();
        let d = starvation_pmf(&p, &spec, spec.max_starvations().min(4), Mode::Exact).unwrap();
        assert_all_pass(&compare_pmf(&r, d.pmf(), 3.0), &format!("rho {rho} N {n} x1 {x1}"));
    }
}

#[test]
fn takacs_against_slotted_simulation() {
    let s = SlottedScenario::from_load(0.9, 200, 10).unwrap();
    let p = QueueParams::new(0.9, 1.0).unwrap();
    let r = simulate(&SimConfig::new(p, s.spec()).replications(100_000).seed(SEED)).unwrap();
    let v = bin_verdict(
        takacs_first_starvation(&s, 30),
        r.first_starvation[30] as f64 / 1e5,
        r.replications,
        3.0,
    );
    assert!(v.pass, "first starvation at packet 30: {v:?}");

    let s = SlottedScenario::from_load(1.1, 500, 20).unwrap();
    let p = QueueParams::new(1.1, 1.0).unwrap();
    let r = simulate(&SimConfig::new(p, s.spec()).seed(SEED)).unwrap();
    let v = bin_verdict(
        takacs_starvation_probability(&s),
        r.starvation_frequency(),
        r.replications,
        3.0,
    );
    assert!(v.pass, "{v:?}");
}

#[test]
fn slot_length_scales_time_only() {
    let a = SlottedScenario::new(0.45, 2.0, 300, 10).unwrap();
    let b = SlottedScenario::from_load(0.9, 300, 10).unwrap();
    assert!((takacs_starvation_probability(&a) - takacs_starvation_probability(&b)).abs() < 1e-15);
    let r = simulate(&SimConfig::new(QueueParams::new(0.45, 1.0).unwrap(), a.spec()).seed(SEED)).unwrap();
    let v = bin_verdict(
        takacs_starvation_probability(&a),
        r.starvation_frequency(),
        r.replications,
        3.0,
    );
    assert!(v.pass, "{v:?}");
}

#[test]
fn kernels_against_micro_simulation() {
    let samples = 1_000_000;
    let p = QueueParams::from_rho(2.0).unwrap();
    let k = mm1_kernel(&p, 3).unwrap();
    let f = simulate_kernel_check(KernelSource::Poisson(p), 3, samples, SEED).unwrap();
    for (kk, &fk) in f.iter().enumerate() {
        let v = bin_verdict(k.q(3, kk as u64), fk, samples, 3.0);
        assert!(v.pass, "Q3({kk}): {v:?}");
    }
    for &(l, m, a, b) in &[(1.5, 1.0, 0.2, 0.2), (20.0, 25.0, 0.3, 0.1)] {
        let p = QueueParams::new(l, m).unwrap();
        let ipp = IppParams::new(a, b).unwrap();
        let k = ipp_kernel(&p, &ipp, 6).unwrap();
        let f = simulate_kernel_check(KernelSource::Ipp(p, ipp), 6, samples, SEED).unwrap();
        for (kk, &fk) in f.iter().enumerate() {
            let v = bin_verdict(k.q(6, kk as u64), fk, samples, 3.0);
            assert!(v.pass, "IPP {l}/{m} Q6({kk}): {v:?}");
        }
    }
}

#[test]
fn ipp_recursion_against_simulation() {
    let p = QueueParams::new(1.5, 1.0).unwrap();
    let ipp = IppParams::new(0.2, 0.2).unwrap();
    for (n, x1) in [(300u64, 40u64), (400, 20)] {
        let k = ipp_kernel(&p, &ipp, n).unwrap();
        let d = starvation_pmf_recursive(&k, n, x1, 2).unwrap();
        let spec = ScenarioSpec::new(n, x1, ArrivalModel::Ipp(ipp)).unwrap();
        let r = simulate(&SimConfig::new(p, spec).seed(SEED)).unwrap();
        assert_all_pass(&compare_pmf(&r, d.pmf(), 3.0), &format!("IPP N {n} x1 {x1}"));
    }
}

/// The default resume convention of the recursion is the one the
/// simulator's default reproduces; the alternative stays consistent with
/// the simulator run under the same convention.
#[test]
fn resume_convention_regression() {
    let p = QueueParams::from_rho(0.9).unwrap();
    let (n, x1) = (200u64, 10u64);
    let k = mm1_kernel(&p, n).unwrap();
    let spec = ScenarioSpec::poisson(n, x1).unwrap();
    let default = starvation_pmf_recursive(&k, n, x1, 4).unwrap();
    let r = simulate(&SimConfig::new(p, spec).seed(SEED)).unwrap();
    assert_all_pass(&compare_pmf(&r, default.pmf(), 3.0), "resume x1");

    let alt = starvation_pmf_recursive_with_resume(&k, n, x1, 4, x1 - 1).unwrap();
    let r_alt = simulate(&SimConfig::new(p, spec).resume_threshold(x1 - 1).seed(SEED)).unwrap();
    assert_all_pass(&compare_pmf(&r_alt, alt.pmf(), 3.0), "resume x1-1");
    // the two conventions are distinguishable at this sample size
    assert!(compare_pmf(&r, alt.pmf(), 3.0).iter().any(|v| !v.pass));
}

#[test]
fn mean_interval_against_endless_stream() {
    let p = QueueParams::new(0.95, 1.0).unwrap();
    let want = mean_starvation_interval(&p, 20).unwrap();
    let est = simulate_starvation_interval(&p, 20, 20_000, SEED).unwrap();
    assert!((est.mean - want).abs() < 3.0 * est.std_error, "{est:?} vs {want}");
}

#[test]
fn fluid_tails_against_sampled_sizes() {
    let draws = 1_000_000;
    let mean = 2000.0;
    let dists = [
        match_means(mean, MeanMatch::Exponential).unwrap(),
        match_means(mean, MeanMatch::ParetoMinimum(300.0)).unwrap(),
        match_means(mean, MeanMatch::LogNormalLocation(5.0)).unwrap(),
    ];
    for (i, d) in dists.iter().enumerate() {
        let tail = EmpiricalTail::new(sample_file_sizes(d, draws, SEED + i as u64)).unwrap();
        for x1 in (10..=150).step_by(10) {
            let scn = FluidScenario::new(0.95, 1.0, x1 as f64).unwrap();
            let v = bin_verdict(
                fluid_starvation_probability(&scn, d).unwrap(),
                tail.starvation_probability(&scn).unwrap(),
                draws as u64,
                3.0,
            );
            assert!(v.pass, "{d:?} x1 {x1}: {v:?}");
        }
    }
    let d = FileSizeDistribution::exponential(1.0 / 2000.0).unwrap();
    let scn = FluidScenario::new(0.95, 1.0, 90.0).unwrap();
    assert!((no_starvation_horizon(&scn).unwrap().packets() - 1800.0).abs() < 1e-9);
    let tail = EmpiricalTail::new(sample_file_sizes(&d, draws, SEED)).unwrap();
    let v = bin_verdict(
        fluid_starvation_probability(&scn, &d).unwrap(),
        tail.tail(1800.0),
        draws as u64,
        3.0,
    );
    assert!(v.pass, "{v:?}");
}
