//! Numeric instantiations of the convergence statements the library is built
//! around: uniform convergence of the damped partial sums, the tail majorant
//! of the mu/phi family, the Abel limit of the damped predictions, and the
//! empirical recovery of the mu/phi coefficients from the weighted von
//! Mangoldt function.

use rfabel_core::correlation::{
    abel_prediction_damped, abel_prediction_limit, correlate_raw, CorrelateOptions,
};
use rfabel_core::primeapps::{weighted_lambda, StreamingWeightedLambda, WeightedLambdaSeq};
use rfabel_core::ramanujan::csum_fast;
use rfabel_core::rfseries::{
    choose_q_epsilon, rf_coefficient_empirical, tail_bound, CoefficientFamily, DampedSeriesTable,
};
use rfabel_core::{SieveTable, Sign};

#[test]
fn uniform_convergence_of_damped_partial_sums() {
    let table = SieveTable::build(10_000).unwrap();
    let mu_phi = CoefficientFamily::mu_over_phi();
    let q_proxy = 200u64;

    for (z, eps) in [(0.5, 1e-2), (0.5, 1e-3), (0.9, 1e-2), (0.9, 1e-3)] {
        let q_eps = choose_q_epsilon(&mu_phi, z, eps).unwrap();
        assert!(q_eps <= q_proxy, "Q_eps = {q_eps} exceeds the proxy");
        // The proxy truncation sits far below every epsilon in play.
        let proxy_tail = tail_bound(&mu_phi, z, q_proxy).unwrap();
        assert!(proxy_tail < 1e-8, "proxy tail {proxy_tail:.3e} at z = {z}");

        let full = DampedSeriesTable::build(&table, &mu_phi, z, q_proxy).unwrap();
        let trunc = DampedSeriesTable::build(&table, &mu_phi, z, q_eps).unwrap();
        let mut worst = 0.0f64;
        for n in 1..=10_000i64 {
            let diff = (full.eval(n) - trunc.eval(n)).abs();
            worst = worst.max(diff);
        }
        assert!(
            worst <= eps,
            "max_n |f_200 - f_Qeps| = {worst:.3e} > eps = {eps} at z = {z}"
        );
    }
}

#[test]
fn mu_phi_tail_majorant_partial_sums() {
    // sum for q <= Q of |mu(q)/phi(q)| z^q phi(q) stays below z/(1-z).
    let table = SieveTable::build(2_000).unwrap();
    for step in 1..=9u32 {
        let z = step as f64 / 10.0;
        let mut sum = 0.0;
        let mut zp = 1.0;
        for q in 1..=2_000u64 {
            zp *= z;
            sum += (table.mu(q).abs() as f64) * zp;
        }
        assert!(
            sum <= z / (1.0 - z),
            "partial sum {sum} exceeds z/(1-z) = {} at z = {z}",
            z / (1.0 - z)
        );
    }
}

#[test]
fn recovers_mu_phi_coefficients_empirically() {
    let n_terms = 1_000_000u64;
    let table = SieveTable::build(n_terms).unwrap();
    let mut w = vec![0.0; n_terms as usize + 1];
    for n in 1..=n_terms {
        w[n as usize] = weighted_lambda(&table, n).unwrap();
    }
    for (q, expected) in [(1u64, 1.0), (2, -1.0), (3, -0.5), (5, -0.25)] {
        let a_q = rf_coefficient_empirical(&w, &table, q, n_terms).unwrap();
        assert!(
            (a_q - expected).abs() < 0.05,
            "a_{q} = {a_q}, expected about {expected}"
        );
    }
}

#[test]
fn damped_predictions_approach_the_abel_limit() {
    let table = SieveTable::build(1_000_000).unwrap();
    let mu_phi = CoefficientFamily::mu_over_phi();
    for m in [2i64, 4] {
        let limit = abel_prediction_limit(&table, &mu_phi, &mu_phi, m, 1e-5).unwrap();
        let mut last_gap = f64::INFINITY;
        for z in [0.9, 0.99, 0.999] {
            let damped =
                abel_prediction_damped(&table, &mu_phi, &mu_phi, z, 12_000, m).unwrap();
            let gap = (damped - limit.value).abs();
            assert!(
                gap < last_gap,
                "|damped({z}) - limit| = {gap:.6e} did not shrink (prev {last_gap:.6e}) at m = {m}"
            );
            last_gap = gap;
        }
        assert!(last_gap < 5e-3, "z = 0.999 still {last_gap:.3e} away at m = {m}");
    }
}

#[test]
fn direct_q_sums_trend_to_the_limit_value() {
    // Independent route: raw partial sums of the series
    // sum of mu(q)^2 / phi(q)^2 * c_q(2), no Euler product involved.
    let table = SieveTable::build(1_000_000).unwrap();
    let mu_phi = CoefficientFamily::mu_over_phi();
    let limit = abel_prediction_limit(&table, &mu_phi, &mu_phi, 2, 1e-5).unwrap();

    let partial = |q_max: u64| -> f64 {
        let mut sum = 0.0;
        for q in 1..=q_max {
            let mu = table.mu(q);
            if mu == 0 {
                continue;
            }
            let phi = table.phi(q) as f64;
            sum += (mu * mu) as f64 / (phi * phi) * csum_fast(&table, q, 2).unwrap() as f64;
        }
        sum
    };

    let s_small = partial(400);
    let s_large = partial(4_000);
    let gap_small = (s_small - limit.value).abs();
    let gap_large = (s_large - limit.value).abs();
    assert!(
        gap_large < gap_small,
        "q-sum not converging: |S_4000 - L| = {gap_large:.3e} vs |S_400 - L| = {gap_small:.3e}"
    );
    assert!(gap_large < 1e-2, "S_4000 is {gap_large:.3e} from the limit");
}

#[test]
fn streaming_and_dense_weighted_lambda_correlate_identically() {
    let n = 30_000u64;
    let h = 2u64;
    let table = SieveTable::build(n + h).unwrap();
    let dense = WeightedLambdaSeq::new(&table);
    let stream = StreamingWeightedLambda::new(n + h).unwrap();
    let opts = CorrelateOptions {
        chunk_size: 4096,
        ..CorrelateOptions::default()
    };
    let a = correlate_raw(&dense, &dense, h, Sign::Plus, n, &opts).unwrap();
    let b = correlate_raw(&stream, &stream, h, Sign::Plus, n, &opts).unwrap();
    assert_eq!(a.value.to_bits(), b.value.to_bits());
    assert_eq!(a.sum.to_bits(), b.sum.to_bits());
}
