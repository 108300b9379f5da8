//! The `verify` subcommand: a fast self-check suite over the library's core
//! identities. Prints one PASS/FAIL line per check and reports overall
//! success; heavier, tolerance-pinned runs live in the acceptance tests.

use rfabel_core::correlation::{
    abel_prediction_damped, abel_prediction_limit, correlate_raw, sandwich_check, CorrelateOptions,
    CqSequence,
};
use rfabel_core::primeapps::singular_series_c;
use rfabel_core::ramanujan::{csum_cross_sum, csum_direct, csum_fast};
use rfabel_core::rfseries::{choose_q_epsilon, tail_bound, CoefficientFamily, DampedSeriesTable};
use rfabel_core::sieves::lcm;
use rfabel_core::{SieveTable, Sign};

pub struct Check {
    pub name: &'static str,
    pub pass: bool,
    pub detail: String,
}

fn check(name: &'static str, body: impl FnOnce() -> Result<String, String>) -> Check {
    match body() {
        Ok(detail) => Check {
            name,
            pass: true,
            detail,
        },
        Err(detail) => Check {
            name,
            pass: false,
            detail,
        },
    }
}

pub fn run_all() -> Vec<Check> {
    let table = SieveTable::build(200_000).expect("verify table");
    let mu_phi = CoefficientFamily::mu_over_phi();
    let opts = CorrelateOptions::default();
    let mut checks = Vec::new();

    checks.push(check("csum-orthogonality", || {
        for q1 in 1..=12u64 {
            for q2 in 1..=12u64 {
                let period = lcm(q1, q2);
                for m in 0..=6i64 {
                    for sign in [Sign::Plus, Sign::Minus] {
                        let numer = csum_cross_sum(&table, q1, q2, m, sign, period)
                            .map_err(|e| e.to_string())?;
                        let expected = if q1 == q2 {
                            csum_fast(&table, q1, m).map_err(|e| e.to_string())? as i128
                                * period as i128
                        } else {
                            0
                        };
                        if numer != expected {
                            return Err(format!(
                                "q1={q1} q2={q2} m={m} sign={sign}: {numer} != {expected}"
                            ));
                        }
                    }
                }
            }
        }
        Ok("q <= 12, m <= 6, both signs, exact".into())
    }));

    checks.push(check("csum-fast-vs-direct", || {
        for q in 1..=60u64 {
            for n in -200..=200i64 {
                let fast = csum_fast(&table, q, n).map_err(|e| e.to_string())?;
                let direct = csum_direct(q, n).map_err(|e| e.to_string())?;
                if fast != direct {
                    return Err(format!("q={q} n={n}: fast {fast} != direct {direct}"));
                }
            }
        }
        Ok("q <= 60, |n| <= 200".into())
    }));

    checks.push(check("csum-bound-even-periodic", || {
        for q in 1..=120u64 {
            for n in [-37i64, -1, 0, 1, 7, 100, 9999] {
                let v = csum_fast(&table, q, n).map_err(|e| e.to_string())?;
                if v.unsigned_abs() > table.phi(q) {
                    return Err(format!("|c_{q}({n})| = {v} exceeds phi"));
                }
                let even = csum_fast(&table, q, -n).map_err(|e| e.to_string())?;
                let shifted = csum_fast(&table, q, n + q as i64).map_err(|e| e.to_string())?;
                if v != even || v != shifted {
                    return Err(format!("c_{q}({n}) breaks evenness/periodicity"));
                }
            }
        }
        Ok("bound, evenness, periodicity on sample grid".into())
    }));

    checks.push(check("tail-bound-and-q-epsilon", || {
        for z in [0.3, 0.5, 0.9] {
            let mut prev = f64::INFINITY;
            for q in 1..=50u64 {
                let t = tail_bound(&mu_phi, z, q).map_err(|e| e.to_string())?;
                if t > prev {
                    return Err(format!("tail bound increased at z={z} q={q}"));
                }
                prev = t;
            }
            for eps in [1e-1, 1e-2, 1e-3] {
                let q = choose_q_epsilon(&mu_phi, z, eps).map_err(|e| e.to_string())?;
                let at = tail_bound(&mu_phi, z, q).map_err(|e| e.to_string())?;
                if at >= eps {
                    return Err(format!("tail({q}) = {at} not below eps = {eps}"));
                }
                if q > 1 {
                    let before = tail_bound(&mu_phi, z, q - 1).map_err(|e| e.to_string())?;
                    if before < eps {
                        return Err(format!("Q_eps = {q} is not minimal at z={z} eps={eps}"));
                    }
                }
            }
        }
        Ok("monotone tails; Q_epsilon minimal".into())
    }));

    checks.push(check("uniform-convergence", || {
        let z = 0.9;
        let eps = 1e-2;
        let q_eps = choose_q_epsilon(&mu_phi, z, eps).map_err(|e| e.to_string())?;
        let full =
            DampedSeriesTable::build(&table, &mu_phi, z, 200).map_err(|e| e.to_string())?;
        let trunc =
            DampedSeriesTable::build(&table, &mu_phi, z, q_eps).map_err(|e| e.to_string())?;
        let mut worst = 0.0f64;
        for n in 1..=2000i64 {
            worst = worst.max((full.eval(n) - trunc.eval(n)).abs());
        }
        if worst > eps {
            return Err(format!("max gap {worst:.3e} > eps {eps}"));
        }
        Ok(format!("max_n |f_200 - f_{q_eps}| = {worst:.3e} <= {eps}"))
    }));

    checks.push(check("mu-phi-tail-majorant", || {
        for step in 1..=9u32 {
            let z = step as f64 / 10.0;
            let mut sum = 0.0;
            let mut zp = 1.0;
            for q in 1..=2000u64 {
                zp *= z;
                sum += table.mu(q).abs() as f64 * zp;
            }
            if sum > z / (1.0 - z) {
                return Err(format!("sum {sum} exceeds z/(1-z) at z = {z}"));
            }
        }
        Ok("sum |mu(q)| z^q <= z/(1-z) on the z grid".into())
    }));

    checks.push(check("singular-series-identities", || {
        for h in (1..=31u64).step_by(2) {
            let v = singular_series_c(h, 1000).map_err(|e| e.to_string())?;
            if v.value != 0.0 {
                return Err(format!("C({h}) = {} != 0", v.value));
            }
        }
        let c2 = singular_series_c(2, 50_000).map_err(|e| e.to_string())?;
        let c4 = singular_series_c(4, 50_000).map_err(|e| e.to_string())?;
        let c6 = singular_series_c(6, 50_000).map_err(|e| e.to_string())?;
        if c6.value / c2.value != 2.0 {
            return Err(format!("C(6)/C(2) = {} != 2", c6.value / c2.value));
        }
        if c4.value != c2.value {
            return Err("C(4) != C(2)".into());
        }
        Ok(format!("odd h vanish; C(6)/C(2) = 2; C(2) = {:.8}", c2.value))
    }));

    checks.push(check("abel-limit-vs-singular", || {
        let limit =
            abel_prediction_limit(&table, &mu_phi, &mu_phi, 2, 1e-3).map_err(|e| e.to_string())?;
        let c2 = singular_series_c(2, 100_000).map_err(|e| e.to_string())?;
        let diff = (limit.value - c2.value).abs();
        if diff > 2e-3 {
            return Err(format!(
                "limit {} vs C(2) {}: diff {diff:.3e}",
                limit.value, c2.value
            ));
        }
        Ok(format!("diff {diff:.3e} at h = 2"))
    }));

    checks.push(check("finite-theorem-instance", || {
        let a = CoefficientFamily::tabulated(vec![1.0, -2.0, 0.0, 0.5]);
        let b = CoefficientFamily::tabulated(vec![0.5, 1.0, 0.0, -1.0]);
        let fa = DampedSeriesTable::build(&table, &a, 0.5, 4).map_err(|e| e.to_string())?;
        let fb = DampedSeriesTable::build(&table, &b, 0.5, 4).map_err(|e| e.to_string())?;
        for m in 0..=5u64 {
            let est =
                correlate_raw(&fa, &fb, m, Sign::Plus, 1000, &opts).map_err(|e| e.to_string())?;
            let pred = abel_prediction_damped(&table, &a, &b, 0.5, 4, m as i64)
                .map_err(|e| e.to_string())?;
            if est.value != pred {
                return Err(format!("m={m}: {} != {}", est.value, pred));
            }
        }
        Ok("full-period correlation equals prediction exactly".into())
    }));

    checks.push(check("sandwich-inequality", || {
        let report = sandwich_check(&table, &mu_phi, &mu_phi, 0.5, 0.01, 1, 100_000, &opts)
            .map_err(|e| e.to_string())?;
        if !report.pass {
            return Err(format!(
                "gap {:.3e} > bound {:.3e}",
                report.gap, report.bound
            ));
        }
        Ok(format!(
            "gap {:.3e} <= bound {:.3e}",
            report.gap, report.bound
        ))
    }));

    checks.push(check("worker-count-determinism", || {
        let f = CqSequence::new(&table, 6).map_err(|e| e.to_string())?;
        let g = CqSequence::new(&table, 4).map_err(|e| e.to_string())?;
        let o = CorrelateOptions {
            chunk_size: 1024,
            ..CorrelateOptions::default()
        };
        let one = rayon::ThreadPoolBuilder::new()
            .num_threads(1)
            .build()
            .map_err(|e| e.to_string())?
            .install(|| correlate_raw(&f, &g, 2, Sign::Plus, 60_000, &o))
            .map_err(|e| e.to_string())?;
        let eight = rayon::ThreadPoolBuilder::new()
            .num_threads(8)
            .build()
            .map_err(|e| e.to_string())?
            .install(|| correlate_raw(&f, &g, 2, Sign::Plus, 60_000, &o))
            .map_err(|e| e.to_string())?;
        if one.value.to_bits() != eight.value.to_bits() {
            return Err("1-thread and 8-thread results differ".into());
        }
        Ok("1 vs 8 workers bitwise identical".into())
    }));

    checks
}
