//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any fails.

use std::process::ExitCode;
use std::time::{Duration, Instant};

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::Zero;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use quasispec::circlemap::{
    boundary_limit_window, circle_potential_window, discontinuity_indices, hull_factor_comparison,
    Boundary, CircleParams,
};
use quasispec::operator::{
    determinant_drift, lyapunov_estimate_with, transfer_product, TransferState,
};
use quasispec::spectrum::{
    approximant_spectra, approximant_spectrum, band_spectrum, measure_and_intersect,
    proxy_spectrum, trace_bound_scan, zero_lyapunov_check, TraceScanConfig,
};
use quasispec::stability::{
    cube_window, gordon_membership, nondecay_verify, stability_measure_bound, unit_seeds,
    DerivedConstant,
};
use quasispec::sturmian::{
    c_alpha_prefix, convergents, golden_mean, standard_words, verify_conjugation_identity,
    window_coverage_check,
};
use quasispec::symbolic::Word;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn check(cond: bool, detail: String) -> Outcome {
    if cond {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn within(started: Instant, budget: Duration, detail: String) -> Outcome {
    let elapsed = started.elapsed();
    check(
        elapsed <= budget,
        format!("{detail}; {:.2?} of {:?}", elapsed, budget),
    )
}

fn rat(p: i64, q: i64) -> BigRational {
    BigRational::new(BigInt::from(p), BigInt::from(q))
}

fn standard_word_exactness() -> Outcome {
    let start = Instant::now();
    let cf = golden_mean(20);
    let tower = standard_words(&cf, 20).map_err(|e| e.to_string())?;
    let words = [(3, "101"), (4, "10110"), (5, "10110101")];
    for (n, expected) in words {
        let got = tower.s(n).to_string();
        if got != expected {
            return Err(format!("s_{n} = {got}, expected {expected}"));
        }
    }
    for n in 0..=20 {
        if BigUint::from(tower.s(n as isize).len()) != *cf.q(n) {
            return Err(format!(
                "|s_{n}| = {} but q_{n} = {}",
                tower.s(n as isize).len(),
                cf.q(n)
            ));
        }
    }
    within(
        start,
        Duration::from_secs(1),
        "s_3..s_5 exact, |s_n| = q_n for n <= 20".into(),
    )
}

fn conjugation_identity_suite() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut failures = 0;
    for _ in 0..50 {
        let coefficients: Vec<u64> = (0..10).map(|_| rng.gen_range(1..=4)).collect();
        let cf = convergents(&coefficients).map_err(|e| e.to_string())?;
        let tower = standard_words(&cf, 9).map_err(|e| e.to_string())?;
        for n in 2..=8 {
            let c = verify_conjugation_identity(&tower, n).map_err(|e| e.to_string())?;
            if !c.holds || c.lhs != c.rhs {
                failures += 1;
            }
        }
    }
    check(
        failures == 0,
        format!("{failures} failures over 50 CFs x n = 2..8"),
    )
    .and_then(|d| within(start, Duration::from_secs(5), d))
}

fn circle_coding_bridge() -> Outcome {
    let start = Instant::now();
    let cf = golden_mean(60);
    let params = CircleParams::sturmian(&cf, 1.0, 10_000).map_err(|e| e.to_string())?;
    let w = circle_potential_window(&params, &BigRational::zero(), 1, 10_000)
        .map_err(|e| e.to_string())?;
    let c = c_alpha_prefix(&cf, 10_000).map_err(|e| e.to_string())?;
    let mismatches = w
        .symbols()
        .iter()
        .zip(c.symbols())
        .filter(|(a, b)| a != b)
        .count();
    check(
        mismatches == 0,
        format!("{mismatches} mismatches on 1..10^4"),
    )
    .and_then(|d| within(start, Duration::from_secs(10), d))
}

fn band_integrity() -> Outcome {
    let cf = golden_mean(12);
    for n in 1..=10 {
        let s = approximant_spectrum(&cf, 1.0, n).map_err(|e| e.to_string())?;
        let q = cf.q_usize(n).expect("small");
        if s.band_count() != q {
            return Err(format!("level {n}: {} bands, q = {q}", s.band_count()));
        }
    }
    let one = band_spectrum(&Word::binary("1").unwrap(), 1.0).map_err(|e| e.to_string())?;
    let two = band_spectrum(&Word::binary("10").unwrap(), 1.0).map_err(|e| e.to_string())?;
    let r17 = 17f64.sqrt() - 1.0;
    check(
        (one.measure() - 4.0).abs() <= 1e-8 && (two.measure() - r17).abs() <= 1e-6,
        format!(
            "band count = q_n for n = 1..10; |\"1\"| = {:.10}, |\"10\"| = {:.10}",
            one.measure(),
            two.measure()
        ),
    )
}

fn proxy_measure_trend() -> Outcome {
    let start = Instant::now();
    let cf = golden_mean(14);
    let levels: Vec<usize> = (1..=11).collect();
    let spectra = approximant_spectra(&cf, 1.0, &levels).map_err(|e| e.to_string())?;
    let measures: Vec<f64> = spectra
        .windows(2)
        .map(|p| measure_and_intersect(&p[0], &p[1]).measure_intersection)
        .collect();
    let monotone = measures.windows(2).all(|m| m[1] <= m[0] + 1e-8);
    let (m2, m10) = (measures[1], measures[9]);
    check(
        monotone && m10 < 0.5 * m2,
        format!(
            "measures n = 1..10: {measures:.4?}; m10/m2 = {:.3}",
            m10 / m2
        ),
    )
    .and_then(|d| within(start, Duration::from_secs(120), d))
}

fn trace_sup(lambda: f64, proxy_level: usize) -> Result<f64, String> {
    let cf = golden_mean(16);
    let config = TraceScanConfig {
        proxy_level,
        ..TraceScanConfig::new(8)
    };
    trace_bound_scan(&cf, lambda, config)
        .map(|r| r.overall_sup)
        .map_err(|e| e.to_string())
}

fn trace_boundedness() -> Outcome {
    let mut detail = Vec::new();
    let mut ok = true;
    for lambda in [1.0, 2.0] {
        let s8 = trace_sup(lambda, 8)?;
        let s9 = trace_sup(lambda, 9)?;
        ok &= s9 < 1.5 * s8;
        detail.push(format!("lambda {lambda}: sup {s8:.4} -> {s9:.4}"));
    }
    check(ok, detail.join(", "))
}

fn zero_lyapunov_on_proxy() -> Outcome {
    let start = Instant::now();
    let report =
        zero_lyapunov_check(&golden_mean(60), 1.0, 8, 100_000).map_err(|e| e.to_string())?;
    let free = [0.0, 1.0, -1.5]
        .iter()
        .map(|&e| lyapunov_estimate_with(|_| 0.0, e, 100_000).map(|l| l.gamma_plus.abs()))
        .collect::<Result<Vec<_>, _>>()
        .map_err(|e| e.to_string())?
        .into_iter()
        .fold(0.0, f64::max);
    check(
        report.max_in_spectrum <= 0.02 && report.min_gap >= 0.05 && free <= 0.01,
        format!(
            "max in-spectrum {:.5} (<= 0.02), min gap control {:.5} (>= 0.05), free {:.2e} (<= 0.01)",
            report.max_in_spectrum, report.min_gap, free
        ),
    )
    .and_then(|d| within(start, Duration::from_secs(120), d))
}

fn gordon_inequality() -> Outcome {
    let cf = golden_mean(20);
    let config = TraceScanConfig::new(8);
    let scan = trace_bound_scan(&cf, 1.0, config).map_err(|e| e.to_string())?;
    let c = DerivedConstant::from_scan(&scan).value;
    let window = cube_window(&cf, 1.0, 4).map_err(|e| e.to_string())?;
    let n = cf.q_usize(4).expect("small");
    let mids = proxy_spectrum(&cf, 1.0, 8)
        .map_err(|e| e.to_string())?
        .midpoints();
    let energies: Vec<f64> = (0..10).map(|i| mids[i * mids.len() / 10]).collect();
    let cert = gordon_membership(&window, n, c, &energies).map_err(|e| e.to_string())?;
    let seeds = unit_seeds(100, 8);
    let mut violations = 0;
    let mut worst = f64::INFINITY;
    for &e in &energies {
        let r = nondecay_verify(&window, n, e, &seeds, c).map_err(|e| e.to_string())?;
        violations += r.ratios.iter().filter(|&&x| x < r.bound - 1e-9).count();
        violations += usize::from(r.adversarial_ratio < r.bound - 1e-9);
        worst = worst.min(r.min_max_norm_ratio / r.bound);
    }
    check(
        cert.verdict && violations == 0,
        format!(
            "C = {c:.4}, certificate {}, {violations} violations, min ratio/bound {worst:.3}",
            cert.verdict
        ),
    )
}

fn window_property_and_density() -> Outcome {
    let start = Instant::now();
    let cf = golden_mean(40);
    let prefix = 1_000_000;
    let mut ok = true;
    let mut rows = Vec::new();
    for n in 3..=7 {
        let w = window_coverage_check(&cf, n, prefix).map_err(|e| e.to_string())?;
        let m = stability_measure_bound(&cf, n, prefix).map_err(|e| e.to_string())?;
        let bound = 1.0 / 7.0 - 2.0 * m.q as f64 / prefix as f64;
        let needed = w.window_length as i64 - w.worst_slack.min(0);
        ok &= w.all_windows_contain_cube && m.product >= bound;
        rows.push(format!(
            "n={n}: window {} ({}), shortest sufficient {needed}, q d = {:.4}",
            w.window_length,
            if w.all_windows_contain_cube {
                "ok"
            } else {
                "miss"
            },
            m.product
        ));
    }
    check(ok, rows.join("; ")).and_then(|d| within(start, Duration::from_secs(60), d))
}

fn boundary_limit_suite() -> Outcome {
    let cf = golden_mean(60);
    let lambda = 1.5;
    let sturm = CircleParams::sturmian(&cf, lambda, 100_000).map_err(|e| e.to_string())?;
    let skew =
        CircleParams::from_cf(&cf, rat(1, 4), lambda, 100_000, 100).map_err(|e| e.to_string())?;
    for params in [&sturm, &skew] {
        let w0 =
            boundary_limit_window(params, Boundary::AtZero, 0, 0).map_err(|e| e.to_string())?;
        let w1 = boundary_limit_window(params, Boundary::AtOneMinusBeta, 0, 0)
            .map_err(|e| e.to_string())?;
        if w0.value(0) != Some(lambda) || w1.value(0) != Some(0.0) {
            return Err(format!(
                "omega_0(0) = {:?}, omega_(1-beta)(0) = {:?}",
                w0.value(0),
                w1.value(0)
            ));
        }
    }

    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let mut worst_count = 0;
    for _ in 0..20 {
        let q = rng.gen_range(2..1_000_000i64);
        let theta = rat(rng.gen_range(0..q), q);
        worst_count = worst_count.max(discontinuity_indices(&sturm, &theta, 1000).len());
    }
    for theta in [BigRational::zero(), rat(1, 1) - sturm.beta()] {
        worst_count = worst_count.max(discontinuity_indices(&sturm, &theta, 1000).len());
    }
    if worst_count > 2 {
        return Err(format!("{worst_count} discontinuities on [-1000, 1000]"));
    }

    let mut disagreements = 0;
    for params in [&sturm, &skew] {
        for (which, theta) in [
            (Boundary::AtZero, BigRational::zero()),
            (Boundary::AtOneMinusBeta, rat(1, 1) - params.beta()),
        ] {
            let jumps = discontinuity_indices(params, &theta, 1000);
            let limit = boundary_limit_window(params, which, 1, 1000).map_err(|e| e.to_string())?;
            let v = circle_potential_window(params, &theta, 1, 1000).map_err(|e| e.to_string())?;
            disagreements += (1..=1000)
                .filter(|n| !jumps.contains(n) && limit.value(*n) != v.value(*n))
                .count();
        }
    }
    if disagreements > 0 {
        return Err(format!(
            "{disagreements} disagreements off the discontinuity set"
        ));
    }

    let params = CircleParams::sturmian(&cf, 1.0, 10_000).map_err(|e| e.to_string())?;
    let hull = hull_factor_comparison(&params, 10, 4000, 10_000).map_err(|e| e.to_string())?;
    check(
        hull.factors_v0.len() == 11 && hull.v0_subset_of_grid,
        format!(
            "boundary values exact, <= {worst_count} discontinuities, limits agree off jumps, {} factors at L = 10, F1 in F2: {}",
            hull.factors_v0.len(),
            hull.v0_subset_of_grid
        ),
    )
}

fn relative_difference(a: &TransferState, b: &TransferState) -> f64 {
    let top = a.log_scale().max(b.log_scale());
    let (sa, sb) = ((a.log_scale() - top).exp(), (b.log_scale() - top).exp());
    let (ma, mb) = (a.scaled(), b.scaled());
    let mut diff = 0.0f64;
    let mut size = 0.0f64;
    for i in 0..2 {
        for j in 0..2 {
            diff = diff.max((ma[i][j] * sa - mb[i][j] * sb).abs());
            size = size.max((ma[i][j] * sa).abs());
        }
    }
    diff / size
}

fn unimodularity_and_cocycle() -> Outcome {
    let cf = golden_mean(60);
    let params = CircleParams::sturmian(&cf, 1.0, 1_000_000).map_err(|e| e.to_string())?;
    let w = circle_potential_window(&params, &BigRational::zero(), 1, 1_000_000)
        .map_err(|e| e.to_string())?;
    let values = w.values();
    let mut energies = proxy_spectrum(&cf, 1.0, 8)
        .map_err(|e| e.to_string())?
        .midpoints();
    energies.extend([0.0, 0.5, 3.5, -3.0, 5.0]);
    let drift = energies
        .iter()
        .map(|&e| determinant_drift(e, values.iter().copied()))
        .fold(0.0, f64::max);

    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut worst_split = 0.0f64;
    for _ in 0..100 {
        let e = rng.gen_range(-2.0..3.0);
        let total = rng.gen_range(2..20_000i64);
        let split = rng.gen_range(1..total);
        let whole = transfer_product(&w, e, 1, total).map_err(|e| e.to_string())?;
        let first = transfer_product(&w, e, 1, split).map_err(|e| e.to_string())?;
        let second = transfer_product(&w, e, split + 1, total).map_err(|e| e.to_string())?;
        worst_split = worst_split.max(relative_difference(&whole, &first.then(&second)));
    }
    check(
        drift < 1e-10 && worst_split <= 1e-8,
        format!(
            "det drift {drift:.2e} over 10^6 steps at {} energies, split law {worst_split:.2e}",
            energies.len()
        ),
    )
}

fn main() -> ExitCode {
    let criteria: [Criterion; 11] = [
        ("standard-word exactness", standard_word_exactness),
        ("conjugation identity suite", conjugation_identity_suite),
        ("circle coding bridge", circle_coding_bridge),
        ("band integrity", band_integrity),
        ("proxy measure trend", proxy_measure_trend),
        ("trace boundedness", trace_boundedness),
        ("zero Lyapunov on proxy", zero_lyapunov_on_proxy),
        ("Gordon inequality", gordon_inequality),
        (
            "window property and cube density",
            window_property_and_density,
        ),
        ("boundary-limit suite", boundary_limit_suite),
        ("unimodularity and cocycle", unimodularity_and_cocycle),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        match run() {
            Ok(detail) => println!("criterion {:>2} PASS  {name}: {detail}", i + 1),
            Err(detail) => {
                failed += 1;
                println!("criterion {:>2} FAIL  {name}: {detail}", i + 1);
            }
        }
    }
    println!(
        "acceptance: {} passed, {failed} failed",
        criteria.len() - failed
    );
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
