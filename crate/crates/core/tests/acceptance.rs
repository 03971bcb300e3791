//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on failure.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::process::ExitCode;
use std::time::{Duration, Instant};

use betafreq::dimension::{
    closed_form_m3, dim_via_pressure, f_a_eval, freq_dim, maximize_f, FreqQuery, DEFAULT_TOL,
};
use betafreq::expansion::{covering_count, expand_one, greedy_expand, is_legal_word, round_trip_residual};
use betafreq::language::{build_follower_graph, count_words, count_words_by_zeros, ln_biguint};
use betafreq::markov::{
    build_max_measure, markov_entropy, measure_of_word, validate_cylinder_measure, CylinderMeasure,
};
use betafreq::verify::random_sft_markov;
use betafreq::BetaSystem;
use num_bigint::BigUint;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn dim(sys: &BetaSystem, a: f64) -> Result<f64, String> {
    FreqQuery::new(sys.clone(), a)
        .and_then(|q| freq_dim(&q))
        .map(|r| r.dim)
        .map_err(|e| e.to_string())
}

fn pg(m: usize) -> BetaSystem {
    BetaSystem::pseudo_golden(m).expect("valid order")
}

fn closed_form_vs_optimizer() -> Outcome {
    let sys = pg(3);
    let mut worst = 0.0_f64;
    for i in 34..=99 {
        let a = f64::from(i) / 100.0;
        let closed = closed_form_m3(&sys, a).map_err(|e| e.to_string())?;
        let opt = maximize_f(3, a, DEFAULT_TOL).map_err(|e| e.to_string())?.dim;
        worst = worst.max((closed - opt).abs());
    }
    ensure(worst <= 1e-9, || format!("max |delta| = {worst:.3e}"))?;
    Ok(format!("66 values of a, max |delta| = {worst:.3e}"))
}

fn optimizer_vs_pressure() -> Outcome {
    let mut worst = 0.0_f64;
    for m in 3..=5 {
        let sys = pg(m);
        let graph = build_follower_graph(&sys).map_err(|e| e.to_string())?;
        let lo = 1.0 / m as f64;
        for i in 1..=20 {
            let a = lo + (1.0 - lo) * f64::from(i) / 21.0;
            let opt = maximize_f(m, a, DEFAULT_TOL).map_err(|e| e.to_string())?.dim;
            let p = dim_via_pressure(&graph, a, &sys).map_err(|e| e.to_string())?;
            ensure(!p.boundary, || format!("m={m} a={a}: pressure infimum on the boundary"))?;
            worst = worst.max((opt - p.dim).abs());
        }
    }
    ensure(worst <= 1e-7, || format!("max |delta| = {worst:.3e}"))?;
    Ok(format!("m = 3..5, 20 a each, max |delta| = {worst:.3e}"))
}

fn counting_convergence() -> Outcome {
    let sys = pg(3);
    let graph = build_follower_graph(&sys).map_err(|e| e.to_string())?;
    let table = count_words_by_zeros(&graph, 3000);
    let mut worst = 0.0_f64;
    for a in [0.4, 0.5, 0.6, 0.7] {
        let est = table.dim_estimate(a, sys.log_beta()).map_err(|e| e.to_string())?;
        let exact = closed_form_m3(&sys, a).map_err(|e| e.to_string())?;
        worst = worst.max((est.dim - exact).abs());
    }
    ensure(worst <= 0.01, || format!("max gap = {worst:.4e}"))?;
    Ok(format!("n = 3000, max gap = {worst:.4e}"))
}

fn endpoint_zeros() -> Outcome {
    for m in 3..=5 {
        let sys = pg(m);
        for a in [1.0 / m as f64, 1.0] {
            let d = dim(&sys, a)?;
            ensure(d.to_bits() == 0f64.to_bits(), || format!("m={m} a={a}: dim = {d:e}"))?;
        }
        for a in [0.0, 0.5 / m as f64, 1.0 / m as f64 - 1e-6] {
            let r = FreqQuery::new(sys.clone(), a)
                .and_then(|q| freq_dim(&q))
                .map_err(|e| e.to_string())?;
            ensure(r.empty_set && r.dim == 0.0, || format!("m={m} a={a}: not flagged empty"))?;
        }
    }
    Ok("exact zeros at 1/m and 1, empty below 1/m, m = 3..5".into())
}

/// Maximum over a step-1e-4 grid, then golden-section refinement around the
/// best grid point.
fn spectrum_peak(sys: &BetaSystem) -> Result<(f64, f64), String> {
    let mut best = (0.0, f64::NEG_INFINITY);
    for i in 0..=10_000 {
        let a = f64::from(i) * 1e-4;
        let d = dim(sys, a)?;
        if d > best.1 {
            best = (a, d);
        }
    }
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let (mut lo, mut hi) = ((best.0 - 1e-4).max(0.0), (best.0 + 1e-4).min(1.0));
    while hi - lo > 1e-12 {
        let (x1, x2) = (hi - inv_phi * (hi - lo), lo + inv_phi * (hi - lo));
        if dim(sys, x1)? < dim(sys, x2)? {
            lo = x1;
        } else {
            hi = x2;
        }
    }
    let a = 0.5 * (lo + hi);
    let d = dim(sys, a)?;
    Ok(if d > best.1 { (a, d) } else { best })
}

fn full_dimension_point() -> Outcome {
    let mut lines = Vec::new();
    let cases = [
        (BetaSystem::golden(), Some((5.0 + 5f64.sqrt()) / 10.0)),
        (BetaSystem::integer(2).map_err(|e| e.to_string())?, Some(0.5)),
        (pg(3), None),
    ];
    for (sys, peak) in cases {
        let (a, d) = spectrum_peak(&sys)?;
        ensure((d - 1.0).abs() <= 1e-6, || format!("{sys}: peak {d} at a={a}"))?;
        if let Some(p) = peak {
            ensure((a - p).abs() <= 1e-4, || format!("{sys}: peak at {a}, expected {p}"))?;
        }
        lines.push(format!("{sys}: 1 - {:.1e} at a={a:.6}", 1.0 - d));
    }
    Ok(lines.join("; "))
}

fn entropy_realization() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let (mut ent, mut stat, mut add) = (0.0_f64, 0.0_f64, 0.0_f64);
    for m in 3..=5 {
        let sys = pg(m);
        for _ in 0..10 {
            let a = rng.gen_range(1.0 / m as f64 + 0.005..0.995);
            let opt = maximize_f(m, a, DEFAULT_TOL).map_err(|e| e.to_string())?;
            let mu = build_max_measure(m, a, &opt.argmax).map_err(|e| e.to_string())?;
            let f = f_a_eval(m, a, &opt.argmax).map_err(|e| e.to_string())?;
            ent = ent.max((markov_entropy(&mu) - f).abs());
            stat = stat.max(mu.stationarity_residual());
            let diag = validate_cylinder_measure(&CylinderMeasure::from_markov(&mu, m + 2), &sys);
            add = add.max(diag.max_residual());
        }
    }
    ensure(ent <= 1e-10 && stat <= 1e-12 && add <= 1e-14, || {
        format!("entropy {ent:.2e}, stationarity {stat:.2e}, additivity {add:.2e}")
    })?;
    Ok(format!("entropy {ent:.2e}, stationarity {stat:.2e}, additivity {add:.2e}"))
}

fn upper_bound() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut slack = f64::INFINITY;
    for i in 0..100 {
        let m = 3 + i % 3;
        let sys = pg(m);
        let mu = random_sft_markov(m, &mut rng).map_err(|e| e.to_string())?;
        let a = measure_of_word(&mu, &[0]).map_err(|e| e.to_string())?;
        let bound = sys.log_beta() * dim(&sys, a)?;
        let h = markov_entropy(&mu);
        ensure(h <= bound + 1e-10, || format!("m={m} a={a}: entropy {h} > bound {bound}"))?;
        slack = slack.min(bound - h);
    }
    Ok(format!("100 measures, min slack = {slack:.3e}"))
}

fn covering() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let systems = [BetaSystem::golden(), pg(3), pg(4)];
    let mut worst = 0.0_f64;
    for i in 0..1000 {
        let sys = &systems[i % 3];
        let x: f64 = rng.gen();
        let n = rng.gen_range(1..=14);
        let count = covering_count(x, n, sys).map_err(|e| e.to_string())?;
        let bound = 4 * (n + 1);
        ensure(count <= bound, || format!("{sys} x={x} n={n}: {count} > {bound}"))?;
        worst = worst.max(count as f64 / bound as f64);
    }
    Ok(format!("1000 samples, zero violations, worst count/bound = {worst:.3}"))
}

fn recurrence_and_growth() -> Outcome {
    let mut lines = Vec::new();
    for m in [3, 4] {
        let sys = pg(m);
        let graph = build_follower_graph(&sys).map_err(|e| e.to_string())?;
        let counts: Vec<BigUint> = (0..=400).map(|n| count_words(&graph, n)).collect();
        for n in m..=400 {
            let sum: BigUint = counts[n - m..n].iter().sum();
            ensure(counts[n] == sum, || format!("m={m}: recurrence fails at n={n}"))?;
        }
        let rate = ln_biguint(&count_words(&graph, 1000)) / 1000.0;
        let gap = (rate - sys.log_beta()).abs();
        ensure(gap <= 0.005, || format!("m={m}: growth gap {gap:.4e}"))?;
        lines.push(format!("m={m} gap {gap:.2e}"));
    }
    Ok(format!("recurrence exact for n <= 400; {}", lines.join(", ")))
}

fn expansion_correctness() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let mut worst = 0.0_f64;
    for m in 2..=8 {
        let sys = pg(m);
        let (eps, finite) = expand_one(&sys, m + 10);
        let want: Vec<u8> = (0..m + 10).map(|i| u8::from(i < m)).collect();
        ensure(finite && eps.digits() == want, || format!("m={m}: eps(1) = {eps}"))?;
        let bound = sys.beta().powi(-60);
        for _ in 0..1000 {
            let x: f64 = rng.gen();
            let w = greedy_expand(x, &sys, 60).map_err(|e| e.to_string())?;
            ensure(is_legal_word(&w, &sys), || format!("m={m} x={x}: illegal {w}"))?;
            let r = round_trip_residual(x, &w, &sys);
            ensure(r <= bound, || format!("m={m} x={x}: residual {r:e} > {bound:e}"))?;
            worst = worst.max(r / bound);
        }
    }
    Ok(format!("m = 2..8, 1000 x each, worst residual/bound = {worst:.3}"))
}

struct Criterion {
    name: &'static str,
    limit: Option<Duration>,
    run: fn() -> Outcome,
}

fn main() -> ExitCode {
    let secs = |s| Some(Duration::from_secs(s));
    let criteria = [
        Criterion { name: "closed form vs optimizer (m=3)", limit: secs(5), run: closed_form_vs_optimizer },
        Criterion { name: "optimizer vs pressure oracle", limit: secs(30), run: optimizer_vs_pressure },
        Criterion { name: "counting convergence (n=3000)", limit: secs(60), run: counting_convergence },
        Criterion { name: "endpoint zeros and empty sets", limit: None, run: endpoint_zeros },
        Criterion { name: "full-dimension point", limit: None, run: full_dimension_point },
        Criterion { name: "entropy realization", limit: None, run: entropy_realization },
        Criterion { name: "Markov upper bound", limit: None, run: upper_bound },
        Criterion { name: "covering property", limit: None, run: covering },
        Criterion { name: "recurrence and growth", limit: None, run: recurrence_and_growth },
        Criterion { name: "expansion correctness", limit: None, run: expansion_correctness },
    ];
    let mut failures = 0;
    for (i, c) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(c.run))
            .unwrap_or_else(|_| Err("panicked".into()));
        let elapsed = start.elapsed();
        let outcome = match (outcome, c.limit) {
            (Ok(_), Some(limit)) if elapsed > limit => {
                Err(format!("took {:.2} s, limit {} s", elapsed.as_secs_f64(), limit.as_secs()))
            }
            (o, _) => o,
        };
        let (tag, detail) = match outcome {
            Ok(d) => ("PASS", d),
            Err(d) => {
                failures += 1;
                ("FAIL", d)
            }
        };
        println!(
            "{tag} [{:>2}] {} ({:.2} s): {detail}",
            i + 1,
            c.name,
            elapsed.as_secs_f64()
        );
    }
    println!("{} of {} criteria passed", criteria.len() - failures, criteria.len());
    if failures == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
