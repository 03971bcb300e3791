//! Self-checks of the library's invariants on seeded random samples.

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::dimension::{
    closed_form_m3, dim_via_pressure, freq_dim, golden_dim, maximize_f, FreqQuery, DEFAULT_TOL,
};
use crate::error::{Error, Result};
use crate::expansion::{
    covering_count, greedy_expand, is_legal_word, round_trip_residual, BetaSystem,
};
use crate::language::build_follower_graph;
use crate::markov::{
    build_max_measure, markov_entropy, measure_of_word, validate_cylinder_measure,
    CylinderMeasure, MarkovMeasure,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Suite {
    All,
    Expansion,
    Covering,
    Markov,
    Dimension,
}

impl Suite {
    pub const ALL: [Suite; 5] = [
        Suite::All,
        Suite::Expansion,
        Suite::Covering,
        Suite::Markov,
        Suite::Dimension,
    ];

    fn name(self) -> &'static str {
        match self {
            Suite::All => "all",
            Suite::Expansion => "expansion",
            Suite::Covering => "covering",
            Suite::Markov => "markov",
            Suite::Dimension => "dimension",
        }
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Suite {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Suite::ALL
            .into_iter()
            .find(|suite| suite.name() == s)
            .ok_or_else(|| Error::Parse(format!("unknown suite {s:?}")))
    }
}

/// Outcome of one invariant: the worst residual seen against its tolerance.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub residual: f64,
    pub tolerance: f64,
    pub detail: String,
}

impl Check {
    fn new(name: &str, residual: f64, tolerance: f64, detail: String) -> Self {
        Check {
            name: name.into(),
            passed: residual <= tolerance,
            residual,
            tolerance,
            detail,
        }
    }

    fn failed(name: &str, err: Error) -> Self {
        Check {
            name: name.into(),
            passed: false,
            residual: f64::INFINITY,
            tolerance: 0.0,
            detail: err.to_string(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct VerifyReport {
    pub suite: Suite,
    pub seed: u64,
    pub checks: Vec<Check>,
}

impl VerifyReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }
}

pub fn run_suite(suite: Suite, seed: u64) -> VerifyReport {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut checks = Vec::new();
    let run = |s: Suite| suite == Suite::All || suite == s;
    if run(Suite::Expansion) {
        checks.extend(expansion_checks(&mut rng));
    }
    if run(Suite::Covering) {
        checks.push(collect("covering bound 4(n+1)", covering_check(&mut rng)));
    }
    if run(Suite::Markov) {
        checks.extend(markov_checks(&mut rng));
    }
    if run(Suite::Dimension) {
        checks.extend(dimension_checks(&mut rng));
    }
    VerifyReport { suite, seed, checks }
}

fn collect(name: &str, res: Result<Check>) -> Check {
    res.unwrap_or_else(|e| Check::failed(name, e))
}

fn expansion_checks(rng: &mut ChaCha8Rng) -> Vec<Check> {
    let mut round_trip = || -> Result<Check> {
        let n = 60;
        let mut worst: f64 = 0.0;
        let mut illegal = 0;
        for sys in [
            BetaSystem::golden(),
            BetaSystem::pseudo_golden(3)?,
            BetaSystem::pseudo_golden(4)?,
            BetaSystem::integer(2)?,
        ] {
            let bound = sys.beta().powi(-(n as i32));
            for _ in 0..250 {
                let x: f64 = rng.gen();
                let w = greedy_expand(x, &sys, n)?;
                worst = worst.max(round_trip_residual(x, &w, &sys) / bound);
                if !is_legal_word(&w, &sys) {
                    illegal += 1;
                }
            }
        }
        // residual in units of β^{-60}; illegal words push it past the bound
        let residual = if illegal > 0 { f64::INFINITY } else { worst };
        Ok(Check::new(
            "round trip within β^-60, greedy words legal",
            residual,
            1.0,
            format!("1000 samples, {illegal} illegal"),
        ))
    };
    let eps_one = || -> Result<Check> {
        let mut wrong = Vec::new();
        for m in 2..=8 {
            let sys = BetaSystem::pseudo_golden(m)?;
            let e = sys.eps_one();
            if sys.finite_length() != Some(m) || e[..m].iter().any(|&d| d != 1) {
                wrong.push(m);
            }
        }
        Ok(Check::new(
            "ε(1,β) = 1^m 0^∞ for m = 2..8",
            wrong.len() as f64,
            0.0,
            format!("mismatched orders: {wrong:?}"),
        ))
    };
    vec![
        collect("round trip within β^-60, greedy words legal", round_trip()),
        collect("ε(1,β) = 1^m 0^∞ for m = 2..8", eps_one()),
    ]
}

fn covering_check(rng: &mut ChaCha8Rng) -> Result<Check> {
    let systems = [
        BetaSystem::golden(),
        BetaSystem::pseudo_golden(3)?,
        BetaSystem::pseudo_golden(4)?,
    ];
    let mut violations = 0;
    let mut worst_ratio: f64 = 0.0;
    for i in 0..300 {
        let sys = &systems[i % 3];
        let n = rng.gen_range(1..=12);
        let x: f64 = rng.gen();
        let c = covering_count(x, n, sys)?;
        let bound = 4 * (n + 1);
        worst_ratio = worst_ratio.max(c as f64 / bound as f64);
        if c > bound {
            violations += 1;
        }
    }
    Ok(Check::new(
        "covering bound 4(n+1)",
        violations as f64,
        0.0,
        format!("300 samples, worst count/bound = {worst_ratio:.3}"),
    ))
}

/// A random stationary (m−1)-step Markov measure on the pseudo-golden shift of
/// order m: random transitions, except that `1^{m−1}` must be followed by 0.
pub fn random_sft_markov<R: Rng>(m: usize, rng: &mut R) -> Result<MarkovMeasure> {
    let k = m - 1;
    let all_ones = (1usize << k) - 1;
    let trans = (0..1usize << k)
        .map(|s| {
            if s == all_ones {
                [1.0, 0.0]
            } else {
                let q: f64 = rng.gen_range(0.02..0.98);
                [q, 1.0 - q]
            }
        })
        .collect();
    MarkovMeasure::from_transitions(k, trans)
}

const REALIZATION: &str = "entropy of max measure equals f_a(argmax)";

fn markov_checks(rng: &mut ChaCha8Rng) -> Vec<Check> {
    let realization = |rng: &mut ChaCha8Rng| -> Result<[Check; 3]> {
        let (mut entropy, mut stationarity, mut cylinders) = (0.0_f64, 0.0_f64, 0.0_f64);
        for m in 3..=5 {
            let sys = BetaSystem::pseudo_golden(m)?;
            for _ in 0..5 {
                let a = rng.gen_range(1.0 / m as f64 + 0.01..0.99);
                let opt = maximize_f(m, a, DEFAULT_TOL)?;
                let mu = build_max_measure(m, a, &opt.argmax)?;
                let f = crate::dimension::f_a_eval(m, a, &opt.argmax)?;
                entropy = entropy.max((markov_entropy(&mu) - f).abs());
                stationarity = stationarity.max(mu.stationarity_residual());
                let cm = CylinderMeasure::from_markov(&mu, m + 2);
                cylinders = cylinders.max(validate_cylinder_measure(&cm, &sys).max_residual());
            }
        }
        let detail = "m = 3..5, 5 random a each".to_string();
        Ok([
            Check::new(REALIZATION, entropy, 1e-10, detail.clone()),
            Check::new("max measure is stationary", stationarity, 1e-12, detail.clone()),
            Check::new("max measure cylinders consistent on the shift", cylinders, 1e-14, detail),
        ])
    };
    let upper_bound = |rng: &mut ChaCha8Rng| -> Result<Check> {
        let mut worst = f64::NEG_INFINITY;
        for i in 0..60 {
            let m = 3 + i % 3;
            let sys = BetaSystem::pseudo_golden(m)?;
            let mu = random_sft_markov(m, rng)?;
            let a = measure_of_word(&mu, &[0])?;
            let bound = sys.log_beta() * freq_dim(&FreqQuery::new(sys, a)?)?.dim;
            worst = worst.max(markov_entropy(&mu) - bound);
        }
        Ok(Check::new(
            "random Markov entropy ≤ log β · dim",
            worst.max(0.0),
            1e-10,
            format!("60 samples, max excess {worst:.3e}"),
        ))
    };
    let mut checks = match realization(rng) {
        Ok(c) => c.to_vec(),
        Err(e) => vec![Check::failed(REALIZATION, e)],
    };
    checks.push(collect("random Markov entropy ≤ log β · dim", upper_bound(rng)));
    checks
}

fn dimension_checks(rng: &mut ChaCha8Rng) -> Vec<Check> {
    let closed_vs_opt = || -> Result<Check> {
        let sys = BetaSystem::pseudo_golden(3)?;
        let mut worst: f64 = 0.0;
        for i in 34..=99 {
            let a = i as f64 / 100.0;
            let closed = closed_form_m3(&sys, a)?;
            worst = worst.max((closed - maximize_f(3, a, DEFAULT_TOL)?.dim).abs());
        }
        Ok(Check::new(
            "closed form vs optimizer (m = 3)",
            worst,
            1e-9,
            "a = 0.34..0.99".into(),
        ))
    };
    let opt_vs_pressure = |rng: &mut ChaCha8Rng| -> Result<Check> {
        let mut worst: f64 = 0.0;
        for m in 3..=5 {
            let sys = BetaSystem::pseudo_golden(m)?;
            let graph = build_follower_graph(&sys)?;
            for _ in 0..4 {
                let a = rng.gen_range(1.0 / m as f64 + 0.02..0.98);
                let p = dim_via_pressure(&graph, a, &sys)?;
                worst = worst.max((p.dim - maximize_f(m, a, DEFAULT_TOL)?.dim).abs());
            }
        }
        Ok(Check::new(
            "optimizer vs pressure oracle",
            worst,
            1e-7,
            "m = 3..5, 4 random a each".into(),
        ))
    };
    let endpoints = || -> Result<Check> {
        let mut worst: f64 = 0.0;
        for m in 3..=5 {
            let sys = BetaSystem::pseudo_golden(m)?;
            for a in [1.0 / m as f64, 1.0, 0.5 / m as f64] {
                worst = worst.max(freq_dim(&FreqQuery::new(sys.clone(), a)?)?.dim);
            }
        }
        Ok(Check::new(
            "dim = 0 at a = 1/m, a = 1 and below 1/m",
            worst,
            0.0,
            "m = 3..5".into(),
        ))
    };
    let golden_peak = || -> Result<Check> {
        let d = golden_dim((5.0 + 5f64.sqrt()) / 10.0)?.dim;
        Ok(Check::new(
            "golden ratio reaches dim 1",
            (d - 1.0).abs(),
            1e-10,
            "a = (5+√5)/10".into(),
        ))
    };
    vec![
        collect("closed form vs optimizer (m = 3)", closed_vs_opt()),
        collect("optimizer vs pressure oracle", opt_vs_pressure(rng)),
        collect("dim = 0 at a = 1/m, a = 1 and below 1/m", endpoints()),
        collect("golden ratio reaches dim 1", golden_peak()),
    ]
}
