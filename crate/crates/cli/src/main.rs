use std::fs;
use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context};
use betafreq::dimension::{dim_via_pressure, spectrum, DimResult, Method, Spectrum, SpectrumRow};
use betafreq::expansion::{expand_one, greedy_expand, round_trip_residual};
use betafreq::language::{build_follower_graph, count_words, count_words_by_zeros};
use betafreq::markov::{markov_entropy, measure_of_word, MarkovMeasure};
use betafreq::report::{fmt_real, write_spectrum_csv};
use betafreq::verify::{run_suite, Suite};
use betafreq::{BetaKind, BetaSystem};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

/// Digit frequencies in β-expansions: expansions, word counts, entropies and
/// Hausdorff dimensions of frequency sets.
#[derive(Parser, Debug)]
#[command(name = "betafreq", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    format: Format,

    /// Optimizer tolerance for `dim`.
    #[arg(long, global = true, default_value_t = 1e-12)]
    tol: f64,

    /// Seed for the randomized `verify` suites.
    #[arg(long, global = true, default_value_t = 1)]
    seed: u64,

    /// Largest word length accepted by `count`.
    #[arg(long, global = true, default_value_t = betafreq::language::DEFAULT_N_MAX)]
    n_max: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Csv,
    Json,
}

#[derive(Args, Debug)]
#[group(required = true, multiple = false)]
struct BetaSpec {
    /// Pseudo-golden ratio of order M.
    #[arg(long, value_name = "M")]
    pseudo_golden: Option<usize>,

    /// The golden ratio.
    #[arg(long)]
    golden: bool,

    /// Any β > 1; values near a pseudo-golden root select it.
    #[arg(long, value_name = "VALUE", allow_negative_numbers = true)]
    beta: Option<f64>,

    /// Integer base K.
    #[arg(long, value_name = "K")]
    integer: Option<u32>,
}

impl BetaSpec {
    fn system(&self) -> betafreq::Result<BetaSystem> {
        match (self.pseudo_golden, self.golden, self.beta, self.integer) {
            (Some(m), ..) => BetaSystem::pseudo_golden(m),
            (_, true, ..) => Ok(BetaSystem::golden()),
            (_, _, Some(v), _) => BetaSystem::from_value(v),
            (.., Some(k)) => BetaSystem::integer(k),
            _ => unreachable!("clap requires one beta flag"),
        }
    }
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Greedy β-expansion of x.
    Expand {
        #[command(flatten)]
        spec: BetaSpec,
        #[arg(long, allow_negative_numbers = true)]
        x: f64,
        #[arg(long, default_value_t = 20)]
        digits: usize,
    },
    /// The base β and its expansion of 1.
    Beta {
        #[command(flatten)]
        spec: BetaSpec,
    },
    /// Hausdorff dimension of the set of points with digit-0 frequency a.
    Dim {
        #[command(flatten)]
        spec: BetaSpec,
        #[arg(
            long,
            conflicts_with = "a_grid",
            required_unless_present = "a_grid",
            allow_negative_numbers = true
        )]
        a: Option<f64>,
        /// `start:stop:step` (inclusive) or a comma-separated list.
        #[arg(long, value_name = "GRID")]
        a_grid: Option<String>,
    },
    /// Exact number of legal words of length n, optionally with k zeros.
    Count {
        #[command(flatten)]
        spec: BetaSpec,
        #[arg(long)]
        n: usize,
        #[arg(long, value_name = "K")]
        zeros: Option<usize>,
    },
    /// Entropy of a Markov measure read from JSON.
    Entropy {
        #[arg(long, value_name = "FILE")]
        measure: PathBuf,
    },
    /// Run the built-in invariant checks.
    Verify {
        #[arg(long, default_value = "all", value_parser = parse_suite)]
        suite: Suite,
    },
}

fn parse_suite(s: &str) -> Result<Suite, String> {
    s.parse().map_err(|e: betafreq::Error| e.to_string())
}

/// Exit codes: 2 for unusable arguments, 3 for library domain errors.
enum Failure {
    Usage(anyhow::Error),
    Domain(anyhow::Error),
}

impl From<betafreq::Error> for Failure {
    fn from(e: betafreq::Error) -> Self {
        Failure::Domain(e.into())
    }
}

impl From<anyhow::Error> for Failure {
    fn from(e: anyhow::Error) -> Self {
        Failure::Usage(e)
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Usage(e.into())
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let stdout = io::stdout();
    let mut out = stdout.lock();
    let result = run(&cli, &mut out).and_then(|code| {
        out.flush()?;
        Ok(code)
    });
    match result {
        Ok(code) => code,
        Err(Failure::Usage(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
        Err(Failure::Domain(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(3)
        }
    }
}

fn run(cli: &Cli, out: &mut impl Write) -> Result<ExitCode, Failure> {
    if !(cli.tol > 0.0 && cli.tol.is_finite()) {
        return Err(anyhow::anyhow!("--tol must be positive, got {}", cli.tol).into());
    }
    if cli.n_max < 10 {
        return Err(anyhow::anyhow!("--n-max must be at least 10, got {}", cli.n_max).into());
    }
    match &cli.command {
        Command::Expand { spec, x, digits } => expand(cli.format, &spec.system()?, *x, *digits, out),
        Command::Beta { spec } => beta(cli.format, &spec.system()?, out),
        Command::Dim { spec, a, a_grid } => {
            let grid = match (a, a_grid) {
                (Some(a), _) => vec![*a],
                (None, Some(g)) => parse_grid(g)?,
                (None, None) => unreachable!("clap requires --a or --a-grid"),
            };
            dim(cli.format, &spec.system()?, &grid, a.is_some(), cli.tol, out)
        }
        Command::Count { spec, n, zeros } => {
            if *n > cli.n_max {
                return Err(betafreq::Error::Domain {
                    what: "n",
                    value: *n as f64,
                    domain: "n <= --n-max",
                }
                .into());
            }
            count(cli.format, &spec.system()?, *n, *zeros, out)
        }
        Command::Entropy { measure } => entropy(cli.format, measure, out),
        Command::Verify { suite } => verify(cli.format, *suite, cli.seed, out),
    }
}

fn expand(
    format: Format,
    sys: &BetaSystem,
    x: f64,
    digits: usize,
    out: &mut impl Write,
) -> Result<ExitCode, Failure> {
    let w = greedy_expand(x, sys, digits)?;
    let residual = round_trip_residual(x, &w, sys);
    match format {
        Format::Text => writeln!(out, "{w}\nresidual {}", fmt_real(residual))?,
        Format::Csv => writeln!(out, "digits,residual\n{w},{}", fmt_real(residual))?,
        Format::Json => {
            let v = json!({
                "beta": sys.beta(),
                "x": x,
                "digits": w.to_string(),
                "residual": residual,
            });
            writeln!(out, "{v}")?;
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn beta(format: Format, sys: &BetaSystem, out: &mut impl Write) -> Result<ExitCode, Failure> {
    let (eps, finite) = expand_one(sys, 40);
    let eps_text = match sys.finite_length() {
        Some(m) if finite => eps.digits()[..m].iter().map(|d| d.to_string()).collect::<String>(),
        _ => format!("{eps}..."),
    };
    let root = format!("{:.15}", sys.beta());
    match format {
        Format::Text => writeln!(out, "{root}")?,
        Format::Csv => writeln!(out, "beta,log_beta,expansion_of_one\n{root},{},{eps_text}", fmt_real(sys.log_beta()))?,
        Format::Json => {
            let v = json!({
                "beta": sys.beta(),
                "log_beta": sys.log_beta(),
                "kind": sys.kind(),
                "expansion_of_one": eps_text,
                "finite": finite,
            });
            writeln!(out, "{v}")?;
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn parse_grid(s: &str) -> anyhow::Result<Vec<f64>> {
    let number = |t: &str| {
        t.trim()
            .parse::<f64>()
            .with_context(|| format!("bad number {t:?} in --a-grid"))
    };
    if let Some((start, rest)) = s.split_once(':') {
        let Some((stop, step)) = rest.split_once(':') else {
            bail!("--a-grid range must be start:stop:step");
        };
        let (start, stop, step) = (number(start)?, number(stop)?, number(step)?);
        let ordered = step > 0.0 && stop >= start;
        if !ordered {
            bail!("--a-grid needs step > 0 and stop >= start");
        }
        let count = ((stop - start) / step + 1e-9).floor() as usize + 1;
        if count > 1_000_000 {
            bail!("--a-grid has {count} points (limit 1000000)");
        }
        return Ok((0..count).map(|i| start + i as f64 * step).collect());
    }
    s.split(',').map(number).collect()
}

/// Rows for a β without a certified formula, from the pressure oracle.
fn pressure_spectrum(sys: &BetaSystem, grid: &[f64]) -> Result<Spectrum, Failure> {
    let graph = build_follower_graph(sys)?;
    eprintln!("warning: no certified dimension formula for {sys}; using the pressure oracle");
    let rows = grid
        .iter()
        .map(|&a| match dim_via_pressure(&graph, a, sys) {
            Ok(p) => SpectrumRow {
                a,
                result: Some(DimResult {
                    dim: p.dim,
                    argmax: Vec::new(),
                    method: Method::Pressure,
                    kkt_residual: 0.0,
                    empty_set: false,
                    cross_check_delta: None,
                }),
                error: None,
            },
            Err(e) => SpectrumRow {
                a,
                result: None,
                error: Some(e.to_string()),
            },
        })
        .collect();
    Ok(Spectrum {
        rows,
        lipschitz_estimate: f64::NAN,
    })
}

fn dim(
    format: Format,
    sys: &BetaSystem,
    grid: &[f64],
    single: bool,
    tol: f64,
    out: &mut impl Write,
) -> Result<ExitCode, Failure> {
    let certified = matches!(sys.kind(), BetaKind::PseudoGolden(_) | BetaKind::Integer(2));
    let table = if certified {
        spectrum(sys, grid, tol)
    } else {
        pressure_spectrum(sys, grid)?
    };
    if single {
        if let Some(err) = &table.rows[0].error {
            return Err(Failure::Domain(anyhow::anyhow!("{err}")));
        }
    }
    match format {
        Format::Text => {
            for row in &table.rows {
                match (&row.result, &row.error) {
                    (Some(d), _) => {
                        write!(
                            out,
                            "a={} dim={} method={}",
                            fmt_real(row.a),
                            fmt_real(d.dim),
                            d.method
                        )?;
                        if d.empty_set {
                            write!(out, " empty_set")?;
                        }
                        if !d.argmax.is_empty() {
                            let xs: Vec<String> = d.argmax.iter().map(|&v| fmt_real(v)).collect();
                            write!(out, " argmax=({})", xs.join(", "))?;
                        }
                        writeln!(out)?;
                    }
                    (None, err) => writeln!(
                        out,
                        "a={} error: {}",
                        fmt_real(row.a),
                        err.as_deref().unwrap_or("unknown error")
                    )?,
                }
            }
        }
        Format::Csv => write_spectrum_csv(&table, &mut *out)?,
        Format::Json => {
            let lipschitz = table.lipschitz_estimate;
            let v = json!({
                "beta": sys.beta(),
                "rows": table.rows,
                "lipschitz_estimate": if lipschitz.is_finite() { Some(lipschitz) } else { None },
            });
            writeln!(out, "{v}")?;
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn count(
    format: Format,
    sys: &BetaSystem,
    n: usize,
    zeros: Option<usize>,
    out: &mut impl Write,
) -> Result<ExitCode, Failure> {
    let graph = build_follower_graph(sys)?;
    match zeros {
        Some(k) => {
            if k > n {
                return Err(betafreq::Error::Domain {
                    what: "zeros",
                    value: k as f64,
                    domain: "0..=n",
                }
                .into());
            }
            let table = count_words_by_zeros(&graph, n);
            let c = table.get(k);
            match format {
                Format::Text => writeln!(out, "{c}")?,
                Format::Csv => writeln!(out, "n,k,count\n{n},{k},{c}")?,
                Format::Json => {
                    writeln!(out, "{}", json!({"n": n, "zeros": k, "count": c.to_string()}))?
                }
            }
        }
        None => match format {
            Format::Text => writeln!(out, "{}", count_words(&graph, n))?,
            Format::Csv => count_words_by_zeros(&graph, n).write_csv(&mut *out)?,
            Format::Json => {
                let table = count_words_by_zeros(&graph, n);
                let by_zeros: Vec<String> = table.counts().iter().map(|c| c.to_string()).collect();
                let v = json!({"n": n, "count": table.total().to_string(), "by_zeros": by_zeros});
                writeln!(out, "{v}")?;
            }
        },
    }
    Ok(ExitCode::SUCCESS)
}

fn entropy(format: Format, path: &PathBuf, out: &mut impl Write) -> Result<ExitCode, Failure> {
    let text = fs::read_to_string(path)
        .with_context(|| format!("cannot read {}", path.display()))?;
    let mu: MarkovMeasure = serde_json::from_str(&text)
        .with_context(|| format!("{} is not a valid Markov measure", path.display()))?;
    let h = markov_entropy(&mu);
    let residual = mu.stationarity_residual();
    let mass0 = measure_of_word(&mu, &[0])?;
    match format {
        Format::Text => writeln!(
            out,
            "entropy {}\nstationarity_residual {}\nmass_of_0 {}",
            fmt_real(h),
            fmt_real(residual),
            fmt_real(mass0)
        )?,
        Format::Csv => writeln!(
            out,
            "entropy,stationarity_residual,mass_of_0\n{},{},{}",
            fmt_real(h),
            fmt_real(residual),
            fmt_real(mass0)
        )?,
        Format::Json => {
            let v = json!({
                "order": mu.order(),
                "entropy": h,
                "stationarity_residual": residual,
                "mass_of_0": mass0,
            });
            writeln!(out, "{v}")?;
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn verify(format: Format, suite: Suite, seed: u64, out: &mut impl Write) -> Result<ExitCode, Failure> {
    let report = run_suite(suite, seed);
    match format {
        Format::Text => {
            for c in &report.checks {
                writeln!(
                    out,
                    "{} {}: residual {} (tolerance {}); {}",
                    if c.passed { "PASS" } else { "FAIL" },
                    c.name,
                    fmt_real(c.residual),
                    fmt_real(c.tolerance),
                    c.detail
                )?;
            }
            let passed = report.checks.iter().filter(|c| c.passed).count();
            writeln!(out, "{passed}/{} checks passed (suite {suite}, seed {seed})", report.checks.len())?;
        }
        Format::Csv => {
            writeln!(out, "name,passed,residual,tolerance")?;
            for c in &report.checks {
                writeln!(
                    out,
                    "\"{}\",{},{},{}",
                    c.name.replace('"', "\"\""),
                    c.passed,
                    fmt_real(c.residual),
                    fmt_real(c.tolerance)
                )?;
            }
        }
        Format::Json => writeln!(out, "{}", serde_json::to_string(&report).map_err(anyhow::Error::from)?)?,
    }
    Ok(if report.passed() {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    })
}
