//! `preint-qmc`: Asian option price, cdf and pdf by lattice rules with
//! preintegration.
//!
//! Exit status is 0 on success, 2 on usage errors and 1 when a numerical
//! step fails.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use preint_qmc::estimate::{
    self, convergence_study, full_ladder, pdf_curve, write_csv, write_json, Rules, StudyConfig,
    StudyRow,
};
use preint_qmc::lattice::{cache_file_name, is_prime, load_or_construct, write_cache};
use preint_qmc::weights::{
    full_product_weights, pod_weights, product_weights, TheoryConstants, DEFAULT_C2, DEFAULT_DELTA,
    DEFAULT_MAX_ORDER,
};
use preint_qmc::{
    pca_factor, BrownianFactor, MarketParams, Method, Target, TargetKind, WeightSpec,
};

#[derive(Parser, Debug)]
#[command(
    name = "preint-qmc",
    version,
    about = "Asian option price, cdf and pdf by randomly shifted lattice rules with preintegration"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Estimate the discounted Asian put price.
    Price {
        #[command(flatten)]
        run: RunArgs,
        /// Estimator.
        #[arg(long, value_enum, default_value_t = MethodArg::QmcPreint)]
        method: MethodArg,
    },
    /// Estimate P[X ≤ x] for the discrete average X.
    Cdf {
        /// Threshold x (currency).
        #[arg(long, allow_negative_numbers = true)]
        x: f64,
        #[command(flatten)]
        run: RunArgs,
        /// Estimator.
        #[arg(long, value_enum, default_value_t = MethodArg::QmcPreint)]
        method: MethodArg,
    },
    /// Estimate the density of X at x.
    Pdf {
        /// Threshold x (currency).
        #[arg(long, allow_negative_numbers = true)]
        x: f64,
        #[command(flatten)]
        run: RunArgs,
        /// Estimator; only the preintegrated ones can estimate a density.
        #[arg(long, value_enum, default_value_t = MethodArg::QmcPreint)]
        method: MethodArg,
    },
    /// Density estimates at Chebyshev nodes on [x-lo, x-hi].
    Curve {
        /// Left end of the interval (currency).
        #[arg(long, allow_negative_numbers = true, default_value_t = 70.0)]
        x_lo: f64,
        /// Right end of the interval (currency).
        #[arg(long, allow_negative_numbers = true, default_value_t = 150.0)]
        x_hi: f64,
        /// Number of Chebyshev nodes (at least 2).
        #[arg(long, default_value_t = 30, value_parser = parse_nodes)]
        nodes: usize,
        #[command(flatten)]
        run: RunArgs,
    },
    /// Convergence study: every method at every ladder point.
    Study {
        /// Quantity to estimate.
        #[arg(long, value_enum, default_value_t = TargetArg::Price)]
        target: TargetArg,
        /// Threshold x for cdf and pdf (currency) [default: the strike].
        #[arg(long, allow_negative_numbers = true)]
        x: Option<f64>,
        /// Point counts: `paper` (101 … 128021), `desk` (101 … 8009) or a comma-separated list of primes.
        #[arg(long, default_value = "paper", value_parser = parse_ladder)]
        ladder: Ladder,
        /// Methods to run, comma-separated [default: all that support the target].
        #[arg(long, value_delimiter = ',', value_enum)]
        methods: Vec<MethodArg>,
        #[command(flatten)]
        run: RunArgs,
    },
    /// Build a generating vector by the component-by-component algorithm
    /// and write it in the cache format.
    Cbc {
        /// Quantity the POD weights are tailored to (ignored for product weights).
        #[arg(long, value_enum, default_value_t = TargetArg::Price)]
        target: TargetArg,
        /// Threshold x for POD weights of cdf and pdf (currency) [default: the strike].
        #[arg(long, allow_negative_numbers = true)]
        x: Option<f64>,
        /// Build the (m)-dimensional rule for the plain lattice method instead
        /// of the (m−1)-dimensional one used with preintegration.
        #[arg(long)]
        plain: bool,
        #[command(flatten)]
        run: RunArgs,
    },
}

#[derive(Args, Debug, Clone)]
struct MarketArgs {
    /// Initial asset price S0 (currency).
    #[arg(long, allow_negative_numbers = true, default_value_t = 100.0)]
    s0: f64,
    /// Risk-free rate R (per unit time).
    #[arg(long, allow_negative_numbers = true, default_value_t = 0.1)]
    r: f64,
    /// Volatility σ (per square-root unit time).
    #[arg(long, allow_negative_numbers = true, default_value_t = 0.2)]
    sigma: f64,
    /// Expiry T (time).
    #[arg(long, allow_negative_numbers = true, default_value_t = 1.0)]
    t: f64,
    /// Strike K (currency).
    #[arg(long, allow_negative_numbers = true, default_value_t = 100.0)]
    strike: f64,
    /// Number of time steps m = d+1.
    #[arg(long, default_value_t = 256)]
    m: usize,
}

#[derive(Args, Debug, Clone)]
struct RunArgs {
    #[command(flatten)]
    market: MarketArgs,
    /// Points per shift or group N (prime).
    #[arg(long, default_value_t = 16001, value_parser = parse_prime)]
    n: u64,
    /// Random shifts or groups L (at least 2).
    #[arg(long, default_value_t = 32, value_parser = parse_shifts)]
    l: usize,
    /// Seed for shifts and Monte Carlo samples.
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Weights for the lattice construction.
    #[arg(long, value_enum, default_value_t = WeightsArg::Product)]
    weights: WeightsArg,
    /// δ in (0, 1/2) for POD weights.
    #[arg(long, default_value_t = DEFAULT_DELTA)]
    delta: f64,
    /// Lattice error constant C₂ for POD weights (placeholder scale).
    #[arg(long, default_value_t = DEFAULT_C2)]
    c2: f64,
    /// Output file [default: standard output].
    #[arg(long)]
    out: Option<PathBuf>,
    /// Output format [default: json for price/cdf/pdf, csv otherwise].
    #[arg(long, value_enum)]
    format: Option<Format>,
    /// Worker threads [default: available parallelism].
    #[arg(long)]
    threads: Option<usize>,
    /// Directory of cached generating vectors (read and written).
    #[arg(long)]
    gv_cache: Option<PathBuf>,
    /// Report wall time in the `seconds` column instead of 0.
    #[arg(long)]
    timings: bool,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
enum MethodArg {
    Mc,
    Qmc,
    McPreint,
    QmcPreint,
}

impl From<MethodArg> for Method {
    fn from(m: MethodArg) -> Self {
        match m {
            MethodArg::Mc => Method::Mc,
            MethodArg::Qmc => Method::Qmc,
            MethodArg::McPreint => Method::McPreint,
            MethodArg::QmcPreint => Method::QmcPreint,
        }
    }
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
enum TargetArg {
    Price,
    Cdf,
    Pdf,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
enum WeightsArg {
    Product,
    Pod,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, PartialEq)]
struct Ladder(Vec<u64>);

fn parse_prime(s: &str) -> Result<u64, String> {
    let n: u64 = s
        .parse()
        .map_err(|_| format!("expected a prime integer, got {s:?}"))?;
    if is_prime(n) {
        Ok(n)
    } else {
        Err(format!("{n} is not prime"))
    }
}

fn parse_shifts(s: &str) -> Result<usize, String> {
    let l: usize = s
        .parse()
        .map_err(|_| format!("expected an integer, got {s:?}"))?;
    if l >= 2 {
        Ok(l)
    } else {
        Err(format!("need at least 2, got {l}"))
    }
}

fn parse_nodes(s: &str) -> Result<usize, String> {
    let n: usize = s
        .parse()
        .map_err(|_| format!("expected an integer, got {s:?}"))?;
    if n >= 2 {
        Ok(n)
    } else {
        Err(format!("need at least 2, got {n}"))
    }
}

fn parse_ladder(s: &str) -> Result<Ladder, String> {
    match s {
        "paper" => Ok(Ladder(full_ladder())),
        "desk" => Ok(Ladder(full_ladder()[..7].to_vec())),
        _ => s
            .split(',')
            .map(|t| parse_prime(t.trim()))
            .collect::<Result<Vec<_>, _>>()
            .map(Ladder),
    }
}

impl From<TargetArg> for TargetKind {
    fn from(t: TargetArg) -> Self {
        match t {
            TargetArg::Price => TargetKind::Price,
            TargetArg::Cdf => TargetKind::Cdf,
            TargetArg::Pdf => TargetKind::Pdf,
        }
    }
}

type AppResult<T> = Result<T, preint_qmc::Error>;

fn market(args: &MarketArgs) -> AppResult<BrownianFactor> {
    let params = MarketParams {
        s0: args.s0,
        r: args.r,
        sigma: args.sigma,
        t_expiry: args.t,
        strike: args.strike,
        m: args.m,
    };
    pca_factor(&params)
}

/// Weights for the d-dimensional rule used with preintegration.
fn preint_weights(
    run: &RunArgs,
    factor: &BrownianFactor,
    kind: TargetKind,
    x_range: (f64, f64),
) -> AppResult<WeightSpec> {
    match run.weights {
        WeightsArg::Product => Ok(product_weights(factor)),
        WeightsArg::Pod => {
            let c = TheoryConstants::new(factor, run.delta, run.c2, x_range)?;
            pod_weights(kind, &c, DEFAULT_MAX_ORDER)
        }
    }
}

fn target_for(kind: TargetKind, x: Option<f64>, factor: &BrownianFactor) -> Target {
    let strike = factor.params().strike;
    match kind {
        TargetKind::Price => Target::price(factor.params()),
        TargetKind::Cdf => Target::cdf(x.unwrap_or(strike)),
        TargetKind::Pdf => Target::pdf(x.unwrap_or(strike)),
    }
}

fn setup_threads(run: &RunArgs) {
    if let Some(t) = run.threads {
        // Fails only if a pool already exists, in which case it is kept.
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(t.max(1))
            .build_global();
    }
}

fn emit(run: &RunArgs, rows: &[StudyRow], default: Format, single: bool) -> AppResult<()> {
    let format = run.format.unwrap_or(default);
    let sink: Box<dyn Write> = match &run.out {
        Some(path) => Box::new(File::create(path).map_err(|e| io_failure(path, e))?),
        None => Box::new(io::stdout().lock()),
    };
    let mut out = BufWriter::new(sink);
    match format {
        Format::Csv => write_csv(&mut out, rows, run.timings)?,
        Format::Json if single && rows.len() == 1 => {
            serde_json::to_writer_pretty(&mut out, &rows[0].reported(run.timings))
                .map_err(|e| output_failure(e.to_string()))?;
            writeln!(out).map_err(|e| output_failure(e.to_string()))?;
        }
        Format::Json => write_json(&mut out, rows, run.timings)?,
    }
    out.flush().map_err(|e| output_failure(e.to_string()))
}

fn output_failure(reason: String) -> preint_qmc::Error {
    preint_qmc::Error::Domain {
        name: "output",
        reason,
    }
}

fn io_failure(path: &Path, e: io::Error) -> preint_qmc::Error {
    output_failure(format!("{}: {e}", path.display()))
}

fn progress(row: &StudyRow) {
    eprintln!(
        "{:>9} N={:<7} L={:<3} mean={:.10e} stderr={:.3e} ({:.2} s)",
        row.method, row.n, row.l, row.mean, row.stderr, row.seconds
    );
}

fn point_estimate(
    run: &RunArgs,
    kind: TargetKind,
    x: Option<f64>,
    method: MethodArg,
) -> AppResult<()> {
    setup_threads(run);
    let factor = market(&run.market)?;
    let target = target_for(kind, x, &factor);
    let method = Method::from(method);
    if !method.supports(kind) {
        return Err(preint_qmc::Error::UnsupportedTarget(kind.name()));
    }
    let cache = run.gv_cache.as_deref();
    let rules = match method {
        Method::QmcPreint => Rules {
            preint: Some(load_or_construct(
                cache,
                run.n,
                &preint_weights(run, &factor, kind, (target.x, target.x))?,
            )?),
            plain: None,
        },
        Method::Qmc => Rules {
            preint: None,
            plain: Some(load_or_construct(
                cache,
                run.n,
                &full_product_weights(&factor),
            )?),
        },
        _ => Rules::default(),
    };
    let e = estimate::estimate(
        method,
        target,
        &factor,
        &rules,
        run.n as usize,
        run.l,
        run.seed,
    )?;
    let row = StudyRow::from(&e);
    progress(&row);
    emit(run, &[row], Format::Json, true)
}

fn run(cli: Cli) -> AppResult<()> {
    match cli.command {
        Command::Price { run, method } => point_estimate(&run, TargetKind::Price, None, method),
        Command::Cdf { x, run, method } => point_estimate(&run, TargetKind::Cdf, Some(x), method),
        Command::Pdf { x, run, method } => point_estimate(&run, TargetKind::Pdf, Some(x), method),
        Command::Curve {
            x_lo,
            x_hi,
            nodes,
            run,
        } => {
            setup_threads(&run);
            let factor = market(&run.market)?;
            let weights = preint_weights(&run, &factor, TargetKind::Pdf, (x_lo, x_hi))?;
            let rule = load_or_construct(run.gv_cache.as_deref(), run.n, &weights)?;
            let curve = pdf_curve(&factor, x_lo, x_hi, nodes, &rule, run.l, run.seed)?;
            let rows: Vec<StudyRow> = curve.estimates.iter().map(StudyRow::from).collect();
            rows.iter().for_each(progress);
            eprintln!(
                "integral of the interpolant over [{x_lo}, {x_hi}]: {:.10e}",
                curve.interpolant.integral()
            );
            emit(&run, &rows, Format::Csv, false)
        }
        Command::Study {
            target,
            x,
            ladder,
            methods,
            run,
        } => {
            setup_threads(&run);
            let factor = market(&run.market)?;
            let target = target_for(target.into(), x, &factor);
            let methods: Vec<Method> = if methods.is_empty() {
                Method::ALL.to_vec()
            } else {
                methods.into_iter().map(Method::from).collect()
            };
            let config = StudyConfig {
                cache_dir: run.gv_cache.clone(),
                preint_weights: Some(preint_weights(
                    &run,
                    &factor,
                    target.kind,
                    (target.x, target.x),
                )?),
                plain_weights: None,
            };
            let rows = convergence_study(
                target, &factor, &ladder.0, run.l, run.seed, &methods, &config, progress,
            )?;
            emit(&run, &rows, Format::Csv, false)
        }
        Command::Cbc {
            target,
            x,
            plain,
            run,
        } => {
            setup_threads(&run);
            let factor = market(&run.market)?;
            let target = target_for(target.into(), x, &factor);
            let weights = if plain {
                full_product_weights(&factor)
            } else {
                preint_weights(&run, &factor, target.kind, (target.x, target.x))?
            };
            let path = match (&run.out, &run.gv_cache) {
                (Some(p), _) => p.clone(),
                (None, Some(dir)) => dir.join(cache_file_name(run.n, &weights)),
                (None, None) => PathBuf::from(cache_file_name(run.n, &weights)),
            };
            let rule = match &run.gv_cache {
                Some(dir) => load_or_construct(Some(dir), run.n, &weights)?,
                None => preint_qmc::lattice::cbc_construct(weights.dim(), run.n, &weights)?,
            };
            if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
                std::fs::create_dir_all(dir).map_err(|e| io_failure(dir, e))?;
            }
            write_cache(&path, &rule)?;
            eprintln!(
                "n={} d={} criterion={:.16e} -> {}",
                rule.n,
                rule.dim(),
                rule.criterion_value,
                path.display()
            );
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
