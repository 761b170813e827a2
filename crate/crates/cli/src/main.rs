//! Command-line front end: every pipeline as a subcommand with
//! machine-readable output and reproducible configuration.
//!
//! Exit codes: 0 success, 1 check failure, 2 usage error. Randomized
//! subcommands require an explicit `--seed` unless `--entropy` opts into a
//! random one; either way the resolved seed is echoed so any run can be
//! replayed. The `STRAHLER_MODE` environment variable (`exact` or `float`)
//! sets the default arithmetic backend; `--mode` flags beat it.

use clap::{Parser, Subcommand, ValueEnum};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::fmt::Display;
use std::io::Read;
use std::path::PathBuf;
use std::process::ExitCode;
use strahler::exact::{dist_ratio, Dist, DistCache};
use strahler::hypergeom::pgf_s2;
use strahler::moments::MomentTable;
use strahler::montecarlo::{ratio_exceedance, run_experiment, CltExperiment, McRun, StatKind};
use strahler::trees::{enumerate_trees_capped, sample_uniform, strahler as order_profile, Tree};
use strahler::verify::{verify_all, VerifyConfig};
use strahler::{Rational, Scalar};

// ── Argument grammar ───────────────────────────────────────────────────

#[derive(Parser)]
#[command(name = "strahler", version, about = "Branch statistics of uniform random binary trees")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// List every tree shape of a magnitude, or just count them.
    Enumerate {
        /// Leaf count.
        #[arg(long)]
        n: usize,
        /// Print only the number of shapes.
        #[arg(long)]
        count_only: bool,
        /// Enumeration cap (guards memory).
        #[arg(long, default_value_t = 12)]
        cap: usize,
    },
    /// Draw uniform random trees, one parenthesis string per line.
    Sample {
        /// Leaf count.
        #[arg(long)]
        n: usize,
        /// RNG seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Allow a random seed (echoed for replay).
        #[arg(long)]
        entropy: bool,
        /// Trees to draw.
        #[arg(long, default_value_t = 1)]
        count: u64,
    },
    /// Order profile of one tree, given in parenthesis form (or on stdin).
    Strahler {
        /// Balanced-parentheses tree; read from stdin when omitted.
        tree: Option<String>,
    },
    /// Law of a branch count, as JSON.
    Dist {
        /// Branch order.
        #[arg(long)]
        r: u32,
        /// Leaf count.
        #[arg(long)]
        n: usize,
        /// Arithmetic backend.
        #[arg(long, value_enum)]
        mode: Option<Mode>,
    },
    /// Law of a branch-count ratio, as JSON.
    RatioDist {
        /// Denominator order.
        #[arg(long)]
        q: u32,
        /// Order gap.
        #[arg(long)]
        r: u32,
        /// Leaf count.
        #[arg(long)]
        n: usize,
        /// Arithmetic backend.
        #[arg(long, value_enum)]
        mode: Option<Mode>,
    },
    /// Second-order moment tables over a magnitude range, as CSV.
    Moments {
        /// Moment family.
        #[arg(long, value_enum)]
        kind: MomentKind,
        /// Moment order.
        #[arg(long)]
        k: u32,
        /// Leaf-power weight (mixed kind only).
        #[arg(long, default_value_t = 0)]
        l: u32,
        /// Smallest magnitude (inclusive).
        #[arg(long, default_value_t = 2)]
        n_min: usize,
        /// Largest magnitude (inclusive).
        #[arg(long)]
        n_max: usize,
        /// Arithmetic backend.
        #[arg(long, value_enum)]
        mode: Option<Mode>,
    },
    /// Probability generating function of the second-order count by both
    /// routes, with their difference.
    Mgf {
        /// Leaf count.
        #[arg(long)]
        n: usize,
        /// Evaluation point numerator.
        #[arg(long)]
        x_num: i64,
        /// Evaluation point denominator.
        #[arg(long)]
        x_den: i64,
        /// Arithmetic backend.
        #[arg(long, value_enum)]
        mode: Option<Mode>,
    },
    /// Fluctuation experiment: sample a normalized count or ratio
    /// statistic and summarize it against its predicted limit.
    Clt {
        /// Statistic family.
        #[arg(long, value_enum)]
        kind: CltKind,
        /// Denominator order (ratio kind only).
        #[arg(long)]
        q: Option<u32>,
        /// Branch order (count) or order gap (ratio).
        #[arg(long)]
        r: u32,
        /// Leaf count.
        #[arg(long)]
        n: usize,
        /// Sample count.
        #[arg(long)]
        samples: u64,
        /// RNG seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Allow a random seed (echoed for replay).
        #[arg(long)]
        entropy: bool,
        /// Worker threads (part of the determinism key).
        #[arg(long, default_value_t = 2)]
        workers: usize,
        /// Output format.
        #[arg(long, value_enum, default_value_t = OutFormat::Csv)]
        out: OutFormat,
        /// Also emit a histogram with this many bins.
        #[arg(long)]
        hist_bins: Option<usize>,
        /// Write to this file instead of stdout.
        #[arg(long)]
        out_file: Option<PathBuf>,
    },
    /// Concentration of a consecutive-order ratio near 1/4.
    Horton {
        /// Denominator order.
        #[arg(long)]
        r: u32,
        /// Leaf count.
        #[arg(long)]
        n: usize,
        /// Sample count.
        #[arg(long)]
        samples: u64,
        /// RNG seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Allow a random seed (echoed for replay).
        #[arg(long)]
        entropy: bool,
        /// Deviation threshold.
        #[arg(long, default_value_t = 0.05)]
        threshold: f64,
        /// Worker threads.
        #[arg(long, default_value_t = 2)]
        workers: usize,
    },
    /// Run the full acceptance suite and print one line per criterion.
    VerifyAll {
        /// Run only the exact criteria.
        #[arg(long)]
        skip_mc: bool,
        /// Worker threads for the sampling criteria.
        #[arg(long, default_value_t = 2)]
        workers: usize,
    },
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Mode {
    Exact,
    Float,
}

impl Mode {
    fn name(self) -> &'static str {
        match self {
            Mode::Exact => "exact",
            Mode::Float => "float",
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum MomentKind {
    Raw,
    Central,
    Negative,
    Mixed,
}

impl MomentKind {
    fn name(self) -> &'static str {
        match self {
            MomentKind::Raw => "raw",
            MomentKind::Central => "central",
            MomentKind::Negative => "negative",
            MomentKind::Mixed => "mixed",
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum CltKind {
    Count,
    Ratio,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum OutFormat {
    Csv,
    Json,
}

// ── Error-to-exit-code plumbing ────────────────────────────────────────

enum CliError {
    /// Invalid invocation or parameter values: exit 2.
    Usage(String),
    /// A run-time or verification failure: exit 1.
    Failure(String),
}

type CliResult = Result<ExitCode, CliError>;

fn usage<E: Display>(e: E) -> CliError {
    CliError::Usage(e.to_string())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(code) => code,
        Err(CliError::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(CliError::Failure(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
    }
}

fn run(command: Command) -> CliResult {
    match command {
        Command::Enumerate { n, count_only, cap } => cmd_enumerate(n, count_only, cap),
        Command::Sample { n, seed, entropy, count } => cmd_sample(n, seed, entropy, count),
        Command::Strahler { tree } => cmd_strahler(tree),
        Command::Dist { r, n, mode } => cmd_dist(r, n, resolve_mode(mode)?),
        Command::RatioDist { q, r, n, mode } => cmd_ratio_dist(q, r, n, resolve_mode(mode)?),
        Command::Moments { kind, k, l, n_min, n_max, mode } => {
            cmd_moments(kind, k, l, n_min, n_max, resolve_mode(mode)?)
        }
        Command::Mgf { n, x_num, x_den, mode } => cmd_mgf(n, x_num, x_den, resolve_mode(mode)?),
        Command::Clt { kind, q, r, n, samples, seed, entropy, workers, out, hist_bins, out_file } => {
            cmd_clt(kind, q, r, n, samples, resolve_seed(seed, entropy)?, workers, out, hist_bins, out_file)
        }
        Command::Horton { r, n, samples, seed, entropy, threshold, workers } => {
            cmd_horton(r, n, samples, resolve_seed(seed, entropy)?, threshold, workers)
        }
        Command::VerifyAll { skip_mc, workers } => cmd_verify_all(skip_mc, workers),
    }
}

/// Flag beats the `STRAHLER_MODE` environment variable; default is exact.
fn resolve_mode(flag: Option<Mode>) -> Result<Mode, CliError> {
    if let Some(mode) = flag {
        return Ok(mode);
    }
    match std::env::var("STRAHLER_MODE") {
        Ok(value) => match value.as_str() {
            "exact" => Ok(Mode::Exact),
            "float" => Ok(Mode::Float),
            other => Err(CliError::Usage(format!(
                "STRAHLER_MODE must be `exact` or `float`, got `{other}`"
            ))),
        },
        Err(_) => Ok(Mode::Exact),
    }
}

/// Reproducibility by default: no implicit random seeds.
fn resolve_seed(seed: Option<u64>, entropy: bool) -> Result<u64, CliError> {
    match seed {
        Some(s) => Ok(s),
        None if entropy => Ok(rand::random()),
        None => Err(CliError::Usage(
            "randomized subcommands need --seed <u64>, or --entropy to draw one".into(),
        )),
    }
}

// ── Config echo ────────────────────────────────────────────────────────

/// Resolved run configuration, rendered as a `# key=value` comment line
/// for line and CSV outputs or as a JSON object for JSON outputs.
struct ConfigEcho {
    pairs: Vec<(String, String, bool)>,
}

impl ConfigEcho {
    fn new(subcommand: &str) -> Self {
        let mut echo = ConfigEcho { pairs: Vec::new() };
        echo.push_str("subcommand", subcommand);
        echo
    }

    /// Bare token (number or bool).
    fn push(&mut self, key: &str, value: impl Display) -> &mut Self {
        self.pairs.push((key.into(), value.to_string(), false));
        self
    }

    /// String value (quoted in JSON).
    fn push_str(&mut self, key: &str, value: &str) -> &mut Self {
        self.pairs.push((key.into(), value.into(), true));
        self
    }

    fn comment(&self) -> String {
        let body: Vec<String> =
            self.pairs.iter().map(|(k, v, _)| format!("{k}={v}")).collect();
        format!("# config: {}", body.join(" "))
    }

    fn json(&self) -> String {
        let body: Vec<String> = self
            .pairs
            .iter()
            .map(|(k, v, quoted)| {
                if *quoted {
                    format!("\"{k}\":\"{v}\"")
                } else {
                    format!("\"{k}\":{v}")
                }
            })
            .collect();
        format!("{{{}}}", body.join(","))
    }
}

fn rational_json(r: &Rational) -> String {
    format!("{{\"num\":{},\"den\":{}}}", r.numer(), r.denom())
}

// ── Subcommands ────────────────────────────────────────────────────────

fn cmd_enumerate(n: usize, count_only: bool, cap: usize) -> CliResult {
    let trees = enumerate_trees_capped(n, cap).map_err(usage)?;
    let mut echo = ConfigEcho::new("enumerate");
    echo.push("n", n).push("count-only", count_only).push("cap", cap);
    eprintln!("{}", echo.comment());
    if count_only {
        println!("{}", trees.len());
    } else {
        for tree in &trees {
            println!("{}", tree.to_parens());
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn cmd_sample(n: usize, seed: Option<u64>, entropy: bool, count: u64) -> CliResult {
    if n == 0 {
        return Err(CliError::Usage("--n must be at least 1".into()));
    }
    let seed = resolve_seed(seed, entropy)?;
    let mut echo = ConfigEcho::new("sample");
    echo.push("n", n).push("seed", seed).push("count", count);
    eprintln!("{}", echo.comment());
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..count {
        println!("{}", sample_uniform(n, &mut rng).to_parens());
    }
    Ok(ExitCode::SUCCESS)
}

fn cmd_strahler(tree: Option<String>) -> CliResult {
    let text = match tree {
        Some(t) => t,
        None => {
            let mut buf = String::new();
            std::io::stdin().read_to_string(&mut buf).map_err(usage)?;
            buf
        }
    };
    let tree = Tree::from_parens(text.trim()).map_err(usage)?;
    let profile = order_profile(&tree);
    let counts: Vec<String> = profile.counts().iter().map(u64::to_string).collect();
    let mut echo = ConfigEcho::new("strahler");
    println!(
        "{{\"config\":{},\"magnitude\":{},\"strahler_number\":{},\"counts\":[{}]}}",
        echo.push("n", profile.magnitude()).json(),
        profile.magnitude(),
        profile.strahler_number(),
        counts.join(",")
    );
    Ok(ExitCode::SUCCESS)
}

fn cmd_dist(r: u32, n: usize, mode: Mode) -> CliResult {
    let mut echo = ConfigEcho::new("dist");
    echo.push("r", r).push("n", n).push_str("mode", mode.name());
    let law = match mode {
        Mode::Exact => DistCache::<Rational>::new().dist_s(r, n).map_err(usage)?.to_json(),
        Mode::Float => DistCache::<f64>::new().dist_s(r, n).map_err(usage)?.to_json(),
    };
    println!("{}", with_config(&echo, &law));
    Ok(ExitCode::SUCCESS)
}

fn cmd_ratio_dist(q: u32, r: u32, n: usize, mode: Mode) -> CliResult {
    let mut echo = ConfigEcho::new("ratio-dist");
    echo.push("q", q).push("r", r).push("n", n).push_str("mode", mode.name());
    let mut cache = DistCache::<Rational>::new();
    let law = dist_ratio(&mut cache, q, r, n).map_err(usage)?;
    let body = match mode {
        Mode::Exact => law.to_json(),
        Mode::Float => {
            let atoms = law
                .atoms()
                .iter()
                .map(|(value, p)| (Scalar::to_f64(value), Scalar::to_f64(p)));
            Dist::from_atoms(atoms).to_json()
        }
    };
    println!("{}", with_config(&echo, &body));
    Ok(ExitCode::SUCCESS)
}

/// Splices a `"config"` entry into the front of a serialized JSON object.
fn with_config(echo: &ConfigEcho, body: &str) -> String {
    debug_assert!(body.starts_with('{'));
    format!("{{\"config\":{},{}", echo.json(), &body[1..])
}

fn cmd_moments(
    kind: MomentKind,
    k: u32,
    l: u32,
    n_min: usize,
    n_max: usize,
    mode: Mode,
) -> CliResult {
    if n_min > n_max {
        return Err(CliError::Usage(format!("--n-min {n_min} exceeds --n-max {n_max}")));
    }
    if l != 0 && !matches!(kind, MomentKind::Mixed) {
        return Err(CliError::Usage("--l only applies to --kind mixed".into()));
    }
    let mut echo = ConfigEcho::new("moments");
    echo.push_str("kind", kind.name())
        .push("k", k)
        .push("l", l)
        .push("n-min", n_min)
        .push("n-max", n_max)
        .push_str("mode", mode.name());
    let mut out = String::new();
    out.push_str(&echo.comment());
    out.push('\n');
    out.push_str(match mode {
        Mode::Exact => "kind,k,l,n,numerator,denominator\n",
        Mode::Float => "kind,k,l,n,value\n",
    });
    let mut table = MomentTable::new();
    for n in n_min..=n_max {
        let value = match kind {
            MomentKind::Raw => table.raw(k, n),
            MomentKind::Central => table.central(k, n),
            MomentKind::Negative => table.negative(k, n).map_err(usage)?,
            MomentKind::Mixed => table.mixed(l, k, n).map_err(usage)?,
        };
        match mode {
            Mode::Exact => out.push_str(&format!(
                "{},{k},{l},{n},{},{}\n",
                kind.name(),
                value.numer(),
                value.denom()
            )),
            Mode::Float => {
                out.push_str(&format!("{},{k},{l},{n},{}\n", kind.name(), Scalar::to_f64(&value)))
            }
        }
    }
    print!("{out}");
    Ok(ExitCode::SUCCESS)
}

fn cmd_mgf(n: usize, x_num: i64, x_den: i64, mode: Mode) -> CliResult {
    if x_den == 0 {
        return Err(CliError::Usage("--x-den must be nonzero".into()));
    }
    let x = Rational::ratio(x_num, x_den);
    let mut echo = ConfigEcho::new("mgf");
    echo.push("n", n)
        .push("x-num", x_num)
        .push("x-den", x_den)
        .push_str("mode", mode.name());
    let body = match mode {
        Mode::Exact => {
            let eval = pgf_s2::<Rational>(n, &x).map_err(usage)?;
            format!(
                "\"x\":{},\"hypergeometric\":{},\"direct\":{},\"residual\":{}",
                rational_json(&x),
                rational_json(&eval.hypergeometric),
                rational_json(&eval.direct),
                rational_json(&eval.residual())
            )
        }
        Mode::Float => {
            let eval = pgf_s2::<f64>(n, &Scalar::to_f64(&x)).map_err(usage)?;
            format!(
                "\"x\":{},\"hypergeometric\":{},\"direct\":{},\"residual\":{}",
                Scalar::to_f64(&x),
                eval.hypergeometric,
                eval.direct,
                eval.residual()
            )
        }
    };
    println!("{{\"config\":{},{}}}", echo.json(), body);
    Ok(ExitCode::SUCCESS)
}

#[allow(clippy::too_many_arguments)]
fn cmd_clt(
    kind: CltKind,
    q: Option<u32>,
    r: u32,
    n: usize,
    samples: u64,
    seed: u64,
    workers: usize,
    out: OutFormat,
    hist_bins: Option<usize>,
    out_file: Option<PathBuf>,
) -> CliResult {
    let stat = match kind {
        CltKind::Count => {
            if q.is_some() {
                return Err(CliError::Usage("--q only applies to --kind ratio".into()));
            }
            StatKind::Count { r }
        }
        CltKind::Ratio => {
            let q = q.ok_or_else(|| CliError::Usage("--kind ratio needs --q".into()))?;
            StatKind::Ratio { q, r }
        }
    };
    if let Some(bins) = hist_bins {
        if bins == 0 {
            return Err(CliError::Usage("--hist-bins must be at least 1".into()));
        }
    }
    let exp = CltExperiment { kind: stat, magnitude: n, samples, seed, workers };
    let run = run_experiment(&exp).map_err(usage)?;
    let (kind_name, q_col) = match stat {
        StatKind::Count { .. } => ("count", 0),
        StatKind::Ratio { q, .. } => ("ratio", q),
    };
    let mut echo = ConfigEcho::new("clt");
    echo.push_str("kind", kind_name)
        .push("q", q_col)
        .push("r", r)
        .push("n", n)
        .push("samples", samples)
        .push("seed", seed)
        .push("workers", workers)
        .push_str("out", match out {
            OutFormat::Csv => "csv",
            OutFormat::Json => "json",
        });
    let rendered = match out {
        OutFormat::Csv => clt_csv(&echo, kind_name, q_col, r, &run, hist_bins),
        OutFormat::Json => clt_json(&echo, &run, hist_bins),
    };
    match out_file {
        Some(path) => std::fs::write(&path, rendered)
            .map_err(|e| CliError::Failure(format!("writing {}: {e}", path.display())))?,
        None => print!("{rendered}"),
    }
    Ok(ExitCode::SUCCESS)
}

fn clt_csv(
    echo: &ConfigEcho,
    kind: &str,
    q: u32,
    r: u32,
    run: &McRun,
    hist_bins: Option<usize>,
) -> String {
    let s = &run.summary;
    let mut out = String::new();
    out.push_str(&echo.comment());
    out.push('\n');
    out.push_str("kind,q,r,n,samples,mean,variance,predicted_variance,m3,m4,ks,zero_freq\n");
    out.push_str(&format!(
        "{kind},{q},{r},{},{},{},{},{},{},{},{},{}\n",
        run.experiment.magnitude,
        s.count,
        s.mean,
        s.variance,
        run.predicted_variance,
        s.m3,
        s.m4,
        s.ks,
        s.zero_ratio_frequency
    ));
    if let Some(bins) = hist_bins {
        let (edges, counts) = histogram(&run.samples, bins);
        out.push_str("# histogram\nbin_lo,bin_hi,count\n");
        for (i, &count) in counts.iter().enumerate() {
            out.push_str(&format!("{},{},{count}\n", edges[i], edges[i + 1]));
        }
    }
    out
}

fn clt_json(echo: &ConfigEcho, run: &McRun, hist_bins: Option<usize>) -> String {
    let s = &run.summary;
    let mut out = format!(
        "{{\"config\":{},\"predicted_variance\":{},\"summary\":{{\"count\":{},\"mean\":{},\"variance\":{},\"m3\":{},\"m4\":{},\"ks\":{},\"zero_freq\":{}}}",
        echo.json(),
        run.predicted_variance,
        s.count,
        s.mean,
        s.variance,
        s.m3,
        s.m4,
        s.ks,
        s.zero_ratio_frequency
    );
    if let Some(bins) = hist_bins {
        let (edges, counts) = histogram(&run.samples, bins);
        let edges: Vec<String> = edges.iter().map(f64::to_string).collect();
        let counts: Vec<String> = counts.iter().map(u64::to_string).collect();
        out.push_str(&format!(
            ",\"histogram\":{{\"edges\":[{}],\"counts\":[{}]}}",
            edges.join(","),
            counts.join(",")
        ));
    }
    out.push_str("}\n");
    out
}

/// Equal-width bins spanning the sample range.
fn histogram(samples: &[f64], bins: usize) -> (Vec<f64>, Vec<u64>) {
    let lo = samples.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = samples.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let span = if hi > lo { hi - lo } else { 1.0 };
    let edges: Vec<f64> =
        (0..=bins).map(|i| lo + span * i as f64 / bins as f64).collect();
    let mut counts = vec![0u64; bins];
    for &x in samples {
        let i = (((x - lo) / span * bins as f64) as usize).min(bins - 1);
        counts[i] += 1;
    }
    (edges, counts)
}

fn cmd_horton(r: u32, n: usize, samples: u64, seed: u64, threshold: f64, workers: usize) -> CliResult {
    if threshold.is_nan() || threshold <= 0.0 {
        return Err(CliError::Usage("--threshold must be positive".into()));
    }
    let check = ratio_exceedance(r, n, samples, seed, workers, threshold).map_err(usage)?;
    let mut echo = ConfigEcho::new("horton");
    echo.push("r", r)
        .push("n", n)
        .push("samples", samples)
        .push("seed", seed)
        .push("threshold", threshold)
        .push("workers", workers);
    println!(
        "{{\"config\":{},\"exceed_frequency\":{},\"zero_frequency\":{}}}",
        echo.json(),
        check.exceed_frequency,
        check.zero_frequency
    );
    Ok(ExitCode::SUCCESS)
}

fn cmd_verify_all(skip_mc: bool, workers: usize) -> CliResult {
    if workers == 0 {
        return Err(CliError::Usage("--workers must be at least 1".into()));
    }
    let mut echo = ConfigEcho::new("verify-all");
    echo.push("skip-mc", skip_mc).push("workers", workers);
    println!("{}", echo.comment());
    let reports = verify_all(&VerifyConfig { skip_mc, workers });
    let mut all_passed = true;
    for report in &reports {
        println!("{}", report.render());
        all_passed &= report.passed;
    }
    if all_passed {
        Ok(ExitCode::SUCCESS)
    } else {
        Ok(ExitCode::from(1))
    }
}
