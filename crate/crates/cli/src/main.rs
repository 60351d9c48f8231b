//! Command-line driver: one subcommand per library operation plus the batch
//! verifier. Exit codes: 0 success, 1 computational error, 2 usage error.

use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use log::info;
use num_traits::{Signed, ToPrimitive};

use quadrep::eisenstein::{parse_rational, split_range};
use quadrep::enumeration::{count_representations_with_budget, DEFAULT_NODE_BUDGET};
use quadrep::forms::successive_minima_with_budget;
use quadrep::harness::{
    checks::acceptance_family, form_to_json, generate_family, rational_string, read_form, table_csv, table_json,
    verify_all, write_table, CheckKind, OutputFormat, RunConfig, Table, DEFAULT_CUTOFF, DEFAULT_EPS, DEFAULT_SEED,
};
use quadrep::local_densities::DensityContext;
use quadrep::ortho::ortho_lattice;
use quadrep::sphere::{cap_stats, pair_count_via_ortho, pair_table};
use quadrep::{Error, QuadraticForm};

const THREADS_ENV: &str = "QUADREP_THREADS";

#[derive(Parser)]
#[command(name = "quadrep", version, about = "Representation numbers, local densities and sphere statistics")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Worker threads (falls back to QUADREP_THREADS, then all cores).
    #[arg(long)]
    threads: Option<usize>,
    /// Node budget for each lattice enumeration.
    #[arg(long, default_value_t = DEFAULT_NODE_BUDGET)]
    budget: u64,
    /// Write tables into this directory instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, default_value = "csv")]
    format: OutputFormat,
}

#[derive(Args)]
struct FormArg {
    /// JSON file holding the Gram matrix.
    #[arg(long)]
    form: PathBuf,
}

#[derive(Subcommand)]
enum Command {
    /// Check a form file and print its invariants.
    Validate {
        #[command(flatten)]
        form: FormArg,
        #[command(flatten)]
        common: Common,
    },
    /// r(Q, n).
    Count {
        #[command(flatten)]
        form: FormArg,
        #[arg(long)]
        n: u64,
        #[command(flatten)]
        common: Common,
    },
    /// Successive minima with witness vectors.
    Minima {
        #[command(flatten)]
        form: FormArg,
        #[command(flatten)]
        common: Common,
    },
    /// σ_p at the primes dividing 2nD, with σ_∞ and the tail factor.
    Density {
        #[command(flatten)]
        form: FormArg,
        #[arg(long)]
        n: u64,
        #[arg(long, default_value_t = DEFAULT_CUTOFF)]
        cutoff: u64,
        #[command(flatten)]
        common: Common,
    },
    /// Enclosure of the singular series main term ρ(n, Q).
    Rho {
        #[command(flatten)]
        form: FormArg,
        #[arg(long)]
        n: u64,
        #[arg(long, default_value_t = DEFAULT_CUTOFF)]
        cutoff: u64,
        #[command(flatten)]
        common: Common,
    },
    /// r = ρ + τ for every n up to --n.
    Split {
        #[command(flatten)]
        form: FormArg,
        #[arg(long)]
        n: u64,
        #[arg(long, default_value_t = DEFAULT_CUTOFF)]
        cutoff: u64,
        #[command(flatten)]
        common: Common,
    },
    /// Pair table t ↦ A_d(n, t); with --t, a single entry via the orthogonal lattice.
    Pairs {
        #[arg(long)]
        d: usize,
        #[arg(long)]
        n: u64,
        #[arg(long, allow_hyphen_values = true)]
        t: Option<i64>,
        #[command(flatten)]
        common: Common,
    },
    /// Cap counts μ(x; n, Y) over E_d(n).
    Caps {
        #[arg(long)]
        d: usize,
        #[arg(long)]
        n: u64,
        /// Y² as an integer, decimal or a/b.
        #[arg(long = "Y2")]
        y2: String,
        /// Threshold for ℙ[μ > threshold]; defaults to ln n.
        #[arg(long)]
        threshold: Option<f64>,
        #[command(flatten)]
        common: Common,
    },
    /// Orthogonal lattice ℤ^d ∩ v^⊥.
    Ortho {
        /// Comma-separated integer vector v.
        #[arg(long, allow_hyphen_values = true, value_delimiter = ',', required = true)]
        v: Vec<i64>,
        #[command(flatten)]
        common: Common,
    },
    /// Run every acceptance check and write the reports.
    VerifyAll {
        #[arg(long, default_value = DEFAULT_EPS, allow_hyphen_values = true)]
        eps: String,
        #[arg(long, default_value_t = DEFAULT_CUTOFF)]
        cutoff: u64,
        #[arg(long, default_value_t = DEFAULT_SEED)]
        seed: u64,
        /// Use the small grid.
        #[arg(long)]
        reduced: bool,
        #[command(flatten)]
        common: Common,
    },
    /// Print the seeded test family.
    GenerateFamily {
        #[arg(long, default_value_t = DEFAULT_SEED)]
        seed: u64,
        #[arg(long, default_value_t = 20)]
        count: usize,
        #[arg(long, default_value_t = 4)]
        k_min: usize,
        #[arg(long, default_value_t = 6)]
        k_max: usize,
        #[arg(long, default_value_t = 5)]
        height: i64,
        #[command(flatten)]
        common: Common,
    },
}

impl Command {
    fn common(&self) -> &Common {
        match self {
            Command::Validate { common, .. }
            | Command::Count { common, .. }
            | Command::Minima { common, .. }
            | Command::Density { common, .. }
            | Command::Rho { common, .. }
            | Command::Split { common, .. }
            | Command::Pairs { common, .. }
            | Command::Caps { common, .. }
            | Command::Ortho { common, .. }
            | Command::VerifyAll { common, .. }
            | Command::GenerateFamily { common, .. } => common,
        }
    }
}

enum Failure {
    Usage(String),
    Compute(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::InvalidArgument(msg) => Failure::Usage(msg),
            e => Failure::Compute(e),
        }
    }
}

type Outcome = std::result::Result<ExitCode, Failure>;

fn usage(msg: impl Into<String>) -> Failure {
    Failure::Usage(msg.into())
}

fn thread_count(flag: Option<usize>) -> std::result::Result<Option<usize>, Failure> {
    let threads = match flag {
        Some(t) => Some(t),
        None => match std::env::var(THREADS_ENV) {
            Ok(s) => Some(s.trim().parse().map_err(|_| usage(format!("{THREADS_ENV}={s:?} is not a thread count")))?),
            Err(_) => None,
        },
    };
    if threads == Some(0) {
        return Err(usage("--threads must be positive"));
    }
    Ok(threads)
}

fn load(form: &FormArg) -> std::result::Result<QuadraticForm, Failure> {
    if !form.form.exists() {
        return Err(usage(format!("--form {}: no such file", form.form.display())));
    }
    read_form(&form.form).map_err(|e| match e {
        Error::Io(_) => Failure::Compute(e),
        e => usage(format!("--form {}: {e}", form.form.display())),
    })
}

fn require_positive(flag: &str, value: u64) -> std::result::Result<(), Failure> {
    if value == 0 {
        return Err(usage(format!("{flag} must be positive")));
    }
    Ok(())
}

/// Writes tables to the output directory, or to stdout. On stdout several
/// CSV tables are separated by a blank line and JSON output is one object
/// keyed by table name.
fn emit(common: &Common, tables: &[Table]) -> std::result::Result<(), Failure> {
    if let Some(dir) = &common.out {
        fs::create_dir_all(dir).map_err(Error::from)?;
        for t in tables {
            write_table(dir, t, common.format)?;
        }
        return Ok(());
    }
    match common.format {
        OutputFormat::Csv => {
            let parts: Vec<String> = tables.iter().map(table_csv).collect::<quadrep::Result<_>>()?;
            print!("{}", parts.join("\n"));
        }
        OutputFormat::Json => {
            let mut object = serde_json::Map::new();
            for t in tables {
                let rows: serde_json::Value = serde_json::from_str(&table_json(t)).expect("valid json");
                object.insert(t.name.clone(), rows);
            }
            println!("{}", serde_json::to_string_pretty(&object).expect("serializable"));
        }
    }
    Ok(())
}

fn row<const N: usize>(cells: [String; N]) -> Vec<String> {
    cells.into()
}

fn joined(v: &[i64]) -> String {
    v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(" ")
}

fn run(command: Command) -> Outcome {
    let common = command.common();
    require_positive("--budget", common.budget)?;
    match &command {
        Command::Validate { form, .. } => {
            let f = load(form)?;
            let mut t = Table::new("validate", &["property", "value"]);
            t.push(row(["k".into(), f.dim().to_string()]));
            t.push(row(["D".into(), f.discriminant().to_string()]));
            t.push(row(["N".into(), f.level().to_string()]));
            t.push(row(["primitive".into(), f.is_primitive().to_string()]));
            emit(common, &[t])?;
        }
        Command::Count { form, n, .. } => {
            let f = load(form)?;
            let r = count_representations_with_budget(&f, *n, common.budget)?;
            let mut t = Table::new("count", &["n", "r"]);
            t.push(row([n.to_string(), r.to_string()]));
            emit(common, &[t])?;
        }
        Command::Minima { form, .. } => {
            let f = load(form)?;
            let profile = successive_minima_with_budget(&f, common.budget)?;
            let mut t = Table::new("minima", &["i", "minimum", "witness"]);
            for (i, (m, w)) in profile.minima.iter().zip(&profile.witnesses).enumerate() {
                t.push(row([(i + 1).to_string(), m.to_string(), joined(w)]));
            }
            emit(common, &[t])?;
        }
        Command::Density { form, n, cutoff, .. } => {
            require_positive("--n", *n)?;
            let f = load(form)?;
            let profile = DensityContext::new(&f).rho(*n, *cutoff)?;
            let mut t = Table::new("density", &["factor", "method", "value", "lo", "hi"]);
            for (p, method) in &profile.methods {
                let s = &profile.finite_densities[p];
                let approx = s.to_f64().unwrap_or(f64::NAN);
                t.push(row([
                    format!("sigma_{p}"),
                    format!("{method:?}"),
                    rational_string(s),
                    format!("{approx:.12e}"),
                    format!("{approx:.12e}"),
                ]));
            }
            for (name, i) in [("sigma_infinity", &profile.sigma_infinity), ("tail", &profile.tail)] {
                t.push(row([
                    name.into(),
                    "enclosure".into(),
                    String::new(),
                    format!("{:.12e}", i.lo_f64()),
                    format!("{:.12e}", i.hi_f64()),
                ]));
            }
            emit(common, &[t])?;
        }
        Command::Rho { form, n, cutoff, .. } => {
            require_positive("--n", *n)?;
            let f = load(form)?;
            let profile = DensityContext::new(&f).rho(*n, *cutoff)?;
            let mut t = Table::new("rho", &["n", "cutoff", "rho_lo", "rho_hi"]);
            t.push(row([
                n.to_string(),
                cutoff.to_string(),
                format!("{:.12e}", profile.rho.lo_f64()),
                format!("{:.12e}", profile.rho.hi_f64()),
            ]));
            emit(common, &[t])?;
        }
        Command::Split { form, n, cutoff, .. } => {
            require_positive("--n", *n)?;
            let f = load(form)?;
            let mut t = Table::new("split", &["n", "r", "rho_lo", "rho_hi", "tau_lo", "tau_hi"]);
            for s in split_range(&DensityContext::new(&f), *n, *cutoff)? {
                t.push(row([
                    s.n.to_string(),
                    s.r.to_string(),
                    format!("{:.12e}", s.rho.lo_f64()),
                    format!("{:.12e}", s.rho.hi_f64()),
                    format!("{:.12e}", s.tau.lo_f64()),
                    format!("{:.12e}", s.tau.hi_f64()),
                ]));
            }
            emit(common, &[t])?;
        }
        Command::Pairs { d, n, t: target, .. } => {
            if *d < 2 {
                return Err(usage("--d must be at least 2"));
            }
            require_positive("--n", *n)?;
            let mut t = Table::new("pairs", &["t", "A"]);
            match target {
                Some(target) => {
                    if target.unsigned_abs() > *n {
                        return Err(usage(format!("--t {target} is outside [-n, n]")));
                    }
                    t.push(row([target.to_string(), pair_count_via_ortho(*d, *n, *target)?.to_string()]));
                }
                None => {
                    for (k, a) in &pair_table(*d, *n)?.table {
                        t.push(row([k.to_string(), a.to_string()]));
                    }
                }
            }
            emit(common, &[t])?;
        }
        Command::Caps { d, n, y2, threshold, .. } => {
            if *d < 2 {
                return Err(usage("--d must be at least 2"));
            }
            require_positive("--n", *n)?;
            let ysq = parse_rational(y2).map_err(|_| usage(format!("--Y2 {y2:?} is not a rational number")))?;
            if ysq.is_negative() {
                return Err(usage("--Y2 must be nonnegative"));
            }
            let threshold = threshold.unwrap_or((*n as f64).ln());
            let stats = cap_stats(*d, *n, &ysq, threshold)?;
            let mut orbits = Table::new("caps", &["representative", "orbit_size", "mu"]);
            for (o, mu) in &stats.mu {
                orbits.push(row([joined(&o.rep), o.size.to_string(), mu.to_string()]));
            }
            let mut summary = Table::new("caps_summary", &["property", "value"]);
            summary.push(row(["points".into(), stats.total_points.to_string()]));
            summary.push(row(["mean".into(), rational_string(&stats.mean)]));
            summary.push(row(["threshold".into(), format!("{threshold:.12e}")]));
            summary.push(row(["probability_above".into(), rational_string(&stats.threshold_prob)]));
            emit(common, &[orbits, summary])?;
        }
        Command::Ortho { v, .. } => {
            if v.len() < 2 || v.iter().all(|&x| x == 0) {
                return Err(usage("--v must be a nonzero vector with at least two entries"));
            }
            let lattice = ortho_lattice(v);
            let mut basis = Table::new("ortho", &["row", "basis", "gram"]);
            for (i, (b, g)) in lattice.basis.iter().zip(lattice.gram.rows()).enumerate() {
                let g: Vec<String> = g.iter().map(|x| x.to_string()).collect();
                basis.push(row([(i + 1).to_string(), joined(b), g.join(" ")]));
            }
            let mut summary = Table::new("ortho_summary", &["property", "value"]);
            summary.push(row(["v".into(), joined(&lattice.v)]));
            summary.push(row(["v_primitive".into(), joined(&lattice.v_primitive)]));
            summary.push(row(["D".into(), lattice.disc.to_string()]));
            emit(common, &[basis, summary])?;
        }
        Command::VerifyAll { eps, cutoff, seed, reduced, .. } => {
            let config = RunConfig {
                eps: eps.clone(),
                cutoff: *cutoff,
                budget: common.budget,
                threads: common.threads,
                out_dir: common.out.clone(),
                format: common.format,
                seed: *seed,
                reduced: *reduced,
            };
            let value = parse_rational(eps).map_err(|_| usage(format!("--eps {eps:?} is not a rational number")))?;
            if value.is_negative() {
                return Err(usage("--eps must be nonnegative"));
            }
            if *cutoff < 2 {
                return Err(usage("--cutoff must be at least 2"));
            }
            config.validate()?;
            let summary = verify_all(&config)?;
            for c in &summary.checks {
                let kind = match c.kind {
                    CheckKind::Exact => "exact",
                    CheckKind::Report => "report",
                };
                let status = if c.passed { "PASS" } else { "FAIL" };
                println!("[{status}] {:>2} {kind:<6} {}: {}", c.id, c.name, c.detail);
            }
            if !summary.exact_ok() {
                return Ok(ExitCode::from(1));
            }
        }
        Command::GenerateFamily { seed, count, k_min, k_max, height, .. } => {
            if *height < 1 {
                return Err(usage("--height must be at least 1"));
            }
            if k_min < &3 || k_min > k_max {
                return Err(usage("--k-min must be at least 3 and at most --k-max"));
            }
            let mut spec = acceptance_family(*seed, *count);
            spec.k_min = *k_min;
            spec.k_max = *k_max;
            spec.height = *height;
            let mut t = Table::new("family", &["form_id", "k", "D", "N", "gram"]);
            for m in generate_family(&spec)? {
                t.push(row([
                    m.id,
                    m.form.dim().to_string(),
                    m.form.discriminant().to_string(),
                    m.form.level().to_string(),
                    form_to_json(&m.form),
                ]));
            }
            emit(common, &[t])?;
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => e.exit(),
    };
    let result = thread_count(cli.command.common().threads).and_then(|threads| {
        if let Some(n) = threads {
            rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build_global()
                .map_err(|e| Failure::Compute(Error::Io(e.to_string())))?;
            info!("using {n} worker threads");
        }
        run(cli.command)
    });
    match result {
        Ok(code) => code,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Compute(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
