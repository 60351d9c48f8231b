//! Test families, form files, run configuration and the verification driver.

pub mod checks;
pub mod family;
pub mod io;

use std::fs;
use std::path::{Path, PathBuf};

use num_rational::BigRational;
use serde::Serialize;

pub use checks::{rational_string, CheckKind, CheckOutcome, CheckRun, Grid, Table};
pub use family::{generate_family, FamilyMember, FamilySpec};
pub use io::{form_to_json, parse_form, read_form};

use crate::eisenstein::parse_rational;
use crate::enumeration::DEFAULT_NODE_BUDGET;
use crate::error::{Error, Result};

pub const DEFAULT_SEED: u64 = 2024;
pub const DEFAULT_CUTOFF: u64 = 10_000;
pub const DEFAULT_EPS: &str = "0.1";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum OutputFormat {
    Csv,
    Json,
}

impl std::str::FromStr for OutputFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(OutputFormat::Csv),
            "json" => Ok(OutputFormat::Json),
            _ => Err(Error::InvalidArgument(format!("unknown format {s:?}, expected csv or json"))),
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct RunConfig {
    pub eps: String,
    pub cutoff: u64,
    pub budget: u64,
    /// Execution settings, left out of the reports so that they stay
    /// byte-identical across thread counts and output locations.
    #[serde(skip)]
    pub threads: Option<usize>,
    #[serde(skip)]
    pub out_dir: Option<PathBuf>,
    pub format: OutputFormat,
    pub seed: u64,
    /// Run the small grid instead of the full acceptance grid.
    pub reduced: bool,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            eps: DEFAULT_EPS.into(),
            cutoff: DEFAULT_CUTOFF,
            budget: DEFAULT_NODE_BUDGET,
            threads: None,
            out_dir: None,
            format: OutputFormat::Csv,
            seed: DEFAULT_SEED,
            reduced: false,
        }
    }
}

impl RunConfig {
    pub fn validate(&self) -> Result<BigRational> {
        let eps = parse_rational(&self.eps)?;
        if eps < BigRational::from_integer(0.into()) {
            return Err(Error::InvalidArgument("eps must be nonnegative".into()));
        }
        if self.budget == 0 {
            return Err(Error::InvalidArgument("budget must be positive".into()));
        }
        if self.cutoff < 2 {
            return Err(Error::InvalidArgument("cutoff must be at least 2".into()));
        }
        if self.threads == Some(0) {
            return Err(Error::InvalidArgument("threads must be positive".into()));
        }
        Ok(eps)
    }

    pub fn grid(&self) -> Result<Grid> {
        let eps = self.validate()?;
        Ok(if self.reduced {
            Grid::reduced(self.seed, self.cutoff, self.budget, eps)
        } else {
            Grid::full(self.seed, self.cutoff, self.budget, eps)
        })
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Summary {
    pub config: RunConfig,
    pub checks: Vec<CheckOutcome>,
    /// Names of the tables written alongside the summary.
    pub tables: Vec<String>,
}

impl Summary {
    /// True when every exact check passed.
    pub fn exact_ok(&self) -> bool {
        self.checks.iter().all(|c| c.kind != CheckKind::Exact || c.passed)
    }
}

/// Every check in criterion order, on one grid.
pub fn run_checks(grid: &Grid) -> Result<Vec<CheckRun>> {
    let family = checks::family(grid)?;
    let pairs = checks::pair_data(grid)?;
    Ok(vec![
        checks::check_counts(grid, &family)?,
        checks::check_local_densities(grid, &family)?,
        checks::check_gauss(grid)?,
        checks::check_calibration(grid)?,
        checks::check_pair_methods(&pairs),
        checks::check_mean_identity(grid, &pairs)?,
        checks::check_pair_invariants(&pairs),
        checks::check_covering(grid)?,
        checks::check_trend(grid)?,
        checks::check_bounds(grid, &family)?,
    ])
}

fn family_table(grid: &Grid) -> Result<Table> {
    let mut t = Table {
        name: "family".into(),
        header: ["form_id", "k", "D", "N", "gram"].iter().map(|s| s.to_string()).collect(),
        rows: Vec::new(),
    };
    for m in checks::family(grid)? {
        t.rows.push(vec![
            m.id,
            m.form.dim().to_string(),
            m.form.discriminant().to_string(),
            m.form.level().to_string(),
            form_to_json(&m.form),
        ]);
    }
    Ok(t)
}

/// Runs every check and writes the tables and summary.json when an output
/// directory is configured. Threading is the caller's business.
pub fn verify_all(config: &RunConfig) -> Result<Summary> {
    let grid = config.grid()?;
    let runs = run_checks(&grid)?;
    let mut tables = vec![family_table(&grid)?];
    tables.extend(runs.iter().flat_map(|r| r.tables.iter().cloned()));
    let summary = Summary {
        config: config.clone(),
        checks: runs.into_iter().map(|r| r.outcome).collect(),
        tables: tables.iter().map(|t| t.name.clone()).collect(),
    };
    if let Some(dir) = &config.out_dir {
        fs::create_dir_all(dir)?;
        for t in &tables {
            write_table(dir, t, config.format)?;
        }
        let mut text = serde_json::to_string_pretty(&summary).map_err(|e| Error::Io(e.to_string()))?;
        text.push('\n');
        fs::write(dir.join("summary.json"), text)?;
    }
    Ok(summary)
}

pub fn table_csv(table: &Table) -> Result<String> {
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new());
    w.write_record(&table.header).map_err(|e| Error::Io(e.to_string()))?;
    for r in &table.rows {
        w.write_record(r).map_err(|e| Error::Io(e.to_string()))?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Io(e.to_string()))?;
    Ok(String::from_utf8(bytes).expect("utf-8"))
}

pub fn table_json(table: &Table) -> String {
    let rows: Vec<serde_json::Map<String, serde_json::Value>> = table
        .rows
        .iter()
        .map(|r| table.header.iter().cloned().zip(r.iter().map(|v| serde_json::Value::from(v.as_str()))).collect())
        .collect();
    let mut s = serde_json::to_string_pretty(&rows).expect("serializable");
    s.push('\n');
    s
}

pub fn write_table(dir: &Path, table: &Table, format: OutputFormat) -> Result<()> {
    match format {
        OutputFormat::Csv => fs::write(dir.join(format!("{}.csv", table.name)), table_csv(table)?)?,
        OutputFormat::Json => fs::write(dir.join(format!("{}.json", table.name)), table_json(table))?,
    }
    Ok(())
}
