//! Command-line front end: argument types, the four commands and their
//! reports. `main.rs` only parses and prints.

pub mod input;
pub mod report;

use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use selflink::bundles::check_sl_conditions;
use selflink::linking::{
    linking_number_integral_with, linking_number_intersection, IntegralOptions, InvariantResult,
};
use selflink::numerics::RootOptions;
use selflink::selflinking::{
    detect_order, orthogonal_developable_intersections, osculating_developable_intersections,
    sl_integral, sl_limit, sl_orthogonal, sl_osculating, SelfLinkOptions,
};
use selflink::TrigCurve;

pub use input::{BundleChoice, CurveSource};
pub use report::{Body, MethodOutcome, Report, Settings, TableRow, SCHEMA_VERSION};

/// Failures that stop a command before it can produce a report.
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("input: {0}")]
    Input(String),
    #[error("{0}")]
    Invalid(String),
}

#[derive(Debug, Parser)]
#[command(
    name = "selflink",
    version,
    about = "Linking and self-linking numbers of closed curves in R^n"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Check the regularity conditions for self-linking and print margins.
    Check {
        curve: CurveSource,
        #[arg(long, default_value = "orthogonal")]
        bundle: BundleChoice,
        #[command(flatten)]
        common: Common,
    },
    /// Linking number of two curves, measured through a bundle along the first.
    Linking {
        first: CurveSource,
        second: CurveSource,
        #[arg(long, default_value = "coordinate")]
        bundle: BundleChoice,
        #[arg(long, value_enum, default_value = "integral")]
        method: LinkingMethod,
        #[command(flatten)]
        common: Common,
    },
    /// Self-linking number of a curve.
    Selflink {
        curve: CurveSource,
        #[arg(long, default_value = "osculating")]
        bundle: BundleChoice,
        #[arg(long, value_enum, default_value = "integral")]
        method: SelfMethod,
        #[command(flatten)]
        common: Common,
    },
    /// Recompute the published example table and compare.
    PaperTable {
        #[arg(long, value_enum, default_value = "all")]
        method: SelfMethod,
        #[command(flatten)]
        common: Common,
    },
}

#[derive(Debug, Clone, Args)]
pub struct Common {
    /// Quadrature grid (outer nodes); a power of two in [64, 4096].
    /// Defaults to 512 for self-linking and 256 for linking.
    #[arg(long)]
    pub grid: Option<usize>,
    /// Seed-scan resolution per axis for root finding, in [16, 4096].
    #[arg(long, default_value_t = 128)]
    pub seeds: usize,
    /// Largest distance from an integer that is still rounded.
    #[arg(long, default_value_t = 0.05)]
    pub tol: f64,
    /// Push-off order; the bundle's natural order, or detected, when absent.
    #[arg(long)]
    pub k: Option<usize>,
    #[arg(long, value_enum, default_value = "text")]
    pub format: Format,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Text,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum LinkingMethod {
    Integral,
    Intersection,
    Both,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SelfMethod {
    Integral,
    Intersection,
    Limit,
    All,
}

impl SelfMethod {
    fn expand(self) -> Vec<SelfMethod> {
        match self {
            SelfMethod::All => vec![
                SelfMethod::Integral,
                SelfMethod::Intersection,
                SelfMethod::Limit,
            ],
            m => vec![m],
        }
    }

    fn name(self) -> &'static str {
        match self {
            SelfMethod::Integral => "integral",
            SelfMethod::Intersection => "intersection",
            SelfMethod::Limit => "limit",
            SelfMethod::All => "all",
        }
    }
}

/// Validated numeric settings.
#[derive(Debug, Clone, Copy)]
struct Tuning {
    grid: usize,
    seeds: usize,
    tol: f64,
}

impl Common {
    fn tuning(&self, default_grid: usize) -> Result<Tuning, CliError> {
        let grid = self.grid.unwrap_or(default_grid);
        if !grid.is_power_of_two() || !(64..=4096).contains(&grid) {
            return Err(CliError::Invalid(format!(
                "--grid must be a power of two in [64, 4096], got {grid}"
            )));
        }
        if !(16..=4096).contains(&self.seeds) {
            return Err(CliError::Invalid(format!(
                "--seeds must lie in [16, 4096], got {}",
                self.seeds
            )));
        }
        if !(self.tol > 0.0 && self.tol < 0.5) {
            return Err(CliError::Invalid(format!(
                "--tol must lie in (0, 0.5), got {}",
                self.tol
            )));
        }
        Ok(Tuning {
            grid,
            seeds: self.seeds,
            tol: self.tol,
        })
    }

    fn settings(&self, t: Tuning, bundle: Option<&BundleChoice>, methods: Vec<String>) -> Settings {
        Settings {
            bundle: bundle.map(ToString::to_string),
            methods,
            grid: t.grid,
            seeds: t.seeds,
            tol: t.tol,
            k: self.k,
        }
    }
}

impl Command {
    pub fn format(&self) -> Format {
        match self {
            Command::Check { common, .. }
            | Command::Linking { common, .. }
            | Command::Selflink { common, .. }
            | Command::PaperTable { common, .. } => common.format,
        }
    }
}

/// Runs a parsed command. `Ok` carries a report whether or not it passed.
pub fn run(command: &Command) -> Result<Report, CliError> {
    match command {
        Command::Check {
            curve,
            bundle,
            common,
        } => cmd_check(curve, bundle, common),
        Command::Linking {
            first,
            second,
            bundle,
            method,
            common,
        } => cmd_linking(first, second, bundle, *method, common),
        Command::Selflink {
            curve,
            bundle,
            method,
            common,
        } => cmd_selflink(curve, bundle, *method, common),
        Command::PaperTable { method, common } => cmd_paper_table(*method, common),
    }
}

fn order_for(
    curve: &TrigCurve,
    bundle: &BundleChoice,
    k: Option<usize>,
) -> Result<usize, CliError> {
    if let Some(k) = k {
        if k == 0 || k + 2 > curve.dim() {
            return Err(CliError::Invalid(format!(
                "--k must lie in [1, {}] for a curve in R^{}",
                curve.dim() - 2,
                curve.dim()
            )));
        }
        return Ok(k);
    }
    if let Some(k) = bundle.natural_order(curve.dim()) {
        return Ok(k);
    }
    let built = bundle.build(curve)?;
    detect_order(curve, &built, 512).map_err(|e| CliError::Invalid(format!("no usable order: {e}")))
}

pub fn cmd_check(
    curve: &CurveSource,
    bundle: &BundleChoice,
    common: &Common,
) -> Result<Report, CliError> {
    let tuning = common.tuning(256)?;
    let c = curve.load()?;
    if c.dim() < 3 {
        return Err(CliError::Input(format!(
            "curve must live in R^n with n ≥ 3, got {}",
            c.dim()
        )));
    }
    let b = bundle.build(&c)?;
    let k = match common.k {
        Some(_) => order_for(&c, bundle, common.k)?,
        None => bundle.natural_order(c.dim()).unwrap_or(1),
    };
    let report = check_sl_conditions(&c, &b, k, tuning.grid)
        .map_err(|e| CliError::Invalid(e.to_string()))?;
    let pass = report.pass;
    let mut settings = common.settings(tuning, Some(bundle), Vec::new());
    settings.k = Some(k);
    Ok(Report {
        schema_version: SCHEMA_VERSION,
        command: "check".into(),
        inputs: vec![curve.to_string()],
        settings,
        body: Body::Check { report },
        pass,
    })
}

fn timed(method: &str, f: impl FnOnce() -> selflink::Result<InvariantResult>) -> MethodOutcome {
    let start = Instant::now();
    let r = f();
    let seconds = start.elapsed().as_secs_f64();
    match r {
        Ok(result) => MethodOutcome {
            method: method.into(),
            result: Some(result),
            error: None,
            seconds,
        },
        Err(e) => MethodOutcome {
            method: method.into(),
            result: None,
            error: Some(e.to_string()),
            seconds,
        },
    }
}

/// `Some(agree)` when more than one method ran.
fn agreement(outcomes: &[MethodOutcome]) -> Option<bool> {
    if outcomes.len() < 2 {
        return None;
    }
    let first = outcomes[0].value();
    Some(first.is_some() && outcomes.iter().all(|o| o.value() == first))
}

pub fn cmd_linking(
    first: &CurveSource,
    second: &CurveSource,
    bundle: &BundleChoice,
    method: LinkingMethod,
    common: &Common,
) -> Result<Report, CliError> {
    let tuning = common.tuning(256)?;
    let a = first.load()?;
    let b = second.load()?;
    if a.dim() != b.dim() {
        return Err(CliError::Input(format!(
            "curves live in R^{} and R^{}",
            a.dim(),
            b.dim()
        )));
    }
    let nu = bundle.build(&a)?;
    let mut outcomes = Vec::new();
    if matches!(method, LinkingMethod::Integral | LinkingMethod::Both) {
        let opts = IntegralOptions {
            max_residual: tuning.tol,
            ..IntegralOptions::midpoint(tuning.grid)
        };
        outcomes.push(timed("integral", || {
            linking_number_integral_with(&a, &b, &nu, &opts)
        }));
    }
    if matches!(method, LinkingMethod::Intersection | LinkingMethod::Both) {
        let roots = RootOptions {
            seeds: tuning.seeds,
            ..RootOptions::default()
        };
        outcomes.push(timed("intersection", || {
            linking_number_intersection(&a, &b, &nu, None, &roots)
        }));
    }
    let agree = agreement(&outcomes);
    let pass = outcomes.iter().all(|o| o.result.is_some()) && agree != Some(false);
    let methods = outcomes.iter().map(|o| o.method.clone()).collect();
    Ok(Report {
        schema_version: SCHEMA_VERSION,
        command: "linking".into(),
        inputs: vec![first.to_string(), second.to_string()],
        settings: common.settings(tuning, Some(bundle), methods),
        body: Body::Invariant {
            outcomes,
            agreement: agree,
        },
        pass,
    })
}

fn self_options(tuning: Tuning, k: usize) -> SelfLinkOptions {
    let mut integral = IntegralOptions::nested(tuning.grid);
    integral.max_residual = tuning.tol;
    SelfLinkOptions {
        k: Some(k),
        integral,
        roots: RootOptions {
            seeds: tuning.seeds,
            ..RootOptions::default()
        },
        ..SelfLinkOptions::default()
    }
}

/// Runs the requested self-linking methods on one curve.
fn self_outcomes(
    curve: &TrigCurve,
    bundle: &BundleChoice,
    methods: &[SelfMethod],
    k: usize,
    tuning: Tuning,
) -> Result<Vec<MethodOutcome>, CliError> {
    let nu = bundle.build(curve)?;
    let opts = self_options(tuning, k);
    let natural = bundle.natural_order(curve.dim()) == Some(k);
    let mut outcomes = Vec::new();
    for &m in methods {
        let outcome = match m {
            SelfMethod::Integral => timed(m.name(), || match bundle {
                BundleChoice::Osculating if natural => sl_osculating(curve, &opts),
                BundleChoice::Orthogonal if natural => sl_orthogonal(curve, &opts),
                _ => sl_integral(curve, &nu, k, &opts),
            }),
            SelfMethod::Intersection => timed(m.name(), || {
                match bundle {
                // each bundle's number counts hits with the other developable
                BundleChoice::Osculating if natural => {
                    orthogonal_developable_intersections(curve, &opts.roots).map(|(_, r)| r)
                }
                BundleChoice::Orthogonal if natural => {
                    osculating_developable_intersections(curve, &opts.roots).map(|(_, r)| r)
                }
                _ => Err(selflink::Error::InvalidArgument(
                    "the intersection count needs the osculating or orthogonal bundle at its natural order".into(),
                )),
            }
            }),
            SelfMethod::Limit => timed(m.name(), || sl_limit(curve, &nu, k, &opts)),
            SelfMethod::All => unreachable!("expanded"),
        };
        outcomes.push(outcome);
    }
    Ok(outcomes)
}

pub fn cmd_selflink(
    curve: &CurveSource,
    bundle: &BundleChoice,
    method: SelfMethod,
    common: &Common,
) -> Result<Report, CliError> {
    let tuning = common.tuning(512)?;
    let c = curve.load()?;
    let k = order_for(&c, bundle, common.k)?;
    let methods = method.expand();
    let outcomes = self_outcomes(&c, bundle, &methods, k, tuning)?;
    let agree = agreement(&outcomes);
    let pass = outcomes.iter().all(|o| o.result.is_some()) && agree != Some(false);
    let mut settings = common.settings(
        tuning,
        Some(bundle),
        methods.iter().map(|m| m.name().into()).collect(),
    );
    settings.k = Some(k);
    Ok(Report {
        schema_version: SCHEMA_VERSION,
        command: "selflink".into(),
        inputs: vec![curve.to_string()],
        settings,
        body: Body::Invariant {
            outcomes,
            agreement: agree,
        },
        pass,
    })
}

/// The published values: (curve, A, bundle, self-linking number).
pub const PAPER_TABLE: [(&str, f64, BundleChoice, i64); 6] = [
    ("example1", 1.0, BundleChoice::Osculating, 1),
    ("example1", 1.0, BundleChoice::Orthogonal, 1),
    ("example1", 1.3, BundleChoice::Osculating, 1),
    ("example1", 1.3, BundleChoice::Orthogonal, 0),
    ("example2", 1.6, BundleChoice::Osculating, 3),
    ("example2", 1.6, BundleChoice::Orthogonal, -1),
];

pub fn cmd_paper_table(method: SelfMethod, common: &Common) -> Result<Report, CliError> {
    let tuning = common.tuning(512)?;
    if common.k.is_some() {
        return Err(CliError::Invalid(
            "--k does not apply to the example table".into(),
        ));
    }
    let methods = method.expand();
    // cells are independent; each already parallelizes internally
    let rows: Vec<Result<TableRow, CliError>> = std::thread::scope(|scope| {
        let handles: Vec<_> = PAPER_TABLE
            .iter()
            .map(|(name, a, bundle, expected)| {
                let methods = &methods;
                scope.spawn(move || -> Result<TableRow, CliError> {
                    let curve = TrigCurve::from_preset(name, *a)
                        .map_err(|e| CliError::Input(e.to_string()))?;
                    let k = bundle.natural_order(curve.dim()).expect("named bundle");
                    let outcomes = self_outcomes(&curve, bundle, methods, k, tuning)?;
                    let pass = outcomes.iter().all(|o| o.value() == Some(*expected));
                    Ok(TableRow {
                        curve: name.to_string(),
                        a: *a,
                        bundle: bundle.to_string(),
                        expected: *expected,
                        outcomes,
                        pass,
                    })
                })
            })
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("table cell panicked"))
            .collect()
    });
    let rows = rows.into_iter().collect::<Result<Vec<_>, _>>()?;
    let mut diff = Vec::new();
    for r in &rows {
        for o in &r.outcomes {
            match (o.value(), &o.error) {
                (Some(v), _) if v == r.expected => {}
                (Some(v), _) => diff.push(format!(
                    "{} A={} {} {}: expected {}, got {v}",
                    r.curve, r.a, r.bundle, o.method, r.expected
                )),
                (None, e) => diff.push(format!(
                    "{} A={} {} {}: expected {}, failed: {}",
                    r.curve,
                    r.a,
                    r.bundle,
                    o.method,
                    r.expected,
                    e.as_deref().unwrap_or("no result")
                )),
            }
        }
    }
    let pass = diff.is_empty();
    Ok(Report {
        schema_version: SCHEMA_VERSION,
        command: "paper-table".into(),
        inputs: Vec::new(),
        settings: common.settings(
            tuning,
            None,
            methods.iter().map(|m| m.name().into()).collect(),
        ),
        body: Body::Table { rows, diff },
        pass,
    })
}
