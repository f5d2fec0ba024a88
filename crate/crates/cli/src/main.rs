//! `pairkey`: bounds on pairwise secret-key rates for three mobile users.
//!
//! Every command reads an optional JSON configuration (`--config`), applies
//! the `--seed` / `--samples` overrides and writes CSV or JSON to `--out`
//! (standard output by default). Exit codes: 0 success, 2 configuration
//! error, 3 numerical failure.

mod config;
mod discrete;
mod output;

use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use pairkey_core::gaussian_rates::oracle::run_identity_suite;
use pairkey_core::gaussian_rates::{outer_bound, thm2_bounds, thm3_point};
use pairkey_core::region_tracing::{sweep_fig3, trace_projection, SweepSpec, TraceConfig};
use pairkey_core::{Direction, Pair, User};
use sha2::{Digest, Sha256};

use config::RunConfig;
use output::{render_csv, render_json, Cell, Meta, Table};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Config(String),
    #[error(transparent)]
    Core(#[from] pairkey_core::Error),
    #[error("{0}")]
    Numerical(String),
    #[error("{0}")]
    Io(String),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        use pairkey_core::Error as E;
        match self {
            CliError::Numerical(_) => 3,
            CliError::Core(E::AllSamplesDegenerate(_) | E::LinearizationUndefined) => 3,
            _ => 2,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Inner and outer unlimited-channel bounds over a noise-variance sweep.
    Fig3,
    /// Projection of the rate-limited region on two rate axes.
    Region {
        /// R12-R13, R12-R23 or R13-R23; overrides the config.
        #[arg(long)]
        axes: Option<String>,
    },
    /// Unlimited-channel lower bounds.
    Thm2,
    /// Upper bounds from the averaged eavesdropper variance.
    Outer,
    /// Rate-limited lower bound at one split choice.
    Thm3Point,
    /// Finite-alphabet region coefficients and an optional membership query.
    Discrete,
    /// Checks every closed-form integrand against covariance determinants.
    Selftest,
}

#[derive(Debug, Parser)]
#[command(name = "pairkey", version, about = "Pairwise secret-key rate bounds for three mobile users")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[arg(long, global = true)]
    samples: Option<u64>,
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value = "csv")]
    format: Format,
    /// Worker threads (default: all cores). Results do not depend on it.
    #[arg(long, global = true)]
    threads: Option<usize>,
}

struct Rendered {
    meta: Meta,
    table: Table,
    body: Option<serde_json::Value>,
}

fn load(cli: &Cli) -> Result<RunConfig, CliError> {
    let mut cfg = match &cli.config {
        Some(p) => {
            let text = fs::read_to_string(p).map_err(|e| CliError::Config(format!("{}: {e}", p.display())))?;
            RunConfig::parse(&text)?
        }
        None => RunConfig::default(),
    };
    if let Some(s) = cli.seed {
        cfg.mc.seed = s;
    }
    if let Some(n) = cli.samples {
        cfg.mc.samples = n;
    }
    if let Command::Region { axes: Some(a) } = &cli.command {
        cfg.region.axes = Some(a.clone());
    }
    cfg.validate()?;
    Ok(cfg)
}

fn config_hash(cfg: &RunConfig) -> String {
    let text = serde_json::to_string(cfg).expect("serializable");
    Sha256::digest(text.as_bytes()).iter().map(|b| format!("{b:02x}")).collect()
}

fn meta(name: &str, cfg: &RunConfig) -> Meta {
    Meta {
        command: name.into(),
        config_sha256: config_hash(cfg),
        seed: cfg.mc.seed,
        samples: cfg.mc.samples,
        ..Default::default()
    }
}

fn fig3(cfg: &RunConfig) -> Result<Rendered, CliError> {
    let (parameter, grid) = cfg.sweep()?;
    let spec = SweepSpec {
        parameter,
        grid,
        mobility: cfg.mobility()?,
        noise: cfg.noise()?,
        mc: cfg.mc()?,
    };
    let rows = sweep_fig3(&spec)?;
    let name = parameter.to_string();
    let mut t = Table::new(&[
        &name,
        "inner_r12",
        "outer_r12",
        "inner_r13",
        "outer_r13",
        "inner_r12_se",
        "outer_r12_se",
        "inner_r13_se",
        "outer_r13_se",
    ]);
    for r in &rows {
        t.push(vec![
            r.value.into(),
            r.inner[0].mean.into(),
            r.outer.rates.r12.into(),
            r.inner[1].mean.into(),
            r.outer.rates.r13.into(),
            r.inner[0].stderr.into(),
            r.outer.stderr.r12.into(),
            r.inner[1].stderr.into(),
            r.outer.stderr.r13.into(),
        ]);
    }
    let mut m = meta("fig3", cfg);
    m.excluded = rows.first().map_or(0, |r| r.n_excluded());
    m.extra.push(("sweep".into(), name));
    Ok(Rendered {
        meta: m,
        table: t,
        body: None,
    })
}

fn thm2(cfg: &RunConfig) -> Result<Rendered, CliError> {
    let b = thm2_bounds(&cfg.mobility()?, &cfg.noise()?, &cfg.mc()?)?;
    let mut t = Table::new(&["pair", "inner", "inner_se"]);
    for p in Pair::ALL {
        let e = b[p.index()];
        t.push(vec![format!("R{p}").into(), e.mean.into(), e.stderr.into()]);
    }
    let mut m = meta("thm2", cfg);
    m.excluded = b[0].n_excluded;
    Ok(Rendered {
        meta: m,
        table: t,
        body: None,
    })
}

fn outer(cfg: &RunConfig) -> Result<Rendered, CliError> {
    let o = outer_bound(&cfg.mobility()?, &cfg.noise()?, &cfg.mc()?)?;
    let mut t = Table::new(&["pair", "outer", "outer_se", "mean_sigma_hat2", "mean_sigma_hat2_se"]);
    for p in Pair::ALL {
        let e = o.mean_sigma_hat2[p.index()];
        t.push(vec![
            format!("R{p}").into(),
            o.rates[p].into(),
            o.stderr[p].into(),
            e.mean.into(),
            e.stderr.into(),
        ]);
    }
    let mut m = meta("outer", cfg);
    m.excluded = o.mean_sigma_hat2[0].n_excluded;
    Ok(Rendered {
        meta: m,
        table: t,
        body: None,
    })
}

fn thm3(cfg: &RunConfig) -> Result<Rendered, CliError> {
    let split = cfg.split()?;
    let budgets = cfg.budgets()?;
    let p = thm3_point(&cfg.mobility()?, &cfg.noise()?, &split, &budgets, &cfg.mc()?)?;
    let mut t = Table::new(&["quantity", "mean", "stderr", "budget", "within_budget"]);
    for q in Pair::ALL {
        let e = p.rate_estimates[q.index()];
        t.push(vec![format!("R{q}").into(), e.mean.into(), e.stderr.into(), Cell::Empty, Cell::Empty]);
    }
    for u in User::ALL {
        let e = p.constraint_lhs[u.index()];
        let b = budgets[u];
        t.push(vec![
            format!("public_{u}").into(),
            e.mean.into(),
            e.stderr.into(),
            b.into(),
            (e.mean - 2.0 * e.stderr <= b).into(),
        ]);
    }
    let mut m = meta("thm3-point", cfg);
    m.excluded = p.rate_estimates[0].n_excluded;
    let sp: Vec<String> = Direction::ALL.iter().map(|d| format!("{d}={:.11e}", split[*d])).collect();
    m.extra.push(("split".into(), sp.join(" ")));
    m.extra.push(("feasible".into(), p.feasible.to_string()));
    m.extra.push(("strictly_feasible".into(), p.strictly_feasible.to_string()));
    Ok(Rendered {
        meta: m,
        table: t,
        body: None,
    })
}

fn region(cfg: &RunConfig) -> Result<Rendered, CliError> {
    let axes = cfg.axes()?;
    let tc = TraceConfig {
        axes,
        budgets: cfg.budgets()?,
        noise: cfg.noise()?,
        mobility: cfg.mobility()?,
        grid: cfg.split_grid()?,
        mc: cfg.mc()?,
        refine_samples: cfg.refine_samples(),
    };
    let r = trace_projection(&tc)?;
    let (a, b) = axes.pairs();
    let h = axes.hidden();
    let names = [format!("r{a}"), format!("r{b}"), format!("r{h}")];
    let mut cols: Vec<String> = names.to_vec();
    cols.push("frontier".into());
    cols.extend(names.iter().map(|n| format!("refined_{n}")));
    cols.extend(Direction::ALL.iter().map(|d| format!("sp{d}")));
    let mut t = Table {
        columns: cols,
        rows: Vec::new(),
    };
    for p in &r.points {
        let mut row: Vec<Cell> = vec![p.rates[a].into(), p.rates[b].into(), p.rates[h].into(), p.frontier.into()];
        match p.refined {
            Some(f) => row.extend([f.rates[a].into(), f.rates[b].into(), f.rates[h].into()]),
            None => row.extend([Cell::Empty, Cell::Empty, Cell::Empty]),
        }
        row.extend(Direction::ALL.iter().map(|d| Cell::Num(p.split[*d])));
        t.push(row);
    }
    let mut m = meta("region", cfg);
    m.excluded = r.n_excluded;
    let g: Vec<String> = tc.grid.values.iter().map(|v| format!("{v:.11e}")).collect();
    m.extra.extend([
        ("axes".into(), axes.to_string()),
        ("budgets".into(), format!("{} {} {}", tc.budgets.r1, tc.budgets.r2, tc.budgets.r3)),
        ("split_grid".into(), g.join(" ")),
        ("refine_samples".into(), tc.refine_samples.to_string()),
        ("combinations".into(), r.combinations.to_string()),
        ("feasible_combinations".into(), r.feasible_combinations.to_string()),
        ("columns".into(), "grid-stage rates (hidden axis maximized), frontier flag, refined rates for frontier points, split variances".into()),
    ]);
    if let Some(d) = &r.diagnostic {
        m.extra.push(("diagnostic".into(), d.clone()));
    }
    Ok(Rendered {
        meta: m,
        table: t,
        body: None,
    })
}

fn discrete(cfg: &RunConfig) -> Result<Rendered, CliError> {
    let raw = cfg
        .discrete
        .clone()
        .ok_or_else(|| CliError::Config("config has no \"discrete\" section".into()))?;
    let spec: discrete::DiscreteSpec =
        serde_json::from_value(raw).map_err(|e| CliError::Config(format!("discrete: {e}")))?;
    let rep = discrete::report(&spec, cfg.discrete_cap())?;
    let mut t = Table::new(&["quantity", "bits"]);
    for (k, v) in rep.r.iter().chain(&rep.i) {
        t.push(vec![k.clone().into(), (*v).into()]);
    }
    for (k, v) in &rep.region {
        t.push(vec![format!("region {k}").into(), (*v).into()]);
    }
    for (k, v) in &rep.public {
        t.push(vec![format!("public {k}").into(), (*v).into()]);
    }
    let mut m = meta("discrete", cfg);
    m.samples = 0;
    if let Some(q) = &rep.query {
        m.extra.push(("member".into(), q.member.to_string()));
    }
    Ok(Rendered {
        meta: m,
        table: t,
        body: Some(serde_json::to_value(&rep).expect("serializable")),
    })
}

fn selftest(cfg: &RunConfig, draws: Option<u64>) -> Result<(Rendered, bool), CliError> {
    let draws = draws.unwrap_or(10_000);
    let r = run_identity_suite(draws, cfg.mc.seed);
    let mut t = Table::new(&["identity", "max_error", "pass"]);
    let tol = 1e-9;
    for (k, v) in [
        ("unlimited integrand", r.thm2),
        ("forward term", r.forward),
        ("reverse term", r.reverse),
        ("public-rate summand", r.constraint),
        ("eavesdropper variance forms (relative)", r.sigma_hat2_forms),
    ] {
        t.push(vec![k.into(), v.into(), (v < tol).into()]);
    }
    let ok = r.max_error() < tol;
    let mut m = meta("selftest", cfg);
    m.samples = draws;
    m.extra.push(("tolerance".into(), format!("{tol:e}")));
    Ok((
        Rendered {
            meta: m,
            table: t,
            body: None,
        },
        ok,
    ))
}

fn run(cli: &Cli) -> Result<(), CliError> {
    if let Some(n) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Config(format!("threads: {e}")))?;
    }
    let cfg = load(cli)?;
    let mut failed = None;
    let out = match &cli.command {
        Command::Fig3 => fig3(&cfg)?,
        Command::Region { .. } => region(&cfg)?,
        Command::Thm2 => thm2(&cfg)?,
        Command::Outer => outer(&cfg)?,
        Command::Thm3Point => thm3(&cfg)?,
        Command::Discrete => discrete(&cfg)?,
        Command::Selftest => {
            let (r, ok) = selftest(&cfg, cli.samples)?;
            if !ok {
                failed = Some(CliError::Numerical("selftest: an identity exceeds tolerance".into()));
            }
            r
        }
    };
    let text = match cli.format {
        Format::Csv => render_csv(&out.meta, &out.table),
        Format::Json => render_json(&out.meta, &out.table, out.body),
    };
    match &cli.out {
        Some(p) => fs::write(p, text).map_err(|e| CliError::Io(format!("{}: {e}", p.display())))?,
        None => print!("{text}"),
    }
    failed.map_or(Ok(()), Err)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("pairkey: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
