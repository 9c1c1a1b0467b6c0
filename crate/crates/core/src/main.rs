use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use retention_market::config::{ConfigFile, OutputSection};
use retention_market::experiment::{self, Mechanism};
use retention_market::{io, CostParams, ExperimentConfig, MarketError, OversupplyStrategy, Result};

#[derive(Parser)]
#[command(
    name = "retention-market",
    version,
    about = "Quotation-based data retention market simulator"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one Monte Carlo experiment.
    Simulate(Common),
    /// Run all four mechanisms over informed ratios 0, 0.1, ..., 1.
    Sweep(Common),
    /// Compare the four oversupply strategies of the quotation mechanism.
    Table2(Common),
    /// Write cost curves for the configured parameters and the three cost shapes.
    Curves(Common),
    /// Print the effective configuration as TOML.
    ShowConfig(Common),
}

#[derive(Args, Clone)]
struct Common {
    /// TOML configuration file.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Master seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Number of Monte Carlo runs.
    #[arg(long)]
    runs: Option<u64>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    mechanism: Option<String>,
    #[arg(long)]
    strategy: Option<String>,
    #[arg(long)]
    informed_ratio: Option<f64>,
    /// Write per-round traces (simulate only).
    #[arg(long)]
    trace: bool,
}

impl Common {
    fn resolve(&self) -> Result<(ExperimentConfig, OutputSection)> {
        let mut file = match &self.config {
            Some(path) => ConfigFile::load(path)?,
            None => ConfigFile::default(),
        };
        if let Some(seed) = self.seed {
            file.master_seed = seed;
        }
        if let Some(runs) = self.runs {
            file.n_runs = runs;
        }
        if let Some(out) = &self.out {
            file.output.dir = out.to_string_lossy().into_owned();
        }
        if let Some(m) = &self.mechanism {
            file.mechanism = m.parse()?;
        }
        if let Some(s) = &self.strategy {
            file.strategy = s.parse()?;
        }
        if let Some(r) = self.informed_ratio {
            file.informed_ratio = r;
        }
        file.output.trace |= self.trace;
        let cfg = file.experiment();
        cfg.validate()?;
        Ok((cfg, file.output))
    }
}

fn print_aggregates(study: &experiment::Study) {
    println!(
        "{:<10} {:>6} {:<13} {:>12} {:>12} {:>12} {:>8}",
        "mechanism", "ratio", "strategy", "xi_s", "xi_u", "xi", "rounds"
    );
    for a in &study.aggregates {
        println!(
            "{:<10} {:>6.2} {:<13} {:>12.2} {:>12.2} {:>12.2} {:>8.2}",
            a.mechanism.as_str(),
            a.informed_ratio,
            a.strategy,
            a.get("xi_s").mean,
            a.get("xi_u").mean,
            a.get("xi").mean,
            a.get("rounds").mean,
        );
    }
}

fn simulate(cfg: &ExperimentConfig, out: &OutputSection) -> Result<()> {
    let dir = Path::new(&out.dir);
    let records = experiment::run_records(cfg)?;
    let rows: Vec<_> = records.iter().map(|r| r.row.clone()).collect();
    let agg = experiment::aggregate(cfg, &rows);
    io::emit_results(&rows, &dir.join("results.csv"))?;
    io::emit_aggregates(std::slice::from_ref(&agg), &dir.join("aggregates.csv"))?;
    if out.trace {
        io::emit_trace(
            records.iter().map(|r| (r.row.run_id, &r.outcome)),
            &dir.join("trace.csv"),
        )?;
    }
    print_aggregates(&experiment::Study {
        rows: Vec::new(),
        aggregates: vec![agg],
    });
    Ok(())
}

fn sweep(cfg: &ExperimentConfig, out: &OutputSection) -> Result<()> {
    let dir = Path::new(&out.dir);
    let study = experiment::sweep_informed_ratio(cfg, &experiment::default_ratios())?;
    io::emit_results(&study.rows, &dir.join("sweep_results.csv"))?;
    io::emit_aggregates(&study.aggregates, &dir.join("sweep_aggregates.csv"))?;
    print_aggregates(&study);
    Ok(())
}

fn table2(cfg: &ExperimentConfig, out: &OutputSection) -> Result<()> {
    let dir = Path::new(&out.dir);
    let study = experiment::compare_strategies(cfg)?;
    io::emit_results(&study.rows, &dir.join("table2_results.csv"))?;
    io::emit_aggregates(&study.aggregates, &dir.join("table2_aggregates.csv"))?;
    print!("{:<16}", "");
    for s in OversupplyStrategy::ALL {
        print!("{:>14}", s.as_str());
    }
    println!();
    for (label, metric) in [
        ("Server's payoff", "xi_s"),
        ("Users' payoff", "xi_u"),
        ("Social welfare", "xi"),
    ] {
        print!("{label:<16}");
        for a in &study.aggregates {
            print!("{:>14.1}", a.get(metric).mean);
        }
        println!();
    }
    Ok(())
}

/// Parameters showing each cost shape on the configured population.
///
/// Only the time weight `beta * T0` changes: below the marginal accuracy
/// saving at `y = d` the cost falls throughout, above the saving at `y = 0`
/// it rises throughout, and in between it has an interior minimum.
fn case_presets(base: &CostParams) -> [(&'static str, CostParams); 3] {
    let with_time_weight = |w: f64| CostParams {
        beta: w / base.t0,
        ..*base
    };
    let saving_at_d = base.alpha * base.a1 * base.a2 * base.a.ln();
    let saving_at_0 = saving_at_d * base.a.powf(base.a2 * base.d);
    [
        ("decreasing", with_time_weight(0.05 * saving_at_d)),
        (
            "nonmonotone",
            with_time_weight((saving_at_d * saving_at_0).sqrt()),
        ),
        ("increasing", with_time_weight(1.5 * saving_at_0)),
    ]
}

fn curves(cfg: &ExperimentConfig, out: &OutputSection) -> Result<()> {
    let dir = Path::new(&out.dir);
    let dd = cfg.quotation.dd;
    io::emit_cost_curve(&cfg.cost, dd, &dir.join("cost_curve.csv"))?;
    println!("configured: {:?}", cfg.cost.classify_monotonicity()?);
    for (name, params) in case_presets(&cfg.cost) {
        io::emit_cost_curve(&params, dd, &dir.join(format!("cost_curve_{name}.csv")))?;
        println!("{name}: {:?}", params.classify_monotonicity()?);
    }
    Ok(())
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Simulate(c) => {
            let (cfg, out) = c.resolve()?;
            simulate(&cfg, &out)
        }
        Command::Sweep(c) => {
            let (cfg, out) = c.resolve()?;
            sweep(&cfg, &out)
        }
        Command::Table2(c) => {
            let (mut cfg, out) = c.resolve()?;
            cfg.mechanism = Mechanism::Quotation;
            table2(&cfg, &out)
        }
        Command::Curves(c) => {
            let (cfg, out) = c.resolve()?;
            curves(&cfg, &out)
        }
        Command::ShowConfig(c) => {
            let (cfg, out) = c.resolve()?;
            print!("{}", ConfigFile::from_experiment(&cfg, out).to_toml());
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let line = serde_json::json!({ "error": e.kind(), "message": e.to_string() });
            eprintln!("{line}");
            if matches!(
                e,
                MarketError::Validation { .. } | MarketError::Parse { .. }
            ) {
                ExitCode::from(2)
            } else {
                ExitCode::FAILURE
            }
        }
    }
}
