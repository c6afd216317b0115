use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Context;
use clap::{Parser, Subcommand};
use contrastbench::config::ExperimentConfig;
use contrastbench::pipeline::{Pipeline, SummaryRow};

/// Exit status for a failed acceptance check.
const EXIT_CHECK: u8 = 1;
/// Exit status for bad input: config, paths, stale or missing artifacts.
const EXIT_USAGE: u8 = 2;

#[derive(Parser)]
#[command(name = "contrastbench", version, about = "Cost-bounded contrast-set evaluation of simulated robot policies")]
struct Cli {
    /// More log output (repeatable).
    #[arg(short, long, action = clap::ArgAction::Count, global = true)]
    verbose: u8,
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args)]
struct Target {
    /// Experiment config (JSON).
    #[arg(short, long)]
    config: PathBuf,
    /// Artifact directory; defaults to <output_dir>/<config stamp>.
    #[arg(long)]
    run_dir: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Sample one evaluation set per seed.
    Gen(Target),
    /// Execute strategies on the generated sets.
    Run {
        #[command(flatten)]
        target: Target,
        /// Only this strategy id.
        #[arg(long)]
        strategy: Option<String>,
    },
    /// Turn run logs into CSV curves and tables.
    Report(Target),
    /// Run the default tabletop and navigation scenarios end to end and check
    /// the headline properties.
    Demo {
        #[arg(long, default_value = "demo-runs")]
        out: PathBuf,
    },
    /// Print a built-in config as JSON.
    Config {
        #[arg(value_parser = ["tabletop", "nav"])]
        environment: String,
        #[arg(long, default_value = "noisy-oracle")]
        preset: String,
    },
}

fn pipeline(t: &Target) -> anyhow::Result<Pipeline> {
    let text = std::fs::read_to_string(&t.config).with_context(|| format!("reading {}", t.config.display()))?;
    let config = ExperimentConfig::from_json(&text)?;
    Ok(Pipeline::new(config, t.run_dir.clone())?)
}

fn gen(p: &Pipeline) -> anyhow::Result<()> {
    for s in p.gen()? {
        let cats: Vec<String> = s.categories.iter().map(|(k, v)| format!("{k}={v}")).collect();
        println!(
            "seed {}: {} instances, {} confirmed feasible [{}]",
            s.seed,
            s.instances,
            s.confirmed,
            cats.join(" ")
        );
    }
    println!("sets written to {}", p.dir.join("sets").display());
    Ok(())
}

fn run(p: &Pipeline, strategy: Option<&str>) -> anyhow::Result<()> {
    for r in p.run(strategy)? {
        println!(
            "{} seed {}: {} trials, cost {:.3}{}{}",
            r.strategy,
            r.seed,
            r.trials,
            r.total_cost,
            if r.halted { ", halted at budget" } else { "" },
            if r.skipped > 0 { format!(", {} perturbations skipped", r.skipped) } else { String::new() }
        );
    }
    Ok(())
}

fn report(p: &Pipeline) -> anyhow::Result<Vec<SummaryRow>> {
    let rep = p.report()?;
    for r in &rep.rows {
        println!(
            "{} seed {}: estimate {:.4}, reference {:.4}, error {:.4}, {} trials, cost {:.3}",
            r.strategy, r.seed, r.estimate, r.reference, r.abs_error, r.trials, r.total_cost
        );
    }
    println!("report written to {}", p.report_dir().display());
    Ok(rep.rows)
}

fn mean_of(rows: &[SummaryRow], strategy: &str, f: impl Fn(&SummaryRow) -> f64) -> f64 {
    let v: Vec<f64> = rows.iter().filter(|r| r.strategy == strategy).map(f).collect();
    v.iter().sum::<f64>() / v.len().max(1) as f64
}

fn demo(out: PathBuf) -> anyhow::Result<bool> {
    let mut checks: Vec<(String, bool)> = Vec::new();

    let mut tt = ExperimentConfig::default_tabletop("noisy-oracle");
    tt.output_dir = out.clone();
    let p = Pipeline::new(tt, None)?;
    gen(&p)?;
    run(&p, None)?;
    let rows = report(&p)?;
    let std_cost = mean_of(&rows, "standard", |r| r.total_cost);
    let std_trials = mean_of(&rows, "standard", |r| r.trials as f64);
    let full = mean_of(&rows, "contrast", |r| r.trials as f64);
    let lang = mean_of(&rows, "contrast-language", |r| r.trials as f64);
    let err = mean_of(&rows, "contrast", |r| r.abs_error);
    checks.push((format!("standard cost {std_cost:.1} m within 30% of 281 m"), (std_cost - 281.0).abs() <= 0.3 * 281.0));
    checks.push((format!("full contrast {full:.1} trials >= 1.3 x standard {std_trials:.1}"), full >= 1.3 * std_trials));
    checks.push((format!("language-only contrast {lang:.1} trials >= full contrast {full:.1}"), lang >= full));
    checks.push((format!("full-contrast estimate error {err:.4} <= 0.08"), err <= 0.08));

    let mut nav = ExperimentConfig::default_nav("paraphrase-brittle");
    nav.output_dir = out;
    let p = Pipeline::new(nav, None)?;
    gen(&p)?;
    run(&p, None)?;
    let rows = report(&p)?;
    let counts: Vec<usize> = rows.iter().filter(|r| r.strategy == "contrast").map(|r| r.trials).collect();
    checks.push((format!("nav contrast trials per seed {counts:?} == 75"), counts.iter().all(|&n| n == 75)));

    let mut ok = true;
    for (name, pass) in &checks {
        println!("{} {name}", if *pass { "PASS" } else { "FAIL" });
        ok &= pass;
    }
    Ok(ok)
}

fn usage_error(e: &anyhow::Error) -> bool {
    e.chain().any(|c| {
        c.downcast_ref::<contrastbench::Error>().is_some_and(contrastbench::Error::is_usage)
            || c.downcast_ref::<std::io::Error>().is_some()
    })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();

    let result = match &cli.command {
        Command::Gen(t) => pipeline(t).and_then(|p| gen(&p)).map(|_| true),
        Command::Run { target, strategy } => pipeline(target).and_then(|p| run(&p, strategy.as_deref())).map(|_| true),
        Command::Report(t) => pipeline(t).and_then(|p| report(&p)).map(|_| true),
        Command::Demo { out } => demo(out.clone()),
        Command::Config { environment, preset } => {
            let c = if environment == "nav" {
                ExperimentConfig::default_nav(preset)
            } else {
                ExperimentConfig::default_tabletop(preset)
            };
            c.validate()
                .map_err(anyhow::Error::from)
                .and_then(|_| Ok(c.to_json()?))
                .map(|s| {
                    println!("{s}");
                    true
                })
        }
    };
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(EXIT_CHECK),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(if usage_error(&e) { EXIT_USAGE } else { EXIT_CHECK })
        }
    }
}
