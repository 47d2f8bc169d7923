use std::fs::File;
use std::io::BufWriter;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};
use novikov_core::experiments::{Harness, EXPERIMENTS};
use novikov_core::snapshot::write_snapshot;
use novikov_core::{ExperimentConfig, ExperimentReport};

/// Spectral experiments for the two-component Novikov system.
#[derive(Debug, Parser)]
#[command(name = "novikov", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    #[command(flatten)]
    overrides: Overrides,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Partition, block and operator identities plus integrator checks.
    PartitionCheck,
    /// Norm ladders and identities of the initial data.
    Norms,
    /// Solution-to-data distance along the plain family.
    Prop1,
    /// First-order drift expansion along the perturbed family.
    Prop2,
    /// Divergence of the plain and perturbed solutions.
    Theorem,
    /// Every experiment above, sharing one set of trajectories.
    All,
}

#[derive(Debug, Args)]
struct Overrides {
    /// JSON configuration; flags below override its fields.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory for CSV and JSON results.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true)]
    n_min: Option<u32>,
    #[arg(long, global = true)]
    n_max: Option<u32>,
    #[arg(long, global = true)]
    grid_points: Option<usize>,
    #[arg(long, global = true)]
    half_width: Option<f64>,
    #[arg(long, global = true)]
    s: Option<f64>,
    #[arg(long, global = true)]
    p: Option<f64>,
    #[arg(long, global = true)]
    r: Option<f64>,
    /// Also write each data family as a binary snapshot.
    #[arg(long, global = true)]
    snapshots: bool,
}

impl Overrides {
    fn resolve(&self) -> Result<ExperimentConfig> {
        let mut cfg = match &self.config {
            Some(path) => ExperimentConfig::from_json_file(path)
                .with_context(|| format!("reading config {}", path.display()))?,
            None => ExperimentConfig::default(),
        };
        if let Some(out) = &self.out {
            cfg.out_dir = out.to_string_lossy().into_owned();
        }
        cfg.n_min = self.n_min.unwrap_or(cfg.n_min);
        cfg.n_max = self.n_max.unwrap_or(cfg.n_max);
        cfg.n_points = self.grid_points.unwrap_or(cfg.n_points);
        cfg.half_width = self.half_width.unwrap_or(cfg.half_width);
        cfg.besov.s = self.s.unwrap_or(cfg.besov.s);
        cfg.besov.p = self.p.unwrap_or(cfg.besov.p);
        cfg.besov.r = self.r.unwrap_or(cfg.besov.r);
        Ok(cfg)
    }
}

fn print_summary(report: &ExperimentReport) {
    for c in &report.criteria {
        println!(
            "{} {}/{}: value {:e}, bound {:e} ({})",
            if c.passed { "PASS" } else { "FAIL" },
            report.experiment,
            c.name,
            c.value,
            c.bound,
            c.detail
        );
    }
    for (name, ok) in &report.flags {
        if !ok {
            println!("NOTE {}/{name} does not hold", report.experiment);
        }
    }
}

fn run(cli: &Cli) -> Result<bool> {
    let cfg = cli.overrides.resolve()?;
    let harness = Harness::new(&cfg).context("invalid configuration")?;
    let out = PathBuf::from(&cfg.out_dir);
    if cli.overrides.snapshots {
        std::fs::create_dir_all(&out)?;
        for fam in harness.families() {
            let path = out.join(format!("family_n{}.bin", fam.index.n));
            let file = BufWriter::new(File::create(&path)?);
            write_snapshot(
                file,
                &[
                    ("phi", &fam.phi),
                    ("f_n", &fam.f_n),
                    ("g_n", &fam.g_n),
                    ("w0", &fam.w0),
                    ("v0", &fam.v0),
                ],
            )
            .with_context(|| format!("writing {}", path.display()))?;
        }
    }
    let names: &[&str] = match cli.command {
        Command::PartitionCheck => &["partition-check"],
        Command::Norms => &["norms"],
        Command::Prop1 => &["prop1"],
        Command::Prop2 => &["prop2"],
        Command::Theorem => &["theorem"],
        Command::All => &EXPERIMENTS,
    };
    let mut all_passed = true;
    for name in names {
        log::info!("running {name}");
        let report = harness.run(name).with_context(|| format!("experiment {name}"))?;
        report.write(&out).with_context(|| format!("writing results to {}", out.display()))?;
        print_summary(&report);
        all_passed &= report.passed();
    }
    Ok(all_passed)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
