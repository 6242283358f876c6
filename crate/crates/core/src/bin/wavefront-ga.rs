use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use wavefront_ga::harness::{self, ExperimentConfig};
use wavefront_ga::{Error, Result};

#[derive(Parser)]
#[command(name = "wavefront-ga", version, about = "Genetic-algorithm wavefront shaping simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// One GA run: writes trace.csv and summary.json.
    Run(Common),
    /// One run per decay factor on a shared medium.
    Sweep(Common),
    /// Repeated runs from fresh populations.
    Repeat(Common),
    /// Recompute summary.json from a trace.
    Analyze {
        trace: PathBuf,
        /// Seed to record in the summary.
        #[arg(long)]
        seed: Option<u64>,
        /// Write summary.json here instead of printing it.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Timing model of a hardware profile.
    Timing {
        /// Built-in profile name or profile file.
        #[arg(long, default_value = "virtex5")]
        profile: String,
        #[arg(long, default_value_t = 2000)]
        iterations: u64,
        #[arg(long)]
        json: bool,
    },
}

#[derive(Args)]
struct Common {
    /// key=value configuration file.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Built-in profile name or profile file; attaches model time to traces.
    #[arg(long)]
    profile: Option<String>,
    /// Detector noise in volts.
    #[arg(long)]
    noise_sigma: Option<f64>,
    /// Also write SVG plots.
    #[arg(long)]
    svg: bool,
    /// Override any configuration key (repeatable).
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
}

impl Common {
    fn config(&self) -> Result<ExperimentConfig> {
        let mut cfg = match &self.config {
            Some(p) => ExperimentConfig::load(p)?,
            None => ExperimentConfig::default(),
        };
        for kv in &self.set {
            let (k, v) = kv
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("--set expects KEY=VALUE, got {kv:?}")))?;
            cfg.set(k.trim(), v.trim())?;
        }
        if let Some(s) = self.seed {
            cfg.seed = s;
        }
        if let Some(o) = &self.out {
            cfg.out = o.clone();
        }
        if let Some(p) = &self.profile {
            cfg.set("profile", p)?;
        }
        if let Some(n) = self.noise_sigma {
            cfg.noise_sigma = n;
            cfg.noise_relative = 0.0;
        }
        cfg.svg |= self.svg;
        cfg.validate()?;
        Ok(cfg)
    }
}

fn main() -> ExitCode {
    match execute(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

fn execute(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Run(c) => {
            let cfg = c.config()?;
            let o = harness::run_to_dir(&cfg)?;
            println!(
                "final enhancement {:.2}, optimal stop {} (η = {:.3}), wrote {}",
                o.summary.final_enhancement,
                o.summary.optimal_stop,
                o.summary.max_eta,
                cfg.out.display()
            );
        }
        Command::Sweep(c) => {
            let cfg = c.config()?;
            let s = harness::sweep_to_dir(&cfg)?;
            for r in &s.runs {
                println!(
                    "D = {}: final enhancement {:.2}, optimal stop {}",
                    r.decay, r.outcome.summary.final_enhancement, r.outcome.summary.optimal_stop
                );
            }
            println!("wrote {}", cfg.out.display());
        }
        Command::Repeat(c) => {
            let cfg = c.config()?;
            let r = harness::repeat_to_dir(&cfg)?;
            println!(
                "{} repeats: mean final enhancement {:.2}, CV {:.4}, wrote {}",
                r.records.len(),
                r.mean,
                r.cv,
                cfg.out.display()
            );
        }
        Command::Analyze { trace, seed, out } => {
            let json = harness::analyze(&trace, seed)?.to_json();
            match out {
                Some(dir) => harness::write_atomic(&dir.join("summary.json"), json.as_bytes())?,
                None => print!("{json}"),
            }
        }
        Command::Timing { profile, iterations, json } => {
            let t = harness::timing_report(&profile, iterations)?;
            if json {
                println!("{}", serde_json::to_string_pretty(&t).expect("timing serializes"));
            } else {
                print!("{}", t.table());
            }
        }
    }
    Ok(())
}
