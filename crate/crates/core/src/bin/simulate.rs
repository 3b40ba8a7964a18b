use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;

use airshed::harness::{
    epsilon_sweep_with, exit_code, load_config, run_simulation_with, RunOptions, EXIT_CONFIG,
};

/// Runs the anisotropic or hydrostatic model, or an aspect-ratio sweep.
#[derive(Parser, Debug)]
#[command(name = "simulate", version)]
struct Cli {
    /// Run configuration (`[section]` / `key = value`).
    config: PathBuf,
    /// Overrides `[run] mode`.
    #[arg(long, value_parser = ["aniso", "hydro", "sweep"])]
    mode: Option<String>,
    /// Aspect ratio of a single run; replaces `eps_list` in a sweep.
    #[arg(long)]
    eps: Option<f64>,
    /// Overrides `[run] output_dir`.
    #[arg(long)]
    out: Option<PathBuf>,
    /// No progress output.
    #[arg(long)]
    quiet: bool,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let mut cfg = match load_config(&cli.config) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(EXIT_CONFIG as u8);
        }
    };
    if let Some(m) = &cli.mode {
        cfg.run.mode = m.parse().expect("validated by clap");
    }
    if let Some(eps) = cli.eps {
        if !(eps > 0.0 && eps <= 1.0) {
            eprintln!("error: --eps {eps} must lie in (0, 1]");
            return ExitCode::from(EXIT_CONFIG as u8);
        }
        cfg.run.eps_list = vec![eps];
    }
    if let Some(out) = cli.out {
        cfg.run.output_dir = out;
    }
    let verbose = !cli.quiet;
    let result = match cfg.run.mode.single() {
        Some(mode) => {
            let opts = RunOptions {
                verbose,
                ..RunOptions::default()
            };
            run_simulation_with(&cfg, cfg.run.eps_list[0], mode, &opts).map(|a| {
                if verbose {
                    println!(
                        "{} finished: {} steps, outputs in {}",
                        a.run_id,
                        a.steps,
                        a.dir.display()
                    );
                }
            })
        }
        None => epsilon_sweep_with(&cfg, verbose).map(|r| {
            if verbose {
                println!("eps,err_uH,err_u3,err_C");
                for row in &r.convergence.rows {
                    println!(
                        "{},{:e},{:e},{:e}",
                        row.eps, row.err_uh, row.err_u3, row.err_c
                    );
                }
            }
        }),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e) as u8)
        }
    }
}
