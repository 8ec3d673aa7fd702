use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use pfrac::bench::{self, report};
use pfrac::schemes::Scheme;

#[derive(Parser)]
#[command(name = "pfrac", version, about = "Phase-field fracture benchmarks")]
struct Cli {
    #[command(subcommand)]
    cmd: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one benchmark with one scheme.
    Run {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        scheme: Option<Scheme>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run all four schemes and write a comparison table.
    Sweep {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, value_parser = ["all"])]
        schemes: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = Cli::parse();
    let result = match cli.cmd {
        Command::Run { config, scheme, out } => bench::parse_config(&config).and_then(|mut cfg| {
            if let Some(s) = scheme {
                cfg.scheme = s;
            }
            if let Some(o) = out {
                cfg.output.dir = o;
            }
            let rep = bench::run_benchmark(&cfg)?;
            let s = rep.summary();
            println!(
                "{} {}: {} steps, max n_stag {}, total n_stag {}, peak force {:e}, {:.2} s",
                cfg.problem.name(),
                s.scheme,
                rep.rows.len(),
                s.max_n_stag,
                s.total_n_stag,
                s.peak_force,
                rep.total_wall()
            );
            Ok(())
        }),
        Command::Sweep { config, out, .. } => bench::parse_config(&config).and_then(|mut cfg| {
            if let Some(o) = out {
                cfg.output.dir = o;
            }
            let rows = bench::sweep(&cfg)?;
            println!("{}", report::SWEEP_HEADER.join(","));
            for r in rows {
                println!(
                    "{},{},{},{},{},{:e}",
                    r.scheme, r.max_n_stag, r.total_n_stag, r.total_nr_u, r.total_nr_d, r.peak_force
                );
            }
            Ok(())
        }),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
