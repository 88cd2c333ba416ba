use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use stabilizer_cli::{
    demo_fixedpoint, init_threads, run_scenario, sweep, CliError, ScenarioConfig, SweepParam,
};

#[derive(Parser)]
#[command(
    name = "stabilizer",
    version,
    about = "Stabilize approximate involutions and verify the result"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one scenario and write manifest.json, report.json and trace.csv.
    Run {
        config: PathBuf,
        /// Output directory [default: out/<config stem>]
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Re-run a scenario for each value of one parameter.
    Sweep {
        config: PathBuf,
        /// theta, r, dim or num_probes
        #[arg(long)]
        param: String,
        #[arg(long, value_delimiter = ',', required = true)]
        values: Vec<String>,
        /// Output directory [default: out/<config stem>-<param>]
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Print the fixed-point alternative on three scalar examples.
    DemoFixedpoint,
}

fn stem(path: &Path) -> String {
    path.file_stem()
        .map_or_else(|| "scenario".into(), |s| s.to_string_lossy().into_owned())
}

fn real_main(cli: Cli) -> Result<(), CliError> {
    init_threads()?;
    match cli.command {
        Command::Run { config, out } => {
            let cfg = ScenarioConfig::load(&config)?;
            let out = out.unwrap_or_else(|| Path::new("out").join(stem(&config)));
            let (report, files) = run_scenario(&cfg, &out)?;
            println!(
                "{}: bound {} (max ratio {}), laws {}, cstar {}{}",
                files.dir.display(),
                verdict(report.bound.pass),
                report.bound.max_ratio,
                verdict(report.laws.pass()),
                verdict(report.cstar.pass),
                report
                    .uniqueness
                    .as_ref()
                    .map_or(String::new(), |u| format!(
                        ", uniqueness {}",
                        verdict(u.pass)
                    )),
            );
            Ok(())
        }
        Command::Sweep {
            config,
            param,
            values,
            out,
        } => {
            let param: SweepParam = param.parse()?;
            let cfg = ScenarioConfig::load(&config)?;
            let out = out.unwrap_or_else(|| {
                Path::new("out").join(format!("{}-{}", stem(&config), param.name()))
            });
            let rows = sweep(&cfg, param, &values, &out)?;
            let mut first_error = None;
            for row in rows {
                match row.outcome {
                    Ok(r) => println!(
                        "{}={}: L {} bound {} laws {}",
                        param.name(),
                        row.value,
                        r.direction.lipschitz,
                        verdict(r.bound.pass),
                        verdict(r.laws.pass())
                    ),
                    Err(e) => {
                        eprintln!("{}={}: {e}", param.name(), row.value);
                        first_error.get_or_insert(e);
                    }
                }
            }
            first_error.map_or(Ok(()), Err)
        }
        Command::DemoFixedpoint => {
            let cases = demo_fixedpoint()?;
            println!(
                "{}",
                serde_json::to_string_pretty(&cases).expect("demo serializes")
            );
            Ok(())
        }
    }
}

fn verdict(pass: bool) -> &'static str {
    if pass {
        "pass"
    } else {
        "FAIL"
    }
}

fn main() -> ExitCode {
    match real_main(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
