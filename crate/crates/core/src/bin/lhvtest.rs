use std::fs;
use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use lhvtest::config::ConfigFile;
use lhvtest::conformance::verify_lhv;
use lhvtest::inequalities::{bound_d, bound_f, RTot};
use lhvtest::lhv::{Family, QuadratureSpec};
use lhvtest::pipeline::{
    file_digest, ingest_records, plot_data, report_json, run_report, save_records, write_records, BackgroundMode,
    Provenance, RecordSet, ReportOptions,
};
use lhvtest::sim::simulate_scan;
use lhvtest::{DetectionEfficiency, Error, ExperimentConfig, Result, UncertainValue};

#[derive(Parser)]
#[command(name = "lhvtest", version, about = "Local-realism tests without fair sampling")]
struct Cli {
    /// On failure, print {"error": kind, "message": ...} to stderr.
    #[arg(long, global = true)]
    error_json: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum FamilyArg {
    OneTier,
    TwoTier,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate a full scan plus background run and write the records CSV.
    Simulate {
        /// TOML config; the reference settings when omitted.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
        /// Output CSV; stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Analyze a records CSV and print the JSON report.
    Analyze {
        records: PathBuf,
        #[arg(long, default_value_t = 0.62)]
        eta: f64,
        /// Measured polarizer-free coincidence rate; 4 × scan mean when omitted.
        #[arg(long)]
        r_tot: Option<f64>,
        #[arg(long, default_value_t = 0.0, requires = "r_tot")]
        r_tot_sigma: f64,
        /// Match background records to signal angles instead of pooling them.
        #[arg(long)]
        per_angle_background: bool,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Also write `phi_rad, rate, sigma, model_rate` CSV here.
        #[arg(long)]
        plot_data: Option<PathBuf>,
    },
    /// Check both bounds against sampled hidden-variable models.
    VerifyLhv {
        #[arg(long, default_value_t = 200)]
        seeds: u64,
        #[arg(long, default_value_t = 0.62)]
        eta: f64,
        #[arg(long, value_enum, default_value = "one-tier")]
        family: FamilyArg,
        /// Config file whose [quadrature] section is used.
        #[arg(long)]
        config: Option<PathBuf>,
        /// Include per-model verdicts in the output.
        #[arg(long)]
        verbose: bool,
    },
    /// Tabulate F(η, V_B) and D(η, V).
    Bounds {
        #[arg(long, num_args = 1.., default_values_t = [0.62])]
        eta: Vec<f64>,
        #[arg(long, default_value_t = 1.0)]
        vb: f64,
        /// Fringe parameter for D; defaults to --vb.
        #[arg(long)]
        v: Option<f64>,
        #[arg(long)]
        json: bool,
    },
}

fn write_output(path: Option<&PathBuf>, text: &str) -> Result<()> {
    match path {
        Some(p) => fs::write(p, text)?,
        None => match io::stdout().lock().write_all(text.as_bytes()) {
            // a closed pipe (`| head`) is not a failure
            Err(e) if e.kind() == io::ErrorKind::BrokenPipe => {}
            other => other?,
        },
    }
    Ok(())
}

fn print(text: String) -> Result<()> {
    write_output(None, &(text + "\n"))
}

fn run(command: Command) -> Result<()> {
    match command {
        Command::Simulate { config, seed, out } => {
            let (cfg, n) = match config {
                Some(path) => {
                    let file = ConfigFile::load(path)?;
                    (file.experiment, file.grid.n)
                }
                None => (ExperimentConfig::reference(), 8),
            };
            let seed = seed.unwrap_or(cfg.seed);
            let (signal, background) = simulate_scan(&cfg, n, seed)?;
            let set = RecordSet::from_runs(&signal, &background);
            match out {
                Some(path) => save_records(path, &set),
                None => {
                    let mut buf = Vec::new();
                    write_records(&mut buf, &set)?;
                    write_output(None, &String::from_utf8_lossy(&buf))
                }
            }
        }
        Command::Analyze {
            records,
            eta,
            r_tot,
            r_tot_sigma,
            per_angle_background,
            out,
            plot_data: plot_path,
        } => {
            let set = ingest_records(&records)?;
            let options = ReportOptions {
                eta: DetectionEfficiency::new(eta)?,
                r_tot: match r_tot {
                    Some(v) => RTot::Measured(UncertainValue::new(v, r_tot_sigma)?),
                    None => RTot::ScanMean,
                },
                background: if per_angle_background {
                    BackgroundMode::PerAngle
                } else {
                    BackgroundMode::Shared
                },
            };
            let provenance = Provenance {
                input_sha256: Some(file_digest(&records)?),
                ..Default::default()
            };
            let report = run_report(&set, &options, provenance)?;
            if let Some(p) = plot_path {
                fs::write(p, plot_data(&report))?;
            }
            write_output(out.as_ref(), &(report_json(&report) + "\n"))
        }
        Command::VerifyLhv {
            seeds,
            eta,
            family,
            config,
            verbose,
        } => {
            let quad = match config {
                Some(p) => ConfigFile::load(p)?.quadrature,
                None => QuadratureSpec::default(),
            };
            let family = match family {
                FamilyArg::OneTier => Family::OneTier,
                FamilyArg::TwoTier => Family::TwoTier,
            };
            let mut summary = verify_lhv(seeds, DetectionEfficiency::new(eta)?, family, &quad)?;
            let passed = summary.passed();
            if !verbose {
                summary.verdicts.clear();
            }
            let mut doc = serde_json::to_value(&summary)?;
            doc["passed"] = passed.into();
            print(serde_json::to_string_pretty(&doc)?)?;
            if passed {
                Ok(())
            } else {
                Err(Error::Statistics(
                    "a sampled model exceeds a bound it should satisfy".into(),
                ))
            }
        }
        Command::Bounds { eta, vb, v, json } => {
            let v = v.unwrap_or(vb);
            let mut rows = Vec::new();
            for e in eta {
                let e = DetectionEfficiency::new(e)?;
                let f = bound_f(e, UncertainValue::exact(vb)).value;
                let d = bound_d(e, UncertainValue::exact(v))?.value;
                rows.push(serde_json::json!({"eta": e.value(), "vb": vb, "v": v, "F": f, "D": d}));
            }
            if json {
                print(serde_json::to_string_pretty(&rows)?)
            } else {
                let mut table = format!("{:>8} {:>8} {:>8} {:>10} {:>10}", "eta", "V_B", "V", "F", "D");
                for r in &rows {
                    table += &format!(
                        "\n{:>8.4} {:>8.4} {:>8.4} {:>10.6} {:>10.6}",
                        r["eta"].as_f64().unwrap_or(f64::NAN),
                        vb,
                        v,
                        r["F"].as_f64().unwrap_or(f64::NAN),
                        r["D"].as_f64().unwrap_or(f64::NAN)
                    );
                }
                print(table)
            }
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            if cli.error_json {
                eprintln!("{}", serde_json::json!({"error": e.kind(), "message": e.to_string()}));
            } else {
                eprintln!("error: {e}");
            }
            ExitCode::FAILURE
        }
    }
}
