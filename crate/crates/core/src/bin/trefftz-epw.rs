use clap::{Parser, Subcommand};
use std::path::PathBuf;
use std::process::ExitCode;

use trefftz_epw::config::ExperimentConfig;
use trefftz_epw::experiment;

#[derive(Parser)]
#[command(name = "trefftz-epw", version, about = "Plane-wave Trefftz solver experiments for the 2D Helmholtz equation")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// INI configuration file; built-in defaults when omitted
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Override the wavenumber
    #[arg(long, global = true)]
    kappa: Option<f64>,
    /// Override the output directory
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Large-scale settings (kappa = 128, P up to 815)
    #[arg(long, global = true)]
    full: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Point-source error and coefficient size against the budget P
    Convergence,
    /// Both bases at P = 4 kappa over a list of wavenumbers
    Ksweep,
    /// Coefficient norms of circular-wave fits on the unit disc
    Stability,
    /// Write the configured mesh in ASCII format
    Mesh,
    /// Run the built-in consistency checks
    Selftest,
}

fn load(cli: &Cli) -> trefftz_epw::Result<ExperimentConfig> {
    let mut cfg = match &cli.config {
        Some(path) => ExperimentConfig::load(path)?,
        None => ExperimentConfig::default(),
    };
    if cli.full {
        cfg.apply_full();
    }
    if let Some(k) = cli.kappa {
        cfg.kappa = k;
    }
    if let Some(out) = &cli.out {
        cfg.out_dir = out.clone();
    }
    cfg.validate()?;
    Ok(cfg)
}

fn run(cli: &Cli) -> trefftz_epw::Result<bool> {
    if let Command::Selftest = cli.command {
        let results = experiment::selftest();
        println!("{:<32} {:>12} {:>12}  result", "check", "value", "tolerance");
        for r in &results {
            let verdict = if r.passed() { "pass" } else { "FAIL" };
            println!("{:<32} {:>12.3e} {:>12.1e}  {verdict}", r.name, r.value, r.tolerance);
        }
        return Ok(results.iter().all(|r| r.passed()));
    }
    let cfg = load(cli)?;
    match cli.command {
        Command::Convergence => {
            for path in experiment::cmd_convergence(&cfg)? {
                println!("{}", path.display());
            }
        }
        Command::Ksweep => println!("{}", experiment::cmd_ksweep(&cfg)?.display()),
        Command::Stability => println!("{}", experiment::cmd_stability(&cfg)?.display()),
        Command::Mesh => {
            let mesh = cfg.mesh.build()?;
            let path = cfg.out_dir.join("mesh.txt");
            experiment::write_atomic(&path, &mesh.to_ascii())?;
            println!(
                "{}: {} vertices, {} triangles, {} edges ({} boundary)",
                path.display(),
                mesh.vertices().len(),
                mesh.num_elements(),
                mesh.edges().len(),
                mesh.boundary_edges().len()
            );
        }
        Command::Selftest => unreachable!(),
    }
    Ok(true)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
