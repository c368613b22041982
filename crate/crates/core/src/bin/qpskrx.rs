use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, ValueEnum};
use qpsk_receiver::{load_config, run, Grid, Mode, Overrides};

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Switch {
    On,
    Off,
}

impl From<Switch> for bool {
    fn from(s: Switch) -> bool {
        matches!(s, Switch::On)
    }
}

/// Adaptive displacement receiver for QPSK: bounds, exact enumeration and
/// Monte Carlo sweeps written as CSV.
#[derive(Debug, Parser)]
#[command(name = "qpskrx", version)]
struct Cli {
    /// bounds, sweep, delay-sweep, efficiency-sweep, stages-sweep or enumerate
    mode: Mode,
    /// JSON config, or a previous CSV result whose header is reused
    #[arg(long)]
    config: Option<PathBuf>,
    /// Signal mean photon numbers as start:stop:points[:log]
    #[arg(long)]
    alpha_sq_grid: Option<Grid>,
    #[arg(long)]
    m: Option<usize>,
    #[arg(long)]
    trials: Option<u64>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    eta_t: Option<f64>,
    #[arg(long)]
    eta_spd: Option<f64>,
    #[arg(long)]
    xi: Option<f64>,
    /// Dark counts per signal state
    #[arg(long)]
    nu: Option<f64>,
    /// Discard window per bin boundary in microseconds
    #[arg(long = "dt-us")]
    delta_t_us: Option<f64>,
    #[arg(long)]
    truth_delay: Option<Switch>,
    #[arg(long)]
    discard_loss: Option<Switch>,
    /// Discard windows for delay-sweep, start:stop:points
    #[arg(long)]
    dt_grid: Option<Grid>,
    /// Comma-separated detector efficiencies for efficiency-sweep
    #[arg(long, value_delimiter = ',')]
    eta_spd_grid: Option<Vec<f64>>,
    #[arg(long)]
    m_min: Option<usize>,
    #[arg(long)]
    m_max: Option<usize>,
    /// CSV destination; stdout when absent
    #[arg(long)]
    out: Option<String>,
    /// Also write a JSON mirror (next to --out, or to stdout instead of CSV)
    #[arg(long)]
    json: bool,
    /// Worker threads; all cores when absent
    #[arg(long)]
    threads: Option<usize>,
}

impl Cli {
    fn overrides(&self) -> Overrides {
        Overrides {
            mode: Some(self.mode),
            alpha_sq_grid: self.alpha_sq_grid,
            m: self.m,
            trials: self.trials,
            seed: self.seed,
            eta_t: self.eta_t,
            eta_spd: self.eta_spd,
            xi: self.xi,
            nu: self.nu,
            delta_t_us: self.delta_t_us,
            truth_delay: self.truth_delay.map(bool::from),
            discard_loss: self.discard_loss.map(bool::from),
            eta_spd_grid: self.eta_spd_grid.clone(),
            dt_grid: self.dt_grid,
            m_min: self.m_min,
            m_max: self.m_max,
            out: self.out.clone(),
            json: self.json.then_some(true),
        }
    }
}

fn execute(cli: &Cli) -> qpsk_receiver::Result<()> {
    let cfg = load_config(cli.config.as_deref(), &cli.overrides())?;
    if let Some(n) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| qpsk_receiver::Error::Config(format!("threads: {e}")))?;
    }
    let table = run(&cfg)?;
    match &cfg.out {
        Some(path) => {
            std::fs::write(path, table.to_csv())?;
            if cfg.json {
                std::fs::write(Path::new(path).with_extension("json"), table.to_json())?;
            }
        }
        None if cfg.json => print!("{}", table.to_json()),
        None => print!("{}", table.to_csv()),
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("qpskrx: {e}");
            ExitCode::FAILURE
        }
    }
}
