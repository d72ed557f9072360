use std::path::PathBuf;

use clap::{Parser, ValueEnum};
use kicked_ising::eigenstate::{PerturbParam, Perturbation};
use kicked_ising::spectral::MAX_ORDER;
use kicked_ising::{CouplingSpec, Error, Result, SectorChoice, Unfolding};

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum Command {
    EntropySeries,
    Period,
    Spectrum,
    Spacings,
    Ratios,
    Rbar,
    EigenstateEe,
    QktMap,
    OracleCheck,
}

impl Command {
    pub fn as_str(self) -> &'static str {
        match self {
            Command::EntropySeries => "entropy-series",
            Command::Period => "period",
            Command::Spectrum => "spectrum",
            Command::Spacings => "spacings",
            Command::Ratios => "ratios",
            Command::Rbar => "rbar",
            Command::EigenstateEe => "eigenstate-ee",
            Command::QktMap => "qkt-map",
            Command::OracleCheck => "oracle-check",
        }
    }
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

/// Kicked infinite-range Ising chain at tau = m*pi/2.
///
/// Prints a one-line JSON summary on stdout and, with --out, writes the
/// tabular result as CSV or JSON.
#[derive(Parser, Debug)]
#[command(name = "kising", version)]
pub struct Cli {
    #[arg(long, value_enum)]
    pub command: Command,
    /// Qubit counts, comma separated.
    #[arg(long, value_delimiter = ',', required = true)]
    pub n: Vec<usize>,
    /// "r/h", "sqrt(b)/c" or a decimal.
    #[arg(long)]
    pub coupling: Option<String>,
    #[arg(long, default_value_t = 1)]
    pub tau_m: i64,
    #[arg(long, allow_hyphen_values = true)]
    pub theta0: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub phi0: Option<f64>,
    #[arg(long)]
    pub kicks: Option<u64>,
    /// Spacing or ratio order.
    #[arg(long, default_value_t = 1)]
    pub k: usize,
    #[arg(long, default_value_t = 50)]
    pub bins: usize,
    /// J or tau.
    #[arg(long)]
    pub perturb: Option<String>,
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    pub delta: f64,
    /// plus, minus or pooled.
    #[arg(long, default_value = "plus")]
    pub sector: String,
    /// rank or local:W.
    #[arg(long, default_value = "rank")]
    pub unfold: String,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "csv")]
    pub format: Format,
}

#[derive(Clone, Debug)]
pub struct RunConfig {
    pub command: Command,
    pub ns: Vec<usize>,
    pub coupling_text: String,
    pub coupling: CouplingSpec,
    pub tau_m: i64,
    pub theta0: Option<f64>,
    pub phi0: Option<f64>,
    pub kicks: Option<u64>,
    pub k: usize,
    pub bins: usize,
    pub perturbation: Option<Perturbation>,
    pub sector: SectorChoice,
    pub unfold: Unfolding,
    pub out: Option<PathBuf>,
    pub format: Format,
}

fn require<T: Copy>(value: Option<T>, flag: &str, command: Command) -> Result<T> {
    value.ok_or_else(|| Error::Argument(format!("--{flag} is required for {}", command.as_str())))
}

impl RunConfig {
    /// Checks every command-specific requirement before any computation.
    pub fn from_cli(cli: Cli) -> Result<Self> {
        let command = cli.command;
        if cli.n.is_empty() || cli.n.contains(&0) {
            return Err(Error::Argument("--n needs positive qubit counts".into()));
        }
        let coupling_text = cli
            .coupling
            .ok_or_else(|| Error::Argument("--coupling is required".into()))?;
        let coupling: CouplingSpec = coupling_text.parse()?;
        if cli.tau_m < 1 {
            return Err(Error::Argument("--tau-m must be at least 1".into()));
        }
        let perturbation = match cli.perturb.as_deref() {
            Some(p) => Some(Perturbation::new(p.parse()?, cli.delta)?),
            None if cli.delta != 0.0 => {
                return Err(Error::Argument("--delta needs --perturb".into()));
            }
            None => None,
        };
        match command {
            Command::EntropySeries | Command::QktMap => {
                require(cli.theta0, "theta0", command)?;
                require(cli.phi0, "phi0", command)?;
                require(cli.kicks, "kicks", command)?;
            }
            Command::EigenstateEe => {
                require(perturbation, "perturb", command)?;
            }
            Command::Spacings | Command::Ratios => {
                if !(1..=MAX_ORDER).contains(&cli.k) {
                    return Err(Error::Argument(format!("--k must lie in 1..={MAX_ORDER}")));
                }
                if cli.bins == 0 {
                    return Err(Error::Argument("--bins must be at least 1".into()));
                }
            }
            _ => {}
        }
        if matches!(
            command,
            Command::Spectrum | Command::Spacings | Command::Ratios | Command::Rbar
        ) && perturbation.is_some_and(|p| p.param == PerturbParam::Tau)
        {
            return Err(Error::Argument(
                "spectral commands accept only --perturb J".into(),
            ));
        }
        Ok(Self {
            command,
            ns: cli.n,
            coupling_text,
            coupling,
            tau_m: cli.tau_m,
            theta0: cli.theta0,
            phi0: cli.phi0,
            kicks: cli.kicks,
            k: cli.k,
            bins: cli.bins,
            perturbation,
            sector: cli.sector.parse()?,
            unfold: cli.unfold.parse()?,
            out: cli.out,
            format: cli.format,
        })
    }

    /// Coupling with any J perturbation applied.
    pub fn effective_coupling(&self) -> CouplingSpec {
        match self.perturbation {
            Some(p) if p.param == PerturbParam::J && p.delta != 0.0 => self.coupling.perturbed(p.delta),
            _ => self.coupling.clone(),
        }
    }
}
