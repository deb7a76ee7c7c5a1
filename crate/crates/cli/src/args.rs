//! Command-line grammar.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use crate::config::Overrides;
use crate::presets::FigureId;

#[derive(Debug, Parser)]
#[command(
    name = "cavity-ladder",
    version,
    about = "Probe absorption of a ladder atom in a thermal bad cavity"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Steady-state populations, decay rates and linewidths.
    Steady {
        #[command(flatten)]
        scenario: ScenarioArgs,
        /// Print JSON instead of labeled text.
        #[arg(long)]
        json: bool,
    },
    /// Absorption spectrum as CSV.
    Spectrum {
        #[command(flatten)]
        scenario: ScenarioArgs,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Linewidths from closed forms, eigenvalues, the sampled trace and an optional fit.
    Linewidth {
        #[command(flatten)]
        scenario: ScenarioArgs,
        /// Fit this many Lorentzians (1 or 2).
        #[arg(long, value_parser = clap::value_parser!(u8).range(1..=2))]
        fit: Option<u8>,
        #[arg(long)]
        json: bool,
    },
    /// Regenerate the panels of a figure.
    Reproduce {
        figure: FigureId,
        #[arg(long, default_value = ".")]
        outdir: PathBuf,
        #[arg(long, value_name = "FORM")]
        bloch_form: Option<String>,
        #[arg(long)]
        log_y: bool,
    },
    /// Compare the reduced model against the full atom-cavity model.
    Validate {
        #[command(flatten)]
        scenario: ScenarioArgs,
        /// Fock cutoff; chosen from the thermal tail when omitted.
        #[arg(long)]
        n_max: Option<usize>,
        #[arg(long, default_value_t = 0.02)]
        pop_tol: f64,
        #[arg(long, default_value_t = 0.10)]
        fwhm_tol: f64,
        /// Coupling of the baseline run for the shrink check.
        #[arg(long, allow_negative_numbers = true)]
        baseline_g: Option<f64>,
        #[arg(long, default_value_t = 4.0)]
        min_shrink: f64,
    },
}

#[derive(Debug, Args, Default)]
pub struct ScenarioArgs {
    /// Coupling on 0-1, real or complex such as 3+4i.
    #[arg(long, allow_hyphen_values = true)]
    pub g01: Option<String>,
    /// Coupling on 1-2.
    #[arg(long, allow_hyphen_values = true)]
    pub g12: Option<String>,
    #[arg(long, allow_negative_numbers = true)]
    pub kappa: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub delta: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub big_delta: Option<f64>,
    /// Mean thermal photon number.
    #[arg(long, allow_negative_numbers = true)]
    pub n_th: Option<f64>,
    /// Interference switch. When omitted, spectra carry eta = 1 and eta = 0 columns.
    #[arg(long, allow_negative_numbers = true)]
    pub eta: Option<f64>,
    /// 01, 12 or two-photon.
    #[arg(long)]
    pub probe: Option<String>,
    #[arg(long, allow_negative_numbers = true)]
    pub omega_min: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub omega_max: Option<f64>,
    #[arg(long)]
    pub points: Option<usize>,
    /// peak or none.
    #[arg(long)]
    pub normalize: Option<String>,
    /// published or master-equation.
    #[arg(long, value_name = "FORM")]
    pub bloch_form: Option<String>,
    /// key = value file applied under explicit flags.
    #[arg(long)]
    pub config: Option<PathBuf>,
}

impl ScenarioArgs {
    pub fn overrides(&self) -> Overrides {
        Overrides {
            g01: self.g01.clone(),
            g12: self.g12.clone(),
            kappa: self.kappa,
            delta: self.delta,
            big_delta: self.big_delta,
            n_th: self.n_th,
            eta: self.eta,
            probe: self.probe.clone(),
            omega_min: self.omega_min,
            omega_max: self.omega_max,
            points: self.points,
            normalize: self.normalize.clone(),
            bloch_form: self.bloch_form.clone(),
        }
    }
}

#[derive(Debug, Args, Default)]
pub struct OutputArgs {
    /// CSV destination; stdout when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub svg: Option<PathBuf>,
    #[arg(long)]
    pub log_y: bool,
}
