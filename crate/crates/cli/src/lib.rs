//! Command-line front end for `cavity-ladder`.

pub mod args;
pub mod commands;
pub mod config;
pub mod error;
pub mod format;
pub mod presets;
pub mod svg;

use args::{Cli, Command};
use cavity_ladder::BlochForm;
use error::CliError;

/// Output of one invocation.
#[derive(Debug, Default)]
pub struct Outcome {
    pub stdout: String,
    pub warnings: Vec<String>,
}

/// Runs a parsed command line.
pub fn run(cli: Cli) -> Result<Outcome, (CliError, Outcome)> {
    let mut outcome = Outcome::default();
    match execute(cli, &mut outcome) {
        Ok(()) => Ok(outcome),
        Err(e) => Err((e, outcome)),
    }
}

fn execute(cli: Cli, o: &mut Outcome) -> Result<(), CliError> {
    match cli.command {
        Command::Steady { scenario, json } => {
            let s = config::scenario(scenario.overrides(), scenario.config.as_deref())?;
            o.warnings.extend(s.warnings.iter().cloned());
            o.stdout = commands::steady(&s, json)?;
        }
        Command::Spectrum { scenario, output } => {
            let s = config::scenario(scenario.overrides(), scenario.config.as_deref())?;
            o.warnings.extend(s.warnings.iter().cloned());
            o.stdout = commands::spectrum(&s, output.out.as_deref(), output.svg.as_deref(), output.log_y)?;
        }
        Command::Linewidth { scenario, fit, json } => {
            let s = config::scenario(scenario.overrides(), scenario.config.as_deref())?;
            o.warnings.extend(s.warnings.iter().cloned());
            o.stdout = commands::linewidth(&s, fit.map(usize::from), json)?;
        }
        Command::Reproduce {
            figure,
            outdir,
            bloch_form,
            log_y,
        } => {
            let form = match bloch_form {
                Some(f) => f.parse::<BlochForm>().map_err(|e| CliError::Input(e.to_string()))?,
                None => BlochForm::default(),
            };
            o.stdout = commands::reproduce(figure, form, &outdir, log_y)?;
        }
        Command::Validate {
            scenario,
            n_max,
            pop_tol,
            fwhm_tol,
            baseline_g,
            min_shrink,
        } => {
            let s = config::scenario(scenario.overrides(), scenario.config.as_deref())?;
            o.warnings.extend(s.warnings.iter().cloned());
            let tol = commands::Tolerances {
                population: pop_tol,
                fwhm: fwhm_tol,
                baseline_g,
                min_shrink,
            };
            let v = commands::validate(&s, n_max, &tol)?;
            o.warnings.extend(
                v.text
                    .lines()
                    .filter_map(|l| l.split_once("warning: ").map(|(_, w)| w.to_string())),
            );
            o.stdout = v.text;
            if !v.breaches.is_empty() {
                return Err(CliError::Tolerance(v.breaches.join("; ")));
            }
        }
    }
    Ok(())
}
