//! Subcommand implementations. Each returns the text destined for stdout.

use std::fmt::Write;
use std::path::{Path, PathBuf};

use cavity_ladder::oracle::{compare, OracleComparison};
use cavity_ladder::{
    absorption, closed_form_linewidths, decay_rates, eigen_linewidths, fit_lorentzians, frequency_shift,
    linewidth_report, steady_state_checked, BlochForm, FockTruncation, OracleOptions, SpectrumTrace64, SystemParams64,
};
use serde_json::json;

use crate::config::Scenario;
use crate::error::CliError;
use crate::format::{csv, fmt_g, num, write_atomic};
use crate::presets::{self, FigureId};
use crate::svg::{Plot, Series};

/// Drops the sign of negative zero.
fn nz(x: f64) -> f64 {
    x + 0.0
}

fn write_file(path: &Path, contents: &str) -> Result<(), CliError> {
    write_atomic(path, contents).map_err(|e| CliError::Input(format!("cannot write {}: {e}", path.display())))
}

/// Writes `text` to `out` when given, otherwise hands it back for stdout.
pub fn emit(text: String, out: Option<&Path>) -> Result<String, CliError> {
    match out {
        Some(p) => {
            write_file(p, &text)?;
            Ok(String::new())
        }
        None => Ok(text),
    }
}

pub fn steady(s: &Scenario, as_json: bool) -> Result<String, CliError> {
    let p = &s.params;
    if p.is_decoupled() || p.g01.norm() == 0.0 || p.g12.norm() == 0.0 {
        return Err(CliError::Input(
            "g01, g12: steady state is not unique when a transition is uncoupled".into(),
        ));
    }
    let state = steady_state_checked(p)?;
    let (g1, g2) = decay_rates(p);
    let shift = frequency_shift(p);
    let gammas = closed_form_linewidths(p).ok();
    let lines = eigen_linewidths(p);
    if as_json {
        let v = json!({
            "rho00": nz(state.rho00),
            "rho11": nz(state.rho11),
            "rho22": nz(state.rho22),
            "gamma1": nz(g1),
            "gamma2": nz(g2),
            "omega_sh": nz(shift),
            "gamma_minus": gammas.map(|g| nz(g.0)),
            "gamma_plus": gammas.map(|g| nz(g.1)),
            "eigen_fwhm": lines.iter().map(|l| nz(l.fwhm)).collect::<Vec<_>>(),
            "eigen_center": lines.iter().map(|l| nz(l.center_shift)).collect::<Vec<_>>(),
            "bloch_form": p.form.name(),
        });
        return Ok(format!("{}\n", serde_json::to_string_pretty(&v).expect("json value")));
    }
    let mut out = String::new();
    let _ = writeln!(out, "rho00 = {}", num(state.rho00));
    let _ = writeln!(out, "rho11 = {}", num(state.rho11));
    let _ = writeln!(out, "rho22 = {}", num(state.rho22));
    let _ = writeln!(out, "gamma1 = {}", num(g1));
    let _ = writeln!(out, "gamma2 = {}", num(g2));
    let _ = writeln!(out, "omega_sh = {}", num(shift));
    match gammas {
        Some((m, pl)) => {
            let _ = writeln!(out, "Gamma_minus = {}", num(m));
            let _ = writeln!(out, "Gamma_plus = {}", num(pl));
        }
        None => {
            let _ = writeln!(
                out,
                "Gamma_minus = n/a (closed form needs delta = Delta = 0, |g01| = |g12|)"
            );
            let _ = writeln!(out, "Gamma_plus = n/a");
        }
    }
    for (k, l) in lines.iter().enumerate() {
        let _ = writeln!(
            out,
            "eigen_line_{k} = fwhm {} center {}",
            num(l.fwhm),
            num(l.center_shift)
        );
    }
    let _ = writeln!(out, "bloch_form = {}", p.form);
    Ok(out)
}

/// Header, columns and the underlying traces of a spectrum CSV.
pub type SpectrumTable = (Vec<&'static str>, Vec<Vec<f64>>, Vec<SpectrumTrace64>);

pub fn spectrum_table(s: &Scenario) -> Result<SpectrumTable, CliError> {
    let mut traces = Vec::new();
    let mut header = vec!["omega"];
    if s.eta_compare {
        traces.push(absorption(&s.params.with_eta(1.0), &s.probe, &s.grid)?);
        traces.push(absorption(&s.params.with_eta(0.0), &s.probe, &s.grid)?);
        header.extend(["A_eta1", "A_eta0"]);
    } else {
        traces.push(absorption(&s.params, &s.probe, &s.grid)?);
        header.push("A");
    }
    let mut columns = vec![traces[0].omegas.clone()];
    columns.extend(traces.iter().map(|t| t.values.clone()));
    if s.normalize {
        for t in &traces {
            if !(t.max_value() > 0.0) {
                return Err(CliError::Numerical(
                    "peak normalization needs a positive maximum".into(),
                ));
            }
            columns.push(t.peak_normalized());
        }
        header.extend(if s.eta_compare {
            vec!["A_eta1_norm", "A_eta0_norm"]
        } else {
            vec!["A_norm"]
        });
    }
    Ok((header, columns, traces))
}

pub fn spectrum_plot(s: &Scenario, traces: &[SpectrumTrace64], log_y: bool) -> Plot {
    let labels: Vec<String> = if s.eta_compare {
        vec!["eta = 1".into(), "eta = 0".into()]
    } else {
        vec![format!("eta = {}", fmt_g(s.params.eta, 6))]
    };
    Plot {
        title: format!("Probe absorption, N = {}", fmt_g(s.params.n_th, 6)),
        x_label: "omega".into(),
        y_label: "A(omega)".into(),
        log_y,
        series: traces
            .iter()
            .zip(labels)
            .enumerate()
            .map(|(k, (t, label))| Series {
                label,
                xs: t.omegas.clone(),
                ys: t.values.clone(),
                dashed: k == 1,
            })
            .collect(),
    }
}

pub fn spectrum(s: &Scenario, out: Option<&Path>, svg: Option<&Path>, log_y: bool) -> Result<String, CliError> {
    let (header, columns, traces) = spectrum_table(s)?;
    let text = csv(&header, &columns);
    if let Some(p) = svg {
        write_file(p, &spectrum_plot(s, &traces, log_y).render())?;
    }
    emit(text, out)
}

pub fn linewidth(s: &Scenario, fit: Option<usize>, as_json: bool) -> Result<String, CliError> {
    let eta = if s.eta_compare { 1.0 } else { s.params.eta };
    let trace = absorption(&s.params.with_eta(eta), &s.probe, &s.grid)?;
    let report = linewidth_report(&trace)?;
    let fitted = fit.map(|n| fit_lorentzians(&trace, n)).transpose()?;
    let lines = eigen_linewidths(&trace.params);
    if as_json {
        let components = fitted.as_ref().map(|f| {
            f.components
                .iter()
                .map(|c| json!({"center": nz(c.center), "fwhm": nz(c.fwhm), "amplitude": nz(c.amplitude)}))
                .collect::<Vec<_>>()
        });
        let v = json!({
            "gamma_minus": report.gamma_minus,
            "gamma_plus": report.gamma_plus,
            "analytic": report.analytic,
            "numeric_fwhm": report.numeric_fwhm,
            "peak_omega": nz(report.peak_omega),
            "peak_height": report.peak_height,
            "eigen_fwhm": lines.iter().map(|l| nz(l.fwhm)).collect::<Vec<_>>(),
            "eigen_center": lines.iter().map(|l| nz(l.center_shift)).collect::<Vec<_>>(),
            "fit": fitted.as_ref().map(|f| json!({
                "components": components,
                "residual": f.residual,
                "iterations": f.iterations,
                "converged": f.converged,
                "degenerate": f.degenerate,
            })),
        });
        return Ok(format!("{}\n", serde_json::to_string_pretty(&v).expect("json value")));
    }
    let mut out = String::new();
    let source = if report.analytic { "closed form" } else { "eigenvalues" };
    let _ = writeln!(out, "Gamma_minus = {} ({source})", num(report.gamma_minus));
    let _ = writeln!(out, "Gamma_plus = {} ({source})", num(report.gamma_plus));
    let _ = writeln!(out, "numeric_fwhm = {}", num(report.numeric_fwhm));
    let _ = writeln!(out, "peak_omega = {}", num(report.peak_omega));
    let _ = writeln!(out, "peak_height = {}", num(report.peak_height));
    for (k, l) in lines.iter().enumerate() {
        let _ = writeln!(
            out,
            "eigen_line_{k} = fwhm {} center {}",
            num(l.fwhm),
            num(l.center_shift)
        );
    }
    if let Some(f) = fitted {
        for (k, c) in f.components.iter().enumerate() {
            let _ = writeln!(
                out,
                "fit_component_{k} = center {} fwhm {} amplitude {}",
                num(c.center),
                num(c.fwhm),
                num(c.amplitude)
            );
        }
        let _ = writeln!(out, "fit_residual = {}", num(f.residual));
        let _ = writeln!(out, "fit_iterations = {}", f.iterations);
        if !f.converged {
            let _ = writeln!(out, "fit_status = not converged (best so far)");
        }
        if f.degenerate {
            let _ = writeln!(out, "fit_status = degenerate components");
        }
    }
    Ok(out)
}

fn file_value(v: f64) -> String {
    fmt_g(v, 6)
}

pub fn reproduce(id: FigureId, form: BlochForm, outdir: &Path, log_y: bool) -> Result<String, CliError> {
    if !outdir.is_dir() {
        return Err(CliError::Input(format!(
            "output directory {} does not exist",
            outdir.display()
        )));
    }
    let run = presets::run(id, form)?;
    let param = run.preset.parameter;
    let mut series = Vec::new();
    let mut written: Vec<PathBuf> = Vec::new();
    for (panel, (on, off)) in run.preset.panels.iter().zip(&run.traces) {
        let name = format!("{id}_{param}_{}.csv", file_value(panel.value));
        let path = outdir.join(name);
        let text = csv(
            &["omega", "A_eta1", "A_eta0"],
            &[on.omegas.clone(), on.values.clone(), off.values.clone()],
        );
        write_file(&path, &text)?;
        written.push(path);
        let label = format!("{param} = {}", file_value(panel.value));
        series.push(Series {
            label: label.clone(),
            xs: on.omegas.clone(),
            ys: on.values.clone(),
            dashed: false,
        });
        series.push(Series {
            label: format!("{label}, eta=0"),
            xs: off.omegas.clone(),
            ys: off.values.clone(),
            dashed: true,
        });
    }

    let header = [
        param,
        "fwhm_eta1",
        "fwhm_eta0",
        "fwhm_ratio",
        "height_eta1",
        "height_eta0",
        "height_ratio",
        "peak_shift",
        "gamma_minus",
        "gamma_plus",
    ];
    let col = |f: fn(&presets::PanelSummary) -> f64| run.summary.iter().map(f).collect::<Vec<_>>();
    let columns = vec![
        col(|p| p.value),
        col(|p| p.fwhm_eta1),
        col(|p| p.fwhm_eta0),
        col(|p| p.fwhm_ratio),
        col(|p| p.height_eta1),
        col(|p| p.height_eta0),
        col(|p| p.height_ratio),
        col(|p| p.peak_shift),
        col(|p| p.gamma_minus),
        col(|p| p.gamma_plus),
    ];
    let summary = csv(&header, &columns);
    let summary_path = outdir.join(format!("{id}_summary.csv"));
    write_file(&summary_path, &summary)?;
    written.push(summary_path);
    let plot = Plot {
        title: format!("{id}: probe absorption ({form})"),
        x_label: "omega".into(),
        y_label: "A(omega)".into(),
        log_y,
        series,
    };
    let svg_path = outdir.join(format!("{id}.svg"));
    write_file(&svg_path, &plot.render())?;
    written.push(svg_path);

    let mut out = summary;
    for c in &run.checks {
        let _ = writeln!(
            out,
            "check: {} ... {}",
            c.statement,
            if c.holds { "holds" } else { "does not hold" }
        );
    }
    for p in &written {
        let _ = writeln!(out, "wrote {}", p.display());
    }
    Ok(out)
}

/// Thresholds of the `validate` subcommand.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Tolerances {
    pub population: f64,
    pub fwhm: f64,
    /// Baseline coupling for the shrink check, applied to both transitions.
    /// `None` compares against the reference couplings when the scenario is
    /// weaker than them, and skips the check otherwise.
    pub baseline_g: Option<f64>,
    pub min_shrink: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            population: 0.02,
            fwhm: 0.10,
            baseline_g: None,
            min_shrink: 4.0,
        }
    }
}

/// Population deviations below this are treated as round-off.
pub const POPULATION_FLOOR: f64 = 1e-12;

pub struct Validation {
    pub text: String,
    pub breaches: Vec<String>,
}

fn describe(c: &OracleComparison<f64>, label: &str, out: &mut String) {
    let _ = writeln!(out, "[{label}] n_max = {}", c.n_max);
    for k in 0..3 {
        let _ = writeln!(
            out,
            "[{label}] rho{k}{k}: full {} reduced {} |diff| {}",
            num(c.full_populations[k]),
            num(c.reduced_populations[k]),
            fmt_g((c.full_populations[k] - c.reduced_populations[k]).abs(), 6)
        );
    }
    let _ = writeln!(
        out,
        "[{label}] population deviation = {}",
        fmt_g(c.population_deviation, 6)
    );
    let _ = writeln!(
        out,
        "[{label}] fwhm: full {} reduced {} relative deviation {}",
        num(c.full_fwhm),
        num(c.reduced_fwhm),
        fmt_g(c.fwhm_deviation, 6)
    );
    let _ = writeln!(out, "[{label}] <a+a> = {}", num(c.photon_number));
    let _ = writeln!(
        out,
        "[{label}] steady residual {} hermiticity {} trace error {} psd {} |rho20| {}",
        fmt_g(c.steady_residual, 3),
        fmt_g(c.hermiticity_residual, 3),
        fmt_g(c.trace_error, 3),
        c.positive_semidefinite,
        fmt_g(c.rho20, 3)
    );
    match c.convergence {
        Some(t) => {
            let _ = writeln!(
                out,
                "[{label}] n_max convergence: populations move {} against n_max = {}",
                fmt_g(t.population_change, 3),
                t.compared_n_max
            );
        }
        None => {
            let _ = writeln!(out, "[{label}] n_max convergence: not checked");
        }
    }
    for w in &c.warnings {
        let _ = writeln!(out, "[{label}] warning: {w}");
    }
}

pub fn validate(s: &Scenario, n_max: Option<usize>, tol: &Tolerances) -> Result<Validation, CliError> {
    let trunc = match n_max {
        Some(n) => FockTruncation::new(n)?,
        None => FockTruncation::for_thermal(s.params.n_th),
    };
    let opts = OracleOptions::default();
    let eta_one = s.params.with_eta(1.0);
    if s.params.eta != 1.0 && !s.eta_compare {
        return Err(CliError::Input("validate compares at eta = 1 only".into()));
    }
    let here = compare(&eta_one, &s.probe, &s.grid, &trunc, &opts)?;
    let mut text = String::new();
    let _ = writeln!(text, "bloch_form = {}", s.params.form);
    describe(&here, "point", &mut text);
    let mut breaches = Vec::new();
    if here.population_deviation > tol.population {
        breaches.push(format!(
            "population deviation {} > {}",
            fmt_g(here.population_deviation, 6),
            tol.population
        ));
    }
    if here.fwhm_deviation > tol.fwhm {
        breaches.push(format!(
            "fwhm deviation {} > {}",
            fmt_g(here.fwhm_deviation, 6),
            tol.fwhm
        ));
    }
    let reference = SystemParams64::reference();
    let baseline = match tol.baseline_g {
        Some(g) => Some(eta_one.with_g(g)),
        None if eta_one.max_coupling() < reference.max_coupling() => {
            Some(eta_one.with_couplings(reference.g01, reference.g12))
        }
        None => None,
    };
    if let Some(base_params) = baseline {
        let base = compare(&base_params, &s.probe, &s.grid, &trunc, &opts)?;
        describe(&base, "baseline", &mut text);
        let pop_shrink =
            base.population_deviation.max(POPULATION_FLOOR) / here.population_deviation.max(POPULATION_FLOOR);
        let fwhm_shrink = base.fwhm_deviation / here.fwhm_deviation;
        let _ = writeln!(text, "population shrink factor = {}", fmt_g(pop_shrink, 6));
        let _ = writeln!(text, "fwhm shrink factor = {}", fmt_g(fwhm_shrink, 6));
        let both_at_floor =
            base.population_deviation <= POPULATION_FLOOR && here.population_deviation <= POPULATION_FLOOR;
        if !(both_at_floor || pop_shrink >= tol.min_shrink) {
            breaches.push(format!(
                "population shrink {} < {}",
                fmt_g(pop_shrink, 6),
                tol.min_shrink
            ));
        }
        if !(fwhm_shrink >= tol.min_shrink) {
            breaches.push(format!("fwhm shrink {} < {}", fmt_g(fwhm_shrink, 6), tol.min_shrink));
        }
    }
    let _ = writeln!(
        text,
        "result = {}",
        if breaches.is_empty() {
            "within tolerance"
        } else {
            "tolerance breach"
        }
    );
    Ok(Validation { text, breaches })
}
