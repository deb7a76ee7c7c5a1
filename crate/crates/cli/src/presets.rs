//! Parameter sweeps of the three published figures.

use std::fmt;
use std::str::FromStr;

use cavity_ladder::{
    analysis::peak_with, fwhm, linewidth_report, BlochForm, FrequencyGrid64, ProbeConfig64, SpectrumModel,
    SpectrumTrace64, SystemParams64,
};

use crate::config::default_grid;
use crate::error::CliError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum FigureId {
    Fig1,
    Fig2,
    Fig3,
}

impl fmt::Display for FigureId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            FigureId::Fig1 => "fig1",
            FigureId::Fig2 => "fig2",
            FigureId::Fig3 => "fig3",
        })
    }
}

impl FromStr for FigureId {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self, CliError> {
        match s {
            "fig1" => Ok(FigureId::Fig1),
            "fig2" => Ok(FigureId::Fig2),
            "fig3" => Ok(FigureId::Fig3),
            other => Err(CliError::Input(format!("unknown figure '{other}' (fig1, fig2, fig3)"))),
        }
    }
}

/// One curve pair of a figure.
#[derive(Clone, Debug, PartialEq)]
pub struct Panel {
    /// Swept value (`N`, `δ` or `Δ`).
    pub value: f64,
    /// Parameters with `eta = 1`.
    pub params: SystemParams64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct FigurePreset {
    pub id: FigureId,
    /// Name of the swept parameter as used in file names and headers.
    pub parameter: &'static str,
    pub panels: Vec<Panel>,
    pub grid: FrequencyGrid64,
    pub probe: ProbeConfig64,
}

type Setter = fn(SystemParams64, f64) -> SystemParams64;

pub fn preset(id: FigureId, form: BlochForm) -> FigurePreset {
    let base = SystemParams64::reference().with_form(form);
    let (parameter, values, set): (&str, [f64; 4], Setter) = match id {
        FigureId::Fig1 => ("n_th", [0.01, 0.1, 1.0, 2.0], |p, v| p.with_n_th(v)),
        FigureId::Fig2 => ("delta", [0.0, 10.0, 50.0, 100.0], |p, v| p.with_delta(v)),
        FigureId::Fig3 => ("big_delta", [0.0, 1.0, 5.0, 10.0], |p, v| p.with_big_delta(v)),
    };
    let panels = values
        .iter()
        .map(|&v| Panel {
            value: v,
            params: set(base, v),
        })
        .collect();
    let widest = values.iter().copied().fold(0.0, f64::max);
    let grid = match id {
        FigureId::Fig3 => default_grid(widest),
        _ => default_grid(0.0),
    };
    FigurePreset {
        id,
        parameter,
        panels,
        grid,
        probe: ProbeConfig64::probe_01(),
    }
}

/// Derived scalars of one panel.
#[derive(Clone, Debug, PartialEq)]
pub struct PanelSummary {
    pub value: f64,
    pub fwhm_eta1: f64,
    pub fwhm_eta0: f64,
    pub fwhm_ratio: f64,
    pub height_eta1: f64,
    pub height_eta0: f64,
    pub height_ratio: f64,
    /// Peak position of the `eta = 1` curve.
    pub peak_shift: f64,
    pub gamma_minus: f64,
    pub gamma_plus: f64,
}

/// A qualitative statement about a figure and whether it holds.
#[derive(Clone, Debug, PartialEq)]
pub struct PropertyCheck {
    pub statement: String,
    pub holds: bool,
}

#[derive(Clone, Debug)]
pub struct FigureRun {
    pub preset: FigurePreset,
    pub traces: Vec<(SpectrumTrace64, SpectrumTrace64)>,
    pub summary: Vec<PanelSummary>,
    pub checks: Vec<PropertyCheck>,
}

fn refined_peak(trace: &SpectrumTrace64) -> Result<(f64, f64), CliError> {
    let model = SpectrumModel::new(&trace.params, &trace.probe)?;
    let p = peak_with(trace, |w| model.absorption(w))?;
    Ok((p.omega, p.height))
}

pub fn run(id: FigureId, form: BlochForm) -> Result<FigureRun, CliError> {
    let preset = preset(id, form);
    let mut traces = Vec::new();
    let mut summary = Vec::new();
    for panel in &preset.panels {
        let on = cavity_ladder::absorption(&panel.params, &preset.probe, &preset.grid)?;
        let off = cavity_ladder::absorption(&panel.params.with_eta(0.0), &preset.probe, &preset.grid)?;
        let (f1, f0) = (fwhm(&on)?, fwhm(&off)?);
        let (shift, h1) = refined_peak(&on)?;
        let (_, h0) = refined_peak(&off)?;
        let report = linewidth_report(&on)?;
        summary.push(PanelSummary {
            value: panel.value,
            fwhm_eta1: f1,
            fwhm_eta0: f0,
            fwhm_ratio: f1 / f0,
            height_eta1: h1,
            height_eta0: h0,
            height_ratio: h1 / h0,
            peak_shift: shift,
            gamma_minus: report.gamma_minus,
            gamma_plus: report.gamma_plus,
        });
        traces.push((on, off));
    }
    let checks = property_checks(id, &summary);
    Ok(FigureRun {
        preset,
        traces,
        summary,
        checks,
    })
}

fn strictly_decreasing(v: &[f64]) -> bool {
    v.windows(2).all(|w| w[1] < w[0])
}

pub fn property_checks(id: FigureId, s: &[PanelSummary]) -> Vec<PropertyCheck> {
    let ratios: Vec<f64> = s.iter().map(|p| p.fwhm_ratio).collect();
    match id {
        FigureId::Fig1 => vec![PropertyCheck {
            statement: "FWHM ratio eta=1/eta=0 strictly decreasing in N".into(),
            holds: strictly_decreasing(&ratios),
        }],
        FigureId::Fig2 => {
            let widths: Vec<f64> = s.iter().map(|p| p.fwhm_eta1).collect();
            vec![
                PropertyCheck {
                    statement: "FWHM(eta=1) strictly decreasing in delta".into(),
                    holds: strictly_decreasing(&widths),
                },
                PropertyCheck {
                    statement: "peak displaced from 0 by more than 1e-3 at the largest delta".into(),
                    holds: s.last().is_some_and(|p| p.peak_shift.abs() > 1e-3),
                },
            ]
        }
        FigureId::Fig3 => vec![PropertyCheck {
            statement: "FWHM ratio eta=1/eta=0 nondecreasing toward 1 in Delta".into(),
            holds: ratios.windows(2).all(|w| w[1] >= w[0]) && ratios.iter().all(|r| *r <= 1.0 + 1e-12),
        }],
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn captions() {
        let f1 = preset(FigureId::Fig1, BlochForm::Published);
        let ns: Vec<f64> = f1.panels.iter().map(|p| p.params.n_th).collect();
        assert_eq!(ns, vec![0.01, 0.1, 1.0, 2.0]);
        assert!(f1
            .panels
            .iter()
            .all(|p| p.params.delta == 0.0 && p.params.big_delta == 0.0));
        let f2 = preset(FigureId::Fig2, BlochForm::Published);
        assert!(f2
            .panels
            .iter()
            .all(|p| p.params.n_th == 1.0 && p.params.big_delta == 0.0));
        let f3 = preset(FigureId::Fig3, BlochForm::Published);
        assert_eq!(f3.panels[3].params.big_delta, 10.0);
        for f in [&f1, &f2, &f3] {
            assert!(f
                .panels
                .iter()
                .all(|p| p.params.g01 == p.params.g12 && p.params.kappa == 100.0));
            assert_eq!(f.probe, ProbeConfig64::probe_01());
        }
    }

    #[test]
    fn parse_ids() {
        assert_eq!("fig2".parse::<FigureId>().unwrap(), FigureId::Fig2);
        assert!("fig4".parse::<FigureId>().is_err());
        assert_eq!(FigureId::Fig3.to_string(), "fig3");
    }

    #[test]
    fn fig2_and_fig3_properties_hold() {
        for id in [FigureId::Fig2, FigureId::Fig3] {
            let r = run(id, BlochForm::Published).unwrap();
            assert!(r.checks.iter().all(|c| c.holds), "{id}: {:?}", r.checks);
        }
    }

    #[test]
    fn fig1_height_ratio_matches_closed_form() {
        let r = run(FigureId::Fig1, BlochForm::Published).unwrap();
        for p in &r.summary {
            let n = p.value;
            let a = (3.0 * n + 1.0).powi(2);
            let want = a / (a - 4.0 * n * (n + 1.0));
            assert!((p.height_ratio - want).abs() < 1e-9 * want);
        }
    }
}
