//! Scenario assembly from defaults, a `key = value` config file and flags.

use std::collections::BTreeMap;
use std::path::Path;

use cavity_ladder::{validate, BlochForm, FrequencyGrid64, ProbeConfig64, SystemParams64, C};

use crate::error::CliError;

/// Keys accepted in config files; `-` and `_` are interchangeable.
pub const KEYS: &[&str] = &[
    "g01",
    "g12",
    "kappa",
    "delta",
    "big_delta",
    "n_th",
    "eta",
    "probe",
    "omega_min",
    "omega_max",
    "points",
    "normalize",
    "bloch_form",
];

/// Raw scenario inputs; `None` means "not given at this layer".
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Overrides {
    pub g01: Option<String>,
    pub g12: Option<String>,
    pub kappa: Option<f64>,
    pub delta: Option<f64>,
    pub big_delta: Option<f64>,
    pub n_th: Option<f64>,
    pub eta: Option<f64>,
    pub probe: Option<String>,
    pub omega_min: Option<f64>,
    pub omega_max: Option<f64>,
    pub points: Option<usize>,
    pub normalize: Option<String>,
    pub bloch_form: Option<String>,
}

impl Overrides {
    /// `self` wins wherever it has a value.
    pub fn over(self, lower: Overrides) -> Overrides {
        Overrides {
            g01: self.g01.or(lower.g01),
            g12: self.g12.or(lower.g12),
            kappa: self.kappa.or(lower.kappa),
            delta: self.delta.or(lower.delta),
            big_delta: self.big_delta.or(lower.big_delta),
            n_th: self.n_th.or(lower.n_th),
            eta: self.eta.or(lower.eta),
            probe: self.probe.or(lower.probe),
            omega_min: self.omega_min.or(lower.omega_min),
            omega_max: self.omega_max.or(lower.omega_max),
            points: self.points.or(lower.points),
            normalize: self.normalize.or(lower.normalize),
            bloch_form: self.bloch_form.or(lower.bloch_form),
        }
    }
}

fn parse_f64(key: &str, v: &str) -> Result<f64, CliError> {
    v.trim()
        .parse::<f64>()
        .map_err(|_| CliError::Input(format!("{key}: cannot parse '{v}' as a number")))
}

/// Parses config text. Blank lines and `#` comments are ignored; unknown
/// or repeated keys are errors.
pub fn parse_config(text: &str) -> Result<Overrides, CliError> {
    let mut seen = BTreeMap::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line.split_once('=').ok_or_else(|| {
            CliError::Input(format!(
                "config line {}: expected 'key = value', got '{raw}'",
                lineno + 1
            ))
        })?;
        let key = k.trim().replace('-', "_");
        if !KEYS.contains(&key.as_str()) {
            return Err(CliError::Input(format!(
                "config line {}: unknown key '{}'",
                lineno + 1,
                k.trim()
            )));
        }
        let value = v.trim().trim_matches('"').to_string();
        if seen.insert(key.clone(), value).is_some() {
            return Err(CliError::Input(format!(
                "config line {}: duplicate key '{key}'",
                lineno + 1
            )));
        }
    }
    let mut o = Overrides::default();
    for (k, v) in seen {
        match k.as_str() {
            "g01" => o.g01 = Some(v),
            "g12" => o.g12 = Some(v),
            "kappa" => o.kappa = Some(parse_f64(&k, &v)?),
            "delta" => o.delta = Some(parse_f64(&k, &v)?),
            "big_delta" => o.big_delta = Some(parse_f64(&k, &v)?),
            "n_th" => o.n_th = Some(parse_f64(&k, &v)?),
            "eta" => o.eta = Some(parse_f64(&k, &v)?),
            "probe" => o.probe = Some(v),
            "omega_min" => o.omega_min = Some(parse_f64(&k, &v)?),
            "omega_max" => o.omega_max = Some(parse_f64(&k, &v)?),
            "points" => {
                o.points = Some(
                    v.parse()
                        .map_err(|_| CliError::Input(format!("points: cannot parse '{v}' as a count")))?,
                )
            }
            "normalize" => o.normalize = Some(v),
            "bloch_form" => o.bloch_form = Some(v),
            _ => unreachable!("key list checked above"),
        }
    }
    Ok(o)
}

pub fn load_config(path: &Path) -> Result<Overrides, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Input(format!("cannot read config {}: {e}", path.display())))?;
    parse_config(&text)
}

/// Accepts `10`, `-2.5`, `3+4i`, `3-4i`, `4i`, `-i`.
pub fn parse_complex(field: &str, s: &str) -> Result<C<f64>, CliError> {
    let bad = || CliError::Input(format!("{field}: cannot parse '{s}' as a real or complex number"));
    let t: String = s.chars().filter(|c| !c.is_whitespace()).collect();
    if t.is_empty() {
        return Err(bad());
    }
    let Some(body) = t.strip_suffix(['i', 'j']) else {
        return t.parse::<f64>().map(|r| C::new(r, 0.0)).map_err(|_| bad());
    };
    let bytes = body.as_bytes();
    let split = (1..bytes.len())
        .rev()
        .find(|&k| (bytes[k] == b'+' || bytes[k] == b'-') && !matches!(bytes[k - 1], b'e' | b'E'));
    let imag = |x: &str| match x {
        "" | "+" => Ok(1.0),
        "-" => Ok(-1.0),
        other => other.parse::<f64>().map_err(|_| bad()),
    };
    match split {
        Some(k) => {
            let re = body[..k].parse::<f64>().map_err(|_| bad())?;
            Ok(C::new(re, imag(&body[k..])?))
        }
        None => Ok(C::new(0.0, imag(body)?)),
    }
}

pub fn parse_probe(s: &str) -> Result<ProbeConfig64, CliError> {
    match s {
        "01" => Ok(ProbeConfig64::probe_01()),
        "12" => Ok(ProbeConfig64::probe_12()),
        "two-photon" | "two_photon" => Ok(ProbeConfig64::two_photon()),
        other => Err(CliError::Input(format!(
            "probe: expected 01, 12 or two-photon, got '{other}'"
        ))),
    }
}

/// Resolved inputs of one command.
#[derive(Clone, Debug, PartialEq)]
pub struct Scenario {
    pub params: SystemParams64,
    pub probe: ProbeConfig64,
    pub grid: FrequencyGrid64,
    /// Emit `eta = 1` and `eta = 0` side by side; off when `eta` was set explicitly.
    pub eta_compare: bool,
    /// Add peak-normalized columns.
    pub normalize: bool,
    pub warnings: Vec<String>,
}

const DEFAULT_HALF_WIDTH: f64 = 20.0;
const DEFAULT_SPACING: f64 = 0.02;

/// Default grid: `[-20, 20]` with 2001 points, widened by `2|Δ|` so both
/// split transitions stay inside.
pub fn default_grid(big_delta: f64) -> FrequencyGrid64 {
    let half = DEFAULT_HALF_WIDTH + 2.0 * big_delta.abs();
    let count = 2 * (half / DEFAULT_SPACING).round() as usize + 1;
    FrequencyGrid64 {
        omega_min: -half,
        omega_max: half,
        count,
    }
}

/// Builds a scenario from `o` over the built-in defaults.
pub fn resolve(o: Overrides) -> Result<Scenario, CliError> {
    let mut params = SystemParams64::reference();
    if let Some(g) = &o.g01 {
        params.g01 = parse_complex("g01", g)?;
    }
    if let Some(g) = &o.g12 {
        params.g12 = parse_complex("g12", g)?;
    }
    if let Some(v) = o.kappa {
        params.kappa = v;
    }
    if let Some(v) = o.delta {
        params.delta = v;
    }
    if let Some(v) = o.big_delta {
        params.big_delta = v;
    }
    if let Some(v) = o.n_th {
        params.n_th = v;
    }
    if let Some(v) = o.eta {
        params.eta = v;
    }
    if let Some(f) = &o.bloch_form {
        params.form = f.parse::<BlochForm>().map_err(|e| CliError::Input(e.to_string()))?;
    }
    let report = validate(&params);
    let warnings = report.warnings.clone();
    report.into_result()?;

    let probe = parse_probe(o.probe.as_deref().unwrap_or("01"))?;
    let base = default_grid(params.big_delta);
    let grid = FrequencyGrid64::new(
        o.omega_min.unwrap_or(base.omega_min),
        o.omega_max.unwrap_or(base.omega_max),
        o.points.unwrap_or(base.count),
    )?;
    let normalize = match o.normalize.as_deref() {
        None | Some("none") => false,
        Some("peak") => true,
        Some(other) => {
            return Err(CliError::Input(format!(
                "normalize: expected 'peak' or 'none', got '{other}'"
            )))
        }
    };
    Ok(Scenario {
        params,
        probe,
        grid,
        eta_compare: o.eta.is_none(),
        normalize,
        warnings,
    })
}

/// Merges flags over an optional config file over defaults.
pub fn scenario(flags: Overrides, config: Option<&Path>) -> Result<Scenario, CliError> {
    let file = match config {
        Some(p) => load_config(p)?,
        None => Overrides::default(),
    };
    resolve(flags.over(file))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn complex_forms() {
        assert_eq!(parse_complex("g", "10").unwrap(), C::new(10.0, 0.0));
        assert_eq!(parse_complex("g", "3+4i").unwrap(), C::new(3.0, 4.0));
        assert_eq!(parse_complex("g", "3 - 4i").unwrap(), C::new(3.0, -4.0));
        assert_eq!(parse_complex("g", "-2.5i").unwrap(), C::new(0.0, -2.5));
        assert_eq!(parse_complex("g", "-i").unwrap(), C::new(0.0, -1.0));
        assert_eq!(parse_complex("g", "1e-3+2e+1i").unwrap(), C::new(1e-3, 20.0));
        assert!(parse_complex("g", "abc").is_err());
        assert!(parse_complex("g", "").is_err());
    }

    #[test]
    fn config_parsing() {
        let o = parse_config("# comment\nkappa = 50\nn-th = 2 # inline\n\nprobe = \"12\"\n").unwrap();
        assert_eq!(o.kappa, Some(50.0));
        assert_eq!(o.n_th, Some(2.0));
        assert_eq!(o.probe.as_deref(), Some("12"));
        assert!(matches!(parse_config("colour = red"), Err(CliError::Input(_))));
        assert!(parse_config("kappa = 1\nkappa = 2").is_err());
        assert!(parse_config("kappa 1").is_err());
        assert!(parse_config("kappa = fast").is_err());
    }

    #[test]
    fn precedence() {
        let flags = Overrides {
            kappa: Some(200.0),
            ..Default::default()
        };
        let file = Overrides {
            kappa: Some(50.0),
            n_th: Some(2.0),
            ..Default::default()
        };
        let s = resolve(flags.over(file)).unwrap();
        assert_eq!(s.params.kappa, 200.0);
        assert_eq!(s.params.n_th, 2.0);
        assert_eq!(s.params.delta, 0.0);
    }

    #[test]
    fn defaults() {
        let s = resolve(Overrides::default()).unwrap();
        assert_eq!(s.params, SystemParams64::reference());
        assert_eq!(s.grid, FrequencyGrid64::default_resonant());
        assert!(s.eta_compare);
        assert!(!s.normalize);
        assert!(s.warnings.is_empty());
    }

    #[test]
    fn invalid_values_name_the_field() {
        let e = resolve(Overrides {
            kappa: Some(-5.0),
            ..Default::default()
        })
        .unwrap_err();
        assert!(e.to_string().contains("kappa"));
        assert_eq!(e.exit_code(), 1);
        assert!(resolve(Overrides {
            probe: Some("02".into()),
            ..Default::default()
        })
        .is_err());
        assert!(resolve(Overrides {
            normalize: Some("area".into()),
            ..Default::default()
        })
        .is_err());
        assert!(resolve(Overrides {
            points: Some(1),
            ..Default::default()
        })
        .is_err());
    }

    #[test]
    fn detuned_levels_widen_grid() {
        let g = default_grid(10.0);
        assert_eq!(g.omega_max, 40.0);
        assert_eq!(g.count, 4001);
    }

    #[test]
    fn bad_cavity_advisory_is_a_warning() {
        let s = resolve(Overrides {
            kappa: Some(30.0),
            ..Default::default()
        })
        .unwrap();
        assert_eq!(s.warnings.len(), 1);
    }
}
