//! Physical parameters of the atom–cavity system and the cavity response
//! quantities derived from them.
//!
//! Every quantity is expressed in one arbitrary rate unit. The probe offset
//! `omega` used elsewhere in the crate is measured from the mean atomic
//! transition frequency in the same unit.

use std::fmt;

use crate::error::{Error, Result};
use crate::scalar::{re, Real, C};

/// Ratio `kappa / max(|g01|, |g12|)` below which the bad-cavity advisory fires.
pub const BAD_CAVITY_RATIO: f64 = 5.0;

/// Which closed form is used for the `(rho10, rho21)` coherence block.
///
/// The published cavity-modified Bloch equations and the reduced atomic
/// master equation differ in one term of the `rho21` diagonal rate: the
/// published form weights the `|g01|^2` contribution by `N`, while expanding
/// the master equation gives `N + 1`. The master-equation form is the one
/// that agrees with the full atom–cavity model; the published form reproduces
/// the published linewidth formula `Γ± = 2[(3N+1) ± 2η√(N(N+1))] g²/κ`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub enum BlochForm {
    /// Coherence block exactly as published (default).
    #[default]
    Published,
    /// Coherence block obtained by expanding the reduced master equation.
    MasterEquation,
}

impl BlochForm {
    pub fn name(self) -> &'static str {
        match self {
            BlochForm::Published => "published",
            BlochForm::MasterEquation => "master-equation",
        }
    }
}

impl fmt::Display for BlochForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for BlochForm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "published" => Ok(BlochForm::Published),
            "master-equation" | "master_equation" => Ok(BlochForm::MasterEquation),
            other => Err(Error::InvalidInput(format!(
                "unknown bloch form '{other}' (expected 'published' or 'master-equation')"
            ))),
        }
    }
}

/// All physical inputs of the model.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SystemParams<T> {
    /// Atom–cavity coupling on the `|0> <-> |1>` transition.
    pub g01: C<T>,
    /// Atom–cavity coupling on the `|1> <-> |2>` transition.
    pub g12: C<T>,
    /// Cavity field decay constant (must be positive).
    pub kappa: T,
    /// Cavity detuning from the mean atomic transition frequency.
    pub delta: T,
    /// Level asymmetry: energy of `|1>` relative to the mean transition frequency.
    pub big_delta: T,
    /// Mean thermal photon number of the reservoir.
    pub n_th: T,
    /// Interference multiplier on every cross-coupling term, in `[0, 1]`.
    pub eta: T,
    /// Coherence-block closed form.
    pub form: BlochForm,
}

impl<T: Real> SystemParams<T> {
    /// `g01 = g12 = 10`, `kappa = 100`, `delta = big_delta = 0`, `N = 1`, `eta = 1`.
    pub fn reference() -> Self {
        Self {
            g01: re(T::lit(10.0)),
            g12: re(T::lit(10.0)),
            kappa: T::lit(100.0),
            delta: T::zero(),
            big_delta: T::zero(),
            n_th: T::one(),
            eta: T::one(),
            form: BlochForm::Published,
        }
    }

    pub fn with_couplings(mut self, g01: C<T>, g12: C<T>) -> Self {
        self.g01 = g01;
        self.g12 = g12;
        self
    }

    /// Sets both couplings to the same real value.
    pub fn with_g(self, g: T) -> Self {
        self.with_couplings(re(g), re(g))
    }

    pub fn with_kappa(mut self, kappa: T) -> Self {
        self.kappa = kappa;
        self
    }

    pub fn with_delta(mut self, delta: T) -> Self {
        self.delta = delta;
        self
    }

    pub fn with_big_delta(mut self, big_delta: T) -> Self {
        self.big_delta = big_delta;
        self
    }

    pub fn with_n_th(mut self, n_th: T) -> Self {
        self.n_th = n_th;
        self
    }

    pub fn with_eta(mut self, eta: T) -> Self {
        self.eta = eta;
        self
    }

    pub fn with_form(mut self, form: BlochForm) -> Self {
        self.form = form;
        self
    }

    /// Largest coupling magnitude.
    pub fn max_coupling(&self) -> T {
        self.g01.norm().max(self.g12.norm())
    }

    /// Both couplings vanish: the atom is decoupled from the cavity.
    pub fn is_decoupled(&self) -> bool {
        self.g01.norm_sqr() == T::zero() && self.g12.norm_sqr() == T::zero()
    }

    /// Returns `Err(InvalidParams)` listing every domain violation.
    pub fn ensure_valid(&self) -> Result<()> {
        validate(self).into_result()
    }
}

impl<T: Real> Default for SystemParams<T> {
    fn default() -> Self {
        Self::reference()
    }
}

/// The cavity response `F(∓Δ) = 1 / (κ + i(δ ∓ Δ))`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ResponsePair<T> {
    /// `F(-Δ)`.
    pub f_minus: C<T>,
    /// `F(+Δ)`.
    pub f_plus: C<T>,
}

pub fn response<T: Real>(params: &SystemParams<T>) -> ResponsePair<T> {
    let f_minus = C::new(params.kappa, params.delta - params.big_delta).inv();
    let f_plus = C::new(params.kappa, params.delta + params.big_delta).inv();
    ResponsePair { f_minus, f_plus }
}

/// Cavity-induced decay rates `(γ1, γ2)` of `|1> -> |0>` and `|2> -> |1>`.
pub fn decay_rates<T: Real>(params: &SystemParams<T>) -> (T, T) {
    let f = response(params);
    (
        f.f_minus.re * params.g01.norm_sqr(),
        f.f_plus.re * params.g12.norm_sqr(),
    )
}

/// Cavity-induced frequency shift entering the `rho20` coherence.
pub fn frequency_shift<T: Real>(params: &SystemParams<T>) -> T {
    let f = response(params);
    let n = params.n_th;
    f.f_minus.im * n * params.g01.norm_sqr() + f.f_plus.im * (n + T::one()) * params.g12.norm_sqr()
}

/// A parameter that violates its domain.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ParamIssue {
    pub field: &'static str,
    pub message: String,
}

impl fmt::Display for ParamIssue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.field, self.message)
    }
}

/// Outcome of [`validate`]: hard errors plus advisory warnings.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ValidationReport {
    pub errors: Vec<ParamIssue>,
    pub warnings: Vec<String>,
}

impl ValidationReport {
    pub fn is_ok(&self) -> bool {
        self.errors.is_empty()
    }

    pub fn into_result(self) -> Result<()> {
        if self.errors.is_empty() {
            Ok(())
        } else {
            let msg = self
                .errors
                .iter()
                .map(ToString::to_string)
                .collect::<Vec<_>>()
                .join("; ");
            Err(Error::InvalidParams(msg))
        }
    }
}

/// Checks parameter domains. Never fails; problems are collected in the report.
pub fn validate<T: Real>(params: &SystemParams<T>) -> ValidationReport {
    let mut report = ValidationReport::default();
    let mut err = |field: &'static str, message: String| {
        report.errors.push(ParamIssue { field, message });
    };

    let finite = |z: C<T>| z.re.is_finite() && z.im.is_finite();
    if !finite(params.g01) {
        err("g01", "must be finite".into());
    }
    if !finite(params.g12) {
        err("g12", "must be finite".into());
    }
    if !params.kappa.is_finite() || params.kappa <= T::zero() {
        err("kappa", format!("must be positive, got {}", params.kappa));
    }
    if !params.delta.is_finite() {
        err("delta", "must be finite".into());
    }
    if !params.big_delta.is_finite() {
        err("big_delta", "must be finite".into());
    }
    if !params.n_th.is_finite() || params.n_th < T::zero() {
        err("n_th", format!("must be nonnegative, got {}", params.n_th));
    }
    if !(params.eta >= T::zero() && params.eta <= T::one()) {
        err("eta", format!("must lie in [0, 1], got {}", params.eta));
    }

    if report.errors.is_empty() {
        let g = params.max_coupling();
        if g > T::zero() {
            let ratio = params.kappa / g;
            if ratio < T::lit(BAD_CAVITY_RATIO) {
                report
                    .warnings
                    .push(format!("bad-cavity ratio {} < {}", ratio, BAD_CAVITY_RATIO));
            }
        } else {
            report
                .warnings
                .push("g01 = g12 = 0: atom decoupled from the cavity".into());
        }
    }
    report
}
