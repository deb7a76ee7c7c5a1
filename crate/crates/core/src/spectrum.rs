//! Steady-state probe absorption spectrum via the quantum regression theorem.
//!
//! The probe polarization `P = d1·A01 + d2·A12` closes under regression on
//! the coherence pair `(rho10, rho21)`, so the spectrum at each frequency is a
//! single 2×2 complex resolvent solve:
//!
//! ```text
//! A(ω) = Re Σ_jk d_j d_k* [ (−M − iω)⁻¹ (V_fwd − V_bwd) ]_jk
//! ```
//!
//! with `M` the coherence generator and `V_fwd = diag(rho00, rho11)`,
//! `V_bwd = diag(rho11, rho22)` the equal-time operator products. `rho20`
//! never enters.

use crate::bloch::{coherence_generator, steady_state, AtomState};
use crate::error::{Error, Result};
use crate::linalg::Mat2;
use crate::model::SystemParams;
use crate::scalar::{re, Real, C};

/// Probe weights `d1 = e_p·d01`, `d2 = e_p·d12`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ProbeConfig<T> {
    pub d1: C<T>,
    pub d2: C<T>,
}

impl<T: Real> ProbeConfig<T> {
    pub fn new(d1: C<T>, d2: C<T>) -> Result<Self> {
        let p = Self { d1, d2 };
        p.ensure_valid()?;
        Ok(p)
    }

    /// Ground ↔ intermediate absorption.
    pub fn probe_01() -> Self {
        Self {
            d1: re(T::one()),
            d2: re(T::zero()),
        }
    }

    /// Intermediate ↔ upper absorption.
    pub fn probe_12() -> Self {
        Self {
            d1: re(T::zero()),
            d2: re(T::one()),
        }
    }

    /// Stepwise two-photon absorption with equal weights.
    pub fn two_photon() -> Self {
        Self {
            d1: re(T::one()),
            d2: re(T::one()),
        }
    }

    pub fn scaled(&self, c: C<T>) -> Self {
        Self {
            d1: self.d1 * c,
            d2: self.d2 * c,
        }
    }

    pub fn ensure_valid(&self) -> Result<()> {
        let finite = |z: C<T>| z.re.is_finite() && z.im.is_finite();
        if !finite(self.d1) || !finite(self.d2) {
            return Err(Error::InvalidInput("probe weights must be finite".into()));
        }
        if self.d1.norm_sqr() == T::zero() && self.d2.norm_sqr() == T::zero() {
            return Err(Error::InvalidInput("probe weights d1 = d2 = 0".into()));
        }
        Ok(())
    }
}

/// Uniform grid of probe offsets `omega`, endpoints included.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FrequencyGrid<T> {
    pub omega_min: T,
    pub omega_max: T,
    pub count: usize,
}

impl<T: Real> FrequencyGrid<T> {
    pub fn new(omega_min: T, omega_max: T, count: usize) -> Result<Self> {
        if !(omega_min.is_finite() && omega_max.is_finite() && omega_min < omega_max) {
            return Err(Error::InvalidInput(format!(
                "grid needs finite omega_min < omega_max, got [{omega_min}, {omega_max}]"
            )));
        }
        if count < 2 {
            return Err(Error::InvalidInput(format!(
                "grid needs at least 2 points, got {count}"
            )));
        }
        Ok(Self {
            omega_min,
            omega_max,
            count,
        })
    }

    /// `[-20, 20]` with 2001 points.
    pub fn default_resonant() -> Self {
        Self {
            omega_min: T::lit(-20.0),
            omega_max: T::lit(20.0),
            count: 2001,
        }
    }

    /// Grid centred on zero with the given half-width and point count.
    pub fn symmetric(half_width: T, count: usize) -> Result<Self> {
        Self::new(-half_width, half_width, count)
    }

    pub fn spacing(&self) -> T {
        (self.omega_max - self.omega_min) / T::from_count(self.count - 1)
    }

    /// The `i`-th point. Computed about the grid centre so that a grid
    /// symmetric about zero yields exactly negated pairs.
    pub fn omega(&self, i: usize) -> T {
        let last = self.count - 1;
        if i == 0 {
            return self.omega_min;
        }
        if i == last {
            return self.omega_max;
        }
        let two = T::lit(2.0);
        let centre = (self.omega_min + self.omega_max) / two;
        let half = (self.omega_max - self.omega_min) / two;
        let k = T::from_count(2 * i) - T::from_count(last);
        centre + half * (k / T::from_count(last))
    }

    pub fn points(&self) -> Vec<T> {
        (0..self.count).map(|i| self.omega(i)).collect()
    }
}

/// Which model produced a trace; decides whether an exact evaluator exists.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TraceOrigin {
    /// Reduced atomic model; re-evaluable from the echoed parameters.
    Reduced,
    /// Full atom ⊗ cavity model at the given Fock truncation.
    FullModel { n_max: usize },
    /// Samples with no attached model.
    External,
}

/// Absorption values on a frequency grid, with the inputs that produced them.
#[derive(Clone, Debug, PartialEq)]
pub struct SpectrumTrace<T> {
    pub omegas: Vec<T>,
    pub values: Vec<T>,
    pub params: SystemParams<T>,
    pub probe: ProbeConfig<T>,
    pub origin: TraceOrigin,
}

impl<T: Real> SpectrumTrace<T> {
    pub fn len(&self) -> usize {
        self.omegas.len()
    }

    pub fn is_empty(&self) -> bool {
        self.omegas.is_empty()
    }

    pub fn max_value(&self) -> T {
        self.values.iter().copied().fold(T::neg_infinity(), T::max)
    }

    /// Values scaled so the maximum is 1.
    pub fn peak_normalized(&self) -> Vec<T> {
        let m = self.max_value();
        self.values.iter().map(|v| *v / m).collect()
    }

    /// Exact re-evaluation for reduced-model traces.
    pub fn exact_model(&self) -> Option<SpectrumModel<T>> {
        match self.origin {
            TraceOrigin::Reduced => SpectrumModel::new(&self.params, &self.probe).ok(),
            _ => None,
        }
    }
}

/// Equal-time operator products that seed the regression equations.
///
/// `forward = (<A01 A10>, <A12 A21>) = (rho00, rho11)` and
/// `backward = (<A10 A01>, <A21 A12>) = (rho11, rho22)`; the mixed products
/// `A01 A21`, `A12 A10`, `A10 A12`, `A21 A01` vanish identically.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CorrelationInitials<T> {
    pub forward: [T; 2],
    pub backward: [T; 2],
}

impl<T: Real> CorrelationInitials<T> {
    /// Diagonal of `V_fwd - V_bwd`.
    pub fn difference(&self) -> [T; 2] {
        [self.forward[0] - self.backward[0], self.forward[1] - self.backward[1]]
    }
}

pub fn correlation_initials<T: Real>(steady: &AtomState<T>) -> CorrelationInitials<T> {
    CorrelationInitials {
        forward: [steady.rho00, steady.rho11],
        backward: [steady.rho11, steady.rho22],
    }
}

/// Reduced-model absorption as a function of `omega`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SpectrumModel<T> {
    generator: Mat2<T>,
    source: [C<T>; 2],
    weights: [C<T>; 2],
}

impl<T: Real> SpectrumModel<T> {
    pub fn new(params: &SystemParams<T>, probe: &ProbeConfig<T>) -> Result<Self> {
        params.ensure_valid()?;
        probe.ensure_valid()?;
        let v = correlation_initials(&steady_state(params)).difference();
        Ok(Self {
            generator: coherence_generator(params).m,
            source: [probe.d1.conj() * v[0], probe.d2.conj() * v[1]],
            weights: [probe.d1, probe.d2],
        })
    }

    /// Regression vector `(V_fwd - V_bwd) d*` at `τ = 0`.
    pub fn source(&self) -> [C<T>; 2] {
        self.source
    }

    pub fn generator(&self) -> &Mat2<T> {
        &self.generator
    }

    pub fn absorption(&self, omega: T) -> Result<T> {
        let shift = Mat2::identity().scale(C::new(T::zero(), omega));
        let a = Mat2::identity().scale(re(-T::one())) * self.generator - shift;
        let y = a
            .solve(self.source)
            .ok_or_else(|| Error::NumericalFailure(format!("singular resolvent at omega = {omega}")))?;
        Ok((self.weights[0] * y[0] + self.weights[1] * y[1]).re)
    }
}

/// Reduced-model spectrum on `grid`.
pub fn absorption<T: Real>(
    params: &SystemParams<T>,
    probe: &ProbeConfig<T>,
    grid: &FrequencyGrid<T>,
) -> Result<SpectrumTrace<T>> {
    let model = SpectrumModel::new(params, probe)?;
    let omegas = grid.points();
    let values = omegas
        .iter()
        .map(|&w| model.absorption(w))
        .collect::<Result<Vec<_>>>()?;
    if let Some(bad) = values.iter().find(|v| !v.is_finite()) {
        return Err(Error::NumericalFailure(format!("non-finite absorption value {bad}")));
    }
    Ok(SpectrumTrace {
        omegas,
        values,
        params: *params,
        probe: *probe,
        origin: TraceOrigin::Reduced,
    })
}

/// Uniformly sampled steady-state commutator correlation `<[P(τ), P†(0)]>`.
#[derive(Clone, Debug, PartialEq)]
pub struct CorrelationSeries<T> {
    pub dt: T,
    pub values: Vec<C<T>>,
}

/// Fourier–Laplace integral estimate with the size of its analytic tail.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FourierEstimate<T> {
    /// `Re ∫₀^∞ C(τ) e^{iωτ} dτ`.
    pub value: T,
    /// Magnitude of the exponential tail added beyond the last sample.
    pub tail: T,
}

impl<T: Real> CorrelationSeries<T> {
    pub fn taus(&self) -> Vec<T> {
        (0..self.values.len()).map(|i| self.dt * T::from_count(i)).collect()
    }

    /// Trapezoid rule over the samples plus an exponential tail fitted to
    /// the last two samples.
    pub fn fourier(&self, omega: T) -> FourierEstimate<T> {
        let n = self.values.len();
        let phase = |i: usize| C::new(T::zero(), omega * self.dt * T::from_count(i)).exp();
        let f = |i: usize| self.values[i] * phase(i);
        let half = T::lit(0.5);
        let mut sum = (f(0) + f(n - 1)) * half;
        for i in 1..n - 1 {
            sum = sum + f(i);
        }
        let body = sum * self.dt;

        let (last, prev) = (f(n - 1), f(n - 2));
        let tail = if prev.norm() > T::zero() && last.norm() < prev.norm() {
            let rate = -(last / prev).ln() / self.dt;
            last / rate
        } else {
            C::new(T::zero(), T::zero())
        };
        FourierEstimate {
            value: (body + tail).re,
            tail: tail.norm(),
        }
    }
}

/// Propagates the regression equations in `τ` with the exact one-step
/// propagator `exp(M dτ)`; independent of the resolvent route in
/// [`absorption`].
pub fn correlation_time_domain<T: Real>(
    params: &SystemParams<T>,
    probe: &ProbeConfig<T>,
    tau_max: T,
    steps: usize,
) -> Result<CorrelationSeries<T>> {
    if !(tau_max > T::zero()) || steps < 2 {
        return Err(Error::InvalidInput(format!(
            "correlation needs tau_max > 0 and steps >= 2, got {tau_max}, {steps}"
        )));
    }
    params.ensure_valid()?;
    probe.ensure_valid()?;
    let v = correlation_initials(&steady_state(params)).difference();
    let m = coherence_generator(params).m;
    let dt = tau_max / T::from_count(steps);
    let step = m.expm(dt);
    let mut x = [probe.d1.conj() * v[0], probe.d2.conj() * v[1]];
    let mut values = Vec::with_capacity(steps + 1);
    for _ in 0..=steps {
        values.push(probe.d1 * x[0] + probe.d2 * x[1]);
        x = step.mul_vec(x);
    }
    if values.iter().any(|z| !(z.re.is_finite() && z.im.is_finite())) {
        return Err(Error::NumericalFailure("correlation propagation diverged".into()));
    }
    Ok(CorrelationSeries { dt, values })
}
