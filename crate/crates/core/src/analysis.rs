//! Linewidths, peak positions and Lorentzian decompositions of spectra.
//!
//! Lorentzian components use the area-like convention
//! `L(ω) = a · (w/2) / ((w/2)² + (ω − c)²)`, so a component of weight `a`
//! has height `2a/w` at its centre and area `π a`.

use crate::bloch::coherence_generator;
use crate::error::{Error, Result};
use crate::linalg::solve_real;
use crate::model::{BlochForm, SystemParams};
use crate::scalar::Real;
use crate::spectrum::SpectrumTrace;

/// Analytic `(Γ−, Γ+)` for resonant, equal-strength couplings.
///
/// Fails with [`Error::Inapplicable`] unless `Δ = δ = 0` and
/// `|g01| = |g12|`; use [`eigen_linewidths`] otherwise.
pub fn closed_form_linewidths<T: Real>(params: &SystemParams<T>) -> Result<(T, T)> {
    params.ensure_valid()?;
    let (a01, a12) = (params.g01.norm_sqr(), params.g12.norm_sqr());
    let scale = a01.max(a12).max(T::min_positive_value());
    if params.delta != T::zero() || params.big_delta != T::zero() || (a01 - a12).abs() > T::lit(1e-12) * scale {
        return Err(Error::Inapplicable(
            "analytic form inapplicable: needs delta = Delta = 0 and |g01| = |g12|; use eigen_linewidths".into(),
        ));
    }
    let gamma = a01 / params.kappa;
    let n = params.n_th;
    let eta = params.eta;
    let two = T::lit(2.0);
    let (base, split) = match params.form {
        BlochForm::Published => (
            two * (T::lit(3.0) * n + T::one()),
            T::lit(4.0) * eta * (n * (n + T::one())).sqrt(),
        ),
        BlochForm::MasterEquation => (
            T::lit(6.0) * n + T::lit(3.0),
            (T::one() + T::lit(16.0) * eta * eta * n * (n + T::one())).sqrt(),
        ),
    };
    Ok(((base - split) * gamma, (base + split) * gamma))
}

/// One pole of the coherence resolvent.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EigenLine<T> {
    /// Line centre `−Im λ`.
    pub center_shift: T,
    /// Full width `−2 Re λ`.
    pub fwhm: T,
}

/// Poles of the reduced spectrum from the eigenvalues of `M`, narrowest first.
pub fn eigen_linewidths<T: Real>(params: &SystemParams<T>) -> Vec<EigenLine<T>> {
    let mut lines: Vec<_> = coherence_generator(params)
        .eigenvalues()
        .iter()
        .map(|l| EigenLine {
            center_shift: -l.im,
            fwhm: -T::lit(2.0) * l.re,
        })
        .collect();
    lines.sort_by(|a, b| a.fwhm.partial_cmp(&b.fwhm).unwrap_or(std::cmp::Ordering::Equal));
    lines
}

/// Location and height of a spectral maximum.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Peak<T> {
    pub omega: T,
    pub height: T,
    /// Grid index of the sampled maximum.
    pub index: usize,
}

fn grid_argmax<T: Real>(trace: &SpectrumTrace<T>) -> Result<usize> {
    if trace.values.len() < 3 || trace.values.len() != trace.omegas.len() {
        return Err(Error::InvalidInput(format!(
            "trace needs at least 3 matching samples, got {} omegas / {} values",
            trace.omegas.len(),
            trace.values.len()
        )));
    }
    let mut best = 0;
    for (i, v) in trace.values.iter().enumerate() {
        if !v.is_finite() {
            return Err(Error::InvalidInput(format!("non-finite spectrum value at index {i}")));
        }
        if *v > trace.values[best] {
            best = i;
        }
    }
    if best == 0 || best == trace.values.len() - 1 {
        return Err(Error::GridTooNarrow(format!(
            "maximum sits on the grid boundary at omega = {}",
            trace.omegas[best]
        )));
    }
    Ok(best)
}

/// Grid maximum refined by a parabola through the three surrounding samples.
pub fn peak<T: Real>(trace: &SpectrumTrace<T>) -> Result<Peak<T>> {
    let i = grid_argmax(trace)?;
    let (x0, x1, x2) = (trace.omegas[i - 1], trace.omegas[i], trace.omegas[i + 1]);
    let (y0, y1, y2) = (trace.values[i - 1], trace.values[i], trace.values[i + 1]);
    // divided differences of the interpolating parabola
    let d01 = (y1 - y0) / (x1 - x0);
    let d12 = (y2 - y1) / (x2 - x1);
    let curv = (d12 - d01) / (x2 - x0);
    if !(curv < T::zero()) {
        return Ok(Peak {
            omega: x1,
            height: y1,
            index: i,
        });
    }
    let slope1 = d01 + curv * (x1 - x0);
    let omega = x1 - slope1 / (T::lit(2.0) * curv);
    let omega = omega.max(x0).min(x2);
    let height = y1 + slope1 * (omega - x1) + curv * (omega - x1) * (omega - x1);
    Ok(Peak {
        omega,
        height,
        index: i,
    })
}

/// Peak refined by golden-section search on an exact evaluator.
pub fn peak_with<T, F>(trace: &SpectrumTrace<T>, mut exact: F) -> Result<Peak<T>>
where
    T: Real,
    F: FnMut(T) -> Result<T>,
{
    let coarse = peak(trace)?;
    let i = coarse.index;
    let (mut a, mut b) = (trace.omegas[i - 1], trace.omegas[i + 1]);
    let r = (T::lit(5.0).sqrt() - T::one()) / T::lit(2.0);
    let mut c = b - r * (b - a);
    let mut d = a + r * (b - a);
    let (mut fc, mut fd) = (exact(c)?, exact(d)?);
    for _ in 0..200 {
        if (b - a).abs() <= T::epsilon() * T::lit(4.0) * (T::one() + a.abs().max(b.abs())) {
            break;
        }
        if fc > fd {
            b = d;
            d = c;
            fd = fc;
            c = b - r * (b - a);
            fc = exact(c)?;
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + r * (b - a);
            fd = exact(d)?;
        }
    }
    let mut omega = (a + b) / T::lit(2.0);
    let mut height = exact(omega)?;
    let on_grid = trace.values[i];
    if on_grid > height {
        omega = trace.omegas[i];
        height = exact(omega)?;
    }
    Ok(Peak {
        omega,
        height,
        index: i,
    })
}

fn bisect<T, F>(mut f: F, mut lo: T, mut hi: T, level: T) -> Result<T>
where
    T: Real,
    F: FnMut(T) -> Result<T>,
{
    let mut f_lo = f(lo)? - level;
    let f_hi = f(hi)? - level;
    if f_lo == T::zero() {
        return Ok(lo);
    }
    if f_hi == T::zero() {
        return Ok(hi);
    }
    for _ in 0..200 {
        let mid = (lo + hi) / T::lit(2.0);
        if mid <= lo.min(hi) || mid >= lo.max(hi) {
            break;
        }
        let f_mid = f(mid)? - level;
        if f_mid == T::zero() {
            return Ok(mid);
        }
        if (f_mid > T::zero()) == (f_lo > T::zero()) {
            lo = mid;
            f_lo = f_mid;
        } else {
            hi = mid;
        }
    }
    Ok((lo + hi) / T::lit(2.0))
}

fn half_max_crossings<T: Real>(trace: &SpectrumTrace<T>, i: usize, half: T) -> Result<(usize, usize)> {
    let v = &trace.values;
    let mut l = i;
    while l > 0 && v[l] >= half {
        l -= 1;
    }
    let mut r = i;
    while r + 1 < v.len() && v[r] >= half {
        r += 1;
    }
    if v[l] >= half || v[r] >= half {
        return Err(Error::GridTooNarrow(
            "half maximum is not bracketed inside the grid".into(),
        ));
    }
    Ok((l, r))
}

fn lerp_crossing<T: Real>(x0: T, y0: T, x1: T, y1: T, level: T) -> T {
    x0 + (level - y0) * (x1 - x0) / (y1 - y0)
}

fn fwhm_grid<T: Real>(trace: &SpectrumTrace<T>, p: &Peak<T>) -> Result<(T, usize, usize)> {
    let half = p.height / T::lit(2.0);
    let (l, r) = half_max_crossings(trace, p.index, half)?;
    let (w, v) = (&trace.omegas, &trace.values);
    let left = lerp_crossing(w[l], v[l], w[l + 1], v[l + 1], half);
    let right = lerp_crossing(w[r - 1], v[r - 1], w[r], v[r], half);
    Ok((right - left, l, r))
}

/// Full width at half maximum of the composite curve.
///
/// Reduced-model traces are refined on the exact absorption function;
/// other traces use linear interpolation between grid samples.
pub fn fwhm<T: Real>(trace: &SpectrumTrace<T>) -> Result<T> {
    match trace.exact_model() {
        Some(model) => fwhm_with(trace, |w| model.absorption(w)),
        None => {
            let p = peak(trace)?;
            fwhm_grid(trace, &p).map(|(w, _, _)| w)
        }
    }
}

/// [`fwhm`] with crossings and peak height refined on `exact`.
pub fn fwhm_with<T, F>(trace: &SpectrumTrace<T>, mut exact: F) -> Result<T>
where
    T: Real,
    F: FnMut(T) -> Result<T>,
{
    let p = peak_with(trace, &mut exact)?;
    let half = p.height / T::lit(2.0);
    let (l, r) = half_max_crossings(trace, p.index, half)?;
    let w = &trace.omegas;
    let left = bisect(&mut exact, w[l + 1], w[l], half)?;
    let right = bisect(&mut exact, w[r - 1], w[r], half)?;
    Ok(right - left)
}

/// One Lorentzian term `a · (w/2) / ((w/2)² + (ω − c)²)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LorentzianComponent<T> {
    pub center: T,
    pub fwhm: T,
    /// Area-like weight `a`; the area is `π a`.
    pub amplitude: T,
}

impl<T: Real> LorentzianComponent<T> {
    pub fn eval(&self, omega: T) -> T {
        let hw = self.fwhm / T::lit(2.0);
        let x = omega - self.center;
        self.amplitude * hw / (hw * hw + x * x)
    }

    pub fn height(&self) -> T {
        T::lit(2.0) * self.amplitude / self.fwhm
    }
}

/// Result of [`fit_lorentzians`].
#[derive(Clone, Debug, PartialEq)]
pub struct LorentzianFit<T> {
    /// Components sorted by width, narrowest first.
    pub components: Vec<LorentzianComponent<T>>,
    /// `‖model − data‖ / ‖data‖` over the grid.
    pub residual: T,
    pub iterations: usize,
    /// False when the iteration cap was hit; `components` is then the best so far.
    pub converged: bool,
    /// Two components that coincide, or one with negligible weight.
    pub degenerate: bool,
}

impl<T: Real> LorentzianFit<T> {
    pub fn eval(&self, omega: T) -> T {
        self.components.iter().fold(T::zero(), |s, c| s + c.eval(omega))
    }
}

const MAX_ITER: usize = 200;

fn unpack<T: Real>(p: &[T]) -> Vec<LorentzianComponent<T>> {
    p.chunks(3)
        .map(|c| LorentzianComponent {
            center: c[0],
            fwhm: c[1],
            amplitude: c[2],
        })
        .collect()
}

fn cost<T: Real>(p: &[T], x: &[T], y: &[T]) -> T {
    let comps = unpack(p);
    x.iter().zip(y).fold(T::zero(), |s, (&xi, &yi)| {
        let r = comps.iter().fold(T::zero(), |m, c| m + c.eval(xi)) - yi;
        s + r * r
    })
}

/// Levenberg–Marquardt fit of `n_components` (1 or 2) Lorentzians.
///
/// Starting centres and widths come from [`eigen_linewidths`] of the
/// echoed parameters, with the peak height split equally between
/// components.
pub fn fit_lorentzians<T: Real>(trace: &SpectrumTrace<T>, n_components: usize) -> Result<LorentzianFit<T>> {
    if !(1..=2).contains(&n_components) {
        return Err(Error::InvalidInput(format!(
            "n_components must be 1 or 2, got {n_components}"
        )));
    }
    if trace.values.iter().any(|v| !(*v > T::zero()) || !v.is_finite()) {
        return Err(Error::InvalidInput(
            "Lorentzian fit needs a strictly positive trace".into(),
        ));
    }
    let pk = peak(trace)?;
    let lines = eigen_linewidths(&trace.params);
    let guess: Vec<(T, T)> = if n_components == 2 {
        lines.iter().map(|l| (l.center_shift, l.fwhm)).collect()
    } else {
        let width = fwhm_grid(trace, &pk)
            .map(|(w, _, _)| w)
            .unwrap_or_else(|_| (lines[0].fwhm + lines[1].fwhm) / T::lit(2.0));
        vec![(pk.omega, width)]
    };
    let inv_sum = guess.iter().fold(T::zero(), |s, g| s + T::lit(2.0) / g.1);
    let amp = pk.height / inv_sum;
    let p0: Vec<T> = guess.iter().flat_map(|&(c, w)| [c, w, amp]).collect();
    fit_from(trace, p0)
}

/// [`fit_lorentzians`] from explicit starting components.
pub fn fit_lorentzians_from<T: Real>(
    trace: &SpectrumTrace<T>,
    initial: &[LorentzianComponent<T>],
) -> Result<LorentzianFit<T>> {
    if !(1..=2).contains(&initial.len()) {
        return Err(Error::InvalidInput("1 or 2 starting components required".into()));
    }
    let p0 = initial.iter().flat_map(|c| [c.center, c.fwhm, c.amplitude]).collect();
    fit_from(trace, p0)
}

fn fit_from<T: Real>(trace: &SpectrumTrace<T>, mut p: Vec<T>) -> Result<LorentzianFit<T>> {
    let x = &trace.omegas;
    let y = &trace.values;
    let np = p.len();
    let norm_y = y.iter().fold(T::zero(), |s, v| s + *v * *v);
    let floor = norm_y * T::epsilon() * T::epsilon();
    let mut c = cost(&p, x, y);
    let mut lambda = T::lit(1e-3);
    let mut iterations = 0;
    let mut converged = false;

    while iterations < MAX_ITER {
        iterations += 1;
        if c <= floor {
            converged = true;
            break;
        }
        let comps = unpack(&p);
        let mut jtj = vec![vec![T::zero(); np]; np];
        let mut jtr = vec![T::zero(); np];
        let mut row = vec![T::zero(); np];
        for (&xi, &yi) in x.iter().zip(y) {
            let mut model = T::zero();
            for (k, comp) in comps.iter().enumerate() {
                let hw = comp.fwhm / T::lit(2.0);
                let dx = xi - comp.center;
                let den = hw * hw + dx * dx;
                model = model + comp.amplitude * hw / den;
                row[3 * k] = T::lit(2.0) * comp.amplitude * hw * dx / (den * den);
                row[3 * k + 1] = comp.amplitude * (dx * dx - hw * hw) / (T::lit(2.0) * den * den);
                row[3 * k + 2] = hw / den;
            }
            let r = model - yi;
            for a in 0..np {
                jtr[a] = jtr[a] + row[a] * r;
                for b in 0..np {
                    jtj[a][b] = jtj[a][b] + row[a] * row[b];
                }
            }
        }

        let mut improved = false;
        while lambda < T::lit(1e16) {
            let mut a = jtj.clone();
            for (k, rowk) in a.iter_mut().enumerate() {
                let d = jtj[k][k].max(T::min_positive_value().sqrt());
                rowk[k] = rowk[k] + lambda * d;
            }
            let rhs: Vec<T> = jtr.iter().map(|v| -*v).collect();
            let step = match solve_real(a, rhs) {
                Some(s) => s,
                None => {
                    lambda = lambda * T::lit(10.0);
                    continue;
                }
            };
            let trial: Vec<T> = p.iter().zip(&step).map(|(a, b)| *a + *b).collect();
            if trial.chunks(3).any(|q| !(q[1] > T::zero())) {
                lambda = lambda * T::lit(10.0);
                continue;
            }
            let c_new = cost(&trial, x, y);
            if c_new.is_finite() && c_new < c {
                let rel = (c - c_new) / c;
                p = trial;
                c = c_new;
                lambda = (lambda / T::lit(10.0)).max(T::lit(1e-12));
                improved = true;
                if rel < T::lit(1e-10) {
                    converged = true;
                }
                break;
            }
            lambda = lambda * T::lit(10.0);
        }
        if !improved {
            // no descent direction left: local minimum to working precision
            converged = true;
        }
        if converged {
            break;
        }
    }

    let mut components = unpack(&p);
    components.sort_by(|a, b| a.fwhm.partial_cmp(&b.fwhm).unwrap_or(std::cmp::Ordering::Equal));
    let degenerate = is_degenerate(&components);
    let residual = if norm_y > T::zero() {
        (c / norm_y).sqrt()
    } else {
        T::zero()
    };
    Ok(LorentzianFit {
        components,
        residual,
        iterations,
        converged,
        degenerate,
    })
}

fn is_degenerate<T: Real>(comps: &[LorentzianComponent<T>]) -> bool {
    if comps.len() < 2 {
        return false;
    }
    let (a, b) = (&comps[0], &comps[1]);
    let scale = a.fwhm + b.fwhm;
    let tol = T::lit(1e-3);
    let coincide = (a.center - b.center).abs() < tol * scale && (a.fwhm - b.fwhm).abs() < tol * scale;
    let total = a.amplitude.abs() + b.amplitude.abs();
    let negligible = a.amplitude.abs().min(b.amplitude.abs()) < T::lit(1e-6) * total;
    coincide || negligible || a.amplitude <= T::zero() || b.amplitude <= T::zero()
}

/// Linewidth summary of a spectrum.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LinewidthReport<T> {
    pub gamma_minus: T,
    pub gamma_plus: T,
    /// Whether `gamma_∓` came from the closed form.
    pub analytic: bool,
    /// FWHM of the composite curve.
    pub numeric_fwhm: T,
    pub peak_omega: T,
    pub peak_height: T,
}

pub fn linewidth_report<T: Real>(trace: &SpectrumTrace<T>) -> Result<LinewidthReport<T>> {
    let (gamma_minus, gamma_plus, analytic) = match closed_form_linewidths(&trace.params) {
        Ok((m, p)) => (m, p, true),
        Err(Error::Inapplicable(_)) => {
            let lines = eigen_linewidths(&trace.params);
            (lines[0].fwhm, lines[1].fwhm, false)
        }
        Err(e) => return Err(e),
    };
    let p = match trace.exact_model() {
        Some(m) => peak_with(trace, |w| m.absorption(w))?,
        None => peak(trace)?,
    };
    Ok(LinewidthReport {
        gamma_minus,
        gamma_plus,
        analytic,
        numeric_fwhm: fwhm(trace)?,
        peak_omega: p.omega,
        peak_height: p.height,
    })
}
