//! Dormand–Prince 5(4) embedded Runge–Kutta integrator for small fixed-size systems.

use crate::error::{Error, Result};
use crate::scalar::Real;

const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;

const B1: f64 = 35.0 / 384.0;
const B3: f64 = 500.0 / 1113.0;
const B4: f64 = 125.0 / 192.0;
const B5: f64 = -2187.0 / 6784.0;
const B6: f64 = 11.0 / 84.0;

// fifth-order minus fourth-order weights
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

/// Integration statistics.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct Stats {
    pub accepted: usize,
    pub rejected: usize,
}

fn axpy<T: Real, const N: usize>(y: &[T; N], terms: &[(f64, &[T; N])], h: T) -> [T; N] {
    let mut out = *y;
    for (c, k) in terms {
        let w = T::lit(*c) * h;
        for i in 0..N {
            out[i] = out[i] + w * k[i];
        }
    }
    out
}

/// Integrates the autonomous system `y' = f(y)` from `t = 0` to `t_end`.
///
/// Each step keeps the scaled local error estimate below `tol` (mixed
/// absolute/relative norm). Fails when the step size underflows.
pub fn integrate<T, F, const N: usize>(f: F, y0: [T; N], t_end: T, tol: T) -> Result<([T; N], Stats)>
where
    T: Real,
    F: Fn(&[T; N]) -> [T; N],
{
    let mut stats = Stats::default();
    if !(t_end >= T::zero()) || !(tol > T::zero()) {
        return Err(Error::InvalidInput("integrate: need t_end >= 0 and tol > 0".into()));
    }
    if t_end == T::zero() {
        return Ok((y0, stats));
    }

    let mut t = T::zero();
    let mut y = y0;
    let mut k1 = f(&y);
    let norm0 = k1.iter().fold(T::zero(), |m, v| m.max(v.abs()));
    let mut h = if norm0 > T::zero() {
        (T::lit(0.01) / norm0).min(t_end)
    } else {
        t_end
    };
    let h_min = t_end * T::epsilon() * T::lit(16.0);

    while t < t_end {
        if t + h > t_end {
            h = t_end - t;
        }
        if h < h_min {
            return Err(Error::NumericalFailure(format!(
                "step size underflow at t = {t} (h = {h:e})"
            )));
        }
        let k2 = f(&axpy(&y, &[(A21, &k1)], h));
        let k3 = f(&axpy(&y, &[(A31, &k1), (A32, &k2)], h));
        let k4 = f(&axpy(&y, &[(A41, &k1), (A42, &k2), (A43, &k3)], h));
        let k5 = f(&axpy(&y, &[(A51, &k1), (A52, &k2), (A53, &k3), (A54, &k4)], h));
        let k6 = f(&axpy(
            &y,
            &[(A61, &k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)],
            h,
        ));
        let y_new = axpy(&y, &[(B1, &k1), (B3, &k3), (B4, &k4), (B5, &k5), (B6, &k6)], h);
        let k7 = f(&y_new);
        let err_vec = axpy(
            &[T::zero(); N],
            &[(E1, &k1), (E3, &k3), (E4, &k4), (E5, &k5), (E6, &k6), (E7, &k7)],
            h,
        );
        let err = (0..N).fold(T::zero(), |m, i| {
            let sc = tol * (T::one() + y[i].abs().max(y_new[i].abs()));
            m.max(err_vec[i].abs() / sc)
        });
        if !err.is_finite() {
            return Err(Error::NumericalFailure("non-finite error estimate".into()));
        }
        if err <= T::one() {
            t = t + h;
            y = y_new;
            k1 = k7;
            stats.accepted += 1;
        } else {
            stats.rejected += 1;
        }
        let factor = if err == T::zero() {
            T::lit(5.0)
        } else {
            (T::lit(0.9) * err.powf(T::lit(-0.2))).max(T::lit(0.2)).min(T::lit(5.0))
        };
        h = h * factor;
    }
    Ok((y, stats))
}
