//! Closed-form operations on 2×2 complex matrices.

use std::ops::{Add, Mul, Sub};

use crate::scalar::{re, Real, C};

/// Row-major 2×2 complex matrix.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Mat2<T> {
    pub m: [[C<T>; 2]; 2],
}

impl<T: Real> Mat2<T> {
    pub fn new(a: C<T>, b: C<T>, c: C<T>, d: C<T>) -> Self {
        Self { m: [[a, b], [c, d]] }
    }

    pub fn identity() -> Self {
        let (o, z) = (C::new(T::one(), T::zero()), C::new(T::zero(), T::zero()));
        Self::new(o, z, z, o)
    }

    pub fn diag(a: C<T>, d: C<T>) -> Self {
        let z = C::new(T::zero(), T::zero());
        Self::new(a, z, z, d)
    }

    pub fn trace(&self) -> C<T> {
        self.m[0][0] + self.m[1][1]
    }

    pub fn det(&self) -> C<T> {
        self.m[0][0] * self.m[1][1] - self.m[0][1] * self.m[1][0]
    }

    pub fn scale(&self, s: C<T>) -> Self {
        let m = self.m;
        Self::new(m[0][0] * s, m[0][1] * s, m[1][0] * s, m[1][1] * s)
    }

    pub fn mul_vec(&self, v: [C<T>; 2]) -> [C<T>; 2] {
        [
            self.m[0][0] * v[0] + self.m[0][1] * v[1],
            self.m[1][0] * v[0] + self.m[1][1] * v[1],
        ]
    }

    /// Solves `self · x = b` by Cramer's rule; `None` when the determinant is
    /// negligible relative to the entries.
    pub fn solve(&self, b: [C<T>; 2]) -> Option<[C<T>; 2]> {
        let det = self.det();
        let scale = self.m.iter().flatten().map(|z| z.norm_sqr()).fold(T::zero(), T::max);
        if !(det.norm_sqr() > T::epsilon() * T::epsilon() * scale * scale) {
            return None;
        }
        let m = self.m;
        Some([
            (m[1][1] * b[0] - m[0][1] * b[1]) / det,
            (m[0][0] * b[1] - m[1][0] * b[0]) / det,
        ])
    }

    /// Both eigenvalues, ordered by descending real part.
    pub fn eigenvalues(&self) -> [C<T>; 2] {
        let half = T::lit(0.5);
        let mean = self.trace() * half;
        let s = self.half_gap();
        let (a, b) = (mean + s, mean - s);
        if a.re >= b.re {
            [a, b]
        } else {
            [b, a]
        }
    }

    /// `s` with `s² = ((a - d)/2)² + b·c`; eigenvalues are `tr/2 ± s`.
    fn half_gap(&self) -> C<T> {
        let half = T::lit(0.5);
        let h = (self.m[0][0] - self.m[1][1]) * half;
        (h * h + self.m[0][1] * self.m[1][0]).sqrt()
    }

    /// Matrix exponential `exp(self · t)`.
    pub fn expm(&self, t: T) -> Self {
        let half = T::lit(0.5);
        let mu = self.trace() * half;
        let b = *self - Mat2::identity().scale(mu);
        let s = self.half_gap();
        let st = s * t;
        if st.norm() < T::lit(1e-3) {
            // exp(Bt) = cosh(st) I + t·sinhc(st) B, series in (st)²
            let x2 = st * st;
            let one = re(T::one());
            let cosh = one + x2 * T::lit(0.5) + x2 * x2 * T::lit(1.0 / 24.0) + x2 * x2 * x2 * T::lit(1.0 / 720.0);
            let sinhc =
                one + x2 * T::lit(1.0 / 6.0) + x2 * x2 * T::lit(1.0 / 120.0) + x2 * x2 * x2 * T::lit(1.0 / 5040.0);
            let e = (mu * t).exp();
            (Mat2::identity().scale(cosh) + b.scale(sinhc * t)).scale(e)
        } else {
            // spectral form avoids cosh overflow against exp underflow
            let e1 = ((mu + s) * t).exp();
            let e2 = ((mu - s) * t).exp();
            let id_s = Mat2::identity().scale(s);
            let inv2s = (s * T::lit(2.0)).inv();
            ((b + id_s).scale(e1) - (b - id_s).scale(e2)).scale(inv2s)
        }
    }

    pub fn max_abs_diff(&self, other: &Self) -> T {
        let mut worst = T::zero();
        for i in 0..2 {
            for j in 0..2 {
                worst = worst.max((self.m[i][j] - other.m[i][j]).norm());
            }
        }
        worst
    }
}

impl<T: Real> Add for Mat2<T> {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        let (a, b) = (self.m, o.m);
        Self::new(
            a[0][0] + b[0][0],
            a[0][1] + b[0][1],
            a[1][0] + b[1][0],
            a[1][1] + b[1][1],
        )
    }
}

impl<T: Real> Sub for Mat2<T> {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        let (a, b) = (self.m, o.m);
        Self::new(
            a[0][0] - b[0][0],
            a[0][1] - b[0][1],
            a[1][0] - b[1][0],
            a[1][1] - b[1][1],
        )
    }
}

impl<T: Real> Mul for Mat2<T> {
    type Output = Self;
    fn mul(self, o: Self) -> Self {
        let (a, b) = (self.m, o.m);
        Self::new(
            a[0][0] * b[0][0] + a[0][1] * b[1][0],
            a[0][0] * b[0][1] + a[0][1] * b[1][1],
            a[1][0] * b[0][0] + a[1][1] * b[1][0],
            a[1][0] * b[0][1] + a[1][1] * b[1][1],
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> C<f64> {
        C::new(re, im)
    }

    /// Taylor series with many terms, as an independent reference.
    fn expm_series(a: &Mat2<f64>, t: f64) -> Mat2<f64> {
        let at = a.scale(c(t, 0.0));
        let mut term = Mat2::identity();
        let mut sum = Mat2::identity();
        for k in 1..200 {
            term = (term * at).scale(c(1.0 / k as f64, 0.0));
            sum = sum + term;
        }
        sum
    }

    #[test]
    fn expm_matches_series() {
        let cases = [
            Mat2::new(c(-4.0, 0.0), c(4.0, 0.0), c(2.0, 0.0), c(-4.0, 0.0)),
            Mat2::new(c(-1.0, 2.0), c(0.3, -0.1), c(0.0, 0.0), c(-1.0, 2.0)),
            Mat2::new(c(-2.0, 1.0), c(1.0, 0.5), c(-0.7, 0.2), c(-0.5, -3.0)),
            Mat2::diag(c(-1.0, 0.0), c(-1.0, 0.0)),
        ];
        for a in &cases {
            for &t in &[0.0, 1e-6, 0.01, 0.3, 1.0] {
                let diff = a.expm(t).max_abs_diff(&expm_series(a, t));
                assert!(diff < 1e-13, "t={t} diff={diff}");
            }
        }
    }

    #[test]
    fn expm_long_time_is_finite() {
        let a = Mat2::new(c(-4.0, 0.0), c(4.0, 0.0), c(2.0, 0.0), c(-4.0, 0.0));
        let e = a.expm(1e4);
        assert!(e.m.iter().flatten().all(|z| z.re.is_finite() && z.im.is_finite()));
        assert!(e.m.iter().flatten().all(|z| z.norm() < 1e-300));
    }

    #[test]
    fn eigenvalues_and_solve() {
        let a = Mat2::new(c(-4.0, 0.0), c(4.0, 0.0), c(2.0, 0.0), c(-4.0, 0.0));
        let ev = a.eigenvalues();
        let r = 8f64.sqrt();
        assert!((ev[0] - c(-4.0 + r, 0.0)).norm() < 1e-14);
        assert!((ev[1] - c(-4.0 - r, 0.0)).norm() < 1e-14);

        let x = a.solve([c(1.0, 0.0), c(0.0, 1.0)]).unwrap();
        let back = a.mul_vec(x);
        assert!((back[0] - c(1.0, 0.0)).norm() < 1e-15);
        assert!((back[1] - c(0.0, 1.0)).norm() < 1e-15);

        let singular = Mat2::new(c(1.0, 0.0), c(2.0, 0.0), c(2.0, 0.0), c(4.0, 0.0));
        assert!(singular.solve([c(1.0, 0.0), c(1.0, 0.0)]).is_none());
    }
}
