//! Reduced atomic dynamics after the cavity mode has been eliminated.
//!
//! The atomic density matrix splits into three decoupled blocks: the
//! populations `(rho00, rho11, rho22)`, the coherence pair `(rho10, rho21)`,
//! and the two-photon coherence `rho20`. Each block has a constant generator,
//! so time evolution is exact for the coherence blocks and an embedded
//! Runge–Kutta solve for the populations.
//!
//! [`reduced_superoperator`] builds the full 9×9 generator term by term from
//! the master equation in `A_ij = |i><j|` operator products; it is kept as an
//! independent cross-check of the block generators.

use crate::error::{Error, Result};
use crate::linalg::{solve_real, Mat2};
use crate::model::{decay_rates, frequency_shift, response, BlochForm, SystemParams};
use crate::ode;
use crate::scalar::{close, im, re, Real, C};

/// Atomic density matrix stored by its independent elements.
///
/// `rho_ij = <i|rho|j>`; the elements above the diagonal are the conjugates.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AtomState<T> {
    pub rho00: T,
    pub rho11: T,
    pub rho22: T,
    pub rho10: C<T>,
    pub rho21: C<T>,
    pub rho20: C<T>,
}

impl<T: Real> AtomState<T> {
    pub fn from_populations(p: [T; 3]) -> Self {
        let z = C::new(T::zero(), T::zero());
        Self {
            rho00: p[0],
            rho11: p[1],
            rho22: p[2],
            rho10: z,
            rho21: z,
            rho20: z,
        }
    }

    /// All population in `|0>`.
    pub fn ground() -> Self {
        Self::from_populations([T::one(), T::zero(), T::zero()])
    }

    pub fn populations(&self) -> [T; 3] {
        [self.rho00, self.rho11, self.rho22]
    }

    pub fn trace(&self) -> T {
        self.rho00 + self.rho11 + self.rho22
    }

    /// Full 3×3 matrix, `m[i][j] = <i|rho|j>`.
    pub fn to_matrix(&self) -> [[C<T>; 3]; 3] {
        [
            [re(self.rho00), self.rho10.conj(), self.rho20.conj()],
            [self.rho10, re(self.rho11), self.rho21.conj()],
            [self.rho20, self.rho21, re(self.rho22)],
        ]
    }

    /// Reads the lower triangle of a density matrix.
    pub fn from_matrix(m: &[[C<T>; 3]; 3]) -> Self {
        Self {
            rho00: m[0][0].re,
            rho11: m[1][1].re,
            rho22: m[2][2].re,
            rho10: m[1][0],
            rho21: m[2][1],
            rho20: m[2][0],
        }
    }

    /// Violated invariants (unit trace, populations in `[0, 1]`, and the
    /// `|rho_ij|² <= rho_ii rho_jj` positivity condition), each within `tol`.
    pub fn violations(&self, tol: T) -> Vec<String> {
        let mut out = Vec::new();
        if (self.trace() - T::one()).abs() > tol {
            out.push(format!("trace {} != 1", self.trace()));
        }
        for (name, p) in [("rho00", self.rho00), ("rho11", self.rho11), ("rho22", self.rho22)] {
            if p < -tol || p > T::one() + tol {
                out.push(format!("{name} = {p} outside [0, 1]"));
            }
        }
        for (name, c, a, b) in [
            ("rho10", self.rho10, self.rho11, self.rho00),
            ("rho21", self.rho21, self.rho22, self.rho11),
            ("rho20", self.rho20, self.rho22, self.rho00),
        ] {
            if c.norm_sqr() > a * b + tol {
                out.push(format!("|{name}|² exceeds product of populations"));
            }
        }
        out
    }
}

/// Rate matrix acting on `(rho00, rho11, rho22)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PopulationGenerator<T> {
    pub matrix: [[T; 3]; 3],
}

impl<T: Real> PopulationGenerator<T> {
    pub fn apply(&self, p: &[T; 3]) -> [T; 3] {
        let m = &self.matrix;
        [0, 1, 2].map(|i| m[i][0] * p[0] + m[i][1] * p[1] + m[i][2] * p[2])
    }

    pub fn column_sums(&self) -> [T; 3] {
        let m = &self.matrix;
        [0, 1, 2].map(|j| m[0][j] + m[1][j] + m[2][j])
    }

    /// Normalized null vector (trace row replacing the first equation), or
    /// `None` when the null space is not one-dimensional.
    pub fn null_vector(&self) -> Option<[T; 3]> {
        let m = &self.matrix;
        let a = vec![vec![T::one(), T::one(), T::one()], m[1].to_vec(), m[2].to_vec()];
        let scale = m.iter().flatten().fold(T::zero(), |s, v| s.max(v.abs()));
        if scale == T::zero() {
            return None;
        }
        let x = solve_real(a, vec![T::one(), T::zero(), T::zero()])?;
        let x = [x[0], x[1], x[2]];
        let resid = self.apply(&x).iter().fold(T::zero(), |s, v| s.max(v.abs()));
        (resid <= scale * T::epsilon() * T::lit(1e3)).then_some(x)
    }
}

pub fn population_generator<T: Real>(params: &SystemParams<T>) -> PopulationGenerator<T> {
    let (g1, g2) = decay_rates(params);
    let two = T::lit(2.0);
    let n = params.n_th;
    let n1 = n + T::one();
    PopulationGenerator {
        matrix: [
            [-two * g1 * n, two * g1 * n1, T::zero()],
            [two * g1 * n, -two * g1 * n1 - two * g2 * n, two * g2 * n1],
            [T::zero(), two * g2 * n, -two * g2 * n1],
        ],
    }
}

/// Generator of the coherences: `d/dτ (rho10, rho21)ᵀ = M (rho10, rho21)ᵀ`
/// and `d/dτ rho20 = lambda20 · rho20`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CoherenceGenerator<T> {
    pub m: Mat2<T>,
    pub lambda20: C<T>,
}

impl<T: Real> CoherenceGenerator<T> {
    pub fn eigenvalues(&self) -> [C<T>; 2] {
        self.m.eigenvalues()
    }
}

pub fn coherence_generator<T: Real>(params: &SystemParams<T>) -> CoherenceGenerator<T> {
    let f = response(params);
    let (fm, fp) = (f.f_minus, f.f_plus);
    let n = params.n_th;
    let n1 = n + T::one();
    let n2 = n + n1;
    let a01 = params.g01.norm_sqr();
    let a12 = params.g12.norm_sqr();
    let bd = im(params.big_delta);
    let eta = params.eta;

    let m11 = -(fm * (a01 * n2) + fp.conj() * (a12 * n) + bd);
    let m12 = (fp + fm.conj()) * params.g01.conj() * params.g12 * (n1 * eta);
    let m21 = (fp.conj() + fm) * params.g01 * params.g12.conj() * (n * eta);
    let weight01 = match params.form {
        BlochForm::Published => n,
        BlochForm::MasterEquation => n1,
    };
    let m22 = -(fm.conj() * (a01 * weight01) + fp * (a12 * n2) - bd);

    let (g1, g2) = decay_rates(params);
    let lambda20 = -(re(g1 * n + g2 * n1) + im(frequency_shift(params)));
    CoherenceGenerator {
        m: Mat2::new(m11, m12, m21, m22),
        lambda20,
    }
}

/// Advances `state` by `t` under the reduced dynamics.
///
/// Populations use an adaptive Dormand–Prince step with local tolerance
/// `tol`; the coherence blocks use their exact exponentials.
pub fn evolve<T: Real>(state: &AtomState<T>, t: T, params: &SystemParams<T>, tol: T) -> Result<AtomState<T>> {
    params.ensure_valid()?;
    if !(t >= T::zero()) {
        return Err(Error::InvalidInput(format!("evolve: t must be >= 0, got {t}")));
    }
    if !(tol > T::zero()) {
        return Err(Error::InvalidInput(format!("evolve: tol must be > 0, got {tol}")));
    }
    let pops = population_generator(params);
    let (p, _) = ode::integrate(|y| pops.apply(y), state.populations(), t, tol)?;
    let coh = coherence_generator(params);
    let [r10, r21] = coh.m.expm(t).mul_vec([state.rho10, state.rho21]);
    Ok(AtomState {
        rho00: p[0],
        rho11: p[1],
        rho22: p[2],
        rho10: r10,
        rho21: r21,
        rho20: state.rho20 * (coh.lambda20 * t).exp(),
    })
}

/// Thermal steady state: populations `((N+1)², N(N+1), N²) / (3N(N+1)+1)`,
/// all coherences zero. Independent of couplings, detunings and `eta`.
pub fn steady_state<T: Real>(params: &SystemParams<T>) -> AtomState<T> {
    let n = params.n_th;
    let n1 = n + T::one();
    let d = T::lit(3.0) * n * n1 + T::one();
    AtomState::from_populations([n1 * n1 / d, n * n1 / d, n * n / d])
}

/// [`steady_state`] cross-checked against the null space of the population
/// generator. Requires both decay rates to be nonzero.
pub fn steady_state_checked<T: Real>(params: &SystemParams<T>) -> Result<AtomState<T>> {
    params.ensure_valid()?;
    let closed = steady_state(params);
    let null = population_generator(params)
        .null_vector()
        .ok_or_else(|| Error::NumericalFailure("population generator has no unique null vector".into()))?;
    let tol = T::lit(1e-12).max(T::epsilon() * T::lit(64.0));
    for (a, b) in closed.populations().iter().zip(null.iter()) {
        if !close(*a, *b, tol) {
            return Err(Error::NumericalFailure(format!(
                "closed-form steady state {a} disagrees with null space {b}"
            )));
        }
    }
    Ok(closed)
}

/// Long-time limit of `initial`, including the degenerate couplings.
#[derive(Clone, Debug, PartialEq)]
pub struct Relaxed<T> {
    pub state: AtomState<T>,
    pub warning: Option<String>,
}

/// Long-time limit reached from `initial`.
///
/// With both decay rates nonzero this is [`steady_state`]. When a transition
/// has no cavity-induced decay the population it cannot reach is conserved
/// and the remaining two levels thermalize; with both couplings zero the
/// initial populations are returned unchanged.
pub fn relax<T: Real>(params: &SystemParams<T>, initial: &AtomState<T>) -> Result<Relaxed<T>> {
    params.ensure_valid()?;
    let (g1, g2) = decay_rates(params);
    let n = params.n_th;
    let n1 = n + T::one();
    let split = |rest: T| (rest * n1 / (n + n1), rest * n / (n + n1));
    let p = initial.populations();
    let zero = T::zero();
    let (pops, warning) = match (g1 > zero, g2 > zero) {
        (true, true) => {
            return Ok(Relaxed {
                state: steady_state(params),
                warning: None,
            })
        }
        (true, false) => {
            let (a, b) = split(T::one() - p[2]);
            (
                [a, b, p[2]],
                Some("no decay on |1> <-> |2>: rho22 conserved".to_string()),
            )
        }
        (false, true) => {
            let (a, b) = split(T::one() - p[0]);
            (
                [p[0], a, b],
                Some("no decay on |0> <-> |1>: rho00 conserved".to_string()),
            )
        }
        (false, false) => (
            p,
            Some("g01 = g12 = 0: no relaxation, initial populations preserved".to_string()),
        ),
    };
    Ok(Relaxed {
        state: AtomState::from_populations(pops),
        warning,
    })
}

type M3<T> = [[C<T>; 3]; 3];

fn m3_zero<T: Real>() -> M3<T> {
    [[C::new(T::zero(), T::zero()); 3]; 3]
}

fn unit<T: Real>(i: usize, j: usize) -> M3<T> {
    let mut m = m3_zero();
    m[i][j] = C::new(T::one(), T::zero());
    m
}

fn mul<T: Real>(a: &M3<T>, b: &M3<T>) -> M3<T> {
    let mut out = m3_zero();
    for i in 0..3 {
        for j in 0..3 {
            for k in 0..3 {
                out[i][j] = out[i][j] + a[i][k] * b[k][j];
            }
        }
    }
    out
}

fn axpy3<T: Real>(acc: &mut M3<T>, c: C<T>, x: &M3<T>) {
    for i in 0..3 {
        for j in 0..3 {
            acc[i][j] = acc[i][j] + c * x[i][j];
        }
    }
}

fn adjoint<T: Real>(a: &M3<T>) -> M3<T> {
    let mut out = m3_zero();
    for i in 0..3 {
        for j in 0..3 {
            out[i][j] = a[j][i].conj();
        }
    }
    out
}

/// The 9×9 generator acting on `vec(rho)`, row-major: index `3 i + j` holds `rho_ij`.
#[derive(Clone, Debug, PartialEq)]
pub struct ReducedSuperoperator<T> {
    pub matrix: [[C<T>; 9]; 9],
}

impl<T: Real> ReducedSuperoperator<T> {
    pub fn index(i: usize, j: usize) -> usize {
        3 * i + j
    }

    pub fn entry(&self, row: (usize, usize), col: (usize, usize)) -> C<T> {
        self.matrix[Self::index(row.0, row.1)][Self::index(col.0, col.1)]
    }

    /// Block acting on `(rho10, rho21)`.
    pub fn coherence_block(&self) -> Mat2<T> {
        let (a, b) = ((1, 0), (2, 1));
        Mat2::new(self.entry(a, a), self.entry(a, b), self.entry(b, a), self.entry(b, b))
    }

    /// Block acting on `(rho00, rho11, rho22)`.
    pub fn population_block(&self) -> [[C<T>; 3]; 3] {
        let mut out = m3_zero();
        for i in 0..3 {
            for j in 0..3 {
                out[i][j] = self.entry((i, i), (j, j));
            }
        }
        out
    }

    pub fn lambda20(&self) -> C<T> {
        self.entry((2, 0), (2, 0))
    }

    /// Largest entry of `tr ∘ L`, which vanishes for a trace-preserving generator.
    pub fn trace_left_residual(&self) -> T {
        (0..9)
            .map(|c| {
                (0..3)
                    .fold(C::new(T::zero(), T::zero()), |s, i| {
                        s + self.matrix[Self::index(i, i)][c]
                    })
                    .norm()
            })
            .fold(T::zero(), T::max)
    }

    pub fn apply(&self, rho: &[[C<T>; 3]; 3]) -> [[C<T>; 3]; 3] {
        let mut out = m3_zero();
        for r in 0..9 {
            let mut acc = C::new(T::zero(), T::zero());
            for c in 0..9 {
                acc = acc + self.matrix[r][c] * rho[c / 3][c % 3];
            }
            out[r / 3][r % 3] = acc;
        }
        out
    }
}

/// Builds the reduced master equation generator on the full 9-dimensional
/// space of atomic operators. Independent of [`SystemParams::form`].
pub fn reduced_superoperator<T: Real>(params: &SystemParams<T>) -> ReducedSuperoperator<T> {
    let f = response(params);
    let (fm, fp) = (f.f_minus, f.f_plus);
    let n = re(params.n_th);
    let n1 = re(params.n_th + T::one());
    let a01 = re(params.g01.norm_sqr());
    let a12 = re(params.g12.norm_sqr());
    let x01 = params.g01 * params.g12.conj() * params.eta;
    let x10 = params.g01.conj() * params.g12 * params.eta;
    let a = |i, j| unit::<T>(i, j);
    let h = {
        let mut m = a(1, 1);
        for row in m.iter_mut() {
            for v in row.iter_mut() {
                *v = *v * params.big_delta;
            }
        }
        m
    };

    // the non-Hermitian half; the generator is D(rho) + D(rho†)†
    let dissipative = |rho: &M3<T>| -> M3<T> {
        let s = |l: &M3<T>, r: &M3<T>| mul(&mul(l, rho), r);
        let mut out = m3_zero();
        let mut t = m3_zero();
        axpy3(&mut t, a01, &s(&a(0, 1), &a(1, 0)));
        axpy3(&mut t, -a01, &mul(&a(1, 1), rho));
        axpy3(&mut t, x01, &s(&a(0, 1), &a(2, 1)));
        axpy3(&mut out, fm * n1, &t);

        let mut t = m3_zero();
        axpy3(&mut t, a12, &s(&a(1, 2), &a(2, 1)));
        axpy3(&mut t, -a12, &mul(&a(2, 2), rho));
        axpy3(&mut t, x10, &s(&a(1, 2), &a(1, 0)));
        axpy3(&mut out, fp * n1, &t);

        let mut t = m3_zero();
        axpy3(&mut t, a01, &s(&a(1, 0), &a(0, 1)));
        axpy3(&mut t, -a01, &mul(rho, &a(0, 0)));
        axpy3(&mut t, x01, &s(&a(2, 1), &a(0, 1)));
        axpy3(&mut out, fm * n, &t);

        let mut t = m3_zero();
        axpy3(&mut t, a12, &s(&a(2, 1), &a(1, 2)));
        axpy3(&mut t, -a12, &mul(rho, &a(1, 1)));
        axpy3(&mut t, x10, &s(&a(1, 0), &a(1, 2)));
        axpy3(&mut out, fp * n, &t);
        out
    };

    let generator = |rho: &M3<T>| -> M3<T> {
        let mut out = m3_zero();
        let minus_i = C::new(T::zero(), -T::one());
        axpy3(&mut out, minus_i, &mul(&h, rho));
        axpy3(&mut out, -minus_i, &mul(rho, &h));
        let one = C::new(T::one(), T::zero());
        axpy3(&mut out, one, &dissipative(rho));
        axpy3(&mut out, one, &adjoint(&dissipative(&adjoint(rho))));
        out
    };

    let mut matrix = [[C::new(T::zero(), T::zero()); 9]; 9];
    for col in 0..9 {
        let image = generator(&unit(col / 3, col % 3));
        for (row, line) in matrix.iter_mut().enumerate() {
            line[col] = image[row / 3][row % 3];
        }
    }
    ReducedSuperoperator { matrix }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn p() -> SystemParams<f64> {
        SystemParams::reference()
    }

    fn c(re: f64, im: f64) -> C<f64> {
        C::new(re, im)
    }

    #[test]
    fn population_generator_reference_point() {
        // γ1 = γ2 = 1 at g = 10, κ = 100, resonance
        for n in [0.0, 0.3, 1.0, 2.0] {
            let g = population_generator(&p().with_n_th(n));
            assert_relative_eq!(g.matrix[2][2], -2.0 * (n + 1.0), max_relative = 1e-15);
            assert_relative_eq!(g.matrix[2][1], 2.0 * n, max_relative = 1e-15);
            for s in g.column_sums() {
                assert!(s.abs() < 1e-15);
            }
            for i in 0..3 {
                for j in 0..3 {
                    if i != j {
                        assert!(g.matrix[i][j] >= 0.0);
                    }
                }
            }
        }
    }

    #[test]
    fn population_generator_ignores_eta() {
        let a = population_generator(&p().with_eta(0.0));
        let b = population_generator(&p().with_eta(1.0));
        assert_eq!(a, b);
    }

    #[test]
    fn zero_temperature_relaxes_to_ground() {
        let q = p().with_n_th(0.0);
        let start = AtomState::from_populations([0.1, 0.3, 0.6]);
        let end = evolve(&start, 40.0, &q, 1e-12).unwrap();
        assert!((end.rho00 - 1.0).abs() < 1e-10);
        assert!(end.rho11.abs() < 1e-10 && end.rho22.abs() < 1e-10);
    }

    #[test]
    fn coherence_generator_reference_point() {
        let g = coherence_generator(&p());
        let want = Mat2::new(c(-4.0, 0.0), c(4.0, 0.0), c(2.0, 0.0), c(-4.0, 0.0));
        assert!(g.m.max_abs_diff(&want) < 1e-14);

        let g0 = coherence_generator(&p().with_eta(0.0));
        let want0 = Mat2::diag(c(-4.0, 0.0), c(-4.0, 0.0));
        assert!(g0.m.max_abs_diff(&want0) < 1e-14);
    }

    #[test]
    fn master_equation_form_differs_only_in_m22() {
        let q = p().with_delta(17.0).with_big_delta(-3.0).with_n_th(0.6);
        let a = coherence_generator(&q);
        let b = coherence_generator(&q.with_form(BlochForm::MasterEquation));
        assert_eq!(a.m.m[0], b.m.m[0]);
        assert_eq!(a.m.m[1][0], b.m.m[1][0]);
        let fm = response(&q).f_minus;
        let expected = -(fm.conj() * 100.0);
        assert!((b.m.m[1][1] - a.m.m[1][1] - expected).norm() < 1e-14);
        assert_eq!(a.lambda20, b.lambda20);
    }

    #[test]
    fn lambda20_real_at_resonance() {
        for n in [0.0, 0.5, 2.0] {
            let q = p().with_n_th(n).with_couplings(c(3.0, 1.0), c(-2.0, 4.0));
            let g = coherence_generator(&q);
            let (g1, g2) = decay_rates(&q);
            assert_eq!(g.lambda20.im, 0.0);
            assert_relative_eq!(g.lambda20.re, -(g1 * n + g2 * (n + 1.0)), max_relative = 1e-15);
        }
    }

    #[test]
    fn evolve_zero_time_is_identity() {
        let s = AtomState {
            rho00: 0.5,
            rho11: 0.3,
            rho22: 0.2,
            rho10: c(0.1, 0.05),
            rho21: c(-0.02, 0.1),
            rho20: c(0.05, -0.05),
        };
        let e = evolve(&s, 0.0, &p(), 1e-10).unwrap();
        assert_eq!(e, s);
    }

    #[test]
    fn rho20_closed_form() {
        let q = p().with_delta(40.0).with_big_delta(3.0);
        let s = AtomState {
            rho20: c(0.2, 0.1),
            ..AtomState::from_populations([0.5, 0.25, 0.25])
        };
        let lam = coherence_generator(&q).lambda20;
        for t in [0.1, 0.7, 2.5] {
            let e = evolve(&s, t, &q, 1e-10).unwrap();
            let want = s.rho20 * (lam * t).exp();
            assert!((e.rho20 - want).norm() < 1e-15);
        }
    }

    #[test]
    fn evolve_reaches_thermal_state() {
        let start = AtomState::from_populations([0.0, 0.0, 1.0]);
        let end = evolve(&start, 30.0, &p(), 1e-12).unwrap();
        let want = [4.0 / 7.0, 2.0 / 7.0, 1.0 / 7.0];
        for (a, b) in end.populations().iter().zip(want) {
            assert!((a - b).abs() < 1e-9);
        }
    }

    #[test]
    fn evolve_rejects_bad_inputs() {
        let s = AtomState::<f64>::ground();
        assert!(matches!(evolve(&s, -1.0, &p(), 1e-9), Err(Error::InvalidInput(_))));
        assert!(matches!(evolve(&s, 1.0, &p(), 0.0), Err(Error::InvalidInput(_))));
        assert!(matches!(
            evolve(&s, 1.0, &p().with_kappa(0.0), 1e-9),
            Err(Error::InvalidParams(_))
        ));
    }

    #[test]
    fn steady_state_examples() {
        let s0 = steady_state(&p().with_n_th(0.0));
        assert_eq!(s0.populations(), [1.0, 0.0, 0.0]);

        let s1 = steady_state(&p());
        assert_relative_eq!(s1.rho00, 4.0 / 7.0, max_relative = 1e-15);
        assert_relative_eq!(s1.rho11, 2.0 / 7.0, max_relative = 1e-15);
        assert_relative_eq!(s1.rho22, 1.0 / 7.0, max_relative = 1e-15);
        assert_eq!(s1.rho10, c(0.0, 0.0));

        let big = steady_state(&p().with_n_th(1e6));
        for x in big.populations() {
            assert!((x - 1.0 / 3.0).abs() < 1e-6);
        }
    }

    #[test]
    fn steady_state_matches_null_space() {
        for n in [0.0, 0.01, 1.0, 2.0, 7.5] {
            let q = p().with_n_th(n).with_delta(20.0).with_big_delta(-4.0);
            steady_state_checked(&q).unwrap();
        }
    }

    #[test]
    fn relax_degenerate_couplings() {
        let init = AtomState::from_populations([0.2, 0.3, 0.5]);
        let zero = c(0.0, 0.0);
        let r = relax(&p().with_couplings(zero, zero), &init).unwrap();
        assert_eq!(r.state.populations(), init.populations());
        assert!(r.warning.is_some());

        // |2> isolated: rho22 fixed, 0/1 thermalize in ratio (N+1):N
        let r = relax(&p().with_couplings(c(10.0, 0.0), zero), &init).unwrap();
        assert_relative_eq!(r.state.rho22, 0.5);
        assert_relative_eq!(r.state.rho00, 0.5 * 2.0 / 3.0, max_relative = 1e-15);
        let evolved = evolve(&init, 60.0, &p().with_couplings(c(10.0, 0.0), zero), 1e-12).unwrap();
        for (a, b) in evolved.populations().iter().zip(r.state.populations()) {
            assert!((a - b).abs() < 1e-9);
        }

        let r = relax(&p(), &init).unwrap();
        assert_eq!(r.state, steady_state(&p()));
        assert!(r.warning.is_none());
    }

    #[test]
    fn violations_detect_bad_states() {
        let ok = steady_state(&p());
        assert!(ok.violations(1e-12).is_empty());
        let bad = AtomState {
            rho10: c(0.9, 0.0),
            ..AtomState::from_populations([0.5, 0.6, 0.1])
        };
        let v = bad.violations(1e-12);
        assert!(v.iter().any(|s| s.contains("trace")));
        assert!(v.iter().any(|s| s.contains("rho10")));
    }

    #[test]
    fn superoperator_reproduces_population_and_rho20_blocks() {
        let cases = [
            p(),
            p().with_n_th(0.0),
            p().with_couplings(c(10.0, 3.0), c(7.0, -2.0))
                .with_delta(30.0)
                .with_big_delta(5.0)
                .with_n_th(0.7)
                .with_eta(0.4),
        ];
        for q in cases {
            let s = reduced_superoperator(&q);
            let pops = population_generator(&q);
            let blk = s.population_block();
            for i in 0..3 {
                for j in 0..3 {
                    assert!((blk[i][j] - c(pops.matrix[i][j], 0.0)).norm() < 1e-14);
                }
            }
            assert!((s.lambda20() - coherence_generator(&q).lambda20).norm() < 1e-14);
            assert!(s.trace_left_residual() < 1e-14);
        }
    }

    #[test]
    fn superoperator_matches_master_equation_form() {
        let q = p()
            .with_couplings(c(10.0, 3.0), c(7.0, -2.0))
            .with_delta(30.0)
            .with_big_delta(5.0)
            .with_n_th(0.7)
            .with_eta(0.4)
            .with_form(BlochForm::MasterEquation);
        let s = reduced_superoperator(&q);
        let m = coherence_generator(&q).m;
        assert!(s.coherence_block().max_abs_diff(&m) < 1e-14);
    }

    #[test]
    fn published_form_disagrees_only_in_m22() {
        let q = p();
        let s = reduced_superoperator(&q).coherence_block();
        let m = coherence_generator(&q).m;
        assert!((s.m[0][0] - m.m[0][0]).norm() < 1e-14);
        assert!((s.m[0][1] - m.m[0][1]).norm() < 1e-14);
        assert!((s.m[1][0] - m.m[1][0]).norm() < 1e-14);
        // the published rho21 rate carries |g01|² N instead of |g01|² (N + 1)
        assert!((s.m[1][1] - m.m[1][1] - c(-1.0, 0.0)).norm() < 1e-14);
    }

    #[test]
    fn blocks_decouple_in_superoperator() {
        let q = p().with_delta(12.0).with_big_delta(2.0).with_n_th(0.4);
        let s = reduced_superoperator(&q);
        let groups: [&[(usize, usize)]; 5] = [
            &[(0, 0), (1, 1), (2, 2)],
            &[(1, 0), (2, 1)],
            &[(0, 1), (1, 2)],
            &[(2, 0)],
            &[(0, 2)],
        ];
        for (gi, a) in groups.iter().enumerate() {
            for (gj, b) in groups.iter().enumerate() {
                if gi == gj {
                    continue;
                }
                for &r in a.iter() {
                    for &col in b.iter() {
                        assert_eq!(s.entry(r, col), c(0.0, 0.0), "{r:?} <- {col:?}");
                    }
                }
            }
        }
    }

    /// Standard thermal two-level dissipator for lowering operator `|lo><hi|`,
    /// written in Lindblad form with the Lamb-type shift split out.
    fn two_level(lo: usize, hi: usize, f: C<f64>, g2: f64, n: f64) -> [[C<f64>; 9]; 9] {
        let gamma = f.re * g2;
        let shift = f.im * g2;
        let mut out = [[c(0.0, 0.0); 9]; 9];
        for col in 0..9 {
            let rho = unit::<f64>(col / 3, col % 3);
            let sm = unit::<f64>(lo, hi);
            let sp = unit::<f64>(hi, lo);
            let up = mul(&sp, &sm);
            let dn = mul(&sm, &sp);
            let mut r = m3_zero();
            axpy3(&mut r, c(2.0 * gamma * (n + 1.0), 0.0), &mul(&mul(&sm, &rho), &sp));
            axpy3(&mut r, c(-gamma * (n + 1.0), 0.0), &mul(&up, &rho));
            axpy3(&mut r, c(-gamma * (n + 1.0), 0.0), &mul(&rho, &up));
            axpy3(&mut r, c(2.0 * gamma * n, 0.0), &mul(&mul(&sp, &rho), &sm));
            axpy3(&mut r, c(-gamma * n, 0.0), &mul(&dn, &rho));
            axpy3(&mut r, c(-gamma * n, 0.0), &mul(&rho, &dn));
            // −i[H_shift, ρ] with H_shift = s(N+1) σ†σ − sN σσ†
            let mut hs = m3_zero();
            axpy3(&mut hs, c(shift * (n + 1.0), 0.0), &up);
            axpy3(&mut hs, c(-shift * n, 0.0), &dn);
            axpy3(&mut r, c(0.0, -1.0), &mul(&hs, &rho));
            axpy3(&mut r, c(0.0, 1.0), &mul(&rho, &hs));
            for row in 0..9 {
                out[row][col] = r[row / 3][row % 3];
            }
        }
        out
    }

    #[test]
    fn eta_zero_is_two_independent_thermal_channels() {
        let q = p()
            .with_couplings(c(8.0, 2.0), c(5.0, -6.0))
            .with_delta(25.0)
            .with_big_delta(-7.0)
            .with_n_th(1.3)
            .with_eta(0.0);
        let s = reduced_superoperator(&q);
        let f = response(&q);
        let l01 = two_level(0, 1, f.f_minus, q.g01.norm_sqr(), q.n_th);
        let l12 = two_level(1, 2, f.f_plus, q.g12.norm_sqr(), q.n_th);
        for row in 0..9 {
            for col in 0..9 {
                let mut h = c(0.0, 0.0);
                // −i[Δ A11, ρ]
                let (ri, rj) = (row / 3, row % 3);
                if row == col {
                    let d = q.big_delta * ((ri == 1) as i32 - (rj == 1) as i32) as f64;
                    h = c(0.0, -d);
                }
                let want = l01[row][col] + l12[row][col] + h;
                assert!((s.matrix[row][col] - want).norm() < 1e-14, "({row},{col})");
            }
        }
    }
}
