//! Reference model: the atom coupled to an explicit damped cavity mode.
//!
//! The cavity is kept as a truncated Fock ladder and the full master
//! equation
//!
//! ```text
//! dρ/dt = −i[H, ρ] + κ(N+1)(2aρa† − a†aρ − ρa†a) + κN(2a†ρa − aa†ρ − ρaa†)
//! H     = Δ A11 + δ a†a + i(g01 A01 + g12 A12) a† − i(g01* A10 + g12* A21) a
//! ```
//!
//! is vectorized row-major on the `D = 3 (n_max + 1)` dimensional product
//! space. Both `H` and the cavity damping conserve the excitation number
//! `E = atom level + photon number`, so the generator is block diagonal in
//! `q = E(bra) − E(ket)`: the steady state lives in `q = 0` and the probe
//! regression in `q = +1`. Each block is solved densely.
//!
//! The explicit cavity carries a single polarization, so every model here
//! corresponds to full interference, `eta = 1`.

use crate::analysis::fwhm_with;
use crate::bloch::{steady_state, AtomState};
use crate::error::{Error, Result};
use crate::linalg::{CsrMatrix, DenseMatrix, Hessenberg};
use crate::model::SystemParams;
use crate::scalar::{Real, C};
use crate::spectrum::{absorption, FrequencyGrid, ProbeConfig, SpectrumTrace, TraceOrigin};

const TAIL_BOUND: f64 = 1e-6;
const GUARD_LEVELS: usize = 5;

/// Highest retained Fock state of the cavity mode.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct FockTruncation {
    pub n_max: usize,
}

impl FockTruncation {
    pub fn new(n_max: usize) -> Result<Self> {
        if n_max < 1 {
            return Err(Error::InvalidInput("Fock truncation needs n_max >= 1".into()));
        }
        Ok(Self { n_max })
    }

    /// Smallest `n` with `(N/(N+1))^(n+1) <= 1e-6`, plus five guard levels.
    pub fn for_thermal<T: Real>(n_th: T) -> Self {
        let n_th = n_th.to_f64().unwrap_or(0.0).max(0.0);
        let ratio = n_th / (n_th + 1.0);
        let mut n = 0usize;
        while ratio.powi(n as i32 + 1) > TAIL_BOUND && n < 100_000 {
            n += 1;
        }
        Self {
            n_max: (n + GUARD_LEVELS).max(1),
        }
    }

    /// Thermal occupation beyond the cutoff, `(N/(N+1))^(n_max+1)`.
    pub fn tail_bound<T: Real>(&self, n_th: T) -> T {
        let ratio = n_th / (n_th + T::one());
        ratio.powi(self.n_max as i32 + 1)
    }

    /// Warning text when the thermal tail exceeds `1e-6`.
    pub fn check<T: Real>(&self, n_th: T) -> Option<String> {
        let tail = self.tail_bound(n_th);
        (tail > T::lit(TAIL_BOUND)).then(|| {
            format!(
                "n_max = {} leaves thermal tail {tail:e} > 1e-6 at N = {n_th}",
                self.n_max
            )
        })
    }

    /// Hilbert-space dimension `3 (n_max + 1)`.
    pub fn dim(&self) -> usize {
        3 * (self.n_max + 1)
    }

    fn levels(&self) -> usize {
        self.n_max + 1
    }

    fn energy(&self, idx: usize) -> usize {
        idx / self.levels() + idx % self.levels()
    }
}

/// Tuning knobs for the reference solves.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct OracleOptions<T> {
    /// Upper bound on the estimated working memory, in bytes.
    pub memory_cap_bytes: usize,
    /// Required `‖L x‖` of the steady state.
    pub residual_tol: T,
    /// Largest population change accepted between `n_max` and `2 n_max`.
    pub convergence_tol: T,
    /// Run the truncation doubling check.
    pub verify_convergence: bool,
    /// Give up doubling past this cutoff.
    pub max_n_max: usize,
}

impl<T: Real> Default for OracleOptions<T> {
    fn default() -> Self {
        Self {
            memory_cap_bytes: 2 << 30,
            residual_tol: T::lit(1e-10),
            convergence_tol: T::lit(1e-4),
            verify_convergence: true,
            max_n_max: 400,
        }
    }
}

type Op<T> = Vec<(usize, usize, C<T>)>;

fn cplx<T: Real>(re: T, im: T) -> C<T> {
    C::new(re, im)
}

fn ensure_interfering<T: Real>(params: &SystemParams<T>) -> Result<()> {
    params.ensure_valid()?;
    if params.eta != T::one() {
        return Err(Error::Inapplicable(format!(
            "the explicit-cavity model has a single polarization (eta = 1); got eta = {}",
            params.eta
        )));
    }
    Ok(())
}

/// `A_ij ⊗ O`, with `O` given as its nonzero diagonal or off-diagonal photon entries.
fn atom_tensor<T: Real>(trunc: &FockTruncation, i: usize, j: usize, photon: &[(usize, usize, T)], c: C<T>) -> Op<T> {
    let nf = trunc.levels();
    photon
        .iter()
        .map(|&(m, n, v)| (i * nf + m, j * nf + n, c * v))
        .collect()
}

fn photon_create<T: Real>(trunc: &FockTruncation) -> Vec<(usize, usize, T)> {
    (0..trunc.n_max)
        .map(|n| (n + 1, n, T::from_count(n + 1).sqrt()))
        .collect()
}

fn photon_destroy<T: Real>(trunc: &FockTruncation) -> Vec<(usize, usize, T)> {
    (0..trunc.n_max)
        .map(|n| (n, n + 1, T::from_count(n + 1).sqrt()))
        .collect()
}

/// Full-space operator `1_atom ⊗ O`.
fn field_op<T: Real>(trunc: &FockTruncation, photon: &[(usize, usize, T)]) -> Op<T> {
    (0..3)
        .flat_map(|a| atom_tensor(trunc, a, a, photon, cplx(T::one(), T::zero())))
        .collect()
}

/// The Hamiltonian as a dense `D × D` matrix.
pub fn build_hamiltonian<T: Real>(params: &SystemParams<T>, trunc: &FockTruncation) -> DenseMatrix<T> {
    let d = trunc.dim();
    let mut h = DenseMatrix::zeros(d, d);
    for (r, c, v) in hamiltonian_entries(params, trunc) {
        h[(r, c)] = h[(r, c)] + v;
    }
    h
}

fn hamiltonian_entries<T: Real>(params: &SystemParams<T>, trunc: &FockTruncation) -> Op<T> {
    let nf = trunc.levels();
    let mut ops: Op<T> = Vec::new();
    for n in 0..nf {
        for a in 0..3 {
            let e = if a == 1 { params.big_delta } else { T::zero() } + params.delta * T::from_count(n);
            if e != T::zero() {
                ops.push((a * nf + n, a * nf + n, cplx(e, T::zero())));
            }
        }
    }
    let i = cplx(T::zero(), T::one());
    let up = photon_create(trunc);
    let down = photon_destroy(trunc);
    ops.extend(atom_tensor(trunc, 0, 1, &up, i * params.g01));
    ops.extend(atom_tensor(trunc, 1, 2, &up, i * params.g12));
    ops.extend(atom_tensor(trunc, 1, 0, &down, -i * params.g01.conj()));
    ops.extend(atom_tensor(trunc, 2, 1, &down, -i * params.g12.conj()));
    ops
}

fn identity_op<T: Real>(d: usize) -> Op<T> {
    (0..d).map(|k| (k, k, cplx(T::one(), T::zero()))).collect()
}

fn multiply<T: Real>(d: usize, a: &Op<T>, b: &Op<T>) -> Op<T> {
    let mut by_row: Vec<Vec<(usize, C<T>)>> = vec![Vec::new(); d];
    for &(k, n, v) in b {
        by_row[k].push((n, v));
    }
    let mut out = Vec::new();
    for &(m, k, u) in a {
        for &(n, v) in &by_row[k] {
            out.push((m, n, u * v));
        }
    }
    out
}

/// Row-major superoperator of `ρ ↦ c · X ρ Y`.
fn sandwich<T: Real>(d: usize, c: C<T>, x: &Op<T>, y: &Op<T>, out: &mut Vec<(usize, usize, C<T>)>) {
    for &(m, k, xv) in x {
        for &(l, n, yv) in y {
            out.push((m * d + n, k * d + l, c * xv * yv));
        }
    }
}

fn estimated_bytes(trunc: &FockTruncation) -> Option<usize> {
    let d = trunc.dim();
    let d2 = d.checked_mul(d)?;
    // per row: ~2·(nnz(H)/D + 1) commutator entries plus ~6 damping entries
    let per_row = 24usize;
    let entry = std::mem::size_of::<(usize, usize, C<f64>)>();
    let sparse = d2.checked_mul(per_row)?.checked_mul(entry)?;
    let sector = 9 * (trunc.n_max + 3);
    let dense = sector
        .checked_mul(sector)?
        .checked_mul(2 * std::mem::size_of::<C<f64>>())?;
    sparse.checked_add(dense)
}

/// Vectorized generator of the full master equation, `vec(ρ)_{mD+n} = ρ_mn`.
#[derive(Clone, Debug)]
pub struct FullLiouvillian<T> {
    pub params: SystemParams<T>,
    pub trunc: FockTruncation,
    pub matrix: CsrMatrix<T>,
}

/// Builds the generator, refusing truncations beyond `opts.memory_cap_bytes`.
pub fn build_liouvillian<T: Real>(
    params: &SystemParams<T>,
    trunc: &FockTruncation,
    opts: &OracleOptions<T>,
) -> Result<FullLiouvillian<T>> {
    ensure_interfering(params)?;
    match estimated_bytes(trunc) {
        Some(b) if b <= opts.memory_cap_bytes => {}
        other => {
            return Err(Error::Resource(format!(
                "n_max = {} needs ~{} bytes, cap is {}",
                trunc.n_max,
                other.map_or("overflowing".to_string(), |b| b.to_string()),
                opts.memory_cap_bytes
            )))
        }
    }
    let d = trunc.dim();
    let i = cplx(T::zero(), T::one());
    let id = identity_op(d);
    let h = hamiltonian_entries(params, trunc);
    let a = field_op(trunc, &photon_destroy(trunc));
    let ad = field_op(trunc, &photon_create(trunc));
    let n_op = multiply(d, &ad, &a);
    let anti_n = multiply(d, &a, &ad);
    let hk = |x: T| cplx(params.kappa * x, T::zero());
    let down = hk(params.n_th + T::one());
    let up = hk(params.n_th);
    let two = T::lit(2.0);

    let mut trip = Vec::new();
    sandwich(d, -i, &h, &id, &mut trip);
    sandwich(d, i, &id, &h, &mut trip);
    sandwich(d, down * two, &a, &ad, &mut trip);
    sandwich(d, -down, &n_op, &id, &mut trip);
    sandwich(d, -down, &id, &n_op, &mut trip);
    sandwich(d, up * two, &ad, &a, &mut trip);
    sandwich(d, -up, &anti_n, &id, &mut trip);
    sandwich(d, -up, &id, &anti_n, &mut trip);
    Ok(FullLiouvillian {
        params: *params,
        trunc: *trunc,
        matrix: CsrMatrix::from_triplets(d * d, d * d, trip),
    })
}

impl<T: Real> FullLiouvillian<T> {
    pub fn dim(&self) -> usize {
        self.trunc.dim()
    }

    pub fn apply(&self, x: &[C<T>]) -> Vec<C<T>> {
        self.matrix.mul_vec(x)
    }

    /// `max |Tr(L x)|` over unit inputs: the trace functional applied from the left.
    pub fn trace_left_residual(&self) -> T {
        let d = self.dim();
        let mut w = vec![cplx(T::zero(), T::zero()); d * d];
        for m in 0..d {
            w[m * d + m] = cplx(T::one(), T::zero());
        }
        self.matrix
            .left_mul(&w)
            .iter()
            .map(|z| z.norm())
            .fold(T::zero(), T::max)
    }

    /// Vectorized indices of the block with `E(bra) − E(ket) = q`.
    pub fn sector(&self, q: isize) -> Vec<usize> {
        let d = self.dim();
        (0..d * d)
            .filter(|&k| {
                let (m, n) = (k / d, k % d);
                self.trunc.energy(m) as isize - self.trunc.energy(n) as isize == q
            })
            .collect()
    }

    /// Dense restriction of the generator to the given indices.
    pub fn restrict(&self, idx: &[usize]) -> Result<DenseMatrix<T>> {
        let mut pos = vec![usize::MAX; self.matrix.rows()];
        for (p, &k) in idx.iter().enumerate() {
            pos[k] = p;
        }
        let mut out = DenseMatrix::zeros(idx.len(), idx.len());
        for (p, &k) in idx.iter().enumerate() {
            for (c, v) in self.matrix.row(k) {
                if pos[c] == usize::MAX {
                    return Err(Error::NumericalFailure(format!(
                        "generator couples index {k} out of its excitation sector"
                    )));
                }
                out[(p, pos[c])] = v;
            }
        }
        Ok(out)
    }
}

/// Evidence that the cutoff was large enough.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TruncationCheck<T> {
    /// Cutoff the state was compared against.
    pub compared_n_max: usize,
    /// Largest atomic population change between the two cutoffs.
    pub population_change: T,
}

/// Steady state of the full model.
#[derive(Clone, Debug)]
pub struct FullState<T> {
    pub rho: DenseMatrix<T>,
    pub trunc: FockTruncation,
    /// `‖L vec(ρ)‖_∞`.
    pub residual: T,
    pub convergence: Option<TruncationCheck<T>>,
}

impl<T: Real> FullState<T> {
    /// Atomic reduced density matrix.
    pub fn atom_state(&self) -> AtomState<T> {
        let nf = self.trunc.levels();
        let mut m = [[cplx(T::zero(), T::zero()); 3]; 3];
        for (a, row) in m.iter_mut().enumerate() {
            for (b, e) in row.iter_mut().enumerate() {
                for n in 0..nf {
                    *e = *e + self.rho[(a * nf + n, b * nf + n)];
                }
            }
        }
        AtomState::from_matrix(&m)
    }

    pub fn atom_populations(&self) -> [T; 3] {
        self.atom_state().populations()
    }

    /// Marginal photon-number distribution.
    pub fn photon_distribution(&self) -> Vec<T> {
        let nf = self.trunc.levels();
        (0..nf)
            .map(|n| (0..3).fold(T::zero(), |s, a| s + self.rho[(a * nf + n, a * nf + n)].re))
            .collect()
    }

    /// `<a†a>`.
    pub fn photon_number(&self) -> T {
        self.photon_distribution()
            .iter()
            .enumerate()
            .fold(T::zero(), |s, (n, p)| s + T::from_count(n) * *p)
    }

    pub fn trace(&self) -> T {
        self.rho.trace().re
    }

    pub fn hermiticity_residual(&self) -> T {
        self.rho.hermiticity_residual()
    }

    /// Smallest eigenvalue `>= -tol`.
    pub fn is_positive_semidefinite(&self, tol: T) -> bool {
        self.rho.is_positive_semidefinite(tol)
    }
}

fn solve_steady<T: Real>(l: &FullLiouvillian<T>) -> Result<FullState<T>> {
    let d = l.dim();
    let idx = l.sector(0);
    let mut a = l.restrict(&idx)?;
    let cols = idx.len();
    let mut rhs = vec![cplx(T::zero(), T::zero()); cols];
    // replace the first equation by Tr ρ = 1
    for j in 0..cols {
        let (m, n) = (idx[j] / d, idx[j] % d);
        a[(0, j)] = if m == n {
            cplx(T::one(), T::zero())
        } else {
            cplx(T::zero(), T::zero())
        };
    }
    rhs[0] = cplx(T::one(), T::zero());
    let x = a.solve(&rhs).map_err(|e| match e {
        Error::NumericalFailure(msg) => Error::NumericalFailure(format!("steady state not unique: {msg}")),
        other => other,
    })?;
    let mut full = vec![cplx(T::zero(), T::zero()); d * d];
    let mut rho = DenseMatrix::zeros(d, d);
    for (v, &k) in x.iter().zip(&idx) {
        full[k] = *v;
        rho[(k / d, k % d)] = *v;
    }
    let residual = l.apply(&full).iter().map(|z| z.norm()).fold(T::zero(), T::max);
    Ok(FullState {
        rho,
        trunc: l.trunc,
        residual,
        convergence: None,
    })
}

fn max_change<T: Real>(a: &[T; 3], b: &[T; 3]) -> T {
    (0..3).fold(T::zero(), |m, i| m.max((a[i] - b[i]).abs()))
}

/// Steady state at `trunc`, with the cutoff doubled until the atomic
/// populations move by less than `opts.convergence_tol`.
pub fn steady_state_full<T: Real>(
    params: &SystemParams<T>,
    trunc: &FockTruncation,
    opts: &OracleOptions<T>,
) -> Result<FullState<T>> {
    ensure_interfering(params)?;
    if params.is_decoupled() {
        return Err(Error::InvalidParams(
            "g01 = g12 = 0: atomic steady state is not unique".into(),
        ));
    }
    let l = build_liouvillian(params, trunc, opts)?;
    let mut state = solve_steady(&l)?;
    if !(state.residual <= opts.residual_tol) {
        return Err(Error::NumericalFailure(format!(
            "steady-state residual {:e} exceeds {:e}",
            state.residual, opts.residual_tol
        )));
    }
    if !opts.verify_convergence {
        return Ok(state);
    }
    let mut current = state.atom_populations();
    let mut n = trunc.n_max;
    let mut history = Vec::new();
    loop {
        let next_n = 2 * n;
        if next_n > opts.max_n_max {
            return Err(Error::NumericalFailure(format!(
                "n_max doubling did not converge below {:e} by n_max = {}; changes: {:?}",
                opts.convergence_tol, opts.max_n_max, history
            )));
        }
        let bigger = FockTruncation::new(next_n)?;
        let next = solve_steady(&build_liouvillian(params, &bigger, opts)?)?;
        let pops = next.atom_populations();
        let change = max_change(&current, &pops);
        history.push((next_n, change.to_f64().unwrap_or(f64::NAN)));
        if change < opts.convergence_tol {
            state.convergence = Some(TruncationCheck {
                compared_n_max: next_n,
                population_change: change,
            });
            return Ok(state);
        }
        current = pops;
        n = next_n;
        state = next;
    }
}

/// Probe absorption of the full model at a fixed steady state.
#[derive(Clone, Debug)]
pub struct FullSpectrum<T> {
    params: SystemParams<T>,
    probe: ProbeConfig<T>,
    trunc: FockTruncation,
    hess: Hessenberg<T>,
    source: Vec<C<T>>,
    weights: Vec<C<T>>,
}

impl<T: Real> FullSpectrum<T> {
    pub fn new(
        params: &SystemParams<T>,
        probe: &ProbeConfig<T>,
        trunc: &FockTruncation,
        opts: &OracleOptions<T>,
    ) -> Result<Self> {
        probe.ensure_valid()?;
        let state = steady_state_full(params, trunc, opts)?;
        let l = build_liouvillian(params, trunc, opts)?;
        Self::from_state(&l, &state, probe)
    }

    /// Regression data for `P = d1 A01 + d2 A12` on the `q = +1` block.
    pub fn from_state(l: &FullLiouvillian<T>, state: &FullState<T>, probe: &ProbeConfig<T>) -> Result<Self> {
        probe.ensure_valid()?;
        let d = l.dim();
        let nf = l.trunc.levels();
        let mut p = DenseMatrix::zeros(d, d);
        for n in 0..nf {
            p[(n, nf + n)] = probe.d1;
            p[(nf + n, 2 * nf + n)] = probe.d2;
        }
        let pd = p.adjoint();
        let left = pd.matmul(&state.rho);
        let right = state.rho.matmul(&pd);
        let idx = l.sector(1);
        let source: Vec<C<T>> = idx
            .iter()
            .map(|&k| left[(k / d, k % d)] - right[(k / d, k % d)])
            .collect();
        // Tr(P Y) = Σ_mn P_nm Y_mn
        let weights: Vec<C<T>> = idx.iter().map(|&k| p[(k % d, k / d)]).collect();
        let hess = Hessenberg::new(l.restrict(&idx)?);
        Ok(Self {
            params: l.params,
            probe: *probe,
            trunc: l.trunc,
            source: hess.apply_q_adjoint(&source),
            weights: hess.apply_row_q(&weights),
            hess,
        })
    }

    pub fn absorption(&self, omega: T) -> Result<T> {
        let y = self
            .hess
            .solve_shifted(cplx(-T::one(), T::zero()), cplx(T::zero(), -omega), &self.source)?;
        let v = self
            .weights
            .iter()
            .zip(&y)
            .fold(cplx(T::zero(), T::zero()), |s, (w, x)| s + *w * *x);
        if !v.re.is_finite() {
            return Err(Error::NumericalFailure(format!(
                "non-finite absorption at omega = {omega}"
            )));
        }
        Ok(v.re)
    }

    pub fn trace(&self, grid: &FrequencyGrid<T>) -> Result<SpectrumTrace<T>> {
        let omegas = grid.points();
        let values = omegas.iter().map(|&w| self.absorption(w)).collect::<Result<Vec<_>>>()?;
        Ok(SpectrumTrace {
            omegas,
            values,
            params: self.params,
            probe: self.probe,
            origin: TraceOrigin::FullModel {
                n_max: self.trunc.n_max,
            },
        })
    }
}

/// Full-model spectrum on `grid`.
pub fn spectrum_full<T: Real>(
    params: &SystemParams<T>,
    probe: &ProbeConfig<T>,
    grid: &FrequencyGrid<T>,
    trunc: &FockTruncation,
    opts: &OracleOptions<T>,
) -> Result<SpectrumTrace<T>> {
    FullSpectrum::new(params, probe, trunc, opts)?.trace(grid)
}

/// Full versus reduced model at one parameter point.
#[derive(Clone, Debug)]
pub struct OracleComparison<T> {
    pub n_max: usize,
    pub full_populations: [T; 3],
    pub reduced_populations: [T; 3],
    /// Largest absolute population difference.
    pub population_deviation: T,
    pub full_fwhm: T,
    pub reduced_fwhm: T,
    /// `|full − reduced| / reduced`.
    pub fwhm_deviation: T,
    pub photon_number: T,
    pub steady_residual: T,
    pub hermiticity_residual: T,
    pub trace_error: T,
    pub positive_semidefinite: bool,
    /// `max |rho20|` of the full model's atomic state.
    pub rho20: T,
    pub convergence: Option<TruncationCheck<T>>,
    pub warnings: Vec<String>,
}

/// Runs both models and measures their disagreement.
pub fn compare<T: Real>(
    params: &SystemParams<T>,
    probe: &ProbeConfig<T>,
    grid: &FrequencyGrid<T>,
    trunc: &FockTruncation,
    opts: &OracleOptions<T>,
) -> Result<OracleComparison<T>> {
    let mut warnings: Vec<String> = trunc.check(params.n_th).into_iter().collect();
    let l = build_liouvillian(params, trunc, opts)?;
    let state = steady_state_full(params, trunc, opts)?;
    let full = FullSpectrum::from_state(&l, &state, probe)?;
    let full_trace = full.trace(grid)?;
    let full_fwhm = fwhm_with(&full_trace, |w| full.absorption(w))?;

    let reduced_trace = absorption(params, probe, grid)?;
    let reduced_fwhm = crate::analysis::fwhm(&reduced_trace)?;
    let reduced_populations = steady_state(params).populations();
    let full_populations = state.atom_populations();
    let trace_left = l.trace_left_residual();
    if trace_left > T::lit(1e-10) {
        warnings.push(format!("trace functional residual {trace_left:e}"));
    }
    Ok(OracleComparison {
        n_max: trunc.n_max,
        full_populations,
        reduced_populations,
        population_deviation: max_change(&full_populations, &reduced_populations),
        full_fwhm,
        reduced_fwhm,
        fwhm_deviation: ((full_fwhm - reduced_fwhm) / reduced_fwhm).abs(),
        photon_number: state.photon_number(),
        steady_residual: state.residual,
        hermiticity_residual: state.hermiticity_residual(),
        trace_error: (state.trace() - T::one()).abs(),
        positive_semidefinite: state.is_positive_semidefinite(T::lit(1e-8)),
        rho20: state.atom_state().rho20.norm(),
        convergence: state.convergence,
        warnings,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::re;
    use approx::assert_relative_eq;

    fn r() -> SystemParams<f64> {
        SystemParams::reference()
    }

    fn quick() -> OracleOptions<f64> {
        OracleOptions {
            verify_convergence: false,
            ..Default::default()
        }
    }

    #[test]
    fn default_truncation() {
        assert_eq!(FockTruncation::for_thermal(1.0).n_max, 24);
        assert_eq!(FockTruncation::for_thermal(0.0).n_max, 5);
        let n2 = FockTruncation::for_thermal(2.0).n_max;
        assert!((37..=40).contains(&n2));
        assert!(FockTruncation::new(3).unwrap().check(1.0).is_some());
        assert!(FockTruncation::new(0).is_err());
    }

    #[test]
    fn hamiltonian_decoupled_is_diagonal() {
        let q = r().with_g(0.0).with_delta(0.7).with_big_delta(1.3);
        let t = FockTruncation::new(3).unwrap();
        let h = build_hamiltonian(&q, &t);
        for i in 0..t.dim() {
            for j in 0..t.dim() {
                let (a, n) = (i / 4, i % 4);
                let want = if i == j {
                    1.3 * (a == 1) as u8 as f64 + 0.7 * n as f64
                } else {
                    0.0
                };
                assert_eq!(h[(i, j)], re(want));
            }
        }
    }

    #[test]
    fn hamiltonian_jaynes_cummings_block() {
        let q = r().with_couplings(re(1.0), re(0.0)).with_delta(0.0);
        let t = FockTruncation::new(1).unwrap();
        let h = build_hamiltonian(&q, &t);
        // |0_at,1_ph> = 1, |1_at,0_ph> = 2
        assert_eq!(h[(1, 2)], C::new(0.0, 1.0));
        assert_eq!(h[(2, 1)], C::new(0.0, -1.0));
        assert_eq!(h.hermiticity_residual(), 0.0);
        let nonzero = (0..6)
            .flat_map(|i| (0..6).map(move |j| (i, j)))
            .filter(|&(i, j)| h[(i, j)] != re(0.0))
            .count();
        assert_eq!(nonzero, 2);
    }

    #[test]
    fn hamiltonian_hermitian_with_complex_couplings() {
        let q = r()
            .with_couplings(C::new(3.0, 4.0), C::new(-2.0, 1.0))
            .with_delta(2.0)
            .with_big_delta(-1.0);
        let h = build_hamiltonian(&q, &FockTruncation::new(4).unwrap());
        assert_eq!(h.hermiticity_residual(), 0.0);
    }

    #[test]
    fn liouvillian_trace_preserving() {
        let l = build_liouvillian(&r().with_delta(3.0), &FockTruncation::new(6).unwrap(), &quick()).unwrap();
        assert!(l.trace_left_residual() <= 1e-10);
    }

    #[test]
    fn memory_cap_enforced() {
        let opts = OracleOptions {
            memory_cap_bytes: 1 << 20,
            ..quick()
        };
        assert!(matches!(
            build_liouvillian(&r(), &FockTruncation::new(30).unwrap(), &opts),
            Err(Error::Resource(_))
        ));
    }

    #[test]
    fn eta_other_than_one_rejected() {
        assert!(matches!(
            build_liouvillian(&r().with_eta(0.0), &FockTruncation::new(3).unwrap(), &quick()),
            Err(Error::Inapplicable(_))
        ));
    }

    #[test]
    fn decoupled_steady_state_rejected() {
        let q = r().with_g(0.0);
        assert!(matches!(
            steady_state_full(&q, &FockTruncation::new(3).unwrap(), &quick()),
            Err(Error::InvalidParams(_))
        ));
    }

    #[test]
    fn decoupled_generator_conserves_atom_and_thermalizes_field() {
        let q = r().with_g(0.0);
        let t = FockTruncation::new(20).unwrap();
        let l = build_liouvillian(&q, &t, &quick()).unwrap();
        let d = t.dim();
        let nf = t.levels();
        // atomic population projectors are left null vectors
        for a in 0..3 {
            let mut w = vec![re(0.0); d * d];
            for n in 0..nf {
                let k = a * nf + n;
                w[k * d + k] = re(1.0);
            }
            assert!(l.matrix.left_mul(&w).iter().all(|z| z.norm() < 1e-9));
        }
        // thermal field ⊗ ground atom is stationary
        let ratio: f64 = 0.5;
        let mut x = vec![re(0.0); d * d];
        let z: f64 = (0..nf).map(|n| ratio.powi(n as i32)).sum();
        let mut nbar = 0.0;
        for n in 0..nf {
            let p = ratio.powi(n as i32) / z;
            x[n * d + n] = re(p);
            nbar += n as f64 * p;
        }
        assert!(l.apply(&x).iter().all(|v| v.norm() < 1e-9));
        assert!((nbar - 1.0).abs() < 1e-4);
    }

    #[test]
    fn ground_state_at_zero_temperature() {
        let s = steady_state_full(&r().with_n_th(0.0), &FockTruncation::new(5).unwrap(), &quick()).unwrap();
        let p = s.atom_populations();
        assert!((p[0] - 1.0).abs() <= 2.0 * 0.01);
    }

    #[test]
    fn thermal_populations_and_state_quality() {
        let t = FockTruncation::for_thermal(1.0);
        let s = steady_state_full(&r(), &t, &OracleOptions::default()).unwrap();
        let p = s.atom_populations();
        for (got, want) in p.iter().zip([4.0 / 7.0, 2.0 / 7.0, 1.0 / 7.0]) {
            assert!((got - want).abs() < 0.02);
        }
        assert!(s.hermiticity_residual() <= 1e-10);
        assert!((s.trace() - 1.0).abs() <= 1e-10);
        assert!(s.is_positive_semidefinite(1e-8));
        assert!(s.residual <= 1e-10);
        assert!(s.convergence.unwrap().population_change < 1e-4);
        assert!(s.atom_state().rho20.norm() <= 1e-3);
    }

    #[test]
    fn weak_coupling_cavity_is_thermal() {
        let s = steady_state_full(&r().with_g(3.0), &FockTruncation::for_thermal(1.0), &quick()).unwrap();
        assert!((s.photon_number() - 1.0).abs() < 0.01);
    }

    #[test]
    fn spectrum_scales_with_probe_weight() {
        let t = FockTruncation::new(12).unwrap();
        let base = FullSpectrum::new(&r(), &ProbeConfig::probe_01(), &t, &quick()).unwrap();
        let c = C::new(0.6, -1.7);
        let scaled = FullSpectrum::new(&r(), &ProbeConfig::probe_01().scaled(c), &t, &quick()).unwrap();
        for w in [-3.0, 0.0, 2.5] {
            assert_relative_eq!(
                scaled.absorption(w).unwrap(),
                c.norm_sqr() * base.absorption(w).unwrap(),
                max_relative = 1e-10
            );
        }
    }

    #[test]
    fn full_spectrum_close_to_reduced() {
        let t = FockTruncation::for_thermal(1.0);
        let full = FullSpectrum::new(&r().with_g(3.0), &ProbeConfig::probe_01(), &t, &quick()).unwrap();
        let reduced = crate::spectrum::SpectrumModel::new(
            &r().with_g(3.0).with_form(crate::model::BlochForm::MasterEquation),
            &ProbeConfig::probe_01(),
        )
        .unwrap();
        let a = full.absorption(0.0).unwrap();
        let b = reduced.absorption(0.0).unwrap();
        assert!(((a - b) / b).abs() < 0.02);
    }
}
