//! Probe absorption of a ladder (Ξ-type) three-level atom coupled to a
//! damped, thermally driven single-mode cavity in the bad-cavity limit.
//!
//! The crate computes the cavity-modified atomic dynamics, the steady-state
//! probe absorption spectrum through the quantum regression theorem, the
//! linewidths that reveal interference-induced narrowing, and a brute-force
//! atom ⊗ truncated-Fock reference model used to check the reduced
//! description.
//!
//! All numerics are generic over [`Real`] (`f32` or `f64`); the `*64`
//! aliases below name the double-precision instantiations.

pub mod analysis;
pub mod bloch;
pub mod error;
pub mod linalg;
pub mod model;
pub mod ode;
pub mod oracle;
pub mod scalar;
pub mod spectrum;

pub use analysis::{
    closed_form_linewidths, eigen_linewidths, fit_lorentzians, fwhm, linewidth_report, peak, EigenLine,
    LinewidthReport, LorentzianComponent, LorentzianFit, Peak,
};
pub use bloch::{
    coherence_generator, evolve, population_generator, reduced_superoperator, relax, steady_state,
    steady_state_checked, AtomState, CoherenceGenerator, PopulationGenerator, ReducedSuperoperator,
};
pub use error::{Error, Result};
pub use model::{
    decay_rates, frequency_shift, response, validate, BlochForm, ResponsePair, SystemParams, ValidationReport,
};
pub use oracle::{FockTruncation, FullLiouvillian, FullSpectrum, FullState, OracleOptions};
pub use scalar::{Real, C};
pub use spectrum::{
    absorption, correlation_initials, correlation_time_domain, FrequencyGrid, ProbeConfig, SpectrumModel,
    SpectrumTrace, TraceOrigin,
};

pub type SystemParams64 = SystemParams<f64>;
pub type AtomState64 = AtomState<f64>;
pub type CoherenceGenerator64 = CoherenceGenerator<f64>;
pub type ProbeConfig64 = ProbeConfig<f64>;
pub type FrequencyGrid64 = FrequencyGrid<f64>;
pub type SpectrumTrace64 = SpectrumTrace<f64>;
pub type LinewidthReport64 = LinewidthReport<f64>;
pub type FullState64 = FullState<f64>;

pub type SystemParams32 = SystemParams<f32>;
pub type AtomState32 = AtomState<f32>;
pub type SpectrumTrace32 = SpectrumTrace<f32>;
