//! Numerical machinery for multi-bump constructions in the Schrödinger–Newton
//! system
//!
//! ```text
//!   Δu − V(|x|)u + Ψu = 0,      ΔΨ + u²/2 = 0,      x ∈ ℝ³,
//! ```
//!
//! equivalently the single nonlocal equation
//! `−Δu + V u = (1/8π) (∫ u²(y)/|x−y| dy) u`.
//!
//! The crate provides, at desk scale:
//!
//! * [`groundstate`] — the radial ground state `(U, Ψ)` of the unit-potential
//!   problem by shooting, with tabulated profiles and the asymptotic
//!   constants `A₁ = ∫U²`, `A₂ = ∫∫U²U²/|x−y|`, `λ₂`, `λ₃`;
//! * [`ansatz`] — double-ring bump configurations `x̄_i, x̲_i` and the
//!   approximate solution `W_{r,t} = Σ U(·−x̄_i) + Σ U(·−x̲_i)`;
//! * [`nonlocal`] — grid-sampled fields, the free-space Newtonian potential by
//!   FFT convolution, the energy functional and the PDE residual;
//! * [`interaction`] — semi-analytic pair interactions, lattice sums and the
//!   multi-bump energy decomposition valid at separations no grid can hold;
//! * [`reduced`] — the closed-form reduced energy `F̄₁(r,t)`, its critical
//!   points and landscape sweeps;
//! * [`reduction`] — a numerical mirror of the finite-dimensional reduction:
//!   Z-functions, the constrained projection, the linearized operator and the
//!   contraction solve for the correction φ;
//! * [`verify`] — the acceptance checks behind the `verify` CLI subcommand.

pub mod ansatz;
pub mod error;
pub mod groundstate;
pub mod interaction;
pub mod interp;
pub mod nonlocal;
pub mod ode;
pub mod quad;
pub mod reduced;
pub mod reduction;
pub mod verify;

pub use ansatz::{BumpConfig, ParameterBox, Separations};
pub use error::Error;
pub use groundstate::{AsymptoticConstants, GroundState};
pub use interaction::PairTables;
pub use nonlocal::{EnergyBreakdown, SampledField, VParams};
pub use reduced::{CriticalPoint, Curvature, ReducedEnergySurface, ReducedModel};
pub use reduction::{ReductionDiagnostics, SectorGrid};

/// Crate result alias.
pub type Result<T> = std::result::Result<T, Error>;
