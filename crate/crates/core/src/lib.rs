//! Discrete scattering angles from momentum-transfer quantization.
//!
//! A particle crossing a structure with a symmetry interval `Q` can only
//! exchange transverse momentum in quanta of `h/Q` (or half-integer
//! multiples, depending on the symmetry sign). This crate turns that rule
//! into concrete angle sets for three geometries:
//!
//! * a Laue lattice of plane spacing `d`: `n λ = 2 d sin θ`
//! * a single aperture of width `a`: `n λ = a sin θ`
//! * a double slit (width `a`, separation `c`): `n λ = c sin θ` and
//!   `(m + 1/2) λ = a sin θ`
//!
//! Alongside the corpuscular rules it provides an independent Fraunhofer
//! reference ([`oracle`]) with a numeric extremum finder ([`extrema`]), a
//! residual report between the two ([`compare`]), and a seeded ensemble
//! simulator that drops individually scattered particles on a screen
//! ([`ensemble`]).

pub mod compare;
pub mod ensemble;
mod error;
pub mod extrema;
pub mod kinematics;
pub mod oracle;
pub mod tolerances;

pub use error::{Error, Result};
pub use kinematics::{
    characteristic_length, momentum_transfer, order_range, quantized_angles, symmetry_intervals,
    verify_branch, verify_quantum, ActionConstant, Beam, BranchKind, InteractionKind, OrderRange,
    QuantizationRule, ScatteringBranch, Scenario, SymmetryInterval,
};
