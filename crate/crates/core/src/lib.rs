//! Discrete superposition operators `L_mu = ∫ (-Δ)^s dmu(s)` on unions of
//! intervals, and the generalized eigenproblem `L_{mu+} u = λ L_{mu-} u`.
//!
//! The crate is `no_std` (it needs `alloc`). Everything here is a pure
//! function of its inputs; file formats and the command-line driver live in
//! the `mixspec` crate.
#![cfg_attr(not(test), no_std)]
// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;

pub mod eigensolver;
pub mod error;
pub mod experiments;
pub mod grid;
pub mod linalg;
pub mod measure;
pub mod operator;
pub mod quadrature;

pub use eigensolver::{
    build_pencil, rayleigh_quotient, sign_classification, simplicity_diagnostic,
    smallest_eigenpairs, EigenResult, Pencil, SignClass, Simplicity,
};
pub use error::{Error, Result};
pub use experiments::{
    boundary_growth_check, classical_anchor_check, classical_limit_oracle, localization_sweep,
    operator_limits_check, oracle_crosscheck, seminorm_lemma_checks, sign_change_check,
    simplicity_dichotomy, simplicity_positivity_check, simplicity_scan, union_inequality_check,
    ExperimentReport, SweepRow, Verdict,
};
pub use grid::{build_grid, component_restriction, Domain, Grid};
pub use measure::{combine, from_density, make_dirac, MeasureAtom, Part, SignedMeasure};
pub use operator::{
    assemble_single, assemble_superposed, brute_force_apply, cns_constant, fourier_symbol,
    seminorm_sq, stencil_weights, xplus_norm_sq, OperatorMatrix,
};
