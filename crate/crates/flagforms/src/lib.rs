//! Numeric and exact-rational kernels for invariant differential forms on
//! the unitary flag manifold U(n)/T and on unitary representation varieties.
//!
//! Module map:
//! * [`lie`] — u(n) basics: orthonormal basis, bracket, exponential, adjoint
//!   action, torus projection, Haar sampling.
//! * [`roots`] — root-space data for the torus action and rank diagnostics.
//! * [`forms`] — Maurer-Cartan form, torus connection and its curvature
//!   2-forms on U(n)/T, the orbit 2-form, loop periods, and top wedge powers.
//! * [`connection`] — the torus connection on conjugation-quotient
//!   representation varieties: relation solver, vertical frames, connection
//!   and curvature evaluation.
//! * [`pairing`] — exact rational polynomial engine for the closed-form
//!   intersection pairings that the differential forms integrate to.

pub mod connection;
pub mod forms;
pub mod lie;
pub mod pairing;
pub mod roots;

pub use connection::{
    conjugation_image, connection_eval, curvature_eval, effective_torus_basis,
    generator_form_eval, relation_defect, solve_point, solve_point_traced, traceless_part,
    vertical_frame, ConnectionError, GroupTuple, RelationTarget, SolverOptions, TupleTangent,
    VerticalFrame,
};

pub use forms::{
    chern_weil_eval, circle_integral, dtheta_eval, invariant_top_ratio, kks_eval, maurer_cartan,
    pullback_residual, theta_components, theta_loop_integral, torus_curvature_form, CosetPoint,
    FormsError, InvariantPolynomial, OrbitPoint, TangentAtGroup,
};
pub use lie::{
    build_basis, inner_product, bracket, matrix_exp, adjoint, project_to_torus, haar_sample,
    random_anti_hermitian, random_horizontal, random_torus_weight, AntiHermitian, CMatrix, Cpx,
    LieBasis, LieError, TorusWeight, UnitaryMatrix,
};
pub use pairing::{
    c1_from_orbit_volume, derive_multi, intersection_number, total_pairing, vandermonde_product,
    wedge_power_expansion, weyl_antisymmetry_check, BaseIntegralValue, IntersectionValue,
    MultiIndex, NormalizationConstant, PairingError, PairingPolynomial,
};
pub use roots::{
    ad_minus_id_apply, independence_rank, independence_rank_flat, root_data, root_scaling_defect,
    Root, RootDatum, RootsError,
};
