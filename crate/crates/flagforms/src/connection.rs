//! The torus connection on conjugation-quotient representation varieties.
//!
//! Points are tuples `ρ = (A_1, B_1, ..., A_g, B_g)` in U(n)^{2g}, with the
//! relation variety cut out by `∏_i [A_i, B_i] = β·exp(X̂)` for a twist `β`
//! and a torus weight `X`. The diagonal torus acts by simultaneous
//! conjugation; the orbit direction through `ρ` generated by `X ∈ 𝔱` is, in
//! left-translated components,
//!
//! ```text
//! f_ρ(X) = (A_1⁻¹XA_1 − X,  B_1⁻¹XB_1 − X,  ...,  B_g⁻¹XB_g − X).
//! ```
//!
//! The center acts trivially — `f_ρ(iI) = 0` identically — so the vertical
//! space has dimension at most `n−1` and the connection form is valued in
//! the traceless part `𝔱₀` of the torus algebra: `ω(f_ρ(X))` recovers
//! exactly the traceless part of `X`. Orthonormalizing the images of a
//! traceless diagonal basis gives the vertical frame `w_j`; the connection
//! is the vertical projection followed by inversion of the generator map,
//! `ω(ξ) = Σ_j ⟨ξ, w_j⟩ f̄_ρ⁻¹(w_j)`, and its curvature `Ω = dω + ½[ω,ω]`
//! is evaluated by central finite differences along left-invariant
//! extensions. A projected-gradient solver with polar retraction produces
//! the variety points the evaluations are sampled at.

use nalgebra::DMatrix;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::lie::{
    adjoint, bracket, haar_sample, inner_product, matrix_exp, AntiHermitian, CMatrix, Cpx,
    LieBasis, LieError, TorusWeight, UnitaryMatrix,
};
use crate::roots::{independence_rank, RootsError};

/// Central finite-difference step used by curvature evaluation.
pub const CURVATURE_FD_STEP: f64 = 1e-5;
/// Orthonormality the vertical frame guarantees under the product metric.
pub const FRAME_ORTHO_TOL: f64 = 1e-10;
/// Relative pivot threshold below which Gram-Schmidt declares degeneracy.
const FRAME_PIVOT_TOL: f64 = 1e-8;
/// Pivot ratio that triggers a second orthogonalization pass.
const REORTH_CONDITION: f64 = 1e6;
/// Entrywise distance within which two tuples count as the same base point.
const BASE_MATCH_TOL: f64 = 1e-9;
/// Line-search step floor; below it the solver reports non-convergence.
const MIN_STEP: f64 = 1e-14;
/// Armijo sufficient-decrease constant for the line search.
const ARMIJO: f64 = 1e-4;

#[derive(Debug, Error)]
pub enum ConnectionError {
    #[error("a tuple needs an even, positive number of entries; got {0}")]
    BadEntryCount(usize),
    #[error("mixed matrix dimensions {left} and {right}")]
    DimensionMismatch { left: usize, right: usize },
    #[error("component count {got} does not match 2*genus = {expected}")]
    ComponentCount { expected: usize, got: usize },
    #[error("genus index {index} is out of range for genus {genus}")]
    GenusOutOfRange { index: usize, genus: usize },
    #[error(
        "vertical frame is degenerate: conjugation directions have rank {rank}, need {required}"
    )]
    DegenerateFrame { rank: usize, required: usize },
    #[error("no convergence after {iterations} iterations; relation defect {defect:.3e}")]
    NonConvergence { iterations: usize, defect: f64 },
    #[error("frame was computed at a different tuple (entry distance {distance:.3e})")]
    FrameMismatch { distance: f64 },
    #[error("tangent tuples are based at different points")]
    BaseMismatch,
    #[error(transparent)]
    Lie(#[from] LieError),
    #[error(transparent)]
    Roots(#[from] RootsError),
}

/// A point of U(n)^{2g}: the ordered tuple `(A_1, B_1, ..., A_g, B_g)`.
#[derive(Debug, Clone, PartialEq)]
pub struct GroupTuple {
    genus: usize,
    entries: Vec<UnitaryMatrix>,
}

impl GroupTuple {
    pub fn new(entries: Vec<UnitaryMatrix>) -> Result<Self, ConnectionError> {
        if entries.is_empty() || entries.len() % 2 != 0 {
            return Err(ConnectionError::BadEntryCount(entries.len()));
        }
        let n = entries[0].n();
        for e in &entries {
            if e.n() != n {
                return Err(ConnectionError::DimensionMismatch { left: n, right: e.n() });
            }
        }
        Ok(Self { genus: entries.len() / 2, entries })
    }

    /// The tuple of identities, a trivially flat point for `β = I`, `X = 0`.
    pub fn identity(n: usize, genus: usize) -> Result<Self, ConnectionError> {
        Self::new(vec![UnitaryMatrix::identity(n); 2 * genus.max(0)])
    }

    /// Haar-random tuple, the solver's seed-determined starting point.
    pub fn haar<R: Rng + ?Sized>(
        n: usize,
        genus: usize,
        rng: &mut R,
    ) -> Result<Self, ConnectionError> {
        let entries = (0..2 * genus)
            .map(|_| haar_sample(n, rng))
            .collect::<Result<Vec<_>, _>>()?;
        Self::new(entries)
    }

    pub fn genus(&self) -> usize {
        self.genus
    }

    pub fn n(&self) -> usize {
        self.entries[0].n()
    }

    pub fn entries(&self) -> &[UnitaryMatrix] {
        &self.entries
    }

    /// The handle generator `A_i`, 0-based.
    pub fn a(&self, i: usize) -> Result<&UnitaryMatrix, ConnectionError> {
        if i >= self.genus {
            return Err(ConnectionError::GenusOutOfRange { index: i, genus: self.genus });
        }
        Ok(&self.entries[2 * i])
    }

    /// The handle generator `B_i`, 0-based.
    pub fn b(&self, i: usize) -> Result<&UnitaryMatrix, ConnectionError> {
        if i >= self.genus {
            return Err(ConnectionError::GenusOutOfRange { index: i, genus: self.genus });
        }
        Ok(&self.entries[2 * i + 1])
    }

    /// Largest entrywise Frobenius distance to another tuple.
    fn entry_distance(&self, other: &Self) -> f64 {
        if self.entries.len() != other.entries.len() {
            return f64::INFINITY;
        }
        self.entries
            .iter()
            .zip(&other.entries)
            .map(|(x, y)| (x.matrix() - y.matrix()).norm())
            .fold(0.0, f64::max)
    }
}

/// Tangent vector to U(n)^{2g} at `base`, stored in left-translated
/// components: the ambient direction in slot `i` is `base_i · component_i`.
#[derive(Debug, Clone)]
pub struct TupleTangent {
    base: GroupTuple,
    components: Vec<AntiHermitian>,
}

impl TupleTangent {
    pub fn new(
        base: GroupTuple,
        components: Vec<AntiHermitian>,
    ) -> Result<Self, ConnectionError> {
        if components.len() != 2 * base.genus() {
            return Err(ConnectionError::ComponentCount {
                expected: 2 * base.genus(),
                got: components.len(),
            });
        }
        for c in &components {
            if c.n() != base.n() {
                return Err(ConnectionError::DimensionMismatch { left: base.n(), right: c.n() });
            }
        }
        Ok(Self { base, components })
    }

    pub fn zero(base: GroupTuple) -> Self {
        let components = vec![AntiHermitian::zeros(base.n()); 2 * base.genus()];
        Self { base, components }
    }

    pub fn base(&self) -> &GroupTuple {
        &self.base
    }

    pub fn components(&self) -> &[AntiHermitian] {
        &self.components
    }

    pub fn n(&self) -> usize {
        self.base.n()
    }

    fn check_same_base(&self, other: &Self) -> Result<(), ConnectionError> {
        if self.base.entry_distance(&other.base) > BASE_MATCH_TOL {
            return Err(ConnectionError::BaseMismatch);
        }
        Ok(())
    }

    pub fn add(&self, other: &Self) -> Result<Self, ConnectionError> {
        self.check_same_base(other)?;
        let components = self
            .components
            .iter()
            .zip(&other.components)
            .map(|(x, y)| x.add(y))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(Self { base: self.base.clone(), components })
    }

    pub fn sub(&self, other: &Self) -> Result<Self, ConnectionError> {
        self.add(&other.scale(-1.0))
    }

    pub fn scale(&self, t: f64) -> Self {
        let components = self.components.iter().map(|x| x.scale(t)).collect();
        Self { base: self.base.clone(), components }
    }

    /// Product inner product: the sum of the slotwise trace-form pairings.
    pub fn inner(&self, other: &Self) -> Result<f64, ConnectionError> {
        self.check_same_base(other)?;
        let mut total = 0.0;
        for (x, y) in self.components.iter().zip(&other.components) {
            total += inner_product(x, y)?;
        }
        Ok(total)
    }

    pub fn norm(&self) -> f64 {
        let mut total = 0.0;
        for x in &self.components {
            let n = x.norm();
            total += n * n;
        }
        total.sqrt()
    }
}

/// The conjugation-orbit generator `f_ρ(X)` in left-translated components:
/// slot `i` holds `ρ_i⁻¹ X ρ_i − X`.
pub fn conjugation_image(
    rho: &GroupTuple,
    x: &AntiHermitian,
) -> Result<TupleTangent, ConnectionError> {
    if x.n() != rho.n() {
        return Err(ConnectionError::DimensionMismatch { left: rho.n(), right: x.n() });
    }
    let components = rho
        .entries()
        .iter()
        .map(|entry| adjoint(&entry.inverse(), x)?.sub(x))
        .collect::<Result<Vec<_>, _>>()?;
    TupleTangent::new(rho.clone(), components)
}

/// Orthonormal basis `ε_1, ..., ε_{n−1}` of the traceless diagonal
/// subalgebra `𝔱₀`: `ε_k = i·diag(1,...,1,−k,0,...,0)/√(k(k+1))` with `k`
/// leading ones.
pub fn effective_torus_basis(n: usize) -> Vec<AntiHermitian> {
    (1..n)
        .map(|k| {
            let scale = 1.0 / ((k * (k + 1)) as f64).sqrt();
            let mut m = CMatrix::zeros(n, n);
            for i in 0..k {
                m[(i, i)] = Cpx::new(0.0, scale);
            }
            m[(k, k)] = Cpx::new(0.0, -(k as f64) * scale);
            AntiHermitian::from_skew_unchecked(m)
        })
        .collect()
}

/// Projection onto the traceless subalgebra: `X − (tr X / n)·I`.
pub fn traceless_part(x: &AntiHermitian) -> AntiHermitian {
    let n = x.n();
    let mean = x.matrix().trace() / Cpx::new(n as f64, 0.0);
    let mut m = x.matrix().clone();
    for i in 0..n {
        m[(i, i)] -= mean;
    }
    AntiHermitian::from_skew_unchecked(m)
}

/// The prescribed relation value `β·exp(X̂)` the commutator product must hit.
#[derive(Debug, Clone)]
pub struct RelationTarget {
    beta: UnitaryMatrix,
    weight: TorusWeight,
}

impl RelationTarget {
    pub fn new(beta: UnitaryMatrix, weight: TorusWeight) -> Result<Self, ConnectionError> {
        if beta.n() != weight.n() {
            return Err(ConnectionError::DimensionMismatch { left: beta.n(), right: weight.n() });
        }
        Ok(Self { beta, weight })
    }

    /// The trivial target `β = I`, `X = 0`: the flat commutator relation.
    pub fn flat(n: usize) -> Self {
        Self {
            beta: UnitaryMatrix::identity(n),
            weight: TorusWeight::new(vec![0.0; n]).expect("zero weight is finite"),
        }
    }

    pub fn beta(&self) -> &UnitaryMatrix {
        &self.beta
    }

    pub fn weight(&self) -> &TorusWeight {
        &self.weight
    }

    pub fn n(&self) -> usize {
        self.beta.n()
    }

    /// The matrix `β·exp(X̂)`.
    pub fn value(&self) -> CMatrix {
        self.beta.matrix() * matrix_exp(&self.weight.realize()).matrix()
    }
}

fn commutator_product(rho: &GroupTuple) -> CMatrix {
    let n = rho.n();
    let mut product = CMatrix::identity(n, n);
    for i in 0..rho.genus() {
        let a = rho.entries()[2 * i].matrix();
        let b = rho.entries()[2 * i + 1].matrix();
        product = product * (a * b * a.adjoint() * b.adjoint());
    }
    product
}

/// Frobenius distance of `∏_i [A_i, B_i]` from the target value; zero iff
/// the tuple lies on the relation variety.
pub fn relation_defect(rho: &GroupTuple, target: &RelationTarget) -> Result<f64, ConnectionError> {
    if rho.n() != target.n() {
        return Err(ConnectionError::DimensionMismatch { left: rho.n(), right: target.n() });
    }
    Ok((commutator_product(rho) - target.value()).norm())
}

/// Projected-gradient solver configuration.
#[derive(Debug, Clone)]
pub struct SolverOptions {
    /// Initial line-search step; grows on success, halves on rejection.
    pub initial_step: f64,
    /// Iteration budget before the solver gives up.
    pub budget: usize,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self { initial_step: 0.25, budget: 10_000 }
    }
}

/// Half the squared relation defect — the solver's objective.
fn objective(rho: &GroupTuple, target_value: &CMatrix) -> f64 {
    let e = commutator_product(rho) - target_value;
    0.5 * e.norm_squared()
}

/// Left-translated descent directions for every tuple entry: the negative
/// Riemannian gradient of the squared-defect objective.
///
/// With `E = ∏[A_i,B_i] − target`, prefix `P_i`, suffix `S_i` of the other
/// commutators, and `G = A†B†·S E† P·A`, the derivative of the objective
/// along skew `(â, b̂)` in slot `i` is `Re tr([B,G]â) + Re tr((GB − AGBA†)b̂)`,
/// so the steepest descent directions are the skew parts of `[B,G]` and
/// `GB − AGBA†`.
fn descent_directions(rho: &GroupTuple, target_value: &CMatrix) -> Vec<AntiHermitian> {
    let genus = rho.genus();
    let n = rho.n();
    let commutators: Vec<CMatrix> = (0..genus)
        .map(|i| {
            let a = rho.entries()[2 * i].matrix();
            let b = rho.entries()[2 * i + 1].matrix();
            a * b * a.adjoint() * b.adjoint()
        })
        .collect();
    let mut prefixes = vec![CMatrix::identity(n, n)];
    for c in &commutators {
        let last = prefixes.last().expect("nonempty").clone();
        prefixes.push(last * c);
    }
    let mut suffixes = vec![CMatrix::identity(n, n); genus + 1];
    for i in (0..genus).rev() {
        suffixes[i] = &commutators[i] * &suffixes[i + 1];
    }
    let error = prefixes[genus].clone() - target_value;

    let mut directions = Vec::with_capacity(2 * genus);
    for i in 0..genus {
        let a = rho.entries()[2 * i].matrix();
        let b = rho.entries()[2 * i + 1].matrix();
        // T = S_i E† P_i collects the fixed factors around slot i.
        let t = &suffixes[i + 1] * error.adjoint() * &prefixes[i];
        let g = a.adjoint() * b.adjoint() * &t * a;
        let k_a = b * &g - &g * b;
        let gb = &g * b;
        let k_b = &gb - a * &gb * a.adjoint();
        directions.push(skew_part(&k_a));
        directions.push(skew_part(&k_b));
    }
    directions
}

fn skew_part(m: &CMatrix) -> AntiHermitian {
    AntiHermitian::from_skew_unchecked((m - m.adjoint()) * Cpx::new(0.5, 0.0))
}

/// Moves every entry by `step` along its direction and re-unitarizes with
/// the polar factor (the nearest unitary to `entry·(I + step·d)`).
fn polar_retract(
    rho: &GroupTuple,
    directions: &[AntiHermitian],
    step: f64,
) -> Result<GroupTuple, ConnectionError> {
    let n = rho.n();
    let entries = rho
        .entries()
        .iter()
        .zip(directions)
        .map(|(entry, d)| {
            let moved =
                entry.matrix() * (CMatrix::identity(n, n) + d.matrix() * Cpx::new(step, 0.0));
            let svd = moved.svd(true, true);
            let u = svd.u.expect("svd with u requested");
            let v_t = svd.v_t.expect("svd with v_t requested");
            UnitaryMatrix::new(u * v_t).map_err(ConnectionError::from)
        })
        .collect::<Result<Vec<_>, _>>()?;
    GroupTuple::new(entries)
}

/// Runs the projected-gradient solver and returns the produced tuple with
/// the accepted relation-defect history (non-increasing by construction).
pub fn solve_point_traced(
    target: &RelationTarget,
    genus: usize,
    seed: u64,
    tol: f64,
    options: &SolverOptions,
) -> Result<(GroupTuple, Vec<f64>), ConnectionError> {
    if genus == 0 {
        return Err(ConnectionError::BadEntryCount(0));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut rho = GroupTuple::haar(target.n(), genus, &mut rng)?;
    let target_value = target.value();

    let mut value = objective(&rho, &target_value);
    let mut trace = vec![(2.0 * value).sqrt()];
    let mut step = options.initial_step;
    let mut iterations = 0;

    while iterations < options.budget {
        if (2.0 * value).sqrt() <= tol {
            return Ok((rho, trace));
        }
        let directions = descent_directions(&rho, &target_value);
        let slope: f64 = directions.iter().map(|d| {
            let n = d.norm();
            n * n
        }).sum();
        if slope == 0.0 {
            break;
        }
        // Backtracking line search with sufficient decrease.
        let mut accepted = false;
        while step >= MIN_STEP {
            let candidate = polar_retract(&rho, &directions, step)?;
            let candidate_value = objective(&candidate, &target_value);
            if candidate_value <= value - ARMIJO * step * slope {
                rho = candidate;
                value = candidate_value;
                trace.push((2.0 * value).sqrt());
                step *= 1.3;
                accepted = true;
                break;
            }
            step *= 0.5;
        }
        iterations += 1;
        if !accepted {
            break;
        }
    }
    let defect = (2.0 * value).sqrt();
    if defect <= tol {
        Ok((rho, trace))
    } else {
        Err(ConnectionError::NonConvergence { iterations, defect })
    }
}

/// A tuple on the relation variety with defect at most `tol`, found by
/// seeded projected-gradient descent; deterministic given the seed.
pub fn solve_point(
    target: &RelationTarget,
    genus: usize,
    seed: u64,
    tol: f64,
    options: &SolverOptions,
) -> Result<GroupTuple, ConnectionError> {
    solve_point_traced(target, genus, seed, tol, options).map(|(rho, _)| rho)
}

/// The vertical frame at a tuple: raw conjugation directions `f_ρ(e_i)`,
/// an orthonormal basis of their span built from the traceless diagonal
/// basis, and the change of basis realizing `f̄_ρ⁻¹`.
#[derive(Debug, Clone)]
pub struct VerticalFrame {
    base: GroupTuple,
    raw: Vec<TupleTangent>,
    effective: Vec<AntiHermitian>,
    orthonormal: Vec<TupleTangent>,
    change_of_basis: DMatrix<f64>,
}

impl VerticalFrame {
    pub fn base(&self) -> &GroupTuple {
        &self.base
    }

    /// The `n` raw generators `f_ρ(e_i)`; they always sum to zero because
    /// the center acts trivially.
    pub fn raw(&self) -> &[TupleTangent] {
        &self.raw
    }

    /// The `n−1` orthonormal vertical vectors `w_j`.
    pub fn orthonormal(&self) -> &[TupleTangent] {
        &self.orthonormal
    }

    /// The traceless diagonal basis whose images were orthonormalized.
    pub fn effective_basis(&self) -> &[AntiHermitian] {
        &self.effective
    }

    /// Dimension of the vertical space, `n−1` for a non-degenerate frame.
    pub fn rank(&self) -> usize {
        self.orthonormal.len()
    }

    /// Coordinates of `f̄_ρ⁻¹(w_j)` over the effective basis, column `j`.
    pub fn change_of_basis(&self) -> &DMatrix<f64> {
        &self.change_of_basis
    }

    /// `f̄_ρ⁻¹(w_j)`: the unique traceless torus element mapping onto `w_j`.
    pub fn inverse_image(&self, j: usize) -> Result<AntiHermitian, ConnectionError> {
        if j >= self.rank() {
            return Err(ConnectionError::GenusOutOfRange { index: j, genus: self.rank() });
        }
        let mut out = AntiHermitian::zeros(self.base.n());
        for (k, eps) in self.effective.iter().enumerate() {
            out = out.add(&eps.scale(self.change_of_basis[(k, j)]))?;
        }
        Ok(out)
    }
}

/// One modified Gram-Schmidt sweep; returns the orthonormal vectors and the
/// pivot norms, or the achieved rank on collapse.
fn gram_schmidt_pass(
    vectors: &[TupleTangent],
) -> Result<(Vec<TupleTangent>, Vec<f64>), usize> {
    let scale = vectors.iter().map(TupleTangent::norm).fold(1.0f64, f64::max);
    let mut ortho: Vec<TupleTangent> = Vec::with_capacity(vectors.len());
    let mut pivots = Vec::with_capacity(vectors.len());
    for (j, vector) in vectors.iter().enumerate() {
        let mut v = vector.clone();
        for w in &ortho {
            let c = v.inner(w).expect("frame vectors share a base");
            v = v.sub(&w.scale(c)).expect("frame vectors share a base");
        }
        let norm = v.norm();
        if norm <= FRAME_PIVOT_TOL * scale {
            return Err(j);
        }
        pivots.push(norm);
        ortho.push(v.scale(1.0 / norm));
    }
    Ok((ortho, pivots))
}

/// Builds the vertical frame at `ρ`, orthonormalizing the conjugation images
/// of the traceless diagonal basis by modified Gram-Schmidt (with a second
/// pass when the pivots are badly conditioned).
pub fn vertical_frame(
    rho: &GroupTuple,
    basis: &LieBasis,
) -> Result<VerticalFrame, ConnectionError> {
    if basis.n() != rho.n() {
        return Err(ConnectionError::DimensionMismatch { left: rho.n(), right: basis.n() });
    }
    let n = rho.n();
    let required = n.saturating_sub(1);

    let raw = (0..n)
        .map(|i| conjugation_image(rho, basis.diag(i)?))
        .collect::<Result<Vec<_>, _>>()?;
    let raw_components: Vec<Vec<AntiHermitian>> =
        raw.iter().map(|t| t.components().to_vec()).collect();
    let rank = independence_rank(&raw_components)?;
    if rank < required {
        return Err(ConnectionError::DegenerateFrame { rank, required });
    }

    let effective = effective_torus_basis(n);
    let images = effective
        .iter()
        .map(|eps| conjugation_image(rho, eps))
        .collect::<Result<Vec<_>, _>>()?;

    let (mut orthonormal, pivots) = gram_schmidt_pass(&images)
        .map_err(|rank| ConnectionError::DegenerateFrame { rank, required })?;
    let condition = pivots.iter().cloned().fold(0.0f64, f64::max)
        / pivots.iter().cloned().fold(f64::INFINITY, f64::min);
    if condition > REORTH_CONDITION {
        orthonormal = gram_schmidt_pass(&orthonormal)
            .map_err(|rank| ConnectionError::DegenerateFrame { rank, required })?
            .0;
    }

    // w_j = Σ_k c_kj f_ρ(ε_k) with C = M⁻¹ for M_ij = <w_i, f_ρ(ε_j)>, so
    // column j of C gives f̄_ρ⁻¹(w_j) over the effective basis.
    let m = DMatrix::from_fn(required, required, |i, k| {
        orthonormal[i].inner(&images[k]).expect("frame vectors share a base")
    });
    let change_of_basis = m
        .try_inverse()
        .ok_or(ConnectionError::DegenerateFrame { rank: required.saturating_sub(1), required })?;

    Ok(VerticalFrame { base: rho.clone(), raw, effective, orthonormal, change_of_basis })
}

/// The connection form: vertical projection followed by inversion of the
/// generator map, `ω(ξ) = Σ_j ⟨ξ, w_j⟩ f̄_ρ⁻¹(w_j)`. Values lie in the
/// traceless diagonal subalgebra, and `ω(f_ρ(X))` is the traceless part
/// of `X`.
pub fn connection_eval(
    rho: &GroupTuple,
    xi: &TupleTangent,
    frame: &VerticalFrame,
    basis: &LieBasis,
) -> Result<AntiHermitian, ConnectionError> {
    if basis.n() != rho.n() {
        return Err(ConnectionError::DimensionMismatch { left: rho.n(), right: basis.n() });
    }
    let distance = frame.base().entry_distance(rho);
    if distance > BASE_MATCH_TOL {
        return Err(ConnectionError::FrameMismatch { distance });
    }
    if xi.base().entry_distance(rho) > BASE_MATCH_TOL {
        return Err(ConnectionError::BaseMismatch);
    }
    let mut out = AntiHermitian::zeros(rho.n());
    for j in 0..frame.rank() {
        let coefficient = xi.inner(&frame.orthonormal()[j])?;
        out = out.add(&frame.inverse_image(j)?.scale(coefficient))?;
    }
    Ok(out)
}

/// The tuple `(ρ_i · exp(s·ξ_i))_i`: the time-`s` flow of the left-invariant
/// extension of `ξ`.
fn flow(rho: &GroupTuple, xi: &TupleTangent, s: f64) -> Result<GroupTuple, ConnectionError> {
    let entries = rho
        .entries()
        .iter()
        .zip(xi.components())
        .map(|(entry, c)| entry.mul(&matrix_exp(&c.scale(s))))
        .collect::<Result<Vec<_>, _>>()?;
    GroupTuple::new(entries)
}

/// `d/ds ω_{flow(ρ, along, s)}(arg̃)` at `s = 0` by central differences,
/// where `arg̃` is the left-invariant extension of `arg`.
fn connection_directional_derivative(
    rho: &GroupTuple,
    along: &TupleTangent,
    arg: &TupleTangent,
    basis: &LieBasis,
    step: f64,
) -> Result<AntiHermitian, ConnectionError> {
    let mut values = Vec::with_capacity(2);
    for s in [step, -step] {
        let moved = flow(rho, along, s)?;
        let frame = vertical_frame(&moved, basis)?;
        let extended = TupleTangent::new(moved.clone(), arg.components().to_vec())?;
        values.push(connection_eval(&moved, &extended, &frame, basis)?);
    }
    Ok(values[0].sub(&values[1])?.scale(0.5 / step))
}

/// Curvature `Ω(ξ, η) = dω(ξ, η) + [ω(ξ), ω(η)]` at `ρ`, with `dω` from
/// central finite differences along left-invariant extensions:
/// `dω(ξ,η) = ξ̃(ω(η̃)) − η̃(ω(ξ̃)) − ω([ξ,η])`. The bracket term vanishes
/// identically for a torus-valued form but is evaluated for contract
/// symmetry. Antisymmetric in `(ξ, η)` by construction.
pub fn curvature_eval(
    rho: &GroupTuple,
    xi: &TupleTangent,
    eta: &TupleTangent,
    basis: &LieBasis,
    step: f64,
) -> Result<AntiHermitian, ConnectionError> {
    if xi.base().entry_distance(rho) > BASE_MATCH_TOL
        || eta.base().entry_distance(rho) > BASE_MATCH_TOL
    {
        return Err(ConnectionError::BaseMismatch);
    }
    let d_xi_eta = connection_directional_derivative(rho, xi, eta, basis, step)?;
    let d_eta_xi = connection_directional_derivative(rho, eta, xi, basis, step)?;

    let frame = vertical_frame(rho, basis)?;
    let commutator_components = xi
        .components()
        .iter()
        .zip(eta.components())
        .map(|(x, y)| bracket(x, y))
        .collect::<Result<Vec<_>, _>>()?;
    let commutator_tangent = TupleTangent::new(rho.clone(), commutator_components)?;
    let omega_commutator = connection_eval(rho, &commutator_tangent, &frame, basis)?;

    let omega_xi = connection_eval(rho, xi, &frame, basis)?;
    let omega_eta = connection_eval(rho, eta, &frame, basis)?;
    let bracket_term = bracket(&omega_xi, &omega_eta)?;

    d_xi_eta
        .sub(&d_eta_xi)?
        .sub(&omega_commutator)?
        .add(&bracket_term)
        .map_err(ConnectionError::from)
}

/// The generator two-form `Λ_i(ξ, η) = ⟨Ω(ξ, η), e_i⟩`.
pub fn generator_form_eval(
    rho: &GroupTuple,
    xi: &TupleTangent,
    eta: &TupleTangent,
    i: usize,
    basis: &LieBasis,
    step: f64,
) -> Result<f64, ConnectionError> {
    let curvature = curvature_eval(rho, xi, eta, basis, step)?;
    inner_product(&curvature, basis.diag(i)?).map_err(ConnectionError::from)
}
