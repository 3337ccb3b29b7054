//! Invariant differential forms on the unitary group and its flag manifold
//! U(n)/T.
//!
//! Conventions (fixed once, verified by finite-difference oracles in tests):
//!
//! * the Maurer-Cartan form is the left-invariant one, `theta = g^{-1} dg`;
//! * cosets are left cosets `gT`, so a coset tangent at the representative
//!   `g` is written through its left translation `xi = g^{-1} v`, and the
//!   horizontal directions are spanned by the off-diagonal `u_jk`, `v_jk`;
//! * with these choices `d theta_i(xi, eta) = -<e_i, [xi, eta]>`, giving the
//!   sign table `d theta_i(u_jk, v_jk) = delta_ij - delta_ik`;
//! * the embedding of the flag manifold onto an adjoint orbit is
//!   `h(gT) = g X g^{-1}`, and the orbit 2-form evaluated on the generator
//!   fields `Y -> [Y, P]` is `<P, [Y1, Y2]>`.
//!
//! The sum `sum_i d theta_i` vanishes identically (the central direction
//! `iI` has zero bracket pairing), so only `n - 1` of the `n` curvature
//! components are independent; all `n` are still exposed.

use thiserror::Error;

use crate::lie::{
    adjoint, bracket, inner_product, matrix_exp, project_to_torus, AntiHermitian, CMatrix,
    LieBasis, LieError, TorusWeight, UnitaryMatrix,
};

/// Tolerance for the anti-Hermitian defect of `base^{-1} * direction` when
/// validating a group tangent.
pub const TANGENT_TOL: f64 = 1e-10;
/// Default panel count for loop-period quadrature.
pub const LOOP_PANELS: usize = 10_000;

#[derive(Debug, Error)]
pub enum FormsError {
    #[error("direction is not tangent at base: skew defect {defect:.3e} exceeds {tol:.1e}")]
    NonTangent { defect: f64, tol: f64 },
    #[error("component index {index} out of range for n = {n}")]
    IndexOutOfRange { index: usize, n: usize },
    #[error("expected {expected} vectors for a degree-{degree} polynomial, got {got}")]
    ArityMismatch { degree: usize, expected: usize, got: usize },
    #[error("expected {expected} curvature slots, got {got}")]
    CurvatureArity { expected: usize, got: usize },
    #[error("the coset frame is empty for n = {0}; need n >= 2")]
    EmptyFrame(usize),
    #[error("quadrature needs at least one panel")]
    NoPanels,
    #[error(transparent)]
    Lie(#[from] LieError),
}

/// A tangent vector to U(n) at `base`, stored in ambient coordinates.
/// Valid when `base^{-1} * direction` is anti-Hermitian within
/// [`TANGENT_TOL`].
#[derive(Debug, Clone)]
pub struct TangentAtGroup {
    base: UnitaryMatrix,
    direction: CMatrix,
}

impl TangentAtGroup {
    pub fn new(base: UnitaryMatrix, direction: CMatrix) -> Result<Self, FormsError> {
        if direction.nrows() != base.n() || direction.ncols() != base.n() {
            return Err(LieError::DimensionMismatch {
                left: direction.nrows(),
                right: base.n(),
            }
            .into());
        }
        let pulled = base.matrix().adjoint() * &direction;
        let defect = (&pulled + pulled.adjoint()).iter().fold(0.0f64, |a, z| a.max(z.norm()));
        if defect > TANGENT_TOL {
            return Err(FormsError::NonTangent { defect, tol: TANGENT_TOL });
        }
        Ok(Self { base, direction })
    }

    /// Tangent at `base` with prescribed left translation `xi`, i.e. the
    /// ambient direction `base * xi`.
    pub fn from_left(base: UnitaryMatrix, xi: &AntiHermitian) -> Result<Self, FormsError> {
        if base.n() != xi.n() {
            return Err(LieError::DimensionMismatch { left: base.n(), right: xi.n() }.into());
        }
        let direction = base.matrix() * xi.matrix();
        Ok(Self { base, direction })
    }

    pub fn base(&self) -> &UnitaryMatrix {
        &self.base
    }

    pub fn direction(&self) -> &CMatrix {
        &self.direction
    }
}

/// A point of the flag manifold U(n)/T, stored through one representative.
/// All coset-level evaluators are independent of the representative chosen
/// within `gT`.
#[derive(Debug, Clone)]
pub struct CosetPoint {
    representative: UnitaryMatrix,
}

impl CosetPoint {
    pub fn new(representative: UnitaryMatrix) -> Self {
        Self { representative }
    }

    pub fn identity(n: usize) -> Self {
        Self { representative: UnitaryMatrix::identity(n) }
    }

    pub fn representative(&self) -> &UnitaryMatrix {
        &self.representative
    }

    pub fn n(&self) -> usize {
        self.representative.n()
    }
}

/// A point of an adjoint orbit: an anti-Hermitian matrix with the spectrum
/// of its generating torus element.
#[derive(Debug, Clone)]
pub struct OrbitPoint {
    value: AntiHermitian,
}

impl OrbitPoint {
    pub fn new(value: AntiHermitian) -> Self {
        Self { value }
    }

    /// The orbit point `g X g^{-1}` reached from the torus element `X`.
    pub fn from_conjugation(x: &AntiHermitian, g: &UnitaryMatrix) -> Result<Self, FormsError> {
        Ok(Self { value: adjoint(g, x)? })
    }

    pub fn value(&self) -> &AntiHermitian {
        &self.value
    }
}

/// The left Maurer-Cartan form: `theta(v) = base^{-1} * direction`, an
/// element of u(n). The stored value is exactly skew-symmetrized.
pub fn maurer_cartan(v: &TangentAtGroup) -> Result<AntiHermitian, FormsError> {
    let pulled = v.base.matrix().adjoint() * &v.direction;
    Ok(AntiHermitian::with_tolerance(pulled, TANGENT_TOL).map_err(|e| match e {
        LieError::NotAntiHermitian { defect, tol } => FormsError::NonTangent { defect, tol },
        other => FormsError::Lie(other),
    })?)
}

/// Components `theta_i(v) = <e_i, theta(v)>` along the diagonal basis.
pub fn theta_components(v: &TangentAtGroup, basis: &LieBasis) -> Result<Vec<f64>, FormsError> {
    let mc = maurer_cartan(v)?;
    let mut out = Vec::with_capacity(basis.n());
    for i in 0..basis.n() {
        out.push(inner_product(&mc, basis.diag(i)?)?);
    }
    Ok(out)
}

/// The curvature component `d theta_i` of the torus connection, evaluated at
/// the coset `p` on tangents given through their left translations. The
/// value `-<e_i, [xi, eta]>` is independent of the representative and of the
/// point; `p` is kept in the signature because the form lives on U(n)/T.
pub fn dtheta_eval(
    i: usize,
    p: &CosetPoint,
    xi: &AntiHermitian,
    eta: &AntiHermitian,
    basis: &LieBasis,
) -> Result<f64, FormsError> {
    if p.n() != basis.n() {
        return Err(LieError::DimensionMismatch { left: p.n(), right: basis.n() }.into());
    }
    if i >= basis.n() {
        return Err(FormsError::IndexOutOfRange { index: i, n: basis.n() });
    }
    let comm = bracket(xi, eta)?;
    Ok(-inner_product(basis.diag(i)?, &comm)?)
}

/// The curvature of the torus connection as a matrix-valued 2-form:
/// `Omega_T(xi, eta) = sum_i d theta_i(xi, eta) e_i = -proj_t([xi, eta])`.
pub fn torus_curvature_form(
    basis: &LieBasis,
) -> impl Fn(&AntiHermitian, &AntiHermitian) -> AntiHermitian + '_ {
    move |xi, eta| {
        let comm = bracket(xi, eta).expect("curvature arguments share the basis dimension");
        project_to_torus(&comm, basis)
            .expect("projection of a bracket cannot fail")
            .scale(-1.0)
    }
}

/// An Ad-invariant symmetric multilinear function on u(n), the polynomial
/// side of the Chern-Weil pairing. `degree` is the number of arguments.
pub struct InvariantPolynomial {
    degree: usize,
    eval: Box<dyn Fn(&[AntiHermitian]) -> f64 + Send + Sync>,
}

impl InvariantPolynomial {
    pub fn new(
        degree: usize,
        eval: impl Fn(&[AntiHermitian]) -> f64 + Send + Sync + 'static,
    ) -> Self {
        Self { degree, eval: Box::new(eval) }
    }

    /// The degree-1 component polynomial `p_j(X) = <X, e_j>`.
    pub fn torus_component(j: usize, basis: &LieBasis) -> Result<Self, FormsError> {
        let e = basis.diag(j)?.clone();
        Ok(Self::new(1, move |args: &[AntiHermitian]| {
            inner_product(&args[0], &e).expect("component argument dimension")
        }))
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn apply(&self, args: &[AntiHermitian]) -> Result<f64, FormsError> {
        if args.len() != self.degree {
            return Err(FormsError::ArityMismatch {
                degree: self.degree,
                expected: self.degree,
                got: args.len(),
            });
        }
        Ok((self.eval)(args))
    }

    /// Largest deviation of `f` from symmetry over adjacent-argument swaps.
    pub fn symmetry_defect(&self, args: &[AntiHermitian]) -> Result<f64, FormsError> {
        let base = self.apply(args)?;
        let mut worst = 0.0f64;
        for s in 0..self.degree.saturating_sub(1) {
            let mut swapped = args.to_vec();
            swapped.swap(s, s + 1);
            worst = worst.max((self.apply(&swapped)? - base).abs());
        }
        Ok(worst)
    }

    /// Deviation of `f` from Ad-invariance at the group element `g`.
    pub fn ad_invariance_defect(
        &self,
        g: &UnitaryMatrix,
        args: &[AntiHermitian],
    ) -> Result<f64, FormsError> {
        let base = self.apply(args)?;
        let moved: Result<Vec<_>, _> = args.iter().map(|x| adjoint(g, x)).collect();
        Ok((self.apply(&moved?)? - base).abs())
    }
}

impl std::fmt::Debug for InvariantPolynomial {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("InvariantPolynomial").field("degree", &self.degree).finish()
    }
}

/// Runs `visit` on every permutation of `0..m` together with its sign,
/// using Heap's algorithm (one transposition per step).
fn for_each_permutation_with_sign(m: usize, mut visit: impl FnMut(&[usize], f64)) {
    let mut perm: Vec<usize> = (0..m).collect();
    let mut counters = vec![0usize; m];
    let mut sign = 1.0;
    visit(&perm, sign);
    let mut i = 0;
    while i < m {
        if counters[i] < i {
            if i % 2 == 0 {
                perm.swap(0, i);
            } else {
                perm.swap(counters[i], i);
            }
            sign = -sign;
            visit(&perm, sign);
            counters[i] += 1;
            i = 0;
        } else {
            counters[i] = 0;
            i += 1;
        }
    }
}

/// Chern-Weil evaluation of a degree-k invariant polynomial on curvature
/// 2-forms: the alternating sum over all `(2k)!` pairings
///
/// ```text
/// f(Omega)(v_1, ..., v_2k)
///   = 2^{-k} * sum_{s in S_2k} sgn(s)
///       f(Omega_1(v_{s1}, v_{s2}), ..., Omega_k(v_{s(2k-1)}, v_{s(2k)}))
/// ```
///
/// normalized so that the result is the honest wedge-power evaluation; for
/// `k = 1` and `f = p_j` it reduces to `<Omega(v_1, v_2), e_j>`.
/// `curvatures` supplies one matrix-valued 2-form per polynomial slot (pass
/// the same form `k` times for a single curvature).
pub fn chern_weil_eval(
    f: &InvariantPolynomial,
    curvatures: &[&dyn Fn(&AntiHermitian, &AntiHermitian) -> AntiHermitian],
    vectors: &[AntiHermitian],
) -> Result<f64, FormsError> {
    let k = f.degree();
    if curvatures.len() != k {
        return Err(FormsError::CurvatureArity { expected: k, got: curvatures.len() });
    }
    if vectors.len() != 2 * k {
        return Err(FormsError::ArityMismatch { degree: k, expected: 2 * k, got: vectors.len() });
    }
    let mut total = 0.0;
    let mut args: Vec<AntiHermitian> = Vec::with_capacity(k);
    let mut err: Option<FormsError> = None;
    for_each_permutation_with_sign(2 * k, |perm, sign| {
        if err.is_some() {
            return;
        }
        args.clear();
        for slot in 0..k {
            let a = &vectors[perm[2 * slot]];
            let b = &vectors[perm[2 * slot + 1]];
            args.push(curvatures[slot](a, b));
        }
        match f.apply(&args) {
            Ok(v) => total += sign * v,
            Err(e) => err = Some(e),
        }
    });
    if let Some(e) = err {
        return Err(e);
    }
    Ok(total / 2.0f64.powi(k as i32))
}

/// The orbit 2-form at `p` on the generator fields of `Y1`, `Y2`:
/// `<p, [Y1, Y2]>`.
pub fn kks_eval(
    p: &OrbitPoint,
    y1: &AntiHermitian,
    y2: &AntiHermitian,
) -> Result<f64, FormsError> {
    Ok(inner_product(p.value(), &bracket(y1, y2)?)?)
}

/// Residual of the pullback identity between the orbit 2-form and the
/// torus-connection potential: for `h(gT) = g X g^{-1}` the pullback
/// `h^* omega` equals `-d<X, theta>`, so
///
/// ```text
/// residual = omega(dh xi, dh eta) + sum_i a_i d theta_i(xi, eta)
/// ```
///
/// which vanishes up to roundoff. The orbit side is evaluated through
/// [`kks_eval`] at `P = g X g^{-1}` with generators `Ad_g xi`, `Ad_g eta`
/// (the pushforward `dh(xi) = [Ad_g xi, P]` of a coset tangent is exactly
/// the generator field of `Ad_g xi`).
pub fn pullback_residual(
    x: &TorusWeight,
    p: &CosetPoint,
    xi: &AntiHermitian,
    eta: &AntiHermitian,
    basis: &LieBasis,
) -> Result<f64, FormsError> {
    if x.n() != basis.n() || p.n() != basis.n() {
        return Err(LieError::DimensionMismatch { left: x.n(), right: basis.n() }.into());
    }
    let g = p.representative();
    let orbit = OrbitPoint::from_conjugation(&x.realize(), g)?;
    let lhs = kks_eval(&orbit, &adjoint(g, xi)?, &adjoint(g, eta)?)?;
    let mut rhs = 0.0;
    for (i, &a) in x.coefficients().iter().enumerate() {
        rhs += a * dtheta_eval(i, p, xi, eta, basis)?;
    }
    Ok(lhs + rhs)
}

/// Line integral of the component `theta_component` along the torus loop
/// `t -> exp(t e_loop_index)`, `t` from 0 to `t_end`, by the midpoint rule.
pub fn theta_loop_integral(
    component: usize,
    loop_index: usize,
    t_end: f64,
    panels: usize,
    basis: &LieBasis,
) -> Result<f64, FormsError> {
    if panels == 0 {
        return Err(FormsError::NoPanels);
    }
    let e_loop = basis.diag(loop_index)?.clone();
    let dt = t_end / panels as f64;
    let mut acc = 0.0;
    for s in 0..panels {
        let t = (s as f64 + 0.5) * dt;
        let base = matrix_exp(&e_loop.scale(t));
        let v = TangentAtGroup::from_left(base, &e_loop)?;
        acc += theta_components(&v, basis)?[component] * dt;
    }
    Ok(acc)
}

/// Period of `theta_i` around its own coordinate circle
/// `t -> exp(t e_i)`, `t in [0, 2 pi]`. Equals `2 pi` in this normalization
/// (the loop closes because `exp(2 pi i E_ii) = I`).
pub fn circle_integral(i: usize, basis: &LieBasis) -> Result<f64, FormsError> {
    theta_loop_integral(i, i, 2.0 * std::f64::consts::PI, LOOP_PANELS, basis)
}

/// Evaluates the top wedge power `(d<X, theta>)^N`, `N = n(n-1)/2`, on the
/// ordered coset frame `(u_10, v_10, u_20, v_20, ...)` at `p`, i.e. the
/// ratio of the top power to the frame volume form. Because the 2-form has
/// no cross-pair terms, the value is the combinatorial product
/// `N! * prod_{j>k} c_jk` with `c_jk = sum_i a_i d theta_i(u_jk, v_jk)`;
/// it is independent of `p` and proportional to the Vandermonde product of
/// the coefficients.
pub fn invariant_top_ratio(
    x: &TorusWeight,
    p: &CosetPoint,
    basis: &LieBasis,
) -> Result<f64, FormsError> {
    let n = basis.n();
    if n < 2 {
        return Err(FormsError::EmptyFrame(n));
    }
    if x.n() != n || p.n() != n {
        return Err(LieError::DimensionMismatch { left: x.n(), right: n }.into());
    }
    let mut value = 1.0f64;
    for &(j, k) in basis.pairs() {
        let u = basis.sym(j, k)?;
        let v = basis.antisym(j, k)?;
        let mut c = 0.0;
        for (i, &a) in x.coefficients().iter().enumerate() {
            c += a * dtheta_eval(i, p, u, v, basis)?;
        }
        value *= c;
    }
    let big_n = n * (n - 1) / 2;
    let mut fact = 1.0f64;
    for m in 2..=big_n {
        fact *= m as f64;
    }
    Ok(fact * value)
}
