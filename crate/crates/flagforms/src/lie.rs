//! Lie-algebra kernel for u(n): the anti-Hermitian matrices with the
//! trace-form inner product `<X, Y> = -Re tr(XY)`.
//!
//! Everything downstream (root decompositions, invariant forms on the flag
//! manifold, the representation-variety connection) is built on the
//! orthonormal basis produced by [`build_basis`]:
//!
//! * diagonal elements `e_i = i E_ii` for `i = 0..n`,
//! * symmetric off-diagonal `u_{jk} = (i/sqrt 2)(E_jk + E_kj)` for `j > k`,
//! * antisymmetric off-diagonal `v_{jk} = (1/sqrt 2)(E_jk - E_kj)` for `j > k`.
//!
//! Indices are 0-based throughout the crate.

use nalgebra::{Complex, DMatrix, DVector};
use rand::Rng;
use rand_distr::StandardNormal;
use thiserror::Error;

/// Complex scalar used for all matrix entries.
pub type Cpx = Complex<f64>;
/// Dense complex matrix; the ambient type for all group and algebra elements.
pub type CMatrix = DMatrix<Cpx>;

/// Entrywise tolerance for the anti-Hermitian defect `X + X^*`.
pub const ANTI_HERMITIAN_TOL: f64 = 1e-12;
/// Entrywise tolerance for the unitarity defect `U^* U - I`.
pub const UNITARY_TOL: f64 = 1e-10;

#[derive(Debug, Error)]
pub enum LieError {
    #[error("matrix is {rows}x{cols}, expected square")]
    NonSquare { rows: usize, cols: usize },
    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },
    #[error("anti-Hermitian defect {defect:.3e} exceeds tolerance {tol:.1e}")]
    NotAntiHermitian { defect: f64, tol: f64 },
    #[error("unitarity defect {defect:.3e} exceeds tolerance {tol:.1e}")]
    NotUnitary { defect: f64, tol: f64 },
    #[error("matrix has non-finite entries")]
    NonFinite,
    #[error("basis index {index} out of range for n = {n}")]
    IndexOutOfRange { index: usize, n: usize },
    #[error("need n >= 1, got {0}")]
    EmptyDimension(usize),
}

fn max_abs_entry(m: &CMatrix) -> f64 {
    m.iter().fold(0.0f64, |acc, z| acc.max(z.norm()))
}

fn all_finite(m: &CMatrix) -> bool {
    m.iter().all(|z| z.re.is_finite() && z.im.is_finite())
}

/// An element of u(n): a square complex matrix with `X^* = -X`.
#[derive(Debug, Clone, PartialEq)]
pub struct AntiHermitian(CMatrix);

impl AntiHermitian {
    /// Validates the anti-Hermitian defect entrywise against
    /// [`ANTI_HERMITIAN_TOL`] and stores the exact skew part `(X - X^*)/2`
    /// so later algebra never drifts off the constraint surface.
    pub fn new(m: CMatrix) -> Result<Self, LieError> {
        Self::with_tolerance(m, ANTI_HERMITIAN_TOL)
    }

    /// Same as [`AntiHermitian::new`] with an explicit defect tolerance.
    pub fn with_tolerance(m: CMatrix, tol: f64) -> Result<Self, LieError> {
        if m.nrows() != m.ncols() {
            return Err(LieError::NonSquare { rows: m.nrows(), cols: m.ncols() });
        }
        if !all_finite(&m) {
            return Err(LieError::NonFinite);
        }
        let defect = max_abs_entry(&(&m + m.adjoint()));
        if defect > tol {
            return Err(LieError::NotAntiHermitian { defect, tol });
        }
        let skew = (&m - m.adjoint()) * Cpx::new(0.5, 0.0);
        Ok(Self(skew))
    }

    /// Wraps a matrix that is anti-Hermitian by construction (sums, brackets,
    /// unitary conjugates of validated elements). Debug builds still assert.
    pub(crate) fn from_skew_unchecked(m: CMatrix) -> Self {
        debug_assert!(max_abs_entry(&(&m + m.adjoint())) <= 1e-9 * (1.0 + max_abs_entry(&m)));
        Self(m)
    }

    /// The zero element of u(n).
    pub fn zeros(n: usize) -> Self {
        Self(CMatrix::zeros(n, n))
    }

    pub fn n(&self) -> usize {
        self.0.nrows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.0
    }

    pub fn into_matrix(self) -> CMatrix {
        self.0
    }

    /// Frobenius norm, equal to `sqrt(<X, X>)` for the trace-form metric.
    pub fn norm(&self) -> f64 {
        self.0.norm()
    }

    pub fn scale(&self, t: f64) -> Self {
        Self(&self.0 * Cpx::new(t, 0.0))
    }

    pub fn add(&self, other: &Self) -> Result<Self, LieError> {
        check_same_dim(self, other)?;
        Ok(Self(&self.0 + &other.0))
    }

    pub fn sub(&self, other: &Self) -> Result<Self, LieError> {
        check_same_dim(self, other)?;
        Ok(Self(&self.0 - &other.0))
    }
}

/// An element of U(n): a square complex matrix with `U^* U = I`.
#[derive(Debug, Clone, PartialEq)]
pub struct UnitaryMatrix(CMatrix);

impl UnitaryMatrix {
    /// Validates the unitarity defect entrywise against [`UNITARY_TOL`].
    pub fn new(m: CMatrix) -> Result<Self, LieError> {
        if m.nrows() != m.ncols() {
            return Err(LieError::NonSquare { rows: m.nrows(), cols: m.ncols() });
        }
        if !all_finite(&m) {
            return Err(LieError::NonFinite);
        }
        let defect = max_abs_entry(&(m.adjoint() * &m - CMatrix::identity(m.nrows(), m.ncols())));
        if defect > UNITARY_TOL {
            return Err(LieError::NotUnitary { defect, tol: UNITARY_TOL });
        }
        Ok(Self(m))
    }

    pub(crate) fn from_unitary_unchecked(m: CMatrix) -> Self {
        Self(m)
    }

    pub fn identity(n: usize) -> Self {
        Self(CMatrix::identity(n, n))
    }

    pub fn n(&self) -> usize {
        self.0.nrows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.0
    }

    /// Conjugate transpose, which is also the inverse.
    pub fn inverse(&self) -> Self {
        Self(self.0.adjoint())
    }

    /// Group product `self * other`.
    pub fn mul(&self, other: &Self) -> Result<Self, LieError> {
        if self.n() != other.n() {
            return Err(LieError::DimensionMismatch { left: self.n(), right: other.n() });
        }
        Ok(Self(&self.0 * &other.0))
    }

    /// True when every off-diagonal entry vanishes within `tol`.
    pub fn is_diagonal(&self, tol: f64) -> bool {
        let n = self.n();
        (0..n).all(|r| (0..n).all(|c| r == c || self.0[(r, c)].norm() <= tol))
    }
}

fn check_same_dim(x: &AntiHermitian, y: &AntiHermitian) -> Result<(), LieError> {
    if x.n() != y.n() {
        return Err(LieError::DimensionMismatch { left: x.n(), right: y.n() });
    }
    Ok(())
}

/// Orthonormal basis of u(n) under `<X, Y> = -Re tr(XY)`, ordered as the
/// `n` diagonal elements followed by the off-diagonal pairs `(u_jk, v_jk)`
/// in lexicographic `(j, k)` order with `j > k`.
#[derive(Debug, Clone)]
pub struct LieBasis {
    n: usize,
    elements: Vec<AntiHermitian>,
    /// Off-diagonal index pairs `(j, k)`, `j > k`, in lexicographic order.
    pairs: Vec<(usize, usize)>,
}

/// Builds the orthonormal u(n) basis described at the module level.
pub fn build_basis(n: usize) -> Result<LieBasis, LieError> {
    if n == 0 {
        return Err(LieError::EmptyDimension(0));
    }
    let mut elements = Vec::with_capacity(n * n);
    for i in 0..n {
        let mut m = CMatrix::zeros(n, n);
        m[(i, i)] = Cpx::new(0.0, 1.0);
        elements.push(AntiHermitian::from_skew_unchecked(m));
    }
    let inv_sqrt2 = 1.0 / 2.0f64.sqrt();
    let mut pairs = Vec::with_capacity(n * (n - 1) / 2);
    for j in 1..n {
        for k in 0..j {
            pairs.push((j, k));
            let mut u = CMatrix::zeros(n, n);
            u[(j, k)] = Cpx::new(0.0, inv_sqrt2);
            u[(k, j)] = Cpx::new(0.0, inv_sqrt2);
            elements.push(AntiHermitian::from_skew_unchecked(u));
            let mut v = CMatrix::zeros(n, n);
            v[(j, k)] = Cpx::new(inv_sqrt2, 0.0);
            v[(k, j)] = Cpx::new(-inv_sqrt2, 0.0);
            elements.push(AntiHermitian::from_skew_unchecked(v));
        }
    }
    Ok(LieBasis { n, elements, pairs })
}

impl LieBasis {
    pub fn n(&self) -> usize {
        self.n
    }

    /// Dimension of u(n), i.e. `n^2`.
    pub fn dim(&self) -> usize {
        self.elements.len()
    }

    pub fn elements(&self) -> &[AntiHermitian] {
        &self.elements
    }

    pub fn element(&self, idx: usize) -> Result<&AntiHermitian, LieError> {
        self.elements.get(idx).ok_or(LieError::IndexOutOfRange { index: idx, n: self.n })
    }

    /// Diagonal element `e_i = i E_ii`.
    pub fn diag(&self, i: usize) -> Result<&AntiHermitian, LieError> {
        if i >= self.n {
            return Err(LieError::IndexOutOfRange { index: i, n: self.n });
        }
        Ok(&self.elements[i])
    }

    /// Position of the pair `(j, k)`, `j > k`, in the lexicographic pair list.
    pub fn pair_index(&self, j: usize, k: usize) -> Result<usize, LieError> {
        if !(k < j && j < self.n) {
            return Err(LieError::IndexOutOfRange { index: j.max(k), n: self.n });
        }
        Ok(j * (j - 1) / 2 + k)
    }

    /// Symmetric off-diagonal element `u_jk`.
    pub fn sym(&self, j: usize, k: usize) -> Result<&AntiHermitian, LieError> {
        let p = self.pair_index(j, k)?;
        Ok(&self.elements[self.n + 2 * p])
    }

    /// Antisymmetric off-diagonal element `v_jk`.
    pub fn antisym(&self, j: usize, k: usize) -> Result<&AntiHermitian, LieError> {
        let p = self.pair_index(j, k)?;
        Ok(&self.elements[self.n + 2 * p + 1])
    }

    /// Off-diagonal index pairs `(j, k)`, `j > k`, in frame order.
    pub fn pairs(&self) -> &[(usize, usize)] {
        &self.pairs
    }
}

/// Trace-form inner product `<X, Y> = -Re tr(XY)`, positive definite on u(n).
pub fn inner_product(x: &AntiHermitian, y: &AntiHermitian) -> Result<f64, LieError> {
    check_same_dim(x, y)?;
    let mut tr = Cpx::new(0.0, 0.0);
    let n = x.n();
    // tr(XY) without forming the product matrix.
    for r in 0..n {
        for c in 0..n {
            tr += x.matrix()[(r, c)] * y.matrix()[(c, r)];
        }
    }
    Ok(-tr.re)
}

/// Matrix commutator `[X, Y] = XY - YX`, closed on u(n).
pub fn bracket(x: &AntiHermitian, y: &AntiHermitian) -> Result<AntiHermitian, LieError> {
    check_same_dim(x, y)?;
    let xy = x.matrix() * y.matrix();
    let yx = y.matrix() * x.matrix();
    Ok(AntiHermitian::from_skew_unchecked(xy - yx))
}

/// Exponential `exp(X)` for anti-Hermitian `X`, computed from the
/// eigendecomposition of the Hermitian matrix `-iX`; the result is unitary
/// to machine precision for any input scale.
pub fn matrix_exp(x: &AntiHermitian) -> UnitaryMatrix {
    let n = x.n();
    let h = x.matrix() * Cpx::new(0.0, -1.0);
    let eig = nalgebra::SymmetricEigen::new(h);
    let phases = DVector::from_iterator(
        n,
        eig.eigenvalues.iter().map(|&lam| Cpx::new(lam.cos(), lam.sin())),
    );
    let exp = &eig.eigenvectors * CMatrix::from_diagonal(&phases) * eig.eigenvectors.adjoint();
    UnitaryMatrix::from_unitary_unchecked(exp)
}

/// Adjoint action `Ad_A X = A X A^{-1}` (with `A^{-1} = A^*`).
pub fn adjoint(a: &UnitaryMatrix, x: &AntiHermitian) -> Result<AntiHermitian, LieError> {
    if a.n() != x.n() {
        return Err(LieError::DimensionMismatch { left: a.n(), right: x.n() });
    }
    Ok(AntiHermitian::from_skew_unchecked(a.matrix() * x.matrix() * a.matrix().adjoint()))
}

/// Orthogonal projection onto the diagonal torus subalgebra:
/// `X -> sum_i <X, e_i> e_i`.
pub fn project_to_torus(x: &AntiHermitian, basis: &LieBasis) -> Result<AntiHermitian, LieError> {
    if x.n() != basis.n() {
        return Err(LieError::DimensionMismatch { left: x.n(), right: basis.n() });
    }
    let mut out = CMatrix::zeros(x.n(), x.n());
    for i in 0..basis.n() {
        let e = basis.diag(i)?;
        let c = inner_product(x, e)?;
        out += e.matrix() * Cpx::new(c, 0.0);
    }
    Ok(AntiHermitian::from_skew_unchecked(out))
}

/// Draws a Haar-distributed unitary: QR of a complex Ginibre matrix with the
/// R-diagonal phase correction that makes the factorization unique, so the
/// distribution is invariant under left and right group translation.
pub fn haar_sample<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Result<UnitaryMatrix, LieError> {
    if n == 0 {
        return Err(LieError::EmptyDimension(0));
    }
    let inv_sqrt2 = 1.0 / 2.0f64.sqrt();
    let g = CMatrix::from_fn(n, n, |_, _| {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        Cpx::new(re * inv_sqrt2, im * inv_sqrt2)
    });
    let qr = g.qr();
    let r = qr.r();
    let q = qr.q();
    let phases = DVector::from_iterator(
        n,
        (0..n).map(|i| {
            let d = r[(i, i)];
            let m = d.norm();
            if m == 0.0 { Cpx::new(1.0, 0.0) } else { d / m }
        }),
    );
    Ok(UnitaryMatrix::from_unitary_unchecked(q * CMatrix::from_diagonal(&phases)))
}

/// A point of the dual torus written in the basis `{e_i}`: the diagonal
/// element `sum_i a_i e_i = diag(i a_0, ..., i a_{n-1})`.
#[derive(Debug, Clone, PartialEq)]
pub struct TorusWeight {
    coefficients: Vec<f64>,
}

impl TorusWeight {
    pub fn new(coefficients: Vec<f64>) -> Result<Self, LieError> {
        if coefficients.is_empty() {
            return Err(LieError::EmptyDimension(0));
        }
        if coefficients.iter().any(|c| !c.is_finite()) {
            return Err(LieError::NonFinite);
        }
        Ok(Self { coefficients })
    }

    pub fn n(&self) -> usize {
        self.coefficients.len()
    }

    pub fn coefficients(&self) -> &[f64] {
        &self.coefficients
    }

    /// The diagonal matrix `diag(i a_0, ..., i a_{n-1})` in u(n).
    pub fn realize(&self) -> AntiHermitian {
        let n = self.n();
        let mut m = CMatrix::zeros(n, n);
        for (i, &a) in self.coefficients.iter().enumerate() {
            m[(i, i)] = Cpx::new(0.0, a);
        }
        AntiHermitian::from_skew_unchecked(m)
    }

    /// True when all coordinate differences `a_j - a_k` are nonzero, i.e. the
    /// realized element is a regular point of the torus.
    pub fn is_regular(&self) -> bool {
        let a = &self.coefficients;
        (0..a.len()).all(|j| (0..j).all(|k| a[j] != a[k]))
    }
}

/// Random anti-Hermitian matrix with Gaussian entries: the skew part of a
/// complex Ginibre sample. Used by sweeps and tests.
pub fn random_anti_hermitian<R: Rng + ?Sized>(n: usize, rng: &mut R) -> AntiHermitian {
    let g = CMatrix::from_fn(n, n, |_, _| {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        Cpx::new(re, im)
    });
    let skew = (&g - g.adjoint()) * Cpx::new(0.5, 0.0);
    AntiHermitian::from_skew_unchecked(skew)
}

/// Random off-diagonal (coset-horizontal) direction: a random combination of
/// the `u_jk`, `v_jk` basis elements.
pub fn random_horizontal<R: Rng + ?Sized>(
    basis: &LieBasis,
    rng: &mut R,
) -> AntiHermitian {
    let n = basis.n();
    let mut out = CMatrix::zeros(n, n);
    for idx in n..basis.dim() {
        let c: f64 = rng.sample(StandardNormal);
        out += basis.elements()[idx].matrix() * Cpx::new(c, 0.0);
    }
    AntiHermitian::from_skew_unchecked(out)
}

/// Random torus weight with coordinates drawn from the standard normal.
pub fn random_torus_weight<R: Rng + ?Sized>(n: usize, rng: &mut R) -> TorusWeight {
    TorusWeight::new((0..n).map(|_| rng.sample(StandardNormal)).collect())
        .expect("normal samples are finite")
}
