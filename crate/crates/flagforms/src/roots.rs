//! Root-space decomposition of u(n) for a diagonal torus element.
//!
//! A diagonal `Y = diag(i y_0, ..., i y_{n-1})` acts on the complexified
//! algebra by `ad_Y E_jk = alpha_jk(Y) E_jk` with root value
//! `alpha_jk(Y) = i(y_j - y_k)`, and on the group side the adjoint action of
//! `exp(Y)` scales each root direction by `exp(alpha_jk(Y))`. This module
//! exposes the root data, the `Ad_A - id` operator those scalings diagonalize,
//! and a numeric rank used to certify frame independence downstream.

use nalgebra::DMatrix;
use thiserror::Error;

use crate::lie::{
    adjoint, matrix_exp, AntiHermitian, CMatrix, Cpx, LieBasis, LieError, UnitaryMatrix,
};

/// Relative singular-value threshold for the numeric rank.
pub const RANK_TOL: f64 = 1e-8;
/// Entrywise tolerance for accepting a torus point as diagonal.
pub const DIAGONAL_TOL: f64 = 1e-12;

#[derive(Debug, Error)]
pub enum RootsError {
    #[error("torus point must be diagonal; off-diagonal magnitude {0:.3e}")]
    NonDiagonal(f64),
    #[error("vector list is empty")]
    EmptyList,
    #[error("tuple {index} has {got} slots, expected {expected}")]
    RaggedTuple { index: usize, got: usize, expected: usize },
    #[error(transparent)]
    Lie(#[from] LieError),
}

/// One root of the torus action: the ordered pair `(j, k)`, `j != k`, with
/// value `alpha_jk(Y) = i(y_j - y_k)` and complexified direction `E_jk`.
#[derive(Debug, Clone)]
pub struct Root {
    pub j: usize,
    pub k: usize,
    /// `alpha_jk(Y)`, purely imaginary.
    pub value: Cpx,
    /// The elementary matrix `E_jk`, the root direction in gl(n, C).
    pub vector: CMatrix,
}

/// Root data of a diagonal torus element: all `n(n-1)` ordered pairs in
/// lexicographic `(j, k)` order.
#[derive(Debug, Clone)]
pub struct RootDatum {
    torus_point: AntiHermitian,
    roots: Vec<Root>,
}

impl RootDatum {
    pub fn torus_point(&self) -> &AntiHermitian {
        &self.torus_point
    }

    pub fn roots(&self) -> &[Root] {
        &self.roots
    }

    /// The root for the ordered pair `(j, k)`.
    pub fn root(&self, j: usize, k: usize) -> Option<&Root> {
        self.roots.iter().find(|r| r.j == j && r.k == k)
    }
}

/// Imaginary parts of the diagonal of a (validated-diagonal) torus element.
fn diagonal_coordinates(y: &AntiHermitian) -> Result<Vec<f64>, RootsError> {
    let n = y.n();
    let mut off = 0.0f64;
    for r in 0..n {
        for c in 0..n {
            if r != c {
                off = off.max(y.matrix()[(r, c)].norm());
            }
        }
    }
    if off > DIAGONAL_TOL {
        return Err(RootsError::NonDiagonal(off));
    }
    Ok((0..n).map(|i| y.matrix()[(i, i)].im).collect())
}

/// Builds the root data of the diagonal element `Y` with respect to the
/// standard basis: values `i(y_j - y_k)` and directions `E_jk`.
pub fn root_data(y: &AntiHermitian, basis: &LieBasis) -> Result<RootDatum, RootsError> {
    if y.n() != basis.n() {
        return Err(LieError::DimensionMismatch { left: y.n(), right: basis.n() }.into());
    }
    let coords = diagonal_coordinates(y)?;
    let n = y.n();
    let mut roots = Vec::with_capacity(n * (n - 1));
    for j in 0..n {
        for k in 0..n {
            if j == k {
                continue;
            }
            let mut vector = CMatrix::zeros(n, n);
            vector[(j, k)] = Cpx::new(1.0, 0.0);
            roots.push(Root { j, k, value: Cpx::new(0.0, coords[j] - coords[k]), vector });
        }
    }
    Ok(RootDatum { torus_point: y.clone(), roots })
}

/// The operator `X -> Ad_A X - X`. On a root direction for `A = exp(Y)` it
/// scales the complexified component by `exp(alpha(Y)) - 1`.
pub fn ad_minus_id_apply(a: &UnitaryMatrix, x: &AntiHermitian) -> Result<AntiHermitian, RootsError> {
    let conj = adjoint(a, x)?;
    Ok(conj.sub(x)?)
}

/// Defect of the group-side root scaling law at `Y` for the pair `(j, k)`:
/// `|| Ad_{exp Y} E_jk - exp(alpha_jk(Y)) E_jk ||`, assembled from the
/// real operator [`ad_minus_id_apply`] acting on the realified directions
/// `u_jk`, `v_jk` via `E_jk = (v_jk - i u_jk)/sqrt 2`.
pub fn root_scaling_defect(
    y: &AntiHermitian,
    j: usize,
    k: usize,
    basis: &LieBasis,
) -> Result<f64, RootsError> {
    let coords = diagonal_coordinates(y)?;
    let (hi, lo) = if j > k { (j, k) } else { (k, j) };
    let u = basis.sym(hi, lo)?;
    let v = basis.antisym(hi, lo)?;
    let a = matrix_exp(y);
    let fu = ad_minus_id_apply(&a, u)?;
    let fv = ad_minus_id_apply(&a, v)?;
    // Complexification of the realified pair: E_{hi,lo} = (v - i u)/sqrt2
    // for the lower direction, E_{lo,hi} = -(v + i u)/sqrt2 for the upper.
    let scale = Cpx::new(1.0 / 2.0f64.sqrt(), 0.0);
    let f_complex = if j > k {
        (fv.matrix() - fu.matrix() * Cpx::new(0.0, 1.0)) * scale
    } else {
        (fv.matrix() + fu.matrix() * Cpx::new(0.0, 1.0)) * (-scale)
    };
    let alpha = Cpx::new(0.0, coords[j] - coords[k]);
    let mut e = CMatrix::zeros(basis.n(), basis.n());
    e[(j, k)] = Cpx::new(1.0, 0.0);
    let expect = &e * (alpha.exp() - Cpx::new(1.0, 0.0));
    let defect = (f_complex - expect).norm();
    Ok(defect)
}

/// Numeric rank of a list of tuples of algebra elements under the product
/// inner product: the count of singular values above `RANK_TOL` relative to
/// the largest. Tuples are flattened entrywise; all must share the same
/// shape.
pub fn independence_rank(vectors: &[Vec<AntiHermitian>]) -> Result<usize, RootsError> {
    if vectors.is_empty() {
        return Err(RootsError::EmptyList);
    }
    let slots = vectors[0].len();
    if slots == 0 {
        return Err(RootsError::EmptyList);
    }
    let n = vectors[0][0].n();
    for (idx, tuple) in vectors.iter().enumerate() {
        if tuple.len() != slots {
            return Err(RootsError::RaggedTuple { index: idx, got: tuple.len(), expected: slots });
        }
        for m in tuple {
            if m.n() != n {
                return Err(LieError::DimensionMismatch { left: m.n(), right: n }.into());
            }
        }
    }
    let cols = slots * 2 * n * n;
    let mut data = DMatrix::<f64>::zeros(vectors.len(), cols);
    for (row, tuple) in vectors.iter().enumerate() {
        let mut c = 0;
        for m in tuple {
            for z in m.matrix().iter() {
                data[(row, c)] = z.re;
                data[(row, c + 1)] = z.im;
                c += 2;
            }
        }
    }
    let svs = data.singular_values();
    let top = svs.iter().cloned().fold(0.0f64, f64::max);
    if top == 0.0 {
        return Ok(0);
    }
    Ok(svs.iter().filter(|&&s| s > RANK_TOL * top).count())
}

/// Independence rank of single algebra elements (1-slot tuples).
pub fn independence_rank_flat(vectors: &[AntiHermitian]) -> Result<usize, RootsError> {
    let tuples: Vec<Vec<AntiHermitian>> = vectors.iter().map(|v| vec![v.clone()]).collect();
    independence_rank(&tuples)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lie::{build_basis, random_anti_hermitian, TorusWeight};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn diag_weight(coords: &[f64]) -> AntiHermitian {
        TorusWeight::new(coords.to_vec()).unwrap().realize()
    }

    #[test]
    fn zero_torus_point_has_all_zero_roots() {
        let b = build_basis(3).unwrap();
        let d = root_data(&AntiHermitian::zeros(3), &b).unwrap();
        assert_eq!(d.roots().len(), 6);
        assert!(d.roots().iter().all(|r| r.value.norm() == 0.0));
    }

    // Hand oracle: Y = diag(i pi/2, -i pi/2) gives alpha_01(Y) = i pi, and
    // [Y, E_01] = i pi E_01.
    #[test]
    fn two_by_two_root_value_matches_commutator() {
        let b = build_basis(2).unwrap();
        let y = diag_weight(&[std::f64::consts::FRAC_PI_2, -std::f64::consts::FRAC_PI_2]);
        let d = root_data(&y, &b).unwrap();
        let r = d.root(0, 1).unwrap();
        assert!((r.value - Cpx::new(0.0, std::f64::consts::PI)).norm() < 1e-15);
        let comm = y.matrix() * &r.vector - &r.vector * y.matrix();
        assert!((comm - &r.vector * r.value).norm() < 1e-15);
    }

    // Derived oracle: Y = diag(i, 2i, 4i) has the six root values
    // i * {-1, 1, -3, 3, -2, 2}, all distinct and nonzero.
    #[test]
    fn three_by_three_roots_are_the_pairwise_differences() {
        let b = build_basis(3).unwrap();
        let d = root_data(&diag_weight(&[1.0, 2.0, 4.0]), &b).unwrap();
        let mut values: Vec<f64> = d.roots().iter().map(|r| r.value.im).collect();
        values.sort_by(f64::total_cmp);
        assert_eq!(values, vec![-3.0, -2.0, -1.0, 1.0, 2.0, 3.0]);
    }

    // ad_Y scales every root vector by its root value (eigenvector check
    // straight from the commutator, for all pairs and several Y).
    #[test]
    fn root_vectors_are_ad_eigenvectors() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        for n in [2usize, 3, 4] {
            let b = build_basis(n).unwrap();
            for _ in 0..10 {
                let coords: Vec<f64> = (0..n).map(|_| rng.gen_range(-3.0..3.0)).collect();
                let y = diag_weight(&coords);
                let d = root_data(&y, &b).unwrap();
                for r in d.roots() {
                    let comm = y.matrix() * &r.vector - &r.vector * y.matrix();
                    assert!((comm - &r.vector * r.value).norm() < 1e-10);
                }
            }
        }
    }

    #[test]
    fn opposite_pairs_have_negated_values() {
        let b = build_basis(4).unwrap();
        let y = diag_weight(&[0.3, -1.2, 2.0, 0.9]);
        let d = root_data(&y, &b).unwrap();
        for r in d.roots() {
            let opp = d.root(r.k, r.j).unwrap();
            assert!((r.value + opp.value).norm() < 1e-15);
        }
    }

    // Hand oracle: A = diag(i, -i) has Ad_A E_01 = -E_01, so the operator
    // multiplies the (0,1) root component by exp(i pi) - 1 = -2.
    #[test]
    fn ad_minus_id_scales_root_component_by_exp_alpha_minus_one() {
        let b = build_basis(2).unwrap();
        let y = diag_weight(&[std::f64::consts::FRAC_PI_2, -std::f64::consts::FRAC_PI_2]);
        let a = matrix_exp(&y);
        // Assemble f(E_10) from the realified images.
        let fu = ad_minus_id_apply(&a, b.sym(1, 0).unwrap()).unwrap();
        let fv = ad_minus_id_apply(&a, b.antisym(1, 0).unwrap()).unwrap();
        let f_complex =
            (fv.matrix() - fu.matrix() * Cpx::new(0.0, 1.0)) * Cpx::new(1.0 / 2.0f64.sqrt(), 0.0);
        let mut e10 = CMatrix::zeros(2, 2);
        e10[(1, 0)] = Cpx::new(1.0, 0.0);
        // alpha_10(Y) = i(y_1 - y_0) = -i pi, exp(-i pi) - 1 = -2.
        assert!((f_complex - e10 * Cpx::new(-2.0, 0.0)).norm() < 1e-13);
    }

    #[test]
    fn ad_minus_id_vanishes_on_commuting_diagonals() {
        let b = build_basis(3).unwrap();
        let y = diag_weight(&[0.4, -0.7, 1.9]);
        let a = matrix_exp(&diag_weight(&[2.0, 0.5, -1.0]));
        let f = ad_minus_id_apply(&a, &y).unwrap();
        assert!(f.norm() < 1e-14);
        let _ = b;
    }

    // Group-side scaling law across dimensions and random diagonals.
    #[test]
    fn root_scaling_defect_is_tiny_for_all_pairs() {
        let mut rng = ChaCha8Rng::seed_from_u64(22);
        for n in [2usize, 3, 4] {
            let b = build_basis(n).unwrap();
            for _ in 0..25 {
                let coords: Vec<f64> = (0..n).map(|_| rng.gen_range(-3.0..3.0)).collect();
                let y = diag_weight(&coords);
                for j in 0..n {
                    for k in 0..n {
                        if j != k {
                            let d = root_scaling_defect(&y, j, k, &b).unwrap();
                            assert!(d < 1e-9, "n={n} ({j},{k}) defect={d:e}");
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn realified_root_directions_have_full_offdiagonal_rank() {
        let b = build_basis(3).unwrap();
        let offdiag: Vec<AntiHermitian> = b.elements()[3..].to_vec();
        assert_eq!(independence_rank_flat(&offdiag).unwrap(), 6);
    }

    #[test]
    fn rank_handles_degenerate_lists() {
        let b = build_basis(2).unwrap();
        assert!(matches!(independence_rank(&[]), Err(RootsError::EmptyList)));
        let zeros = vec![vec![AntiHermitian::zeros(2)], vec![AntiHermitian::zeros(2)]];
        assert_eq!(independence_rank(&zeros).unwrap(), 0);
        let dup = vec![
            vec![b.diag(0).unwrap().clone()],
            vec![b.diag(0).unwrap().clone()],
            vec![b.diag(1).unwrap().clone()],
        ];
        assert_eq!(independence_rank(&dup).unwrap(), 2);
    }

    #[test]
    fn rank_is_invariant_under_permutation_and_rescaling() {
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        let vecs: Vec<Vec<AntiHermitian>> = (0..4)
            .map(|_| vec![random_anti_hermitian(3, &mut rng), random_anti_hermitian(3, &mut rng)])
            .collect();
        let r0 = independence_rank(&vecs).unwrap();
        let mut permuted = vecs.clone();
        permuted.swap(0, 3);
        permuted.swap(1, 2);
        assert_eq!(independence_rank(&permuted).unwrap(), r0);
        let scaled: Vec<Vec<AntiHermitian>> = vecs
            .iter()
            .enumerate()
            .map(|(i, t)| t.iter().map(|m| m.scale(1.0 + i as f64 * 10.0)).collect())
            .collect();
        assert_eq!(independence_rank(&scaled).unwrap(), r0);
    }

    // The conjugation-action images {Ad_{A^{-1}} e_i - e_i} always annihilate
    // the central direction sum_i e_i = iI, so their rank is n - 1 at a
    // generic non-diagonal tuple (not n: the central column is a fixed linear
    // relation). Verified against the singular-value oracle.
    #[test]
    fn conjugation_frame_rank_is_n_minus_one_generically() {
        let mut rng = ChaCha8Rng::seed_from_u64(24);
        for n in [2usize, 3] {
            let b = build_basis(n).unwrap();
            let a = crate::lie::haar_sample(n, &mut rng).unwrap();
            let bm = crate::lie::haar_sample(n, &mut rng).unwrap();
            let frame: Vec<Vec<AntiHermitian>> = (0..n)
                .map(|i| {
                    let e = b.diag(i).unwrap();
                    vec![
                        ad_minus_id_apply(&a.inverse(), e).unwrap(),
                        ad_minus_id_apply(&bm.inverse(), e).unwrap(),
                    ]
                })
                .collect();
            // The sum over i is exactly zero: the center is Ad-invariant.
            let mut total0 = frame[0][0].clone();
            let mut total1 = frame[0][1].clone();
            for t in &frame[1..] {
                total0 = total0.add(&t[0]).unwrap();
                total1 = total1.add(&t[1]).unwrap();
            }
            assert!(total0.norm() < 1e-13 && total1.norm() < 1e-13);
            assert_eq!(independence_rank(&frame).unwrap(), n - 1);
        }
    }
}
