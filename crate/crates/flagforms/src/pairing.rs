//! Exact intersection pairings of the torus two-forms on the flag manifold.
//!
//! The closed forms `dθ_1, ..., dθ_n` generate the cohomology of U(n)/T, and
//! every top-degree monomial integrates against the fundamental class to a
//! rational multiple of a single normalization constant `C₁`:
//!
//! ```text
//! ∫ dθ_1^{α_1} ⋯ dθ_n^{α_n}  =  (C₁ / N!) · ∂^α ∏_{j>k} (a_k − a_j),
//! ```
//!
//! where `N = n(n−1)/2` is half the real dimension of the flag manifold and
//! `∂^α = ∂^{α_1}_{a_1} ⋯ ∂^{α_n}_{a_n}`. This module carries the right-hand
//! side exactly: multivariate polynomials with arbitrary-precision rational
//! coefficients, the Vandermonde-type product, iterated derivatives, and a
//! brute-force exterior-algebra expansion of `(Σ a_i dθ_i)^N` over the
//! standard frame that certifies the formula combinatorially. Floating point
//! enters only when an exact rational is finally scaled by `C₁`.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};
use thiserror::Error;

use crate::lie::TorusWeight;

#[derive(Debug, Error)]
pub enum PairingError {
    #[error("rank {got} is below the minimum {minimum} for this operation")]
    RankTooSmall { minimum: usize, got: usize },
    #[error("multi-index has {got} entries but the rank is {expected}")]
    IndexLength { expected: usize, got: usize },
    #[error("multi-index weight {got} differs from the top degree {expected}")]
    DegreeMismatch { expected: usize, got: usize },
    #[error("variable counts {left} and {right} do not match")]
    VariableMismatch { left: usize, right: usize },
    #[error("variable index {index} is out of range for {vars} variables")]
    IndexOutOfRange { index: usize, vars: usize },
    #[error("weight coefficients {j} and {k} coincide; the normalizing product vanishes")]
    NonRegularWeight { j: usize, k: usize },
    #[error("sequence is not a permutation of the variable indices")]
    NotAPermutation,
    #[error("value is not finite")]
    NonFinite,
}

/// Multivariate polynomial with exact rational coefficients, keyed by
/// exponent vectors. Zero coefficients are never stored, so equality of the
/// term maps is equality of polynomials.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PairingPolynomial {
    vars: usize,
    terms: BTreeMap<Vec<u32>, BigRational>,
}

impl PairingPolynomial {
    pub fn zero(vars: usize) -> Self {
        Self { vars, terms: BTreeMap::new() }
    }

    pub fn constant(vars: usize, value: BigRational) -> Self {
        let mut p = Self::zero(vars);
        p.add_term(vec![0; vars], value);
        p
    }

    /// The single-term polynomial `coeff · a^expo`.
    pub fn monomial(
        vars: usize,
        expo: Vec<u32>,
        coeff: BigRational,
    ) -> Result<Self, PairingError> {
        if expo.len() != vars {
            return Err(PairingError::VariableMismatch { left: vars, right: expo.len() });
        }
        let mut p = Self::zero(vars);
        p.add_term(expo, coeff);
        Ok(p)
    }

    /// The coordinate polynomial `a_index`.
    pub fn variable(vars: usize, index: usize) -> Result<Self, PairingError> {
        if index >= vars {
            return Err(PairingError::IndexOutOfRange { index, vars });
        }
        let mut expo = vec![0; vars];
        expo[index] = 1;
        Self::monomial(vars, expo, BigRational::from_integer(BigInt::from(1)))
    }

    pub fn vars(&self) -> usize {
        self.vars
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    /// Iterates over `(exponent vector, coefficient)` pairs in frozen
    /// lexicographic key order.
    pub fn terms(&self) -> impl Iterator<Item = (&[u32], &BigRational)> {
        self.terms.iter().map(|(e, c)| (e.as_slice(), c))
    }

    /// Coefficient of `a^expo`, zero when the monomial is absent.
    pub fn coefficient(&self, expo: &[u32]) -> BigRational {
        self.terms.get(expo).cloned().unwrap_or_else(BigRational::zero)
    }

    /// Total degree: the largest exponent-vector weight, 0 for the zero
    /// polynomial.
    pub fn degree(&self) -> usize {
        self.terms
            .keys()
            .map(|e| e.iter().map(|&x| x as usize).sum())
            .max()
            .unwrap_or(0)
    }

    /// `Some(c)` when the polynomial is the constant `c` (including zero).
    pub fn as_constant(&self) -> Option<BigRational> {
        if self.terms.is_empty() {
            return Some(BigRational::zero());
        }
        if self.terms.len() == 1 {
            let (expo, coeff) = self.terms.iter().next().expect("one term");
            if expo.iter().all(|&x| x == 0) {
                return Some(coeff.clone());
            }
        }
        None
    }

    fn add_term(&mut self, expo: Vec<u32>, coeff: BigRational) {
        debug_assert_eq!(expo.len(), self.vars);
        if coeff.is_zero() {
            return;
        }
        let entry = self.terms.entry(expo);
        match entry {
            std::collections::btree_map::Entry::Vacant(v) => {
                v.insert(coeff);
            }
            std::collections::btree_map::Entry::Occupied(mut o) => {
                let sum = o.get() + coeff;
                if sum.is_zero() {
                    o.remove();
                } else {
                    *o.get_mut() = sum;
                }
            }
        }
    }

    fn check_vars(&self, other: &Self) -> Result<(), PairingError> {
        if self.vars != other.vars {
            return Err(PairingError::VariableMismatch { left: self.vars, right: other.vars });
        }
        Ok(())
    }

    pub fn add(&self, other: &Self) -> Result<Self, PairingError> {
        self.check_vars(other)?;
        let mut out = self.clone();
        for (expo, coeff) in &other.terms {
            out.add_term(expo.clone(), coeff.clone());
        }
        Ok(out)
    }

    pub fn sub(&self, other: &Self) -> Result<Self, PairingError> {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> Self {
        self.scale(&BigRational::from_integer(BigInt::from(-1)))
    }

    pub fn scale(&self, factor: &BigRational) -> Self {
        if factor.is_zero() {
            return Self::zero(self.vars);
        }
        let terms = self.terms.iter().map(|(e, c)| (e.clone(), c * factor)).collect();
        Self { vars: self.vars, terms }
    }

    pub fn mul(&self, other: &Self) -> Result<Self, PairingError> {
        self.check_vars(other)?;
        let mut out = Self::zero(self.vars);
        for (ea, ca) in &self.terms {
            for (eb, cb) in &other.terms {
                let expo = ea.iter().zip(eb).map(|(x, y)| x + y).collect();
                out.add_term(expo, ca * cb);
            }
        }
        Ok(out)
    }

    /// Exact partial derivative in the variable `index`.
    pub fn derivative(&self, index: usize) -> Result<Self, PairingError> {
        if index >= self.vars {
            return Err(PairingError::IndexOutOfRange { index, vars: self.vars });
        }
        let mut out = Self::zero(self.vars);
        for (expo, coeff) in &self.terms {
            let k = expo[index];
            if k == 0 {
                continue;
            }
            let mut e = expo.clone();
            e[index] = k - 1;
            out.add_term(e, coeff * BigRational::from_integer(BigInt::from(k)));
        }
        Ok(out)
    }

    /// Exact evaluation at a rational point.
    pub fn eval(&self, point: &[BigRational]) -> Result<BigRational, PairingError> {
        if point.len() != self.vars {
            return Err(PairingError::VariableMismatch { left: self.vars, right: point.len() });
        }
        let mut total = BigRational::zero();
        for (expo, coeff) in &self.terms {
            let mut term = coeff.clone();
            for (x, &k) in point.iter().zip(expo) {
                for _ in 0..k {
                    term *= x;
                }
            }
            total += term;
        }
        Ok(total)
    }

    /// Floating-point evaluation, for comparisons against numeric geometry.
    pub fn eval_f64(&self, point: &[f64]) -> Result<f64, PairingError> {
        if point.len() != self.vars {
            return Err(PairingError::VariableMismatch { left: self.vars, right: point.len() });
        }
        let mut total = 0.0;
        for (expo, coeff) in &self.terms {
            let mut term = coeff.to_f64().unwrap_or(f64::NAN);
            for (x, &k) in point.iter().zip(expo) {
                term *= x.powi(k as i32);
            }
            total += term;
        }
        Ok(total)
    }

    /// Relabels variables, sending variable `i` to variable `perm[i]`.
    pub fn permute_variables(&self, perm: &[usize]) -> Result<Self, PairingError> {
        if perm.len() != self.vars {
            return Err(PairingError::VariableMismatch { left: self.vars, right: perm.len() });
        }
        let mut seen = vec![false; self.vars];
        for &p in perm {
            if p >= self.vars || seen[p] {
                return Err(PairingError::NotAPermutation);
            }
            seen[p] = true;
        }
        let mut out = Self::zero(self.vars);
        for (expo, coeff) in &self.terms {
            let mut e = vec![0; self.vars];
            for (i, &x) in expo.iter().enumerate() {
                e[perm[i]] = x;
            }
            out.add_term(e, coeff.clone());
        }
        Ok(out)
    }
}

/// Exponent vector `(α_1, ..., α_n)` of a monomial `dθ_1^{α_1} ⋯ dθ_n^{α_n}`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MultiIndex {
    entries: Vec<u32>,
}

impl MultiIndex {
    pub fn new(entries: Vec<u32>) -> Self {
        Self { entries }
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn entries(&self) -> &[u32] {
        &self.entries
    }

    /// Total weight `|α| = Σ α_i`.
    pub fn weight(&self) -> usize {
        self.entries.iter().map(|&x| x as usize).sum()
    }

    /// `∏ α_i!` — the multinomial denominator attached to this index.
    pub fn factorial_product(&self) -> BigInt {
        self.entries.iter().map(|&x| factorial(x as usize)).product()
    }

    /// Every multi-index with `vars` entries and total weight `weight`, in
    /// lexicographic order.
    pub fn all_of_weight(vars: usize, weight: usize) -> Vec<MultiIndex> {
        fn rec(vars: usize, weight: usize, prefix: &mut Vec<u32>, out: &mut Vec<MultiIndex>) {
            if vars == 1 {
                prefix.push(weight as u32);
                out.push(MultiIndex::new(prefix.clone()));
                prefix.pop();
                return;
            }
            for head in (0..=weight).rev() {
                prefix.push(head as u32);
                rec(vars - 1, weight - head, prefix, out);
                prefix.pop();
            }
        }
        if vars == 0 {
            return Vec::new();
        }
        let mut out = Vec::new();
        rec(vars, weight, &mut Vec::new(), &mut out);
        out
    }
}

/// `k!` as an exact big integer.
pub fn factorial(k: usize) -> BigInt {
    (1..=k).fold(BigInt::from(1), |acc, i| acc * BigInt::from(i))
}

/// Half the real dimension of U(n)/T: the number of positive roots
/// `N = n(n−1)/2`, which is also the top form degree divided by two.
pub fn top_degree(n: usize) -> usize {
    n * (n - 1) / 2
}

/// The Vandermonde-type product `∏_{j>k} (a_k − a_j)` expanded exactly.
///
/// Indices run over `0 ≤ k < j ≤ n−1`; the empty product for `n = 1` is the
/// constant 1. The expansion is antisymmetric under any swap of variables.
pub fn vandermonde_product(n: usize) -> Result<PairingPolynomial, PairingError> {
    if n < 1 {
        return Err(PairingError::RankTooSmall { minimum: 1, got: n });
    }
    let one = BigRational::from_integer(BigInt::from(1));
    let mut product = PairingPolynomial::constant(n, one);
    for j in 1..n {
        for k in 0..j {
            let factor = PairingPolynomial::variable(n, k)?.sub(&PairingPolynomial::variable(n, j)?)?;
            product = product.mul(&factor)?;
        }
    }
    Ok(product)
}

/// Iterated exact derivative `∂^{α_1}_{a_1} ⋯ ∂^{α_n}_{a_n} p`.
pub fn derive_multi(
    p: &PairingPolynomial,
    alpha: &MultiIndex,
) -> Result<PairingPolynomial, PairingError> {
    if alpha.len() != p.vars() {
        return Err(PairingError::IndexLength { expected: p.vars(), got: alpha.len() });
    }
    let mut out = p.clone();
    for (index, &order) in alpha.entries().iter().enumerate() {
        for _ in 0..order {
            out = out.derivative(index)?;
        }
    }
    Ok(out)
}

/// How the normalization constant `C₁` was obtained.
#[derive(Debug, Clone)]
pub enum Provenance {
    UserSupplied,
    OrbitVolume { weights: Vec<f64>, volume: f64 },
}

/// The single analytic constant scaling all exact intersection numbers.
///
/// User-supplied values keep an exact rational image of the float, so the
/// default `C₁ = 1` pipeline stays exact end to end; volume-derived values
/// are honest floating point.
#[derive(Debug, Clone)]
pub struct NormalizationConstant {
    value: f64,
    exact: Option<BigRational>,
    provenance: Provenance,
}

impl NormalizationConstant {
    /// The default `C₁ = 1`: pairings reported up to global normalization.
    pub fn unit() -> Self {
        Self::user_supplied(1.0).expect("1.0 is finite")
    }

    pub fn user_supplied(value: f64) -> Result<Self, PairingError> {
        if !value.is_finite() {
            return Err(PairingError::NonFinite);
        }
        Ok(Self {
            value,
            exact: BigRational::from_float(value),
            provenance: Provenance::UserSupplied,
        })
    }

    pub fn value(&self) -> f64 {
        self.value
    }

    /// Exact rational value when one exists (always for user-supplied).
    pub fn exact(&self) -> Option<&BigRational> {
        self.exact.as_ref()
    }

    pub fn provenance(&self) -> &Provenance {
        &self.provenance
    }

    /// Stable label used in reports.
    pub fn mode_label(&self) -> &'static str {
        match self.provenance {
            Provenance::UserSupplied => "user_supplied",
            Provenance::OrbitVolume { .. } => "orbit_volume",
        }
    }
}

/// `C₁ = volume / ∏_{j>k}(a_k − a_j)` for a regular torus weight: fixing the
/// overall scale from one independently measured orbit volume.
pub fn c1_from_orbit_volume(
    n: usize,
    x0: &TorusWeight,
    volume: f64,
) -> Result<NormalizationConstant, PairingError> {
    if x0.n() != n {
        return Err(PairingError::IndexLength { expected: n, got: x0.n() });
    }
    if !volume.is_finite() {
        return Err(PairingError::NonFinite);
    }
    let a = x0.coefficients();
    let mut denominator = 1.0;
    for j in 1..n {
        for k in 0..j {
            if a[j] == a[k] {
                return Err(PairingError::NonRegularWeight { j, k });
            }
            denominator *= a[k] - a[j];
        }
    }
    let value = volume / denominator;
    if !value.is_finite() {
        return Err(PairingError::NonFinite);
    }
    Ok(NormalizationConstant {
        value,
        exact: None,
        provenance: Provenance::OrbitVolume { weights: a.to_vec(), volume },
    })
}

/// One evaluated intersection number `∫ dθ^α = (C₁/N!) ∂^α ∏(a_k − a_j)`.
///
/// The rational factor `(1/N!) ∂^α ∏(a_k − a_j)` is exact; `C₁` multiplies in
/// only when a float is requested.
#[derive(Debug, Clone)]
pub struct IntersectionValue {
    rank: usize,
    alpha: MultiIndex,
    exact: BigRational,
    c1: NormalizationConstant,
}

impl IntersectionValue {
    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn alpha(&self) -> &MultiIndex {
        &self.alpha
    }

    /// The exact rational factor, i.e. the value at `C₁ = 1`.
    pub fn exact(&self) -> &BigRational {
        &self.exact
    }

    pub fn c1(&self) -> &NormalizationConstant {
        &self.c1
    }

    /// `N! · exact`: the raw multi-derivative of the Vandermonde-type
    /// product, always an integer.
    pub fn top_derivative(&self) -> BigInt {
        let scaled = &self.exact * BigRational::from_integer(factorial(top_degree(self.rank)));
        debug_assert!(scaled.is_integer());
        scaled.to_integer()
    }

    /// Floating-point value `C₁ · exact`.
    pub fn value(&self) -> f64 {
        self.c1.value() * self.exact.to_f64().unwrap_or(f64::NAN)
    }
}

/// The integral `∫ dθ_1^{α_1} ⋯ dθ_n^{α_n}` over U(n)/T, exact up to `C₁`.
///
/// Requires `|α| = N = n(n−1)/2`; the result can still be zero when the
/// derivative kills every monomial (e.g. a pure power of one variable).
pub fn intersection_number(
    n: usize,
    alpha: &MultiIndex,
    c1: &NormalizationConstant,
) -> Result<IntersectionValue, PairingError> {
    if alpha.len() != n {
        return Err(PairingError::IndexLength { expected: n, got: alpha.len() });
    }
    let top = top_degree(n);
    if alpha.weight() != top {
        return Err(PairingError::DegreeMismatch { expected: top, got: alpha.weight() });
    }
    let vandermonde = vandermonde_product(n)?;
    let derived = derive_multi(&vandermonde, alpha)?;
    let constant = derived
        .as_constant()
        .expect("a top-order derivative of a degree-N polynomial is constant");
    let exact = constant / BigRational::from_integer(factorial(top));
    Ok(IntersectionValue { rank: n, alpha: alpha.clone(), exact, c1: c1.clone() })
}

/// An externally computed integral over the base of the fibration, treated
/// as an opaque number with a free-text description of its integrand.
#[derive(Debug, Clone)]
pub struct BaseIntegralValue {
    value: f64,
    description: String,
}

impl BaseIntegralValue {
    pub fn new(value: f64, description: impl Into<String>) -> Result<Self, PairingError> {
        if !value.is_finite() {
            return Err(PairingError::NonFinite);
        }
        Ok(Self { value, description: description.into() })
    }

    pub fn value(&self) -> f64 {
        self.value
    }

    pub fn description(&self) -> &str {
        &self.description
    }
}

/// Full pairing over the fibred moduli space: the fibre intersection number
/// times the opaque base integral.
pub fn total_pairing(
    n: usize,
    alpha: &MultiIndex,
    c1: &NormalizationConstant,
    base: &BaseIntegralValue,
) -> Result<f64, PairingError> {
    Ok(intersection_number(n, alpha, c1)?.value() * base.value())
}

/// True iff the Vandermonde-type product changes sign under every
/// transposition of variables — the sign character of the permutation action,
/// checked as an exact polynomial identity.
pub fn weyl_antisymmetry_check(n: usize) -> Result<bool, PairingError> {
    if n < 2 {
        return Err(PairingError::RankTooSmall { minimum: 2, got: n });
    }
    let vandermonde = vandermonde_product(n)?;
    let negated = vandermonde.neg();
    for j in 1..n {
        for k in 0..j {
            let mut perm: Vec<usize> = (0..n).collect();
            perm.swap(j, k);
            if vandermonde.permute_variables(&perm)? != negated {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// Pairing of `dθ_i` against the ordered frame pair `(v_jk, u_jk)`:
/// `dθ_i(v_jk, u_jk) = δ_ik − δ_ij`. Requires `j > k`.
pub fn frame_structure_constant(i: usize, j: usize, k: usize) -> i64 {
    debug_assert!(j > k, "structure constants are indexed by j > k");
    (i == k) as i64 - (i == j) as i64
}

/// Brute-force multinomial expansion of `(Σ_i a_i dθ_i)^N` evaluated on the
/// full ordered frame `(v_10, u_10, v_20, u_20, ...)`, as an exact polynomial
/// in the `a_i`.
///
/// The sum runs over every sequence of `N` component choices and every
/// assignment of the `N` two-form factors to the `N` frame planes, with each
/// factor contributing its structure constant. No closed form is used, so
/// the result independently certifies `(Σ a_i dθ_i)^N = N! ∏(a_k − a_j)`.
pub fn wedge_power_expansion(n: usize) -> Result<PairingPolynomial, PairingError> {
    if n < 1 {
        return Err(PairingError::RankTooSmall { minimum: 1, got: n });
    }
    let pairs: Vec<(usize, usize)> =
        (0..n).flat_map(|j| (0..j).map(move |k| (j, k))).collect();
    let top = pairs.len();
    let mut result = PairingPolynomial::zero(n);
    let mut sequence = vec![0usize; top];
    loop {
        let mut assignment_sum: i64 = 0;
        for_each_permutation(top, |assignment| {
            let mut product: i64 = 1;
            for (slot, &plane) in assignment.iter().enumerate() {
                let (j, k) = pairs[plane];
                product *= frame_structure_constant(sequence[slot], j, k);
                if product == 0 {
                    break;
                }
            }
            assignment_sum += product;
        });
        if assignment_sum != 0 {
            let mut expo = vec![0u32; n];
            for &component in &sequence {
                expo[component] += 1;
            }
            result.add_term(expo, BigRational::from_integer(BigInt::from(assignment_sum)));
        }
        // Odometer over component sequences.
        let mut digit = 0;
        loop {
            if digit == top {
                return Ok(result);
            }
            sequence[digit] += 1;
            if sequence[digit] < n {
                break;
            }
            sequence[digit] = 0;
            digit += 1;
        }
    }
}

/// Runs `visit` on every permutation of `0..m` (Heap's algorithm).
fn for_each_permutation(m: usize, mut visit: impl FnMut(&[usize])) {
    let mut perm: Vec<usize> = (0..m).collect();
    let mut stack = vec![0usize; m];
    visit(&perm);
    let mut i = 1;
    while i < m {
        if stack[i] < i {
            if i % 2 == 0 {
                perm.swap(0, i);
            } else {
                perm.swap(stack[i], i);
            }
            visit(&perm);
            stack[i] += 1;
            i = 1;
        } else {
            stack[i] = 0;
            i += 1;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::forms::{dtheta_eval, CosetPoint, TangentAtGroup};
    use crate::lie::build_basis;
    use num_traits::One;
    use proptest::prelude::*;

    fn rat(numer: i64, denom: i64) -> BigRational {
        BigRational::new(BigInt::from(numer), BigInt::from(denom))
    }

    fn int(value: i64) -> BigRational {
        BigRational::from_integer(BigInt::from(value))
    }

    #[test]
    fn vandermonde_n1_is_the_empty_product() {
        let p = vandermonde_product(1).unwrap();
        assert_eq!(p.as_constant(), Some(int(1)));
        assert!(vandermonde_product(0).is_err());
    }

    #[test]
    fn vandermonde_n2_is_the_coordinate_difference() {
        let p = vandermonde_product(2).unwrap();
        assert_eq!(p.num_terms(), 2);
        assert_eq!(p.coefficient(&[1, 0]), int(1));
        assert_eq!(p.coefficient(&[0, 1]), int(-1));
    }

    #[test]
    fn vandermonde_n3_expands_to_six_unit_monomials() {
        // (a0−a1)(a0−a2)(a1−a2) worked out by hand; the mixed a0·a1·a2 terms
        // cancel in pairs.
        let p = vandermonde_product(3).unwrap();
        assert_eq!(p.num_terms(), 6);
        assert_eq!(p.coefficient(&[2, 1, 0]), int(1));
        assert_eq!(p.coefficient(&[2, 0, 1]), int(-1));
        assert_eq!(p.coefficient(&[1, 2, 0]), int(-1));
        assert_eq!(p.coefficient(&[1, 0, 2]), int(1));
        assert_eq!(p.coefficient(&[0, 2, 1]), int(1));
        assert_eq!(p.coefficient(&[0, 1, 2]), int(-1));
        assert_eq!(p.coefficient(&[1, 1, 1]), int(0));
    }

    #[test]
    fn vandermonde_expansion_evaluates_like_the_direct_product() {
        // Expanded-polynomial evaluation against the unexpanded product at
        // rational points: two independent code paths.
        let points = [
            vec![rat(1, 2), rat(-3, 1), rat(7, 5), rat(0, 1), rat(2, 3)],
            vec![rat(5, 7), rat(5, 7), rat(1, 1), rat(-2, 9), rat(4, 1)],
        ];
        for n in 1..=5usize {
            let p = vandermonde_product(n).unwrap();
            for point in &points {
                let at = &point[..n];
                let mut direct = int(1);
                for j in 1..n {
                    for k in 0..j {
                        direct *= &at[k] - &at[j];
                    }
                }
                assert_eq!(p.eval(at).unwrap(), direct, "n={n}");
            }
        }
    }

    #[test]
    fn polynomial_arithmetic_keeps_canonical_form() {
        let a = PairingPolynomial::variable(2, 0).unwrap();
        let b = PairingPolynomial::variable(2, 1).unwrap();
        let sum = a.add(&b).unwrap();
        let diff = a.sub(&b).unwrap();
        let product = sum.mul(&diff).unwrap();
        // (a+b)(a−b) = a² − b²: the cross terms must vanish from storage.
        assert_eq!(product.num_terms(), 2);
        assert_eq!(product.coefficient(&[2, 0]), int(1));
        assert_eq!(product.coefficient(&[0, 2]), int(-1));
        assert!(product.sub(&product).unwrap().is_zero());
        assert_eq!(product.sub(&product).unwrap().num_terms(), 0);
        assert_eq!(product.degree(), 2);
        assert!(a.add(&PairingPolynomial::zero(3)).is_err());
    }

    #[test]
    fn derivative_tracks_exponents_and_kills_constants() {
        // ∂_0 (a0³ a1) = 3 a0² a1.
        let p = PairingPolynomial::monomial(2, vec![3, 1], int(1)).unwrap();
        let d = p.derivative(0).unwrap();
        assert_eq!(d.num_terms(), 1);
        assert_eq!(d.coefficient(&[2, 1]), int(3));
        let c = PairingPolynomial::constant(2, rat(7, 3));
        assert!(c.derivative(1).unwrap().is_zero());
        assert!(c.derivative(5).is_err());
    }

    #[test]
    fn derive_multi_with_zero_index_is_identity() {
        let p = vandermonde_product(3).unwrap();
        let same = derive_multi(&p, &MultiIndex::new(vec![0, 0, 0])).unwrap();
        assert_eq!(same, p);
        assert!(derive_multi(&p, &MultiIndex::new(vec![0, 0])).is_err());
    }

    #[test]
    fn derive_multi_is_order_independent() {
        let p = vandermonde_product(4).unwrap();
        let alpha = MultiIndex::new(vec![2, 1, 3, 0]);
        let one_shot = derive_multi(&p, &alpha).unwrap();
        let first = derive_multi(&p, &MultiIndex::new(vec![0, 1, 2, 0])).unwrap();
        let staged = derive_multi(&first, &MultiIndex::new(vec![2, 0, 1, 0])).unwrap();
        assert_eq!(one_shot, staged);
    }

    #[test]
    fn derive_multi_on_n2_difference_is_one() {
        let p = vandermonde_product(2).unwrap();
        let d = derive_multi(&p, &MultiIndex::new(vec![1, 0])).unwrap();
        assert_eq!(d.as_constant(), Some(int(1)));
    }

    #[test]
    fn derive_multi_n3_alpha_210_is_two() {
        let p = vandermonde_product(3).unwrap();
        let d = derive_multi(&p, &MultiIndex::new(vec![2, 1, 0])).unwrap();
        assert_eq!(d.as_constant(), Some(int(2)));
    }

    #[test]
    fn intersection_n2_matches_c1() {
        let c1 = NormalizationConstant::unit();
        let v = intersection_number(2, &MultiIndex::new(vec![1, 0]), &c1).unwrap();
        assert_eq!(v.exact(), &int(1));
        assert_eq!(v.value(), 1.0);
        let other = NormalizationConstant::user_supplied(2.5).unwrap();
        let w = intersection_number(2, &MultiIndex::new(vec![1, 0]), &other).unwrap();
        assert_eq!(w.exact(), &int(1));
        assert_eq!(w.value(), 2.5);
    }

    #[test]
    fn intersection_n3_210_is_a_third_of_c1() {
        let c1 = NormalizationConstant::unit();
        let v = intersection_number(3, &MultiIndex::new(vec![2, 1, 0]), &c1).unwrap();
        assert_eq!(v.exact(), &rat(1, 3));
        assert_eq!(v.top_derivative(), BigInt::from(2));
        assert!((v.value() - 1.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn intersection_n3_pure_power_vanishes() {
        let c1 = NormalizationConstant::unit();
        let v = intersection_number(3, &MultiIndex::new(vec![3, 0, 0]), &c1).unwrap();
        assert!(v.exact().is_zero());
        assert_eq!(v.value(), 0.0);
    }

    #[test]
    fn intersection_rejects_malformed_indices() {
        let c1 = NormalizationConstant::unit();
        let wrong_weight = intersection_number(3, &MultiIndex::new(vec![1, 1, 0]), &c1);
        assert!(matches!(
            wrong_weight,
            Err(PairingError::DegreeMismatch { expected: 3, got: 2 })
        ));
        let wrong_length = intersection_number(3, &MultiIndex::new(vec![2, 1]), &c1);
        assert!(matches!(wrong_length, Err(PairingError::IndexLength { expected: 3, got: 2 })));
    }

    #[test]
    fn scaled_intersections_are_integers_for_all_top_indices() {
        let c1 = NormalizationConstant::unit();
        for n in 2..=4usize {
            let top = top_degree(n);
            for alpha in MultiIndex::all_of_weight(n, top) {
                let v = intersection_number(n, &alpha, &c1).unwrap();
                let scaled = v.exact() * BigRational::from_integer(factorial(top));
                assert!(scaled.is_integer(), "n={n} alpha={:?}", alpha.entries());
            }
        }
    }

    #[test]
    fn c1_from_volume_divides_by_the_weight_product() {
        let x0 = TorusWeight::new(vec![1.0, -1.0]).unwrap();
        let c1 = c1_from_orbit_volume(2, &x0, 10.0).unwrap();
        assert!((c1.value() - 5.0).abs() < 1e-15);
        assert_eq!(c1.mode_label(), "orbit_volume");
        assert!(c1.exact().is_none());
        match c1.provenance() {
            Provenance::OrbitVolume { weights, volume } => {
                assert_eq!(weights, &[1.0, -1.0]);
                assert_eq!(*volume, 10.0);
            }
            other => panic!("wrong provenance {other:?}"),
        }
    }

    #[test]
    fn c1_rejects_coincident_weights() {
        let x0 = TorusWeight::new(vec![1.0, 1.0]).unwrap();
        let err = c1_from_orbit_volume(2, &x0, 10.0);
        assert!(matches!(err, Err(PairingError::NonRegularWeight { j: 1, k: 0 })));
    }

    #[test]
    fn total_pairing_scales_the_fibre_number_by_the_base() {
        let c1 = NormalizationConstant::unit();
        let alpha = MultiIndex::new(vec![2, 1, 0]);
        let zero = BaseIntegralValue::new(0.0, "vanishing base class").unwrap();
        assert_eq!(total_pairing(3, &alpha, &c1, &zero).unwrap(), 0.0);
        let one = BaseIntegralValue::new(1.0, "unit base class").unwrap();
        let fibre = intersection_number(3, &alpha, &c1).unwrap().value();
        assert_eq!(total_pairing(3, &alpha, &c1, &one).unwrap(), fibre);
        let seven = BaseIntegralValue::new(7.0, "rescaled base class").unwrap();
        assert!((total_pairing(3, &alpha, &c1, &seven).unwrap() - 7.0 * fibre).abs() < 1e-15);
        assert!(BaseIntegralValue::new(f64::NAN, "bad").is_err());
    }

    #[test]
    fn weyl_antisymmetry_holds_up_to_n6() {
        for n in 2..=6usize {
            assert!(weyl_antisymmetry_check(n).unwrap(), "n={n}");
        }
        assert!(weyl_antisymmetry_check(1).is_err());
    }

    #[test]
    fn variable_permutation_commutes_with_evaluation() {
        let p = vandermonde_product(3).unwrap();
        let perm = [2usize, 0, 1];
        let q = p.permute_variables(&perm).unwrap();
        let point = [rat(1, 3), rat(-2, 1), rat(5, 4)];
        // Variable i becomes variable perm[i], so q(x) = p(x∘perm).
        let pulled = [point[perm[0]].clone(), point[perm[1]].clone(), point[perm[2]].clone()];
        assert_eq!(q.eval(&point).unwrap(), p.eval(&pulled).unwrap());
        assert!(p.permute_variables(&[0, 0, 1]).is_err());
        assert!(p.permute_variables(&[0, 1]).is_err());
    }

    #[test]
    fn structure_constants_match_the_numeric_two_form() {
        // γ^i_{jk} pins the exact engine to the geometric dθ_i.
        let basis = build_basis(3).unwrap();
        let p = CosetPoint::identity(3);
        for j in 1..3 {
            for k in 0..j {
                let v = basis.antisym(j, k).unwrap();
                let u = basis.sym(j, k).unwrap();
                for i in 0..3 {
                    let numeric = dtheta_eval(i, &p, v, u, &basis).unwrap();
                    let exact = frame_structure_constant(i, j, k) as f64;
                    assert!(
                        (numeric - exact).abs() < 1e-12,
                        "i={i} j={j} k={k}: {numeric} vs {exact}"
                    );
                }
            }
        }
    }

    #[test]
    fn wedge_power_expansion_is_n_factorial_times_vandermonde() {
        for n in 1..=3usize {
            let brute = wedge_power_expansion(n).unwrap();
            let scaled = vandermonde_product(n)
                .unwrap()
                .scale(&BigRational::from_integer(factorial(top_degree(n))));
            assert_eq!(brute, scaled, "n={n}");
        }
    }

    #[test]
    fn extracted_wedge_coefficients_match_derivatives_exactly() {
        // Multinomial extraction from the brute-force expansion equals the
        // multi-derivative of the Vandermonde product: for every top α,
        // α!/N! · [a^α](Σ a_i dθ_i)^N = ∂^α ∏(a_k − a_j).
        for n in 2..=3usize {
            let top = top_degree(n);
            let brute = wedge_power_expansion(n).unwrap();
            let vandermonde = vandermonde_product(n).unwrap();
            let n_fact = BigRational::from_integer(factorial(top));
            for alpha in MultiIndex::all_of_weight(n, top) {
                let derived = derive_multi(&vandermonde, &alpha).unwrap().as_constant().unwrap();
                let extracted = brute.coefficient(alpha.entries())
                    * BigRational::from_integer(alpha.factorial_product())
                    / n_fact.clone();
                assert_eq!(extracted, derived, "n={n} alpha={:?}", alpha.entries());
            }
        }
    }

    #[test]
    fn multi_index_enumeration_is_complete() {
        let all = MultiIndex::all_of_weight(3, 3);
        assert_eq!(all.len(), 10);
        assert!(all.iter().all(|a| a.weight() == 3));
        assert!(all.contains(&MultiIndex::new(vec![3, 0, 0])));
        assert!(all.contains(&MultiIndex::new(vec![1, 1, 1])));
        assert_eq!(MultiIndex::new(vec![2, 1, 0]).factorial_product(), BigInt::from(2));
        assert_eq!(factorial(0), BigInt::from(1));
        assert_eq!(factorial(5), BigInt::from(120));
    }

    #[test]
    fn unit_constant_is_exactly_one() {
        let c1 = NormalizationConstant::unit();
        assert_eq!(c1.value(), 1.0);
        assert!(c1.exact().unwrap().is_one());
        assert_eq!(c1.mode_label(), "user_supplied");
        assert!(NormalizationConstant::user_supplied(f64::INFINITY).is_err());
    }

    #[test]
    fn float_evaluation_tracks_exact_evaluation() {
        let p = vandermonde_product(4).unwrap();
        let exact_point = [rat(1, 2), rat(-3, 4), rat(5, 8), rat(-7, 16)];
        let float_point = [0.5, -0.75, 0.625, -0.4375];
        let exact = p.eval(&exact_point).unwrap().to_f64().unwrap();
        let float = p.eval_f64(&float_point).unwrap();
        assert!((exact - float).abs() < 1e-12);
    }

    fn small_poly() -> impl Strategy<Value = PairingPolynomial> {
        proptest::collection::vec(
            (proptest::collection::vec(0u32..4, 3), -6i64..7),
            0..5,
        )
        .prop_map(|terms| {
            let mut p = PairingPolynomial::zero(3);
            for (expo, coeff) in terms {
                p.add_term(expo, int(coeff));
            }
            p
        })
    }

    proptest! {
        #[test]
        fn products_commute_and_derivatives_obey_leibniz(p in small_poly(), q in small_poly()) {
            let pq = p.mul(&q).unwrap();
            prop_assert_eq!(pq.clone(), q.mul(&p).unwrap());
            for index in 0..3 {
                let lhs = pq.derivative(index).unwrap();
                let rhs = p.derivative(index).unwrap().mul(&q).unwrap()
                    .add(&p.mul(&q.derivative(index).unwrap()).unwrap()).unwrap();
                prop_assert_eq!(lhs, rhs);
            }
        }
    }
}
