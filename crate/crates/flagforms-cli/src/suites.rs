//! The check suites behind each command.
//!
//! Every suite turns library invariants into named [`Check`]s with default
//! tolerances (overridable via `tol.<name>` configuration keys):
//!
//! * `basis` — `gram_defect_n{1..8}`: worst Gram-matrix deviation from the
//!   identity, default `1e-12`.
//! * `roots` — `root_scaling_defect_n{2,3,4}`: worst group-side scaling-law
//!   defect over seeded diagonal draws, default `1e-9`.
//! * `kks-check` — `kks_pullback_residual_n{2,3}`: worst orbit-form pullback
//!   residual over seeded cosets and tangent pairs, default `1e-8`.
//! * `connection-check` — `relation_defect_max` (`1e-6`),
//!   `connection_reproduces_generators` and
//!   `connection_maps_diagonals_to_traceless` (`1e-9`),
//!   `curvature_torus_valued` (`1e-6`), `curvature_vertical_pairs` (`1e-4`),
//!   at solver points for the configured rank and genus; the first solved
//!   tuple is serialized into the report.
//! * `pair` — exactness checks on one intersection pairing:
//!   `scaled_base_is_integer` (the base value times `N!` must be a whole
//!   number) and, for rank at most 3, `multinomial_extraction_matches`
//!   against the brute-force wedge-power expansion; both exact, tolerance 0.
//! * `orbit-anchor` — the rank-2 cross-check tying the closed form to
//!   geometry: `orbit_volume_defect` (quadrature volume of the weight
//!   `(1,-1)` orbit against its closed-form value, `1e-3`),
//!   `central_component_cancels` (`1e-9`), and `anchor_pairing_defect`
//!   (volume-normalized pairing against direct two-form quadrature, `1e-2`).
//! * `verify-all` — all of the above plus `pairing_identity_n{2,3}` (every
//!   top-weight multi-index against the brute expansion, exact) and
//!   `weyl_antisymmetry_n2_to_n6` (exact).
//!
//! All randomness is drawn from seeded streams derived from the configured
//! seed, so a fixed configuration always produces the same report bytes.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use num_rational::BigRational;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use flagforms::connection::CURVATURE_FD_STEP;
use flagforms::pairing::{factorial, top_degree};
use flagforms::{
    build_basis, bracket, c1_from_orbit_volume, conjugation_image, connection_eval,
    curvature_eval, dtheta_eval, haar_sample, inner_product, intersection_number, kks_eval,
    project_to_torus, pullback_residual, random_anti_hermitian, random_torus_weight,
    relation_defect, root_scaling_defect, solve_point, traceless_part, vertical_frame,
    wedge_power_expansion, weyl_antisymmetry_check, AntiHermitian, CMatrix,
    ConnectionError, CosetPoint, Cpx, FormsError, GroupTuple, LieBasis, LieError, MultiIndex,
    NormalizationConstant, OrbitPoint, PairingError, RelationTarget, RootsError, SolverOptions,
    TorusWeight, TupleTangent, UnitaryMatrix,
};

use crate::config::{C1Mode, Command, RunConfig};
use crate::report::{Check, PairingBlock, Report, TupleBlock};

/// Relation-variety points solved per connection run.
const SOLVE_POINTS: u64 = 5;
/// Points at which the (more expensive) curvature checks run.
const CURVATURE_POINTS: usize = 2;
/// Convergence tolerance requested from the solver; well under the
/// relation-defect check tolerance.
const SOLVE_TOL: f64 = 1e-9;
/// Midpoint-rule resolution for the orbit-volume quadrature.
const VOLUME_GRID: (usize, usize) = (400, 400);
/// Midpoint-rule resolution for the coset-chart two-form quadrature.
const CHART_GRID: (usize, usize) = (300, 300);

/// Seed salts decorrelating the randomized suites.
const ROOTS_SALT: u64 = 0x726f;
const KKS_SALT: u64 = 0x6b6b;
const CURVATURE_SALT: u64 = 0x6375;

/// A failure to execute a suite at all (as opposed to a failing check).
#[derive(Debug, Error)]
pub enum SuiteError {
    #[error(transparent)]
    Lie(#[from] LieError),
    #[error(transparent)]
    Roots(#[from] RootsError),
    #[error(transparent)]
    Forms(#[from] FormsError),
    #[error(transparent)]
    Connection(#[from] ConnectionError),
    #[error(transparent)]
    Pairing(#[from] PairingError),
}

/// Resolves check tolerances: configured overrides win over defaults.
struct Tolerances<'a> {
    overrides: &'a BTreeMap<String, f64>,
}

impl Tolerances<'_> {
    fn check(&self, name: &str, value: f64, default_tol: f64) -> Check {
        let tol = self.overrides.get(name).copied().unwrap_or(default_tol);
        Check::measure(name, value, tol)
    }
}

/// Executes the configured command and assembles its report.
pub fn run(config: &RunConfig) -> Result<Report, SuiteError> {
    let tols = Tolerances { overrides: &config.tol_overrides };
    let mut report = Report::new(config.clone());
    match config.command {
        Command::Basis => report.checks = basis_checks(&tols)?,
        Command::Roots => report.checks = roots_checks(config.seed, &tols)?,
        Command::KksCheck => report.checks = kks_checks(config.seed, &tols)?,
        Command::ConnectionCheck => {
            let (checks, tuple) = connection_checks(config, &tols)?;
            report.checks = checks;
            report.tuple = Some(tuple);
        }
        Command::Pair => {
            let (checks, pairing) = pair_checks(config, &tols)?;
            report.checks = checks;
            report.pairing = Some(pairing);
        }
        Command::OrbitAnchor => {
            let (checks, pairing) = orbit_anchor_checks(&tols)?;
            report.checks = checks;
            report.pairing = Some(pairing);
        }
        Command::VerifyAll => {
            let mut checks = basis_checks(&tols)?;
            checks.extend(roots_checks(config.seed, &tols)?);
            checks.extend(kks_checks(config.seed, &tols)?);
            checks.extend(connection_checks(config, &tols)?.0);
            checks.extend(orbit_anchor_checks(&tols)?.0);
            checks.extend(pairing_identity_checks(&tols)?);
            report.checks = checks;
        }
    }
    Ok(report)
}

/// Gram-matrix orthonormality of the u(n) basis for ranks 1 through 8.
fn basis_checks(tols: &Tolerances) -> Result<Vec<Check>, SuiteError> {
    let mut checks = Vec::new();
    for n in 1..=8 {
        let basis = build_basis(n)?;
        let elements = basis.elements();
        let mut defect = 0.0f64;
        for (i, x) in elements.iter().enumerate() {
            for (j, y) in elements.iter().enumerate() {
                let expected = if i == j { 1.0 } else { 0.0 };
                defect = defect.max((inner_product(x, y)? - expected).abs());
            }
        }
        checks.push(tols.check(&format!("gram_defect_n{n}"), defect, 1e-12));
    }
    Ok(checks)
}

/// Group-side root scaling law on 100 seeded diagonal draws per rank.
fn roots_checks(seed: u64, tols: &Tolerances) -> Result<Vec<Check>, SuiteError> {
    let mut checks = Vec::new();
    for n in [2usize, 3, 4] {
        let basis = build_basis(n)?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ ROOTS_SALT);
        let mut worst = 0.0f64;
        for _ in 0..100 {
            let y = random_torus_weight(n, &mut rng).realize();
            for j in 0..n {
                for k in 0..j {
                    worst = worst.max(root_scaling_defect(&y, j, k, &basis)?);
                    worst = worst.max(root_scaling_defect(&y, k, j, &basis)?);
                }
            }
        }
        checks.push(tols.check(&format!("root_scaling_defect_n{n}"), worst, 1e-9));
    }
    Ok(checks)
}

/// Orbit-form pullback residual on 100 seeded cosets per rank.
fn kks_checks(seed: u64, tols: &Tolerances) -> Result<Vec<Check>, SuiteError> {
    let mut checks = Vec::new();
    for n in [2usize, 3] {
        let basis = build_basis(n)?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ KKS_SALT);
        let mut worst = 0.0f64;
        for _ in 0..100 {
            let x = random_torus_weight(n, &mut rng);
            let p = CosetPoint::new(haar_sample(n, &mut rng)?);
            let xi = random_anti_hermitian(n, &mut rng);
            let eta = random_anti_hermitian(n, &mut rng);
            worst = worst.max(pullback_residual(&x, &p, &xi, &eta, &basis)?.abs());
        }
        checks.push(tols.check(&format!("kks_pullback_residual_n{n}"), worst, 1e-8));
    }
    Ok(checks)
}

/// A regular, zero-sum diagonal weight: feasible as a relation target for
/// every genus because its exponential has determinant one.
fn ramp_weight(n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![0.0];
    }
    let spacing = 0.8 / (n - 1) as f64;
    (0..n).map(|i| spacing * ((n - 1) as f64 / 2.0 - i as f64)).collect()
}

fn tuple_block(rho: &GroupTuple) -> TupleBlock {
    let entries = rho
        .entries()
        .iter()
        .map(|u| {
            let m = u.matrix();
            let mut cells = Vec::with_capacity(m.nrows() * m.ncols());
            for r in 0..m.nrows() {
                for c in 0..m.ncols() {
                    cells.push((m[(r, c)].re, m[(r, c)].im));
                }
            }
            cells
        })
        .collect();
    TupleBlock { n: rho.n(), g: rho.genus(), entries }
}

/// Distance of a curvature value from the traceless diagonal subalgebra.
fn torus_value_defect(
    omega: &AntiHermitian,
    basis: &LieBasis,
) -> Result<f64, SuiteError> {
    let projected = traceless_part(&project_to_torus(omega, basis)?);
    Ok(omega.sub(&projected)?.norm())
}

/// Solves relation-variety points and verifies the connection axioms and
/// curvature contracts at them.
fn connection_checks(
    config: &RunConfig,
    tols: &Tolerances,
) -> Result<(Vec<Check>, TupleBlock), SuiteError> {
    let n = config.n;
    let genus = config.g;
    let basis = build_basis(n)?;
    let target =
        RelationTarget::new(UnitaryMatrix::identity(n), TorusWeight::new(ramp_weight(n))?)?;
    let options = SolverOptions { initial_step: config.step, budget: config.budget };

    let mut points = Vec::new();
    for k in 0..SOLVE_POINTS {
        points.push(solve_point(&target, genus, config.seed.wrapping_add(k), SOLVE_TOL, &options)?);
    }

    let mut defect_max = 0.0f64;
    let mut generator_defect = 0.0f64;
    let mut diagonal_defect = 0.0f64;
    for rho in &points {
        defect_max = defect_max.max(relation_defect(rho, &target)?);
        let frame = vertical_frame(rho, &basis)?;
        for eps in frame.effective_basis().to_vec() {
            let image = conjugation_image(rho, &eps)?;
            let omega = connection_eval(rho, &image, &frame, &basis)?;
            generator_defect = generator_defect.max(omega.sub(&eps)?.norm());
        }
        for i in 0..n {
            let image = conjugation_image(rho, basis.diag(i)?)?;
            let omega = connection_eval(rho, &image, &frame, &basis)?;
            diagonal_defect =
                diagonal_defect.max(omega.sub(&traceless_part(basis.diag(i)?))?.norm());
        }
    }

    let mut torus_defect = 0.0f64;
    let mut vertical_defect = 0.0f64;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed ^ CURVATURE_SALT);
    for rho in points.iter().take(CURVATURE_POINTS) {
        let xi = TupleTangent::new(
            rho.clone(),
            (0..2 * genus).map(|_| random_anti_hermitian(n, &mut rng)).collect(),
        )?;
        let eta = TupleTangent::new(
            rho.clone(),
            (0..2 * genus).map(|_| random_anti_hermitian(n, &mut rng)).collect(),
        )?;
        let omega = curvature_eval(rho, &xi, &eta, &basis, CURVATURE_FD_STEP)?;
        torus_defect = torus_defect.max(torus_value_defect(&omega, &basis)?);

        let frame = vertical_frame(rho, &basis)?;
        let verticals = frame.orthonormal();
        if let (Some(first), Some(last)) = (verticals.first(), verticals.last()) {
            let vertical =
                curvature_eval(rho, first, last, &basis, CURVATURE_FD_STEP)?;
            vertical_defect = vertical_defect.max(vertical.norm());
        }
    }

    let checks = vec![
        tols.check("relation_defect_max", defect_max, 1e-6),
        tols.check("connection_reproduces_generators", generator_defect, 1e-9),
        tols.check("connection_maps_diagonals_to_traceless", diagonal_defect, 1e-9),
        tols.check("curvature_torus_valued", torus_defect, 1e-6),
        tols.check("curvature_vertical_pairs", vertical_defect, 1e-4),
    ];
    Ok((checks, tuple_block(&points[0])))
}

/// One intersection pairing with its exactness checks.
fn pair_checks(
    config: &RunConfig,
    tols: &Tolerances,
) -> Result<(Vec<Check>, PairingBlock), SuiteError> {
    let n = config.n;
    let entries = config.alpha.clone().expect("validated by RunConfig::finalize");
    let alpha = MultiIndex::new(entries.clone());
    let c1 = match &config.c1 {
        C1Mode::Unit => NormalizationConstant::unit(),
        C1Mode::Volume { volume, weights } => {
            let x0 = TorusWeight::new(weights.clone())?;
            c1_from_orbit_volume(n, &x0, *volume)?
        }
    };
    let value = intersection_number(n, &alpha, &c1)?;

    let mut checks = Vec::new();
    let scaled = value.exact() * BigRational::from_integer(factorial(top_degree(n)));
    let integer_defect = if scaled.is_integer() { 0.0 } else { 1.0 };
    checks.push(tols.check("scaled_base_is_integer", integer_defect, 0.0));

    if n <= 3 {
        // The brute expansion equals N! times the closed-form polynomial,
        // so coefficient·α!/N! must reproduce the scaled base value N!·exact.
        let brute = wedge_power_expansion(n)?;
        let expected = brute.coefficient(alpha.entries())
            * BigRational::from_integer(alpha.factorial_product())
            / BigRational::from_integer(factorial(top_degree(n)));
        let matches = expected == BigRational::from_integer(value.top_derivative());
        let extraction_defect = if matches { 0.0 } else { 1.0 };
        checks.push(tols.check("multinomial_extraction_matches", extraction_defect, 0.0));
    }

    let pairing = PairingBlock {
        n,
        alpha: entries,
        c1_mode: c1.mode_label(),
        c1_value: c1.value(),
        result: value.value(),
        exact_numerator: value.exact().numer().to_string(),
        exact_denominator: value.exact().denom().to_string(),
    };
    Ok((checks, pairing))
}

/// The Pauli-basis Hermitian matrix `x σ_x + y σ_y + z σ_z`.
fn pauli_combination(x: f64, y: f64, z: f64) -> CMatrix {
    CMatrix::from_row_slice(
        2,
        2,
        &[
            Cpx::new(z, 0.0),
            Cpx::new(x, -y),
            Cpx::new(x, y),
            Cpx::new(-z, 0.0),
        ],
    )
}

/// The weight-(1,−1) orbit point at spherical coordinates `(theta, phi)`
/// together with its two coordinate tangents.
fn sphere_point(theta: f64, phi: f64) -> Result<[AntiHermitian; 3], SuiteError> {
    let i = Cpx::new(0.0, 1.0);
    let p = pauli_combination(theta.sin() * phi.cos(), theta.sin() * phi.sin(), theta.cos()) * i;
    let d_theta = pauli_combination(
        theta.cos() * phi.cos(),
        theta.cos() * phi.sin(),
        -theta.sin(),
    ) * i;
    let d_phi =
        pauli_combination(-theta.sin() * phi.sin(), theta.sin() * phi.cos(), 0.0) * i;
    Ok([AntiHermitian::new(p)?, AntiHermitian::new(d_theta)?, AntiHermitian::new(d_phi)?])
}

/// The generator whose orbit vector field at `p` equals the tangent `t`.
/// On this orbit `p² = −I`, so `¼[p, [p, t]] = t` and `¼[p, t]` generates.
fn sphere_generator(p: &AntiHermitian, t: &AntiHermitian) -> Result<AntiHermitian, SuiteError> {
    Ok(bracket(p, t)?.scale(0.25))
}

/// Unsigned symplectic volume of the weight-(1,−1) orbit by midpoint
/// quadrature in spherical coordinates; the closed-form value is 4π.
fn orbit_volume_quadrature() -> Result<f64, SuiteError> {
    let (steps_theta, steps_phi) = VOLUME_GRID;
    let d_theta = PI / steps_theta as f64;
    let d_phi = 2.0 * PI / steps_phi as f64;
    let mut total = 0.0;
    for a in 0..steps_theta {
        let theta = (a as f64 + 0.5) * d_theta;
        for b in 0..steps_phi {
            let phi = (b as f64 + 0.5) * d_phi;
            let [p, t1, t2] = sphere_point(theta, phi)?;
            let y1 = sphere_generator(&p, &t1)?;
            let y2 = sphere_generator(&p, &t2)?;
            let density = kks_eval(&OrbitPoint::new(p), &y1, &y2)?;
            total += density.abs() * d_theta * d_phi;
        }
    }
    Ok(total)
}

/// Integrals of the two diagonal curvature two-forms over the rank-2 coset
/// space, via the chart `(t, ψ) ↦ exp(t(cos ψ·u + sin ψ·v))` with
/// `t ∈ (0, π/√2)`. Orientation is the chart's own; callers fix the sign.
fn dtheta_chart_integrals(basis: &LieBasis) -> Result<[f64; 2], SuiteError> {
    let u = basis.sym(1, 0)?;
    let v = basis.antisym(1, 0)?;
    let point = CosetPoint::identity(2);
    let (steps_t, steps_psi) = CHART_GRID;
    let t_max = PI / 2.0f64.sqrt();
    let dt = t_max / steps_t as f64;
    let dpsi = 2.0 * PI / steps_psi as f64;
    let mut integrals = [0.0f64; 2];
    for a in 0..steps_t {
        let t = (a as f64 + 0.5) * dt;
        let c = t / 2.0f64.sqrt();
        for b in 0..steps_psi {
            let psi = (b as f64 + 0.5) * dpsi;
            let w = u.scale(psi.cos()).add(&v.scale(psi.sin()))?;
            let w_prime = u.scale(-psi.sin()).add(&v.scale(psi.cos()))?;
            // W² = −I/2, so exp(tW) = cos(t/√2)·I + √2 sin(t/√2)·W and the
            // ψ-derivative only hits the second term.
            let g = CMatrix::identity(2, 2) * Cpx::new(c.cos(), 0.0)
                + w.matrix() * Cpx::new(2.0f64.sqrt() * c.sin(), 0.0);
            let dg = w_prime.matrix() * Cpx::new(2.0f64.sqrt() * c.sin(), 0.0);
            let xi_psi = AntiHermitian::new(g.adjoint() * dg)?;
            for (i, integral) in integrals.iter_mut().enumerate() {
                *integral += dtheta_eval(i, &point, &w, &xi_psi, basis)? * dt * dpsi;
            }
        }
    }
    Ok(integrals)
}

/// The rank-2 anchor: measure the orbit volume by quadrature, derive the
/// normalization constant from it, and compare the resulting pairing for
/// the multi-index (1,0) against direct quadrature of the first diagonal
/// two-form (in the orientation that integrates the defining weight's
/// combination positively).
fn orbit_anchor_checks(
    tols: &Tolerances,
) -> Result<(Vec<Check>, PairingBlock), SuiteError> {
    let basis = build_basis(2)?;
    let closed_form = 4.0 * PI;
    let volume = orbit_volume_quadrature()?;
    let volume_defect = (volume - closed_form).abs() / closed_form;

    let integrals = dtheta_chart_integrals(&basis)?;
    let weights = [1.0, -1.0];
    let weighted: f64 = weights.iter().zip(integrals).map(|(a, i)| a * i).sum();
    let central = (integrals[0] + integrals[1]).abs()
        / integrals[0].abs().max(integrals[1].abs());
    let direct = weighted.signum() * integrals[0];

    let x0 = TorusWeight::new(weights.to_vec())?;
    let c1 = c1_from_orbit_volume(2, &x0, volume)?;
    let alpha = MultiIndex::new(vec![1, 0]);
    let value = intersection_number(2, &alpha, &c1)?;
    let pairing_defect = (value.value() - direct).abs() / direct.abs();

    let checks = vec![
        tols.check("orbit_volume_defect", volume_defect, 1e-3),
        tols.check("central_component_cancels", central, 1e-9),
        tols.check("anchor_pairing_defect", pairing_defect, 1e-2),
    ];
    let pairing = PairingBlock {
        n: 2,
        alpha: vec![1, 0],
        c1_mode: c1.mode_label(),
        c1_value: c1.value(),
        result: value.value(),
        exact_numerator: value.exact().numer().to_string(),
        exact_denominator: value.exact().denom().to_string(),
    };
    Ok((checks, pairing))
}

/// Exact identities of the pairing engine: every top-weight multi-index
/// against the brute-force expansion for ranks 2 and 3, and Vandermonde
/// antisymmetry through rank 6.
fn pairing_identity_checks(tols: &Tolerances) -> Result<Vec<Check>, SuiteError> {
    let mut checks = Vec::new();
    let unit = NormalizationConstant::unit();
    for n in [2usize, 3] {
        let degree = top_degree(n);
        let brute = wedge_power_expansion(n)?;
        let n_factorial = BigRational::from_integer(factorial(degree));
        let mut defect = 0.0f64;
        for alpha in MultiIndex::all_of_weight(n, degree) {
            let value = intersection_number(n, &alpha, &unit)?;
            let expected = brute.coefficient(alpha.entries())
                * BigRational::from_integer(alpha.factorial_product())
                / n_factorial.clone();
            if expected != BigRational::from_integer(value.top_derivative()) {
                defect = 1.0;
            }
        }
        checks.push(tols.check(&format!("pairing_identity_n{n}"), defect, 0.0));
    }

    let mut weyl_defect = 0.0f64;
    for n in 2..=6 {
        if !weyl_antisymmetry_check(n)? {
            weyl_defect = 1.0;
        }
    }
    checks.push(tols.check("weyl_antisymmetry_n2_to_n6", weyl_defect, 0.0));
    Ok(checks)
}
