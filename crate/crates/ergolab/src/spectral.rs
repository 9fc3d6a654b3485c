//! Pure-point spectral analysis of the dynamics.
//!
//! In finite dimension the unitary U has pure point spectrum, so the
//! resolution of the identity is a finite family of eigenprojections. On top
//! of it sit the objects the twisted-product limit needs: the pair set
//! Σ(k1,k2) of eigenvalue pairs with v^{k1}w^{k2} = 1, the projection onto
//! the fixed space of U^{k1} ⊗ U^{k2} (computable two independent ways,
//! which are checked against each other), and eigenoperators A ∈ M with
//! U A U† = v·A.

use num_complex::Complex64;

use crate::algebra::AlgebraBasis;
use crate::error::{Error, Result};
use crate::linalg::{
    c64, cluster_unit_circle, eig_normal, null_space_scaled, pair_tol, tensor, ComplexMatrix,
    CHECK_TOL, CLUSTER_TOL, RANK_TOL_REL,
};
use crate::system::ModularData;

/// Exponent pairs considered non-degenerate: k1 ≠ 0, k2 ≠ 0, k1 ≠ k2.
pub fn admissible_pair(k1: i64, k2: i64) -> bool {
    k1 != 0 && k2 != 0 && k1 != k2
}

/// Eigenvalues of the dynamics with their spectral projections.
#[derive(Debug, Clone)]
pub struct SpectralData {
    /// Distinct unimodular eigenvalues, sorted by principal argument in
    /// [0, 2π).
    pub eigenvalues: Vec<Complex64>,
    /// Matching orthogonal projections, summing to the identity.
    pub projections: Vec<ComplexMatrix>,
    pub multiplicities: Vec<usize>,
}

impl SpectralData {
    pub fn dim(&self) -> usize {
        self.projections.first().map_or(0, |p| p.rows)
    }

    /// Index of the eigenvalue matching `v` within tolerance, if any.
    pub fn find(&self, v: Complex64, tol: f64) -> Option<usize> {
        self.eigenvalues.iter().position(|&w| (w - v).norm() <= tol)
    }

    /// Reassemble the unitary from its spectral resolution.
    pub fn reassemble(&self) -> ComplexMatrix {
        let d = self.dim();
        let mut u = ComplexMatrix::zeros(d, d);
        for (v, p) in self.eigenvalues.iter().zip(&self.projections) {
            u = u.add(&p.scale(*v));
        }
        u
    }
}

fn principal_arg(z: Complex64) -> f64 {
    let a = z.arg();
    if a < 0.0 {
        a + std::f64::consts::TAU
    } else {
        a
    }
}

/// Spectral resolution of a unitary: distinct clustered eigenvalues with
/// orthogonal eigenprojections summing to I.
pub fn spectral_data(u: &ComplexMatrix) -> Result<SpectralData> {
    let ur = u.unitarity_residual();
    if ur > CHECK_TOL {
        return Err(Error::ConfigError(format!(
            "spectral analysis needs a unitary: residual {ur:.3e}"
        )));
    }
    let d = u.rows;
    let sys = eig_normal(u, CHECK_TOL)?;
    let (reps, assignment) = cluster_unit_circle(&sys.values, CLUSTER_TOL)?;

    let mut order: Vec<usize> = (0..reps.len()).collect();
    order.sort_by(|&a, &b| {
        principal_arg(reps[a])
            .partial_cmp(&principal_arg(reps[b]))
            .unwrap()
    });

    let mut eigenvalues = Vec::with_capacity(reps.len());
    let mut projections = Vec::with_capacity(reps.len());
    let mut multiplicities = Vec::with_capacity(reps.len());
    for &cluster in &order {
        let mut p = ComplexMatrix::zeros(d, d);
        let mut count = 0;
        for (i, &assigned) in assignment.iter().enumerate() {
            if assigned == cluster {
                let col = sys.vectors.column_at(i);
                p = p.add(&col.mul(&col.adjoint()));
                count += 1;
            }
        }
        eigenvalues.push(reps[cluster]);
        projections.push(p);
        multiplicities.push(count);
    }

    let data = SpectralData {
        eigenvalues,
        projections,
        multiplicities,
    };
    verify_resolution(u, &data)?;
    Ok(data)
}

/// Structural checks on a freshly built resolution: self-adjoint idempotents,
/// mutual orthogonality, completeness, and the eigenvalue equation.
fn verify_resolution(u: &ComplexMatrix, data: &SpectralData) -> Result<()> {
    let d = u.rows;
    let mut sum = ComplexMatrix::zeros(d, d);
    for (i, p) in data.projections.iter().enumerate() {
        let sa = p.sub(&p.adjoint()).max_norm();
        let idem = p.mul(p).sub(p).max_norm();
        if sa > CHECK_TOL || idem > CHECK_TOL {
            return Err(Error::HypothesisViolation(format!(
                "projection {i} fails self-adjoint idempotence: {sa:.3e}, {idem:.3e}"
            )));
        }
        for (j, q) in data.projections.iter().enumerate() {
            if i != j {
                let cross = p.mul(q).max_norm();
                if cross > CHECK_TOL {
                    return Err(Error::HypothesisViolation(format!(
                        "projections {i} and {j} are not orthogonal: {cross:.3e}"
                    )));
                }
            }
        }
        let ev = u
            .mul(p)
            .sub(&p.scale(data.eigenvalues[i]))
            .max_norm();
        if ev > CHECK_TOL {
            return Err(Error::HypothesisViolation(format!(
                "projection {i} fails the eigenvalue equation: {ev:.3e}"
            )));
        }
        sum = sum.add(p);
    }
    let complete = sum.sub(&ComplexMatrix::identity(d)).max_norm();
    if complete > CHECK_TOL {
        return Err(Error::HypothesisViolation(format!(
            "projections do not sum to the identity: {complete:.3e}"
        )));
    }
    let total: usize = data.multiplicities.iter().sum();
    if total != d {
        return Err(Error::HypothesisViolation(format!(
            "multiplicities sum to {total}, expected {d}"
        )));
    }
    Ok(())
}

/// The set of eigenvalue pairs resonating at exponents (k1, k2).
#[derive(Debug, Clone)]
pub struct PairSet {
    pub k1: i64,
    pub k2: i64,
    /// Pairs (v, w) with v^{k1}·w^{k2} = 1, in lexicographic order by
    /// (arg v, arg w).
    pub pairs: Vec<(Complex64, Complex64)>,
}

pub(crate) fn unimodular_pow(z: Complex64, k: i64) -> Complex64 {
    let theta = z.arg() * k as f64;
    Complex64::from_polar(1.0, theta)
}

/// Enumerate Σ(k1, k2): all spectrum pairs with |v^{k1}·w^{k2} − 1| within
/// the exponent-scaled tolerance.
pub fn pair_set(spec: &SpectralData, k1: i64, k2: i64) -> Result<PairSet> {
    if !admissible_pair(k1, k2) {
        return Err(Error::TrivialPair { k1, k2 });
    }
    let tol = pair_tol(k1, k2);
    let mut pairs = Vec::new();
    for &v in &spec.eigenvalues {
        for &w in &spec.eigenvalues {
            let product = unimodular_pow(v, k1) * unimodular_pow(w, k2);
            if (product - c64(1.0, 0.0)).norm() <= tol {
                pairs.push((v, w));
            }
        }
    }
    Ok(PairSet { k1, k2, pairs })
}

/// Projection onto the fixed space of U^{k1} ⊗ U^{k2}, assembled as
/// Σ_{(v,w)∈Σ(k1,k2)} E_v ⊗ E_w.
///
/// The same projection is recomputed from the kernel of U^{k1}⊗U^{k2} − I
/// and the two must agree; disagreement means the pair enumeration and the
/// direct kernel see different fixed spaces, which is reported as an error
/// rather than reconciled.
pub fn tensor_fixed_projection(spec: &SpectralData, k1: i64, k2: i64) -> Result<ComplexMatrix> {
    let pairs = pair_set(spec, k1, k2)?;
    let d = spec.dim();
    let mut assembled = ComplexMatrix::zeros(d * d, d * d);
    for &(v, w) in &pairs.pairs {
        let iv = spec.find(v, CLUSTER_TOL).expect("pair came from the spectrum");
        let iw = spec.find(w, CLUSTER_TOL).expect("pair came from the spectrum");
        assembled = assembled.add(&tensor(&spec.projections[iv], &spec.projections[iw]));
    }

    let u = spec.reassemble();
    let twisted = tensor(&u.unitary_pow(k1), &u.unitary_pow(k2));
    let shifted = twisted.sub(&ComplexMatrix::identity(d * d));
    // Anchor the kernel tolerance to ‖U^{k1}⊗U^{k2}‖_F = d, not to
    // ‖shifted‖_F: when the twisted power is the identity up to roundoff
    // the difference is pure noise and a relative threshold would reject
    // the genuine full kernel.
    let kernel = null_space_scaled(&shifted, RANK_TOL_REL, d as f64)?;
    let direct = kernel.mul(&kernel.adjoint());
    let gap = assembled.sub(&direct).max_norm();
    if gap > CHECK_TOL {
        return Err(Error::HypothesisViolation(format!(
            "tensor fixed-space routes disagree by {gap:.3e}"
        )));
    }
    Ok(assembled)
}

/// An eigenoperator solution together with a uniqueness marker.
#[derive(Debug, Clone)]
pub struct Eigenoperator {
    pub operator: ComplexMatrix,
    /// False when the solution space has dimension > 1 (non-ergodic case);
    /// the returned operator is then the canonical first solution.
    pub unique: bool,
}

/// All solutions of U A U† = v·A inside the span of `alg`, as an orthonormal
/// operator family (possibly empty).
pub fn eigenoperator_space(
    alg: &AlgebraBasis,
    u: &ComplexMatrix,
    v: Complex64,
) -> Result<Vec<ComplexMatrix>> {
    let n = alg.len();
    if n == 0 {
        return Ok(Vec::new());
    }
    // The conjugation map in algebra coordinates: C_{ij} = ⟨U B_j U†, B_i⟩.
    let mut c = ComplexMatrix::zeros(n, n);
    for (j, b) in alg.basis.iter().enumerate() {
        let moved = u.mul(b).mul(&u.adjoint());
        for (i, bi) in alg.basis.iter().enumerate() {
            c[(i, j)] = moved.frobenius_inner(bi);
        }
    }
    let shifted = c.sub(&ComplexMatrix::identity(n).scale(v));
    // C is the matrix of a unitary map on the algebra, so ‖C‖_F = √n is the
    // right anchor even when C − v·I degenerates to roundoff noise.
    let kernel = null_space_scaled(&shifted, RANK_TOL_REL, (n as f64).sqrt())?;
    let mut out = Vec::with_capacity(kernel.cols);
    for col in 0..kernel.cols {
        let mut a = ComplexMatrix::zeros(alg.ambient_dim, alg.ambient_dim);
        for (i, b) in alg.basis.iter().enumerate() {
            a = a.add(&b.scale(kernel[(i, col)]));
        }
        out.push(a);
    }
    Ok(out)
}

/// Canonical eigenoperator for eigenvalue `v` inside `alg`: a solution of
/// U A U† = v·A normalized so that ‖AΩ‖ = 1 and the first non-vanishing
/// coordinate of AΩ is real positive.
pub fn eigenoperator(
    alg: &AlgebraBasis,
    u: &ComplexMatrix,
    v: Complex64,
    omega: &ComplexMatrix,
) -> Result<Eigenoperator> {
    let space = eigenoperator_space(alg, u, v)?;
    if space.is_empty() {
        return Err(Error::NoEigenoperator {
            value: format!("{v}"),
        });
    }
    let unique = space.len() == 1;
    let mut chosen = None;
    for a in &space {
        if a.mul(omega).two_norm() > 1e-9 {
            chosen = Some(a.clone());
            break;
        }
    }
    let a = chosen.ok_or_else(|| Error::NoEigenoperator {
        value: format!("{v} (all solutions annihilate the state vector)"),
    })?;
    let image = a.mul(omega);
    let norm = image.two_norm();
    let mut a = a.scale(c64(1.0 / norm, 0.0));
    let image = a.mul(omega);
    for i in 0..image.rows {
        let coord = image[(i, 0)];
        if coord.norm() > 1e-12 {
            let phase = coord / coord.norm();
            a = a.scale(phase.conj());
            break;
        }
    }
    Ok(Eigenoperator {
        operator: a,
        unique,
    })
}

/// Result of the spectrum group-structure check.
#[derive(Debug, Clone)]
pub struct SpectrumGroupCheck {
    pub passed: bool,
    /// Elements whose inverse (or pairwise product, in the ergodic case) is
    /// missing from the spectrum.
    pub missing: Vec<Complex64>,
}

/// Closure of the spectrum under inversion, and under products when the
/// system is ergodic.
pub fn spectrum_group_check(spec: &SpectralData, ergodic: bool) -> SpectrumGroupCheck {
    let tol = pair_tol(1, 1);
    let mut missing = Vec::new();
    for &v in &spec.eigenvalues {
        if spec.find(v.conj(), tol).is_none() {
            missing.push(v.conj());
        }
    }
    if ergodic {
        for &v in &spec.eigenvalues {
            for &w in &spec.eigenvalues {
                let prod = v * w;
                if spec.find(prod / prod.norm(), tol).is_none() {
                    missing.push(prod);
                }
            }
        }
    }
    SpectrumGroupCheck {
        passed: missing.is_empty(),
        missing,
    }
}

/// Residual of the spectral symmetry J E_v = E_{v̄} J in the linear-factor
/// encoding: max over eigenvalues of ‖J_lin·conj(E_v) − E_{v̄}·J_lin‖_max.
pub fn j_spectrum_symmetry_residual(data: &ModularData, spec: &SpectralData) -> f64 {
    let tol = pair_tol(1, 1);
    let mut worst: f64 = 0.0;
    for (i, &v) in spec.eigenvalues.iter().enumerate() {
        let Some(j) = spec.find(v.conj(), tol) else {
            return f64::INFINITY;
        };
        let lhs = data.j_lin.mul(&spec.projections[i].conj());
        let rhs = spec.projections[j].mul(&data.j_lin);
        worst = worst.max(lhs.sub(&rhs).max_norm());
    }
    worst
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::{random_unitary, rot};
    use proptest::prelude::*;

    fn rot_spec(d: usize, p: usize) -> SpectralData {
        let sys = rot(d, p).unwrap();
        spectral_data(&sys.u).unwrap()
    }

    #[test]
    fn identity_has_single_eigenvalue() {
        let spec = spectral_data(&ComplexMatrix::identity(3)).unwrap();
        assert_eq!(spec.eigenvalues.len(), 1);
        assert!((spec.eigenvalues[0] - c64(1.0, 0.0)).norm() < 1e-12);
        assert!(spec.projections[0]
            .sub(&ComplexMatrix::identity(3))
            .max_norm()
            < 1e-12);
    }

    #[test]
    fn cyclic_shift_spectrum_is_fourth_roots_sorted_by_argument() {
        let spec = rot_spec(4, 1);
        let expected = [c64(1.0, 0.0), c64(0.0, 1.0), c64(-1.0, 0.0), c64(0.0, -1.0)];
        assert_eq!(spec.eigenvalues.len(), 4);
        for (got, want) in spec.eigenvalues.iter().zip(expected.iter()) {
            assert!((got - want).norm() < 1e-10);
        }
        assert!(spec.multiplicities.iter().all(|&m| m == 1));
    }

    #[test]
    fn two_step_shift_on_six_points_has_double_cube_roots() {
        let spec = rot_spec(6, 2);
        assert_eq!(spec.eigenvalues.len(), 3);
        assert_eq!(spec.multiplicities, vec![2, 2, 2]);
        let third = Complex64::from_polar(1.0, std::f64::consts::TAU / 3.0);
        assert!((spec.eigenvalues[1] - third).norm() < 1e-10);
    }

    #[test]
    fn pair_set_of_trivial_spectrum() {
        let spec = spectral_data(&ComplexMatrix::identity(2)).unwrap();
        let pairs = pair_set(&spec, 1, 2).unwrap();
        assert_eq!(pairs.pairs.len(), 1);
        assert!((pairs.pairs[0].0 - c64(1.0, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn pair_set_of_fourth_roots_at_one_two() {
        let spec = rot_spec(4, 1);
        let pairs = pair_set(&spec, 1, 2).unwrap();
        let got: Vec<(Complex64, Complex64)> = pairs.pairs.clone();
        // Lexicographic by (arg v, arg w): (1,1), (1,−1), (−1,i), (−1,−i).
        let want = [
            (c64(1.0, 0.0), c64(1.0, 0.0)),
            (c64(1.0, 0.0), c64(-1.0, 0.0)),
            (c64(-1.0, 0.0), c64(0.0, 1.0)),
            (c64(-1.0, 0.0), c64(0.0, -1.0)),
        ];
        assert_eq!(got.len(), want.len());
        for ((gv, gw), (wv, ww)) in got.iter().zip(want.iter()) {
            assert!((gv - wv).norm() < 1e-10);
            assert!((gw - ww).norm() < 1e-10);
        }
    }

    #[test]
    fn pair_set_diagonal_for_inverse_exponents() {
        let spec = rot_spec(4, 1);
        let pairs = pair_set(&spec, 1, -1).unwrap();
        assert_eq!(pairs.pairs.len(), 4);
        for &(v, w) in &pairs.pairs {
            assert!((v - w).norm() < 1e-10);
        }
    }

    #[test]
    fn degenerate_exponents_are_rejected() {
        let spec = rot_spec(4, 1);
        for (k1, k2) in [(0, 2), (2, 0), (3, 3)] {
            match pair_set(&spec, k1, k2) {
                Err(Error::TrivialPair { .. }) => {}
                other => panic!("expected TrivialPair, got {other:?}"),
            }
        }
    }

    #[test]
    fn tensor_fixed_projection_ranks() {
        let spec = rot_spec(4, 1);
        let p = tensor_fixed_projection(&spec, 1, -1).unwrap();
        assert!((p.trace().re - 4.0).abs() < 1e-8);
        let q = tensor_fixed_projection(&spec, 1, 2).unwrap();
        assert!((q.trace().re - 4.0).abs() < 1e-8);
    }

    #[test]
    fn tensor_fixed_projection_of_identity_dynamics() {
        let spec = spectral_data(&ComplexMatrix::identity(2)).unwrap();
        let p = tensor_fixed_projection(&spec, 1, 2).unwrap();
        assert!(p.sub(&ComplexMatrix::identity(4)).max_norm() < 1e-10);
    }

    #[test]
    fn eigenoperator_for_trivial_eigenvalue_is_identity() {
        let sys = rot(4, 1).unwrap();
        let alg = sys.algebra_m().unwrap();
        let result = eigenoperator(&alg, &sys.u, c64(1.0, 0.0), &sys.omega_vec).unwrap();
        assert!(result.unique);
        assert!(result
            .operator
            .sub(&ComplexMatrix::identity(4))
            .max_norm()
            < 1e-9);
    }

    #[test]
    fn eigenoperator_for_quarter_turn_is_conjugate_powers() {
        let sys = rot(4, 1).unwrap();
        let alg = sys.algebra_m().unwrap();
        let result = eigenoperator(&alg, &sys.u, c64(0.0, 1.0), &sys.omega_vec).unwrap();
        assert!(result.unique);
        let want = ComplexMatrix::from_diag(&[
            c64(1.0, 0.0),
            c64(0.0, -1.0),
            c64(-1.0, 0.0),
            c64(0.0, 1.0),
        ]);
        assert!(result.operator.sub(&want).max_norm() < 1e-9);
    }

    #[test]
    fn eigenoperator_outside_spectrum_fails() {
        let sys = rot(4, 1).unwrap();
        let alg = sys.algebra_m().unwrap();
        let v = Complex64::from_polar(1.0, std::f64::consts::PI / 3.0);
        match eigenoperator(&alg, &sys.u, v, &sys.omega_vec) {
            Err(Error::NoEigenoperator { .. }) => {}
            other => panic!("expected NoEigenoperator, got {other:?}"),
        }
    }

    #[test]
    fn spectrum_group_check_on_roots_of_unity() {
        let spec = rot_spec(4, 1);
        assert!(spectrum_group_check(&spec, true).passed);
        let spec6 = rot_spec(6, 2);
        assert!(spectrum_group_check(&spec6, true).passed);
    }

    #[test]
    fn tensor_fixed_projection_handles_powers_that_return_to_identity() {
        // U has period 2, so U^{-4}⊗U^{-2} = I. The reassembled unitary
        // carries roundoff, so the kernel computation must not anchor its
        // threshold to the near-zero difference.
        let sys = crate::models::rot(2, 1).unwrap();
        let spec = spectral_data(&sys.u).unwrap();
        let proj = tensor_fixed_projection(&spec, -4, -2).unwrap();
        let gap = proj.sub(&ComplexMatrix::identity(4)).max_norm();
        assert!(gap < 1e-10, "projection should be the identity, gap {gap:.3e}");
    }

    #[test]
    fn spectrum_group_check_catches_missing_inverse() {
        let spec = SpectralData {
            eigenvalues: vec![c64(1.0, 0.0), c64(0.0, 1.0)],
            projections: vec![ComplexMatrix::identity(1), ComplexMatrix::identity(1)],
            multiplicities: vec![1, 1],
        };
        let check = spectrum_group_check(&spec, false);
        assert!(!check.passed);
        assert_eq!(check.missing.len(), 1);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(16))]

        #[test]
        fn random_unitary_resolution_is_complete(seed in 0u64..1000) {
            let u = random_unitary(5, seed);
            let spec = spectral_data(&u).unwrap();
            let total: usize = spec.multiplicities.iter().sum();
            prop_assert_eq!(total, 5);
            prop_assert!(spec.reassemble().sub(&u).max_norm() < 1e-8);
        }

        #[test]
        fn pair_members_satisfy_the_phase_equation(seed in 0u64..200, k1 in -3i64..4, k2 in -3i64..4) {
            prop_assume!(admissible_pair(k1, k2));
            let u = random_unitary(4, seed);
            let spec = spectral_data(&u).unwrap();
            let pairs = pair_set(&spec, k1, k2).unwrap();
            for &(v, w) in &pairs.pairs {
                let prod = unimodular_pow(v, k1) * unimodular_pow(w, k2);
                prop_assert!((prod - c64(1.0, 0.0)).norm() <= pair_tol(k1, k2) * 1.001);
            }
        }
    }
}
