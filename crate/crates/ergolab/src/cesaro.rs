//! Cesàro means of twisted operator products and their explicit limits.
//!
//! For a dynamical system with unitary U and an exponent pair (k1, k2) with
//! k1 ≠ 0, k2 ≠ 0, k1 ≠ k2, the object of study is the operator average
//!
//! ```text
//! A_N(X) = (1/N) Σ_{n=0}^{N−1} U^{n·k1} X U^{n·(k2−k1)}.
//! ```
//!
//! At finite dimension the strong limit always exists and equals the
//! resonance sum Σ E_v X E_w over spectrum pairs with v^{k1}·w^{k2−k1} = 1
//! ([`s_compact`]).  When the dynamics is ergodic for the step k2−k1 and the
//! state vector is separating, the limit acquires a second, structured form:
//! a partial isometry V : H⊗H → H assembled from eigenoperator pairs
//! ([`limit_bundle`]), with A_N(X) → V(XΩ ⊗ ·) for every X in the span of
//! M and M′.  Three-point correlations
//!
//! ```text
//! (1/N) Σ_{n=0}^{N−1} ω(A₀ · α^{n·k1}(A₁) · α^{n·k2}(A₂))
//! ```
//!
//! reduce to the same machinery through the vector identity
//! ω(A₀ α^{n·k1}(A₁) α^{n·k2}(A₂)) = ⟨U^{n·k1} A₁ U^{n·(k2−k1)} A₂Ω, A₀†Ω⟩
//! ([`three_point`], [`LimitBundle::three_point_limit`]).

use num_complex::Complex64;

use crate::algebra::AlgebraBasis;
use crate::error::{Error, Result};
use crate::linalg::{c64, operator_norm, pair_tol, tensor, ComplexMatrix, CHECK_TOL, CLUSTER_TOL};
use crate::spectral::{
    admissible_pair, eigenoperator, pair_set, spectral_data, tensor_fixed_projection,
    unimodular_pow, PairSet, SpectralData,
};
use crate::system::{DynamicalSystem, ModularData};

/// The Cesàro mean (1/N) Σ_{n=0}^{N−1} U^{n·k1} X U^{n·(k2−k1)}, computed
/// with two running unitary powers and one accumulator.
pub fn cesaro_mean(
    sys: &DynamicalSystem,
    x: &ComplexMatrix,
    k1: i64,
    k2: i64,
    n: usize,
) -> Result<ComplexMatrix> {
    if !admissible_pair(k1, k2) {
        return Err(Error::TrivialPair { k1, k2 });
    }
    if n == 0 {
        return Err(Error::ConfigError("mean over an empty range".into()));
    }
    let d = sys.dim;
    if x.rows != d || x.cols != d {
        return Err(Error::ConfigError(format!(
            "operator must be {d}x{d}, got {}x{}",
            x.rows, x.cols
        )));
    }
    let step_left = sys.u.unitary_pow(k1);
    let step_right = sys.u.unitary_pow(k2 - k1);
    let mut left = ComplexMatrix::identity(d);
    let mut right = ComplexMatrix::identity(d);
    let mut acc = ComplexMatrix::zeros(d, d);
    for _ in 0..n {
        acc = acc.add(&left.mul(x).mul(&right));
        left = left.mul(&step_left);
        right = right.mul(&step_right);
    }
    Ok(acc.scale(c64(1.0 / n as f64, 0.0)))
}

/// The resonance sum S(A) = Σ E_v A E_w over all spectrum pairs with
/// v^{k1}·w^{k2−k1} = 1, the strong limit of the Cesàro means of A at
/// finite dimension.
///
/// The norm bound ‖S(A)‖ ≤ √|k2−k1|·‖A‖ is checked on the result; whether
/// the sharper ‖S(A)‖ ≤ ‖A‖ holds is left to the caller to measure.
pub fn s_compact(
    spec: &SpectralData,
    a: &ComplexMatrix,
    k1: i64,
    k2: i64,
) -> Result<ComplexMatrix> {
    if !admissible_pair(k1, k2) {
        return Err(Error::TrivialPair { k1, k2 });
    }
    let d = spec.dim();
    if a.rows != d || a.cols != d {
        return Err(Error::ConfigError(format!(
            "operator must be {d}x{d}, got {}x{}",
            a.rows, a.cols
        )));
    }
    let mid = k2 - k1;
    let tol = pair_tol(k1, mid);
    let mut sum = ComplexMatrix::zeros(d, d);
    for (i, &v) in spec.eigenvalues.iter().enumerate() {
        let va = spec.projections[i].mul(a);
        for (j, &w) in spec.eigenvalues.iter().enumerate() {
            let product = unimodular_pow(v, k1) * unimodular_pow(w, mid);
            if (product - c64(1.0, 0.0)).norm() <= tol {
                sum = sum.add(&va.mul(&spec.projections[j]));
            }
        }
    }
    let bound = (mid.unsigned_abs() as f64).sqrt() * operator_norm(a) + CHECK_TOL;
    let got = operator_norm(&sum);
    if got > bound {
        return Err(Error::HypothesisViolation(format!(
            "resonance sum norm {got:.6e} exceeds the bound {bound:.6e}"
        )));
    }
    Ok(sum)
}

/// One rank-one summand of the limit partial isometry: the pair (v, w) and
/// the indices of its eigenoperators in [`LimitBundle::v_ops`] and
/// [`LimitBundle::w_ops`].
#[derive(Debug, Clone)]
pub struct BundleTerm {
    pub v: Complex64,
    pub w: Complex64,
    pub v_op: usize,
    pub w_op: usize,
}

/// The explicit limit of the Cesàro means on an ergodic separating system:
/// eigenoperator pairs and the partial isometry V : H⊗H → H they assemble,
///
/// ```text
/// V = Σ_s (V_{v_s} W_{w_s} Ω) · (V_{v_s}Ω ⊗ W_{w_s}Ω)†,
/// ```
///
/// summed over the spectrum pairs (v_s, w_s) with v_s^{k1}·w_s^{k2} = 1.
/// For X ∈ M + M′ the mean A_N(X) converges strongly to ξ ↦ V(XΩ ⊗ ξ).
#[derive(Debug, Clone)]
pub struct LimitBundle {
    pub k1: i64,
    pub k2: i64,
    pub dim: usize,
    pub pairs: PairSet,
    /// Canonical eigenoperators V_v ∈ M, keyed by eigenvalue.
    pub v_ops: Vec<(Complex64, ComplexMatrix)>,
    /// Canonical eigenoperators W_w ∈ M′, keyed by eigenvalue.
    pub w_ops: Vec<(Complex64, ComplexMatrix)>,
    /// One entry per accumulated pair.
    pub terms: Vec<BundleTerm>,
    /// Pairs dropped because one side has no eigenoperator.
    pub skipped: Vec<(Complex64, Complex64)>,
    /// The assembled dim × dim² matrix.
    pub v_big: ComplexMatrix,
    omega: ComplexMatrix,
    m_basis: AlgebraBasis,
    x0_basis: AlgebraBasis,
}

fn solve_into(
    ops: &mut Vec<(Complex64, ComplexMatrix)>,
    alg: &AlgebraBasis,
    u: &ComplexMatrix,
    value: Complex64,
    omega: &ComplexMatrix,
    side: &str,
) -> Result<Option<usize>> {
    if let Some(i) = ops.iter().position(|(key, _)| (*key - value).norm() <= CLUSTER_TOL) {
        return Ok(Some(i));
    }
    match eigenoperator(alg, u, value, omega) {
        Ok(e) => {
            if !e.unique {
                return Err(Error::HypothesisViolation(format!(
                    "eigenoperator for {value} in {side} is not unique; the state \
                     vector may fail cyclicity or the clustering tolerance is off"
                )));
            }
            ops.push((value, e.operator));
            Ok(Some(ops.len() - 1))
        }
        Err(Error::NoEigenoperator { .. }) => Ok(None),
        Err(e) => Err(e),
    }
}

/// Assemble the limit partial isometry for the exponent pair (k1, k2).
///
/// Requires the dynamics to be ergodic for the step k2−k1 and the state
/// vector to be separating; systems failing either belong to the
/// decomposition route instead.
pub fn limit_bundle(sys: &DynamicalSystem, k1: i64, k2: i64) -> Result<LimitBundle> {
    if !admissible_pair(k1, k2) {
        return Err(Error::TrivialPair { k1, k2 });
    }
    if !sys.is_separating()? {
        return Err(Error::HypothesisViolation(format!(
            "state vector of {} is not separating; use the block decomposition",
            sys.label
        )));
    }
    let step = k2 - k1;
    if !sys.is_ergodic_for(step)? {
        return Err(Error::HypothesisViolation(format!(
            "{} is not ergodic for step {step}; use the block decomposition",
            sys.label
        )));
    }

    let spec = spectral_data(&sys.u)?;
    let pairs = pair_set(&spec, k1, k2)?;
    let m = sys.algebra_m()?;
    let mp = sys.commutant_m()?;
    let d = sys.dim;

    let mut v_ops: Vec<(Complex64, ComplexMatrix)> = Vec::new();
    let mut w_ops: Vec<(Complex64, ComplexMatrix)> = Vec::new();
    let mut terms = Vec::new();
    let mut skipped = Vec::new();
    let mut v_big = ComplexMatrix::zeros(d, d * d);

    for &(v, w) in &pairs.pairs {
        let iv = solve_into(&mut v_ops, &m, &sys.u, v, &sys.omega_vec, "M")?;
        let iw = solve_into(&mut w_ops, &mp, &sys.u, w, &sys.omega_vec, "M'")?;
        let (Some(iv), Some(iw)) = (iv, iw) else {
            skipped.push((v, w));
            continue;
        };
        let v_omega = v_ops[iv].1.mul(&sys.omega_vec);
        let w_omega = w_ops[iw].1.mul(&sys.omega_vec);
        let image = v_ops[iv].1.mul(&w_omega);
        let source = tensor(&v_omega, &w_omega);
        v_big = v_big.add(&image.mul(&source.adjoint()));
        terms.push(BundleTerm {
            v,
            w,
            v_op: iv,
            w_op: iw,
        });
    }

    let mut joint = m.basis.clone();
    joint.extend(mp.basis.iter().cloned());
    let x0_basis = AlgebraBasis::from_span(&joint, d);

    Ok(LimitBundle {
        k1,
        k2,
        dim: d,
        pairs,
        v_ops,
        w_ops,
        terms,
        skipped,
        v_big,
        omega: sys.omega_vec.clone(),
        m_basis: m,
        x0_basis,
    })
}

impl LimitBundle {
    /// Apply V to a vector of H⊗H.
    pub fn apply(&self, zeta: &ComplexMatrix) -> ComplexMatrix {
        self.v_big.mul(zeta)
    }

    /// The limit operator ξ ↦ V(XΩ ⊗ ξ) of the Cesàro means of X.
    ///
    /// X must lie in the span of M ∪ M′; the convergence statement does not
    /// extend beyond it, so membership failures are refused rather than
    /// extrapolated.
    pub fn limit_operator(&self, x: &ComplexMatrix) -> Result<ComplexMatrix> {
        let d = self.dim;
        if x.rows != d || x.cols != d {
            return Err(Error::ConfigError(format!(
                "operator must be {d}x{d}, got {}x{}",
                x.rows, x.cols
            )));
        }
        let residual = self.x0_basis.membership_residual(x);
        let tol = CHECK_TOL * (1.0 + x.frobenius_norm());
        if residual > tol {
            return Err(Error::NotInSpan { residual, tol });
        }
        let x_omega = x.mul(&self.omega);
        Ok(self
            .v_big
            .mul(&tensor(&x_omega, &ComplexMatrix::identity(d))))
    }

    /// The limiting three-point correlation ⟨V(A₁Ω ⊗ A₂Ω), A₀†Ω⟩.
    ///
    /// A₁ must lie in M.
    pub fn three_point_limit(
        &self,
        a0: &ComplexMatrix,
        a1: &ComplexMatrix,
        a2: &ComplexMatrix,
    ) -> Result<Complex64> {
        let residual = self.m_basis.membership_residual(a1);
        let tol = CHECK_TOL * (1.0 + a1.frobenius_norm());
        if residual > tol {
            return Err(Error::NotInSpan { residual, tol });
        }
        let source = tensor(&a1.mul(&self.omega), &a2.mul(&self.omega));
        let image = self.v_big.mul(&source);
        Ok(image.frobenius_inner(&a0.adjoint().mul(&self.omega)))
    }

    /// Residuals of the partial-isometry identities: how far V·V† is from
    /// being a projection, and the gap between V†·V and the fixed-space
    /// projection of U^{k1} ⊗ U^{k2}.
    pub fn partial_isometry_residuals(&self, spec: &SpectralData) -> Result<(f64, f64)> {
        let range = self.v_big.mul(&self.v_big.adjoint());
        let projection_residual = range
            .mul(&range)
            .sub(&range)
            .max_norm()
            .max(range.sub(&range.adjoint()).max_norm());
        let support = self.v_big.adjoint().mul(&self.v_big);
        let fixed = tensor_fixed_projection(spec, self.k1, self.k2)?;
        Ok((projection_residual, support.sub(&fixed).max_norm()))
    }

    /// Residual of the conjugation intertwining J∘V = V∘(J⊗J), compared
    /// through the linear parts of both antilinear maps.
    pub fn tomita_intertwining_residual(&self, data: &ModularData) -> f64 {
        let lhs = data.j_lin.mul(&self.v_big.conj());
        let rhs = self.v_big.mul(&tensor(&data.j_lin, &data.j_lin));
        lhs.sub(&rhs).max_norm()
    }
}

/// The three-point Cesàro average
/// (1/N) Σ_{n=0}^{N−1} ω(A₀ · α^{n·k1}(A₁) · α^{n·k2}(A₂)),
/// evaluated through the vector form ⟨A₁ · U^{n·(k2−k1)} A₂Ω, U^{−n·k1} A₀†Ω⟩
/// at one matrix-vector cost per step.
pub fn three_point(
    sys: &DynamicalSystem,
    a0: &ComplexMatrix,
    a1: &ComplexMatrix,
    a2: &ComplexMatrix,
    k1: i64,
    k2: i64,
    n: usize,
) -> Result<Complex64> {
    if n == 0 {
        return Err(Error::ConfigError("mean over an empty range".into()));
    }
    let d = sys.dim;
    for (name, a) in [("A0", a0), ("A1", a1), ("A2", a2)] {
        if a.rows != d || a.cols != d {
            return Err(Error::ConfigError(format!(
                "{name} must be {d}x{d}, got {}x{}",
                a.rows, a.cols
            )));
        }
    }
    let step_mid = sys.u.unitary_pow(k2 - k1);
    let step_back = sys.u.unitary_pow(-k1);
    let mut xi = a2.mul(&sys.omega_vec);
    let mut eta = a0.adjoint().mul(&sys.omega_vec);
    let mut acc = c64(0.0, 0.0);
    for _ in 0..n {
        acc += a1.mul(&xi).frobenius_inner(&eta);
        xi = step_mid.mul(&xi);
        eta = step_back.mul(&eta);
    }
    Ok(acc / n as f64)
}

/// Deviations ‖A_N(X)ξ − limit·ξ‖ recorded over a grid of mean lengths.
#[derive(Debug, Clone)]
pub struct ConvergenceTrace {
    pub n_values: Vec<usize>,
    pub deviations: Vec<f64>,
    pub x_label: String,
    pub xi_label: String,
}

impl ConvergenceTrace {
    /// CSV rendering with header `N,deviation` and 17 significant digits.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("N,deviation\n");
        for (n, dev) in self.n_values.iter().zip(&self.deviations) {
            out.push_str(&format!("{n},{dev:.16e}\n"));
        }
        out
    }

    pub fn write_csv(&self, path: &std::path::Path) -> Result<()> {
        std::fs::write(path, self.to_csv())
            .map_err(|e| Error::ConfigError(format!("cannot write {}: {e}", path.display())))
    }
}

/// Track the convergence A_N(X)ξ → S(X)ξ over the given mean lengths,
/// which must be strictly increasing.  The limit is the resonance sum, so
/// no ergodicity hypothesis is needed.
pub fn convergence_trace(
    sys: &DynamicalSystem,
    x: &ComplexMatrix,
    xi: &ComplexMatrix,
    k1: i64,
    k2: i64,
    n_values: &[usize],
    x_label: impl Into<String>,
    xi_label: impl Into<String>,
) -> Result<ConvergenceTrace> {
    if n_values.is_empty() {
        return Err(Error::ConfigError("no mean lengths given".into()));
    }
    if n_values[0] == 0 || n_values.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::ConfigError(
            "mean lengths must be positive and strictly increasing".into(),
        ));
    }
    let d = sys.dim;
    if xi.rows != d || xi.cols != 1 {
        return Err(Error::ConfigError(format!(
            "probe vector must be {d}x1, got {}x{}",
            xi.rows, xi.cols
        )));
    }
    let spec = spectral_data(&sys.u)?;
    let limit_xi = s_compact(&spec, x, k1, k2)?.mul(xi);

    let step_left = sys.u.unitary_pow(k1);
    let step_mid = sys.u.unitary_pow(k2 - k1);
    let mut left = ComplexMatrix::identity(d);
    let mut moved = xi.clone();
    let mut partial = ComplexMatrix::zeros(d, 1);
    let mut deviations = Vec::with_capacity(n_values.len());
    let mut count = 0usize;
    for &target in n_values {
        while count < target {
            partial = partial.add(&left.mul(&x.mul(&moved)));
            left = left.mul(&step_left);
            moved = step_mid.mul(&moved);
            count += 1;
        }
        let mean = partial.scale(c64(1.0 / target as f64, 0.0));
        deviations.push(mean.sub(&limit_xi).two_norm());
    }
    Ok(ConvergenceTrace {
        n_values: n_values.to_vec(),
        deviations,
        x_label: x_label.into(),
        xi_label: xi_label.into(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::{left_mult, rot, tracial};
    use proptest::prelude::*;

    fn indicator(d: usize, points: &[usize]) -> ComplexMatrix {
        ComplexMatrix::from_fn(d, d, |i, j| {
            if i == j && points.contains(&i) {
                c64(1.0, 0.0)
            } else {
                c64(0.0, 0.0)
            }
        })
    }

    fn probe_matrix(d: usize) -> ComplexMatrix {
        ComplexMatrix::from_fn(d, d, |i, j| {
            c64(
                ((3 * i + 5 * j + 1) as f64).sin(),
                ((2 * i + 7 * j) as f64).cos(),
            )
        })
    }

    fn state(sys: &DynamicalSystem, a: &ComplexMatrix) -> Complex64 {
        a.mul(&sys.omega_vec).frobenius_inner(&sys.omega_vec)
    }

    #[test]
    fn trivial_pairs_are_rejected() {
        let sys = rot(4, 1).unwrap();
        let x = indicator(4, &[0]);
        for (k1, k2) in [(0, 2), (2, 0), (3, 3)] {
            assert!(matches!(
                cesaro_mean(&sys, &x, k1, k2, 5),
                Err(Error::TrivialPair { .. })
            ));
            assert!(matches!(
                limit_bundle(&sys, k1, k2),
                Err(Error::TrivialPair { .. })
            ));
        }
    }

    #[test]
    fn mean_of_identity_fixes_the_state_vector() {
        for sys in [rot(5, 1).unwrap(), tracial(2, &ComplexMatrix::identity(2)).unwrap()] {
            let id = ComplexMatrix::identity(sys.dim);
            for n in [1, 3, 17] {
                let mean = cesaro_mean(&sys, &id, 1, 2, n).unwrap();
                let moved = mean.mul(&sys.omega_vec);
                assert!(moved.sub(&sys.omega_vec).two_norm() < 1e-13);
            }
        }
    }

    #[test]
    fn rotation_means_collapse_at_the_period() {
        let sys = rot(4, 1).unwrap();
        let x = probe_matrix(4);
        let a4 = cesaro_mean(&sys, &x, 1, 2, 4).unwrap();
        let a8 = cesaro_mean(&sys, &x, 1, 2, 8).unwrap();
        let a400 = cesaro_mean(&sys, &x, 1, 2, 400).unwrap();
        assert!(a4.sub(&a8).max_norm() < 1e-12);
        assert!(a4.sub(&a400).max_norm() < 1e-12);
        let spec = spectral_data(&sys.u).unwrap();
        let limit = s_compact(&spec, &x, 1, 2).unwrap();
        assert!(a4.sub(&limit).max_norm() < 1e-10);
    }

    #[test]
    fn resonance_sum_for_trivial_dynamics_is_the_identity_map() {
        let spec = spectral_data(&ComplexMatrix::identity(3)).unwrap();
        let a = probe_matrix(3);
        let s = s_compact(&spec, &a, 1, 2).unwrap();
        assert!(s.sub(&a).max_norm() < 1e-12);
    }

    #[test]
    fn resonance_sum_matches_long_means_off_the_joint_span() {
        let sys = rot(4, 1).unwrap();
        let shift = ComplexMatrix::from_fn(4, 4, |i, j| {
            if (j + 1) % 4 == i {
                c64(1.0, 0.0)
            } else {
                c64(0.0, 0.0)
            }
        });
        let spec = spectral_data(&sys.u).unwrap();
        let s = s_compact(&spec, &shift, 1, 2).unwrap();
        let mean = cesaro_mean(&sys, &shift, 1, 2, 400).unwrap();
        assert!(s.sub(&mean).max_norm() < 1e-8);
        assert!(operator_norm(&s) <= operator_norm(&shift) + 1e-10);
    }

    #[test]
    fn bundle_on_the_four_point_rotation() {
        let sys = rot(4, 1).unwrap();
        let bundle = limit_bundle(&sys, 1, 2).unwrap();
        assert_eq!(bundle.terms.len(), 4);
        assert!(bundle.skipped.is_empty());

        let range = bundle.v_big.mul(&bundle.v_big.adjoint());
        assert!(range.sub(&ComplexMatrix::identity(4)).max_norm() < 1e-10);

        let omega2 = tensor(&sys.omega_vec, &sys.omega_vec);
        let back = bundle.apply(&omega2);
        assert!(back.sub(&sys.omega_vec).two_norm() < 1e-10);
    }

    #[test]
    fn bundle_gates_on_ergodicity_and_separation() {
        let sys = rot(4, 2).unwrap();
        assert!(matches!(
            limit_bundle(&sys, 1, 2),
            Err(Error::HypothesisViolation(_))
        ));
        let sys = rot(4, 1).unwrap();
        assert!(matches!(
            limit_bundle(&sys, 1, 3),
            Err(Error::HypothesisViolation(_))
        ));
        let sys = tracial(2, &ComplexMatrix::identity(2)).unwrap();
        assert!(matches!(
            limit_bundle(&sys, 1, 2),
            Err(Error::HypothesisViolation(_))
        ));
        let sys = crate::models::ce(3).unwrap();
        assert!(matches!(
            limit_bundle(&sys, 1, 2),
            Err(Error::HypothesisViolation(_))
        ));
    }

    #[test]
    fn partial_isometry_identities_on_rotations() {
        for (d, k1, k2) in [(5, 1, 2), (5, 2, 3), (5, -1, 2), (4, 1, 2), (7, 2, 5)] {
            let sys = rot(d, 1).unwrap();
            let bundle = limit_bundle(&sys, k1, k2).unwrap();
            let spec = spectral_data(&sys.u).unwrap();
            let (proj, defect) = bundle.partial_isometry_residuals(&spec).unwrap();
            assert!(proj < 1e-10, "projection residual {proj} at d={d}");
            assert!(defect < 1e-10, "fixed-space defect {defect} at d={d}");
        }
    }

    #[test]
    fn conjugation_intertwines_the_bundle() {
        for (d, k1, k2) in [(4, 1, 2), (5, 2, 3)] {
            let sys = rot(d, 1).unwrap();
            let bundle = limit_bundle(&sys, k1, k2).unwrap();
            let data = crate::system::modular_pair(&sys).unwrap();
            let residual = bundle.tomita_intertwining_residual(&data);
            assert!(residual < 1e-10, "intertwining residual {residual}");
        }
    }

    #[test]
    fn limit_operator_agrees_with_exact_period_mean_and_resonance_sum() {
        let sys = rot(4, 1).unwrap();
        let bundle = limit_bundle(&sys, 1, 2).unwrap();
        let x = indicator(4, &[0]);
        let limit = bundle.limit_operator(&x).unwrap();
        let mean = cesaro_mean(&sys, &x, 1, 2, 4).unwrap();
        assert!(limit.sub(&mean).max_norm() < 1e-10);
        let spec = spectral_data(&sys.u).unwrap();
        let s = s_compact(&spec, &x, 1, 2).unwrap();
        assert!(limit.sub(&s).max_norm() < 1e-10);
        assert!(operator_norm(&limit) <= operator_norm(&x) + 1e-10);
    }

    #[test]
    fn limit_operator_refuses_operators_off_the_joint_span() {
        let sys = rot(4, 1).unwrap();
        let bundle = limit_bundle(&sys, 1, 2).unwrap();
        let mut x = ComplexMatrix::zeros(4, 4);
        x[(0, 1)] = c64(1.0, 0.0);
        x[(1, 0)] = c64(1.0, 0.0);
        assert!(matches!(
            bundle.limit_operator(&x),
            Err(Error::NotInSpan { .. })
        ));
        assert!(matches!(
            bundle.three_point_limit(&x, &x, &x),
            Err(Error::NotInSpan { .. })
        ));
    }

    #[test]
    fn limit_operator_of_identity_fixes_the_state_vector() {
        let sys = rot(5, 1).unwrap();
        let bundle = limit_bundle(&sys, 1, 2).unwrap();
        let id = ComplexMatrix::identity(5);
        let limit = bundle.limit_operator(&id).unwrap();
        let moved = limit.mul(&sys.omega_vec);
        assert!(moved.sub(&sys.omega_vec).two_norm() < 1e-10);
    }

    #[test]
    fn commutant_side_is_carried_by_conjugation() {
        let sys = rot(5, 1).unwrap();
        let bundle = limit_bundle(&sys, 1, 2).unwrap();
        let data = crate::system::modular_pair(&sys).unwrap();
        let x = ComplexMatrix::from_diag(&[
            c64(0.3, 0.7),
            c64(-1.1, 0.2),
            c64(0.0, -0.9),
            c64(0.5, 0.0),
            c64(-0.2, 0.4),
        ]);
        let lhs = bundle.limit_operator(&x).unwrap();
        let inner = bundle.limit_operator(&data.conjugate_operator(&x)).unwrap();
        let rhs = data.j_lin.mul(&inner.conj()).mul(&data.j_lin.conj());
        assert!(lhs.sub(&rhs).max_norm() < 1e-8);
    }

    #[test]
    fn three_point_with_trivial_outer_factors_is_the_state() {
        let sys = rot(5, 1).unwrap();
        let a0 = indicator(5, &[0, 2]);
        let id = ComplexMatrix::identity(5);
        for n in [1, 2, 9] {
            let value = three_point(&sys, &a0, &id, &id, 1, 2, n).unwrap();
            assert!((value - state(&sys, &a0)).norm() < 1e-13);
        }
    }

    #[test]
    fn three_point_frozen_value_on_the_four_point_rotation() {
        let sys = rot(4, 1).unwrap();
        let a = indicator(4, &[0]);
        let mean = three_point(&sys, &a, &a, &a, 1, 2, 4).unwrap();
        assert!((mean - c64(1.0 / 16.0, 0.0)).norm() < 1e-13);
        let bundle = limit_bundle(&sys, 1, 2).unwrap();
        let limit = bundle.three_point_limit(&a, &a, &a).unwrap();
        assert!((limit - c64(1.0 / 16.0, 0.0)).norm() < 1e-10);
    }

    #[test]
    fn three_point_matches_brute_force_orbit_average() {
        let sys = rot(6, 1).unwrap();
        let a0 = indicator(6, &[0, 1]);
        let a1 = indicator(6, &[2]);
        let a2 = indicator(6, &[3, 5]);
        let mut brute = c64(0.0, 0.0);
        for n in 0..6i64 {
            let alpha1 = sys.u.unitary_pow(n).mul(&a1).mul(&sys.u.unitary_pow(-n));
            let alpha2 = sys
                .u
                .unitary_pow(2 * n)
                .mul(&a2)
                .mul(&sys.u.unitary_pow(-2 * n));
            brute += state(&sys, &a0.mul(&alpha1).mul(&alpha2));
        }
        brute /= 6.0;
        let fast = three_point(&sys, &a0, &a1, &a2, 1, 2, 6).unwrap();
        assert!((fast - brute).norm() < 1e-12);
        let bundle = limit_bundle(&sys, 1, 2).unwrap();
        let limit = bundle.three_point_limit(&a0, &a1, &a2).unwrap();
        assert!((limit - brute).norm() < 1e-10);
    }

    #[test]
    fn three_point_limit_degenerates_to_a_product_of_states() {
        let sys = rot(5, 1).unwrap();
        let bundle = limit_bundle(&sys, 1, 2).unwrap();
        let a0 = ComplexMatrix::from_diag(&[
            c64(0.2, 0.0),
            c64(-0.4, 0.3),
            c64(1.0, -0.1),
            c64(0.0, 0.8),
            c64(0.6, 0.0),
        ]);
        let a2 = ComplexMatrix::from_diag(&[
            c64(-0.7, 0.2),
            c64(0.1, 0.0),
            c64(0.3, 0.9),
            c64(1.2, 0.0),
            c64(0.0, -0.5),
        ]);
        let id = ComplexMatrix::identity(5);
        let limit = bundle.three_point_limit(&a0, &id, &a2).unwrap();
        let product = state(&sys, &a0) * state(&sys, &a2);
        assert!((limit - product).norm() < 1e-9);
    }

    #[test]
    fn trace_vanishes_on_the_rotation_grid() {
        let sys = rot(4, 1).unwrap();
        let x = indicator(4, &[0]);
        let xi = ComplexMatrix::basis_vector(4, 0);
        let trace = convergence_trace(&sys, &x, &xi, 1, 2, &[4, 8, 400], "1_{0}", "e0").unwrap();
        assert_eq!(trace.n_values, vec![4, 8, 400]);
        for dev in &trace.deviations {
            assert!(*dev < 1e-10);
        }
    }

    #[test]
    fn trace_decays_like_one_over_n_for_an_irrational_phase() {
        let u = ComplexMatrix::from_diag(&[c64(1.0, 0.0), Complex64::from_polar(1.0, 0.9)]);
        let sys = tracial(2, &u).unwrap();
        let mut e12 = ComplexMatrix::zeros(2, 2);
        e12[(0, 1)] = c64(1.0, 0.0);
        let x = left_mult(&e12);
        let trace = convergence_trace(
            &sys,
            &x,
            &sys.omega_vec,
            1,
            2,
            &[100, 1000, 10000],
            "E12 (left)",
            "state vector",
        )
        .unwrap();
        let scaled: Vec<f64> = trace
            .n_values
            .iter()
            .zip(&trace.deviations)
            .map(|(n, d)| *n as f64 * d)
            .collect();
        for pair in scaled.windows(2) {
            let ratio = pair[1] / pair[0];
            assert!(
                (1.0 / 3.0..=3.0).contains(&ratio),
                "scaled deviations {scaled:?}"
            );
        }
    }

    #[test]
    fn trace_rejects_bad_grids() {
        let sys = rot(4, 1).unwrap();
        let x = indicator(4, &[0]);
        let xi = ComplexMatrix::basis_vector(4, 0);
        for grid in [vec![], vec![0, 4], vec![4, 4], vec![8, 4]] {
            assert!(matches!(
                convergence_trace(&sys, &x, &xi, 1, 2, &grid, "x", "xi"),
                Err(Error::ConfigError(_))
            ));
        }
    }

    #[test]
    fn trace_csv_shape() {
        let trace = ConvergenceTrace {
            n_values: vec![2, 10],
            deviations: vec![0.5, 0.0625],
            x_label: "x".into(),
            xi_label: "xi".into(),
        };
        let csv = trace.to_csv();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], "N,deviation");
        assert_eq!(lines[1], "2,5.0000000000000000e-1");
        assert_eq!(lines[2], "10,6.2500000000000000e-2");
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(16))]

        #[test]
        fn means_are_contractive(seed in 0u64..500, n in 1usize..30) {
            let sys = rot(5, 1).unwrap();
            let x = crate::models::random_unitary(5, seed).scale(c64(1.7, 0.0));
            let mean = cesaro_mean(&sys, &x, 1, 2, n).unwrap();
            prop_assert!(operator_norm(&mean) <= operator_norm(&x) + 1e-9);
        }

        #[test]
        fn means_are_linear(n in 1usize..20) {
            let sys = rot(4, 1).unwrap();
            let x = probe_matrix(4);
            let y = probe_matrix(4).adjoint();
            let a = c64(0.3, -1.2);
            let combined = cesaro_mean(&sys, &x.scale(a).add(&y), 1, 2, n).unwrap();
            let split = cesaro_mean(&sys, &x, 1, 2, n).unwrap().scale(a)
                .add(&cesaro_mean(&sys, &y, 1, 2, n).unwrap());
            prop_assert!(combined.sub(&split).max_norm() < 1e-12);
        }

        #[test]
        fn resonance_sum_is_idempotent(seed in 0u64..500) {
            let u = crate::models::random_unitary(4, seed);
            let spec = spectral_data(&u).unwrap();
            let a = probe_matrix(4);
            let once = s_compact(&spec, &a, 1, 2).unwrap();
            let twice = s_compact(&spec, &once, 1, 2).unwrap();
            prop_assert!(twice.sub(&once).max_norm() < 1e-8 * (1.0 + a.frobenius_norm()));
        }
    }
}
