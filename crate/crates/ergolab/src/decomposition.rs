//! Direct-sum splitting of a system over the abelian algebra M′ ∩ {U^l}′.
//!
//! When the fixed commutant 𝔷 = M′ ∩ {U^l}′ is abelian and sits inside the
//! center of M′, its minimal projections P_z cut the space into blocks that
//! are each ergodic for the step l, with weights ‖P_zΩ‖² summing to one.
//! Non-ergodic averages then reduce blockwise: the limit of the Cesàro means
//! at exponents (k·l, (k+1)·l) is assembled from per-block limit bundles
//! ([`assemble_limit_operator`]), and the modular conjugation restricts to
//! each block ([`verify_fiber_modular`]).  The parent algebra M splits as
//! the direct sum of the block algebras exactly when 𝔷 ⊆ M
//! ([`verify_block_algebra_split`]).

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::algebra::AlgebraBasis;
use crate::cesaro::limit_bundle;
use crate::error::{Error, Result};
use crate::linalg::{
    c64, operator_norm, ComplexMatrix, CHECK_TOL, CLUSTER_TOL,
};
use crate::spectral::spectral_data;
use crate::system::{j_commutes_with_dynamics, modular_pair, DynamicalSystem};

/// One summand of the splitting: an isometric embedding of the block into
/// the parent space, the block dynamical system, and its weight ‖P_zΩ‖².
#[derive(Debug, Clone)]
pub struct Block {
    /// d × d_z matrix with orthonormal columns spanning the range of P_z.
    pub isometry: ComplexMatrix,
    /// Block system: compressed step-l dynamics, normalized block state
    /// vector, compressed generators.
    pub system: DynamicalSystem,
    pub weight: f64,
}

/// A system split over the minimal projections of M′ ∩ {U^l}′.
#[derive(Debug, Clone)]
pub struct DecomposedSystem {
    pub parent: DynamicalSystem,
    /// The step whose fixed commutant drives the splitting.
    pub l: i64,
    /// Blocks of positive weight, ordered by their lowest dominant
    /// coordinate.
    pub blocks: Vec<Block>,
    /// Orthonormal basis of M′ ∩ {U^l}′.
    pub fixed_commutant_basis: AlgebraBasis,
    /// Weights of discarded negligible blocks.
    pub dropped: Vec<f64>,
    /// Whether 𝔷 ⊆ Z(M′) was enforced.
    pub centrality_enforced: bool,
}

/// Gate configuration for [`decompose_with`].
#[derive(Debug, Clone, Copy)]
pub struct DecompositionOptions {
    /// Require 𝔷 ⊆ Z(M′).  Disabling this leaves a diagnostic splitting in
    /// which blocks need not inherit the fiber properties.
    pub require_central: bool,
}

impl Default for DecompositionOptions {
    fn default() -> Self {
        Self {
            require_central: true,
        }
    }
}

/// Minimal projections of an abelian algebra span: simultaneously
/// diagonalize a seeded random self-adjoint element and group its
/// eigenvectors by eigenvalue cluster.  Retries with a fresh element when
/// the eigenvalue gaps are too small to trust the grouping.
fn minimal_projections(zeta: &AlgebraBasis, seed: u64) -> Result<Vec<ComplexMatrix>> {
    let d = zeta.ambient_dim;
    let m = zeta.len();
    if m == 0 {
        return Err(Error::ConfigError("empty algebra has no projections".into()));
    }
    if m == 1 {
        return Ok(vec![ComplexMatrix::identity(d)]);
    }
    let mut last_gap = f64::INFINITY;
    for attempt in 0..8u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(attempt));
        let mut element = ComplexMatrix::zeros(d, d);
        for b in &zeta.basis {
            let coeff: f64 = rng.gen_range(-1.0..1.0);
            element = element.add(&b.scale(c64(coeff, 0.0)));
        }
        let element = element.add(&element.adjoint());
        let norm = element.frobenius_norm();
        if norm < 1e-12 {
            continue;
        }
        let element = element.scale(c64(1.0 / norm, 0.0));

        let (values, vectors) = hermitian_pair(&element)?;
        let complex_values: Vec<Complex64> = values.iter().map(|&v| c64(v, 0.0)).collect();
        let clustered = crate::linalg::cluster_points(&complex_values, CLUSTER_TOL);
        let (roots, assignment) = match clustered {
            Ok(pair) => pair,
            Err(Error::AmbiguousClustering { gap, .. }) => {
                last_gap = last_gap.min(gap);
                continue;
            }
            Err(e) => return Err(e),
        };
        if roots.len() != m {
            continue;
        }
        let mut reps: Vec<f64> = roots.iter().map(|&r| values[r]).collect();
        reps.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let min_gap = reps
            .windows(2)
            .map(|w| w[1] - w[0])
            .fold(f64::INFINITY, f64::min);
        if min_gap < 10.0 * CLUSTER_TOL {
            last_gap = last_gap.min(min_gap);
            continue;
        }

        let mut projections = Vec::with_capacity(m);
        let mut all_member = true;
        for cluster in 0..roots.len() {
            let mut p = ComplexMatrix::zeros(d, d);
            for (i, &assigned) in assignment.iter().enumerate() {
                if assigned == cluster {
                    let col = vectors.column_at(i);
                    p = p.add(&col.mul(&col.adjoint()));
                }
            }
            if !zeta.contains(&p, 1e-7) {
                all_member = false;
                break;
            }
            projections.push(p);
        }
        if !all_member {
            continue;
        }
        projections.sort_by_key(|p| dominant_coordinate(p));
        return Ok(projections);
    }
    Err(Error::AmbiguousClustering {
        gap: last_gap,
        tol: 10.0 * CLUSTER_TOL,
    })
}

fn hermitian_pair(a: &ComplexMatrix) -> Result<(Vec<f64>, ComplexMatrix)> {
    crate::linalg::hermitian_eig(a)
}

/// Smallest index attaining the largest diagonal entry; a deterministic
/// block-ordering key.
fn dominant_coordinate(p: &ComplexMatrix) -> usize {
    let mut best = 0;
    let mut best_value = f64::NEG_INFINITY;
    for i in 0..p.rows {
        let v = p[(i, i)].re;
        if v > best_value + 1e-12 {
            best_value = v;
            best = i;
        }
    }
    best
}

/// Split the system over 𝔷 = M′ ∩ {U^l}′ with default gates and seed.
pub fn decompose(sys: &DynamicalSystem, l: i64) -> Result<DecomposedSystem> {
    decompose_with(sys, l, DecompositionOptions::default(), 0)
}

/// Split the system over 𝔷 = M′ ∩ {U^l}′.
///
/// Requires 𝔷 abelian, 𝔷 ⊆ Z(M′) (unless relaxed through `options`), and a
/// separating state vector.  Every retained block must be ergodic for the
/// step l; a block that is not is reported rather than silently kept.
pub fn decompose_with(
    sys: &DynamicalSystem,
    l: i64,
    options: DecompositionOptions,
    seed: u64,
) -> Result<DecomposedSystem> {
    if l == 0 {
        return Err(Error::ConfigError("splitting step must be nonzero".into()));
    }
    let zeta = sys.commutant_fixed_algebra(l)?;

    let mut commutator = 0.0f64;
    for a in &zeta.basis {
        for b in &zeta.basis {
            commutator = commutator.max(a.commutator(b).max_norm());
        }
    }
    if commutator > CHECK_TOL {
        return Err(Error::NotAbelian {
            residual: commutator,
        });
    }

    if options.require_central {
        let center = sys.central_algebra()?;
        let mut residual = 0.0f64;
        for b in &zeta.basis {
            residual = residual.max(center.membership_residual(b));
        }
        if residual > CHECK_TOL {
            return Err(Error::NotCentral { residual });
        }
    }

    if !sys.is_separating()? {
        return Err(Error::NotSeparating {
            defect: sys.separating_defect()?,
        });
    }

    let projections = minimal_projections(&zeta, seed)?;
    let mut completeness = ComplexMatrix::zeros(sys.dim, sys.dim);
    for p in &projections {
        completeness = completeness.add(p);
    }
    let gap = completeness
        .sub(&ComplexMatrix::identity(sys.dim))
        .max_norm();
    if gap > CHECK_TOL {
        return Err(Error::HypothesisViolation(format!(
            "minimal projections do not resolve the identity: {gap:.3e}"
        )));
    }

    let step_u = sys.u.unitary_pow(l);
    let mut blocks = Vec::new();
    let mut dropped = Vec::new();
    for (index, p) in projections.iter().enumerate() {
        let weight = p.mul(&sys.omega_vec).two_norm().powi(2);
        if weight <= CHECK_TOL {
            dropped.push(weight);
            continue;
        }
        let columns: Vec<ComplexMatrix> = (0..sys.dim).map(|j| p.column_at(j)).collect();
        let basis = crate::algebra::orthonormalize(&columns);
        let expected = p.trace().re.round() as usize;
        if basis.len() != expected {
            return Err(Error::HypothesisViolation(format!(
                "block {index} rank {} disagrees with projection trace {expected}",
                basis.len()
            )));
        }
        let isometry = ComplexMatrix::from_columns(&basis);
        let block_u = isometry.adjoint().mul(&step_u).mul(&isometry);
        let omega_part = isometry.adjoint().mul(&sys.omega_vec);
        let omega_norm = omega_part.two_norm();
        let block_omega = omega_part.scale(c64(1.0 / omega_norm, 0.0));
        let block_generators: Vec<ComplexMatrix> = sys
            .m_generators
            .iter()
            .map(|g| isometry.adjoint().mul(g).mul(&isometry))
            .collect();
        let system = DynamicalSystem::new(
            block_u,
            block_omega,
            block_generators,
            format!("{} | block {} (step {l})", sys.label, blocks.len()),
        )?;
        check_block_ergodic(&system, blocks.len())?;
        blocks.push(Block {
            isometry,
            system,
            weight,
        });
    }

    let weight_sum: f64 = blocks.iter().map(|b| b.weight).sum();
    if (weight_sum - 1.0).abs() > CHECK_TOL + dropped.iter().sum::<f64>() {
        return Err(Error::HypothesisViolation(format!(
            "block weights sum to {weight_sum}, expected 1"
        )));
    }

    Ok(DecomposedSystem {
        parent: sys.clone(),
        l,
        blocks,
        fixed_commutant_basis: zeta,
        dropped,
        centrality_enforced: options.require_central,
    })
}

/// A retained block must have a one-dimensional fixed space.
fn check_block_ergodic(system: &DynamicalSystem, index: usize) -> Result<()> {
    let fixed_dim = system.fixed_dimension(1)?;
    if fixed_dim != 1 {
        return Err(Error::BlockNotErgodic { index, fixed_dim });
    }
    Ok(())
}

/// Per-block modular comparison: residuals of the compressed parent
/// conjugation against each block's own, of conjugation leakage out of the
/// block, and of the block-level exchange J U = U J.
#[derive(Debug, Clone)]
pub struct FiberModularReport {
    pub passed: bool,
    /// max(‖W† J_lin conj(W) − J_lin,z‖, ‖(I − P_z) J_lin conj(P_z)‖) per
    /// block.
    pub conjugation_residuals: Vec<f64>,
    /// ‖J_z U_z − U_z J_z‖ per block, through linear parts.
    pub dynamics_residuals: Vec<f64>,
}

/// Check that the parent's modular conjugation splits along the blocks and
/// commutes with each block's dynamics.
pub fn verify_fiber_modular(dec: &DecomposedSystem) -> Result<FiberModularReport> {
    let parent_data = modular_pair(&dec.parent)?;
    let d = dec.parent.dim;
    let identity = ComplexMatrix::identity(d);
    let mut conjugation_residuals = Vec::with_capacity(dec.blocks.len());
    let mut dynamics_residuals = Vec::with_capacity(dec.blocks.len());
    for block in &dec.blocks {
        let block_data = modular_pair(&block.system)?;
        let w = &block.isometry;
        let compressed = w.adjoint().mul(&parent_data.j_lin).mul(&w.conj());
        let mut residual = compressed.sub(&block_data.j_lin).max_norm();
        let p = w.mul(&w.adjoint());
        let leak = identity
            .sub(&p)
            .mul(&parent_data.j_lin)
            .mul(&p.conj())
            .max_norm();
        residual = residual.max(leak);
        conjugation_residuals.push(residual);
        dynamics_residuals.push(j_commutes_with_dynamics(&block.system, &block_data));
    }
    let passed = conjugation_residuals
        .iter()
        .chain(&dynamics_residuals)
        .all(|&r| r <= CHECK_TOL);
    Ok(FiberModularReport {
        passed,
        conjugation_residuals,
        dynamics_residuals,
    })
}

/// The blockwise limit operator for the Cesàro means at exponents
/// (k·l, (k+1)·l): each block contributes its own limit bundle applied to
/// the compressed operator, reassembled along the isometries.
///
/// k must avoid 0 and −1, which degenerate the exponent pair.
pub fn assemble_limit_operator(
    dec: &DecomposedSystem,
    b: &ComplexMatrix,
    k: i64,
) -> Result<ComplexMatrix> {
    let d = dec.parent.dim;
    if b.rows != d || b.cols != d {
        return Err(Error::ConfigError(format!(
            "operator must be {d}x{d}, got {}x{}",
            b.rows, b.cols
        )));
    }
    if k == 0 || k == -1 {
        return Err(Error::TrivialPair {
            k1: k * dec.l,
            k2: (k + 1) * dec.l,
        });
    }
    let m = dec.parent.algebra_m()?;
    let mp = dec.parent.commutant_m()?;
    let mut joint = m.basis.clone();
    joint.extend(mp.basis.iter().cloned());
    let x0 = AlgebraBasis::from_span(&joint, d);
    let residual = x0.membership_residual(b);
    let tol = CHECK_TOL * (1.0 + b.frobenius_norm());
    if residual > tol {
        return Err(Error::NotInSpan { residual, tol });
    }

    let mut assembled = ComplexMatrix::zeros(d, d);
    for block in &dec.blocks {
        let bundle = limit_bundle(&block.system, k, k + 1)?;
        let w = &block.isometry;
        let compressed = w.adjoint().mul(b).mul(w);
        let block_limit = bundle.limit_operator(&compressed)?;
        assembled = assembled.add(&w.mul(&block_limit).mul(&w.adjoint()));
    }

    let bound = operator_norm(b) + CHECK_TOL;
    let got = operator_norm(&assembled);
    if got > bound {
        return Err(Error::HypothesisViolation(format!(
            "assembled limit norm {got:.6e} exceeds the bound {bound:.6e}"
        )));
    }
    Ok(assembled)
}

/// The limiting three-point correlation over a decomposed system:
/// ⟨V_B(A₁)·A₂Ω, A₀†Ω⟩ with V_B from [`assemble_limit_operator`] at the
/// exponents (k·l, (k+1)·l).
pub fn fiberwise_three_point(
    dec: &DecomposedSystem,
    a0: &ComplexMatrix,
    a1: &ComplexMatrix,
    a2: &ComplexMatrix,
    k: i64,
) -> Result<Complex64> {
    let vb = assemble_limit_operator(dec, a1, k)?;
    let omega = &dec.parent.omega_vec;
    Ok(vb
        .mul(&a2.mul(omega))
        .frobenius_inner(&a0.adjoint().mul(omega)))
}

/// Does M split as the direct sum of the block compressions?
///
/// Equivalent to 𝔷 ⊆ M; both sides are computed independently and must
/// agree, the shared verdict being returned.
pub fn verify_block_algebra_split(dec: &DecomposedSystem) -> Result<bool> {
    let m = dec.parent.algebra_m()?;
    let zeta_inside = dec
        .fixed_commutant_basis
        .basis
        .iter()
        .all(|b| m.contains(b, 1e-8));
    let mut block_total = 0usize;
    for block in &dec.blocks {
        block_total += block.system.algebra_m()?.len();
    }
    let split = block_total == m.len();
    if split != zeta_inside {
        return Err(Error::HypothesisViolation(format!(
            "block-sum dimension test ({split}) disagrees with the membership \
             test ({zeta_inside}): dim M = {}, Σ dim M_z = {block_total}",
            m.len()
        )));
    }
    Ok(split)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BlockReport {
    pub dim: usize,
    pub weight: f64,
    pub ergodic: bool,
    /// Block dynamics eigenvalues as (re, im) pairs.
    pub spectrum: Vec<[f64; 2]>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ReassemblyResiduals {
    /// ‖Σ_z W_z U_z W_z† − U^l‖.
    pub step_dynamics: f64,
    /// ‖Σ_z P_z Ω − Ω‖.
    pub state_vector: f64,
    /// max_G ‖Σ_z P_z G P_z − G‖ over the generators.
    pub generators: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DecompositionReport {
    pub label: String,
    pub step: i64,
    pub weight_sum: f64,
    pub dropped_blocks: usize,
    pub blocks: Vec<BlockReport>,
    pub reassembly: ReassemblyResiduals,
}

impl DecomposedSystem {
    /// Summarize the splitting with per-block data and reassembly residuals.
    pub fn report(&self) -> Result<DecompositionReport> {
        let d = self.parent.dim;
        let step_u = self.parent.u.unitary_pow(self.l);
        let mut reassembled_u = ComplexMatrix::zeros(d, d);
        let mut reassembled_omega = ComplexMatrix::zeros(d, 1);
        let mut blocks = Vec::with_capacity(self.blocks.len());
        for block in &self.blocks {
            let w = &block.isometry;
            reassembled_u = reassembled_u.add(&w.mul(&block.system.u).mul(&w.adjoint()));
            reassembled_omega =
                reassembled_omega.add(&w.mul(&w.adjoint().mul(&self.parent.omega_vec)));
            let spec = spectral_data(&block.system.u)?;
            blocks.push(BlockReport {
                dim: block.system.dim,
                weight: block.weight,
                ergodic: block.system.is_ergodic_for(1)?,
                spectrum: spec.eigenvalues.iter().map(|z| [z.re, z.im]).collect(),
            });
        }
        let mut generators = 0.0f64;
        for g in &self.parent.m_generators {
            let mut reassembled = ComplexMatrix::zeros(d, d);
            for block in &self.blocks {
                let w = &block.isometry;
                reassembled = reassembled.add(&w.mul(&w.adjoint().mul(g).mul(w)).mul(&w.adjoint()));
            }
            generators = generators.max(reassembled.sub(g).max_norm());
        }
        Ok(DecompositionReport {
            label: self.parent.label.clone(),
            step: self.l,
            weight_sum: self.blocks.iter().map(|b| b.weight).sum(),
            dropped_blocks: self.dropped.len(),
            blocks,
            reassembly: ReassemblyResiduals {
                step_dynamics: reassembled_u.sub(&step_u).max_norm(),
                state_vector: reassembled_omega.sub(&self.parent.omega_vec).two_norm(),
                generators,
            },
        })
    }

    pub fn to_json(&self) -> Result<String> {
        let report = self.report()?;
        serde_json::to_string_pretty(&report)
            .map_err(|e| Error::ConfigError(format!("cannot serialize report: {e}")))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cesaro::{cesaro_mean, s_compact, three_point};
    use crate::models::{ce, rot, tracial};
    use proptest::prelude::*;

    fn diag_indicator(d: usize, points: &[usize]) -> ComplexMatrix {
        ComplexMatrix::from_fn(d, d, |i, j| {
            if i == j && points.contains(&i) {
                c64(1.0, 0.0)
            } else {
                c64(0.0, 0.0)
            }
        })
    }

    fn state(sys: &DynamicalSystem, a: &ComplexMatrix) -> Complex64 {
        a.mul(&sys.omega_vec).frobenius_inner(&sys.omega_vec)
    }

    #[test]
    fn ergodic_system_stays_whole() {
        let sys = rot(4, 1).unwrap();
        let dec = decompose(&sys, 1).unwrap();
        assert_eq!(dec.blocks.len(), 1);
        assert!((dec.blocks[0].weight - 1.0).abs() < 1e-12);
        assert!(dec.dropped.is_empty());
        let block = &dec.blocks[0];
        assert!(block.system.u.sub(&sys.u).max_norm() < 1e-12);
        assert!(block.isometry.sub(&ComplexMatrix::identity(4)).max_norm() < 1e-12);
        assert!(verify_fiber_modular(&dec).unwrap().passed);
        assert!(verify_block_algebra_split(&dec).unwrap());
    }

    #[test]
    fn six_point_rotation_splits_into_orbits() {
        let sys = rot(6, 2).unwrap();
        let dec = decompose(&sys, 1).unwrap();
        assert_eq!(dec.blocks.len(), 2);
        for block in &dec.blocks {
            assert_eq!(block.system.dim, 3);
            assert!((block.weight - 0.5).abs() < 1e-12);
        }
        let even = dec.blocks[0].isometry.mul(&dec.blocks[0].isometry.adjoint());
        assert!(even.sub(&diag_indicator(6, &[0, 2, 4])).max_norm() < 1e-10);
        let odd = dec.blocks[1].isometry.mul(&dec.blocks[1].isometry.adjoint());
        assert!(odd.sub(&diag_indicator(6, &[1, 3, 5])).max_norm() < 1e-10);

        let three_cycle = rot(3, 1).unwrap();
        assert!(dec.blocks[0].system.u.sub(&three_cycle.u).max_norm() < 1e-10);

        for block in &dec.blocks {
            let moved = sys.u.mul(&block.isometry);
            let matched = block.isometry.mul(&block.system.u);
            assert!(moved.sub(&matched).max_norm() < 1e-10);
        }
    }

    #[test]
    fn twelve_point_rotation_frozen_block_counts() {
        let sys = rot(12, 2).unwrap();
        let dec1 = decompose(&sys, 1).unwrap();
        assert_eq!(dec1.blocks.len(), 2);
        for block in &dec1.blocks {
            assert_eq!(block.system.dim, 6);
            assert!((block.weight - 0.5).abs() < 1e-12);
        }
        let dec2 = decompose(&sys, 2).unwrap();
        assert_eq!(dec2.blocks.len(), 4);
        for block in &dec2.blocks {
            assert_eq!(block.system.dim, 3);
            assert!((block.weight - 0.25).abs() < 1e-12);
        }
    }

    #[test]
    fn gates_fire_in_order() {
        assert!(matches!(
            decompose(&tracial(2, &ComplexMatrix::identity(2)).unwrap(), 1),
            Err(Error::NotAbelian { .. })
        ));
        let flip = ComplexMatrix::from_diag(&[c64(1.0, 0.0), c64(-1.0, 0.0)]);
        assert!(matches!(
            decompose(&tracial(2, &flip).unwrap(), 1),
            Err(Error::NotCentral { .. })
        ));
        assert!(matches!(
            decompose(&ce(3).unwrap(), 1),
            Err(Error::NotSeparating { .. })
        ));
        assert!(matches!(
            decompose(&rot(4, 1).unwrap(), 0),
            Err(Error::ConfigError(_))
        ));
    }

    #[test]
    fn relaxed_centrality_splits_the_flip_trace_model() {
        let flip = ComplexMatrix::from_diag(&[c64(1.0, 0.0), c64(-1.0, 0.0)]);
        let sys = tracial(2, &flip).unwrap();
        let options = DecompositionOptions {
            require_central: false,
        };
        let dec = decompose_with(&sys, 1, options, 0).unwrap();
        assert_eq!(dec.blocks.len(), 2);
        for block in &dec.blocks {
            assert_eq!(block.system.dim, 2);
            assert!((block.weight - 0.5).abs() < 1e-12);
        }
        assert!(!verify_block_algebra_split(&dec).unwrap());
    }

    #[test]
    fn split_holds_for_orbit_decompositions() {
        let dec = decompose(&rot(6, 2).unwrap(), 1).unwrap();
        assert!(verify_block_algebra_split(&dec).unwrap());
        let dec = decompose(&rot(12, 2).unwrap(), 2).unwrap();
        assert!(verify_block_algebra_split(&dec).unwrap());
    }

    #[test]
    fn non_ergodic_blocks_are_refused() {
        let two_cycles = rot(4, 2).unwrap();
        let err = check_block_ergodic(&two_cycles, 3).unwrap_err();
        assert!(matches!(
            err,
            Error::BlockNotErgodic {
                index: 3,
                fixed_dim: 2
            }
        ));
    }

    #[test]
    fn fiber_modular_data_matches_on_orbit_blocks() {
        for (d, p, l) in [(6, 2, 1), (6, 2, 2), (12, 2, 1)] {
            let dec = decompose(&rot(d, p).unwrap(), l).unwrap();
            let report = verify_fiber_modular(&dec).unwrap();
            assert!(report.passed, "fiber modular failed at d={d}, l={l}: {report:?}");
        }
    }

    #[test]
    fn state_decomposes_over_block_weights() {
        let sys = rot(12, 2).unwrap();
        let dec = decompose(&sys, 1).unwrap();
        for g in &sys.m_generators {
            let whole = state(&sys, g);
            let mut split = c64(0.0, 0.0);
            for block in &dec.blocks {
                let compressed = block.isometry.adjoint().mul(g).mul(&block.isometry);
                split += state(&block.system, &compressed).scale(block.weight);
            }
            assert!((whole - split).norm() < 1e-12);
        }
    }

    #[test]
    fn assembled_limit_matches_exact_period_mean_and_resonance_sum() {
        let sys = rot(6, 2).unwrap();
        let dec = decompose(&sys, 1).unwrap();
        let b = diag_indicator(6, &[0]);
        let assembled = assemble_limit_operator(&dec, &b, 1).unwrap();
        let mean = cesaro_mean(&sys, &b, 1, 2, 3).unwrap();
        assert!(assembled.sub(&mean).max_norm() < 1e-10);
        let spec = spectral_data(&sys.u).unwrap();
        let resonance = s_compact(&spec, &b, 1, 2).unwrap();
        assert!(assembled.sub(&resonance).max_norm() < 1e-10);
        assert!(operator_norm(&assembled) <= operator_norm(&b) + 1e-10);
    }

    #[test]
    fn assembled_limit_on_longer_steps() {
        let sys = rot(12, 2).unwrap();
        let dec = decompose(&sys, 2).unwrap();
        let b = diag_indicator(12, &[0, 5]);
        let assembled = assemble_limit_operator(&dec, &b, 1).unwrap();
        let spec = spectral_data(&sys.u).unwrap();
        let resonance = s_compact(&spec, &b, 2, 4).unwrap();
        assert!(assembled.sub(&resonance).max_norm() < 1e-10);
        let mean = cesaro_mean(&sys, &b, 2, 4, 3).unwrap();
        assert!(assembled.sub(&mean).max_norm() < 1e-10);
    }

    #[test]
    fn assembled_identity_fixes_the_state_vector() {
        let dec = decompose(&rot(6, 2).unwrap(), 1).unwrap();
        let id = ComplexMatrix::identity(6);
        let v = assemble_limit_operator(&dec, &id, 1).unwrap();
        let moved = v.mul(&dec.parent.omega_vec);
        assert!(moved.sub(&dec.parent.omega_vec).two_norm() < 1e-10);
    }

    #[test]
    fn assembly_gates() {
        let dec = decompose(&rot(6, 2).unwrap(), 1).unwrap();
        let b = diag_indicator(6, &[0]);
        for k in [0i64, -1] {
            assert!(matches!(
                assemble_limit_operator(&dec, &b, k),
                Err(Error::TrivialPair { .. })
            ));
        }
        let mut off = ComplexMatrix::zeros(6, 6);
        off[(0, 1)] = c64(1.0, 0.0);
        off[(1, 0)] = c64(1.0, 0.0);
        assert!(matches!(
            assemble_limit_operator(&dec, &off, 1),
            Err(Error::NotInSpan { .. })
        ));
    }

    #[test]
    fn fiberwise_three_point_reduces_to_weighted_blocks() {
        let sys = rot(6, 2).unwrap();
        let dec = decompose(&sys, 1).unwrap();
        let a0 = diag_indicator(6, &[0, 1]);
        let a1 = diag_indicator(6, &[2]);
        let a2 = diag_indicator(6, &[3, 4]);

        let value = fiberwise_three_point(&dec, &a0, &a1, &a2, 1).unwrap();
        let direct = three_point(&sys, &a0, &a1, &a2, 1, 2, 6).unwrap();
        assert!((value - direct).norm() < 1e-10);

        let mut weighted = c64(0.0, 0.0);
        for block in &dec.blocks {
            let w = &block.isometry;
            let bundle = limit_bundle(&block.system, 1, 2).unwrap();
            let c0 = w.adjoint().mul(&a0).mul(w);
            let c1 = w.adjoint().mul(&a1).mul(w);
            let c2 = w.adjoint().mul(&a2).mul(w);
            weighted += bundle
                .three_point_limit(&c0, &c1, &c2)
                .unwrap()
                .scale(block.weight);
        }
        assert!((value - weighted).norm() < 1e-10);

        let id = ComplexMatrix::identity(6);
        let unital = fiberwise_three_point(&dec, &id, &id, &id, 1).unwrap();
        assert!((unital - c64(1.0, 0.0)).norm() < 1e-10);
    }

    #[test]
    fn report_serializes_with_consistent_residuals() {
        let dec = decompose(&rot(6, 2).unwrap(), 1).unwrap();
        let report = dec.report().unwrap();
        assert_eq!(report.blocks.len(), 2);
        assert!((report.weight_sum - 1.0).abs() < 1e-12);
        assert_eq!(report.dropped_blocks, 0);
        assert!(report.reassembly.step_dynamics < 1e-10);
        assert!(report.reassembly.state_vector < 1e-12);
        assert!(report.reassembly.generators < 1e-10);
        for b in &report.blocks {
            assert!(b.ergodic);
            assert_eq!(b.spectrum.len(), 3);
        }
        let json = dec.to_json().unwrap();
        let parsed: DecompositionReport = serde_json::from_str(&json).unwrap();
        assert_eq!(parsed.blocks.len(), 2);
    }

    #[test]
    fn splitting_is_deterministic() {
        let sys = rot(12, 2).unwrap();
        let a = decompose(&sys, 1).unwrap();
        let b = decompose(&sys, 1).unwrap();
        assert_eq!(a.blocks.len(), b.blocks.len());
        for (x, y) in a.blocks.iter().zip(&b.blocks) {
            assert_eq!(x.isometry.sub(&y.isometry).max_norm(), 0.0);
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(8))]

        #[test]
        fn even_rotations_split_in_half(half in 3usize..6) {
            let sys = rot(2 * half, 2).unwrap();
            let dec = decompose(&sys, 1).unwrap();
            prop_assert_eq!(dec.blocks.len(), 2);
            for block in &dec.blocks {
                prop_assert_eq!(block.system.dim, half);
                prop_assert!((block.weight - 0.5).abs() < 1e-12);
            }
            let report = dec.report().unwrap();
            prop_assert!(report.reassembly.step_dynamics < 1e-10);
            prop_assert!(report.reassembly.generators < 1e-10);
        }
    }
}
