//! Operator algebras as orthonormal spans.
//!
//! An algebra is stored as an orthonormal basis (Frobenius inner product) of
//! its underlying subspace of d×d matrices. Two computations do the heavy
//! lifting: the commutant of a generator set, and the unital *-algebra
//! generated by a set. Both reduce to joint kernels of commutator maps; the
//! commutant restricts those maps to an "ambient" coordinate patch spanned by
//! the eigenspace blocks of one normal generator, which keeps the kernel
//! problem at a size proportional to the answer rather than to d².

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{
    c64, cluster_points, hermitian_eig, ComplexMatrix, EIG_TOL_REL, RANK_TOL_REL,
};

/// Relative tolerance deciding whether a candidate matrix adds a new
/// direction to a span.
const SPAN_TOL: f64 = 1e-9;

/// Orthonormal basis of a subspace of d×d matrices.
#[derive(Debug, Clone)]
pub struct AlgebraBasis {
    /// Matrices act on ℂ^ambient_dim.
    pub ambient_dim: usize,
    /// Orthonormal in the Frobenius inner product.
    pub basis: Vec<ComplexMatrix>,
}

impl AlgebraBasis {
    /// Dimension of the spanned subspace.
    pub fn len(&self) -> usize {
        self.basis.len()
    }

    pub fn is_empty(&self) -> bool {
        self.basis.is_empty()
    }

    /// Orthonormalize arbitrary spanning matrices into a basis.
    pub fn from_span(mats: &[ComplexMatrix], ambient_dim: usize) -> Self {
        let basis = orthonormalize(mats);
        Self { ambient_dim, basis }
    }

    /// Frobenius-orthogonal projection of `x` onto the span.
    pub fn project(&self, x: &ComplexMatrix) -> ComplexMatrix {
        let mut out = ComplexMatrix::zeros(x.rows, x.cols);
        for b in &self.basis {
            let coeff = x.frobenius_inner(b);
            out = out.add(&b.scale(coeff));
        }
        out
    }

    /// Coordinates of `x` in this basis (projection coefficients).
    pub fn coordinates(&self, x: &ComplexMatrix) -> Vec<Complex64> {
        self.basis.iter().map(|b| x.frobenius_inner(b)).collect()
    }

    /// Distance from `x` to the span.
    pub fn membership_residual(&self, x: &ComplexMatrix) -> f64 {
        x.sub(&self.project(x)).frobenius_norm()
    }

    /// Whether `x` lies in the span within `tol`, relative to ‖x‖.
    pub fn contains(&self, x: &ComplexMatrix, tol: f64) -> bool {
        self.membership_residual(x) <= tol * (1.0 + x.frobenius_norm())
    }

    /// Span equality test. For moderate dimensions this compares the
    /// Frobenius-orthogonal projectors onto the two spans entrywise; above
    /// that, it falls back to mutual membership of basis elements.
    pub fn span_equal(&self, other: &AlgebraBasis, tol: f64) -> bool {
        if self.ambient_dim != other.ambient_dim {
            return false;
        }
        let d2 = self.ambient_dim * self.ambient_dim;
        if d2 <= 4096 {
            let p1 = self.span_projector();
            let p2 = other.span_projector();
            return p1.sub(&p2).max_norm() <= tol;
        }
        if self.len() != other.len() {
            return false;
        }
        self.basis.iter().all(|b| other.contains(b, tol))
            && other.basis.iter().all(|b| self.contains(b, tol))
    }

    /// Projector onto the span as a d²×d² matrix acting on flattened
    /// matrices: P = Σ vec(B_i)·vec(B_i)†.
    pub fn span_projector(&self) -> ComplexMatrix {
        let d2 = self.ambient_dim * self.ambient_dim;
        let mut p = ComplexMatrix::zeros(d2, d2);
        for b in &self.basis {
            for i in 0..d2 {
                let bi = b.data[i];
                if bi.norm_sqr() == 0.0 {
                    continue;
                }
                for j in 0..d2 {
                    p[(i, j)] += bi * b.data[j].conj();
                }
            }
        }
        p
    }

    /// Structural check: the span contains I, is adjoint-closed, and is
    /// closed under products, all within `tol`.
    pub fn verify_star_algebra(&self, tol: f64) -> Result<()> {
        let id = ComplexMatrix::identity(self.ambient_dim);
        if !self.contains(&id, tol) {
            return Err(Error::NotInSpan {
                residual: self.membership_residual(&id),
                tol,
            });
        }
        for b in &self.basis {
            let adj = b.adjoint();
            if !self.contains(&adj, tol) {
                return Err(Error::NotInSpan {
                    residual: self.membership_residual(&adj),
                    tol,
                });
            }
        }
        for a in &self.basis {
            for b in &self.basis {
                let prod = a.mul(b);
                if !self.contains(&prod, tol) {
                    return Err(Error::NotInSpan {
                        residual: self.membership_residual(&prod),
                        tol,
                    });
                }
            }
        }
        Ok(())
    }
}

/// Modified Gram-Schmidt over the Frobenius inner product, dropping
/// candidates that add no new direction.
pub fn orthonormalize(mats: &[ComplexMatrix]) -> Vec<ComplexMatrix> {
    let mut basis: Vec<ComplexMatrix> = Vec::new();
    for m in mats {
        if let Some(unit) = reduce_against(&basis, m) {
            basis.push(unit);
        }
    }
    basis
}

/// Subtract the projection of `m` onto `basis`; return the normalized
/// remainder if it is numerically nonzero.
pub(crate) fn reduce_against(basis: &[ComplexMatrix], m: &ComplexMatrix) -> Option<ComplexMatrix> {
    let original = m.frobenius_norm();
    if original == 0.0 {
        return None;
    }
    let mut r = m.clone();
    for _ in 0..2 {
        for b in basis {
            let coeff = r.frobenius_inner(b);
            r = r.sub(&b.scale(coeff));
        }
    }
    let remainder = r.frobenius_norm();
    if remainder <= SPAN_TOL * original.max(1.0) {
        return None;
    }
    Some(r.scale(c64(1.0 / remainder, 0.0)))
}

/// Full matrix-unit basis of all d×d matrices, in row-major unit order.
pub fn matrix_units(d: usize) -> Vec<ComplexMatrix> {
    let mut units = Vec::with_capacity(d * d);
    for i in 0..d {
        for j in 0..d {
            let mut m = ComplexMatrix::zeros(d, d);
            m[(i, j)] = c64(1.0, 0.0);
            units.push(m);
        }
    }
    units
}

/// Orthonormal vectors in the joint kernel of X ↦ [C, X] over all
/// constraints, with X restricted to the span of `ambient` (assumed
/// orthonormal). Solved through the Gram matrix of the stacked commutator
/// map in ambient coordinates.
fn commutator_kernel_in_ambient(
    ambient: &[ComplexMatrix],
    constraints: &[ComplexMatrix],
) -> Result<Vec<ComplexMatrix>> {
    let a = ambient.len();
    if a == 0 {
        return Ok(Vec::new());
    }
    // Normalizing the constraints makes the kernel threshold scale-free:
    // it must be set by the size of the commutator map itself, not by how
    // close the particular images happen to be to zero.
    let normalized: Vec<ComplexMatrix> = constraints
        .iter()
        .filter(|c| c.frobenius_norm() > 0.0)
        .map(|c| c.scale(c64(1.0 / c.frobenius_norm(), 0.0)))
        .collect();
    if normalized.is_empty() {
        return Ok(ambient.to_vec());
    }
    let mut gram = ComplexMatrix::zeros(a, a);
    for c in &normalized {
        let images: Vec<ComplexMatrix> = ambient.iter().map(|b| c.commutator(b)).collect();
        for (k, ik) in images.iter().enumerate() {
            for (l, il) in images.iter().enumerate().skip(k) {
                // (T†T)_{kl} = ⟨image_l, image_k⟩ in the a·conj(b) convention.
                let v = il.frobenius_inner(ik);
                gram[(k, l)] += v;
                gram[(l, k)] = gram[(k, l)].conj();
            }
        }
    }
    let (vals, vecs) = hermitian_eig(&gram)?;
    // ‖[C, X]‖ ≤ 2‖C‖‖X‖ bounds the stacked map by 2·√(#constraints) on
    // unit-norm input; the second term is the roundoff floor of the Gram
    // eigenvalues.
    let map_scale = 2.0 * (normalized.len() as f64).sqrt();
    let thresh = (RANK_TOL_REL * map_scale) * (RANK_TOL_REL * map_scale)
        + 64.0 * f64::EPSILON * gram.frobenius_norm();
    let mut out = Vec::new();
    for (j, &lam) in vals.iter().enumerate() {
        if lam <= thresh {
            let mut m = ComplexMatrix::zeros(ambient[0].rows, ambient[0].cols);
            for (k, b) in ambient.iter().enumerate() {
                m = m.add(&b.scale(vecs[(k, j)]));
            }
            out.push(m);
        }
    }
    Ok(orthonormalize(&out))
}

/// Ambient coordinate patch from the eigenspace blocks of a normal matrix:
/// everything commuting with it is block-diagonal in its (clustered)
/// eigenbasis. Returns None when the matrix is not normal within working
/// tolerance. The block basis is orthonormal and adjoint-closed.
fn eigenspace_ambient(g: &ComplexMatrix) -> Option<(usize, Vec<ComplexMatrix>)> {
    let sys = crate::linalg::eig_normal(g, EIG_TOL_REL * 10.0).ok()?;
    let scale = g.frobenius_norm().max(1.0);
    // Merge generously: an over-merged cluster only enlarges the patch, while
    // a split eigenspace would wrongly exclude commutant elements.
    let (roots, assignment) = cluster_points(&sys.values, 1e-7 * scale).ok()?;
    let nclusters = roots.len();
    let mut members: Vec<Vec<usize>> = vec![Vec::new(); nclusters];
    for (i, &cl) in assignment.iter().enumerate() {
        members[cl].push(i);
    }
    let cost: usize = members.iter().map(|m| m.len() * m.len()).sum();
    let mut blocks = Vec::with_capacity(cost);
    for cluster in &members {
        for &i in cluster {
            for &j in cluster {
                let vi = sys.vectors.column_at(i);
                let vj = sys.vectors.column_at(j);
                blocks.push(vi.mul(&vj.adjoint()));
            }
        }
    }
    Some((cost, blocks))
}

/// Orthonormal basis of the commutant {X : XG = GX for all generators},
/// a *-algebra containing I.
///
/// Small systems solve the stacked commutator kernel over all matrix units.
/// Larger ones first restrict to the eigenspace blocks of whichever normal
/// generator has the fewest, then impose the remaining generators inside
/// that patch.
pub fn commutant(gens: &[ComplexMatrix], dim: usize) -> Result<AlgebraBasis> {
    for g in gens {
        assert!(
            g.rows == dim && g.cols == dim,
            "generator shape does not match the stated dimension"
        );
    }
    if gens.is_empty() {
        return Ok(AlgebraBasis {
            ambient_dim: dim,
            basis: orthonormalize(&matrix_units(dim)),
        });
    }

    let ambient = if dim * dim <= 256 {
        matrix_units(dim)
    } else {
        let mut best: Option<(usize, Vec<ComplexMatrix>)> = None;
        for g in gens {
            if let Some((cost, blocks)) = eigenspace_ambient(g) {
                if best.as_ref().map_or(true, |(c, _)| cost < *c) {
                    best = Some((cost, blocks));
                }
            }
        }
        match best {
            Some((_, blocks)) => blocks,
            None => matrix_units(dim),
        }
    };
    // Every generator is imposed as a constraint, including the one whose
    // eigenspace blocks built the patch: cluster merging may have made the
    // patch strictly larger than that generator's own commutant.
    let basis = commutator_kernel_in_ambient(&ambient, gens)?;
    Ok(AlgebraBasis {
        ambient_dim: dim,
        basis,
    })
}

/// Elements of `alg` commuting with every constraint: the joint commutator
/// kernel restricted to the span of `alg`.
pub fn intersect_commutant(alg: &AlgebraBasis, constraints: &[ComplexMatrix]) -> Result<AlgebraBasis> {
    let basis = commutator_kernel_in_ambient(&alg.basis, constraints)?;
    Ok(AlgebraBasis {
        ambient_dim: alg.ambient_dim,
        basis,
    })
}

/// Center of an algebra: its elements commuting with the whole basis.
pub fn center(alg: &AlgebraBasis) -> Result<AlgebraBasis> {
    intersect_commutant(alg, &alg.basis)
}

/// Outcome of the capped span closure.
pub enum ClosureOutcome {
    Complete(AlgebraBasis),
    /// The basis grew past the cap; holds the count reached.
    Exceeded(usize),
}

/// Span closure of {I} ∪ gens ∪ gens† under products with generators,
/// stopping once the basis stabilizes or outgrows `cap`.
pub fn closure_with_cap(gens: &[ComplexMatrix], dim: usize, cap: usize) -> Result<ClosureOutcome> {
    let mut seeds: Vec<ComplexMatrix> = vec![ComplexMatrix::identity(dim)];
    let mut multipliers: Vec<ComplexMatrix> = Vec::new();
    for g in gens {
        assert!(
            g.rows == dim && g.cols == dim,
            "generator shape does not match the stated dimension"
        );
        seeds.push(g.clone());
        seeds.push(g.adjoint());
        multipliers.push(g.clone());
        multipliers.push(g.adjoint());
    }
    let mut basis = orthonormalize(&seeds);
    if basis.len() > cap {
        return Ok(ClosureOutcome::Exceeded(basis.len()));
    }
    let mut frontier = 0;
    while frontier < basis.len() {
        let w = basis[frontier].clone();
        frontier += 1;
        for g in &multipliers {
            for prod in [w.mul(g), g.mul(&w)] {
                if let Some(unit) = reduce_against(&basis, &prod) {
                    basis.push(unit);
                    if basis.len() > cap {
                        return Ok(ClosureOutcome::Exceeded(basis.len()));
                    }
                }
            }
        }
    }
    let basis = orthonormalize(&basis);
    Ok(ClosureOutcome::Complete(AlgebraBasis {
        ambient_dim: dim,
        basis,
    }))
}

/// Orthonormal basis of the smallest unital *-algebra containing the
/// generators. Agrees with the double commutant of the generator set.
pub fn generated_algebra(gens: &[ComplexMatrix]) -> Result<AlgebraBasis> {
    let dim = gens.first().map_or(1, |g| g.rows);
    match closure_with_cap(gens, dim, dim * dim)? {
        ClosureOutcome::Complete(alg) => Ok(alg),
        ClosureOutcome::Exceeded(_) => Err(Error::DimensionOverflow { ambient: dim * dim }),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{null_space, tensor, CHECK_TOL};
    use proptest::prelude::*;

    fn pauli_x() -> ComplexMatrix {
        ComplexMatrix::from_fn(2, 2, |i, j| if i != j { c64(1.0, 0.0) } else { c64(0.0, 0.0) })
    }

    fn pauli_z() -> ComplexMatrix {
        ComplexMatrix::from_diag(&[c64(1.0, 0.0), c64(-1.0, 0.0)])
    }

    fn cycle(d: usize) -> ComplexMatrix {
        ComplexMatrix::from_fn(d, d, |i, j| {
            if i == (j + 1) % d {
                c64(1.0, 0.0)
            } else {
                c64(0.0, 0.0)
            }
        })
    }

    /// Left-multiplication operator by `a` on M_d flattened row-major:
    /// vec(A·X) = (A ⊗ I)·vec(X).
    fn left_mult(a: &ComplexMatrix) -> ComplexMatrix {
        tensor(a, &ComplexMatrix::identity(a.rows))
    }

    /// Right-multiplication by `a`: vec(X·A) = (I ⊗ Aᵀ)·vec(X).
    fn right_mult(a: &ComplexMatrix) -> ComplexMatrix {
        tensor(&ComplexMatrix::identity(a.rows), &a.transpose())
    }

    /// Independent commutant oracle: null space of the explicitly stacked
    /// commutator superoperator, one d²-row block per generator.
    fn commutant_oracle(gens: &[ComplexMatrix], dim: usize) -> AlgebraBasis {
        let d2 = dim * dim;
        if gens.is_empty() {
            return AlgebraBasis::from_span(&matrix_units(dim), dim);
        }
        let mut stacked = ComplexMatrix::zeros(gens.len() * d2, d2);
        for (gi, g) in gens.iter().enumerate() {
            let sup = left_mult(g).sub(&right_mult(g));
            for r in 0..d2 {
                for c in 0..d2 {
                    stacked[(gi * d2 + r, c)] = sup[(r, c)];
                }
            }
        }
        let kernel = null_space(&stacked, RANK_TOL_REL).unwrap();
        let mats: Vec<ComplexMatrix> = (0..kernel.cols)
            .map(|j| {
                ComplexMatrix::from_fn(dim, dim, |r, c| kernel[(r * dim + c, j)])
            })
            .collect();
        AlgebraBasis::from_span(&mats, dim)
    }

    #[test]
    fn commutant_of_identity_is_everything() {
        let alg = commutant(&[ComplexMatrix::identity(2)], 2).unwrap();
        assert_eq!(alg.len(), 4);
        alg.verify_star_algebra(CHECK_TOL).unwrap();
    }

    #[test]
    fn commutant_of_pauli_pair_is_scalars() {
        let alg = commutant(&[pauli_x(), pauli_z()], 2).unwrap();
        assert_eq!(alg.len(), 1);
        assert!(alg.contains(&ComplexMatrix::identity(2), CHECK_TOL));
    }

    #[test]
    fn commutant_of_diagonals_is_diagonals() {
        let gens: Vec<ComplexMatrix> = (0..4)
            .map(|n| {
                let mut m = ComplexMatrix::zeros(4, 4);
                m[(n, n)] = c64(1.0, 0.0);
                m
            })
            .collect();
        let alg = commutant(&gens, 4).unwrap();
        assert_eq!(alg.len(), 4);
        for b in &alg.basis {
            for i in 0..4 {
                for j in 0..4 {
                    if i != j {
                        assert!(b[(i, j)].norm() < 1e-9);
                    }
                }
            }
        }
    }

    #[test]
    fn commutant_of_left_multiplications_is_right_multiplications() {
        let units = matrix_units(2);
        let gens: Vec<ComplexMatrix> = units.iter().map(left_mult).collect();
        let alg = commutant(&gens, 4).unwrap();
        assert_eq!(alg.len(), 4);
        for u in &units {
            assert!(alg.contains(&right_mult(u), CHECK_TOL));
        }
    }

    #[test]
    fn commutant_matches_stacked_kernel_oracle() {
        let cases: Vec<Vec<ComplexMatrix>> = vec![
            vec![pauli_x()],
            vec![pauli_x(), pauli_z()],
            vec![cycle(3)],
            vec![cycle(4), cycle(4).adjoint()],
        ];
        for gens in cases {
            let dim = gens[0].rows;
            let fast = commutant(&gens, dim).unwrap();
            let oracle = commutant_oracle(&gens, dim);
            assert!(fast.span_equal(&oracle, CHECK_TOL));
        }
    }

    #[test]
    fn generated_algebra_of_nothing_is_scalars() {
        let alg = generated_algebra(&[]).unwrap();
        assert_eq!(alg.len(), 1);
    }

    #[test]
    fn generated_algebra_of_three_cycle_is_circulants() {
        let alg = generated_algebra(&[cycle(3)]).unwrap();
        assert_eq!(alg.len(), 3);
        alg.verify_star_algebra(CHECK_TOL).unwrap();
        let circ = cycle(3).add(&cycle(3).mul(&cycle(3)).scale(c64(0.0, 2.0)));
        assert!(alg.contains(&circ, CHECK_TOL));
    }

    #[test]
    fn generated_algebra_of_pauli_pair_is_full() {
        let alg = generated_algebra(&[pauli_x(), pauli_z()]).unwrap();
        assert_eq!(alg.len(), 4);
    }

    #[test]
    fn generated_algebra_of_one_projection() {
        let p = ComplexMatrix::from_diag(&[c64(1.0, 0.0), c64(0.0, 0.0)]);
        let alg = generated_algebra(&[p]).unwrap();
        assert_eq!(alg.len(), 2);
    }

    #[test]
    fn center_of_full_matrix_algebra_is_scalars() {
        let alg = AlgebraBasis::from_span(&matrix_units(3), 3);
        let z = center(&alg).unwrap();
        assert_eq!(z.len(), 1);
    }

    #[test]
    fn center_of_diagonals_is_diagonals() {
        let gens: Vec<ComplexMatrix> = (0..3)
            .map(|n| {
                let mut m = ComplexMatrix::zeros(3, 3);
                m[(n, n)] = c64(1.0, 0.0);
                m
            })
            .collect();
        let alg = AlgebraBasis::from_span(&gens, 3);
        let z = center(&alg).unwrap();
        assert_eq!(z.len(), 3);
    }

    #[test]
    fn fixed_diagonals_under_two_step_shift_on_six_points() {
        let gens: Vec<ComplexMatrix> = (0..6)
            .map(|n| {
                let mut m = ComplexMatrix::zeros(6, 6);
                m[(n, n)] = c64(1.0, 0.0);
                m
            })
            .collect();
        let diagonals = AlgebraBasis::from_span(&gens, 6);
        let u2 = cycle(6).unitary_pow(2);
        let fixed = intersect_commutant(&diagonals, &[u2]).unwrap();
        assert_eq!(fixed.len(), 2);
    }

    #[test]
    fn closure_cap_reports_exceeded() {
        match closure_with_cap(&[pauli_x(), pauli_z()], 2, 2).unwrap() {
            ClosureOutcome::Exceeded(n) => assert!(n > 2),
            ClosureOutcome::Complete(_) => panic!("cap should have been exceeded"),
        }
    }

    fn arb_generator(d: usize) -> impl Strategy<Value = ComplexMatrix> {
        prop::collection::vec(-1.0f64..1.0, d * d * 2).prop_map(move |raw| {
            ComplexMatrix::from_fn(d, d, |i, j| {
                let idx = 2 * (i * d + j);
                c64(raw[idx], raw[idx + 1])
            })
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]

        #[test]
        fn double_commutant_equals_generated_algebra(g in arb_generator(3)) {
            let gens = vec![g.clone(), g.adjoint()];
            let generated = generated_algebra(&gens).unwrap();
            let double = commutant(&commutant(&gens, 3).unwrap().basis, 3).unwrap();
            prop_assert!(generated.span_equal(&double, CHECK_TOL));
        }

        #[test]
        fn commutant_agrees_with_oracle_on_random_pairs(g in arb_generator(3), h in arb_generator(3)) {
            let gens = vec![g.clone(), g.adjoint(), h.clone(), h.adjoint()];
            let fast = commutant(&gens, 3).unwrap();
            let oracle = commutant_oracle(&gens, 3);
            prop_assert!(fast.span_equal(&oracle, CHECK_TOL));
        }

        #[test]
        fn commutant_elements_commute(g in arb_generator(3)) {
            let gens = vec![g.clone(), g.adjoint()];
            let alg = commutant(&gens, 3).unwrap();
            for b in &alg.basis {
                prop_assert!(g.commutator(b).max_norm() < 1e-7 * (1.0 + g.frobenius_norm()));
            }
        }
    }
}
