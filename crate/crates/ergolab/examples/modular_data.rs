//! Compute Tomita modular data (J, Δ) and verify its defining identities.
//!
//! For a cyclic separating state vector Ω the closure S of the antilinear
//! map AΩ ↦ A†Ω on MΩ polar-decomposes as S = JΔ^{1/2}.  The modular
//! conjugation J and modular operator Δ satisfy
//!
//! ```text
//! JΩ = Ω,   ΔΩ = Ω,   J² = 1,   J M J = M′,
//! ```
//!
//! and when the state is invariant under the dynamics, J commutes with U.
//! These identities drive everything downstream: the limit partial isometry
//! intertwines J with J⊗J, and block decompositions restrict (J, Δ) fiberwise.
//!
//! The example computes (J, Δ) for a rotation system and a twisted tracial
//! system, prints the residual of each identity, and confirms that JMJ and
//! M′ span the same operator subspace.
//!
//! ```bash
//! cargo run --example modular_data
//! ```

use ergolab::algebra::AlgebraBasis;
use ergolab::linalg::ComplexMatrix;
use ergolab::models::{random_unitary, rot, tracial};
use ergolab::system::{j_commutes_with_dynamics, modular_pair, DynamicalSystem};
use ergolab::Result;

fn inspect(sys: &DynamicalSystem) -> Result<()> {
    let data = modular_pair(sys)?;
    let d = sys.dim;

    let omega_j = data.apply_j(&sys.omega_vec).sub(&sys.omega_vec).max_norm();
    let omega_delta = data.delta.mul(&sys.omega_vec).sub(&sys.omega_vec).max_norm();
    let involution = data
        .j_lin
        .mul(&data.j_lin.conj())
        .sub(&ComplexMatrix::identity(d))
        .max_norm();

    let m = sys.algebra_m()?;
    let mp = sys.commutant_m()?;
    let conjugated: Vec<ComplexMatrix> = m
        .basis
        .iter()
        .map(|a| data.conjugate_operator(a))
        .collect();
    let jmj = AlgebraBasis::from_span(&conjugated, d);
    let spans_commutant = jmj.span_equal(&mp, 1e-8);

    let dynamics = j_commutes_with_dynamics(sys, &data);

    let half = data.delta_power(1)?;
    let inverse_half = data.delta_power(-1)?;
    let delta_split = half.mul(&half).sub(&data.delta).max_norm();
    let delta_inverse = half.mul(&inverse_half).sub(&ComplexMatrix::identity(d)).max_norm();

    println!("{}", sys.label);
    println!("  |JΩ − Ω|            {omega_j:.3e}");
    println!("  |ΔΩ − Ω|            {omega_delta:.3e}");
    println!("  |J² − 1|            {involution:.3e}");
    println!("  |JU − UJ|           {dynamics:.3e}");
    println!("  |Δ^½·Δ^½ − Δ|       {delta_split:.3e}");
    println!("  |Δ^½·Δ^−½ − 1|      {delta_inverse:.3e}");
    println!("  span(JMJ) = M′      {spans_commutant}");
    println!("  dim M = {}, dim M′ = {}", m.len(), mp.len());
    println!();

    assert!(omega_j <= 1e-8);
    assert!(omega_delta <= 1e-8);
    assert!(involution <= 1e-8);
    assert!(dynamics <= 1e-8);
    assert!(delta_split <= 1e-7);
    assert!(delta_inverse <= 1e-7);
    assert!(spans_commutant);
    Ok(())
}

fn main() -> Result<()> {
    for d in 2..=6 {
        inspect(&rot(d, 1)?)?;
    }
    inspect(&tracial(2, &ComplexMatrix::identity(2))?)?;
    for seed in [1, 2, 3] {
        inspect(&tracial(2, &random_unitary(2, seed))?)?;
    }
    inspect(&tracial(3, &random_unitary(3, 9))?)?;
    println!("all modular identities hold at 1e-8");
    Ok(())
}
