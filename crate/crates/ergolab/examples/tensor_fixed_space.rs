//! Enumerate resonant spectrum pairs and identify the tensor fixed space.
//!
//! For exponents (k1, k2) the pairs of unitary eigenvalues (v, w) with
//! v^{k1}·w^{k2} = 1 index the resonances that survive Cesàro averaging.
//! Summing the corresponding spectral projections of U recovers exactly
//! the fixed projection of the product unitary on the doubled space:
//!
//! ```text
//! Σ_{v^{k1} w^{k2} = 1}  E_v ⊗ E_w  =  P_fix(U^{k1} ⊗ U^{k2}).
//! ```
//!
//! The left side is assembled pair by pair from the spectral data of U; the
//! right side is computed independently as an orthonormal kernel basis of
//! U^{k1} ⊗ U^{k2} − 1 on the d²-dimensional doubled space.  The example
//! prints the pair list for a rotation and checks the identity for every
//! admissible exponent pair with |k1|, |k2| ≤ 3.
//!
//! ```bash
//! cargo run --example tensor_fixed_space
//! ```

use ergolab::linalg::{c64, null_space_scaled, tensor, ComplexMatrix, RANK_TOL_REL};
use ergolab::models::rot;
use ergolab::spectral::{admissible_pair, pair_set, spectral_data, tensor_fixed_projection};
use ergolab::Result;

fn fixed_projection_direct(u: &ComplexMatrix, k1: i64, k2: i64) -> Result<ComplexMatrix> {
    let d = u.rows;
    let product = tensor(&u.unitary_pow(k1), &u.unitary_pow(k2));
    let shifted = product.sub(&ComplexMatrix::identity(d * d));
    let kernel = null_space_scaled(&shifted, RANK_TOL_REL, d as f64)?;
    Ok(kernel.mul(&kernel.adjoint()))
}

fn main() -> Result<()> {
    let sys = rot(6, 1)?;
    let spec = spectral_data(&sys.u)?;

    let pairs = pair_set(&spec, 2, 3)?;
    println!("resonant pairs of {} at (k1, k2) = (2, 3):", sys.label);
    for (v, w) in &pairs.pairs {
        println!(
            "  v = {:+.4}{:+.4}i   w = {:+.4}{:+.4}i   |v^2 w^3 − 1| = {:.2e}",
            v.re,
            v.im,
            w.re,
            w.im,
            (v.powi(2) * w.powi(3) - c64(1.0, 0.0)).norm()
        );
    }
    println!();

    println!("pair-sum versus direct kernel projection on the doubled space:");
    let mut checked = 0;
    for k1 in -3..=3i64 {
        for k2 in -3..=3i64 {
            if !admissible_pair(k1, k2) {
                continue;
            }
            let assembled = tensor_fixed_projection(&spec, k1, k2)?;
            let direct = fixed_projection_direct(&sys.u, k1, k2)?;
            let residual = assembled.sub(&direct).max_norm();
            let rank = assembled.trace().re.round() as i64;
            println!("  (k1, k2) = ({k1:>2}, {k2:>2})   rank {rank:>2}   residual {residual:.3e}");
            assert!(residual <= 1e-8);
            checked += 1;
        }
    }
    println!("\nidentity verified for {checked} admissible exponent pairs at 1e-8");
    Ok(())
}
