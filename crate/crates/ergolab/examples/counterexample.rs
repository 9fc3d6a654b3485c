//! The truncated-shift construction whose three-point means diverge.
//!
//! On a bilateral shift window {−n, …, n} with an extra fixed vector e the
//! operators
//!
//! ```text
//! U = cyclic shift (fixing e),   A e_k = a_k e_{−k},   B = ⟨·, e⟩ e₀
//! ```
//!
//! produce three-point correlations that copy a chosen 0/1 sequence exactly:
//!
//! ```text
//! ω(B† α^k(A) α^{2k}(B)) = a_k   for k ≤ n, with no rounding at all.
//! ```
//!
//! Choosing a_k = 1 exactly when ⌊log₂ k⌋ is odd makes the running means
//! M_N(a) oscillate between 1/3 and 2/3 forever, so the Cesàro averages of
//! the three-point ladder have no limit even though each individual
//! correlation is a perfectly innocent matrix element.  The state fails to
//! be separating, which is the hypothesis the convergence theorems need.
//!
//! Everything runs through structural appliers (permutation plus one rank-one
//! map), so the demonstration works far beyond dense-matrix sizes; at small
//! n the structural and dense routes are compared entry for entry.
//!
//! ```bash
//! cargo run --example counterexample
//! ```

use ergolab::cesaro::three_point;
use ergolab::counterexample::{
    build_counterexample, divergence_demo, doubling_sequence, mixing_window_check,
    verify_correlation_sequence,
};
use ergolab::linalg::c64;
use ergolab::Result;

fn main() -> Result<()> {
    let seq = doubling_sequence(64)?;
    println!("doubling sequence, first 17 terms: {:?}", &seq.values[..17]);
    println!("block rule: {}", seq.block_rule);
    println!();

    let n = 4096;
    let shift = build_counterexample(n, doubling_sequence(n)?)?;
    println!(
        "truncated shift with n = {n}: ambient dimension {} (never densified)",
        shift.dim
    );

    verify_correlation_sequence(&shift, n / 2)?;
    println!("correlations ω(B†·α^k(A)·α^2k(B)) equal a_k exactly for k ≤ {}", n / 2);

    let demo = divergence_demo(&shift, &[512, 1024, 2048, 4096])?;
    println!("\nrunning means of the three-point ladder:");
    for (nn, mean) in demo.n_values.iter().zip(&demo.means) {
        println!("  N = {nn:<5} mean {mean:.10}");
    }
    println!("  spread {:.10} (envelope [{:.6}, {:.6}])", demo.spread, demo.envelope[0], demo.envelope[1]);
    assert!(demo.spread >= 0.3);

    let e0 = shift.basis_vector(0)?;
    let xi = e0.add(&shift.basis_vector(1)?);
    let eta = shift.basis_vector(5)?;
    let mixing = mixing_window_check(&shift, &xi, &eta, 64)?;
    println!("\nshift correlations ⟨U^m ξ, η⟩ vanish exactly outside the support window: {mixing}");
    assert!(mixing);

    let small = build_counterexample(20, doubling_sequence(20)?)?;
    let dense = small.dense_system()?;
    let (_, a, b) = small.dense_operators()?;
    println!("\ndense cross-check at n = 20 (ambient dimension {}):", dense.dim);
    let mut worst = 0.0f64;
    for nn in [1usize, 4, 16, 20] {
        let mean = three_point(&dense, &b.adjoint(), &a, &b, 1, 2, nn)?;
        let expected = c64(small.seq.mean(nn)?, 0.0);
        let gap = (mean - expected).norm();
        println!("  N = {nn:<3} dense mean {:+.10}  sequence mean {:+.10}  gap {gap:.1e}", mean.re, expected.re);
        worst = worst.max(gap);
    }
    assert_eq!(worst, 0.0);
    println!("dense and structural routes agree bit for bit");
    Ok(())
}
