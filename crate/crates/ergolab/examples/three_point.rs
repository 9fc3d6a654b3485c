//! Three-point correlation ladders and their closed-form limit.
//!
//! The three-point means average a state over two commuting twists,
//!
//! ```text
//! (1/N) Σ_{n<N} ω(A₀ · α^{n·k1}(A₁) · α^{n·k2}(A₂)),
//! ```
//!
//! and in finite dimension they always converge, with the limit expressed
//! through the resonance sum S(A₁) = Σ E_v A₁ E_w over v^{k1} w^{k2−k1} = 1:
//!
//! ```text
//! lim = ⟨S(A₁) A₂ Ω, A₀† Ω⟩.
//! ```
//!
//! On an ergodic system the limit also factors through the limit bundle.
//! The example runs the ladder on a rotation for several operator triples,
//! compares the bundle route against the compact resonance-sum route, and
//! verifies exactness at the rotation period.
//!
//! ```bash
//! cargo run --example three_point
//! ```

use ergolab::cesaro::{limit_bundle, s_compact, three_point};
use ergolab::linalg::{ComplexMatrix, c64};
use ergolab::models::rot;
use ergolab::spectral::spectral_data;
use ergolab::Result;

fn indicator(d: usize, sites: &[usize]) -> ComplexMatrix {
    let mut m = ComplexMatrix::zeros(d, d);
    for &s in sites {
        m[(s, s)] = c64(1.0, 0.0);
    }
    m
}

fn main() -> Result<()> {
    let d = 6;
    let sys = rot(d, 1)?;
    let bundle = limit_bundle(&sys, 1, 2)?;
    let spec = spectral_data(&sys.u)?;

    let triples: Vec<(&str, ComplexMatrix, ComplexMatrix, ComplexMatrix)> = vec![
        (
            "indicators {0,1}, {2}, {4}",
            indicator(d, &[0, 1]),
            indicator(d, &[2]),
            indicator(d, &[4]),
        ),
        (
            "generator triple m0, m1, m0",
            sys.m_generators[0].clone(),
            sys.m_generators[1].clone(),
            sys.m_generators[0].clone(),
        ),
        (
            "state recovery: 1, 1, indicator {3}",
            ComplexMatrix::identity(d),
            ComplexMatrix::identity(d),
            indicator(d, &[3]),
        ),
    ];

    for (name, a0, a1, a2) in &triples {
        println!("{name}");
        let closed = bundle.three_point_limit(a0, a1, a2)?;
        let s = s_compact(&spec, a1, 1, 2)?;
        let compact = s
            .mul(&a2.mul(&sys.omega_vec))
            .frobenius_inner(&a0.adjoint().mul(&sys.omega_vec));
        println!("  bundle route   {:+.12}{:+.12}i", closed.re, closed.im);
        println!("  compact route  {:+.12}{:+.12}i", compact.re, compact.im);
        assert!((closed - compact).norm() <= 1e-10);

        for n in [1usize, 2, 3, 6, 12, 600] {
            let mean = three_point(&sys, a0, a1, a2, 1, 2, n)?;
            let gap = (mean - closed).norm();
            println!("  N = {n:<4} mean {:+.9}{:+.9}i   |mean − lim| {gap:.3e}", mean.re, mean.im);
            if n % d == 0 {
                assert!(gap <= 1e-12);
            }
        }
        println!();
    }

    let uniform = 1.0 / d as f64;
    let recovered = bundle.three_point_limit(
        &ComplexMatrix::identity(d),
        &ComplexMatrix::identity(d),
        &indicator(d, &[3]),
    )?;
    println!(
        "trivial factors recover the state: ω(indicator {{3}}) = {:+.12} (expected {uniform:.12})",
        recovered.re
    );
    assert!((recovered.re - uniform).abs() <= 1e-12);
    Ok(())
}
