//! Survey the hypothesis predicates across the bundled model families.
//!
//! A system (M, α, ω) in standard form carries a handful of structural
//! predicates that decide which convergence theorem applies to the twisted
//! means A_N(X) = (1/N) Σ_n U^{n·k1} X U^{n(k2−k1)}:
//!
//! - **cyclic / separating**: MΩ dense, and AΩ = 0 ⇒ A = 0 on M,
//! - **ergodic for m**: the fixed space of U^m is the line through Ω,
//! - **compact**: finite dimension makes every system compact,
//! - **fixed commutant central at m**: M′ ∩ {U^m}′ lies in the center of M′,
//! - **g_abelian / commutant_fixed_abelian**: two abelianness predicates
//!   that coincide on separating systems.
//!
//! The survey prints one row per model, plus the ergodicity ladder over
//! several steps for a rotation whose orbit structure depends on the step.
//!
//! ```bash
//! cargo run --example hypothesis_check
//! ```

use ergolab::models::{random_tracial, rot, tracial};
use ergolab::system::{check_hypotheses, verify_ergodic_equivalences, DynamicalSystem};
use ergolab::Result;

fn survey(sys: &DynamicalSystem, steps: &[i64]) -> Result<()> {
    let report = check_hypotheses(sys, steps)?;
    println!("{}", sys.label);
    println!("  dim                      {}", sys.dim);
    println!("  cyclic                   {}", report.cyclic);
    println!("  separating               {}", report.separating);
    println!("  compact                  {}", report.compact);
    println!("  g_abelian                {}", report.g_abelian);
    println!("  commutant fixed abelian  {}", report.commutant_fixed_abelian);
    for (m, ergodic) in &report.ergodic_for {
        let central = report.fixed_commutant_central[m];
        println!("  step {m:>2}: ergodic {ergodic:<5}  fixed commutant central {central}");
    }
    if report.separating {
        let ergodic = verify_ergodic_equivalences(sys)?;
        println!("  four ergodicity characterizations agree; common value {ergodic}");
        assert_eq!(ergodic, report.ergodic_for[&1]);
    }
    println!();
    Ok(())
}

fn main() -> Result<()> {
    survey(&rot(5, 1)?, &[1, 2, 3])?;
    survey(&rot(6, 2)?, &[1, 2, 3, 6])?;
    survey(&tracial(2, &ergolab::linalg::ComplexMatrix::identity(2))?, &[1])?;
    survey(&random_tracial(2, 42)?, &[1, 2])?;

    let six = rot(6, 1)?;
    let report = check_hypotheses(&six, &[1, 2, 3, 5, 6])?;
    println!("ergodicity of ROT(6,1) by step: gcd(step, 6) = 1 exactly when ergodic");
    for (m, ergodic) in &report.ergodic_for {
        let coprime = gcd(m.rem_euclid(6) as u64, 6) == 1;
        println!("  step {m}: ergodic {ergodic} (gcd test {coprime})");
        assert_eq!(*ergodic, coprime);
    }
    Ok(())
}

fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}
