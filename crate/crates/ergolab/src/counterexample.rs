//! Exact divergence on the truncated bilateral shift.
//!
//! On ℓ²(ℤ) truncated to indices |i| ≤ n (plus one extra fixed vector e),
//! the shift V, the reflection-kernel operator A with A_{ij} = a_i δ_{i,−j}
//! for a 0/1 sequence a, and the rank-one B = ⟨·, e⟩ e₀ produce three-point
//! correlations ω(B† α^k(A) α^{2k}(B)) that equal a_k exactly, so their
//! Cesàro means equal the sequence means M_N(a).  For a sequence built from
//! doubling blocks those means oscillate and never settle, while the same
//! experiment on an ergodic rotation flattens out.  Everything here stays
//! inside the index window where the truncated shift agrees with the
//! bilateral one, so every asserted identity is exact in floating point: all
//! operator entries are 0 or 1 and the arithmetic is permutation plus one
//! inner product.
//!
//! Operators are applied structurally (one O(dim) pass per step), so radii
//! in the thousands stay cheap; dense matrices are materialized only on
//! request for small radii, to cross-check against the general machinery.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::path::Path;

use crate::error::{Error, Result};
use crate::linalg::{c64, ComplexMatrix};
use crate::models;
use crate::system::DynamicalSystem;

/// A symmetric 0/1 sequence a_k = a_{−k} for |k| ≤ n whose running means
/// M_m(a) = (1/m) Σ_{k<m} a_k oscillate instead of converging.
#[derive(Debug, Clone)]
pub struct OscillatingSequence {
    /// a_k for k = 0..=n; negative indices read the same entries.
    pub values: Vec<u8>,
    /// M_m(a) for m = 1..=n, computed alongside the bits.
    pub running_means: Vec<f64>,
    /// Human-readable statement of the generating rule.
    pub block_rule: String,
}

impl OscillatingSequence {
    /// Build from explicit bits for k = 0..=n; the negative half is the
    /// mirror image.
    pub fn from_bits(bits: Vec<u8>, block_rule: String) -> Result<Self> {
        if bits.is_empty() {
            return Err(Error::ConfigError("sequence needs at least a₀".into()));
        }
        if let Some(&bad) = bits.iter().find(|&&b| b > 1) {
            return Err(Error::ConfigError(format!(
                "sequence entries must be 0 or 1, got {bad}"
            )));
        }
        let n = bits.len() - 1;
        let mut running_means = Vec::with_capacity(n);
        let mut sum = 0.0f64;
        for m in 1..=n {
            sum += f64::from(bits[m - 1]);
            running_means.push(sum / m as f64);
        }
        Ok(Self {
            values: bits,
            running_means,
            block_rule,
        })
    }

    /// Largest index the sequence covers.
    pub fn radius(&self) -> usize {
        self.values.len() - 1
    }

    /// a_k with the symmetry a_{−k} = a_k.
    pub fn at(&self, k: i64) -> Result<f64> {
        let idx = k.unsigned_abs() as usize;
        if idx > self.radius() {
            return Err(Error::WindowExceeded {
                requested: idx,
                bound: self.radius(),
            });
        }
        Ok(f64::from(self.values[idx]))
    }

    /// The running mean M_m(a) = (1/m) Σ_{k<m} a_k.
    pub fn mean(&self, m: usize) -> Result<f64> {
        if m == 0 {
            return Err(Error::ConfigError("mean needs at least one term".into()));
        }
        if m > self.radius() {
            return Err(Error::WindowExceeded {
                requested: m,
                bound: self.radius(),
            });
        }
        Ok(self.running_means[m - 1])
    }

    fn bit(&self, k: i64) -> f64 {
        f64::from(self.values[k.unsigned_abs() as usize])
    }
}

/// The doubling-block sequence: a_k = 1 exactly when the dyadic block
/// [2^j, 2^{j+1}) containing k has odd j.  Its means M_{2^m}(a) alternate
/// near 1/3 and 2/3, so limsup − liminf stays above 0.3 from m = 10 on.
pub fn doubling_sequence(n: usize) -> Result<OscillatingSequence> {
    if n < 16 {
        return Err(Error::TooShort { needed: 16, got: n });
    }
    let bits = (0..=n)
        .map(|k| {
            let block = usize::BITS - 1 - k.max(1).leading_zeros();
            u8::from(block % 2 == 1)
        })
        .collect();
    OscillatingSequence::from_bits(
        bits,
        "a_k = 1 iff floor(log2(max(k,1))) is odd".into(),
    )
}

/// The truncated-shift system carrying the divergence experiment, held in
/// structural form: basis e_{−n}, …, e_n followed by the extra fixed
/// vector e, with U = V ⊕ 1 for the cyclic shift V, the reflection kernel
/// A, and the rank-one B = ⟨·, e⟩ e₀.
#[derive(Debug, Clone)]
pub struct CounterexampleSystem {
    pub n: usize,
    /// 2n + 2.
    pub dim: usize,
    pub seq: OscillatingSequence,
}

/// Assemble the truncated-shift system at radius n over the given sequence.
pub fn build_counterexample(n: usize, seq: OscillatingSequence) -> Result<CounterexampleSystem> {
    if n == 0 {
        return Err(Error::ConfigError("truncation radius must be ≥ 1".into()));
    }
    if seq.radius() < n {
        return Err(Error::TooShort {
            needed: n,
            got: seq.radius(),
        });
    }
    Ok(CounterexampleSystem {
        n,
        dim: 2 * n + 2,
        seq,
    })
}

impl CounterexampleSystem {
    fn circle(&self) -> usize {
        2 * self.n + 1
    }

    /// Storage position of the basis vector e_index.
    pub fn position(&self, index: i64) -> Result<usize> {
        if index.unsigned_abs() as usize > self.n {
            return Err(Error::WindowExceeded {
                requested: index.unsigned_abs() as usize,
                bound: self.n,
            });
        }
        Ok((index + self.n as i64) as usize)
    }

    /// The basis vector e_index as a column.
    pub fn basis_vector(&self, index: i64) -> Result<ComplexMatrix> {
        Ok(ComplexMatrix::basis_vector(self.dim, self.position(index)?))
    }

    /// The extra fixed vector e, which is the state vector.
    pub fn state_vector(&self) -> ComplexMatrix {
        ComplexMatrix::basis_vector(self.dim, self.dim - 1)
    }

    fn check_vector(&self, x: &ComplexMatrix) -> Result<()> {
        if x.rows != self.dim || x.cols != 1 {
            return Err(Error::ConfigError(format!(
                "vector must be {}x1, got {}x{}",
                self.dim, x.rows, x.cols
            )));
        }
        Ok(())
    }

    /// U x for U = V ⊕ 1: shift positions forward on the circle, fix e.
    pub fn apply_shift(&self, x: &ComplexMatrix) -> Result<ComplexMatrix> {
        self.check_vector(x)?;
        let circle = self.circle();
        let mut out = ComplexMatrix::zeros(self.dim, 1);
        for p in 0..circle {
            out[((p + 1) % circle, 0)] = x[(p, 0)];
        }
        out[(self.dim - 1, 0)] = x[(self.dim - 1, 0)];
        Ok(out)
    }

    /// U† x: shift positions backward on the circle, fix e.
    pub fn apply_shift_adjoint(&self, x: &ComplexMatrix) -> Result<ComplexMatrix> {
        self.check_vector(x)?;
        let circle = self.circle();
        let mut out = ComplexMatrix::zeros(self.dim, 1);
        for p in 0..circle {
            out[(p, 0)] = x[((p + 1) % circle, 0)];
        }
        out[(self.dim - 1, 0)] = x[(self.dim - 1, 0)];
        Ok(out)
    }

    /// A x for the reflection kernel A_{ij} = a_i δ_{i,−j}; e is annihilated.
    pub fn apply_reflection(&self, x: &ComplexMatrix) -> Result<ComplexMatrix> {
        self.check_vector(x)?;
        let n = self.n as i64;
        let mut out = ComplexMatrix::zeros(self.dim, 1);
        for i in -n..=n {
            let row = (i + n) as usize;
            let col = (-i + n) as usize;
            let a = self.seq.bit(i);
            if a != 0.0 {
                out[(row, 0)] = x[(col, 0)].scale(a);
            }
        }
        Ok(out)
    }

    /// B x for B = ⟨·, e⟩ e₀.
    pub fn apply_rank_one(&self, x: &ComplexMatrix) -> Result<ComplexMatrix> {
        self.check_vector(x)?;
        let mut out = ComplexMatrix::zeros(self.dim, 1);
        out[(self.n, 0)] = x[(self.dim - 1, 0)];
        Ok(out)
    }

    /// B† x = ⟨x, e₀⟩ e.
    pub fn apply_rank_one_adjoint(&self, x: &ComplexMatrix) -> Result<ComplexMatrix> {
        self.check_vector(x)?;
        let mut out = ComplexMatrix::zeros(self.dim, 1);
        out[(self.dim - 1, 0)] = x[(self.n, 0)];
        Ok(out)
    }

    fn dense_guard(&self) -> Result<()> {
        if self.dim > 512 {
            return Err(Error::DimensionOverflow { ambient: self.dim });
        }
        Ok(())
    }

    /// Materialize U, A, B as dense matrices; refused at large radii where
    /// the structural form is the point.
    pub fn dense_operators(&self) -> Result<(ComplexMatrix, ComplexMatrix, ComplexMatrix)> {
        self.dense_guard()?;
        let d = self.dim;
        let circle = self.circle();
        let u = ComplexMatrix::from_fn(d, d, |i, j| {
            let hit = if j == d - 1 {
                i == d - 1
            } else {
                i == (j + 1) % circle
            };
            if hit {
                c64(1.0, 0.0)
            } else {
                c64(0.0, 0.0)
            }
        });
        let n = self.n as i64;
        let mut a = ComplexMatrix::zeros(d, d);
        for i in -n..=n {
            a[((i + n) as usize, (-i + n) as usize)] = c64(self.seq.bit(i), 0.0);
        }
        let mut b = ComplexMatrix::zeros(d, d);
        b[(self.n, d - 1)] = c64(1.0, 0.0);
        Ok((u, a, b))
    }

    /// The same system as a dense `DynamicalSystem`, for cross-checks
    /// against the general-purpose machinery at small radii.
    pub fn dense_system(&self) -> Result<DynamicalSystem> {
        self.dense_guard()?;
        models::ce(self.n)
    }
}

/// The correlations ⟨U^k A U^k e₀, e₀⟩ for k = 0..=k_max, each checked to
/// equal a_k exactly.
pub fn verify_correlation_sequence(
    ce: &CounterexampleSystem,
    k_max: usize,
) -> Result<Vec<Complex64>> {
    if k_max > ce.n {
        return Err(Error::WindowExceeded {
            requested: k_max,
            bound: ce.n,
        });
    }
    let e0 = ce.basis_vector(0)?;
    let mut forward = e0.clone();
    let mut backward = e0;
    let mut out = Vec::with_capacity(k_max + 1);
    for k in 0..=k_max {
        let value = ce
            .apply_reflection(&forward)?
            .frobenius_inner(&backward);
        let expected = ce.seq.bit(k as i64);
        if value.re != expected || value.im != 0.0 {
            return Err(Error::HypothesisViolation(format!(
                "correlation at k = {k} is {value} instead of {expected}"
            )));
        }
        out.push(value);
        forward = ce.apply_shift(&forward)?;
        backward = ce.apply_shift_adjoint(&backward)?;
    }
    Ok(out)
}

/// Cesàro means of the three-point correlations at exponents (1, 2), with
/// their spread across the sampled lengths.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DivergenceDemo {
    pub n_values: Vec<usize>,
    /// (1/N) Σ_{k<N} ω(B† α^k(A) α^{2k}(B)) at each sampled N.
    pub means: Vec<f64>,
    /// max(means) − min(means).
    pub spread: f64,
    /// (min, max) of the sampled means, the oscillation envelope.
    pub envelope: [f64; 2],
}

impl DivergenceDemo {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("N,mean\n");
        for (n, mean) in self.n_values.iter().zip(&self.means) {
            out.push_str(&format!("{n},{mean:.16e}\n"));
        }
        out
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_csv())
            .map_err(|e| Error::ConfigError(format!("cannot write {}: {e}", path.display())))
    }

    pub fn summary_json(&self) -> Result<String> {
        serde_json::to_string_pretty(self)
            .map_err(|e| Error::ConfigError(format!("cannot serialize demo: {e}")))
    }
}

/// Run the divergence experiment: three-point means over k < N for each
/// sampled N, computed structurally and checked bit-for-bit against the
/// sequence means M_N(a).
pub fn divergence_demo(ce: &CounterexampleSystem, n_values: &[usize]) -> Result<DivergenceDemo> {
    if n_values.is_empty() {
        return Err(Error::ConfigError("need at least one mean length".into()));
    }
    if n_values[0] == 0 {
        return Err(Error::ConfigError("mean lengths must be positive".into()));
    }
    if n_values.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::ConfigError(
            "mean lengths must be strictly increasing".into(),
        ));
    }
    let longest = *n_values.last().unwrap();
    if longest > ce.n {
        return Err(Error::WindowExceeded {
            requested: longest,
            bound: ce.n,
        });
    }

    let seeded = ce.apply_rank_one(&ce.state_vector())?;
    let mut forward = seeded.clone();
    let mut backward = seeded;
    let mut sum = c64(0.0, 0.0);
    let mut means = Vec::with_capacity(n_values.len());
    let mut next = 0usize;
    for k in 0..longest {
        sum += ce.apply_reflection(&forward)?.frobenius_inner(&backward);
        if k + 1 == n_values[next] {
            if sum.im != 0.0 {
                return Err(Error::HypothesisViolation(format!(
                    "three-point mean picked up an imaginary part {}",
                    sum.im
                )));
            }
            let mean = sum.re / (k + 1) as f64;
            let direct = ce.seq.mean(k + 1)?;
            if mean != direct {
                return Err(Error::HypothesisViolation(format!(
                    "operator mean {mean} differs from sequence mean {direct} at N = {}",
                    k + 1
                )));
            }
            means.push(mean);
            next += 1;
        }
        forward = ce.apply_shift(&forward)?;
        backward = ce.apply_shift_adjoint(&backward)?;
    }

    let low = means.iter().cloned().fold(f64::INFINITY, f64::min);
    let high = means.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    Ok(DivergenceDemo {
        n_values: n_values.to_vec(),
        means,
        spread: high - low,
        envelope: [low, high],
    })
}

/// Support radius of a vector over the shift sites; the extra vector e must
/// carry nothing.
fn support_radius(ce: &CounterexampleSystem, x: &ComplexMatrix, name: &str) -> Result<usize> {
    ce.check_vector(x)?;
    if x[(ce.dim - 1, 0)] != c64(0.0, 0.0) {
        return Err(Error::ConfigError(format!(
            "{name} must be supported on the shift sites, not the extra fixed vector"
        )));
    }
    let n = ce.n as i64;
    let mut radius = 0usize;
    for i in -n..=n {
        if x[((i + n) as usize, 0)] != c64(0.0, 0.0) {
            radius = radius.max(i.unsigned_abs() as usize);
        }
    }
    Ok(radius)
}

/// The inner products ⟨U^m ξ, η⟩ for m = 0..=n_max.
pub fn shift_correlations(
    ce: &CounterexampleSystem,
    xi: &ComplexMatrix,
    eta: &ComplexMatrix,
    n_max: usize,
) -> Result<Vec<Complex64>> {
    let s = support_radius(ce, xi, "xi")?.max(support_radius(ce, eta, "eta")?);
    if s + n_max > ce.n {
        return Err(Error::WindowExceeded {
            requested: s + n_max,
            bound: ce.n,
        });
    }
    let mut moved = xi.clone();
    let mut out = Vec::with_capacity(n_max + 1);
    for _ in 0..=n_max {
        out.push(moved.frobenius_inner(eta));
        moved = ce.apply_shift(&moved)?;
    }
    Ok(out)
}

/// Check the finite-window shadow of mixing: once the shift has moved ξ
/// past the joint support radius s, every inner product ⟨U^m ξ, η⟩ with
/// 2s < m ≤ n_max vanishes exactly.
pub fn mixing_window_check(
    ce: &CounterexampleSystem,
    xi: &ComplexMatrix,
    eta: &ComplexMatrix,
    n_max: usize,
) -> Result<bool> {
    let s = support_radius(ce, xi, "xi")?.max(support_radius(ce, eta, "eta")?);
    let correlations = shift_correlations(ce, xi, eta, n_max)?;
    for (m, value) in correlations.iter().enumerate() {
        if m > 2 * s && *value != c64(0.0, 0.0) {
            return Ok(false);
        }
    }
    Ok(true)
}
