//! Bundled model systems and system (de)serialization.
//!
//! Three families cover the behaviors the limit theory distinguishes:
//!
//! * `rot(d, p)`: rotation by p on ℤ_d. M = diagonal matrices, Ω = uniform
//!   vector, U = p-step cyclic permutation. Ergodic precisely when
//!   gcd(d, p) = 1; the classical abelian case.
//! * `tracial(d, u)`: the tracial inner model on M_d. H = M_d with the
//!   Frobenius inner product (flattened row-major), Ω = I/√d, M = left
//!   multiplications, and the dynamics conjugates by a unitary u. Separating
//!   but never ergodic: Ω itself is a fixed vector orthogonal to nothing.
//! * `ce(n)`: the truncated bilateral-shift system on indices |i| ≤ n plus
//!   one extra vector e = Ω. M is the full matrix algebra, so Ω is cyclic
//!   but far from separating; this is the divergence stage.
//!
//! The JSON interchange format stores complex entries as [re, im] pairs and
//! whole matrices as flat row-major lists; a short constructor record like
//! {"model": "ROT", "d": 6, "p": 2} is accepted anywhere a full system
//! description is.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{c64, tensor, ComplexMatrix};
use crate::system::DynamicalSystem;

/// Rotation by `p` on ℤ_d: U e_j = e_{(j+p) mod d}, M = diagonals,
/// Ω = uniform unit vector.
pub fn rot(d: usize, p: usize) -> Result<DynamicalSystem> {
    if d == 0 {
        return Err(Error::ConfigError("rotation needs d ≥ 1".into()));
    }
    let u = ComplexMatrix::from_fn(d, d, |i, j| {
        if i == (j + p) % d {
            c64(1.0, 0.0)
        } else {
            c64(0.0, 0.0)
        }
    });
    let amp = 1.0 / (d as f64).sqrt();
    let omega = ComplexMatrix::from_fn(d, 1, |_, _| c64(amp, 0.0));
    let gens: Vec<ComplexMatrix> = (0..d)
        .map(|n| {
            let mut m = ComplexMatrix::zeros(d, d);
            m[(n, n)] = c64(1.0, 0.0);
            m
        })
        .collect();
    DynamicalSystem::new(u, omega, gens, format!("ROT({d},{p})"))
}

/// Left multiplication by `a` on flattened M_d: vec(A·X) = (A ⊗ I)vec(X).
pub fn left_mult(a: &ComplexMatrix) -> ComplexMatrix {
    tensor(a, &ComplexMatrix::identity(a.rows))
}

/// Right multiplication by `a`: vec(X·A) = (I ⊗ Aᵀ)vec(X).
pub fn right_mult(a: &ComplexMatrix) -> ComplexMatrix {
    tensor(&ComplexMatrix::identity(a.rows), &a.transpose())
}

/// Tracial inner model on M_d: H = M_d (row-major, Frobenius), Ω = I/√d,
/// dynamics X ↦ uXu†, M = left multiplications generated by a distinct
/// diagonal and a symmetric cycle.
pub fn tracial(d: usize, u: &ComplexMatrix) -> Result<DynamicalSystem> {
    if d == 0 {
        return Err(Error::ConfigError("tracial model needs d ≥ 1".into()));
    }
    if u.rows != d || u.cols != d {
        return Err(Error::ConfigError(format!(
            "tracial model of size {d} needs a {d}x{d} unitary"
        )));
    }
    let big_u = tensor(u, &u.conj());
    let amp = 1.0 / (d as f64).sqrt();
    let omega = ComplexMatrix::from_fn(d * d, 1, |idx, _| {
        if idx % (d + 1) == 0 {
            c64(amp, 0.0)
        } else {
            c64(0.0, 0.0)
        }
    });
    let diag = ComplexMatrix::from_fn(d, d, |i, j| {
        if i == j {
            c64(i as f64 / d as f64, 0.0)
        } else {
            c64(0.0, 0.0)
        }
    });
    let cycle = ComplexMatrix::from_fn(d, d, |i, j| {
        if d > 1 && (i == (j + 1) % d || j == (i + 1) % d) {
            c64(1.0, 0.0)
        } else {
            c64(0.0, 0.0)
        }
    });
    let mut gens = vec![left_mult(&diag)];
    if d > 1 {
        gens.push(left_mult(&cycle));
    }
    DynamicalSystem::new(big_u, omega, gens, format!("TRACIAL({d})"))
}

/// Truncated bilateral-shift system: indices i ∈ [−n, n] at positions
/// i + n, plus the extra vector e = Ω at position 2n+1. U = V ⊕ 1 where V
/// cycles the 2n+1 shift positions (the wrap e_n → e_{−n} keeps V unitary
/// and stays outside every windowed computation). M is all of B(H),
/// generated by a distinct diagonal and a symmetric full cycle.
pub fn ce(n: usize) -> Result<DynamicalSystem> {
    if n == 0 {
        return Err(Error::ConfigError("truncation radius must be ≥ 1".into()));
    }
    let d = 2 * n + 2;
    let circle = 2 * n + 1;
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
    let omega = ComplexMatrix::basis_vector(d, d - 1);
    let diag = ComplexMatrix::from_fn(d, d, |i, j| {
        if i == j {
            c64(i as f64 / d as f64, 0.0)
        } else {
            c64(0.0, 0.0)
        }
    });
    let sym_cycle = ComplexMatrix::from_fn(d, d, |i, j| {
        if i == (j + 1) % d || j == (i + 1) % d {
            c64(1.0, 0.0)
        } else {
            c64(0.0, 0.0)
        }
    });
    DynamicalSystem::new(u, omega, vec![diag, sym_cycle], format!("CE({n})"))
}

/// Deterministic pseudorandom unitary: complex Gaussian entries from a
/// seeded stream, orthonormalized columnwise.
pub fn random_unitary(d: usize, seed: u64) -> ComplexMatrix {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut gauss = || {
        // Box-Muller transform on two uniform draws.
        let u1: f64 = rng.gen_range(f64::MIN_POSITIVE..1.0);
        let u2: f64 = rng.gen_range(0.0..1.0);
        let r = (-2.0 * u1.ln()).sqrt();
        let theta = std::f64::consts::TAU * u2;
        (r * theta.cos(), r * theta.sin())
    };
    let mut m = ComplexMatrix::zeros(d, d);
    for j in 0..d {
        for i in 0..d {
            let (re, im) = gauss();
            m[(i, j)] = c64(re, im);
        }
    }
    // Gram-Schmidt over columns, twice for orthogonality at working
    // precision.
    for _pass in 0..2 {
        for j in 0..d {
            for k in 0..j {
                let mut inner = c64(0.0, 0.0);
                for i in 0..d {
                    inner += m[(i, j)] * m[(i, k)].conj();
                }
                for i in 0..d {
                    let v = m[(i, k)];
                    m[(i, j)] -= inner * v;
                }
            }
            let norm: f64 = (0..d).map(|i| m[(i, j)].norm_sqr()).sum::<f64>().sqrt();
            for i in 0..d {
                m[(i, j)] /= norm;
            }
        }
    }
    m
}

/// Tracial model driven by a seeded random unitary. Any unitary works as
/// the dynamics: conjugation always fixes Ω = I/√d.
pub fn random_tracial(d: usize, seed: u64) -> Result<DynamicalSystem> {
    tracial(d, &random_unitary(d, seed))
}

fn pair_of(z: Complex64) -> [f64; 2] {
    [z.re, z.im]
}

pub(crate) fn matrix_to_pairs(m: &ComplexMatrix) -> Vec<[f64; 2]> {
    m.data.iter().map(|&z| pair_of(z)).collect()
}

pub(crate) fn matrix_from_pairs(pairs: &[[f64; 2]], rows: usize, cols: usize) -> Result<ComplexMatrix> {
    if pairs.len() != rows * cols {
        return Err(Error::ConfigError(format!(
            "matrix data has {} entries, expected {}",
            pairs.len(),
            rows * cols
        )));
    }
    Ok(ComplexMatrix {
        rows,
        cols,
        data: pairs.iter().map(|p| c64(p[0], p[1])).collect(),
    })
}

/// Explicit system description: complex entries as [re, im], matrices as
/// flat row-major lists.
#[derive(Debug, Serialize, Deserialize)]
pub struct SystemFile {
    pub label: String,
    pub dim: usize,
    #[serde(rename = "U")]
    pub u: Vec<[f64; 2]>,
    pub omega: Vec<[f64; 2]>,
    pub m_generators: Vec<Vec<[f64; 2]>>,
}

/// Short constructor record naming a bundled model.
#[derive(Debug, Serialize, Deserialize)]
pub struct ModelRecord {
    pub model: String,
    #[serde(default)]
    pub d: Option<usize>,
    #[serde(default)]
    pub p: Option<usize>,
    #[serde(default)]
    pub n: Option<usize>,
    #[serde(default)]
    pub seed: Option<u64>,
}

/// Either form of system description accepted in files.
#[derive(Debug, Serialize, Deserialize)]
#[serde(untagged)]
pub enum SystemDescription {
    Model(ModelRecord),
    Explicit(SystemFile),
}

/// Build the system a description names.
pub fn realize(desc: &SystemDescription) -> Result<DynamicalSystem> {
    match desc {
        SystemDescription::Model(rec) => realize_model(rec),
        SystemDescription::Explicit(file) => {
            let u = matrix_from_pairs(&file.u, file.dim, file.dim)?;
            let omega = matrix_from_pairs(&file.omega, file.dim, 1)?;
            let gens = file
                .m_generators
                .iter()
                .map(|g| matrix_from_pairs(g, file.dim, file.dim))
                .collect::<Result<Vec<_>>>()?;
            DynamicalSystem::new(u, omega, gens, file.label.clone())
        }
    }
}

pub fn realize_model(rec: &ModelRecord) -> Result<DynamicalSystem> {
    match rec.model.to_uppercase().as_str() {
        "ROT" => {
            let d = rec
                .d
                .ok_or_else(|| Error::ConfigError("ROT model needs d".into()))?;
            let p = rec.p.unwrap_or(1);
            rot(d, p)
        }
        "TRACIAL" => {
            let d = rec
                .d
                .ok_or_else(|| Error::ConfigError("TRACIAL model needs d".into()))?;
            match rec.seed {
                Some(seed) => random_tracial(d, seed),
                None => tracial(d, &ComplexMatrix::identity(d)),
            }
        }
        "CE" => {
            let n = rec
                .n
                .ok_or_else(|| Error::ConfigError("CE model needs n".into()))?;
            ce(n)
        }
        other => Err(Error::ConfigError(format!("unknown model '{other}'"))),
    }
}

/// Serialize a system to the explicit JSON form.
pub fn to_file(sys: &DynamicalSystem) -> SystemFile {
    SystemFile {
        label: sys.label.clone(),
        dim: sys.dim,
        u: matrix_to_pairs(&sys.u),
        omega: matrix_to_pairs(&sys.omega_vec),
        m_generators: sys.m_generators.iter().map(matrix_to_pairs).collect(),
    }
}

/// Load a system description (either form) from a JSON file on disk.
pub fn load_system(path: &std::path::Path) -> Result<DynamicalSystem> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::ConfigError(format!("cannot read {}: {e}", path.display())))?;
    let desc: SystemDescription = serde_json::from_str(&text)
        .map_err(|e| Error::ConfigError(format!("cannot parse {}: {e}", path.display())))?;
    realize(&desc)
}

/// Write a system to disk in the explicit JSON form.
pub fn save_system(sys: &DynamicalSystem, path: &std::path::Path) -> Result<()> {
    let file = to_file(sys);
    let text = serde_json::to_string_pretty(&file)
        .map_err(|e| Error::ConfigError(format!("serialization failed: {e}")))?;
    std::fs::write(path, text)
        .map_err(|e| Error::ConfigError(format!("cannot write {}: {e}", path.display())))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rotation_has_expected_shape() {
        let sys = rot(4, 1).unwrap();
        assert_eq!(sys.dim, 4);
        assert_eq!(sys.m_generators.len(), 4);
        assert!((sys.u[(1, 0)] - c64(1.0, 0.0)).norm() < 1e-15);
        assert!((sys.u[(0, 3)] - c64(1.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn tracial_omega_is_normalized_identity() {
        let sys = tracial(2, &ComplexMatrix::identity(2)).unwrap();
        assert_eq!(sys.dim, 4);
        let amp = 1.0 / 2.0_f64.sqrt();
        assert!((sys.omega_vec[(0, 0)] - c64(amp, 0.0)).norm() < 1e-15);
        assert!(sys.omega_vec[(1, 0)].norm() < 1e-15);
        assert!((sys.omega_vec[(3, 0)] - c64(amp, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn tracial_commutant_is_right_multiplications() {
        let sys = tracial(2, &ComplexMatrix::identity(2)).unwrap();
        let mp = sys.commutant_m().unwrap();
        assert_eq!(mp.len(), 4);
        let e01 = ComplexMatrix::from_fn(2, 2, |i, j| {
            if i == 0 && j == 1 {
                c64(1.0, 0.0)
            } else {
                c64(0.0, 0.0)
            }
        });
        assert!(mp.contains(&right_mult(&e01), 1e-8));
    }

    #[test]
    fn ce_system_is_unitary_with_invariant_state() {
        let sys = ce(4).unwrap();
        assert_eq!(sys.dim, 10);
        assert!(sys.u.unitarity_residual() < 1e-14);
        let moved = sys.u.mul(&sys.omega_vec).sub(&sys.omega_vec).two_norm();
        assert!(moved < 1e-14);
    }

    #[test]
    fn ce_commutant_is_trivial() {
        let sys = ce(4).unwrap();
        assert_eq!(sys.commutant_m().unwrap().len(), 1);
    }

    #[test]
    fn ce_is_not_separating() {
        let sys = ce(4).unwrap();
        assert!(!sys.is_separating().unwrap());
    }

    #[test]
    fn random_unitary_is_unitary_and_deterministic() {
        let u1 = random_unitary(5, 42);
        let u2 = random_unitary(5, 42);
        let u3 = random_unitary(5, 43);
        assert!(u1.unitarity_residual() < 1e-12);
        assert_eq!(u1.data, u2.data);
        assert!(u1.sub(&u3).max_norm() > 1e-3);
    }

    #[test]
    fn json_round_trip_preserves_the_system() {
        let sys = rot(3, 1).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("sys.json");
        save_system(&sys, &path).unwrap();
        let loaded = load_system(&path).unwrap();
        assert_eq!(loaded.dim, 3);
        assert!(loaded.u.sub(&sys.u).max_norm() < 1e-15);
        assert!(loaded.omega_vec.sub(&sys.omega_vec).max_norm() < 1e-15);
        assert_eq!(loaded.m_generators.len(), 3);
    }

    #[test]
    fn model_record_parses_from_json() {
        let desc: SystemDescription =
            serde_json::from_str(r#"{"model": "ROT", "d": 6, "p": 2}"#).unwrap();
        let sys = realize(&desc).unwrap();
        assert_eq!(sys.dim, 6);
        assert_eq!(sys.label, "ROT(6,2)");
    }

    #[test]
    fn tracial_with_random_unitary_validates() {
        let sys = random_tracial(2, 7).unwrap();
        assert_eq!(sys.dim, 4);
        assert!(sys.is_separating().unwrap());
    }
}
