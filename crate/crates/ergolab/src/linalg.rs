//! Dense complex linear algebra.
//!
//! Everything downstream works with one matrix type: a dense, row-major
//! complex matrix. The eigensolver for normal matrices splits its input into
//! the commuting Hermitian pair H = (M + M†)/2 and K = (M − M†)/(2i),
//! diagonalizes H by cyclic Jacobi rotations, and then diagonalizes K block
//! by block on the eigenspaces of H. This keeps the whole stack free of
//! external solver dependencies and bit-for-bit deterministic: identical
//! inputs take identical rotation paths.

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Convenience constructor for a complex scalar.
pub fn c64(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// Absolute unitarity tolerance for orthonormality checks.
pub const UNIT_TOL: f64 = 1e-10;

/// General residual tolerance used by structural checks.
pub const CHECK_TOL: f64 = 1e-8;

/// Tolerance for merging eigenvalues on the unit circle.
pub const CLUSTER_TOL: f64 = 1e-8;

/// Relative kernel threshold: singular values below `RANK_TOL_REL * ‖M‖_F`
/// count as zero.
pub const RANK_TOL_REL: f64 = 1e-9;

/// Relative eigen-residual bound: ‖Mv − λv‖ ≤ `EIG_TOL_REL * ‖M‖_F`.
pub const EIG_TOL_REL: f64 = 1e-9;

/// Tolerance for matching phase products against 1 when pairing eigenvalues
/// with exponents (k1, k2).
pub fn pair_tol(k1: i64, k2: i64) -> f64 {
    CLUSTER_TOL * (k1.unsigned_abs() + k2.unsigned_abs()) as f64
}

/// Dense row-major complex matrix. Column vectors are d×1 matrices.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexMatrix {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<Complex64>,
}

impl ComplexMatrix {
    /// Zero matrix of the given shape.
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![Complex64::new(0.0, 0.0); rows * cols],
        }
    }

    /// Identity matrix.
    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = Complex64::new(1.0, 0.0);
        }
        m
    }

    /// Build from a closure over (row, col).
    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> Complex64) -> Self {
        let mut m = Self::zeros(rows, cols);
        for i in 0..rows {
            for j in 0..cols {
                m[(i, j)] = f(i, j);
            }
        }
        m
    }

    /// Square matrix with the given diagonal.
    pub fn from_diag(diag: &[Complex64]) -> Self {
        let n = diag.len();
        let mut m = Self::zeros(n, n);
        for (i, &v) in diag.iter().enumerate() {
            m[(i, i)] = v;
        }
        m
    }

    /// Column vector with a single 1 at `index`.
    pub fn basis_vector(dim: usize, index: usize) -> Self {
        let mut v = Self::zeros(dim, 1);
        v[(index, 0)] = Complex64::new(1.0, 0.0);
        v
    }

    /// Column vector from a slice.
    pub fn column(entries: &[Complex64]) -> Self {
        Self {
            rows: entries.len(),
            cols: 1,
            data: entries.to_vec(),
        }
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn is_vector(&self) -> bool {
        self.cols == 1
    }

    /// Reject non-finite entries.
    pub fn validate_finite(&self) -> Result<()> {
        for v in &self.data {
            if !v.re.is_finite() || !v.im.is_finite() {
                return Err(Error::ConfigError("matrix contains non-finite entries".into()));
            }
        }
        Ok(())
    }

    /// Conjugate transpose.
    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)].conj())
    }

    /// Transpose without conjugation.
    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)])
    }

    /// Entrywise complex conjugate.
    pub fn conj(&self) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|v| v.conj()).collect(),
        }
    }

    pub fn scale(&self, s: Complex64) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|v| v * s).collect(),
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols), "shape mismatch in add");
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&other.data).map(|(a, b)| a + b).collect(),
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols), "shape mismatch in sub");
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&other.data).map(|(a, b)| a - b).collect(),
        }
    }

    /// Matrix product.
    pub fn mul(&self, other: &Self) -> Self {
        assert_eq!(self.cols, other.rows, "shape mismatch in mul");
        let mut out = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a.norm_sqr() == 0.0 {
                    continue;
                }
                for j in 0..other.cols {
                    out[(i, j)] += a * other[(k, j)];
                }
            }
        }
        out
    }

    /// Commutator [A, B] = AB − BA.
    pub fn commutator(&self, other: &Self) -> Self {
        self.mul(other).sub(&other.mul(self))
    }

    /// Integer power of a square matrix; negative exponents use the adjoint,
    /// so they are only meaningful for unitary input.
    pub fn unitary_pow(&self, exp: i64) -> Self {
        assert!(self.is_square(), "power of a non-square matrix");
        let base = if exp >= 0 { self.clone() } else { self.adjoint() };
        let mut out = Self::identity(self.rows);
        for _ in 0..exp.unsigned_abs() {
            out = out.mul(&base);
        }
        out
    }

    pub fn trace(&self) -> Complex64 {
        assert!(self.is_square(), "trace of a non-square matrix");
        (0..self.rows).map(|i| self[(i, i)]).sum()
    }

    /// Frobenius norm.
    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Largest entry modulus.
    pub fn max_norm(&self) -> f64 {
        self.data.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    /// Frobenius inner product ⟨A, B⟩ = tr(B† A).
    pub fn frobenius_inner(&self, other: &Self) -> Complex64 {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols), "shape mismatch in inner");
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| a * b.conj())
            .sum()
    }

    /// Vector two-norm (any shape is flattened).
    pub fn two_norm(&self) -> f64 {
        self.frobenius_norm()
    }

    /// Extract column `j` as a column vector.
    pub fn column_at(&self, j: usize) -> Self {
        Self::from_fn(self.rows, 1, |i, _| self[(i, j)])
    }

    /// Horizontally stack columns into one matrix.
    pub fn from_columns(cols: &[ComplexMatrix]) -> Self {
        assert!(!cols.is_empty(), "no columns given");
        let rows = cols[0].rows;
        let mut m = Self::zeros(rows, cols.len());
        for (j, cvec) in cols.iter().enumerate() {
            assert_eq!(cvec.rows, rows, "column length mismatch");
            assert_eq!(cvec.cols, 1, "from_columns expects column vectors");
            for i in 0..rows {
                m[(i, j)] = cvec[(i, 0)];
            }
        }
        m
    }

    /// Residual of unitarity, ‖U†U − I‖_max.
    pub fn unitarity_residual(&self) -> f64 {
        assert!(self.is_square(), "unitarity of a non-square matrix");
        self.adjoint()
            .mul(self)
            .sub(&Self::identity(self.rows))
            .max_norm()
    }
}

impl std::ops::Index<(usize, usize)> for ComplexMatrix {
    type Output = Complex64;
    fn index(&self, (i, j): (usize, usize)) -> &Complex64 {
        &self.data[i * self.cols + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for ComplexMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Complex64 {
        &mut self.data[i * self.cols + j]
    }
}

/// Kronecker product with row-major index convention:
/// entry ((i·p + k), (j·q + l)) = a(i,j)·b(k,l) for b of shape p×q.
pub fn tensor(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    let mut out = ComplexMatrix::zeros(a.rows * b.rows, a.cols * b.cols);
    for i in 0..a.rows {
        for j in 0..a.cols {
            let av = a[(i, j)];
            if av.norm_sqr() == 0.0 {
                continue;
            }
            for k in 0..b.rows {
                for l in 0..b.cols {
                    out[(i * b.rows + k, j * b.cols + l)] = av * b[(k, l)];
                }
            }
        }
    }
    out
}

/// Eigendecomposition result. Columns of `vectors` are orthonormal
/// eigenvectors matching `values` in order.
#[derive(Debug, Clone)]
pub struct EigenSystem {
    pub values: Vec<Complex64>,
    pub vectors: ComplexMatrix,
}

impl EigenSystem {
    /// Largest eigen-equation residual, max_j ‖M v_j − λ_j v_j‖.
    pub fn residual(&self, m: &ComplexMatrix) -> f64 {
        let mv = m.mul(&self.vectors);
        let mut worst = 0.0_f64;
        for (j, lam) in self.values.iter().enumerate() {
            let mut acc = 0.0;
            for i in 0..m.rows {
                acc += (mv[(i, j)] - lam * self.vectors[(i, j)]).norm_sqr();
            }
            worst = worst.max(acc.sqrt());
        }
        worst
    }
}

const JACOBI_MAX_SWEEPS: usize = 128;

/// Off-diagonal Frobenius norm of a square matrix.
fn off_diagonal_norm(a: &ComplexMatrix) -> f64 {
    let mut acc = 0.0;
    for i in 0..a.rows {
        for j in 0..a.cols {
            if i != j {
                acc += a[(i, j)].norm_sqr();
            }
        }
    }
    acc.sqrt()
}

/// Eigendecomposition of a Hermitian matrix by cyclic Jacobi rotations.
/// Returns real eigenvalues in ascending order with matching orthonormal
/// eigenvector columns.
pub fn hermitian_eig(a: &ComplexMatrix) -> Result<(Vec<f64>, ComplexMatrix)> {
    assert!(a.is_square(), "hermitian_eig expects a square matrix");
    let n = a.rows;
    if n == 0 {
        return Ok((Vec::new(), ComplexMatrix::zeros(0, 0)));
    }
    let scale = a.frobenius_norm();
    let mut w = a.clone();
    // Symmetrize to shed roundoff asymmetry from upstream arithmetic.
    for i in 0..n {
        for j in 0..n {
            let s = (w[(i, j)] + w[(j, i)].conj()) * 0.5;
            w[(i, j)] = s;
            w[(j, i)] = s.conj();
        }
    }
    let mut v = ComplexMatrix::identity(n);
    let stop = 1e-14 * scale.max(1e-300);

    let mut sweeps = 0;
    while off_diagonal_norm(&w) > stop {
        if sweeps >= JACOBI_MAX_SWEEPS {
            return Err(Error::NoConvergence {
                what: "hermitian Jacobi eigensolve",
                sweeps,
                residual: off_diagonal_norm(&w),
            });
        }
        sweeps += 1;
        for p in 0..n {
            for q in (p + 1)..n {
                let beta = w[(p, q)];
                let babs = beta.norm();
                if babs <= stop / (n as f64 * n as f64).max(1.0) {
                    continue;
                }
                let alpha = w[(p, p)].re;
                let gamma = w[(q, q)].re;
                let phase = beta / babs;
                let tau = (gamma - alpha) / (2.0 * babs);
                // Small-magnitude root of t² − 2τt − 1 = 0 for this rotation
                // convention.
                let t = if tau >= 0.0 {
                    -1.0 / (tau + (1.0 + tau * tau).sqrt())
                } else {
                    1.0 / (-tau + (1.0 + tau * tau).sqrt())
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;

                // Unitary rotation G with columns
                //   (c, s·conj(phase)) and (−s, c·conj(phase))
                // chosen so that G† W G zeroes the (p, q) entry.
                let g_pp = Complex64::new(c, 0.0);
                let g_pq = Complex64::new(-s, 0.0);
                let g_qp = phase.conj() * s;
                let g_qq = phase.conj() * c;

                // W <- W · G on columns p, q.
                for k in 0..n {
                    let wkp = w[(k, p)];
                    let wkq = w[(k, q)];
                    w[(k, p)] = wkp * g_pp + wkq * g_qp;
                    w[(k, q)] = wkp * g_pq + wkq * g_qq;
                }
                // W <- G† · W on rows p, q.
                for k in 0..n {
                    let wpk = w[(p, k)];
                    let wqk = w[(q, k)];
                    w[(p, k)] = g_pp.conj() * wpk + g_qp.conj() * wqk;
                    w[(q, k)] = g_pq.conj() * wpk + g_qq.conj() * wqk;
                }
                // Accumulate eigenvectors.
                for k in 0..n {
                    let vkp = v[(k, p)];
                    let vkq = v[(k, q)];
                    v[(k, p)] = vkp * g_pp + vkq * g_qp;
                    v[(k, q)] = vkp * g_pq + vkq * g_qq;
                }
                // Pin the worked entries to keep the sweep contraction clean.
                w[(p, q)] = Complex64::new(0.0, 0.0);
                w[(q, p)] = Complex64::new(0.0, 0.0);
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    let diag: Vec<f64> = (0..n).map(|i| w[(i, i)].re).collect();
    order.sort_by(|&i, &j| diag[i].partial_cmp(&diag[j]).unwrap().then(i.cmp(&j)));
    let values: Vec<f64> = order.iter().map(|&i| diag[i]).collect();
    let vectors = ComplexMatrix::from_fn(n, n, |i, j| v[(i, order[j])]);
    Ok((values, vectors))
}

/// Eigendecomposition of a normal matrix.
///
/// The input is split into the commuting Hermitian pair
/// H = (M + M†)/2 and K = (M − M†)/(2i). H is diagonalized first; K is then
/// diagonalized on each (numerically merged) eigenspace of H, which yields a
/// joint eigenbasis and eigenvalues λ = h + i·k.
///
/// `tol` gates the normality test: ‖MM† − M†M‖_max must not exceed
/// tol·‖M‖_F.
pub fn eig_normal(m: &ComplexMatrix, tol: f64) -> Result<EigenSystem> {
    assert!(m.is_square(), "eig_normal expects a square matrix");
    let n = m.rows;
    let scale = m.frobenius_norm();
    if scale == 0.0 {
        return Ok(EigenSystem {
            values: vec![Complex64::new(0.0, 0.0); n],
            vectors: ComplexMatrix::identity(n),
        });
    }
    let normality = m
        .mul(&m.adjoint())
        .sub(&m.adjoint().mul(m))
        .max_norm();
    if normality > tol * scale {
        return Err(Error::NotNormal {
            residual: normality,
            tol: tol * scale,
        });
    }

    let h = m.add(&m.adjoint()).scale(c64(0.5, 0.0));
    let k = m.sub(&m.adjoint()).scale(c64(0.0, -0.5));

    let (hvals, mut vecs) = hermitian_eig(&h)?;

    // Merge eigenvalues of H that are too close for their eigenvectors to be
    // individually meaningful, then diagonalize K inside each merged block.
    let group_gap = 1e-10 * scale;
    let mut kvals = vec![0.0_f64; n];
    let mut start = 0;
    while start < n {
        let mut end = start + 1;
        while end < n && hvals[end] - hvals[end - 1] <= group_gap {
            end += 1;
        }
        let width = end - start;
        if width == 1 {
            let col = vecs.column_at(start);
            kvals[start] = col.adjoint().mul(&k.mul(&col))[(0, 0)].re;
        } else {
            let block = ComplexMatrix::from_fn(n, width, |i, j| vecs[(i, start + j)]);
            let compressed = block.adjoint().mul(&k.mul(&block));
            let (bk, bv) = hermitian_eig(&compressed)?;
            let rotated = block.mul(&bv);
            for j in 0..width {
                kvals[start + j] = bk[j];
                for i in 0..n {
                    vecs[(i, start + j)] = rotated[(i, j)];
                }
            }
        }
        start = end;
    }

    let mut values = Vec::with_capacity(n);
    for j in 0..n {
        let col = vecs.column_at(j);
        let hray = col.adjoint().mul(&h.mul(&col))[(0, 0)].re;
        values.push(Complex64::new(hray, kvals[j]));
    }

    let sys = EigenSystem { values, vectors: vecs };
    let resid = sys.residual(m);
    if resid > EIG_TOL_REL * scale {
        return Err(Error::NoConvergence {
            what: "normal eigensolve residual",
            sweeps: JACOBI_MAX_SWEEPS,
            residual: resid,
        });
    }
    if sys.vectors.unitarity_residual() > UNIT_TOL {
        return Err(Error::NoConvergence {
            what: "normal eigensolve orthonormality",
            sweeps: JACOBI_MAX_SWEEPS,
            residual: sys.vectors.unitarity_residual(),
        });
    }
    Ok(sys)
}

/// Single-linkage clustering of complex points: values within chain distance
/// `tol` land in the same cluster. Returns (representative indices,
/// assignment); the representative is the smallest-index member and clusters
/// are ordered by it. Errs when the nearest cross-cluster distance is within
/// 10% of the merge tolerance, because the partition would then flip under
/// perturbation of that size.
pub fn cluster_points(values: &[Complex64], tol: f64) -> Result<(Vec<usize>, Vec<usize>)> {
    let n = values.len();
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(parent: &mut Vec<usize>, mut x: usize) -> usize {
        while parent[x] != x {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        x
    }
    for i in 0..n {
        for j in (i + 1)..n {
            if (values[i] - values[j]).norm() <= tol {
                let (ri, rj) = (find(&mut parent, i), find(&mut parent, j));
                if ri != rj {
                    parent[ri.max(rj)] = ri.min(rj);
                }
            }
        }
    }
    let mut nearest_cross = f64::INFINITY;
    for i in 0..n {
        for j in (i + 1)..n {
            if find(&mut parent, i) != find(&mut parent, j) {
                nearest_cross = nearest_cross.min((values[i] - values[j]).norm());
            }
        }
    }
    if nearest_cross < 1.1 * tol {
        return Err(Error::AmbiguousClustering {
            gap: nearest_cross,
            tol,
        });
    }

    let mut roots: Vec<usize> = Vec::new();
    let mut assignment = vec![0usize; n];
    for i in 0..n {
        let r = find(&mut parent, i);
        let idx = match roots.iter().position(|&x| x == r) {
            Some(idx) => idx,
            None => {
                roots.push(r);
                roots.len() - 1
            }
        };
        assignment[i] = idx;
    }
    Ok((roots, assignment))
}

/// Single-linkage clustering of unimodular values.
///
/// Values within chain distance `tol` land in the same cluster. The cluster
/// representative is its smallest-index member, rescaled to modulus one.
/// Returns (representatives, assignment) where assignment\[i\] is the cluster
/// index of values\[i\], and clusters are ordered by smallest member index.
pub fn cluster_unit_circle(values: &[Complex64], tol: f64) -> Result<(Vec<Complex64>, Vec<usize>)> {
    for v in values {
        let modulus = v.norm();
        if (modulus - 1.0).abs() > 10.0 * tol {
            return Err(Error::NotUnimodular {
                value: format!("{v}"),
                modulus,
            });
        }
    }
    let (roots, assignment) = cluster_points(values, tol)?;
    let representatives = roots
        .iter()
        .map(|&r| values[r] / values[r].norm())
        .collect();
    Ok((representatives, assignment))
}

/// Orthonormal basis of the (numerical) kernel of `m`.
///
/// Columns v satisfy ‖M v‖ ≤ tol·‖M‖_F; the kernel dimension is the number
/// of singular values at or below that threshold.
pub fn null_space(m: &ComplexMatrix, tol: f64) -> Result<ComplexMatrix> {
    null_space_scaled(m, tol, m.frobenius_norm())
}

/// Kernel basis with the tolerance anchored to an explicit problem scale.
///
/// Columns v satisfy ‖M v‖ ≤ tol·scale. The usual relative rule
/// tol·‖M‖_F breaks down when `m` is a difference like W − I that is
/// itself at roundoff level: the threshold collapses with the matrix and
/// the kernel comes back empty even though every vector is fixed to
/// machine precision. Passing the scale of W (‖W‖_F, here √dim for a
/// unitary) keeps the acceptance threshold meaningful in that regime.
pub fn null_space_scaled(m: &ComplexMatrix, tol: f64, scale: f64) -> Result<ComplexMatrix> {
    let n = m.cols;
    if m.frobenius_norm() == 0.0 {
        return Ok(ComplexMatrix::identity(n));
    }
    let gram = m.adjoint().mul(m);
    let (vals, vecs) = hermitian_eig(&gram)?;
    // Threshold on Gram eigenvalues λ = ‖Mv‖². The second term is the
    // roundoff floor of the Gram eigenvalues themselves: without it, squaring
    // the tolerance would demand more accuracy than f64 can represent.
    let thresh = (tol * scale) * (tol * scale) + 64.0 * f64::EPSILON * gram.frobenius_norm();
    let mut cols = Vec::new();
    for (j, &lam) in vals.iter().enumerate() {
        if lam <= thresh {
            cols.push(vecs.column_at(j));
        }
    }
    if cols.is_empty() {
        return Ok(ComplexMatrix::zeros(n, 0));
    }
    Ok(ComplexMatrix::from_columns(&cols))
}

/// Solve A·X = B for square A by LU decomposition with partial pivoting.
pub fn solve(a: &ComplexMatrix, b: &ComplexMatrix) -> Result<ComplexMatrix> {
    assert!(a.is_square(), "solve expects a square system");
    assert_eq!(a.rows, b.rows, "shape mismatch in solve");
    let n = a.rows;
    let mut lu = a.clone();
    let mut x = b.clone();
    for k in 0..n {
        let mut pivot = k;
        let mut best = lu[(k, k)].norm();
        for i in (k + 1)..n {
            let cand = lu[(i, k)].norm();
            if cand > best {
                best = cand;
                pivot = i;
            }
        }
        if best < 1e-300 {
            return Err(Error::ConfigError("singular linear system".into()));
        }
        if pivot != k {
            for j in 0..n {
                let tmp = lu[(k, j)];
                lu[(k, j)] = lu[(pivot, j)];
                lu[(pivot, j)] = tmp;
            }
            for j in 0..x.cols {
                let tmp = x[(k, j)];
                x[(k, j)] = x[(pivot, j)];
                x[(pivot, j)] = tmp;
            }
        }
        let diag = lu[(k, k)];
        for i in (k + 1)..n {
            let factor = lu[(i, k)] / diag;
            if factor.norm_sqr() == 0.0 {
                continue;
            }
            for j in k..n {
                let v = lu[(k, j)];
                lu[(i, j)] -= factor * v;
            }
            for j in 0..x.cols {
                let v = x[(k, j)];
                x[(i, j)] -= factor * v;
            }
        }
    }
    for k in (0..n).rev() {
        for j in 0..x.cols {
            let mut acc = x[(k, j)];
            for i in (k + 1)..n {
                acc -= lu[(k, i)] * x[(i, j)];
            }
            x[(k, j)] = acc / lu[(k, k)];
        }
    }
    Ok(x)
}

/// Operator (spectral) norm via the largest singular value.
pub fn operator_norm(m: &ComplexMatrix) -> f64 {
    if m.frobenius_norm() == 0.0 {
        return 0.0;
    }
    let gram = m.adjoint().mul(m);
    match hermitian_eig(&gram) {
        Ok((vals, _)) => vals.last().copied().unwrap_or(0.0).max(0.0).sqrt(),
        Err(_) => m.frobenius_norm(),
    }
}
