//! Dense symmetric linear algebra.
//!
//! Provides the factorizations the filter solvers are built on: Cholesky,
//! a cyclic Jacobi eigendecomposition for symmetric matrices, reductions of
//! generalized symmetric-definite pencils to standard form, the smallest
//! positive eigenpair of a pencil with a positive definite left member, and
//! eigenvalue clipping to repair near-definite matrices.
//!
//! Everything here is dense and sequential. The problems in scope are small
//! (filter pencils up to ~100 channels, Gram matrices up to a few hundred
//! trials), where the Jacobi method is simple, foolproof for symmetric
//! input, and delivers eigenvectors orthonormal to near machine precision.
//!
//! Determinism: eigenvalues are returned in ascending order and every
//! returned eigenvector is sign-fixed so that its largest-magnitude entry
//! is nonnegative (ties broken by the lowest index).

use ndarray::{Array1, Array2};

use crate::error::{Error, Result};

/// Cholesky pivot must exceed this fraction of the largest diagonal entry.
const CHOLESKY_PIVOT_EPS: f64 = 1e-13;

/// Reciprocal eigenvalues with magnitude at or below this are treated as
/// infinite generalized eigenvalues and skipped.
const MU_TOL: f64 = 1e-12;

/// Jacobi stops once the off-diagonal Frobenius norm falls below this
/// multiple of the matrix Frobenius norm.
const JACOBI_TOL: f64 = 1e-15;

/// Jacobi converges quadratically; typical inputs need fewer than 10 sweeps.
const JACOBI_MAX_SWEEPS: usize = 64;

/// Dense symmetric matrix with exact entrywise symmetry.
///
/// The constructor symmetrizes its input as `(M + Mᵀ)/2`, so
/// `entries[i][j] == entries[j][i]` holds bitwise for every instance.
/// All arithmetic provided here preserves that property exactly.
#[derive(Debug, Clone, PartialEq)]
pub struct SymmetricMatrix {
    data: Array2<f64>,
}

impl SymmetricMatrix {
    /// Builds a symmetric matrix from an arbitrary square matrix by
    /// averaging with its transpose.
    ///
    /// Fails with [`Error::NonFinite`] if any entry is NaN or infinite.
    pub fn new(m: Array2<f64>) -> Result<Self> {
        let n = m.nrows();
        assert_eq!(n, m.ncols(), "symmetric matrix must be square");
        if m.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite);
        }
        let mut data = Array2::zeros((n, n));
        for i in 0..n {
            data[(i, i)] = m[(i, i)];
            for j in (i + 1)..n {
                let v = 0.5 * (m[(i, j)] + m[(j, i)]);
                data[(i, j)] = v;
                data[(j, i)] = v;
            }
        }
        Ok(Self { data })
    }

    /// Builds from a function of the index pair, evaluated only on `i <= j`
    /// and mirrored, so symmetry is exact by construction.
    pub fn from_upper_fn(n: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut data = Array2::zeros((n, n));
        for i in 0..n {
            for j in i..n {
                let v = f(i, j);
                data[(i, j)] = v;
                data[(j, i)] = v;
            }
        }
        Self { data }
    }

    /// The identity matrix of the given order.
    pub fn identity(n: usize) -> Self {
        Self {
            data: Array2::eye(n),
        }
    }

    /// Zero matrix of the given order.
    pub fn zeros(n: usize) -> Self {
        Self {
            data: Array2::zeros((n, n)),
        }
    }

    /// Diagonal matrix from the given entries.
    pub fn from_diagonal(diag: &[f64]) -> Self {
        let n = diag.len();
        let mut data = Array2::zeros((n, n));
        for (i, &d) in diag.iter().enumerate() {
            data[(i, i)] = d;
        }
        Self { data }
    }

    /// Matrix order `n`.
    pub fn order(&self) -> usize {
        self.data.nrows()
    }

    /// Entry access.
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[(i, j)]
    }

    /// Borrow the underlying storage.
    pub fn as_array(&self) -> &Array2<f64> {
        &self.data
    }

    /// Consume into the underlying storage.
    pub fn into_array(self) -> Array2<f64> {
        self.data
    }

    /// Matrix-vector product `S x`.
    pub fn matvec(&self, x: &Array1<f64>) -> Array1<f64> {
        self.data.dot(x)
    }

    /// Quadratic form `xᵀ S x`.
    pub fn quad_form(&self, x: &Array1<f64>) -> f64 {
        x.dot(&self.data.dot(x))
    }

    /// Sum of diagonal entries.
    pub fn trace(&self) -> f64 {
        self.data.diag().sum()
    }

    /// Frobenius norm.
    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    /// Largest entry magnitude.
    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |acc, v| acc.max(v.abs()))
    }

    /// Entrywise sum; exact symmetry is preserved.
    pub fn add(&self, other: &Self) -> Self {
        assert_eq!(self.order(), other.order());
        Self {
            data: &self.data + &other.data,
        }
    }

    /// Entrywise difference; exact symmetry is preserved.
    pub fn sub(&self, other: &Self) -> Self {
        assert_eq!(self.order(), other.order());
        Self {
            data: &self.data - &other.data,
        }
    }

    /// Entrywise scaling; exact symmetry is preserved.
    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            data: &self.data * factor,
        }
    }

    /// True when all entries are finite.
    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }
}

/// Lower-triangular Cholesky factor `L` with `L Lᵀ = S`.
#[derive(Debug, Clone)]
pub struct LowerTriangular {
    l: Array2<f64>,
}

impl LowerTriangular {
    /// Matrix order.
    pub fn order(&self) -> usize {
        self.l.nrows()
    }

    /// Borrow the factor.
    pub fn as_array(&self) -> &Array2<f64> {
        &self.l
    }

    /// Solves `L y = b` by forward substitution.
    pub fn solve_lower(&self, b: &Array1<f64>) -> Array1<f64> {
        let n = self.order();
        let mut y = b.clone();
        for i in 0..n {
            let mut acc = y[i];
            for k in 0..i {
                acc -= self.l[(i, k)] * y[k];
            }
            y[i] = acc / self.l[(i, i)];
        }
        y
    }

    /// Solves `Lᵀ x = b` by back substitution.
    pub fn solve_lower_transpose(&self, b: &Array1<f64>) -> Array1<f64> {
        let n = self.order();
        let mut x = b.clone();
        for i in (0..n).rev() {
            let mut acc = x[i];
            for k in (i + 1)..n {
                acc -= self.l[(k, i)] * x[k];
            }
            x[i] = acc / self.l[(i, i)];
        }
        x
    }

    /// Computes `L⁻¹ M` column by column.
    fn solve_lower_matrix(&self, m: &Array2<f64>) -> Array2<f64> {
        let n = self.order();
        let cols = m.ncols();
        let mut out = Array2::zeros((n, cols));
        for j in 0..cols {
            let col = self.solve_lower(&m.column(j).to_owned());
            out.column_mut(j).assign(&col);
        }
        out
    }

    /// Reduces the symmetric `M` to `L⁻¹ M L⁻ᵀ`, re-symmetrized exactly.
    fn congruence_reduce(&self, m: &SymmetricMatrix) -> Result<SymmetricMatrix> {
        // L X = M, then L Y = Xᵀ gives Y = L⁻¹ M L⁻ᵀ up to rounding.
        let x = self.solve_lower_matrix(m.as_array());
        let y = self.solve_lower_matrix(&x.t().to_owned());
        SymmetricMatrix::new(y)
    }
}

/// Eigenvalues in ascending order paired with their eigenvectors.
///
/// Column `i` of `vectors` belongs to `values[i]`. For the standard problem
/// the columns are orthonormal; for a definite pencil they are orthonormal
/// in the metric of the right-hand matrix.
#[derive(Debug, Clone)]
pub struct EigenPairs {
    pub values: Vec<f64>,
    pub vectors: Array2<f64>,
}

/// Cholesky factorization of a symmetric positive definite matrix.
///
/// Fails with [`Error::NotPositiveDefinite`] when a pivot drops to or below
/// `1e-13` times the largest diagonal entry.
pub fn cholesky(s: &SymmetricMatrix) -> Result<LowerTriangular> {
    let n = s.order();
    let max_diag = (0..n).fold(0.0f64, |acc, i| acc.max(s.get(i, i)));
    let pivot_floor = CHOLESKY_PIVOT_EPS * max_diag;
    let mut l = Array2::zeros((n, n));
    for j in 0..n {
        let mut d = s.get(j, j);
        for k in 0..j {
            d -= l[(j, k)] * l[(j, k)];
        }
        if d <= pivot_floor {
            return Err(Error::NotPositiveDefinite("Cholesky pivot vanished"));
        }
        let diag = d.sqrt();
        l[(j, j)] = diag;
        for i in (j + 1)..n {
            let mut v = s.get(i, j);
            for k in 0..j {
                v -= l[(i, k)] * l[(j, k)];
            }
            l[(i, j)] = v / diag;
        }
    }
    Ok(LowerTriangular { l })
}

/// Makes the largest-magnitude entry of each column nonnegative, ties
/// broken by the lowest index. Keeps golden tests deterministic.
fn fix_column_signs(vectors: &mut Array2<f64>) {
    for mut col in vectors.columns_mut() {
        let mut best = 0usize;
        let mut best_abs = f64::NEG_INFINITY;
        for (i, &v) in col.iter().enumerate() {
            if v.abs() > best_abs {
                best_abs = v.abs();
                best = i;
            }
        }
        if col[best] < 0.0 {
            col.mapv_inplace(|v| -v);
        }
    }
}

/// Applies the column sign convention to a single vector.
pub(crate) fn fix_vector_sign(v: &mut Array1<f64>) {
    let mut best = 0usize;
    let mut best_abs = f64::NEG_INFINITY;
    for (i, &x) in v.iter().enumerate() {
        if x.abs() > best_abs {
            best_abs = x.abs();
            best = i;
        }
    }
    if v[best] < 0.0 {
        v.mapv_inplace(|x| -x);
    }
}

/// Cyclic Jacobi sweeps. Returns unsorted eigenvalues on the diagonal of the
/// rotated matrix and accumulated rotation columns.
fn jacobi_sweeps(mut a: Array2<f64>) -> (Array1<f64>, Array2<f64>) {
    let n = a.nrows();
    let mut v: Array2<f64> = Array2::eye(n);
    if n <= 1 {
        return (a.diag().to_owned(), v);
    }
    let frob = a.iter().map(|x| x * x).sum::<f64>().sqrt();
    if frob == 0.0 {
        return (a.diag().to_owned(), v);
    }
    for _ in 0..JACOBI_MAX_SWEEPS {
        let off: f64 = {
            let mut acc = 0.0;
            for p in 0..n - 1 {
                for q in (p + 1)..n {
                    acc += a[(p, q)] * a[(p, q)];
                }
            }
            (2.0 * acc).sqrt()
        };
        if off <= JACOBI_TOL * frob {
            break;
        }
        for p in 0..n - 1 {
            for q in (p + 1)..n {
                let apq = a[(p, q)];
                if apq == 0.0 {
                    continue;
                }
                let theta = 0.5 * (a[(q, q)] - a[(p, p)]) / apq;
                // Guard against overflow of theta^2 for huge ratios.
                let t = if theta.abs() > 1e150 {
                    0.5 / theta
                } else {
                    theta.signum() / (theta.abs() + (1.0 + theta * theta).sqrt())
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;
                let tau = s / (1.0 + c);

                let h = t * apq;
                a[(p, p)] -= h;
                a[(q, q)] += h;
                a[(p, q)] = 0.0;
                a[(q, p)] = 0.0;
                for k in 0..n {
                    if k != p && k != q {
                        let akp = a[(k, p)];
                        let akq = a[(k, q)];
                        let new_p = akp - s * (akq + tau * akp);
                        let new_q = akq + s * (akp - tau * akq);
                        a[(k, p)] = new_p;
                        a[(p, k)] = new_p;
                        a[(k, q)] = new_q;
                        a[(q, k)] = new_q;
                    }
                }
                for k in 0..n {
                    let vkp = v[(k, p)];
                    let vkq = v[(k, q)];
                    v[(k, p)] = vkp - s * (vkq + tau * vkp);
                    v[(k, q)] = vkq + s * (vkp - tau * vkq);
                }
            }
        }
    }
    (a.diag().to_owned(), v)
}

/// Full eigendecomposition of a symmetric matrix.
///
/// Eigenvalues come back ascending; eigenvectors are orthonormal columns
/// with the deterministic sign convention applied.
pub fn sym_eig(s: &SymmetricMatrix) -> Result<EigenPairs> {
    if !s.is_finite() {
        return Err(Error::NonFinite);
    }
    let n = s.order();
    let (diag, vecs) = jacobi_sweeps(s.as_array().clone());
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| diag[i].partial_cmp(&diag[j]).unwrap());
    let values: Vec<f64> = order.iter().map(|&i| diag[i]).collect();
    let mut vectors = Array2::zeros((n, n));
    for (dst, &src) in order.iter().enumerate() {
        vectors.column_mut(dst).assign(&vecs.column(src));
    }
    fix_column_signs(&mut vectors);
    Ok(EigenPairs { values, vectors })
}

/// All eigenpairs of `A x = λ B x` for symmetric `A` and positive definite
/// `B`, via the Cholesky reduction `B = L Lᵀ` to a standard symmetric
/// problem on `L⁻¹ A L⁻ᵀ`.
///
/// Eigenvalues ascending; eigenvectors are `B`-orthonormal columns.
pub fn gen_eig_definite(a: &SymmetricMatrix, b: &SymmetricMatrix) -> Result<EigenPairs> {
    assert_eq!(a.order(), b.order(), "pencil members must share the order");
    let l = cholesky(b)?;
    let reduced = l.congruence_reduce(a)?;
    let standard = sym_eig(&reduced)?;
    let n = a.order();
    let mut vectors = Array2::zeros((n, n));
    for j in 0..n {
        let x = l.solve_lower_transpose(&standard.vectors.column(j).to_owned());
        vectors.column_mut(j).assign(&x);
    }
    fix_column_signs(&mut vectors);
    Ok(EigenPairs {
        values: standard.values,
        vectors,
    })
}

/// Spectrum of `A x = λ B x` for positive definite `A` and symmetric,
/// possibly indefinite `B`, obtained through the reciprocal problem
/// `L⁻¹ B L⁻ᵀ y = μ y` with `A = L Lᵀ` and `λ = 1/μ`.
///
/// Returns the finite eigenvalues (|μ| above `1e-12`) ascending, each with
/// its eigenvector normalized to unit 2-norm.
pub(crate) fn pencil_finite_spectrum(
    a: &SymmetricMatrix,
    b: &SymmetricMatrix,
) -> Result<Vec<(f64, Array1<f64>)>> {
    assert_eq!(a.order(), b.order(), "pencil members must share the order");
    let l = cholesky(a)?;
    let reduced = l.congruence_reduce(b)?;
    let standard = sym_eig(&reduced)?;
    let mut pairs: Vec<(f64, Array1<f64>)> = Vec::new();
    for (i, &mu) in standard.values.iter().enumerate() {
        if mu.abs() <= MU_TOL {
            continue; // infinite eigenvalue
        }
        let mut x = l.solve_lower_transpose(&standard.vectors.column(i).to_owned());
        let norm = x.dot(&x).sqrt();
        if norm > 0.0 {
            x.mapv_inplace(|v| v / norm);
        }
        fix_vector_sign(&mut x);
        pairs.push((1.0 / mu, x));
    }
    pairs.sort_by(|p, q| p.0.partial_cmp(&q.0).unwrap());
    Ok(pairs)
}

/// The eigenpair of `A x = λ B x` with the smallest positive eigenvalue,
/// for positive definite `A` and symmetric (possibly indefinite) `B`.
///
/// In the reciprocal problem the smallest positive `λ` corresponds to the
/// largest positive `μ`; `μ = 0` means `λ = ∞` and is skipped. The returned
/// vector has unit 2-norm.
pub fn smallest_positive_pair(
    a: &SymmetricMatrix,
    b: &SymmetricMatrix,
) -> Result<(f64, Array1<f64>)> {
    assert_eq!(a.order(), b.order(), "pencil members must share the order");
    let l = cholesky(a)?;
    let reduced = l.congruence_reduce(b)?;
    let standard = sym_eig(&reduced)?;
    // Ascending order: the last value above the cut is the largest positive.
    let mut best: Option<usize> = None;
    for (i, &mu) in standard.values.iter().enumerate() {
        if mu > MU_TOL {
            best = Some(i);
        }
    }
    let Some(idx) = best else {
        return Err(Error::NoPositiveEigenvalue);
    };
    let mu = standard.values[idx];
    let mut x = l.solve_lower_transpose(&standard.vectors.column(idx).to_owned());
    let norm = x.dot(&x).sqrt();
    x.mapv_inplace(|v| v / norm);
    fix_vector_sign(&mut x);
    Ok((1.0 / mu, x))
}

/// Clips eigenvalues below `floor` up to `floor` and reassembles.
///
/// Returns the input unchanged when its smallest eigenvalue already meets
/// the floor, so the no-op case is exact.
pub fn pd_repair(s: &SymmetricMatrix, floor: f64) -> Result<SymmetricMatrix> {
    assert!(floor > 0.0, "repair floor must be positive");
    let eig = sym_eig(s)?;
    if eig.values[0] >= floor {
        return Ok(s.clone());
    }
    let n = s.order();
    let clipped: Vec<f64> = eig.values.iter().map(|&v| v.max(floor)).collect();
    // V diag(clipped) Vᵀ, assembled on the upper triangle.
    let repaired = SymmetricMatrix::from_upper_fn(n, |i, j| {
        (0..n)
            .map(|k| eig.vectors[(i, k)] * clipped[k] * eig.vectors[(j, k)])
            .sum()
    });
    Ok(repaired)
}
