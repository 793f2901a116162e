//! Dense complex kernels used across the crate: Hermitian eigensolver with
//! sorted output, spectral functions, SVD, and deterministic range bases.

use nalgebra::{ComplexField, SymmetricEigen, SVD};

use crate::error::{Error, Result};
use crate::scalar::{re, CMat, Real};

const MAX_SWEEPS: usize = 100_000;

/// Eigendecomposition of a Hermitian matrix with eigenvalues sorted in
/// descending order and eigenvectors as matching columns.
#[derive(Clone, Debug)]
pub struct Eigh<T: Real> {
    pub values: Vec<T>,
    pub vectors: CMat<T>,
}

pub fn hermitian_part<T: Real>(m: &CMat<T>) -> CMat<T> {
    (m + m.adjoint()) * re(T::lit(0.5))
}

/// Largest entry modulus of `m - m^H`.
pub fn hermiticity_residual<T: Real>(m: &CMat<T>) -> T {
    max_abs(&(m - m.adjoint()))
}

pub fn max_abs<T: Real>(m: &CMat<T>) -> T {
    m.iter().fold(T::zero(), |acc, z| acc.max(z.modulus()))
}

pub fn frobenius<T: Real>(m: &CMat<T>) -> T {
    m.iter().fold(T::zero(), |acc, z| acc + z.modulus_squared()).sqrt()
}

/// Eigendecomposition of the Hermitian part of `m`.
pub fn eigh<T: Real>(m: &CMat<T>) -> Result<Eigh<T>> {
    let n = m.nrows();
    if n != m.ncols() {
        return Err(Error::Shape(format!("eigh of non-square {}x{} matrix", n, m.ncols())));
    }
    if n == 0 {
        return Ok(Eigh { values: vec![], vectors: CMat::zeros(0, 0) });
    }
    let h = hermitian_part(m);
    let eig = SymmetricEigen::try_new(h, T::default_epsilon(), MAX_SWEEPS)
        .ok_or_else(|| Error::Numerical(format!("Hermitian eigensolver did not converge ({n}x{n})")))?;
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| {
        eig.eigenvalues[b]
            .partial_cmp(&eig.eigenvalues[a])
            .unwrap_or(std::cmp::Ordering::Equal)
            .then(a.cmp(&b))
    });
    let values = order.iter().map(|&j| eig.eigenvalues[j]).collect();
    let vectors = CMat::from_fn(n, n, |r, c| eig.eigenvectors[(r, order[c])]);
    Ok(Eigh { values, vectors })
}

impl<T: Real> Eigh<T> {
    /// Rebuilds `V f(Lambda) V^H`.
    pub fn map(&self, f: impl Fn(T) -> T) -> CMat<T> {
        let n = self.values.len();
        let mut scaled = self.vectors.clone();
        for (c, &v) in self.values.iter().enumerate() {
            let s = re(f(v));
            for r in 0..n {
                scaled[(r, c)] *= s;
            }
        }
        &scaled * self.vectors.adjoint()
    }

    pub fn min(&self) -> T {
        self.values.last().copied().unwrap_or_else(T::zero)
    }

    pub fn max(&self) -> T {
        self.values.first().copied().unwrap_or_else(T::zero)
    }
}

/// Square root of a Hermitian matrix after clipping its spectrum to
/// `[lo, hi]`. Returns the root and the largest clip applied.
pub fn sqrt_clipped<T: Real>(m: &CMat<T>, lo: T, hi: T) -> Result<(CMat<T>, T)> {
    let e = eigh(m)?;
    let clip = e
        .values
        .iter()
        .fold(T::zero(), |acc, &v| acc.max(lo - v).max(v - hi));
    Ok((e.map(|v| v.max(lo).min(hi).sqrt()), clip))
}

/// Full SVD with singular values in descending order.
pub struct Svd<T: Real> {
    pub u: CMat<T>,
    pub sigma: Vec<T>,
    pub v: CMat<T>,
}

pub fn svd<T: Real>(m: &CMat<T>) -> Result<Svd<T>> {
    let (r, c) = m.shape();
    if r == 0 || c == 0 {
        return Ok(Svd { u: CMat::zeros(r, 0), sigma: vec![], v: CMat::zeros(c, 0) });
    }
    let s = SVD::try_new(m.clone(), true, true, T::default_epsilon(), MAX_SWEEPS)
        .ok_or_else(|| Error::Numerical(format!("SVD did not converge ({r}x{c})")))?;
    let u = s.u.ok_or_else(|| Error::Numerical("SVD returned no left vectors".into()))?;
    let vt = s.v_t.ok_or_else(|| Error::Numerical("SVD returned no right vectors".into()))?;
    Ok(Svd { u, sigma: s.singular_values.iter().copied().collect(), v: vt.adjoint() })
}

/// Orthonormal basis of the range of a Hermitian projector, built by
/// column-pivoted Gram-Schmidt on the projector's own columns.
///
/// Pivots go to the column with the largest residual norm, ties to the lowest
/// index. The pivot entry of every basis vector is real and positive, so the
/// result is independent of any eigensolver phase convention.
pub fn projector_basis<T: Real>(p: &CMat<T>, rank: usize) -> CMat<T> {
    let n = p.nrows();
    let mut basis = CMat::<T>::zeros(n, rank);
    let mut residual = p.clone();
    for k in 0..rank {
        let mut best = 0;
        let mut best_norm = T::zero();
        for j in 0..n {
            let nj = residual.column(j).norm();
            if nj > best_norm {
                best_norm = nj;
                best = j;
            }
        }
        if best_norm <= T::zero() {
            break;
        }
        let mut v = residual.column(best).into_owned();
        // Second orthogonalisation pass against the accepted vectors.
        for prev in 0..k {
            let b = basis.column(prev);
            let coeff = b.dotc(&v);
            v -= b * coeff;
        }
        let nv = v.norm();
        if nv <= T::zero() {
            break;
        }
        v /= re(nv);
        for j in 0..n {
            let coeff = v.dotc(&residual.column(j));
            let col = residual.column(j) - &v * coeff;
            residual.set_column(j, &col);
        }
        basis.set_column(k, &v);
    }
    basis
}

/// Orthonormal basis of the orthogonal complement of the column span of an
/// orthonormal `q` (n x r), with the same pivoting convention as
/// [`projector_basis`].
pub fn complement_basis<T: Real>(q: &CMat<T>) -> CMat<T> {
    let n = q.nrows();
    let p = CMat::<T>::identity(n, n) - q * q.adjoint();
    projector_basis(&hermitian_part(&p), n - q.ncols())
}

pub fn kron<T: Real>(a: &CMat<T>, b: &CMat<T>) -> CMat<T> {
    a.kronecker(b)
}

/// Numerical rank of a Hermitian projector from its trace.
pub fn projector_rank<T: Real>(p: &CMat<T>) -> usize {
    let t = p.trace().re.into_f64();
    if t <= 0.0 {
        0
    } else {
        t.round() as usize
    }
}
